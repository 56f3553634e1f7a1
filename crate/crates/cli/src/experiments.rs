use std::thread;

use serde::Serialize;
use serde_json::{json, Value};

use ics_transfer::contraction::{empirical_rate, gibbs_measure, spectral_gap_decay, ContractionConstants};
use ics_transfer::stability::{
    entropy_stability, gibbs_stability, lift_lemma_check, max_entropy_stability, tilt_operator, StabilityReport,
};
use ics_transfer::transfer::normalize;
use ics_transfer::transport::MASS_TOLERANCE;
use ics_transfer::{w1, wasserstein1, Error, Grid, Ics, NormalizedOperator, Point, Potential, TransferOperator};

use crate::config::{Job, Overrides, Task};
use crate::sample;

const EIGEN_TOL: f64 = 1e-8;
/// Agreement required between the flow solver and the closed forms, and of the duality gap.
const OT_TOLERANCE: f64 = 1e-9;

pub enum Failure {
    Config(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Input(_) => Failure::Config(e.to_string()),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

pub struct Outcome {
    pub csv: Vec<u8>,
    pub summary: Value,
    /// First row breaking an asserted bound.
    pub violation: Option<String>,
}

pub const CONSTANTS_HEADER: &[&str] = &["theta", "diam", "lip_a", "m", "n", "t", "c", "lambda"];
pub const CONTRACT_HEADER: &[&str] = &["n", "w1", "bound", "merge_slack"];
pub const GIBBS_HEADER: &[&str] = &["atom", "point", "weight"];
pub const SPECTRAL_HEADER: &[&str] = &["n", "sup", "lip", "norm", "bound"];
pub const STABILITY_HEADER: &[&str] = &["system", "perturbation", "check", "lhs", "rhs", "slack"];
pub const OT_HEADER: &[&str] = &["case", "atoms_mu", "atoms_nu", "flow", "closed", "abs_diff", "duality_gap"];

fn csv_bytes<R: Serialize>(header: &[&str], rows: &[R]) -> Result<Vec<u8>, Failure> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Compute(format!("csv: {e}"));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.into_inner().map_err(|e| Failure::Compute(format!("csv: {e}")))
}

/// Reals as numbers, words as their symbols, vectors `;`-separated.
pub fn render(p: &Point) -> String {
    match p {
        Point::Real(x) => x.to_string(),
        Point::Word(w) if w.iter().all(|s| *s < 10) => w.iter().map(|s| s.to_string()).collect(),
        Point::Word(w) => w.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("."),
        Point::Vector(v) => v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";"),
    }
}

fn operator(system: &Ics, potential: &Potential, grid_size: usize) -> Result<NormalizedOperator, Error> {
    if potential.constant_value().is_some() {
        return Ok(NormalizedOperator::per_point(system.clone(), potential.clone()));
    }
    let op = TransferOperator::new(system.clone(), potential.clone());
    normalize(&op, Grid::for_space(system.space(), grid_size)?, EIGEN_TOL)
}

fn constants_for(p: &NormalizedOperator) -> Result<ContractionConstants, Error> {
    ContractionConstants::new(p.ics().theta(), p.ics().space().diameter(), p.lipschitz().value)
}

fn eigen_summary(p: &NormalizedOperator) -> Value {
    match p.eigen() {
        Some(e) => json!({ "rho": e.rho, "residual": e.residual, "grid_size": e.values.len() }),
        None => Value::Null,
    }
}

pub fn run(job: &Job) -> Result<Outcome, Failure> {
    let mut out = match &job.task {
        Task::Constants(c) => constants(c)?,
        Task::Contract { system, potential, grid_size, x, y, n_max, merge_eps, overrides } => {
            contract(&operator(system, potential, *grid_size)?, x, y, *n_max, *merge_eps, overrides)?
        }
        Task::Gibbs { system, potential, grid_size, x0, tol, merge_eps } => {
            gibbs(&operator(system, potential, *grid_size)?, x0, *tol, *merge_eps)?
        }
        Task::SpectralGap { system, potential, observable, grid_size, x0, tol, merge_eps, n_max } => {
            let p = operator(system, potential, *grid_size)?;
            spectral_gap(&p, observable, x0, *tol, *merge_eps, *n_max)?
        }
        Task::StabilityPotential { system, perturbations, x0, tol, merge_eps } => {
            stability_potential(system, perturbations, x0, *tol, *merge_eps)?
        }
        Task::StabilityMap { system, degree, kind, perturbations, grid_size, x0, tol, merge_eps } => {
            let f2 = |eps: f64| Ics::expanding_circle_map(*degree, kind.with(eps));
            stability_map(system, &f2, perturbations, *grid_size, x0, *tol, *merge_eps)?
        }
        Task::OtSelftest { space, pairs, atoms } => ot_selftest(space, *pairs, *atoms, job.seed)?,
    };
    let map = out.summary.as_object_mut().expect("summaries are objects");
    map.insert("experiment".into(), json!(job.experiment.name()));
    map.insert("config".into(), serde_json::to_value(&job.resolved).expect("config serializes"));
    map.insert("holds".into(), json!(out.violation.is_none()));
    Ok(out)
}

fn constants(c: &ContractionConstants) -> Result<Outcome, Failure> {
    let row = (c.theta, c.diam, c.lip_a, c.m, c.n, c.t, c.c, c.lambda);
    Ok(Outcome { csv: csv_bytes(CONSTANTS_HEADER, &[row])?, summary: json!({ "constants": c }), violation: None })
}

fn contract(
    p: &NormalizedOperator,
    x: &Point,
    y: &Point,
    n_max: usize,
    merge_eps: f64,
    overrides: &Overrides,
) -> Result<Outcome, Failure> {
    let lip = overrides.lip.unwrap_or(p.lipschitz().value);
    let c = ContractionConstants::with_overrides(
        p.ics().theta(),
        p.ics().space().diameter(),
        lip,
        overrides.n,
        overrides.t,
    )?;
    let r = empirical_rate(p, x, y, n_max, merge_eps)?;
    let d0 = r.w1[0];
    let rows: Vec<(usize, f64, f64, f64)> =
        r.w1.iter().zip(&r.merge_slack).enumerate().map(|(n, (w, s))| (n, *w, c.bound(n) * d0, *s)).collect();
    let violation = rows
        .iter()
        .find(|(_, w, b, s)| w > &(b + s))
        .map(|(n, w, b, s)| format!("n={n}: W1 = {w:e} exceeds C·λⁿ·d₀ + slack = {:e}", b + s));
    let min_slack = rows.iter().map(|(_, w, b, s)| b + s - w).fold(f64::INFINITY, f64::min);
    Ok(Outcome {
        csv: csv_bytes(CONTRACT_HEADER, &rows)?,
        summary: json!({
            "constants": c,
            "lambda_emp": r.lambda_emp,
            "min_slack": min_slack,
            "eigen": eigen_summary(p),
        }),
        violation,
    })
}

fn gibbs(p: &NormalizedOperator, x0: &Point, tol: f64, merge_eps: f64) -> Result<Outcome, Failure> {
    let g = gibbs_measure(p, x0, tol, merge_eps)?;
    let rows: Vec<(usize, String, f64)> =
        g.measure.atoms().iter().enumerate().map(|(i, (x, w))| (i, render(x), *w)).collect();
    Ok(Outcome {
        csv: csv_bytes(GIBBS_HEADER, &rows)?,
        summary: json!({
            "iterations": g.iterations,
            "residual": g.residual,
            "merge_error": g.merge_error,
            "support": g.measure.len(),
            "eigen": eigen_summary(p),
        }),
        violation: None,
    })
}

fn spectral_gap(
    p: &NormalizedOperator,
    observable: &Potential,
    x0: &Point,
    tol: f64,
    merge_eps: f64,
    n_max: usize,
) -> Result<Outcome, Failure> {
    let c = constants_for(p)?;
    let mu = gibbs_measure(p, x0, tol, merge_eps)?.measure;
    let grid = p.ics().space().grid_points(64);
    let rows = spectral_gap_decay(p, observable, &mu, &c, &grid, n_max)?;
    let violation = rows
        .iter()
        .find(|r| r.norm > r.bound)
        .map(|r| format!("n={}: ‖ℙⁿζ‖_Lip = {:e} exceeds C₂λⁿ = {:e}", r.n, r.norm, r.bound));
    let worst = rows.iter().map(|r| r.norm / r.bound).fold(0.0, f64::max);
    let table: Vec<_> = rows.iter().map(|r| (r.n, r.sup, r.lip, r.norm, r.bound)).collect();
    Ok(Outcome {
        csv: csv_bytes(SPECTRAL_HEADER, &table)?,
        summary: json!({ "constants": c, "max_ratio": worst, "eigen": eigen_summary(p) }),
        violation,
    })
}

type StabilityRow = (String, f64, &'static str, f64, f64, f64);

fn row(system: &Ics, eps: f64, check: &'static str, r: &StabilityReport) -> StabilityRow {
    (system.name().to_string(), eps, check, r.lhs, r.rhs, r.slack)
}

/// Runs `work` on every perturbation in its own thread, keeping input order.
fn fan_out<T: Send>(perturbations: &[f64], work: impl Fn(f64) -> Result<T, Error> + Sync) -> Result<Vec<T>, Error> {
    thread::scope(|s| {
        let handles: Vec<_> = perturbations
            .iter()
            .map(|&e| {
                let work = &work;
                s.spawn(move || work(e))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    })
}

fn stability_outcome(rows: Vec<StabilityRow>, details: Vec<Value>) -> Result<Outcome, Failure> {
    let violation = rows
        .iter()
        .find(|r| r.5 < -ics_transfer::stability::SLACK_TOLERANCE)
        .map(|r| format!("{} at perturbation {}: lhs = {:e} > rhs = {:e}", r.2, r.1, r.3, r.4));
    let min_slack = rows.iter().map(|r| r.5).fold(f64::INFINITY, f64::min);
    Ok(Outcome {
        csv: csv_bytes(STABILITY_HEADER, &rows)?,
        summary: json!({ "min_slack": min_slack, "rows": details }),
        violation,
    })
}

fn stability_potential(
    system: &Ics,
    perturbations: &[f64],
    x0: &Point,
    tol: f64,
    merge_eps: f64,
) -> Result<Outcome, Failure> {
    let base = NormalizedOperator::per_point(system.clone(), Potential::constant(-(system.arity() as f64).ln()));
    let results = fan_out(perturbations, |eps| {
        let tilted = tilt_operator(system, eps)?;
        let g = gibbs_stability(&tilted, &base, x0, tol, merge_eps)?;
        let h = entropy_stability(&tilted, &base, x0, tol, merge_eps)?;
        Ok((eps, g, h))
    })?;
    let mut rows = Vec::new();
    let mut details = Vec::new();
    for (eps, g, h) in results {
        rows.push(row(system, eps, "gibbs", &g));
        rows.push(row(system, eps, "entropy", &h.report));
        details.push(json!({
            "perturbation": eps,
            "gibbs": g,
            "entropy": h.report,
            "entropy_tilted": h.entropy_a,
            "entropy_base": h.entropy_b,
            "entropy_intermediate": h.intermediate,
        }));
    }
    stability_outcome(rows, details)
}

fn stability_map(
    system: &Ics,
    perturbed: &(dyn Fn(f64) -> ics_transfer::Result<Ics> + Sync),
    perturbations: &[f64],
    grid_size: usize,
    x0: &Point,
    tol: f64,
    merge_eps: f64,
) -> Result<Outcome, Failure> {
    let results = fan_out(perturbations, |eps| {
        let f2 = perturbed(eps)?;
        let m = max_entropy_stability(system, &f2, x0, tol, merge_eps)?;
        let lemma = lift_lemma_check(system, &f2, grid_size)?;
        Ok((eps, m, lemma))
    })?;
    let mut rows = Vec::new();
    let mut details = Vec::new();
    for (eps, m, lemma) in results {
        rows.push(row(system, eps, "max_entropy", &m));
        let lhs = lemma.system_gap.max(lemma.pairing_gap);
        let rhs = 2.0 * lemma.map_gap;
        rows.push((system.name().to_string(), eps, "lift_lemma", lhs, rhs, rhs - lhs));
        details.push(json!({ "perturbation": eps, "max_entropy": m, "lift_lemma": lemma }));
    }
    stability_outcome(rows, details)
}

fn ot_selftest(space: &ics_transfer::PhaseSpace, pairs: usize, atoms: usize, seed: u64) -> Result<Outcome, Failure> {
    let mut rng = sample::rng(seed);
    let mut rows = Vec::with_capacity(pairs);
    let mut violation = None;
    for case in 0..pairs {
        let mu = sample::measure(space, &mut rng, atoms);
        let nu = sample::measure(space, &mut rng, atoms);
        let flow = wasserstein1(space, &mu, &nu)?;
        let closed = w1(space, &mu, &nu)?;
        let diff = (flow.value - closed).abs();
        let gap = flow.duality_gap();
        let marginal = flow.plan.marginal_error(&mu, &nu);
        if violation.is_none() && (diff > OT_TOLERANCE || gap.abs() > OT_TOLERANCE || marginal > MASS_TOLERANCE) {
            violation = Some(format!(
                "case {case}: flow {:e}, closed {closed:e}, duality gap {gap:e}, marginal error {marginal:e}",
                flow.value
            ));
        }
        rows.push((case, mu.len(), nu.len(), flow.value, closed, diff, gap));
    }
    let max_diff = rows.iter().map(|r| r.5).fold(0.0, f64::max);
    let max_gap = rows.iter().map(|r| r.6.abs()).fold(0.0, f64::max);
    Ok(Outcome {
        csv: csv_bytes(OT_HEADER, &rows)?,
        summary: json!({
            "space": space,
            "max_abs_diff": max_diff,
            "max_duality_gap": max_gap,
            "closed_form": !space.is_transformed() && !matches!(space.kind, ics_transfer::SpaceKind::Euclidean { .. }),
        }),
        violation,
    })
}
