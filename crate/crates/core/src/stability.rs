//! Perturbation bounds: Gibbs measures under changes of potential or of
//! system, metric entropy, and maximal-entropy measures of perturbed circle maps.

use serde::{Deserialize, Serialize};

use crate::contraction::{dual_iterate, dual_step, gibbs_measure, ContractionConstants};
use crate::error::{input, Result};
use crate::ics::{
    circle_targets, ics_distance, ics_distance_refined, lift_inverse, refined_grid_sup, GridSup, Ics, DEFAULT_SUP_GRID,
};
use crate::measure::DiscreteMeasure;
use crate::potential::{Potential, PotentialSpec};
use crate::space::{wrap_unit, Point};
use crate::transfer::NormalizedOperator;
use crate::transport::w1;

/// Tolerance on `slack` for a report to count as holding.
pub const SLACK_TOLERANCE: f64 = 1e-8;
/// Largest normalization defect accepted from an eigen-normalized operator.
const NORMALIZATION_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub slack: f64,
    /// `‖A₁ − A₂‖∞`.
    pub potential_gap: f64,
    /// `d∞(F₁, F₂)`.
    pub system_gap: f64,
    /// `d∞(T₁, T₂)` for map perturbations.
    pub map_gap: Option<f64>,
    /// Error bound on `lhs` from fixed-point tolerances and merging.
    pub numerical_error: f64,
    pub constants: Option<ContractionConstants>,
}

impl StabilityReport {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, slack: rhs - lhs, ..Default::default() }
    }

    pub fn holds(&self) -> bool {
        self.slack >= -SLACK_TOLERANCE
    }
}

fn check_normalized(p: &NormalizedOperator) -> Result<()> {
    let defect = p.normalization_defect();
    if defect > NORMALIZATION_TOLERANCE {
        return input(format!("operator is not normalized: defect {defect:e}"));
    }
    Ok(())
}

/// `‖A₁ − A₂‖∞` of the normalized potentials as functions on the space.
pub fn potential_gap(p1: &NormalizedOperator, p2: &NormalizedOperator) -> Result<GridSup> {
    let space = p1.ics().space();
    let (c1, c2) = (constant_normalized(p1), constant_normalized(p2));
    if let (Some(a), Some(b)) = (c1, c2) {
        return Ok(GridSup { value: (a - b).abs(), grid_points: 0, last_change: 0.0 });
    }
    let probe = space.grid_points(2);
    if p1.potential_at(&probe[0]).is_none() || p2.potential_at(&probe[0]).is_none() {
        return input("potential gap needs systems with a forward map or constant potentials");
    }
    Ok(refined_grid_sup(space, DEFAULT_SUP_GRID, |y| (p1.potential_at(y).unwrap() - p2.potential_at(y).unwrap()).abs()))
}

fn constant_normalized(p: &NormalizedOperator) -> Option<f64> {
    match (p.eigen(), p.raw_potential().constant_value()) {
        (None, Some(_)) => Some(-(p.ics().arity() as f64).ln()),
        _ => None,
    }
}

/// `W₁(ℙ₁*μ, ℙ₂*μ) ≤ diam·‖A₁−A₂‖∞ + (Lip(A₂)·diam + 1)·d∞(F₁,F₂)`.
pub fn dual_operator_stability(
    p1: &NormalizedOperator,
    p2: &NormalizedOperator,
    mu: &DiscreteMeasure,
) -> Result<StabilityReport> {
    check_normalized(p1)?;
    check_normalized(p2)?;
    let space = p1.ics().space();
    let gap = potential_gap(p1, p2)?.value;
    let dist = ics_distance_refined(p1.ics(), p2.ics())?.value;
    let diam = space.diameter();
    let lhs = w1(space, &dual_step(p1, mu), &dual_step(p2, mu))?;
    let rhs = diam * gap + (p2.lipschitz().value * diam + 1.0) * dist;
    Ok(StabilityReport { potential_gap: gap, system_gap: dist, ..StabilityReport::new(lhs, rhs) })
}

/// Gibbs measures and the bound `W₁(μ₁,μ₂) ≤ C/(1−λ)·(diam‖A₁−A₂‖∞ + (Lip(A₂)diam+1)d∞(F₁,F₂))`,
/// with `C, λ` for `θ(F₂)` and `Lip(A₂)`.
pub fn gibbs_stability(
    p1: &NormalizedOperator,
    p2: &NormalizedOperator,
    x0: &Point,
    tol: f64,
    merge_eps: f64,
) -> Result<StabilityReport> {
    check_normalized(p1)?;
    check_normalized(p2)?;
    let space = p1.ics().space();
    let diam = space.diameter();
    let gap = potential_gap(p1, p2)?.value;
    let dist = ics_distance_refined(p1.ics(), p2.ics())?.value;
    let lip2 = p2.lipschitz().value;
    let c = ContractionConstants::new(p2.ics().theta(), diam, lip2)?;
    let g1 = gibbs_measure(p1, x0, tol, merge_eps)?;
    let g2 = gibbs_measure(p2, x0, tol, merge_eps)?;
    let lhs = w1(space, &g1.measure, &g2.measure)?;
    let rhs = c.c / (1.0 - c.lambda) * (diam * gap + (lip2 * diam + 1.0) * dist);
    Ok(StabilityReport {
        potential_gap: gap,
        system_gap: dist,
        numerical_error: fixed_point_error(&c, tol) * 2.0 + g1.merge_error + g2.merge_error,
        constants: Some(c),
        ..StabilityReport::new(lhs, rhs)
    })
}

/// Distance from a measure with fixed-point residual `tol` to the Gibbs
/// measure, `tol·C/(1−λ)`.
fn fixed_point_error(c: &ContractionConstants, tol: f64) -> f64 {
    tol * c.c / (1.0 - c.lambda)
}

/// `h(μ_A) = −∫A dμ_A` for a normalized potential.
pub fn metric_entropy(p: &NormalizedOperator, mu: &DiscreteMeasure) -> Result<f64> {
    if let Some(a) = constant_normalized(p) {
        return Ok(-a * mu.total_mass());
    }
    let mut total = 0.0;
    for (y, w) in mu.atoms() {
        let Some(a) = p.potential_at(y) else {
            return input("metric entropy needs a forward map; use the transition form");
        };
        total -= w * a;
    }
    Ok(total)
}

/// `−∫ Σ_{y∈F(x)} p(x→y) log p(x→y) dμ(x)`; equals [`metric_entropy`] on invariant measures.
pub fn transition_entropy(p: &NormalizedOperator, mu: &DiscreteMeasure) -> f64 {
    mu.atoms().iter().map(|(x, w)| -w * p.log_weights(x).iter().map(|(_, a)| a.exp() * a).sum::<f64>()).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub report: StabilityReport,
    pub entropy_a: f64,
    pub entropy_b: f64,
    /// `Lip(A)·W₁(μ_A, μ_B) + ‖A−B‖∞`, the intermediate bound of the proof.
    pub intermediate: f64,
}

/// `|h(μ_A) − h(μ_B)| ≤ C₄‖A−B‖∞` with `C₄ = C·Lip(A)/(1−λ)·diam + 1`, `C, λ` for `Lip(A)`.
pub fn entropy_stability(
    pa: &NormalizedOperator,
    pb: &NormalizedOperator,
    x0: &Point,
    tol: f64,
    merge_eps: f64,
) -> Result<EntropyReport> {
    check_normalized(pa)?;
    check_normalized(pb)?;
    if pa.ics() != pb.ics() {
        return input("entropy stability compares potentials on one system");
    }
    let space = pa.ics().space();
    let diam = space.diameter();
    let lip_a = pa.lipschitz().value;
    let c = ContractionConstants::new(pa.ics().theta(), diam, lip_a)?;
    let gap = potential_gap(pa, pb)?.value;
    let ga = gibbs_measure(pa, x0, tol, merge_eps)?;
    let gb = gibbs_measure(pb, x0, tol, merge_eps)?;
    let ha = metric_entropy(pa, &ga.measure)?;
    let hb = metric_entropy(pb, &gb.measure)?;
    let c4 = c.c * lip_a / (1.0 - c.lambda) * diam + 1.0;
    let lhs = (ha - hb).abs();
    let intermediate = lip_a * w1(space, &ga.measure, &gb.measure)? + gap;
    Ok(EntropyReport {
        report: StabilityReport {
            potential_gap: gap,
            numerical_error: lip_a * 2.0 * fixed_point_error(&c, tol),
            constants: Some(c),
            ..StabilityReport::new(lhs, c4 * gap)
        },
        entropy_a: ha,
        entropy_b: hb,
        intermediate,
    })
}

/// `d∞(T₁,T₂) = sup_x d(T₁x, T₂x)` for systems given by forward maps.
pub fn map_distance(f1: &Ics, f2: &Ics) -> Result<GridSup> {
    let space = f1.space();
    let probe = space.grid_points(2);
    if f1.forward(&probe[0]).is_none() || f2.forward(&probe[0]).is_none() {
        return input("map distance needs systems given by forward maps");
    }
    if space.kind != f2.space().kind {
        return input("maps act on different spaces");
    }
    Ok(refined_grid_sup(space, DEFAULT_SUP_GRID, |x| space.distance(&f1.forward(x).unwrap(), &f2.forward(x).unwrap())))
}

/// Pairs inverse branches of two nearby circle maps of the same degree by
/// lifting: the `j`-th preimages of `x` under both lifts solve `T̃ᵢ(z) = v_j`
/// for one common lifted target.
pub struct LiftedPairing {
    degree: u32,
    p1: crate::ics::Perturbation,
    p2: crate::ics::Perturbation,
    offset: f64,
    map_gap: f64,
}

impl LiftedPairing {
    /// Fails unless `d∞(T₁,T₂) ≤ sys/4 = 1/4`.
    pub fn new(f1: &Ics, f2: &Ics) -> Result<Self> {
        let (Some((k1, p1)), Some((k2, p2))) = (f1.circle_map_data(), f2.circle_map_data()) else {
            return input("lifted pairing needs two expanding circle maps");
        };
        if k1 != k2 {
            return input(format!("circle maps have different degrees {k1} and {k2}"));
        }
        let gap = map_distance(f1, f2)?.value;
        if gap > 0.25 {
            return input(format!("d∞(T₁,T₂) = {gap} exceeds a quarter of the systole (1/4)"));
        }
        Ok(Self { degree: k1, p1, p2, offset: (p2.value(0.0) - p1.value(0.0)).round(), map_gap: gap })
    }

    pub fn map_gap(&self) -> f64 {
        self.map_gap
    }

    pub fn pairs(&self, x: f64) -> Vec<(Point, Point)> {
        circle_targets(self.degree, self.p1, x)
            .map(|v| {
                let a = lift_inverse(self.degree, self.p1, v);
                let b = lift_inverse(self.degree, self.p2, v + self.offset);
                (Point::Real(wrap_unit(a)), Point::Real(wrap_unit(b)))
            })
            .collect()
    }
}

pub fn lifted_branch_pairing(f1: &Ics, f2: &Ics, x: f64) -> Result<Vec<(Point, Point)>> {
    Ok(LiftedPairing::new(f1, f2)?.pairs(x))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    /// `d∞(T₁,T₂)`.
    pub map_gap: f64,
    /// Bottleneck `d∞(F₁,F₂)` on the grid.
    pub system_gap: f64,
    /// Largest pair distance of the lifted pairing on the grid.
    pub pairing_gap: f64,
}

impl LemmaReport {
    pub fn holds(&self) -> bool {
        let bound = 2.0 * self.map_gap * (1.0 + 1e-9) + 1e-12;
        self.system_gap <= bound && self.pairing_gap <= bound
    }
}

/// Checks `d∞(F₁,F₂) ≤ 2·d∞(T₁,T₂)` on `n` grid points, both through the
/// bottleneck distance and through the explicit lifted pairing.
pub fn lift_lemma_check(f1: &Ics, f2: &Ics, n: usize) -> Result<LemmaReport> {
    let pairing = LiftedPairing::new(f1, f2)?;
    let space = f1.space();
    let grid = space.grid_points(n);
    let system_gap = ics_distance(f1, f2, &grid)?;
    let pairing_gap = grid
        .iter()
        .flat_map(|x| pairing.pairs(x.first_coordinate()))
        .map(|(a, b)| space.distance(&a, &b))
        .fold(0.0, f64::max);
    Ok(LemmaReport { map_gap: pairing.map_gap(), system_gap, pairing_gap })
}

/// Maximal-entropy measures (`A ≡ −log k`) of two nearby circle maps and the
/// bound `W₁(μ₁,μ₂) ≤ 2/(1−θ₂)·d∞(T₁,T₂)`, `θ₂` the contraction of `F₂`.
pub fn max_entropy_stability(f1: &Ics, f2: &Ics, x0: &Point, tol: f64, merge_eps: f64) -> Result<StabilityReport> {
    let pairing = LiftedPairing::new(f1, f2)?;
    let k = f1.arity() as f64;
    let p1 = NormalizedOperator::per_point(f1.clone(), Potential::constant(-k.ln()));
    let p2 = NormalizedOperator::per_point(f2.clone(), Potential::constant(-k.ln()));
    let c = ContractionConstants::new(f2.theta(), f2.space().diameter(), 0.0)?;
    let g1 = gibbs_measure(&p1, x0, tol, merge_eps)?;
    let g2 = gibbs_measure(&p2, x0, tol, merge_eps)?;
    let lhs = w1(f1.space(), &g1.measure, &g2.measure)?;
    let c5 = 2.0 * c.c / (1.0 - c.lambda);
    Ok(StabilityReport {
        map_gap: Some(pairing.map_gap()),
        numerical_error: 2.0 * fixed_point_error(&c, tol) + g1.merge_error + g2.merge_error,
        constants: Some(c),
        ..StabilityReport::new(lhs, c5 * pairing.map_gap())
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TelescopeRow {
    pub n: usize,
    /// `uₙ = W₁(ℙ₁*ⁿμ, ℙ₂*ⁿμ)`.
    pub u: f64,
    /// `C/(1−λ)·u₁`.
    pub bound: f64,
}

/// `uₙ ≤ C/(1−λ)·u₁` for `n ≤ n_max`, `C, λ` for `θ(F₂)` and `Lip(A₂)`.
pub fn telescoping_check(
    p1: &NormalizedOperator,
    p2: &NormalizedOperator,
    mu: &DiscreteMeasure,
    n_max: usize,
    merge_eps: f64,
) -> Result<Vec<TelescopeRow>> {
    let space = p1.ics().space();
    let c = ContractionConstants::new(p2.ics().theta(), space.diameter(), p2.lipschitz().value)?;
    let mut a = mu.clone();
    let mut b = mu.clone();
    let mut rows = Vec::with_capacity(n_max);
    let mut u1 = 0.0;
    for n in 1..=n_max {
        a = dual_iterate(p1, &a, 1, merge_eps)?.measure;
        b = dual_iterate(p2, &b, 1, merge_eps)?.measure;
        let u = w1(space, &a, &b)?;
        if n == 1 {
            u1 = u;
        }
        rows.push(TelescopeRow { n, u, bound: c.c / (1.0 - c.lambda) * u1 + 2.0 * n as f64 * merge_eps });
    }
    Ok(rows)
}

/// Per-point renormalisation of `−log k + ε·cos(2πx)` on a circle map.
pub fn tilt_operator(f: &Ics, eps: f64) -> Result<NormalizedOperator> {
    let k = f.arity() as f64;
    let a = Potential::from_spec(PotentialSpec::Cosine { base: -k.ln(), amplitude: eps }, f.space())?;
    Ok(NormalizedOperator::per_point(f.clone(), a))
}

/// `‖A_ε + log 2‖∞ = ε + log cosh ε` for the doubling-map tilt family.
pub fn doubling_tilt_gap(eps: f64) -> f64 {
    eps.abs() + eps.cosh().ln()
}
