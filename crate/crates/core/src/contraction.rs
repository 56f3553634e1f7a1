//! The dual normalized operator `ℙ*` on discrete measures, the explicit
//! contraction constants, measured contraction rates, Gibbs measures and
//! spectral-gap decay.

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::measure::DiscreteMeasure;
use crate::potential::Potential;
use crate::space::Point;
use crate::transfer::NormalizedOperator;
use crate::transport::{merge_atoms, w1, wasserstein1};

/// Largest support carried between dual steps.
pub const DEFAULT_SUPPORT_CAP: usize = 1 << 21;

/// `min(1e−8, tol/(10·n_max))`.
pub fn default_merge_eps(tol: f64, n_max: usize) -> f64 {
    (1e-8f64).min(tol / (10.0 * n_max.max(1) as f64))
}

/// `ℙ*μ`: every atom `(x, w)` spreads to `(y, w·e^{A_h(x→y)})` over `F(x)`.
pub fn dual_step(p: &NormalizedOperator, mu: &DiscreteMeasure) -> DiscreteMeasure {
    let mut atoms = Vec::with_capacity(mu.len() * p.ics().arity());
    for (x, w) in mu.atoms() {
        for (y, q) in p.transitions(x) {
            atoms.push((y, w * q));
        }
    }
    DiscreteMeasure::from_raw(atoms)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Iterated {
    pub measure: DiscreteMeasure,
    /// Upper bound on `W₁` between `measure` and the unmerged iterate.
    pub merge_error: f64,
}

/// `(ℙ*)ⁿμ` with atoms merged at scale `merge_eps` after every step.
pub fn dual_iterate(p: &NormalizedOperator, mu: &DiscreteMeasure, n: usize, merge_eps: f64) -> Result<Iterated> {
    dual_iterate_capped(p, mu, n, merge_eps, DEFAULT_SUPPORT_CAP)
}

pub fn dual_iterate_capped(
    p: &NormalizedOperator,
    mu: &DiscreteMeasure,
    n: usize,
    merge_eps: f64,
    cap: usize,
) -> Result<Iterated> {
    if merge_eps < 0.0 {
        return input("merge_eps must be nonnegative");
    }
    let space = p.ics().space();
    let mut cur = mu.clone();
    for _ in 0..n {
        if cur.len() * p.ics().arity() > cap {
            return Err(support_overflow(cur.len() * p.ics().arity(), cap, merge_eps));
        }
        cur = merge_atoms(space, &dual_step(p, &cur), merge_eps);
    }
    Ok(Iterated { measure: cur, merge_error: n as f64 * merge_eps * mu.total_mass() })
}

fn support_overflow(size: usize, cap: usize, eps: f64) -> Error {
    Error::Resource(format!("support of {size} atoms exceeds the cap {cap}; use a merge_eps larger than {eps:e}"))
}

/// Constants of the contraction theorem for a normalized potential.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionConstants {
    pub theta: f64,
    pub diam: f64,
    pub lip_a: f64,
    pub m: f64,
    pub m_tilde: f64,
    pub m_prime: f64,
    /// Truncation exponent of the localised metric `d′`.
    pub n: u32,
    /// Iterate on which `d′` contracts.
    pub t: u32,
    pub c: f64,
    pub lambda: f64,
}

impl ContractionConstants {
    pub fn new(theta: f64, diam: f64, lip_a: f64) -> Result<Self> {
        Self::with_overrides(theta, diam, lip_a, None, None)
    }

    /// `N` and `t` default to the smallest integers the explicit formulas allow.
    pub fn with_overrides(theta: f64, diam: f64, lip_a: f64, n: Option<u32>, t: Option<u32>) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return input(format!("theta must lie in (0,1), got {theta}"));
        }
        if !(diam > 0.0 && diam.is_finite()) {
            return input(format!("diameter must be positive, got {diam}"));
        }
        if !(lip_a >= 0.0 && lip_a.is_finite()) {
            return input(format!("Lipschitz constant must be nonnegative, got {lip_a}"));
        }
        let m = lip_a / (1.0 - theta);
        let m_tilde = if m == 0.0 { 0.0 } else { (m * diam).exp_m1() / diam };
        let base =
            Self { theta, diam, lip_a, m, m_tilde, m_prime: m + 2.0 * m_tilde, n: 0, t: 1, c: 1.0, lambda: theta };
        if lip_a == 0.0 {
            // all mass is matched and moves by at most θ·d per step
            return Ok(base);
        }
        let x = m / (1.0 - theta) * diam;
        let n = n.unwrap_or_else(|| ((((-x).exp_m1().abs()) / x).ln() / theta.ln()).ceil().max(0.0) as u32);
        let t = t.unwrap_or_else(|| {
            let need = 2.0 * n as f64 + (x / 2.0).ln() / theta.ln();
            let mut t = need.ceil().max(1.0) as u32;
            // guard against rounding in the ceiling
            while t > 1 && theta.powi(t as i32 - 1) <= theta.powi(2 * n as i32) * x / 2.0 {
                t -= 1;
            }
            while theta.powi(t as i32) > theta.powi(2 * n as i32) * x / 2.0 {
                t += 1;
            }
            t
        });
        if t == 0 {
            return input("t must be positive");
        }
        let c = theta.powi(-(n as i32)) * (theta + x).powi(2 * t as i32);
        let lambda = (1.0 - 0.5 * (-x).exp()).powf(1.0 / t as f64);
        Ok(Self { n, t, c, lambda, ..base })
    }

    /// `C λⁿ`.
    pub fn bound(&self, n: usize) -> f64 {
        self.c * self.lambda.powi(n as i32)
    }

    /// The proof's contraction factor for `(ℙ*)ᵗ` in the metric `d′`, where
    /// `m_log` bounds `A_h^t(s) − A_h^t(r)` by `m_log·d(x,y)` along paired sequences.
    pub fn lambda_prime(&self, m_log: f64) -> f64 {
        let head = self.theta.powi(self.t as i32 - self.n as i32);
        let near = head + m_log * self.diam * self.theta.powi(self.n as i32);
        let far = head - (-m_log * self.diam).exp_m1();
        near.max(far)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    /// `W₁((ℙ*)ⁿδx, (ℙ*)ⁿδy)` for `n = 0..=n_max`.
    pub w1: Vec<f64>,
    /// Merge error bound per `n`, covering both trajectories.
    pub merge_slack: Vec<f64>,
    pub lambda_emp: f64,
}

/// Least-squares slope of `log W₁` over the second half of the sequence.
pub fn fit_rate(values: &[f64]) -> f64 {
    let start = values.len() / 2;
    let pts: Vec<(f64, f64)> =
        values.iter().enumerate().skip(start).filter(|(_, v)| **v > 0.0).map(|(n, v)| (n as f64, v.ln())).collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxy / sxx).exp()
}

pub fn empirical_rate(
    p: &NormalizedOperator,
    x: &Point,
    y: &Point,
    n_max: usize,
    merge_eps: f64,
) -> Result<RateReport> {
    let space = p.ics().space();
    space.check(x)?;
    space.check(y)?;
    let mut mu = DiscreteMeasure::dirac(x.clone());
    let mut nu = DiscreteMeasure::dirac(y.clone());
    let mut values = vec![space.distance(x, y)];
    let mut slack = vec![0.0];
    for n in 1..=n_max {
        for m in [&mut mu, &mut nu] {
            if m.len() * p.ics().arity() > DEFAULT_SUPPORT_CAP {
                return Err(support_overflow(m.len() * p.ics().arity(), DEFAULT_SUPPORT_CAP, merge_eps));
            }
            *m = merge_atoms(space, &dual_step(p, m), merge_eps);
        }
        values.push(w1(space, &mu, &nu)?);
        slack.push(2.0 * n as f64 * merge_eps);
    }
    let lambda_emp = fit_rate(&values);
    Ok(RateReport { w1: values, merge_slack: slack, lambda_emp })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedContractionReport {
    pub lambda_prime: f64,
    /// Largest `W′₁((ℙ*)ᵗδx, (ℙ*)ᵗδy) / d′(x,y)`.
    pub max_ratio: f64,
    pub pairs: usize,
    pub violations: usize,
}

/// Checks `W′₁((ℙ*)ᵗδx, (ℙ*)ᵗδy) ≤ λ′ d′(x,y)` with `d′` the metric truncated at scale `θ^N`.
pub fn truncated_contraction_check(
    p: &NormalizedOperator,
    constants: &ContractionConstants,
    pairs: &[(Point, Point)],
) -> Result<TruncatedContractionReport> {
    let space = p.ics().space();
    let dprime = space.truncate_metric(constants.theta, constants.n)?;
    let m_log = p.lipschitz().value / (1.0 - constants.theta);
    let lambda_prime = constants.lambda_prime(m_log);
    let t = constants.t as usize;
    let mut rep = TruncatedContractionReport { lambda_prime, max_ratio: 0.0, pairs: 0, violations: 0 };
    for (x, y) in pairs {
        let d = dprime.distance(x, y);
        if d == 0.0 {
            continue;
        }
        let mu = dual_iterate(p, &DiscreteMeasure::dirac(x.clone()), t, 0.0)?.measure;
        let nu = dual_iterate(p, &DiscreteMeasure::dirac(y.clone()), t, 0.0)?.measure;
        let w = wasserstein1(&dprime, &mu, &nu)?.value;
        rep.pairs += 1;
        rep.max_ratio = rep.max_ratio.max(w / d);
        if w > lambda_prime * d * (1.0 + 1e-9) {
            rep.violations += 1;
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GibbsResult {
    pub measure: DiscreteMeasure,
    pub iterations: usize,
    /// `W₁` between the returned measure and its merged image.
    pub residual: f64,
    pub merge_error: f64,
}

pub const GIBBS_MAX_ITERATIONS: usize = 200;

/// The fixed point of `ℙ*`, iterated from `δ_{x₀}` until successive iterates
/// are within `tol`; then `W₁(ℙ*μ̂, μ̂) ≤ tol + merge_eps`.
pub fn gibbs_measure(p: &NormalizedOperator, x0: &Point, tol: f64, merge_eps: f64) -> Result<GibbsResult> {
    if !(tol > 0.0) {
        return input("tol must be positive");
    }
    let space = p.ics().space();
    space.check(x0)?;
    let mut cur = DiscreteMeasure::dirac(x0.clone());
    let mut residual = f64::INFINITY;
    for it in 0..GIBBS_MAX_ITERATIONS {
        if cur.len() * p.ics().arity() > DEFAULT_SUPPORT_CAP {
            return Err(support_overflow(cur.len() * p.ics().arity(), DEFAULT_SUPPORT_CAP, merge_eps));
        }
        let next = merge_atoms(space, &dual_step(p, &cur), merge_eps);
        residual = w1(space, &cur, &next)?;
        if residual < tol {
            return Ok(GibbsResult { measure: cur, iterations: it, residual, merge_error: it as f64 * merge_eps });
        }
        cur = next;
    }
    Err(Error::Convergence { iterations: GIBBS_MAX_ITERATIONS, residual })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralRow {
    pub n: usize,
    pub sup: f64,
    pub lip: f64,
    /// `‖ℙⁿζ‖∞ + Lip(ℙⁿζ)`.
    pub norm: f64,
    /// `C₂(ζ) λⁿ` with `C₂(ζ) = (1 + diam)·C·Lip(ζ)`.
    pub bound: f64,
}

/// `‖ℙⁿζ‖_Lip` for `n = 0..=n_max` after centering `ζ` against `μ_A`,
/// evaluated on `grid` points (sup and all-pairs difference quotients).
pub fn spectral_gap_decay(
    p: &NormalizedOperator,
    zeta: &Potential,
    mu_a: &DiscreteMeasure,
    constants: &ContractionConstants,
    grid: &[Point],
    n_max: usize,
) -> Result<Vec<SpectralRow>> {
    let space = p.ics().space();
    let mean = mu_a.integrate(|x| zeta.eval(x)) / mu_a.total_mass();
    let centered = |x: &Point| zeta.eval(x) - mean;
    let powers: Vec<Vec<f64>> = grid.iter().map(|x| p.apply_powers(centered, x, n_max)).collect::<Result<_>>()?;
    let c2 = (1.0 + constants.diam) * constants.c * zeta.lipschitz();
    Ok((0..=n_max)
        .map(|n| {
            let values: Vec<f64> = powers.iter().map(|v| v[n]).collect();
            let sup = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let mut lip: f64 = 0.0;
            for i in 0..grid.len() {
                for j in i + 1..grid.len() {
                    let d = space.distance(&grid[i], &grid[j]);
                    if d > 0.0 {
                        lip = lip.max((values[i] - values[j]).abs() / d);
                    }
                }
            }
            SpectralRow { n, sup, lip, norm: sup + lip, bound: c2 * constants.lambda.powi(n as i32) }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ics::Ics;
    use crate::potential::PotentialSpec;
    use crate::space::PhaseSpace;

    fn uniform_doubling() -> NormalizedOperator {
        NormalizedOperator::per_point(Ics::doubling_map(), Potential::constant(-2f64.ln()))
    }

    #[test]
    fn dual_step_of_a_dirac() {
        let p = uniform_doubling();
        let mu = dual_step(&p, &DiscreteMeasure::dirac(Point::Real(0.0)));
        let atoms: Vec<(f64, f64)> = mu.atoms().iter().map(|(x, w)| (x.real().unwrap(), *w)).collect();
        assert_eq!(atoms, vec![(0.0, 0.5), (0.5, 0.5)]);
    }

    #[test]
    fn iterate_bookkeeping() {
        let p = uniform_doubling();
        let d = DiscreteMeasure::dirac(Point::Real(0.0));
        let r = dual_iterate(&p, &d, 0, 1e-6).unwrap();
        assert_eq!((r.measure, r.merge_error), (d.clone(), 0.0));
        let r = dual_iterate(&p, &d, 10, 0.0).unwrap();
        assert_eq!(r.measure.len(), 1024);
        assert!(r.measure.atoms().iter().all(|(_, w)| (*w - 1.0 / 1024.0).abs() < 1e-15));
        assert!((dual_iterate(&p, &d, 20, 1e-6).unwrap().merge_error - 2e-5).abs() < 1e-18);
        assert!(matches!(dual_iterate_capped(&p, &d, 5, 0.0, 8), Err(Error::Resource(_))));
    }

    #[test]
    fn explicit_constants() {
        let c = ContractionConstants::new(0.5, 1.0, 0.0).unwrap();
        assert_eq!((c.c, c.lambda, c.n, c.t), (1.0, 0.5, 0, 1));
        let c = ContractionConstants::new(0.5, 1.0, 1.0).unwrap();
        assert!((c.m - 2.0).abs() < 1e-15);
        assert!((c.m_tilde - (2f64.exp() - 1.0)).abs() < 1e-12);
        assert!((c.m_prime - 14.7781121978613).abs() < 1e-9);
        let x: f64 = 4.0;
        assert!(0.5f64.powi(c.n as i32) * x <= 1.0 - (-x).exp());
        assert!(0.5f64.powi(c.n as i32 - 1) * x > 1.0 - (-x).exp());
        assert!(0.5f64.powi(c.t as i32) <= 0.5f64.powi(2 * c.n as i32) * x / 2.0);
        assert!(0.5f64.powi(c.t as i32 - 1) > 0.5f64.powi(2 * c.n as i32) * x / 2.0);
        assert!(c.lambda < 1.0 && c.c >= 1.0);
        let slower = ContractionConstants::with_overrides(0.5, 1.0, 1.0, Some(c.n), Some(c.t + 3)).unwrap();
        assert!(slower.lambda > c.lambda);
        assert!(ContractionConstants::new(1.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn constant_potential_halves_distances() {
        let p = uniform_doubling();
        let r = empirical_rate(&p, &Point::Real(0.0), &Point::Real(0.25), 10, 0.0).unwrap();
        for (n, w) in r.w1.iter().enumerate() {
            assert!((w - 0.25 * 0.5f64.powi(n as i32)).abs() < 1e-15);
        }
        assert!((r.lambda_emp - 0.5).abs() < 1e-9);
        let same = empirical_rate(&p, &Point::Real(0.3), &Point::Real(0.3), 5, 0.0).unwrap();
        assert!(same.w1.iter().all(|w| *w == 0.0));
    }

    #[test]
    fn gibbs_of_cantor_is_symmetric() {
        let p = NormalizedOperator::per_point(Ics::cantor(), Potential::constant(-2f64.ln()));
        let g = gibbs_measure(&p, &Point::Real(0.0), 1e-6, 0.0).unwrap();
        assert!((g.measure.integrate(|x| x.first_coordinate()) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn sine_cancels_under_uniform_weights() {
        let p = uniform_doubling();
        let s = PhaseSpace::circle();
        let zeta = Potential::from_spec(PotentialSpec::Sine { base: 0.0, amplitude: 1.0 / std::f64::consts::TAU }, &s)
            .unwrap();
        for x in s.grid_points(64) {
            assert!(p.apply(|y| zeta.eval(y), &x).abs() < 1e-12);
        }
    }

    #[test]
    fn truncated_metric_contracts() {
        let s = PhaseSpace::circle();
        let a = Potential::from_spec(PotentialSpec::Cosine { base: -2f64.ln(), amplitude: 0.1 }, &s).unwrap();
        let p = NormalizedOperator::per_point(Ics::doubling_map(), a);
        let lip = p.lipschitz();
        assert!(lip.certified);
        let c = ContractionConstants::new(0.5, s.diameter(), lip.value).unwrap();
        let pairs: Vec<(Point, Point)> =
            (0..20).map(|i| (Point::Real(i as f64 / 20.0), Point::Real((i as f64 * 0.37 + 0.11) % 1.0))).collect();
        let rep = truncated_contraction_check(&p, &c, &pairs).unwrap();
        assert!(rep.lambda_prime < 1.0);
        assert_eq!(rep.violations, 0, "{rep:?}");
    }
}
