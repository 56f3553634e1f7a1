//! Transfer operators `L f(x) = Σ_{y∈F(x)} e^{A(y)} f(y)`, their
//! Ruelle–Perron–Frobenius eigendata and the normalized operator `ℙ`.

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::grid::Grid;
use crate::ics::Ics;
use crate::potential::{Potential, LIPSCHITZ_SAFETY};
use crate::sequence::{check_cap, paired_sequences};
use crate::space::Point;

#[derive(Clone, Debug)]
pub struct TransferOperator {
    ics: Ics,
    potential: Potential,
}

impl TransferOperator {
    pub fn new(ics: Ics, potential: Potential) -> Self {
        Self { ics, potential }
    }

    pub fn ics(&self) -> &Ics {
        &self.ics
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn apply(&self, f: impl Fn(&Point) -> f64, x: &Point) -> f64 {
        self.ics.images(x).iter().map(|y| self.potential.eval(y).exp() * f(y)).sum()
    }

    /// `L^t f(x) = Σ_{s∈F̄^t(x)} e^{A^t(s)} f(x_t)` by enumerating admissible sequences.
    pub fn apply_n(&self, f: impl Fn(&Point) -> f64, x: &Point, t: usize) -> Result<f64> {
        check_cap(self.ics.arity(), t)?;
        fn walk(op: &TransferOperator, f: &dyn Fn(&Point) -> f64, x: &Point, weight: f64, left: usize) -> f64 {
            if left == 0 {
                return weight * f(x);
            }
            op.ics.images(x).iter().map(|y| walk(op, f, y, weight * op.potential.eval(y).exp(), left - 1)).sum()
        }
        Ok(walk(self, &f, x, 1.0, t))
    }

    /// `Lⁿ1(x)` for `n = 0..=n_max` from one enumeration.
    pub fn power_sums(&self, x: &Point, n_max: usize) -> Result<Vec<f64>> {
        check_cap(self.ics.arity(), n_max)?;
        let mut sums = vec![0.0; n_max + 1];
        fn walk(op: &TransferOperator, x: &Point, weight: f64, depth: usize, sums: &mut [f64]) {
            sums[depth] += weight;
            if depth + 1 < sums.len() {
                for y in op.ics.images(x) {
                    walk(op, &y, weight * op.potential.eval(&y).exp(), depth + 1, sums);
                }
            }
        }
        walk(self, x, 1.0, 0, &mut sums);
        Ok(sums)
    }

    /// `(Lⁿ1(x))^{1/n}`.
    pub fn growth_rate(&self, x: &Point, n: usize) -> Result<f64> {
        if n == 0 {
            return input("growth rate needs n ≥ 1");
        }
        Ok(self.power_sums(x, n)?[n].powf(1.0 / n as f64))
    }
}

#[derive(Clone, Debug)]
pub struct EigenOptions {
    /// Required `‖Lh − ρh‖∞ / ‖h‖∞`.
    pub tol: f64,
    pub max_iterations: usize,
    /// Stop once the sup-norm relative change of an iterate drops below this.
    pub change_tol: f64,
    pub initial: Option<Vec<f64>>,
    /// Grid node where `h = 1`.
    pub base: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iterations: 100_000, change_tol: 1e-12, initial: None, base: 0 }
    }
}

/// `(ρ, h)` with `h` sampled on a grid and interpolated between nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenData {
    pub rho: f64,
    pub grid: Grid,
    pub values: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

impl EigenData {
    pub fn h(&self, p: &Point) -> f64 {
        self.grid.interpolate(&self.values, p)
    }
}

/// Sparse grid discretisation of `L`: row `i` holds the interpolation
/// weights of `Σ e^{A(y)} f(y)` at node `i`.
struct GridOperator {
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl GridOperator {
    fn build(op: &TransferOperator, grid: &Grid) -> Self {
        let mut offsets = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut st = Vec::new();
        for i in 0..grid.len() {
            let x = grid.point(i);
            for y in op.ics.images(&x) {
                let w = op.potential.eval(&y).exp();
                grid.stencil(&y, &mut st);
                for &(j, c) in &st {
                    if c != 0.0 {
                        cols.push(j);
                        vals.push(w * c);
                    }
                }
            }
            offsets.push(cols.len());
        }
        Self { offsets, cols, vals }
    }

    fn apply(&self, f: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let r = self.offsets[i]..self.offsets[i + 1];
            *o = self.cols[r.clone()].iter().zip(&self.vals[r]).map(|(&j, &v)| v * f[j]).sum();
        }
    }
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn rpf_eigendata(op: &TransferOperator, grid: Grid, tol: f64) -> Result<EigenData> {
    rpf_eigendata_with(op, grid, &EigenOptions { tol, ..EigenOptions::default() })
}

/// Power iteration `f ← Lf/‖Lf‖∞` on the grid discretisation of `L`.
pub fn rpf_eigendata_with(op: &TransferOperator, grid: Grid, opts: &EigenOptions) -> Result<EigenData> {
    let n = grid.len();
    if n == 0 || opts.base >= n {
        return input("eigen solve needs a non-empty grid containing the base node");
    }
    let m = GridOperator::build(op, &grid);
    let mut f = match &opts.initial {
        Some(v) if v.len() == n && v.iter().all(|x| *x > 0.0) => v.clone(),
        Some(_) => return input("initial vector must be positive with one entry per grid node"),
        None => vec![1.0; n],
    };
    let s = sup_norm(&f);
    f.iter_mut().for_each(|x| *x /= s);
    let mut g = vec![0.0; n];
    let mut iterations = 0;
    loop {
        m.apply(&f, &mut g);
        let norm = sup_norm(&g);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Internal("transfer operator annihilated the iterate".into()));
        }
        g.iter_mut().for_each(|x| *x /= norm);
        let change = f.iter().zip(&g).fold(0.0, |c: f64, (a, b)| c.max((a - b).abs()));
        std::mem::swap(&mut f, &mut g);
        iterations += 1;
        if change < opts.change_tol || iterations >= opts.max_iterations {
            break;
        }
    }
    let base = f[opts.base];
    let h: Vec<f64> = f.iter().map(|x| x / base).collect();
    if h.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::Internal("eigenfunction lost positivity".into()));
    }
    m.apply(&h, &mut g);
    let rho = sup_norm(&g) / sup_norm(&h);
    let residual = g.iter().zip(&h).fold(0.0, |r: f64, (lh, hv)| r.max((lh - rho * hv).abs())) / sup_norm(&h);
    if residual > opts.tol {
        return Err(Error::Convergence { iterations, residual });
    }
    Ok(EigenData { rho, grid, values: h, residual, iterations })
}

/// Truncated series `Σ sⁿ Lⁿ1(x) / Σ sⁿ Lⁿ1(x₀)`, `n ≤ n_max`, at each point.
pub fn series_eigenfunction_check(
    op: &TransferOperator,
    rho: f64,
    s: f64,
    points: &[Point],
    base: &Point,
    n_max: usize,
) -> Result<Vec<f64>> {
    if !(s > 0.0 && s < 1.0 / rho) {
        return input(format!("series parameter must lie in (0, 1/ρ) = (0, {}), got {s}", 1.0 / rho));
    }
    let series = |x: &Point| -> Result<f64> {
        let sums = op.power_sums(x, n_max)?;
        Ok(sums.iter().enumerate().map(|(n, v)| s.powi(n as i32) * v).sum())
    };
    let norm = series(base)?;
    points.iter().map(|x| Ok(series(x)? / norm)).collect()
}

/// The Markov operator `ℙf(x) = Σ_{y∈F(x)} e^{A(y)} h(y) f(y) / Σ_{y∈F(x)} e^{A(y)} h(y)`.
///
/// At grid nodes the denominator equals `ρ h(x)` up to the eigen residual;
/// dividing by the sum itself makes `ℙ1 = 1` hold exactly everywhere.
#[derive(Clone, Debug)]
pub struct NormalizedOperator {
    ics: Ics,
    potential: Potential,
    eigen: Option<EigenData>,
}

/// Lipschitz constant of the normalized log-weights.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzBound {
    pub value: f64,
    pub certified: bool,
}

pub fn normalize(op: &TransferOperator, grid: Grid, tol: f64) -> Result<NormalizedOperator> {
    let eigen = rpf_eigendata(op, grid, tol)?;
    Ok(NormalizedOperator { ics: op.ics.clone(), potential: op.potential.clone(), eigen: Some(eigen) })
}

impl NormalizedOperator {
    /// Pointwise renormalisation `A(y) − log Σ_{y'∈F(x)} e^{A(y')}` (that is, `h ≡ 1`).
    pub fn per_point(ics: Ics, potential: Potential) -> Self {
        Self { ics, potential, eigen: None }
    }

    pub fn from_eigen(op: &TransferOperator, eigen: EigenData) -> Self {
        Self { ics: op.ics.clone(), potential: op.potential.clone(), eigen: Some(eigen) }
    }

    pub fn ics(&self) -> &Ics {
        &self.ics
    }

    pub fn raw_potential(&self) -> &Potential {
        &self.potential
    }

    pub fn eigen(&self) -> Option<&EigenData> {
        self.eigen.as_ref()
    }

    pub fn h(&self, y: &Point) -> f64 {
        self.eigen.as_ref().map_or(1.0, |e| e.h(y))
    }

    /// Images of `x` with their normalized log-weights `A_h(x→y)`.
    pub fn log_weights(&self, x: &Point) -> Vec<(Point, f64)> {
        let images = self.ics.images(x);
        let raw: Vec<f64> = images.iter().map(|y| self.potential.eval(y) + self.h(y).ln()).collect();
        let top = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = top + raw.iter().map(|a| (a - top).exp()).sum::<f64>().ln();
        images.into_iter().zip(raw).map(|(y, a)| (y, a - lse)).collect()
    }

    /// Transition probabilities from `x`; they sum to one.
    pub fn transitions(&self, x: &Point) -> Vec<(Point, f64)> {
        self.log_weights(x).into_iter().map(|(y, a)| (y, a.exp())).collect()
    }

    /// Log-weight of the image of `x` nearest to `y`.
    pub fn log_weight_to(&self, x: &Point, y: &Point) -> f64 {
        let space = self.ics.space();
        self.log_weights(x)
            .into_iter()
            .min_by(|(a, _), (b, _)| space.distance(a, y).total_cmp(&space.distance(b, y)))
            .map(|(_, w)| w)
            .expect("systems have at least one branch")
    }

    pub fn apply(&self, f: impl Fn(&Point) -> f64, x: &Point) -> f64 {
        self.transitions(x).iter().map(|(y, p)| p * f(y)).sum()
    }

    /// `ℙⁿf(x)` by enumerating admissible sequences.
    pub fn apply_n(&self, f: impl Fn(&Point) -> f64, x: &Point, n: usize) -> Result<f64> {
        Ok(*self.apply_powers(f, x, n)?.last().unwrap())
    }

    /// `ℙᵐf(x)` for `m = 0..=n` from one enumeration.
    pub fn apply_powers(&self, f: impl Fn(&Point) -> f64, x: &Point, n: usize) -> Result<Vec<f64>> {
        check_cap(self.ics.arity(), n)?;
        let mut out = vec![0.0; n + 1];
        fn walk(p: &NormalizedOperator, f: &dyn Fn(&Point) -> f64, x: &Point, w: f64, d: usize, out: &mut [f64]) {
            out[d] += w * f(x);
            if d + 1 < out.len() {
                for (y, q) in p.transitions(x) {
                    walk(p, f, &y, w * q, d + 1, out);
                }
            }
        }
        walk(self, &f, x, 1.0, 0, &mut out);
        Ok(out)
    }

    /// The normalized potential as a function on the space, `A_h(y)` for the
    /// transition `T(y) → y`; needs a forward map unless the raw potential is constant.
    pub fn potential_at(&self, y: &Point) -> Option<f64> {
        if self.eigen.is_none() && self.potential.constant_value().is_some() {
            return Some(-(self.ics.arity() as f64).ln());
        }
        let x = self.ics.forward(y)?;
        Some(self.log_weight_to(&x, y))
    }

    /// Largest `|ln Σ e^{A(y)}h(y) − ln(ρ h(x))|` over the eigen grid; zero without eigendata.
    pub fn normalization_defect(&self) -> f64 {
        let Some(e) = &self.eigen else { return 0.0 };
        (0..e.grid.len())
            .map(|i| {
                let x = e.grid.point(i);
                let lh: f64 = self.ics.images(&x).iter().map(|y| self.potential.eval(y).exp() * e.h(y)).sum();
                (lh.ln() - (e.rho * e.values[i]).ln()).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Lipschitz constant of the normalized potential.
    ///
    /// Pointwise renormalisation of a certified potential `A` on a system with a
    /// Lipschitz forward map `T` is certified by `Lip(A)(1 + θ·Lip(T))`. Otherwise
    /// the constant is estimated from paired transitions on a grid.
    pub fn lipschitz(&self) -> LipschitzBound {
        if self.eigen.is_none() {
            if self.potential.constant_value().is_some() {
                return LipschitzBound { value: 0.0, certified: true };
            }
            if let (true, Some(lt)) = (self.potential.is_certified(), self.ics.forward_lipschitz()) {
                let value = self.potential.lipschitz() * (1.0 + self.ics.theta() * lt);
                return LipschitzBound { value, certified: true };
            }
        }
        LipschitzBound { value: self.estimate_lipschitz(96) * LIPSCHITZ_SAFETY, certified: false }
    }

    /// Largest `|A_h(x→yᵢ) − A_h(x'→y'ᵢ)| / d(yᵢ, y'ᵢ)` over paired branches of grid pairs.
    pub fn estimate_lipschitz(&self, n: usize) -> f64 {
        let space = self.ics.space();
        let pts = space.grid_points(n);
        let logs: Vec<Vec<(Point, f64)>> = pts.iter().map(|x| self.log_weights(x)).collect();
        let mut best: f64 = 0.0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                for (a, b) in self.ics.paired_unchecked(&pts[i], &pts[j]) {
                    let d = space.distance(&a, &b);
                    if d <= 0.0 {
                        continue;
                    }
                    let wa = nearest(space, &logs[i], &a);
                    let wb = nearest(space, &logs[j], &b);
                    best = best.max((wa - wb).abs() / d);
                }
            }
        }
        best
    }
}

fn nearest(space: &crate::space::PhaseSpace, items: &[(Point, f64)], p: &Point) -> f64 {
    items
        .iter()
        .min_by(|(a, _), (b, _)| space.distance(a, p).total_cmp(&space.distance(b, p)))
        .map(|(_, w)| *w)
        .unwrap()
}

/// `M = Lip(A)/(1−θ)`, `M̃ = (e^{M·diam} − 1)/diam`, `M′ = M + 2M̃`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityConstants {
    pub theta: f64,
    pub diam: f64,
    pub lip: f64,
    pub m: f64,
    pub m_tilde: f64,
    pub m_prime: f64,
}

impl RegularityConstants {
    pub fn new(theta: f64, diam: f64, lip: f64) -> Self {
        let m = lip / (1.0 - theta);
        let m_tilde = (m * diam).exp_m1() / diam;
        Self { theta, diam, lip, m, m_tilde, m_prime: m + 2.0 * m_tilde }
    }

    pub fn for_operator(op: &TransferOperator) -> Self {
        Self::new(op.ics.theta(), op.ics.space().diameter(), op.potential.lipschitz())
    }
}

/// Slack tolerance for bound checks carried out in log space.
const LOG_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SequenceBoundReport {
    pub pairs: usize,
    /// Largest `A^t(s) − A^t(r) − M d(x,y)`.
    pub max_raw_excess: f64,
    pub raw_violations: usize,
    /// Largest `A_h^t(s) − A_h^t(r) − M′ d(x,y)`.
    pub max_normalized_excess: f64,
    pub normalized_violations: usize,
}

impl SequenceBoundReport {
    pub fn holds(&self) -> bool {
        self.raw_violations == 0 && self.normalized_violations == 0
    }
}

/// Checks `e^{A^t(s)−A^t(r)} ≤ e^{M d(x,y)}` and, when a normalized operator is
/// given, `e^{A_h^t(s)−A_h^t(r)} ≤ e^{M′ d(x,y)}` over all paired sequences.
pub fn check_sequence_bound(
    op: &TransferOperator,
    normalized: Option<&NormalizedOperator>,
    x: &Point,
    y: &Point,
    t: usize,
) -> Result<SequenceBoundReport> {
    let c = RegularityConstants::for_operator(op);
    let d = op.ics.space().distance(x, y);
    let mut rep = SequenceBoundReport {
        max_raw_excess: f64::NEG_INFINITY,
        max_normalized_excess: f64::NEG_INFINITY,
        ..Default::default()
    };
    for (s, r) in paired_sequences(&op.ics, x, y, t)? {
        rep.pairs += 1;
        let raw: f64 =
            s.points[1..].iter().zip(&r.points[1..]).map(|(a, b)| op.potential.eval(a) - op.potential.eval(b)).sum();
        let excess = raw - c.m * d;
        rep.max_raw_excess = rep.max_raw_excess.max(excess);
        if excess > LOG_TOL {
            rep.raw_violations += 1;
        }
        if let Some(p) = normalized {
            let log_s: f64 = s.points.windows(2).map(|w| p.log_weight_to(&w[0], &w[1])).sum();
            let log_r: f64 = r.points.windows(2).map(|w| p.log_weight_to(&w[0], &w[1])).sum();
            let excess = log_s - log_r - c.m_prime * d;
            rep.max_normalized_excess = rep.max_normalized_excess.max(excess);
            if excess > LOG_TOL {
                rep.normalized_violations += 1;
            }
        }
    }
    if normalized.is_none() {
        rep.max_normalized_excess = 0.0;
    }
    Ok(rep)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PowerRegularityReport {
    /// Largest `|Lⁿ1(x) − Lⁿ1(y)| − M̃ Lⁿ1(x) d(x,y)` relative to `Lⁿ1(x)`.
    pub max_lipschitz_excess: f64,
    pub lipschitz_violations: usize,
    /// Largest `Lⁿ1(x)/Lⁿ1(y)`.
    pub max_quotient: f64,
    /// `exp(M·diam)`.
    pub quotient_bound: f64,
}

/// Checks `|Lⁿ1(x) − Lⁿ1(y)| ≤ M̃ Lⁿ1(x) d(x,y)` and the bounded quotient for `n ≤ n_max`.
pub fn check_power_regularity(
    op: &TransferOperator,
    x: &Point,
    y: &Point,
    n_max: usize,
) -> Result<PowerRegularityReport> {
    let c = RegularityConstants::for_operator(op);
    let d = op.ics.space().distance(x, y);
    let lx = op.power_sums(x, n_max)?;
    let ly = op.power_sums(y, n_max)?;
    let mut rep = PowerRegularityReport {
        max_lipschitz_excess: f64::NEG_INFINITY,
        quotient_bound: (c.m * c.diam).exp(),
        ..Default::default()
    };
    for (a, b) in lx.iter().zip(&ly) {
        let excess = ((a - b).abs() - c.m_tilde * a * d) / a;
        rep.max_lipschitz_excess = rep.max_lipschitz_excess.max(excess);
        if excess > LOG_TOL {
            rep.lipschitz_violations += 1;
        }
        rep.max_quotient = rep.max_quotient.max(a / b).max(b / a);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PotentialSpec;
    use crate::space::PhaseSpace;

    fn sin_potential() -> Potential {
        Potential::from_spec(PotentialSpec::Sine { base: -2f64.ln(), amplitude: 0.1 }, &PhaseSpace::circle()).unwrap()
    }

    #[test]
    fn apply_examples() {
        let f = Ics::doubling_map();
        let norm = TransferOperator::new(f.clone(), Potential::constant(-2f64.ln()));
        assert!((norm.apply(|_| 1.0, &Point::Real(0.3)) - 1.0).abs() < 1e-15);
        let zero = TransferOperator::new(f.clone(), Potential::constant(0.0));
        assert_eq!(zero.apply(|_| 1.0, &Point::Real(0.3)), 2.0);
        let lin =
            TransferOperator::new(f, Potential::from_fn(|p| p.first_coordinate(), Some(1.0), &PhaseSpace::circle()));
        assert!((lin.apply(|_| 1.0, &Point::Real(0.0)) - (1.0 + 0.5f64.exp())).abs() < 1e-12);
    }

    #[test]
    fn apply_n_examples() {
        let f = Ics::doubling_map();
        let zero = TransferOperator::new(f.clone(), Potential::constant(0.0));
        assert_eq!(zero.apply_n(|_| 1.0, &Point::Real(0.7), 5).unwrap(), 32.0);
        let norm = TransferOperator::new(f, Potential::constant(-2f64.ln()));
        let v = norm.apply_n(|p| p.first_coordinate(), &Point::Real(0.0), 2).unwrap();
        assert!((v - 0.375).abs() < 1e-15);
        let a = norm.apply(|p| p.first_coordinate(), &Point::Real(0.2));
        assert_eq!(norm.apply_n(|p| p.first_coordinate(), &Point::Real(0.2), 1).unwrap(), a);
    }

    #[test]
    fn constant_potential_eigendata() {
        let op = TransferOperator::new(Ics::tent_map(2.5).unwrap(), Potential::constant(0.3));
        let e = rpf_eigendata(&op, Grid::for_space(op.ics().space(), 64).unwrap(), 1e-10).unwrap();
        assert!((e.rho - 2.0 * 0.3f64.exp()).abs() < 1e-10);
        assert!(e.values.iter().all(|h| (h - 1.0).abs() < 1e-10));
    }

    #[test]
    fn normalize_constant_zero() {
        let op =
            TransferOperator::new(Ics::expanding_circle_map(3, Default::default()).unwrap(), Potential::constant(0.0));
        let p = normalize(&op, Grid::for_space(op.ics().space(), 64).unwrap(), 1e-10).unwrap();
        for (_, w) in p.log_weights(&Point::Real(0.42)) {
            assert!((w + 3f64.ln()).abs() < 1e-10);
        }
    }

    #[test]
    fn normalized_sums_to_one() {
        let op = TransferOperator::new(Ics::doubling_map(), sin_potential());
        let p = normalize(&op, Grid::for_space(op.ics().space(), 512).unwrap(), 1e-10).unwrap();
        for i in 0..512 {
            let x = Point::Real(i as f64 / 512.0);
            assert!((p.apply(|_| 1.0, &x) - 1.0).abs() < 1e-12);
        }
        assert!(p.normalization_defect() < 1e-9);
    }

    #[test]
    fn series_is_constant_for_normalized_constant() {
        let op = TransferOperator::new(Ics::doubling_map(), Potential::constant(-2f64.ln()));
        let pts = PhaseSpace::circle().grid_points(8);
        let h = series_eigenfunction_check(&op, 1.0, 0.9, &pts, &Point::Real(0.0), 10).unwrap();
        assert!(h.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(series_eigenfunction_check(&op, 1.0, 1.0, &pts, &Point::Real(0.0), 10).is_err());
    }

    #[test]
    fn constant_potential_sequence_ratio_is_one() {
        let op = TransferOperator::new(Ics::doubling_map(), Potential::constant(-2f64.ln()));
        let rep = check_sequence_bound(&op, None, &Point::Real(0.1), &Point::Real(0.4), 4).unwrap();
        assert_eq!(rep.pairs, 16);
        assert!(rep.holds());
        assert!(rep.max_raw_excess.abs() < 1e-15);
    }

    #[test]
    fn regularity_constants() {
        let c = RegularityConstants::new(0.5, 1.0, 1.0);
        assert_eq!(c.m, 2.0);
        assert!((c.m_tilde - (2f64.exp() - 1.0)).abs() < 1e-14);
        assert!((c.m_prime - 14.7781121978613).abs() < 1e-12);
    }
}
