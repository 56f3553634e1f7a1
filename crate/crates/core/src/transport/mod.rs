//! Exact 1-Wasserstein distance between finitely supported measures.
//!
//! [`wasserstein1`] solves the transportation problem on the complete
//! bipartite support graph and returns a plan together with dual potentials
//! certifying optimality. [`wasserstein1_1d`] and [`wasserstein1_ultrametric`]
//! are closed forms used as independent oracles and, through [`w1`], as fast
//! paths for large supports.

mod closed;
mod simplex;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::measure::DiscreteMeasure;
use crate::space::{PhaseSpace, Point, SpaceKind};

pub use closed::{wasserstein1_1d, wasserstein1_ultrametric};

/// Relative mass mismatch tolerated between the two marginals.
pub const MASS_TOLERANCE: f64 = 1e-10;
/// Largest `|supp μ|·|supp ν|` handed to the flow solver.
pub const FLOW_PAIR_CAP: usize = 1 << 26;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    /// `(source index, target index, mass)`.
    pub entries: Vec<(usize, usize, f64)>,
    pub cost: f64,
}

impl TransportPlan {
    /// Largest deviation of the row and column sums from the marginals.
    pub fn marginal_error(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        let mut rows: Vec<f64> = mu.atoms().iter().map(|(_, w)| -w).collect();
        let mut cols: Vec<f64> = nu.atoms().iter().map(|(_, w)| -w).collect();
        for &(i, j, w) in &self.entries {
            rows[i] += w;
            cols[j] += w;
        }
        rows.iter().chain(&cols).fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn recompute_cost(&self, space: &PhaseSpace, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        self.entries.iter().map(|&(i, j, w)| w * space.distance(&mu.atoms()[i].0, &nu.atoms()[j].0)).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct W1Solution {
    pub value: f64,
    pub plan: TransportPlan,
    /// Potentials with `φᵢ + ψⱼ ≤ d(xᵢ, yⱼ)`, tight on the plan.
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    /// `Σφμ + Σψν`.
    pub dual_value: f64,
    /// Worst violation of `φᵢ + ψⱼ ≤ d(xᵢ, yⱼ)`.
    pub dual_violation: f64,
    /// Bound on the value error caused by integer rounding of the weights;
    /// zero when the optimal basis was re-solved exactly.
    pub rounding_bound: f64,
    pub pivots: usize,
}

impl W1Solution {
    pub fn duality_gap(&self) -> f64 {
        self.value - self.dual_value
    }
}

fn check_masses(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    let (a, b) = (mu.total_mass(), nu.total_mass());
    if mu.is_empty() || nu.is_empty() {
        return input("measures must have non-empty support");
    }
    if (a - b).abs() > MASS_TOLERANCE * a.max(b).max(1.0) {
        return input(format!("total masses differ: {a} vs {b}"));
    }
    Ok(a)
}

/// Exact `W₁` by network simplex, with a plan and a duality certificate.
pub fn wasserstein1(space: &PhaseSpace, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<W1Solution> {
    let mass = check_masses(mu, nu)?;
    mu.check_support(space)?;
    nu.check_support(space)?;
    let (n, m) = (mu.len(), nu.len());
    if n.saturating_mul(m) > FLOW_PAIR_CAP {
        return Err(Error::Resource(format!("{n}×{m} support pairs exceed the flow solver cap; merge atoms first")));
    }
    let xs: Vec<&Point> = mu.atoms().iter().map(|(p, _)| p).collect();
    let ys: Vec<&Point> = nu.atoms().iter().map(|(p, _)| p).collect();
    let a: Vec<f64> = mu.atoms().iter().map(|(_, w)| *w).collect();
    // rescale ν so both sides carry exactly the same mass
    let ratio = mass / nu.total_mass();
    let b: Vec<f64> = nu.atoms().iter().map(|(_, w)| w * ratio).collect();
    let cost = |i: usize, j: usize| space.distance(xs[i], ys[j]);
    let sol = simplex::solve(n, m, &a, &b, &cost)?;

    let value: f64 = sol.flows.iter().map(|&(i, j, w)| w * cost(i, j)).sum();
    let dual_value: f64 = sol.phi.iter().zip(&a).map(|(p, w)| p * w).sum::<f64>()
        + sol.psi.iter().zip(&b).map(|(p, w)| p * w).sum::<f64>();
    let mut dual_violation: f64 = 0.0;
    for i in 0..n {
        for j in 0..m {
            dual_violation = dual_violation.max(sol.phi[i] + sol.psi[j] - cost(i, j));
        }
    }
    let rounding_bound =
        if sol.clamped > 1e-12 * mass { (n + m) as f64 * mass / simplex::SCALE as f64 * space.diameter() } else { 0.0 };
    Ok(W1Solution {
        value,
        plan: TransportPlan { entries: sol.flows, cost: value },
        phi: sol.phi,
        psi: sol.psi,
        dual_value,
        dual_violation: dual_violation.max(0.0),
        rounding_bound,
        pivots: sol.pivots,
    })
}

/// `W₁` by the cheapest exact route: closed forms on untransformed circles,
/// intervals and symbolic spaces, the flow solver elsewhere.
pub fn w1(space: &PhaseSpace, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    if !space.is_transformed() {
        match space.kind {
            SpaceKind::Circle | SpaceKind::Interval { .. } => return wasserstein1_1d(space, mu, nu),
            SpaceKind::Symbolic { .. } => return wasserstein1_ultrametric(space, mu, nu),
            SpaceKind::Euclidean { .. } => {}
        }
    }
    if mu.len() == 1 && nu.len() == 1 {
        check_masses(mu, nu)?;
        return Ok(mu.total_mass() * space.distance(&mu.atoms()[0].0, &nu.atoms()[0].0));
    }
    Ok(wasserstein1(space, mu, nu)?.value)
}

/// Merges atoms lying within `eps` of a common representative. Every atom
/// moves at most `eps`, so `W₁(result, μ) ≤ eps·mass(μ)`.
pub fn merge_atoms(space: &PhaseSpace, mu: &DiscreteMeasure, eps: f64) -> DiscreteMeasure {
    if eps <= 0.0 || mu.len() < 2 {
        return mu.clone();
    }
    if space.is_transformed() {
        return merge_greedy(space, mu, eps);
    }
    match &space.kind {
        SpaceKind::Circle | SpaceKind::Interval { .. } => merge_sorted(mu, eps),
        SpaceKind::Symbolic { theta, .. } => merge_prefix(mu, eps, *theta),
        SpaceKind::Euclidean { .. } => merge_cells(space, mu, eps),
    }
}

fn merge_sorted(mu: &DiscreteMeasure, eps: f64) -> DiscreteMeasure {
    let mut atoms: Vec<(f64, f64)> = mu.atoms().iter().map(|(p, w)| (p.first_coordinate(), *w)).collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::new();
    let mut i = 0;
    while i < atoms.len() {
        let anchor = atoms[i].0;
        let (mut mass, mut moment) = (0.0, 0.0);
        while i < atoms.len() && atoms[i].0 - anchor <= eps {
            mass += atoms[i].1;
            moment += atoms[i].1 * (atoms[i].0 - anchor);
            i += 1;
        }
        // the weighted mean stays inside [anchor, anchor + eps]
        out.push((Point::Real(anchor + moment / mass), mass));
    }
    DiscreteMeasure::from_raw(out)
}

fn merge_prefix(mu: &DiscreteMeasure, eps: f64, theta: f64) -> DiscreteMeasure {
    let mut len = 0usize;
    let mut scale = 1.0;
    while scale > eps {
        scale *= theta;
        len += 1;
    }
    let mut index: HashMap<Vec<u8>, usize> = HashMap::new();
    let mut out: Vec<(Point, f64)> = Vec::new();
    for (p, w) in mu.atoms() {
        let Point::Word(word) = p else { continue };
        let key = word[..len.min(word.len())].to_vec();
        match index.get(&key) {
            Some(&k) => out[k].1 += w,
            None => {
                index.insert(key, out.len());
                out.push((p.clone(), *w));
            }
        }
    }
    DiscreteMeasure::from_raw(out)
}

fn merge_cells(space: &PhaseSpace, mu: &DiscreteMeasure, eps: f64) -> DiscreteMeasure {
    let side = eps / (space.dimension() as f64).sqrt();
    let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut sums: Vec<(Vec<f64>, f64)> = Vec::new();
    for (p, w) in mu.atoms() {
        let Point::Vector(v) = p else { continue };
        let key: Vec<i64> = v.iter().map(|c| (c / side).floor() as i64).collect();
        let k = *index.entry(key).or_insert_with(|| {
            sums.push((vec![0.0; v.len()], 0.0));
            sums.len() - 1
        });
        for (acc, c) in sums[k].0.iter_mut().zip(v) {
            *acc += w * c;
        }
        sums[k].1 += w;
    }
    // a convex region contains the weighted mean of its points
    DiscreteMeasure::from_raw(
        sums.into_iter().map(|(s, w)| (Point::Vector(s.iter().map(|c| c / w).collect()), w)).collect(),
    )
}

fn merge_greedy(space: &PhaseSpace, mu: &DiscreteMeasure, eps: f64) -> DiscreteMeasure {
    let atoms = mu.atoms();
    let mut taken = vec![false; atoms.len()];
    let mut out = Vec::new();
    for i in 0..atoms.len() {
        if taken[i] {
            continue;
        }
        let mut mass = 0.0;
        for j in i..atoms.len() {
            if !taken[j] && space.distance(&atoms[i].0, &atoms[j].0) <= eps {
                taken[j] = true;
                mass += atoms[j].1;
            }
        }
        out.push((atoms[i].0.clone(), mass));
    }
    DiscreteMeasure::from_raw(out)
}

/// A part `Aᵢ` of a partition: a membership test and its diameter.
pub struct Part {
    contains: Box<dyn Fn(&Point) -> bool + Send + Sync>,
    diameter: f64,
    bounds: Option<(f64, f64)>,
}

impl Part {
    pub fn new(contains: impl Fn(&Point) -> bool + Send + Sync + 'static, diameter: f64) -> Self {
        Self { contains: Box::new(contains), diameter, bounds: None }
    }

    /// Closed interval `[lo, hi]` of an interval space.
    pub fn interval(lo: f64, hi: f64) -> Self {
        Self {
            contains: Box::new(move |p| p.real().is_some_and(|x| x >= lo && x <= hi)),
            diameter: hi - lo,
            bounds: Some((lo, hi)),
        }
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn contains(&self, p: &Point) -> bool {
        (self.contains)(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionPlan {
    pub plan: TransportPlan,
    /// `Σᵢ min(μ(Aᵢ), ν(Aᵢ))`, as a fraction of the total mass.
    pub m: f64,
    /// Largest part diameter.
    pub c: f64,
    /// Diameter of the union of the parts.
    pub big_c: f64,
    /// Mass moved inside the parts.
    pub inner_mass: f64,
    /// `m·c + (1−m)·C`, times the total mass.
    pub bound: f64,
}

/// The coupling from the proof of the partition estimate: inside each part
/// the common mass `min(μ(Aᵢ), ν(Aᵢ))` is coupled by a product plan, and the
/// remainders are coupled by one global product plan.
///
/// `C` is the hull of interval parts, otherwise the space diameter.
pub fn partition_plan(
    space: &PhaseSpace,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    parts: &[Part],
) -> Result<PartitionPlan> {
    let mass = check_masses(mu, nu)?;
    if parts.is_empty() {
        return input("partition needs at least one part");
    }
    let locate = |p: &Point| -> Result<usize> {
        let mut hits = parts.iter().enumerate().filter(|(_, a)| a.contains(p)).map(|(i, _)| i);
        match (hits.next(), hits.next()) {
            (Some(i), None) => Ok(i),
            (None, _) => input(format!("atom {p:?} lies outside every part")),
            (Some(_), Some(_)) => input(format!("parts overlap at {p:?}")),
        }
    };
    let mu_part: Vec<usize> = mu.atoms().iter().map(|(p, _)| locate(p)).collect::<Result<_>>()?;
    let nu_part: Vec<usize> = nu.atoms().iter().map(|(p, _)| locate(p)).collect::<Result<_>>()?;
    let k = parts.len();
    let mut a = vec![0.0; k];
    let mut b = vec![0.0; k];
    for ((_, w), &i) in mu.atoms().iter().zip(&mu_part) {
        a[i] += w;
    }
    for ((_, w), &i) in nu.atoms().iter().zip(&nu_part) {
        b[i] += w;
    }
    let common: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.min(*y)).collect();
    let inner: f64 = common.iter().sum();

    let mut entries: HashMap<(usize, usize), f64> = HashMap::new();
    let mut out_mu = Vec::new();
    let mut out_nu = Vec::new();
    for (i, (_, w)) in mu.atoms().iter().enumerate() {
        let p = mu_part[i];
        out_mu.push((i, w * (1.0 - common[p] / a[p])));
    }
    for (j, (_, w)) in nu.atoms().iter().enumerate() {
        let p = nu_part[j];
        out_nu.push((j, w * (1.0 - common[p] / b[p])));
    }
    for (i, (_, wi)) in mu.atoms().iter().enumerate() {
        let p = mu_part[i];
        if common[p] == 0.0 {
            continue;
        }
        for (j, (_, wj)) in nu.atoms().iter().enumerate() {
            if nu_part[j] == p {
                // μᵢ^in ⊗ νᵢ^in / mᵢ with μᵢ^in = μ|Aᵢ·mᵢ/μ(Aᵢ)
                *entries.entry((i, j)).or_default() += wi * wj * common[p] / (a[p] * b[p]);
            }
        }
    }
    let rest = mass - inner;
    if rest > 0.0 {
        let rest_mu: f64 = out_mu.iter().map(|x| x.1).sum();
        let rest_nu: f64 = out_nu.iter().map(|x| x.1).sum();
        if rest_mu > 0.0 && rest_nu > 0.0 {
            for &(i, wi) in out_mu.iter().filter(|x| x.1 > 0.0) {
                for &(j, wj) in out_nu.iter().filter(|x| x.1 > 0.0) {
                    *entries.entry((i, j)).or_default() += wi * wj / rest_nu * (rest / rest_mu);
                }
            }
        }
    }
    let mut entries: Vec<(usize, usize, f64)> = entries.into_iter().map(|((i, j), w)| (i, j, w)).collect();
    entries.sort_by_key(|&(i, j, _)| (i, j));
    let cost = entries.iter().map(|&(i, j, w)| w * space.distance(&mu.atoms()[i].0, &nu.atoms()[j].0)).sum();
    let c = parts.iter().map(|p| p.diameter).fold(0.0, f64::max);
    let big_c = match parts.iter().map(|p| p.bounds).collect::<Option<Vec<_>>>() {
        Some(b) if !space.is_transformed() && matches!(space.kind, SpaceKind::Interval { .. }) => {
            let lo = b.iter().map(|x| x.0).fold(f64::INFINITY, f64::min);
            let hi = b.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
            hi - lo
        }
        _ => space.diameter(),
    };
    let m = inner / mass;
    Ok(PartitionPlan {
        plan: TransportPlan { entries, cost },
        m,
        c,
        big_c,
        inner_mass: inner,
        bound: mass * (m * c + (1.0 - m) * big_c),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PushforwardReport {
    /// Largest `W₁(P*δx, P*δy)/d(x,y)` over the Dirac pairs.
    pub c_dirac: f64,
    /// Largest `W₁(P*μ, P*ν)/W₁(μ, ν)` over the measure pairs.
    pub max_ratio: f64,
    pub pairs_checked: usize,
    pub violations: usize,
}

impl PushforwardReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Checks that a linear map on measures is `C_dirac`-Lipschitz on the given
/// measure pairs once it is on the given Dirac pairs.
pub fn pushforward_inequality_check(
    space: &PhaseSpace,
    p_star: impl Fn(&DiscreteMeasure) -> Result<DiscreteMeasure>,
    diracs: &[(Point, Point)],
    pairs: &[(DiscreteMeasure, DiscreteMeasure)],
) -> Result<PushforwardReport> {
    let mut c_dirac: f64 = 0.0;
    for (x, y) in diracs {
        let d = space.distance(x, y);
        if d == 0.0 {
            continue;
        }
        let px = p_star(&DiscreteMeasure::dirac(x.clone()))?;
        let py = p_star(&DiscreteMeasure::dirac(y.clone()))?;
        c_dirac = c_dirac.max(w1(space, &px, &py)? / d);
    }
    let mut max_ratio: f64 = 0.0;
    let mut violations = 0;
    for (mu, nu) in pairs {
        let before = w1(space, mu, nu)?;
        let after = w1(space, &p_star(mu)?, &p_star(nu)?)?;
        if after > c_dirac * before * (1.0 + 1e-9) + 1e-15 {
            violations += 1;
        }
        if before > 0.0 {
            max_ratio = max_ratio.max(after / before);
        }
    }
    Ok(PushforwardReport { c_dirac, max_ratio, pairs_checked: pairs.len(), violations })
}

#[cfg(test)]
mod tests;
