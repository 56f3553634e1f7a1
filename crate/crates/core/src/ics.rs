//! Iterated contraction systems.
//!
//! An [`Ics`] sends each point to a `k`-multiset of points, and for any two
//! base points provides a pairing of their image multisets in which each pair
//! is at most `θ` times as far apart as the base points.

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::multiset::MultiSet;
use crate::space::{
    circle_displacement, euclid, wrap_unit, PhaseSpace, Point, SpaceKind, DEFAULT_SYMBOLIC_DEPTH, POINT_TOLERANCE,
};

/// Periodic perturbation `p` of a circle map lift `z ↦ k·z + p(z)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Perturbation {
    #[default]
    None,
    Shift {
        eps: f64,
    },
    /// `ε·sin(2πz)`.
    Sine {
        eps: f64,
    },
}

impl Perturbation {
    pub fn value(&self, z: f64) -> f64 {
        match *self {
            Perturbation::None => 0.0,
            Perturbation::Shift { eps } => eps,
            Perturbation::Sine { eps } => eps * (std::f64::consts::TAU * z).sin(),
        }
    }

    fn derivative(&self, z: f64) -> f64 {
        match *self {
            Perturbation::Sine { eps } => eps * std::f64::consts::TAU * (std::f64::consts::TAU * z).cos(),
            _ => 0.0,
        }
    }

    pub fn sup_abs(&self) -> f64 {
        match *self {
            Perturbation::None => 0.0,
            Perturbation::Shift { eps } | Perturbation::Sine { eps } => eps.abs(),
        }
    }

    pub fn derivative_sup(&self) -> f64 {
        match *self {
            Perturbation::Sine { eps } => eps.abs() * std::f64::consts::TAU,
            _ => 0.0,
        }
    }
}

/// `x ↦ linear·x + offset` on `ℝ^d`, `linear` stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub linear: Vec<f64>,
    pub offset: Vec<f64>,
}

impl AffineMap {
    pub fn scalar(ratio: f64, offset: f64) -> Self {
        Self { linear: vec![ratio], offset: vec![offset] }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d).map(|i| self.offset[i] + (0..d).map(|j| self.linear[i * d + j] * x[j]).sum::<f64>()).collect()
    }

    /// Operator norm of the linear part (largest singular value).
    pub fn ratio(&self) -> f64 {
        let d = self.dim();
        if d == 1 {
            return self.linear[0].abs();
        }
        // power iteration on LᵀL
        let mut v = vec![1.0 / (d as f64).sqrt(); d];
        let mut sigma2 = 0.0;
        for _ in 0..500 {
            let lv: Vec<f64> = (0..d).map(|i| (0..d).map(|j| self.linear[i * d + j] * v[j]).sum()).collect();
            let mut w: Vec<f64> = (0..d).map(|j| (0..d).map(|i| self.linear[i * d + j] * lv[i]).sum()).collect();
            let norm = w.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            w.iter_mut().for_each(|c| *c /= norm);
            let done = (norm - sigma2).abs() <= 1e-15 * norm;
            sigma2 = norm;
            v = w;
            if done {
                break;
            }
        }
        sigma2.sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemSpec {
    /// Inverse branches of `x ↦ 2x mod 1`.
    Doubling,
    /// Inverse branches of `x ↦ degree·x + p(x) mod 1`.
    CircleMap {
        degree: u32,
        #[serde(default)]
        perturbation: Perturbation,
    },
    /// Inverse branches of the unimodal tent map on `[0,1]` with left slope
    /// `slope` and right slope `-slope/(slope-1)`.
    Tent {
        slope: f64,
    },
    /// Inverse branches of the shift: prepend a symbol.
    FullShift {
        k: u8,
        theta: f64,
        #[serde(default = "default_depth")]
        depth: usize,
    },
    Ifs {
        space: SpaceKind,
        maps: Vec<AffineMap>,
    },
    /// `r·e^{2πiα} ↦ {r/2·e^{iπα}, r/2·e^{iπ(α+1)}}` on the closed unit disc.
    DiscFold,
    /// Right isosceles triangle folded along its altitude and dilated back.
    TriangleFold,
}

fn default_depth() -> usize {
    DEFAULT_SYMBOLIC_DEPTH
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ics {
    spec: SystemSpec,
    space: PhaseSpace,
    arity: usize,
    theta: f64,
}

impl Ics {
    pub fn from_spec(spec: SystemSpec) -> Result<Self> {
        match spec {
            SystemSpec::Doubling => Ok(Self::doubling_map()),
            SystemSpec::CircleMap { degree, perturbation } => Self::expanding_circle_map(degree, perturbation),
            SystemSpec::Tent { slope } => Self::tent_map(slope),
            SystemSpec::FullShift { k, theta, depth } => Self::full_shift_with_depth(k, theta, depth),
            SystemSpec::Ifs { space, maps } => Self::from_ifs(PhaseSpace::new(space)?, maps),
            SystemSpec::DiscFold => Ok(Self::disc_fold()),
            SystemSpec::TriangleFold => Ok(Self::triangle_fold()),
        }
    }

    pub fn doubling_map() -> Self {
        Self { spec: SystemSpec::Doubling, space: PhaseSpace::circle(), arity: 2, theta: 0.5 }
    }

    pub fn expanding_circle_map(degree: u32, perturbation: Perturbation) -> Result<Self> {
        if degree < 2 {
            return input(format!("circle map degree must be at least 2, got {degree}"));
        }
        let min_slope = degree as f64 - perturbation.derivative_sup();
        if !(min_slope > 1.0) {
            return input(format!("perturbation destroys expansion (min slope {min_slope})"));
        }
        Ok(Self {
            spec: SystemSpec::CircleMap { degree, perturbation },
            space: PhaseSpace::circle(),
            arity: degree as usize,
            theta: 1.0 / min_slope,
        })
    }

    pub fn tent_map(slope: f64) -> Result<Self> {
        if !(slope > 1.0 && slope.is_finite()) {
            return input(format!("tent slope must exceed 1, got {slope}"));
        }
        let right = slope / (slope - 1.0);
        Ok(Self {
            spec: SystemSpec::Tent { slope },
            space: PhaseSpace::unit_interval(),
            arity: 2,
            theta: (1.0 / slope).max(1.0 / right),
        })
    }

    pub fn full_shift(k: u8, theta: f64) -> Result<Self> {
        Self::full_shift_with_depth(k, theta, DEFAULT_SYMBOLIC_DEPTH)
    }

    pub fn full_shift_with_depth(k: u8, theta: f64, depth: usize) -> Result<Self> {
        let space = PhaseSpace::symbolic(k, theta, depth)?;
        Ok(Self { spec: SystemSpec::FullShift { k, theta, depth }, space, arity: k as usize, theta })
    }

    pub fn from_ifs(space: PhaseSpace, maps: Vec<AffineMap>) -> Result<Self> {
        if maps.is_empty() {
            return input("an IFS needs at least one map");
        }
        let dim = match &space.kind {
            SpaceKind::Interval { .. } => 1,
            SpaceKind::Euclidean { .. } => space.dimension(),
            other => return input(format!("IFS maps need an interval or euclidean space, got {other:?}")),
        };
        let mut theta: f64 = 0.0;
        for m in &maps {
            if m.dim() != dim || m.linear.len() != dim * dim {
                return input(format!("IFS map has dimension {} but the space has {dim}", m.dim()));
            }
            theta = theta.max(m.ratio());
        }
        if !(theta < 1.0) {
            return input(format!("IFS maps must be contractions, largest ratio {theta}"));
        }
        // the maps must send the space into itself; checked on the convex hull corners
        let corners: Vec<Vec<f64>> = match &space.kind {
            SpaceKind::Interval { a, b } => vec![vec![*a], vec![*b]],
            SpaceKind::Euclidean { region: crate::space::Region::Triangle { vertices } } => {
                vertices.iter().map(|v| v.to_vec()).collect()
            }
            SpaceKind::Euclidean { region: crate::space::Region::Box { lo, hi } } => (0..1usize << dim)
                .map(|mask| (0..dim).map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] }).collect())
                .collect(),
            _ => Vec::new(),
        };
        for c in &corners {
            for m in &maps {
                let img = m.apply(c);
                let p = if dim == 1 && matches!(space.kind, SpaceKind::Interval { .. }) {
                    Point::Real(img[0])
                } else {
                    Point::Vector(img)
                };
                if !space.contains(&p) {
                    return input(format!("IFS map sends {c:?} to {p:?}, outside the space"));
                }
            }
        }
        let arity = maps.len();
        Ok(Self { spec: SystemSpec::Ifs { space: space.kind.clone(), maps }, space, arity, theta })
    }

    /// `{x/3, x/3 + 2/3}` on `[0,1]`.
    pub fn cantor() -> Self {
        Self::from_ifs(
            PhaseSpace::unit_interval(),
            vec![AffineMap::scalar(1.0 / 3.0, 0.0), AffineMap::scalar(1.0 / 3.0, 2.0 / 3.0)],
        )
        .expect("cantor IFS is valid")
    }

    pub fn disc_fold() -> Self {
        Self { spec: SystemSpec::DiscFold, space: PhaseSpace::unit_disc(), arity: 2, theta: 0.5 }
    }

    pub fn triangle_fold() -> Self {
        Self {
            spec: SystemSpec::TriangleFold,
            space: PhaseSpace::right_triangle(),
            arity: 2,
            theta: std::f64::consts::FRAC_1_SQRT_2,
        }
    }

    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    pub fn space(&self) -> &PhaseSpace {
        &self.space
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn name(&self) -> &'static str {
        match self.spec {
            SystemSpec::Doubling => "doubling",
            SystemSpec::CircleMap { .. } => "circle_map",
            SystemSpec::Tent { .. } => "tent",
            SystemSpec::FullShift { .. } => "full_shift",
            SystemSpec::Ifs { .. } => "ifs",
            SystemSpec::DiscFold => "disc_fold",
            SystemSpec::TriangleFold => "triangle_fold",
        }
    }

    /// Circle-map data `(degree, perturbation)` when the system is one.
    pub fn circle_map_data(&self) -> Option<(u32, Perturbation)> {
        match self.spec {
            SystemSpec::Doubling => Some((2, Perturbation::None)),
            SystemSpec::CircleMap { degree, perturbation } => Some((degree, perturbation)),
            _ => None,
        }
    }

    /// The `k` images of `x` in branch order, repeated according to multiplicity.
    pub fn images(&self, x: &Point) -> Vec<Point> {
        match &self.spec {
            SystemSpec::Doubling | SystemSpec::CircleMap { .. } => {
                let (degree, pert) = self.circle_map_data().unwrap();
                let x = x.real().expect("circle point");
                circle_targets(degree, pert, x).map(|v| Point::Real(wrap_unit(lift_inverse(degree, pert, v)))).collect()
            }
            SystemSpec::Tent { slope } => {
                let y = x.real().expect("interval point");
                let right = slope / (slope - 1.0);
                vec![Point::Real(y / slope), Point::Real(1.0 - y / right)]
            }
            SystemSpec::FullShift { k, .. } => {
                let Point::Word(w) = x else { panic!("symbolic point expected") };
                (0..*k).map(|s| Point::Word(prepend(s, w))).collect()
            }
            SystemSpec::Ifs { maps, .. } => maps.iter().map(|m| ifs_apply(m, x)).collect(),
            SystemSpec::DiscFold => {
                let Point::Vector(v) = x else { panic!("planar point expected") };
                let (a, b) = disc_half(v);
                vec![Point::Vector(a.to_vec()), Point::Vector(b.to_vec())]
            }
            SystemSpec::TriangleFold => {
                let Point::Vector(v) = x else { panic!("planar point expected") };
                let (x, y) = (v[0], v[1]);
                vec![
                    Point::Vector(vec![0.5 - x / 2.0 + y / 2.0, 0.5 - x / 2.0 - y / 2.0]),
                    Point::Vector(vec![0.5 - x / 2.0 - y / 2.0, 0.5 - x / 2.0 + y / 2.0]),
                ]
            }
        }
    }

    /// `F(x)` as a multiset of total count `k`.
    pub fn branches(&self, x: &Point) -> MultiSet {
        MultiSet::from_points(&self.space, self.images(x))
    }

    /// `k` pairs covering `F(x)` and `F(y)` with `d(xᵢ, yᵢ) ≤ θ·d(x, y)`.
    pub fn paired_branches(&self, x: &Point, y: &Point) -> Result<Vec<(Point, Point)>> {
        let pairs = self.paired_unchecked(x, y);
        let bound = self.theta * self.space.distance(x, y);
        for (a, b) in &pairs {
            let d = self.space.distance(a, b);
            if d > bound * (1.0 + 1e-9) + POINT_TOLERANCE {
                return Err(Error::Internal(format!(
                    "{} pairing breaks contraction: d={d:e} > θ·d(x,y)={bound:e}",
                    self.name()
                )));
            }
        }
        Ok(pairs)
    }

    pub(crate) fn paired_unchecked(&self, x: &Point, y: &Point) -> Vec<(Point, Point)> {
        match &self.spec {
            SystemSpec::Doubling | SystemSpec::CircleMap { .. } => {
                let (degree, pert) = self.circle_map_data().unwrap();
                let (xr, yr) = (x.real().expect("circle point"), y.real().expect("circle point"));
                // lift the shortest arc from x to y and follow each inverse branch along it
                let delta = circle_displacement(xr, yr);
                circle_targets(degree, pert, xr)
                    .map(|v| {
                        let a = lift_inverse(degree, pert, v);
                        let b = lift_inverse(degree, pert, v + delta);
                        (Point::Real(wrap_unit(a)), Point::Real(wrap_unit(b)))
                    })
                    .collect()
            }
            SystemSpec::DiscFold => {
                let (Point::Vector(u), Point::Vector(v)) = (x, y) else { panic!("planar points expected") };
                let (a1, a2) = disc_half(u);
                let (b1, b2) = disc_half(v);
                let (b1, b2) = if euclid(&a1, &b1) <= euclid(&a1, &b2) { (b1, b2) } else { (b2, b1) };
                vec![
                    (Point::Vector(a1.to_vec()), Point::Vector(b1.to_vec())),
                    (Point::Vector(a2.to_vec()), Point::Vector(b2.to_vec())),
                ]
            }
            // every other system pairs images branch by branch
            _ => self.images(x).into_iter().zip(self.images(y)).collect(),
        }
    }

    /// The expanding map `T` with `F = T⁻¹`, when the system comes from one.
    pub fn forward(&self, y: &Point) -> Option<Point> {
        match &self.spec {
            SystemSpec::Doubling | SystemSpec::CircleMap { .. } => {
                let (degree, pert) = self.circle_map_data().unwrap();
                let z = y.real()?;
                Some(Point::Real(wrap_unit(degree as f64 * z + pert.value(z))))
            }
            SystemSpec::Tent { slope } => {
                let z = y.real()?;
                let right = slope / (slope - 1.0);
                Some(Point::Real(if z <= 1.0 / slope { slope * z } else { right * (1.0 - z) }))
            }
            SystemSpec::FullShift { .. } => {
                let Point::Word(w) = y else { return None };
                let mut out = w[1..].to_vec();
                out.push(0);
                Some(Point::Word(out))
            }
            SystemSpec::DiscFold => {
                let Point::Vector(v) = y else { return None };
                let r = (v[0] * v[0] + v[1] * v[1]).sqrt();
                if r == 0.0 {
                    return Some(Point::Vector(vec![0.0, 0.0]));
                }
                let phi = v[1].atan2(v[0]);
                Some(Point::Vector(vec![2.0 * r * (2.0 * phi).cos(), 2.0 * r * (2.0 * phi).sin()]))
            }
            SystemSpec::TriangleFold => {
                let Point::Vector(v) = y else { return None };
                Some(Point::Vector(vec![1.0 - v[0] - v[1], (v[0] - v[1]).abs()]))
            }
            SystemSpec::Ifs { .. } => None,
        }
    }

    /// Lipschitz constant of [`Ics::forward`].
    pub fn forward_lipschitz(&self) -> Option<f64> {
        match &self.spec {
            SystemSpec::Doubling | SystemSpec::CircleMap { .. } => {
                let (degree, pert) = self.circle_map_data().unwrap();
                Some(degree as f64 + pert.derivative_sup())
            }
            SystemSpec::Tent { slope } => Some(slope.max(slope / (slope - 1.0))),
            SystemSpec::FullShift { theta, .. } => Some(1.0 / theta),
            SystemSpec::DiscFold => Some(4.0),
            SystemSpec::TriangleFold => Some(std::f64::consts::SQRT_2),
            SystemSpec::Ifs { .. } => None,
        }
    }

    /// Images of a finite set under the set-valued map (duplicates removed).
    pub fn set_image(&self, points: &[Point]) -> Vec<Point> {
        let mut out: Vec<Point> = Vec::new();
        for p in points {
            for q in self.images(p) {
                if !out.iter().any(|r| self.space.distance(r, &q) <= POINT_TOLERANCE) {
                    out.push(q);
                }
            }
        }
        out
    }
}

fn ifs_apply(m: &AffineMap, x: &Point) -> Point {
    match x {
        Point::Real(v) => Point::Real(m.apply(&[*v])[0]),
        Point::Vector(v) => Point::Vector(m.apply(v)),
        Point::Word(_) => panic!("IFS maps act on real coordinates"),
    }
}

fn prepend(s: u8, w: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(w.len());
    out.push(s);
    out.extend_from_slice(&w[..w.len().saturating_sub(1)]);
    out
}

fn disc_half(v: &[f64]) -> ([f64; 2], [f64; 2]) {
    let r = (v[0] * v[0] + v[1] * v[1]).sqrt();
    if r == 0.0 {
        return ([0.0, 0.0], [0.0, 0.0]);
    }
    let half = v[1].atan2(v[0]) / 2.0;
    let a = [0.5 * r * half.cos(), 0.5 * r * half.sin()];
    (a, [-a[0], -a[1]])
}

/// Lifted targets `v_j ∈ [p(0), p(0)+k)` with `v_j ≡ x mod 1`, in increasing order.
pub(crate) fn circle_targets(degree: u32, pert: Perturbation, x: f64) -> impl Iterator<Item = f64> {
    let base = pert.value(0.0);
    let start = base + wrap_unit(x - base);
    (0..degree).map(move |j| start + j as f64)
}

/// Solves `k·z + p(z) = v` on the real line.
pub(crate) fn lift_inverse(degree: u32, pert: Perturbation, v: f64) -> f64 {
    let k = degree as f64;
    match pert {
        Perturbation::None => v / k,
        Perturbation::Shift { eps } => (v - eps) / k,
        Perturbation::Sine { .. } => {
            let s = pert.sup_abs();
            let (mut lo, mut hi) = ((v - s) / k, (v + s) / k);
            let f = |z: f64| k * z + pert.value(z) - v;
            while hi - lo > 1e-13 {
                let mid = 0.5 * (lo + hi);
                if f(mid) > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            // Newton polish inside the bracket
            let mut z = 0.5 * (lo + hi);
            for _ in 0..3 {
                let step = f(z) / (k + pert.derivative(z));
                let next = z - step;
                if next < lo - 1e-13 || next > hi + 1e-13 {
                    break;
                }
                z = next;
            }
            z
        }
    }
}

/// Result of a grid supremum refined by doubling the grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSup {
    pub value: f64,
    pub grid_points: usize,
    /// Change of the supremum at the last refinement.
    pub last_change: f64,
}

pub const DEFAULT_SUP_GRID: usize = 512;
const SUP_REFINE_TOL: f64 = 1e-6;
const SUP_MAX_POINTS: usize = 1 << 15;

/// Supremum of `f` over grids of `space`, doubling from `start` points until the
/// supremum moves by less than `1e-6`.
pub fn refined_grid_sup(space: &PhaseSpace, start: usize, mut f: impl FnMut(&Point) -> f64) -> GridSup {
    let mut n = start.max(2);
    let mut value = space.grid_points(n).iter().map(&mut f).fold(0.0, f64::max);
    let discrete = !matches!(space.kind, SpaceKind::Circle | SpaceKind::Interval { .. } | SpaceKind::Euclidean { .. });
    if discrete {
        return GridSup { value, grid_points: n, last_change: 0.0 };
    }
    loop {
        let next_n = 2 * n;
        let next = space.grid_points(next_n).iter().map(&mut f).fold(0.0, f64::max);
        let change = (next - value).abs();
        value = value.max(next);
        n = next_n;
        if change < SUP_REFINE_TOL || n >= SUP_MAX_POINTS {
            return GridSup { value, grid_points: n, last_change: change };
        }
    }
}

/// Smallest achievable maximum pair distance over bijections between two
/// equally long lists.
pub fn bottleneck_assignment(space: &PhaseSpace, a: &[Point], b: &[Point]) -> f64 {
    let k = a.len();
    assert_eq!(k, b.len());
    if k == 0 {
        return 0.0;
    }
    let cost: Vec<Vec<f64>> = a.iter().map(|p| b.iter().map(|q| space.distance(p, q)).collect()).collect();
    if k <= 8 {
        let mut perm: Vec<usize> = (0..k).collect();
        let mut best = f64::INFINITY;
        permute(&mut perm, 0, &cost, &mut best);
        return best;
    }
    let mut levels: Vec<f64> = cost.iter().flatten().copied().collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let (mut lo, mut hi) = (0, levels.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching(&cost, levels[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    levels[lo]
}

fn permute(perm: &mut [usize], i: usize, cost: &[Vec<f64>], best: &mut f64) {
    if i == perm.len() {
        let m = perm.iter().enumerate().map(|(r, &c)| cost[r][c]).fold(0.0, f64::max);
        if m < *best {
            *best = m;
        }
        return;
    }
    for j in i..perm.len() {
        perm.swap(i, j);
        // prune: partial maximum already too large
        if cost[i][perm[i]] < *best {
            permute(perm, i + 1, cost, best);
        }
        perm.swap(i, j);
    }
}

fn perfect_matching(cost: &[Vec<f64>], threshold: f64) -> bool {
    let k = cost.len();
    let mut owner = vec![usize::MAX; k];
    fn augment(r: usize, cost: &[Vec<f64>], t: f64, seen: &mut [bool], owner: &mut [usize]) -> bool {
        for c in 0..cost.len() {
            if cost[r][c] <= t && !seen[c] {
                seen[c] = true;
                if owner[c] == usize::MAX || augment(owner[c], cost, t, seen, owner) {
                    owner[c] = r;
                    return true;
                }
            }
        }
        false
    }
    (0..k).all(|r| augment(r, cost, threshold, &mut vec![false; k], &mut owner))
}

/// `d∞(F₁,F₂) = sup_x min_bijection max_j d(y₁ʲ, y₂ʲ)` over the given grid.
pub fn ics_distance(f1: &Ics, f2: &Ics, grid: &[Point]) -> Result<f64> {
    check_comparable(f1, f2)?;
    if grid.is_empty() {
        return input("ics_distance needs a non-empty grid");
    }
    Ok(grid.iter().map(|x| bottleneck_assignment(f1.space(), &f1.images(x), &f2.images(x))).fold(0.0, f64::max))
}

/// [`ics_distance`] on the space's own grids with doubling refinement.
pub fn ics_distance_refined(f1: &Ics, f2: &Ics) -> Result<GridSup> {
    check_comparable(f1, f2)?;
    Ok(refined_grid_sup(f1.space(), DEFAULT_SUP_GRID, |x| {
        bottleneck_assignment(f1.space(), &f1.images(x), &f2.images(x))
    }))
}

fn check_comparable(f1: &Ics, f2: &Ics) -> Result<()> {
    if f1.arity() != f2.arity() {
        return input(format!("arity mismatch: {} vs {}", f1.arity(), f2.arity()));
    }
    if f1.space().kind != f2.space().kind {
        return input("systems act on different spaces");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reals(ps: &[Point]) -> Vec<f64> {
        let mut v: Vec<f64> = ps.iter().map(|p| p.real().unwrap()).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn doubling_branches_at_zero() {
        let f = Ics::doubling_map();
        assert_eq!(reals(&f.images(&Point::Real(0.0))), vec![0.0, 0.5]);
    }

    #[test]
    fn disc_fold_origin_is_double() {
        let f = Ics::disc_fold();
        let b = f.branches(&Point::Vector(vec![0.0, 0.0]));
        assert_eq!(b.elements().len(), 1);
        assert_eq!(b.elements()[0].1, 2);
    }

    #[test]
    fn cantor_branches_at_one() {
        let f = Ics::cantor();
        let v = reals(&f.images(&Point::Real(1.0)));
        assert!((v[0] - 1.0 / 3.0).abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tent_turning_point_merges() {
        let f = Ics::tent_map(2.0).unwrap();
        let b = f.branches(&Point::Real(1.0));
        assert_eq!(b.elements(), &[(Point::Real(0.5), 2)]);
    }

    #[test]
    fn doubling_pairs() {
        let f = Ics::doubling_map();
        let pairs = f.paired_branches(&Point::Real(0.0), &Point::Real(0.2)).unwrap();
        let got: Vec<(f64, f64)> = pairs.iter().map(|(a, b)| (a.real().unwrap(), b.real().unwrap())).collect();
        assert_eq!(got.len(), 2);
        assert!((got[0].0 - 0.0).abs() < 1e-15 && (got[0].1 - 0.1).abs() < 1e-15);
        assert!((got[1].0 - 0.5).abs() < 1e-15 && (got[1].1 - 0.6).abs() < 1e-15);
    }

    #[test]
    fn doubling_pairs_across_zero() {
        let f = Ics::doubling_map();
        let pairs = f.paired_branches(&Point::Real(0.99), &Point::Real(0.01)).unwrap();
        for (a, b) in pairs {
            assert!(f.space().distance(&a, &b) <= 0.01 + 1e-12);
        }
    }

    #[test]
    fn equal_points_pair_with_themselves() {
        let f = Ics::triangle_fold();
        let x = Point::Vector(vec![0.2, 0.3]);
        for (a, b) in f.paired_branches(&x, &x).unwrap() {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn forward_inverts_branches() {
        let systems = [
            Ics::doubling_map(),
            Ics::expanding_circle_map(3, Perturbation::Sine { eps: 0.05 }).unwrap(),
            Ics::tent_map(3.0).unwrap(),
            Ics::triangle_fold(),
            Ics::disc_fold(),
            Ics::full_shift_with_depth(3, 0.4, 8).unwrap(),
        ];
        for f in systems {
            for x in f.space().grid_points(40) {
                for y in f.images(&x) {
                    let back = f.forward(&y).unwrap();
                    let d = f.space().distance(&back, &x);
                    // words lose their last symbol under prepend/shift
                    let tol = if matches!(f.spec(), SystemSpec::FullShift { .. }) { 0.4f64.powi(7) } else { 1e-9 };
                    assert!(d <= tol, "{}: T(F(x)) misses x by {d}", f.name());
                }
            }
        }
    }

    #[test]
    fn invalid_constructors() {
        assert!(Ics::tent_map(1.0).is_err());
        assert!(Ics::expanding_circle_map(1, Perturbation::None).is_err());
        assert!(Ics::expanding_circle_map(2, Perturbation::Sine { eps: 0.2 }).is_err());
        assert!(Ics::from_ifs(PhaseSpace::unit_interval(), vec![AffineMap::scalar(1.2, 0.0)]).is_err());
        assert!(Ics::from_ifs(PhaseSpace::unit_interval(), vec![AffineMap::scalar(0.5, 0.8)]).is_err());
    }

    #[test]
    fn ics_distance_examples() {
        let f = Ics::cantor();
        let grid = f.space().grid_points(64);
        assert_eq!(ics_distance(&f, &f, &grid).unwrap(), 0.0);
        let g = Ics::from_ifs(
            PhaseSpace::interval(0.0, 1.0).unwrap(),
            vec![AffineMap::scalar(1.0 / 3.0, 0.0), AffineMap::scalar(1.0 / 3.0, 2.0 / 3.0 - 0.01)],
        )
        .unwrap();
        assert!((ics_distance(&f, &g, &grid).unwrap() - 0.01).abs() < 1e-12);
        let eps = 0.03;
        let t2 = Ics::expanding_circle_map(2, Perturbation::Shift { eps }).unwrap();
        let d = ics_distance(&Ics::doubling_map(), &t2, &Ics::doubling_map().space().grid_points(512)).unwrap();
        assert!((d - eps / 2.0).abs() < 1e-12);
        assert!(ics_distance(&f, &Ics::doubling_map(), &grid).is_err());
    }

    #[test]
    fn bottleneck_large_arity_matches_small() {
        let s = PhaseSpace::unit_interval();
        let a: Vec<Point> = (0..9).map(|i| Point::Real(i as f64 / 9.0)).collect();
        let b: Vec<Point> = (0..9).rev().map(|i| Point::Real(i as f64 / 9.0 + 0.02)).collect();
        assert!((bottleneck_assignment(&s, &a, &b) - 0.02).abs() < 1e-12);
        assert!((bottleneck_assignment(&s, &a[..8], &b[1..]) - 0.02).abs() < 1e-12);
    }
}
