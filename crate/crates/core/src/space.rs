//! Compact metric spaces on which contraction systems act.
//!
//! A [`PhaseSpace`] is a base geometry ([`SpaceKind`]) followed by a chain of
//! metric transforms. The transforms are the two used to analyse contraction:
//! the snowflake `d^α` and the scale-truncated metric
//! `d'(x,y) = θ^{-N} d(x,y)` below the cap `θ^N·diam`, `diam` above it.

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};

/// Points closer than this are considered equal.
pub const POINT_TOLERANCE: f64 = 1e-12;

/// Default word length used to represent infinite symbolic sequences.
pub const DEFAULT_SYMBOLIC_DEPTH: usize = 24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Point {
    /// Circle (in `[0,1)`) and interval coordinates.
    Real(f64),
    /// Truncated symbol sequence.
    Word(Vec<u8>),
    Vector(Vec<f64>),
}

impl Point {
    pub fn real(&self) -> Option<f64> {
        match self {
            Point::Real(x) => Some(*x),
            _ => None,
        }
    }

    /// First coordinate for real and vector points, first symbol for words.
    pub fn first_coordinate(&self) -> f64 {
        match self {
            Point::Real(x) => *x,
            Point::Word(w) => w.first().copied().unwrap_or(0) as f64,
            Point::Vector(v) => v.first().copied().unwrap_or(0.0),
        }
    }
}

/// Reduces a real number into `[0, 1)`.
pub fn wrap_unit(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Region {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Triangle { vertices: [[f64; 2]; 3] },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceKind {
    /// `ℝ/ℤ` with arc-length metric, circumference 1.
    Circle,
    Interval {
        a: f64,
        b: f64,
    },
    /// `{0..k-1}^ℕ` with `d(x,y) = θ^{i(x,y)}`, `i` the first disagreement.
    Symbolic {
        k: u8,
        theta: f64,
        depth: usize,
    },
    Euclidean {
        region: Region,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "transform", rename_all = "snake_case")]
pub enum MetricTransform {
    Snowflake { alpha: f64 },
    Truncated { theta: f64, n: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpace {
    pub kind: SpaceKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transforms: Vec<MetricTransform>,
}

impl PhaseSpace {
    pub fn new(kind: SpaceKind) -> Result<Self> {
        match &kind {
            SpaceKind::Circle => {}
            SpaceKind::Interval { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return input(format!("interval needs a < b, got [{a}, {b}]"));
                }
            }
            SpaceKind::Symbolic { k, theta, depth } => {
                if *k < 2 {
                    return input("symbolic space needs at least two symbols");
                }
                if !(*theta > 0.0 && *theta < 1.0) {
                    return input(format!("symbolic theta must lie in (0,1), got {theta}"));
                }
                if *depth == 0 {
                    return input("symbolic depth must be positive");
                }
            }
            SpaceKind::Euclidean { region } => match region {
                Region::Box { lo, hi } => {
                    if lo.is_empty() || lo.len() != hi.len() || lo.iter().zip(hi).any(|(l, h)| !(l < h)) {
                        return input("box needs matching non-empty lo < hi");
                    }
                }
                Region::Ball { center, radius } => {
                    if center.is_empty() || !(*radius > 0.0) {
                        return input("ball needs a centre and a positive radius");
                    }
                }
                Region::Triangle { vertices } => {
                    if triangle_area(vertices).abs() < 1e-14 {
                        return input("degenerate triangle");
                    }
                }
            },
        }
        Ok(Self { kind, transforms: Vec::new() })
    }

    pub fn circle() -> Self {
        Self { kind: SpaceKind::Circle, transforms: Vec::new() }
    }

    pub fn unit_interval() -> Self {
        Self { kind: SpaceKind::Interval { a: 0.0, b: 1.0 }, transforms: Vec::new() }
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(SpaceKind::Interval { a, b })
    }

    pub fn symbolic(k: u8, theta: f64, depth: usize) -> Result<Self> {
        Self::new(SpaceKind::Symbolic { k, theta, depth })
    }

    pub fn unit_disc() -> Self {
        Self {
            kind: SpaceKind::Euclidean { region: Region::Ball { center: vec![0.0, 0.0], radius: 1.0 } },
            transforms: Vec::new(),
        }
    }

    /// Right isosceles triangle with the right angle at the origin.
    pub fn right_triangle() -> Self {
        Self {
            kind: SpaceKind::Euclidean { region: Region::Triangle { vertices: [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]] } },
            transforms: Vec::new(),
        }
    }

    pub fn is_transformed(&self) -> bool {
        !self.transforms.is_empty()
    }

    /// The same geometry with every metric transform removed.
    pub fn base(&self) -> PhaseSpace {
        PhaseSpace { kind: self.kind.clone(), transforms: Vec::new() }
    }

    /// Metric `d^α` with diameter `diam^α`.
    pub fn snowflake(&self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return input(format!("snowflake exponent must lie in (0,1], got {alpha}"));
        }
        let mut out = self.clone();
        if alpha != 1.0 {
            out.transforms.push(MetricTransform::Snowflake { alpha });
        }
        Ok(out)
    }

    /// Metric localised at scale `θ^N·diam`.
    pub fn truncate_metric(&self, theta: f64, n: u32) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return input(format!("truncation ratio must lie in (0,1), got {theta}"));
        }
        let mut out = self.clone();
        out.transforms.push(MetricTransform::Truncated { theta, n });
        Ok(out)
    }

    pub fn dimension(&self) -> usize {
        match &self.kind {
            SpaceKind::Circle | SpaceKind::Interval { .. } | SpaceKind::Symbolic { .. } => 1,
            SpaceKind::Euclidean { region } => match region {
                Region::Box { lo, .. } => lo.len(),
                Region::Ball { center, .. } => center.len(),
                Region::Triangle { .. } => 2,
            },
        }
    }

    fn base_diameter(&self) -> f64 {
        match &self.kind {
            SpaceKind::Circle => 0.5,
            SpaceKind::Interval { a, b } => b - a,
            SpaceKind::Symbolic { .. } => 1.0,
            SpaceKind::Euclidean { region } => match region {
                Region::Box { lo, hi } => euclid(lo, hi),
                Region::Ball { radius, .. } => 2.0 * radius,
                Region::Triangle { vertices } => {
                    let [p, q, r] = vertices;
                    euclid(p, q).max(euclid(q, r)).max(euclid(p, r))
                }
            },
        }
    }

    pub fn diameter(&self) -> f64 {
        let mut diam = self.base_diameter();
        for t in &self.transforms {
            if let MetricTransform::Snowflake { alpha } = t {
                diam = diam.powf(*alpha);
            }
        }
        diam
    }

    pub fn contains(&self, p: &Point) -> bool {
        let tol = POINT_TOLERANCE;
        match (&self.kind, p) {
            (SpaceKind::Circle, Point::Real(x)) => x.is_finite() && *x >= -tol && *x <= 1.0 + tol,
            (SpaceKind::Interval { a, b }, Point::Real(x)) => *x >= a - tol && *x <= b + tol,
            (SpaceKind::Symbolic { k, depth, .. }, Point::Word(w)) => w.len() == *depth && w.iter().all(|s| s < k),
            (SpaceKind::Euclidean { region }, Point::Vector(v)) => {
                v.iter().all(|c| c.is_finite())
                    && match region {
                        Region::Box { lo, hi } => {
                            v.len() == lo.len()
                                && v.iter().zip(lo.iter().zip(hi)).all(|(c, (l, h))| *c >= l - tol && *c <= h + tol)
                        }
                        Region::Ball { center, radius } => v.len() == center.len() && euclid(v, center) <= radius + tol,
                        Region::Triangle { vertices } => v.len() == 2 && in_triangle(vertices, [v[0], v[1]], tol),
                    }
            }
            _ => false,
        }
    }

    pub fn check(&self, p: &Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            input(format!("point {p:?} lies outside {:?}", self.kind))
        }
    }

    /// Distance without domain validation; mismatched point kinds give `NaN`.
    pub fn distance(&self, x: &Point, y: &Point) -> f64 {
        let mut d = self.base_distance(x, y);
        let mut diam = self.base_diameter();
        for t in &self.transforms {
            match *t {
                MetricTransform::Snowflake { alpha } => {
                    d = d.powf(alpha);
                    diam = diam.powf(alpha);
                }
                MetricTransform::Truncated { theta, n } => {
                    let scale = theta.powi(n as i32);
                    d = if d <= scale * diam { d / scale } else { diam };
                }
            }
        }
        d
    }

    pub fn try_distance(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.distance(x, y))
    }

    fn base_distance(&self, x: &Point, y: &Point) -> f64 {
        match (&self.kind, x, y) {
            (SpaceKind::Circle, Point::Real(a), Point::Real(b)) => circle_distance(*a, *b),
            (SpaceKind::Interval { .. }, Point::Real(a), Point::Real(b)) => (a - b).abs(),
            (SpaceKind::Symbolic { theta, .. }, Point::Word(a), Point::Word(b)) => {
                match a.iter().zip(b).position(|(s, t)| s != t) {
                    Some(i) => theta.powi(i as i32),
                    None => 0.0,
                }
            }
            (SpaceKind::Euclidean { .. }, Point::Vector(a), Point::Vector(b)) => euclid(a, b),
            _ => f64::NAN,
        }
    }

    /// A deterministic finite net of the space with roughly `n` points.
    pub fn grid_points(&self, n: usize) -> Vec<Point> {
        let n = n.max(2);
        match &self.kind {
            SpaceKind::Circle => (0..n).map(|i| Point::Real(i as f64 / n as f64)).collect(),
            SpaceKind::Interval { a, b } => {
                (0..n).map(|i| Point::Real(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
            }
            SpaceKind::Symbolic { k, depth, .. } => {
                let mut len = 0;
                let mut count = 1usize;
                while count < n && len < *depth {
                    count *= *k as usize;
                    len += 1;
                }
                (0..count).map(|i| Point::Word(word_from_index(i, *k, len, *depth))).collect()
            }
            SpaceKind::Euclidean { region } => {
                let (lo, hi) = region_bounds(region);
                let d = lo.len();
                let per_axis = ((n as f64).powf(1.0 / d as f64).ceil() as usize).max(2);
                let mut out = Vec::new();
                let total = per_axis.pow(d as u32);
                for idx in 0..total {
                    let mut rem = idx;
                    let mut v = Vec::with_capacity(d);
                    for axis in 0..d {
                        let i = rem % per_axis;
                        rem /= per_axis;
                        v.push(lo[axis] + (hi[axis] - lo[axis]) * i as f64 / (per_axis - 1) as f64);
                    }
                    let p = Point::Vector(v);
                    if self.contains(&p) {
                        out.push(p);
                    }
                }
                out
            }
        }
    }
}

/// Arc-length distance on `ℝ/ℤ`.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = wrap_unit(a - b);
    d.min(1.0 - d)
}

/// Signed shortest displacement from `a` to `b` on `ℝ/ℤ`, in `[-1/2, 1/2)`.
pub fn circle_displacement(a: f64, b: f64) -> f64 {
    wrap_unit(b - a + 0.5) - 0.5
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn triangle_area(v: &[[f64; 2]; 3]) -> f64 {
    0.5 * ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]))
}

fn in_triangle(v: &[[f64; 2]; 3], p: [f64; 2], tol: f64) -> bool {
    let sign = triangle_area(v).signum();
    (0..3).all(|i| {
        let a = v[i];
        let b = v[(i + 1) % 3];
        let cross = (b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1]);
        cross * sign >= -tol
    })
}

impl Region {
    /// Bounding box `(lo, hi)`.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        region_bounds(self)
    }
}

pub(crate) fn region_bounds(region: &Region) -> (Vec<f64>, Vec<f64>) {
    match region {
        Region::Box { lo, hi } => (lo.clone(), hi.clone()),
        Region::Ball { center, radius } => {
            (center.iter().map(|c| c - radius).collect(), center.iter().map(|c| c + radius).collect())
        }
        Region::Triangle { vertices } => {
            let xs = vertices.iter().map(|v| v[0]);
            let ys = vertices.iter().map(|v| v[1]);
            (
                vec![xs.clone().fold(f64::INFINITY, f64::min), ys.clone().fold(f64::INFINITY, f64::min)],
                vec![xs.fold(f64::NEG_INFINITY, f64::max), ys.fold(f64::NEG_INFINITY, f64::max)],
            )
        }
    }
}

/// Word whose first `len` symbols spell `index` in base `k` (most significant first), padded with zeros.
pub(crate) fn word_from_index(mut index: usize, k: u8, len: usize, depth: usize) -> Vec<u8> {
    let mut w = vec![0u8; depth];
    for pos in (0..len).rev() {
        w[pos] = (index % k as usize) as u8;
        index /= k as usize;
    }
    w
}
