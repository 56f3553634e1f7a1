//! Structured grids with interpolation stencils, used to represent functions
//! such as the eigenfunction `h`.
//!
//! Interpolation is piecewise linear on the circle and on intervals,
//! barycentric on a triangulated lattice in the plane, and by cylinder lookup
//! (the first `prefix_len` symbols) on symbolic spaces.

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::space::{region_bounds, word_from_index, wrap_unit, PhaseSpace, Point, SpaceKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "grid", rename_all = "snake_case")]
pub enum Grid {
    Circle { n: usize },
    Interval { a: f64, b: f64, n: usize },
    Symbolic { k: u8, depth: usize, prefix_len: usize },
    Planar { lo: [f64; 2], hi: [f64; 2], nx: usize, ny: usize },
}

impl Grid {
    /// A grid on `space` with at least `n` nodes (at least `n` per axis in the plane is not implied).
    pub fn for_space(space: &PhaseSpace, n: usize) -> Result<Self> {
        let n = n.max(2);
        Ok(match &space.kind {
            SpaceKind::Circle => Grid::Circle { n },
            SpaceKind::Interval { a, b } => Grid::Interval { a: *a, b: *b, n },
            SpaceKind::Symbolic { k, depth, .. } => {
                let mut len = 0;
                let mut count = 1usize;
                while count < n && len < *depth {
                    count *= *k as usize;
                    len += 1;
                }
                Grid::Symbolic { k: *k, depth: *depth, prefix_len: len }
            }
            SpaceKind::Euclidean { region } => {
                let (lo, hi) = region_bounds(region);
                if lo.len() != 2 {
                    return input("grids are implemented for planar euclidean spaces only");
                }
                let side = ((n as f64).sqrt().ceil() as usize).max(2);
                Grid::Planar { lo: [lo[0], lo[1]], hi: [hi[0], hi[1]], nx: side, ny: side }
            }
        })
    }

    pub fn len(&self) -> usize {
        match *self {
            Grid::Circle { n } | Grid::Interval { n, .. } => n,
            Grid::Symbolic { k, prefix_len, .. } => (k as usize).pow(prefix_len as u32),
            Grid::Planar { nx, ny, .. } => nx * ny,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, i: usize) -> Point {
        match *self {
            Grid::Circle { n } => Point::Real(i as f64 / n as f64),
            Grid::Interval { a, b, n } => Point::Real(a + (b - a) * i as f64 / (n - 1) as f64),
            Grid::Symbolic { k, depth, prefix_len } => Point::Word(word_from_index(i, k, prefix_len, depth)),
            Grid::Planar { lo, hi, nx, ny } => {
                let (ix, iy) = (i % nx, i / nx);
                Point::Vector(vec![
                    lo[0] + (hi[0] - lo[0]) * ix as f64 / (nx - 1) as f64,
                    lo[1] + (hi[1] - lo[1]) * iy as f64 / (ny - 1) as f64,
                ])
            }
        }
    }

    pub fn points(&self) -> Vec<Point> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Interpolation weights `(node, weight)` for `p`; weights are nonnegative and sum to one.
    pub fn stencil(&self, p: &Point, out: &mut Vec<(usize, f64)>) {
        out.clear();
        match (self, p) {
            (Grid::Circle { n }, Point::Real(x)) => {
                let s = wrap_unit(*x) * *n as f64;
                let i = (s.floor() as usize).min(n - 1);
                let f = s - i as f64;
                out.push((i, 1.0 - f));
                out.push(((i + 1) % n, f));
            }
            (Grid::Interval { a, b, n }, Point::Real(x)) => {
                let s = ((x - a) / (b - a)).clamp(0.0, 1.0) * (n - 1) as f64;
                let i = (s.floor() as usize).min(n - 2);
                let f = s - i as f64;
                out.push((i, 1.0 - f));
                out.push((i + 1, f));
            }
            (Grid::Symbolic { k, prefix_len, .. }, Point::Word(w)) => {
                let idx = w.iter().take(*prefix_len).fold(0usize, |acc, s| acc * *k as usize + *s as usize);
                out.push((idx, 1.0));
            }
            (Grid::Planar { lo, hi, nx, ny }, Point::Vector(v)) => {
                let sx = ((v[0] - lo[0]) / (hi[0] - lo[0])).clamp(0.0, 1.0) * (nx - 1) as f64;
                let sy = ((v[1] - lo[1]) / (hi[1] - lo[1])).clamp(0.0, 1.0) * (ny - 1) as f64;
                let ix = (sx.floor() as usize).min(nx - 2);
                let iy = (sy.floor() as usize).min(ny - 2);
                let (u, w) = (sx - ix as f64, sy - iy as f64);
                let node = |x: usize, y: usize| y * nx + x;
                if u + w <= 1.0 {
                    out.push((node(ix, iy), 1.0 - u - w));
                    out.push((node(ix + 1, iy), u));
                    out.push((node(ix, iy + 1), w));
                } else {
                    out.push((node(ix + 1, iy + 1), u + w - 1.0));
                    out.push((node(ix + 1, iy), 1.0 - w));
                    out.push((node(ix, iy + 1), 1.0 - u));
                }
            }
            _ => panic!("point {p:?} does not match grid {self:?}"),
        }
    }

    pub fn interpolate(&self, values: &[f64], p: &Point) -> f64 {
        let mut st = Vec::with_capacity(3);
        self.stencil(p, &mut st);
        st.iter().map(|(i, w)| values[*i] * w).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_reproduce_values() {
        let spaces = [PhaseSpace::circle(), PhaseSpace::unit_interval(), PhaseSpace::unit_disc()];
        for s in spaces {
            let g = Grid::for_space(&s, 50).unwrap();
            let values: Vec<f64> = (0..g.len()).map(|i| (i as f64).sin()).collect();
            for i in 0..g.len() {
                assert!((g.interpolate(&values, &g.point(i)) - values[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn linear_functions_are_exact() {
        let g = Grid::for_space(&PhaseSpace::right_triangle(), 100).unwrap();
        let f = |p: &Point| match p {
            Point::Vector(v) => 2.0 * v[0] - 3.0 * v[1] + 1.0,
            _ => unreachable!(),
        };
        let values: Vec<f64> = g.points().iter().map(f).collect();
        for q in [[0.13, 0.41], [0.5, 0.25], [0.99, 0.01]] {
            let p = Point::Vector(q.to_vec());
            assert!((g.interpolate(&values, &p) - f(&p)).abs() < 1e-12);
        }
    }

    #[test]
    fn circle_interpolation_wraps() {
        let g = Grid::Circle { n: 4 };
        let v = [1.0, 2.0, 3.0, 5.0];
        assert!((g.interpolate(&v, &Point::Real(0.875)) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn symbolic_lookup_by_prefix() {
        let g = Grid::for_space(&PhaseSpace::symbolic(2, 0.5, 10).unwrap(), 8).unwrap();
        assert_eq!(g.len(), 8);
        let mut st = Vec::new();
        g.stencil(&Point::Word(vec![1, 0, 1, 1, 1, 0, 0, 0, 0, 0]), &mut st);
        assert_eq!(st, vec![(5, 1.0)]);
    }
}
