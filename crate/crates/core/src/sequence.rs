//! Admissible backward sequences `x₀ = x, x₁ ∈ F(x₀), …, x_t ∈ F(x_{t-1})`.

use crate::error::{Error, Result};
use crate::ics::Ics;
use crate::space::Point;

/// Default cap on `k^t` for explicit enumeration.
pub const ENUMERATION_CAP: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibleSequence {
    pub points: Vec<Point>,
    /// Product of the branch multiplicities along the sequence.
    pub multiplicity: u64,
}

impl AdmissibleSequence {
    pub fn last(&self) -> &Point {
        self.points.last().expect("sequences are non-empty")
    }
}

pub(crate) fn check_cap(arity: usize, t: usize) -> Result<()> {
    let count = (arity as u64).checked_pow(t as u32);
    match count {
        Some(c) if c <= ENUMERATION_CAP => Ok(()),
        _ => Err(Error::Resource(format!(
            "{arity}^{t} sequences exceed the enumeration cap {ENUMERATION_CAP}; iterate the dual operator on measures instead"
        ))),
    }
}

/// The multiset `F̄^t(x)`; duplicate branches are merged and carried as multiplicity.
pub fn admissible_sequences(f: &Ics, x: &Point, t: usize) -> Result<Vec<AdmissibleSequence>> {
    check_cap(f.arity(), t)?;
    let mut out = vec![AdmissibleSequence { points: vec![x.clone()], multiplicity: 1 }];
    for _ in 0..t {
        let mut next = Vec::with_capacity(out.len() * f.arity());
        for s in out {
            for (y, m) in f.branches(s.last()).elements() {
                let mut points = s.points.clone();
                points.push(y.clone());
                next.push(AdmissibleSequence { points, multiplicity: s.multiplicity * *m as u64 });
            }
        }
        out = next;
    }
    Ok(out)
}

/// `k^t` pairs of sequences from `x` and `y` built from the branch pairing, so
/// that `d(xₙ, yₙ) ≤ θⁿ d(x, y)` along every pair.
pub fn paired_sequences(
    f: &Ics,
    x: &Point,
    y: &Point,
    t: usize,
) -> Result<Vec<(AdmissibleSequence, AdmissibleSequence)>> {
    check_cap(f.arity(), t)?;
    let mut out = vec![(vec![x.clone()], vec![y.clone()])];
    for _ in 0..t {
        let mut next = Vec::with_capacity(out.len() * f.arity());
        for (s, r) in out {
            for (a, b) in f.paired_branches(s.last().unwrap(), r.last().unwrap())? {
                let mut s2 = s.clone();
                let mut r2 = r.clone();
                s2.push(a);
                r2.push(b);
                next.push((s2, r2));
            }
        }
        out = next;
    }
    Ok(out
        .into_iter()
        .map(|(s, r)| {
            (AdmissibleSequence { points: s, multiplicity: 1 }, AdmissibleSequence { points: r, multiplicity: 1 })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_length() {
        let f = Ics::doubling_map();
        let s = admissible_sequences(&f, &Point::Real(0.3), 0).unwrap();
        assert_eq!(s, vec![AdmissibleSequence { points: vec![Point::Real(0.3)], multiplicity: 1 }]);
    }

    #[test]
    fn doubling_two_steps() {
        let f = Ics::doubling_map();
        let s = admissible_sequences(&f, &Point::Real(0.0), 2).unwrap();
        assert_eq!(s.len(), 4);
        let mut ends: Vec<f64> = s.iter().map(|q| q.last().real().unwrap()).collect();
        ends.sort_by(f64::total_cmp);
        assert_eq!(ends, vec![0.0, 0.25, 0.5, 0.75]);
        assert_eq!(admissible_sequences(&f, &Point::Real(0.1), 3).unwrap().len(), 8);
    }

    #[test]
    fn multiplicities_cover_k_to_the_t() {
        let f = Ics::disc_fold();
        let s = admissible_sequences(&f, &Point::Vector(vec![0.0, 0.0]), 5).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].multiplicity, 32);
        let t = Ics::tent_map(2.0).unwrap();
        let s = admissible_sequences(&t, &Point::Real(1.0), 4).unwrap();
        assert_eq!(s.iter().map(|q| q.multiplicity).sum::<u64>(), 16);
    }

    #[test]
    fn cap_is_a_resource_error() {
        let f = Ics::doubling_map();
        assert!(matches!(admissible_sequences(&f, &Point::Real(0.0), 21), Err(Error::Resource(_))));
    }

    #[test]
    fn paired_doubling_contracts() {
        let f = Ics::doubling_map();
        let pairs = paired_sequences(&f, &Point::Real(0.0), &Point::Real(0.1), 2).unwrap();
        assert_eq!(pairs.len(), 4);
        for (s, r) in &pairs {
            assert!(f.space().distance(&s.points[2], &r.points[2]) <= 0.025 + 1e-15);
        }
        let same = paired_sequences(&f, &Point::Real(0.3), &Point::Real(0.3), 3).unwrap();
        assert!(same.iter().all(|(s, r)| s == r));
    }

    #[test]
    fn paired_shift_prepends_identically() {
        let f = Ics::full_shift_with_depth(2, 0.5, 6).unwrap();
        let x = Point::Word(vec![0, 1, 1, 0, 1, 0]);
        let y = Point::Word(vec![1, 1, 0, 0, 0, 0]);
        for (s, r) in paired_sequences(&f, &x, &y, 2).unwrap() {
            let (Point::Word(a), Point::Word(b)) = (&s.points[2], &r.points[2]) else { unreachable!() };
            assert_eq!(a[..2], b[..2]);
            assert_eq!(a[2..], [0, 1, 1, 0]);
            assert_eq!(b[2..], [1, 1, 0, 0]);
        }
    }
}
