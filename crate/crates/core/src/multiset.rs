use serde::{Deserialize, Serialize};

use crate::space::{PhaseSpace, Point, POINT_TOLERANCE};

/// Finite multiset of points; elements within [`POINT_TOLERANCE`] share one entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct MultiSet {
    elements: Vec<(Point, u32)>,
}

impl MultiSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_points(space: &PhaseSpace, points: impl IntoIterator<Item = Point>) -> Self {
        let mut out = Self::new();
        for p in points {
            out.insert(space, p, 1);
        }
        out
    }

    pub fn insert(&mut self, space: &PhaseSpace, p: Point, multiplicity: u32) {
        if multiplicity == 0 {
            return;
        }
        match self.elements.iter_mut().find(|(q, _)| space.distance(q, &p) <= POINT_TOLERANCE) {
            Some((_, m)) => *m += multiplicity,
            None => self.elements.push((p, multiplicity)),
        }
    }

    /// Multiset sum: multiplicity functions add.
    pub fn sum(&self, other: &MultiSet, space: &PhaseSpace) -> MultiSet {
        let mut out = self.clone();
        for (p, m) in &other.elements {
            out.insert(space, p.clone(), *m);
        }
        out
    }

    pub fn elements(&self) -> &[(Point, u32)] {
        &self.elements
    }

    pub fn total_count(&self) -> u32 {
        self.elements.iter().map(|(_, m)| m).sum()
    }

    pub fn multiplicity(&self, space: &PhaseSpace, p: &Point) -> u32 {
        self.elements.iter().filter(|(q, _)| space.distance(q, p) <= POINT_TOLERANCE).map(|(_, m)| m).sum()
    }

    /// Same points with the same multiplicities, up to tolerance.
    pub fn equivalent(&self, other: &MultiSet, space: &PhaseSpace) -> bool {
        self.total_count() == other.total_count()
            && self.elements.iter().all(|(p, m)| other.multiplicity(space, p) == *m)
    }

    /// Elements repeated according to multiplicity.
    pub fn expanded(&self) -> Vec<Point> {
        self.elements.iter().flat_map(|(p, m)| std::iter::repeat_n(p.clone(), *m as usize)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merges_nearby_points() {
        let s = PhaseSpace::unit_interval();
        let m = MultiSet::from_points(&s, [Point::Real(0.5), Point::Real(0.5 + 1e-14), Point::Real(0.2)]);
        assert_eq!(m.elements().len(), 2);
        assert_eq!(m.multiplicity(&s, &Point::Real(0.5)), 2);
        assert_eq!(m.total_count(), 3);
    }

    #[test]
    fn sum_adds_multiplicities() {
        let s = PhaseSpace::unit_interval();
        let a = MultiSet::from_points(&s, [Point::Real(0.1), Point::Real(0.3)]);
        let b = MultiSet::from_points(&s, [Point::Real(0.3)]);
        let c = a.sum(&b, &s);
        assert_eq!(c.multiplicity(&s, &Point::Real(0.3)), 2);
        assert_eq!(c.multiplicity(&s, &Point::Real(0.1)), 1);
        assert_eq!(c.total_count(), 3);
    }
}
