use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::space::{PhaseSpace, Point};

/// Finitely supported nonnegative measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    atoms: Vec<(Point, f64)>,
}

impl DiscreteMeasure {
    /// Rejects empty supports and non-positive or non-finite weights.
    pub fn new(atoms: Vec<(Point, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return input("a measure needs at least one atom");
        }
        if let Some((p, w)) = atoms.iter().find(|(_, w)| !(w.is_finite() && *w > 0.0)) {
            return input(format!("atom {p:?} has invalid weight {w}"));
        }
        Ok(Self { atoms })
    }

    /// Drops atoms whose weight underflowed to zero.
    pub(crate) fn from_raw(atoms: Vec<(Point, f64)>) -> Self {
        Self { atoms: atoms.into_iter().filter(|(_, w)| *w > 0.0).collect() }
    }

    pub fn dirac(p: Point) -> Self {
        Self { atoms: vec![(p, 1.0)] }
    }

    /// Uniform probability measure on the given points.
    pub fn uniform(points: Vec<Point>) -> Result<Self> {
        let w = 1.0 / points.len() as f64;
        Self::new(points.into_iter().map(|p| (p, w)).collect())
    }

    pub fn atoms(&self) -> &[(Point, f64)] {
        &self.atoms
    }

    pub fn into_atoms(self) -> Vec<(Point, f64)> {
        self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum()
    }

    pub fn is_probability(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= 1e-12
    }

    pub fn integrate(&self, f: impl Fn(&Point) -> f64) -> f64 {
        self.atoms.iter().map(|(p, w)| w * f(p)).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { atoms: self.atoms.iter().map(|(p, w)| (p.clone(), w * factor)).collect() }
    }

    pub fn check_support(&self, space: &PhaseSpace) -> Result<()> {
        for (p, _) in &self.atoms {
            space.check(p)?;
        }
        Ok(())
    }
}
