use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::space::{PhaseSpace, Point, SpaceKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    Constant {
        value: f64,
    },
    /// `base + amplitude·sin(2π x₁)`.
    Sine {
        base: f64,
        amplitude: f64,
    },
    /// `base + amplitude·cos(2π x₁)`.
    Cosine {
        base: f64,
        amplitude: f64,
    },
    /// `base + slope·x₁`; not continuous on the circle.
    Linear {
        base: f64,
        slope: f64,
    },
    /// Symbolic potential depending on the first symbol only.
    Cylinder {
        values: Vec<f64>,
    },
}

impl PotentialSpec {
    fn eval(&self, p: &Point) -> f64 {
        match self {
            PotentialSpec::Constant { value } => *value,
            PotentialSpec::Sine { base, amplitude } => base + amplitude * (TAU * p.first_coordinate()).sin(),
            PotentialSpec::Cosine { base, amplitude } => base + amplitude * (TAU * p.first_coordinate()).cos(),
            PotentialSpec::Linear { base, slope } => base + slope * p.first_coordinate(),
            PotentialSpec::Cylinder { values } => match p {
                Point::Word(w) => values[w[0] as usize],
                _ => f64::NAN,
            },
        }
    }
}

#[derive(Clone)]
enum Source {
    Spec(PotentialSpec),
    Func(Arc<dyn Fn(&Point) -> f64 + Send + Sync>),
}

/// A real function on the space with a Lipschitz constant that is either
/// certified analytically or estimated from sampled difference quotients.
#[derive(Clone)]
pub struct Potential {
    source: Source,
    lipschitz: f64,
    certified: bool,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let src = match &self.source {
            Source::Spec(s) => format!("{s:?}"),
            Source::Func(_) => "<fn>".to_string(),
        };
        f.debug_struct("Potential")
            .field("source", &src)
            .field("lipschitz", &self.lipschitz)
            .field("certified", &self.certified)
            .finish()
    }
}

/// Safety factor applied to sampled Lipschitz estimates.
pub const LIPSCHITZ_SAFETY: f64 = 1.05;
const ESTIMATE_POINTS: usize = 256;

impl Potential {
    pub fn constant(value: f64) -> Self {
        Self { source: Source::Spec(PotentialSpec::Constant { value }), lipschitz: 0.0, certified: true }
    }

    pub fn from_spec(spec: PotentialSpec, space: &PhaseSpace) -> Result<Self> {
        let certified = match (&spec, &space.kind) {
            (PotentialSpec::Constant { .. }, _) => Some(0.0),
            (PotentialSpec::Sine { amplitude, .. } | PotentialSpec::Cosine { amplitude, .. }, kind) => match kind {
                SpaceKind::Symbolic { .. } => None,
                _ => Some(TAU * amplitude.abs()),
            },
            (PotentialSpec::Linear { .. }, SpaceKind::Circle) => {
                return input("a linear potential is discontinuous on the circle");
            }
            (PotentialSpec::Linear { .. }, SpaceKind::Symbolic { .. }) => None,
            (PotentialSpec::Linear { slope, .. }, _) => Some(slope.abs()),
            (PotentialSpec::Cylinder { values }, SpaceKind::Symbolic { k, .. }) => {
                if values.len() != *k as usize {
                    return input(format!("cylinder potential needs {k} values, got {}", values.len()));
                }
                let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                Some(hi - lo)
            }
            (PotentialSpec::Cylinder { .. }, _) => return input("cylinder potentials need a symbolic space"),
        };
        let source = Source::Spec(spec);
        match certified {
            // analytic constants hold for the untransformed metric only
            Some(l) if !space.is_transformed() || l == 0.0 => Ok(Self { source, lipschitz: l, certified: true }),
            _ => {
                let mut p = Self { source, lipschitz: 0.0, certified: false };
                p.lipschitz = p.estimate_lipschitz(space);
                Ok(p)
            }
        }
    }

    /// Wraps an arbitrary function; without a certificate the constant is
    /// estimated on a grid of `space`.
    pub fn from_fn(
        f: impl Fn(&Point) -> f64 + Send + Sync + 'static,
        lipschitz: Option<f64>,
        space: &PhaseSpace,
    ) -> Self {
        let mut p = Self { source: Source::Func(Arc::new(f)), lipschitz: lipschitz.unwrap_or(0.0), certified: true };
        if lipschitz.is_none() {
            p.certified = false;
            p.lipschitz = p.estimate_lipschitz(space);
        }
        p
    }

    pub fn eval(&self, p: &Point) -> f64 {
        match &self.source {
            Source::Spec(s) => s.eval(p),
            Source::Func(f) => f(p),
        }
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }

    pub fn spec(&self) -> Option<&PotentialSpec> {
        match &self.source {
            Source::Spec(s) => Some(s),
            Source::Func(_) => None,
        }
    }

    pub fn constant_value(&self) -> Option<f64> {
        match self.spec() {
            Some(PotentialSpec::Constant { value }) => Some(*value),
            _ => None,
        }
    }

    /// Largest sampled difference quotient on a grid, times [`LIPSCHITZ_SAFETY`].
    pub fn estimate_lipschitz(&self, space: &PhaseSpace) -> f64 {
        estimate_lipschitz(space, &space.grid_points(ESTIMATE_POINTS), |p| self.eval(p)) * LIPSCHITZ_SAFETY
    }
}

/// Largest difference quotient of `f` over all pairs of `points` (no safety factor).
pub fn estimate_lipschitz(space: &PhaseSpace, points: &[Point], f: impl Fn(&Point) -> f64) -> f64 {
    let values: Vec<f64> = points.iter().map(&f).collect();
    let mut best: f64 = 0.0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = space.distance(&points[i], &points[j]);
            if d > 0.0 {
                best = best.max((values[i] - values[j]).abs() / d);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certified_constant_holds_on_samples() {
        let s = PhaseSpace::circle();
        let a = Potential::from_spec(PotentialSpec::Sine { base: -2f64.ln(), amplitude: 0.1 }, &s).unwrap();
        assert!(a.is_certified());
        assert!((a.lipschitz() - 0.2 * std::f64::consts::PI).abs() < 1e-15);
        let pts = s.grid_points(300);
        assert!(estimate_lipschitz(&s, &pts, |p| a.eval(p)) <= a.lipschitz() * (1.0 + 1e-12));
    }

    #[test]
    fn cylinder_lipschitz_is_the_spread() {
        let s = PhaseSpace::symbolic(2, 0.5, 8).unwrap();
        let a = Potential::from_spec(PotentialSpec::Cylinder { values: vec![-0.3, -1.0] }, &s).unwrap();
        assert!((a.lipschitz() - 0.7).abs() < 1e-15);
        assert!(Potential::from_spec(PotentialSpec::Cylinder { values: vec![0.0] }, &s).is_err());
    }

    #[test]
    fn linear_on_circle_is_rejected() {
        assert!(Potential::from_spec(PotentialSpec::Linear { base: 0.0, slope: 1.0 }, &PhaseSpace::circle()).is_err());
    }

    #[test]
    fn uncertified_function_gets_an_estimate() {
        let s = PhaseSpace::unit_interval();
        let a = Potential::from_fn(|p| 3.0 * p.first_coordinate(), None, &s);
        assert!(!a.is_certified());
        assert!((a.lipschitz() - 3.0 * LIPSCHITZ_SAFETY).abs() < 1e-9);
    }
}
