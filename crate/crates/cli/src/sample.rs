use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ics_transfer::{DiscreteMeasure, PhaseSpace, Point, SpaceKind};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point of the space; planar regions by rejection from the bounding box.
pub fn point(space: &PhaseSpace, rng: &mut ChaCha8Rng) -> Point {
    match &space.kind {
        SpaceKind::Circle => Point::Real(rng.gen_range(0.0..1.0)),
        SpaceKind::Interval { a, b } => Point::Real(rng.gen_range(*a..=*b)),
        SpaceKind::Symbolic { k, depth, .. } => Point::Word((0..*depth).map(|_| rng.gen_range(0..*k)).collect()),
        SpaceKind::Euclidean { region } => {
            let (lo, hi) = region.bounds();
            loop {
                let p = Point::Vector(lo.iter().zip(&hi).map(|(l, h)| rng.gen_range(*l..=*h)).collect());
                if space.contains(&p) {
                    return p;
                }
            }
        }
    }
}

/// Probability measure with between 1 and `max_atoms` atoms and random weights.
pub fn measure(space: &PhaseSpace, rng: &mut ChaCha8Rng, max_atoms: usize) -> DiscreteMeasure {
    let n = rng.gen_range(1..=max_atoms);
    let raw: Vec<(Point, f64)> = (0..n).map(|_| (point(space, rng), rng.gen_range(0.05..1.0))).collect();
    let total: f64 = raw.iter().map(|a| a.1).sum();
    DiscreteMeasure::new(raw.into_iter().map(|(p, w)| (p, w / total)).collect()).expect("weights are positive")
}
