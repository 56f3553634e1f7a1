use std::f64::consts::LN_2;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ics_transfer::contraction::{dual_step, gibbs_measure};
use ics_transfer::ics::Perturbation;
use ics_transfer::potential::PotentialSpec;
use ics_transfer::transfer::{rpf_eigendata_with, EigenOptions};
use ics_transfer::transport::merge_atoms;
use ics_transfer::{
    w1, wasserstein1, DiscreteMeasure, Grid, Ics, NormalizedOperator, PhaseSpace, Point, Potential, TransferOperator,
};

fn real_measure(atoms: Vec<(f64, f64)>) -> DiscreteMeasure {
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    DiscreteMeasure::new(atoms.into_iter().map(|(x, w)| (Point::Real(x), w / total)).collect()).unwrap()
}

fn measure_strategy() -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((0.0..1.0f64, 0.01..1.0f64), 1..25).prop_map(real_measure)
}

fn word(rng: &mut ChaCha8Rng, k: u8, depth: usize) -> Point {
    Point::Word((0..depth).map(|_| rng.gen_range(0..k)).collect())
}

fn disc_point(rng: &mut ChaCha8Rng) -> Point {
    let (r, a): (f64, f64) = (rng.gen_range(0.0f64..1.0).sqrt(), rng.gen_range(0.0..std::f64::consts::TAU));
    Point::Vector(vec![r * a.cos(), r * a.sin()])
}

fn triangle_point(rng: &mut ChaCha8Rng) -> Point {
    let (u, v): (f64, f64) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
    let (u, v) = if u + v > 1.0 { (1.0 - u, 1.0 - v) } else { (u, v) };
    Point::Vector(vec![u, v])
}

proptest! {
    #[test]
    fn circle_metric_axioms(a in 0.0..1.0f64, b in 0.0..1.0f64, c in 0.0..1.0f64, alpha in 0.2..1.0f64) {
        for s in [PhaseSpace::circle(), PhaseSpace::circle().snowflake(alpha).unwrap()] {
            let (x, y, z) = (Point::Real(a), Point::Real(b), Point::Real(c));
            prop_assert!(s.distance(&x, &x) == 0.0);
            prop_assert!((s.distance(&x, &y) - s.distance(&y, &x)).abs() < 1e-15);
            prop_assert!(s.distance(&x, &z) <= s.distance(&x, &y) + s.distance(&y, &z) + 1e-12);
            prop_assert!(s.distance(&x, &y) <= s.diameter() + 1e-15);
        }
    }

    #[test]
    fn w1_metric_axioms(mu in measure_strategy(), nu in measure_strategy(), rho in measure_strategy()) {
        for s in [PhaseSpace::unit_interval(), PhaseSpace::circle()] {
            let ab = wasserstein1(&s, &mu, &nu).unwrap();
            let ba = wasserstein1(&s, &nu, &mu).unwrap();
            prop_assert!((ab.value - ba.value).abs() < 1e-10);
            prop_assert!(wasserstein1(&s, &mu, &mu).unwrap().value.abs() < 1e-12);
            let ac = w1(&s, &mu, &rho).unwrap();
            let bc = w1(&s, &nu, &rho).unwrap();
            prop_assert!(ac <= ab.value + bc + 1e-9);
            prop_assert!(ab.duality_gap().abs() <= 1e-9 * (1.0 + ab.value));
        }
    }

    #[test]
    fn merge_certificate(mu in measure_strategy(), eps in 0.0..0.2f64) {
        let s = PhaseSpace::unit_interval();
        let merged = merge_atoms(&s, &mu, eps);
        prop_assert!((merged.total_mass() - mu.total_mass()).abs() < 1e-12);
        prop_assert!(wasserstein1(&s, &merged, &mu).unwrap().value <= eps * mu.total_mass() + 1e-12);
    }

    #[test]
    fn dual_step_preserves_mass(mu in measure_strategy(), eps in -0.15..0.15f64) {
        let f = Ics::expanding_circle_map(2, Perturbation::Sine { eps }).unwrap();
        let a = Potential::from_spec(PotentialSpec::Cosine { base: -LN_2, amplitude: 0.3 }, f.space()).unwrap();
        let p = NormalizedOperator::per_point(f, a);
        prop_assert!((dual_step(&p, &mu).total_mass() - mu.total_mass()).abs() < 1e-12);
    }

    #[test]
    fn constants_are_fixed_by_the_normalized_operator(x in 0.0..1.0f64, c in -5.0..5.0f64, n in 0usize..8) {
        let a = Potential::from_spec(PotentialSpec::Sine { base: 0.0, amplitude: 0.4 }, &PhaseSpace::circle()).unwrap();
        let p = NormalizedOperator::per_point(Ics::doubling_map(), a);
        prop_assert!((p.apply_n(|_| c, &Point::Real(x), n).unwrap() - c).abs() < 1e-12 * (1.0 + c.abs()));
    }
}

fn check_pairing(f: &Ics, mut sample: impl FnMut(&mut ChaCha8Rng) -> Point) {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10_000 {
        let (x, y) = (sample(&mut rng), sample(&mut rng));
        let pairs = f.paired_branches(&x, &y).unwrap_or_else(|e| panic!("{}: {e}", f.name()));
        assert_eq!(pairs.len(), f.arity());
    }
}

#[test]
fn pairings_contract_on_ten_thousand_pairs() {
    let real = |rng: &mut ChaCha8Rng| Point::Real(rng.gen_range(0.0..1.0));
    check_pairing(&Ics::doubling_map(), real);
    check_pairing(&Ics::expanding_circle_map(3, Perturbation::Sine { eps: 0.1 }).unwrap(), real);
    check_pairing(&Ics::tent_map(2.5).unwrap(), real);
    check_pairing(&Ics::cantor(), real);
    check_pairing(&Ics::full_shift_with_depth(3, 0.4, 12).unwrap(), |rng| word(rng, 3, 12));
    check_pairing(&Ics::disc_fold(), disc_point);
    check_pairing(&Ics::triangle_fold(), triangle_point);
}

fn hausdorff(space: &PhaseSpace, a: &[Point], b: &[Point]) -> f64 {
    let one = |a: &[Point], b: &[Point]| {
        a.iter().map(|p| b.iter().map(|q| space.distance(p, q)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    one(a, b).max(one(b, a))
}

#[test]
fn set_images_contract_in_hausdorff_distance() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for f in [Ics::cantor(), Ics::triangle_fold(), Ics::disc_fold()] {
        let space = f.space().clone();
        let sample = |rng: &mut ChaCha8Rng| match f.name() {
            "ifs" => Point::Real(rng.gen_range(0.0..1.0)),
            "disc_fold" => disc_point(rng),
            _ => triangle_point(rng),
        };
        let mut a: Vec<Point> = (0..3).map(|_| sample(&mut rng)).collect();
        let mut b: Vec<Point> = (0..4).map(|_| sample(&mut rng)).collect();
        let h0 = hausdorff(&space, &a, &b);
        for n in 1..=6 {
            a = f.set_image(&a);
            b = f.set_image(&b);
            assert!(hausdorff(&space, &a, &b) <= f.theta().powi(n) * h0 + 1e-12, "{} at n={n}", f.name());
        }
    }
}

fn sin_operator() -> TransferOperator {
    let a = Potential::from_spec(PotentialSpec::Sine { base: -LN_2, amplitude: 0.1 }, &PhaseSpace::circle()).unwrap();
    TransferOperator::new(Ics::doubling_map(), a)
}

#[test]
fn rho_is_independent_of_the_base_point() {
    let op = sin_operator();
    let rhos: Vec<f64> = [0, 100, 200, 300, 400]
        .iter()
        .map(|&base| {
            rpf_eigendata_with(&op, Grid::Circle { n: 512 }, &EigenOptions { base, ..Default::default() }).unwrap().rho
        })
        .collect();
    for r in &rhos {
        assert!((r - rhos[0]).abs() < 1e-6);
    }
}

#[test]
fn eigenfunction_is_unique_up_to_scale() {
    let op = sin_operator();
    let grid = Grid::Circle { n: 256 };
    let a = rpf_eigendata_with(&op, grid.clone(), &EigenOptions::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let initial: Vec<f64> = (0..256).map(|_| rng.gen_range(0.1..10.0)).collect();
    let b = rpf_eigendata_with(&op, grid, &EigenOptions { initial: Some(initial), ..Default::default() }).unwrap();
    let diff = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-8, "{diff}");
}

#[test]
fn gibbs_residual_is_within_tolerance() {
    let f = Ics::tent_map(3.0).unwrap();
    let p = NormalizedOperator::per_point(f.clone(), Potential::constant(-LN_2));
    let tol = 1e-4;
    let g = gibbs_measure(&p, &Point::Real(0.2), tol, 1e-9).unwrap();
    let image = dual_step(&p, &g.measure);
    assert!(w1(f.space(), &image, &g.measure).unwrap() <= tol + g.merge_error + 1e-9);
}
