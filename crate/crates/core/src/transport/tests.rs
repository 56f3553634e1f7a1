use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

fn real(atoms: &[(f64, f64)]) -> DiscreteMeasure {
    DiscreteMeasure::new(atoms.iter().map(|&(x, w)| (Point::Real(x), w)).collect()).unwrap()
}

fn random_real(rng: &mut ChaCha8Rng, n: usize) -> DiscreteMeasure {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let s: f64 = w.iter().sum();
    DiscreteMeasure::new(w.iter().map(|x| (Point::Real(rng.gen_range(0.0..1.0)), x / s)).collect()).unwrap()
}

#[test]
fn two_diracs_on_the_interval() {
    let s = PhaseSpace::unit_interval();
    let mu = real(&[(0.0, 0.5), (1.0, 0.5)]);
    let nu = real(&[(0.5, 1.0)]);
    let sol = wasserstein1(&s, &mu, &nu).unwrap();
    assert!((sol.value - 0.5).abs() < 1e-15);
    assert!((wasserstein1_1d(&s, &mu, &nu).unwrap() - 0.5).abs() < 1e-15);
    assert!(sol.duality_gap().abs() < 1e-12);
    assert!(sol.plan.marginal_error(&mu, &nu) < 1e-15);
    assert!((wasserstein1_1d(&s, &real(&[(0.2, 1.0)]), &real(&[(0.7, 1.0)])).unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn circle_wraps() {
    let s = PhaseSpace::circle();
    let (mu, nu) = (real(&[(0.1, 1.0)]), real(&[(0.9, 1.0)]));
    assert!((wasserstein1_1d(&s, &mu, &nu).unwrap() - 0.2).abs() < 1e-15);
    assert!((wasserstein1(&s, &mu, &nu).unwrap().value - 0.2).abs() < 1e-15);
}

#[test]
fn flow_matches_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for space in [PhaseSpace::unit_interval(), PhaseSpace::circle()] {
        for _ in 0..20 {
            let (n, m) = (rng.gen_range(1..60), rng.gen_range(1..60));
            let (mu, nu) = (random_real(&mut rng, n), random_real(&mut rng, m));
            let sol = wasserstein1(&space, &mu, &nu).unwrap();
            let oracle = wasserstein1_1d(&space, &mu, &nu).unwrap();
            assert!((sol.value - oracle).abs() < 1e-9, "{} vs {oracle}", sol.value);
            assert!(sol.duality_gap().abs() <= 1e-9 * (1.0 + sol.value));
            assert!(sol.dual_violation < 1e-9);
            assert!(sol.plan.marginal_error(&mu, &nu) < 1e-10);
        }
    }
}

#[test]
fn ultrametric_matches_flow() {
    let s = PhaseSpace::symbolic(3, 0.4, 5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let word = |rng: &mut ChaCha8Rng| Point::Word((0..5).map(|_| rng.gen_range(0..3)).collect());
    for _ in 0..20 {
        let mu = DiscreteMeasure::uniform((0..7).map(|_| word(&mut rng)).collect()).unwrap();
        let nu = DiscreteMeasure::uniform((0..9).map(|_| word(&mut rng)).collect()).unwrap();
        let flow = wasserstein1(&s, &mu, &nu).unwrap().value;
        assert!((flow - wasserstein1_ultrametric(&s, &mu, &nu).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn mass_mismatch_is_rejected() {
    let s = PhaseSpace::unit_interval();
    assert!(matches!(wasserstein1(&s, &real(&[(0.0, 1.0)]), &real(&[(0.0, 0.5)])), Err(Error::Input(_))));
}

#[test]
fn merging_moves_atoms_at_most_eps() {
    let s = PhaseSpace::unit_interval();
    let mu = real(&[(0.0, 0.5), (1e-9, 0.5)]);
    assert_eq!(merge_atoms(&s, &mu, 0.0), mu);
    let merged = merge_atoms(&s, &mu, 1e-6);
    assert_eq!(merged.len(), 1);
    assert!((merged.total_mass() - 1.0).abs() < 1e-15);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let big = random_real(&mut rng, 10_000);
    let merged = merge_atoms(&s, &big, 1e-4);
    assert!(merged.len() < big.len());
    assert!(w1(&s, &merged, &big).unwrap() <= 1e-4);

    let disc = PhaseSpace::unit_disc();
    let pts: Vec<Point> = (0..400)
        .map(|_| {
            let (r, a): (f64, f64) = (rng.gen_range(0.0f64..1.0).sqrt(), rng.gen_range(0.0..std::f64::consts::TAU));
            Point::Vector(vec![r * a.cos(), r * a.sin()])
        })
        .collect();
    let mu = DiscreteMeasure::uniform(pts).unwrap();
    let merged = merge_atoms(&disc, &mu, 0.05);
    assert!(merged.len() < mu.len());
    assert!(wasserstein1(&disc, &merged, &mu).unwrap().value <= 0.05);
}

#[test]
fn partition_example() {
    let s = PhaseSpace::unit_interval();
    let parts = [Part::interval(0.0, 0.1), Part::interval(0.9, 1.0)];
    let mu = real(&[(0.0, 0.5), (1.0, 0.5)]);
    let nu = real(&[(0.05, 0.75), (0.95, 0.25)]);
    let pp = partition_plan(&s, &mu, &nu, &parts).unwrap();
    assert!((pp.m - 0.75).abs() < 1e-15);
    assert!((pp.bound - 0.325).abs() < 1e-15);
    assert!(pp.plan.cost <= pp.bound);
    assert!(pp.plan.marginal_error(&mu, &nu) < 1e-15);
    assert!(pp.plan.cost >= wasserstein1(&s, &mu, &nu).unwrap().value - 1e-15);

    let same = partition_plan(&s, &real(&[(0.0, 1.0)]), &real(&[(0.05, 1.0)]), &parts).unwrap();
    assert!(same.plan.cost <= 0.1 + 1e-15);
    assert!(partition_plan(&s, &real(&[(0.5, 1.0)]), &real(&[(0.05, 1.0)]), &parts).is_err());
}

#[test]
fn lipschitz_test_functions_are_dominated() {
    let s = PhaseSpace::unit_interval();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let (mu, nu) = (random_real(&mut rng, 20), random_real(&mut rng, 25));
        let value = wasserstein1(&s, &mu, &nu).unwrap().value;
        let cones: Vec<(f64, f64)> = (0..5).map(|_| (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0))).collect();
        let phi = |p: &Point| {
            let x = p.first_coordinate();
            cones.iter().map(|(c, h)| h + (x - c).abs()).fold(f64::INFINITY, f64::min)
        };
        assert!((mu.integrate(phi) - nu.integrate(phi)).abs() <= value + 1e-12);
    }
}

#[test]
fn snowflake_is_dominated() {
    let base = PhaseSpace::unit_interval();
    let snow = base.snowflake(0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10 {
        let (mu, nu) = (random_real(&mut rng, 15), random_real(&mut rng, 15));
        let w = wasserstein1(&base, &mu, &nu).unwrap().value;
        let wa = wasserstein1(&snow, &mu, &nu).unwrap().value;
        assert!(w <= base.diameter().powf(0.5) * wa + 1e-12);
    }
}
