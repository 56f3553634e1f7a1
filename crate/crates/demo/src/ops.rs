use std::f64::consts::LN_2;

use ics_transfer::contraction::{default_merge_eps, empirical_rate, gibbs_measure, ContractionConstants};
use ics_transfer::transfer::{normalize, rpf_eigendata};
use ics_transfer::{Grid, Ics, NormalizedOperator, Point, Potential, PotentialSpec, Result, TransferOperator};

const EIGEN_GRID: usize = 256;
const EIGEN_TOL: f64 = 1e-8;

fn operator(amplitude: f64) -> Result<TransferOperator> {
    let f = Ics::doubling_map();
    let a = Potential::from_spec(PotentialSpec::Sine { base: -LN_2, amplitude }, f.space())?;
    Ok(TransferOperator::new(f, a))
}

fn normalized(amplitude: f64) -> Result<NormalizedOperator> {
    normalize(&operator(amplitude)?, Grid::Circle { n: EIGEN_GRID }, EIGEN_TOL)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub w1: Vec<f64>,
    pub bound: Vec<f64>,
    pub lambda_emp: f64,
    pub c: f64,
    pub lambda: f64,
}

impl Curve {
    pub fn flatten(self) -> Vec<f64> {
        let mut v = self.w1;
        v.extend(self.bound);
        v.extend([self.lambda_emp, self.c, self.lambda]);
        v
    }
}

pub fn contraction_curve(amplitude: f64, x: f64, y: f64, n: usize) -> Result<Curve> {
    let p = normalized(amplitude)?;
    let f = p.ics();
    let c = ContractionConstants::new(f.theta(), f.space().diameter(), p.lipschitz().value)?;
    let r = empirical_rate(&p, &Point::Real(x), &Point::Real(y), n, default_merge_eps(1e-6, n))?;
    let d0 = r.w1[0];
    let bound = (0..=n).map(|k| c.bound(k) * d0 + r.merge_slack[k]).collect();
    Ok(Curve { w1: r.w1, bound, lambda_emp: r.lambda_emp, c: c.c, lambda: c.lambda })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub mass: Vec<f64>,
    pub iterations: usize,
}

pub fn gibbs_histogram(amplitude: f64, bins: usize, tol: f64) -> Result<Histogram> {
    let bins = bins.max(1);
    let p = normalized(amplitude)?;
    let g = gibbs_measure(&p, &Point::Real(0.0), tol, default_merge_eps(tol, 40))?;
    let mut mass = vec![0.0; bins];
    for (x, w) in g.measure.atoms() {
        let i = ((x.first_coordinate() * bins as f64) as usize).min(bins - 1);
        mass[i] += w;
    }
    Ok(Histogram { mass, iterations: g.iterations })
}

/// `(ρ, h)` on `n` equally spaced points, normalized so `h(0) = 1`.
pub fn eigenfunction(amplitude: f64, n: usize) -> Result<(f64, Vec<f64>)> {
    let e = rpf_eigendata(&operator(amplitude)?, Grid::Circle { n: EIGEN_GRID }, EIGEN_TOL)?;
    let h = (0..n.max(1)).map(|i| e.h(&Point::Real(i as f64 / n.max(1) as f64))).collect();
    Ok((e.rho, h))
}
