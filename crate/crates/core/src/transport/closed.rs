use std::collections::HashMap;

use super::check_masses;
use crate::error::{input, Result};
use crate::measure::DiscreteMeasure;
use crate::space::{wrap_unit, PhaseSpace, Point, SpaceKind};

/// Signed point masses `μ − ν` sorted by position.
fn signed_events(mu: &DiscreteMeasure, nu: &DiscreteMeasure, wrap: bool) -> Result<Vec<(f64, f64)>> {
    let mut ev = Vec::with_capacity(mu.len() + nu.len());
    for (sign, m) in [(1.0, mu), (-1.0, nu)] {
        for (p, w) in m.atoms() {
            let Some(x) = p.real() else { return input(format!("expected a real point, got {p:?}")) };
            ev.push((if wrap { wrap_unit(x) } else { x }, sign * w));
        }
    }
    ev.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(ev)
}

/// `W₁` on an interval (`∫|F_μ − F_ν|`) or on the circle
/// (`min_c ∫|F_μ − F_ν − c|`, attained at a weighted median).
pub fn wasserstein1_1d(space: &PhaseSpace, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    check_masses(mu, nu)?;
    if space.is_transformed() {
        return input("closed-form W1 needs the untransformed metric");
    }
    match space.kind {
        SpaceKind::Interval { .. } => {
            let ev = signed_events(mu, nu, false)?;
            let mut cdf = 0.0;
            let mut total = 0.0;
            for k in 0..ev.len() - 1 {
                cdf += ev[k].1;
                total += cdf.abs() * (ev[k + 1].0 - ev[k].0);
            }
            Ok(total)
        }
        SpaceKind::Circle => {
            let ev = signed_events(mu, nu, true)?;
            let mut segments: Vec<(f64, f64)> = Vec::with_capacity(ev.len());
            let mut cdf = 0.0;
            for k in 0..ev.len() {
                cdf += ev[k].1;
                let len = if k + 1 < ev.len() { ev[k + 1].0 - ev[k].0 } else { 1.0 - ev[k].0 + ev[0].0 };
                if len > 0.0 {
                    segments.push((cdf, len));
                }
            }
            segments.sort_by(|a, b| a.0.total_cmp(&b.0));
            let half = segments.iter().map(|s| s.1).sum::<f64>() / 2.0;
            let mut acc = 0.0;
            let mut median = segments.last().map_or(0.0, |s| s.0);
            for s in &segments {
                acc += s.1;
                if acc >= half {
                    median = s.0;
                    break;
                }
            }
            Ok(segments.iter().map(|(v, l)| (v - median).abs() * l).sum())
        }
        _ => input("closed-form W1 is available on intervals and the circle only"),
    }
}

/// `W₁` on a symbolic space via its ultrametric tree: a word pair first
/// disagreeing at index `i` is at tree distance `θⁱ` when the edge entering a
/// length-`L` cylinder has length `(θ^{L−1} − θ^L)/2` (and `θ^{D−1}/2` at the
/// leaves), so `W₁ = Σ_cylinders ℓ·|μ(c) − ν(c)|`.
pub fn wasserstein1_ultrametric(space: &PhaseSpace, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    check_masses(mu, nu)?;
    let SpaceKind::Symbolic { theta, depth, .. } = space.kind else {
        return input("ultrametric W1 needs a symbolic space");
    };
    if space.is_transformed() {
        return input("closed-form W1 needs the untransformed metric");
    }
    let mut total = 0.0;
    let mut diff: HashMap<&[u8], f64> = HashMap::new();
    for len in 1..=depth {
        diff.clear();
        for (sign, m) in [(1.0, mu), (-1.0, nu)] {
            for (p, w) in m.atoms() {
                let Point::Word(word) = p else { return input(format!("expected a word, got {p:?}")) };
                *diff.entry(&word[..len]).or_default() += sign * w;
            }
        }
        let edge = if len < depth {
            (theta.powi(len as i32 - 1) - theta.powi(len as i32)) / 2.0
        } else {
            theta.powi(depth as i32 - 1) / 2.0
        };
        total += edge * diff.values().map(|d| d.abs()).sum::<f64>();
    }
    Ok(total)
}
