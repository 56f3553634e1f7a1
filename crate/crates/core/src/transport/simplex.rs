//! Primal network simplex for the uncapacitated transportation problem.
//!
//! Supplies are rounded to integers summing to `SCALE` so that pivoting is
//! exact and degenerate cycling is ruled out by keeping the spanning tree
//! strongly feasible. Once the optimal tree is known its flows are re-solved
//! with the unrounded weights, which removes the rounding from the reported
//! plan whenever that basis stays feasible.

use crate::error::{Error, Result};

/// Integer mass units per unit of probability.
pub(crate) const SCALE: i64 = 1 << 40;

const NONE: usize = usize::MAX;

pub(crate) struct FlowSolution {
    /// `(source, target, mass)` with masses in the caller's units.
    pub flows: Vec<(usize, usize, f64)>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    /// Mass that had to be clamped when re-solving the tree with exact weights.
    pub clamped: f64,
    pub pivots: usize,
}

/// Splits `total` units proportionally to `w`, every entry getting at least one unit.
pub(crate) fn integerize(w: &[f64], total: i64) -> Vec<i64> {
    let sum: f64 = w.iter().sum();
    let mut units: Vec<i64> = Vec::with_capacity(w.len());
    let mut frac: Vec<(f64, usize)> = Vec::with_capacity(w.len());
    for (i, x) in w.iter().enumerate() {
        let q = x / sum * total as f64;
        let f = q.floor();
        units.push((f as i64).max(1));
        frac.push((q - f, i));
    }
    let mut diff = total - units.iter().sum::<i64>();
    frac.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut k = 0;
    while diff > 0 {
        units[frac[k % frac.len()].1] += 1;
        diff -= 1;
        k += 1;
    }
    while diff < 0 {
        let i = (0..units.len()).max_by_key(|&i| units[i]).unwrap();
        let take = (-diff).min(units[i] - 1);
        units[i] -= take;
        diff += take;
    }
    units
}

struct Tree {
    parent: Vec<usize>,
    pred: Vec<usize>,
    /// Whether the arc to the parent points from the node towards the parent.
    up: Vec<bool>,
    flow: Vec<i64>,
    pi: Vec<f64>,
    depth: Vec<usize>,
    children: Vec<Vec<usize>>,
}

/// Solves `min Σ c(i,j) f(i,j)` with row sums `a` and column sums `b`
/// (same total). `cost(i, j)` must be nonnegative.
pub(crate) fn solve(
    n: usize,
    m: usize,
    a: &[f64],
    b: &[f64],
    cost: &dyn Fn(usize, usize) -> f64,
) -> Result<FlowSolution> {
    let total_a: f64 = a.iter().sum();
    let nm = n * m;
    let root = n + m;
    let nodes = n + m + 1;

    let mut max_cost: f64 = 0.0;
    // one pass over the costs fixes the artificial cost; reused by pricing below
    let cache: Option<Vec<f64>> = if nm <= 1 << 22 {
        let v: Vec<f64> = (0..nm).map(|e| cost(e / m, e % m)).collect();
        max_cost = v.iter().copied().fold(0.0, f64::max);
        Some(v)
    } else {
        for i in 0..n {
            for j in 0..m {
                max_cost = max_cost.max(cost(i, j));
            }
        }
        None
    };
    let arc_cost = |e: usize| match &cache {
        Some(v) => v[e],
        None => cost(e / m, e % m),
    };
    let big = (n + m) as f64 * max_cost.max(f64::MIN_POSITIVE) + 1.0;
    let eps = 1e-13 * big;
    let cost_of = |e: usize| if e < nm { arc_cost(e) } else { big };

    let ua = integerize(a, SCALE);
    let ub = integerize(b, SCALE);

    let mut t = Tree {
        parent: vec![root; nodes],
        pred: vec![NONE; nodes],
        up: vec![false; nodes],
        flow: vec![0; nodes],
        pi: vec![0.0; nodes],
        depth: vec![1; nodes],
        children: vec![Vec::new(); nodes],
    };
    t.parent[root] = NONE;
    t.depth[root] = 0;
    for i in 0..n {
        t.pred[i] = nm + i;
        t.up[i] = true;
        t.flow[i] = ua[i];
        t.pi[i] = -big;
    }
    for j in 0..m {
        let v = n + j;
        t.pred[v] = nm + n + j;
        t.flow[v] = ub[j];
        t.pi[v] = big;
    }
    t.children[root] = (0..n + m).collect();

    let block = ((nm as f64).sqrt() as usize).clamp(10.min(nm), nm.max(1));
    let max_pivots = 200 * (n + m) * (n + m).max(10) + 1_000_000;
    let mut next = 0usize;
    let mut pivots = 0usize;
    let mut upath: Vec<usize> = Vec::new();
    let mut wpath: Vec<usize> = Vec::new();
    let mut stack: Vec<usize> = Vec::new();

    loop {
        // block pricing
        let mut best = -eps;
        let mut entering = NONE;
        let mut in_block = 0;
        for _ in 0..nm {
            let e = next;
            next += 1;
            if next == nm {
                next = 0;
            }
            let (i, j) = (e / m, e % m);
            let rc = arc_cost(e) + t.pi[i] - t.pi[n + j];
            if rc < best {
                best = rc;
                entering = e;
            }
            in_block += 1;
            if in_block == block {
                if entering != NONE {
                    break;
                }
                in_block = 0;
            }
        }
        if entering == NONE {
            break;
        }
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::Convergence { iterations: pivots, residual: best.abs() });
        }

        let u = entering / m;
        let w = n + entering % m;
        upath.clear();
        wpath.clear();
        let (mut x, mut y) = (u, w);
        while x != y {
            if t.depth[x] > t.depth[y] {
                upath.push(x);
                x = t.parent[x];
            } else if t.depth[y] > t.depth[x] {
                wpath.push(y);
                y = t.parent[y];
            } else {
                upath.push(x);
                wpath.push(y);
                x = t.parent[x];
                y = t.parent[y];
            }
        }

        // last blocking arc in cycle order: apex → u, entering arc, w → apex
        let mut delta = i64::MAX;
        let mut leave = NONE;
        let mut leave_on_u = false;
        for &v in upath.iter().rev() {
            if t.up[v] && t.flow[v] <= delta {
                delta = t.flow[v];
                leave = v;
                leave_on_u = true;
            }
        }
        for &v in &wpath {
            if !t.up[v] && t.flow[v] <= delta {
                delta = t.flow[v];
                leave = v;
                leave_on_u = false;
            }
        }
        if leave == NONE {
            return Err(Error::Internal("unbounded transportation cycle".into()));
        }
        for &v in &upath {
            if t.up[v] {
                t.flow[v] -= delta;
            } else {
                t.flow[v] += delta;
            }
        }
        for &v in &wpath {
            if t.up[v] {
                t.flow[v] += delta;
            } else {
                t.flow[v] -= delta;
            }
        }

        // re-hang the subtree cut off by the leaving arc below the other endpoint
        let (join, other, join_up) = if leave_on_u { (u, w, true) } else { (w, u, false) };
        let mut v = join;
        let mut new_parent = other;
        let mut new_arc = entering;
        let mut new_up = join_up;
        let mut new_flow = delta;
        loop {
            let old_parent = t.parent[v];
            let old_arc = t.pred[v];
            let old_up = t.up[v];
            let old_flow = t.flow[v];
            let siblings = &mut t.children[old_parent];
            let pos = siblings.iter().position(|&c| c == v).expect("child listed under parent");
            siblings.swap_remove(pos);
            t.children[new_parent].push(v);
            t.parent[v] = new_parent;
            t.pred[v] = new_arc;
            t.up[v] = new_up;
            t.flow[v] = new_flow;
            if v == leave {
                break;
            }
            new_parent = v;
            new_arc = old_arc;
            new_up = !old_up;
            new_flow = old_flow;
            v = old_parent;
        }

        stack.clear();
        stack.push(join);
        while let Some(v) = stack.pop() {
            let p = t.parent[v];
            let c = cost_of(t.pred[v]);
            t.pi[v] = if t.up[v] { t.pi[p] - c } else { t.pi[p] + c };
            t.depth[v] = t.depth[p] + 1;
            stack.extend_from_slice(&t.children[v]);
        }
    }

    for v in 0..n + m {
        if t.pred[v] >= nm && t.flow[v] != 0 {
            return Err(Error::Internal("transportation problem left artificial flow".into()));
        }
    }

    // exact-weight flows on the optimal tree, leaves first
    let mut order: Vec<usize> = (0..n + m).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(t.depth[v]));
    let mut subtree: Vec<f64> = (0..nodes)
        .map(|v| {
            if v < n {
                a[v]
            } else if v < n + m {
                -b[v - n]
            } else {
                0.0
            }
        })
        .collect();
    let mut exact = vec![0.0; nodes];
    for &v in &order {
        exact[v] = if t.up[v] { subtree[v] } else { -subtree[v] };
        let p = t.parent[v];
        subtree[p] += subtree[v];
    }
    let mut clamped = 0.0;
    let mut flows = Vec::new();
    for v in 0..n + m {
        let e = t.pred[v];
        if e < nm && exact[v] != 0.0 {
            if exact[v] < 0.0 {
                clamped += -exact[v];
                continue;
            }
            flows.push((e / m, e % m, exact[v]));
        }
    }
    // rounded flows as a fallback if the exact basis is infeasible beyond roundoff
    if clamped > 1e-12 * total_a {
        let unit = total_a / SCALE as f64;
        flows = (0..n + m)
            .filter(|&v| t.pred[v] < nm && t.flow[v] > 0)
            .map(|v| (t.pred[v] / m, t.pred[v] % m, t.flow[v] as f64 * unit))
            .collect();
    }
    flows.sort_by_key(|&(i, j, _)| (i, j));

    let shift = if n > 0 { -t.pi[0] } else { 0.0 };
    let phi = (0..n).map(|i| -t.pi[i] - shift).collect();
    let psi = (0..m).map(|j| t.pi[n + j] + shift).collect();
    Ok(FlowSolution { flows, phi, psi, clamped, pivots })
}
