//! Independent oracles shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use itertools::Itertools;
use mabarc_core::lp::Sense;
use mabarc_core::Instance;

/// A row `a·x (sense) b`.
pub type Row = (Vec<f64>, Sense, f64);

/// Solves the square system `m x = r` by Gaussian elimination with partial
/// pivoting. `None` when (numerically) singular.
fn solve_square(mut m: Vec<Vec<f64>>, mut r: Vec<f64>) -> Option<Vec<f64>> {
    let n = r.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, piv);
        r.swap(col, piv);
        for row in 0..n {
            if row != col {
                let f = m[row][col] / m[col][col];
                if f != 0.0 {
                    for j in col..n {
                        m[row][j] -= f * m[col][j];
                    }
                    r[row] -= f * r[col];
                }
            }
        }
    }
    Some((0..n).map(|i| r[i] / m[i][i]).collect())
}

fn satisfies(row: &Row, x: &[f64], tol: f64) -> bool {
    let lhs: f64 = row.0.iter().zip(x).map(|(a, b)| a * b).sum();
    match row.1 {
        Sense::Le => lhs <= row.2 + tol,
        Sense::Ge => lhs >= row.2 - tol,
        Sense::Eq => (lhs - row.2).abs() <= tol,
    }
}

/// Maximum of `c·x` over `{rows, 0 ≤ x ≤ upper}` by enumerating every
/// vertex. The caller guarantees boundedness (a box, or rows that imply
/// one), so a feasible region always has a vertex. `None` when infeasible.
pub fn vertex_max(c: &[f64], rows: &[Row], upper: Option<f64>) -> Option<f64> {
    let n = c.len();
    let mut all: Vec<Row> = rows.to_vec();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        all.push((e.clone(), Sense::Ge, 0.0));
        if let Some(u) = upper {
            all.push((e, Sense::Le, u));
        }
    }
    let mut best: Option<f64> = None;
    for pick in (0..all.len()).combinations(n) {
        let m = pick.iter().map(|&i| all[i].0.clone()).collect();
        let r = pick.iter().map(|&i| all[i].2).collect();
        let Some(x) = solve_square(m, r) else { continue };
        if all.iter().all(|row| satisfies(row, &x, 1e-9)) {
            let v: f64 = c.iter().zip(&x).map(|(a, b)| a * b).sum();
            best = Some(best.map_or(v, |b: f64| b.max(v)));
        }
    }
    best
}

/// Best objective over a `step`-grid of 2×2 allocations (`w_{2,c} = 1 − w_{1,c}`),
/// with the thresholds lowered by `relax`.
pub fn grid_max_2x2(inst: &Instance, step: f64, relax: f64) -> Option<f64> {
    assert_eq!((inst.arms(), inst.contexts()), (2, 2));
    let g = inst.weighted_means();
    let lam = inst.thresholds();
    let n = (1.0 / step).round() as usize;
    let mut best: Option<f64> = None;
    for i in 0..=n {
        let a = i as f64 / n as f64;
        for j in 0..=n {
            let b = j as f64 / n as f64;
            let g1 = g[(0, 0)] * a + g[(0, 1)] * b;
            let g2 = g[(1, 0)] * (1.0 - a) + g[(1, 1)] * (1.0 - b);
            if g1 >= lam[0] - relax && g2 >= lam[1] - relax {
                let f = g1 + g2;
                best = Some(best.map_or(f, |v: f64| v.max(f)));
            }
        }
    }
    best
}

/// Largest `s` with `LP(μ, μ, λ + s)` feasible, by bisection. The
/// predicate is answered by the vertex enumerator below.
pub fn bisect_margin(inst: &Instance, resolution: f64) -> f64 {
    let feasible = |s: f64| allocation_vertex_max(inst, s).is_some();
    assert!(feasible(0.0));
    let (mut lo, mut hi) = (0.0, 1.0);
    while feasible(hi) {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Optimal value of the allocation program with thresholds `λ + s`, by
/// vertex enumeration. Only sensible for small instances.
pub fn allocation_vertex_max(inst: &Instance, s: f64) -> Option<f64> {
    let (arms, contexts) = (inst.arms(), inst.contexts());
    let n = arms * contexts;
    let var = |k: usize, c: usize| c * arms + k;
    let g = inst.weighted_means();
    let mut c = vec![0.0; n];
    let mut rows = Vec::new();
    for k in 0..arms {
        let mut a = vec![0.0; n];
        for ctx in 0..contexts {
            a[var(k, ctx)] = g[(k, ctx)];
            c[var(k, ctx)] = g[(k, ctx)];
        }
        rows.push((a, Sense::Ge, inst.thresholds()[k] + s));
    }
    for ctx in 0..contexts {
        let mut a = vec![0.0; n];
        for k in 0..arms {
            a[var(k, ctx)] = 1.0;
        }
        rows.push((a, Sense::Eq, 1.0));
    }
    // Column sums and x ≥ 0 already bound the region.
    vertex_max(&c, &rows, None)
}

/// Optimal value over `ψ(s, I)` by vertex enumeration: every revenue at
/// least `λ − s`, saturated arms also at most `λ + s`, zero pairs pinned.
pub fn relaxed_vertex_max(inst: &Instance, set: &mabarc_core::ActiveSet, s: f64) -> Option<f64> {
    let (arms, contexts) = (inst.arms(), inst.contexts());
    let n = arms * contexts;
    let var = |k: usize, c: usize| c * arms + k;
    let g = inst.weighted_means();
    let mut obj = vec![0.0; n];
    let mut rows: Vec<Row> = Vec::new();
    for k in 0..arms {
        let mut a = vec![0.0; n];
        for c in 0..contexts {
            a[var(k, c)] = g[(k, c)];
            obj[var(k, c)] = g[(k, c)];
        }
        let lambda = inst.thresholds()[k];
        rows.push((a.clone(), Sense::Ge, lambda - s));
        if set.is_saturated(k) {
            rows.push((a, Sense::Le, lambda + s));
        }
    }
    for &(k, c) in set.zero_pairs() {
        let mut a = vec![0.0; n];
        a[var(k, c)] = 1.0;
        rows.push((a, Sense::Eq, 0.0));
    }
    for c in 0..contexts {
        let mut a = vec![0.0; n];
        for k in 0..arms {
            a[var(k, c)] = 1.0;
        }
        rows.push((a, Sense::Eq, 1.0));
    }
    vertex_max(&obj, &rows, None)
}

/// Smallest `s ∈ [0, hi]` with `pred(s)`, assuming `pred` is monotone.
/// `None` if `pred(hi)` fails.
pub fn bisect_min(pred: impl Fn(f64) -> bool, hi: f64, resolution: f64) -> Option<f64> {
    if !pred(hi) {
        return None;
    }
    if pred(0.0) {
        return Some(0.0);
    }
    let (mut lo, mut hi) = (0.0, hi);
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}
