//! One-dimensional maximisation of `|F^{-1}[m](x_1 e_1)|` along the axis.
//!
//! The candidate set is `{0}` together with a symmetric geometric grid
//! reaching `x_max`; the best candidate is then bracketed by its neighbours,
//! scanned densely, and polished by golden-section search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Ratio between consecutive geometric candidates.
pub const GRID_RATIO: f64 = 1.01;
/// Smallest nonzero candidate, relative to `x_max`.
pub const GRID_FLOOR: f64 = 1e-3;
const DENSE_SCAN: usize = 17;
const GOLDEN_ITERS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupResult {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// `{0} ∪ ±{x_max·GRID_FLOOR·GRID_RATIO^k} ∪ {±x_max}`, sorted ascending.
pub fn candidate_grid(x_max: f64) -> Vec<f64> {
    let x_max = x_max.abs();
    let mut pos = Vec::new();
    if x_max > 0.0 {
        let mut x = x_max * GRID_FLOOR;
        while x < x_max {
            pos.push(x);
            x *= GRID_RATIO;
        }
        pos.push(x_max);
    }
    let mut grid: Vec<f64> = pos.iter().rev().map(|x| -x).collect();
    grid.push(0.0);
    grid.extend(pos);
    grid
}

fn argmax(values: &[f64]) -> usize {
    // first index wins ties, so the result does not depend on scheduling
    let mut best = 0;
    for (k, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = k;
        }
    }
    best
}

fn golden<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> (f64, f64, usize) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut n = 2;
    for _ in 0..GOLDEN_ITERS {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        n += 1;
        if (b - a).abs() <= 1e-12 * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
    }
    if fc >= fd {
        (c, fc, n)
    } else {
        (d, fd, n)
    }
}

/// Maximise `f` over `[-x_max, x_max]`.
///
/// `f` is evaluated in parallel on the candidate grid; the reduction order is
/// fixed, so the result is independent of the thread count.
pub fn sup_on_axis<F>(f: F, x_max: f64) -> SupResult
where
    F: Fn(f64) -> f64 + Sync,
{
    let grid = candidate_grid(x_max);
    let values: Vec<f64> = grid.par_iter().map(|x| f(*x)).collect();
    let mut evaluations = grid.len();
    let k = argmax(&values);
    let lo = grid[k.saturating_sub(1)];
    let hi = grid[(k + 1).min(grid.len() - 1)];
    let mut best_x = grid[k];
    let mut best_v = values[k];
    if hi > lo {
        let scan: Vec<f64> = (0..DENSE_SCAN)
            .map(|i| lo + (hi - lo) * i as f64 / (DENSE_SCAN - 1) as f64)
            .collect();
        let sv: Vec<f64> = scan.par_iter().map(|x| f(*x)).collect();
        evaluations += scan.len();
        let i = argmax(&sv);
        if sv[i] > best_v {
            best_v = sv[i];
            best_x = scan[i];
        }
        let a = scan[i.saturating_sub(1)];
        let b = scan[(i + 1).min(scan.len() - 1)];
        if b > a {
            let (x, v, n) = golden(&f, a, b);
            evaluations += n;
            if v > best_v {
                best_v = v;
                best_x = x;
            }
        }
    }
    SupResult {
        x: best_x,
        value: best_v,
        evaluations,
    }
}
