//! Globally adaptive Gauss-Legendre quadrature for vector-valued integrands.
//!
//! Cells are first bisected until the declared phase variation across each
//! cell is at most `phase_per_cell`; after that, refinement is driven by the
//! difference between a 15-point rule on the cell and the same rule on its two
//! halves. Refinement happens in deterministic rounds, and the final sum is a
//! pairwise reduction over cells in ascending position.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gauss::cell_rule;
use crate::summation::pairwise_sum_complex;

const MAX_PHASE_DEPTH: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_cells: usize,
    /// Largest phase variation (radians) one cell may span.
    pub phase_per_cell: f64,
    /// Measure the relative tolerance against the largest component instead
    /// of each component separately.
    pub batch_relative: bool,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_cells: 100_000,
            phase_per_cell: std::f64::consts::FRAC_PI_4,
            batch_relative: false,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(mut self, rel: f64) -> Self {
        self.rel_tol = rel;
        self
    }

    pub fn with_abs_tol(mut self, abs: f64) -> Self {
        self.abs_tol = abs;
        self
    }

    pub fn batch(mut self) -> Self {
        self.batch_relative = true;
        self
    }
}

#[derive(Debug, Clone)]
pub struct Adaptive1d {
    pub values: Vec<Complex64>,
    pub errors: Vec<f64>,
    /// Sum of `|f|` times weights per component.
    pub l1: Vec<f64>,
    pub converged: bool,
    pub cells: usize,
    /// Panels carrying the final 15-point rule (two per final cell).
    pub panels: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadValue {
    pub value: Complex64,
    pub error: f64,
    pub converged: bool,
    pub cells: usize,
}

struct Cell {
    a: f64,
    b: f64,
    left: Vec<Complex64>,
    right: Vec<Complex64>,
    l1: Vec<f64>,
    err: Vec<f64>,
    splittable: bool,
}

fn rule_sum<F>(
    f: &mut F,
    a: f64,
    b: f64,
    dim: usize,
    buf: &mut [Complex64],
) -> (Vec<Complex64>, Vec<f64>)
where
    F: FnMut(f64, &mut [Complex64]),
{
    let mut acc = vec![Complex64::new(0.0, 0.0); dim];
    let mut l1 = vec![0.0; dim];
    for (x, w) in cell_rule().mapped(a, b) {
        f(x, buf);
        for k in 0..dim {
            acc[k] += buf[k] * w;
            l1[k] += buf[k].norm() * w;
        }
    }
    (acc, l1)
}

fn make_cell<F>(
    f: &mut F,
    a: f64,
    b: f64,
    coarse: Option<Vec<Complex64>>,
    dim: usize,
    buf: &mut [Complex64],
) -> Cell
where
    F: FnMut(f64, &mut [Complex64]),
{
    let coarse = match coarse {
        Some(c) => c,
        None => rule_sum(f, a, b, dim, buf).0,
    };
    let m = 0.5 * (a + b);
    let (left, l1l) = rule_sum(f, a, m, dim, buf);
    let (right, l1r) = rule_sum(f, m, b, dim, buf);
    let err = (0..dim)
        .map(|k| (left[k] + right[k] - coarse[k]).norm())
        .collect();
    let l1 = l1l.iter().zip(&l1r).map(|(x, y)| x + y).collect();
    let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    let splittable = (b - a) > 64.0 * f64::EPSILON * scale;
    Cell {
        a,
        b,
        left,
        right,
        l1,
        err,
        splittable,
    }
}

fn phase_split<P: Fn(f64, f64) -> f64>(
    a: f64,
    b: f64,
    phase: &P,
    max_phase: f64,
    out: &mut Vec<(f64, f64)>,
) {
    let mut stack = vec![(a, b, 0usize)];
    // depth-first, right pushed first so output stays ordered
    while let Some((lo, hi, depth)) = stack.pop() {
        if depth < MAX_PHASE_DEPTH && phase(lo, hi) > max_phase {
            let m = 0.5 * (lo + hi);
            stack.push((m, hi, depth + 1));
            stack.push((lo, m, depth + 1));
        } else {
            out.push((lo, hi));
        }
    }
}

/// Integrate `f : R -> C^dim` over `[breaks[0], breaks[last]]`, with cell
/// boundaries forced at every break point.
///
/// `phase(a, b)` estimates the phase variation of the integrand over `[a, b]`.
pub fn integrate_vec<F, P>(
    mut f: F,
    dim: usize,
    breaks: &[f64],
    phase: P,
    opts: &QuadOptions,
) -> Adaptive1d
where
    F: FnMut(f64, &mut [Complex64]),
    P: Fn(f64, f64) -> f64,
{
    let zero = Complex64::new(0.0, 0.0);
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|x| x.is_finite()).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() < 2 || dim == 0 {
        return Adaptive1d {
            values: vec![zero; dim],
            errors: vec![0.0; dim],
            l1: vec![0.0; dim],
            converged: true,
            cells: 0,
            panels: Vec::new(),
        };
    }

    let mut initial = Vec::new();
    for w in pts.windows(2) {
        phase_split(w[0], w[1], &phase, opts.phase_per_cell, &mut initial);
    }

    let mut buf = vec![zero; dim];
    let mut cells: Vec<Cell> = initial
        .into_iter()
        .map(|(a, b)| make_cell(&mut f, a, b, None, dim, &mut buf))
        .collect();

    let mut converged = false;
    loop {
        let mut totals = vec![zero; dim];
        let mut errs = vec![0.0; dim];
        let mut l1 = vec![0.0; dim];
        for c in &cells {
            for k in 0..dim {
                totals[k] += c.left[k] + c.right[k];
                errs[k] += c.err[k];
                l1[k] += c.l1[k];
            }
        }
        let batch_ref = totals.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let tol: Vec<f64> = (0..dim)
            .map(|k| {
                let reference = if opts.batch_relative {
                    batch_ref
                } else {
                    totals[k].norm()
                };
                (opts.rel_tol * reference)
                    .max(opts.abs_tol)
                    .max(64.0 * f64::EPSILON * l1[k])
            })
            .collect();
        if (0..dim).all(|k| errs[k] <= tol[k]) {
            converged = true;
            break;
        }
        if cells.len() >= opts.max_cells {
            break;
        }
        let n = cells.len() as f64;
        let score = |c: &Cell| -> f64 {
            (0..dim)
                .map(|k| {
                    if tol[k] > 0.0 {
                        c.err[k] / tol[k]
                    } else if c.err[k] > 0.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                })
                .fold(0.0, f64::max)
        };
        let scores: Vec<f64> = cells.iter().map(score).collect();
        let worst = scores.iter().cloned().fold(0.0, f64::max);
        let threshold = (1.0 / n).min(worst);
        let mut any_split = false;
        let mut next = Vec::with_capacity(cells.len() * 2);
        for (c, s) in cells.into_iter().zip(scores) {
            if c.splittable && s >= threshold && s > 0.0 {
                any_split = true;
                let m = 0.5 * (c.a + c.b);
                let Cell {
                    a, b, left, right, ..
                } = c;
                next.push(make_cell(&mut f, a, m, Some(left), dim, &mut buf));
                next.push(make_cell(&mut f, m, b, Some(right), dim, &mut buf));
            } else {
                next.push(c);
            }
        }
        cells = next;
        if !any_split {
            break;
        }
    }

    let mut values = Vec::with_capacity(dim);
    let mut errors = Vec::with_capacity(dim);
    let mut l1 = Vec::with_capacity(dim);
    let mut parts = Vec::with_capacity(cells.len() * 2);
    for k in 0..dim {
        parts.clear();
        for c in &cells {
            parts.push(c.left[k]);
            parts.push(c.right[k]);
        }
        values.push(pairwise_sum_complex(&parts));
        errors.push(cells.iter().map(|c| c.err[k]).sum());
        l1.push(cells.iter().map(|c| c.l1[k]).sum());
    }
    let panels = cells
        .iter()
        .flat_map(|c| {
            let m = 0.5 * (c.a + c.b);
            [(c.a, m), (m, c.b)]
        })
        .collect();
    Adaptive1d {
        values,
        errors,
        l1,
        converged,
        cells: cells.len(),
        panels,
    }
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate<F, P>(mut f: F, breaks: &[f64], phase: P, opts: &QuadOptions) -> QuadValue
where
    F: FnMut(f64) -> Complex64,
    P: Fn(f64, f64) -> f64,
{
    let r = integrate_vec(
        |x, out: &mut [Complex64]| out[0] = f(x),
        1,
        breaks,
        phase,
        opts,
    );
    QuadValue {
        value: r.values[0],
        error: r.errors[0],
        converged: r.converged,
        cells: r.cells,
    }
}

/// Real-valued convenience wrapper without phase information.
pub fn integrate_real<F>(mut f: F, breaks: &[f64], opts: &QuadOptions) -> (f64, f64, bool)
where
    F: FnMut(f64) -> f64,
{
    let r = integrate(|x| Complex64::new(f(x), 0.0), breaks, |_, _| 0.0, opts);
    (r.value.re, r.error, r.converged)
}

/// Phase variation of `psi` over `[a, b]` from five equally spaced samples.
pub fn sampled_variation<P: Fn(f64) -> f64>(psi: &P, a: f64, b: f64) -> f64 {
    let mut prev = psi(a);
    let mut total = 0.0;
    for k in 1..=4 {
        let x = a + (b - a) * k as f64 / 4.0;
        let v = psi(x);
        total += (v - prev).abs();
        prev = v;
    }
    total
}

pub fn no_phase(_: f64, _: f64) -> f64 {
    0.0
}
