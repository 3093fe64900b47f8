//! Inverse Fourier transforms evaluated on the `x_1` axis.
//!
//! With the symmetric convention
//! `F^{-1}[m](x) = (2 pi)^{-3/2} \int e^{i x . xi} m(xi) d xi`, a multiplier
//! that is axisymmetric about `xi_1` reduces at `x = (x_1, 0, 0)` to
//! `(2 pi)^{-3/2} 2 pi \int\int e^{i x_1 xi_1} g(xi_1, r) r dr dxi_1`.
//! Two evaluators are provided:
//!
//! * [`AxisMarginal`] integrates out `r` at each `xi_1` node once, so that
//!   every further `x_1` costs one pass over the `xi_1` nodes.
//! * [`RadialMarginal`] handles `Y(xi/|xi|) R(|xi|)` with `Y = 1` or
//!   `Y = xi_1/|xi|`, where the angular integral is a spherical Bessel
//!   function and only a radial quadrature remains.
//!
//! [`inverse_ft_cartesian`] is a slow fixed-grid tensor cross-check.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::adaptive::{integrate_vec, sampled_variation, QuadOptions};
use super::gauss::cell_rule;
use crate::summation::pairwise_sum_complex;

pub type AxialFn = Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>;
pub type AxialPhaseFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type RadialFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;
pub type RadialPhaseFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type RBoundsFn = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

/// `(2 pi)^{-3/2}`.
pub const FT_NORM: f64 = 0.063_493_635_934_240_97;

/// Sign of the oscillation `e^{+- i ...}`; `Plus` pairs with `lambda_-`
/// (phase `+t Im lambda_-`) and `Minus` with `lambda_+`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMeta {
    pub t: f64,
    pub branch: Branch,
}

/// `g(xi_1, r)` with `r = sqrt(xi_2^2 + xi_3^2)`, vanishing outside its box.
#[derive(Clone)]
pub struct AxisymmetricIntegrand {
    pub g: AxialFn,
    pub xi1_range: (f64, f64),
    pub r_range: (f64, f64),
    /// Optional tighter `r` window for a given `xi_1`.
    pub r_bounds: Option<RBoundsFn>,
    pub xi1_breaks: Vec<f64>,
    pub r_breaks: Vec<f64>,
    /// Phase of the integrand's own oscillation, used only for cell sizing.
    pub phase: Option<AxialPhaseFn>,
    pub meta: Option<PhaseMeta>,
}

impl std::fmt::Debug for AxisymmetricIntegrand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AxisymmetricIntegrand")
            .field("xi1_range", &self.xi1_range)
            .field("r_range", &self.r_range)
            .field("xi1_breaks", &self.xi1_breaks)
            .field("r_breaks", &self.r_breaks)
            .field("meta", &self.meta)
            .finish_non_exhaustive()
    }
}

impl AxisymmetricIntegrand {
    pub fn new(g: AxialFn, xi1_range: (f64, f64), r_range: (f64, f64)) -> Self {
        Self {
            g,
            xi1_range,
            r_range,
            r_bounds: None,
            xi1_breaks: Vec::new(),
            r_breaks: Vec::new(),
            phase: None,
            meta: None,
        }
    }

    pub fn with_phase(mut self, phase: AxialPhaseFn) -> Self {
        self.phase = Some(phase);
        self
    }

    pub fn with_r_bounds(mut self, bounds: RBoundsFn) -> Self {
        self.r_bounds = Some(bounds);
        self
    }

    pub fn with_xi1_breaks(mut self, breaks: Vec<f64>) -> Self {
        self.xi1_breaks = breaks;
        self
    }

    pub fn with_r_breaks(mut self, breaks: Vec<f64>) -> Self {
        self.r_breaks = breaks;
        self
    }

    pub fn with_meta(mut self, meta: PhaseMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    /// Multiply by a further factor, keeping the support and breaks.
    pub fn times(&self, factor: AxialFn) -> Self {
        let g = self.g.clone();
        let mut out = self.clone();
        out.g = Arc::new(move |a, r| g(a, r) * factor(a, r));
        out
    }

    #[inline]
    pub fn eval(&self, xi1: f64, r: f64) -> Complex64 {
        if xi1 < self.xi1_range.0
            || xi1 > self.xi1_range.1
            || r < self.r_range.0
            || r > self.r_range.1
        {
            return Complex64::new(0.0, 0.0);
        }
        (self.g)(xi1, r)
    }

    fn r_window(&self, xi1: f64) -> (f64, f64) {
        let (lo, hi) = self.r_range;
        match &self.r_bounds {
            Some(b) => {
                let (l, h) = b(xi1);
                (l.max(lo), h.min(hi))
            }
            None => (lo, hi),
        }
    }

    /// Rough `\int\int |g| r dr dxi_1` from a midpoint grid.
    fn magnitude_probe(&self) -> f64 {
        let n = 24;
        let (a0, a1) = self.xi1_range;
        let (r0, r1) = self.r_range;
        let da = (a1 - a0) / n as f64;
        let dr = (r1 - r0) / n as f64;
        let mut s = 0.0;
        for i in 0..n {
            let a = a0 + (i as f64 + 0.5) * da;
            for k in 0..n {
                let r = r0 + (k as f64 + 0.5) * dr;
                s += self.eval(a, r).norm() * r;
            }
        }
        s * da * dr
    }
}

/// Convergence report attached to every on-axis evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// Absolute error bound on the raw (un-normalised) integral.
    pub error: f64,
    pub converged: bool,
    pub cells: usize,
}

/// Anything that can produce `\int e^{i x_1 xi_1} m(xi) d xi` on the axis.
pub trait AxisEvaluator: Send + Sync {
    /// Raw integral, no `(2 pi)^{-3/2}` factor.
    fn eval_raw(&self, x1: f64) -> Complex64;
    fn certificate(&self) -> Certificate;
    /// Largest `|x_1|` the node set was built to resolve.
    fn x_limit(&self) -> f64;

    fn inverse_ft(&self, x1: f64) -> Complex64 {
        self.eval_raw(x1) * FT_NORM
    }
}

fn probe_points(x_limit: f64) -> Vec<f64> {
    let n = 32;
    (-n..=n).map(|k| x_limit * k as f64 / n as f64).collect()
}

fn sum_nodes(nodes: &[f64], weighted: &[Complex64], x1: f64) -> Complex64 {
    let parts: Vec<Complex64> = nodes
        .iter()
        .zip(weighted)
        .map(|(xi, w)| {
            let (s, c) = (x1 * xi).sin_cos();
            w * Complex64::new(c, s)
        })
        .collect();
    pairwise_sum_complex(&parts)
}

/// `xi_1` nodes with the `r` integral already taken.
#[derive(Debug, Clone)]
pub struct AxisMarginal {
    nodes: Vec<f64>,
    weighted: Vec<Complex64>,
    x_limit: f64,
    cert: Certificate,
}

impl AxisMarginal {
    /// Build nodes resolving every `|x_1| <= x_limit` to `opts.rel_tol`,
    /// measured against the largest value over a probe set on that range.
    pub fn build(m: &AxisymmetricIntegrand, x_limit: f64, opts: &QuadOptions) -> Self {
        let x_limit = x_limit.abs();
        let probes = probe_points(x_limit);
        let area = (m.xi1_range.1 - m.xi1_range.0).max(f64::MIN_POSITIVE);
        let scale = m.magnitude_probe() / area;
        let inner_opts = QuadOptions {
            rel_tol: opts.rel_tol * 1e-2,
            abs_tol: opts.rel_tol * 1e-4 * scale,
            batch_relative: false,
            ..*opts
        };
        let mut cache: HashMap<u64, (Complex64, f64, bool)> = HashMap::new();
        let mut marginal = |xi1: f64| -> (Complex64, f64, bool) {
            *cache
                .entry(xi1.to_bits())
                .or_insert_with(|| inner_r_integral(m, xi1, &inner_opts))
        };
        let phase = |a: f64, b: f64| -> f64 {
            let mut v = x_limit * (b - a);
            if let Some(p) = &m.phase {
                let (r0, r1) = m.r_range;
                let mut worst: f64 = 0.0;
                for r in [r0, 0.5 * (r0 + r1), r1] {
                    worst = worst.max(sampled_variation(&|s| p(s, r), a, b));
                }
                v += worst;
            }
            v
        };
        let mut breaks = vec![m.xi1_range.0, m.xi1_range.1];
        breaks.extend(
            m.xi1_breaks
                .iter()
                .copied()
                .filter(|x| *x > m.xi1_range.0 && *x < m.xi1_range.1),
        );
        let outer_opts = QuadOptions {
            batch_relative: true,
            ..*opts
        };
        let res = integrate_vec(
            |xi1, out: &mut [Complex64]| {
                let (g, _, _) = marginal(xi1);
                for (k, x) in probes.iter().enumerate() {
                    let (s, c) = (x * xi1).sin_cos();
                    out[k] = g * Complex64::new(c, s);
                }
            },
            probes.len(),
            &breaks,
            phase,
            &outer_opts,
        );
        let rule = cell_rule();
        let mut nodes = Vec::with_capacity(res.panels.len() * rule.nodes.len());
        let mut weighted = Vec::with_capacity(nodes.capacity());
        let mut inner_err = 0.0;
        let mut inner_ok = true;
        for (a, b) in &res.panels {
            for (xi, w) in rule.mapped(*a, *b) {
                let (g, e, ok) = marginal(xi);
                nodes.push(xi);
                weighted.push(g * (2.0 * PI * w));
                inner_err += e * w * 2.0 * PI;
                inner_ok &= ok;
            }
        }
        let outer_err = res.errors.iter().cloned().fold(0.0, f64::max) * 2.0 * PI;
        Self {
            nodes,
            weighted,
            x_limit,
            cert: Certificate {
                error: outer_err + inner_err,
                converged: res.converged && inner_ok,
                cells: res.cells,
            },
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

fn inner_r_integral(
    m: &AxisymmetricIntegrand,
    xi1: f64,
    opts: &QuadOptions,
) -> (Complex64, f64, bool) {
    let (lo, hi) = m.r_window(xi1);
    if !(hi > lo) {
        return (Complex64::new(0.0, 0.0), 0.0, true);
    }
    let mut breaks = vec![lo, hi];
    breaks.extend(m.r_breaks.iter().copied().filter(|r| *r > lo && *r < hi));
    let phase = |a: f64, b: f64| -> f64 {
        match &m.phase {
            Some(p) => sampled_variation(&|r| p(xi1, r), a, b),
            None => 0.0,
        }
    };
    let res = integrate_vec(
        |r, out: &mut [Complex64]| out[0] = m.eval(xi1, r) * r,
        1,
        &breaks,
        phase,
        opts,
    );
    (res.values[0], res.errors[0], res.converged)
}

impl AxisEvaluator for AxisMarginal {
    fn eval_raw(&self, x1: f64) -> Complex64 {
        sum_nodes(&self.nodes, &self.weighted, x1)
    }

    fn certificate(&self) -> Certificate {
        self.cert
    }

    fn x_limit(&self) -> f64 {
        self.x_limit
    }
}

/// Zonal harmonic order of a radial term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Harmonic {
    /// `Y = 1`.
    Monopole,
    /// `Y = xi_1 / |xi|`.
    Dipole,
}

/// `coeff * Y(xi/|xi|) * R(|xi|)`, supported in `support.0 <= |xi| <= support.1`.
#[derive(Clone)]
pub struct RadialIntegrand {
    pub radial: RadialFn,
    pub harmonic: Harmonic,
    pub coeff: Complex64,
    pub support: (f64, f64),
    pub breaks: Vec<f64>,
    pub phase: Option<RadialPhaseFn>,
}

impl RadialIntegrand {
    pub fn new(radial: RadialFn, harmonic: Harmonic, support: (f64, f64)) -> Self {
        Self {
            radial,
            harmonic,
            coeff: Complex64::new(1.0, 0.0),
            support,
            breaks: Vec::new(),
            phase: None,
        }
    }

    pub fn with_phase(mut self, phase: RadialPhaseFn) -> Self {
        self.phase = Some(phase);
        self
    }

    pub fn with_coeff(mut self, coeff: Complex64) -> Self {
        self.coeff = coeff;
        self
    }

    pub fn with_breaks(mut self, breaks: Vec<f64>) -> Self {
        self.breaks = breaks;
        self
    }
}

/// Spherical Bessel `j_0`.
pub fn sph_j0(a: f64) -> f64 {
    if a.abs() < 1e-4 {
        1.0 - a * a / 6.0
    } else {
        a.sin() / a
    }
}

/// Spherical Bessel `j_1`, series below `|a| = 0.5`.
pub fn sph_j1(a: f64) -> f64 {
    if a.abs() < 0.5 {
        let a2 = a * a;
        a * (1.0 / 3.0
            - a2 * (1.0 / 30.0
                - a2 * (1.0 / 840.0
                    - a2 * (1.0 / 45360.0
                        - a2 * (1.0 / 3991680.0 - a2 * (1.0 / 518918400.0 - a2 / 93405312000.0))))))
    } else {
        let (s, c) = a.sin_cos();
        (s - a * c) / (a * a)
    }
}

/// Radial nodes with `rho^2 R(rho)` precomputed.
#[derive(Debug, Clone)]
pub struct RadialMarginal {
    nodes: Vec<f64>,
    weighted: Vec<Complex64>,
    harmonic: Harmonic,
    prefactor: Complex64,
    x_limit: f64,
    cert: Certificate,
}

impl RadialMarginal {
    pub fn build(m: &RadialIntegrand, x_limit: f64, opts: &QuadOptions) -> Self {
        let x_limit = x_limit.abs();
        let probes = probe_points(x_limit);
        let kernel = match m.harmonic {
            Harmonic::Monopole => sph_j0,
            Harmonic::Dipole => sph_j1,
        };
        // 2 pi * 2 i^l
        let prefactor = m.coeff
            * match m.harmonic {
                Harmonic::Monopole => Complex64::new(4.0 * PI, 0.0),
                Harmonic::Dipole => Complex64::new(0.0, 4.0 * PI),
            };
        let (lo, hi) = m.support;
        let mut breaks = vec![lo, hi];
        breaks.extend(m.breaks.iter().copied().filter(|r| *r > lo && *r < hi));
        let mut cache: HashMap<u64, Complex64> = HashMap::new();
        let radial = m.radial.clone();
        let mut value = |rho: f64| -> Complex64 {
            *cache
                .entry(rho.to_bits())
                .or_insert_with(|| radial(rho) * rho * rho)
        };
        let phase = |a: f64, b: f64| -> f64 {
            let mut v = x_limit * (b - a);
            if let Some(p) = &m.phase {
                v += sampled_variation(&|r| p(r), a, b);
            }
            v
        };
        let outer_opts = QuadOptions {
            batch_relative: true,
            ..*opts
        };
        let res = integrate_vec(
            |rho, out: &mut [Complex64]| {
                let v = value(rho);
                for (k, x) in probes.iter().enumerate() {
                    out[k] = v * kernel(x * rho);
                }
            },
            probes.len(),
            &breaks,
            phase,
            &outer_opts,
        );
        let rule = cell_rule();
        let mut nodes = Vec::with_capacity(res.panels.len() * rule.nodes.len());
        let mut weighted = Vec::with_capacity(nodes.capacity());
        for (a, b) in &res.panels {
            for (rho, w) in rule.mapped(*a, *b) {
                nodes.push(rho);
                weighted.push(value(rho) * w);
            }
        }
        let err = res.errors.iter().cloned().fold(0.0, f64::max) * prefactor.norm();
        Self {
            nodes,
            weighted,
            harmonic: m.harmonic,
            prefactor,
            x_limit,
            cert: Certificate {
                error: err,
                converged: res.converged,
                cells: res.cells,
            },
        }
    }
}

impl AxisEvaluator for RadialMarginal {
    fn eval_raw(&self, x1: f64) -> Complex64 {
        let kernel = match self.harmonic {
            Harmonic::Monopole => sph_j0,
            Harmonic::Dipole => sph_j1,
        };
        let parts: Vec<Complex64> = self
            .nodes
            .iter()
            .zip(&self.weighted)
            .map(|(rho, w)| w * kernel(x1 * rho))
            .collect();
        pairwise_sum_complex(&parts) * self.prefactor
    }

    fn certificate(&self) -> Certificate {
        self.cert
    }

    fn x_limit(&self) -> f64 {
        self.x_limit
    }
}

/// Sum of several on-axis evaluators.
#[derive(Default)]
pub struct AxisSum {
    parts: Vec<Box<dyn AxisEvaluator>>,
}

impl AxisSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, e: Box<dyn AxisEvaluator>) {
        self.parts.push(e);
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }
}

impl AxisEvaluator for AxisSum {
    fn eval_raw(&self, x1: f64) -> Complex64 {
        self.parts.iter().map(|p| p.eval_raw(x1)).sum()
    }

    fn certificate(&self) -> Certificate {
        let mut c = Certificate {
            error: 0.0,
            converged: true,
            cells: 0,
        };
        for p in &self.parts {
            let pc = p.certificate();
            c.error += pc.error;
            c.converged &= pc.converged;
            c.cells += pc.cells;
        }
        c
    }

    fn x_limit(&self) -> f64 {
        self.parts
            .iter()
            .map(|p| p.x_limit())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Single-point on-axis inverse transform of an axisymmetric multiplier,
/// including the `(2 pi)^{-3/2}` factor.
pub fn inverse_ft_axis(
    m: &AxisymmetricIntegrand,
    x1: f64,
    opts: &QuadOptions,
) -> (Complex64, Certificate) {
    let marginal = AxisMarginal::build(m, x1.abs(), opts);
    let mut cert = marginal.certificate();
    cert.error *= FT_NORM;
    (marginal.inverse_ft(x1), cert)
}

/// Full three-dimensional tensor Gauss-Legendre evaluation of
/// `F^{-1}[f](x)` over a box, `cells` panels per axis. Slow; used as a
/// cross-check only.
pub fn inverse_ft_cartesian<F>(
    f: F,
    bounds: [(f64, f64); 3],
    x: [f64; 3],
    cells: usize,
) -> Complex64
where
    F: Fn([f64; 3]) -> Complex64,
{
    let rule = cell_rule();
    let axis = |(lo, hi): (f64, f64)| -> Vec<(f64, f64)> {
        let h = (hi - lo) / cells as f64;
        (0..cells)
            .flat_map(|c| {
                let a = lo + c as f64 * h;
                rule.mapped(a, a + h).collect::<Vec<_>>()
            })
            .collect()
    };
    let q1 = axis(bounds[0]);
    let q2 = axis(bounds[1]);
    let q3 = axis(bounds[2]);
    let mut planes = Vec::with_capacity(q1.len());
    for (a, wa) in &q1 {
        let mut acc = Vec::with_capacity(q2.len() * q3.len());
        for (b, wb) in &q2 {
            for (c, wc) in &q3 {
                let phase = x[0] * a + x[1] * b + x[2] * c;
                let (s, co) = phase.sin_cos();
                acc.push(f([*a, *b, *c]) * Complex64::new(co, s) * (wa * wb * wc));
            }
        }
        planes.push(pairwise_sum_complex(&acc));
    }
    pairwise_sum_complex(&planes) * FT_NORM
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_axis(t: f64) -> AxisymmetricIntegrand {
        let cut = (80.0 / t).sqrt();
        AxisymmetricIntegrand::new(
            Arc::new(move |a, r| Complex64::new((-0.5 * t * (a * a + r * r)).exp(), 0.0)),
            (-cut, cut),
            (0.0, cut),
        )
    }

    #[test]
    fn norm_constant() {
        assert!((FT_NORM - (2.0 * PI).powf(-1.5)).abs() < 1e-17);
    }

    #[test]
    fn gaussian_normalisation_at_origin() {
        // (2 pi)^{-3/2} \int e^{-|xi|^2/2} = 1
        let (v, c) = inverse_ft_axis(&gaussian_axis(1.0), 0.0, &QuadOptions::default());
        assert!((v.re - 1.0).abs() < 1e-10, "{v}");
        assert!(v.im.abs() < 1e-12);
        assert!(c.converged);
    }

    #[test]
    fn heat_multiplier_at_origin() {
        // (2 pi)^{-3/2} (2 pi / t)^{3/2} = t^{-3/2}
        let t = 4.0;
        let (v, _) = inverse_ft_axis(&gaussian_axis(t), 0.0, &QuadOptions::default());
        assert!((v.re - t.powf(-1.5)).abs() < 1e-10 * t.powf(-1.5));
    }

    #[test]
    fn gaussian_off_origin_matches_closed_form() {
        // F^{-1}[e^{-|xi|^2/2}](x) = e^{-|x|^2/2}
        let m = gaussian_axis(1.0);
        let marg = AxisMarginal::build(&m, 6.0, &QuadOptions::default());
        for x in [0.5, 1.0, 2.5, -3.0] {
            let v = marg.inverse_ft(x);
            assert!((v.re - (-0.5 * x * x).exp()).abs() < 1e-10, "x={x}: {v}");
        }
    }

    #[test]
    fn radial_monopole_matches_axisymmetric_path() {
        let t: f64 = 3.0;
        let cut = (80.0 / t).sqrt();
        let r = RadialIntegrand::new(
            Arc::new(move |rho| Complex64::new((-0.5 * t * rho * rho).exp(), 0.0)),
            Harmonic::Monopole,
            (0.0, cut),
        );
        let rm = RadialMarginal::build(&r, 5.0, &QuadOptions::default());
        let am = AxisMarginal::build(&gaussian_axis(t), 5.0, &QuadOptions::default());
        for x in [0.0, 0.7, 2.0, 4.9] {
            let a = rm.inverse_ft(x);
            let b = am.inverse_ft(x);
            assert!((a - b).norm() < 1e-11, "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn dipole_harmonic_matches_axisymmetric_path() {
        // m = i xi_1 e^{-|xi|^2/2}: F^{-1} = d/dx_1 e^{-|x|^2/2} = -x_1 e^{-x_1^2/2}
        let r = RadialIntegrand::new(
            Arc::new(|rho: f64| Complex64::new(rho * (-0.5 * rho * rho).exp(), 0.0)),
            Harmonic::Dipole,
            (0.0, 9.0),
        )
        .with_coeff(Complex64::new(0.0, 1.0));
        let rm = RadialMarginal::build(&r, 4.0, &QuadOptions::default());
        for x in [0.0, 0.5, 1.0, 3.0, -2.0] {
            let v = rm.inverse_ft(x);
            let exact = -x * (-0.5 * x * x).exp();
            assert!(
                (v.re - exact).abs() < 1e-10 && v.im.abs() < 1e-12,
                "x={x}: {v}"
            );
        }
    }

    #[test]
    fn odd_in_xi2_vanishes_on_axis() {
        let v = inverse_ft_cartesian(
            |xi| {
                Complex64::new(
                    xi[1] * (-(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2])).exp(),
                    0.0,
                )
            },
            [(-6.0, 6.0), (-6.0, 6.0), (-6.0, 6.0)],
            [0.8, 0.0, 0.0],
            4,
        );
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn cartesian_cross_check() {
        let x = 1.3;
        let v = inverse_ft_cartesian(
            |xi| {
                Complex64::new(
                    (-0.5 * (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2])).exp(),
                    0.0,
                )
            },
            [(-9.0, 9.0), (-9.0, 9.0), (-9.0, 9.0)],
            [x, 0.0, 0.0],
            6,
        );
        assert!((v.re - (-0.5 * x * x).exp()).abs() < 1e-9);
    }

    #[test]
    fn spherical_bessel_continuity() {
        for a in [0.4999999, 0.5, 0.5000001] {
            let s = sph_j1(a);
            let (sn, c) = a.sin_cos();
            let direct = (sn - a * c) / (a * a);
            assert!((s - direct).abs() < 1e-12 * s.abs(), "a={a}");
        }
        for a in [1.01e-4, 1e-4, 0.99e-4] {
            assert!((sph_j0(a) - a.sin() / a).abs() < 1e-15);
        }
    }
}
