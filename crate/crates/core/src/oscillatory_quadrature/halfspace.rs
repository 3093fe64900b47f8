//! Half-space pieces of the `Psi` witness at the wavefront `x = (sigma t, 0, 0)`:
//!
//! ```text
//! J_-+(t) = \int_{xi_1 <> 0} e^{sigma i t^{1/2} (xi_1 + |xi| sqrt(1 - |xi|^2/4t))}
//!           e^{-|xi|^2/2} Psi_hat(xi_t) d xi.
//! ```
//!
//! Both are computed after the substitution `xi -> xi_{t^{-1}}`, which puts
//! the support of `Psi_hat` on a fixed box and produces `t^{1/2} J` directly.
//! For `xi_1 < 0` the phase is written as
//! `r'^2/(|xi_1| + |xi|) - t^{1/2} |xi|^3 / (4t (1 + sqrt(1 - |xi|^2/4t)))`,
//! which is free of cancellation and tends to `r'^2 / 2|xi_1|`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::adaptive::{integrate_vec, sampled_variation, QuadOptions};
use super::axis::Branch;
use crate::error::{invalid, Result};
use crate::witness_data::BumpPsi;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HalfSpace {
    XiNeg,
    XiPos,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfSpaceValue {
    pub t: f64,
    pub half: HalfSpace,
    pub branch: Branch,
    /// `J` itself.
    pub raw: Complex64,
    /// `t^{1/2} J`.
    pub scaled: Complex64,
    pub error: f64,
    pub converged: bool,
}

fn phase_neg(xi1: f64, rp: f64, t: f64) -> f64 {
    let a = xi1.abs();
    let n2 = xi1 * xi1 + rp * rp / t.sqrt();
    let n = n2.sqrt();
    let q = n2 / (4.0 * t);
    rp * rp / (a + n) - t.sqrt() * n2 * n / (4.0 * t * (1.0 + (1.0 - q).sqrt()))
}

fn phase_pos(xi1: f64, rp: f64, t: f64) -> f64 {
    let n2 = xi1 * xi1 + rp * rp / t.sqrt();
    let n = n2.sqrt();
    t.sqrt() * (xi1 + n * (1.0 - n2 / (4.0 * t)).sqrt())
}

/// Integrand of `t^{1/2} J` in the rescaled variables `(xi_1, r')`, including
/// the cylindrical Jacobian `2 pi r'`. `t = inf` gives the limit integrand.
pub fn scaled_integrand(
    psi: &BumpPsi,
    half: HalfSpace,
    branch: Branch,
    t: f64,
    xi1: f64,
    rp: f64,
) -> Complex64 {
    let sigma = branch.sign();
    let amp = psi.eval(xi1, rp);
    if amp == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let (phase, gauss) = if t.is_infinite() {
        (rp * rp / (2.0 * xi1.abs()), (-0.5 * xi1 * xi1).exp())
    } else {
        let p = match half {
            HalfSpace::XiNeg => phase_neg(xi1, rp, t),
            HalfSpace::XiPos => phase_pos(xi1, rp, t),
        };
        (p, (-0.5 * (xi1 * xi1 + rp * rp / t.sqrt())).exp())
    };
    let (s, c) = (sigma * phase).sin_cos();
    Complex64::new(c, s) * (amp * gauss * 2.0 * PI * rp)
}

fn integrate_half(
    psi: &BumpPsi,
    half: HalfSpace,
    branch: Branch,
    t: f64,
    opts: &QuadOptions,
) -> (Complex64, f64, bool) {
    let (lo, hi) = psi.band();
    let (a, b) = match half {
        HalfSpace::XiNeg => (-hi, -lo),
        HalfSpace::XiPos => (lo, hi),
    };
    let inner_opts = QuadOptions {
        // inner noise must stay well below the outer tolerance or the outer
        // refinement chases it
        rel_tol: opts.rel_tol * 1e-4,
        // the integrand is O(1); relative accuracy on the e^{-1/x} flanks is
        // neither reachable nor needed
        abs_tol: opts.abs_tol.max(1e-16),
        ..*opts
    };
    let mut inner_ok = true;
    let mut inner_err = 0.0;
    let phase = |x: f64, rp: f64| -> f64 {
        if t.is_infinite() {
            rp * rp / (2.0 * x.abs())
        } else {
            match half {
                HalfSpace::XiNeg => phase_neg(x, rp, t),
                HalfSpace::XiPos => phase_pos(x, rp, t),
            }
        }
    };
    let outer = integrate_vec(
        |xi1, out: &mut [Complex64]| {
            let r_hi = psi.r_max_at(xi1);
            let res = integrate_vec(
                |rp, o: &mut [Complex64]| o[0] = scaled_integrand(psi, half, branch, t, xi1, rp),
                1,
                &[0.0, r_hi],
                |u, v| sampled_variation(&|rp| phase(xi1, rp), u, v),
                &inner_opts,
            );
            inner_ok &= res.converged;
            inner_err = f64::max(inner_err, res.errors[0]);
            out[0] = res.values[0];
        },
        1,
        &[a, b],
        |u, v| {
            sampled_variation(&|x| phase(x, psi.r_max_at(x)), u, v).max(sampled_variation(
                &|x| phase(x, 0.0),
                u,
                v,
            ))
        },
        opts,
    );
    (
        outer.values[0],
        outer.errors[0] + inner_err * (b - a),
        outer.converged && inner_ok,
    )
}

/// `J` over one half-space.
pub fn halfspace_witness_integral(
    psi: &BumpPsi,
    t: f64,
    branch: Branch,
    half: HalfSpace,
    opts: &QuadOptions,
) -> Result<HalfSpaceValue> {
    if !(t.is_finite() && t > 0.0) {
        return Err(invalid(
            "t",
            format!("must be positive and finite, got {t}"),
        ));
    }
    let (v, e, ok) = integrate_half(psi, half, branch, t, opts);
    let sq = t.sqrt();
    Ok(HalfSpaceValue {
        t,
        half,
        branch,
        raw: v / sq,
        scaled: v,
        error: e,
        converged: ok,
    })
}

/// `\int_{xi_1 < 0} e^{sigma i r^2 / 2|xi_1|} e^{-xi_1^2/2} Psi_hat(xi) d xi`.
pub fn limit_constant(psi: &BumpPsi, branch: Branch, opts: &QuadOptions) -> (Complex64, f64, bool) {
    integrate_half(psi, HalfSpace::XiNeg, branch, f64::INFINITY, opts)
}

/// Largest `|integrand(t) - limit integrand|` over a fixed sample grid of
/// the `xi_1 < 0` support.
pub fn dominated_gap(psi: &BumpPsi, branch: Branch, t: f64) -> f64 {
    let (lo, hi) = psi.band();
    let n = 64;
    let mut gap: f64 = 0.0;
    for i in 0..=n {
        let xi1 = -hi + (hi - lo) * i as f64 / n as f64;
        let rm = psi.r_max_at(xi1);
        for k in 0..=n {
            let rp = rm * k as f64 / n as f64;
            let a = scaled_integrand(psi, HalfSpace::XiNeg, branch, t, xi1, rp);
            let b = scaled_integrand(psi, HalfSpace::XiNeg, branch, f64::INFINITY, xi1, rp);
            gap = gap.max((a - b).norm());
        }
    }
    gap
}
