//! Initial data realising the sharp `t^{-2}` lower bound: an annular bump
//! `Psi` squeezed anisotropically, and the Gaussian velocity `e^{-|x|^2}(1,1,1)`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{finite, invalid, Result};
use crate::oscillatory_quadrature::AxisymmetricIntegrand;
use crate::smooth::smooth_bump;
use crate::spectral::{Angular, AxialShape, Field, SpectralState, Term};

pub const DEFAULT_PSI_MARGIN: f64 = 0.02;

/// `2^{-3/2}`: `F[e^{-|x|^2}](xi) = 2^{-3/2} e^{-|xi|^2/4}` in the symmetric convention.
pub const GAUSSIAN_C1: f64 = 0.353_553_390_593_273_8;
/// Gaussian exponent of `v_hat_0`.
pub const GAUSSIAN_C2: f64 = 0.25;

/// `Psi_hat(xi) = eta(|xi|) zeta(xi_1^2) / max`, with `eta` supported in
/// `(1/2 + m, 1 - m)` and `zeta` supported where `|xi_1|` lies in the same
/// interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpPsi {
    margin: f64,
    scale: f64,
}

pub fn make_psi(inner_margin: f64) -> Result<BumpPsi> {
    let m = finite("inner_margin", inner_margin)?;
    if !(m > 0.0 && m < 0.1) {
        return Err(invalid(
            "inner_margin",
            format!("must lie in (0, 0.1), got {m}"),
        ));
    }
    let mut psi = BumpPsi {
        margin: m,
        scale: 1.0,
    };
    let peak = psi.raw_max();
    if !(peak > 0.0) {
        return Err(invalid("inner_margin", "support of Psi is empty"));
    }
    psi.scale = 1.0 / peak;
    Ok(psi)
}

impl Default for BumpPsi {
    fn default() -> Self {
        make_psi(DEFAULT_PSI_MARGIN).expect("default margin is valid")
    }
}

impl BumpPsi {
    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// `(lo, hi)` bounds for both `|xi|` and `|xi_1|`.
    pub fn band(&self) -> (f64, f64) {
        (0.5 + self.margin, 1.0 - self.margin)
    }

    fn raw(&self, xi1: f64, r: f64) -> f64 {
        let (lo, hi) = self.band();
        let norm = xi1.hypot(r);
        smooth_bump(norm, lo, hi) * smooth_bump(xi1 * xi1, lo * lo, hi * hi)
    }

    /// For fixed `|xi_1| = a`, the best `|xi|` is `max(a, midpoint)` since
    /// `eta` peaks at the midpoint and `|xi| >= |xi_1|`.
    fn raw_max(&self) -> f64 {
        let (lo, hi) = self.band();
        let mid = 0.5 * (lo + hi);
        let f = |a: f64| smooth_bump(a * a, lo * lo, hi * hi) * smooth_bump(a.max(mid), lo, hi);
        let n = 2000;
        let mut best = (0.0, lo);
        for k in 0..=n {
            let a = lo + (hi - lo) * k as f64 / n as f64;
            let v = f(a);
            if v > best.0 {
                best = (v, a);
            }
        }
        let h = (hi - lo) / n as f64;
        let (mut a, mut b) = ((best.1 - h).max(lo), (best.1 + h).min(hi));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..100 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if f(c) >= f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        f(0.5 * (a + b)).max(best.0)
    }

    /// `Psi_hat` in cylindrical coordinates `(xi_1, r)`.
    #[inline]
    pub fn eval(&self, xi1: f64, r: f64) -> f64 {
        self.scale * self.raw(xi1, r)
    }

    pub fn eval3(&self, xi: [f64; 3]) -> f64 {
        self.eval(xi[0], xi[1].hypot(xi[2]))
    }

    /// Largest `r` inside the support for a given `xi_1`.
    pub fn r_max_at(&self, xi1: f64) -> f64 {
        let hi = self.band().1;
        (hi * hi - xi1 * xi1).max(0.0).sqrt()
    }

    pub fn r_max(&self) -> f64 {
        self.r_max_at(self.band().0)
    }
}

/// `xi_t = (xi_1, t^{1/4} xi_2, t^{1/4} xi_3)` and its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnisotropicScaling {
    pub t: f64,
}

impl AnisotropicScaling {
    pub fn new(t: f64) -> Result<Self> {
        let t = finite("t", t)?;
        if t <= 0.0 {
            return Err(invalid("t", format!("must be positive, got {t}")));
        }
        Ok(Self { t })
    }

    pub fn forward(&self, xi: [f64; 3]) -> [f64; 3] {
        let q = self.t.powf(0.25);
        [xi[0], q * xi[1], q * xi[2]]
    }

    pub fn inverse(&self, xi: [f64; 3]) -> [f64; 3] {
        let q = self.t.powf(-0.25);
        [xi[0], q * xi[1], q * xi[2]]
    }
}

/// Support box and breaks of `Psi_hat(t^{1/2} xi_t)` in unscaled `xi`.
pub fn scaled_psi_shape(psi: &BumpPsi, t: f64) -> AxialShape {
    let (lo, hi) = psi.band();
    let a = t.powf(-0.5);
    let b = t.powf(-0.75);
    let p = *psi;
    AxialShape {
        g: Arc::new(move |xi1, r| Complex64::new(p.eval(xi1 / a, r / b), 0.0)),
        xi1_range: (-hi * a, hi * a),
        r_range: (0.0, psi.r_max() * b),
        r_bounds: Some(Arc::new(move |xi1| (0.0, p.r_max_at(xi1 / a) * b))),
        xi1_breaks: vec![-lo * a, 0.0, lo * a],
    }
}

/// `xi -> Psi_hat(t^{1/2} xi_1, t^{3/4} xi_2, t^{3/4} xi_3)`.
///
/// Its support lies in `|xi| < t^{-1/2}`, i.e. inside the low-frequency
/// region `|xi| < 1/2` once `t > 4`.
pub fn scaled_psi_multiplier(psi: &BumpPsi, t: f64) -> AxisymmetricIntegrand {
    let s = scaled_psi_shape(psi, t);
    let mut m =
        AxisymmetricIntegrand::new(s.g, s.xi1_range, s.r_range).with_xi1_breaks(s.xi1_breaks);
    if let Some(b) = s.r_bounds {
        m = m.with_r_bounds(b);
    }
    m
}

pub fn scaled_psi_is_low_frequency(t: f64) -> bool {
    t > 4.0
}

/// `Psi_hat(t^{1/2} xi_t)` as the density component of a state.
pub fn scaled_psi_state(psi: &BumpPsi, t: f64) -> SpectralState {
    let shape = scaled_psi_shape(psi, t);
    let rho_max = psi.band().1 * t.powf(-0.5);
    let term = Term::new(
        Angular::Axial(shape),
        Arc::new(|_| Complex64::new(1.0, 0.0)),
        (0.0, rho_max),
    );
    SpectralState::new(Field::single(term), Field::zero())
}

/// Radial support cut for the Gaussian data: `e^{-C2 rho^2} < 1e-30` beyond it.
pub fn gaussian_cutoff() -> f64 {
    (30.0 * std::f64::consts::LN_10 / GAUSSIAN_C2).sqrt()
}

/// `a_0 = 0`, `v_hat_0 = i C1 (xi_1 + xi_2 + xi_3) e^{-C2 |xi|^2} / |xi|`,
/// the curl-free potential `|D|^{-1} div u_0` of `u_0 = e^{-|x|^2}(1, 1, 1)`.
pub fn gaussian_v0() -> SpectralState {
    let term = Term::new(
        Angular::Dipole([1.0, 1.0, 1.0]),
        Arc::new(|rho: f64| Complex64::new((-GAUSSIAN_C2 * rho * rho).exp(), 0.0)),
        (0.0, gaussian_cutoff()),
    )
    .with_coeff(Complex64::new(0.0, GAUSSIAN_C1));
    SpectralState::new(Field::zero(), Field::single(term))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillatory_quadrature::{integrate_real, QuadOptions};

    #[test]
    fn margins_validated() {
        assert!(make_psi(0.0).is_err());
        assert!(make_psi(0.1).is_err());
        assert!(make_psi(0.05).is_ok());
    }

    #[test]
    fn normalised_to_unit_max() {
        let p = BumpPsi::default();
        let (lo, hi) = p.band();
        let mut best: f64 = 0.0;
        for i in 0..400 {
            let a = lo + (hi - lo) * i as f64 / 399.0;
            for k in 0..400 {
                let r = p.r_max_at(a) * k as f64 / 399.0;
                best = best.max(p.eval(a, r));
            }
        }
        assert!(best <= 1.0 + 1e-12);
        assert!(best > 1.0 - 1e-4);
    }

    #[test]
    fn support_violation_is_exact_zero() {
        let p = make_psi(0.01).unwrap();
        assert_eq!(p.eval3([0.9, 0.5, 0.0]), 0.0);
        assert_eq!(p.eval3([0.3, 0.5, 0.0]), 0.0);
    }

    #[test]
    fn scaling_round_trip() {
        let s = AnisotropicScaling::new(137.0).unwrap();
        let xi = [0.3, -1.7, 2.2];
        let back = s.inverse(s.forward(xi));
        for k in 0..3 {
            assert!((back[k] - xi[k]).abs() <= 1e-15 * xi[k].abs());
        }
    }

    #[test]
    fn c1_matches_one_dimensional_transform() {
        // (2 pi)^{-1/2} \int e^{-x^2} dx = 2^{-1/2}; cubed gives C1
        let (v, _, _) = integrate_real(|x| (-x * x).exp(), &[-12.0, 12.0], &QuadOptions::default());
        let one_d = v / (2.0 * std::f64::consts::PI).sqrt();
        assert!((one_d.powi(3) - GAUSSIAN_C1).abs() < 1e-12);
        // exponent: \int e^{-x^2} cos(k x) dx = sqrt(pi) e^{-k^2/4}
        for k in [0.5f64, 1.0, 3.0] {
            let (c, _, _) = integrate_real(
                |x| (-x * x).exp() * (k * x).cos(),
                &[-12.0, 12.0],
                &QuadOptions::default(),
            );
            let expect = std::f64::consts::PI.sqrt() * (-GAUSSIAN_C2 * k * k).exp();
            assert!((c - expect).abs() < 1e-10);
        }
    }
}
