//! Eigenvalues of the frequency-space generator
//!
//! ```text
//!          [ 0    -rho  ]
//! M_rho =  [ rho  -rho^2]
//! ```
//!
//! and the matrix exponential `exp(t M_rho)`, assembled so that the
//! degenerate frequency `rho = 2` (double eigenvalue `-2`) needs no special
//! cancellation handling: every entry is a combination of `exp(t lambda_+)`
//! and the divided difference `(exp(t a) - exp(t b)) / (a - b)`.
//!
//! [`expm_oracle`] is an independent scaling-and-squaring Taylor evaluation
//! used to cross-check [`propagator`]; it never touches the eigenvalues.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{finite, invalid, Result};

/// Entries below this magnitude are flushed to exact zero.
pub const UNDERFLOW_CLAMP: f64 = 1e-300;

/// Below this `|z|` the divided-difference kernel switches to its power series.
pub const PHI1_SERIES_SWITCH: f64 = 1e-3;

/// Radial frequency `|xi|` in the rescaled (alpha = nu = 1) system.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Wavenumber(f64);

impl Wavenumber {
    pub fn new(rho: f64) -> Result<Self> {
        let rho = finite("rho", rho)?;
        if rho < 0.0 {
            return Err(invalid("rho", format!("must be nonnegative, got {rho}")));
        }
        Ok(Self(rho))
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Wavenumber {
    type Error = crate::error::LabError;

    fn try_from(rho: f64) -> Result<Self> {
        Self::new(rho)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `rho < 2`: complex-conjugate pair with real part `-rho^2/2`.
    LowFreq,
    /// `rho == 2`: double eigenvalue `-2`.
    Degenerate,
    /// `rho > 2`: two distinct negative reals.
    HighFreq,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    pub regime: Regime,
}

/// Eigenvalues of `M_rho`.
///
/// For `rho > 2` the small eigenvalue is evaluated as
/// `-2 / (1 + sqrt(1 - 4/rho^2))`, which is the cancellation-free form of
/// `-rho^2/2 (1 - sqrt(1 - 4/rho^2))`.
pub fn eigenvalues(rho: Wavenumber) -> EigenPair {
    let r = rho.get();
    if r < 2.0 {
        let re = -0.5 * r * r;
        let im = 0.5 * r * ((2.0 - r) * (2.0 + r)).sqrt();
        EigenPair {
            lambda_plus: Complex64::new(re, -im),
            lambda_minus: Complex64::new(re, im),
            regime: Regime::LowFreq,
        }
    } else if r == 2.0 {
        let l = Complex64::new(-2.0, 0.0);
        EigenPair {
            lambda_plus: l,
            lambda_minus: l,
            regime: Regime::Degenerate,
        }
    } else {
        let s = ((1.0 - 2.0 / r) * (1.0 + 2.0 / r)).sqrt();
        EigenPair {
            lambda_plus: Complex64::new(-0.5 * r * r * (1.0 + s), 0.0),
            lambda_minus: Complex64::new(-2.0 / (1.0 + s), 0.0),
            regime: Regime::HighFreq,
        }
    }
}

/// `exp(z) - 1` without cancellation for small `|z|`.
fn exp_m1(z: Complex64) -> Complex64 {
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    Complex64::new(z.re.exp_m1() * c - 2.0 * half * half, z.re.exp() * s)
}

/// `(exp(z) - 1) / z`, continuous through `z = 0`.
pub fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < PHI1_SERIES_SWITCH {
        // truncation error ~ |z|^5/720 < 2e-18
        let mut sum = Complex64::new(1.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for k in 2..=6 {
            term = term * z / k as f64;
            sum += term;
        }
        sum
    } else {
        exp_m1(z) / z
    }
}

/// First divided difference of `z -> exp(t z)` at `(a, b)`:
/// `(exp(t a) - exp(t b)) / (a - b)`, with the confluent limit `t exp(t a)`.
///
/// The exponential is factored on the argument with the larger real part so
/// the remaining `phi1` argument has nonpositive real part and cannot overflow.
pub fn divided_exp(lambda_a: Complex64, lambda_b: Complex64, t: f64) -> Result<Complex64> {
    for (name, v) in [
        ("lambda_a.re", lambda_a.re),
        ("lambda_a.im", lambda_a.im),
        ("lambda_b.re", lambda_b.re),
        ("lambda_b.im", lambda_b.im),
        ("t", t),
    ] {
        finite(name, v)?;
    }
    if t < 0.0 {
        return Err(invalid("t", format!("must be nonnegative, got {t}")));
    }
    Ok(divided_exp_unchecked(lambda_a, lambda_b, t))
}

#[inline]
pub(crate) fn divided_exp_unchecked(lambda_a: Complex64, lambda_b: Complex64, t: f64) -> Complex64 {
    let (hi, lo) = if lambda_a.re >= lambda_b.re {
        (lambda_a, lambda_b)
    } else {
        (lambda_b, lambda_a)
    };
    if t == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    (hi * t).exp() * t * phi1((lo - hi) * t)
}

/// `exp(t M_rho)` as four multipliers:
/// `a(t) = g_aa a0 + g_av v0`, `v(t) = g_va a0 + g_vv v0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorMatrix {
    pub g_aa: Complex64,
    pub g_av: Complex64,
    pub g_va: Complex64,
    pub g_vv: Complex64,
    pub t: f64,
    pub rho: Wavenumber,
    /// Set when at least one entry was flushed to zero.
    pub underflow: bool,
}

impl PropagatorMatrix {
    pub fn identity(rho: Wavenumber) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self {
            g_aa: one,
            g_av: zero,
            g_va: zero,
            g_vv: one,
            t: 0.0,
            rho,
            underflow: false,
        }
    }

    #[inline]
    pub fn apply(&self, a0: Complex64, v0: Complex64) -> (Complex64, Complex64) {
        (
            self.g_aa * a0 + self.g_av * v0,
            self.g_va * a0 + self.g_vv * v0,
        )
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.g_aa, self.g_av, self.g_va, self.g_vv]
    }

    pub fn determinant(&self) -> Complex64 {
        self.g_aa * self.g_vv - self.g_av * self.g_va
    }

    /// Matrix product `self * other`; times add.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            g_aa: self.g_aa * other.g_aa + self.g_av * other.g_va,
            g_av: self.g_aa * other.g_av + self.g_av * other.g_vv,
            g_va: self.g_va * other.g_aa + self.g_vv * other.g_va,
            g_vv: self.g_va * other.g_av + self.g_vv * other.g_vv,
            t: self.t + other.t,
            rho: self.rho,
            underflow: self.underflow || other.underflow,
        }
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |self - other| / max(|self|, |other|)` over entries.
    pub fn relative_distance(&self, other: &Self) -> f64 {
        let scale = self.max_abs().max(other.max_abs());
        let diff = self
            .entries()
            .iter()
            .zip(other.entries().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }

    fn clamp_underflow(mut self) -> Self {
        for z in [
            &mut self.g_aa,
            &mut self.g_av,
            &mut self.g_va,
            &mut self.g_vv,
        ] {
            if z.norm() < UNDERFLOW_CLAMP {
                // at rho = 0 the off-diagonal zeros are structural, not underflow
                if *z != Complex64::new(0.0, 0.0) || self.rho.get() > 0.0 {
                    self.underflow = true;
                }
                *z = Complex64::new(0.0, 0.0);
            }
        }
        self
    }
}

/// `exp(t M_rho)` from the eigenvalues.
///
/// With `d = divided_exp(lambda_+, lambda_-, t)` and `e = exp(t lambda_+)`:
/// `g_aa = e - lambda_+ d`, `g_av = -rho d`, `g_va = rho d`,
/// `g_vv = e + lambda_- d`. The off-diagonal signs are fixed by
/// `d/dt exp(t M)|_{t=0} = M`.
pub fn propagator(rho: Wavenumber, t: f64) -> Result<PropagatorMatrix> {
    let t = finite("t", t)?;
    if t < 0.0 {
        return Err(invalid("t", format!("must be nonnegative, got {t}")));
    }
    Ok(propagator_unchecked(rho, t))
}

pub(crate) fn propagator_unchecked(rho: Wavenumber, t: f64) -> PropagatorMatrix {
    if t == 0.0 {
        return PropagatorMatrix::identity(rho);
    }
    let r = rho.get();
    let pair = eigenvalues(rho);
    let m = match pair.regime {
        Regime::Degenerate => {
            // exp(tM) = exp(-2t) (I + t (M + 2I)), M + 2I nilpotent
            let e = (-2.0 * t).exp();
            PropagatorMatrix {
                g_aa: Complex64::new(e * (1.0 + 2.0 * t), 0.0),
                g_av: Complex64::new(-2.0 * t * e, 0.0),
                g_va: Complex64::new(2.0 * t * e, 0.0),
                g_vv: Complex64::new(e * (1.0 - 2.0 * t), 0.0),
                t,
                rho,
                underflow: false,
            }
        }
        _ => {
            let lp = pair.lambda_plus;
            let lm = pair.lambda_minus;
            let e = (lp * t).exp();
            let d = divided_exp_unchecked(lp, lm, t);
            PropagatorMatrix {
                g_aa: e - lp * d,
                g_av: -d * r,
                g_va: d * r,
                g_vv: e + lm * d,
                t,
                rho,
                underflow: false,
            }
        }
    };
    m.clamp_underflow()
}

/// Independent `exp(t M_rho)` by scaling and squaring with a Taylor series.
///
/// The scaled matrix satisfies `||t M / 2^s||_1 <= 0.5`; the series stops
/// once a term's 1-norm drops below `1e-18`.
pub fn expm_oracle(rho: Wavenumber, t: f64) -> Result<PropagatorMatrix> {
    let t = finite("t", t)?;
    if t < 0.0 {
        return Err(invalid("t", format!("must be nonnegative, got {t}")));
    }
    let r = rho.get();
    let a = [[0.0, -t * r], [t * r, -t * r * r]];
    let norm1 = |m: &[[f64; 2]; 2]| -> f64 {
        (m[0][0].abs() + m[1][0].abs()).max(m[0][1].abs() + m[1][1].abs())
    };
    let n = norm1(&a);
    let squarings = if n > 0.5 {
        (n / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scale = 0.5_f64.powi(squarings);
    let b = [
        [a[0][0] * scale, a[0][1] * scale],
        [a[1][0] * scale, a[1][1] * scale],
    ];
    let mul = |x: &[[f64; 2]; 2], y: &[[f64; 2]; 2]| -> [[f64; 2]; 2] {
        [
            [
                x[0][0] * y[0][0] + x[0][1] * y[1][0],
                x[0][0] * y[0][1] + x[0][1] * y[1][1],
            ],
            [
                x[1][0] * y[0][0] + x[1][1] * y[1][0],
                x[1][0] * y[0][1] + x[1][1] * y[1][1],
            ],
        ]
    };
    let mut sum = [[1.0, 0.0], [0.0, 1.0]];
    let mut term = sum;
    for k in 1..64 {
        term = mul(&term, &b);
        let inv = 1.0 / k as f64;
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v *= inv;
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                sum[i][j] += term[i][j];
            }
        }
        if norm1(&term) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = mul(&sum, &sum);
    }
    let c = |x: f64| Complex64::new(x, 0.0);
    Ok(PropagatorMatrix {
        g_aa: c(sum[0][0]),
        g_av: c(sum[0][1]),
        g_va: c(sum[1][0]),
        g_vv: c(sum[1][1]),
        t,
        rho,
        underflow: false,
    }
    .clamp_underflow())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(r: f64) -> Wavenumber {
        Wavenumber::new(r).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1e-300)
    }

    #[test]
    fn rejects_bad_wavenumbers() {
        assert!(Wavenumber::new(-1.0).is_err());
        assert!(Wavenumber::new(f64::NAN).is_err());
        assert!(Wavenumber::new(f64::INFINITY).is_err());
        assert!(Wavenumber::new(0.0).is_ok());
    }

    #[test]
    fn degenerate_point() {
        let p = eigenvalues(w(2.0));
        assert_eq!(p.regime, Regime::Degenerate);
        assert_eq!(p.lambda_plus, Complex64::new(-2.0, 0.0));
        assert_eq!(p.lambda_minus, Complex64::new(-2.0, 0.0));
    }

    #[test]
    fn sqrt_two_gives_unit_imaginary_part() {
        let p = eigenvalues(w(2f64.sqrt()));
        assert_eq!(p.regime, Regime::LowFreq);
        assert!(close(p.lambda_plus, Complex64::new(-1.0, -1.0), 1e-15));
        assert!(close(p.lambda_minus, Complex64::new(-1.0, 1.0), 1e-15));
    }

    #[test]
    fn rho_four_matches_quadratic_roots() {
        // roots of z^2 + 16 z + 16 = 0: -8 -+ sqrt(48)
        let p = eigenvalues(w(4.0));
        let s48 = 48f64.sqrt();
        assert!(close(p.lambda_plus, Complex64::new(-8.0 - s48, 0.0), 1e-15));
        assert!(close(
            p.lambda_minus,
            Complex64::new(-8.0 + s48, 0.0),
            1e-14
        ));
        assert!((p.lambda_plus.re + 14.928203230275509).abs() < 1e-12);
        assert!((p.lambda_minus.re + 1.0717967697244908).abs() < 1e-12);
    }

    #[test]
    fn divided_exp_examples() {
        let m2 = Complex64::new(-2.0, 0.0);
        let v = divided_exp(m2, m2, 1.0).unwrap();
        assert!((v.re - (-2f64).exp()).abs() < 1e-16 && v.im == 0.0);

        let z = Complex64::new(0.0, 0.0);
        assert_eq!(divided_exp(z, z, 5.0).unwrap(), Complex64::new(5.0, 0.0));

        let a = Complex64::new(-1.0, 1.0);
        let b = Complex64::new(-1.0, -1.0);
        let v = divided_exp(a, b, 2.0).unwrap();
        let expected = (-2f64).exp() * 2f64.sin();
        assert!((v.re - expected).abs() < 1e-15 && v.im.abs() < 1e-16);
    }

    #[test]
    fn divided_exp_is_smooth_across_series_switch() {
        let base = Complex64::new(-0.3, 0.2);
        let t = 1.0;
        for eps in [0.99e-3, 1.01e-3, 1e-6, 1e-9] {
            let v = divided_exp(base + eps, base, t).unwrap();
            // reference: midpoint expansion t e^{t m} (1 + (t eps)^2/24)
            let m = base + eps * 0.5;
            let r = (m * t).exp() * t * (1.0 + (t * eps) * (t * eps) / 24.0);
            assert!(close(v, r, 1e-13), "eps={eps}: {v} vs {r}");
        }
    }

    #[test]
    fn divided_exp_rejects_negative_time_and_nan() {
        let z = Complex64::new(0.0, 0.0);
        assert!(divided_exp(z, z, -1.0).is_err());
        assert!(divided_exp(Complex64::new(f64::NAN, 0.0), z, 1.0).is_err());
    }

    #[test]
    fn degenerate_propagator_closed_form() {
        for t in [0.0, 0.3, 1.0, 7.5] {
            let g = propagator(w(2.0), t).unwrap();
            let e = (-2.0 * t).exp();
            assert!((g.g_aa.re - e * (1.0 + 2.0 * t)).abs() < 1e-15);
            assert!((g.g_av.re + 2.0 * t * e).abs() < 1e-15);
            assert!((g.g_va.re - 2.0 * t * e).abs() < 1e-15);
            assert!((g.g_vv.re - e * (1.0 - 2.0 * t)).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_at_time_zero() {
        for r in [0.0, 0.5, 2.0, 3.0, 100.0] {
            let g = propagator(w(r), 0.0).unwrap();
            assert_eq!(g.entries(), PropagatorMatrix::identity(w(r)).entries());
        }
    }

    #[test]
    fn oracle_matches_at_documented_points() {
        let a = propagator(w(1.0), 0.7).unwrap();
        let b = expm_oracle(w(1.0), 0.7).unwrap();
        assert!(a.relative_distance(&b) < 1e-10);
        let a = propagator(w(3.0), 0.5).unwrap();
        let b = expm_oracle(w(3.0), 0.5).unwrap();
        assert!(a.relative_distance(&b) < 1e-10);
    }

    #[test]
    fn oracle_special_cases() {
        let g = expm_oracle(w(0.0), 12.0).unwrap();
        assert_eq!(g.entries(), PropagatorMatrix::identity(w(0.0)).entries());
        let g = expm_oracle(w(2.0), 1.0).unwrap();
        let e = (-2f64).exp();
        let expect = [3.0 * e, -2.0 * e, 2.0 * e, -e];
        for (z, x) in g.entries().iter().zip(expect) {
            assert!((z.re - x).abs() < 1e-14);
        }
    }

    #[test]
    fn long_time_underflow_is_flagged() {
        let g = propagator(w(1e-3), 1e10).unwrap();
        assert!(g.underflow);
        assert!(g
            .entries()
            .iter()
            .all(|z| z.norm() == 0.0 || z.norm() >= UNDERFLOW_CLAMP));
        let g = expm_oracle(w(3.0), 1e4).unwrap();
        assert!(g.underflow);
        assert_eq!(g.max_abs(), 0.0);
    }

    #[test]
    fn generator_by_finite_difference() {
        let h = 1e-6;
        for r in [0.1, 1.0, 2.0, 3.0] {
            let g = propagator(w(r), h).unwrap();
            let m = [0.0, -r, r, -r * r];
            let id = [1.0, 0.0, 0.0, 1.0];
            for k in 0..4 {
                let fd = (g.entries()[k].re - id[k]) / h;
                assert!((fd - m[k]).abs() < 1e-4, "rho={r} k={k}: {fd} vs {}", m[k]);
            }
        }
    }

    #[test]
    fn high_frequency_identity() {
        // the unstable form loses ~log10(rho^2) digits, so compare on (2, 10]
        for k in 1..=800 {
            let r = 2.0 + k as f64 * 0.01;
            let s = (1.0 - 4.0 / (r * r)).sqrt();
            let naive = -0.5 * r * r * (1.0 - s);
            let stable = -2.0 / (1.0 + s);
            assert!(((naive - stable) / stable).abs() < 1e-13, "rho={r}");
        }
        let mut r = 10.0;
        while r <= 1000.0 {
            let lm = eigenvalues(w(r)).lambda_minus.re;
            assert!((lm + 1.0).abs() <= 4.0 / (r * r));
            r *= 1.1;
        }
    }
}
