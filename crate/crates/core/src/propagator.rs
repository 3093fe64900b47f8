//! Evolution of spectral states through `exp(t M_{|xi|})` and the identities
//! the evolved pair satisfies.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigensystem::{eigenvalues, propagator, propagator_unchecked, Wavenumber};
use crate::error::{finite, invalid, Result};
use crate::oscillatory_quadrature::axis::{Branch, RadialFn, RadialPhaseFn};
use crate::spectral::{Field, SpectralState};

/// Beyond this `|xi|` the propagator envelope is `e^{-45}` below its value
/// at `rho_min`, so a term supported from `rho_min` can be cut there (`None`
/// when the cut would not lie below `rho = 2`).
pub fn evolved_cutoff(t: f64, rho_min: f64) -> Option<f64> {
    // envelope exp(-t rho^2/2) for rho < 2 and at least e^{-2t} above
    const EXPONENT: f64 = 45.0;
    if t <= 0.0 {
        return None;
    }
    let r = (rho_min * rho_min + 2.0 * EXPONENT / t).sqrt();
    (r < 2.0).then_some(r)
}

/// `t |Im lambda(rho)|`, the oscillation carried by the evolved multipliers.
pub fn evolved_phase(t: f64) -> RadialPhaseFn {
    Arc::new(move |rho: f64| {
        if rho >= 2.0 {
            0.0
        } else {
            t * 0.5 * rho * ((2.0 - rho) * (2.0 + rho)).sqrt()
        }
    })
}

/// `exp(t lambda(rho))` for the eigenvalue oscillating like `e^{+- i t ...}`.
pub fn branch_multiplier(t: f64, branch: Branch) -> RadialFn {
    Arc::new(move |rho: f64| {
        let pair = eigenvalues(Wavenumber::new(rho).expect("radius is nonnegative"));
        let lambda = match branch {
            Branch::Plus => pair.lambda_minus,
            Branch::Minus => pair.lambda_plus,
        };
        (lambda * t).exp()
    })
}

/// `(a_hat_0, v_hat_0)` at a single frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeData {
    pub a0: Complex64,
    pub v0: Complex64,
}

impl ModeData {
    pub fn new(a0: f64, v0: f64) -> Self {
        Self {
            a0: Complex64::new(a0, 0.0),
            v0: Complex64::new(v0, 0.0),
        }
    }
}

/// `base` evolved to time `t`, evaluated lazily.
#[derive(Clone, Debug)]
pub struct EvolvedState {
    pub base: SpectralState,
    pub t: f64,
}

pub fn evolve(state: &SpectralState, t: f64) -> Result<EvolvedState> {
    let t = finite("t", t)?;
    if t < 0.0 {
        return Err(invalid("t", format!("must be nonnegative, got {t}")));
    }
    Ok(EvolvedState {
        base: state.clone(),
        t,
    })
}

#[derive(Clone, Copy)]
enum Entry {
    Aa,
    Av,
    Va,
    Vv,
}

impl EvolvedState {
    pub fn eval(&self, xi: [f64; 3]) -> (Complex64, Complex64) {
        let (a0, v0) = self.base.eval(xi);
        let rho = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
        propagator_unchecked(Wavenumber::new(rho).expect("norm is nonnegative"), self.t)
            .apply(a0, v0)
    }

    fn factor(&self, e: Entry) -> RadialFn {
        let t = self.t;
        Arc::new(move |rho: f64| {
            let g = propagator_unchecked(Wavenumber::new(rho).expect("radius is nonnegative"), t);
            match e {
                Entry::Aa => g.g_aa,
                Entry::Av => g.g_av,
                Entry::Va => g.g_va,
                Entry::Vv => g.g_vv,
            }
        })
    }

    fn combine(&self, from_a: Entry, from_v: Entry) -> Field {
        if self.t == 0.0 {
            return match from_a {
                Entry::Aa => self.base.a_hat.clone(),
                _ => self.base.v_hat.clone(),
            };
        }
        let phase = Some(evolved_phase(self.t));
        let breaks = [2.0];
        let mut out = Field::zero();
        for (field, entry) in [(&self.base.a_hat, from_a), (&self.base.v_hat, from_v)] {
            for term in &field.terms {
                let hi = evolved_cutoff(self.t, term.support.0).unwrap_or(f64::INFINITY);
                if let Some(t) =
                    term.with_radial_factor(self.factor(entry), (0.0, hi), &breaks, phase.clone())
                {
                    out.push(t);
                }
            }
        }
        out
    }

    /// The evolved pair as a state whose terms carry the propagator factors.
    pub fn state(&self) -> SpectralState {
        SpectralState::new(
            self.combine(Entry::Aa, Entry::Av),
            self.combine(Entry::Va, Entry::Vv),
        )
    }

    pub fn time(&self) -> f64 {
        self.t
    }
}

fn mat_apply(m: &[[f64; 2]; 2], u: [Complex64; 2]) -> [Complex64; 2] {
    [
        m[0][0] * u[0] + m[0][1] * u[1],
        m[1][0] * u[0] + m[1][1] * u[1],
    ]
}

/// `sum_{k in ks} (hM)^k / k!` as a matrix, with `ks` the odd or even
/// powers starting from `start`. Used for cancellation-free differences of
/// the exact trajectory.
fn series(rho: f64, h: f64, start: u32) -> [[f64; 2]; 2] {
    let m = [[0.0, -rho * h], [rho * h, -rho * rho * h]];
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
    let mut power = [[1.0, 0.0], [0.0, 1.0]];
    let mut fact = 1.0;
    for k in 1..=start {
        power = mul(&power, &m);
        fact *= k as f64;
    }
    let mut sum = [
        [power[0][0] / fact, power[0][1] / fact],
        [power[1][0] / fact, power[1][1] / fact],
    ];
    let mut k = start;
    loop {
        power = mul(&mul(&power, &m), &m);
        fact *= ((k + 1) * (k + 2)) as f64;
        k += 2;
        let term = [
            [power[0][0] / fact, power[0][1] / fact],
            [power[1][0] / fact, power[1][1] / fact],
        ];
        let size = term.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
        for i in 0..2 {
            for j in 0..2 {
                sum[i][j] += term[i][j];
            }
        }
        let scale = sum.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
        if size <= 1e-18 * scale || k > 200 {
            break;
        }
    }
    sum
}

fn check_step(t: f64, h: f64) -> Result<()> {
    finite("t", t)?;
    finite("h", h)?;
    if !(h > 0.0) {
        return Err(invalid("h", format!("must be positive, got {h}")));
    }
    if t < h {
        return Err(invalid("t", format!("must be at least h = {h}, got {t}")));
    }
    Ok(())
}

/// Default finite-difference step `1e-4 max(1, t)`.
pub fn default_step(t: f64) -> f64 {
    1e-4 * t.max(1.0)
}

fn trajectory(mode: ModeData, rho: Wavenumber, t: f64) -> Result<[Complex64; 2]> {
    let g = propagator(rho, t)?;
    let (a, v) = g.apply(mode.a0, mode.v0);
    Ok([a, v])
}

/// `|D_h E(t) + 2 rho^2 |v(t)|^2|` with `E = |a|^2 + |v|^2` and `D_h` the
/// central difference `(E(t+h) - E(t-h)) / 2h`.
///
/// `U(t +- h) = exp(+-hM) U(t)`, so `E(t+h) - E(t-h)` is assembled from
/// `d_+- = (exp(+-hM) - I) U(t)` by series rather than by subtracting two
/// nearly equal energies. The result is the same central difference without
/// the `eps/h` round-off floor.
pub fn energy_flux_residual(mode: ModeData, rho: Wavenumber, t: f64, h: f64) -> Result<f64> {
    check_step(t, h)?;
    let r = rho.get();
    let u = trajectory(mode, rho, t)?;
    let odd = series(r, h, 1);
    let even = series(r, h, 2);
    let s = mat_apply(&odd, u);
    let c = mat_apply(&even, u);
    // d_+ = c + s, d_- = c - s
    let dp = [c[0] + s[0], c[1] + s[1]];
    let dm = [c[0] - s[0], c[1] - s[1]];
    let cross = 2.0 * (u[0].conj() * (dp[0] - dm[0]) + u[1].conj() * (dp[1] - dm[1])).re;
    let quad = dp[0].norm_sqr() + dp[1].norm_sqr() - dm[0].norm_sqr() - dm[1].norm_sqr();
    let de = (cross + quad) / (2.0 * h);
    Ok((de + 2.0 * r * r * u[1].norm_sqr()).abs())
}

/// `(|D2_h a + rho^2 a - rho^3 v|, |D2_h v + rho^2 v + rho^2 D_h v|)` with
/// central first and second differences, assembled from the same series.
pub fn wave_residuals(mode: ModeData, rho: Wavenumber, t: f64, h: f64) -> Result<(f64, f64)> {
    check_step(t, h)?;
    let r = rho.get();
    let u = trajectory(mode, rho, t)?;
    // U(t+h) - 2U(t) + U(t-h) = 2 cosh-part, U(t+h) - U(t-h) = 2 sinh-part
    let d2 = mat_apply(&series(r, h, 2), u);
    let d1 = mat_apply(&series(r, h, 1), u);
    let a2 = d2[0] * (2.0 / (h * h));
    let v2 = d2[1] * (2.0 / (h * h));
    let v1 = d1[1] / h;
    let ra = (a2 + r * r * u[0] - r * r * r * u[1]).norm();
    let rv = (v2 + r * r * u[1] + r * r * v1).norm();
    Ok((ra, rv))
}

/// Pointwise energy `|a(t)|^2 + |v(t)|^2`.
pub fn pointwise_energy(mode: ModeData, rho: Wavenumber, t: f64) -> Result<f64> {
    let u = trajectory(mode, rho, t)?;
    Ok(u[0].norm_sqr() + u[1].norm_sqr())
}

pub type DensityFn = Arc<dyn Fn(f64, [f64; 3]) -> f64 + Send + Sync>;
pub type VelocityFn = Arc<dyn Fn(f64, [f64; 3]) -> [f64; 3] + Send + Sync>;

/// From a solution `(a~, u~)` of the normalised system, build
/// `a(t, x) = a~(alpha t / nu, sqrt(alpha) x / nu)` and
/// `u(t, x) = sqrt(alpha) u~(alpha t / nu, sqrt(alpha) x / nu)`.
/// The inverse map is `rescale(.., 1/alpha, 1/nu)`.
pub fn rescale(
    a: DensityFn,
    u: VelocityFn,
    alpha: f64,
    nu: f64,
) -> Result<(DensityFn, VelocityFn)> {
    for (name, v) in [("alpha", alpha), ("nu", nu)] {
        finite(name, v)?;
        if v <= 0.0 {
            return Err(invalid(name, format!("must be positive, got {v}")));
        }
    }
    let ts = alpha / nu;
    let xs = alpha.sqrt() / nu;
    let amp = alpha.sqrt();
    let a2: DensityFn = Arc::new(move |t, x| a(ts * t, [xs * x[0], xs * x[1], xs * x[2]]));
    let u2: VelocityFn = Arc::new(move |t, x| {
        let w = u(ts * t, [xs * x[0], xs * x[1], xs * x[2]]);
        [amp * w[0], amp * w[1], amp * w[2]]
    });
    Ok((a2, u2))
}

/// Real part of the spectral generator's imaginary eigen-frequency, exposed
/// for diagnostics.
pub fn oscillation_frequency(rho: Wavenumber) -> f64 {
    eigenvalues(rho).lambda_minus.im
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensystem::expm_oracle;
    use crate::spectral::{Angular, Term};

    fn w(r: f64) -> Wavenumber {
        Wavenumber::new(r).unwrap()
    }

    fn sample_state() -> SpectralState {
        let a = Term::new(
            Angular::Isotropic,
            Arc::new(|r: f64| Complex64::new((-r * r).exp(), 0.0)),
            (0.0, 10.0),
        );
        let v = Term::new(
            Angular::Dipole([1.0, 0.5, -0.2]),
            Arc::new(|r: f64| Complex64::new(r * (-r).exp(), 0.0)),
            (0.0, 40.0),
        )
        .with_coeff(Complex64::new(0.0, 1.0));
        SpectralState::new(Field::single(a), Field::single(v))
    }

    #[test]
    fn time_zero_is_identity() {
        let s = sample_state();
        let e = evolve(&s, 0.0).unwrap();
        let xi = [0.3, -0.4, 1.2];
        assert_eq!(e.eval(xi), s.eval(xi));
        assert_eq!(e.state().eval(xi), s.eval(xi));
    }

    #[test]
    fn evolved_terms_match_pointwise_evaluation() {
        let s = sample_state();
        let e = evolve(&s, 1.7).unwrap();
        let st = e.state();
        for xi in [[0.3, -0.4, 1.2], [2.5, 0.0, 0.1], [0.01, 0.02, -0.03]] {
            let (a, v) = e.eval(xi);
            let (b, u) = st.eval(xi);
            assert!((a - b).norm() < 1e-15 && (v - u).norm() < 1e-15);
        }
    }

    #[test]
    fn high_frequency_mode_matches_oracle() {
        let g = expm_oracle(w(4.0), 6.0).unwrap();
        let (_, v) = propagator(w(4.0), 6.0)
            .unwrap()
            .apply(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        assert!((v - g.g_vv).norm() < 1e-10 * g.g_vv.norm());
        assert!(g.g_vv.norm() <= (6.0 * -1.0717967697244908f64).exp());
    }

    #[test]
    fn energy_from_oracle_column() {
        let g = expm_oracle(w(1.0), 1.0).unwrap();
        let e = pointwise_energy(ModeData::new(1.0, 0.0), w(1.0), 1.0).unwrap();
        assert!((e - (g.g_aa.norm_sqr() + g.g_va.norm_sqr())).abs() < 1e-12);
    }

    #[test]
    fn residuals_vanish_at_zero_frequency() {
        let m = ModeData::new(1.0, 1.0);
        assert_eq!(energy_flux_residual(m, w(0.0), 1.0, 1e-3).unwrap(), 0.0);
        assert_eq!(wave_residuals(m, w(0.0), 1.0, 1e-3).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn documented_residual_levels() {
        let r = energy_flux_residual(ModeData::new(1.0, 0.0), w(1.0), 1.0, 1e-4).unwrap();
        assert!(r <= 1e-7, "{r}");
        let r = energy_flux_residual(ModeData::new(1.0, 0.0), w(2.0), 0.5, 1e-4).unwrap();
        assert!(r <= 1e-7, "{r}");
        let (x, y) = wave_residuals(ModeData::new(1.0, 1.0), w(1.0), 2.0, 1e-3).unwrap();
        assert!(x <= 1e-5 && y <= 1e-5, "{x} {y}");
    }

    #[test]
    fn step_validation() {
        let m = ModeData::new(1.0, 0.0);
        assert!(energy_flux_residual(m, w(1.0), 1e-5, 1e-4).is_err());
        assert!(wave_residuals(m, w(1.0), 1.0, 0.0).is_err());
        assert_eq!(default_step(50.0), 5e-3);
    }

    #[test]
    fn rescale_identity_and_time_argument() {
        let a: DensityFn = Arc::new(|t, x| t + 2.0 * x[0] - x[2]);
        let u: VelocityFn = Arc::new(|t, x| [t, x[1], x[0] * x[2]]);
        let (a1, _) = rescale(a.clone(), u.clone(), 1.0, 1.0).unwrap();
        assert_eq!(a1(0.7, [1.0, 2.0, 3.0]), a(0.7, [1.0, 2.0, 3.0]));
        let probe: DensityFn = Arc::new(|t, _| t);
        let (p, _) = rescale(probe, u.clone(), 2.0, 3.0).unwrap();
        assert!((p(3.0, [0.0; 3]) - 2.0).abs() < 1e-15);
        assert!(rescale(a, u, 0.0, 1.0).is_err());
    }

    #[test]
    fn cutoff_bounds_entries() {
        for t in [50.0, 100.0, 1e4] {
            let r = evolved_cutoff(t, 0.0).unwrap();
            for x in [r, 1.5 * r, 1.99, 2.0, 3.0, 50.0] {
                if x >= r {
                    assert!(
                        propagator(w(x), t).unwrap().max_abs() < 1e-17,
                        "t={t} rho={x}"
                    );
                }
            }
        }
        assert!(evolved_cutoff(10.0, 0.0).is_none());
        // relative to the support edge
        let r = evolved_cutoff(100.0, 1.0).unwrap();
        assert!(
            propagator(w(r), 100.0).unwrap().max_abs()
                < 1e-17 * propagator(w(1.0), 100.0).unwrap().max_abs()
        );
        assert!(evolved_cutoff(100.0, 1.9).is_none());
    }
}
