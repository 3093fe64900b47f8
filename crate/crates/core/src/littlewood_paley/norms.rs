use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::partition::PartitionProfile;
use crate::error::{invalid, Result};
use crate::oscillatory_quadrature::adaptive::{integrate_vec, sampled_variation};
use crate::oscillatory_quadrature::sup::sup_on_axis;
use crate::oscillatory_quadrature::{AxisEvaluator, QuadOptions, FT_NORM};
use crate::spectral::{angular_gram, Angular, Component, Field, SpectralState};

/// Natively computed Lebesgue exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PNative {
    Two,
    Inf,
}

/// `phi_j` as a radial multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialWindow {
    pub profile: PartitionProfile,
    pub j: i32,
}

impl RadialWindow {
    pub fn apply(&self, f: &Field) -> Field {
        let p = self.profile;
        let j = self.j;
        f.with_radial_factor(
            Arc::new(move |rho| Complex64::new(p.phi(j, rho), 0.0)),
            p.support(j),
            &p.breaks(j),
            None,
        )
    }
}

/// A norm value with its quadrature certificate.
///
/// For `p = inf`, `value` is the largest `|F^{-1} f|` found on the `x_1`
/// axis (a lower bound for the sup) and `upper` is
/// `(2 pi)^{-3/2} ||f_hat||_1`. For `p = 2` both coincide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    pub value: f64,
    pub upper: f64,
    pub error: f64,
    pub converged: bool,
    /// Maximiser on the axis, for `p = inf`.
    pub argmax: Option<f64>,
}

impl NormValue {
    pub fn zero() -> Self {
        Self {
            value: 0.0,
            upper: 0.0,
            error: 0.0,
            converged: true,
            argmax: None,
        }
    }
}

fn phase_hint(field: &Field) -> impl Fn(f64, f64) -> f64 + '_ {
    move |a: f64, b: f64| {
        field
            .terms
            .iter()
            .filter_map(|t| t.phase.as_ref())
            .map(|p| 2.0 * sampled_variation(&|r| p(r), a, b))
            .fold(0.0, f64::max)
    }
}

fn radial_breaks(field: &Field) -> Vec<f64> {
    field.terms.iter().flat_map(|t| t.radial_breaks()).collect()
}

/// `\int |f|^2 d xi`, with error estimate and convergence flag.
pub fn field_l2_squared(field: &Field, opts: &QuadOptions) -> Result<(f64, f64, bool)> {
    if field.is_zero() {
        return Ok((0.0, 0.0, true));
    }
    if !field.has_axial() {
        let n = field.terms.len();
        let mut gram = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                gram[a * n + b] =
                    angular_gram(&field.terms[a].angular, &field.terms[b].angular).unwrap_or(0.0);
            }
        }
        let terms = &field.terms;
        let mut vals = vec![Complex64::new(0.0, 0.0); n];
        let res = integrate_vec(
            |rho, out: &mut [Complex64]| {
                for (k, t) in terms.iter().enumerate() {
                    vals[k] = if rho < t.support.0 || rho > t.support.1 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        t.coeff * (t.radial)(rho)
                    };
                }
                let mut s = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        let g = gram[a * n + b];
                        if g != 0.0 {
                            s += g * (vals[a] * vals[b].conj()).re;
                        }
                    }
                }
                out[0] = Complex64::new(s * rho * rho, 0.0);
            },
            1,
            &radial_breaks(field),
            phase_hint(field),
            opts,
        );
        return Ok((res.values[0].re, res.errors[0], res.converged));
    }
    if !field.is_axisymmetric() {
        return Err(invalid(
            "state",
            "L2 norms of fields mixing axial and off-axis dipole terms are not supported",
        ));
    }
    cylindrical(field, opts, |z| z.norm_sqr())
}

/// `\int\int h(f(xi_1, r)) 2 pi r dr dxi_1` for an axisymmetric field.
fn cylindrical<H: Fn(Complex64) -> f64>(
    field: &Field,
    opts: &QuadOptions,
    h: H,
) -> Result<(f64, f64, bool)> {
    let (_, rho_hi) = field.support().unwrap_or((0.0, 0.0));
    let mut xi1_breaks = vec![-rho_hi, rho_hi, 0.0];
    let mut r_breaks = vec![0.0, rho_hi];
    for t in &field.terms {
        if let Angular::Axial(s) = &t.angular {
            xi1_breaks.extend([s.xi1_range.0, s.xi1_range.1]);
            xi1_breaks.extend(s.xi1_breaks.iter().copied());
            r_breaks.push(s.r_range.1);
        }
        for b in t.radial_breaks() {
            xi1_breaks.extend([b, -b]);
        }
    }
    let xi1_breaks: Vec<f64> = xi1_breaks
        .into_iter()
        .filter(|x| x.abs() <= rho_hi)
        .collect();
    // inner integrals are bounded by this; an absolute floor keeps the
    // e^{-1/x} flanks from demanding unreachable relative accuracy
    let n = 32;
    let mut scale: f64 = 0.0;
    for i in 0..=n {
        let a = -rho_hi + 2.0 * rho_hi * i as f64 / n as f64;
        for k in 0..=n {
            let r = rho_hi * k as f64 / n as f64;
            scale = scale.max(h(field.eval([a, r, 0.0])) * 2.0 * PI * r * rho_hi);
        }
    }
    let inner_opts = QuadOptions {
        rel_tol: opts.rel_tol * 1e-4,
        abs_tol: opts.abs_tol.max(opts.rel_tol * 1e-4 * scale),
        ..*opts
    };
    let mut inner_ok = true;
    let mut inner_err: f64 = 0.0;
    let res = integrate_vec(
        |a, out: &mut [Complex64]| {
            let r_top = (rho_hi * rho_hi - a * a).max(0.0).sqrt();
            let mut rb: Vec<f64> = r_breaks.iter().copied().filter(|r| *r < r_top).collect();
            rb.push(r_top);
            for t in &field.terms {
                for b in t.radial_breaks() {
                    if b > a.abs() {
                        rb.push((b * b - a * a).sqrt());
                    }
                }
                if let Angular::Axial(s) = &t.angular {
                    if let Some(bounds) = &s.r_bounds {
                        let (lo, hi) = bounds(a);
                        rb.extend([lo, hi]);
                    }
                }
            }
            let rb: Vec<f64> = rb
                .into_iter()
                .filter(|r| *r <= r_top && *r >= 0.0)
                .collect();
            let inner = integrate_vec(
                |r, o: &mut [Complex64]| {
                    o[0] = Complex64::new(h(field.eval([a, r, 0.0])) * 2.0 * PI * r, 0.0);
                },
                1,
                &rb,
                |_, _| 0.0,
                &inner_opts,
            );
            inner_ok &= inner.converged;
            inner_err = inner_err.max(inner.errors[0]);
            out[0] = inner.values[0];
        },
        1,
        &xi1_breaks,
        |_, _| 0.0,
        opts,
    );
    Ok((
        res.values[0].re,
        res.errors[0] + inner_err * 2.0 * rho_hi,
        res.converged && inner_ok,
    ))
}

/// `\int |f| d xi` bounded through the triangle inequality over terms.
pub fn field_l1(field: &Field, opts: &QuadOptions) -> Result<(f64, f64, bool)> {
    let mut total = 0.0;
    let mut err = 0.0;
    let mut ok = true;
    for t in &field.terms {
        match t.radial_l1_factor() {
            Some(ang) => {
                let (v, e, c) = crate::oscillatory_quadrature::integrate_real(
                    |rho| (t.radial)(rho).norm() * rho * rho,
                    &t.radial_breaks(),
                    opts,
                );
                total += t.coeff.norm() * ang * v;
                err += t.coeff.norm() * ang * e;
                ok &= c;
            }
            None => {
                let single = Field::single(t.clone());
                let (v, e, c) = cylindrical(&single, opts, |z| z.norm())?;
                total += v;
                err += e;
                ok &= c;
            }
        }
    }
    Ok((total, err, ok))
}

fn windowed(field: &Field, window: Option<RadialWindow>) -> Field {
    match window {
        Some(w) => w.apply(field),
        None => field.clone(),
    }
}

/// `||f||_2` of the chosen component, optionally restricted by `phi_j`.
pub fn l2_norm(
    state: &SpectralState,
    component: Component,
    window: Option<RadialWindow>,
    opts: &QuadOptions,
) -> Result<NormValue> {
    let mut sq = 0.0;
    let mut err = 0.0;
    let mut ok = true;
    for f in state.fields(component) {
        let (v, e, c) = field_l2_squared(&windowed(f, window), opts)?;
        sq += v;
        err += e;
        ok &= c;
    }
    let value = sq.max(0.0).sqrt();
    // d sqrt(x) = dx / (2 sqrt x)
    let error = if value > 0.0 {
        err / (2.0 * value)
    } else {
        err.sqrt()
    };
    Ok(NormValue {
        value,
        upper: value,
        error,
        converged: ok,
        argmax: None,
    })
}

/// Sup of `|F^{-1} f|` along the `x_1` axis over `|x_1| <= 2 max(t_context, 1)`,
/// together with the spectral `L^1` upper bound.
pub fn linf_norm(
    state: &SpectralState,
    component: Component,
    window: Option<RadialWindow>,
    t_context: f64,
    opts: &QuadOptions,
) -> Result<NormValue> {
    let x_max = 2.0 * t_context.max(1.0);
    let fields: Vec<Field> = state
        .fields(component)
        .into_iter()
        .map(|f| windowed(f, window))
        .collect();
    if fields.iter().all(|f| f.is_zero()) {
        return Ok(NormValue::zero());
    }
    let evals: Vec<_> = fields
        .iter()
        .map(|f| f.axis_evaluator(x_max, opts))
        .collect();
    let sup = sup_on_axis(
        |x| {
            evals
                .iter()
                .map(|e| {
                    if e.is_empty() {
                        0.0
                    } else {
                        e.inverse_ft(x).norm_sqr()
                    }
                })
                .sum::<f64>()
                .sqrt()
        },
        x_max,
    );
    let mut upper_sq = 0.0;
    let mut ok = true;
    let mut err = 0.0;
    for (f, e) in fields.iter().zip(&evals) {
        let (l1, _, c) = field_l1(f, opts)?;
        upper_sq += (l1 * FT_NORM).powi(2);
        ok &= c;
        if !e.is_empty() {
            let cert = e.certificate();
            ok &= cert.converged;
            err += cert.error * FT_NORM;
        }
    }
    Ok(NormValue {
        value: sup.value,
        upper: upper_sq.sqrt().max(sup.value),
        error: err,
        converged: ok,
        argmax: Some(sup.x),
    })
}

/// `||Delta_j f||_p` for `p` in `{2, inf}`.
pub fn block_norm(
    state: &SpectralState,
    component: Component,
    profile: &PartitionProfile,
    j: i32,
    p: PNative,
    t_context: f64,
    opts: &QuadOptions,
) -> Result<NormValue> {
    let w = Some(RadialWindow {
        profile: *profile,
        j,
    });
    match p {
        PNative::Two => l2_norm(state, component, w, opts),
        PNative::Inf => linf_norm(state, component, w, t_context, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Term;

    fn gaussian_state(c: f64) -> SpectralState {
        let term = Term::new(
            Angular::Isotropic,
            Arc::new(move |r: f64| Complex64::new((-c * r * r).exp(), 0.0)),
            (0.0, (80.0 / c).sqrt()),
        );
        SpectralState::new(Field::single(term), Field::zero())
    }

    #[test]
    fn plancherel_gaussian() {
        // ||e^{-|xi|^2/2}||_2^2 = pi^{3/2}; physical side e^{-|x|^2/2} has the same norm
        let s = gaussian_state(0.5);
        let v = l2_norm(&s, Component::A, None, &QuadOptions::default()).unwrap();
        assert!((v.value - PI.powf(0.75)).abs() < 1e-10 * v.value);
    }

    #[test]
    fn disjoint_block_is_zero() {
        let term = Term::new(
            Angular::Isotropic,
            Arc::new(|_| Complex64::new(1.0, 0.0)),
            (0.0, 0.25),
        );
        let s = SpectralState::new(Field::single(term), Field::zero());
        let p = PartitionProfile::default();
        let o = QuadOptions::default();
        assert_eq!(
            block_norm(&s, Component::A, &p, 3, PNative::Two, 1.0, &o)
                .unwrap()
                .value,
            0.0
        );
        assert_eq!(
            block_norm(&s, Component::A, &p, 3, PNative::Inf, 1.0, &o)
                .unwrap()
                .value,
            0.0
        );
    }

    #[test]
    fn gaussian_sup_at_origin() {
        // F^{-1}[e^{-|xi|^2/4}](0) = 2^{3/2}
        let s = gaussian_state(0.25);
        let v = linf_norm(&s, Component::A, None, 1.0, &QuadOptions::default()).unwrap();
        assert_eq!(v.argmax, Some(0.0));
        assert!((v.value - 2f64.powf(1.5)).abs() < 1e-9);
        assert!((v.upper - 2f64.powf(1.5)).abs() < 1e-9);
    }

    #[test]
    fn cylindrical_matches_radial_path() {
        // an isotropic field pushed through the cylindrical path by adding an empty axial term
        let s = gaussian_state(0.5);
        let mut f = s.a_hat.clone();
        let shape = crate::spectral::AxialShape {
            g: Arc::new(|_, _| Complex64::new(0.0, 0.0)),
            xi1_range: (-1.0, 1.0),
            r_range: (0.0, 1.0),
            r_bounds: None,
            xi1_breaks: vec![],
        };
        f.push(Term::new(
            Angular::Axial(shape),
            Arc::new(|_| Complex64::new(1.0, 0.0)),
            (0.0, 1.0),
        ));
        let (a, _, ok) = field_l2_squared(&f, &QuadOptions::default()).unwrap();
        assert!(ok);
        assert!((a - PI.powf(1.5)).abs() < 1e-9 * a, "{a}");
    }
}
