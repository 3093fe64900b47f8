//! Time sweeps of norms of evolved witnesses, least-squares rate fits and
//! pass/fail verdicts against the predicted rates.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{finite, invalid, LabError, Result};
use crate::littlewood_paley::{
    besov_norm, l2_norm, linf_norm, BesovEvaluator, BesovSpec, Component, PartitionProfile,
    DEFAULT_J_MAX, DEFAULT_J_MIN,
};
use crate::oscillatory_quadrature::{Branch, QuadOptions};
use crate::propagator::{branch_multiplier, evolve, evolved_phase};
use crate::spectral::{Angular, Field, SpectralState, Term};
use crate::witness_data::{gaussian_v0, make_psi, scaled_psi_state, DEFAULT_PSI_MARGIN};

/// `-(3/2)(1 - 1/p) - (1/2)(1 - 2/p)` for `p` in `[2, inf]`.
pub fn theoretical_rate(p: f64) -> Result<f64> {
    if p.is_nan() || p < 2.0 {
        return Err(invalid("p", format!("must lie in [2, inf], got {p}")));
    }
    if p.is_infinite() {
        return Ok(-2.0);
    }
    Ok(-1.5 * (1.0 - 1.0 / p) - 0.5 * (1.0 - 2.0 / p))
}

/// Data whose norm is tracked over time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Witness {
    Zero,
    /// `e^{-t |xi|^2 / 2}`, not evolved by the system.
    Heat,
    /// Single-branch multiplier `e^{t lambda} Psi_hat(t^{1/2} xi_t)`.
    Psi {
        #[serde(default = "default_margin")]
        margin: f64,
        #[serde(default = "default_branch")]
        branch: Branch,
    },
    /// Evolved Gaussian velocity data.
    Gaussian,
    /// Evolved `a_0 = phi_j`, `v_0 = 0`.
    DyadicBlock {
        j: i32,
    },
}

fn default_margin() -> f64 {
    DEFAULT_PSI_MARGIN
}

fn default_branch() -> Branch {
    Branch::Plus
}

impl Witness {
    pub fn tag(&self) -> String {
        match self {
            Witness::Zero => "zero".into(),
            Witness::Heat => "heat".into(),
            Witness::Psi { margin, branch } => format!("psi(m={margin},{branch:?})"),
            Witness::Gaussian => "gaussian".into(),
            Witness::DyadicBlock { j } => format!("block(j={j})"),
        }
    }

    /// The field whose norm is recorded at time `t`.
    pub fn state_at(&self, t: f64, profile: &PartitionProfile) -> Result<SpectralState> {
        let t = finite("t", t)?;
        if t <= 0.0 {
            return Err(invalid("t", format!("must be positive, got {t}")));
        }
        Ok(match *self {
            Witness::Zero => SpectralState::zero(),
            Witness::Heat => {
                let term = Term::new(
                    Angular::Isotropic,
                    Arc::new(move |r: f64| Complex64::new((-0.5 * t * r * r).exp(), 0.0)),
                    (0.0, (160.0 / t).sqrt()),
                );
                SpectralState::new(Field::single(term), Field::zero())
            }
            Witness::Psi { margin, branch } => {
                let psi = make_psi(margin)?;
                let base = scaled_psi_state(&psi, t);
                let a = base.a_hat.with_radial_factor(
                    branch_multiplier(t, branch),
                    (0.0, f64::INFINITY),
                    &[],
                    Some(evolved_phase(t)),
                );
                SpectralState::new(a, Field::zero())
            }
            Witness::Gaussian => evolve(&gaussian_v0(), t)?.state(),
            Witness::DyadicBlock { j } => {
                let p = *profile;
                let term = Term::new(
                    Angular::Isotropic,
                    Arc::new(move |r: f64| Complex64::new(p.phi(j, r), 0.0)),
                    p.support(j),
                )
                .with_breaks(p.breaks(j));
                let base = SpectralState::new(Field::single(term), Field::zero());
                evolve(&base, t)?.state()
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NormKind {
    LInf,
    L2,
    Besov(BesovSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSpec {
    pub kind: NormKind,
    pub component: Component,
}

impl NormSpec {
    pub fn new(kind: NormKind, component: Component) -> Self {
        Self { kind, component }
    }

    pub fn tag(&self) -> String {
        let c = format!("{:?}", self.component).to_lowercase();
        match &self.kind {
            NormKind::LInf => format!("Linf[{c}]"),
            NormKind::L2 => format!("L2[{c}]"),
            NormKind::Besov(b) => format!("{}[{c}]", b.tag()),
        }
    }

    /// The rate the estimates predict for this norm, if any.
    pub fn theoretical_rate(&self) -> Option<f64> {
        match &self.kind {
            NormKind::LInf => theoretical_rate(f64::INFINITY).ok(),
            NormKind::L2 => theoretical_rate(2.0).ok(),
            NormKind::Besov(b) => theoretical_rate(b.p.get()).ok(),
        }
    }

    /// Set when the value is an interpolation upper bound rather than a norm.
    pub fn upper_bound_only(&self) -> bool {
        matches!(&self.kind, NormKind::Besov(b) if b.p.get() > 2.0 && b.p.get().is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub profile: PartitionProfile,
    pub quad: QuadOptions,
    pub j_min: i32,
    pub j_max: i32,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            profile: PartitionProfile::default(),
            quad: QuadOptions::default(),
            j_min: DEFAULT_J_MIN,
            j_max: DEFAULT_J_MAX,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySeries {
    pub data_tag: String,
    pub norm_tag: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub error_estimates: Vec<f64>,
    pub certified: Vec<bool>,
    /// Location `x_1` of the maximiser for sup norms.
    pub argmax: Vec<Option<f64>>,
    pub upper_bound_only: bool,
}

impl DecaySeries {
    /// A series without quadrature behind it; every point counts as certified.
    pub fn from_values(
        data_tag: &str,
        norm_tag: &str,
        times: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self> {
        check_times(&times)?;
        if values.len() != times.len() {
            return Err(invalid(
                "values",
                format!("{} values for {} times", values.len(), times.len()),
            ));
        }
        for v in &values {
            finite("value", *v)?;
        }
        let n = times.len();
        Ok(Self {
            data_tag: data_tag.into(),
            norm_tag: norm_tag.into(),
            times,
            values,
            error_estimates: vec![0.0; n],
            certified: vec![true; n],
            argmax: vec![None; n],
            upper_bound_only: false,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn acceptance_grade(&self) -> bool {
        self.certified.iter().all(|c| *c)
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(invalid("times", "empty time grid"));
    }
    for t in times {
        if !(t.is_finite() && *t > 0.0) {
            return Err(invalid(
                "times",
                format!("times must be positive and finite, got {t}"),
            ));
        }
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("times", "times must be strictly increasing"));
    }
    Ok(())
}

/// `n` points log-spaced from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

/// `n` points equally spaced from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

const RANGE_STEP: i32 = 8;
const RANGE_EXTENSIONS: usize = 4;

struct Point {
    value: f64,
    error: f64,
    certified: bool,
    argmax: Option<f64>,
}

fn measure(witness: &Witness, norm: &NormSpec, t: f64, settings: &SweepSettings) -> Result<Point> {
    let state = witness.state_at(t, &settings.profile)?;
    let opts = &settings.quad;
    Ok(match &norm.kind {
        NormKind::L2 => {
            let v = l2_norm(&state, norm.component, None, opts)?;
            Point {
                value: v.value,
                error: v.error,
                certified: v.converged,
                argmax: None,
            }
        }
        NormKind::LInf => {
            let v = linf_norm(&state, norm.component, None, t, opts)?;
            Point {
                value: v.value,
                error: v.error,
                certified: v.converged,
                argmax: v.argmax,
            }
        }
        NormKind::Besov(spec) => {
            let e = BesovEvaluator::new(state, norm.component, settings.profile, t, *opts);
            let (mut lo, mut hi) = (settings.j_min, settings.j_max);
            let mut b = besov_norm(&e, spec, lo, hi)?;
            // widen an uncertified range; blocks already computed are cached
            for _ in 0..RANGE_EXTENSIONS {
                if b.tail_certified {
                    break;
                }
                lo -= RANGE_STEP;
                hi += RANGE_STEP;
                b = besov_norm(&e, spec, lo, hi)?;
            }
            Point {
                value: b.value,
                error: b.error,
                certified: b.converged && b.tail_certified,
                argmax: None,
            }
        }
    })
}

/// One norm value per time, evaluated in parallel and returned in order.
pub fn sweep(
    witness: &Witness,
    norm: &NormSpec,
    times: &[f64],
    settings: &SweepSettings,
) -> Result<DecaySeries> {
    check_times(times)?;
    let points: Vec<Result<Point>> = times
        .par_iter()
        .map(|t| measure(witness, norm, *t, settings))
        .collect();
    let mut series = DecaySeries {
        data_tag: witness.tag(),
        norm_tag: norm.tag(),
        times: times.to_vec(),
        values: Vec::with_capacity(times.len()),
        error_estimates: Vec::with_capacity(times.len()),
        certified: Vec::with_capacity(times.len()),
        argmax: Vec::with_capacity(times.len()),
        upper_bound_only: norm.upper_bound_only(),
    };
    for p in points {
        let p = p?;
        series.values.push(p.value);
        series.error_estimates.push(p.error);
        series.certified.push(p.certified && p.value.is_finite());
        series.argmax.push(p.argmax);
    }
    Ok(series)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// `value ~ A t^sigma`.
    PowerLaw,
    /// `value ~ A e^{-kappa t}`.
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    /// `sigma` for power laws, `kappa` for exponentials.
    pub exponent: f64,
    pub amplitude: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub points: usize,
}

/// Least squares on `(log t, log v)` or `(t, log v)` over the points with
/// `t` in `window` (the whole series by default).
pub fn fit(series: &DecaySeries, model: FitModel, window: Option<(f64, f64)>) -> Result<FitResult> {
    let (lo, hi) = window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let pts: Vec<(f64, f64)> = series
        .times
        .iter()
        .zip(&series.values)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(t, v)| (*t, *v))
        .collect();
    if pts.len() < 5 {
        return Err(LabError::DegenerateSeries(format!(
            "{} points in the fit window, need at least 5",
            pts.len()
        )));
    }
    if let Some((t, v)) = pts.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(LabError::DegenerateSeries(format!(
            "nonpositive value {v} at t = {t}"
        )));
    }
    let xs: Vec<f64> = pts
        .iter()
        .map(|(t, _)| match model {
            FitModel::PowerLaw => t.ln(),
            FitModel::Exponential => *t,
        })
        .collect();
    let ys: Vec<f64> = pts.iter().map(|(_, v)| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(FitResult {
        model,
        exponent: match model {
            FitModel::PowerLaw => slope,
            FitModel::Exponential => -slope,
        },
        amplitude: intercept.exp(),
        r_squared,
        window: (pts[0].0, pts[pts.len() - 1].0),
        points: pts.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VerdictSpec {
    /// `|sigma - theory| <= tol` and `r^2 >= min_r2`.
    PowerLaw { theory: f64, tol: f64, min_r2: f64 },
    /// Slope within `tol` of `theory` and `min t^{-theory} v >= plateau_fraction * plateau`.
    LowerBound {
        theory: f64,
        tol: f64,
        plateau_fraction: f64,
    },
    /// `kappa >= min_kappa` and `r^2_exp - r^2_pow >= min_r2_gap`.
    Exponential { min_kappa: f64, min_r2_gap: f64 },
    /// `kappa > 0`, `r^2_exp >= min_r2` and `t^2 v` strictly decreasing.
    MidBand { min_r2: f64 },
}

impl VerdictSpec {
    pub fn lower_bound() -> Self {
        VerdictSpec::LowerBound {
            theory: -2.0,
            tol: 0.1,
            plateau_fraction: 0.5,
        }
    }

    pub fn exponential() -> Self {
        VerdictSpec::Exponential {
            min_kappa: 0.9,
            min_r2_gap: 0.05,
        }
    }

    pub fn mid_band() -> Self {
        VerdictSpec::MidBand { min_r2: 0.99 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            VerdictSpec::PowerLaw { .. } => "power_law",
            VerdictSpec::LowerBound { .. } => "lower_bound",
            VerdictSpec::Exponential { .. } => "exponential",
            VerdictSpec::MidBand { .. } => "mid_band",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            passed: value <= threshold,
        }
    }

    fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            passed: value >= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: String,
    pub data_tag: String,
    pub norm_tag: String,
    /// `None` when withheld.
    pub passed: Option<bool>,
    pub withheld_reason: Option<String>,
    pub fit: Option<FitResult>,
    pub alternative_fit: Option<FitResult>,
    pub theoretical: Option<f64>,
    pub checks: Vec<Check>,
    /// Exponents on windows shifted by half a decade at either end.
    pub window_sensitivity: Vec<FitResult>,
    pub upper_bound_only: bool,
}

impl Verdict {
    fn withheld(series: &DecaySeries, spec: &VerdictSpec, reason: String) -> Self {
        Self {
            kind: spec.name().into(),
            data_tag: series.data_tag.clone(),
            norm_tag: series.norm_tag.clone(),
            passed: None,
            withheld_reason: Some(reason),
            fit: None,
            alternative_fit: None,
            theoretical: None,
            checks: Vec::new(),
            window_sensitivity: Vec::new(),
            upper_bound_only: series.upper_bound_only,
        }
    }

    pub fn is_pass(&self) -> bool {
        self.passed == Some(true)
    }
}

fn windowed(series: &DecaySeries, window: Option<(f64, f64)>) -> Vec<(f64, f64)> {
    let (lo, hi) = window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    series
        .times
        .iter()
        .zip(&series.values)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(t, v)| (*t, *v))
        .collect()
}

fn sensitivity(
    series: &DecaySeries,
    model: FitModel,
    window: Option<(f64, f64)>,
) -> Vec<FitResult> {
    let pts = windowed(series, window);
    let (Some(first), Some(last)) = (pts.first(), pts.last()) else {
        return Vec::new();
    };
    let (lo, hi) = (first.0, last.0);
    let shift = 10f64.sqrt();
    [(lo * shift, hi), (lo, hi / shift)]
        .into_iter()
        .filter_map(|w| fit(series, model, Some(w)).ok())
        .collect()
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Compare a series against the predicted behaviour. Withheld when any point
/// in the window is uncertified or the fit is degenerate.
pub fn verify_bounds(
    series: &DecaySeries,
    spec: &VerdictSpec,
    window: Option<(f64, f64)>,
) -> Verdict {
    let (lo, hi) = window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let uncertified: Vec<f64> = series
        .times
        .iter()
        .zip(&series.certified)
        .filter(|(t, c)| **t >= lo && **t <= hi && !**c)
        .map(|(t, _)| *t)
        .collect();
    if !uncertified.is_empty() {
        return Verdict::withheld(
            series,
            spec,
            format!("uncertified points at t = {uncertified:?}"),
        );
    }
    let pts = windowed(series, window);
    let primary_model = match spec {
        VerdictSpec::PowerLaw { .. } | VerdictSpec::LowerBound { .. } => FitModel::PowerLaw,
        VerdictSpec::Exponential { .. } | VerdictSpec::MidBand { .. } => FitModel::Exponential,
    };
    let primary = match fit(series, primary_model, window) {
        Ok(f) => f,
        Err(e) => return Verdict::withheld(series, spec, e.to_string()),
    };
    let mut checks = Vec::new();
    let mut theoretical = None;
    let mut alternative = None;
    match *spec {
        VerdictSpec::PowerLaw {
            theory,
            tol,
            min_r2,
        } => {
            theoretical = Some(theory);
            checks.push(Check::at_most(
                "|sigma - theory|",
                (primary.exponent - theory).abs(),
                tol,
            ));
            checks.push(Check::at_least("r_squared", primary.r_squared, min_r2));
        }
        VerdictSpec::LowerBound {
            theory,
            tol,
            plateau_fraction,
        } => {
            theoretical = Some(theory);
            checks.push(Check::at_most(
                "|sigma - theory|",
                (primary.exponent - theory).abs(),
                tol,
            ));
            let scaled: Vec<f64> = pts.iter().map(|(t, v)| t.powf(-theory) * v).collect();
            let tail = scaled[scaled.len() - scaled.len().div_ceil(3)..].to_vec();
            let plateau = median(tail);
            let min = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = scaled.iter().cloned().fold(0.0, f64::max);
            checks.push(Check::at_least(
                "min t^2 value",
                min,
                plateau_fraction * plateau,
            ));
            checks.push(Check::at_least("min/max of t^2 value", min / max, 0.0));
            checks.push(Check::at_least("plateau", plateau, f64::MIN_POSITIVE));
        }
        VerdictSpec::Exponential {
            min_kappa,
            min_r2_gap,
        } => {
            checks.push(Check::at_least("kappa", primary.exponent, min_kappa));
            if let Ok(p) = fit(series, FitModel::PowerLaw, window) {
                checks.push(Check::at_least(
                    "r2_exp - r2_pow",
                    primary.r_squared - p.r_squared,
                    min_r2_gap,
                ));
                alternative = Some(p);
            }
        }
        VerdictSpec::MidBand { min_r2 } => {
            checks.push(Check::at_least(
                "kappa",
                primary.exponent,
                f64::MIN_POSITIVE,
            ));
            checks.push(Check::at_least("r_squared", primary.r_squared, min_r2));
            let scaled: Vec<f64> = pts.iter().map(|(t, v)| t * t * v).collect();
            let worst = scaled.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
            checks.push(Check {
                name: "max ratio of consecutive t^2 value".into(),
                value: worst,
                threshold: 1.0,
                passed: worst < 1.0,
            });
            alternative = fit(series, FitModel::PowerLaw, window).ok();
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    Verdict {
        kind: spec.name().into(),
        data_tag: series.data_tag.clone(),
        norm_tag: series.norm_tag.clone(),
        passed: Some(passed),
        withheld_reason: None,
        fit: Some(primary),
        alternative_fit: alternative,
        theoretical,
        checks,
        window_sensitivity: sensitivity(series, primary_model, window),
        upper_bound_only: series.upper_bound_only,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(f: impl Fn(f64) -> f64, times: Vec<f64>) -> DecaySeries {
        let v = times.iter().map(|t| f(*t)).collect();
        DecaySeries::from_values("synthetic", "none", times, v).unwrap()
    }

    #[test]
    fn rates() {
        assert_eq!(theoretical_rate(2.0).unwrap(), -0.75);
        assert_eq!(theoretical_rate(f64::INFINITY).unwrap(), -2.0);
        assert!((theoretical_rate(4.0).unwrap() + 11.0 / 8.0).abs() < 1e-15);
        assert!(theoretical_rate(1.5).is_err());
    }

    #[test]
    fn exact_power_and_exponential_fits() {
        let s = synthetic(|t| 7.0 * t.powf(-2.0), log_grid(1e2, 1e4, 12));
        let f = fit(&s, FitModel::PowerLaw, None).unwrap();
        assert!((f.exponent + 2.0).abs() < 1e-12 && (f.r_squared - 1.0).abs() < 1e-12);
        assert!((f.amplitude - 7.0).abs() < 1e-9);
        let s = synthetic(|t| 3.0 * (-t).exp(), linear_grid(1.0, 20.0, 12));
        let f = fit(&s, FitModel::Exponential, None).unwrap();
        assert!((f.exponent - 1.0).abs() < 1e-12 && (f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noisy_power_law() {
        let s = synthetic(
            |t| t.powf(-0.75) * (1.0 + 0.01 * t.ln().sin()),
            log_grid(1e2, 1e4, 12),
        );
        let f = fit(&s, FitModel::PowerLaw, Some((1e2, 1e4))).unwrap();
        assert!((f.exponent + 0.75).abs() < 0.01);
    }

    #[test]
    fn degenerate_fits_rejected() {
        let s = synthetic(|_| 0.0, log_grid(1.0, 10.0, 8));
        assert!(matches!(
            fit(&s, FitModel::PowerLaw, None),
            Err(LabError::DegenerateSeries(_))
        ));
        let s = synthetic(|t| t, log_grid(1.0, 10.0, 4));
        assert!(fit(&s, FitModel::PowerLaw, None).is_err());
    }

    #[test]
    fn zero_witness_sweeps_to_zero() {
        let norm = NormSpec::new(NormKind::LInf, Component::Pair);
        let s = sweep(
            &Witness::Zero,
            &norm,
            &[1.0, 2.0, 3.0],
            &SweepSettings::default(),
        )
        .unwrap();
        assert_eq!(s.values, vec![0.0; 3]);
        assert!(s.acceptance_grade());
    }

    #[test]
    fn time_grid_validation() {
        let norm = NormSpec::new(NormKind::L2, Component::A);
        let st = SweepSettings::default();
        assert!(sweep(&Witness::Heat, &norm, &[], &st).is_err());
        assert!(sweep(&Witness::Heat, &norm, &[2.0, 1.0], &st).is_err());
        assert!(sweep(&Witness::Heat, &norm, &[0.0, 1.0], &st).is_err());
    }

    #[test]
    fn heat_sup_decays_at_three_halves() {
        let norm = NormSpec::new(NormKind::LInf, Component::A);
        let s = sweep(
            &Witness::Heat,
            &norm,
            &log_grid(1e2, 1e4, 6),
            &SweepSettings::default(),
        )
        .unwrap();
        let f = fit(&s, FitModel::PowerLaw, None).unwrap();
        assert!((f.exponent + 1.5).abs() < 0.02, "{f:?}");
        // closed form t^{-3/2}
        for (t, v) in s.times.iter().zip(&s.values) {
            assert!((v * t.powf(1.5) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn uncertified_points_withhold_verdicts() {
        let mut s = synthetic(|t| t.powf(-2.0), log_grid(1e2, 1e4, 8));
        s.certified[3] = false;
        let v = verify_bounds(&s, &VerdictSpec::lower_bound(), None);
        assert_eq!(v.passed, None);
        assert!(v.withheld_reason.is_some());
    }

    #[test]
    fn lower_bound_verdict() {
        let s = synthetic(
            |t| 5.0 * t.powf(-2.0) * (1.0 + 1.0 / t),
            log_grid(1e2, 1e4, 12),
        );
        let v = verify_bounds(&s, &VerdictSpec::lower_bound(), None);
        assert!(v.is_pass(), "{v:?}");
        let s = synthetic(|t| t.powf(-2.5), log_grid(1e2, 1e4, 12));
        assert_eq!(
            verify_bounds(&s, &VerdictSpec::lower_bound(), None).passed,
            Some(false)
        );
    }

    #[test]
    fn exponential_and_mid_band_verdicts() {
        let s = synthetic(|t| 2.0 * (-1.1 * t).exp(), linear_grid(2.0, 40.0, 12));
        assert!(verify_bounds(&s, &VerdictSpec::exponential(), None).is_pass());
        let s = synthetic(|t| (-0.3 * t).exp(), linear_grid(10.0, 60.0, 12));
        assert!(verify_bounds(&s, &VerdictSpec::mid_band(), None).is_pass());
        let s = synthetic(|t| t.powf(-1.0), linear_grid(10.0, 60.0, 12));
        assert_eq!(
            verify_bounds(&s, &VerdictSpec::mid_band(), None).passed,
            Some(false)
        );
    }

    #[test]
    fn witness_serde_roundtrip() {
        let w = Witness::Psi {
            margin: 0.03,
            branch: Branch::Minus,
        };
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(serde_json::from_str::<Witness>(&s).unwrap(), w);
        let w: Witness = serde_json::from_str(r#"{"kind":"dyadic_block","j":4}"#).unwrap();
        assert_eq!(w, Witness::DyadicBlock { j: 4 });
    }
}
