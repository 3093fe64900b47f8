use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use nsdecay::decay_analysis::{
    fit, linear_grid, log_grid, sweep, verify_bounds, DecaySeries, FitModel, NormKind, NormSpec,
    Verdict, VerdictSpec, Witness,
};
use nsdecay::eigensystem::{eigenvalues, expm_oracle, propagator, Wavenumber};
use nsdecay::littlewood_paley::BesovSpec;
use nsdecay::oscillatory_quadrature::halfspace::{
    dominated_gap, halfspace_witness_integral, limit_constant, HalfSpace,
};
use nsdecay::oscillatory_quadrature::Branch;
use nsdecay::witness_data::make_psi;
use nsdecay::LabError;

use crate::config::{RunConfig, VerdictMode};
use crate::output::{ensure_dir, overall, write_json, write_series_csv, Artifact, Row, Status};

pub const VERIFY_EIGEN_JSON: &str = "verify_eigen.json";
pub const BESOV_CSV: &str = "besov_norm.csv";
pub const BESOV_JSON: &str = "besov_norm.json";
pub const SWEEP_CSV: &str = "decay_sweep.csv";
pub const SWEEP_JSON: &str = "decay_sweep.json";
pub const LOWER_BOUND_CSV: &str = "lower_bound.csv";
pub const LOWER_BOUND_JSON: &str = "lower_bound.json";
pub const MIDBAND_CSV: &str = "midband.csv";
pub const MIDBAND_JSON: &str = "midband.json";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_MD: &str = "report.md";

/// Artifacts `report` requires; `besov_norm.json` is folded in when present.
pub const REQUIRED_ARTIFACTS: [&str; 4] = [
    VERIFY_EIGEN_JSON,
    SWEEP_JSON,
    LOWER_BOUND_JSON,
    MIDBAND_JSON,
];

fn reject(errors: Vec<String>) -> Result<()> {
    if errors.is_empty() {
        Ok(())
    } else {
        bail!("invalid configuration:\n  {}", errors.join("\n  "))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenCheck {
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

pub fn verify_eigen(config: &RunConfig) -> Result<Status> {
    reject(config.validate_eigen())?;
    let e = &config.eigen;
    let w = |r: f64| Wavenumber::new(r).map_err(|err| anyhow!(err));
    let rhos: Vec<f64> = log_grid(e.rho_min, e.rho_max, e.rho_points)
        .into_iter()
        .filter(|r| (r - 2.0).abs() > e.degenerate_band)
        .collect();
    let band = linear_grid(2.0 - e.degenerate_band, 2.0 + e.degenerate_band, 21);
    let times = linear_grid(0.0, e.t_max, e.t_points);

    let worst = |xs: Vec<f64>| xs.into_iter().fold(0.0, f64::max);
    let spectral = |r: f64| -> Result<(f64, f64)> {
        let ev = eigenvalues(w(r)?);
        let trace = (ev.lambda_plus + ev.lambda_minus + r * r).norm() / (r * r).max(1.0);
        let det = (ev.lambda_plus * ev.lambda_minus - r * r).norm() / (r * r);
        Ok((trace, det))
    };
    let per_rho = |r: f64| -> Result<(f64, f64, f64)> {
        let rho = w(r)?;
        let (mut oracle, mut det, mut semi) = (0.0f64, 0.0f64, 0.0f64);
        for t in &times {
            let p = propagator(rho, *t)?;
            oracle = oracle.max(p.relative_distance(&expm_oracle(rho, *t)?));
            let target = Complex64::new((-t * r * r).exp(), 0.0);
            let scale = target
                .norm()
                .max(p.max_abs().powi(2))
                .max(f64::MIN_POSITIVE);
            det = det.max((p.determinant() - target).norm() / scale);
            let half = propagator(rho, 0.5 * t)?;
            let third = propagator(rho, t / 3.0)?;
            let rest = propagator(rho, 2.0 * t / 3.0)?;
            semi = semi.max(half.compose(&half).relative_distance(&p));
            semi = semi.max(third.compose(&rest).relative_distance(&p));
        }
        Ok((oracle, det, semi))
    };

    let sp: Vec<(f64, f64)> = rhos
        .par_iter()
        .map(|r| spectral(*r))
        .collect::<Result<_>>()?;
    let main: Vec<(f64, f64, f64)> = rhos
        .par_iter()
        .map(|r| per_rho(*r))
        .collect::<Result<_>>()?;
    let near: Vec<(f64, f64, f64)> = band
        .par_iter()
        .map(|r| per_rho(*r))
        .collect::<Result<_>>()?;

    let check = |name: &str, max_error: f64, tolerance: f64| EigenCheck {
        name: name.into(),
        max_error,
        tolerance,
        passed: max_error <= tolerance,
    };
    let checks = vec![
        check(
            "trace",
            worst(sp.iter().map(|x| x.0).collect()),
            e.tolerance,
        ),
        check(
            "determinant",
            worst(sp.iter().map(|x| x.1).collect()),
            e.tolerance,
        ),
        check(
            "oracle",
            worst(main.iter().map(|x| x.0).collect()),
            e.tolerance,
        ),
        check(
            "oracle_degenerate_band",
            worst(near.iter().map(|x| x.0).collect()),
            e.band_tolerance,
        ),
        check(
            "propagator_determinant",
            worst(main.iter().map(|x| x.1).collect()),
            e.tolerance,
        ),
        check(
            "semigroup",
            worst(main.iter().chain(&near).map(|x| x.2).collect()),
            e.band_tolerance.max(e.tolerance),
        ),
    ];
    let rows = checks
        .iter()
        .map(|c| Row {
            claim: "propagator invariant".into(),
            subject: c.name.clone(),
            expected: format!("max error <= {:e}", c.tolerance),
            measured: Some(c.max_error),
            status: Status::from_bool(c.passed),
        })
        .collect();
    for c in checks.iter().filter(|c| !c.passed) {
        eprintln!(
            "check `{}` failed: max error {:e} exceeds {:e}",
            c.name, c.max_error, c.tolerance
        );
    }
    ensure_dir(&config.output_dir)?;
    let artifact = Artifact::new("verify-eigen", config, rows, checks);
    write_json(&config.output_dir.join(VERIFY_EIGEN_JSON), &artifact)?;
    Ok(artifact.status)
}

/// A series or the reason it could not be produced.
fn run_series(
    witness: &Witness,
    norm: &NormSpec,
    times: &[f64],
    config: &RunConfig,
) -> Result<Option<DecaySeries>> {
    match sweep(witness, norm, times, &config.settings()) {
        Ok(s) => Ok(Some(s)),
        Err(LabError::NotConverged {
            value,
            error,
            cells,
        }) => {
            eprintln!(
                "{} {}: quadrature did not converge (value {value:e}, error {error:e}, {cells} cells)",
                witness.tag(),
                norm.tag()
            );
            Ok(None)
        }
        Err(e) => Err(anyhow!(e)),
    }
}

fn not_converged_row(claim: &str, subject: String) -> Row {
    Row {
        claim: claim.into(),
        subject,
        expected: "converged quadrature".into(),
        measured: None,
        status: Status::NotConverged,
    }
}

fn verdict_row(claim: &str, v: &Verdict, expected: String) -> Row {
    Row {
        claim: claim.into(),
        subject: format!("{} {}", v.data_tag, v.norm_tag),
        expected,
        measured: v.fit.map(|f| f.exponent),
        status: Status::of(v),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BesovEntry {
    pub spec: BesovSpec,
    pub series: Option<DecaySeries>,
    /// Power-law exponent across the grid, when one can be fitted.
    pub exponent: Option<f64>,
    pub theoretical: Option<f64>,
}

pub fn besov_norm(config: &RunConfig) -> Result<Status> {
    reject(config.validate_besov())?;
    let times = config.grid.times();
    let mut entries = Vec::new();
    let mut rows = Vec::new();
    for spec in &config.besov.specs {
        let norm = NormSpec::new(NormKind::Besov(*spec), config.besov.component);
        let series = run_series(&config.witness, &norm, &times, config)?;
        let exponent = series
            .as_ref()
            .and_then(|s| fit(s, FitModel::PowerLaw, None).ok())
            .map(|f| f.exponent);
        let row = match &series {
            Some(s) if s.acceptance_grade() => Row {
                claim: "Besov norm sweep".into(),
                subject: format!("{} {}", s.data_tag, s.norm_tag),
                expected: "power-law exponent (informational)".into(),
                measured: exponent,
                status: Status::Info,
            },
            _ => not_converged_row("Besov norm sweep", norm.tag()),
        };
        rows.push(row);
        entries.push(BesovEntry {
            spec: *spec,
            series,
            exponent,
            theoretical: norm.theoretical_rate(),
        });
    }
    ensure_dir(&config.output_dir)?;
    let series: Vec<DecaySeries> = entries.iter().filter_map(|e| e.series.clone()).collect();
    write_series_csv(&config.output_dir.join(BESOV_CSV), &series)?;
    let artifact = Artifact::new("besov-norm", config, rows, entries);
    write_json(&config.output_dir.join(BESOV_JSON), &artifact)?;
    Ok(artifact.status)
}

fn sweep_spec(config: &RunConfig, norm: &NormSpec) -> VerdictSpec {
    let theory = norm.theoretical_rate().unwrap_or(0.0);
    let s = &config.sweep;
    let lower = match s.verdict {
        VerdictMode::Auto => norm.kind == NormKind::LInf,
        VerdictMode::PowerLaw => false,
        VerdictMode::LowerBound => true,
    };
    if lower {
        VerdictSpec::LowerBound {
            theory,
            tol: s.lower_bound_tolerance,
            plateau_fraction: s.plateau_fraction,
        }
    } else {
        VerdictSpec::PowerLaw {
            theory,
            tol: s.exponent_tolerance,
            min_r2: s.min_r2,
        }
    }
}

fn expected_text(spec: &VerdictSpec) -> String {
    match spec {
        VerdictSpec::PowerLaw {
            theory,
            tol,
            min_r2,
        } => format!("sigma = {theory} +- {tol}, r2 >= {min_r2}"),
        VerdictSpec::LowerBound {
            theory,
            tol,
            plateau_fraction,
        } => format!(
            "sigma = {theory} +- {tol}, min t^{} v >= {plateau_fraction} plateau",
            -theory
        ),
        VerdictSpec::Exponential {
            min_kappa,
            min_r2_gap,
        } => {
            format!("kappa >= {min_kappa}, exponential r2 beats power law by {min_r2_gap}")
        }
        VerdictSpec::MidBand { min_r2 } => format!("kappa > 0, r2 >= {min_r2}, t^2 v decreasing"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictEntry {
    pub norm_tag: String,
    pub spec: VerdictSpec,
    pub verdict: Option<Verdict>,
}

pub fn decay_sweep(config: &RunConfig) -> Result<Status> {
    reject(config.validate_sweep())?;
    let times = config.grid.times();
    let mut all = Vec::new();
    let mut entries = Vec::new();
    let mut rows = Vec::new();
    for norm in &config.sweep.norms {
        let spec = sweep_spec(config, norm);
        let series = run_series(&config.witness, norm, &times, config)?;
        let verdict = series.as_ref().map(|s| verify_bounds(s, &spec, None));
        match &verdict {
            Some(v) => rows.push(verdict_row("decay rate", v, expected_text(&spec))),
            None => rows.push(not_converged_row("decay rate", norm.tag())),
        }
        entries.push(VerdictEntry {
            norm_tag: norm.tag(),
            spec,
            verdict,
        });
        all.extend(series);
    }
    ensure_dir(&config.output_dir)?;
    write_series_csv(&config.output_dir.join(SWEEP_CSV), &all)?;
    let artifact = Artifact::new("decay-sweep", config, rows, entries);
    write_json(&config.output_dir.join(SWEEP_JSON), &artifact)?;
    Ok(artifact.status)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpaceRow {
    pub t: f64,
    /// `t^{1/2}` times the `xi_1 < 0` integral.
    pub neg_scaled: Complex64,
    pub neg_relative_to_limit: f64,
    pub pos_scaled: Complex64,
    pub dominated_gap: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateauRow {
    pub t: f64,
    pub value: f64,
    pub t2_value: f64,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateauTable {
    pub witness: Witness,
    pub rows: Vec<PlateauRow>,
    pub verdict: Option<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundPayload {
    pub limit: Option<Complex64>,
    pub limit_error: f64,
    pub limit_converged: bool,
    pub halfspace: Vec<HalfSpaceRow>,
    pub plateaus: Vec<PlateauTable>,
}

pub fn lower_bound(config: &RunConfig) -> Result<Status> {
    reject(config.validate_lower_bound())?;
    let lb = &config.lower_bound;
    let opts = config.quad();
    let mut rows = Vec::new();

    let psi = make_psi(lb.psi_margin).map_err(|e| anyhow!(e))?;
    let mut payload = LowerBoundPayload {
        limit: None,
        limit_error: 0.0,
        limit_converged: true,
        halfspace: Vec::new(),
        plateaus: Vec::new(),
    };
    if !lb.halfspace_times.is_empty() {
        let (l, err, ok) = limit_constant(&psi, Branch::Plus, &opts);
        payload.limit = Some(l);
        payload.limit_error = err;
        payload.limit_converged = ok;
        rows.push(Row {
            claim: "limit integral constant".into(),
            subject: "|L|".into(),
            expected: "positive".into(),
            measured: Some(l.norm()),
            status: if !ok {
                Status::NotConverged
            } else {
                Status::Info
            },
        });
        let table: Vec<Result<HalfSpaceRow>> = lb
            .halfspace_times
            .par_iter()
            .map(|t| {
                let neg =
                    halfspace_witness_integral(&psi, *t, Branch::Plus, HalfSpace::XiNeg, &opts)?;
                let pos =
                    halfspace_witness_integral(&psi, *t, Branch::Plus, HalfSpace::XiPos, &opts)?;
                Ok(HalfSpaceRow {
                    t: *t,
                    neg_scaled: neg.scaled,
                    neg_relative_to_limit: (neg.scaled - l).norm() / l.norm(),
                    pos_scaled: pos.scaled,
                    dominated_gap: dominated_gap(&psi, Branch::Plus, *t),
                    converged: neg.converged && pos.converged,
                })
            })
            .collect();
        payload.halfspace = table.into_iter().collect::<Result<_>>()?;
        if let Some(last) = payload.halfspace.last() {
            rows.push(Row {
                claim: "t^(1/2) J_neg approaches L".into(),
                subject: format!("t = {}", last.t),
                expected: "relative gap shrinking with t".into(),
                measured: Some(last.neg_relative_to_limit),
                status: if last.converged {
                    Status::Info
                } else {
                    Status::NotConverged
                },
            });
        }
        if let (Some(first), Some(last)) = (payload.halfspace.first(), payload.halfspace.last()) {
            if payload.halfspace.len() > 1 {
                rows.push(Row {
                    claim: "xi_1 > 0 half decays faster".into(),
                    subject: format!("|J_pos| ratio t = {} / t = {}", last.t, first.t),
                    expected: "well below 1".into(),
                    measured: Some(last.pos_scaled.norm() / first.pos_scaled.norm()),
                    status: Status::Info,
                });
            }
        }
    }

    let times = config.grid.times();
    let mut all = Vec::new();
    let spec = VerdictSpec::LowerBound {
        theory: -2.0,
        tol: lb.slope_tolerance,
        plateau_fraction: lb.plateau_fraction,
    };
    for witness in &lb.witnesses {
        let norm = NormSpec::new(NormKind::LInf, lb.component);
        let series = run_series(witness, &norm, &times, config)?;
        let Some(s) = series else {
            rows.push(not_converged_row(
                "t^-2 lower bound",
                format!("{} {}", witness.tag(), norm.tag()),
            ));
            payload.plateaus.push(PlateauTable {
                witness: *witness,
                rows: Vec::new(),
                verdict: None,
            });
            continue;
        };
        let v = verify_bounds(&s, &spec, None);
        rows.push(verdict_row("t^-2 lower bound", &v, expected_text(&spec)));
        let table = (0..s.len())
            .map(|i| PlateauRow {
                t: s.times[i],
                value: s.values[i],
                t2_value: s.times[i] * s.times[i] * s.values[i],
                certified: s.certified[i],
            })
            .collect();
        payload.plateaus.push(PlateauTable {
            witness: *witness,
            rows: table,
            verdict: Some(v),
        });
        all.push(s);
    }
    ensure_dir(&config.output_dir)?;
    write_series_csv(&config.output_dir.join(LOWER_BOUND_CSV), &all)?;
    let artifact = Artifact::new("lower-bound", config, rows, payload);
    write_json(&config.output_dir.join(LOWER_BOUND_JSON), &artifact)?;
    Ok(artifact.status)
}

pub fn midband(config: &RunConfig) -> Result<Status> {
    reject(config.validate_midband())?;
    let m = &config.midband;
    let times = m.grid.times();
    let norm = NormSpec::new(NormKind::L2, m.component);
    let high = VerdictSpec::Exponential {
        min_kappa: m.min_kappa,
        min_r2_gap: m.min_r2_gap,
    };
    let low = VerdictSpec::MidBand { min_r2: m.min_r2 };
    let jobs = m
        .high_blocks
        .iter()
        .map(|j| (*j, high))
        .chain(m.low_blocks.iter().map(|j| (*j, low)));
    let mut all = Vec::new();
    let mut entries = Vec::new();
    let mut rows = Vec::new();
    for (j, spec) in jobs {
        let witness = Witness::DyadicBlock { j };
        let claim = match spec {
            VerdictSpec::Exponential { .. } => "high-frequency e^-t decay",
            _ => "mid-band exponential decay",
        };
        let series = run_series(&witness, &norm, &times, config)?;
        let verdict = series.as_ref().map(|s| verify_bounds(s, &spec, None));
        match &verdict {
            Some(v) => rows.push(verdict_row(claim, v, expected_text(&spec))),
            None => rows.push(not_converged_row(claim, witness.tag())),
        }
        entries.push(VerdictEntry {
            norm_tag: format!("{} {}", witness.tag(), norm.tag()),
            spec,
            verdict,
        });
        all.extend(series);
    }
    ensure_dir(&config.output_dir)?;
    write_series_csv(&config.output_dir.join(MIDBAND_CSV), &all)?;
    let artifact = Artifact::new("midband", config, rows, entries);
    write_json(&config.output_dir.join(MIDBAND_JSON), &artifact)?;
    Ok(artifact.status)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceInfo {
    pub file: String,
    pub command: String,
    pub tool_version: String,
    pub config_hash: String,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportPayload {
    pub sources: Vec<SourceInfo>,
}

fn load_artifact(path: &Path) -> Result<Artifact<serde_json::Value>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn report(config: &RunConfig) -> Result<Status> {
    reject(config.validate())?;
    let dir = &config.output_dir;
    let missing: Vec<String> = REQUIRED_ARTIFACTS
        .iter()
        .filter(|f| !dir.join(f).is_file())
        .map(|f| dir.join(f).display().to_string())
        .collect();
    if !missing.is_empty() {
        bail!("missing artifacts:\n  {}", missing.join("\n  "));
    }
    let mut names: Vec<&str> = REQUIRED_ARTIFACTS.to_vec();
    if dir.join(BESOV_JSON).is_file() {
        names.insert(1, BESOV_JSON);
    }
    let mut rows = Vec::new();
    let mut sources = Vec::new();
    let mut table = Vec::new();
    for name in names {
        let a = load_artifact(&dir.join(name))?;
        for r in &a.rows {
            table.push((a.command.clone(), r.clone()));
        }
        rows.extend(a.rows);
        sources.push(SourceInfo {
            file: name.into(),
            command: a.command,
            tool_version: a.tool_version,
            config_hash: a.config_hash,
            status: a.status,
        });
    }
    let artifact = Artifact::new("report", config, rows, ReportPayload { sources });
    write_json(&dir.join(REPORT_JSON), &artifact)?;
    fs::write(dir.join(REPORT_MD), markdown(&artifact, &table)).context("writing report.md")?;
    Ok(overall(&artifact.rows))
}

fn status_text(s: Status) -> &'static str {
    match s {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::NotConverged => "NOT CONVERGED",
        Status::Info => "info",
    }
}

fn markdown(a: &Artifact<ReportPayload>, table: &[(String, Row)]) -> String {
    let mut out = String::new();
    out.push_str("# Decay lab report\n\n");
    out.push_str(&format!("- tool version: {}\n", a.tool_version));
    out.push_str(&format!("- config hash: `{}`\n", a.config_hash));
    out.push_str(&format!("- format version: {}\n", a.format_version));
    out.push_str(&format!("- generated (unix seconds): {}\n", a.timestamp));
    out.push_str(&format!("- overall: {}\n\n", status_text(a.status)));
    out.push_str("| command | claim | subject | expected | measured | status |\n");
    out.push_str("|---|---|---|---|---|---|\n");
    for (cmd, r) in table {
        let measured = r
            .measured
            .map(|m| format!("{m:.9e}"))
            .unwrap_or_else(|| "-".into());
        out.push_str(&format!(
            "| {cmd} | {} | {} | {} | {measured} | {} |\n",
            r.claim,
            r.subject.replace('|', "\\|"),
            r.expected,
            status_text(r.status)
        ));
    }
    out.push_str("\n## Sources\n\n");
    for s in &a.payload.sources {
        out.push_str(&format!(
            "- {} ({}): {}, config `{}`, tool {}\n",
            s.file,
            s.command,
            status_text(s.status),
            &s.config_hash[..12.min(s.config_hash.len())],
            s.tool_version
        ));
    }
    out
}
