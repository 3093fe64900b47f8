use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use nsdecay::decay_analysis::{linear_grid, log_grid, NormKind, NormSpec, SweepSettings, Witness};
use nsdecay::littlewood_paley::{
    build_partition, Band, BesovSpec, Component, DEFAULT_J_MAX, DEFAULT_J_MIN,
    DEFAULT_TRANSITION_WIDTH,
};
use nsdecay::oscillatory_quadrature::{Branch, QuadOptions};
use nsdecay::witness_data::{make_psi, DEFAULT_PSI_MARGIN};

pub const FORMAT_VERSION: u32 = 1;
pub const THREADS_ENV: &str = "DECAY_LAB_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub format_version: u32,
    pub output_dir: PathBuf,
    /// Worker threads; 0 picks one per core.
    pub threads: usize,
    #[serde(deserialize_with = "strict_witness")]
    pub witness: Witness,
    pub partition: PartitionConfig,
    pub quadrature: QuadratureConfig,
    pub grid: GridConfig,
    pub sweep: SweepConfig,
    pub besov: BesovConfig,
    pub eigen: EigenConfig,
    pub lower_bound: LowerBoundConfig,
    pub midband: MidbandConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            format_version: FORMAT_VERSION,
            output_dir: PathBuf::from("decay-lab-out"),
            threads: 0,
            witness: Witness::Gaussian,
            partition: PartitionConfig::default(),
            quadrature: QuadratureConfig::default(),
            grid: GridConfig::default(),
            sweep: SweepConfig::default(),
            besov: BesovConfig::default(),
            eigen: EigenConfig::default(),
            lower_bound: LowerBoundConfig::default(),
            midband: MidbandConfig::default(),
        }
    }
}

/// Unit witness variants would otherwise ignore stray keys.
fn checked_witness<E: serde::de::Error>(value: toml::Value) -> Result<Witness, E> {
    let table = value
        .as_table()
        .ok_or_else(|| E::custom("witness must be a table"))?;
    let kind = table
        .get("kind")
        .and_then(|k| k.as_str())
        .unwrap_or_default();
    let allowed: &[&str] = match kind {
        "psi" => &["kind", "margin", "branch"],
        "dyadic_block" => &["kind", "j"],
        _ => &["kind"],
    };
    if let Some(k) = table.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(E::custom(format!(
            "unknown field `{k}` for witness kind `{kind}`"
        )));
    }
    value.try_into().map_err(E::custom)
}

fn strict_witness<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Witness, D::Error> {
    checked_witness(toml::Value::deserialize(d)?)
}

fn strict_witnesses<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Vec<Witness>, D::Error> {
    Vec::<toml::Value>::deserialize(d)?
        .into_iter()
        .map(checked_witness)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PartitionConfig {
    /// Width of each smooth transition, in octaves.
    pub transition_width: f64,
    pub j_min: i32,
    pub j_max: i32,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        Self {
            transition_width: DEFAULT_TRANSITION_WIDTH,
            j_min: DEFAULT_J_MIN,
            j_max: DEFAULT_J_MAX,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_cells: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        let q = QuadOptions::default();
        Self {
            rel_tol: q.rel_tol,
            abs_tol: q.abs_tol,
            max_cells: q.max_cells,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub spacing: Spacing,
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    /// Explicit times; replaces the generated grid when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            spacing: Spacing::Log,
            t_min: 1e2,
            t_max: 1e4,
            points: 12,
            values: None,
        }
    }
}

impl GridConfig {
    pub fn times(&self) -> Vec<f64> {
        if let Some(v) = &self.values {
            return v.clone();
        }
        if self.points == 0 {
            return Vec::new();
        }
        match self.spacing {
            Spacing::Log => log_grid(self.t_min, self.t_max, self.points),
            Spacing::Linear => linear_grid(self.t_min, self.t_max, self.points),
        }
    }

    fn validate(&self, name: &str, errors: &mut Vec<String>) {
        let times = self.times();
        if times.is_empty() {
            errors.push(format!("{name}: empty time grid"));
            return;
        }
        if times.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            errors.push(format!("{name}: times must be positive and finite"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            errors.push(format!("{name}: times must be strictly increasing"));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictMode {
    /// Lower-bound test for sup norms, power law otherwise.
    Auto,
    PowerLaw,
    LowerBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub norms: Vec<NormSpec>,
    pub verdict: VerdictMode,
    pub exponent_tolerance: f64,
    pub min_r2: f64,
    pub lower_bound_tolerance: f64,
    pub plateau_fraction: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            norms: vec![
                NormSpec::new(
                    NormKind::Besov(BesovSpec::new(0.0, 2.0, 2.0, Band::Low).expect("valid")),
                    Component::Pair,
                ),
                NormSpec::new(NormKind::L2, Component::Pair),
            ],
            verdict: VerdictMode::Auto,
            exponent_tolerance: 0.05,
            min_r2: 0.999,
            lower_bound_tolerance: 0.1,
            plateau_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BesovConfig {
    pub component: Component,
    pub specs: Vec<BesovSpec>,
}

impl Default for BesovConfig {
    fn default() -> Self {
        let spec = |p: f64, band| BesovSpec::new(0.0, p, 2.0, band).expect("valid");
        Self {
            component: Component::Pair,
            specs: vec![
                spec(2.0, Band::Low),
                spec(2.0, Band::High),
                spec(4.0, Band::Low),
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EigenConfig {
    /// Allowed error away from the degenerate point.
    pub tolerance: f64,
    /// Allowed error within `degenerate_band` of `rho = 2`.
    pub band_tolerance: f64,
    pub degenerate_band: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub rho_points: usize,
    pub t_max: f64,
    pub t_points: usize,
}

impl Default for EigenConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            band_tolerance: 1e-6,
            degenerate_band: 1e-3,
            rho_min: 0.01,
            rho_max: 10.0,
            rho_points: 200,
            t_max: 20.0,
            t_points: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LowerBoundConfig {
    #[serde(deserialize_with = "strict_witnesses")]
    pub witnesses: Vec<Witness>,
    pub component: Component,
    pub slope_tolerance: f64,
    pub plateau_fraction: f64,
    /// Margin of the bump used in the half-space tables.
    pub psi_margin: f64,
    pub halfspace_times: Vec<f64>,
}

impl Default for LowerBoundConfig {
    fn default() -> Self {
        Self {
            witnesses: vec![
                Witness::Psi {
                    margin: DEFAULT_PSI_MARGIN,
                    branch: Branch::Plus,
                },
                Witness::Gaussian,
            ],
            component: Component::Pair,
            slope_tolerance: 0.1,
            plateau_fraction: 0.5,
            psi_margin: DEFAULT_PSI_MARGIN,
            halfspace_times: vec![1e2, 1e3, 1e4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MidbandConfig {
    pub high_blocks: Vec<i32>,
    pub low_blocks: Vec<i32>,
    pub component: Component,
    pub grid: GridConfig,
    pub min_kappa: f64,
    pub min_r2_gap: f64,
    pub min_r2: f64,
}

impl Default for MidbandConfig {
    fn default() -> Self {
        Self {
            high_blocks: vec![3, 4, 5],
            low_blocks: vec![0, 1, 2],
            component: Component::Pair,
            grid: GridConfig {
                spacing: Spacing::Linear,
                t_min: 10.0,
                t_max: 100.0,
                points: 12,
                values: None,
            },
            min_kappa: 0.9,
            min_r2_gap: 0.05,
            min_r2: 0.99,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// SHA-256 of the canonical serialisation.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn quad(&self) -> QuadOptions {
        QuadOptions {
            rel_tol: self.quadrature.rel_tol,
            abs_tol: self.quadrature.abs_tol,
            max_cells: self.quadrature.max_cells,
            ..QuadOptions::default()
        }
    }

    pub fn settings(&self) -> SweepSettings {
        SweepSettings {
            profile: build_partition(self.partition.transition_width).expect("validated"),
            quad: self.quad(),
            j_min: self.partition.j_min,
            j_max: self.partition.j_max,
        }
    }

    /// Checks shared by every command.
    pub fn validate(&self) -> Vec<String> {
        let mut errors = Vec::new();
        if let Witness::Psi { margin, .. } = self.witness {
            if let Err(e) = make_psi(margin) {
                errors.push(format!("witness: {e}"));
            }
        }
        if self.format_version != FORMAT_VERSION {
            errors.push(format!(
                "format_version {} is not supported (expected {FORMAT_VERSION})",
                self.format_version
            ));
        }
        if let Err(e) = build_partition(self.partition.transition_width) {
            errors.push(format!("partition: {e}"));
        }
        if self.partition.j_min > self.partition.j_max {
            errors.push("partition: j_min exceeds j_max".into());
        }
        let q = &self.quadrature;
        if !(q.rel_tol > 0.0 && q.rel_tol < 1.0) {
            errors.push(format!(
                "quadrature.rel_tol must lie in (0, 1), got {}",
                q.rel_tol
            ));
        }
        if !(q.abs_tol >= 0.0 && q.abs_tol.is_finite()) {
            errors.push(format!(
                "quadrature.abs_tol must be nonnegative, got {}",
                q.abs_tol
            ));
        }
        if q.max_cells == 0 {
            errors.push("quadrature.max_cells must be positive".into());
        }
        errors
    }

    pub fn validate_sweep(&self) -> Vec<String> {
        let mut errors = self.validate();
        self.grid.validate("grid", &mut errors);
        if self.sweep.norms.is_empty() {
            errors.push("sweep.norms is empty".into());
        }
        errors
    }

    pub fn validate_besov(&self) -> Vec<String> {
        let mut errors = self.validate();
        self.grid.validate("grid", &mut errors);
        if self.besov.specs.is_empty() {
            errors.push("besov.specs is empty".into());
        }
        for s in &self.besov.specs {
            if s.p.get() < 2.0 {
                errors.push(format!("besov: p = {} is below 2 and not computable", s.p));
            }
        }
        errors
    }

    pub fn validate_eigen(&self) -> Vec<String> {
        let mut errors = self.validate();
        let e = &self.eigen;
        if !(e.rho_min > 0.0 && e.rho_max > e.rho_min && e.rho_max.is_finite()) {
            errors.push("eigen: need 0 < rho_min < rho_max".into());
        }
        if e.rho_points < 2 || e.t_points < 2 {
            errors.push("eigen: need at least two points on each axis".into());
        }
        if !(e.t_max > 0.0 && e.t_max.is_finite()) {
            errors.push("eigen: t_max must be positive".into());
        }
        if !(e.degenerate_band > 0.0 && e.degenerate_band < 1.0) {
            errors.push("eigen: degenerate_band must lie in (0, 1)".into());
        }
        if !(e.tolerance >= 0.0 && e.band_tolerance >= 0.0) {
            errors.push("eigen: tolerances must be nonnegative".into());
        }
        errors
    }

    pub fn validate_lower_bound(&self) -> Vec<String> {
        let mut errors = self.validate();
        self.grid.validate("grid", &mut errors);
        let lb = &self.lower_bound;
        if lb.witnesses.is_empty() && lb.halfspace_times.is_empty() {
            errors.push("lower_bound: nothing to do".into());
        }
        if let Err(e) = make_psi(lb.psi_margin) {
            errors.push(format!("lower_bound.psi_margin: {e}"));
        }
        if lb
            .halfspace_times
            .iter()
            .any(|t| !(t.is_finite() && *t >= 1.0))
        {
            errors.push("lower_bound.halfspace_times must be at least 1".into());
        }
        errors
    }

    pub fn validate_midband(&self) -> Vec<String> {
        let mut errors = self.validate();
        self.midband.grid.validate("midband.grid", &mut errors);
        if self.midband.high_blocks.is_empty() && self.midband.low_blocks.is_empty() {
            errors.push("midband: no blocks selected".into());
        }
        errors
    }
}

/// Config thread count, overridden by the environment.
pub fn thread_count(config: &RunConfig) -> Result<usize, String> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| format!("{THREADS_ENV} must be a nonnegative integer, got {v:?}")),
        Err(_) => Ok(config.threads),
    }
}
