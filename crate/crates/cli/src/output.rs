use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use nsdecay::decay_analysis::{DecaySeries, Verdict};

use crate::config::{RunConfig, FORMAT_VERSION};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotConverged,
    /// Informational row without a pass/fail threshold.
    Info,
}

impl Status {
    pub fn of(v: &Verdict) -> Self {
        match v.passed {
            Some(true) => Status::Pass,
            Some(false) => Status::Fail,
            None => Status::NotConverged,
        }
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// One line of the claim-versus-measurement table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub claim: String,
    pub subject: String,
    pub expected: String,
    pub measured: Option<f64>,
    pub status: Status,
}

/// Common envelope of every JSON artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact<T> {
    pub format_version: u32,
    pub tool_version: String,
    pub command: String,
    pub config_hash: String,
    pub timestamp: u64,
    pub status: Status,
    pub rows: Vec<Row>,
    pub payload: T,
}

impl<T> Artifact<T> {
    pub fn new(command: &str, config: &RunConfig, rows: Vec<Row>, payload: T) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            tool_version: TOOL_VERSION.into(),
            command: command.into(),
            config_hash: config.hash(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            status: overall(&rows),
            rows,
            payload,
        }
    }
}

/// Non-convergence outranks failure, which outranks a pass.
pub fn overall(rows: &[Row]) -> Status {
    if rows.iter().any(|r| r.status == Status::NotConverged) {
        Status::NotConverged
    } else if rows.iter().any(|r| r.status == Status::Fail) {
        Status::Fail
    } else {
        Status::Pass
    }
}

pub fn exit_code(status: Status) -> u8 {
    match status {
        Status::Pass | Status::Info => 0,
        Status::Fail => 1,
        Status::NotConverged => 3,
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_series_csv(path: &Path, series: &[DecaySeries]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["t", "norm_tag", "value", "error_estimate", "certified"])?;
    for s in series {
        let tag = format!("{}:{}", s.data_tag, s.norm_tag);
        for i in 0..s.len() {
            w.write_record([
                format!("{:.15e}", s.times[i]),
                tag.clone(),
                format!("{:.15e}", s.values[i]),
                format!("{:.6e}", s.error_estimates[i]),
                s.certified[i].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(status: Status) -> Row {
        Row {
            claim: "c".into(),
            subject: "s".into(),
            expected: "e".into(),
            measured: Some(1.0),
            status,
        }
    }

    #[test]
    fn status_precedence() {
        assert_eq!(
            overall(&[row(Status::Pass), row(Status::Info)]),
            Status::Pass
        );
        assert_eq!(
            overall(&[row(Status::Pass), row(Status::Fail)]),
            Status::Fail
        );
        assert_eq!(
            overall(&[row(Status::NotConverged), row(Status::Fail)]),
            Status::NotConverged
        );
        assert_eq!(exit_code(Status::Fail), 1);
        assert_eq!(exit_code(Status::NotConverged), 3);
    }

    #[test]
    fn csv_keeps_precision_and_quotes_tags() {
        let dir = tempfile::tempdir().unwrap();
        let s = DecaySeries::from_values(
            "d",
            "B^0_{2,2}[Low][pair]",
            vec![1.0, 2.0],
            vec![1.0 / 3.0, 0.25],
        )
        .unwrap();
        let p = dir.path().join("s.csv");
        write_series_csv(&p, &[s]).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,norm_tag,value,error_estimate,certified"
        );
        let first = lines.next().unwrap();
        assert!(first.contains("\"d:B^0_{2,2}[Low][pair]\""), "{first}");
        assert!(first.contains("3.333333333333333e-1"), "{first}");
        assert!(!text.contains('\r'));
    }
}
