//! Per-trial CSV rows and the JSON summary document.
//!
//! The CSV holds only values that are a pure function of the config, so a
//! rerun reproduces it byte for byte. Wall times live in the summary, in
//! the same row order, which lets [`load_report`] rebuild the full report.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{Aggregate, ScalingFit, TrialResult};

use super::config::ExperimentConfig;

pub const FORMAT_VERSION: u32 = 1;

/// CSV header, fixed for [`FORMAT_VERSION`] 1.
pub const CSV_COLUMNS: [&str; 12] = [
    "algorithm",
    "n",
    "m",
    "trial",
    "seed",
    "objective",
    "offline_lp_opt",
    "regret",
    "violation",
    "competitiveness",
    "capacity_norm",
    "max_dual_norm",
];

/// Writes `bytes` to a temporary file next to `path`, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub algorithm: String,
    pub n: usize,
    pub trial: usize,
    pub message: String,
}

/// A scaling fit, or the reason none could be made.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOutcome {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<ScalingFit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl FitOutcome {
    pub fn from_result(r: Result<ScalingFit>) -> Self {
        match r {
            Ok(fit) => FitOutcome {
                fit: Some(fit),
                note: None,
            },
            Err(e) => FitOutcome {
                fit: None,
                note: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub crate_version: String,
    pub os: String,
    pub arch: String,
    pub threads: usize,
    pub root_seed: u64,
    /// Sum of per-trial algorithm wall times, in seconds.
    pub total_algorithm_seconds: f64,
    /// Conventions a reader needs to interpret the numbers.
    pub notes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub format_version: u32,
    pub config: ExperimentConfig,
    /// Sorted by `(n, trial, algorithm)`.
    pub trials: Vec<TrialResult>,
    /// One per `(algorithm, n, m)`, in that key order.
    pub aggregates: Vec<Aggregate>,
    /// Keyed by algorithm label.
    pub regret_fits: BTreeMap<String, FitOutcome>,
    pub violation_fits: BTreeMap<String, FitOutcome>,
    pub failures: Vec<TrialFailure>,
    pub environment: Environment,
}

/// The summary document: the report minus the per-trial rows, plus their wall times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Summary {
    format_version: u32,
    csv_columns: Vec<String>,
    config: ExperimentConfig,
    aggregates: Vec<Aggregate>,
    regret_fits: BTreeMap<String, FitOutcome>,
    violation_fits: BTreeMap<String, FitOutcome>,
    failures: Vec<TrialFailure>,
    environment: Environment,
    wall_times: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    algorithm: String,
    n: usize,
    m: usize,
    trial: usize,
    seed: u64,
    objective: f64,
    offline_lp_opt: f64,
    regret: f64,
    violation: f64,
    competitiveness: Option<f64>,
    capacity_norm: f64,
    max_dual_norm: f64,
}

pub fn trials_csv(trials: &[TrialResult]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for t in trials {
        w.serialize(CsvRow {
            algorithm: t.algorithm.clone(),
            n: t.n,
            m: t.m,
            trial: t.trial,
            seed: t.seed,
            objective: t.objective,
            offline_lp_opt: t.offline_lp_opt,
            regret: t.regret,
            violation: t.violation,
            competitiveness: t.competitiveness,
            capacity_norm: t.capacity_norm,
            max_dual_norm: t.max_dual_norm,
        })?;
    }
    if trials.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    w.into_inner()
        .map_err(|e| Error::InvalidArgument(format!("csv buffer: {e}")))
}

pub fn parse_trials_csv(bytes: &[u8], wall_times: &[f64]) -> Result<Vec<TrialResult>> {
    let mut r = csv::Reader::from_reader(bytes);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        return Err(Error::Config(format!("unexpected CSV header {header:?}")));
    }
    let mut out = Vec::new();
    for (i, row) in r.deserialize::<CsvRow>().enumerate() {
        let row = row?;
        out.push(TrialResult {
            algorithm: row.algorithm,
            n: row.n,
            m: row.m,
            trial: row.trial,
            seed: row.seed,
            objective: row.objective,
            offline_lp_opt: row.offline_lp_opt,
            regret: row.regret,
            violation: row.violation,
            competitiveness: row.competitiveness,
            capacity_norm: row.capacity_norm,
            max_dual_norm: row.max_dual_norm,
            wall_time: wall_times.get(i).copied().unwrap_or(0.0),
        });
    }
    if out.len() != wall_times.len() {
        return Err(Error::Config(format!(
            "CSV has {} rows but the summary lists {} wall times",
            out.len(),
            wall_times.len()
        )));
    }
    Ok(out)
}

impl ExperimentReport {
    pub fn csv_bytes(&self) -> Result<Vec<u8>> {
        trials_csv(&self.trials)
    }

    pub fn summary_json(&self) -> Result<String> {
        let summary = Summary {
            format_version: self.format_version,
            csv_columns: CSV_COLUMNS.iter().map(|s| s.to_string()).collect(),
            config: self.config.clone(),
            aggregates: self.aggregates.clone(),
            regret_fits: self.regret_fits.clone(),
            violation_fits: self.violation_fits.clone(),
            failures: self.failures.clone(),
            environment: self.environment.clone(),
            wall_times: self.trials.iter().map(|t| t.wall_time).collect(),
        };
        let mut s = serde_json::to_string_pretty(&summary)?;
        s.push('\n');
        Ok(s)
    }

    /// Writes whichever of the CSV and summary paths are given.
    pub fn write(&self, csv: Option<&Path>, summary: Option<&Path>) -> Result<()> {
        if let Some(p) = csv {
            write_atomic(p, &self.csv_bytes()?)?;
        }
        if let Some(p) = summary {
            write_atomic(p, self.summary_json()?.as_bytes())?;
        }
        Ok(())
    }

    pub fn from_parts(csv: &[u8], summary_json: &str) -> Result<Self> {
        let s: Summary = serde_json::from_str(summary_json)?;
        if s.format_version != FORMAT_VERSION {
            return Err(Error::Config(format!(
                "report format version {} is not supported (expected {FORMAT_VERSION})",
                s.format_version
            )));
        }
        Ok(ExperimentReport {
            format_version: s.format_version,
            trials: parse_trials_csv(csv, &s.wall_times)?,
            config: s.config,
            aggregates: s.aggregates,
            regret_fits: s.regret_fits,
            violation_fits: s.violation_fits,
            failures: s.failures,
            environment: s.environment,
        })
    }
}

pub fn load_report(csv: &Path, summary: &Path) -> Result<ExperimentReport> {
    let bytes = std::fs::read(csv).map_err(|e| Error::io(csv, e))?;
    let json = std::fs::read_to_string(summary).map_err(|e| Error::io(summary, e))?;
    ExperimentReport::from_parts(&bytes, &json)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("f.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn csv_round_trip() {
        let row = TrialResult {
            algorithm: "soa[sqrt_n]".into(),
            n: 10,
            m: 2,
            trial: 1,
            seed: u64::MAX,
            objective: 0.1 + 0.2,
            offline_lp_opt: 1.0 / 3.0,
            regret: 1.0 / 3.0 - 0.3,
            violation: 0.0,
            competitiveness: None,
            capacity_norm: 2f64.sqrt(),
            max_dual_norm: 1e-300,
            wall_time: 0.5,
        };
        let bytes = trials_csv(std::slice::from_ref(&row)).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with(&CSV_COLUMNS.join(",")));
        let back = parse_trials_csv(&bytes, &[0.5]).unwrap();
        assert_eq!(back, vec![row]);
        assert!(parse_trials_csv(&bytes, &[]).is_err());
    }
}
