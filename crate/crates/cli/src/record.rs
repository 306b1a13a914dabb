//! Result records and their CSV / JSON serialization.
//!
//! Output files hold no timing information, so reruns with the same
//! configuration and seed produce identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use ids_polar::stats::{mean_ci, wilson_interval, Z95};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;

/// Version of the JSON summary layout.
pub const SCHEMA_VERSION: u32 = 1;

/// A scalar result with its 95% interval. Exact quantities have
/// `trials = 0` and a degenerate interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: u64,
    pub seed: u64,
}

impl Metric {
    pub fn exact(name: impl Into<String>, value: f64, seed: u64) -> Self {
        Self {
            name: name.into(),
            value,
            ci_low: value,
            ci_high: value,
            trials: 0,
            seed,
        }
    }

    /// Success fraction with a Wilson interval.
    pub fn proportion(name: impl Into<String>, successes: u64, trials: u64, seed: u64) -> Self {
        let (lo, hi) = wilson_interval(successes, trials, Z95);
        Self {
            name: name.into(),
            value: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
            ci_low: lo,
            ci_high: hi,
            trials,
            seed,
        }
    }

    /// Sample mean with a normal interval.
    pub fn mean(name: impl Into<String>, samples: &[f64], seed: u64) -> Self {
        let (m, hw) = mean_ci(samples);
        Self {
            name: name.into(),
            value: m,
            ci_low: m - hw,
            ci_high: m + hw,
            trials: samples.len() as u64,
            seed,
        }
    }

    pub fn half_width(&self) -> f64 {
        (self.ci_high - self.ci_low) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub metrics: Vec<Metric>,
    pub checks: Vec<Check>,
    /// Command-specific structured payload for the JSON summary.
    pub details: serde_json::Value,
}

#[derive(Serialize)]
struct Summary<'a> {
    schema_version: u32,
    command: &'a str,
    seed: u64,
    trials: u64,
    config: &'a ExperimentConfig,
    metrics: &'a [Metric],
    checks: &'a [Check],
    details: &'a serde_json::Value,
}

#[macro_export]
macro_rules! row {
    ($($cell:expr),* $(,)?) => {
        vec![$($cell.to_string()),*]
    };
}

impl Report {
    pub fn new(command: &'static str, columns: Vec<&'static str>) -> Self {
        Self {
            command,
            columns,
            rows: Vec::new(),
            metrics: Vec::new(),
            checks: Vec::new(),
            details: serde_json::Value::Null,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn metric(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn csv_path(&self, dir: &Path) -> PathBuf {
        dir.join(format!("{}.csv", self.command))
    }

    pub fn json_path(&self, dir: &Path) -> PathBuf {
        dir.join(format!("{}.json", self.command))
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            debug_assert_eq!(r.len(), self.columns.len());
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| CliError::Output(e.to_string()))
    }

    pub fn to_json(&self, cfg: &ExperimentConfig) -> Result<Vec<u8>, CliError> {
        let summary = Summary {
            schema_version: SCHEMA_VERSION,
            command: self.command,
            seed: cfg.seed,
            trials: cfg.trials,
            config: cfg,
            metrics: &self.metrics,
            checks: &self.checks,
            details: &self.details,
        };
        let mut bytes = serde_json::to_vec_pretty(&summary)?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    /// Writes `<out>/<command>.csv` and `<out>/<command>.json`.
    pub fn write(&self, cfg: &ExperimentConfig) -> Result<(PathBuf, PathBuf), CliError> {
        let dir = &cfg.out;
        fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.clone(), e))?;
        let csv_path = self.csv_path(dir);
        let json_path = self.json_path(dir);
        fs::write(&csv_path, self.to_csv()?).map_err(|e| CliError::Io(csv_path.clone(), e))?;
        fs::write(&json_path, self.to_json(cfg)?).map_err(|e| CliError::Io(json_path.clone(), e))?;
        Ok((csv_path, json_path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ChannelSection;

    #[test]
    fn csv_has_header_and_rows() {
        let mut r = Report::new("demo", vec!["a", "b"]);
        r.rows.push(row![1, 0.5]);
        r.rows.push(row!["x", true]);
        assert_eq!(String::from_utf8(r.to_csv().unwrap()).unwrap(), "a,b\n1,0.5\nx,true\n");
    }

    #[test]
    fn json_carries_version_and_metrics() {
        let cfg = ExperimentConfig::new(ChannelSection {
            p_insert: 0.0,
            p_delete: 0.0,
            p_substitute: 0.0,
        });
        let mut r = Report::new("demo", vec![]);
        r.metrics.push(Metric::proportion("rate", 3, 10, cfg.seed));
        let v: serde_json::Value = serde_json::from_slice(&r.to_json(&cfg).unwrap()).unwrap();
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
        assert_eq!(v["metrics"][0]["trials"], 10);
        assert_eq!(v["metrics"][0]["seed"], 1);
        assert!(v["metrics"][0]["ci_low"].as_f64().unwrap() < 0.3);
    }

    #[test]
    fn degenerate_intervals() {
        let m = Metric::exact("x", 2.5, 1);
        assert_eq!((m.ci_low, m.ci_high, m.trials), (2.5, 2.5, 0));
        let p = Metric::proportion("p", 0, 100, 1);
        assert_eq!(p.ci_low, 0.0);
        assert!(p.ci_high > 0.0 && p.ci_high < 0.05);
    }
}
