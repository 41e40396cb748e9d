//! CSV and JSON writers.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::experiment::{ExperimentResults, RunResult, SummaryRow};

pub const RUNS_HEADER: [&str; 9] = [
    "env",
    "algo",
    "lambda",
    "seed",
    "eval_mean",
    "eval_std",
    "eval_cvar_0.05",
    "episodes",
    "wall_ms",
];

pub const SUMMARY_HEADER: [&str; 9] = [
    "env",
    "algo",
    "lambda",
    "runs",
    "diverged",
    "eval_mean",
    "eval_std",
    "eval_cvar_0.05",
    "seed_mean_std",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    #[default]
    Both,
}

/// 17 significant digits; missing values are written as NaN.
pub fn fmt_float(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.16e}"),
        None => "NaN".into(),
    }
}

fn csv_error(e: csv::Error) -> HarnessError {
    HarnessError::Serialize(e.to_string())
}

fn run_row(r: &RunResult) -> [String; 9] {
    [
        r.env.clone(),
        r.algo.clone(),
        fmt_float(Some(r.lambda)),
        r.seed.to_string(),
        fmt_float(r.eval_mean()),
        fmt_float(r.eval_std()),
        fmt_float(r.eval_cvar(0.05)),
        r.episodes.to_string(),
        r.wall_ms.to_string(),
    ]
}

fn summary_row(s: &SummaryRow) -> [String; 9] {
    [
        s.env.clone(),
        s.algo.clone(),
        fmt_float(Some(s.lambda)),
        s.runs.to_string(),
        s.diverged.to_string(),
        fmt_float(s.eval_mean),
        fmt_float(s.eval_std),
        fmt_float(s.eval_cvar_05),
        fmt_float(s.seed_mean_std),
    ]
}

fn table<const N: usize>(header: [&str; N], rows: impl Iterator<Item = [String; N]>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(&row).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| HarnessError::Serialize(e.to_string()))
}

pub fn runs_csv(results: &ExperimentResults) -> Result<String> {
    table(RUNS_HEADER, results.runs.iter().map(run_row))
}

pub fn summary_csv(results: &ExperimentResults) -> Result<String> {
    table(SUMMARY_HEADER, results.summary.iter().map(summary_row))
}

pub fn to_json(results: &ExperimentResults) -> Result<String> {
    let mut s = serde_json::to_string_pretty(results).map_err(|e| HarnessError::Serialize(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> Result<ExperimentResults> {
    serde_json::from_str(text).map_err(|e| HarnessError::Serialize(e.to_string()))
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf> {
    fs::write(&path, contents).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    Ok(path)
}

/// Writes `runs.csv` + `summary.csv` and/or `results.json` into `dir`.
pub fn export(results: &ExperimentResults, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    if results.runs.is_empty() {
        return Err(HarnessError::Config("nothing to export".into()));
    }
    fs::create_dir_all(dir).map_err(|e| HarnessError::Io {
        path: dir.display().to_string(),
        source: e,
    })?;
    let mut written = Vec::new();
    if matches!(format, Format::Csv | Format::Both) {
        written.push(write(dir.join("runs.csv"), &runs_csv(results)?)?);
        written.push(write(dir.join("summary.csv"), &summary_csv(results)?)?);
    }
    if matches!(format, Format::Json | Format::Both) {
        written.push(write(dir.join("results.json"), &to_json(results)?)?);
    }
    Ok(written)
}
