//! Run directories, CSV series and JSON documents.

use std::fs;
use std::path::{Path, PathBuf};

use nsm_core::EnergyReport;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};

/// Environment variable holding the default output root.
pub const OUTPUT_ROOT_VAR: &str = "NSM_OUTPUT_ROOT";
pub const DEFAULT_OUTPUT_ROOT: &str = "runs";

pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_VAR)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT))
}

/// `output_dir` of the config, or a name derived from the config under the root.
pub fn run_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir
        .clone()
        .unwrap_or_else(|| output_root().join(cfg.run_name()))
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<const N: usize>(path: &Path, header: &[&str; N], rows: impl IntoIterator<Item = [f64; N]>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|v| fmt_f64(*v)))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn write_reports(path: &Path, reports: &[EnergyReport]) -> Result<()> {
    write_csv(path, &EnergyReport::COLUMNS, reports.iter().map(|r| r.values()))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

/// A report as a JSON object keyed by column name. Non-finite values become `null`.
pub fn report_json(r: &EnergyReport) -> Value {
    let mut m = Map::new();
    for (k, v) in EnergyReport::COLUMNS.iter().zip(r.values()) {
        m.insert(k.to_string(), Value::from(v));
    }
    Value::Object(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
    }

    #[test]
    fn infinite_entries_become_null() {
        let v = Value::from(f64::INFINITY);
        assert!(v.is_null());
    }
}
