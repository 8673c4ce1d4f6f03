//! Run records, deterministic run ids, and the on-disk result layout
//! `OUT/<run_id>/{record.json, rows.jsonl, export.csv}`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// One persisted experiment outcome.
///
/// `run_id` is a pure function of (command, parameters, master_seed);
/// the timestamp is excluded, so reruns land in the same directory and
/// produce byte-identical rows.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub command: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub master_seed: u64,
    pub metrics: BTreeMap<String, f64>,
    pub artifact_paths: Vec<String>,
    pub timestamp: String,
}

/// One per-trial row of `rows.jsonl`.
#[derive(Debug, Serialize, Deserialize)]
pub struct Row {
    pub trial: usize,
    pub metrics: BTreeMap<String, f64>,
}

pub fn run_id(command: &str, parameters: &BTreeMap<String, serde_json::Value>, seed: u64) -> String {
    let mut hasher = Sha256::new();
    hasher.update(command.as_bytes());
    hasher.update(b"\n");
    hasher.update(serde_json::to_string(parameters).expect("parameters serialize").as_bytes());
    hasher.update(b"\n");
    hasher.update(seed.to_le_bytes());
    let digest = hasher.finalize();
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// 17 significant digits: enough to round-trip any f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct RunWriter {
    pub dir: PathBuf,
    rows: Vec<Row>,
}

impl RunWriter {
    pub fn new(out_dir: &Path, id: &str) -> anyhow::Result<Self> {
        let dir = out_dir.join(id);
        fs::create_dir_all(&dir)?;
        Ok(Self { dir, rows: Vec::new() })
    }

    pub fn push_row(&mut self, trial: usize, metrics: BTreeMap<String, f64>) {
        self.rows.push(Row { trial, metrics });
    }

    pub fn artifact_path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes rows.jsonl, export.csv, and record.json; rows are written in
    /// trial order regardless of how they were produced.
    pub fn finish(mut self, mut record: RunRecord) -> anyhow::Result<RunRecord> {
        self.rows.sort_by_key(|r| r.trial);

        let mut jsonl = String::new();
        for row in &self.rows {
            jsonl.push_str(&serde_json::to_string(row)?);
            jsonl.push('\n');
        }
        fs::write(self.dir.join("rows.jsonl"), jsonl)?;

        let mut csv = String::new();
        if let Some(first) = self.rows.first() {
            let keys: Vec<&String> = first.metrics.keys().collect();
            csv.push_str("trial");
            for k in &keys {
                csv.push(',');
                csv.push_str(k);
            }
            csv.push('\n');
            for row in &self.rows {
                csv.push_str(&row.trial.to_string());
                for k in &keys {
                    csv.push(',');
                    csv.push_str(&fmt_f64(*row.metrics.get(*k).unwrap_or(&f64::NAN)));
                }
                csv.push('\n');
            }
        }
        fs::write(self.dir.join("export.csv"), csv)?;

        record.artifact_paths.sort();
        fs::write(
            self.dir.join("record.json"),
            serde_json::to_string_pretty(&record)?,
        )?;
        Ok(record)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_id_ignores_nothing_but_inputs() {
        let mut params = BTreeMap::new();
        params.insert("p".to_string(), serde_json::json!(0.5));
        let a = run_id("bound", &params, 1);
        let b = run_id("bound", &params, 1);
        assert_eq!(a, b);
        assert_ne!(a, run_id("bound", &params, 2));
        params.insert("kraus".to_string(), serde_json::json!(3));
        assert_ne!(a, run_id("bound", &params, 1));
    }

    #[test]
    fn fmt_round_trips_exactly() {
        for x in [
            1.0695999934791407,
            0.1076505974967185,
            std::f64::consts::PI,
            1e-300,
            -0.0,
            123456789.123456789,
        ] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }
}
