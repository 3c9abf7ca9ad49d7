//! `pedoop simulate`: operating characteristics per scenario as CSV, plus a
//! JSON run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use pedoop::sim::{run_replications, OperatingCharacteristics, ReplicationSettings};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::ServiceError;

pub const CSV_COLUMNS: [&str; 8] =
    ["dose_index", "dose_amount", "true_tox", "true_eff", "utility", "avg_n", "sel_pct", "sel_pct_with_u"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRecord {
    pub label: String,
    pub csv: String,
    pub summary: String,
    pub completed: usize,
    pub failures: usize,
    pub pct_no_recommendation: f64,
    pub avg_total_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub created_at: String,
    pub config_sha256: String,
    pub master_seed: u64,
    pub replications: usize,
    pub parallelism: usize,
    pub scenarios: Vec<ScenarioRecord>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// One row per dose (one-based `dose_index`) and a final `control` row.
pub fn oc_csv(oc: &OperatingCharacteristics) -> Result<String, ServiceError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| ServiceError::Io(format!("writing CSV: {e}"));
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for d in &oc.doses {
        w.write_record([
            d.dose_level.to_string(),
            d.dose_amount.to_string(),
            d.true_tox.to_string(),
            d.true_eff.to_string(),
            format!("{:.4}", d.utility),
            format!("{:.4}", d.avg_patients_total),
            format!("{:.4}", d.sel_pct),
            format!("{:.4}", d.sel_pct_with_u),
        ])
        .map_err(csv_err)?;
    }
    if let Some(c) = &oc.control {
        w.write_record([
            "control".to_string(),
            String::new(),
            c.true_tox.to_string(),
            c.true_eff.to_string(),
            format!("{:.4}", c.utility),
            format!("{:.4}", c.avg_patients),
            String::new(),
            String::new(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| ServiceError::Io(format!("writing CSV: {e}")))?;
    String::from_utf8(bytes).map_err(|e| ServiceError::Io(e.to_string()))
}

fn file_stem(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

pub fn resolve_out_dir(cli: Option<&Path>, cfg: &RunConfig) -> Result<PathBuf, ServiceError> {
    cli.map(Path::to_path_buf)
        .or_else(|| cfg.output.dir.clone())
        .ok_or_else(|| ServiceError::Config("no output directory: pass --out or set [output] dir".into()))
}

/// Runs every scenario and writes `<label>.csv`, `<label>.json` and `manifest.json`.
pub fn run(cfg: &RunConfig, config_text: &str, out: &Path) -> Result<RunManifest, ServiceError> {
    let scenarios = cfg.scenarios()?;
    fs::create_dir_all(out).map_err(|e| ServiceError::Io(format!("creating {}: {e}", out.display())))?;
    let settings = ReplicationSettings::from(cfg.replication);
    let mut records = Vec::with_capacity(scenarios.len());
    for sc in &scenarios {
        let oc = run_replications(sc, &cfg.design, &settings)?;
        let stem = file_stem(&sc.label);
        let csv_name = format!("{stem}.csv");
        let json_name = format!("{stem}.json");
        fs::write(out.join(&csv_name), oc_csv(&oc)?)?;
        let json = serde_json::to_string_pretty(&oc).map_err(|e| ServiceError::Io(e.to_string()))?;
        fs::write(out.join(&json_name), json + "\n")?;
        records.push(ScenarioRecord {
            label: sc.label.clone(),
            csv: csv_name,
            summary: json_name,
            completed: oc.completed,
            failures: oc.failures.len(),
            pct_no_recommendation: oc.pct_no_recommendation,
            avg_total_n: oc.avg_total_n,
        });
    }
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        created_at: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
        config_sha256: sha256_hex(config_text.as_bytes()),
        master_seed: settings.master_seed,
        replications: settings.replications,
        parallelism: settings.parallelism,
        scenarios: records,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| ServiceError::Io(e.to_string()))?;
    fs::write(out.join("manifest.json"), json + "\n")?;
    Ok(manifest)
}
