use std::path::Path;
use std::process::Command;

use pedoop_service::simulate::{sha256_hex, RunManifest, CSV_COLUMNS};

const CONFIG: &str = r#"[[scenario]]
preset = "sim2-sc1"

[design.phase1]
p_t = 0.2
pi_t = 0.2

[design.phase2]
max_n = 20
bar_draws = 1000

[design.mcmc]
iterations = 400
burn_in = 200
thin = 2

[replication]
replications = 3
master_seed = 42
parallelism = 2
"#;

fn pedoop(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_pedoop")).args(args).output().unwrap()
}

fn simulate(config: &Path, out: &Path) -> std::process::Output {
    pedoop(&["simulate", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

#[test]
fn simulate_writes_csv_and_manifest_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(&config, CONFIG).unwrap();
    let (out1, out2) = (dir.path().join("a"), dir.path().join("b"));
    let r1 = simulate(&config, &out1);
    assert!(r1.status.success(), "{}", String::from_utf8_lossy(&r1.stderr));
    assert!(simulate(&config, &out2).status.success());

    let csv1 = std::fs::read(out1.join("sim2-sc1.csv")).unwrap();
    assert_eq!(csv1, std::fs::read(out2.join("sim2-sc1.csv")).unwrap());
    let text = String::from_utf8(csv1).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_COLUMNS.join(","));
    assert_eq!(lines.len(), 7);
    assert!(lines[1].starts_with("1,15,0.03,0.2,0.5080,"));
    assert!(lines[6].starts_with("control,,0.17,0.2,0.4520,"));

    let manifest: RunManifest =
        serde_json::from_str(&std::fs::read_to_string(out1.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.config_sha256, sha256_hex(CONFIG.as_bytes()));
    assert_eq!(manifest.master_seed, 42);
    assert_eq!(manifest.scenarios[0].csv, "sim2-sc1.csv");
}

#[test]
fn missing_master_seed_fails_naming_field() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(&config, CONFIG.replace("master_seed = 42\n", "")).unwrap();
    let r = simulate(&config, &dir.path().join("out"));
    assert!(!r.status.success());
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("master_seed"), "{err}");
    assert!(err.contains("line"), "{err}");
}

#[test]
fn validate_reports_and_fails_on_perturbation() {
    let ok = pedoop(&["validate"]);
    assert!(ok.status.success());
    let report = String::from_utf8_lossy(&ok.stdout);
    assert_eq!(report.lines().filter(|l| l.starts_with("PASS")).count(), 7);
    assert!(report.contains("observed") && report.contains("expected"));

    let bad = pedoop(&["validate", "--perturb-eta", "1e-6"]);
    assert!(!bad.status.success());
    let report = String::from_utf8_lossy(&bad.stdout);
    let failed: Vec<&str> = report.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(failed.len(), 1);
    assert!(failed[0].contains("eta_closed_form"));
}
