//! End-to-end tests of the command-line interface on a small configuration.

use std::fs;
use std::path::Path;
use std::process::Command;

use tempfile::tempdir;

fn fracburg() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fracburg"))
}

const SMALL_CONFIG: &str = r#"
[grid]
n = 256

[equation]
alpha = 2.0
nu = 0.02

[stepper]
dt_max = 2e-3
t_end = 30.0

[monitor]
n_samples = 60

[analysis]
shift_window = [0.01, 0.2]
spectrum_range = [2, 20]
"#;

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn run_writes_all_outputs() {
    let dir = tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_CONFIG);
    let out = dir.path().join("out");
    let status = fracburg()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    for name in ["norms.csv", "structure.csv", "spectrum.csv", "fits.csv", "manifest.json", "state.fbrg"] {
        assert!(out.join(name).exists(), "missing {name}");
    }
    let norms = fs::read_to_string(out.join("norms.csv")).unwrap();
    let header = norms.lines().next().unwrap();
    assert!(header.starts_with("t,"));
    assert!(header.contains("H1"));
    assert_eq!(norms.lines().count(), 62); // header + 61 samples
}

#[test]
fn seed_check_passes_on_identical_reruns() {
    let dir = tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_CONFIG);
    let out = dir.path().join("out");
    let output = fracburg()
        .args(["run", "--seed-check", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("seed check"), "{stdout}");
    assert!(!out.join(".seed-check").exists());
}

#[test]
fn resume_continues_from_snapshot() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("out");

    // a full run, then a half run whose final snapshot seeds a resume
    let full_cfg = write_config(dir.path(), SMALL_CONFIG);
    let full_out = dir.path().join("full");
    assert!(fracburg()
        .args(["run", "--config"])
        .arg(&full_cfg)
        .arg("--out")
        .arg(&full_out)
        .status()
        .unwrap()
        .success());

    let half = SMALL_CONFIG.replace("t_end = 30.0", "t_end = 15.0").replace(
        "n_samples = 60",
        "n_samples = 30",
    );
    let half_cfg = dir.path().join("half.toml");
    fs::write(&half_cfg, half).unwrap();
    assert!(fracburg()
        .args(["run", "--config"])
        .arg(&half_cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());

    // resume to the full horizon; the final state must equal the
    // straight-through run's final state byte-for-byte
    let output = fracburg()
        .args(["run", "--resume"])
        .arg(out.join("state.fbrg"))
        .arg("--config")
        .arg(&full_cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let resumed = fs::read(out.join("state.fbrg")).unwrap();
    let straight = fs::read(full_out.join("state.fbrg")).unwrap();
    assert_eq!(resumed, straight);
}

#[test]
fn sweep_and_analyze_produce_matching_fits() {
    let dir = tempdir().unwrap();
    let body = format!("{SMALL_CONFIG}\n[sweep]\nnus = [0.02, 0.04, 0.08]\n");
    let config = write_config(dir.path(), &body);
    let out = dir.path().join("sweep");
    let output = fracburg()
        .args(["sweep", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    assert!(out.join("manifest.json").exists());
    for i in 0..3 {
        let entries: Vec<_> = fs::read_dir(&out)
            .unwrap()
            .filter_map(|e| e.ok())
            .filter(|e| e.file_name().to_string_lossy().starts_with(&format!("nu_{i:02}_")))
            .collect();
        assert_eq!(entries.len(), 1, "missing subdirectory for sweep point {i}");
        assert!(entries[0].path().join("norms.csv").exists());
    }
    let fits_before = fs::read_to_string(out.join("fits.csv")).unwrap();
    assert!(fits_before.lines().count() > 1);

    // analyze refits from the stored tables; the cross-viscosity rows must
    // reproduce the sweep's own fits exactly
    assert!(fracburg().args(["analyze", "--out"]).arg(&out).status().unwrap().success());
    let fits_after = fs::read_to_string(out.join("fits.csv")).unwrap();
    for line in fits_before.lines().skip(1).filter(|l| l.contains("_vs_nu")) {
        assert!(fits_after.contains(line), "missing refit row: {line}");
    }
}

#[test]
fn bad_config_fails_with_nonzero_exit() {
    let dir = tempdir().unwrap();
    let config = write_config(dir.path(), "[grid]\nn = 7\n[equation]\nalpha = 2.0\nnu = 0.1\n");
    let out = dir.path().join("out");
    let output = fracburg()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("grid.n"), "{stderr}");
}
