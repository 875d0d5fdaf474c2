use std::path::Path;
use std::process::{Command, Output};

fn mixlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixlab"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn column(csv: &Path, idx: usize) -> Vec<f64> {
    std::fs::read_to_string(csv)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

fn only_csv(dir: &Path) -> std::path::PathBuf {
    let mut csvs: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    assert_eq!(csvs.len(), 1, "{csvs:?}");
    csvs.pop().unwrap()
}

#[test]
fn kolmogorov_square_box_unit_wavenumber_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = mixlab(&["simulate", "--model", "kolmogorov", "--L", "1", "--k", "1", "--nu", "1e-3", "--out", d]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("wavenumber constraint"));
}

#[test]
fn inviscid_spiral_keeps_energy() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = mixlab(&[
        "simulate", "--model", "spiral", "--alpha", "1", "--k", "1", "--nu", "0", "--t-end", "20", "--resolution",
        "6.4e1", "--out", d,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let h = column(&only_csv(dir.path()), 1);
    assert!(h.len() > 10);
    for v in &h {
        assert!((v - h[0]).abs() < 1e-12 * h[0]);
    }
    assert!(dir.path().read_dir().unwrap().any(|e| e.unwrap().path().extension().is_some_and(|e| e == "json")));
}

#[test]
fn viscous_shear_energy_decreases() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = mixlab(&[
        "simulate", "--model", "shear", "--profile", "sin", "--gamma", "2", "--k", "1", "--nu", "1e-4",
        "--t-end", "50", "--resolution", "64", "--out", d,
    ]);
    assert!(out.status.success());
    let h = column(&only_csv(dir.path()), 1);
    assert!(h.windows(2).all(|w| w[1] <= w[0]));
    assert!(h[h.len() - 1] < h[0]);
}

#[test]
fn report_on_empty_directory_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = mixlab(&["report", dir.path().to_str().unwrap()]);
    assert_ne!(out.status.code(), Some(0));
    assert!(!dir.path().join("report.json").exists());
}

#[test]
fn report_recovers_synthetic_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("model,alpha,gamma,n0,k,nu,tau,q_pred,status\n");
    for i in 0..8 {
        let nu = 1e-6 * 10f64.powf(3.0 * i as f64 / 7.0);
        csv += &format!("shear,,2,1,1,{nu:e},{:e},0.5,completed\n", nu.powf(-0.6));
    }
    std::fs::write(dir.path().join("sweep.csv"), csv).unwrap();
    let out = mixlab(&["report", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep: serde_json::Value =
        serde_json::from_reader(std::fs::File::open(dir.path().join("report.json")).unwrap()).unwrap();
    let q = rep["groups"][0]["q_meas"].as_f64().unwrap();
    assert!((q - 0.6).abs() < 1e-3, "{q}");
    assert_eq!(rep["groups"][0]["q_pred"].as_f64(), Some(0.5));
    assert!(String::from_utf8_lossy(&out.stdout).contains("q_meas = 0.600"));
}

#[test]
fn heat_sweep_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = mixlab(&[
        "ed-sweep", "--model", "heat", "--nu-min", "1e-3", "--nu-max", "1e-1", "--nu-count", "4", "--resolution", "16",
        "--workers", "1", "--out", d,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("q_meas = 1.0000"));
    let out = mixlab(&["report", "--out", d]);
    assert!(out.status.success());
    assert!(dir.path().join("report.json").exists());
    assert!(dir.path().join("group0_tau.svg").exists());
}

#[test]
fn sweep_config_file_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out_dir = dir.path().join("run");
    std::fs::write(
        &cfg,
        format!(r#"{{"family": "heat", "nu": [0.1, 0.01], "resolution": 8, "output": {:?}}}"#, out_dir),
    )
    .unwrap();
    let out = mixlab(&["ed-sweep", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("sweep.csv").exists());
}

#[test]
fn unresolved_sweep_rows_exit_numerical() {
    let dir = tempfile::tempdir().unwrap();
    let out = mixlab(&[
        "ed-sweep", "--model", "heat", "--nu-min", "1e-2", "--nu-max", "1e-1", "--nu-count", "2", "--t-end-factor",
        "1e-2", "--resolution", "8", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mix_rate_of_unit_spiral() {
    let dir = tempfile::tempdir().unwrap();
    let out = mixlab(&["mix-rate", "--model", "spiral", "--alpha", "1", "--resolution", "256", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let p: f64 = stdout.lines().find_map(|l| l.strip_prefix("p ")).unwrap().trim().parse().unwrap();
    assert!((p - 1.0).abs() < 0.1, "{p}");
}

#[test]
fn verify_bound_reports_a_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let sim = mixlab(&[
        "simulate", "--model", "spiral", "--alpha", "1", "--nu", "1e-2", "--t-end", "200", "--resolution", "64", "--out", d,
    ]);
    assert!(sim.status.success());
    let trace = only_csv(dir.path());
    let out = mixlab(&["verify-bound", "--trace", trace.to_str().unwrap(), "--p", "1", "--a", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("verdict   pass"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(mixlab(&["simulate", "--model", "shear"]).status.code(), Some(1));
    assert_eq!(mixlab(&["simulate", "--model", "nope", "--nu", "1"]).status.code(), Some(1));
    assert_eq!(mixlab(&["simulate", "--model", "shear", "--nu", "1e-3", "--resolution", "1.5"]).status.code(), Some(1));
    assert_eq!(mixlab(&["--help"]).status.code(), Some(0));
}
