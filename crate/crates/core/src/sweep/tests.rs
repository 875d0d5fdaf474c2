use super::*;

fn heat_cfg(dir: &Path, nus: &[f64]) -> SweepConfig {
    let mut cfg = SweepConfig::new(Family::Heat, dir);
    cfg.nu = NuSpec::List(nus.to_vec());
    cfg.resolution = Some(16);
    cfg
}

#[test]
fn empty_nu_list_gives_empty_result() {
    let dir = tempfile::tempdir().unwrap();
    let res = run_sweep(&heat_cfg(dir.path(), &[]), Some(1)).unwrap();
    assert!(res.rows.is_empty());
    let text = std::fs::read_to_string(dir.path().join(SWEEP_CSV)).unwrap();
    assert_eq!(text.trim(), HEADER);
    assert!(SweepResult::load(dir.path()).unwrap().rows.is_empty());
}

#[test]
fn heat_tau_scales_inversely_with_nu() {
    let dir = tempfile::tempdir().unwrap();
    let res = run_sweep(&heat_cfg(dir.path(), &[0.1, 0.01]), Some(1)).unwrap();
    assert_eq!(res.rows.len(), 2);
    assert!(res.rows.iter().all(|r| r.status == RowStatus::Completed));
    let (a, b) = (res.rows[0].tau.unwrap(), res.rows[1].tau.unwrap());
    assert!((b / a - 10.0).abs() < 1e-3, "ratio {}", b / a);
    assert_eq!(res.rows[0].q_pred, Some(1.0));
    for row in &res.rows {
        assert!(res.trace_path(row).unwrap().exists());
    }
}

#[test]
fn reruns_are_bit_identical() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let nus = [0.2, 0.05, 0.01];
    let r1 = run_sweep(&heat_cfg(d1.path(), &nus), Some(1)).unwrap();
    let r2 = run_sweep(&heat_cfg(d2.path(), &nus), Some(1)).unwrap();
    assert_eq!(r1.rows, r2.rows);
    let read = |d: &Path| std::fs::read(d.join(SWEEP_CSV)).unwrap();
    assert_eq!(read(d1.path()), read(d2.path()));
    for (a, b) in r1.rows.iter().zip(&r2.rows) {
        let ta = std::fs::read(r1.trace_path(a).unwrap()).unwrap();
        let tb = std::fs::read(r2.trace_path(b).unwrap()).unwrap();
        assert_eq!(ta, tb);
    }
}

#[test]
fn worst_case_rows_are_deterministic_for_a_seed() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = |d: &Path| {
        let mut c = SweepConfig::new(Family::Shear, d);
        c.nu = NuSpec::List(vec![1e-2]);
        c.resolution = Some(32);
        c.datum = Some(InitialDatum::WorstCase);
        c.seed = 7;
        c
    };
    run_sweep(&cfg(d1.path()), Some(1)).unwrap();
    run_sweep(&cfg(d2.path()), Some(1)).unwrap();
    let read = |d: &Path| std::fs::read(d.join(SWEEP_CSV)).unwrap();
    assert_eq!(read(d1.path()), read(d2.path()));
}

#[test]
fn interrupted_sweep_resumes_to_the_same_result() {
    let (full, part) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let nus = [0.3, 0.1, 0.03, 0.01];
    let reference = run_sweep(&heat_cfg(full.path(), &nus), Some(1)).unwrap();

    // a run killed after two rows leaves a prefix of the file behind
    run_sweep(&heat_cfg(part.path(), &nus[..2]), Some(1)).unwrap();
    let kept = SweepResult::load(part.path()).unwrap();
    assert_eq!(kept.rows.len(), 2);
    let trace0 = kept.trace_path(&kept.rows[0]).unwrap();
    let stamp = std::fs::metadata(&trace0).unwrap().modified().unwrap();

    let resumed = run_sweep(&heat_cfg(part.path(), &nus), Some(1)).unwrap();
    assert_eq!(resumed.rows, reference.rows);
    assert_eq!(
        std::fs::read(full.path().join(SWEEP_CSV)).unwrap(),
        std::fs::read(part.path().join(SWEEP_CSV)).unwrap()
    );
    // completed rows were reused, not recomputed
    assert_eq!(std::fs::metadata(&trace0).unwrap().modified().unwrap(), stamp);
}

#[test]
fn rows_with_missing_traces_are_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = heat_cfg(dir.path(), &[0.1]);
    let first = run_sweep(&cfg, Some(1)).unwrap();
    std::fs::remove_file(first.trace_path(&first.rows[0]).unwrap()).unwrap();
    let second = run_sweep(&cfg, Some(1)).unwrap();
    assert_eq!(first.rows, second.rows);
    assert!(second.trace_path(&second.rows[0]).unwrap().exists());
}

#[test]
fn failing_rows_do_not_abort_the_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = SweepConfig::new(Family::Kolmogorov, dir.path());
    cfg.nu = NuSpec::List(vec![1e-2]);
    cfg.l = Some(1.0);
    cfg.resolution = Some(16);
    let res = run_sweep(&cfg, Some(1)).unwrap();
    assert_eq!(res.rows.len(), 1);
    assert_eq!(res.rows[0].status, RowStatus::Failed);
    assert!(res.rows[0].message.is_some());
    assert_eq!(res.completed().count(), 0);
}

#[test]
fn short_horizon_leaves_rows_unresolved() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = heat_cfg(dir.path(), &[0.1]);
    cfg.t_end_factor = 0.01;
    let res = run_sweep(&cfg, Some(1)).unwrap();
    assert_eq!(res.rows[0].status, RowStatus::Unresolved);
    assert_eq!(res.rows[0].tau, None);
    let loaded = SweepResult::load(dir.path()).unwrap();
    assert_eq!(loaded.rows[0].status, RowStatus::Unresolved);
}

#[test]
fn load_requires_a_sweep_file() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(SweepResult::load(dir.path()), Err(Error::InsufficientData(_))));
}

#[test]
fn expand_orders_parameters_with_nu_innermost() {
    let mut cfg = SweepConfig::new(Family::Spiral, "out");
    cfg.alpha = vec![1.0, 4.0];
    cfg.k = vec![1, 2];
    cfg.nu = NuSpec::List(vec![1e-2, 1e-3]);
    let rows = expand(&cfg);
    assert_eq!(rows.len(), 8);
    let seen: Vec<(f64, i64, f64)> = rows.iter().map(|r| (r.alpha.unwrap(), r.k, r.nu)).collect();
    assert_eq!(seen[0], (1.0, 1, 1e-2));
    assert_eq!(seen[1], (1.0, 1, 1e-3));
    assert_eq!(seen[2], (1.0, 2, 1e-2));
    assert_eq!(seen[7], (4.0, 2, 1e-3));
    let keys: std::collections::HashSet<String> = rows.iter().map(RowParams::key).collect();
    assert_eq!(keys.len(), rows.len());
    assert_eq!(rows.iter().map(|r| r.group_label()).collect::<std::collections::HashSet<_>>().len(), 4);
}

#[test]
fn shear_rows_carry_defaults() {
    let mut cfg = SweepConfig::new(Family::Shear, "out");
    cfg.nu = NuSpec::List(vec![1e-6]);
    let rows = expand(&cfg);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].gamma, Some(2.0));
    assert_eq!(rows[0].n0, Some(1));
    assert_eq!(rows[0].key(), "shear_ax_g2_n1_k1_nu1.000000e-6");
}

#[test]
fn log_spaced_hits_both_ends() {
    let v = log_spaced(1e-6, 1e-3, 8);
    assert_eq!(v.len(), 8);
    assert!((v[0] - 1e-6).abs() < 1e-18);
    assert!((v[7] - 1e-3).abs() < 1e-15);
    for w in v.windows(2) {
        assert!((w[1] / w[0] - 10f64.powf(3.0 / 7.0)).abs() < 1e-12);
    }
    assert!(log_spaced(1.0, 2.0, 0).is_empty());
    assert_eq!(log_spaced(0.5, 2.0, 1), vec![0.5]);
}

#[test]
fn config_parses_from_json() {
    let cfg: SweepConfig = serde_json::from_str(
        r#"{"family": "shear", "nu": {"min": 1e-6, "max": 1e-3, "count": 8},
            "gamma": [1, 2], "datum": {"kind": "worst-case"}, "resolution": 256,
            "output": "runs/shear"}"#,
    )
    .unwrap();
    assert_eq!(cfg.family, Family::Shear);
    assert_eq!(cfg.nu, NuSpec::LogSpaced { min: 1e-6, max: 1e-3, count: 8 });
    assert_eq!(cfg.k, vec![1]);
    assert_eq!(cfg.t_end_factor, 20.0);
    assert_eq!(cfg.datum, Some(InitialDatum::WorstCase));
    assert_eq!(expand(&cfg).len(), 16);

    let listed: SweepConfig = serde_json::from_str(r#"{"family": "heat", "nu": [0.1, 0.01], "output": "o"}"#).unwrap();
    assert_eq!(listed.nu, NuSpec::List(vec![0.1, 0.01]));

    let back: SweepConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(back, cfg);
}

#[test]
fn config_rejects_unknown_fields() {
    let bad = serde_json::from_str::<SweepConfig>(r#"{"family": "heat", "nus": [0.1], "output": "o"}"#);
    assert!(bad.is_err());
}

#[test]
fn config_file_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"family": "heat", "nu": [2.0], "output": "o"}"#).unwrap();
    assert!(matches!(SweepConfig::from_file(&path), Err(Error::InvalidParameter(_))));
    std::fs::write(&path, r#"{"family": "heat", "nu": [0.5], "output": "o"}"#).unwrap();
    assert!(SweepConfig::from_file(&path).is_ok());
}

#[test]
fn validation_rejects_bad_values() {
    let base = heat_cfg(Path::new("o"), &[0.1]);
    assert!(base.validate().is_ok());
    let cases: Vec<Box<dyn Fn(&mut SweepConfig)>> = vec![
        Box::new(|c| c.nu = NuSpec::List(vec![0.0])),
        Box::new(|c| c.nu = NuSpec::List(vec![1.0])),
        Box::new(|c| c.nu = NuSpec::LogSpaced { min: 1e-2, max: 1e-3, count: 4 }),
        Box::new(|c| c.k.clear()),
        Box::new(|c| c.t_end_factor = 0.0),
        Box::new(|c| c.theta = Some(1.0)),
        Box::new(|c| c.max_samples = 2),
    ];
    for (i, f) in cases.iter().enumerate() {
        let mut c = base.clone();
        f(&mut c);
        assert!(matches!(c.validate(), Err(Error::InvalidParameter(_))), "case {i}");
        assert!(run_sweep(&c, Some(1)).is_err(), "case {i}");
    }
}

#[test]
fn bound_onset_matches_model_rate() {
    let heat = build_heat(1, 8).unwrap();
    assert_eq!(bound_onset(&heat, 1e-4), None);
    let shear = build_shear(&ShearModel { profile: Profile::Sin, n0: Some(1), gamma: 2.0, k: 1, m_max: 32 }).unwrap();
    let q = shear.predicted_q().unwrap();
    assert!((bound_onset(&shear, 1e-4).unwrap() - 1e-4f64.powf(-q)).abs() < 1e-9);
}
