use std::f64::consts::PI;
use std::fs;

use nsm_harness::{
    run_scaling_check, run_single, run_sweep, DtSpec, HarnessError, IcConfig, RunConfig, Snapshot, System,
};
use tempfile::tempdir;

fn nsm_config() -> RunConfig {
    RunConfig {
        system: System::Nsm,
        n: 16,
        t_end: 0.1,
        dt: DtSpec::Fixed(1e-2),
        sample_every: 2,
        eps: Some(1e-2),
        ..RunConfig::default()
    }
}

fn csv_rows(path: &std::path::Path) -> Vec<Vec<f64>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| rec.unwrap().iter().map(|v| v.parse::<f64>().unwrap()).collect())
        .collect()
}

#[test]
fn zero_duration_gives_the_initial_row() {
    let dir = tempdir().unwrap();
    let cfg = RunConfig {
        t_end: 0.0,
        ..nsm_config()
    };
    let out = run_single(&cfg, dir.path()).unwrap();
    let rows = csv_rows(&dir.path().join("diagnostics.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(out.summary.steps, 0);
    assert!(!out.aborted());
}

#[test]
fn outputs_are_written() {
    let dir = tempdir().unwrap();
    let cfg = RunConfig {
        snapshot_every: Some(2),
        ..nsm_config()
    };
    let out = run_single(&cfg, dir.path()).unwrap();
    for f in ["config.json", "diagnostics.csv", "summary.json"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let copy = RunConfig::load(&dir.path().join("config.json")).unwrap();
    assert_eq!(copy, cfg);
    let header = fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    let first = header.lines().next().unwrap();
    assert!(first.starts_with("t,eps,e_classical,d_classical,e1,d1,e2,d2"));
    assert_eq!(out.summary.snapshots.len(), 4);
    let snap = Snapshot::read(&dir.path().join(out.summary.snapshots.last().unwrap())).unwrap();
    assert!((snap.header.t - 0.1).abs() < 1e-15);
    assert_eq!(snap.header.fields.len(), 9);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "completed");
    assert_eq!(summary["dts"].as_array().unwrap().len(), 10);
}

#[test]
fn identical_configs_give_identical_csv() {
    let (a, b) = (tempdir().unwrap(), tempdir().unwrap());
    let cfg = RunConfig {
        ic: IcConfig {
            name: "random-smooth".into(),
            seed: 7,
            ..IcConfig::default()
        },
        ..nsm_config()
    };
    run_single(&cfg, a.path()).unwrap();
    run_single(&cfg, b.path()).unwrap();
    let read = |d: &tempfile::TempDir| fs::read(d.path().join("diagnostics.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn mhd_taylor_green_energy_decays_in_closed_form() {
    let dir = tempdir().unwrap();
    let cfg = RunConfig {
        system: System::Mhd,
        n: 32,
        t_end: 1.0,
        dt: DtSpec::Fixed(1e-3),
        sample_every: 100,
        ic: IcConfig {
            magnetic_amplitude: Some(0.0),
            ..IcConfig::default()
        },
        ..RunConfig::default()
    };
    run_single(&cfg, dir.path()).unwrap();
    let rows = csv_rows(&dir.path().join("diagnostics.csv"));
    assert_eq!(rows.len(), 11);
    for row in rows {
        // ∫|u|² = 2π² e^{−4t} for the stationary Euler vortex under unit viscosity
        let exact = 2.0 * PI * PI * (-4.0 * row[0]).exp();
        assert!((row[2] - exact).abs() <= 1e-6, "t = {}: {} vs {exact}", row[0], row[2]);
    }
}

#[test]
fn auto_step_records_the_step_sequence() {
    let dir = tempdir().unwrap();
    let cfg = RunConfig {
        system: System::Mhd,
        dt: DtSpec::AUTO,
        ..nsm_config()
    };
    let out = run_single(&cfg, dir.path()).unwrap();
    let total: f64 = out.summary.dts.iter().sum();
    assert!((total - 0.1).abs() < 1e-12);
    let h = 2.0 * PI / 16.0;
    assert!(out.summary.dts.iter().all(|&d| d <= 0.5 * h + 1e-15));
}

#[test]
fn aborted_run_keeps_partial_output() {
    let dir = tempdir().unwrap();
    let cfg = RunConfig {
        system: System::Mhd,
        dt: DtSpec::Fixed(0.5),
        t_end: 2.0,
        ..nsm_config()
    };
    let out = run_single(&cfg, dir.path()).unwrap();
    assert!(out.aborted());
    assert_eq!(csv_rows(&dir.path().join("diagnostics.csv")).len(), 1);
    let summary = fs::read_to_string(dir.path().join("summary.json")).unwrap();
    assert!(summary.contains("\"aborted\""));
}

#[test]
fn config_errors_are_reported_before_running() {
    let dir = tempdir().unwrap();
    let bad = [
        RunConfig { eps: None, ..nsm_config() },
        RunConfig { n: 9, ..nsm_config() },
        RunConfig { cutoff: Some(100.0), ..nsm_config() },
    ];
    for cfg in bad {
        let e = run_single(&cfg, dir.path()).unwrap_err();
        assert_eq!(e.exit_code(), 2, "{e}");
    }
    assert!(fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn snapshot_round_trip_and_corruption() {
    let dir = tempdir().unwrap();
    let out = run_single(&nsm_config(), dir.path()).unwrap();
    let path = dir.path().join(&out.summary.snapshots[0]);
    let snap = Snapshot::read(&path).unwrap();
    let s = snap.to_nsm_state(1.0).unwrap();
    let again = Snapshot::from_nsm(&s);
    assert_eq!(again.header.fields, snap.header.fields);
    let err = again.data.iter().zip(&snap.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-13, "{err}");

    let mut bytes = fs::read(&path).unwrap();
    let mid = bytes.len() - 100;
    bytes[mid] = bytes[mid].wrapping_add(1);
    fs::write(&path, &bytes).unwrap();
    assert!(matches!(Snapshot::read(&path), Err(HarnessError::Snapshot(_))));
}

#[test]
fn sweep_with_one_eps_has_no_fit() {
    let dir = tempdir().unwrap();
    let cfg = RunConfig {
        system: System::Sweep,
        eps: None,
        eps_list: Some(vec![1e-2]),
        ..nsm_config()
    };
    let out = run_sweep(&cfg, dir.path()).unwrap();
    assert_eq!(out.result.records().len(), 1);
    assert!(out.summary.order.u.is_none());
    let rows = csv_rows(&dir.path().join("convergence.csv"));
    assert_eq!(rows.len(), 1);
    assert!(dir.path().join("eps-1e-2").join("diagnostics.csv").is_file());
    assert!(dir.path().join("mhd").join("diagnostics.csv").is_file());
}

#[test]
fn sweep_records_descend_in_eps() {
    let dir = tempdir().unwrap();
    let cfg = RunConfig {
        system: System::Sweep,
        eps: None,
        eps_list: Some(vec![1e-1, 1e-2, 1e-3]),
        ..nsm_config()
    };
    let out = run_sweep(&cfg, dir.path()).unwrap();
    let rows = csv_rows(&dir.path().join("convergence.csv"));
    let eps: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(eps, vec![1e-1, 1e-2, 1e-3]);
    assert!(out.summary.order.u.is_some());
    assert_eq!(out.summary.failures, 0);
}

#[test]
fn scaling_check_small_m() {
    let dir = tempdir().unwrap();
    let cfg = RunConfig {
        system: System::ScalingCheck,
        n: 32,
        eps_list: Some(vec![1.0, 0.25]),
        ..RunConfig::default()
    };
    let rows = run_scaling_check(&cfg, dir.path()).unwrap();
    assert!(rows.iter().all(|r| r.pass));
    let bad = RunConfig {
        eps_list: None,
        eps: Some(0.3),
        ..cfg
    };
    assert_eq!(run_scaling_check(&bad, dir.path()).unwrap_err().exit_code(), 2);
}
