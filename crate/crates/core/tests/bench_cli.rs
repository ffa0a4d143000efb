use std::process::Command;

use semmec::bench::{emit_csv, load_scenario, run_sweep, Algorithm, Scenario, Sweep, SweepParam};
use semmec::model::reference_scenario;

const TABLE1: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/table1.toml");

fn semmec() -> Command {
    Command::new(env!("CARGO_BIN_EXE_semmec"))
}

#[test]
fn committed_scenario_is_the_reference_setup() {
    let s = load_scenario(TABLE1).unwrap();
    let (tds, cfg) = reference_scenario(10);
    assert_eq!(s.system, cfg);
    assert_eq!(s.devices, tds);
}

#[test]
fn canonical_dump_reloads_equal() {
    let s = load_scenario(TABLE1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dump.toml");
    std::fs::write(&path, s.to_toml()).unwrap();
    assert_eq!(load_scenario(&path).unwrap(), s);
}

#[test]
fn missing_file_is_an_io_error() {
    assert!(load_scenario("/nonexistent/scenario.toml").is_err());
}

#[test]
fn energy_sweep_is_non_increasing() {
    let s = load_scenario(TABLE1).unwrap();
    let sweep = Sweep {
        param: SweepParam::EnergyBudget,
        values: vec![0.3, 0.4, 0.5, 0.6, 0.7],
    };
    let out = run_sweep(&s, &sweep, &Algorithm::ALL, None);
    assert!(out.failures.is_empty());
    for a in Algorithm::ALL {
        let d: Vec<f64> = out.results.iter().filter(|r| r.algorithm == a).map(|r| r.max_delay_s).collect();
        assert!(d.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{a}: {d:?}");
    }
}

#[test]
fn csv_files_are_byte_identical() {
    let s = Scenario::from_toml_str("[channel]\ndistance_range_m = [120.0, 255.0]\nfading_seed = 3\n").unwrap();
    let sweep: Sweep = "beta_min=1.0,0.8,0.6".parse().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    emit_csv(&run_sweep(&s, &sweep, &Algorithm::ALL, Some(4)).results, &a).unwrap();
    emit_csv(&run_sweep(&s, &sweep, &Algorithm::ALL, Some(4)).results, &b).unwrap();
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 10);
}

#[test]
fn cli_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let status = semmec()
        .args(["--scenario", TABLE1, "--sweep", "energy_budget=0.3,0.5", "--verify"])
        .args(["--algorithm", "semantic", "--algorithm", "local", "--eps-outer", "1e-7"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("swept_param,value,algorithm,max_delay_s"));
    let sidecar = std::fs::read_to_string(dir.path().join("run.config.toml")).unwrap();
    assert!(sidecar.contains("# sweep = energy_budget=0.3,0.5"));
    assert!(sidecar.contains("eps_outer = 1e-7") || sidecar.contains("eps_outer = 0.0000001"));
    let replay = Scenario::from_toml_str(&sidecar).unwrap();
    assert_eq!(replay.system.eps_outer, 1e-7);
}

#[test]
fn cli_reports_failed_cells() {
    let output = semmec()
        .args(["--scenario", TABLE1, "--sweep", "beta_min=0.7,1.5", "--algorithm", "no-semantic"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("1 cell(s) failed"), "{stderr}");
    assert!(stderr.contains("beta_min=1.5"), "{stderr}");
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 2);
}

#[test]
fn cli_rejects_bad_input() {
    let output = semmec().args(["--scenario", TABLE1, "--sweep", "nope=1"]).output().unwrap();
    assert!(!output.status.success());
    let output = semmec()
        .args(["--scenario", "/nonexistent.toml", "--sweep", "sem_a=1e-5"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}
