use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use kerr_magnon::config::RunConfig;
use kerr_magnon::scenarios::{read_report, ScenarioId};

fn kerr_magnon(args: &[&str], out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kerr-magnon"));
    cmd.args(args).env_remove("KERR_MAGNON_OUT");
    if let Some(dir) = out {
        cmd.env("KERR_MAGNON_OUT", dir);
    }
    cmd.output().expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn config_file() -> String {
    format!("{}/../../config/default.toml", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn rabi_run_writes_outputs_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = kerr_magnon(&["run", "rabi", "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let run = dir.path().join("rabi");
    for file in [
        "trajectory.csv",
        "trajectory.meta.json",
        "params.json",
        "report.json",
        "frame.json",
    ] {
        assert!(run.join(file).is_file(), "missing {file}");
    }
    let header = fs::read_to_string(run.join("trajectory.csv")).unwrap();
    assert!(header.starts_with("time_s,magnon,spin1,manifold,spin1_rwa"));
    assert!(text(&out.stdout).contains("PASSED rabi"));
}

#[test]
fn exit_status_matches_report() {
    let dir = tempfile::tempdir().unwrap();
    // the device-derived coupling is far too weak for the quoted window
    let out = kerr_magnon(&["run", "rabi", "--from-device"], Some(dir.path()));
    let report = read_report(&dir.path().join("rabi/report.json")).unwrap();
    assert_eq!(report.passed, report.all_passed());
    assert_eq!(out.status.code(), Some(if report.passed { 0 } else { 1 }));
    assert!(!report.passed);
}

#[test]
fn params_round_trip_to_the_same_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = kerr_magnon(
        &[
            "run",
            "battery",
            "--set",
            "battery.excitations=[1, 3]",
            "--step",
            "1e-10",
        ],
        Some(dir.path()),
    );
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let params = dir.path().join("battery/params.json");
    let saved = RunConfig::load(Some(&params), &[]).unwrap();
    assert_eq!(saved.scenario, Some(ScenarioId::Battery));
    assert_eq!(saved.battery.excitations, vec![1, 3]);
    assert_eq!(saved.numerics.step, Some(1e-10));
    assert_eq!(saved.output.dir.as_deref(), Some(dir.path()));

    // rerunning from the saved parameters reproduces the table byte for byte
    let first = fs::read(dir.path().join("battery/trajectory.csv")).unwrap();
    let again = tempfile::tempdir().unwrap();
    let out = kerr_magnon(
        &[
            "run",
            "battery",
            "--config",
            params.to_str().unwrap(),
            "--out",
            again.path().to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert_eq!(first, fs::read(again.path().join("battery/trajectory.csv")).unwrap());
}

#[test]
fn output_env_var_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let out = kerr_magnon(&["run", "coupling-sweep"], Some(dir.path()));
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(dir.path().join("coupling-sweep/sweep.csv").is_file());
}

#[test]
fn unknown_scenario_exits_two() {
    let out = kerr_magnon(&["run", "teleport"], None);
    assert_eq!(out.status.code(), Some(2));
    let all = text(&out.stdout) + &text(&out.stderr);
    assert!(all.contains("iswap-fidelity"), "lists scenarios: {all}");
}

#[test]
fn unstable_frame_reports_margin_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = kerr_magnon(
        &[
            "run",
            "rabi",
            "--set",
            "frame.source=linearized",
            "--set",
            "linearized.two_magnon_hz=6e6",
        ],
        Some(dir.path()),
    );
    assert_eq!(out.status.code(), Some(1));
    let all = text(&out.stdout) + &text(&out.stderr);
    assert!(all.contains("stability margin"), "{all}");
    assert!(all.contains("report.json"), "{all}");
    let report = read_report(&dir.path().join("rabi/report.json")).unwrap();
    assert!(report.error.is_some() && !report.passed);
    assert!(!dir.path().join("rabi/trajectory.csv").exists());
}

#[test]
fn battery_cutoff_too_small_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = kerr_magnon(&["run", "battery", "--cutoff", "6"], Some(dir.path()));
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("numerics.cutoff"));
}

#[test]
fn list_prints_every_scenario() {
    let out = kerr_magnon(&["list"], None);
    assert_eq!(out.status.code(), Some(0));
    let listing = text(&out.stdout);
    for id in ScenarioId::ALL {
        assert!(listing.contains(id.as_str()), "{id} missing");
    }
}

#[test]
fn shipped_config_validates_and_equals_defaults() {
    let out = kerr_magnon(&["validate", &config_file()], None);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let cfg = RunConfig::load(Some(Path::new(&config_file())), &[]).unwrap();
    assert_eq!(cfg, RunConfig::default());
}

#[test]
fn invalid_value_names_the_key() {
    let out = kerr_magnon(&["run", "rabi", "--set", "dissipation.gamma_q=-1"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("dissipation.gamma_q"));
}
