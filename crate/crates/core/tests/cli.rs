use std::path::Path;
use std::process::Command;

use atfield::cli::check_report;
use atfield::io::read_state_csv;

fn atfield(args: &[&str], dir: &Path) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_atfield")).args(args).current_dir(dir).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn solve_then_check_and_variations() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = atfield(
        &["solve", "--a", "1", "--length", "2", "--eps", "0.05", "--n", "512", "--out", "s.csv", "--report", "s.json"],
        dir.path(),
    );
    assert_eq!(code, 0, "{err}");
    let state = read_state_csv(&dir.path().join("s.csv")).unwrap();
    assert_eq!(state.grid().n_cells(), 512);

    let (code, err) = atfield(&["check", "--state", "s.csv", "--out", "c.json"], dir.path());
    assert_eq!(code, 0, "{err}");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("c.json")).unwrap()).unwrap();
    assert_eq!(json["critical"], serde_json::Value::Bool(true));
    assert_eq!(json["criticality"]["branch"], "affine");

    // the reloaded state reproduces the report of the in-memory one
    let again = read_state_csv(&dir.path().join("s.csv")).unwrap();
    let a = serde_json::to_string(&check_report(&state, 1.0, 1e-8).unwrap()).unwrap();
    let b = serde_json::to_string(&check_report(&again, 1.0, 1e-8).unwrap()).unwrap();
    assert_eq!(a, b);

    let (code, err) = atfield(&["variations", "--state", "s.csv", "--out", "v.json"], dir.path());
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("v.json")).unwrap()).unwrap();
    assert!(v["first_gap"].as_f64().unwrap() < 1e-5);
}

#[test]
fn under_resolved_sweep_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[sweep]\nbranch = \"affine\"\neps_list = [0.05]\na = 1.0\nlength = 2.0\ngrid = { cells = 100 }\n";
    std::fs::write(dir.path().join("sweep.toml"), cfg).unwrap();
    let (code, err) = atfield(&["sweep", "--config", "sweep.toml", "--out-dir", "out"], dir.path());
    assert_eq!(code, 2);
    assert!(err.contains("h/eps = 0.4000"), "{err}");
}

#[test]
fn unknown_keys_and_bad_flags_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "[sweep]\nbranch = \"affine\"\nbogus = 1\n").unwrap();
    let (code, _) = atfield(&["sweep", "--config", "bad.toml"], dir.path());
    assert_eq!(code, 2);
    let (code, _) = atfield(&["solve", "--a", "1"], dir.path());
    assert_eq!(code, 2);
    let (code, _) = atfield(&["frobnicate"], dir.path());
    assert_eq!(code, 2);
}

#[test]
fn small_affine_sweep_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[sweep]\nbranch = \"affine\"\neps_list = [0.2, 0.1, 0.05]\na = 1.0\nlength = 2.0\ngrid = { cells_per_eps = 16.0 }\n\n[limits]\nc0 = 0.2\nd0 = 0.2\nat_limit_rel = 0.2\n";
    std::fs::write(dir.path().join("sweep.toml"), cfg).unwrap();
    let (code, err) = atfield(&["sweep", "--config", "sweep.toml", "--out-dir", "out"], dir.path());
    assert!(code == 0 || code == 1, "{err}");
    let out = dir.path().join("out");
    for f in ["summary.json", "sweep.dat", "sweep.gp", "state_eps_0p05.csv", "profile_eps_0p1.dat"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let s: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["records"].as_array().unwrap().len(), 3);
    assert!(s["at_limit"].as_f64().is_some());
}

#[test]
fn jump_solve_with_large_eps_is_a_solver_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = atfield(
        &["solve", "--a", "1", "--length", "2", "--eps", "0.08", "--n", "400", "--branch", "jump", "--out", "j.csv"],
        dir.path(),
    );
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("alpha-condition"), "{err}");
}

#[test]
fn shipped_configs_parse_and_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = atfield::cli::ConfigFile::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            if let Some(s) = &cfg.sweep {
                s.validate().unwrap();
            }
            seen += 1;
        }
    }
    assert!(seen >= 4);
}
