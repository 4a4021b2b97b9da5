use std::path::Path;
use std::process::{Command, Output};

fn wgnls(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wgnls")).args(args).arg("--out").arg(out).env_remove("WGNLS_OUT").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn passing_run_appends_record_and_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let o = wgnls(dir.path(), &["schedule", "--set", "n_max=4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("records.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 1);
    let names: Vec<String> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    assert!(names.iter().any(|n| n.starts_with("schedule-") && n.ends_with(".csv")));
    assert!(names.iter().any(|n| n == "records.times.jsonl"));
}

#[test]
fn records_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["simulate", "--set", "t_end=1.0", "--set", "seed=3"];
    assert_eq!(code(&wgnls(a.path(), &args)), 0);
    assert_eq!(code(&wgnls(b.path(), &args)), 0);
    let ra = std::fs::read(a.path().join("records.jsonl")).unwrap();
    let rb = std::fs::read(b.path().join("records.jsonl")).unwrap();
    assert_eq!(ra, rb);
}

#[test]
fn failing_check_exits_one_and_report_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let o = wgnls(dir.path(), &["stationary-phase", "--set", "scale_with_s=false", "--set", "hi=8"]);
    assert_eq!(code(&o), 1);
    let r = wgnls(dir.path(), &["report"]);
    assert_eq!(code(&r), 1);
    assert!(String::from_utf8_lossy(&r.stdout).contains("stationary-phase: slope"));
    assert!(dir.path().join("summary.csv").exists());
}

#[test]
fn empty_report_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = wgnls(dir.path(), &["report"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("0 records"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&wgnls(dir.path(), &["schedule", "--set", "nope=1"])), 2);
    assert_eq!(code(&wgnls(dir.path(), &["schedule", "--set", "delta"])), 2);
    assert_eq!(code(&wgnls(dir.path(), &["schedule", "--set", "delta=0.5"])), 2);
    assert_eq!(code(&wgnls(dir.path(), &["no-such-command"])), 2);
    assert_eq!(code(&wgnls(dir.path(), &["schedule", "--config", "missing.toml"])), 2);
}

#[test]
fn numerical_abort_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = wgnls(dir.path(), &["compare-effective", "--set", "epsilon=40.0", "--set", "windows=[1]"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn config_file_sections_and_overrides_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("enum.toml");
    std::fs::write(&cfg, "k_outer = 2\n[quasi]\nm = 2.0\nk_inner = 1\n").unwrap();
    let o = wgnls(dir.path(), &["enum-resonances", "--config", cfg.to_str().unwrap(), "--set", "quasi.tail_norm=\"max\""]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rec: serde_json::Value =
        serde_json::from_str(std::fs::read_to_string(dir.path().join("records.jsonl")).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(rec["config"]["k_outer"], 2);
    assert_eq!(rec["config"]["quasi"]["tail_norm"], "max");
    assert_eq!(rec["config"]["quasi"]["m"], 2.0);
}

#[test]
fn simulate_writes_snapshots_when_states_are_kept() {
    let dir = tempfile::tempdir().unwrap();
    let o = wgnls(dir.path(), &["simulate", "--set", "t_end=2.0", "--set", "keep_states=true"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let snaps = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).find(|p| p.is_dir()).unwrap();
    let first = snaps.join("state-0000.wgsf");
    let field = wgnls::fields::read_snapshot(&first).unwrap();
    assert_eq!(field.lattice.dim, 2);
    assert_eq!(field.lattice.radius, 8);
}

#[test]
fn env_var_sets_output_root() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_wgnls")).args(["schedule", "--set", "n_max=2"]).env("WGNLS_OUT", dir.path()).output().unwrap();
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("records.jsonl").exists());
}
