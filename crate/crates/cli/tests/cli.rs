use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn horolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_horolab")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL_REP: &str = r#"
experiment = "rep_verification"
seed = 4
det_m_max = 5
det_t = [[1, 2], [-3, 1]]
lemma_m_max = 3
t = [0.5, -2.0]
trials = 500
alphas = [2.0, 10.0]
"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn list_shows_the_fixed_registry() {
    let o = horolab(&["list", "--json"]);
    assert!(o.status.success());
    let list: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let list = list.as_array().unwrap();
    assert_eq!(list.len(), 9);
    assert_eq!(list[0]["name"], "core_equidistribution_n2");
    let plain = stdout(&horolab(&["list"]));
    assert!(plain.contains("torus_sweep") && plain.contains("exercises:"));
}

#[test]
fn run_writes_reports_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "rep.toml", SMALL_REP);
    let out = dir.path().join("out");
    let o = horolab(&["run", "--config", &config, "--out", out.to_str().unwrap(), "--threads", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], true);
    assert_eq!(summary["seed"], 4);
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(csv.starts_with("experiment,parameter,statistic,value,error_bar,relation,tolerance,pass\n"));
    assert!(out.join("violations.csv").exists());
}

#[test]
fn seed_override_and_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "rep.toml", SMALL_REP);
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("out{threads}"));
        let o = horolab(&["--threads", threads, "run", "--config", &config, "--seed", "9", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        outputs.push((fs::read(out.join("report.csv")).unwrap(), fs::read(out.join("summary.json")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert!(String::from_utf8_lossy(&outputs[0].1).contains("\"seed\": 9"));
}

#[test]
fn tolerance_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "torus.toml",
        "experiment = \"torus_sweep\"\nalpha = [10.0]\nm_max = 2\n[curve]\nkind = \"circle\"\n[tolerances]\nmax_coeff = 0.001\nfrom_alpha = 1.0\n",
    );
    let o = horolab(&["run", "--config", &config, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn config_errors_exit_two_with_a_line() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "bad.toml", &SMALL_REP.replace("trials = 500", "trials = 0"));
    let o = horolab(&["run", "--config", &config]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("line 8") && err.contains("`trials`"), "{err}");

    let typo = write(dir.path(), "typo.toml", &SMALL_REP.replace("trials", "trails"));
    let err = stderr(&horolab(&["run", "--config", &typo]));
    assert!(err.contains("trails"), "{err}");

    let missing = horolab(&["run", "--config", dir.path().join("nope.toml").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(horolab(&[]).status.code(), Some(2));
    assert_eq!(horolab(&["run"]).status.code(), Some(2));
    assert_eq!(horolab(&["run", "--experiment", "warp_drive"]).status.code(), Some(2));
    assert_eq!(horolab(&["run", "--threads", "x", "--experiment", "torus_sweep"]).status.code(), Some(2));
}

#[test]
fn verify_emits_json_lines() {
    let o = horolab(&["verify", "--m", "2,5", "--t", "-0.5,2", "--trials", "300"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let lines: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 4);
    for l in &lines {
        assert_eq!(l["det_check"], "pass");
        assert_eq!(l["violations"], 0);
        assert_eq!(l["trials"], 300);
        assert!(l["kappa"].as_f64().unwrap() > 0.0);
    }
    assert_eq!(lines[1]["t"], 2.0);
    assert_eq!(horolab(&["verify", "--m", "2", "--t", "0"]).status.code(), Some(2));
}

#[test]
fn config_subcommand_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = horolab(&["config", "torus_sweep"]);
    assert!(o.status.success());
    let path = write(dir.path(), "t.toml", &stdout(&o));
    let o = horolab(&["run", "--config", &path, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}
