use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fuzzswitch"))
}

fn assets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../assets")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

const SMALL_SCENARIO: &str = r#"
name = "cli-test"
threshold_k = 3

[thermal]
ambient_c = 25.0
heat_gain_c_per_gu = 0.4
alpha = 0.02

[[models]]
label = "small"
base_load = 30.0
per_target_load = 0.2
recall_curve = [[0.0, 0.8], [200.0, 0.5]]

[[models]]
label = "medium"
base_load = 45.0
per_target_load = 0.2
recall_curve = [[0.0, 0.9], [200.0, 0.7]]

[[models]]
label = "large"
base_load = 60.0
per_target_load = 0.2
recall_curve = [[0.0, 0.97], [200.0, 0.9]]

[trace]
[[trace.segments]]
frames = 80
base_nt = 12.0
osc_amplitude = 3.0
osc_period = 25.0
"#;

fn write_scenario(dir: &Path) -> PathBuf {
    let path = dir.join("scenario.toml");
    fs::write(&path, SMALL_SCENARIO).unwrap();
    path
}

#[test]
fn eval_busy_hot_sample_picks_small() {
    let out = run(&["eval", "--gu", "90", "--gt", "90", "--nt", "150"]);
    let doc = stdout_json(&out);
    assert_eq!(doc["model"], "small");
    assert!(doc["score"].as_f64().unwrap() < 37.5);
    assert!(!doc["fired"].as_array().unwrap().is_empty());
}

#[test]
fn eval_idle_cool_crowded_sample_picks_large() {
    let out = run(&["eval", "--gu", "0", "--gt", "20", "--nt", "150"]);
    let doc = stdout_json(&out);
    assert_eq!(doc["model"], "large");
    assert!(doc["score"].as_f64().unwrap() > 62.5);
}

#[test]
fn eval_reports_clamping_but_still_decides() {
    let out = run(&["eval", "--gu", "500", "--gt", "30", "--nt", "10"]);
    let doc = stdout_json(&out);
    let clamped = doc["clamped"].as_array().unwrap();
    assert_eq!(clamped.len(), 1);
    assert_eq!(clamped[0]["variable"], "GU");
    assert_eq!(clamped[0]["clamped"], 100.0);
    assert!(doc["model"].is_string());
}

#[test]
fn eval_missing_flag_is_a_usage_error() {
    let out = run(&["eval", "--gu", "50", "--gt", "40"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn eval_with_sparse_rules_can_fire_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("sparse.frb");
    let builtin = fs::read_to_string(assets().join("default.frb")).unwrap();
    let (head, _) = builtin.split_once("rule:").unwrap();
    fs::write(
        &rules,
        format!("{head}rule: IF GU is L AND GT is L AND NT is L THEN Score is S\n"),
    )
    .unwrap();
    let out = bin()
        .args(["eval", "--gu", "90", "--gt", "90", "--nt", "150", "--rules"])
        .arg(&rules)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no rule fired"));
}

#[test]
fn simulate_pinned_arm_never_switches() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path());
    let out_csv = dir.path().join("run.csv");
    let out = bin()
        .arg("simulate")
        .arg("--scenario")
        .arg(&scenario)
        .arg("--out")
        .arg(&out_csv)
        .args(["--arm", "small"])
        .output()
        .unwrap();
    let doc = stdout_json(&out);
    assert_eq!(doc["arm"]["summary"]["switch_count"], 0);
    assert!(out_csv.exists());
}

#[test]
fn simulate_seeded_runs_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path());
    let mut logs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out_csv = dir.path().join(name);
        let out = bin()
            .arg("simulate")
            .arg("--scenario")
            .arg(&scenario)
            .arg("--out")
            .arg(&out_csv)
            .args(["--seed", "42"])
            .output()
            .unwrap();
        assert!(out.status.success());
        logs.push(fs::read(&out_csv).unwrap());
    }
    assert_eq!(logs[0], logs[1]);
}

#[test]
fn simulate_unknown_arm_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path());
    let out = bin()
        .arg("simulate")
        .arg("--scenario")
        .arg(&scenario)
        .arg("--out")
        .arg(dir.path().join("x.csv"))
        .args(["--arm", "tiny"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown arm"));
}

#[test]
fn simulate_all_arms_writes_one_log_per_arm() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path());
    let out = bin()
        .arg("simulate")
        .arg("--scenario")
        .arg(&scenario)
        .arg("--out")
        .arg(dir.path().join("run.csv"))
        .arg("--all-arms")
        .output()
        .unwrap();
    let doc = stdout_json(&out);
    let arms = doc["arms"].as_array().unwrap();
    assert_eq!(arms.len(), 4);
    for name in [
        "run.adaptive.csv",
        "run.small.csv",
        "run.medium.csv",
        "run.large.csv",
    ] {
        assert!(dir.path().join(name).exists(), "missing {name}");
    }
}

#[test]
fn report_summarizes_a_written_log() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path());
    let out_csv = dir.path().join("run.csv");
    let sim = bin()
        .arg("simulate")
        .arg("--scenario")
        .arg(&scenario)
        .arg("--out")
        .arg(&out_csv)
        .output()
        .unwrap();
    assert!(sim.status.success());

    let out = bin()
        .arg("report")
        .arg("--in")
        .arg(&out_csv)
        .args(["--bins", "20"])
        .output()
        .unwrap();
    let doc = stdout_json(&out);
    assert_eq!(
        doc["summary"]["switch_histogram"].as_array().unwrap().len(),
        4
    );
    let hist_total: u64 = doc["summary"]["switch_histogram"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["count"].as_u64().unwrap())
        .sum();
    assert_eq!(hist_total, doc["summary"]["switch_count"].as_u64().unwrap());
    assert_eq!(doc["series"]["frame"].as_array().unwrap().len(), 80);
    assert_eq!(doc["series"]["gt"].as_array().unwrap().len(), 80);
    assert_eq!(doc["series"]["model"].as_array().unwrap().len(), 80);
}

#[test]
fn report_rejects_header_only_log() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    fs::write(&path, "frame,model,gu,gt,nt_true,nt_obs,score,switched\n").unwrap();
    let out = bin().arg("report").arg("--in").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty log"));
}

#[test]
fn check_rules_on_shipped_table_is_complete() {
    let out = bin()
        .args(["check-rules", "--pretty", "--rules"])
        .arg(assets().join("default.frb"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("27/27 covered, 0 conflicts"));
}

#[test]
fn check_rules_warns_about_gaps_but_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("gappy.frb");
    let builtin = fs::read_to_string(assets().join("default.frb")).unwrap();
    let gappy = builtin.replace(
        "rule: IF GU is M AND GT is M AND NT is M THEN Score is M\n",
        "",
    );
    fs::write(&rules, gappy).unwrap();
    let out = bin()
        .args(["check-rules", "--pretty", "--rules"])
        .arg(&rules)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("26/27 covered"));
    assert!(text.contains("warning: no rule for"));
}

#[test]
fn check_rules_rejects_conflicts() {
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("conflict.frb");
    let builtin = fs::read_to_string(assets().join("default.frb")).unwrap();
    let conflicted = format!("{builtin}rule: IF GU is L AND GT is L AND NT is L THEN Score is S\n");
    fs::write(&rules, conflicted).unwrap();
    let out = bin()
        .args(["check-rules", "--rules"])
        .arg(&rules)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("conflict"));
}

#[test]
fn unseeded_adaptive_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path());
    let mut logs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out_csv = dir.path().join(name);
        let out = bin()
            .arg("simulate")
            .arg("--scenario")
            .arg(&scenario)
            .arg("--out")
            .arg(&out_csv)
            .output()
            .unwrap();
        assert!(out.status.success());
        logs.push(fs::read(&out_csv).unwrap());
    }
    assert_eq!(logs[0], logs[1]);
}
