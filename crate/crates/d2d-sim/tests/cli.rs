use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use d2d_sim::power::{AgentState, TrainedPolicy};

const BIN: &str = env!("CARGO_BIN_EXE_d2d-sim");

const TINY_CONFIG: &str = "\
num_cues = 4
num_d2d_pairs = 2
episodes = 1
steps_per_episode = 5
hidden_width = 8
eval_topologies = 2
eval_steps = 2
d2d_counts = 2, 3
seeds = 1, 2
";

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path) -> String {
    let path = dir.join("exp.conf");
    fs::write(&path, TINY_CONFIG).unwrap();
    path.to_str().unwrap().to_owned()
}

fn strip_wall_time(csv: &str) -> String {
    csv.lines()
        .map(|line| line.rsplit_once(',').unwrap().0)
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn help_lists_subcommands() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for sub in ["train", "eval", "sweep"] {
        assert!(text.contains(sub), "help is missing {sub}");
    }
}

#[test]
fn sweep_writes_expected_rows_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let csv_a = dir.path().join("a.csv");
    let csv_b = dir.path().join("b.csv");

    for csv in [&csv_a, &csv_b] {
        let out = run(&["sweep", "--config", &config, "--out", csv.to_str().unwrap()]);
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    }

    let a = fs::read_to_string(&csv_a).unwrap();
    let b = fs::read_to_string(&csv_b).unwrap();
    // 2 D values x 2 seeds x 3 algorithms + header
    assert_eq!(a.lines().count(), 13);
    assert!(a.starts_with(
        "algorithm,d2d_count,seed,system_throughput_bps_hz,d2d_throughput_bps_hz,cue_qos_rate,wall_time_s\n"
    ));
    assert_eq!(strip_wall_time(&a), strip_wall_time(&b));
}

#[test]
fn sweep_flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let csv = dir.path().join("one.csv");
    let out = run(&[
        "sweep",
        "--config",
        &config,
        "--seed",
        "9",
        "--d2d",
        "2",
        "--algo",
        "max_power",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("max_power,2,9,"));
}

#[test]
fn train_then_eval_roundtrips_a_model() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let model = dir.path().join("policy.dqn");

    let out = run(&[
        "train",
        "--config",
        &config,
        "--seed",
        "3",
        "--episodes",
        "2",
        "--out",
        model.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(model.exists());
    let policy = TrainedPolicy::load(&model).unwrap();
    assert_eq!(policy.num_networks(), 1);
    policy.greedy_actions(&AgentState { normalized_cue_sinr: vec![0.5; 4] }, 2).unwrap();

    let row_csv = dir.path().join("eval.csv");
    let out = run(&[
        "eval",
        "--config",
        &config,
        "--algo",
        "dqn",
        "--model",
        model.to_str().unwrap(),
        "--out",
        row_csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("system_throughput_bps_hz:"));
    assert!(text.contains("cue_qos_rate:"));
    let csv = fs::read_to_string(&row_csv).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("dqn,2,1,"));
}

#[test]
fn eval_baseline_needs_no_model() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = run(&["eval", "--config", &config, "--algo", "olpc"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn eval_dqn_without_model_fails_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = run(&["eval", "--config", &config, "--algo", "dqn"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--model"));
}

#[test]
fn missing_config_fails_with_path_in_diagnostic() {
    let out = run(&["sweep", "--config", "/no/such/file.conf"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/file.conf"));
}

#[test]
fn unknown_algorithm_is_rejected_at_parse_time() {
    let out = run(&["eval", "--algo", "genie"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("genie"));
}
