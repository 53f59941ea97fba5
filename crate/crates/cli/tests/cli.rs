use std::fs;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scenario-cert"))
        .args(args)
        .env_remove("SCENARIO_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn bound_single_value() {
    let out = cli(&["bound", "--m", "1", "--beta", "0.01", "--k", "0"]);
    assert!(out.status.success());
    let g: f64 = stdout(&out).trim().parse().unwrap();
    assert!((g - (1.0 - 0.01 / 1.99)).abs() < 1e-9);
    assert!(stdout(&out).starts_with("0.99497487"));

    let out = cli(&["bound", "--m", "10", "--beta", "0.01", "--k", "10"]);
    assert_eq!(stdout(&out).trim(), "1.0");
}

#[test]
fn bound_table_csv() {
    let out = cli(&["bound", "--m", "3", "--beta", "0.05"]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,t,g");
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[4], "3,,1.0");

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.csv");
    let out = cli(&["bound", "--m", "3", "--beta", "0.05", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(path).unwrap(), text);
}

#[test]
fn usage_and_domain_errors() {
    assert_eq!(cli(&["bound", "--m", "x", "--beta", "0.1"]).status.code(), Some(2));
    assert_eq!(cli(&["solve", "--problem", "unit_commitment", "--m", "3"]).status.code(), Some(2));
    assert_eq!(cli(&["bound", "--m", "3", "--beta", "1.5"]).status.code(), Some(1));
    assert_eq!(cli(&["bound", "--m", "3", "--beta", "0.1", "--k", "4"]).status.code(), Some(1));
    assert_eq!(cli(&["solve", "--problem", "nope", "--m", "3", "--seed", "1"]).status.code(), Some(1));
}

#[test]
fn seed_from_environment() {
    let with_flag = cli(&["solve", "--problem", "unit_commitment", "--m", "4", "--seed", "12"]);
    let with_env = Command::new(env!("CARGO_BIN_EXE_scenario-cert"))
        .args(["solve", "--problem", "unit_commitment", "--m", "4"])
        .env("SCENARIO_SEED", "12")
        .output()
        .unwrap();
    assert!(with_env.status.success());
    assert_eq!(with_flag.stdout, with_env.stdout);
}

#[test]
fn solve_json() {
    let out = cli(&["solve", "--problem", "unit_commitment", "--m", "5", "--seed", "3"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["point"]["u"].as_array().unwrap().len(), 5);
    assert_eq!(v["point"]["V"].as_array().unwrap().len(), 25);
    assert_eq!(v["thetas"].as_array().unwrap().len(), 5);
    let out = cli(&["solve", "--problem", "synthetic", "--m", "3", "--seed", "3"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["point"]["x"].as_array().unwrap().len(), 2);
}

#[test]
fn complexity_outputs() {
    let out = cli(&["complexity", "--problem", "unit_commitment", "--m", "20", "--seed", "5"]);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("s_star,index,theta"));
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty() && rows.len() <= 2);
    assert!(rows.iter().all(|r| r.starts_with(&format!("{},", rows.len()))));

    let out = cli(&["complexity", "--problem", "unit_commitment", "--m", "20", "--seed", "5", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["s_star"].as_u64().unwrap() as usize, rows.len());
}

#[test]
fn check_consistency_passes() {
    let out = cli(&["check-consistency", "--problem", "unit_commitment", "--trials", "500", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["permutation"]["failed"], 0);
    assert_eq!(v["feasible_augmentation"]["failed"], 0);
    assert_eq!(v["infeasible_augmentation"]["failed"], 0);
}

#[test]
fn stationary_json() {
    let out = cli(&["stationary", "--m", "6", "--seed", "4", "--starts", "3"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["residual"].as_f64().unwrap() >= 0.0);
    let bound = v["bound"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&bound));
    assert!(v["s_star"].as_u64().unwrap() >= 1);
    assert_eq!(cli(&["stationary", "--m", "6", "--seed", "4", "--starts", "0"]).status.code(), Some(1));
}

#[test]
fn experiment_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let config = dir.path().join("cfg.json");
    fs::write(
        &config,
        format!(
            r#"{{"problem": "unit_commitment", "beta": 0.01, "m_values": [1, 2, 5], "repetitions": 4,
                "n_test": 500, "master_seed": 3, "violation_mode": "both", "output_dir": {:?}}}"#,
            out_dir.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = cli(&["experiment", "--config", config.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(summary["total_runs"], 12);
    for f in ["rows.csv", "figure1.csv", "summary.json", "failures.csv"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    assert_eq!(fs::read_to_string(out_dir.join("rows.csv")).unwrap().lines().count(), 13);

    fs::write(&config, r#"{"unknown_field": 1}"#).unwrap();
    assert_eq!(cli(&["experiment", "--config", config.to_str().unwrap()]).status.code(), Some(1));
}
