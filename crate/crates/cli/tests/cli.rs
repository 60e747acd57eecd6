use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coordcom")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn props_of_a_left_tendency_strategy() {
    let v = json(&["props", "--strategy", "sigma_alpha", "--k", "2", "--n", "5"]);
    assert_eq!(v["mpc"], true);
    assert_eq!(v["coordinated"], true);
    assert_eq!(v["binary"], true);
    assert_eq!(v["alpha"], 0.4);
}

#[test]
fn example1_is_deterministic_and_matches_known_values() {
    let a = run(&["repro", "example1", "--epsilon", "0.01"]);
    let b = run(&["repro", "example1", "--epsilon", "0.01"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows[0]["payoff"], 0.35);
    assert_eq!(rows[1]["payoff"], 0.6);
    let mis = rows.last().unwrap()["payoff"].as_f64().unwrap();
    assert!((0.620..=0.635).contains(&mis), "{mis}");
}

#[test]
fn counterexample_verdicts() {
    let v = json(&["repro", "counterexample"]);
    assert_eq!(v["strongly_cp"], false);
    assert_eq!(v["weakly_cp"], true);
    assert_eq!(v["misreport_payoff"], 0.944444444444);
    assert_eq!(v["witness"]["candidate"], "partial_reveal");
}

#[test]
fn unknown_scenario_key_is_a_configuration_error() {
    let dir = std::env::temp_dir().join(format!("coordcom-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.json");
    std::fs::write(&path, "{\n  \"game\": {\"family\": \"baseline\", \"messages\": [\"m_L\"], \"distributions\": [], \"colour\": 1}\n}").unwrap();
    let out = run(&["verify", "--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("colour") && err.contains("line 2"), "{err}");
}

#[test]
fn scenario_file_drives_verification() {
    let dir = std::env::temp_dir().join(format!("coordcom-cli-ok-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("ok.json");
    std::fs::write(
        &path,
        r#"{
          "game": {
            "family": "baseline",
            "messages": ["m_L", "m_R"],
            "distributions": [{ "kind": "piecewise_linear", "knots": [[0, 0], [1, 1]] }]
          },
          "strategy": { "kind": "builtin", "name": "sigma_c" },
          "params": { "grid": 51 }
        }"#,
    )
    .unwrap();
    let v = json(&["verify", "--scenario", path.to_str().unwrap()]);
    assert_eq!(v["report"]["is_equilibrium"], true);
    assert_eq!(v["report"]["grid_points"].as_u64().map(|n| n >= 51), Some(true));
}

#[test]
fn weak_cp_needs_a_finite_game() {
    let out = run(&["cp", "--mode", "weak", "--strategy", "sigma_l"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&["cp", "--mode", "weak", "--family", "md"]);
    assert_eq!(v["counterexample_verdict"]["weakly_cp"], true);
}

#[test]
fn csv_output_to_file() {
    let dir = std::env::temp_dir().join(format!("coordcom-cli-csv-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("map.csv");
    let out = run(&["payoff", "--strategy", "sigma_c", "--outcome-map", "--map-grid", "3", "--format", "csv", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "u,v,outcome,payoff");
    assert_eq!(lines.len(), 10);
    assert_eq!(lines[9], "1,1,R,1");
}

#[test]
fn seeded_search_is_reproducible() {
    let a = run(&["evo", "--check", "dominance", "--samples", "10", "--seed", "3"]);
    let b = run(&["evo", "--check", "dominance", "--samples", "10", "--seed", "3"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}
