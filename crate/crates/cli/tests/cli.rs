use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn grw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grw-tails"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout(&grw(args))).unwrap()
}

#[test]
fn counting_csv_has_the_fixed_columns() {
    let text = stdout(&grw(&[
        "counting", "--n", "45", "--a2", "0.95", "--p", "0.1", "--format", "csv",
    ]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,a_sq,p,joint_mass,weak,strong"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "45");
    assert!((row[3].parse::<f64>().unwrap() - 0.95f64.powi(45)).abs() < 1e-12);
    assert_eq!(&row[4..], ["true", "true"]);
}

#[test]
fn counting_json_embeds_the_manifest() {
    let v = json(&["counting", "--n", "3"]);
    assert_eq!(v["schema_version"], 1);
    let m = &v["manifest"];
    assert_eq!(m["scenario"], "counting");
    assert_eq!(m["config"]["scenario"]["n_marbles"], 3);
    assert!(m["tool_version"]
        .as_str()
        .unwrap()
        .starts_with("grw-tails "));
    assert!(m["finished_at"].as_f64().unwrap() >= m["started_at"].as_f64().unwrap());
    assert_eq!(v["results"]["row"]["weak"], true);
    assert_eq!(v["results"]["row"]["strong"], false);
}

#[test]
fn p_outside_range_exits_with_validation_code() {
    let out = grw(&["counting", "--p", "0.6"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p must lie in (0, 0.5)"));
}

#[test]
fn unknown_config_key_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "[scenario]\nmarbles = 4\n").unwrap();
    let out = grw(&["counting", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oversized_chain_exits_with_capacity_code() {
    let out = grw(&["measure-chain", "--n", "30", "--trials", "1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unwritable_output_exits_with_io_code() {
    let out = grw(&["counting", "--out", "/no/such/dir/result.json"]);
    assert_eq!(out.status.code(), Some(4));
    let out = grw(&["counting", "--config", "/no/such/dir/run.toml"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "[run]\nseed = 5\n[scenario]\nn_marbles = 45\n").unwrap();
    let v = json(&["counting", "--config", path.to_str().unwrap(), "--n", "10"]);
    assert_eq!(v["manifest"]["config"]["scenario"]["n_marbles"], 10);
    assert_eq!(v["manifest"]["seed"], 5);
}

#[test]
fn same_seed_gives_identical_output() {
    let args = [
        "single-marble",
        "--trials",
        "50",
        "--seed",
        "9",
        "--a2",
        "0.5",
    ];
    let csv: Vec<&str> = args.iter().copied().chain(["--format", "csv"]).collect();
    assert_eq!(stdout(&grw(&csv)), stdout(&grw(&csv)));
    let a = json(&args);
    let b = json(&args);
    assert_eq!(a["results"].to_string(), b["results"].to_string());
    assert_eq!(a["manifest"]["config"], b["manifest"]["config"]);
    let c = json(&[
        "single-marble",
        "--trials",
        "50",
        "--seed",
        "10",
        "--a2",
        "0.5",
    ]);
    assert_ne!(a["results"], c["results"]);
}

#[test]
fn chain_summary_and_event_log() {
    let dir = tempfile::tempdir().unwrap();
    let events = dir.path().join("hits.jsonl");
    let out = dir.path().join("summary.json");
    let status = grw(&[
        "measure-chain",
        "--n",
        "4",
        "--trials",
        "20",
        "--order",
        "collective",
        "--observer",
        "--events",
        events.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    stdout(&status);
    let v: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    let agg = &v["results"]["aggregate"];
    assert_eq!(agg["trials"], 20);
    assert_eq!(agg["total_manifestation_events"], 0);
    assert_eq!(agg["pointer_agreement_all"], true);
    assert_eq!(
        v["manifest"]["config"]["scenario"]["order"],
        "collective-first"
    );
    let log = std::fs::read_to_string(&events).unwrap();
    let total_hits = agg["total_hits"].as_u64().unwrap();
    assert_eq!(log.lines().count() as u64, total_hits);
    for line in log.lines() {
        let hit: Value = serde_json::from_str(line).unwrap();
        assert!(hit["trial"].as_u64().unwrap() < 20);
        assert!(hit["time"].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn aaad_and_gb_persistence_run() {
    let v = json(&["aaad", "--trials", "200", "--seed", "3"]);
    assert_eq!(v["results"]["aggregate"]["total_unmeasured_hits"], 0);
    let v = json(&[
        "gb-persistence",
        "--trials",
        "3",
        "--n",
        "45",
        "--a2",
        "0.95",
    ]);
    assert_eq!(v["results"]["aggregate"]["weak_anomaly_throughout"], true);
}

#[test]
fn sweep_and_lattice_csv() {
    let text = stdout(&grw(&[
        "sweep", "--a2", "0.95", "--p", "0.1", "--format", "csv",
    ]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,a_sq,p,joint_mass,weak,strong"));
    let first_strong = lines.find(|l| l.ends_with(",true,true")).unwrap();
    assert!(first_strong.starts_with("45,"));

    let text = stdout(&grw(&["lattice-demo", "--format", "csv"]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,re,im,density"));
    assert_eq!(lines.count(), 512);
}

#[test]
fn written_config_can_be_read_back() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    stdout(&grw(&[
        "counting",
        "--n",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert!(Path::new(&out).exists());
    let v: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["results"]["row"]["n"], 7);
}
