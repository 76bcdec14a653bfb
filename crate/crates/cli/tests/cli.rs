use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn sacm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sacm")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

const EXAMPLE: &str = r#"{
  "num_users": 3,
  "subfiles": [
    {"owner": 1, "cache_set": [], "size": 10},
    {"owner": 1, "cache_set": [2], "size": 10},
    {"owner": 1, "cache_set": [3], "size": 10},
    {"owner": 1, "cache_set": [2, 3], "size": 300},
    {"owner": 2, "cache_set": [], "size": 10},
    {"owner": 2, "cache_set": [1], "size": 300},
    {"owner": 2, "cache_set": [3], "size": 10},
    {"owner": 2, "cache_set": [1, 3], "size": 10},
    {"owner": 3, "cache_set": [], "size": 10},
    {"owner": 3, "cache_set": [1], "size": 10},
    {"owner": 3, "cache_set": [2], "size": 10},
    {"owner": 3, "cache_set": [1, 2], "size": 10}
  ]
}"#;

fn example(dir: &TempDir) -> String {
    let p = path(dir, "example.json");
    fs::write(&p, EXAMPLE).unwrap();
    p
}

fn total_bits(schedule_path: &str) -> u64 {
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(schedule_path).unwrap()).unwrap();
    v["total_bits"].as_u64().unwrap()
}

#[test]
fn solve_each_algorithm_on_the_example() {
    let dir = TempDir::new().unwrap();
    let inst = example(&dir);
    for (algo, bits) in [("uncoded", 700), ("gcm", 650), ("sacm", 370), ("algorithm1", 370), ("chvatal", 370)] {
        let out_path = path(&dir, &format!("{algo}.json"));
        let out = sacm(&["solve", "-i", &inst, "--algo", algo, "-o", &out_path]);
        assert!(out.status.success(), "{algo}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(total_bits(&out_path), bits, "{algo}");
        let v = sacm(&["verify", "-i", &inst, "-s", &out_path, "--seed", "3"]);
        assert_eq!(v.status.code(), Some(0));
        assert!(stdout(&v).starts_with("PASS"));
    }
}

#[test]
fn gccm_uses_the_order_file() {
    let dir = TempDir::new().unwrap();
    let inst = example(&dir);
    let order = path(&dir, "order.json");
    let refs = [
        (2, vec![3]),
        (3, vec![2]),
        (1, vec![2]),
        (2, vec![1, 3]),
        (1, vec![2, 3]),
        (3, vec![1, 2]),
        (1, vec![3]),
        (3, vec![1]),
        (2, vec![1]),
        (1, vec![]),
        (2, vec![]),
        (3, vec![]),
    ];
    let json: Vec<serde_json::Value> =
        refs.iter().map(|(o, a)| serde_json::json!({"owner": o, "cache_set": a})).collect();
    fs::write(&order, serde_json::to_string(&json).unwrap()).unwrap();
    let out_path = path(&dir, "gccm.json");
    let out = sacm(&["solve", "-i", &inst, "--algo", "gccm", "--order-file", &order, "-o", &out_path]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(total_bits(&out_path), 660);

    let bad = sacm(&["solve", "-i", &inst, "--algo", "sacm", "--order-file", &order]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn oracle_reports_optimum_and_caps() {
    let dir = TempDir::new().unwrap();
    let inst = example(&dir);
    let out = sacm(&["oracle", "-i", &inst]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["total_bits"], 370);
    assert_eq!(v["optimal"], true);
    assert_eq!(v["columns"], 25);
    assert!(v["nodes"].as_u64().unwrap() >= 1);

    assert_eq!(sacm(&["oracle", "-i", &inst, "--cap", "10"]).status.code(), Some(3));
    assert_eq!(sacm(&["oracle", "-i", &inst, "--node-budget", "1"]).status.code(), Some(3));
    assert_eq!(sacm(&["enumerate", "-i", &inst, "--cap", "10"]).status.code(), Some(3));
}

#[test]
fn enumerate_lists_groups() {
    let dir = TempDir::new().unwrap();
    let out = sacm(&["enumerate", "-i", &example(&dir)]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 8);
    assert!(text.starts_with("{1}\t4\n{1,2}\t4\n{1,2,3}\t1\n"));
    assert!(text.ends_with("total\t25\n"));
}

#[test]
fn compare_prints_one_row() {
    let dir = TempDir::new().unwrap();
    let out = sacm(&["compare", "-i", &example(&dir), "--algos", "uncoded,gcm,sacm,exact"]);
    assert!(out.status.success());
    assert_eq!(
        stdout(&out),
        "K,tau,sample,seed,uncoded_bits,gcm_bits,sacm_bits,exact_bits\n3,12,0,0,700,650,370,370\n"
    );
}

#[test]
fn verify_rejects_infeasible_and_incomplete_schedules() {
    let dir = TempDir::new().unwrap();
    let inst = example(&dir);
    let bad = path(&dir, "bad.json");
    fs::write(
        &bad,
        r#"{"packets": [[{"owner": 1, "cache_set": []}, {"owner": 2, "cache_set": []}]], "total_bits": 10}"#,
    )
    .unwrap();
    let out = sacm(&["verify", "-i", &inst, "-s", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid"));
}

#[test]
fn gen_families_round_trip() {
    let dir = TempDir::new().unwrap();
    let random = path(&dir, "r.json");
    assert!(sacm(&["gen", "-k", "4", "--tau", "12", "--seed", "5", "-o", &random]).status.success());
    let again = path(&dir, "r2.json");
    assert!(sacm(&["gen", "-k", "4", "--tau", "12", "--seed", "5", "-o", &again]).status.success());
    assert_eq!(fs::read(&random).unwrap(), fs::read(&again).unwrap());

    let adv = path(&dir, "adv.json");
    let order = path(&dir, "order.json");
    let out = sacm(&[
        "gen",
        "--family",
        "adv-gccm",
        "-k",
        "5",
        "--big",
        "100",
        "--eps",
        "1",
        "-o",
        &adv,
        "--order-out",
        &order,
    ]);
    assert!(out.status.success());
    let sched = path(&dir, "s.json");
    assert!(sacm(&["solve", "-i", &adv, "--algo", "gccm", "--order-file", &order, "-o", &sched]).status.success());
    assert_eq!(total_bits(&sched), 500);

    let graph = path(&dir, "g.json");
    fs::write(&graph, r#"{"vertices": 5, "edges": [[1,2],[2,3],[3,4],[4,5],[5,1]]}"#).unwrap();
    let g_inst = path(&dir, "gi.json");
    assert!(sacm(&["gen", "--family", "graph", "--graph-file", &graph, "-o", &g_inst]).status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&sacm(&["oracle", "-i", &g_inst]))).unwrap();
    assert_eq!(v["total_bits"], 3);

    for family in ["adv-uncoded", "adv-gcm"] {
        let p = path(&dir, &format!("{family}.json"));
        assert!(sacm(&["gen", "--family", family, "-k", "6", "-o", &p]).status.success());
        assert!(Path::new(&p).exists());
    }
    assert_eq!(sacm(&["gen", "-k", "3", "--tau", "13"]).status.code(), Some(2));
    assert_eq!(sacm(&["gen", "--family", "graph"]).status.code(), Some(2));
}

#[test]
fn experiment_is_deterministic_and_summarized() {
    let dir = TempDir::new().unwrap();
    let (a, b, s) = (path(&dir, "a.csv"), path(&dir, "b.csv"), path(&dir, "s.csv"));
    let args =
        ["experiment", "-k", "3", "--tau", "3:12:3", "--samples", "20", "--seed", "9", "--algos", "uncoded,sacm,exact"];
    assert!(sacm(&[&args[..], &["-o", &a, "--summary", &s]].concat()).status.success());
    assert!(sacm(&[&args[..], &["-o", &b, "--sequential"]].concat()).status.success());
    let rows = fs::read_to_string(&a).unwrap();
    assert_eq!(rows, fs::read_to_string(&b).unwrap());
    assert_eq!(rows.lines().count(), 81);
    assert_eq!(rows.lines().next().unwrap(), "K,tau,sample,seed,uncoded_bits,sacm_bits,exact_bits");
    let summary = fs::read_to_string(&s).unwrap();
    assert_eq!(summary.lines().count(), 5);
    assert!(summary.starts_with(
        "K,tau,samples,uncoded_mean,uncoded_ci95,sacm_mean,sacm_ci95,exact_mean,exact_ci95,sacm_reduction_pct\n3,3,20,"
    ));

    let timed = sacm(&["experiment", "-k", "3", "--tau", "4", "--samples", "2", "--timing"]);
    assert!(stdout(&timed).lines().next().unwrap().ends_with("gccm_us,sacm_us"));
}

#[test]
fn malformed_inputs_exit_with_validation_status() {
    let dir = TempDir::new().unwrap();
    let bad = path(&dir, "bad.json");
    fs::write(&bad, r#"{"num_users": 2, "subfiles": [{"owner": 1, "cache_set": [1], "size": 4}]}"#).unwrap();
    assert_eq!(sacm(&["solve", "-i", &bad]).status.code(), Some(2));
    fs::write(&bad, r#"{"num_users": 2, "subfiles": [{"owner": 1, "cache_set": [], "size": 4.5}]}"#).unwrap();
    assert_eq!(sacm(&["solve", "-i", &bad]).status.code(), Some(2));
    assert_eq!(sacm(&["solve", "-i", &path(&dir, "missing.json")]).status.code(), Some(1));
    assert_eq!(sacm(&["experiment", "-k", "3", "--tau", "9:3"]).status.code(), Some(2));
    assert_eq!(sacm(&["experiment", "-k", "3", "--tau", "4", "--algos", "best"]).status.code(), Some(2));
}
