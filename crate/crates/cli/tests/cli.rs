use std::process::{Command, Output};

fn dcoset(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcoset")).args(args).env_remove("DCOSET_SEED").output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn without_wall_time(out: &Output) -> serde_json::Value {
    let mut v = json(out);
    v.as_object_mut().unwrap().remove("wallTimeSeconds");
    v
}

#[test]
fn moments_des_mean_is_exact() {
    let v = json(&dcoset(&["moments", "--lambda", "2,1", "--mu", "2,1", "--table", "[[1,1],[1,0]]", "--stat", "des"]));
    assert_eq!(v["result"]["moments"]["mean"]["exact"], "5/4");
    assert_eq!(v["result"]["moments"]["mean"]["decimal"], 1.25);
    assert_eq!(v["config"]["stat"], "des");
    assert!(v["wallTimeSeconds"].is_number());
}

#[test]
fn fixed_point_bound_for_whole_group() {
    let v = json(&dcoset(&["bounds", "--lambda", "100", "--mu", "100", "--stat", "fp"]));
    assert!((v["result"]["bound"].as_f64().unwrap() - 0.05).abs() < 1e-15);
}

#[test]
fn exact_distance_at_three() {
    let v = json(&dcoset(&["distance", "--lambda", "3", "--mu", "3", "--stat", "fp"]));
    assert!((v["result"]["distance"].as_f64().unwrap() - 0.2375).abs() < 1e-3);
    assert_eq!(v["result"]["method"], "exact");
}

#[test]
fn verify_sweep_has_no_failures() {
    let v = json(&dcoset(&["verify", "--all", "--nmax", "5", "--seed", "1"]));
    assert_eq!(v["result"]["failures"].as_array().unwrap().len(), 0);
    assert!(v["result"]["checks"].as_u64().unwrap() > 10_000);
}

#[test]
fn exit_codes() {
    let ambiguous = dcoset(&["moments", "--lambda", "2,1", "--mu", "2,1"]);
    assert_eq!(ambiguous.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&ambiguous.stderr).contains("--table"));
    assert_eq!(dcoset(&["moments", "--lambda", "3", "--mu", "3", "--cap", "13"]).status.code(), Some(2));
    assert_eq!(dcoset(&["sample", "--lambda", "3", "--mu", "3", "--samples", "0"]).status.code(), Some(2));
    assert_eq!(
        dcoset(&["moments", "--table", "[[2,1],[0,1]]", "--lambda", "3,1", "--mu", "3,1"]).status.code(),
        Some(2)
    );
    assert_eq!(dcoset(&["moments", "--lambda", "3", "--mu", "3", "--stat", "des_d:0"]).status.code(), Some(2));
    let violated = dcoset(&["bounds", "--table", "[[1,1],[1,0]]", "--stat", "fp"]);
    assert_eq!(violated.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&violated.stderr).contains("cell (2, 2)"));
}

#[test]
fn reports_are_reproducible_and_thread_independent() {
    let args = ["sample", "--lambda", "7", "--mu", "7", "--stat", "inv", "--samples", "40000", "--seed", "9"];
    let one = dcoset(&[&args[..], &["--threads", "1"]].concat());
    let again = dcoset(&[&args[..], &["--threads", "1"]].concat());
    let four = dcoset(&[&args[..], &["--threads", "4"]].concat());
    assert_eq!(without_wall_time(&one), without_wall_time(&again));
    assert_eq!(without_wall_time(&one)["result"], without_wall_time(&four)["result"]);
}

#[test]
fn seed_from_environment() {
    let run = |seed: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_dcoset"))
            .args(["sample", "--lambda", "6", "--mu", "6", "--samples", "500", "--perms", "--threads", "1"])
            .env("DCOSET_SEED", seed)
            .output()
            .unwrap();
        json(&out)
    };
    assert_eq!(run("5")["config"]["seed"], 5);
    assert_ne!(run("5")["result"], run("6")["result"]);
}

#[test]
fn histogram_csv_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fp.csv");
    let out = dcoset(&[
        "sample",
        "--lambda",
        "10",
        "--mu",
        "10",
        "--samples",
        "20000",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("value,count"));
    let rows: Vec<(u64, u64)> = lines
        .map(|l| {
            let (v, c) = l.split_once(',').unwrap();
            (v.parse().unwrap(), c.parse().unwrap())
        })
        .collect();
    assert!(rows.windows(2).all(|w| w[0].0 < w[1].0));
    assert_eq!(rows.iter().map(|r| r.1).sum::<u64>(), 20000);
    // Poisson(1) puts about 0.368 on each of 0 and 1
    let p0 = rows[0].1 as f64 / 20000.0;
    assert!((p0 - (-1.0f64).exp()).abs() < 0.02);
}

#[test]
fn table_from_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    std::fs::write(&path, "1,1\n1,0\n").unwrap();
    let v = json(&dcoset(&["stats", "--table", path.to_str().unwrap(), "--stat", "des"]));
    assert_eq!(v["result"]["mean"]["exact"], "5/4");
    assert_eq!(v["result"]["cosetSize"], 4);
}

#[test]
fn enumerate_and_stats() {
    let v = json(&dcoset(&["enumerate", "--lambda", "2,1", "--mu", "2,1", "--tables"]));
    assert_eq!(v["result"]["count"], 2);
    let v = json(&dcoset(&["enumerate", "--table", "[[1,1],[1,0]]"]));
    assert_eq!(v["result"]["size"], 4);
    let v = json(&dcoset(&["stats", "--perm", "3,1,2", "--stat", "inv"]));
    assert_eq!(
        (v["result"]["fp"].as_u64(), v["result"]["des"].as_u64(), v["result"]["inv"].as_u64()),
        (Some(0), Some(1), Some(2))
    );
    assert_eq!(v["result"]["value"], 2);
}

#[test]
fn concentration_csv_and_report() {
    let out = dcoset(&[
        "concentration",
        "--lambda",
        "8",
        "--mu",
        "8",
        "--stat",
        "fp",
        "--samples",
        "20000",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("t,bound,upperFreq,lowerFreq"));
    assert_eq!(text.lines().count(), 5);
    let v = json(&dcoset(&["report", "--lambda", "6", "--mu", "6", "--samples", "2000"]));
    assert_eq!(v["result"]["statistics"].as_array().unwrap().len(), 3);
    assert_eq!(v["result"]["cosetSize"], "720");
}

#[test]
fn size_bias_verification_runs() {
    let v = json(&dcoset(&["verify", "size-bias", "--lambda", "4", "--mu", "4", "--samples", "50000"]));
    assert_eq!(v["result"]["invariantViolations"], 0);
    assert!(v["result"]["tv"].as_f64().unwrap() < 0.02);
}
