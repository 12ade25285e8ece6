use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nonconv"))
}

fn tmp(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("nonconv-it-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

#[test]
fn classify_writes_q_equivalent_verdict() {
    let d = tmp("classify");
    let o = run(&["classify", "--p", "4n^2", "--q", "n^2", "--seed", "3", "--out", d.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let s: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["command"], "classify");
    assert_eq!(s["seed"], 3);
    assert_eq!(s["report"]["verdict"]["class"]["kind"], "QEquivalent");
    assert_eq!(s["report"]["verdict"]["class"]["c"], "2");
}

#[test]
fn summaries_are_reproducible_across_runs_and_thread_counts() {
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "3", "1"].iter().enumerate() {
        let d = tmp(&format!("det{i}"));
        let o = run(&["clt", "--seed", "42", "--N", "256", "--reps", "200", "--threads", threads, "--out", d.to_str().unwrap()]);
        assert!(matches!(o.status.code(), Some(0) | Some(2)));
        outputs.push((std::fs::read(d.join("summary.json")).unwrap(), std::fs::read(d.join("table.csv")).unwrap()));
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn strict_schema_rejects_unknown_keys() {
    let d = tmp("schema");
    let cfg = d.join("bad.json");
    std::fs::write(&cfg, r#"{"experiment": {"N": 100, "replicatons": 5}}"#).unwrap();
    let o = run(&["slln", "--config", cfg.to_str().unwrap(), "--seed", "0", "--out", d.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("replicatons"));
}

#[test]
fn malformed_config_reports_position() {
    let d = tmp("malformed");
    let cfg = d.join("bad.toml");
    std::fs::write(&cfg, "family = \"n\"\n[process\nkind = 1\n").unwrap();
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", "0", "--out", d.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn failed_verdict_exits_two() {
    let d = tmp("stein");
    let cfg = d.join("chain.json");
    std::fs::write(
        &cfg,
        r#"{"process": {"kind": "markov", "p": [["9/10", "1/10"], ["1/10", "9/10"]], "f": [0, 1]},
            "experiment": {"N": [1024, 2048], "reps": 2, "gamma_pairs": 4}}"#,
    )
    .unwrap();
    let o = run(&["stein-audit", "--config", cfg.to_str().unwrap(), "--seed", "0", "--out", d.to_str().unwrap(), "--plots"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL tau_N ln^2 N decreasing"));
    assert!(std::fs::read_to_string(d.join("tau.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn capability_errors_surface_verbatim() {
    let d = tmp("cf");
    let cfg = d.join("cf.toml");
    std::fs::write(&cfg, "family = \"n^2\"\n[process]\nkind = \"cf\"\ndigit_cap = 4\n[experiment]\nN = 2000\n").unwrap();
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", "0", "--out", d.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn missing_seed_is_drawn_and_printed() {
    let d = tmp("seed");
    let o = run(&["sieve", "--a", "2", "--b", "1", "--alphas", "1,0", "--N", "100", "--out", d.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let err = String::from_utf8_lossy(&o.stderr);
    let printed: u64 = err.trim().strip_prefix("seed: ").unwrap().parse().unwrap();
    let s: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["seed"], printed);
}
