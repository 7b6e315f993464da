use std::process::{Command, Output};

fn qrbsde(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrbsde")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn mindex_card_spot_values() {
    for (args, want) in [
        (vec!["--dim", "3", "--kind", "hyperbolic", "--deg", "4"], "50"),
        (vec!["--dim", "4", "--kind", "hyperbolic", "--deg", "2"], "48"),
        (vec!["--dim", "3", "--kind", "total", "--deg", "6"], "84"),
        (vec!["--dim", "2", "--kind", "total", "--deg", "20"], "231"),
        (vec!["--dim", "2", "--kind", "hyperbolic", "--deg", "19"], "99"),
        (vec!["--dim", "2", "--full-k", "3,4"], "20"),
        (vec!["--dim", "6", "--kind", "full", "--deg", "9"], "1000000"),
    ] {
        let mut full = vec!["mindex-card"];
        full.extend(args.iter());
        let o = qrbsde(&full);
        assert!(o.status.success(), "{full:?}");
        assert_eq!(stdout(&o).trim(), want, "{full:?}");
    }
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [
        vec!["solve", "--paths", "0", "--deg", "5"],
        vec!["solve", "--deg", "5"],
        vec!["solve", "--paths", "100"],
        vec!["solve", "--paths", "100", "--deg", "4", "--full-k", "4"],
        vec!["solve", "--paths", "100", "--kind", "total", "--full-k", "4"],
        vec!["solve", "--paths", "100", "--dim", "2", "--full-k", "4"],
        vec!["solve", "--paths", "ten", "--deg", "4"],
        vec!["solve", "--paths", "100", "--deg", "4", "--frobnicate"],
        vec!["solve", "--paths", "100", "--deg", "4", "--mu", "-1"],
        vec!["solve", "--paths", "100", "--deg", "4", "--q", "-0.5"],
        vec!["solve", "--paths", "100", "--deg", "4", "--q", "0,2.1"],
        vec!["mindex-card", "--kind", "hyperbolic", "--deg", "0"],
        vec!["launch"],
    ] {
        let o = qrbsde(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(qrbsde(&["--help"]).status.code(), Some(0));
    assert_eq!(qrbsde(&["solve", "--help"]).status.code(), Some(0));
}

#[test]
fn dry_run_reports_plan_without_simulating() {
    let o = qrbsde(&[
        "solve", "--dim", "1", "--mu", "2", "--q", "0", "--steps", "20", "--deg", "100", "--kind", "full", "--paths",
        "20000", "--seed", "42", "--dry-run",
    ]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("#Gamma=101"), "{s}");
    assert!(s.contains("L_Gamma=201"), "{s}");
    assert!(s.contains("L_Gamma/M=1.005e-2"), "{s}");
    assert!(s.contains("memory-estimate="), "{s}");
}

#[test]
fn identical_invocations_write_identical_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let base = ["solve", "--dim", "2", "--kind", "hyperbolic", "--deg", "6", "--paths", "3000", "--steps", "5", "--q", "2.1", "--seed", "9"];
    let run = |out: &std::path::Path, extra: &[&str]| {
        let mut args: Vec<&str> = base.to_vec();
        args.extend_from_slice(&["--out", out.to_str().unwrap()]);
        args.extend_from_slice(extra);
        let o = qrbsde(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("L_Gamma/M="));
    };
    run(&a, &["--threads", "1"]);
    run(&b, &["--threads", "3", "--memory-mode", "recompute-from-seeds"]);
    let ta = std::fs::read(&a).unwrap();
    assert_eq!(ta, std::fs::read(&b).unwrap());
    let meta = std::fs::read_to_string(dir.path().join("b.json.meta.json")).unwrap();
    assert!(meta.contains("\"workers\": 3"), "{meta}");
    assert!(meta.contains("recompute-from-seeds"));
    let table = qrbsde::CoefficientTable::from_json(std::str::from_utf8(&ta).unwrap()).unwrap();
    assert_eq!(table.steps(), 5);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "dim = 2\nkind = \"total\"\ndeg = 3\npaths = 5000\nq = [0.0, 5.1]\n").unwrap();
    let c = cfg.to_str().unwrap();
    let o = qrbsde(&["bench", "--config", c, "--dry-run"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.contains("#Gamma=10 ") && s.contains("M=5000") && s.contains("[0.0, 5.1]"), "{s}");
    let o = qrbsde(&["bench", "--config", c, "--deg", "20", "--q", "1", "--dry-run"]);
    let s = stdout(&o);
    assert!(s.contains("#Gamma=231 ") && s.contains("[1.0]"), "{s}");
    std::fs::write(&cfg, "dim = 2\nsprocket = 1\n").unwrap();
    assert_eq!(qrbsde(&["solve", "--config", c, "--paths", "10", "--deg", "2"]).status.code(), Some(1));
}

#[test]
fn io_failures_exit_with_three() {
    let o = qrbsde(&["solve", "--paths", "10", "--deg", "2", "--steps", "2", "--out", "/nonexistent-dir/x/t.json"]);
    assert_eq!(o.status.code(), Some(3));
    let o = qrbsde(&["solve", "--config", "/nonexistent-dir/c.toml", "--paths", "10", "--deg", "2"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn dist_check_round_trip() {
    let o = qrbsde(&["dist-check", "--mu", "2"]);
    assert!(o.status.success());
    let s = stdout(&o);
    let err: f64 = s
        .split_whitespace()
        .find_map(|w| w.strip_prefix("max-round-trip-error="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(err <= 1e-12, "{s}");
    assert_eq!(qrbsde(&["dist-check", "--mu", "0"]).status.code(), Some(1));
}

#[test]
fn bench_coarse_row_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("row.csv");
    let o = qrbsde(&[
        "bench", "--dim", "1", "--steps", "20", "--kind", "full", "--deg", "100", "--paths", "20000", "--q", "0", "--seed", "42",
        "--format", "csv", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
    assert_eq!(col("size"), "101");
    let mse_max: f64 = col("mse_max").parse().unwrap();
    assert!((mse_max + 3.658).abs() <= 0.5, "{mse_max}");
    assert!(dir.path().join("row.csv.meta.json").exists());
}

#[test]
fn bench_runs_produce_interval() {
    let o = qrbsde(&["bench", "--deg", "20", "--steps", "5", "--paths", "2000", "--runs", "3"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["runs"].as_array().unwrap().len(), 3);
    let iv = &v["intervals"][0];
    assert!(iv["lo"].as_f64().unwrap() <= iv["hi"].as_f64().unwrap());
    assert!(String::from_utf8_lossy(&o.stderr).contains("99% interval"));
}
