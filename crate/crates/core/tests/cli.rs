use std::process::Command;

use fedrdma::bench::{parse_rows, COLUMNS};

fn bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fedrdma-bench"))
}

const CONFIG: &str = r#"
[[scenario]]
id = "single"
repetitions = 2
path = { sender_rate = 10e9 }
transport = { kind = "FedRdmaE" }
workload = { single_blob = { data_bytes = 50_000_000 } }

[[scenario]]
id = "naive"
transport = { kind = "NaiveRdma" }
workload = { single_blob = { data_bytes = 200_000_000 } }
"#;

#[test]
fn run_writes_parseable_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.toml");
    let out = dir.path().join("out.csv");
    std::fs::write(&cfg, CONFIG).unwrap();
    let status = bench()
        .args(["run", cfg.to_str().unwrap(), "--seed", "9", "--format", "csv", "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with(&COLUMNS.join(",")));
    let rows = parse_rows(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!((rows[0].seed, rows[1].seed), (9, 10));
    // a failed transfer is a data row, not an error exit
    assert_eq!(rows[2].result, fedrdma::bench::RunResult::TransmissionFailure);
}

#[test]
fn stdout_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.toml");
    std::fs::write(&cfg, CONFIG).unwrap();
    let go = || bench().args(["run", cfg.to_str().unwrap(), "--seed", "3"]).output().unwrap().stdout;
    assert_eq!(go(), go());
}

#[test]
fn sweep_requires_sweep_workloads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.toml");
    std::fs::write(&cfg, CONFIG).unwrap();
    let out = bench().args(["sweep", cfg.to_str().unwrap()]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("workload"));
}

#[test]
fn bad_configs_fail_with_the_key() {
    let dir = tempfile::tempdir().unwrap();
    for (text, key) in [
        ("scenario = []", "scenario"),
        (&CONFIG.replace("repetitions = 2", "repetitons = 2") as &str, "repetitons"),
    ] {
        let cfg = dir.path().join("bad.toml");
        std::fs::write(&cfg, text).unwrap();
        let out = bench().args(["run", cfg.to_str().unwrap()]).output().unwrap();
        assert!(!out.status.success());
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(key), "{err}");
    }
    let out = bench().args(["run", "/nonexistent/x.toml"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn presets_have_table_shape() {
    for (name, rows, first) in [
        ("table-bandwidth", 7, "bandwidth_gbps"),
        ("table-syscost", 3, "method"),
        ("table-lora", 9, "lora_rank"),
    ] {
        let out = bench().args(["preset", name]).output().unwrap();
        assert!(out.status.success(), "{name}");
        let text = String::from_utf8(out.stdout).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), rows + 1, "{name}");
        assert!(lines[0].starts_with(first));
    }
    assert!(!bench().args(["preset", "table-nope"]).output().unwrap().status.success());
}
