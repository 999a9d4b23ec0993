use std::path::Path;
use std::process::{Command, Output};

fn klslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_klslab"))
        .args(args)
        .env_remove("KLSLAB_WORKERS")
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn lists_catalogs() {
    let out = klslab(&["list-bodies"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for b in ["lp:<p>", "cube", "simplex", "cone", "cylinder"] {
        assert!(text.contains(b), "{text}");
    }
    let out = klslab(&["list-profiles"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("powexp"));
}

#[test]
fn flag_run_passes_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("report");
    let out = klslab(&[
        "run", "--experiment", "kls-table", "--body", "lp:2:2", "--profile", "exp:1", "--n", "4", "--count", "20000",
        "--seed", "42", "--out", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["report.csv", "report.json", "plotdata.csv", "kls_table.csv"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    assert!(read(&out_dir, "kls_table.csv").lines().nth(1).unwrap().starts_with("lp:2:2,exp:1,4,20000,42,"));
}

#[test]
fn small_count_is_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = klslab(&[
        "run", "--experiment", "verify-decomposition", "--count", "500", "--seed", "1", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("minimum"));
}

#[test]
fn usage_errors_are_exit_two() {
    assert_eq!(klslab(&["run", "--experiment", "no-such", "--count", "20000", "--seed", "1"]).status.code(), Some(2));
    assert_eq!(klslab(&["run", "--experiment", "kls-table", "--body", "torus", "--count", "20000", "--seed", "1"]).status.code(), Some(2));
    assert_eq!(klslab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(klslab(&["run", "--config", "/nonexistent.json"]).status.code(), Some(2));
}

#[test]
fn gate_failure_is_exit_one_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let cfg = dir.path().join("cfg.json");
    let json = format!(
        r#"{{"experiment": "kls-table", "bodies": [{{"family": "lp", "p": 2}}], "profiles": [{{"family": "uniform"}}],
            "dims": [3], "count": 20000, "seed": 5, "output_path": "{}", "gates": {{"ratio_gate": 0.5}}}}"#,
        out_dir.display()
    );
    std::fs::write(&cfg, json).unwrap();
    let out = klslab(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(read(&out_dir, "report.csv").contains(",fail\n"));
}

#[test]
fn worker_override_keeps_outputs_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |workers: &str, sub: &str| {
        let out_dir = dir.path().join(sub);
        let out = Command::new(env!("CARGO_BIN_EXE_klslab"))
            .args(["run", "--experiment", "verify-scale-identity", "--n", "3", "--count", "150000", "--seed", "9"])
            .arg("--out")
            .arg(&out_dir)
            .env("KLSLAB_WORKERS", workers)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        assert!(String::from_utf8_lossy(&out.stdout).contains(&format!("{workers} worker(s)")));
        (read(&out_dir, "report.csv"), read(&out_dir, "plotdata.csv"))
    };
    assert_eq!(run("1", "a"), run("8", "b"));
    let bad = Command::new(env!("CARGO_BIN_EXE_klslab"))
        .args(["run", "--experiment", "condition-check", "--count", "0", "--seed", "1"])
        .env("KLSLAB_WORKERS", "zero")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
