use std::path::Path;
use std::process::{Command, Output};

fn logfield(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logfield"))
        .args(args)
        .env_remove("LCG_SEED")
        .output()
        .expect("binary runs")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

fn body(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with("# output=")).collect::<Vec<_>>().join("\n")
}

#[test]
fn verify_lemmas_passes() {
    let out = logfield(&["verify-lemmas", "--d", "2", "--seed", "7", "--N", "8", "--samples", "1000"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("pass") && !table.contains("FAIL"));
}

#[test]
fn config_errors_exit_two_with_one_line() {
    for args in [
        vec!["scan-cubic", "--d", "7"],
        vec!["scan-cubic", "--bogus", "1"],
        vec!["scan-cubic", "--workers", "0"],
        vec!["scan-divergence", "--M", "2"],
        vec!["scan-partition", "--sigma", "1", "--N", "8", "--samples", "100"],
        vec!["sample", "--N", "8"],
    ] {
        let out = logfield(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
    }
}

#[test]
fn outputs_are_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for w in ["1", "3"] {
        let p = path(dir.path(), &format!("cubic{w}.csv"));
        let out = logfield(&[
            "scan-cubic", "--N", "8,16", "--samples", "300", "--seed", "11", "--workers", w, "--output", &p,
        ]);
        assert_eq!(out.status.code(), Some(0));
        files.push(std::fs::read_to_string(&p).unwrap());
    }
    assert_eq!(body(&files[0]), body(&files[1]));
    for w in ["1", "2"] {
        let p = path(dir.path(), &format!("div{w}.json"));
        let out = logfield(&[
            "scan-divergence", "--M", "4,8", "--samples", "200", "--seed", "3", "--workers", w, "--format", "json",
            "--output", &p,
        ]);
        assert_eq!(out.status.code(), Some(0));
        files.push(std::fs::read_to_string(&p).unwrap().replace(&p, ""));
    }
    assert_eq!(files[2], files[3]);
}

#[test]
fn csv_echo_replays_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = path(dir.path(), "first.csv");
    let second = path(dir.path(), "second.csv");
    let out = logfield(&[
        "scan-smooth", "--N", "32,64", "--samples", "200", "--seed", "5", "--output", &first,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = logfield(&["scan-smooth", "--config", &first, "--output", &second]);
    assert_eq!(out.status.code(), Some(0));
    let (a, b) = (
        std::fs::read_to_string(&first).unwrap(),
        std::fs::read_to_string(&second).unwrap(),
    );
    assert!(a.starts_with("# command=scan-smooth\n"));
    assert!(a.contains("# gamma=3\n"));
    assert_eq!(body(&a), body(&b));
}

#[test]
fn config_file_and_env_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = path(dir.path(), "run.cfg");
    std::fs::write(&cfg, "# defaults\nN = 8\nsamples = 150\nsigma = 2\n").unwrap();
    let a = path(dir.path(), "a.csv");
    let b = path(dir.path(), "b.csv");
    let out = logfield(&["scan-cubic", "--config", &cfg, "--sigma", "3", "--seed", "4", "--output", &a]);
    assert_eq!(out.status.code(), Some(0));
    let out = Command::new(env!("CARGO_BIN_EXE_logfield"))
        .args(["scan-cubic", "--config", &cfg, "--sigma", "3", "--output", &b])
        .env("LCG_SEED", "4")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let (a, b) = (std::fs::read_to_string(&a).unwrap(), std::fs::read_to_string(&b).unwrap());
    assert!(a.contains("# sigma=3\n") && a.contains("# samples=150\n") && a.contains("# seed=4\n"));
    assert_eq!(body(&a), body(&b));
}

#[test]
fn json_reports_embed_the_config() {
    let out = logfield(&[
        "zakharov", "--N", "8,16", "--samples", "100", "--route", "bound", "--format", "json", "--seed", "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["config"]["command"], "zakharov");
    assert_eq!(doc["config"]["seed"], 2);
    let reports = doc["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 6);
    assert!(reports.iter().any(|r| r["quantity"] == "log_partition_lower_bound"));
}

#[test]
fn sample_writes_ensemble_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let p = path(dir.path(), "fields.lcgf");
    let out = logfield(&["sample", "--d", "1", "--N", "8", "--samples", "5", "--output", &p]);
    assert_eq!(out.status.code(), Some(0));
    let fields = logfield::ensemble::read_ensemble(std::fs::File::open(&p).unwrap()).unwrap();
    assert_eq!(fields.len(), 5);
    assert_eq!(fields[0].lattice().cutoff(), 8);
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(format!("{p}.json")).unwrap()).unwrap();
    assert_eq!(side["config"]["command"], "sample");
    assert_eq!(side["ensemble"]["samples"], 5);
}
