use std::path::Path;
use std::process::{Command, Output};

fn pla(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pla")).args(args).current_dir(cwd).output().unwrap()
}

const GAUSS: &str = r#"{"kind":"gaussian","mean":[0],"eigs":[1]}"#;

#[test]
fn zero_steps_writes_initial_samples_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = pla(&["sample", "--target", GAUSS, "--eps", "0.1", "--steps", "0", "--chains", "4", "--out", "s.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "chain,step,x_1");
    assert_eq!(lines.len(), 5);
    assert!(lines[1..].iter().all(|l| l.split(',').nth(1) == Some("0")));
}

#[test]
fn flags_and_config_agree_and_charts_leave_csv_alone() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["sample", "--target", GAUSS, "--eps", "0.2", "--steps", "20", "--chains", "50", "--seed", "9"];
    assert!(pla(&[&base[..], &["--out", "a.csv", "--chart"]].concat(), dir.path()).status.success());
    let cfg = format!(
        r#"{{"schema_version":1,"experiment":{{"sample":{{"target":{GAUSS},"algorithm":"pla",
        "chain":{{"eps":0.2,"steps":20,"n_chains":50,"seed":9,"init":{{"kind":"gaussian_at_stationary"}}}},"out":"b.csv"}}}}}}"#
    );
    std::fs::write(dir.path().join("c.json"), cfg).unwrap();
    assert!(pla(&["sample", "--config", "c.json", "--eps", "9"], dir.path()).status.success());
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());
    assert!(dir.path().join("a.svg").exists());
    assert!(!dir.path().join("b.svg").exists());
}

#[test]
fn bias_sweep_theory_mode_marks_ula_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let out = pla(&["bias-sweep", "--eigs", "1", "--eps-grid", "0.5,1,2,3", "--out", "b.csv"], dir.path());
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        let eps: f64 = r[0].parse().unwrap();
        assert_eq!(r[5] == "inf", eps >= 2.0, "{r:?}");
        if r[5] != "inf" {
            assert!(r[1].parse::<f64>().unwrap() < r[5].parse::<f64>().unwrap());
        }
        assert!(r[3].is_empty() && r[4].is_empty());
    }
    assert!(dir.path().join("b.fit.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // Missing flag, unknown field, wrong experiment kind: configuration errors.
    assert_eq!(pla(&["sample", "--eps", "0.1", "--out", "x.csv"], dir.path()).status.code(), Some(2));
    std::fs::write(dir.path().join("typo.json"), r#"{"schema_version":1,"experiment":{"bias_sweep":{"eigz":[1],"eps_grid":"0.1,0.2","out":"b.csv"}}}"#)
        .unwrap();
    assert_eq!(pla(&["bias-sweep", "--config", "typo.json"], dir.path()).status.code(), Some(2));
    std::fs::write(dir.path().join("kind.json"), r#"{"schema_version":1,"experiment":{"bias_sweep":{"eigs":[1],"eps_grid":"0.1,0.2","out":"b.csv"}}}"#)
        .unwrap();
    assert_eq!(pla(&["sample", "--config", "kind.json"], dir.path()).status.code(), Some(2));
    assert_eq!(pla(&["bound-check", "--alpha", "1", "--L", "1", "--eps-grid", "0.5", "--out", "b.csv"], dir.path()).status.code(), Some(2));
    // A proximal solve that cannot converge is a numerical failure.
    let starved = pla(
        &[
            "sample",
            "--target",
            r#"{"kind":"perturbed_quadratic","a":0.5}"#,
            "--eps",
            "0.5",
            "--steps",
            "3",
            "--chains",
            "2",
            "--prox-max-iter",
            "1",
            "--out",
            "s.csv",
        ],
        dir.path(),
    );
    assert_eq!(starved.status.code(), Some(3), "{}", String::from_utf8_lossy(&starved.stderr));
    let threads = Command::new(env!("CARGO_BIN_EXE_pla"))
        .args(["bias-sweep", "--eigs", "1", "--eps-grid", "0.1", "--out", "b.csv"])
        .current_dir(dir.path())
        .env("PLA_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(2));
}
