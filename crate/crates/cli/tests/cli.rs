use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_summlab"));
    c.env_remove("SUMMLAB_SEED");
    c
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .args(["run", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path
}

fn results(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("results.json")).unwrap()).unwrap()
}

#[test]
fn diagonal_slopes_come_out_at_half_the_degree() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&bundled("corollary24.json"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let res = results(dir.path());
    let slopes: Vec<(String, f64)> = res["experiments"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["kind"] == "slope")
        .map(|e| {
            (
                e["name"].as_str().unwrap().to_owned(),
                e["estimate"]["slope"].as_f64().unwrap(),
            )
        })
        .collect();
    assert_eq!(slopes.len(), 3);
    for (i, (_, s)) in slopes.iter().enumerate() {
        assert!((s - (i + 1) as f64 / 2.0).abs() < 1e-9, "{slopes:?}");
    }
    for f in ["metadata.json", "bounds.csv", "slopes.csv", "plot_00_diagonal_m1.dat"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let csv = std::fs::read_to_string(dir.path().join("slopes.csv")).unwrap();
    assert!(csv.starts_with("experiment,m,p,q,slope,intercept,residual,conservative,grid\n"));
}

#[test]
fn oracle_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&bundled("pietsch.json"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(results(dir.path())["passed"], true);
}

#[test]
fn witness_config_runs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&bundled("witnesses.json"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn results_do_not_depend_on_threads_or_repetition() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let cfg = bundled("witnesses.json");
    assert!(run(&cfg, a.path(), &["--threads", "1"]).status.success());
    assert!(run(&cfg, b.path(), &["--threads", "4"]).status.success());
    assert!(run(&cfg, c.path(), &["--threads", "4"]).status.success());
    let read = |d: &Path| std::fs::read(d.join("results.json")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    assert_eq!(read(b.path()), read(c.path()));
    for f in ["bounds.csv", "slopes.csv"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap()
        );
    }
}

#[test]
fn schema_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for body in [
        r#"{"experiments": [{"kind": "nope"}]}"#,
        r#"{"experiments": [], "extra": 1}"#,
        r#"{"experiments": [{"kind": "bounds", "m": 0, "p": 1, "q": 1}]}"#,
        r#"{"experiments": [{"kind": "slope", "map": {"kind": "tensor", "m": 1}, "p": 2, "q": 2, "n_grid": [0]}]}"#,
        "not json",
    ] {
        let cfg = write_config(dir.path(), body);
        let o = run(&cfg, &dir.path().join("out"), &[]);
        assert_eq!(o.status.code(), Some(2), "{body}");
    }
    let o = run(&dir.path().join("missing.json"), &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failed_assertions_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"experiments": [{"kind": "slope", "map": {"kind": "tensor", "m": 1}, "p": 2, "q": 2,
            "n_grid": [2, 4, 8], "strategies": ["basis"], "assert": {"slope": 3.0}}]}"#,
    );
    let o = run(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("slope"));
    assert_eq!(results(&dir.path().join("out"))["passed"], false);
}

#[test]
fn empty_config_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"experiments": []}"#);
    let o = run(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(0));
    let res = results(&dir.path().join("out"));
    assert_eq!(res["experiments"].as_array().unwrap().len(), 0);
    assert_eq!(res["seed"], 42);
}

#[test]
fn seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let plain = write_config(dir.path(), r#"{"experiments": []}"#);
    let seed_of = |o: &Output| {
        assert!(o.status.success());
        results(&out)["seed"].as_u64().unwrap()
    };
    let with_env = |cfg: &Path, extra: &[&str]| {
        bin()
            .env("SUMMLAB_SEED", "7")
            .args(["run", "--config"])
            .arg(cfg)
            .arg("--out")
            .arg(&out)
            .args(extra)
            .output()
            .unwrap()
    };
    assert_eq!(seed_of(&with_env(&plain, &[])), 7);
    assert_eq!(seed_of(&with_env(&plain, &["--seed", "9"])), 9);
    let seeded = dir.path().join("seeded.json");
    std::fs::write(&seeded, r#"{"seed": 11, "experiments": []}"#).unwrap();
    assert_eq!(seed_of(&with_env(&seeded, &[])), 11);
    assert_eq!(seed_of(&with_env(&seeded, &["--seed", "9"])), 9);
    let bad = bin()
        .env("SUMMLAB_SEED", "abc")
        .args(["run", "--config"])
        .arg(&plain)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

fn bounds(args: &[&str]) -> String {
    let o = bin().arg("bounds").args(args).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn row_value(table: &str, kind: &str, branch: &str) -> f64 {
    table
        .lines()
        .find_map(|l| {
            let cols: Vec<&str> = l.split_whitespace().collect();
            (cols.len() >= 3 && cols[0] == kind && cols[1].starts_with(branch)).then(|| cols[2].parse().ok())?
        })
        .unwrap_or_else(|| panic!("no {kind} {branch} row in\n{table}"))
}

#[test]
fn bounds_subcommand_prints_the_formulas() {
    let t = bounds(&["--m", "2", "--p", "2", "--q", "2"]);
    assert!((row_value(&t, "mult_upper", "q<=2") - 1.0).abs() < 1e-12, "{t}");
    assert!((row_value(&t, "exact", "l2->c0") - 1.0).abs() < 1e-12, "{t}");
    let t = bounds(&["--m", "2", "--p", "0.4", "--q", "1", "--r", "2"]);
    assert!((row_value(&t, "pol_lower_cotype", "(b)") - 1.0).abs() < 1e-12, "{t}");
    let t = bounds(&["--m", "1", "--p", "3", "--q", "2", "--r", "inf"]);
    assert!((row_value(&t, "mult_upper", "q<=2") - 1.0 / 3.0).abs() < 1e-12, "{t}");
    let o = bin()
        .args(["bounds", "--m", "1", "--p", "1", "--q", "1", "--r", "x"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
