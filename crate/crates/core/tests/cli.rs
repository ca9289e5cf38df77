//! End-to-end runs of the `xychain` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use xychain::export::{parse_table, sidecar_path};

fn xychain(args: &[&str], env: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_xychain"));
    cmd.args(args).env_remove("XYCHAIN_CACHE_DIR");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> (String, String) {
    let out = dir.join(name);
    let mut full: Vec<&str> = args.to_vec();
    let out_s = out.to_str().unwrap().to_string();
    full.extend(["--output", &out_s]);
    let res = xychain(&full, &[]);
    assert!(
        res.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&res.stderr)
    );
    (
        std::fs::read_to_string(&out).unwrap(),
        std::fs::read_to_string(sidecar_path(&out)).unwrap(),
    )
}

const TANGLE: &[&str] = &["tangle", "--N", "12,13", "--gamma", "0.5", "--lambda", "0.6:1.4:0.2"];

#[test]
fn output_is_independent_of_workers_and_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let mut a1 = TANGLE.to_vec();
    a1.extend(["--workers", "1"]);
    let mut a4 = TANGLE.to_vec();
    a4.extend(["--workers", "4"]);
    let first = run_to(dir.path(), "w1.csv", &a1);
    let again = run_to(dir.path(), "w1b.csv", &a1);
    let four = run_to(dir.path(), "w4.csv", &a4);
    assert_eq!(first, again);
    assert_eq!(first.0, four.0);
    // The worker count is not part of the sidecar config either.
    assert_eq!(first.1, four.1);
}

#[test]
fn warm_cache_reproduces_cold_output() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let cache_s = cache.to_str().unwrap().to_string();
    let mut args = vec!["noise", "--N", "16", "--lambda", "0.8,1.0,1.2", "--cache-dir", &cache_s];
    args.extend(["--workers", "2"]);
    let cold = run_to(dir.path(), "cold.csv", &args);
    let entries = walk(&cache);
    assert_eq!(entries.len(), 3);
    let warm = run_to(dir.path(), "warm.csv", &args);
    assert_eq!(cold, warm);
    let uncached = run_to(
        dir.path(),
        "none.csv",
        &["noise", "--N", "16", "--lambda", "0.8,1.0,1.2"],
    );
    assert_eq!(cold.0, uncached.0);

    // A corrupted entry is recomputed, not trusted.
    std::fs::write(&entries[0], "garbage").unwrap();
    let repaired = run_to(dir.path(), "repaired.csv", &args);
    assert_eq!(cold.0, repaired.0);
}

#[test]
fn cache_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let env_cache = dir.path().join("env-cache");
    let flag_cache = dir.path().join("flag-cache");
    let res = xychain(
        &[
            "mx",
            "--N",
            "16",
            "--lambda",
            "0.5,0.7",
            "--cache-dir",
            flag_cache.to_str().unwrap(),
        ],
        &[("XYCHAIN_CACHE_DIR", &env_cache)],
    );
    assert!(res.status.success());
    assert_eq!(walk(&env_cache).len(), 2);
    assert!(!flag_cache.exists());
}

fn walk(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    if let Ok(rd) = std::fs::read_dir(root) {
        for e in rd.flatten() {
            let p = e.path();
            if p.is_dir() {
                out.extend(walk(&p));
            } else {
                out.push(p);
            }
        }
    }
    out.sort();
    out
}

#[test]
fn tables_carry_metadata_and_parse_back() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, sidecar) = run_to(dir.path(), "t.csv", TANGLE);
    let t = parse_table(&csv).unwrap();
    assert_eq!(t.columns, ["lambda", "t1", "t2", "t3", "t4"]);
    assert_eq!(t.meta("command"), Some("tangle"));
    assert_eq!(t.meta("gamma"), Some("0.5"));
    assert_eq!(t.meta("lambda_points"), Some("5"));
    assert!(t.meta("config_digest").unwrap().len() == 64);
    assert!(t.meta("sectors N=12").is_some());
    let labels: Vec<&str> = t.blocks.iter().map(|b| b.0.as_str()).collect();
    assert_eq!(labels, ["N=12", "N=13"]);
    for row in t.rows() {
        assert_eq!(row.len(), 5);
        for cell in row {
            cell.parse::<f64>().unwrap();
        }
    }
    let json: serde_json::Value = serde_json::from_str(&sidecar).unwrap();
    assert_eq!(json["config_digest"].as_str(), t.meta("config_digest"));
    assert_eq!(json["summary"]["sizes"][0]["N"], 12);
}

#[test]
fn every_command_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, _) = run_to(
        dir.path(),
        "e.csv",
        &["entropy", "--N", "16", "--lambda", "1", "--spacings", "1,2,4"],
    );
    let t = parse_table(&csv).unwrap();
    assert_eq!(t.rows().count(), 3);
    let (csv, side) = run_to(
        dir.path(),
        "c.csv",
        &["collapse", "--N", "12,16", "--lambda", "0.7:1.3:0.05", "--nu", "1,2"],
    );
    let t = parse_table(&csv).unwrap();
    assert!(t.meta("spread nu=1").is_some() && t.meta("spread nu=2").is_some());
    assert!(t.meta("lambda_m N=16").is_some());
    assert!(serde_json::from_str::<serde_json::Value>(&side).unwrap()["summary"]["spreads"].is_array());
    let (csv, _) = run_to(
        dir.path(),
        "m.csv",
        &[
            "mx",
            "--N",
            "32",
            "--lambda",
            "0.5:0.95:0.05",
            "--fit-window",
            "0.5:0.95",
        ],
    );
    assert_eq!(parse_table(&csv).unwrap().rows().count(), 10);

    let out = dir.path().join("oracle.csv");
    let res = xychain(&["oracle-check", "--N", "6", "--output", out.to_str().unwrap()], &[]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let t = parse_table(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(t.meta("failures"), Some("0"));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(&cfg, "gamma = 0.5\nsizes = [10]\nlambda = \"0.5:1.0:0.25\"\n").unwrap();
    let c = cfg.to_str().unwrap();
    let (csv, _) = run_to(dir.path(), "a.csv", &["noise", "--config", c]);
    let t = parse_table(&csv).unwrap();
    assert_eq!(
        (t.meta("gamma"), t.meta("sizes"), t.rows().count()),
        (Some("0.5"), Some("10"), 3)
    );
    let (csv, _) = run_to(
        dir.path(),
        "b.csv",
        &["noise", "--config", c, "--gamma", "1", "--N", "12"],
    );
    let t = parse_table(&csv).unwrap();
    assert_eq!((t.meta("gamma"), t.meta("sizes")), (Some("1"), Some("12")));
}

#[test]
fn invalid_input_exits_with_code_two() {
    for args in [
        &["tangle", "--N", "8", "--lambda", "0.5", "--gamma", "1.5"][..],
        &["tangle", "--lambda", "0.5"],
        &["tangle", "--N", "8", "--lambda", "1:0:0.1"],
        &["entropy", "--N", "8", "--lambda", "1", "--spacings", "3"],
        &["tangle", "--N", "2", "--lambda", "1"],
        &["oracle-check", "--N", "14"],
        &["no-such-command"],
    ] {
        let res = xychain(args, &[]);
        assert_eq!(res.status.code(), Some(2), "{args:?}");
        assert!(!res.stderr.is_empty());
    }
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "gamma = 1.0\nunknown_key = 3\n").unwrap();
    let res = xychain(&["noise", "--config", bad.to_str().unwrap()], &[]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn stdout_when_no_output_path() {
    let res = xychain(&["noise", "--N", "8", "--lambda", "0.5"], &[]);
    assert!(res.status.success());
    let t = parse_table(&String::from_utf8(res.stdout).unwrap()).unwrap();
    assert_eq!(t.columns, ["lambda", "n0", "delta00", "threshold", "entangled_flag"]);
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "toml") || path.ends_with("acceptance.toml") {
            continue;
        }
        let cfg = xychain::config::FileConfig::load(&path).unwrap();
        assert!(cfg.sizes.is_some_and(|s| !s.is_empty()), "{}", path.display());
        cfg.lambda.unwrap().grid().unwrap().points().unwrap();
        seen += 1;
    }
    assert!(seen >= 5);
}
