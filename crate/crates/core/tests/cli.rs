use std::path::Path;
use std::process::Command;

use systole_core::cli::{main_with, Cache, CacheEntry, EXIT_INVARIANT, EXIT_OK, EXIT_TIMEOUT};

fn run(cache: &Path, args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["systole", "--cache-dir", cache.to_str().unwrap()];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = main_with(&argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn table_m5_is_computed_then_cached() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = run(dir.path(), &["table", "--m", "5"]);
    assert_eq!(code, EXIT_OK, "{}", err);
    assert_eq!(out, "5,5,20,8,10,10,12\n");
    assert!(err.contains("min=computed max=computed rank=computed index=computed"), "{}", err);
    for kind in ["min", "max", "rank", "index"] {
        assert!(dir.path().join("m5").join(format!("{}.json", kind)).exists());
    }
    let (code, again, err) = run(dir.path(), &["table", "--m", "5"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(again, out);
    assert!(err.contains("min=cached max=cached rank=cached index=cached"), "{}", err);
}

#[test]
fn table_json_carries_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(dir.path(), &["table", "--m", "6", "--skip", "min,max,index", "--output", "json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["rank"]["value"], 31);
    assert_eq!(v["rank"]["provenance"], "computed");
    assert_eq!(v["max"]["provenance"], "skipped");
    assert!(v["max"]["value"].is_null());
    let (_, csv, _) = run(dir.path(), &["table", "--m", "6", "--skip", "min,max,index"]);
    assert_eq!(csv, "6,17,48,-,-,31,-\n");
}

#[test]
fn heavy_cells_are_skipped_at_m7() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = run(dir.path(), &["table", "--m", "7"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "7,49,112,-,-,84,-\n");
    assert!(err.contains("min=skipped"));
    let (code, _, err) = run(dir.path(), &["filling", "max", "--m", "7"]);
    assert_eq!(code, EXIT_INVARIANT);
    assert!(err.contains("--unbounded-runtime"));
    let (code, _, _) = run(dir.path(), &["index", "--m", "8"]);
    assert_eq!(code, EXIT_INVARIANT);
}

#[test]
fn orbits_m7() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(dir.path(), &["orbits", "--m", "7", "--max-size", "7"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.trim(), "923");
}

#[test]
fn surface_dot_is_four_regular() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(dir.path(), &["surface", "--m", "5", "--output", "dot"]);
    assert_eq!(code, EXIT_OK);
    let nodes: Vec<&str> = out.lines().filter(|l| l.trim_end().ends_with(';') && !l.contains("--")).collect();
    assert_eq!(nodes.len(), 20);
    let edges: Vec<(&str, &str)> = out
        .lines()
        .filter_map(|l| l.trim().trim_end_matches(';').split_once(" -- "))
        .collect();
    for node in &nodes {
        let name = node.trim().trim_end_matches(';');
        let degree = edges.iter().filter(|(a, b)| *a == name || *b == name).count();
        assert_eq!(degree, 4, "{}", name);
    }
    let (_, json, _) = run(dir.path(), &["surface", "--m", "5"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["genus"], 5);
    assert_eq!(v["systoles"].as_array().unwrap().len(), 20);
}

#[test]
fn corrupted_cache_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["rank", "--m", "5"]).0, EXIT_OK);
    let path = dir.path().join("m5/rank.json");
    let text = std::fs::read_to_string(&path).unwrap();
    let mut entry: CacheEntry = serde_json::from_str(&text).unwrap();
    entry.payload = serde_json::json!(11);
    std::fs::write(&path, serde_json::to_string(&entry).unwrap()).unwrap();
    let (code, _, err) = run(dir.path(), &["rank", "--m", "5"]);
    assert_ne!(code, EXIT_OK);
    assert!(err.contains("checksum"), "{}", err);
    std::fs::write(&path, "{ not json").unwrap();
    assert_ne!(run(dir.path(), &["rank", "--m", "5"]).0, EXIT_OK);
}

#[test]
fn stale_entries_are_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), &["rank", "--m", "5"]);
    let path = dir.path().join("m5/rank.json");
    let mut entry: CacheEntry = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    entry.code_version = "older".into();
    std::fs::write(&path, serde_json::to_string(&entry).unwrap()).unwrap();
    let (code, out, _) = run(dir.path(), &["rank", "--m", "5", "--output", "json"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("\"computed\""));
    assert!(Cache::at(dir.path()).load(5, "rank").unwrap().is_some());
}

#[test]
fn disabled_cache_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(dir.path(), &["rank", "--m", "6", "--no-cache"]);
    assert_eq!((code, out.as_str()), (EXIT_OK, "31\n"));
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn time_limit_gives_partial_results() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(dir.path(), &["filling", "min", "--m", "6", "--time-limit", "0.01"]);
    assert_eq!(code, EXIT_TIMEOUT, "{}", err);
    let (code, out, err) = run(dir.path(), &["table", "--m", "6", "--skip", "max,index", "--time-limit", "0.01"]);
    assert_eq!(code, EXIT_TIMEOUT, "{}", err);
    assert_eq!(out, "6,17,48,-,-,31,-\n");
    assert!(!dir.path().join("m6/min.json").exists());
}

#[test]
fn index_csv_is_the_jacobian() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(dir.path(), &["index", "--m", "5", "--output", "csv"]);
    assert_eq!(code, EXIT_OK);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r.split(',').count() == 24));
    let (_, json, _) = run(dir.path(), &["index", "--m", "5", "--fd-step", "5e-6"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["index"], 12);
    assert_eq!(v["fd_step"], 5e-6);
    assert!(!dir.path().join("m5/index.json").exists());
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_systole");
    let dir = tempfile::tempdir().unwrap();
    let status = |args: &[&str]| Command::new(bin).args(args).env("SYSTOLE_CACHE_DIR", dir.path()).output().unwrap();
    let ok = status(&["rank", "--m", "7"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&ok.stdout), "84\n");
    assert!(dir.path().join("m7/rank.json").exists());
    assert_eq!(status(&["--help"]).status.code(), Some(0));
    assert_eq!(status(&["filling", "sideways"]).status.code(), Some(2));
    assert_eq!(status(&["table", "--m", "8"]).status.code(), Some(0));
    assert_ne!(status(&["surface", "--m", "4"]).status.code(), Some(0));
}
