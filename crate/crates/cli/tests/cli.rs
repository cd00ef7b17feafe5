//! End-to-end tests that drive the compiled `sema` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sema() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sema"))
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn run_writes_the_scenario_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = sema()
        .arg("run")
        .arg(workspace_root().join("scenarios/table1.toml"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("table1: wrote"));

    let csv = fs::read_to_string(dir.path().join("table1.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("scenario,series,x,x_unit,y,y_unit,source")
    );
    assert!(csv.contains("table1,sema_static/voice,,,188,bytes,computed"));
}

#[test]
fn reruns_match_and_seed_overrides_do_not() {
    let scenario = workspace_root().join("scenarios/table1.toml");
    let mut outputs = Vec::new();
    for set in [None, None, Some("seed=9")] {
        let dir = tempfile::tempdir().unwrap();
        let mut cmd = sema();
        cmd.arg("run").arg(&scenario).arg("--out").arg(dir.path());
        if let Some(kv) = set {
            cmd.args(["--set", kv]);
        }
        let out = cmd.output().unwrap();
        assert!(out.status.success(), "stderr: {}", stderr(&out));
        outputs.push(fs::read(dir.path().join("table1.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_ne!(outputs[0], outputs[2]);
}

#[test]
fn sweep_runs_every_scenario_in_the_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = sema()
        .arg("sweep")
        .arg("--dir")
        .arg(workspace_root().join("scenarios"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    for name in [
        "table1.csv",
        "fig_latency.csv",
        "fig_breakdown.csv",
        "fig_gap_rate.csv",
        "fig_rate_accuracy.csv",
    ] {
        assert!(dir.path().join(name).is_file(), "missing {name}");
    }
}

#[test]
fn the_out_dir_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let out = sema()
        .arg("run")
        .arg(workspace_root().join("scenarios/table1.toml"))
        .env("SEMA_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(dir.path().join("table1.csv").is_file());
}

#[test]
fn token_frames_round_trip_through_the_binary() {
    let out = sema()
        .args(["frame", "encode", "--tokens", "11,48,85"])
        .args(["--codebook-id", "1", "--sequence", "7"])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let hex = stdout(&out).trim().to_string();
    assert_eq!(hex, "100001000300000007000000000000000002c30154");

    let out = sema().args(["frame", "decode", &hex]).output().unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["modality"], "audio_tokens");
    assert_eq!(doc["codebook_id"], 1);
    assert_eq!(doc["count"], 3);
    assert_eq!(doc["sequence"], 7);
    assert_eq!(doc["payload"]["tokens"], serde_json::json!([11, 48, 85]));
}

#[test]
fn text_frames_round_trip_through_the_binary() {
    let out = sema()
        .args(["frame", "encode", "--modality", "structured_text"])
        .args(["--text", "click e17", "--sequence", "3"])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let hex = stdout(&out).trim().to_string();

    let out = sema().args(["frame", "decode", &hex]).output().unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["modality"], "structured_text");
    assert_eq!(doc["payload"]["text"], "click e17");
}

#[test]
fn generated_corpora_load_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corpus.json");
    let out = sema()
        .args(["corpus", "gen", "--count", "3", "--seed", "5", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("wrote 3 snapshots"));

    let snapshots = sema_core::load_corpus(&path).unwrap();
    assert_eq!(snapshots.len(), 3);
    assert!(snapshots.iter().all(|s| s.width == 1920 && s.height == 1080));
}

#[test]
fn config_mistakes_exit_with_code_two() {
    let cases: Vec<Vec<&str>> = vec![
        vec!["run", "no/such/scenario.toml"],
        vec!["run", "also_missing.toml", "--set", "seed"],
        vec!["frame", "decode", "zz"],
        vec!["frame", "encode", "--modality", "smoke_signals", "--text", "hi"],
        vec!["frame", "encode", "--modality", "audio_tokens"],
        vec!["corpus", "gen", "--min-nodes", "4", "--max-nodes", "4"],
    ];
    for args in cases {
        let dir = tempfile::tempdir().unwrap();
        let out = sema().args(&args).current_dir(dir.path()).output().unwrap();
        assert_eq!(
            out.status.code(),
            Some(2),
            "args {args:?}: stderr {}",
            stderr(&out)
        );
        assert!(stderr(&out).starts_with("error:"), "args {args:?}");
    }
}

#[test]
fn the_acceptance_check_passes_and_polices_its_trial_floor() {
    let out = sema().arg("check").output().unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("overall: PASS"));

    let out = sema().args(["check", "--trials", "60"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("overall: FAIL"));
    assert!(stdout(&out).contains("[FAIL] trials per sweep point"));
}
