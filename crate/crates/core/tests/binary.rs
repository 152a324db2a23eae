mod common;

use std::process::Command;

use common::toy_dir;

fn spanforge(out: &std::path::Path) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_spanforge"));
    cmd.arg("--config")
        .arg(toy_dir().join("spanforge.toml"))
        .arg("--output-dir")
        .arg(out)
        .env_remove("SPANFORGE_CACHE");
    cmd
}

#[test]
fn config_errors_exit_2() {
    let out = tempfile::tempdir().unwrap();
    let status = spanforge(out.path()).args(["--set", "model.C=-1", "train"]).output().unwrap();
    assert_eq!(status.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&status.stderr).contains("[validate]"));

    let status = Command::new(env!("CARGO_BIN_EXE_spanforge"))
        .args(["--config", "/nonexistent/spanforge.toml", "train"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
}

#[test]
fn data_errors_exit_3_and_cache_env_is_honoured() {
    let out = tempfile::tempdir().unwrap();
    let cache = out.path().join("elsewhere");
    assert!(spanforge(out.path()).arg("train-embeddings").status().unwrap().success());
    let o = spanforge(out.path())
        .args(["--set", "sampling.n_none=1000000", "train"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("None"));

    let st = spanforge(out.path()).env("SPANFORGE_CACHE", &cache).arg("train").status().unwrap();
    assert!(st.success());
    let entries: Vec<_> = std::fs::read_dir(&cache).unwrap().collect();
    assert_eq!(entries.len(), 1);
    let default_cache = out.path().join("cache");
    let stray = std::fs::read_dir(&default_cache).map(|d| d.count()).unwrap_or(0);
    assert_eq!(stray, 0);
}

#[test]
fn malformed_input_and_runtime_errors() {
    let out = tempfile::tempdir().unwrap();
    let missing = out.path().join("missing.tsv");
    let o = spanforge(out.path())
        .args(["evaluate", "--pred"])
        .arg(&missing)
        .arg("--gold")
        .arg(toy_dir().join("dev/labels.tsv"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(&missing, "1\tnot-a-number\t4\n").unwrap();
    let o = spanforge(out.path())
        .args(["evaluate", "--pred"])
        .arg(&missing)
        .arg("--gold")
        .arg(toy_dir().join("dev/labels.tsv"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    let wrong_dim = out.path().join("model.txt");
    std::fs::write(&wrong_dim, "LOGREG v1 dim=3 C=0.1\n0.1\n0.2\n0.3\n0\n").unwrap();
    assert!(spanforge(out.path()).arg("train-embeddings").status().unwrap().success());
    let o = spanforge(out.path()).args(["predict", "--model"]).arg(&wrong_dim).output().unwrap();
    assert_eq!(o.status.code(), Some(3));

    let o = spanforge(out.path())
        .args(["--set", "embeddings.min_count=1000000", "train-embeddings"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("[embed] training error"));
}
