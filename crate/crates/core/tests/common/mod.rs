#![allow(dead_code)]

use std::path::{Path, PathBuf};

use spanforge::cli::cmd_train_embeddings;
use spanforge::config::RunConfig;

pub fn toy_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/toy")
}

/// The bundled toy configuration writing into `out`.
pub fn toy_config(out: &Path) -> RunConfig {
    let mut cfg = RunConfig::load(Some(&toy_dir().join("spanforge.toml")), &[]).unwrap();
    cfg.paths.output_dir = out.to_path_buf();
    cfg.paths.cache_dir = Some(out.join("cache"));
    cfg
}

/// Toy configuration with its token embedding table already trained.
pub fn trained_toy_config(out: &Path) -> RunConfig {
    let cfg = toy_config(out);
    cmd_train_embeddings(&cfg).unwrap();
    cfg
}
