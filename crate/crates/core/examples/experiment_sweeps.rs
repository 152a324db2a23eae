//! Window-size, class-balance and feature-ablation sweeps on a small
//! synthetic workspace.
//!
//! ```text
//! cargo run --example experiment_sweeps -- [config.toml]
//! ```

use std::error::Error;
use std::fs;
use std::path::Path;

use spanforge::cli::{cmd_ablate, cmd_sweep_balance, cmd_sweep_window, cmd_train_embeddings};
use spanforge::config::RunConfig;
use spanforge::synth;

fn show(path: &Path, columns: usize) -> Result<(), Box<dyn Error>> {
    println!("== {}", path.file_name().unwrap().to_string_lossy());
    for line in fs::read_to_string(path)?.lines() {
        let cut: Vec<&str> = line.split('\t').take(columns).collect();
        let f1 = line.split('\t').nth(columns + 6).unwrap_or("");
        println!("{}\t{f1}", cut.join("\t"));
    }
    Ok(())
}

pub fn sweep(cfg: &RunConfig, windows: &[usize]) -> Result<(), Box<dyn Error>> {
    if !cfg.w2v_path().exists() {
        cmd_train_embeddings(cfg)?;
    }
    show(&cmd_sweep_window(cfg, Some(windows), None)?, 1)?;
    show(&cmd_sweep_balance(cfg, None, None)?, 2)?;
    show(&cmd_ablate(cfg, None)?, 4)?;
    Ok(())
}

pub fn run() -> Result<(), Box<dyn Error>> {
    let dir = tempfile::tempdir()?;
    let ws = synth::write_workspace(dir.path(), &synth::toy_config(), &synth::toy_dev_config())?;
    let toml = format!(
        "[paths]\ntrain_articles = [{:?}]\ntrain_labels = [{:?}]\neval_articles = [{:?}]\neval_labels = [{:?}]\n\
         pretrained = {:?}\noutput_dir = {:?}\n[sampling]\nn_propaganda = 150\nn_none = 300\n[sweep]\nbalance_scale = 0.01\n",
        ws.train_articles,
        ws.train_labels,
        ws.dev_articles,
        ws.dev_labels,
        ws.pretrained,
        dir.path().join("out"),
    );
    let cfg = RunConfig::from_toml(&toml, dir.path(), &[])?;
    sweep(&cfg, &[1, 3, 7])
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    match std::env::args().nth(1) {
        Some(path) => {
            let cfg = RunConfig::load(Some(Path::new(&path)), &[])?;
            sweep(&cfg, &cfg.sweep.window_values.clone())
        }
        None => run(),
    }
}
