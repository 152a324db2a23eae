//! Writes a synthetic corpus with planted propaganda fragments.
//!
//! ```text
//! cargo run --example synthetic_corpus -- <dir> [articles]
//! cargo run --example synthetic_corpus -- --toy data/toy
//! ```
//!
//! `--toy` regenerates the bundled toy corpus together with its run
//! configuration.

use std::error::Error;
use std::fs;
use std::path::Path;

use spanforge::synth::{self, SynthConfig};

pub const TOY_CONFIG: &str = r#"# Run configuration for the bundled toy corpus.
seed = 1

[paths]
train_articles = ["train/articles"]
train_labels = ["train/labels.tsv"]
eval_articles = ["dev/articles"]
eval_labels = ["dev/labels.tsv"]
pretrained = "pretrained_300.vec"
output_dir = "out"

[sampling]
n_propaganda = 150
n_none = 300

[sweep]
balance_scale = 0.01
"#;

pub fn write(dir: &Path, toy: bool, articles: usize) -> Result<synth::Workspace, Box<dyn Error>> {
    let (train, dev) = if toy {
        (synth::toy_config(), synth::toy_dev_config())
    } else {
        let train = SynthConfig {
            articles,
            ..SynthConfig::default()
        };
        let dev = SynthConfig {
            articles: (articles / 5).max(1),
            first_id: 800_000_000,
            seed: train.seed + 1,
            ..SynthConfig::default()
        };
        (train, dev)
    };
    let ws = synth::write_workspace(dir, &train, &dev)?;
    if toy {
        fs::write(dir.join("spanforge.toml"), TOY_CONFIG)?;
    }
    Ok(ws)
}

pub fn run() -> Result<(), Box<dyn Error>> {
    let dir = tempfile::tempdir()?;
    let ws = write(dir.path(), false, 12)?;
    let articles = spanforge::corpus::load_articles(&ws.train_articles)?;
    let labels = spanforge::corpus::parse_span_labels(&ws.train_labels, true)?;
    println!("{} articles, {} annotated fragments", articles.len(), labels.len());
    let first = &labels[0];
    let article = articles.iter().find(|a| a.id == first.article_id).unwrap();
    println!(
        "{} [{}] {:?}",
        first.article_id,
        first.technique.as_deref().unwrap_or("-"),
        spanforge::textproc::char_slice(&article.text, first.start, first.end)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match args.as_slice() {
        [flag, dir] if flag == "--toy" => {
            write(Path::new(dir), true, 0)?;
            println!("toy corpus written to {dir}");
        }
        [dir] => {
            write(Path::new(dir), false, 50)?;
        }
        [dir, n] => {
            write(Path::new(dir), false, n.parse()?)?;
        }
        _ => run()?,
    }
    Ok(())
}
