//! Trains 200-dimensional skip-gram embeddings on lemma sentences.
//!
//! ```text
//! cargo run --example train_embeddings -- [out.vec]
//! ```

use std::error::Error;
use std::path::PathBuf;

use spanforge::cli::lemma_sentences;
use spanforge::embeddings::{train_sgns, EmbeddingTable, SgnsParams};
use spanforge::synth::{self, SynthConfig};
use spanforge::textproc::Lemmatizer;

fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| (*x as f64) * (*y as f64)).sum();
    let na: f64 = a.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
    dot / (na * nb).max(f64::MIN_POSITIVE)
}

pub fn train(out: Option<PathBuf>) -> Result<EmbeddingTable, Box<dyn Error>> {
    let corpus = synth::generate(&SynthConfig {
        articles: 20,
        ..SynthConfig::default()
    });
    let sentences = lemma_sentences(&corpus.articles, Lemmatizer::builtin());
    let table = train_sgns(&sentences, &SgnsParams::default())?;
    if let Some(path) = out {
        table.save(&path)?;
        println!("wrote {}", path.display());
    }
    Ok(table)
}

pub fn run() -> Result<(), Box<dyn Error>> {
    let table = train(None)?;
    println!("{} lemmas x {} dims", table.len(), table.dimension());
    let words = table.words();
    let probe = &words[0];
    let v = table.lookup(probe).unwrap();
    let mut near: Vec<(f64, &String)> = words
        .iter()
        .filter(|w| *w != probe)
        .map(|w| (cosine(v, table.lookup(w).unwrap()), w))
        .collect();
    near.sort_by(|a, b| b.0.total_cmp(&a.0));
    for (sim, w) in near.iter().take(5) {
        println!("{probe} ~ {w}: {sim:.3}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    match std::env::args().nth(1) {
        Some(path) => train(Some(path.into())).map(|_| ()),
        None => run(),
    }
}
