//! Builds 843-dimensional token vectors from a context window.
//!
//! ```text
//! cargo run --example featurize_window -- [n]
//! ```

use std::error::Error;

use spanforge::lexfeatures::{SentimentLexicon, ThesaurusLexicon};
use spanforge::pipeline::{Block, Featurized, Featurizer, FeaturizerOptions, FeatureLayout};
use spanforge::synth::{self, SynthConfig};
use spanforge::textproc::Lemmatizer;

pub fn featurize(n: usize) -> Result<(), Box<dyn Error>> {
    let corpus = synth::generate(&SynthConfig {
        articles: 1,
        ..SynthConfig::default()
    });
    let lemmatizer = Lemmatizer::builtin();
    let vocab = corpus.vocabulary(lemmatizer);
    let w2v = synth::pseudo_pretrained(vocab.iter().map(String::as_str), 200, 1)?;
    let pre = synth::pseudo_pretrained(vocab.iter().map(String::as_str), 300, 2)?;
    let options = FeaturizerOptions {
        window_n: n,
        ..FeaturizerOptions::default()
    };
    let featurizer = Featurizer::new(&w2v, &pre, SentimentLexicon::builtin(), ThesaurusLexicon::builtin(), options)?;

    let tokens = lemmatizer.tokenize(&corpus.articles[0].text);
    println!("window n = {n}, dim = {}", featurizer.dim());
    for (i, f) in featurizer.featurize_article(&tokens)?.iter().enumerate().take(6) {
        let Featurized::Vector(v) = f else {
            println!("{:<12} dropped", tokens[i].surface);
            continue;
        };
        let norms: Vec<String> = FeatureLayout::STANDARD
            .blocks()
            .iter()
            .map(|&b: &Block| {
                let n: f64 = v.block(b).unwrap_or(&[]).iter().map(|x| x * x).sum::<f64>().sqrt();
                format!("{}={n:.2}", b.name())
            })
            .collect();
        println!("{:<12} {}", tokens[i].surface, norms.join(" "));
    }
    Ok(())
}

pub fn run() -> Result<(), Box<dyn Error>> {
    featurize(7)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    match std::env::args().nth(1) {
        Some(n) => featurize(n.parse()?),
        None => run(),
    }
}
