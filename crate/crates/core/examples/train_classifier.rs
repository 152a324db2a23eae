//! Samples a balanced training set and fits the logistic regression.
//!
//! ```text
//! cargo run --example train_classifier -- [model.txt]
//! ```

use std::error::Error;
use std::path::PathBuf;

use spanforge::lexfeatures::{SentimentLexicon, ThesaurusLexicon};
use spanforge::model::{train, LogRegModel, TrainParams};
use spanforge::pipeline::{draw_samples, Featurizer, FeaturizerOptions, LabeledCorpus, SamplingPlan};
use spanforge::synth::{self, SynthConfig};
use spanforge::textproc::Lemmatizer;

pub fn fit(out: Option<PathBuf>) -> Result<LogRegModel, Box<dyn Error>> {
    let lemmatizer = Lemmatizer::builtin();
    let data = synth::generate(&SynthConfig {
        articles: 20,
        ..SynthConfig::default()
    });
    let vocab = data.vocabulary(lemmatizer);
    let w2v = synth::pseudo_pretrained(vocab.iter().map(String::as_str), 200, 1)?;
    let pre = synth::pseudo_pretrained(vocab.iter().map(String::as_str), 300, 2)?;
    let featurizer = Featurizer::new(
        &w2v,
        &pre,
        SentimentLexicon::builtin(),
        ThesaurusLexicon::builtin(),
        FeaturizerOptions::default(),
    )?;
    let corpus = LabeledCorpus::build(&data.articles, &data.annotations, lemmatizer)?;
    let samples = draw_samples(&corpus, &featurizer, &SamplingPlan::new(300, 500))?;
    let model = train(&samples, &TrainParams::default())?;
    println!(
        "{} samples, {} iterations, converged={}, objective {:.4}",
        samples.len(),
        model.meta.iterations,
        model.meta.converged,
        model.meta.objective
    );
    if let Some(path) = out {
        model.save(&path)?;
        println!("wrote {}", path.display());
    }
    Ok(model)
}

pub fn run() -> Result<(), Box<dyn Error>> {
    let model = fit(None)?;
    let mut top: Vec<(usize, f64)> = model.weights.iter().copied().enumerate().collect();
    top.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
    for (i, w) in top.iter().take(5) {
        println!("feature {i:>3}: {w:+.4}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    match std::env::args().nth(1) {
        Some(path) => fit(Some(path.into())).map(|_| ()),
        None => run(),
    }
}
