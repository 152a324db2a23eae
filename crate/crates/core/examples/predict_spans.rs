//! Labels held-out tokens and merges Propaganda runs into character spans.
//!
//! ```text
//! cargo run --example predict_spans
//! ```

use std::error::Error;

use spanforge::corpus::Label;
use spanforge::lexfeatures::{SentimentLexicon, ThesaurusLexicon};
use spanforge::model::{train, TrainParams};
use spanforge::pipeline::{draw_samples, Featurized, Featurizer, FeaturizerOptions, LabeledCorpus, SamplingPlan};
use spanforge::spans::{format_predictions, merge_tokens_to_spans, PredictionSpan};
use spanforge::synth::{self, SynthConfig};
use spanforge::textproc::{char_slice, Lemmatizer};

pub fn run() -> Result<(), Box<dyn Error>> {
    let lemmatizer = Lemmatizer::builtin();
    let train_set = synth::generate(&SynthConfig {
        articles: 20,
        ..SynthConfig::default()
    });
    let held_out = synth::generate(&SynthConfig {
        articles: 2,
        first_id: 900_000_000,
        seed: 99,
        ..SynthConfig::default()
    });
    let mut vocab = train_set.vocabulary(lemmatizer);
    vocab.extend(held_out.vocabulary(lemmatizer));
    let w2v = synth::pseudo_pretrained(vocab.iter().map(String::as_str), 200, 1)?;
    let pre = synth::pseudo_pretrained(vocab.iter().map(String::as_str), 300, 2)?;
    let featurizer = Featurizer::new(
        &w2v,
        &pre,
        SentimentLexicon::builtin(),
        ThesaurusLexicon::builtin(),
        FeaturizerOptions::default(),
    )?;
    let corpus = LabeledCorpus::build(&train_set.articles, &train_set.annotations, lemmatizer)?;
    let model = train(&draw_samples(&corpus, &featurizer, &SamplingPlan::new(300, 500))?, &TrainParams::default())?;

    let mut spans: Vec<PredictionSpan> = Vec::new();
    for article in &held_out.articles {
        let tokens = lemmatizer.tokenize(&article.text);
        let labels = featurizer
            .featurize_article(&tokens)?
            .iter()
            .map(|f| match f {
                Featurized::Vector(v) => model.predict_one(v.values(), 0.5),
                Featurized::Dropped => Ok(Label::None),
            })
            .collect::<Result<Vec<_>, _>>()?;
        spans.extend(merge_tokens_to_spans(&article.id, &tokens, &labels, 0)?);
    }
    print!("{}", format_predictions(&spans[..spans.len().min(5)]));
    for s in spans.iter().take(5) {
        let text = &held_out.articles.iter().find(|a| a.id == s.article_id).unwrap().text;
        println!("{:?}", char_slice(text, s.start, s.end));
    }
    println!("{} spans predicted", spans.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
