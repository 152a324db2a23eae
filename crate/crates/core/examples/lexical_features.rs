//! Sentiment and thesaurus-category features of a context window.
//!
//! ```text
//! cargo run --example lexical_features -- "some text to score"
//! ```

use std::error::Error;

use spanforge::lexfeatures::{sentiment_vector, thesaurus_vector, SentimentLexicon, ThesaurusLexicon};
use spanforge::textproc::tokenize;

pub fn score(text: &str) {
    let lemmas: Vec<String> = tokenize(text).into_iter().map(|t| t.lemma).collect();
    let s = sentiment_vector(SentimentLexicon::builtin(), &lemmas);
    println!("{text:?}");
    println!("  neg {:.3} neu {:.3} pos {:.3} compound {:+.3}", s.neg, s.neu, s.pos, s.compound);
    let thesaurus = ThesaurusLexicon::builtin();
    let profile = thesaurus_vector(thesaurus, &lemmas);
    let mut active: Vec<(usize, f64)> = profile.iter().copied().enumerate().filter(|(_, v)| *v > 0.0).collect();
    active.sort_by(|a, b| b.1.total_cmp(&a.1));
    for (i, v) in active.iter().take(4) {
        println!("  {:<24} {v:.3}", thesaurus.categories()[*i]);
    }
}

pub fn run() -> Result<(), Box<dyn Error>> {
    for text in [
        "a terrible, shameful betrayal of our nation",
        "not a terrible result at all",
        "the committee will meet on Tuesday",
    ] {
        score(text);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() {
        return run();
    }
    score(&args.join(" "));
    Ok(())
}
