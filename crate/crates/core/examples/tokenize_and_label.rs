//! Tokenizes an article and labels each token against span annotations.
//!
//! ```text
//! cargo run --example tokenize_and_label
//! ```

use std::error::Error;

use spanforge::corpus::{label_tokens, Article, SpanAnnotation};
use spanforge::textproc::{split_sentences, Lemmatizer};

pub fn run() -> Result<(), Box<dyn Error>> {
    let article = Article::new(
        "42",
        "They are destroying our country!\nWe must stop them now. The council met on Tuesday.",
    );
    let gold = [
        SpanAnnotation::new("42", 10, 31).with_technique("Loaded_Language"),
        SpanAnnotation::new("42", 33, 55).with_technique("Slogans"),
    ];
    let lemmatizer = Lemmatizer::builtin();
    let tokens = lemmatizer.tokenize(&article.text);
    println!("{} sentences, {} tokens", split_sentences(&article.text).len(), tokens.len());

    let refs: Vec<&SpanAnnotation> = gold.iter().collect();
    for t in label_tokens(&article, &tokens, &refs)? {
        println!(
            "{:>3}..{:<3} s{} {:<12} {:<12} {:?} {}",
            t.token.start,
            t.token.end,
            t.token.sentence_index,
            t.token.surface,
            t.token.lemma,
            t.label,
            t.techniques.join(",")
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
