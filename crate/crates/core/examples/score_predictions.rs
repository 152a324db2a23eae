//! Scores predicted spans against gold spans, per token and per character.
//!
//! ```text
//! cargo run --example score_predictions -- <pred.tsv> <gold.tsv> <articles-dir>
//! ```

use std::error::Error;
use std::path::Path;

use spanforge::cli::evaluate_files;
use spanforge::config::RunConfig;
use spanforge::corpus::{label_tokens, Article, Label, SpanAnnotation};
use spanforge::eval::{format_report, per_char_span_metrics, per_token_metrics, MetricMode, ReportFormat};
use spanforge::spans::PredictionSpan;
use spanforge::textproc::tokenize;

fn token_labels(article: &Article, spans: &[SpanAnnotation]) -> Result<Vec<Label>, Box<dyn Error>> {
    let refs: Vec<&SpanAnnotation> = spans.iter().collect();
    let tokens = tokenize(&article.text);
    Ok(label_tokens(article, &tokens, &refs)?.into_iter().map(|t| t.label).collect())
}

pub fn run() -> Result<(), Box<dyn Error>> {
    let article = Article::new("1", "Only a fool would trust these corrupt, lying elites again.");
    let gold = [SpanAnnotation::new("1", 0, 17), SpanAnnotation::new("1", 31, 51)];
    let pred = [SpanAnnotation::new("1", 5, 17), SpanAnnotation::new("1", 39, 58)];

    let token = per_token_metrics(&token_labels(&article, &pred)?, &token_labels(&article, &gold)?)?;
    println!("per token\n{}", format_report(&token, ReportFormat::Tsv));

    let to_spans = |s: &[SpanAnnotation]| s.iter().map(PredictionSpan::from).collect::<Vec<_>>();
    let chars = per_char_span_metrics(&to_spans(&pred), &to_spans(&gold))?;
    println!("per character span\n{}", format_report(&chars, ReportFormat::Json));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match args.as_slice() {
        [pred, gold, dir] => {
            let cfg = RunConfig::default();
            for mode in [MetricMode::PerToken, MetricMode::PerCharSpan] {
                let r = evaluate_files(&cfg, Path::new(pred), Path::new(gold), mode, &[dir.into()])?;
                println!("{}", format_report(&r, ReportFormat::Tsv));
            }
            Ok(())
        }
        _ => run(),
    }
}
