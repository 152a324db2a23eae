//! Co-occurrence of propaganda techniques within a character radius.
//!
//! ```text
//! cargo run --example technique_heatmap -- [labels.tsv]
//! ```

use std::error::Error;
use std::path::Path;

use spanforge::corpus::{parse_span_labels, SpanAnnotation};
use spanforge::eval::{cooccurrence_matrix, format_matrix, ReportFormat, HEATMAP_RADII};
use spanforge::synth::{self, SynthConfig};

pub fn show(annotations: &[SpanAnnotation]) {
    for r in HEATMAP_RADII {
        let m = cooccurrence_matrix(annotations, r);
        let busiest = m
            .labels
            .iter()
            .enumerate()
            .max_by_key(|(i, _)| m.cells[*i].iter().sum::<u64>())
            .map(|(_, l)| l.as_str())
            .unwrap_or("-");
        println!("radius {r:>2}: total {:>6}, busiest row {busiest}", m.total());
    }
}

pub fn run() -> Result<(), Box<dyn Error>> {
    let corpus = synth::generate(&SynthConfig {
        articles: 10,
        ..SynthConfig::default()
    });
    show(&corpus.annotations);
    let m = cooccurrence_matrix(&corpus.annotations, 5);
    let tsv = format_matrix(&m, ReportFormat::Tsv);
    for line in tsv.lines().take(3) {
        println!("{}", &line[..line.len().min(100)]);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    match std::env::args().nth(1) {
        Some(path) => {
            show(&parse_span_labels(Path::new(&path), true)?);
            Ok(())
        }
        None => run(),
    }
}
