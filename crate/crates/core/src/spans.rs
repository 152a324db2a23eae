//! Turning per-token predictions back into character spans.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Label, SpanAnnotation};
use crate::error::{Error, Result};
use crate::textproc::Token;

/// A predicted fragment `[start, end)` in character offsets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PredictionSpan {
    pub article_id: String,
    pub start: usize,
    pub end: usize,
}

impl PredictionSpan {
    pub fn new(article_id: impl Into<String>, start: usize, end: usize) -> Self {
        PredictionSpan {
            article_id: article_id.into(),
            start,
            end,
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }
}

impl From<PredictionSpan> for SpanAnnotation {
    fn from(s: PredictionSpan) -> Self {
        SpanAnnotation::new(s.article_id, s.start, s.end)
    }
}

impl From<&SpanAnnotation> for PredictionSpan {
    fn from(a: &SpanAnnotation) -> Self {
        PredictionSpan::new(a.article_id.clone(), a.start, a.end)
    }
}

/// Merges runs of Propaganda tokens into spans. Runs separated by at most
/// `gap_tolerance` None tokens become one span.
pub fn merge_tokens_to_spans(
    article_id: &str,
    tokens: &[Token],
    labels: &[Label],
    gap_tolerance: usize,
) -> Result<Vec<PredictionSpan>> {
    if tokens.len() != labels.len() {
        return Err(Error::Argument(format!(
            "{} labels for {} tokens",
            labels.len(),
            tokens.len()
        )));
    }
    let mut spans: Vec<PredictionSpan> = Vec::new();
    let mut last_prop: Option<usize> = None;
    for (i, (token, label)) in tokens.iter().zip(labels).enumerate() {
        if !label.is_propaganda() {
            continue;
        }
        match (last_prop, spans.last_mut()) {
            (Some(prev), Some(span)) if i - prev - 1 <= gap_tolerance => span.end = token.end,
            _ => spans.push(PredictionSpan::new(article_id, token.start, token.end)),
        }
        last_prop = Some(i);
    }
    Ok(spans)
}

/// Sorts spans by (article id, start) and unions overlapping intervals.
/// Touching intervals stay separate.
pub fn normalize_spans(spans: &[PredictionSpan]) -> Vec<PredictionSpan> {
    let mut sorted = spans.to_vec();
    sorted.sort();
    let mut out: Vec<PredictionSpan> = Vec::with_capacity(sorted.len());
    for s in sorted {
        match out.last_mut() {
            Some(last) if last.article_id == s.article_id && s.start < last.end => {
                last.end = last.end.max(s.end);
            }
            _ => out.push(s),
        }
    }
    out
}

pub fn format_predictions(spans: &[PredictionSpan]) -> String {
    let mut sorted = spans.to_vec();
    sorted.sort();
    sorted
        .iter()
        .map(|s| format!("{}\t{}\t{}\n", s.article_id, s.start, s.end))
        .collect()
}

/// Writes `id<TAB>start<TAB>end` lines sorted by (id, start).
pub fn write_predictions(spans: &[PredictionSpan], path: &Path) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(format_predictions(spans).as_bytes())
        .map_err(|e| Error::io(path, e))
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredictionSpan>> {
    Ok(crate::corpus::parse_span_labels(path, false)?
        .iter()
        .map(PredictionSpan::from)
        .collect())
}
