//! Scoring: per-token P/R/F, the per-character span metric of the shared
//! task, and technique co-occurrence matrices.
//!
//! Counts follow standard usage: a true negative is a None token predicted
//! None.
//!
//! The span metric credits each predicted span `s` with the fraction of its
//! characters covered by gold spans of the same article, and each gold span
//! `t` with the fraction of its characters covered by predictions:
//!
//! ```text
//! P = 1/|S| · Σₛ Σₜ |s ∩ t| / |s|
//! R = 1/|T| · Σₜ Σₛ |s ∩ t| / |t|
//! ```
//!
//! Both sides are first merged into disjoint intervals per article. A split
//! prediction is only penalized through the `1/|S|` averaging when its
//! pieces overlap gold partially: `[0,5)` and `[5,10)` against gold
//! `[0,10)` still score P = R = 1.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{technique_index, Label, SpanAnnotation, TECHNIQUES};
use crate::error::{Error, Result};
use crate::spans::{normalize_spans, PredictionSpan};

pub const HEATMAP_RADII: [usize; 4] = [0, 5, 20, 30];
pub const OTHER_TECHNIQUE: &str = "Other";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricMode {
    PerToken,
    PerCharSpan,
}

impl std::str::FromStr for MetricMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per_token" | "token" => Ok(MetricMode::PerToken),
            "per_char_span" | "span" => Ok(MetricMode::PerCharSpan),
            other => Err(Error::Argument(format!("unknown metric mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl TokenCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// The four per-class percentages plotted in the balance and window sweeps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassPercentages {
    pub propaganda_correct_pct: f64,
    pub propaganda_wrong_pct: f64,
    pub none_correct_pct: f64,
    pub none_wrong_pct: f64,
}

fn pct(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

impl From<TokenCounts> for ClassPercentages {
    fn from(c: TokenCounts) -> Self {
        ClassPercentages {
            propaganda_correct_pct: pct(c.tp, c.tp + c.fn_),
            propaganda_wrong_pct: pct(c.fn_, c.tp + c.fn_),
            none_correct_pct: pct(c.tn, c.tn + c.fp),
            none_wrong_pct: pct(c.fp, c.tn + c.fp),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mode: MetricMode,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub counts: Option<TokenCounts>,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub percentages: Option<ClassPercentages>,
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn count_tokens(pred: &[Label], gold: &[Label]) -> Result<TokenCounts> {
    if pred.len() != gold.len() {
        return Err(Error::Argument(format!(
            "{} predicted labels for {} gold labels",
            pred.len(),
            gold.len()
        )));
    }
    let mut c = TokenCounts::default();
    for (p, g) in pred.iter().zip(gold) {
        match (p.is_propaganda(), g.is_propaganda()) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

pub fn per_token_metrics(pred: &[Label], gold: &[Label]) -> Result<MetricsReport> {
    Ok(report_from_counts(count_tokens(pred, gold)?))
}

pub fn report_from_counts(c: TokenCounts) -> MetricsReport {
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    MetricsReport {
        mode: MetricMode::PerToken,
        precision,
        recall,
        f1: f1_score(precision, recall),
        counts: Some(c),
        percentages: Some(c.into()),
    }
}

fn validate(spans: &[PredictionSpan], side: &str) -> Result<()> {
    match spans.iter().find(|s| s.start >= s.end) {
        Some(s) => Err(Error::Argument(format!(
            "{side} span [{}, {}) of article `{}` is empty or inverted",
            s.start, s.end, s.article_id
        ))),
        None => Ok(()),
    }
}

fn overlap(a: (usize, usize), b: (usize, usize)) -> usize {
    a.1.min(b.1).saturating_sub(a.0.max(b.0))
}

// Σ over `from` of (covered chars / own length), with both sides sorted and
// disjoint per article.
fn coverage_sum(from: &[PredictionSpan], by: &BTreeMap<&str, Vec<(usize, usize)>>) -> f64 {
    from.iter()
        .map(|s| {
            let covered: usize = by
                .get(s.article_id.as_str())
                .map(|others| others.iter().map(|&t| overlap((s.start, s.end), t)).sum())
                .unwrap_or(0);
            covered as f64 / s.len() as f64
        })
        .sum()
}

fn by_article(spans: &[PredictionSpan]) -> BTreeMap<&str, Vec<(usize, usize)>> {
    let mut map: BTreeMap<&str, Vec<(usize, usize)>> = BTreeMap::new();
    for s in spans {
        map.entry(s.article_id.as_str()).or_default().push((s.start, s.end));
    }
    map
}

pub fn per_char_span_metrics(pred: &[PredictionSpan], gold: &[PredictionSpan]) -> Result<MetricsReport> {
    validate(pred, "predicted")?;
    validate(gold, "gold")?;
    let pred = normalize_spans(pred);
    let gold = normalize_spans(gold);
    let side = |from: &[PredictionSpan], other: &[PredictionSpan]| {
        if from.is_empty() {
            if other.is_empty() {
                1.0
            } else {
                0.0
            }
        } else {
            coverage_sum(from, &by_article(other)) / from.len() as f64
        }
    };
    let precision = side(&pred, &gold);
    let recall = side(&gold, &pred);
    Ok(MetricsReport {
        mode: MetricMode::PerCharSpan,
        precision,
        recall,
        f1: f1_score(precision, recall),
        counts: None,
        percentages: None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CooccurrenceMatrix {
    pub labels: Vec<String>,
    pub cells: Vec<Vec<u64>>,
    pub radius: usize,
}

impl CooccurrenceMatrix {
    pub fn get(&self, row: &str, col: &str) -> Option<u64> {
        let r = self.labels.iter().position(|l| l == row)?;
        let c = self.labels.iter().position(|l| l == col)?;
        Some(self.cells[r][c])
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.labels.len();
        (0..n).all(|i| (0..n).all(|j| self.cells[i][j] == self.cells[j][i]))
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().flatten().sum()
    }

    /// Cell-wise `self ≤ other`; both must share labels.
    pub fn dominated_by(&self, other: &CooccurrenceMatrix) -> bool {
        self.labels == other.labels
            && self
                .cells
                .iter()
                .flatten()
                .zip(other.cells.iter().flatten())
                .all(|(a, b)| a <= b)
    }
}

/// Characters shared by technique fragments and their neighbours.
///
/// For every unordered pair of distinct annotations `(a, b)` of one
/// article, where `a` is the earlier of the two, `|[a.start − r, a.end + r) ∩ b|`
/// is added to the cell of their techniques, mirrored across the diagonal.
/// Techniques outside the registry go to an extra `Other` row.
pub fn cooccurrence_matrix(annotations: &[SpanAnnotation], radius: usize) -> CooccurrenceMatrix {
    if !HEATMAP_RADII.contains(&radius) {
        log::warn!("co-occurrence radius {radius} is not one of {HEATMAP_RADII:?}");
    }
    let mut by_article: BTreeMap<&str, Vec<(usize, usize, usize)>> = BTreeMap::new();
    let mut any_other = false;
    for a in annotations {
        let idx = match a.technique.as_deref().and_then(technique_index) {
            Some(i) => i,
            None => {
                log::warn!(
                    "article {}: technique {:?} counted as {OTHER_TECHNIQUE}",
                    a.article_id,
                    a.technique
                );
                any_other = true;
                TECHNIQUES.len()
            }
        };
        by_article.entry(&a.article_id).or_default().push((a.start, a.end, idx));
    }
    let n = TECHNIQUES.len() + usize::from(any_other);
    let mut cells = vec![vec![0u64; n]; n];
    for spans in by_article.values_mut() {
        spans.sort_unstable();
        for i in 0..spans.len() {
            let (s0, e0, ta) = spans[i];
            let expanded = (s0.saturating_sub(radius), e0 + radius);
            for &(s1, e1, tb) in &spans[i + 1..] {
                let v = overlap(expanded, (s1, e1)) as u64;
                cells[ta][tb] += v;
                if ta != tb {
                    cells[tb][ta] += v;
                }
            }
        }
    }
    let mut labels: Vec<String> = TECHNIQUES.iter().map(|s| s.to_string()).collect();
    if any_other {
        labels.push(OTHER_TECHNIQUE.to_string());
    }
    CooccurrenceMatrix { labels, cells, radius }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Tsv,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "tsv" => Ok(ReportFormat::Tsv),
            other => Err(Error::Argument(format!("unknown report format `{other}`"))),
        }
    }
}

fn report_fields(report: &MetricsReport) -> Vec<(&'static str, String)> {
    let mode = match report.mode {
        MetricMode::PerToken => "per_token",
        MetricMode::PerCharSpan => "per_char_span",
    };
    let mut fields = vec![
        ("mode", mode.to_string()),
        ("precision", report.precision.to_string()),
        ("recall", report.recall.to_string()),
        ("f1", report.f1.to_string()),
    ];
    if let Some(c) = report.counts {
        fields.extend([
            ("tp", c.tp.to_string()),
            ("fp", c.fp.to_string()),
            ("fn", c.fn_.to_string()),
            ("tn", c.tn.to_string()),
        ]);
    }
    if let Some(p) = report.percentages {
        fields.extend([
            ("propaganda_correct_pct", p.propaganda_correct_pct.to_string()),
            ("propaganda_wrong_pct", p.propaganda_wrong_pct.to_string()),
            ("none_correct_pct", p.none_correct_pct.to_string()),
            ("none_wrong_pct", p.none_wrong_pct.to_string()),
        ]);
    }
    fields
}

pub fn format_report(report: &MetricsReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Tsv => {
            let fields = report_fields(report);
            let header: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
            let values: Vec<&str> = fields.iter().map(|(_, v)| v.as_str()).collect();
            format!("{}\n{}\n", header.join("\t"), values.join("\t"))
        }
    }
}

pub fn format_matrix(matrix: &CooccurrenceMatrix, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(matrix).expect("matrix serializes");
            s.push('\n');
            s
        }
        ReportFormat::Tsv => {
            let mut out = String::from("technique");
            for l in &matrix.labels {
                write!(out, "\t{l}").unwrap();
            }
            out.push('\n');
            for (label, row) in matrix.labels.iter().zip(&matrix.cells) {
                out.push_str(label);
                for v in row {
                    write!(out, "\t{v}").unwrap();
                }
                out.push('\n');
            }
            out
        }
    }
}

pub fn emit_report(report: &MetricsReport, format: ReportFormat, path: &Path) -> Result<()> {
    fs::write(path, format_report(report, format)).map_err(|e| Error::io(path, e))
}

pub fn emit_matrix(matrix: &CooccurrenceMatrix, format: ReportFormat, path: &Path) -> Result<()> {
    fs::write(path, format_matrix(matrix, format)).map_err(|e| Error::io(path, e))
}
