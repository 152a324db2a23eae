//! Articles, gold span annotations and token labels.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textproc::Token;

/// The fourteen technique classes, in the order used for co-occurrence
/// matrices.
pub const TECHNIQUES: [&str; 14] = [
    "Loaded_Language",
    "Name_Calling,Labeling",
    "Repetition",
    "Exaggeration,Minimisation",
    "Doubt",
    "Appeal_to_fear-prejudice",
    "Flag-Waving",
    "Causal_Oversimplification",
    "Slogans",
    "Appeal_to_Authority",
    "Black-and-White_Fallacy",
    "Thought-terminating_Cliches",
    "Whataboutism,Straw_Men,Red_Herring",
    "Bandwagon,Reductio_ad_hitlerum",
];

// Alternative spellings seen in shared-task releases, keyed by the
// normalized form (lowercase, alphanumerics only).
const TECHNIQUE_ALIASES: [(&str, usize); 12] = [
    ("namecalling", 1),
    ("labeling", 1),
    ("exaggeration", 3),
    ("minimisation", 3),
    ("appealtofear", 5),
    ("blackandwhite", 10),
    ("thoughtterminatingcliche", 11),
    ("whataboutism", 12),
    ("strawmen", 12),
    ("redherring", 12),
    ("bandwagon", 13),
    ("reductioadhitlerum", 13),
];

fn normalize_technique(label: &str) -> String {
    label
        .chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

/// Index of `label` in [`TECHNIQUES`], accepting common spelling variants.
pub fn technique_index(label: &str) -> Option<usize> {
    let norm = normalize_technique(label);
    TECHNIQUES
        .iter()
        .position(|t| normalize_technique(t) == norm)
        .or_else(|| {
            TECHNIQUE_ALIASES
                .iter()
                .find(|(alias, _)| *alias == norm)
                .map(|&(_, idx)| idx)
        })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub text: String,
}

impl Article {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Article {
            id: id.into(),
            text: text.into(),
        }
    }

    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }
}

/// A gold fragment `[start, end)` in character offsets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SpanAnnotation {
    pub article_id: String,
    pub technique: Option<String>,
    pub start: usize,
    pub end: usize,
}

impl SpanAnnotation {
    pub fn new(article_id: impl Into<String>, start: usize, end: usize) -> Self {
        SpanAnnotation {
            article_id: article_id.into(),
            technique: None,
            start,
            end,
        }
    }

    pub fn with_technique(mut self, technique: impl Into<String>) -> Self {
        self.technique = Some(technique.into());
        self
    }

    pub fn overlaps(&self, start: usize, end: usize) -> bool {
        self.start < end && start < self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Propaganda,
    None,
}

impl Label {
    pub fn is_propaganda(self) -> bool {
        self == Label::Propaganda
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s {
            "Propaganda" => Some(Label::Propaganda),
            "None" => Some(Label::None),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Propaganda => "Propaganda",
            Label::None => "None",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledToken {
    pub token: Token,
    pub label: Label,
    pub article_id: String,
    /// Techniques of every fragment the token intersects, deduplicated and
    /// sorted. Empty for binary annotations.
    pub techniques: Vec<String>,
}

fn article_id_from_file_name(name: &str) -> Option<&str> {
    let (stem, ext) = name.rsplit_once('.')?;
    if !ext.eq_ignore_ascii_case("txt") {
        return None;
    }
    let id = stem.strip_prefix("article")?;
    (!id.is_empty()).then_some(id)
}

/// Reads every `article{id}.txt` in `dir`, sorted by id.
///
/// Text is read verbatim: no newline translation and no Unicode
/// normalization, so character offsets match the annotation files.
pub fn load_articles(dir: &Path) -> Result<Vec<Article>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut by_id: BTreeMap<String, Article> = BTreeMap::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let name = entry.file_name();
        let Some(id) = name.to_str().and_then(article_id_from_file_name) else {
            continue;
        };
        if !path.is_file() {
            continue;
        }
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        if text.is_empty() {
            return Err(Error::load(&path, "article text is empty"));
        }
        if by_id.contains_key(id) {
            return Err(Error::Corpus(format!(
                "duplicate article id `{id}` in {}",
                dir.display()
            )));
        }
        by_id.insert(id.to_string(), Article::new(id, text));
    }
    Ok(by_id.into_values().collect())
}

/// Parses span annotations from TSV text. `origin` is used in error messages.
pub fn parse_span_labels_str(
    source: &str,
    expect_technique: bool,
    origin: &Path,
) -> Result<Vec<SpanAnnotation>> {
    let mut out = Vec::new();
    for (idx, raw) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let expected = if expect_technique { 4 } else { 3 };
        if fields.len() != expected {
            return Err(Error::parse(
                origin,
                line_no,
                format!("expected {expected} tab-separated fields, found {}", fields.len()),
            ));
        }
        let offset = |s: &str| {
            s.trim().parse::<usize>().map_err(|_| {
                Error::parse(origin, line_no, format!("offset `{s}` is not a non-negative integer"))
            })
        };
        let id = fields[0].trim();
        if id.is_empty() {
            return Err(Error::parse(origin, line_no, "empty article id"));
        }
        let (technique, start, end) = if expect_technique {
            (Some(fields[1].trim().to_string()), offset(fields[2])?, offset(fields[3])?)
        } else {
            (None, offset(fields[1])?, offset(fields[2])?)
        };
        if start >= end {
            return Err(Error::parse(
                origin,
                line_no,
                format!("span start {start} is not before end {end}"),
            ));
        }
        if let Some(t) = &technique {
            if technique_index(t).is_none() {
                log::warn!("{}:{line_no}: unknown technique `{t}`", origin.display());
            }
        }
        out.push(SpanAnnotation {
            article_id: id.to_string(),
            technique,
            start,
            end,
        });
    }
    Ok(out)
}

/// Reads a span annotation TSV: `id<TAB>start<TAB>end`, or
/// `id<TAB>technique<TAB>start<TAB>end` when `expect_technique` is set.
pub fn parse_span_labels(path: &Path, expect_technique: bool) -> Result<Vec<SpanAnnotation>> {
    let source = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_span_labels_str(&source, expect_technique, path)
}

/// Serializes annotations in the same TSV layout `parse_span_labels` reads.
/// Technique columns are written only when every annotation has one.
pub fn format_span_labels(annotations: &[SpanAnnotation]) -> String {
    let with_technique = !annotations.is_empty() && annotations.iter().all(|a| a.technique.is_some());
    let mut out = String::new();
    for a in annotations {
        match (&a.technique, with_technique) {
            (Some(t), true) => out.push_str(&format!("{}\t{}\t{}\t{}\n", a.article_id, t, a.start, a.end)),
            _ => out.push_str(&format!("{}\t{}\t{}\n", a.article_id, a.start, a.end)),
        }
    }
    out
}

pub fn write_span_labels(annotations: &[SpanAnnotation], path: &Path) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(format_span_labels(annotations).as_bytes())
        .map_err(|e| Error::io(path, e))
}

/// Groups annotations by article id.
pub fn group_by_article(annotations: &[SpanAnnotation]) -> BTreeMap<&str, Vec<&SpanAnnotation>> {
    let mut map: BTreeMap<&str, Vec<&SpanAnnotation>> = BTreeMap::new();
    for a in annotations {
        map.entry(a.article_id.as_str()).or_default().push(a);
    }
    map
}

/// Labels each token Propaganda iff its character interval intersects at
/// least one annotation of the article.
pub fn label_tokens(
    article: &Article,
    tokens: &[Token],
    annotations: &[&SpanAnnotation],
) -> Result<Vec<LabeledToken>> {
    let len = article.char_len();
    for a in annotations {
        if a.article_id != article.id {
            return Err(Error::Labeling(format!(
                "annotation for article `{}` passed while labeling `{}`",
                a.article_id, article.id
            )));
        }
        if a.start >= a.end || a.end > len {
            return Err(Error::Labeling(format!(
                "span [{}, {}) is outside article `{}` of length {len}",
                a.start, a.end, article.id
            )));
        }
    }
    Ok(tokens
        .iter()
        .map(|t| {
            let mut label = Label::None;
            let mut techniques = Vec::new();
            for a in annotations.iter().filter(|a| a.overlaps(t.start, t.end)) {
                label = Label::Propaganda;
                if let Some(tech) = &a.technique {
                    techniques.push(tech.clone());
                }
            }
            techniques.sort();
            techniques.dedup();
            LabeledToken {
                token: t.clone(),
                label,
                article_id: article.id.clone(),
                techniques,
            }
        })
        .collect())
}
