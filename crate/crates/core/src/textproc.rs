//! Offset-preserving tokenization, sentence splitting and rule-based
//! lemmatization.
//!
//! All offsets are counted in Unicode scalar values (`char`s), never bytes,
//! so they line up with character-based span annotations even when the text
//! carries typographic quotes or other non-ASCII punctuation.

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lemma assigned to every personal or possessive pronoun.
pub const PRONOUN_LEMMA: &str = "-PRON-";

const BUILTIN_EXCEPTIONS: &str = include_str!("../data/lexicon/lemma_exceptions.tsv");
const BUILTIN_PRONOUNS: &str = include_str!("../data/lexicon/pronouns.txt");

static BUILTIN_LEMMATIZER: LazyLock<Lemmatizer> = LazyLock::new(|| {
    Lemmatizer::from_sources(BUILTIN_EXCEPTIONS, BUILTIN_PRONOUNS, Path::new("<builtin>"))
        .expect("bundled lemma data is well formed")
});

/// The unit of classification: a word form, number or single punctuation
/// mark together with its location in the article.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    /// Inclusive character offset.
    pub start: usize,
    /// Exclusive character offset.
    pub end: usize,
    pub sentence_index: usize,
}

impl Token {
    pub fn char_len(&self) -> usize {
        self.end - self.start
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceSpan {
    pub index: usize,
    pub start: usize,
    pub end: usize,
}

/// Returns the substring covering characters `[start, end)`.
pub fn char_slice(text: &str, start: usize, end: usize) -> &str {
    let mut indices = text.char_indices().map(|(b, _)| b).chain(std::iter::once(text.len()));
    let from = indices.nth(start).unwrap_or(text.len());
    let to = if end > start {
        indices.nth(end - start - 1).unwrap_or(text.len())
    } else {
        from
    };
    &text[from..to]
}

fn is_sentence_final(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Splits `text` into sentences.
///
/// A boundary falls after `.`, `!` or `?` when the mark is followed by
/// whitespace and then an uppercase letter, and at every newline. Each
/// sentence is trimmed of surrounding whitespace; whitespace-only segments
/// produce no sentence.
pub fn split_sentences(text: &str) -> Vec<SentenceSpan> {
    let chars: Vec<char> = text.chars().collect();
    let mut raw = Vec::new();
    let mut seg_start = 0;
    for (i, &c) in chars.iter().enumerate() {
        if c == '\n' {
            raw.push((seg_start, i));
            seg_start = i + 1;
        } else if is_sentence_final(c) && chars.get(i + 1).is_some_and(|n| n.is_whitespace()) {
            let next_visible = chars[i + 1..].iter().find(|n| !n.is_whitespace());
            if next_visible.is_some_and(|n| n.is_uppercase()) {
                raw.push((seg_start, i + 1));
                seg_start = i + 1;
            }
        }
    }
    raw.push((seg_start, chars.len()));

    let mut sentences = Vec::new();
    for (mut start, mut end) in raw {
        while start < end && chars[start].is_whitespace() {
            start += 1;
        }
        while end > start && chars[end - 1].is_whitespace() {
            end -= 1;
        }
        if start < end {
            sentences.push(SentenceSpan {
                index: sentences.len(),
                start,
                end,
            });
        }
    }
    sentences
}

/// Rule-based lemmatizer: lowercasing, a pronoun sentinel, an exception
/// table, then English suffix stripping.
///
/// The lemma is a pure function of the surface string, so identical surfaces
/// always share a lemma.
#[derive(Debug, Clone)]
pub struct Lemmatizer {
    exceptions: HashMap<String, String>,
    pronouns: HashSet<String>,
}

impl Default for Lemmatizer {
    fn default() -> Self {
        BUILTIN_LEMMATIZER.clone()
    }
}

impl Lemmatizer {
    /// The lemmatizer backed by the bundled exception and pronoun lists.
    pub fn builtin() -> &'static Lemmatizer {
        &BUILTIN_LEMMATIZER
    }

    /// Loads an exception table (`surface<TAB>lemma`, `#` comments) and a
    /// pronoun list (one surface per line).
    pub fn from_files(exceptions: &Path, pronouns: &Path) -> Result<Self> {
        let exc = std::fs::read_to_string(exceptions).map_err(|e| Error::io(exceptions, e))?;
        let pro = std::fs::read_to_string(pronouns).map_err(|e| Error::io(pronouns, e))?;
        Self::from_sources(&exc, &pro, exceptions)
    }

    fn from_sources(exceptions: &str, pronouns: &str, origin: &Path) -> Result<Self> {
        let mut table = HashMap::new();
        for (idx, line) in exceptions.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            match (fields.next(), fields.next(), fields.next()) {
                (Some(surface), Some(lemma), None) if !surface.is_empty() && !lemma.is_empty() => {
                    table.insert(surface.to_lowercase(), lemma.to_string());
                }
                _ => {
                    return Err(Error::parse(origin, idx + 1, "expected `surface<TAB>lemma`"));
                }
            }
        }
        Ok(Lemmatizer {
            exceptions: table,
            pronouns: parse_word_list(pronouns),
        })
    }

    pub fn lemmatize(&self, surface: &str) -> String {
        let lower = surface.to_lowercase();
        if self.pronouns.contains(&lower) {
            return PRONOUN_LEMMA.to_string();
        }
        if let Some(lemma) = self.exceptions.get(&lower) {
            return lemma.clone();
        }
        if !lower.chars().all(|c| c.is_ascii_alphabetic()) {
            return lower;
        }
        strip_inflection(&lower).unwrap_or(lower)
    }

    /// Tokenizes `text` and fills in lemmas and sentence indices.
    pub fn tokenize(&self, text: &str) -> Vec<Token> {
        let sentences = split_sentences(text);
        let mut tokens = Vec::new();
        let mut sentence = 0;
        for (start, end, surface) in raw_tokens(text) {
            while sentence + 1 < sentences.len() && sentences[sentence].end <= start {
                sentence += 1;
            }
            let lemma = self.lemmatize(&surface);
            tokens.push(Token {
                surface,
                lemma,
                start,
                end,
                sentence_index: sentence,
            });
        }
        tokens
    }
}

fn parse_word_list(source: &str) -> HashSet<String> {
    source
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

/// Maximal alphanumeric runs and single non-space characters, as
/// `(start, end, surface)` in character offsets.
fn raw_tokens(text: &str) -> Vec<(usize, usize, String)> {
    let mut out = Vec::new();
    let mut run: Option<(usize, String)> = None;
    let mut pos = 0;
    for c in text.chars() {
        if c.is_alphanumeric() {
            run.get_or_insert_with(|| (pos, String::new())).1.push(c);
        } else {
            if let Some((s, word)) = run.take() {
                out.push((s, pos, word));
            }
            if !c.is_whitespace() {
                out.push((pos, pos + 1, c.to_string()));
            }
        }
        pos += 1;
    }
    if let Some((s, word)) = run.take() {
        out.push((s, pos, word));
    }
    out
}

/// Tokenizes with the bundled lemmatizer.
pub fn tokenize(text: &str) -> Vec<Token> {
    Lemmatizer::builtin().tokenize(text)
}

/// Lemmatizes with the bundled lemmatizer.
pub fn lemmatize(surface: &str) -> String {
    Lemmatizer::builtin().lemmatize(surface)
}

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

fn has_vowel(stem: &[u8]) -> bool {
    stem.iter().any(|&c| is_vowel(c) || c == b'y')
}

// consonant-vowel-consonant ending, e.g. "mak" in "making"
fn ends_cvc(stem: &[u8]) -> bool {
    let n = stem.len();
    n >= 3
        && !is_vowel(stem[n - 3])
        && is_vowel(stem[n - 2])
        && !is_vowel(stem[n - 1])
        && !matches!(stem[n - 1], b'w' | b'x' | b'y')
}

fn repair_stem(stem: &str) -> Option<String> {
    let b = stem.as_bytes();
    if b.len() < 2 || !has_vowel(b) {
        return None;
    }
    let n = b.len();
    if n >= 3 && b[n - 1] == b[n - 2] && !is_vowel(b[n - 1]) && !matches!(b[n - 1], b'l' | b's' | b'z') {
        return Some(stem[..n - 1].to_string());
    }
    if n <= 4 && ends_cvc(b) {
        return Some(format!("{stem}e"));
    }
    Some(stem.to_string())
}

fn strip_inflection(word: &str) -> Option<String> {
    let n = word.len();
    if n >= 5 && word.ends_with("ies") {
        return Some(format!("{}y", &word[..n - 3]));
    }
    if word.ends_with("sses") {
        return Some(word[..n - 2].to_string());
    }
    if n >= 5 && ["ches", "shes", "xes", "zes"].iter().any(|s| word.ends_with(s)) {
        return Some(word[..n - 2].to_string());
    }
    if ["ss", "us", "is"].iter().any(|s| word.ends_with(s)) {
        return None;
    }
    if n >= 4 && word.ends_with('s') {
        return Some(word[..n - 1].to_string());
    }
    if n >= 5 && word.ends_with("ing") {
        return repair_stem(&word[..n - 3]);
    }
    if n >= 5 && word.ends_with("ied") {
        return Some(format!("{}y", &word[..n - 3]));
    }
    if n >= 4 && word.ends_with("ed") {
        return repair_stem(&word[..n - 2]);
    }
    None
}
