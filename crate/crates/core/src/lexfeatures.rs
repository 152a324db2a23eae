//! Lexicon-based window features: a four-value sentiment summary and a
//! 39-category thesaurus profile.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Valence multiplier applied when a negator precedes a scored token.
pub const NEGATION_FACTOR: f64 = -0.74;
/// Normalization constant of the compound score `S / sqrt(S² + α)`.
pub const COMPOUND_ALPHA: f64 = 15.0;
/// How many preceding tokens are inspected for a negator.
pub const NEGATION_SCOPE: usize = 3;
pub const THESAURUS_CATEGORIES: usize = 39;

const BUILTIN_VALENCE: &str = include_str!("../data/lexicon/valence.tsv");
const BUILTIN_NEGATORS: &str = include_str!("../data/lexicon/negators.txt");
const BUILTIN_INTENSIFIERS: &str = include_str!("../data/lexicon/intensifiers.tsv");
const BUILTIN_THESAURUS: &str = include_str!("../data/lexicon/thesaurus.tsv");

static BUILTIN_SENTIMENT: LazyLock<SentimentLexicon> = LazyLock::new(|| {
    SentimentLexicon::from_sources(
        BUILTIN_VALENCE,
        BUILTIN_NEGATORS,
        BUILTIN_INTENSIFIERS,
        Path::new("<builtin>"),
    )
    .expect("bundled sentiment lexicon is well formed")
});

static BUILTIN_THESAURUS_LEXICON: LazyLock<ThesaurusLexicon> = LazyLock::new(|| {
    ThesaurusLexicon::parse(BUILTIN_THESAURUS, Path::new("<builtin>"))
        .expect("bundled thesaurus is well formed")
});

fn content_lines(source: &str) -> impl Iterator<Item = (usize, &str)> {
    source
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

fn parse_scores(source: &str, origin: &Path, what: &str) -> Result<HashMap<String, f64>> {
    let mut out = HashMap::new();
    for (line_no, line) in content_lines(source) {
        let (lemma, score) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(origin, line_no, format!("expected `lemma<TAB>{what}`")))?;
        let value: f64 = score
            .trim()
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| Error::parse(origin, line_no, format!("invalid {what} `{score}`")))?;
        if out.insert(lemma.trim().to_string(), value).is_some() {
            log::warn!(
                "{}:{line_no}: duplicate lemma `{}`, keeping the later value",
                origin.display(),
                lemma.trim()
            );
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SentimentLexicon {
    pub valence: HashMap<String, f64>,
    /// Multiplicative boosts applied to the token that follows.
    pub intensifiers: HashMap<String, f64>,
    pub negators: HashSet<String>,
}

impl SentimentLexicon {
    pub fn builtin() -> &'static SentimentLexicon {
        &BUILTIN_SENTIMENT
    }

    /// Loads a valence file (`lemma<TAB>score`) and optional negator
    /// (one lemma per line) and intensifier (`lemma<TAB>boost`) files.
    pub fn load(valence: &Path, negators: Option<&Path>, intensifiers: Option<&Path>) -> Result<Self> {
        let read = |p: &Path| fs::read_to_string(p).map_err(|e| Error::io(p, e));
        let mut lexicon = SentimentLexicon {
            valence: parse_scores(&read(valence)?, valence, "score")?,
            ..Default::default()
        };
        if let Some(p) = negators {
            lexicon.negators = parse_negators(&read(p)?);
        }
        if let Some(p) = intensifiers {
            lexicon.intensifiers = parse_boosts(&read(p)?, p)?;
        }
        Ok(lexicon)
    }

    fn from_sources(valence: &str, negators: &str, intensifiers: &str, origin: &Path) -> Result<Self> {
        Ok(SentimentLexicon {
            valence: parse_scores(valence, origin, "score")?,
            intensifiers: parse_boosts(intensifiers, origin)?,
            negators: parse_negators(negators),
        })
    }

    /// Scores a window given as a lemma sequence.
    pub fn score<S: AsRef<str>>(&self, lemmas: &[S]) -> SentimentVector {
        let mut raw_sum = 0.0;
        let mut pos = 0.0;
        let mut neg = 0.0;
        let mut neutral = 0.0;
        for (i, lemma) in lemmas.iter().enumerate() {
            let Some(&base) = self.valence.get(lemma.as_ref()) else {
                neutral += 1.0;
                continue;
            };
            let mut v = base;
            if let Some(prev) = i.checked_sub(1).map(|j| lemmas[j].as_ref()) {
                if let Some(boost) = self.intensifiers.get(prev) {
                    v *= boost;
                }
            }
            let scope = &lemmas[i.saturating_sub(NEGATION_SCOPE)..i];
            if scope.iter().any(|l| self.negators.contains(l.as_ref())) {
                v *= NEGATION_FACTOR;
            }
            raw_sum += v;
            if v > 0.0 {
                pos += v;
            } else if v < 0.0 {
                neg += -v;
            } else {
                neutral += 1.0;
            }
        }
        let total = pos + neg + neutral;
        if total == 0.0 {
            return SentimentVector::NEUTRAL;
        }
        SentimentVector {
            neg: neg / total,
            neu: neutral / total,
            pos: pos / total,
            compound: compound(raw_sum),
        }
    }
}

fn parse_negators(source: &str) -> HashSet<String> {
    content_lines(source).map(|(_, l)| l.trim().to_lowercase()).collect()
}

fn parse_boosts(source: &str, origin: &Path) -> Result<HashMap<String, f64>> {
    let boosts = parse_scores(source, origin, "boost")?;
    if let Some((lemma, b)) = boosts.iter().find(|(_, &b)| b <= 0.0) {
        return Err(Error::load(origin, format!("boost for `{lemma}` must be positive, got {b}")));
    }
    Ok(boosts)
}

/// `S / sqrt(S² + α)`, always within [-1, 1].
pub fn compound(raw_sum: f64) -> f64 {
    (raw_sum / (raw_sum * raw_sum + COMPOUND_ALPHA).sqrt()).clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentVector {
    pub neg: f64,
    pub neu: f64,
    pub pos: f64,
    pub compound: f64,
}

impl SentimentVector {
    pub const NEUTRAL: SentimentVector = SentimentVector {
        neg: 0.0,
        neu: 1.0,
        pos: 0.0,
        compound: 0.0,
    };

    pub fn to_array(self) -> [f64; 4] {
        [self.neg, self.neu, self.pos, self.compound]
    }
}

pub fn sentiment_vector<S: AsRef<str>>(lexicon: &SentimentLexicon, window_lemmas: &[S]) -> SentimentVector {
    lexicon.score(window_lemmas)
}

/// Lemma → category membership over exactly 39 named categories.
#[derive(Debug, Clone, PartialEq)]
pub struct ThesaurusLexicon {
    categories: Vec<String>,
    membership: HashMap<String, Vec<u8>>,
}

impl ThesaurusLexicon {
    pub fn builtin() -> &'static ThesaurusLexicon {
        &BUILTIN_THESAURUS_LEXICON
    }

    pub fn new(categories: Vec<String>, membership: HashMap<String, Vec<u8>>) -> Result<Self> {
        if categories.len() != THESAURUS_CATEGORIES {
            return Err(Error::Argument(format!(
                "thesaurus needs {THESAURUS_CATEGORIES} categories, got {}",
                categories.len()
            )));
        }
        let mut membership = membership;
        for (lemma, idx) in membership.iter_mut() {
            if let Some(bad) = idx.iter().find(|&&i| usize::from(i) >= THESAURUS_CATEGORIES) {
                return Err(Error::Argument(format!("category {bad} of `{lemma}` out of range")));
            }
            idx.sort_unstable();
            idx.dedup();
        }
        Ok(ThesaurusLexicon { categories, membership })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let source = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&source, path)
    }

    /// Parses `CATEGORIES<TAB>name1...<TAB>name39` followed by
    /// `lemma<TAB>idx[,idx...]` lines.
    pub fn parse(source: &str, origin: &Path) -> Result<Self> {
        let mut lines = content_lines(source);
        let (header_no, header) = lines
            .next()
            .ok_or_else(|| Error::load(origin, "missing CATEGORIES header"))?;
        let mut fields = header.split('\t');
        if fields.next() != Some("CATEGORIES") {
            return Err(Error::parse(origin, header_no, "first line must start with CATEGORIES"));
        }
        let categories: Vec<String> = fields.map(|s| s.trim().to_string()).collect();
        if categories.len() != THESAURUS_CATEGORIES {
            return Err(Error::parse(
                origin,
                header_no,
                format!("expected {THESAURUS_CATEGORIES} categories, found {}", categories.len()),
            ));
        }
        let mut membership: HashMap<String, Vec<u8>> = HashMap::new();
        for (line_no, line) in lines {
            let (lemma, list) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(origin, line_no, "expected `lemma<TAB>idx[,idx...]`"))?;
            let entry = membership.entry(lemma.trim().to_string()).or_default();
            for raw in list.split(',') {
                let idx: usize = raw
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(origin, line_no, format!("bad category index `{raw}`")))?;
                if idx >= THESAURUS_CATEGORIES {
                    return Err(Error::parse(
                        origin,
                        line_no,
                        format!("category index {idx} out of range"),
                    ));
                }
                entry.push(idx as u8);
            }
        }
        Self::new(categories, membership)
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn membership(&self, lemma: &str) -> Option<&[u8]> {
        self.membership.get(lemma).map(Vec::as_slice)
    }

    /// Share of category-bearing lemmas that fall in each category.
    pub fn profile<S: AsRef<str>>(&self, lemmas: &[S]) -> [f64; THESAURUS_CATEGORIES] {
        let mut counts = [0u32; THESAURUS_CATEGORIES];
        let mut members = 0u32;
        for lemma in lemmas {
            if let Some(cats) = self.membership.get(lemma.as_ref()).filter(|c| !c.is_empty()) {
                members += 1;
                for &c in cats {
                    counts[usize::from(c)] += 1;
                }
            }
        }
        let mut out = [0.0; THESAURUS_CATEGORIES];
        if members > 0 {
            for (o, c) in out.iter_mut().zip(counts) {
                *o = f64::from(c) / f64::from(members);
            }
        }
        out
    }
}

pub fn thesaurus_vector<S: AsRef<str>>(lexicon: &ThesaurusLexicon, window_lemmas: &[S]) -> [f64; THESAURUS_CATEGORIES] {
    lexicon.profile(window_lemmas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lexicon() -> SentimentLexicon {
        SentimentLexicon {
            valence: [("good", 1.9), ("bad", -2.5), ("hate", -2.7)]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            intensifiers: [("very".to_string(), 1.3)].into_iter().collect(),
            negators: ["not".to_string()].into_iter().collect(),
        }
    }

    fn categories() -> Vec<String> {
        (0..39).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn no_hits_is_neutral() {
        let v = lexicon().score(&["the", "table", "."]);
        assert_eq!(v, SentimentVector::NEUTRAL);
        assert_eq!(lexicon().score::<&str>(&[]), SentimentVector::NEUTRAL);
    }

    #[test]
    fn single_positive_token_compound() {
        let v = lexicon().score(&["good"]);
        let expected = 1.9 / (1.9f64 * 1.9 + 15.0).sqrt();
        assert!((v.compound - expected).abs() < 1e-12);
        assert!((v.compound - 0.4404).abs() < 5e-5);
        assert_eq!((v.neg, v.neu, v.pos), (0.0, 0.0, 1.0));
    }

    #[test]
    fn negation_flips_sign() {
        let v = lexicon().score(&["not", "good"]);
        assert!(v.compound < 0.0);
        let expected = compound(1.9 * NEGATION_FACTOR);
        assert!((v.compound - expected).abs() < 1e-12);
        // negator four tokens back is out of scope
        let far = lexicon().score(&["not", "a", "b", "c", "good"]);
        assert!(far.compound > 0.0);
    }

    #[test]
    fn intensifier_scales_following_token() {
        let plain = lexicon().score(&["bad"]).compound;
        let boosted = lexicon().score(&["very", "bad"]).compound;
        assert!((boosted - compound(-2.5 * 1.3)).abs() < 1e-12);
        assert!(boosted < plain);
    }

    #[test]
    fn proportions_mix_counts_and_valence() {
        let v = lexicon().score(&["good", "bad", "table"]);
        let total = 1.9 + 2.5 + 1.0;
        assert!((v.pos - 1.9 / total).abs() < 1e-12);
        assert!((v.neg - 2.5 / total).abs() < 1e-12);
        assert!((v.neu - 1.0 / total).abs() < 1e-12);
    }

    #[test]
    fn thesaurus_profiles() {
        let membership = [("a", vec![5u8]), ("b", vec![1]), ("c", vec![1]), ("d", vec![2])]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let t = ThesaurusLexicon::new(categories(), membership).unwrap();
        let one = t.profile(&["a"]);
        assert_eq!(one[5], 1.0);
        assert_eq!(one.iter().sum::<f64>(), 1.0);

        let mixed = t.profile(&["b", "c", "d", "zzz"]);
        assert!((mixed[1] - 2.0 / 3.0).abs() < 1e-15);
        assert!((mixed[2] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(mixed.iter().filter(|&&x| x != 0.0).count(), 2);

        assert_eq!(t.profile(&["zzz", "yyy"]), [0.0; 39]);
    }

    #[test]
    fn thesaurus_file_validation() {
        let p = Path::new("thes.tsv");
        let header38 = format!("CATEGORIES\t{}\n", (0..38).map(|i| format!("c{i}")).collect::<Vec<_>>().join("\t"));
        assert!(ThesaurusLexicon::parse(&header38, p).is_err());

        let header = format!("CATEGORIES\t{}\n", categories().join("\t"));
        let ok = ThesaurusLexicon::parse(&format!("{header}war\t20,36\nwar\t20\n"), p).unwrap();
        assert_eq!(ok.membership("war"), Some(&[20u8, 36][..]));
        assert!(matches!(
            ThesaurusLexicon::parse(&format!("{header}war\t39\n"), p),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(ThesaurusLexicon::parse(&format!("{header}war\n"), p).is_err());
    }

    #[test]
    fn valence_file_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("valence.tsv");
        fs::write(&path, "good\t1.9\nbad\t-2.5\ngood\t2.2\n").unwrap();
        let lex = SentimentLexicon::load(&path, None, None).unwrap();
        assert_eq!(lex.valence["bad"], -2.5);
        assert_eq!(lex.valence["good"], 2.2);

        fs::write(&path, "good 1.9\n").unwrap();
        assert!(SentimentLexicon::load(&path, None, None).is_err());

        let boosts = dir.path().join("boost.tsv");
        fs::write(&path, "good\t1.9\n").unwrap();
        fs::write(&boosts, "very\t0\n").unwrap();
        assert!(SentimentLexicon::load(&path, None, Some(&boosts)).is_err());
    }

    #[test]
    fn builtin_lexicons_load() {
        assert!(SentimentLexicon::builtin().valence.len() > 50);
        assert!(SentimentLexicon::builtin().negators.contains("not"));
        assert_eq!(ThesaurusLexicon::builtin().categories().len(), 39);
    }

    proptest! {
        #[test]
        fn sentiment_proportions_sum_to_one(
            words in prop::collection::vec(prop::sample::select(vec!["good", "bad", "hate", "not", "very", "x", "y"]), 0..20)
        ) {
            let v = lexicon().score(&words);
            prop_assert!((v.neg + v.neu + v.pos - 1.0).abs() < 1e-6);
            prop_assert!((-1.0..=1.0).contains(&v.compound));
            prop_assert!(v.neg >= 0.0 && v.neu >= 0.0 && v.pos >= 0.0);
        }

        #[test]
        fn compound_bounded(s in -1e12f64..1e12) {
            prop_assert!((-1.0..=1.0).contains(&compound(s)));
        }

        #[test]
        fn thesaurus_is_order_invariant_and_bounded(
            words in prop::collection::vec(0usize..12, 0..15),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let membership = (0..8)
                .map(|i| (format!("w{i}"), vec![(i * 5 % 39) as u8, (i * 7 % 39) as u8]))
                .collect();
            let t = ThesaurusLexicon::new(categories(), membership).unwrap();
            let lemmas: Vec<String> = words.iter().map(|w| format!("w{w}")).collect();
            let mut shuffled = lemmas.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let v = t.profile(&lemmas);
            prop_assert_eq!(v, t.profile(&shuffled));
            prop_assert!(v.iter().all(|&x| (0.0..=1.0).contains(&x)));
            let any_member = words.iter().any(|&w| w < 8);
            prop_assert_eq!(v.iter().any(|&x| x > 0.0), any_member);
        }
    }
}
