//! Synthetic corpora with planted propaganda fragments.
//!
//! Articles are built from a neutral filler vocabulary; a share of sentences
//! carry a fragment drawn mostly from [`TRIGGER_LEXICON`], annotated with a
//! random technique. A companion 300-dimensional table stands in for
//! pretrained vectors: every lemma gets a pseudo-random vector seeded by the
//! lemma itself, and trigger lemmas share an extra offset direction.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::corpus::{write_span_labels, Article, SpanAnnotation, TECHNIQUES};
use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::textproc::Lemmatizer;

pub const TRIGGER_LEXICON: [&str; 30] = [
    "evil", "traitor", "corrupt", "destroy", "enemy", "liar", "fraud", "hoax", "disgrace", "outrageous",
    "tyranny", "regime", "invasion", "panic", "terror", "radical", "extremist", "criminal", "scandal",
    "shameful", "disgusting", "monster", "brutal", "dictator", "hysteria", "propaganda", "threat",
    "catastrophe", "illegal", "toxic",
];

pub const FILLER: [&str; 122] = [
    "the", "a", "of", "and", "to", "in", "on", "for", "with", "at", "by", "from", "city", "council",
    "report", "meeting", "week", "year", "people", "government", "official", "statement", "plan",
    "policy", "school", "market", "price", "water", "road", "project", "village", "team", "member",
    "committee", "budget", "season", "weather", "morning", "evening", "study", "data", "number",
    "percent", "local", "new", "public", "several", "many", "other", "first", "second", "last",
    "next", "early", "late", "said", "announced", "discussed", "reviewed", "visited", "opened",
    "published", "expected", "planned", "continued", "included", "reported", "noted", "added",
    "during", "after", "before", "about", "between", "under", "over", "national", "regional",
    "annual", "small", "large", "recent", "current", "former", "following", "group", "service",
    "health", "office", "center", "area", "community", "company", "industry", "program", "system",
    "development", "research", "event", "training", "director", "minister", "spokesperson",
    "residents", "workers", "students", "farmers", "visitors", "tuesday", "friday", "january",
    "march", "summer", "river", "bridge", "station", "hospital", "library", "museum", "park",
    "street", "building",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub articles: usize,
    pub min_sentences: usize,
    pub max_sentences: usize,
    /// Probability that a sentence carries a fragment.
    pub propaganda_rate: f64,
    /// Probability that a fragment word is filler rather than a trigger.
    pub fragment_noise: f64,
    /// Probability that a fragment gets a second, overlapping annotation.
    pub overlap_rate: f64,
    pub first_id: u64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            articles: 50,
            min_sentences: 14,
            max_sentences: 22,
            propaganda_rate: 0.4,
            fragment_noise: 0.1,
            overlap_rate: 0.3,
            first_id: 700_000_000,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SynthCorpus {
    pub articles: Vec<Article>,
    /// Annotations with techniques; fragments may carry two overlapping ones.
    pub annotations: Vec<SpanAnnotation>,
}

impl SynthCorpus {
    /// Lemmas of every token, sorted.
    pub fn vocabulary(&self, lemmatizer: &Lemmatizer) -> BTreeSet<String> {
        self.articles
            .iter()
            .flat_map(|a| lemmatizer.tokenize(&a.text))
            .map(|t| t.lemma)
            .collect()
    }
}

struct ArticleBuilder {
    text: String,
    chars: usize,
}

impl ArticleBuilder {
    fn push(&mut self, s: &str) -> (usize, usize) {
        let start = self.chars;
        self.text.push_str(s);
        self.chars += s.chars().count();
        (start, self.chars)
    }
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn filler_words(rng: &mut ChaCha8Rng, n: usize) -> Vec<&'static str> {
    (0..n).map(|_| *FILLER.choose(rng).expect("non-empty")).collect()
}

pub fn generate(config: &SynthConfig) -> SynthCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out = SynthCorpus::default();
    for a in 0..config.articles {
        let id = (config.first_id + a as u64).to_string();
        let mut b = ArticleBuilder {
            text: String::new(),
            chars: 0,
        };
        let title_len = rng.gen_range(3..=6);
        let title = filler_words(&mut rng, title_len);
        b.push(&capitalize(&title.join(" ")));
        b.push("\n\n");
        let sentences = rng.gen_range(config.min_sentences..=config.max_sentences);
        for s in 0..sentences {
            if s > 0 {
                b.push(if s % 4 == 0 { "\n" } else { " " });
            }
            let planted = rng.gen_bool(config.propaganda_rate);
            let prefix_len = if planted { rng.gen_range(1..=4) } else { rng.gen_range(6..=14) };
            let prefix = filler_words(&mut rng, prefix_len);
            b.push(&capitalize(&prefix.join(" ")));
            if planted {
                b.push(" ");
                let len = rng.gen_range(2..=5);
                let words: Vec<&str> = (0..len)
                    .map(|i| {
                        let edge = i == 0 || i + 1 == len;
                        if !edge && rng.gen_bool(config.fragment_noise) {
                            *FILLER.choose(&mut rng).expect("non-empty")
                        } else {
                            *TRIGGER_LEXICON.choose(&mut rng).expect("non-empty")
                        }
                    })
                    .collect();
                let (start, end) = b.push(&words.join(" "));
                let technique = *TECHNIQUES.choose(&mut rng).expect("non-empty");
                out.annotations
                    .push(SpanAnnotation::new(id.clone(), start, end).with_technique(technique));
                if rng.gen_bool(config.overlap_rate) {
                    let other = *TECHNIQUES.choose(&mut rng).expect("non-empty");
                    let first_word = words[0].chars().count();
                    out.annotations
                        .push(SpanAnnotation::new(id.clone(), start, start + first_word).with_technique(other));
                }
                let suffix_len = rng.gen_range(1..=4);
                b.push(" ");
                b.push(&filler_words(&mut rng, suffix_len).join(" "));
            }
            b.push(".");
        }
        out.articles.push(Article::new(id, b.text));
    }
    out
}

fn word_seed(seed: u64, lemma: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(lemma.as_bytes());
    u64::from_le_bytes(h.finalize()[..8].try_into().expect("8 bytes"))
}

/// Deterministic stand-in for a pretrained table over `lemmas`. Values are
/// rounded to three decimals so the table is compact on disk.
pub fn pseudo_pretrained<'a>(lemmas: impl IntoIterator<Item = &'a str>, dim: usize, seed: u64) -> Result<EmbeddingTable> {
    let lemmatizer = Lemmatizer::builtin();
    let triggers: BTreeSet<String> = TRIGGER_LEXICON.iter().map(|w| lemmatizer.lemmatize(w)).collect();
    let mut dir_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let direction: Vec<f32> = (0..dim).map(|_| dir_rng.gen_range(-0.4..0.4)).collect();
    let round = |v: f32| (v * 1000.0).round() / 1000.0;
    let rows: Vec<(String, Vec<f32>)> = lemmas
        .into_iter()
        .map(|lemma| {
            let mut rng = ChaCha8Rng::seed_from_u64(word_seed(seed, lemma));
            let shift = triggers.contains(lemma);
            let v = (0..dim)
                .map(|i| {
                    let base: f32 = rng.gen_range(-0.5..0.5);
                    round(if shift { base + direction[i] } else { base })
                })
                .collect();
            (lemma.to_string(), v)
        })
        .collect();
    EmbeddingTable::from_rows(dim, rows)
}

/// Writes `articles/article<id>.txt` files and a `labels.tsv` with
/// techniques under `dir`.
pub fn write_corpus(corpus: &SynthCorpus, dir: &Path) -> Result<()> {
    let articles = dir.join("articles");
    fs::create_dir_all(&articles).map_err(|e| Error::io(&articles, e))?;
    for a in &corpus.articles {
        let path = articles.join(format!("article{}.txt", a.id));
        fs::write(&path, &a.text).map_err(|e| Error::io(&path, e))?;
    }
    write_span_labels(&corpus.annotations, &dir.join("labels.tsv"))
}

/// Paths of a corpus written by [`write_workspace`].
#[derive(Debug, Clone, PartialEq)]
pub struct Workspace {
    pub train_articles: PathBuf,
    pub train_labels: PathBuf,
    pub dev_articles: PathBuf,
    pub dev_labels: PathBuf,
    pub pretrained: PathBuf,
}

/// Writes a train split, a dev split and a pseudo-pretrained table covering
/// both vocabularies under `dir`.
pub fn write_workspace(dir: &Path, train: &SynthConfig, dev: &SynthConfig) -> Result<Workspace> {
    let train_corpus = generate(train);
    let dev_corpus = generate(dev);
    write_corpus(&train_corpus, &dir.join("train"))?;
    write_corpus(&dev_corpus, &dir.join("dev"))?;
    let lemmatizer = Lemmatizer::builtin();
    let mut vocab = train_corpus.vocabulary(lemmatizer);
    vocab.extend(dev_corpus.vocabulary(lemmatizer));
    let table = pseudo_pretrained(vocab.iter().map(String::as_str), 300, train.seed)?;
    let pretrained = dir.join("pretrained_300.vec");
    table.save(&pretrained)?;
    Ok(Workspace {
        train_articles: dir.join("train/articles"),
        train_labels: dir.join("train/labels.tsv"),
        dev_articles: dir.join("dev/articles"),
        dev_labels: dir.join("dev/labels.tsv"),
        pretrained,
    })
}

/// Dev split companion of [`toy_config`].
pub fn toy_dev_config() -> SynthConfig {
    SynthConfig {
        articles: 4,
        first_id: 111_100_000,
        seed: 2021,
        ..SynthConfig::default()
    }
}

/// The 10-article corpus bundled under `data/toy`.
pub fn toy_config() -> SynthConfig {
    SynthConfig {
        articles: 10,
        first_id: 111_000_000,
        seed: 2020,
        ..SynthConfig::default()
    }
}
