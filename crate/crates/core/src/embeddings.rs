//! Word embedding tables: skip-gram training with negative sampling, the
//! plain-text word-vector format, and token/window lookups.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Skip-gram training parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SgnsParams {
    pub dimension: usize,
    pub window: usize,
    pub epochs: usize,
    pub negatives: usize,
    pub min_count: usize,
    pub learning_rate: f32,
    pub seed: u64,
}

impl Default for SgnsParams {
    fn default() -> Self {
        SgnsParams {
            dimension: 200,
            window: 7,
            epochs: 5,
            negatives: 5,
            min_count: 1,
            learning_rate: 0.025,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TableOrigin {
    Trained(SgnsParams),
    Loaded(PathBuf),
    InMemory,
}

/// A lemma → dense vector table with a fixed dimension.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dimension: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f32>,
    origin: TableOrigin,
}

impl PartialEq for EmbeddingTable {
    fn eq(&self, other: &Self) -> bool {
        self.dimension == other.dimension && self.words == other.words && self.data == other.data
    }
}

impl EmbeddingTable {
    /// Builds a table from `(lemma, vector)` rows.
    pub fn from_rows<I, S>(dimension: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f32>)>,
        S: Into<String>,
    {
        if dimension == 0 {
            return Err(Error::Argument("embedding dimension must be positive".into()));
        }
        let mut table = EmbeddingTable {
            dimension,
            words: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
            origin: TableOrigin::InMemory,
        };
        for (word, vector) in rows {
            let word = word.into();
            if vector.len() != dimension {
                return Err(Error::Argument(format!(
                    "vector for `{word}` has {} entries, expected {dimension}",
                    vector.len()
                )));
            }
            if vector.iter().any(|v| !v.is_finite()) {
                return Err(Error::Argument(format!("vector for `{word}` is not finite")));
            }
            if table.index.contains_key(&word) {
                return Err(Error::Argument(format!("duplicate lemma `{word}`")));
            }
            table.push(word, &vector);
        }
        Ok(table)
    }

    fn push(&mut self, word: String, vector: &[f32]) {
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.data.extend_from_slice(vector);
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn origin(&self) -> &TableOrigin {
        &self.origin
    }

    fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dimension..(i + 1) * self.dimension]
    }

    /// Exact-match lookup. `None` marks an out-of-vocabulary lemma.
    pub fn lookup(&self, lemma: &str) -> Option<&[f32]> {
        self.index.get(lemma).map(|&i| self.row(i))
    }

    pub fn contains(&self, lemma: &str) -> bool {
        self.index.contains_key(lemma)
    }

    /// Mean vector of the in-vocabulary lemmas, or zeros when none is known.
    ///
    /// Rows are summed in vocabulary order, so the result is bit-identical
    /// for any permutation of `lemmas`.
    pub fn window_embedding<S: AsRef<str>>(&self, lemmas: &[S]) -> Vec<f64> {
        let mut rows: Vec<usize> = lemmas
            .iter()
            .filter_map(|l| self.index.get(l.as_ref()).copied())
            .collect();
        let mut out = vec![0.0; self.dimension];
        if rows.is_empty() {
            return out;
        }
        rows.sort_unstable();
        for &r in &rows {
            for (o, &v) in out.iter_mut().zip(self.row(r)) {
                *o += f64::from(v);
            }
        }
        let n = rows.len() as f64;
        out.iter_mut().for_each(|o| *o /= n);
        out
    }

    /// Text serialization with a `count dim` header line.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.len(), self.dimension);
        for (i, word) in self.words.iter().enumerate() {
            out.push_str(word);
            for v in self.row(i) {
                write!(out, " {v}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    /// Loads the plain-text word-vector format: an optional `count dim`
    /// header, then `lemma v1 ... vd` per line.
    pub fn load(path: &Path, expected_dimension: usize) -> Result<Self> {
        let source = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut table = Self::parse(&source, expected_dimension, path)?;
        table.origin = TableOrigin::Loaded(path.to_path_buf());
        Ok(table)
    }

    pub fn parse(source: &str, expected_dimension: usize, origin: &Path) -> Result<Self> {
        let mut lines = source.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).peekable();
        let mut declared_count = None;
        let mut dimension = None;
        if let Some((_, first)) = lines.peek() {
            let fields: Vec<&str> = first.split_whitespace().collect();
            if let [count, dim] = fields.as_slice() {
                if let (Ok(c), Ok(d)) = (count.parse::<usize>(), dim.parse::<usize>()) {
                    declared_count = Some(c);
                    dimension = Some(d);
                    lines.next();
                }
            }
        }
        let mut table = EmbeddingTable {
            dimension: 0,
            words: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
            origin: TableOrigin::InMemory,
        };
        let mut vector = Vec::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            let mut fields = line.split_whitespace();
            let word = fields.next().expect("blank lines are filtered");
            vector.clear();
            for f in fields {
                let v: f32 = f
                    .parse()
                    .map_err(|_| Error::parse(origin, line_no, format!("malformed float `{f}`")))?;
                if !v.is_finite() {
                    return Err(Error::parse(origin, line_no, format!("non-finite value `{f}`")));
                }
                vector.push(v);
            }
            let dim = *dimension.get_or_insert(vector.len());
            if vector.len() != dim {
                return Err(Error::parse(
                    origin,
                    line_no,
                    format!("row has {} values, expected {dim}", vector.len()),
                ));
            }
            if table.index.contains_key(word) {
                return Err(Error::parse(origin, line_no, format!("duplicate lemma `{word}`")));
            }
            table.push(word.to_string(), &vector);
        }
        let dim = dimension.unwrap_or(expected_dimension);
        if dim != expected_dimension {
            return Err(Error::load(
                origin,
                format!("table dimension {dim} does not match expected {expected_dimension}"),
            ));
        }
        if dim == 0 {
            return Err(Error::load(origin, "embedding dimension must be positive"));
        }
        if let Some(count) = declared_count {
            if count != table.len() {
                return Err(Error::load(
                    origin,
                    format!("header declares {count} rows, found {}", table.len()),
                ));
            }
        }
        table.dimension = dim;
        Ok(table)
    }
}

/// Loads a word-vector file and checks its dimension.
pub fn load_embeddings(path: &Path, expected_dimension: usize) -> Result<EmbeddingTable> {
    EmbeddingTable::load(path, expected_dimension)
}

struct Vocab {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
}

fn build_vocab<S: AsRef<str>>(sentences: &[Vec<S>], min_count: usize) -> Vocab {
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for s in sentences {
        for w in s {
            *freq.entry(w.as_ref()).or_default() += 1;
        }
    }
    let mut entries: Vec<(&str, u64)> = freq
        .into_iter()
        .filter(|&(_, c)| c >= min_count.max(1) as u64)
        .collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let words: Vec<String> = entries.iter().map(|(w, _)| w.to_string()).collect();
    let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
    Vocab {
        counts: entries.iter().map(|e| e.1).collect(),
        words,
        index,
    }
}

/// Draws negatives from the unigram distribution raised to 3/4.
struct NegativeSampler {
    cumulative: Vec<f64>,
}

impl NegativeSampler {
    fn new(counts: &[u64]) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(0.75);
                acc
            })
            .collect();
        NegativeSampler { cumulative }
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty vocabulary");
        let u = rng.gen::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }
}

fn sigmoid(x: f32) -> f32 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Trains skip-gram embeddings with negative sampling and returns the input
/// vectors.
///
/// Runs single-threaded with a seeded generator and a fixed iteration order,
/// so identical inputs give bit-identical tables. The learning rate decays
/// linearly over all training positions.
pub fn train_sgns<S: AsRef<str>>(sentences: &[Vec<S>], params: &SgnsParams) -> Result<EmbeddingTable> {
    if params.dimension == 0 || params.window == 0 || params.epochs == 0 {
        return Err(Error::Argument(
            "dimension, window and epochs must all be positive".into(),
        ));
    }
    let vocab = build_vocab(sentences, params.min_count);
    let encoded: Vec<Vec<usize>> = sentences
        .iter()
        .map(|s| s.iter().filter_map(|w| vocab.index.get(w.as_ref()).copied()).collect())
        .collect();
    if vocab.words.is_empty() || !encoded.iter().any(|s| s.len() >= 2) {
        return Err(Error::Training(format!(
            "no sentence has two in-vocabulary lemmas at min_count={}",
            params.min_count
        )));
    }

    let dim = params.dimension;
    let v = vocab.words.len();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut input: Vec<f32> = (0..v * dim)
        .map(|_| (rng.gen::<f32>() - 0.5) / dim as f32)
        .collect();
    let mut output = vec![0.0f32; v * dim];
    let sampler = NegativeSampler::new(&vocab.counts);

    let per_epoch: usize = encoded.iter().map(Vec::len).sum();
    let total = (per_epoch * params.epochs) as f32 + 1.0;
    let min_lr = params.learning_rate * 1e-4;
    let mut processed = 0usize;
    let mut grad = vec![0.0f32; dim];

    for epoch in 0..params.epochs {
        for sentence in &encoded {
            for (pos, &center) in sentence.iter().enumerate() {
                let lr = (params.learning_rate * (1.0 - processed as f32 / total)).max(min_lr);
                processed += 1;
                let reach = params.window - rng.gen_range(0..params.window);
                let lo = pos.saturating_sub(reach);
                let hi = (pos + reach + 1).min(sentence.len());
                for (offset, &context) in sentence[lo..hi].iter().enumerate() {
                    if lo + offset == pos {
                        continue;
                    }
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    let center_row = center * dim..(center + 1) * dim;
                    for d in 0..=params.negatives {
                        let (target, label) = if d == 0 {
                            (context, 1.0)
                        } else {
                            let neg = sampler.sample(&mut rng);
                            if neg == context {
                                continue;
                            }
                            (neg, 0.0)
                        };
                        let target_row = target * dim..(target + 1) * dim;
                        let w_in = &input[center_row.clone()];
                        let w_out = &mut output[target_row];
                        let score: f32 = w_in.iter().zip(w_out.iter()).map(|(a, b)| a * b).sum();
                        let g = (label - sigmoid(score)) * lr;
                        for ((acc, out), &inp) in grad.iter_mut().zip(w_out.iter_mut()).zip(w_in) {
                            *acc += g * *out;
                            *out += g * inp;
                        }
                    }
                    for (w, g) in input[center_row].iter_mut().zip(&grad) {
                        *w += g;
                    }
                }
            }
        }
        if input.iter().chain(&output).any(|x| !x.is_finite()) {
            return Err(Error::Training(format!(
                "embedding weights became non-finite in epoch {}",
                epoch + 1
            )));
        }
    }

    let mut table = EmbeddingTable::from_rows(
        dim,
        vocab
            .words
            .into_iter()
            .enumerate()
            .map(|(i, w)| (w, input[i * dim..(i + 1) * dim].to_vec())),
    )?;
    table.origin = TableOrigin::Trained(params.clone());
    Ok(table)
}
