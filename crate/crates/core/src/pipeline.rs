//! Per-token feature assembly over shrinkable context windows, plus
//! class-controlled sampling of training vectors.
//!
//! A token's vector concatenates five blocks in a fixed order:
//!
//! | block        | width | source                                   |
//! |--------------|-------|------------------------------------------|
//! | `w2v_token`  | 200   | trained skip-gram vector of the lemma    |
//! | `pre_token`  | 300   | pretrained vector of the lemma           |
//! | `window_emb` | 300   | mean pretrained vector over the window   |
//! | `sentiment`  | 4     | neg, neu, pos, compound of the window    |
//! | `thesaurus`  | 39    | category profile of the window           |
//!
//! for 843 values in total. An optional sixth block holds the length of the
//! token's sentence.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{self, technique_index, Article, Label, SpanAnnotation};
use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::lexfeatures::{SentimentLexicon, ThesaurusLexicon};
use crate::textproc::{Lemmatizer, Token};

pub const W2V_DIM: usize = 200;
pub const PRETRAINED_DIM: usize = 300;
pub const FEATURE_DIM: usize = 843;
pub const BLOCK_OFFSETS: [usize; 5] = [0, 200, 500, 800, 804];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    W2vToken,
    PreToken,
    WindowEmb,
    Sentiment,
    Thesaurus,
    SentenceLength,
}

impl Block {
    pub const STANDARD: [Block; 5] = [
        Block::W2vToken,
        Block::PreToken,
        Block::WindowEmb,
        Block::Sentiment,
        Block::Thesaurus,
    ];

    pub fn width(self) -> usize {
        match self {
            Block::W2vToken => W2V_DIM,
            Block::PreToken | Block::WindowEmb => PRETRAINED_DIM,
            Block::Sentiment => 4,
            Block::Thesaurus => 39,
            Block::SentenceLength => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Block::W2vToken => "w2v_token",
            Block::PreToken => "pre_token",
            Block::WindowEmb => "window_emb",
            Block::Sentiment => "sentiment",
            Block::Thesaurus => "thesaurus",
            Block::SentenceLength => "sentence_length",
        }
    }
}

impl FromStr for Block {
    type Err = Error;

    /// Accepts block names or their 1-based position (`1`..`6`).
    fn from_str(s: &str) -> Result<Self> {
        let all = [
            Block::W2vToken,
            Block::PreToken,
            Block::WindowEmb,
            Block::Sentiment,
            Block::Thesaurus,
            Block::SentenceLength,
        ];
        if let Ok(n) = s.parse::<usize>() {
            return n
                .checked_sub(1)
                .and_then(|i| all.get(i).copied())
                .ok_or_else(|| Error::Argument(format!("block number {n} out of range 1..=6")));
        }
        all.into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown feature block `{s}`")))
    }
}

/// Which blocks a feature vector carries. The five standard blocks are
/// always present; the sentence-length block is opt-in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct FeatureLayout {
    pub sentence_length: bool,
}

impl FeatureLayout {
    pub const STANDARD: FeatureLayout = FeatureLayout {
        sentence_length: false,
    };

    pub fn blocks(self) -> Vec<Block> {
        let mut blocks = Block::STANDARD.to_vec();
        if self.sentence_length {
            blocks.push(Block::SentenceLength);
        }
        blocks
    }

    pub fn dim(self) -> usize {
        self.blocks().iter().map(|b| b.width()).sum()
    }

    pub fn range(self, block: Block) -> Option<Range<usize>> {
        let mut offset = 0;
        for b in self.blocks() {
            if b == block {
                return Some(offset..offset + b.width());
            }
            offset += b.width();
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    layout: FeatureLayout,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(layout: FeatureLayout, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.dim() {
            return Err(Error::Argument(format!(
                "feature vector has {} values, layout needs {}",
                values.len(),
                layout.dim()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("feature vector has non-finite values".into()));
        }
        Ok(FeatureVector { layout, values })
    }

    pub fn layout(&self) -> FeatureLayout {
        self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn block(&self, block: Block) -> Option<&[f64]> {
        self.layout.range(block).map(|r| &self.values[r])
    }
}

/// Token range `[start, end)` within `n` tokens of `center`, clipped to the
/// article.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContextWindow {
    pub center: usize,
    pub n: usize,
    pub start: usize,
    pub end: usize,
}

impl ContextWindow {
    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

pub fn build_window(token_count: usize, center: usize, n: usize) -> Result<ContextWindow> {
    if center >= token_count {
        return Err(Error::Argument(format!(
            "window center {center} outside article of {token_count} tokens"
        )));
    }
    Ok(ContextWindow {
        center,
        n,
        start: center.saturating_sub(n),
        end: (center.saturating_add(n).saturating_add(1)).min(token_count),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OovPolicy {
    /// Tokens unknown to either token table get no vector.
    #[default]
    Drop,
    /// Unknown token blocks are zero-filled.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    None,
    L2Full,
    L2PerBlock,
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Normalization::None),
            "l2_full" => Ok(Normalization::L2Full),
            "l2_per_block" => Ok(Normalization::L2PerBlock),
            other => Err(Error::Argument(format!("unknown normalization `{other}`"))),
        }
    }
}

impl FromStr for OovPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "drop" => Ok(OovPolicy::Drop),
            "zero" => Ok(OovPolicy::Zero),
            other => Err(Error::Argument(format!("unknown oov policy `{other}`"))),
        }
    }
}

fn scale_to_unit(values: &mut [f64]) {
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        values.iter_mut().for_each(|v| *v /= norm);
    }
}

pub fn normalize(vector: &FeatureVector, mode: Normalization) -> FeatureVector {
    let mut out = vector.clone();
    match mode {
        Normalization::None => {}
        Normalization::L2Full => scale_to_unit(&mut out.values),
        Normalization::L2PerBlock => {
            for block in out.layout.blocks() {
                let r = out.layout.range(block).expect("block of own layout");
                scale_to_unit(&mut out.values[r]);
            }
        }
    }
    out
}

/// Keeps only `active` blocks, concatenated in canonical order.
pub fn ablate(vector: &FeatureVector, active: &[Block]) -> Result<Vec<f64>> {
    if active.is_empty() {
        return Err(Error::Argument("ablation needs at least one active block".into()));
    }
    let mut blocks = active.to_vec();
    blocks.sort();
    blocks.dedup();
    let mut out = Vec::with_capacity(blocks.iter().map(|b| b.width()).sum());
    for b in blocks {
        let slice = vector.block(b).ok_or_else(|| {
            Error::Argument(format!("block `{}` is not part of this feature layout", b.name()))
        })?;
        out.extend_from_slice(slice);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Featurized {
    Vector(FeatureVector),
    Dropped,
}

impl Featurized {
    pub fn vector(self) -> Option<FeatureVector> {
        match self {
            Featurized::Vector(v) => Some(v),
            Featurized::Dropped => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeaturizerOptions {
    pub window_n: usize,
    pub oov_policy: OovPolicy,
    pub normalization: Normalization,
    pub layout: FeatureLayout,
}

impl Default for FeaturizerOptions {
    fn default() -> Self {
        FeaturizerOptions {
            window_n: 7,
            oov_policy: OovPolicy::Drop,
            normalization: Normalization::None,
            layout: FeatureLayout::STANDARD,
        }
    }
}

/// Assembles token feature vectors from the embedding tables and lexicons.
#[derive(Debug, Clone, Copy)]
pub struct Featurizer<'a> {
    w2v: &'a EmbeddingTable,
    pretrained: &'a EmbeddingTable,
    sentiment: &'a SentimentLexicon,
    thesaurus: &'a ThesaurusLexicon,
    options: FeaturizerOptions,
}

impl<'a> Featurizer<'a> {
    pub fn new(
        w2v: &'a EmbeddingTable,
        pretrained: &'a EmbeddingTable,
        sentiment: &'a SentimentLexicon,
        thesaurus: &'a ThesaurusLexicon,
        options: FeaturizerOptions,
    ) -> Result<Self> {
        if w2v.dimension() != W2V_DIM {
            return Err(Error::Argument(format!(
                "token embedding table has dimension {}, expected {W2V_DIM}",
                w2v.dimension()
            )));
        }
        if pretrained.dimension() != PRETRAINED_DIM {
            return Err(Error::Argument(format!(
                "pretrained table has dimension {}, expected {PRETRAINED_DIM}",
                pretrained.dimension()
            )));
        }
        Ok(Featurizer {
            w2v,
            pretrained,
            sentiment,
            thesaurus,
            options,
        })
    }

    pub fn options(&self) -> FeaturizerOptions {
        self.options
    }

    pub fn with_options(&self, options: FeaturizerOptions) -> Self {
        Featurizer { options, ..*self }
    }

    pub fn dim(&self) -> usize {
        self.options.layout.dim()
    }

    pub fn is_dropped(&self, token: &Token) -> bool {
        self.options.oov_policy == OovPolicy::Drop
            && !(self.w2v.contains(&token.lemma) && self.pretrained.contains(&token.lemma))
    }

    pub fn featurize_token(&self, tokens: &[Token], center: usize) -> Result<Featurized> {
        let window = build_window(tokens.len(), center, self.options.window_n)?;
        let token = &tokens[center];
        if self.is_dropped(token) {
            return Ok(Featurized::Dropped);
        }
        let layout = self.options.layout;
        let mut values = Vec::with_capacity(layout.dim());
        push_lookup(&mut values, self.w2v, &token.lemma);
        push_lookup(&mut values, self.pretrained, &token.lemma);

        let lemmas: Vec<&str> = tokens[window.range()].iter().map(|t| t.lemma.as_str()).collect();
        values.extend(self.pretrained.window_embedding(&lemmas));
        values.extend(self.sentiment.score(&lemmas).to_array());
        values.extend(self.thesaurus.profile(&lemmas));
        if layout.sentence_length {
            values.push(sentence_length(tokens, center) as f64);
        }
        let vector = FeatureVector::new(layout, values)?;
        Ok(Featurized::Vector(normalize(&vector, self.options.normalization)))
    }

    /// Featurizes every token of an article, in order.
    pub fn featurize_article(&self, tokens: &[Token]) -> Result<Vec<Featurized>> {
        (0..tokens.len()).map(|i| self.featurize_token(tokens, i)).collect()
    }
}

fn push_lookup(values: &mut Vec<f64>, table: &EmbeddingTable, lemma: &str) {
    match table.lookup(lemma) {
        Some(v) => values.extend(v.iter().map(|&x| f64::from(x))),
        None => values.resize(values.len() + table.dimension(), 0.0),
    }
}

// tokens are sorted, so tokens of one sentence are contiguous
fn sentence_length(tokens: &[Token], center: usize) -> usize {
    let s = tokens[center].sentence_index;
    let lo = tokens.partition_point(|t| t.sentence_index < s);
    let hi = tokens.partition_point(|t| t.sentence_index <= s);
    hi - lo
}

/// One article's tokens with their gold labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledArticle {
    pub id: String,
    pub tokens: Vec<Token>,
    pub labels: Vec<Label>,
    pub techniques: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledCorpus {
    pub articles: Vec<LabeledArticle>,
}

impl LabeledCorpus {
    /// Tokenizes every article and labels its tokens against `annotations`.
    /// Annotations of articles not in `articles` are an error.
    pub fn build(articles: &[Article], annotations: &[SpanAnnotation], lemmatizer: &Lemmatizer) -> Result<Self> {
        let grouped = corpus::group_by_article(annotations);
        if let Some(missing) = grouped.keys().find(|id| !articles.iter().any(|a| &a.id == *id)) {
            return Err(Error::Labeling(format!(
                "annotations reference unknown article `{missing}`"
            )));
        }
        let mut out = Vec::with_capacity(articles.len());
        for article in articles {
            let tokens = lemmatizer.tokenize(&article.text);
            let spans = grouped.get(article.id.as_str()).map(Vec::as_slice).unwrap_or(&[]);
            let labeled = corpus::label_tokens(article, &tokens, spans)?;
            let (labels, techniques) = labeled.into_iter().map(|t| (t.label, t.techniques)).unzip();
            out.push(LabeledArticle {
                id: article.id.clone(),
                tokens,
                labels,
                techniques,
            });
        }
        Ok(LabeledCorpus { articles: out })
    }

    pub fn token_count(&self) -> usize {
        self.articles.iter().map(|a| a.tokens.len()).sum()
    }

    pub fn gold_labels(&self) -> Vec<Label> {
        self.articles.iter().flat_map(|a| a.labels.iter().copied()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub n_propaganda: usize,
    pub n_none: usize,
    /// Technique → number of Propaganda samples; must sum to `n_propaganda`.
    pub per_technique_quota: Option<BTreeMap<String, usize>>,
    /// Number of distinct articles None samples are drawn from; `None`
    /// means every article.
    pub none_article_spread: Option<usize>,
    pub seed: u64,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan {
            n_propaganda: 7000,
            n_none: 10000,
            per_technique_quota: None,
            none_article_spread: None,
            seed: 1,
        }
    }
}

impl SamplingPlan {
    pub fn new(n_propaganda: usize, n_none: usize) -> Self {
        SamplingPlan {
            n_propaganda,
            n_none,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(q) = &self.per_technique_quota {
            let sum: usize = q.values().sum();
            if sum != self.n_propaganda {
                return Err(Error::Argument(format!(
                    "technique quotas sum to {sum}, but {} Propaganda samples are planned",
                    self.n_propaganda
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Provenance {
    pub article_id: String,
    pub token_index: usize,
    pub technique: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub vector: FeatureVector,
    pub label: Label,
    pub provenance: Provenance,
}

/// A drawn sample before featurization: indices into a [`LabeledCorpus`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SampleRef {
    pub article: usize,
    pub token: usize,
    pub label: Label,
    pub technique: Option<String>,
}

fn technique_rank(name: &str) -> (usize, String) {
    (technique_index(name).unwrap_or(usize::MAX), name.to_string())
}

/// Chooses which tokens become training samples.
///
/// `eligible(article, token)` filters out tokens that cannot be featurized.
/// Propaganda samples are a seeded shuffle of the eligible pool, optionally
/// filled per technique; None samples are taken round-robin across the
/// chosen articles.
pub fn select_samples(
    corpus: &LabeledCorpus,
    plan: &SamplingPlan,
    eligible: impl Fn(usize, usize) -> bool,
) -> Result<Vec<SampleRef>> {
    plan.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);

    let mut propaganda: Vec<(usize, usize)> = Vec::new();
    let mut none_by_article: Vec<Vec<usize>> = vec![Vec::new(); corpus.articles.len()];
    for (ai, article) in corpus.articles.iter().enumerate() {
        for (ti, label) in article.labels.iter().enumerate() {
            if !eligible(ai, ti) {
                continue;
            }
            match label {
                Label::Propaganda => propaganda.push((ai, ti)),
                Label::None => none_by_article[ai].push(ti),
            }
        }
    }

    propaganda.shuffle(&mut rng);
    let mut out = Vec::with_capacity(plan.n_propaganda + plan.n_none);
    match &plan.per_technique_quota {
        None => {
            if propaganda.len() < plan.n_propaganda {
                return Err(Error::Sampling {
                    stratum: "Propaganda".into(),
                    requested: plan.n_propaganda,
                    available: propaganda.len(),
                });
            }
            out.extend(propaganda[..plan.n_propaganda].iter().map(|&(a, t)| SampleRef {
                article: a,
                token: t,
                label: Label::Propaganda,
                technique: None,
            }));
        }
        Some(quotas) => out.extend(fill_quotas(corpus, &propaganda, quotas)?),
    }

    let mut articles: Vec<usize> = (0..corpus.articles.len())
        .filter(|&a| !none_by_article[a].is_empty())
        .collect();
    if let Some(spread) = plan.none_article_spread {
        if spread < articles.len() {
            articles.shuffle(&mut rng);
            articles.truncate(spread);
            articles.sort_unstable();
        }
    }
    let available: usize = articles.iter().map(|&a| none_by_article[a].len()).sum();
    if available < plan.n_none {
        let stratum = match plan.none_article_spread {
            Some(s) => format!("None (spread over {s} articles)"),
            None => "None".to_string(),
        };
        return Err(Error::Sampling {
            stratum,
            requested: plan.n_none,
            available,
        });
    }
    let mut queues: Vec<std::vec::IntoIter<usize>> = articles
        .iter()
        .map(|&a| {
            let mut pool = none_by_article[a].clone();
            pool.shuffle(&mut rng);
            pool.into_iter()
        })
        .collect();
    let mut drawn = 0;
    while drawn < plan.n_none {
        for (queue, &a) in queues.iter_mut().zip(&articles) {
            if drawn == plan.n_none {
                break;
            }
            if let Some(t) = queue.next() {
                out.push(SampleRef {
                    article: a,
                    token: t,
                    label: Label::None,
                    technique: None,
                });
                drawn += 1;
            }
        }
    }
    Ok(out)
}

// Each token fills at most one quota: among the unmet quotas of its
// techniques, the one with the smallest supply in the pool, ties broken by
// canonical technique order.
fn fill_quotas(
    corpus: &LabeledCorpus,
    pool: &[(usize, usize)],
    quotas: &BTreeMap<String, usize>,
) -> Result<Vec<SampleRef>> {
    let mut supply: HashMap<&str, usize> = HashMap::new();
    for &(a, t) in pool {
        for tech in &corpus.articles[a].techniques[t] {
            *supply.entry(tech.as_str()).or_default() += 1;
        }
    }
    let mut remaining: BTreeMap<&str, usize> = quotas
        .iter()
        .filter(|(_, &q)| q > 0)
        .map(|(k, &q)| (k.as_str(), q))
        .collect();
    let mut out = Vec::new();
    for &(a, t) in pool {
        if remaining.is_empty() {
            break;
        }
        let candidate = corpus.articles[a].techniques[t]
            .iter()
            .filter(|tech| remaining.contains_key(tech.as_str()))
            .min_by_key(|tech| (supply.get(tech.as_str()).copied().unwrap_or(0), technique_rank(tech)));
        if let Some(tech) = candidate {
            let left = remaining.get_mut(tech.as_str()).expect("filtered on membership");
            *left -= 1;
            if *left == 0 {
                remaining.remove(tech.as_str());
            }
            out.push(SampleRef {
                article: a,
                token: t,
                label: Label::Propaganda,
                technique: Some(tech.clone()),
            });
        }
    }
    if let Some((tech, &left)) = remaining.iter().min_by_key(|(k, _)| technique_rank(k)) {
        let requested = quotas[*tech];
        return Err(Error::Sampling {
            stratum: format!("Propaganda/{tech}"),
            requested,
            available: requested - left,
        });
    }
    Ok(out)
}

/// Draws samples according to `plan` and featurizes them.
pub fn draw_samples(corpus: &LabeledCorpus, featurizer: &Featurizer<'_>, plan: &SamplingPlan) -> Result<Vec<Sample>> {
    let refs = select_samples(corpus, plan, |a, t| {
        !featurizer.is_dropped(&corpus.articles[a].tokens[t])
    })?;
    materialize(corpus, featurizer, &refs)
}

pub fn materialize(corpus: &LabeledCorpus, featurizer: &Featurizer<'_>, refs: &[SampleRef]) -> Result<Vec<Sample>> {
    refs.iter()
        .map(|r| {
            let article = &corpus.articles[r.article];
            let vector = featurizer
                .featurize_token(&article.tokens, r.token)?
                .vector()
                .ok_or_else(|| {
                    Error::Argument(format!(
                        "token {} of article `{}` is dropped and cannot be sampled",
                        r.token, article.id
                    ))
                })?;
            Ok(Sample {
                vector,
                label: r.label,
                provenance: Provenance {
                    article_id: article.id.clone(),
                    token_index: r.token,
                    technique: r.technique.clone(),
                },
            })
        })
        .collect()
}

/// Writes `label<TAB>article_id<TAB>token_ordinal<TAB>v1,...,vd` lines.
pub fn write_feature_dump(samples: &[Sample], path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut line = String::new();
    for s in samples {
        line.clear();
        write!(line, "{}\t{}\t{}\t", s.label, s.provenance.article_id, s.provenance.token_index).unwrap();
        for (i, v) in s.vector.values().iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            write!(line, "{v}").unwrap();
        }
        line.push('\n');
        w.write_all(line.as_bytes()).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_feature_dump(path: &Path, layout: FeatureLayout) -> Result<Vec<Sample>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [label, article, token, values] = fields.as_slice() else {
            return Err(Error::parse(path, line_no, "expected 4 tab-separated fields"));
        };
        let label = Label::parse(label)
            .ok_or_else(|| Error::parse(path, line_no, format!("unknown label `{label}`")))?;
        let token_index: usize = token
            .parse()
            .map_err(|_| Error::parse(path, line_no, format!("bad token ordinal `{token}`")))?;
        let values = values
            .split(',')
            .map(|v| v.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| Error::parse(path, line_no, "malformed feature value"))?;
        let vector = FeatureVector::new(layout, values).map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        out.push(Sample {
            vector,
            label,
            provenance: Provenance {
                article_id: article.to_string(),
                token_index,
                technique: None,
            },
        });
    }
    Ok(out)
}
