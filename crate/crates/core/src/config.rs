//! Run configuration: a TOML file with one section per stage, plus
//! `section.key=value` overrides that win over the file.
//!
//! ```toml
//! seed = 1
//!
//! [paths]
//! train_articles = ["toy/articles"]
//! train_labels = ["toy/labels.tsv"]
//! pretrained = "toy/pretrained_300.vec"
//! output_dir = "out"
//!
//! [features]
//! window_n = 7
//!
//! [sampling]
//! n_propaganda = 7000
//! n_none = 10000
//! ```
//!
//! Relative paths resolve against the directory of the config file.

use std::collections::BTreeMap;
use std::env;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::embeddings::SgnsParams;
use crate::error::{Error, Result};
use crate::model::TrainParams;
use crate::pipeline::{FeatureLayout, FeaturizerOptions, Normalization, OovPolicy, SamplingPlan};

pub const CACHE_ENV: &str = "SPANFORGE_CACHE";
const MAX_WINDOW: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    /// Article directories of the training split.
    pub train_articles: Vec<PathBuf>,
    /// Span label TSV files, or directories of `*.labels` files.
    pub train_labels: Vec<PathBuf>,
    pub eval_articles: Vec<PathBuf>,
    pub eval_labels: Vec<PathBuf>,
    /// Extra article directories used only for embedding training.
    pub extra_articles: Vec<PathBuf>,
    /// 200-dimensional table; defaults to `<output_dir>/w2v_200.vec`.
    pub w2v: Option<PathBuf>,
    /// 300-dimensional pretrained table.
    pub pretrained: Option<PathBuf>,
    pub lemma_exceptions: Option<PathBuf>,
    pub pronouns: Option<PathBuf>,
    pub valence: Option<PathBuf>,
    pub negators: Option<PathBuf>,
    pub intensifiers: Option<PathBuf>,
    pub thesaurus: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub cache_dir: Option<PathBuf>,
}

impl Default for PathsConfig {
    fn default() -> Self {
        PathsConfig {
            train_articles: Vec::new(),
            train_labels: Vec::new(),
            eval_articles: Vec::new(),
            eval_labels: Vec::new(),
            extra_articles: Vec::new(),
            w2v: None,
            pretrained: None,
            lemma_exceptions: None,
            pronouns: None,
            valence: None,
            negators: None,
            intensifiers: None,
            thesaurus: None,
            output_dir: PathBuf::from("out"),
            cache_dir: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeaturesConfig {
    pub window_n: usize,
    pub normalization: Normalization,
    pub oov_policy: OovPolicy,
    pub sentence_length: bool,
}

impl Default for FeaturesConfig {
    fn default() -> Self {
        FeaturesConfig {
            window_n: 7,
            normalization: Normalization::None,
            oov_policy: OovPolicy::Drop,
            sentence_length: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub n_propaganda: usize,
    pub n_none: usize,
    pub per_technique_quota: Option<BTreeMap<String, usize>>,
    pub none_article_spread: Option<usize>,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            n_propaganda: 7000,
            n_none: 10000,
            per_technique_quota: None,
            none_article_spread: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(rename = "C")]
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub threshold: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            c: 0.1,
            tol: 1e-6,
            max_iter: 1000,
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpansConfig {
    pub gap_tolerance: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingsConfig {
    pub window: usize,
    pub epochs: usize,
    pub negatives: usize,
    pub min_count: usize,
    pub learning_rate: f32,
}

impl Default for EmbeddingsConfig {
    fn default() -> Self {
        let p = SgnsParams::default();
        EmbeddingsConfig {
            window: p.window,
            epochs: p.epochs,
            negatives: p.negatives,
            min_count: p.min_count,
            learning_rate: p.learning_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub window_values: Vec<usize>,
    pub balance_pairs: Vec<(usize, usize)>,
    /// Multiplies every balance pair before sampling, for corpora too small
    /// for the full counts.
    pub balance_scale: f64,
    pub radii: Vec<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            window_values: (1..=10).collect(),
            balance_pairs: vec![(10000, 10000), (7000, 10000), (10000, 7000)],
            balance_scale: 1.0,
            radii: crate::eval::HEATMAP_RADII.to_vec(),
        }
    }
}

impl SweepConfig {
    pub fn scaled_pairs(&self) -> Vec<(usize, usize)> {
        let s = |v: usize| ((v as f64) * self.balance_scale).round() as usize;
        self.balance_pairs.iter().map(|&(p, n)| (s(p), s(n))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub paths: PathsConfig,
    pub features: FeaturesConfig,
    pub sampling: SamplingConfig,
    pub model: ModelConfig,
    pub spans: SpansConfig,
    pub embeddings: EmbeddingsConfig,
    pub sweep: SweepConfig,
    /// Directory relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            paths: PathsConfig::default(),
            features: FeaturesConfig::default(),
            sampling: SamplingConfig::default(),
            model: ModelConfig::default(),
            spans: SpansConfig::default(),
            embeddings: EmbeddingsConfig::default(),
            sweep: SweepConfig::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

/// What a subcommand needs from the configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Requirement {
    EmbeddingCorpus,
    TrainSplit,
    EvalSplit,
    Tables,
}

fn parse_override_value(raw: &str) -> toml::Value {
    // bare words such as `l2_full` or file paths are taken as strings
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn apply_override(root: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("bad override key `{key}`")));
    }
    let mut table = root;
    for part in &parts[..parts.len() - 1] {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override `{key}`: `{part}` is not a section")))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), parse_override_value(raw.trim()));
    Ok(())
}

impl RunConfig {
    /// Parses TOML source, applies overrides and resolves paths against
    /// `base_dir`.
    pub fn from_toml(source: &str, base_dir: &Path, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = source
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let mut cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.resolve_paths();
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        match path {
            Some(p) => {
                let src = fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("cannot read config {}: {e}", p.display())))?;
                let base = p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
                Self::from_toml(&src, base, overrides)
            }
            None => Self::from_toml("", Path::new("."), overrides),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    fn resolve_paths(&mut self) {
        let base = self.base_dir.clone();
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let p = &mut self.paths;
        for list in [
            &mut p.train_articles,
            &mut p.train_labels,
            &mut p.eval_articles,
            &mut p.eval_labels,
            &mut p.extra_articles,
        ] {
            list.iter_mut().for_each(fix);
        }
        for opt in [
            &mut p.w2v,
            &mut p.pretrained,
            &mut p.lemma_exceptions,
            &mut p.pronouns,
            &mut p.valence,
            &mut p.negators,
            &mut p.intensifiers,
            &mut p.thesaurus,
            &mut p.cache_dir,
        ] {
            if let Some(path) = opt {
                fix(path);
            }
        }
        fix(&mut p.output_dir);
    }

    pub fn w2v_path(&self) -> PathBuf {
        self.paths
            .w2v
            .clone()
            .unwrap_or_else(|| self.paths.output_dir.join("w2v_200.vec"))
    }

    /// `SPANFORGE_CACHE` wins over the configured directory.
    pub fn cache_dir(&self) -> PathBuf {
        if let Some(dir) = env::var_os(CACHE_ENV).filter(|v| !v.is_empty()) {
            return PathBuf::from(dir);
        }
        self.paths
            .cache_dir
            .clone()
            .unwrap_or_else(|| self.paths.output_dir.join("cache"))
    }

    pub fn featurizer_options(&self) -> FeaturizerOptions {
        FeaturizerOptions {
            window_n: self.features.window_n,
            oov_policy: self.features.oov_policy,
            normalization: self.features.normalization,
            layout: FeatureLayout {
                sentence_length: self.features.sentence_length,
            },
        }
    }

    pub fn sampling_plan(&self) -> SamplingPlan {
        SamplingPlan {
            n_propaganda: self.sampling.n_propaganda,
            n_none: self.sampling.n_none,
            per_technique_quota: self.sampling.per_technique_quota.clone(),
            none_article_spread: self.sampling.none_article_spread,
            seed: self.seed,
        }
    }

    pub fn train_params(&self) -> TrainParams {
        TrainParams {
            c: self.model.c,
            tol: self.model.tol,
            max_iter: self.model.max_iter,
            seed: self.seed,
        }
    }

    pub fn sgns_params(&self) -> SgnsParams {
        SgnsParams {
            dimension: crate::pipeline::W2V_DIM,
            window: self.embeddings.window,
            epochs: self.embeddings.epochs,
            negatives: self.embeddings.negatives,
            min_count: self.embeddings.min_count,
            learning_rate: self.embeddings.learning_rate,
            seed: self.seed,
        }
    }

    /// Checks numeric ranges and that every input a command needs exists.
    pub fn validate(&self, needs: &[Requirement]) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.features.window_n > MAX_WINDOW {
            return bad(format!("features.window_n must be at most {MAX_WINDOW}"));
        }
        if !(self.model.c.is_finite() && self.model.c > 0.0) {
            return bad(format!("model.C must be positive, got {}", self.model.c));
        }
        if !(self.model.tol.is_finite() && self.model.tol >= 0.0) {
            return bad("model.tol must be non-negative".into());
        }
        if !(self.model.threshold > 0.0 && self.model.threshold < 1.0) {
            return bad(format!("model.threshold must lie in (0,1), got {}", self.model.threshold));
        }
        if self.sampling.n_propaganda == 0 || self.sampling.n_none == 0 {
            return bad("sampling needs at least one sample of each class".into());
        }
        if let Some(q) = &self.sampling.per_technique_quota {
            let sum: usize = q.values().sum();
            if sum != self.sampling.n_propaganda {
                return bad(format!(
                    "sampling.per_technique_quota sums to {sum}, expected n_propaganda = {}",
                    self.sampling.n_propaganda
                ));
            }
            if let Some(t) = q.keys().find(|t| crate::corpus::technique_index(t).is_none()) {
                return bad(format!("unknown technique `{t}` in sampling.per_technique_quota"));
            }
        }
        if self.sampling.none_article_spread == Some(0) {
            return bad("sampling.none_article_spread must be positive".into());
        }
        let e = &self.embeddings;
        if e.window == 0 || e.epochs == 0 || e.min_count == 0 || !(e.learning_rate > 0.0) {
            return bad("embeddings.window, epochs, min_count and learning_rate must be positive".into());
        }
        if self.sweep.window_values.iter().any(|&n| n > MAX_WINDOW) {
            return bad(format!("sweep.window_values must be at most {MAX_WINDOW}"));
        }
        if !(self.sweep.balance_scale > 0.0 && self.sweep.balance_scale.is_finite()) {
            return bad("sweep.balance_scale must be positive".into());
        }
        if self.sweep.scaled_pairs().iter().any(|&(p, n)| p == 0 || n == 0) {
            return bad("every scaled balance pair needs both counts positive".into());
        }

        let p = &self.paths;
        let require_dirs = |name: &str, dirs: &[PathBuf]| -> Result<()> {
            if dirs.is_empty() {
                return bad(format!("paths.{name} is empty"));
            }
            match dirs.iter().find(|d| !d.is_dir()) {
                Some(d) => bad(format!("paths.{name}: {} is not a directory", d.display())),
                None => Ok(()),
            }
        };
        let require_paths = |name: &str, paths: &[PathBuf]| -> Result<()> {
            if paths.is_empty() {
                return bad(format!("paths.{name} is empty"));
            }
            match paths.iter().find(|d| !d.exists()) {
                Some(d) => bad(format!("paths.{name}: {} does not exist", d.display())),
                None => Ok(()),
            }
        };
        for opt in [
            ("lemma_exceptions", &p.lemma_exceptions),
            ("pronouns", &p.pronouns),
            ("valence", &p.valence),
            ("negators", &p.negators),
            ("intensifiers", &p.intensifiers),
            ("thesaurus", &p.thesaurus),
        ] {
            if let (name, Some(path)) = opt {
                if !path.is_file() {
                    return bad(format!("paths.{name}: {} does not exist", path.display()));
                }
            }
        }
        if p.lemma_exceptions.is_some() != p.pronouns.is_some() {
            return bad("paths.lemma_exceptions and paths.pronouns must be given together".into());
        }
        for need in needs {
            match need {
                Requirement::EmbeddingCorpus => {
                    if p.train_articles.is_empty() && p.eval_articles.is_empty() && p.extra_articles.is_empty() {
                        return bad("no article directories configured for embedding training".into());
                    }
                    for (name, dirs) in [
                        ("train_articles", &p.train_articles),
                        ("eval_articles", &p.eval_articles),
                        ("extra_articles", &p.extra_articles),
                    ] {
                        if let Some(d) = dirs.iter().find(|d| !d.is_dir()) {
                            return bad(format!("paths.{name}: {} is not a directory", d.display()));
                        }
                    }
                }
                Requirement::TrainSplit => {
                    require_dirs("train_articles", &p.train_articles)?;
                    require_paths("train_labels", &p.train_labels)?;
                }
                Requirement::EvalSplit => {
                    require_dirs("eval_articles", &p.eval_articles)?;
                    require_paths("eval_labels", &p.eval_labels)?;
                }
                Requirement::Tables => {
                    let w2v = self.w2v_path();
                    if !w2v.is_file() {
                        return bad(format!(
                            "token embedding table {} not found; run train-embeddings first",
                            w2v.display()
                        ));
                    }
                    match &p.pretrained {
                        None => return bad("paths.pretrained is not set".into()),
                        Some(path) if !path.is_file() => {
                            return bad(format!("paths.pretrained: {} does not exist", path.display()))
                        }
                        Some(_) => {}
                    }
                }
            }
        }
        Ok(())
    }
}
