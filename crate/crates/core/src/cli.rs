//! Subcommands of the `spanforge` binary, usable as library calls.
//!
//! Every `cmd_*` function validates the whole configuration before any
//! expensive work and tags failures with the stage that produced them.
//! Outputs are deterministic for a fixed configuration and seed.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::cache::{file_digest, CacheKey, FeatureCache};
use crate::config::{Requirement, RunConfig};
use crate::corpus::{
    self, format_span_labels, label_tokens, load_articles, parse_span_labels_str, Article, Label, SpanAnnotation,
};
use crate::embeddings::{load_embeddings, train_sgns, EmbeddingTable};
use crate::error::{Error, Result, StageExt};
use crate::eval::{
    cooccurrence_matrix, count_tokens, emit_matrix, emit_report, per_char_span_metrics, report_from_counts,
    MetricMode, MetricsReport, ReportFormat, TokenCounts,
};
use crate::lexfeatures::{SentimentLexicon, ThesaurusLexicon};
use crate::model::{train_dataset, Dataset, LogRegModel, TrainingMeta};
use crate::pipeline::{
    draw_samples, Block, FeatureVector, Featurized, Featurizer, FeaturizerOptions, LabeledCorpus, Normalization,
    Sample, SamplingPlan, PRETRAINED_DIM, W2V_DIM,
};
use crate::spans::{merge_tokens_to_spans, write_predictions, PredictionSpan};
use crate::textproc::Lemmatizer;

/// Lexical resources shared by every command.
#[derive(Debug, Clone)]
pub struct Resources {
    pub lemmatizer: Lemmatizer,
    pub sentiment: SentimentLexicon,
    pub thesaurus: ThesaurusLexicon,
}

impl Resources {
    pub fn load(cfg: &RunConfig) -> Result<Self> {
        let p = &cfg.paths;
        let lemmatizer = match (&p.lemma_exceptions, &p.pronouns) {
            (Some(e), Some(pr)) => Lemmatizer::from_files(e, pr)?,
            _ => Lemmatizer::builtin().clone(),
        };
        let sentiment = match &p.valence {
            Some(v) => SentimentLexicon::load(v, p.negators.as_deref(), p.intensifiers.as_deref())?,
            None => {
                if p.negators.is_some() || p.intensifiers.is_some() {
                    log::warn!("negator/intensifier files are ignored without a valence file");
                }
                SentimentLexicon::builtin().clone()
            }
        };
        let thesaurus = match &p.thesaurus {
            Some(t) => ThesaurusLexicon::load(t)?,
            None => ThesaurusLexicon::builtin().clone(),
        };
        Ok(Resources {
            lemmatizer,
            sentiment,
            thesaurus,
        })
    }
}

/// The two embedding tables a featurizer reads.
#[derive(Debug, Clone)]
pub struct Tables {
    pub w2v: EmbeddingTable,
    pub pretrained: EmbeddingTable,
}

impl Tables {
    pub fn load(cfg: &RunConfig) -> Result<Self> {
        let pretrained = cfg
            .paths
            .pretrained
            .as_ref()
            .ok_or_else(|| Error::Config("paths.pretrained is not set".into()))?;
        Ok(Tables {
            w2v: load_embeddings(&cfg.w2v_path(), W2V_DIM)?,
            pretrained: load_embeddings(pretrained, PRETRAINED_DIM)?,
        })
    }

    pub fn featurizer<'a>(&'a self, res: &'a Resources, options: FeaturizerOptions) -> Result<Featurizer<'a>> {
        Featurizer::new(&self.w2v, &self.pretrained, &res.sentiment, &res.thesaurus, options)
    }
}

/// Reads a label TSV, detecting the optional technique column from the
/// first line.
pub fn read_labels_file(path: &Path) -> Result<Vec<SpanAnnotation>> {
    let src = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let with_technique = src
        .lines()
        .find(|l| !l.trim().is_empty())
        .is_some_and(|l| l.split('\t').count() == 4);
    parse_span_labels_str(&src, with_technique, path)
}

/// Labels from files, or from every `*.labels` / `*.tsv` file of a
/// directory in name order.
pub fn read_labels(paths: &[PathBuf]) -> Result<Vec<SpanAnnotation>> {
    let mut out = Vec::new();
    for path in paths {
        if path.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(path)
                .map_err(|e| Error::io(path, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "labels" || x == "tsv"))
                .collect();
            files.sort();
            for f in files {
                out.extend(read_labels_file(&f)?);
            }
        } else {
            out.extend(read_labels_file(path)?);
        }
    }
    Ok(out)
}

pub fn read_article_dirs(dirs: &[PathBuf]) -> Result<Vec<Article>> {
    let mut out = Vec::new();
    for d in dirs {
        out.extend(load_articles(d)?);
    }
    Ok(out)
}

/// Articles and annotations of one split, with the annotations tied to
/// the token labels.
#[derive(Debug, Clone)]
pub struct Split {
    pub articles: Vec<Article>,
    pub annotations: Vec<SpanAnnotation>,
    pub corpus: LabeledCorpus,
}

impl Split {
    pub fn load(dirs: &[PathBuf], labels: &[PathBuf], lemmatizer: &Lemmatizer) -> Result<Self> {
        let articles = read_article_dirs(dirs)?;
        let annotations = read_labels(labels)?;
        let corpus = LabeledCorpus::build(&articles, &annotations, lemmatizer)?;
        Ok(Split {
            articles,
            annotations,
            corpus,
        })
    }

    fn digest(&self) -> String {
        let mut key = CacheKey::new();
        for a in &self.articles {
            key = key.part("id", &a.id).part("text", &a.text);
        }
        key.part("labels", format_span_labels(&self.annotations)).hex()
    }
}

fn eval_split(cfg: &RunConfig, res: &Resources, train: &Split) -> Result<Split> {
    if cfg.paths.eval_articles.is_empty() {
        log::warn!("no evaluation split configured; scoring on the training split");
        Ok(train.clone())
    } else {
        Split::load(&cfg.paths.eval_articles, &cfg.paths.eval_labels, &res.lemmatizer)
    }
}

fn optional_digest(path: Option<&Path>) -> Result<String> {
    path.map(file_digest).unwrap_or_else(|| Ok("builtin".into()))
}

/// Digest of every input that shapes feature vectors of `split`.
pub fn input_fingerprint(cfg: &RunConfig, split: &Split) -> Result<String> {
    let p = &cfg.paths;
    let pretrained = p
        .pretrained
        .as_deref()
        .ok_or_else(|| Error::Config("paths.pretrained is not set".into()))?;
    Ok(CacheKey::new()
        .part("version", env!("CARGO_PKG_VERSION"))
        .part("split", split.digest())
        .part("w2v", file_digest(&cfg.w2v_path())?)
        .part("pretrained", file_digest(pretrained)?)
        .part("lemma_exceptions", optional_digest(p.lemma_exceptions.as_deref())?)
        .part("pronouns", optional_digest(p.pronouns.as_deref())?)
        .part("valence", optional_digest(p.valence.as_deref())?)
        .part("negators", optional_digest(p.negators.as_deref())?)
        .part("intensifiers", optional_digest(p.intensifiers.as_deref())?)
        .part("thesaurus", optional_digest(p.thesaurus.as_deref())?)
        .hex())
}

/// Training samples for `plan`, served from the feature cache when the
/// same inputs, featurizer options and plan were seen before.
pub fn cached_samples(
    cfg: &RunConfig,
    fingerprint: &str,
    corpus: &LabeledCorpus,
    featurizer: &Featurizer<'_>,
    plan: &SamplingPlan,
) -> Result<Vec<Sample>> {
    let o = featurizer.options();
    let key = CacheKey::new()
        .part("inputs", fingerprint)
        .part("window_n", o.window_n.to_string())
        .part("normalization", format!("{:?}", o.normalization))
        .part("oov_policy", format!("{:?}", o.oov_policy))
        .part("layout", format!("{:?}", o.layout))
        .part("plan", serde_json::to_string(plan).expect("plan serializes"))
        .hex();
    let cache = FeatureCache::open(&cfg.cache_dir())?;
    cache.get_or_insert_with(&key, o.layout, || draw_samples(corpus, featurizer, plan))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Lemma sequences of every sentence of `articles`.
pub fn lemma_sentences(articles: &[Article], lemmatizer: &Lemmatizer) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for a in articles {
        let mut current: Option<usize> = None;
        for t in lemmatizer.tokenize(&a.text) {
            if current != Some(t.sentence_index) {
                out.push(Vec::new());
                current = Some(t.sentence_index);
            }
            out.last_mut().expect("pushed above").push(t.lemma);
        }
    }
    out
}

pub fn cmd_train_embeddings(cfg: &RunConfig) -> Result<PathBuf> {
    cfg.validate(&[Requirement::EmbeddingCorpus]).stage("validate")?;
    let res = Resources::load(cfg).stage("load")?;
    let p = &cfg.paths;
    let dirs: Vec<PathBuf> = p
        .train_articles
        .iter()
        .chain(&p.eval_articles)
        .chain(&p.extra_articles)
        .cloned()
        .collect();
    let articles = read_article_dirs(&dirs).stage("load")?;
    let sentences = lemma_sentences(&articles, &res.lemmatizer);
    let started = Instant::now();
    let table = train_sgns(&sentences, &cfg.sgns_params()).stage("embed")?;
    log::info!(
        "trained {} vectors on {} sentences in {:.1?}",
        table.len(),
        sentences.len(),
        started.elapsed()
    );
    let out = cfg.w2v_path();
    if let Some(parent) = out.parent() {
        ensure_dir(parent).stage("write")?;
    }
    table.save(&out).stage("write")?;
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainReport {
    pub n_propaganda: usize,
    pub n_none: usize,
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: f64,
    pub objective: f64,
    pub feature_dim: usize,
    pub window_n: usize,
    #[serde(rename = "C")]
    pub c: f64,
    pub normalization: Normalization,
    pub oov_policy: crate::pipeline::OovPolicy,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: LogRegModel,
    pub model_path: PathBuf,
    pub report_path: PathBuf,
}

pub fn cmd_train(cfg: &RunConfig) -> Result<TrainOutcome> {
    cfg.validate(&[Requirement::TrainSplit, Requirement::Tables]).stage("validate")?;
    let res = Resources::load(cfg).stage("load")?;
    let tables = Tables::load(cfg).stage("load")?;
    let train = Split::load(&cfg.paths.train_articles, &cfg.paths.train_labels, &res.lemmatizer).stage("label")?;
    let featurizer = tables.featurizer(&res, cfg.featurizer_options()).stage("featurize")?;
    let fingerprint = input_fingerprint(cfg, &train).stage("load")?;
    let started = Instant::now();
    let samples = cached_samples(cfg, &fingerprint, &train.corpus, &featurizer, &cfg.sampling_plan()).stage("sample")?;
    log::info!("{} samples ready in {:.1?}", samples.len(), started.elapsed());
    let model = train_dataset(&Dataset::from_samples(&samples)?, &cfg.train_params()).stage("train")?;
    log::info!("model trained in {:.1?} total", started.elapsed());

    let out = &cfg.paths.output_dir;
    ensure_dir(out).stage("write")?;
    let model_path = out.join("model.txt");
    model.save(&model_path).stage("write")?;
    let m: &TrainingMeta = &model.meta;
    let report = TrainReport {
        n_propaganda: m.n_propaganda,
        n_none: m.n_none,
        iterations: m.iterations,
        converged: m.converged,
        gradient_norm: m.gradient_norm,
        objective: m.objective,
        feature_dim: model.dim(),
        window_n: cfg.features.window_n,
        c: model.c,
        normalization: cfg.features.normalization,
        oov_policy: cfg.features.oov_policy,
        seed: cfg.seed,
    };
    let report_path = out.join("train_report.json");
    write_text(&report_path, &(serde_json::to_string_pretty(&report).expect("serializes") + "\n"))
        .stage("write")?;
    Ok(TrainOutcome {
        model,
        model_path,
        report_path,
    })
}

#[derive(Debug, Clone)]
pub struct PredictOutcome {
    pub predictions_path: PathBuf,
    pub spans: Vec<PredictionSpan>,
    pub dump_path: Option<PathBuf>,
}

pub fn cmd_predict(
    cfg: &RunConfig,
    model_path: &Path,
    article_dirs: &[PathBuf],
    out: Option<&Path>,
    dump: Option<&Path>,
) -> Result<PredictOutcome> {
    cfg.validate(&[Requirement::Tables]).stage("validate")?;
    let dirs = if article_dirs.is_empty() {
        &cfg.paths.eval_articles
    } else {
        article_dirs
    };
    if dirs.is_empty() {
        return Err(Error::Config("no article directories given to predict on".into())).stage("validate");
    }
    if let Some(d) = dirs.iter().find(|d| !d.is_dir()) {
        return Err(Error::Config(format!("{} is not a directory", d.display()))).stage("validate");
    }
    if !model_path.is_file() {
        return Err(Error::Config(format!("model {} not found", model_path.display()))).stage("validate");
    }
    let res = Resources::load(cfg).stage("load")?;
    let tables = Tables::load(cfg).stage("load")?;
    let model = LogRegModel::load(model_path).stage("load")?;
    let featurizer = tables.featurizer(&res, cfg.featurizer_options()).stage("featurize")?;
    if model.dim() != featurizer.dim() {
        return Err(Error::load(
            model_path,
            format!("model has {} weights, features have {} dimensions", model.dim(), featurizer.dim()),
        ))
        .stage("load");
    }
    let articles = read_article_dirs(dirs).stage("load")?;

    let mut spans = Vec::new();
    let mut dump_text = String::new();
    for article in &articles {
        let tokens = res.lemmatizer.tokenize(&article.text);
        let mut labels = vec![Label::None; tokens.len()];
        for (i, f) in featurizer.featurize_article(&tokens).stage("featurize")?.into_iter().enumerate() {
            if let Featurized::Vector(v) = f {
                let p = model.predict_proba(v.values()).stage("predict")?;
                if p >= cfg.model.threshold {
                    labels[i] = Label::Propaganda;
                }
                let t = &tokens[i];
                writeln!(dump_text, "{}\t{}\t{}\t{}\t{}\t{p:.6}", article.id, i, t.start, t.end, labels[i]).unwrap();
            }
        }
        spans.extend(merge_tokens_to_spans(&article.id, &tokens, &labels, cfg.spans.gap_tolerance)?);
    }
    let predictions_path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cfg.paths.output_dir.join("predictions.tsv"));
    if let Some(parent) = predictions_path.parent() {
        ensure_dir(parent).stage("write")?;
    }
    write_predictions(&spans, &predictions_path).stage("write")?;
    if let Some(d) = dump {
        write_text(d, &dump_text).stage("write")?;
    }
    Ok(PredictOutcome {
        predictions_path,
        spans,
        dump_path: dump.map(Path::to_path_buf),
    })
}

fn spans_of(annotations: &[SpanAnnotation]) -> Vec<PredictionSpan> {
    annotations.iter().map(PredictionSpan::from).collect()
}

/// Token labels induced by `spans` over the tokens of `articles`.
fn project_to_tokens(
    articles: &[Article],
    spans: &[SpanAnnotation],
    lemmatizer: &Lemmatizer,
) -> Result<Vec<Label>> {
    let grouped = corpus::group_by_article(spans);
    let mut out = Vec::new();
    for a in articles {
        let tokens = lemmatizer.tokenize(&a.text);
        let mine = grouped.get(a.id.as_str()).map(Vec::as_slice).unwrap_or(&[]);
        out.extend(label_tokens(a, &tokens, mine)?.into_iter().map(|t| t.label));
    }
    Ok(out)
}

pub fn evaluate_files(
    cfg: &RunConfig,
    pred: &Path,
    gold: &Path,
    mode: MetricMode,
    article_dirs: &[PathBuf],
) -> Result<MetricsReport> {
    let pred_spans = read_labels_file(pred)?;
    let gold_spans = read_labels_file(gold)?;
    match mode {
        MetricMode::PerCharSpan => per_char_span_metrics(&spans_of(&pred_spans), &spans_of(&gold_spans)),
        MetricMode::PerToken => {
            let dirs = if article_dirs.is_empty() {
                &cfg.paths.eval_articles
            } else {
                article_dirs
            };
            if dirs.is_empty() {
                return Err(Error::Config("per-token evaluation needs article directories".into()));
            }
            let res = Resources::load(cfg)?;
            let articles = read_article_dirs(dirs)?;
            let p = project_to_tokens(&articles, &pred_spans, &res.lemmatizer)?;
            let g = project_to_tokens(&articles, &gold_spans, &res.lemmatizer)?;
            Ok(report_from_counts(count_tokens(&p, &g)?))
        }
    }
}

pub fn cmd_evaluate(
    cfg: &RunConfig,
    pred: &Path,
    gold: &Path,
    modes: &[MetricMode],
    article_dirs: &[PathBuf],
    format: ReportFormat,
    out_dir: Option<&Path>,
) -> Result<Vec<(MetricsReport, PathBuf)>> {
    cfg.validate(&[]).stage("validate")?;
    for (what, p) in [("predictions", pred), ("gold labels", gold)] {
        if !p.is_file() {
            return Err(Error::Config(format!("{what} file {} not found", p.display()))).stage("validate");
        }
    }
    let dir = out_dir.map(Path::to_path_buf).unwrap_or_else(|| cfg.paths.output_dir.clone());
    ensure_dir(&dir).stage("write")?;
    let ext = match format {
        ReportFormat::Json => "json",
        ReportFormat::Tsv => "tsv",
    };
    let mut out = Vec::new();
    for &mode in modes {
        let report = evaluate_files(cfg, pred, gold, mode, article_dirs).stage("evaluate")?;
        let name = match mode {
            MetricMode::PerToken => "per_token",
            MetricMode::PerCharSpan => "per_char_span",
        };
        let path = dir.join(format!("report_{name}.{ext}"));
        emit_report(&report, format, &path).stage("write")?;
        out.push((report, path));
    }
    Ok(out)
}

/// Featurizes every token of `corpus` once and scores it with each of
/// `scorers`; dropped tokens count as None predictions.
pub fn stream_token_counts<F>(corpus: &LabeledCorpus, featurizer: &Featurizer<'_>, scorers: &[F]) -> Result<Vec<TokenCounts>>
where
    F: Fn(&FeatureVector) -> Result<Label>,
{
    let mut preds: Vec<Vec<Label>> = vec![Vec::with_capacity(corpus.token_count()); scorers.len()];
    for article in &corpus.articles {
        for i in 0..article.tokens.len() {
            match featurizer.featurize_token(&article.tokens, i)? {
                Featurized::Vector(v) => {
                    for (s, out) in scorers.iter().zip(preds.iter_mut()) {
                        out.push(s(&v)?);
                    }
                }
                Featurized::Dropped => preds.iter_mut().for_each(|p| p.push(Label::None)),
            }
        }
    }
    let gold = corpus.gold_labels();
    preds.iter().map(|p| count_tokens(p, &gold)).collect()
}

fn threshold_scorer(model: &LogRegModel, threshold: f64) -> impl Fn(&FeatureVector) -> Result<Label> + '_ {
    move |v| model.predict_one(v.values(), threshold)
}

const METRIC_COLUMNS: &str =
    "propaganda_correct_pct\tpropaganda_wrong_pct\tnone_correct_pct\tnone_wrong_pct\tprecision\trecall\tf1\ttp\tfp\tfn\ttn";

fn metric_cells(c: TokenCounts) -> String {
    let r = report_from_counts(c);
    let p = r.percentages.expect("per-token report");
    format!(
        "{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\t{}\t{}",
        p.propaganda_correct_pct,
        p.propaganda_wrong_pct,
        p.none_correct_pct,
        p.none_wrong_pct,
        r.precision,
        r.recall,
        r.f1,
        c.tp,
        c.fp,
        c.fn_,
        c.tn
    )
}

struct SweepContext {
    res: Resources,
    tables: Tables,
    train: Split,
    eval: Split,
    fingerprint: String,
}

fn sweep_context(cfg: &RunConfig) -> Result<SweepContext> {
    let mut needs = vec![Requirement::TrainSplit, Requirement::Tables];
    if !cfg.paths.eval_articles.is_empty() {
        needs.push(Requirement::EvalSplit);
    }
    cfg.validate(&needs).stage("validate")?;
    let res = Resources::load(cfg).stage("load")?;
    let tables = Tables::load(cfg).stage("load")?;
    let train = Split::load(&cfg.paths.train_articles, &cfg.paths.train_labels, &res.lemmatizer).stage("label")?;
    let eval = eval_split(cfg, &res, &train).stage("label")?;
    let fingerprint = input_fingerprint(cfg, &train).stage("load")?;
    Ok(SweepContext {
        res,
        tables,
        train,
        eval,
        fingerprint,
    })
}

fn sweep_output(cfg: &RunConfig, out: Option<&Path>, name: &str) -> PathBuf {
    out.map(Path::to_path_buf)
        .unwrap_or_else(|| cfg.paths.output_dir.join(name))
}

/// One row per window radius: the four class percentages plus P/R/F.
pub fn cmd_sweep_window(cfg: &RunConfig, values: Option<&[usize]>, out: Option<&Path>) -> Result<PathBuf> {
    let values = values.unwrap_or(&cfg.sweep.window_values).to_vec();
    if values.is_empty() {
        return Err(Error::Config("no window values to sweep".into())).stage("validate");
    }
    let ctx = sweep_context(cfg)?;
    let mut tsv = format!("n\t{METRIC_COLUMNS}\n");
    for n in values {
        let options = FeaturizerOptions {
            window_n: n,
            ..cfg.featurizer_options()
        };
        let featurizer = ctx.tables.featurizer(&ctx.res, options).stage("featurize")?;
        let samples =
            cached_samples(cfg, &ctx.fingerprint, &ctx.train.corpus, &featurizer, &cfg.sampling_plan()).stage("sample")?;
        let model = train_dataset(&Dataset::from_samples(&samples)?, &cfg.train_params()).stage("train")?;
        let counts = stream_token_counts(&ctx.eval.corpus, &featurizer, &[threshold_scorer(&model, cfg.model.threshold)])
            .stage("evaluate")?;
        log::info!("window {n}: {:?}", counts[0]);
        writeln!(tsv, "{n}\t{}", metric_cells(counts[0])).unwrap();
    }
    let path = sweep_output(cfg, out, "sweep_window.tsv");
    write_text(&path, &tsv).stage("write")?;
    Ok(path)
}

/// One row per (n_propaganda, n_none) training plan.
pub fn cmd_sweep_balance(cfg: &RunConfig, pairs: Option<&[(usize, usize)]>, out: Option<&Path>) -> Result<PathBuf> {
    let pairs = match pairs {
        Some(p) => p.to_vec(),
        None => cfg.sweep.scaled_pairs(),
    };
    if pairs.is_empty() || pairs.iter().any(|&(p, n)| p == 0 || n == 0) {
        return Err(Error::Config("balance pairs must be non-empty with positive counts".into())).stage("validate");
    }
    let ctx = sweep_context(cfg)?;
    let featurizer = ctx.tables.featurizer(&ctx.res, cfg.featurizer_options()).stage("featurize")?;
    let mut models = Vec::with_capacity(pairs.len());
    for &(np, nn) in &pairs {
        let plan = SamplingPlan {
            n_propaganda: np,
            n_none: nn,
            per_technique_quota: None,
            ..cfg.sampling_plan()
        };
        let samples = cached_samples(cfg, &ctx.fingerprint, &ctx.train.corpus, &featurizer, &plan).stage("sample")?;
        models.push(train_dataset(&Dataset::from_samples(&samples)?, &cfg.train_params()).stage("train")?);
    }
    let scorers: Vec<_> = models.iter().map(|m| threshold_scorer(m, cfg.model.threshold)).collect();
    let counts = stream_token_counts(&ctx.eval.corpus, &featurizer, &scorers).stage("evaluate")?;
    let mut tsv = format!("n_propaganda\tn_none\t{METRIC_COLUMNS}\n");
    for (&(np, nn), c) in pairs.iter().zip(counts) {
        writeln!(tsv, "{np}\t{nn}\t{}", metric_cells(c)).unwrap();
    }
    let path = sweep_output(cfg, out, "sweep_balance.tsv");
    write_text(&path, &tsv).stage("write")?;
    Ok(path)
}

/// Keeps `blocks` of `v` and applies `mode` to the result.
pub fn project(v: &FeatureVector, blocks: &[Block], mode: Normalization) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut sorted = blocks.to_vec();
    sorted.sort();
    sorted.dedup();
    for b in sorted {
        let slice = v
            .block(b)
            .ok_or_else(|| Error::Argument(format!("block `{}` missing from layout", b.name())))?;
        let start = out.len();
        out.extend_from_slice(slice);
        if mode == Normalization::L2PerBlock {
            unit(&mut out[start..]);
        }
    }
    if mode == Normalization::L2Full {
        unit(&mut out);
    }
    Ok(out)
}

fn unit(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

/// Cumulative block sets in canonical order, then the full set with
/// `l2_full` normalization.
pub fn ablation_rows(cfg: &RunConfig) -> Vec<(Vec<Block>, Normalization)> {
    let all = cfg.featurizer_options().layout.blocks();
    let mut rows: Vec<(Vec<Block>, Normalization)> =
        (1..=all.len()).map(|k| (all[..k].to_vec(), cfg.features.normalization)).collect();
    rows.push((all, Normalization::L2Full));
    rows
}

pub fn cmd_ablate(cfg: &RunConfig, out: Option<&Path>) -> Result<PathBuf> {
    let ctx = sweep_context(cfg)?;
    let raw = FeaturizerOptions {
        normalization: Normalization::None,
        ..cfg.featurizer_options()
    };
    let featurizer = ctx.tables.featurizer(&ctx.res, raw).stage("featurize")?;
    let samples =
        cached_samples(cfg, &ctx.fingerprint, &ctx.train.corpus, &featurizer, &cfg.sampling_plan()).stage("sample")?;
    let rows = ablation_rows(cfg);
    let mut models = Vec::with_capacity(rows.len());
    for (blocks, mode) in &rows {
        let projected = samples
            .iter()
            .map(|s| Ok((project(&s.vector, blocks, *mode)?, s.label)))
            .collect::<Result<Vec<_>>>()?;
        let dim = blocks.iter().map(|b| b.width()).sum();
        let data = Dataset::from_rows(projected.iter().map(|(v, l)| (v.as_slice(), *l)), dim)?;
        models.push(train_dataset(&data, &cfg.train_params()).stage("train")?);
    }
    let threshold = cfg.model.threshold;
    let scorers: Vec<_> = rows
        .iter()
        .zip(&models)
        .map(|((blocks, mode), m)| move |v: &FeatureVector| m.predict_one(&project(v, blocks, *mode)?, threshold))
        .collect();
    let counts = stream_token_counts(&ctx.eval.corpus, &featurizer, &scorers).stage("evaluate")?;
    let mut tsv = format!("blocks\tnames\tdim\tnormalization\t{METRIC_COLUMNS}\n");
    for ((blocks, mode), c) in rows.iter().zip(counts) {
        let numbers: Vec<String> = blocks.iter().map(|b| (*b as usize + 1).to_string()).collect();
        let names: Vec<&str> = blocks.iter().map(|b| b.name()).collect();
        let dim: usize = blocks.iter().map(|b| b.width()).sum();
        let mode = serde_json::to_value(mode).expect("serializes");
        writeln!(
            tsv,
            "{}\t{}\t{dim}\t{}\t{}",
            numbers.join(","),
            names.join(","),
            mode.as_str().unwrap_or_default(),
            metric_cells(c)
        )
        .unwrap();
    }
    let path = sweep_output(cfg, out, "ablation.tsv");
    write_text(&path, &tsv).stage("write")?;
    Ok(path)
}

/// One co-occurrence matrix TSV per radius.
pub fn cmd_heatmap(
    cfg: &RunConfig,
    labels: Option<&Path>,
    radii: Option<&[usize]>,
    out_dir: Option<&Path>,
) -> Result<Vec<PathBuf>> {
    cfg.validate(&[]).stage("validate")?;
    let radii = radii.unwrap_or(&cfg.sweep.radii).to_vec();
    if radii.is_empty() {
        return Err(Error::Config("no radii given".into())).stage("validate");
    }
    let label_paths = match labels {
        Some(p) => vec![p.to_path_buf()],
        None => cfg.paths.train_labels.clone(),
    };
    if label_paths.is_empty() {
        return Err(Error::Config("no technique label file given".into())).stage("validate");
    }
    if let Some(p) = label_paths.iter().find(|p| !p.exists()) {
        return Err(Error::Config(format!("{} does not exist", p.display()))).stage("validate");
    }
    let annotations = read_labels(&label_paths).stage("load")?;
    let dir = out_dir.map(Path::to_path_buf).unwrap_or_else(|| cfg.paths.output_dir.clone());
    ensure_dir(&dir).stage("write")?;
    let mut paths = Vec::new();
    for r in radii {
        let m = cooccurrence_matrix(&annotations, r);
        let path = dir.join(format!("heatmap_r{r}.tsv"));
        emit_matrix(&m, ReportFormat::Tsv, &path).stage("write")?;
        paths.push(path);
    }
    Ok(paths)
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("`{s}` is not N_PROPAGANDA:N_NONE"))?;
    Ok((
        a.trim().parse().map_err(|_| format!("bad count `{a}`"))?,
        b.trim().parse().map_err(|_| format!("bad count `{b}`"))?,
    ))
}

#[derive(Debug, Parser)]
#[command(name = "spanforge", version, about = "Propaganda span identification toolkit")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(short, long, global = true)]
    pub config: Option<PathBuf>,
    /// Override a config key, e.g. `--set features.window_n=5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub window_n: Option<usize>,
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// Raise log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train the 200-dimensional skip-gram table on every configured split.
    TrainEmbeddings,
    /// Featurize, sample and fit the classifier.
    Train,
    /// Predict spans for a directory of articles.
    Predict {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long = "articles")]
        articles: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write per-token labels and probabilities.
        #[arg(long)]
        dump_tokens: Option<PathBuf>,
    },
    /// Score predicted spans against gold spans.
    Evaluate {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        /// per_token, per_char_span or both.
        #[arg(long, default_value = "both")]
        mode: String,
        #[arg(long = "articles")]
        articles: Vec<PathBuf>,
        #[arg(long, default_value = "json")]
        format: String,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Per-class accuracy across context window radii.
    SweepWindow {
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<usize>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-class accuracy across training class balances.
    SweepBalance {
        /// Comma-separated `N_PROPAGANDA:N_NONE` pairs.
        #[arg(long, value_delimiter = ',', value_parser = parse_pair)]
        pairs: Option<Vec<(usize, usize)>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Metrics for cumulative feature block sets.
    Ablate {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Technique co-occurrence matrices.
    Heatmap {
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<usize>>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

impl Cli {
    pub fn load_config(&self) -> Result<RunConfig> {
        let mut overrides = self.overrides.clone();
        if let Some(s) = self.seed {
            overrides.push(format!("seed={s}"));
        }
        if let Some(n) = self.window_n {
            overrides.push(format!("features.window_n={n}"));
        }
        let mut cfg = RunConfig::load(self.config.as_deref(), &overrides)?;
        if let Some(dir) = &self.output_dir {
            cfg.paths.output_dir = dir.clone();
        }
        Ok(cfg)
    }
}

fn parse_modes(mode: &str) -> Result<Vec<MetricMode>> {
    match mode {
        "both" => Ok(vec![MetricMode::PerToken, MetricMode::PerCharSpan]),
        other => Ok(vec![other.parse().map_err(|e: Error| Error::Config(e.to_string()))?]),
    }
}

/// Runs the parsed command, printing produced paths and headline numbers.
pub fn run(cli: &Cli) -> Result<()> {
    let cfg = cli.load_config().stage("config")?;
    match &cli.command {
        Command::TrainEmbeddings => {
            println!("{}", cmd_train_embeddings(&cfg)?.display());
        }
        Command::Train => {
            let o = cmd_train(&cfg)?;
            println!("{}", o.model_path.display());
            println!("{}", o.report_path.display());
        }
        Command::Predict {
            model,
            articles,
            out,
            dump_tokens,
        } => {
            let model = model.clone().unwrap_or_else(|| cfg.paths.output_dir.join("model.txt"));
            let o = cmd_predict(&cfg, &model, articles, out.as_deref(), dump_tokens.as_deref())?;
            println!("{}", o.predictions_path.display());
        }
        Command::Evaluate {
            pred,
            gold,
            mode,
            articles,
            format,
            out_dir,
        } => {
            let modes = parse_modes(mode).stage("validate")?;
            let format: ReportFormat = format.parse().map_err(|e: Error| Error::Config(e.to_string())).stage("validate")?;
            for (report, path) in cmd_evaluate(&cfg, pred, gold, &modes, articles, format, out_dir.as_deref())? {
                println!(
                    "{:?}\tP={:.5}\tR={:.5}\tF={:.5}\t{}",
                    report.mode,
                    report.precision,
                    report.recall,
                    report.f1,
                    path.display()
                );
            }
        }
        Command::SweepWindow { values, out } => {
            println!("{}", cmd_sweep_window(&cfg, values.as_deref(), out.as_deref())?.display());
        }
        Command::SweepBalance { pairs, out } => {
            println!("{}", cmd_sweep_balance(&cfg, pairs.as_deref(), out.as_deref())?.display());
        }
        Command::Ablate { out } => {
            println!("{}", cmd_ablate(&cfg, out.as_deref())?.display());
        }
        Command::Heatmap { labels, radii, out_dir } => {
            for p in cmd_heatmap(&cfg, labels.as_deref(), radii.as_deref(), out_dir.as_deref())? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}
