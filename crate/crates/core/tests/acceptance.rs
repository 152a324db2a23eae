//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero when any fails.
//!
//! The replication criterion uses the official task corpus when
//! `SPANFORGE_OFFICIAL_CORPUS` (a directory holding `train-articles/`,
//! `train-labels-task1-span-identification/`, `dev-articles/` and optionally
//! `dev-labels-task1-span-identification/`) and `SPANFORGE_PRETRAINED` (a
//! 300-dimensional vector file) are set. Otherwise it runs on a synthetic
//! stand-in at the same settings.

use std::collections::BTreeSet;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spanforge::cli::*;
use spanforge::config::RunConfig;
use spanforge::corpus::{load_articles, Label, SpanAnnotation};
use spanforge::embeddings::EmbeddingTable;
use spanforge::eval::{
    cooccurrence_matrix, per_char_span_metrics, per_token_metrics, MetricMode, HEATMAP_RADII,
};
use spanforge::lexfeatures::{sentiment_vector, thesaurus_vector, SentimentLexicon, ThesaurusLexicon};
use spanforge::model::{objective, objective_and_gradient, train, train_dataset, Dataset, TrainParams};
use spanforge::pipeline::{
    draw_samples, Featurized, Featurizer, FeaturizerOptions, LabeledCorpus, SamplingPlan,
};
use spanforge::spans::PredictionSpan;
use spanforge::synth::{self, SynthConfig};
use spanforge::textproc::Lemmatizer;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn toy_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/toy")
}

fn toy_config(out: &Path) -> RunConfig {
    let mut cfg = RunConfig::load(Some(&toy_dir().join("spanforge.toml")), &[]).unwrap();
    cfg.paths.output_dir = out.to_path_buf();
    cfg.paths.cache_dir = Some(out.join("cache"));
    cfg
}

fn within(limit: Duration, started: Instant) -> Result<Duration, String> {
    let t = started.elapsed();
    ensure!(t <= limit, "took {:.1}s, limit {:.0}s", t.as_secs_f64(), limit.as_secs_f64());
    Ok(t)
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

// 1 ------------------------------------------------------------------------

fn feature_layout() -> Outcome {
    let started = Instant::now();
    let out = tempfile::tempdir().map_err(err)?;
    let cfg = toy_config(out.path());
    let w2v_path = cmd_train_embeddings(&cfg).map_err(err)?;
    let w2v = EmbeddingTable::load(&w2v_path, 200).map_err(err)?;
    let pre = EmbeddingTable::load(cfg.paths.pretrained.as_ref().unwrap(), 300).map_err(err)?;
    let sentiment = SentimentLexicon::builtin();
    let thesaurus = ThesaurusLexicon::builtin();
    let featurizer = Featurizer::new(&w2v, &pre, sentiment, thesaurus, FeaturizerOptions::default()).map_err(err)?;
    let n = 7usize;

    let articles = load_articles(&toy_dir().join("train/articles")).map_err(err)?;
    ensure!(articles.len() == 10, "toy corpus has {} articles", articles.len());
    let mut checked = 0;
    for article in &articles {
        let tokens = Lemmatizer::builtin().tokenize(&article.text);
        for (i, f) in featurizer.featurize_article(&tokens).map_err(err)?.iter().enumerate() {
            let Featurized::Vector(v) = f else { continue };
            let x = v.values();
            ensure!(x.len() == 843, "token {i} of {} has length {}", article.id, x.len());

            let lemma = &tokens[i].lemma;
            let lo = i.saturating_sub(n);
            let hi = (i + n + 1).min(tokens.len());
            let window: Vec<&str> = tokens[lo..hi].iter().map(|t| t.lemma.as_str()).collect();
            let mut mean = vec![0.0f64; 300];
            let known: Vec<&[f32]> = window.iter().filter_map(|l| pre.lookup(l)).collect();
            for v in &known {
                for (m, x) in mean.iter_mut().zip(v.iter()) {
                    *m += *x as f64 / known.len() as f64;
                }
            }
            let s = sentiment_vector(sentiment, &window);
            let expected: Vec<f64> = w2v.lookup(lemma).unwrap().iter().map(|&x| x as f64)
                .chain(pre.lookup(lemma).unwrap().iter().map(|&x| x as f64))
                .chain(mean)
                .chain([s.neg, s.neu, s.pos, s.compound])
                .chain(thesaurus_vector(thesaurus, &window))
                .collect();
            for (b, (lo, hi)) in [(0, 200), (200, 500), (500, 800), (800, 804), (804, 843)].iter().enumerate() {
                let close = x[*lo..*hi].iter().zip(&expected[*lo..*hi]).all(|(a, b)| (a - b).abs() <= 1e-9 * b.abs().max(1.0));
                ensure!(close, "block {} of token {i} in {} differs from its oracle", b + 1, article.id);
            }
            checked += 1;
        }
    }
    ensure!(checked > 0, "no token was featurized");
    let t = within(Duration::from_secs(5), started)?;
    Ok(format!("{checked} vectors of length 843, blocks 0/200/500/800/804 exact, {:.2}s", t.as_secs_f64()))
}

// 2 ------------------------------------------------------------------------

fn optimizer() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut traces = 0;
    for k in 0..100 {
        let dim = rng.gen_range(1..=50);
        let rows = rng.gen_range(2..=40);
        let mut data = Dataset::new(dim);
        for r in 0..rows {
            let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let label = if r == 0 { Label::Propaganda } else if r == 1 { Label::None } else if rng.gen_bool(0.5) { Label::Propaganda } else { Label::None };
            data.push(&x, label).map_err(err)?;
        }
        let c = 10f64.powf(rng.gen_range(-2.0..1.0));
        let params: Vec<f64> = (0..=dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut grad = vec![0.0; dim + 1];
        objective_and_gradient(&data, &params, c, &mut grad);

        let h = 1e-6;
        let mut fd = vec![0.0; dim + 1];
        for j in 0..=dim {
            let mut p = params.clone();
            p[j] += h;
            let up = objective(&data, &p, c);
            p[j] -= 2.0 * h;
            let down = objective(&data, &p, c);
            fd[j] = (up - down) / (2.0 * h);
        }
        let diff: f64 = grad.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = grad.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-8);
        let rel = diff / norm;
        worst = worst.max(rel);
        ensure!(rel < 1e-4, "instance {k}: relative gradient error {rel:.2e}");

        let params = TrainParams { c, tol: 1e-8, max_iter: 200, seed: 1 };
        let model = train_dataset(&data, &params).map_err(err)?;
        let trace = &model.meta.objective_trace;
        ensure!(trace.windows(2).all(|w| w[1] <= w[0]), "instance {k}: objective increased");
        traces += trace.len();
    }
    let t = within(Duration::from_secs(10), started)?;
    Ok(format!("worst relative error {worst:.1e}, {traces} monotone steps, {:.2}s", t.as_secs_f64()))
}

// 3 ------------------------------------------------------------------------

fn random_disjoint(rng: &mut ChaCha8Rng, len: usize, max: usize) -> Vec<(usize, usize)> {
    let k = rng.gen_range(0..=max.min((len + 1) / 2));
    let mut cuts: BTreeSet<usize> = BTreeSet::new();
    while cuts.len() < 2 * k {
        cuts.insert(rng.gen_range(0..=len));
    }
    let cuts: Vec<usize> = cuts.into_iter().collect();
    cuts.chunks(2).map(|c| (c[0], c[1])).collect()
}

fn char_oracle(pred: &[(usize, usize)], gold: &[(usize, usize)]) -> f64 {
    if pred.is_empty() {
        return if gold.is_empty() { 1.0 } else { 0.0 };
    }
    let gold_chars: BTreeSet<usize> = gold.iter().flat_map(|&(s, e)| s..e).collect();
    pred.iter()
        .map(|&(s, e)| (s..e).filter(|c| gold_chars.contains(c)).count() as f64 / (e - s) as f64)
        .sum::<f64>()
        / pred.len() as f64
}

fn metric_oracles() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in 0..50 {
        let len = rng.gen_range(1..300);
        let lab = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.35) { Label::Propaganda } else { Label::None };
        let pred: Vec<Label> = (0..len).map(|_| lab(&mut rng)).collect();
        let gold: Vec<Label> = (0..len).map(|_| lab(&mut rng)).collect();
        let (mut tp, mut fp, mut fn_, mut tn) = (0usize, 0usize, 0usize, 0usize);
        for (p, g) in pred.iter().zip(&gold) {
            match (p, g) {
                (Label::Propaganda, Label::Propaganda) => tp += 1,
                (Label::Propaganda, Label::None) => fp += 1,
                (Label::None, Label::Propaganda) => fn_ += 1,
                (Label::None, Label::None) => tn += 1,
            }
        }
        let p = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
        let r = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
        let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        let rep = per_token_metrics(&pred, &gold).map_err(err)?;
        let c = rep.counts.ok_or("per-token report without counts")?;
        ensure!((c.tp, c.fp, c.fn_, c.tn) == (tp, fp, fn_, tn), "sequence {k}: counts differ");
        ensure!(rep.precision == p && rep.recall == r && rep.f1 == f, "sequence {k}: P/R/F differ");
    }

    for k in 0..200 {
        let len = rng.gen_range(1..=60);
        let ids = ["a", "b"];
        let mut pred = Vec::new();
        let mut gold = Vec::new();
        let mut oracle_num = 0.0;
        let mut per_article = Vec::new();
        for id in ids {
            let p = random_disjoint(&mut rng, len, 3);
            let g = random_disjoint(&mut rng, len, 3);
            oracle_num += char_oracle(&p, &g) * p.len() as f64;
            per_article.push((p.clone(), g.clone()));
            pred.extend(p.iter().map(|&(s, e)| PredictionSpan::new(id, s, e)));
            gold.extend(g.iter().map(|&(s, e)| PredictionSpan::new(id, s, e)));
        }
        let expected = if pred.is_empty() {
            if gold.is_empty() { 1.0 } else { 0.0 }
        } else {
            oracle_num / pred.len() as f64
        };
        let rep = per_char_span_metrics(&pred, &gold).map_err(err)?;
        ensure!((rep.precision - expected).abs() < 1e-9, "instance {k}: P {} vs oracle {expected}", rep.precision);
        let recall_num: f64 = per_article.iter().map(|(p, g)| char_oracle(g, p) * g.len() as f64).sum();
        let expected_r = if gold.is_empty() {
            if pred.is_empty() { 1.0 } else { 0.0 }
        } else {
            recall_num / gold.len() as f64
        };
        ensure!((rep.recall - expected_r).abs() < 1e-9, "instance {k}: R {} vs oracle {expected_r}", rep.recall);
    }

    // one prediction overlapping two gold fragments: the formula credits
    // both overlaps, a one-to-one matching would credit only the larger
    let pred = [PredictionSpan::new("1", 0, 10)];
    let gold = [PredictionSpan::new("1", 0, 4), PredictionSpan::new("1", 6, 10)];
    let rep = per_char_span_metrics(&pred, &gold).map_err(err)?;
    let best_match = 4.0 / 10.0;
    ensure!((rep.precision - 0.8).abs() < 1e-12, "divergence case P = {}", rep.precision);
    ensure!((rep.precision - best_match).abs() > 0.1, "divergence case did not diverge");
    ensure!((rep.recall - 1.0).abs() < 1e-12, "divergence case R = {}", rep.recall);

    let t = within(Duration::from_secs(5), started)?;
    Ok(format!("50 sequences exact, 200 span instances within 1e-9, divergence P=0.8 vs 0.4, {:.2}s", t.as_secs_f64()))
}

// 4 ------------------------------------------------------------------------

fn workspace_config(dir: &Path, train: &SynthConfig, dev: &SynthConfig, extra: &str) -> Result<RunConfig, String> {
    let ws = synth::write_workspace(dir, train, dev).map_err(err)?;
    let toml = format!(
        "seed = 1\n[paths]\ntrain_articles = [{:?}]\ntrain_labels = [{:?}]\neval_articles = [{:?}]\neval_labels = [{:?}]\n\
         pretrained = {:?}\noutput_dir = {:?}\ncache_dir = {:?}\n{extra}",
        ws.train_articles,
        ws.train_labels,
        ws.dev_articles,
        ws.dev_labels,
        ws.pretrained,
        dir.join("out"),
        dir.join("cache"),
    );
    RunConfig::from_toml(&toml, dir, &[]).map_err(err)
}

fn per_token_f(cfg: &RunConfig, pred: &Path) -> Result<f64, String> {
    let gold = &cfg.paths.eval_labels[0];
    let rep = evaluate_files(cfg, pred, gold, MetricMode::PerToken, &[]).map_err(err)?;
    Ok(rep.f1)
}

fn learnability() -> Outcome {
    let started = Instant::now();
    let dir = tempfile::tempdir().map_err(err)?;
    let train = SynthConfig { articles: 50, ..SynthConfig::default() };
    let dev = SynthConfig { articles: 10, first_id: 800_000_000, seed: 8, ..SynthConfig::default() };
    let cfg = workspace_config(
        dir.path(),
        &train,
        &dev,
        "[features]\nwindow_n = 7\n[sampling]\nn_propaganda = 1000\nn_none = 1000\n[model]\nC = 0.1\n",
    )?;
    cmd_train_embeddings(&cfg).map_err(err)?;
    let model = cmd_train(&cfg).map_err(err)?.model_path;
    let pred = cmd_predict(&cfg, &model, &[], None, None).map_err(err)?;
    let f = per_token_f(&cfg, &pred.predictions_path)?;
    ensure!(f >= 0.80, "held-out per-token F = {f:.4} < 0.80");
    let t = within(Duration::from_secs(60), started)?;
    Ok(format!("held-out per-token F = {f:.4}, {:.1}s", t.as_secs_f64()))
}

// 5 ------------------------------------------------------------------------

fn run_everything(out: &Path) -> Result<Vec<PathBuf>, String> {
    let cfg = toy_config(out);
    let mut files = vec![cmd_train_embeddings(&cfg).map_err(err)?];
    let trained = cmd_train(&cfg).map_err(err)?;
    files.push(trained.model_path.clone());
    let dump = out.join("tokens.tsv");
    files.push(cmd_predict(&cfg, &trained.model_path, &[], None, Some(&dump)).map_err(err)?.predictions_path);
    files.push(dump);
    files.push(cmd_sweep_window(&cfg, None, None).map_err(err)?);
    files.push(cmd_sweep_balance(&cfg, None, None).map_err(err)?);
    files.push(cmd_ablate(&cfg, None).map_err(err)?);
    files.extend(cmd_heatmap(&cfg, None, None, None).map_err(err)?);
    Ok(files)
}

fn determinism() -> Outcome {
    let started = Instant::now();
    let a = tempfile::tempdir().map_err(err)?;
    let b = tempfile::tempdir().map_err(err)?;
    let fa = run_everything(a.path())?;
    let fb = run_everything(b.path())?;
    for (x, y) in fa.iter().zip(&fb) {
        let same = fs::read(x).map_err(err)? == fs::read(y).map_err(err)?;
        ensure!(same, "{} differs between runs", x.file_name().unwrap().to_string_lossy());
    }
    Ok(format!("{} artifacts byte-identical across two runs, {:.1}s", fa.len(), started.elapsed().as_secs_f64()))
}

// 6 ------------------------------------------------------------------------

fn throughput() -> Outcome {
    let lemmatizer = Lemmatizer::builtin();
    let train_set = synth::generate(&SynthConfig { articles: 420, ..SynthConfig::default() });
    let held_out = synth::generate(&SynthConfig { articles: 40, first_id: 800_000_000, seed: 8, ..SynthConfig::default() });
    let mut vocab = train_set.vocabulary(lemmatizer);
    vocab.extend(held_out.vocabulary(lemmatizer));
    let w2v = synth::pseudo_pretrained(vocab.iter().map(String::as_str), 200, 11).map_err(err)?;
    let pre = synth::pseudo_pretrained(vocab.iter().map(String::as_str), 300, 12).map_err(err)?;
    let featurizer = Featurizer::new(
        &w2v,
        &pre,
        SentimentLexicon::builtin(),
        ThesaurusLexicon::builtin(),
        FeaturizerOptions::default(),
    )
    .map_err(err)?;
    let corpus = LabeledCorpus::build(&train_set.articles, &train_set.annotations, lemmatizer).map_err(err)?;

    let started = Instant::now();
    let samples = draw_samples(&corpus, &featurizer, &SamplingPlan::new(7000, 10000)).map_err(err)?;
    let featurized = started.elapsed();
    let model = train(&samples, &TrainParams::default()).map_err(err)?;
    let trained = started.elapsed();
    let mut predicted = 0usize;
    for article in &held_out.articles {
        let tokens = lemmatizer.tokenize(&article.text);
        for f in featurizer.featurize_article(&tokens).map_err(err)? {
            if let Featurized::Vector(v) = f {
                model.predict_one(v.values(), 0.5).map_err(err)?;
                predicted += 1;
            }
        }
    }
    let t = within(Duration::from_secs(180), started)?;
    Ok(format!(
        "{} x 843 samples: featurize {:.1}s, train {:.1}s ({} iterations), predict {predicted} tokens, total {:.1}s on {} core(s)",
        samples.len(),
        featurized.as_secs_f64(),
        (trained - featurized).as_secs_f64(),
        model.meta.iterations,
        t.as_secs_f64(),
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    ))
}

// 7 ------------------------------------------------------------------------

const PCT: [&str; 4] = ["propaganda_correct_pct", "propaganda_wrong_pct", "none_correct_pct", "none_wrong_pct"];
const METRICS: [&str; 7] = ["precision", "recall", "f1", "tp", "fp", "fn", "tn"];

fn check_table(path: &Path, keys: &[&str], rows: usize) -> Result<Vec<Vec<f64>>, String> {
    let text = fs::read_to_string(path).map_err(err)?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split('\t').collect();
    let expected: Vec<&str> = keys.iter().chain(&PCT).chain(&METRICS).copied().collect();
    ensure!(header == expected, "{} header {:?}", path.display(), header);
    let body: Vec<Vec<f64>> = lines
        .map(|l| l.split('\t').map(|v| v.parse::<f64>().unwrap_or(f64::NAN)).collect())
        .collect();
    ensure!(body.len() == rows, "{} has {} rows, expected {rows}", path.display(), body.len());
    for row in &body {
        ensure!(row.len() == expected.len() && row.iter().all(|v| v.is_finite()), "incomplete row in {}", path.display());
        let k = keys.len();
        ensure!((row[k] + row[k + 1] - 100.0).abs() < 1e-6, "propaganda percentages do not sum to 100");
        ensure!((row[k + 2] + row[k + 3] - 100.0).abs() < 1e-6, "none percentages do not sum to 100");
    }
    Ok(body)
}

fn sweep_harness() -> Outcome {
    let started = Instant::now();
    let out = tempfile::tempdir().map_err(err)?;
    let cfg = toy_config(out.path());
    cmd_train_embeddings(&cfg).map_err(err)?;

    let windows: Vec<usize> = (1..=10).collect();
    let body = check_table(&cmd_sweep_window(&cfg, Some(&windows), None).map_err(err)?, &["n"], 10)?;
    let ns: Vec<usize> = body.iter().map(|r| r[0] as usize).collect();
    ensure!(ns == windows, "window rows {ns:?}");

    let published_pairs = [(10000, 10000), (7000, 10000), (10000, 7000)];
    ensure!(cfg.sweep.balance_pairs == published_pairs, "configured pairs {:?}", cfg.sweep.balance_pairs);
    let scaled = cfg.sweep.scaled_pairs();
    let body = check_table(&cmd_sweep_balance(&cfg, None, None).map_err(err)?, &["n_propaganda", "n_none"], 3)?;
    for (row, (p, n)) in body.iter().zip(&scaled) {
        ensure!(row[0] as usize == *p && row[1] as usize == *n, "balance row {:?} vs pair ({p},{n})", &row[..2]);
    }

    let labels = spanforge::cli::read_labels(&cfg.paths.train_labels).map_err(err)?;
    let mut labels: Vec<SpanAnnotation> = labels;
    labels.extend(spanforge::cli::read_labels(&cfg.paths.eval_labels).map_err(err)?);
    let matrices: Vec<_> = HEATMAP_RADII.iter().map(|&r| cooccurrence_matrix(&labels, r)).collect();
    ensure!(matrices.iter().all(|m| m.is_symmetric()), "asymmetric co-occurrence matrix");
    ensure!(matrices.windows(2).all(|w| w[0].dominated_by(&w[1])), "matrix not monotone in radius");
    let files = cmd_heatmap(&cfg, None, None, None).map_err(err)?;
    ensure!(files.len() == 4, "{} heatmap files", files.len());

    let t = within(Duration::from_secs(120), started)?;
    Ok(format!(
        "window rows 1..10, balance pairs {scaled:?} (default pairs x{}), matrices symmetric and monotone (totals {:?}), {:.1}s",
        cfg.sweep.balance_scale,
        matrices.iter().map(|m| m.total()).collect::<Vec<_>>(),
        t.as_secs_f64()
    ))
}

// 8 ------------------------------------------------------------------------

const REFERENCE_SETTINGS: &str = "[features]\nwindow_n = 7\nnormalization = \"l2_full\"\noov_policy = \"drop\"\n\
                              [sampling]\nn_propaganda = 7000\nn_none = 10000\n[model]\nC = 0.1\n";

fn official_config(corpus: &Path, pretrained: &Path, out: &Path) -> Result<RunConfig, String> {
    let dev_labels = corpus.join("dev-labels-task1-span-identification");
    let eval_labels = if dev_labels.is_dir() { format!("[{dev_labels:?}]") } else { "[]".into() };
    let toml = format!(
        "seed = 1\n[paths]\ntrain_articles = [{:?}]\ntrain_labels = [{:?}]\neval_articles = [{:?}]\neval_labels = {eval_labels}\n\
         pretrained = {pretrained:?}\noutput_dir = {out:?}\n{REFERENCE_SETTINGS}",
        corpus.join("train-articles"),
        corpus.join("train-labels-task1-span-identification"),
        corpus.join("dev-articles"),
    );
    RunConfig::from_toml(&toml, out, &[]).map_err(err)
}

fn check_submission(path: &Path) -> Result<usize, String> {
    let text = fs::read_to_string(path).map_err(err)?;
    let mut prev: Option<(String, usize, usize)> = None;
    let mut n = 0;
    for (i, line) in text.lines().enumerate() {
        let f: Vec<&str> = line.split('\t').collect();
        ensure!(f.len() == 3, "line {} has {} fields", i + 1, f.len());
        let start: usize = f[1].parse().map_err(err)?;
        let end: usize = f[2].parse().map_err(err)?;
        ensure!(start < end, "line {}: empty span", i + 1);
        if let Some((id, _, e)) = &prev {
            ensure!(id.as_str() < f[0] || (id == f[0] && *e <= start), "line {}: unsorted or overlapping", i + 1);
        }
        prev = Some((f[0].to_string(), start, end));
        n += 1;
    }
    Ok(n)
}

fn replication() -> Outcome {
    let started = Instant::now();
    let out = tempfile::tempdir().map_err(err)?;
    let official = std::env::var_os("SPANFORGE_OFFICIAL_CORPUS").zip(std::env::var_os("SPANFORGE_PRETRAINED"));
    let (cfg, source) = match official {
        Some((corpus, pretrained)) => (
            official_config(Path::new(&corpus), Path::new(&pretrained), out.path())?,
            "official corpus",
        ),
        None => {
            let train = SynthConfig { articles: 420, ..SynthConfig::default() };
            let dev = SynthConfig { articles: 40, first_id: 800_000_000, seed: 8, ..SynthConfig::default() };
            (
                workspace_config(out.path(), &train, &dev, REFERENCE_SETTINGS)?,
                "synthetic stand-in (SPANFORGE_OFFICIAL_CORPUS not set)",
            )
        }
    };
    cmd_train_embeddings(&cfg).map_err(err)?;
    let model = cmd_train(&cfg).map_err(err)?.model_path;
    let pred = cmd_predict(&cfg, &model, &[], None, None).map_err(err)?.predictions_path;
    let spans = check_submission(&pred)?;
    let f = if cfg.paths.eval_labels.is_empty() {
        "n/a (no dev labels)".to_string()
    } else {
        format!("{:.4}", per_token_f(&cfg, &pred)?)
    };
    Ok(format!("{source}: {spans} spans in a valid submission, per-token F = {f}, {:.1}s", started.elapsed().as_secs_f64()))
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("feature layout", feature_layout),
        ("optimizer", optimizer),
        ("metric oracles", metric_oracles),
        ("learnability", learnability),
        ("determinism", determinism),
        ("throughput", throughput),
        ("sweep harness", sweep_harness),
        ("replication", replication),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("acceptance {} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("acceptance {} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
