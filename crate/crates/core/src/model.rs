//! Binary L2-regularized logistic regression.
//!
//! Training minimizes
//!
//! ```text
//! f(w, b) = ½‖w‖² + C · Σᵢ log(1 + exp(−yᵢ(w·xᵢ + b)))
//! ```
//!
//! with `yᵢ = +1` for Propaganda and `−1` for None. The bias is not
//! regularized. The solver is limited-memory BFGS with a backtracking
//! Armijo line search.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::pipeline::Sample;

pub const DEFAULT_C: f64 = 0.1;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 1000;
const HISTORY: usize = 10;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainParams {
    #[serde(rename = "C")]
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            c: DEFAULT_C,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            seed: 1,
        }
    }
}

impl TrainParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::Argument(format!("C must be positive, got {}", self.c)));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(Error::Argument(format!("tol must be non-negative, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub n_propaganda: usize,
    pub n_none: usize,
    pub seed: u64,
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: f64,
    pub objective: f64,
    /// Objective value before the first and after every iteration.
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
}

/// Dense row-major design matrix with ±1 targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Dataset {
    pub fn new(dim: usize) -> Self {
        Dataset {
            dim,
            x: Vec::new(),
            y: Vec::new(),
        }
    }

    pub fn push(&mut self, row: &[f64], label: Label) -> Result<()> {
        if row.len() != self.dim {
            return Err(Error::Argument(format!(
                "sample has dimension {}, expected {}",
                row.len(),
                self.dim
            )));
        }
        self.x.extend_from_slice(row);
        self.y.push(if label.is_propaganda() { 1.0 } else { -1.0 });
        Ok(())
    }

    pub fn from_samples(samples: &[Sample]) -> Result<Self> {
        let dim = samples.first().map(|s| s.vector.len()).unwrap_or(0);
        let mut ds = Dataset::new(dim);
        ds.x.reserve(dim * samples.len());
        for s in samples {
            ds.push(s.vector.values(), s.label)?;
        }
        Ok(ds)
    }

    pub fn from_rows<'a>(rows: impl IntoIterator<Item = (&'a [f64], Label)>, dim: usize) -> Result<Self> {
        let mut ds = Dataset::new(dim);
        for (row, label) in rows {
            ds.push(row, label)?;
        }
        Ok(ds)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn target(&self, i: usize) -> f64 {
        self.y[i]
    }

    fn class_counts(&self) -> (usize, usize) {
        let pos = self.y.iter().filter(|&&y| y > 0.0).count();
        (pos, self.y.len() - pos)
    }
}

/// `log(1 + exp(−m))` without overflow.
fn log_loss(margin: f64) -> f64 {
    if margin > 0.0 {
        (-margin).exp().ln_1p()
    } else {
        -margin + margin.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Objective value and gradient at `params = [w..., b]`.
pub fn objective_and_gradient(data: &Dataset, params: &[f64], c: f64, grad: &mut [f64]) -> f64 {
    let d = data.dim;
    assert_eq!(params.len(), d + 1);
    assert_eq!(grad.len(), d + 1);
    let (w, b) = (&params[..d], params[d]);
    let mut value = 0.5 * dot(w, w);
    grad[..d].copy_from_slice(w);
    grad[d] = 0.0;
    for i in 0..data.len() {
        let x = data.row(i);
        let y = data.y[i];
        let margin = y * (dot(w, x) + b);
        value += c * log_loss(margin);
        // d/dz log(1+exp(-yz)) = -y σ(-yz)
        let coef = -c * y * sigmoid(-margin);
        for (g, xi) in grad[..d].iter_mut().zip(x) {
            *g += coef * xi;
        }
        grad[d] += coef;
    }
    value
}

pub fn objective(data: &Dataset, params: &[f64], c: f64) -> f64 {
    let mut scratch = vec![0.0; params.len()];
    objective_and_gradient(data, params, c, &mut scratch)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub meta: TrainingMeta,
}

pub fn train(samples: &[Sample], params: &TrainParams) -> Result<LogRegModel> {
    train_dataset(&Dataset::from_samples(samples)?, params)
}

pub fn train_dataset(data: &Dataset, params: &TrainParams) -> Result<LogRegModel> {
    params.validate()?;
    let (n_pos, n_neg) = data.class_counts();
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Training(format!(
            "training needs both classes, got {n_pos} Propaganda and {n_neg} None samples"
        )));
    }
    let n = data.dim + 1;
    let c = params.c;
    let mut x = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut f = objective_and_gradient(data, &x, c, &mut g);
    let mut trace = vec![f];
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(HISTORY);
    let mut iterations = 0;
    let mut converged = norm(&g) <= params.tol;

    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    while !converged && iterations < params.max_iter {
        let mut dir = two_loop(&g, &history);
        let mut slope = dot(&g, &dir);
        if !(slope < 0.0) {
            history.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let mut step = if history.is_empty() { 1.0 / norm(&g).max(1.0) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            for i in 0..n {
                x_new[i] = x[i] + step * dir[i];
            }
            let f_new = objective_and_gradient(data, &x_new, c, &mut g_new);
            if f_new.is_finite() && f_new <= f + ARMIJO * step * slope {
                accepted = Some(f_new);
                break;
            }
            step *= 0.5;
        }
        let Some(f_new) = accepted else {
            log::debug!("line search stalled after {iterations} iterations");
            break;
        };
        debug_assert!(f_new <= f, "objective increased: {f} -> {f_new}");
        iterations += 1;

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &yv);
        if sy > 1e-12 * norm(&s) * norm(&yv) {
            if history.len() == HISTORY {
                history.pop_front();
            }
            history.push_back((s, yv, 1.0 / sy));
        }
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut g, &mut g_new);
        let progressed = f_new < f;
        f = f_new;
        trace.push(f);
        converged = norm(&g) <= params.tol;
        if !progressed && !converged {
            log::debug!("objective stopped decreasing after {iterations} iterations");
            break;
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Training("solver produced non-finite parameters".into()));
    }
    let bias = x.pop().expect("bias coordinate");
    Ok(LogRegModel {
        weights: x,
        bias,
        c,
        meta: TrainingMeta {
            n_propaganda: n_pos,
            n_none: n_neg,
            seed: params.seed,
            iterations,
            converged,
            gradient_norm: norm(&g),
            objective: f,
            objective_trace: trace,
        },
    })
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn two_loop(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q
}

impl LogRegModel {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::Argument(format!(
                "vector has dimension {}, model expects {}",
                x.len(),
                self.weights.len()
            )));
        }
        Ok(dot(&self.weights, x) + self.bias)
    }

    /// Probability of Propaganda, strictly inside (0, 1).
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        let p = sigmoid(self.decision(x)?);
        Ok(p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
    }

    pub fn predict_one(&self, x: &[f64], threshold: f64) -> Result<Label> {
        Ok(if self.predict_proba(x)? >= threshold {
            Label::Propaganda
        } else {
            Label::None
        })
    }

    pub fn predict<V: AsRef<[f64]>>(&self, vectors: &[V], threshold: f64) -> Result<Vec<Label>> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::Argument(format!("threshold must lie in (0,1), got {threshold}")));
        }
        vectors.iter().map(|v| self.predict_one(v.as_ref(), threshold)).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(24 * (self.weights.len() + 2));
        writeln!(out, "LOGREG v1 dim={} C={}", self.weights.len(), self.c).unwrap();
        writeln!(out, "{:.16e}", self.bias).unwrap();
        for w in &self.weights {
            writeln!(out, "{w:.16e}").unwrap();
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&src, path)
    }

    pub fn parse(src: &str, origin: &Path) -> Result<Self> {
        let mut lines = src.lines();
        let header = lines.next().ok_or_else(|| Error::load(origin, "empty model file"))?;
        let rest = header
            .strip_prefix("LOGREG v1 ")
            .ok_or_else(|| Error::parse(origin, 1, "expected `LOGREG v1` header"))?;
        let mut dim = None;
        let mut c = None;
        for field in rest.split_whitespace() {
            match field.split_once('=') {
                Some(("dim", v)) => dim = v.parse::<usize>().ok(),
                Some(("C", v)) => c = v.parse::<f64>().ok().filter(|c| c.is_finite() && *c > 0.0),
                _ => return Err(Error::parse(origin, 1, format!("unexpected header field `{field}`"))),
            }
        }
        let dim = dim.ok_or_else(|| Error::parse(origin, 1, "missing or bad dim"))?;
        let c = c.ok_or_else(|| Error::parse(origin, 1, "missing or bad C"))?;
        let mut values = Vec::with_capacity(dim + 1);
        for (i, line) in lines.enumerate() {
            let v: f64 = line
                .trim()
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::parse(origin, i + 2, format!("bad parameter `{line}`")))?;
            values.push(v);
        }
        if values.len() != dim + 1 {
            return Err(Error::load(
                origin,
                format!("header declares {dim} weights, file holds {}", values.len().saturating_sub(1)),
            ));
        }
        let bias = values.remove(0);
        Ok(LogRegModel {
            weights: values,
            bias,
            c,
            meta: TrainingMeta::default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dataset(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Dataset {
        let mut ds = Dataset::new(dim);
        for i in 0..n {
            let row: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let label = if i % 2 == 0 || rng.gen_bool(0.3) { Label::Propaganda } else { Label::None };
            ds.push(&row, label).unwrap();
        }
        ds
    }

    fn toy() -> Dataset {
        let mut ds = Dataset::new(2);
        for _ in 0..50 {
            ds.push(&[0.0, 0.0], Label::None).unwrap();
            ds.push(&[1.0, 1.0], Label::Propaganda).unwrap();
        }
        ds
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let dim = rng.gen_range(1..=50);
            let data = random_dataset(&mut rng, 200, dim);
            let params: Vec<f64> = (0..=dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut grad = vec![0.0; dim + 1];
            objective_and_gradient(&data, &params, 0.1, &mut grad);
            let h = 1e-6;
            let numeric: Vec<f64> = (0..=dim)
                .map(|i| {
                    let mut p = params.clone();
                    p[i] += h;
                    let up = objective(&data, &p, 0.1);
                    p[i] -= 2.0 * h;
                    (up - objective(&data, &p, 0.1)) / (2.0 * h)
                })
                .collect();
            let diff: f64 = grad.iter().zip(&numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let scale = norm(&grad).max(norm(&numeric)).max(1e-12);
            assert!(diff / scale < 1e-4, "relative error {}", diff / scale);
        }
    }

    #[test]
    fn separable_toy_is_learned() {
        let m = train_dataset(&toy(), &TrainParams::default()).unwrap();
        let correct = (0..100)
            .filter(|&i| {
                let ds = toy();
                let want = if ds.target(i) > 0.0 { Label::Propaganda } else { Label::None };
                m.predict_one(ds.row(i), 0.5).unwrap() == want
            })
            .count();
        assert_eq!(correct, 100);
        assert_eq!((m.meta.n_propaganda, m.meta.n_none), (50, 50));
        assert!(m.meta.objective_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn tiny_c_collapses_to_prior() {
        let params = TrainParams {
            c: 1e-8,
            ..TrainParams::default()
        };
        let m = train_dataset(&toy(), &params).unwrap();
        assert!(norm(&m.weights) < 1e-6);
        assert!((m.predict_proba(&[1.0, 1.0]).unwrap() - 0.5).abs() < 1e-3);
    }

    #[test]
    fn single_class_is_a_training_error() {
        let mut ds = Dataset::new(1);
        ds.push(&[1.0], Label::None).unwrap();
        assert!(matches!(train_dataset(&ds, &TrainParams::default()), Err(Error::Training(_))));
        assert!(ds.push(&[1.0, 2.0], Label::None).is_err());
    }

    #[test]
    fn probability_edges() {
        let m = LogRegModel {
            weights: vec![0.0; 3],
            bias: 0.0,
            c: 0.1,
            meta: TrainingMeta::default(),
        };
        assert_eq!(m.predict_proba(&[5.0, -2.0, 1.0]).unwrap(), 0.5);
        assert_eq!(m.predict(&[[9.0, 9.0, 9.0]], 0.5).unwrap(), vec![Label::Propaganda]);
        let m = LogRegModel {
            bias: 3f64.ln(),
            ..m
        };
        assert!((m.predict_proba(&[0.0; 3]).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(m.predict_one(&[0.0; 3], 0.9).unwrap(), Label::None);
        let huge = LogRegModel { bias: 1e6, ..m.clone() };
        let p = huge.predict_proba(&[0.0; 3]).unwrap();
        assert!(p < 1.0 && p > 0.99);
        let tiny = LogRegModel { bias: -1e6, ..m.clone() };
        assert!(tiny.predict_proba(&[0.0; 3]).unwrap() > 0.0);
        assert!(m.predict_proba(&[0.0; 2]).is_err());
        assert!(m.predict(&[[0.0; 3]], 1.0).is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let data = random_dataset(&mut rng, 80, 6);
        let m = train_dataset(&data, &TrainParams::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.txt");
        m.save(&path).unwrap();
        let back = LogRegModel::load(&path).unwrap();
        assert_eq!(back.weights, m.weights);
        assert_eq!(back.bias, m.bias);
        assert_eq!(back.c, m.c);

        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("LOGREG v1 dim=6 C=0.1\n"));
        let truncated: String = text.lines().take(4).map(|l| format!("{l}\n")).collect();
        assert!(LogRegModel::parse(&truncated, &path).is_err());
        let mut lines: Vec<&str> = text.lines().collect();
        lines[0] = "LOGREG v1 dim=10 C=0.1";
        assert!(LogRegModel::parse(&lines.join("\n"), &path).is_err());
    }

    #[test]
    fn order_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data = random_dataset(&mut rng, 150, 8);
        let mut reversed = Dataset::new(8);
        for i in (0..data.len()).rev() {
            let label = if data.target(i) > 0.0 { Label::Propaganda } else { Label::None };
            reversed.push(data.row(i), label).unwrap();
        }
        let a = train_dataset(&data, &TrainParams::default()).unwrap();
        let b = train_dataset(&reversed, &TrainParams::default()).unwrap();
        for _ in 0..20 {
            let probe: Vec<f64> = (0..8).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let diff = a.predict_proba(&probe).unwrap() - b.predict_proba(&probe).unwrap();
            assert!(diff.abs() < 1e-6);
        }
    }

    #[test]
    fn doubled_features_with_halved_c_keep_signs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut data = Dataset::new(3);
        let mut doubled = Dataset::new(3);
        for i in 0..60 {
            let label = if i % 2 == 0 { Label::Propaganda } else { Label::None };
            let shift = if i % 2 == 0 { 1.5 } else { -1.5 };
            let row: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0) + shift).collect();
            data.push(&row, label).unwrap();
            doubled.push(&row.iter().map(|v| 2.0 * v).collect::<Vec<_>>(), label).unwrap();
        }
        let a = train_dataset(&data, &TrainParams::default()).unwrap();
        let b = train_dataset(&doubled, &TrainParams { c: 0.05, ..TrainParams::default() }).unwrap();
        for i in 0..60 {
            let sa = a.decision(data.row(i)).unwrap() >= 0.0;
            let sb = b.decision(doubled.row(i)).unwrap() >= 0.0;
            assert_eq!(sa, sb);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn objective_never_increases(seed in any::<u64>(), dim in 1usize..12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data = random_dataset(&mut rng, 60, dim);
            let m = train_dataset(&data, &TrainParams { max_iter: 50, ..TrainParams::default() }).unwrap();
            prop_assert!(m.meta.objective_trace.windows(2).all(|w| w[1] <= w[0]));
            prop_assert_eq!(m.meta.objective_trace.len(), m.meta.iterations + 1);
        }
    }
}
