//! Weighted binary linear classifiers used for the model step of self-paced training.
//!
//! A fit minimizes `sum_i v_i L(y_i, w.x_i + b) + l2 * |w|^2` (bias unregularized).
//! Mini-batch mode runs SGD over a seeded shuffle; full-batch mode (`batch_size == 0`)
//! runs gradient descent with Barzilai-Borwein steps and an Armijo safeguard until the
//! gradient norm falls below `grad_tol`, which is what the convergence checks rely on.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Hinge,
    Logistic,
    /// Smooth variant used where the model step has to be solved to high precision.
    SquaredHinge,
}

impl LossKind {
    /// Loss at margin `y * score`.
    pub fn value(self, y: f64, score: f64) -> f64 {
        let margin = y * score;
        match self {
            LossKind::Hinge => (1.0 - margin).max(0.0),
            LossKind::SquaredHinge => {
                let h = (1.0 - margin).max(0.0);
                h * h
            }
            LossKind::Logistic => softplus(-margin),
        }
    }

    /// Derivative of the loss with respect to the score (a subgradient for hinge).
    pub fn derivative(self, y: f64, score: f64) -> f64 {
        let margin = y * score;
        match self {
            LossKind::Hinge => {
                if margin < 1.0 {
                    -y
                } else {
                    0.0
                }
            }
            LossKind::SquaredHinge => -2.0 * y * (1.0 - margin).max(0.0),
            LossKind::Logistic => -y * sigmoid(-margin),
        }
    }
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub loss: LossKind,
    pub l2: f64,
    /// Inputs are scaled to unit L2 norm before scoring.
    #[serde(default)]
    pub normalize_input: bool,
}

impl LinearModel {
    pub fn zeros(dim: usize, loss: LossKind, l2: f64) -> Self {
        Self {
            weights: vec![0.0; dim],
            bias: 0.0,
            loss,
            l2,
            normalize_input: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn is_finite(&self) -> bool {
        self.bias.is_finite() && self.weights.iter().all(|w| w.is_finite())
    }

    fn raw(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }

    /// Detector score of a raw feature vector, applying input normalization if the model
    /// was trained with it.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        if self.normalize_input {
            let n = norm(x);
            if n > 0.0 {
                return Ok(dot(&self.weights, x) / n + self.bias);
            }
        }
        Ok(self.raw(x))
    }

    /// Per-sample gradient of the unregularized loss with respect to `(weights, bias)`,
    /// at `x` taken as-is.
    pub fn loss_gradient(&self, x: &[f64], y: f64) -> Result<(Vec<f64>, f64)> {
        check_dim(self.dim(), x.len())?;
        let d = self.loss.derivative(y, self.raw(x));
        Ok((x.iter().map(|xi| d * xi).collect(), d))
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::LengthMismatch { expected, found });
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `w.x + b`, with no input normalization.
pub fn decision_score(model: &LinearModel, x: &[f64]) -> Result<f64> {
    check_dim(model.dim(), x.len())?;
    Ok(model.raw(x))
}

/// Loss of every sample under `model`, with the model's input normalization applied.
pub fn per_sample_loss(
    model: &LinearModel,
    features: &[&[f64]],
    labels: &[f64],
) -> Result<Vec<f64>> {
    check_dim(features.len(), labels.len())?;
    features
        .iter()
        .zip(labels)
        .map(|(x, &y)| Ok(model.loss.value(y, model.score(x)?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub loss: LossKind,
    pub l2: f64,
    /// Passes over the data (mini-batch) or gradient iterations (full batch).
    pub epochs: usize,
    pub learning_rate: f64,
    /// Step size at update `t` is `learning_rate / (1 + decay * t)`.
    pub decay: f64,
    /// Mini-batch size; 0 selects full-batch gradient descent.
    pub batch_size: usize,
    pub grad_tol: f64,
    pub rng_seed: u64,
    pub normalize_features: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            loss: LossKind::Hinge,
            l2: 0.1,
            epochs: 20,
            learning_rate: 0.5,
            decay: 0.01,
            batch_size: 32,
            grad_tol: 1e-8,
            rng_seed: 0,
            normalize_features: true,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || self.epochs == 0 {
            return Err(Error::invalid(
                "learning_rate must be positive and epochs >= 1",
            ));
        }
        if !(self.l2 >= 0.0) || !(self.decay >= 0.0) {
            return Err(Error::invalid("l2 and decay must be non-negative"));
        }
        Ok(())
    }

    /// The smooth, exactly solved configuration used by convergence checks.
    pub fn exact(loss: LossKind, l2: f64, grad_tol: f64) -> Self {
        Self {
            loss,
            l2,
            epochs: 200_000,
            batch_size: 0,
            grad_tol,
            normalize_features: false,
            ..Self::default()
        }
    }
}

fn normalized_rows(features: &[&[f64]], normalize: bool) -> Vec<Vec<f64>> {
    features
        .iter()
        .map(|x| {
            let n = norm(x);
            if normalize && n > 0.0 {
                x.iter().map(|v| v / n).collect()
            } else {
                x.to_vec()
            }
        })
        .collect()
}

/// Weighted regularized risk `sum_i v_i L_i + l2 |w|^2` of `model` on the given rows,
/// without input normalization.
pub fn weighted_objective(
    model: &LinearModel,
    rows: &[&[f64]],
    labels: &[f64],
    weights: &[f64],
) -> f64 {
    let risk: f64 = rows
        .iter()
        .zip(labels)
        .zip(weights)
        .filter(|(_, &v)| v != 0.0)
        .map(|((x, &y), &v)| v * model.loss.value(y, model.raw(x)))
        .sum();
    risk + model.l2 * dot(&model.weights, &model.weights)
}

/// Fits a linear model to `labels` (in {-1, +1}) with per-sample weights `sample_weights`.
/// Samples of weight zero never influence the result.
pub fn fit_weighted(
    features: &[&[f64]],
    labels: &[f64],
    sample_weights: &[f64],
    config: &FitConfig,
) -> Result<LinearModel> {
    config.validate()?;
    let n = features.len();
    if n == 0 {
        return Err(Error::invalid("cannot fit on zero samples"));
    }
    check_dim(n, labels.len())?;
    check_dim(n, sample_weights.len())?;
    let dim = features[0].len();
    for x in features {
        check_dim(dim, x.len())?;
    }
    if sample_weights.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::invalid(
            "sample weights must be finite and non-negative",
        ));
    }
    if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
        return Err(Error::invalid("labels must be +1 or -1"));
    }
    let active: Vec<usize> = (0..n).filter(|&i| sample_weights[i] > 0.0).collect();
    if active.is_empty() {
        return Err(Error::invalid("all sample weights are zero"));
    }
    let mut model = LinearModel::zeros(dim, config.loss, config.l2);
    model.normalize_input = config.normalize_features;
    let first = labels[active[0]];
    if active.iter().all(|&i| labels[i] == first) {
        log::debug!("weighted data contains a single class; fitting a bias-only model");
        model.bias = first;
        return Ok(model);
    }
    let rows = normalized_rows(features, config.normalize_features);
    let rows: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    if config.batch_size == 0 || config.batch_size >= n {
        full_batch(&mut model, &rows, labels, sample_weights, &active, config);
    } else {
        mini_batch(&mut model, &rows, labels, sample_weights, config);
    }
    if !model.is_finite() {
        return Err(Error::invalid("learner produced non-finite parameters"));
    }
    Ok(model)
}

fn mini_batch(
    model: &mut LinearModel,
    rows: &[&[f64]],
    labels: &[f64],
    v: &[f64],
    config: &FitConfig,
) {
    let n = rows.len();
    let dim = model.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut grad = vec![0.0; dim];
    let reg = 2.0 * config.l2 / n as f64;
    let mut t = 0usize;
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut grad_b = 0.0;
            for &i in batch {
                if v[i] == 0.0 {
                    continue;
                }
                let d = v[i] * model.loss.derivative(labels[i], model.raw(rows[i]));
                if d != 0.0 {
                    for (g, x) in grad.iter_mut().zip(rows[i]) {
                        *g += d * x;
                    }
                    grad_b += d;
                }
            }
            let lr = config.learning_rate / (1.0 + config.decay * t as f64);
            let scale = 1.0 / batch.len() as f64;
            for (w, g) in model.weights.iter_mut().zip(&grad) {
                *w -= lr * (g * scale + reg * *w);
            }
            model.bias -= lr * grad_b * scale;
            t += 1;
        }
    }
}

/// Objective and gradient over the active samples, in fixed index order.
fn objective_and_gradient(
    model: &LinearModel,
    rows: &[&[f64]],
    labels: &[f64],
    v: &[f64],
    active: &[usize],
) -> (f64, Vec<f64>, f64) {
    let mut f = model.l2 * dot(&model.weights, &model.weights);
    let mut gw: Vec<f64> = model.weights.iter().map(|w| 2.0 * model.l2 * w).collect();
    let mut gb = 0.0;
    for &i in active {
        let s = model.raw(rows[i]);
        f += v[i] * model.loss.value(labels[i], s);
        let d = v[i] * model.loss.derivative(labels[i], s);
        if d != 0.0 {
            for (g, x) in gw.iter_mut().zip(rows[i]) {
                *g += d * x;
            }
            gb += d;
        }
    }
    (f, gw, gb)
}

fn full_batch(
    model: &mut LinearModel,
    rows: &[&[f64]],
    labels: &[f64],
    v: &[f64],
    active: &[usize],
    config: &FitConfig,
) {
    let (mut f, mut gw, mut gb) = objective_and_gradient(model, rows, labels, v, active);
    let total_weight: f64 = active.iter().map(|&i| v[i]).sum();
    let max_sq = active
        .iter()
        .map(|&i| dot(rows[i], rows[i]) + 1.0)
        .fold(0.0, f64::max);
    // 1 / (crude Lipschitz bound) as the first trial step
    let mut step = 1.0 / (2.0 * total_weight * max_sq + 2.0 * config.l2).max(1e-12);
    for _ in 0..config.epochs {
        let gnorm2 = dot(&gw, &gw) + gb * gb;
        if gnorm2.sqrt() <= config.grad_tol {
            break;
        }
        let mut trial = step;
        let mut accepted = None;
        for _ in 0..80 {
            let mut cand = model.clone();
            for (w, g) in cand.weights.iter_mut().zip(&gw) {
                *w -= trial * g;
            }
            cand.bias -= trial * gb;
            let (fc, gwc, gbc) = objective_and_gradient(&cand, rows, labels, v, active);
            // Near the optimum the sufficient decrease falls below the resolution of `f`;
            // a step that keeps `f` level and shrinks the gradient is then accepted.
            let level = fc <= f + 4.0 * f64::EPSILON * f.abs();
            let flatter = dot(&gwc, &gwc) + gbc * gbc < gnorm2;
            if fc <= f - 1e-4 * trial * gnorm2 || (level && flatter) {
                accepted = Some((cand, fc, gwc, gbc));
                break;
            }
            trial *= 0.5;
        }
        let Some((cand, fc, gwc, gbc)) = accepted else {
            break;
        };
        // Barzilai-Borwein estimate for the next trial step
        let sw: Vec<f64> = cand
            .weights
            .iter()
            .zip(&model.weights)
            .map(|(a, b)| a - b)
            .collect();
        let sb = cand.bias - model.bias;
        let yw: Vec<f64> = gwc.iter().zip(&gw).map(|(a, b)| a - b).collect();
        let yb = gbc - gb;
        let sy = dot(&sw, &yw) + sb * yb;
        let ss = dot(&sw, &sw) + sb * sb;
        step = if sy > 0.0 { ss / sy } else { trial * 2.0 };
        *model = cand;
        f = fc;
        gw = gwc;
        gb = gbc;
    }
}

/// Gradient norm of the weighted objective at `model` (no input normalization).
pub fn objective_gradient_norm(
    model: &LinearModel,
    rows: &[&[f64]],
    labels: &[f64],
    weights: &[f64],
) -> f64 {
    let active: Vec<usize> = (0..rows.len()).filter(|&i| weights[i] > 0.0).collect();
    let (_, gw, gb) = objective_and_gradient(model, rows, labels, weights, &active);
    (dot(&gw, &gw) + gb * gb).sqrt()
}
