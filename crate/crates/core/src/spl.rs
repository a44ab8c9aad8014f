//! Self-paced alternating optimization inside a curriculum region.
//!
//! The objective over model `w` and latent sample weights `v` is
//!
//! ```text
//! E(w, v; lambda) = sum_i v_i l_i(w) + l2 |w|^2 + f(v; lambda),   0 <= v_i <= u_i
//! ```
//!
//! with the linear regularizer `f = lambda/2 * sum_i (v_i^2 - 2 v_i)` or its dropout form
//! `f = lambda/2 * sum_i (v_i^2 / r_i - 2 v_i)`, `r_i ~ Bernoulli(p) + epsilon`. Both are
//! separable quadratics in `v`, so the v-step is the unconstrained minimizer
//! `r_i (1 - l_i / lambda)` clamped to `[0, u_i]`, which is exact on a box region.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::{fit_weighted, per_sample_loss, FitConfig, LinearModel};
use crate::metrics::{average_precision, rank_indices};
use crate::text::CurriculumRegion;

/// Smallest admissible model age.
pub const LAMBDA_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularizerKind {
    Linear,
    DropoutLinear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegularizerSpec {
    pub kind: RegularizerKind,
    /// Keep probability for samples labeled +1.
    pub p_pos: f64,
    /// Keep probability for samples labeled -1.
    pub p_neg: f64,
    pub epsilon: f64,
    pub rng_seed: u64,
    /// Draw a fresh `r` at every v-step; otherwise the first draw is reused.
    pub resample: bool,
}

impl Default for RegularizerSpec {
    fn default() -> Self {
        Self {
            kind: RegularizerKind::DropoutLinear,
            p_pos: 0.9,
            p_neg: 0.5,
            epsilon: 1e-3,
            rng_seed: 0,
            resample: true,
        }
    }
}

impl RegularizerSpec {
    pub fn linear() -> Self {
        Self {
            kind: RegularizerKind::Linear,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok_p = |p: f64| p > 0.0 && p <= 1.0;
        if !ok_p(self.p_pos) || !ok_p(self.p_neg) {
            return Err(Error::invalid(
                "dropout keep probabilities must lie in (0, 1]",
            ));
        }
        if !(self.epsilon >= 0.0 && self.epsilon < 1.0) {
            return Err(Error::invalid("epsilon must lie in [0, 1)"));
        }
        Ok(())
    }

    /// Draws `r_i = Bernoulli(p) + epsilon` with `p` chosen by the sign of each label.
    pub fn draw(&self, labels: &[f64], rng: &mut impl Rng) -> Vec<f64> {
        labels
            .iter()
            .map(|&y| {
                let p = if y > 0.0 { self.p_pos } else { self.p_neg };
                let keep = if rng.random_bool(p) { 1.0 } else { 0.0 };
                keep + self.epsilon
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgeSchedule {
    /// Initial age is this percentile of the confident group's losses after the first fit.
    pub lambda0_percentile: f64,
    /// Additive age step; derived from the first fit's losses when absent.
    pub mu: Option<f64>,
    /// Loss percentile the age should reach by `stop_iter` when `mu` is derived.
    pub mu_target_percentile: f64,
    /// The age stops growing after this many iterations.
    pub stop_iter: usize,
    pub max_iters: usize,
    /// Relative objective change at a frozen age that counts as converged.
    pub obj_tol: f64,
    /// Hold the age at this value for the whole run.
    pub fixed_lambda: Option<f64>,
}

impl Default for AgeSchedule {
    fn default() -> Self {
        Self {
            lambda0_percentile: 50.0,
            mu: None,
            mu_target_percentile: 90.0,
            stop_iter: 100,
            max_iters: 150,
            obj_tol: 1e-6,
            fixed_lambda: None,
        }
    }
}

impl AgeSchedule {
    pub fn validate(&self) -> Result<()> {
        let pct = |p: f64| p > 0.0 && p < 100.0;
        if !pct(self.lambda0_percentile) || !pct(self.mu_target_percentile) {
            return Err(Error::invalid("schedule percentiles must lie in (0, 100)"));
        }
        if self.mu.is_some_and(|m| !(m > 0.0)) {
            return Err(Error::invalid("mu must be positive"));
        }
        if self.stop_iter == 0 || self.max_iters == 0 {
            return Err(Error::invalid("stop_iter and max_iters must be at least 1"));
        }
        if self.fixed_lambda.is_some_and(|l| !(l > 0.0)) {
            return Err(Error::invalid("fixed_lambda must be positive"));
        }
        Ok(())
    }
}

fn check_vstep_inputs(losses: &[f64], lambda: f64, region: &CurriculumRegion) -> Result<()> {
    if losses.len() != region.len() {
        return Err(Error::LengthMismatch {
            expected: region.len(),
            found: losses.len(),
        });
    }
    if !(lambda > 0.0) {
        return Err(Error::invalid(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if let Some(l) = losses.iter().find(|l| !(**l >= 0.0) || !l.is_finite()) {
        return Err(Error::invalid(format!(
            "losses must be finite and non-negative, got {l}"
        )));
    }
    Ok(())
}

/// Latent weights under the linear regularizer: `clamp(1 - l_i / lambda, 0, u_i)`.
pub fn vstep_linear(losses: &[f64], lambda: f64, region: &CurriculumRegion) -> Result<Vec<f64>> {
    check_vstep_inputs(losses, lambda, region)?;
    Ok(losses
        .iter()
        .zip(&region.upper_bounds)
        .map(|(&l, &u)| (1.0 - l / lambda).max(0.0).min(u))
        .collect())
}

/// Latent weights under the dropout regularizer for a given draw `r`.
pub fn vstep_dropout_with(
    losses: &[f64],
    lambda: f64,
    region: &CurriculumRegion,
    r: &[f64],
) -> Result<Vec<f64>> {
    check_vstep_inputs(losses, lambda, region)?;
    if r.len() != losses.len() {
        return Err(Error::LengthMismatch {
            expected: losses.len(),
            found: r.len(),
        });
    }
    Ok(losses
        .iter()
        .zip(&region.upper_bounds)
        .zip(r)
        .map(|((&l, &u), &ri)| (ri * (1.0 - l / lambda)).max(0.0).min(u))
        .collect())
}

/// Draws `r` from `rng` and applies the dropout v-step. Returns `(v, r)`.
pub fn vstep_dropout(
    losses: &[f64],
    lambda: f64,
    region: &CurriculumRegion,
    spec: &RegularizerSpec,
    labels: &[f64],
    rng: &mut impl Rng,
) -> Result<(Vec<f64>, Vec<f64>)> {
    spec.validate()?;
    if labels.len() != losses.len() {
        return Err(Error::LengthMismatch {
            expected: losses.len(),
            found: labels.len(),
        });
    }
    let r = spec.draw(labels, rng);
    let v = vstep_dropout_with(losses, lambda, region, &r)?;
    Ok((v, r))
}

fn objective_terms(losses: &[f64], v: &[f64], lambda: f64, r: Option<&[f64]>) -> Result<f64> {
    if v.len() != losses.len() {
        return Err(Error::LengthMismatch {
            expected: losses.len(),
            found: v.len(),
        });
    }
    let mut weighted = 0.0;
    let mut reg = 0.0;
    for (i, (&l, &vi)) in losses.iter().zip(v).enumerate() {
        weighted += vi * l;
        let sq = match r {
            Some(r) => vi * vi / r[i],
            None => vi * vi,
        };
        reg += sq - 2.0 * vi;
    }
    Ok(weighted + 0.5 * lambda * reg)
}

/// `sum_i v_i l_i + lambda/2 * sum_i (v_i^2 - 2 v_i)`.
pub fn objective(losses: &[f64], v: &[f64], lambda: f64) -> Result<f64> {
    objective_terms(losses, v, lambda, None)
}

/// Objective under the dropout regularizer, `sum_i v_i l_i + lambda/2 * sum_i (v_i^2 / r_i - 2 v_i)`.
pub fn objective_dropout(losses: &[f64], v: &[f64], lambda: f64, r: &[f64]) -> Result<f64> {
    if r.len() != losses.len() {
        return Err(Error::LengthMismatch {
            expected: losses.len(),
            found: r.len(),
        });
    }
    objective_terms(losses, v, lambda, Some(r))
}

/// Percentile with linear interpolation between order statistics.
pub fn percentile(values: &[f64], pct: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("percentile of an empty sample"));
    }
    if !(0.0..=100.0).contains(&pct) {
        return Err(Error::invalid(format!("percentile {pct} outside [0, 100]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = pct / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    Ok(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
}

/// Initial model age: the given percentile of the losses, floored at [`LAMBDA_FLOOR`].
pub fn init_lambda(losses: &[f64], pct: f64) -> Result<f64> {
    if !(pct > 0.0 && pct < 100.0) {
        return Err(Error::invalid(format!("percentile {pct} outside (0, 100)")));
    }
    Ok(percentile(losses, pct)?.max(LAMBDA_FLOOR))
}

/// Held-out samples whose ranking selects the reported iteration.
#[derive(Debug, Clone, Default)]
pub struct ValidationSet {
    pub features: Vec<Vec<f64>>,
    pub relevant: Vec<bool>,
}

impl ValidationSet {
    pub fn average_precision(&self, model: &LinearModel) -> Result<f64> {
        let scores = self
            .features
            .iter()
            .map(|x| model.score(x))
            .collect::<Result<Vec<f64>>>()?;
        let order = rank_indices(&scores);
        let bits: Vec<bool> = order.iter().map(|&i| self.relevant[i]).collect();
        let total = self.relevant.iter().filter(|&&r| r).count();
        Ok(average_precision(&bits, total))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learner: FitConfig,
    pub regularizer: RegularizerSpec,
    pub schedule: AgeSchedule,
    /// Upper bound on the latent weight of samples outside the confident group.
    pub u_low: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learner: FitConfig::default(),
            regularizer: RegularizerSpec::default(),
            schedule: AgeSchedule::default(),
            u_low: 0.5,
        }
    }
}

/// Optimizer state of one session.
#[derive(Debug, Clone, PartialEq)]
pub struct SplState {
    pub v: Vec<f64>,
    pub lambda: f64,
    pub iter: usize,
    pub objective_history: Vec<f64>,
    pub selected_count_history: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationSnapshot {
    pub iter: usize,
    pub lambda: f64,
    pub objective: f64,
    pub selected: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub validation_ap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub learner: u64,
    pub dropout: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub concept: String,
    pub model: LinearModel,
    pub schedule: AgeSchedule,
    pub regularizer: RegularizerSpec,
    pub iterations: Vec<IterationSnapshot>,
    /// 1-based iteration whose model is reported.
    pub chosen_iteration: usize,
    pub seeds: Seeds,
}

/// Full trajectory of a session, for inspection and tests.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub report: TrainReport,
    pub state: SplState,
    pub models: Vec<LinearModel>,
    pub weights: Vec<Vec<f64>>,
}

/// Runs alternating minimization and returns the report.
pub fn train_well(
    features: &[&[f64]],
    labels: &[f64],
    region: &CurriculumRegion,
    config: &TrainConfig,
    validation: Option<&ValidationSet>,
) -> Result<TrainReport> {
    run_session(features, labels, region, config, validation, false).map(|t| t.report)
}

/// Same as [`train_well`] but keeps every iteration's model and weights.
pub fn train_well_traced(
    features: &[&[f64]],
    labels: &[f64],
    region: &CurriculumRegion,
    config: &TrainConfig,
    validation: Option<&ValidationSet>,
) -> Result<Trajectory> {
    run_session(features, labels, region, config, validation, true)
}

fn run_session(
    features: &[&[f64]],
    labels: &[f64],
    region: &CurriculumRegion,
    config: &TrainConfig,
    validation: Option<&ValidationSet>,
    keep_trace: bool,
) -> Result<Trajectory> {
    let schedule = &config.schedule;
    let spec = &config.regularizer;
    schedule.validate()?;
    spec.validate()?;
    let n = features.len();
    if labels.len() != n || region.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: if labels.len() != n {
                labels.len()
            } else {
                region.len()
            },
        });
    }
    let mut state = SplState {
        v: region.upper_bounds.clone(),
        lambda: schedule.fixed_lambda.unwrap_or(0.0),
        iter: 0,
        objective_history: Vec::new(),
        selected_count_history: Vec::new(),
    };
    if state.v.iter().all(|&v| v <= 0.0) {
        return Err(Error::invalid("curriculum region admits no sample"));
    }
    let confident = region.confident_indices();
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let mut fixed_r: Option<Vec<f64>> = None;
    let mut mu = schedule.mu.unwrap_or(0.0);
    let mut snapshots = Vec::new();
    let mut models = Vec::new();
    let mut weights = Vec::new();
    let mut best: Option<(f64, usize, LinearModel)> = None;
    let mut last_model = None;
    let mut prev: Option<(f64, f64)> = None;

    for iter in 1..=schedule.max_iters {
        state.iter = iter;
        let model = fit_weighted(features, labels, &state.v, &config.learner).map_err(|e| {
            Error::Diverged {
                iteration: iter,
                lambda: state.lambda,
                message: e.to_string(),
            }
        })?;
        let losses = per_sample_loss(&model, features, labels)?;
        if losses.iter().any(|l| !l.is_finite()) {
            return Err(Error::Diverged {
                iteration: iter,
                lambda: state.lambda,
                message: "non-finite loss".into(),
            });
        }
        if iter == 1 && schedule.fixed_lambda.is_none() {
            let base: Vec<f64> = if confident.is_empty() {
                losses.clone()
            } else {
                confident.iter().map(|&i| losses[i]).collect()
            };
            state.lambda = init_lambda(&base, schedule.lambda0_percentile)?;
            if schedule.mu.is_none() {
                let target = percentile(&losses, schedule.mu_target_percentile)?;
                let steps = schedule.stop_iter.max(1) as f64;
                mu = (target - state.lambda) / steps;
                if !(mu > 0.0) {
                    mu = state.lambda / steps;
                }
            }
        }
        let (v, r) = match spec.kind {
            RegularizerKind::Linear => (vstep_linear(&losses, state.lambda, region)?, None),
            RegularizerKind::DropoutLinear => {
                let r = match (&fixed_r, spec.resample) {
                    (Some(r), false) => r.clone(),
                    _ => {
                        let r = spec.draw(labels, &mut dropout_rng);
                        if !spec.resample {
                            fixed_r = Some(r.clone());
                        }
                        r
                    }
                };
                (
                    vstep_dropout_with(&losses, state.lambda, region, &r)?,
                    Some(r),
                )
            }
        };
        let reg_w = model.l2 * model.weights.iter().map(|w| w * w).sum::<f64>();
        let obj = match &r {
            Some(r) => objective_dropout(&losses, &v, state.lambda, r)?,
            None => objective(&losses, &v, state.lambda)?,
        } + reg_w;
        let selected = v.iter().filter(|&&x| x > 0.0).count();
        state.v = v;
        state.objective_history.push(obj);
        state.selected_count_history.push(selected);

        let validation_ap = validation
            .map(|val| val.average_precision(&model))
            .transpose()?;
        if let Some(ap) = validation_ap {
            if best.as_ref().is_none_or(|(b, _, _)| ap > *b) {
                best = Some((ap, iter, model.clone()));
            }
        }
        snapshots.push(IterationSnapshot {
            iter,
            lambda: state.lambda,
            objective: obj,
            selected,
            validation_ap,
        });
        if keep_trace {
            models.push(model.clone());
            weights.push(state.v.clone());
        }
        last_model = Some(model);

        let frozen = schedule.fixed_lambda.is_some() || iter >= schedule.stop_iter;
        let converged = frozen
            && prev.is_some_and(|(p_obj, p_lambda)| {
                p_lambda == state.lambda
                    && ((obj - p_obj) / p_obj.abs().max(1e-12)).abs() < schedule.obj_tol
            });
        prev = Some((obj, state.lambda));
        if converged {
            break;
        }
        if !frozen {
            state.lambda += mu;
        }
    }

    let (chosen_iteration, model) = match best {
        Some((_, iter, model)) => (iter, model),
        None => (state.iter, last_model.expect("at least one iteration")),
    };
    Ok(Trajectory {
        report: TrainReport {
            concept: String::new(),
            model,
            schedule: schedule.clone(),
            regularizer: spec.clone(),
            iterations: snapshots,
            chosen_iteration,
            seeds: Seeds {
                learner: config.learner.rng_seed,
                dropout: spec.rng_seed,
            },
        },
        state,
        models,
        weights,
    })
}

/// Training variants compared throughout the benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainMode {
    /// One weighted fit on every sample with unit weights.
    Batch,
    /// Self-paced learning with the linear regularizer and no curriculum region.
    Spl,
    /// Self-paced learning in the curriculum region with the configured regularizer.
    Well,
}

impl TrainMode {
    pub const ALL: [TrainMode; 3] = [TrainMode::Batch, TrainMode::Spl, TrainMode::Well];

    pub fn name(self) -> &'static str {
        match self {
            TrainMode::Batch => "batch",
            TrainMode::Spl => "spl",
            TrainMode::Well => "well",
        }
    }
}

/// Trains one detector in the given mode.
pub fn train_mode(
    mode: TrainMode,
    features: &[&[f64]],
    labels: &[f64],
    region: &CurriculumRegion,
    config: &TrainConfig,
    validation: Option<&ValidationSet>,
) -> Result<TrainReport> {
    match mode {
        TrainMode::Batch => {
            let ones = vec![1.0; features.len()];
            let model = fit_weighted(features, labels, &ones, &config.learner)?;
            let losses = per_sample_loss(&model, features, labels)?;
            let validation_ap = validation
                .map(|v| v.average_precision(&model))
                .transpose()?;
            Ok(TrainReport {
                concept: String::new(),
                iterations: vec![IterationSnapshot {
                    iter: 1,
                    // every sample is admitted; MAX keeps the report valid JSON
                    lambda: f64::MAX,
                    objective: losses.iter().sum::<f64>()
                        + model.l2 * model.weights.iter().map(|w| w * w).sum::<f64>(),
                    selected: features.len(),
                    validation_ap,
                }],
                model,
                schedule: config.schedule.clone(),
                regularizer: config.regularizer.clone(),
                chosen_iteration: 1,
                seeds: Seeds {
                    learner: config.learner.rng_seed,
                    dropout: config.regularizer.rng_seed,
                },
            })
        }
        TrainMode::Spl => {
            let cfg = TrainConfig {
                regularizer: RegularizerSpec {
                    kind: RegularizerKind::Linear,
                    ..config.regularizer.clone()
                },
                ..config.clone()
            };
            let free = CurriculumRegion::unconstrained(features.len());
            train_well(features, labels, &free, &cfg, validation)
        }
        TrainMode::Well => train_well(features, labels, region, config, validation),
    }
}
