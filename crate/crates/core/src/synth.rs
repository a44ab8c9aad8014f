//! Synthetic noisy-label benchmark and the sweep harness built on it.
//!
//! Each concept owns a Gaussian cluster at distance `separation` from a shared background
//! cluster. Web metadata mentions a concept's name word exactly for the members of its
//! confident group, which holds a fixed number of true positives plus enough other samples
//! to reach the requested curriculum precision. Recall is therefore the same for every
//! precision setting.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Concept, Dataset, Sample, TextMeta, WebLabel};
use crate::error::{Error, Result};
use crate::lda::LdaConfig;
use crate::metrics::{mean_ap, rank_and_score};
use crate::pipeline::{concept_problem, derive_seed, seeded_config};
use crate::spl::{train_mode, TrainConfig, TrainMode, ValidationSet};
use crate::text::{build_curriculum, CurriculumScores, MatchConfig, MatchMethod};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub concepts: usize,
    /// Training positives per concept.
    pub n_pos: usize,
    /// Training background samples, negative for every concept.
    pub n_neg: usize,
    pub dim: usize,
    /// Distance between a concept mean and the background mean, in within-class std units.
    pub separation: f64,
    pub curriculum_precision: f64,
    /// Share of a concept's positives placed in its confident group.
    pub recall: f64,
    /// Confident group size; when set, the true-positive count is `round(p * size)`
    /// and `recall` is ignored.
    pub group_size: Option<usize>,
    /// Probability of flipping each inferred training label.
    pub label_noise: f64,
    pub test_pos: usize,
    pub test_neg: usize,
    /// Size of the gold-labeled validation split relative to the training split.
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            concepts: 10,
            n_pos: 100,
            n_neg: 1000,
            dim: 20,
            separation: 2.5,
            curriculum_precision: 0.5,
            recall: 0.6,
            group_size: None,
            label_noise: 0.0,
            test_pos: 50,
            test_neg: 500,
            validation_fraction: 0.1,
            seed: 0,
        }
    }
}

impl SynthConfig {
    /// Confident group size and its true-positive count.
    pub fn group_composition(&self) -> Result<(usize, usize)> {
        let p = self.curriculum_precision;
        let (size, tp) = match self.group_size {
            Some(size) => (size, (p * size as f64).round() as usize),
            None => {
                let tp = (self.recall * self.n_pos as f64).round() as usize;
                (((tp as f64) / p).round() as usize, tp)
            }
        };
        if tp < 1 {
            return Err(Error::invalid(format!(
                "confident group of {size} at precision {p} holds no true positive"
            )));
        }
        if tp > self.n_pos {
            return Err(Error::invalid(
                "confident group needs more positives than exist",
            ));
        }
        let others = self.train_len() - self.n_pos;
        if size - tp > others {
            return Err(Error::invalid(format!(
                "confident group needs {} false positives but only {others} samples are available",
                size - tp
            )));
        }
        Ok((size, tp))
    }

    fn train_len(&self) -> usize {
        self.concepts * self.n_pos + self.n_neg
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.curriculum_precision > 0.0 && self.curriculum_precision <= 1.0) {
            return Err(Error::invalid("curriculum precision must lie in (0, 1]"));
        }
        if self.concepts == 0 || self.n_pos == 0 || self.n_neg == 0 || self.dim == 0 {
            return Err(Error::invalid(
                "concept, sample and dimension counts must be >= 1",
            ));
        }
        if self.test_pos == 0 {
            return Err(Error::invalid(
                "test split needs at least one positive per concept",
            ));
        }
        if !(self.separation > 0.0) {
            return Err(Error::invalid("separation must be positive"));
        }
        if !(self.recall > 0.0 && self.recall <= 1.0) {
            return Err(Error::invalid("recall must lie in (0, 1]"));
        }
        if !(0.0..0.5).contains(&self.label_noise) {
            return Err(Error::invalid("label noise must lie in [0, 0.5)"));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(Error::invalid("validation fraction must lie in [0, 1)"));
        }
        self.group_composition().map(|_| ())
    }

    pub fn concept_ids(&self) -> Vec<String> {
        (0..self.concepts)
            .map(|c| format!("concept{c:02}"))
            .collect()
    }
}

/// A generated benchmark instance.
#[derive(Debug, Clone)]
pub struct SynthData {
    pub train: Dataset,
    pub validation: Option<Dataset>,
    pub test: Dataset,
    pub curriculum: CurriculumScores,
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R, mean: &[f64]) -> Vec<f64> {
    mean.iter()
        .map(|m| m + rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Orthonormal directions by Gram-Schmidt while `count <= dim`, random unit vectors beyond.
fn concept_means(count: usize, dim: usize, separation: f64, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(count);
    while basis.len() < count {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if basis.len() < dim {
            for b in &basis {
                let d: f64 = v.iter().zip(b).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(b).for_each(|(a, b)| *a -= d * b);
            }
        }
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 1e-8 {
            basis.push(v.into_iter().map(|a| a / n).collect());
        }
    }
    basis
        .into_iter()
        .map(|b| b.into_iter().map(|a| a * separation).collect())
        .collect()
}

/// Draws `per_concept` positives for every concept then `background` negatives.
fn draw_split(
    prefix: &str,
    means: &[Vec<f64>],
    ids: &[String],
    per_concept: usize,
    background: usize,
    rng: &mut impl Rng,
) -> Vec<Sample> {
    let dim = means[0].len();
    let zero = vec![0.0; dim];
    let mut out = Vec::with_capacity(means.len() * per_concept + background);
    let mut push = |mean: &[f64], gold: BTreeSet<String>, rng: &mut dyn rand::RngCore| {
        let id = format!("{prefix}{:06}", out.len());
        out.push(Sample {
            id,
            features: gaussian(rng, mean),
            web_label: WebLabel::default(),
            gold_concepts: Some(gold),
        });
    };
    for (mean, cid) in means.iter().zip(ids) {
        for _ in 0..per_concept {
            push(mean, BTreeSet::from([cid.clone()]), rng);
        }
    }
    for _ in 0..background {
        push(&zero, BTreeSet::new(), rng);
    }
    out
}

/// Generates training, validation and test splits plus exact-match curriculum scores.
///
/// Independent random streams drive the cluster means, each split and the group draws, so
/// the test split depends only on the seed and the cluster geometry.
pub fn generate(config: &SynthConfig) -> Result<SynthData> {
    config.validate()?;
    let (group_size, tp) = config.group_composition()?;
    let stream = |key: &str| ChaCha8Rng::seed_from_u64(derive_seed(config.seed, key));
    let ids = config.concept_ids();
    let concepts = ids
        .iter()
        .map(|id| Concept::new(id.clone(), vec![id.clone()]))
        .collect::<Result<Vec<_>>>()?;
    let means = concept_means(
        config.concepts,
        config.dim,
        config.separation,
        &mut stream("means"),
    );

    let mut train = draw_split(
        "tr",
        &means,
        &ids,
        config.n_pos,
        config.n_neg,
        &mut stream("train"),
    );
    let mut groups = stream("groups");
    let mut mentions: Vec<Vec<&str>> = vec![Vec::new(); train.len()];
    for (c, id) in ids.iter().enumerate() {
        let own = c * config.n_pos..(c + 1) * config.n_pos;
        for k in sample_indices(&mut groups, config.n_pos, tp) {
            mentions[own.start + k].push(id);
        }
        let others: Vec<usize> = (0..train.len()).filter(|i| !own.contains(i)).collect();
        for k in sample_indices(&mut groups, others.len(), group_size - tp) {
            mentions[others[k]].push(id);
        }
    }
    for (sample, words) in train.iter_mut().zip(&mentions) {
        let mut title: Vec<&str> = words.clone();
        title.push("clip");
        sample.web_label.text = TextMeta {
            title: title.join(" "),
            ..TextMeta::default()
        };
    }

    let validation = if config.validation_fraction > 0.0 {
        let frac = config.validation_fraction;
        let per = ((config.n_pos as f64) * frac).round().max(1.0) as usize;
        let bg = ((config.n_neg as f64) * frac).round() as usize;
        let samples = draw_split("va", &means, &ids, per, bg, &mut stream("validation"));
        Some(Dataset::new(samples, Some(concepts.clone()))?)
    } else {
        None
    };
    let test = draw_split(
        "te",
        &means,
        &ids,
        config.test_pos,
        config.test_neg,
        &mut stream("test"),
    );
    let test = Dataset::new(test, Some(concepts.clone()))?;
    let train = Dataset::new(train, Some(concepts))?;
    let match_config = MatchConfig {
        method: MatchMethod::Exact,
        ..MatchConfig::default()
    };
    let curriculum = build_curriculum(
        &train.training_view(),
        &match_config,
        &LdaConfig::default(),
        None,
        None,
    )?;
    Ok(SynthData {
        train,
        validation,
        test,
        curriculum,
    })
}

/// Per-concept detectors for one method; returns test mAP.
pub fn evaluate_method(
    data: &SynthData,
    mode: TrainMode,
    train: &TrainConfig,
    label_noise: f64,
    seed: u64,
) -> Result<f64> {
    let view = data.train.training_view();
    let rows = view.feature_rows();
    let aps = view
        .concepts()
        .par_iter()
        .map(|concept| {
            let id = concept.id.as_str();
            let (mut labels, region) = concept_problem(&view, &data.curriculum, id, train.u_low)?;
            if label_noise > 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("{id}/noise")));
                for y in labels.iter_mut() {
                    if rng.random_bool(label_noise) {
                        *y = -*y;
                    }
                }
            }
            let validation = data
                .validation
                .as_ref()
                .map(|v| ValidationSet::from_dataset(v, id))
                .transpose()?;
            let cfg = seeded_config(train, seed, id);
            let report = train_mode(mode, &rows, &labels, &region, &cfg, validation.as_ref())?;
            Ok(rank_and_score(&report.model, &data.test, id)?.metrics().ap)
        })
        .collect::<Result<Vec<f64>>>()?;
    mean_ap(&aps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Curriculum precision `p`.
    Precision,
    /// Training positives per concept; background grows in proportion.
    Size,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Precision => "precision",
            SweepAxis::Size => "size",
        }
    }

    /// Benchmark configuration at one axis value.
    pub fn apply(self, base: &SynthConfig, value: f64, seed: u64) -> Result<SynthConfig> {
        let mut cfg = base.clone();
        cfg.seed = seed;
        match self {
            SweepAxis::Precision => cfg.curriculum_precision = value,
            SweepAxis::Size => {
                if !(value >= 1.0) || value.fract() != 0.0 {
                    return Err(Error::invalid(format!(
                        "size {value} is not a positive integer"
                    )));
                }
                let ratio = base.n_neg as f64 / base.n_pos as f64;
                cfg.n_pos = value as usize;
                cfg.n_neg = ((value * ratio).round() as usize).max(1);
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub methods: Vec<TrainMode>,
    pub seeds: Vec<u64>,
    pub base: SynthConfig,
    pub train: TrainConfig,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.seeds.len() < 3 {
            return Err(Error::invalid("a sweep needs at least 3 seeds"));
        }
        if self.values.is_empty() || self.methods.is_empty() {
            return Err(Error::invalid(
                "a sweep needs at least one axis value and method",
            ));
        }
        let distinct: BTreeSet<u64> = self.seeds.iter().copied().collect();
        if distinct.len() != self.seeds.len() {
            return Err(Error::invalid("sweep seeds must be distinct"));
        }
        Ok(())
    }

    /// Fingerprint of everything a cell's outcome depends on.
    fn cell_key(&self, value: f64, seed: u64) -> Result<String> {
        let doc = serde_json::json!({
            "axis": self.axis,
            "value": value,
            "seed": seed,
            "methods": self.methods,
            "base": self.base,
            "train": self.train,
        });
        Ok(format!(
            "{:016x}",
            derive_seed(0, &serde_json::to_string(&doc)?)
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub method: TrainMode,
    pub axis_value: f64,
    pub seed: u64,
    pub map: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub methods: Vec<TrainMode>,
    pub seeds: Vec<u64>,
    /// Ordered by method, then axis value, then seed.
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    pub fn cell(&self, method: TrainMode, value: f64, seed: u64) -> Option<&SweepCell> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.axis_value == value && c.seed == seed)
    }

    pub fn map(&self, method: TrainMode, value: f64, seed: u64) -> Option<f64> {
        self.cell(method, value, seed).and_then(|c| c.map)
    }

    fn column(&self, method: TrainMode, value: f64) -> Vec<f64> {
        self.cells
            .iter()
            .filter(|c| c.method == method && c.axis_value == value)
            .filter_map(|c| c.map)
            .collect()
    }

    /// Mean mAP over the seeds whose cell succeeded.
    pub fn mean(&self, method: TrainMode, value: f64) -> Option<f64> {
        let col = self.column(method, value);
        mean_ap(&col).ok()
    }

    /// Standard error of the mean over seeds; 0 with a single value.
    pub fn stderr(&self, method: TrainMode, value: f64) -> Option<f64> {
        let col = self.column(method, value);
        let mean = mean_ap(&col).ok()?;
        if col.len() < 2 {
            return Some(0.0);
        }
        let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (col.len() - 1) as f64;
        Some((var / col.len() as f64).sqrt())
    }

    pub fn failures(&self) -> impl Iterator<Item = &SweepCell> {
        self.cells.iter().filter(|c| c.error.is_some())
    }

    /// `method,axis_value,seed,map` rows; failed cells leave `map` empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,axis_value,seed,map\n");
        for c in &self.cells {
            let map = c.map.map(|m| format!("{m:.6}")).unwrap_or_default();
            writeln!(out, "{},{},{},{map}", c.method.name(), c.axis_value, c.seed).unwrap();
        }
        out
    }

    /// Plot data: one row per (method, axis value) with the mean and standard error.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("method\t{}\tmean\tstderr\n", self.axis.name());
        for &m in &self.methods {
            for &v in &self.values {
                let fmt = |x: Option<f64>| x.map(|x| format!("{x:.6}")).unwrap_or_default();
                writeln!(
                    out,
                    "{}\t{v}\t{}\t{}",
                    m.name(),
                    fmt(self.mean(m, v)),
                    fmt(self.stderr(m, v))
                )
                .unwrap();
            }
        }
        out
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CellFile {
    key: String,
    cells: Vec<SweepCell>,
}

fn cell_path(dir: &Path, axis: SweepAxis, value: f64, seed: u64) -> PathBuf {
    dir.join(format!("cell_{}_{value}_{seed}.json", axis.name()))
}

fn run_cell(spec: &SweepSpec, value: f64, seed: u64) -> Vec<SweepCell> {
    let make = |method, outcome: Result<f64>| match outcome {
        Ok(map) => SweepCell {
            method,
            axis_value: value,
            seed,
            map: Some(map),
            error: None,
        },
        Err(e) => {
            log::warn!("{} cell {value} seed {seed} failed: {e}", method.name());
            SweepCell {
                method,
                axis_value: value,
                seed,
                map: None,
                error: Some(e.to_string()),
            }
        }
    };
    let data = spec
        .axis
        .apply(&spec.base, value, seed)
        .and_then(|cfg| generate(&cfg).map(|d| (d, cfg.label_noise)));
    match data {
        Ok((data, noise)) => spec
            .methods
            .par_iter()
            .map(|&m| make(m, evaluate_method(&data, m, &spec.train, noise, seed)))
            .collect(),
        Err(e) => spec
            .methods
            .iter()
            .map(|&m| make(m, Err(Error::invalid(e.to_string()))))
            .collect(),
    }
}

fn load_cell(path: &Path, key: &str) -> Option<Vec<SweepCell>> {
    let text = std::fs::read_to_string(path).ok()?;
    let file: CellFile = serde_json::from_str(&text).ok()?;
    (file.key == key).then_some(file.cells)
}

fn store_cell(path: &Path, key: &str, cells: &[SweepCell]) -> Result<()> {
    let file = CellFile {
        key: key.to_string(),
        cells: cells.to_vec(),
    };
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, serde_json::to_string_pretty(&file)?).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Runs every (axis value, seed) cell. With `cell_dir`, finished cells are stored there and
/// reused by later runs with the same specification.
pub fn run_sweep(spec: &SweepSpec, cell_dir: Option<&Path>) -> Result<SweepResult> {
    spec.validate()?;
    if let Some(dir) = cell_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let jobs: Vec<(f64, u64)> = spec
        .values
        .iter()
        .flat_map(|&v| spec.seeds.iter().map(move |&s| (v, s)))
        .collect();
    let done = jobs
        .par_iter()
        .map(|&(value, seed)| {
            let key = spec.cell_key(value, seed)?;
            let path = cell_dir.map(|d| cell_path(d, spec.axis, value, seed));
            if let Some(cells) = path.as_deref().and_then(|p| load_cell(p, &key)) {
                log::info!("reusing finished cell {value} seed {seed}");
                return Ok(cells);
            }
            let cells = run_cell(spec, value, seed);
            if let Some(p) = &path {
                store_cell(p, &key, &cells)?;
            }
            Ok(cells)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut by_key: BTreeMap<(usize, usize, usize), SweepCell> = BTreeMap::new();
    for cell in done.into_iter().flatten() {
        let m = spec.methods.iter().position(|&m| m == cell.method);
        let v = spec.values.iter().position(|&v| v == cell.axis_value);
        let s = spec.seeds.iter().position(|&s| s == cell.seed);
        if let (Some(m), Some(v), Some(s)) = (m, v, s) {
            by_key.insert((m, v, s), cell);
        }
    }
    Ok(SweepResult {
        axis: spec.axis,
        values: spec.values.clone(),
        methods: spec.methods.clone(),
        seeds: spec.seeds.clone(),
        cells: by_key.into_values().collect(),
    })
}

/// Curriculum-precision sweep.
pub fn run_noise_sweep(
    p_values: &[f64],
    methods: &[TrainMode],
    seeds: &[u64],
    base: &SynthConfig,
    train: &TrainConfig,
    cell_dir: Option<&Path>,
) -> Result<SweepResult> {
    let spec = SweepSpec {
        axis: SweepAxis::Precision,
        values: p_values.to_vec(),
        methods: methods.to_vec(),
        seeds: seeds.to_vec(),
        base: base.clone(),
        train: train.clone(),
    };
    run_sweep(&spec, cell_dir)
}

/// Training-size sweep over positives per concept.
pub fn run_size_sweep(
    sizes: &[usize],
    methods: &[TrainMode],
    seeds: &[u64],
    base: &SynthConfig,
    train: &TrainConfig,
    cell_dir: Option<&Path>,
) -> Result<SweepResult> {
    let spec = SweepSpec {
        axis: SweepAxis::Size,
        values: sizes.iter().map(|&s| s as f64).collect(),
        methods: methods.to_vec(),
        seeds: seeds.to_vec(),
        base: base.clone(),
        train: train.clone(),
    };
    run_sweep(&spec, cell_dir)
}
