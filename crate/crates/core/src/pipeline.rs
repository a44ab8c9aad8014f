//! Per-concept training glue shared by the CLI and the benchmark harness.

use crate::data::{infer_binary_labels, Dataset, TrainingView};
use crate::error::{Error, Result};
use crate::spl::{train_mode, TrainConfig, TrainMode, TrainReport, ValidationSet};
use crate::text::{build_region, CurriculumRegion, CurriculumScores};

/// Stable 64-bit seed for `key` under a run seed (FNV-1a over both).
pub fn derive_seed(seed: u64, key: &str) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    seed.to_le_bytes()
        .iter()
        .chain(key.as_bytes())
        .fold(OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(PRIME))
}

/// Copy of `config` with learner and dropout streams keyed by run seed and concept.
pub fn seeded_config(config: &TrainConfig, seed: u64, concept: &str) -> TrainConfig {
    let mut cfg = config.clone();
    cfg.learner.rng_seed = derive_seed(seed, &format!("{concept}/learner"));
    cfg.regularizer.rng_seed = derive_seed(seed, &format!("{concept}/dropout"));
    cfg
}

/// Noisy labels and curriculum region of one concept on the training samples.
pub fn concept_problem(
    view: &TrainingView<'_>,
    scores: &CurriculumScores,
    concept: &str,
    u_low: f64,
) -> Result<(Vec<f64>, CurriculumRegion)> {
    let fused = scores.aligned_to(view, concept)?;
    if fused.iter().all(|&s| s <= 0.0) {
        return Err(Error::invalid(format!(
            "curriculum has no confident sample for concept '{concept}'"
        )));
    }
    let labels = infer_binary_labels(view, &fused)?;
    let region = build_region(&fused, u_low)?;
    Ok((labels, region))
}

impl ValidationSet {
    /// Gold-labeled validation samples for one concept.
    pub fn from_dataset(dataset: &Dataset, concept: &str) -> Result<Self> {
        let relevant = dataset.gold_relevance(concept).ok_or_else(|| {
            Error::invalid(format!("validation set lacks gold labels for '{concept}'"))
        })?;
        Ok(Self {
            features: dataset
                .samples()
                .iter()
                .map(|s| s.features.clone())
                .collect(),
            relevant,
        })
    }
}

/// Trains the detector of `concept` from noisy curriculum labels.
pub fn train_concept(
    view: &TrainingView<'_>,
    scores: &CurriculumScores,
    concept: &str,
    mode: TrainMode,
    config: &TrainConfig,
    seed: u64,
    validation: Option<&ValidationSet>,
) -> Result<TrainReport> {
    let (labels, region) = concept_problem(view, scores, concept, config.u_low)?;
    let cfg = seeded_config(config, seed, concept);
    let rows = view.feature_rows();
    let mut report = train_mode(mode, &rows, &labels, &region, &cfg, validation)?;
    report.concept = concept.to_string();
    Ok(report)
}
