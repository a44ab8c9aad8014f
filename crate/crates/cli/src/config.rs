use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use well_core::lda::LdaConfig;
use well_core::learner::FitConfig;
use well_core::spl::{AgeSchedule, RegularizerSpec, TrainConfig, TrainMode};
use well_core::synth::SynthConfig;
use well_core::text::MatchConfig;

use crate::CliError;

/// File locations; command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub dataset: Option<PathBuf>,
    pub curriculum: Option<PathBuf>,
    pub concepts: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub topics: Option<PathBuf>,
    pub validation: Option<PathBuf>,
    pub models: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

/// Axis values, methods and seeds of the benchmark sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub precisions: Vec<f64>,
    pub sizes: Vec<usize>,
    pub methods: Vec<TrainMode>,
    pub seeds: Vec<u64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            precisions: vec![0.2, 0.4, 0.6, 0.8],
            sizes: vec![25, 50, 100, 200],
            methods: TrainMode::ALL.to_vec(),
            seeds: vec![0, 1, 2, 3, 4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub jobs: Option<usize>,
    pub mode: TrainMode,
    pub paths: Paths,
    #[serde(rename = "match")]
    pub matching: MatchConfig,
    pub lda: LdaConfig,
    pub learner: FitConfig,
    pub regularizer: RegularizerSpec,
    pub schedule: AgeSchedule,
    /// Latent weight bound outside the confident group.
    pub u_low: f64,
    pub synth: SynthConfig,
    pub sweep: SweepConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            jobs: None,
            mode: TrainMode::Well,
            paths: Paths::default(),
            matching: MatchConfig::default(),
            lda: LdaConfig::default(),
            learner: FitConfig::default(),
            regularizer: RegularizerSpec::default(),
            schedule: AgeSchedule::default(),
            u_low: TrainConfig::default().u_low,
            synth: SynthConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learner: self.learner.clone(),
            regularizer: self.regularizer.clone(),
            schedule: self.schedule.clone(),
            u_low: self.u_low,
        }
    }
}

/// Every key of the run configuration with its default value.
pub fn schema() -> String {
    let mut text = serde_json::to_string_pretty(&RunConfig::default()).expect("serializable");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let parsed: RunConfig = serde_json::from_str(&schema()).unwrap();
        assert_eq!(parsed, RunConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"sede": 1}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"learner": {"l3": 1}}"#).is_err());
        let partial: RunConfig = serde_json::from_str(r#"{"seed": 4}"#).unwrap();
        assert_eq!(partial.seed, 4);
        assert_eq!(partial.u_low, 0.5);
    }
}
