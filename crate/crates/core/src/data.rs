//! Dataset schema and JSONL persistence for webly-labeled samples.
//!
//! A dataset file holds one sample per line:
//!
//! ```text
//! {"id": "v1", "features": [0.1, 0.2], "text": {"title": "...", "description": "...", "tags": ["..."]},
//!  "asr": ["..."], "ocr": ["..."], "image_labels": {"dog": 0.8}, "gt": ["WalkingWithDog"]}
//! ```
//!
//! Missing modality keys are empty. `gt` is only ever read for evaluation; training code
//! goes through [`TrainingView`], which has no accessor for it.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TextMeta {
    pub title: String,
    pub description: String,
    pub tags: Vec<String>,
}

impl TextMeta {
    pub fn is_empty(&self) -> bool {
        self.title.is_empty() && self.description.is_empty() && self.tags.is_empty()
    }
}

/// Noisy web metadata attached to a sample, one entry per modality.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WebLabel {
    pub text: TextMeta,
    pub asr: Vec<String>,
    pub ocr: Vec<String>,
    /// Image classifier label to score in [0, 1], averaged to video level upstream.
    pub image_labels: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: String,
    pub features: Vec<f64>,
    pub web_label: WebLabel,
    pub gold_concepts: Option<BTreeSet<String>>,
}

/// A target concept and the words naming it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub id: String,
    pub words: Vec<String>,
}

const NAME_STOPWORDS: &[&str] = &[
    "a", "an", "and", "the", "of", "in", "on", "for", "to", "with",
];

impl Concept {
    pub fn new(id: impl Into<String>, words: Vec<String>) -> Result<Self> {
        let id = id.into();
        if words.is_empty() || words.iter().any(|w| w.is_empty()) {
            return Err(Error::invalid(format!(
                "concept '{id}' needs a non-empty list of name words"
            )));
        }
        Ok(Self { id, words })
    }

    /// Derives name words from an identifier such as `WalkingWithDog` or `playing_guitar`.
    pub fn from_id(id: &str) -> Self {
        let mut words = Vec::new();
        let mut cur = String::new();
        let mut prev_lower = false;
        for ch in id.chars() {
            if !ch.is_alphanumeric() {
                if !cur.is_empty() {
                    words.push(std::mem::take(&mut cur));
                }
                prev_lower = false;
                continue;
            }
            if ch.is_uppercase() && prev_lower && !cur.is_empty() {
                words.push(std::mem::take(&mut cur));
            }
            prev_lower = ch.is_lowercase() || ch.is_ascii_digit();
            cur.extend(ch.to_lowercase());
        }
        if !cur.is_empty() {
            words.push(cur);
        }
        let content: Vec<String> = words
            .iter()
            .filter(|w| !NAME_STOPWORDS.contains(&w.as_str()))
            .cloned()
            .collect();
        let words = if content.is_empty() { words } else { content };
        let words = if words.is_empty() {
            vec![id.to_lowercase()]
        } else {
            words
        };
        Self {
            id: id.to_string(),
            words,
        }
    }
}

/// Loads a concept declaration file: a JSON array of `{"id": str, "words": [str]}`.
pub fn load_concepts(path: &Path) -> Result<Vec<Concept>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let concepts: Vec<Concept> = serde_json::from_str(&text)?;
    for c in &concepts {
        Concept::new(c.id.clone(), c.words.clone())?;
    }
    Ok(concepts)
}

pub fn save_concepts(path: &Path, concepts: &[Concept]) -> Result<()> {
    let mut text = serde_json::to_string_pretty(concepts)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
    feature_dim: usize,
    concepts: Vec<Concept>,
}

impl Dataset {
    /// Validates and assembles a dataset. Concepts, when `None`, are the sorted union of
    /// gold labels with name words derived from each id.
    pub fn new(samples: Vec<Sample>, concepts: Option<Vec<Concept>>) -> Result<Self> {
        let first = samples.first().ok_or(Error::EmptyDataset)?;
        let feature_dim = first.features.len();
        Self::validate(&samples, feature_dim)?;
        let concepts = match concepts {
            Some(c) => {
                let declared: HashSet<&str> = c.iter().map(|c| c.id.as_str()).collect();
                for s in &samples {
                    for g in s.gold_concepts.iter().flatten() {
                        if !declared.contains(g.as_str()) {
                            return Err(Error::UnknownConcept {
                                id: s.id.clone(),
                                concept: g.clone(),
                            });
                        }
                    }
                }
                c
            }
            None => {
                let ids: BTreeSet<&String> = samples
                    .iter()
                    .flat_map(|s| s.gold_concepts.iter().flatten())
                    .collect();
                ids.into_iter().map(|id| Concept::from_id(id)).collect()
            }
        };
        Ok(Self {
            samples,
            feature_dim,
            concepts,
        })
    }

    fn validate(samples: &[Sample], dim: usize) -> Result<()> {
        let mut seen = HashSet::with_capacity(samples.len());
        for s in samples {
            if s.features.len() != dim {
                return Err(Error::FeatureDim {
                    id: s.id.clone(),
                    expected: dim,
                    found: s.features.len(),
                });
            }
            if !seen.insert(s.id.as_str()) {
                return Err(Error::DuplicateId(s.id.clone()));
            }
            if let Some((label, score)) = s
                .web_label
                .image_labels
                .iter()
                .find(|(_, v)| !(0.0..=1.0).contains(*v))
            {
                return Err(Error::invalid(format!(
                    "sample '{}': image label '{label}' score {score} outside [0, 1]",
                    s.id
                )));
            }
        }
        Ok(())
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn concept(&self, id: &str) -> Option<&Concept> {
        self.concepts.iter().find(|c| c.id == id)
    }

    /// Whether every sample carries a gold label set.
    pub fn has_gold(&self) -> bool {
        self.samples.iter().all(|s| s.gold_concepts.is_some())
    }

    /// Gold relevance of every sample for `concept`, or `None` if any sample lacks gold labels.
    pub fn gold_relevance(&self, concept: &str) -> Option<Vec<bool>> {
        self.samples
            .iter()
            .map(|s| s.gold_concepts.as_ref().map(|g| g.contains(concept)))
            .collect()
    }

    pub fn training_view(&self) -> TrainingView<'_> {
        TrainingView { dataset: self }
    }

    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for s in &self.samples {
            out.push_str(&serde_json::to_string(&SampleRecord::from(s))?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_jsonl()?.as_bytes())
            .map_err(|e| Error::io(path, e))
    }
}

/// Read-only view of a dataset with gold labels withheld.
#[derive(Debug, Clone, Copy)]
pub struct TrainingView<'a> {
    dataset: &'a Dataset,
}

impl<'a> TrainingView<'a> {
    pub fn len(&self) -> usize {
        self.dataset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dataset.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.dataset.feature_dim
    }

    pub fn id(&self, i: usize) -> &'a str {
        &self.dataset.samples[i].id
    }

    pub fn features(&self, i: usize) -> &'a [f64] {
        &self.dataset.samples[i].features
    }

    pub fn web_label(&self, i: usize) -> &'a WebLabel {
        &self.dataset.samples[i].web_label
    }

    pub fn concepts(&self) -> &'a [Concept] {
        &self.dataset.concepts
    }

    pub fn feature_rows(&self) -> Vec<&'a [f64]> {
        self.dataset
            .samples
            .iter()
            .map(|s| s.features.as_slice())
            .collect()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SampleRecord {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    features: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    feature_file: Option<PathBuf>,
    #[serde(default)]
    text: TextMeta,
    #[serde(default)]
    asr: Vec<String>,
    #[serde(default)]
    ocr: Vec<String>,
    #[serde(default)]
    image_labels: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gt: Option<Vec<String>>,
}

impl From<&Sample> for SampleRecord {
    fn from(s: &Sample) -> Self {
        Self {
            id: s.id.clone(),
            features: Some(s.features.clone()),
            feature_file: None,
            text: s.web_label.text.clone(),
            asr: s.web_label.asr.clone(),
            ocr: s.web_label.ocr.clone(),
            image_labels: s.web_label.image_labels.clone(),
            gt: s
                .gold_concepts
                .as_ref()
                .map(|g| g.iter().cloned().collect()),
        }
    }
}

fn read_feature_file(path: &Path, line: usize) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>().map_err(|e| Error::Parse {
                line,
                message: format!("feature file {}: {e}", path.display()),
            })
        })
        .collect()
}

/// Parses dataset JSONL text. `base_dir` resolves relative `feature_file` paths.
pub fn parse_samples(text: &str, base_dir: Option<&Path>) -> Result<Vec<Sample>> {
    let mut samples = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let rec: SampleRecord = serde_json::from_str(raw).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let features = match (rec.features, rec.feature_file) {
            (Some(f), _) => f,
            (None, Some(file)) => {
                let path = match base_dir {
                    Some(dir) if file.is_relative() => dir.join(file),
                    _ => file,
                };
                read_feature_file(&path, line)?
            }
            (None, None) => {
                return Err(Error::Parse {
                    line,
                    message: format!("sample '{}' has neither features nor feature_file", rec.id),
                })
            }
        };
        if features.iter().any(|x| !x.is_finite()) {
            return Err(Error::Parse {
                line,
                message: format!("sample '{}' has non-finite features", rec.id),
            });
        }
        samples.push(Sample {
            id: rec.id,
            features,
            web_label: WebLabel {
                text: rec.text,
                asr: rec.asr,
                ocr: rec.ocr,
                image_labels: rec.image_labels,
            },
            gold_concepts: rec.gt.map(|g| g.into_iter().collect()),
        });
    }
    Ok(samples)
}

/// Loads a dataset; concepts are inferred from the gold labels present in the file.
pub fn load_dataset(path: &Path, expected_dim: Option<usize>) -> Result<Dataset> {
    load_dataset_with_concepts(path, expected_dim, None)
}

pub fn load_dataset_with_concepts(
    path: &Path,
    expected_dim: Option<usize>,
    concepts: Option<Vec<Concept>>,
) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let samples = parse_samples(&text, path.parent())?;
    if let (Some(dim), Some(first)) = (expected_dim, samples.first()) {
        if first.features.len() != dim {
            return Err(Error::FeatureDim {
                id: first.id.clone(),
                expected: dim,
                found: first.features.len(),
            });
        }
    }
    Dataset::new(samples, concepts)
}

/// Noisy binary labels: +1 where the curriculum score is strictly positive, -1 otherwise.
pub fn infer_binary_labels(view: &TrainingView<'_>, scores: &[f64]) -> Result<Vec<f64>> {
    if scores.len() != view.len() {
        return Err(Error::LengthMismatch {
            expected: view.len(),
            found: scores.len(),
        });
    }
    Ok(labels_from_scores(scores))
}

pub(crate) fn labels_from_scores(scores: &[f64]) -> Vec<f64> {
    scores
        .iter()
        .map(|&s| if s > 0.0 { 1.0 } else { -1.0 })
        .collect()
}
