//! Per-concept curriculum scores from web metadata and the two-group curriculum region.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Concept, TrainingView, WebLabel};
use crate::error::{Error, Result};
use crate::lda::{fit_lda, LdaConfig, LdaModel};
use crate::text::embedding::EmbeddingTable;
use crate::text::matching::{
    embedding_token_score, match_score_exact, top_topic_words, topic_token_score, Bag,
};
use crate::text::tokenize::{tokenize, tokenize_all};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMethod {
    Exact,
    Stem,
    Embedding,
    LatentTopic,
    LtWe,
    /// LT+WE applied to every modality and fused with the modality weights.
    LtWeMultimodal,
}

impl MatchMethod {
    pub fn needs_embeddings(self) -> bool {
        matches!(self, Self::Embedding | Self::LtWe | Self::LtWeMultimodal)
    }

    pub fn needs_topics(self) -> bool {
        matches!(self, Self::LatentTopic | Self::LtWe | Self::LtWeMultimodal)
    }

    pub fn is_multimodal(self) -> bool {
        self == Self::LtWeMultimodal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModalityWeights {
    pub text: f64,
    pub asr: f64,
    pub image: f64,
    pub ocr: f64,
}

impl Default for ModalityWeights {
    fn default() -> Self {
        Self {
            text: 1.0,
            asr: 0.5,
            image: 0.5,
            ocr: 0.05,
        }
    }
}

impl ModalityWeights {
    pub fn text_only() -> Self {
        Self {
            text: 1.0,
            asr: 0.0,
            image: 0.0,
            ocr: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let w = [self.text, self.asr, self.image, self.ocr];
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::invalid(
                "modality weights must be finite and non-negative",
            ));
        }
        if w.iter().all(|&x| x == 0.0) {
            return Err(Error::invalid(
                "at least one modality weight must be positive",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ModalityScores {
    pub text: f64,
    pub asr: f64,
    pub image: f64,
    pub ocr: f64,
}

/// Weighted sum of per-modality scores.
pub fn fuse_modalities(scores: &ModalityScores, weights: &ModalityWeights) -> Result<f64> {
    let w = [weights.text, weights.asr, weights.image, weights.ocr];
    if w.iter().any(|x| *x < 0.0 || !x.is_finite()) {
        return Err(Error::invalid("negative modality weight"));
    }
    let s = [scores.text, scores.asr, scores.image, scores.ocr];
    if s.iter().any(|x| *x < 0.0) {
        return Err(Error::invalid("negative modality score"));
    }
    Ok(w.iter().zip(&s).map(|(a, b)| a * b).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchConfig {
    pub method: MatchMethod,
    pub embedding_threshold: f64,
    /// Used by the multimodal method; single-modality methods score text only.
    pub modality_weights: ModalityWeights,
    /// Image labels below this classifier score are ignored.
    pub image_min_score: f64,
    /// Divide each modality's scores by their maximum over samples before fusing.
    pub normalize_modalities: bool,
    /// Topic words used by LT+WE matching.
    pub top_n: usize,
    /// Latent-topic method: proportions below this share score zero.
    pub topic_min_share: f64,
    /// Fit the topic model on text metadata only instead of all modalities.
    pub lda_text_only: bool,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            method: MatchMethod::LtWeMultimodal,
            embedding_threshold: 0.6,
            modality_weights: ModalityWeights::default(),
            image_min_score: 0.1,
            normalize_modalities: false,
            top_n: 10,
            topic_min_share: 0.3,
            lda_text_only: false,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<()> {
        self.modality_weights.validate()?;
        if !(0.0..=1.0).contains(&self.embedding_threshold) {
            return Err(Error::invalid("embedding_threshold must lie in [0, 1]"));
        }
        if self.top_n == 0 {
            return Err(Error::invalid("top_n must be at least 1"));
        }
        Ok(())
    }

    fn effective_weights(&self) -> ModalityWeights {
        if self.method.is_multimodal() {
            self.modality_weights
        } else {
            ModalityWeights::text_only()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    Confident,
    Other,
}

/// Box-shaped curriculum region: `0 <= v_i <= upper_bounds[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurriculumRegion {
    pub upper_bounds: Vec<f64>,
    pub groups: Vec<Group>,
}

impl CurriculumRegion {
    /// The unit box `[0, 1]^n`, i.e. no curriculum.
    pub fn unconstrained(n: usize) -> Self {
        Self {
            upper_bounds: vec![1.0; n],
            groups: vec![Group::Confident; n],
        }
    }

    pub fn len(&self) -> usize {
        self.upper_bounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.upper_bounds.is_empty()
    }

    pub fn confident_indices(&self) -> Vec<usize> {
        self.groups
            .iter()
            .enumerate()
            .filter(|(_, g)| **g == Group::Confident)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            upper_bounds: indices.iter().map(|&i| self.upper_bounds[i]).collect(),
            groups: indices.iter().map(|&i| self.groups[i]).collect(),
        }
    }
}

/// Samples with a positive score form the confident group (bound 1); the rest get `u_low`.
pub fn build_region(scores: &[f64], u_low: f64) -> Result<CurriculumRegion> {
    if scores.is_empty() {
        return Err(Error::invalid("curriculum region over zero samples"));
    }
    if !(u_low > 0.0 && u_low < 1.0) {
        return Err(Error::invalid(format!("u_low = {u_low} is outside (0, 1)")));
    }
    let groups: Vec<Group> = scores
        .iter()
        .map(|&s| {
            if s > 0.0 {
                Group::Confident
            } else {
                Group::Other
            }
        })
        .collect();
    let upper_bounds = groups
        .iter()
        .map(|g| match g {
            Group::Confident => 1.0,
            Group::Other => u_low,
        })
        .collect();
    Ok(CurriculumRegion {
        upper_bounds,
        groups,
    })
}

/// Per-modality token bags of one sample.
#[derive(Debug, Clone, Default)]
pub struct ModalityBags {
    pub text: Bag,
    pub asr: Bag,
    pub image: Bag,
    pub ocr: Bag,
}

impl ModalityBags {
    pub fn from_web_label(label: &WebLabel, image_min_score: f64) -> Self {
        let t = &label.text;
        let text = tokenize_all(
            [t.title.as_str(), t.description.as_str()]
                .into_iter()
                .chain(t.tags.iter().map(String::as_str)),
        );
        let image = label
            .image_labels
            .iter()
            .filter(|(_, &s)| s >= image_min_score)
            .flat_map(|(l, &s)| tokenize(l).into_iter().map(move |tok| (tok, s)))
            .collect();
        Self {
            text: Bag::from_tokens(text),
            asr: Bag::from_tokens(tokenize_all(label.asr.iter().map(String::as_str))),
            image: Bag::weighted(image),
            ocr: Bag::from_tokens(tokenize_all(label.ocr.iter().map(String::as_str))),
        }
    }

    fn all(&self) -> [&Bag; 4] {
        [&self.text, &self.asr, &self.image, &self.ocr]
    }

    /// LDA document for this sample.
    pub fn document(&self, text_only: bool) -> Vec<String> {
        if text_only {
            return self.text.tokens().to_vec();
        }
        self.all()
            .iter()
            .flat_map(|b| b.tokens().iter().cloned())
            .collect()
    }
}

/// Score of every (concept, sample) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CurriculumScores {
    pub sample_ids: Vec<String>,
    pub concepts: Vec<String>,
    /// `modality[c][i]` for concept `c` and sample `i`.
    pub modality: Vec<Vec<ModalityScores>>,
    pub fused: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CurriculumRecord {
    id: String,
    concept: String,
    score: f64,
    group: Group,
    modality_scores: ModalityScores,
}

impl CurriculumScores {
    pub fn concept_index(&self, concept: &str) -> Option<usize> {
        self.concepts.iter().position(|c| c == concept)
    }

    pub fn fused_for(&self, concept: &str) -> Option<&[f64]> {
        self.concept_index(concept)
            .map(|c| self.fused[c].as_slice())
    }

    /// Fraction of samples in the confident group, per concept.
    pub fn coverage(&self) -> Vec<(String, f64)> {
        self.concepts
            .iter()
            .zip(&self.fused)
            .map(|(c, f)| {
                let pos = f.iter().filter(|&&s| s > 0.0).count();
                (c.clone(), pos as f64 / f.len().max(1) as f64)
            })
            .collect()
    }

    /// Aligns scores to `view`'s sample order; samples absent from the file score zero.
    pub fn aligned_to(&self, view: &TrainingView<'_>, concept: &str) -> Result<Vec<f64>> {
        let c = self
            .concept_index(concept)
            .ok_or_else(|| Error::invalid(format!("no curriculum for concept '{concept}'")))?;
        let pos: HashMap<&str, usize> = self
            .sample_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        Ok((0..view.len())
            .map(|i| pos.get(view.id(i)).map_or(0.0, |&j| self.fused[c][j]))
            .collect())
    }

    /// Concept-major JSONL rows.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for (c, concept) in self.concepts.iter().enumerate() {
            for (i, id) in self.sample_ids.iter().enumerate() {
                let score = self.fused[c][i];
                let rec = CurriculumRecord {
                    id: id.clone(),
                    concept: concept.clone(),
                    score,
                    group: if score > 0.0 {
                        Group::Confident
                    } else {
                        Group::Other
                    },
                    modality_scores: self.modality[c][i],
                };
                out.push_str(&serde_json::to_string(&rec)?);
                out.push('\n');
            }
        }
        Ok(out)
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut sample_ids: Vec<String> = Vec::new();
        let mut sample_pos: HashMap<String, usize> = HashMap::new();
        let mut concepts: Vec<String> = Vec::new();
        let mut entries: BTreeMap<(usize, usize), (f64, ModalityScores)> = BTreeMap::new();
        let mut concept_pos: HashMap<String, usize> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            if raw.trim().is_empty() {
                continue;
            }
            let rec: CurriculumRecord = serde_json::from_str(raw).map_err(|e| Error::Parse {
                line: idx + 1,
                message: e.to_string(),
            })?;
            if !(rec.score >= 0.0) {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("negative curriculum score {}", rec.score),
                });
            }
            let next_c = concepts.len();
            let c = *concept_pos.entry(rec.concept.clone()).or_insert_with(|| {
                concepts.push(rec.concept.clone());
                next_c
            });
            let next_s = sample_ids.len();
            let s = *sample_pos.entry(rec.id.clone()).or_insert_with(|| {
                sample_ids.push(rec.id.clone());
                next_s
            });
            entries.insert((c, s), (rec.score, rec.modality_scores));
        }
        let n = sample_ids.len();
        let mut fused = vec![vec![0.0; n]; concepts.len()];
        let mut modality = vec![vec![ModalityScores::default(); n]; concepts.len()];
        for ((c, s), (score, m)) in entries {
            fused[c][s] = score;
            modality[c][s] = m;
        }
        Ok(Self {
            sample_ids,
            concepts,
            modality,
            fused,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_jsonl()?.as_bytes())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_jsonl(&text)
    }
}

/// Builds curriculum scores for every concept of `view`.
///
/// Topic-based methods fit a seeded topic model on the samples' metadata (topic `k`
/// seeded with concept `k`'s name words) unless a fitted `topics` model is supplied.
pub fn build_curriculum(
    view: &TrainingView<'_>,
    config: &MatchConfig,
    lda_config: &LdaConfig,
    embeddings: Option<&EmbeddingTable>,
    topics: Option<&LdaModel>,
) -> Result<CurriculumScores> {
    config.validate()?;
    let method = config.method;
    let concepts = view.concepts();
    if concepts.is_empty() {
        return Err(Error::invalid("dataset declares no concepts"));
    }
    if method.needs_embeddings() && embeddings.is_none() {
        return Err(Error::invalid(format!(
            "method {method:?} needs an embedding table"
        )));
    }
    let bags: Vec<ModalityBags> = (0..view.len())
        .map(|i| ModalityBags::from_web_label(view.web_label(i), config.image_min_score))
        .collect();

    let fitted;
    let topics = match (method.needs_topics(), topics) {
        (false, _) => None,
        (true, Some(m)) => Some(m),
        (true, None) => {
            let corpus: Vec<Vec<String>> = bags
                .iter()
                .map(|b| b.document(config.lda_text_only))
                .collect();
            let seeds = concepts
                .iter()
                .enumerate()
                .map(|(k, c)| (k, c.words.clone()))
                .collect();
            let cfg = LdaConfig {
                num_topics: lda_config.num_topics.max(concepts.len()),
                ..lda_config.clone()
            };
            fitted = fit_lda(&corpus, &cfg, &seeds)?;
            Some(&fitted)
        }
    };
    if let Some(t) = topics {
        if t.num_topics() < concepts.len() {
            return Err(Error::invalid("topic model has fewer topics than concepts"));
        }
    }
    let proportions = match (method, topics) {
        (MatchMethod::LatentTopic, Some(t)) => Some(
            bags.par_iter()
                .map(|b| {
                    t.infer_doc(&b.document(config.lda_text_only))
                        .topic_proportions()
                })
                .collect::<Vec<_>>(),
        ),
        _ => None,
    };

    let weights = config.effective_weights();
    let per_concept: Vec<Vec<ModalityScores>> = concepts
        .par_iter()
        .enumerate()
        .map(|(k, concept)| {
            let scorer = TokenScorer::new(method, concept, k, config, embeddings, topics);
            bags.iter()
                .enumerate()
                .map(|(i, b)| match &proportions {
                    Some(p) => {
                        let share = p[i][k];
                        ModalityScores {
                            text: if share >= config.topic_min_share {
                                share
                            } else {
                                0.0
                            },
                            ..ModalityScores::default()
                        }
                    }
                    None => scorer.score_bags(b),
                })
                .collect()
        })
        .collect();

    let mut modality = per_concept;
    if config.normalize_modalities {
        for rows in &mut modality {
            normalize_columns(rows);
        }
    }
    let fused = modality
        .iter()
        .map(|rows| rows.iter().map(|m| fuse_modalities(m, &weights)).collect())
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(CurriculumScores {
        sample_ids: (0..view.len()).map(|i| view.id(i).to_string()).collect(),
        concepts: concepts.iter().map(|c| c.id.clone()).collect(),
        modality,
        fused,
    })
}

fn normalize_columns(rows: &mut [ModalityScores]) {
    let max = rows
        .iter()
        .fold(ModalityScores::default(), |m, r| ModalityScores {
            text: m.text.max(r.text),
            asr: m.asr.max(r.asr),
            image: m.image.max(r.image),
            ocr: m.ocr.max(r.ocr),
        });
    let div = |x: f64, m: f64| if m > 0.0 { x / m } else { x };
    for r in rows {
        r.text = div(r.text, max.text);
        r.asr = div(r.asr, max.asr);
        r.image = div(r.image, max.image);
        r.ocr = div(r.ocr, max.ocr);
    }
}

/// Per-token match values for one concept, memoized across samples.
struct TokenScorer<'a> {
    method: MatchMethod,
    concept_words: &'a [String],
    topic_words: Vec<(String, f64)>,
    config: &'a MatchConfig,
    embeddings: Option<&'a EmbeddingTable>,
    cache: std::sync::Mutex<HashMap<String, f64>>,
}

impl<'a> TokenScorer<'a> {
    fn new(
        method: MatchMethod,
        concept: &'a Concept,
        topic: usize,
        config: &'a MatchConfig,
        embeddings: Option<&'a EmbeddingTable>,
        topics: Option<&LdaModel>,
    ) -> Self {
        let topic_words = match (method, topics) {
            (MatchMethod::LtWe | MatchMethod::LtWeMultimodal, Some(t)) => {
                top_topic_words(&t.topic_distribution(topic), config.top_n)
            }
            _ => Vec::new(),
        };
        Self {
            method,
            concept_words: &concept.words,
            topic_words,
            config,
            embeddings,
            cache: Default::default(),
        }
    }

    fn token(&self, t: &str) -> f64 {
        if let Some(&v) = self.cache.lock().expect("cache lock").get(t) {
            return v;
        }
        let cw = self.concept_words;
        let thr = self.config.embedding_threshold;
        let v = match self.method {
            MatchMethod::Exact | MatchMethod::Stem => {
                let bag = Bag::from_tokens(vec![t.to_string()]);
                match_score_exact(&bag, cw, self.method == MatchMethod::Stem)
            }
            MatchMethod::Embedding => {
                embedding_token_score(t, cw, self.embeddings.expect("checked"), thr)
            }
            MatchMethod::LtWe | MatchMethod::LtWeMultimodal => {
                topic_token_score(t, &self.topic_words, self.embeddings.expect("checked"), thr)
            }
            MatchMethod::LatentTopic => 0.0,
        };
        self.cache
            .lock()
            .expect("cache lock")
            .insert(t.to_string(), v);
        v
    }

    fn score_bags(&self, b: &ModalityBags) -> ModalityScores {
        ModalityScores {
            text: b.text.score_with(|t| self.token(t)),
            asr: b.asr.score_with(|t| self.token(t)),
            image: b.image.score_with(|t| self.token(t)),
            ocr: b.ocr.score_with(|t| self.token(t)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fusion_uses_default_weights() {
        let s = ModalityScores {
            text: 0.5,
            asr: 0.2,
            image: 0.4,
            ocr: 1.0,
        };
        let fused = fuse_modalities(&s, &ModalityWeights::default()).unwrap();
        assert!((fused - 0.85).abs() < 1e-12);
        assert_eq!(
            fuse_modalities(&ModalityScores::default(), &ModalityWeights::default()).unwrap(),
            0.0
        );
        assert_eq!(
            fuse_modalities(&s, &ModalityWeights::text_only()).unwrap(),
            0.5
        );
    }

    #[test]
    fn negative_weight_rejected() {
        let w = ModalityWeights {
            asr: -0.1,
            ..ModalityWeights::default()
        };
        assert!(fuse_modalities(&ModalityScores::default(), &w).is_err());
        assert!(w.validate().is_err());
    }

    #[test]
    fn region_examples() {
        let r = build_region(&[0.3, 0.0, 0.1], 0.5).unwrap();
        assert_eq!(r.upper_bounds, [1.0, 0.5, 1.0]);
        assert_eq!(r.groups, [Group::Confident, Group::Other, Group::Confident]);
        assert_eq!(
            build_region(&[0.2, 0.4], 0.5).unwrap().upper_bounds,
            [1.0, 1.0]
        );
        assert_eq!(
            build_region(&[0.0, 0.0], 0.3).unwrap().upper_bounds,
            [0.3, 0.3]
        );
        assert!(build_region(&[1.0], 1.0).is_err());
        assert!(build_region(&[1.0], 0.0).is_err());
    }

    #[test]
    fn image_bag_weights_by_classifier_score() {
        let mut label = WebLabel::default();
        label.image_labels.insert("golden retriever".into(), 0.8);
        label.image_labels.insert("toaster".into(), 0.05);
        let bags = ModalityBags::from_web_label(&label, 0.1);
        let entries: Vec<(&str, f64)> = bags.image.iter().collect();
        assert_eq!(entries, [("golden", 0.8), ("retriever", 0.8)]);
    }
}
