//! Latent Dirichlet allocation fitted by variational Bayes, with topics seeded through an
//! asymmetric topic-word prior.
//!
//! The variational family is the usual mean-field one: a Dirichlet `gamma` over each
//! document's topic proportions and a multinomial `phi` over each token's topic, plus a
//! Dirichlet `lambda` (stored as `topic_word_param`) over each topic's word distribution.
//! Batch mode alternates a full E-step over the corpus with the closed-form update
//! `lambda = eta + sufficient statistics`; per-document `gamma` is warm-started from the
//! previous pass, so every update is an exact coordinate ascent step and the evidence lower
//! bound never decreases. Online mode blends minibatch estimates into `lambda` with step
//! size `(tau0 + t)^-kappa`.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VbMode {
    Batch,
    Online,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaConfig {
    /// Topic count. Curriculum building raises it to the number of concepts if smaller.
    pub num_topics: usize,
    /// Symmetric document-topic Dirichlet prior.
    pub alpha: f64,
    /// Base topic-word Dirichlet prior.
    pub eta: f64,
    /// Multiplier applied to `eta` for a topic's seed words.
    pub seed_boost: f64,
    pub vb_iters: usize,
    pub doc_iters: usize,
    pub tol: f64,
    pub rng_seed: u64,
    /// Vocabulary pruning: minimum total occurrences.
    pub min_count: usize,
    /// Vocabulary pruning: maximum fraction of documents a word may appear in.
    pub max_doc_frac: f64,
    pub mode: VbMode,
    pub tau0: f64,
    pub kappa: f64,
    /// Documents per online minibatch.
    pub batch_size: usize,
}

impl Default for LdaConfig {
    fn default() -> Self {
        Self {
            num_topics: 10,
            alpha: 0.1,
            eta: 0.01,
            seed_boost: 50.0,
            vb_iters: 100,
            doc_iters: 100,
            tol: 1e-6,
            rng_seed: 0,
            min_count: 2,
            max_doc_frac: 0.5,
            mode: VbMode::Batch,
            tau0: 1.0,
            kappa: 0.7,
            batch_size: 64,
        }
    }
}

impl LdaConfig {
    fn validate(&self) -> Result<()> {
        if self.num_topics == 0 {
            return Err(Error::invalid("LDA needs at least one topic"));
        }
        if !(self.alpha > 0.0 && self.eta > 0.0) {
            return Err(Error::invalid("alpha and eta must be positive"));
        }
        if !(self.seed_boost >= 1.0) {
            return Err(Error::invalid("seed_boost must be at least 1"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tol must be positive"));
        }
        if self.mode == VbMode::Online && (self.batch_size == 0 || self.kappa <= 0.0) {
            return Err(Error::invalid(
                "online VB needs batch_size >= 1 and kappa > 0",
            ));
        }
        Ok(())
    }
}

/// Sorted word list with an index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn from_words(mut words: Vec<String>) -> Self {
        words.sort();
        words.dedup();
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Self { words, index }
    }

    /// Keeps words seen at least `min_count` times and in at most `max_doc_frac` of documents.
    pub fn build(corpus: &[Vec<String>], min_count: usize, max_doc_frac: f64) -> Self {
        let mut count: HashMap<&str, usize> = HashMap::new();
        let mut doc_freq: HashMap<&str, usize> = HashMap::new();
        for doc in corpus {
            let mut seen = std::collections::HashSet::new();
            for t in doc {
                *count.entry(t).or_default() += 1;
                if seen.insert(t.as_str()) {
                    *doc_freq.entry(t).or_default() += 1;
                }
            }
        }
        let n_docs = corpus.len().max(1) as f64;
        let words = count
            .into_iter()
            .filter(|(w, c)| *c >= min_count && doc_freq[w] as f64 / n_docs <= max_doc_frac)
            .map(|(w, _)| w.to_string())
            .collect();
        Self::from_words(words)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn get(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Sparse (word id, count) representation, out-of-vocabulary tokens dropped.
    pub fn encode(&self, doc: &[String]) -> Document {
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        for t in doc {
            if let Some(id) = self.get(t) {
                *counts.entry(id).or_default() += 1.0;
            }
        }
        let (ids, counts) = counts.into_iter().unzip();
        Document { ids, counts }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Document {
    pub ids: Vec<usize>,
    pub counts: Vec<f64>,
}

impl Document {
    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }
}

/// Variational posterior of one document.
#[derive(Debug, Clone, PartialEq)]
pub struct DocPosterior {
    pub gamma: Vec<f64>,
    /// Vocabulary ids of the document's distinct in-vocabulary words.
    pub word_ids: Vec<usize>,
    /// One topic simplex row per entry of `word_ids`.
    pub phi: Vec<Vec<f64>>,
    /// Set when nothing survived vocabulary filtering; `gamma` is then the prior.
    pub empty: bool,
}

impl DocPosterior {
    /// Posterior mean of the topic proportions.
    pub fn topic_proportions(&self) -> Vec<f64> {
        normalize(&self.gamma)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub vocab: Vec<String>,
    pub topic_word_param: Vec<Vec<f64>>,
    pub config: LdaConfig,
    pub seeds: BTreeMap<usize, Vec<String>>,
    #[serde(skip)]
    index: HashMap<String, usize>,
    #[serde(skip)]
    elog_beta: Vec<Vec<f64>>,
}

/// Result of a fit together with the bound after every pass.
#[derive(Debug, Clone)]
pub struct LdaFit {
    pub model: LdaModel,
    pub elbo_history: Vec<f64>,
}

fn normalize(v: &[f64]) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.iter().map(|x| x / s).collect()
}

fn dirichlet_expectation(v: &[f64]) -> Vec<f64> {
    let total = digamma(v.iter().sum());
    v.iter().map(|&x| digamma(x) - total).collect()
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.map(|x| (x - max).exp()).sum::<f64>().ln()
}

impl LdaModel {
    fn from_parts(
        vocab: Vec<String>,
        topic_word_param: Vec<Vec<f64>>,
        config: LdaConfig,
        seeds: BTreeMap<usize, Vec<String>>,
    ) -> Self {
        let mut model = Self {
            vocab,
            topic_word_param,
            config,
            seeds,
            index: HashMap::new(),
            elog_beta: Vec::new(),
        };
        model.refresh();
        model
    }

    fn refresh(&mut self) {
        self.index = self
            .vocab
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        self.elog_beta = self
            .topic_word_param
            .iter()
            .map(|row| dirichlet_expectation(row))
            .collect();
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut model: LdaModel = serde_json::from_str(text)?;
        if model.topic_word_param.is_empty()
            || model
                .topic_word_param
                .iter()
                .any(|r| r.len() != model.vocab.len() || r.iter().any(|&x| !(x > 0.0)))
        {
            return Err(Error::invalid(
                "topic_word_param must be a positive K x V matrix",
            ));
        }
        model.refresh();
        Ok(model)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn num_topics(&self) -> usize {
        self.topic_word_param.len()
    }

    pub fn vocab_len(&self) -> usize {
        self.vocab.len()
    }

    pub fn encode(&self, doc: &[String]) -> Document {
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        for t in doc {
            if let Some(&id) = self.index.get(t) {
                *counts.entry(id).or_default() += 1.0;
            }
        }
        let (ids, counts) = counts.into_iter().unzip();
        Document { ids, counts }
    }

    /// Expected word distribution of topic `k` (row-normalized variational parameter).
    pub fn expected_topic_word(&self, k: usize) -> Vec<f64> {
        normalize(&self.topic_word_param[k])
    }

    pub fn topic_distribution(&self, k: usize) -> Vec<(String, f64)> {
        self.vocab
            .iter()
            .cloned()
            .zip(self.expected_topic_word(k))
            .collect()
    }

    fn prior(&self) -> Vec<Vec<f64>> {
        topic_word_prior(&self.config, self.num_topics(), &self.index, &self.seeds)
    }

    /// Coordinate ascent on one document starting from `gamma`. Returns the final `gamma`
    /// and the log of `phi` (best response to that `gamma`) for every distinct word.
    fn e_step_doc(&self, doc: &Document, mut gamma: Vec<f64>) -> (Vec<f64>, Vec<Vec<f64>>) {
        let k = self.num_topics();
        let alpha = self.config.alpha;
        let log_phi = |gamma: &[f64]| -> Vec<Vec<f64>> {
            let elog_theta = dirichlet_expectation(gamma);
            doc.ids
                .iter()
                .map(|&w| {
                    let scores: Vec<f64> = (0..k)
                        .map(|t| elog_theta[t] + self.elog_beta[t][w])
                        .collect();
                    let lse = log_sum_exp(scores.iter().copied());
                    scores.into_iter().map(|s| s - lse).collect()
                })
                .collect()
        };
        for _ in 0..self.config.doc_iters.max(1) {
            let lp = log_phi(&gamma);
            let mut next = vec![alpha; k];
            for (row, &c) in lp.iter().zip(&doc.counts) {
                for (g, l) in next.iter_mut().zip(row) {
                    *g += c * l.exp();
                }
            }
            let change = next
                .iter()
                .zip(&gamma)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
                / k as f64;
            gamma = next;
            if change < self.config.tol {
                break;
            }
        }
        let lp = log_phi(&gamma);
        (gamma, lp)
    }

    fn initial_gamma(&self, doc: &Document) -> Vec<f64> {
        let k = self.num_topics();
        vec![self.config.alpha + doc.total() / k as f64; k]
    }

    /// Variational posterior for a (possibly unseen) document; OOV tokens are ignored.
    pub fn infer_doc(&self, doc: &[String]) -> DocPosterior {
        let encoded = self.encode(doc);
        self.infer_encoded(&encoded)
    }

    fn infer_encoded(&self, doc: &Document) -> DocPosterior {
        let k = self.num_topics();
        if doc.is_empty() {
            return DocPosterior {
                gamma: vec![self.config.alpha; k],
                word_ids: Vec::new(),
                phi: Vec::new(),
                empty: true,
            };
        }
        let (gamma, log_phi) = self.e_step_doc(doc, self.initial_gamma(doc));
        DocPosterior {
            gamma,
            word_ids: doc.ids.clone(),
            phi: log_phi
                .into_iter()
                .map(|r| r.into_iter().map(f64::exp).collect())
                .collect(),
            empty: false,
        }
    }

    /// Normalized `gamma` of every document, one row per document.
    pub fn topic_scores_for_corpus(&self, corpus: &[Vec<String>]) -> Vec<Vec<f64>> {
        corpus
            .par_iter()
            .map(|doc| self.infer_doc(doc).topic_proportions())
            .collect()
    }

    /// Evidence lower bound of `corpus` under the current topic parameters, with each
    /// document's `phi` at its optimum for the given `gamma`.
    pub fn elbo(&self, corpus: &[Vec<String>], posteriors: &[DocPosterior]) -> Result<f64> {
        if corpus.is_empty() {
            return Err(Error::invalid("ELBO of an empty corpus"));
        }
        if posteriors.len() != corpus.len() {
            return Err(Error::LengthMismatch {
                expected: corpus.len(),
                found: posteriors.len(),
            });
        }
        let docs: Vec<Document> = corpus.iter().map(|d| self.encode(d)).collect();
        let gammas: Vec<&[f64]> = posteriors.iter().map(|p| p.gamma.as_slice()).collect();
        Ok(self.elbo_encoded(&docs, &gammas, corpus.len() as f64))
    }

    /// `corpus_size` scales the document part, which online mode uses for minibatches.
    /// Document term of the bound at its optimal `phi` for the given `gamma`.
    fn doc_bound(&self, doc: &Document, gamma: &[f64]) -> f64 {
        let k = self.num_topics();
        let alpha = self.config.alpha;
        let elog_theta = dirichlet_expectation(gamma);
        let words: f64 = doc
            .ids
            .iter()
            .zip(&doc.counts)
            .map(|(&w, &c)| c * log_sum_exp((0..k).map(|t| elog_theta[t] + self.elog_beta[t][w])))
            .sum();
        let theta: f64 = gamma
            .iter()
            .zip(&elog_theta)
            .map(|(&g, &e)| (alpha - g) * e + ln_gamma(g))
            .sum::<f64>()
            - ln_gamma(gamma.iter().sum())
            + ln_gamma(alpha * k as f64)
            - k as f64 * ln_gamma(alpha);
        words + theta
    }

    fn elbo_encoded(&self, docs: &[Document], gammas: &[&[f64]], corpus_size: f64) -> f64 {
        let k = self.num_topics();
        let doc_part: f64 = docs
            .iter()
            .zip(gammas)
            .map(|(doc, gamma)| self.doc_bound(doc, gamma))
            .sum();
        let doc_part = doc_part * corpus_size / docs.len().max(1) as f64;
        let prior = self.prior();
        let topic_part: f64 = (0..k)
            .map(|t| {
                let lam = &self.topic_word_param[t];
                let eta = &prior[t];
                lam.iter()
                    .zip(eta)
                    .zip(&self.elog_beta[t])
                    .map(|((&l, &e), &elog)| (e - l) * elog + ln_gamma(l) - ln_gamma(e))
                    .sum::<f64>()
                    + ln_gamma(eta.iter().sum())
                    - ln_gamma(lam.iter().sum())
            })
            .sum();
        doc_part + topic_part
    }
}

fn topic_word_prior(
    config: &LdaConfig,
    k: usize,
    index: &HashMap<String, usize>,
    seeds: &BTreeMap<usize, Vec<String>>,
) -> Vec<Vec<f64>> {
    let mut prior = vec![vec![config.eta; index.len()]; k];
    for (&topic, words) in seeds {
        for w in words {
            if let Some(&id) = index.get(w) {
                prior[topic][id] = config.eta * config.seed_boost;
            }
        }
    }
    prior
}

/// Fits a model, returning the bound after every pass.
pub fn fit_lda_traced(
    corpus: &[Vec<String>],
    config: &LdaConfig,
    concept_seeds: &BTreeMap<usize, Vec<String>>,
) -> Result<LdaFit> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::invalid("LDA corpus is empty"));
    }
    let k = config.num_topics;
    if let Some((&topic, _)) = concept_seeds.range(k..).next() {
        return Err(Error::invalid(format!(
            "seed topic {topic} out of range for {k} topics"
        )));
    }
    let vocab = Vocabulary::build(corpus, config.min_count, config.max_doc_frac);
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let mut seeds = BTreeMap::new();
    for (&topic, words) in concept_seeds {
        let kept: Vec<String> = words
            .iter()
            .filter(|w| {
                let known = vocab.get(w).is_some();
                if !known {
                    log::warn!(
                        "seed word '{w}' for topic {topic} is not in the vocabulary; dropped"
                    );
                }
                known
            })
            .cloned()
            .collect();
        seeds.insert(topic, kept);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let prior = topic_word_prior(config, k, &vocab.index, &seeds);
    // unit-scale noise with 10% spread breaks topic symmetry without pinning any word
    let noise = Gamma::new(100.0, 0.01).expect("valid gamma parameters");
    let init: Vec<Vec<f64>> = prior
        .iter()
        .map(|row| row.iter().map(|&p| p + rng.sample(noise)).collect())
        .collect();
    let mut model = LdaModel::from_parts(vocab.words.clone(), init, config.clone(), seeds);
    let docs: Vec<Document> = corpus.iter().map(|d| vocab.encode(d)).collect();

    let elbo_history = match config.mode {
        VbMode::Batch => run_batch(&mut model, &docs, &prior),
        VbMode::Online => run_online(&mut model, &docs, &prior, &mut rng),
    };
    Ok(LdaFit {
        model,
        elbo_history,
    })
}

pub fn fit_lda(
    corpus: &[Vec<String>],
    config: &LdaConfig,
    concept_seeds: &BTreeMap<usize, Vec<String>>,
) -> Result<LdaModel> {
    fit_lda_traced(corpus, config, concept_seeds).map(|f| f.model)
}

/// Sufficient statistics accumulated in document order so the result is independent of
/// how the E-steps were scheduled.
///
/// With `compare_reset`, each document's E-step also runs from the uniform starting point
/// and the solution with the larger document bound is kept. The warm start alone already
/// never lowers the bound; the second run lets documents leave a poor local optimum.
fn accumulate(
    model: &LdaModel,
    docs: &[&Document],
    gammas: Vec<Vec<f64>>,
    compare_reset: bool,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let results: Vec<(Vec<f64>, Vec<Vec<f64>>)> = docs
        .par_iter()
        .zip(gammas)
        .map(|(doc, gamma)| {
            if doc.is_empty() {
                return (gamma, Vec::new());
            }
            let warm = model.e_step_doc(doc, gamma);
            if !compare_reset {
                return warm;
            }
            let fresh = model.e_step_doc(doc, model.initial_gamma(doc));
            if model.doc_bound(doc, &fresh.0) > model.doc_bound(doc, &warm.0) {
                fresh
            } else {
                warm
            }
        })
        .collect();
    let k = model.num_topics();
    let mut sstats = vec![vec![0.0; model.vocab_len()]; k];
    let mut new_gammas = Vec::with_capacity(results.len());
    for (doc, (gamma, log_phi)) in docs.iter().zip(results) {
        for ((&w, &c), row) in doc.ids.iter().zip(&doc.counts).zip(&log_phi) {
            for (t, l) in row.iter().enumerate() {
                sstats[t][w] += c * l.exp();
            }
        }
        new_gammas.push(gamma);
    }
    (sstats, new_gammas)
}

fn run_batch(model: &mut LdaModel, docs: &[Document], prior: &[Vec<f64>]) -> Vec<f64> {
    let refs: Vec<&Document> = docs.iter().collect();
    let mut gammas: Vec<Vec<f64>> = docs.iter().map(|d| model.initial_gamma(d)).collect();
    let mut history = Vec::new();
    for _ in 0..model.config.vb_iters {
        let (sstats, g) = accumulate(model, &refs, gammas, true);
        gammas = g;
        for ((row, p), s) in model.topic_word_param.iter_mut().zip(prior).zip(&sstats) {
            for ((x, &pv), &sv) in row.iter_mut().zip(p).zip(s) {
                *x = pv + sv;
            }
        }
        model.refresh();
        let g_refs: Vec<&[f64]> = gammas.iter().map(Vec::as_slice).collect();
        let bound = model.elbo_encoded(docs, &g_refs, docs.len() as f64);
        let converged = history.last().is_some_and(|&prev: &f64| {
            ((bound - prev) / prev.abs().max(1e-300)).abs() < model.config.tol
        });
        history.push(bound);
        if converged {
            break;
        }
    }
    history
}

fn run_online(
    model: &mut LdaModel,
    docs: &[Document],
    prior: &[Vec<f64>],
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let d = docs.len() as f64;
    let batch = model.config.batch_size.min(docs.len());
    let mut order: Vec<usize> = (0..docs.len()).collect();
    order.shuffle(rng);
    let mut cursor = 0;
    let mut history = Vec::new();
    for t in 0..model.config.vb_iters {
        if cursor + batch > order.len() {
            order.shuffle(rng);
            cursor = 0;
        }
        let idx = &order[cursor..cursor + batch];
        cursor += batch;
        let mb: Vec<&Document> = idx.iter().map(|&i| &docs[i]).collect();
        let gammas = mb.iter().map(|doc| model.initial_gamma(doc)).collect();
        let (sstats, gammas) = accumulate(model, &mb, gammas, false);
        let rho = (model.config.tau0 + t as f64).powf(-model.config.kappa);
        let scale = d / batch as f64;
        for ((row, p), s) in model.topic_word_param.iter_mut().zip(prior).zip(&sstats) {
            for ((x, &pv), &sv) in row.iter_mut().zip(p).zip(s) {
                *x = (1.0 - rho) * *x + rho * (pv + scale * sv);
            }
        }
        model.refresh();
        let mb_owned: Vec<Document> = mb.into_iter().cloned().collect();
        let g_refs: Vec<&[f64]> = gammas.iter().map(Vec::as_slice).collect();
        history.push(model.elbo_encoded(&mb_owned, &g_refs, d));
    }
    history
}

/// Cosine similarity of two equal-length vectors.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Best one-to-one assignment of learned topics to reference topics by cosine similarity,
/// found by exhaustive search over permutations (intended for small K). Returns, for every
/// reference topic, the matched learned topic and the cosine.
pub fn align_topics(learned: &[Vec<f64>], reference: &[Vec<f64>]) -> Vec<(usize, f64)> {
    let n = reference.len();
    assert!(
        learned.len() >= n,
        "need at least as many learned topics as references"
    );
    assert!(n <= 8, "exhaustive alignment is limited to 8 topics");
    let sim: Vec<Vec<f64>> = reference
        .iter()
        .map(|r| learned.iter().map(|l| cosine(l, r)).collect())
        .collect();
    let mut best: (f64, Vec<usize>) = (f64::NEG_INFINITY, Vec::new());
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; learned.len()];
    fn search(
        sim: &[Vec<f64>],
        current: &mut Vec<usize>,
        used: &mut [bool],
        total: f64,
        best: &mut (f64, Vec<usize>),
    ) {
        let i = current.len();
        if i == sim.len() {
            if total > best.0 {
                *best = (total, current.clone());
            }
            return;
        }
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                current.push(j);
                search(sim, current, used, total + sim[i][j], best);
                current.pop();
                used[j] = false;
            }
        }
    }
    search(&sim, &mut current, &mut used, 0.0, &mut best);
    best.1
        .into_iter()
        .enumerate()
        .map(|(i, j)| (j, sim[i][j]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(ws: &[&str]) -> Vec<String> {
        ws.iter().map(|s| s.to_string()).collect()
    }

    fn no_prune() -> LdaConfig {
        LdaConfig {
            min_count: 1,
            max_doc_frac: 1.0,
            ..LdaConfig::default()
        }
    }

    #[test]
    fn single_word_vocabulary_forces_mass() {
        let cfg = LdaConfig {
            num_topics: 1,
            ..no_prune()
        };
        let m = fit_lda(&[toks(&["dog"])], &cfg, &BTreeMap::new()).unwrap();
        assert_eq!(m.vocab, ["dog"]);
        assert!(m.expected_topic_word(0)[0] > 0.9);
    }

    #[test]
    fn zero_topics_rejected() {
        let cfg = LdaConfig {
            num_topics: 0,
            ..no_prune()
        };
        assert!(fit_lda(&[toks(&["dog"])], &cfg, &BTreeMap::new()).is_err());
    }

    #[test]
    fn empty_vocabulary_rejected() {
        // every word appears once, below the default min_count
        let err = fit_lda(
            &[toks(&["a", "b"])],
            &LdaConfig::default(),
            &BTreeMap::new(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::EmptyVocabulary));
    }

    #[test]
    fn unknown_seed_words_are_dropped() {
        let cfg = LdaConfig {
            num_topics: 2,
            ..no_prune()
        };
        let seeds = BTreeMap::from([(0, toks(&["dog", "zebra"]))]);
        let m = fit_lda(&[toks(&["dog", "cat"])], &cfg, &seeds).unwrap();
        assert_eq!(m.seeds[&0], ["dog"]);
    }

    #[test]
    fn empty_doc_gets_uniform_proportions() {
        let cfg = LdaConfig {
            num_topics: 3,
            ..no_prune()
        };
        let m = fit_lda(&[toks(&["dog", "cat"])], &cfg, &BTreeMap::new()).unwrap();
        let post = m.infer_doc(&toks(&["unseen"]));
        assert!(post.empty);
        for p in post.topic_proportions() {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn elbo_of_empty_corpus_is_an_error() {
        let cfg = LdaConfig {
            num_topics: 1,
            ..no_prune()
        };
        let m = fit_lda(&[toks(&["dog"])], &cfg, &BTreeMap::new()).unwrap();
        assert!(m.elbo(&[], &[]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let cfg = LdaConfig {
            num_topics: 2,
            ..no_prune()
        };
        let m = fit_lda(&[toks(&["dog", "cat", "dog"])], &cfg, &BTreeMap::new()).unwrap();
        let back = LdaModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back.topic_word_param, m.topic_word_param);
        assert_eq!(
            back.infer_doc(&toks(&["dog"])),
            m.infer_doc(&toks(&["dog"]))
        );
    }

    #[test]
    fn alignment_finds_permutation() {
        let learned = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let reference = vec![vec![1.0, 0.1], vec![0.1, 1.0]];
        let a = align_topics(&learned, &reference);
        assert_eq!(a[0].0, 1);
        assert_eq!(a[1].0, 0);
    }
}
