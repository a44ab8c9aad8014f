//! Token-bag to concept matching scores.
//!
//! Every score is a weighted mean over bag tokens of a per-token match value, so a bag
//! with many matching tokens scores higher than one with a single mention. Text, ASR
//! and OCR bags carry weight 1 per token; image-label bags carry the classifier score.

use std::collections::HashSet;

use crate::text::embedding::EmbeddingTable;
use crate::text::stem::stem_word;

/// A token multiset with a non-negative weight per occurrence.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bag {
    tokens: Vec<String>,
    weights: Vec<f64>,
}

impl Bag {
    pub fn from_tokens(tokens: Vec<String>) -> Self {
        let weights = vec![1.0; tokens.len()];
        Self { tokens, weights }
    }

    pub fn weighted(entries: Vec<(String, f64)>) -> Self {
        let (tokens, weights) = entries.into_iter().unzip();
        Self { tokens, weights }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.tokens
            .iter()
            .map(String::as_str)
            .zip(self.weights.iter().copied())
    }

    /// Weighted mean of `token_score` over the bag; 0 for an empty bag.
    pub fn score_with(&self, mut token_score: impl FnMut(&str) -> f64) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let total: f64 = self.iter().map(|(t, w)| w * token_score(t)).sum();
        total / self.len() as f64
    }
}

impl<S: Into<String>> FromIterator<S> for Bag {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self::from_tokens(iter.into_iter().map(Into::into).collect())
    }
}

/// Fraction of bag tokens equal to a concept word, optionally after stemming both sides.
pub fn match_score_exact(bag: &Bag, concept_words: &[String], stemmed: bool) -> f64 {
    let norm = |w: &str| {
        if stemmed {
            stem_word(w)
        } else {
            w.to_string()
        }
    };
    let targets: HashSet<String> = concept_words.iter().map(|w| norm(w)).collect();
    bag.score_with(|t| if targets.contains(&norm(t)) { 1.0 } else { 0.0 })
}

/// Cosine similarity, zeroed below `threshold` or when either word is out of vocabulary.
pub(crate) fn thresholded_similarity(
    table: &EmbeddingTable,
    a: &str,
    b: &str,
    threshold: f64,
) -> f64 {
    match table.similarity(a, b) {
        Some(c) if c >= threshold - 1e-12 => c.max(0.0),
        _ => 0.0,
    }
}

/// Best thresholded cosine of a token against any concept word.
pub fn embedding_token_score(
    token: &str,
    concept_words: &[String],
    table: &EmbeddingTable,
    threshold: f64,
) -> f64 {
    concept_words
        .iter()
        .map(|c| thresholded_similarity(table, token, c, threshold))
        .fold(0.0, f64::max)
}

pub fn match_score_embedding(
    bag: &Bag,
    concept_words: &[String],
    table: &EmbeddingTable,
    threshold: f64,
) -> f64 {
    bag.score_with(|t| embedding_token_score(t, concept_words, table, threshold))
}

/// The `top_n` most probable words of a topic, probabilities renormalized over the kept set.
/// Ties are broken by word so the result is independent of input order.
pub fn top_topic_words(distribution: &[(String, f64)], top_n: usize) -> Vec<(String, f64)> {
    let mut sorted: Vec<&(String, f64)> = distribution.iter().collect();
    sorted.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    sorted.truncate(top_n.max(1));
    let mass: f64 = sorted.iter().map(|(_, p)| p).sum();
    sorted
        .into_iter()
        .map(|(w, p)| (w.clone(), if mass > 0.0 { p / mass } else { 0.0 }))
        .collect()
}

/// Probability-weighted thresholded similarity of a token to a topic's words.
pub fn topic_token_score(
    token: &str,
    topic_words: &[(String, f64)],
    table: &EmbeddingTable,
    threshold: f64,
) -> f64 {
    topic_words
        .iter()
        .map(|(w, p)| p * thresholded_similarity(table, token, w, threshold))
        .sum()
}

/// Embedding match of a bag against a topic's `top_n` words.
pub fn match_score_lt_we(
    bag: &Bag,
    topic: &[(String, f64)],
    table: &EmbeddingTable,
    threshold: f64,
    top_n: usize,
) -> f64 {
    let words = top_topic_words(topic, top_n);
    bag.score_with(|t| topic_token_score(t, &words, table, threshold))
}
