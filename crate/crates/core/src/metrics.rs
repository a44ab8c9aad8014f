//! Retrieval metrics: average precision, precision at k, mAP.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::learner::{decision_score, LinearModel};

/// AP with the total number of relevant items in the collection as denominator.
/// Returns 0 when `total_relevant` is 0.
pub fn average_precision(bits: &[bool], total_relevant: usize) -> f64 {
    if total_relevant == 0 {
        return 0.0;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (rank, &rel) in bits.iter().enumerate() {
        if rel {
            hits += 1;
            sum += hits as f64 / (rank + 1) as f64;
        }
    }
    sum / total_relevant as f64
}

/// Fraction of relevant items among the first `k`; missing positions count as irrelevant.
pub fn precision_at_k(bits: &[bool], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("precision at k needs k >= 1"));
    }
    let hits = bits.iter().take(k).filter(|&&b| b).count();
    Ok(hits as f64 / k as f64)
}

pub fn mean_ap(aps: &[f64]) -> Result<f64> {
    if aps.is_empty() {
        return Err(Error::invalid("mean AP of an empty list"));
    }
    Ok(aps.iter().sum::<f64>() / aps.len() as f64)
}

/// Indices sorted by descending score, ties by ascending index.
pub fn rank_indices(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub id: String,
    pub score: f64,
    pub relevant: bool,
}

/// Test samples in rank order for one concept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedResult {
    pub concept: String,
    pub entries: Vec<RankedEntry>,
    pub total_relevant: usize,
}

impl RankedResult {
    /// Sorts `(id, score, relevant)` triples by descending score, ties by ascending id.
    pub fn from_entries(concept: impl Into<String>, mut entries: Vec<RankedEntry>) -> Self {
        entries.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.id.cmp(&b.id)));
        let total_relevant = entries.iter().filter(|e| e.relevant).count();
        Self {
            concept: concept.into(),
            entries,
            total_relevant,
        }
    }

    pub fn bits(&self) -> Vec<bool> {
        self.entries.iter().map(|e| e.relevant).collect()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.id.as_str()).collect()
    }

    pub fn metrics(&self) -> ConceptMetrics {
        let bits = self.bits();
        ConceptMetrics {
            concept: self.concept.clone(),
            ap: average_precision(&bits, self.total_relevant),
            p_at_5: precision_at_k(&bits, 5).expect("k > 0"),
            p_at_10: precision_at_k(&bits, 10).expect("k > 0"),
            total_relevant: self.total_relevant,
        }
    }
}

/// Scores every sample of a gold-labeled dataset with the model and ranks them.
pub fn rank_and_score(model: &LinearModel, test: &Dataset, concept: &str) -> Result<RankedResult> {
    let relevance = test.gold_relevance(concept).ok_or_else(|| {
        Error::invalid(format!(
            "test set has no gold labels for concept {concept:?}"
        ))
    })?;
    let entries = test
        .samples()
        .iter()
        .zip(relevance)
        .map(|(s, relevant)| {
            Ok(RankedEntry {
                id: s.id.clone(),
                score: decision_score(model, &s.features)?,
                relevant,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RankedResult::from_entries(concept, entries))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptMetrics {
    pub concept: String,
    pub ap: f64,
    pub p_at_5: f64,
    pub p_at_10: f64,
    pub total_relevant: usize,
}

/// Renders the metrics table. Concepts without relevant test items are left out; the
/// MEAN row averages the remaining rows.
pub fn metrics_csv(rows: &[ConceptMetrics]) -> Result<String> {
    let kept: Vec<&ConceptMetrics> = rows.iter().filter(|r| r.total_relevant > 0).collect();
    let mut out = String::from("concept,ap,p_at_5,p_at_10\n");
    for r in &kept {
        writeln!(
            out,
            "{},{:.6},{:.6},{:.6}",
            r.concept, r.ap, r.p_at_5, r.p_at_10
        )
        .unwrap();
    }
    let col = |f: fn(&ConceptMetrics) -> f64| kept.iter().map(|r| f(r)).collect::<Vec<_>>();
    let map = mean_ap(&col(|r| r.ap))
        .map_err(|_| Error::invalid("no concept has relevant test items"))?;
    let p5 = mean_ap(&col(|r| r.p_at_5))?;
    let p10 = mean_ap(&col(|r| r.p_at_10))?;
    writeln!(out, "MEAN,{map:.6},{p5:.6},{p10:.6}").unwrap();
    Ok(out)
}

pub fn write_metrics_csv(path: &Path, rows: &[ConceptMetrics]) -> Result<()> {
    let text = metrics_csv(rows)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ap_examples() {
        assert!((average_precision(&[true, false, true], 2) - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(average_precision(&[true; 3], 3), 1.0);
        assert_eq!(average_precision(&[false; 3], 0), 0.0);
    }

    #[test]
    fn precision_examples() {
        let bits = [true, true, false, true, false];
        assert!((precision_at_k(&bits, 5).unwrap() - 0.6).abs() < 1e-12);
        assert!((precision_at_k(&[true], 5).unwrap() - 0.2).abs() < 1e-12);
        assert!(precision_at_k(&bits, 0).is_err());
    }

    #[test]
    fn mean_examples() {
        assert_eq!(mean_ap(&[0.5, 1.0]).unwrap(), 0.75);
        assert_eq!(mean_ap(&[0.3]).unwrap(), 0.3);
        assert!(mean_ap(&[]).is_err());
    }

    #[test]
    fn ties_rank_by_id() {
        let entries = ["c", "a", "b"]
            .iter()
            .map(|id| RankedEntry {
                id: id.to_string(),
                score: 1.0,
                relevant: false,
            })
            .collect();
        assert_eq!(
            RankedResult::from_entries("x", entries).ids(),
            ["a", "b", "c"]
        );
        assert_eq!(rank_indices(&[0.1, 0.5, 0.5]), [1, 2, 0]);
    }

    #[test]
    fn csv_omits_empty_concepts() {
        let rows = vec![
            ConceptMetrics {
                concept: "a".into(),
                ap: 0.5,
                p_at_5: 0.2,
                p_at_10: 0.1,
                total_relevant: 1,
            },
            ConceptMetrics {
                concept: "b".into(),
                ap: 0.0,
                p_at_5: 0.0,
                p_at_10: 0.0,
                total_relevant: 0,
            },
        ];
        let csv = metrics_csv(&rows).unwrap();
        assert_eq!(
            csv,
            "concept,ap,p_at_5,p_at_10\na,0.500000,0.200000,0.100000\nMEAN,0.500000,0.200000,0.100000\n"
        );
    }
}
