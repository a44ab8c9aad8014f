use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::text::stem::stem_word;

/// Word vectors, unit-normalized at load so cosine similarity is a dot product.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingTable {
    dim: usize,
    index: HashMap<String, usize>,
    vectors: Vec<f64>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            ..Self::default()
        }
    }

    /// Adds or replaces a word vector. Zero-norm and wrong-arity vectors are rejected.
    pub fn insert(&mut self, word: &str, vector: &[f64]) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::invalid(format!(
                "vector for '{word}' has dimension {}, table has {}",
                vector.len(),
                self.dim
            )));
        }
        let norm = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::invalid(format!("vector for '{word}' has zero norm")));
        }
        let unit = vector.iter().map(|x| x / norm);
        match self.index.get(word) {
            Some(&row) => {
                for (dst, v) in self.vectors[row * self.dim..(row + 1) * self.dim]
                    .iter_mut()
                    .zip(unit)
                {
                    *dst = v;
                }
            }
            None => {
                self.index.insert(word.to_string(), self.index.len());
                self.vectors.extend(unit);
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index
            .get(word)
            .map(|&row| &self.vectors[row * self.dim..(row + 1) * self.dim])
    }

    /// Looks up a token, falling back to its Porter stem when the surface form is missing.
    pub fn lookup(&self, token: &str) -> Option<&[f64]> {
        self.get(token).or_else(|| self.get(&stem_word(token)))
    }

    /// Cosine similarity of two tokens, `None` if either is out of vocabulary.
    pub fn similarity(&self, a: &str, b: &str) -> Option<f64> {
        let (x, y) = (self.lookup(a)?, self.lookup(b)?);
        Some(x.iter().zip(y).map(|(p, q)| p * q).sum())
    }

    /// Parses the word-vector text format: an optional `count dim` header, then
    /// `word f1 ... fdim` per line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut table: Option<EmbeddingTable> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let mut parts = raw.split_whitespace();
            let Some(word) = parts.next() else { continue };
            let rest: Vec<&str> = parts.collect();
            if line == 1 && rest.len() == 1 {
                if let (Ok(_), Ok(dim)) = (word.parse::<usize>(), rest[0].parse::<usize>()) {
                    table = Some(EmbeddingTable::new(dim));
                    continue;
                }
            }
            let values = rest
                .iter()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::Embedding {
                    line,
                    message: e.to_string(),
                })?;
            let table = table.get_or_insert_with(|| EmbeddingTable::new(values.len()));
            if values.len() != table.dim || values.is_empty() {
                return Err(Error::Embedding {
                    line,
                    message: format!("expected {} values, found {}", table.dim, values.len()),
                });
            }
            if table.get(word).is_some() {
                log::warn!(
                    "embedding line {line}: duplicate word '{word}', keeping the last vector"
                );
            }
            table.insert(word, &values).map_err(|_| Error::Embedding {
                line,
                message: format!("zero norm vector for '{word}'"),
            })?;
        }
        Ok(table.unwrap_or_default())
    }
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    EmbeddingTable::parse(&text)
}
