use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Static word vectors of one dimension plus document-frequency weights.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
    idf: BTreeMap<String, f64>,
    pub default_idf: f64,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> EmbeddingTable {
        EmbeddingTable {
            dim,
            vectors: BTreeMap::new(),
            idf: BTreeMap::new(),
            default_idf: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn insert(&mut self, word: &str, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::Invalid(format!(
                "vector for `{word}` has dimension {}, expected {}",
                vector.len(),
                self.dim
            )));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("vector for `{word}` is not finite")));
        }
        self.vectors.insert(word.to_lowercase(), vector);
        Ok(())
    }

    pub fn set_idf(&mut self, word: &str, value: f64) -> Result<()> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::Invalid(format!(
                "idf for `{word}` must be a non-negative number"
            )));
        }
        self.idf.insert(word.to_lowercase(), value);
        Ok(())
    }

    pub fn set_default_idf(&mut self, value: f64) -> Result<()> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::Invalid(
                "default idf must be a non-negative number".to_string(),
            ));
        }
        self.default_idf = value;
        Ok(())
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors
            .get(word)
            .or_else(|| self.vectors.get(&word.to_lowercase()))
            .map(Vec::as_slice)
    }

    pub fn idf(&self, word: &str) -> f64 {
        self.idf
            .get(&word.to_lowercase())
            .copied()
            .unwrap_or(self.default_idf)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.vectors.keys().map(String::as_str)
    }
}
