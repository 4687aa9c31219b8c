use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Every threshold, rate and window setting used by suite construction and
/// evaluation. A snapshot is embedded in every suite manifest.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct RunConfig {
    pub seed: u64,
    /// Resource location as given on the command line; informational.
    pub resources: String,
    pub max_words: usize,
    pub paraphrase_min_similarity: f64,
    pub paraphrase_max_bleu1: f64,
    pub relatedness_threshold: f64,
    pub grammar_threshold: f64,
    pub significance: f64,
    pub commonsense_rate: f64,
    pub negation_rate: f64,
    pub relatedness_rate: f64,
    pub typo_rate: f64,
    pub window: usize,
    pub stride: usize,
    /// Marks the punctuation invariance perturbation may delete.
    pub punctuation_marks: Vec<String>,
    /// Concept-graph relations allowed for entity substitution; `None` allows all.
    pub relation_allow_list: Option<Vec<String>>,
    pub reasonable_threshold: f64,
    pub min_error_raters: usize,
    pub human_min_rating: u8,
    pub negative_max_rating: u8,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            resources: String::new(),
            max_words: 250,
            paraphrase_min_similarity: 0.4,
            paraphrase_max_bleu1: 0.6,
            relatedness_threshold: 0.1,
            grammar_threshold: 0.5,
            significance: 0.01,
            commonsense_rate: 0.10,
            negation_rate: 0.20,
            relatedness_rate: 0.25,
            typo_rate: 0.02,
            window: 200,
            stride: 10,
            punctuation_marks: vec![",".to_string()],
            relation_allow_list: None,
            reasonable_threshold: 4.0,
            min_error_raters: 3,
            human_min_rating: 4,
            negative_max_rating: 2,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = [
            (
                "paraphrase_min_similarity",
                self.paraphrase_min_similarity,
                -1.0,
            ),
            ("paraphrase_max_bleu1", self.paraphrase_max_bleu1, 0.0),
            ("relatedness_threshold", self.relatedness_threshold, -1.0),
            ("grammar_threshold", self.grammar_threshold, 0.0),
            ("significance", self.significance, 0.0),
            ("commonsense_rate", self.commonsense_rate, 0.0),
            ("negation_rate", self.negation_rate, 0.0),
            ("relatedness_rate", self.relatedness_rate, 0.0),
            ("typo_rate", self.typo_rate, 0.0),
        ];
        for (name, value, low) in unit {
            if !(value >= low && value <= 1.0) {
                return Err(Error::InvalidConfig(alloc::format!(
                    "{name} = {value} outside [{low}, 1]"
                )));
            }
        }
        if self.max_words == 0 {
            return Err(Error::InvalidConfig("max_words must be ≥ 1".to_string()));
        }
        if self.window == 0 || self.stride == 0 {
            return Err(Error::InvalidConfig(
                "window and stride must be ≥ 1".to_string(),
            ));
        }
        if !(1..=5).contains(&self.human_min_rating) || !(1..=5).contains(&self.negative_max_rating)
        {
            return Err(Error::InvalidConfig(
                "rating policy outside 1..=5".to_string(),
            ));
        }
        Ok(())
    }
}
