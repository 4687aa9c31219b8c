use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ListKind {
    Negation,
    Causality,
    Temporal,
}

impl ListKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ListKind::Negation => "negation",
            ListKind::Causality => "causality",
            ListKind::Temporal => "temporal",
        }
    }

    pub fn parse(s: &str) -> Option<ListKind> {
        [ListKind::Negation, ListKind::Causality, ListKind::Temporal]
            .into_iter()
            .find(|k| k.as_str() == s)
    }
}

/// Negation, causality or time-related words, split into function words
/// (conjunctions, prepositions, adverbs) and content words, with symmetric
/// antonym pairs.
#[derive(Debug, Clone)]
pub struct WordList {
    pub kind: ListKind,
    pub function_words: BTreeSet<String>,
    pub content_words: BTreeSet<String>,
    pairs: BTreeMap<String, BTreeSet<String>>,
}

impl WordList {
    pub fn new(
        kind: ListKind,
        function_words: impl IntoIterator<Item = String>,
        content_words: impl IntoIterator<Item = String>,
        antonym_pairs: impl IntoIterator<Item = (String, String)>,
    ) -> Result<WordList> {
        let function_words: BTreeSet<String> = function_words
            .into_iter()
            .map(|w| w.to_lowercase())
            .collect();
        let content_words: BTreeSet<String> = content_words
            .into_iter()
            .map(|w| w.to_lowercase())
            .collect();
        if function_words.is_empty() && content_words.is_empty() {
            return Err(Error::EmptyWordList(kind.as_str()));
        }
        let mut pairs: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (a, b) in antonym_pairs {
            let (a, b) = (a.to_lowercase(), b.to_lowercase());
            if a == b {
                continue;
            }
            pairs.entry(a.clone()).or_default().insert(b.clone());
            pairs.entry(b).or_default().insert(a);
        }
        Ok(WordList {
            kind,
            function_words,
            content_words,
            pairs,
        })
    }

    pub fn contains(&self, word: &str) -> bool {
        let w = word.to_lowercase();
        self.function_words.contains(&w) || self.content_words.contains(&w)
    }

    pub fn is_function_word(&self, word: &str) -> bool {
        self.function_words.contains(&word.to_lowercase())
    }

    /// Antonym partners of `word`, sorted.
    pub fn partners(&self, word: &str) -> impl Iterator<Item = &str> {
        self.pairs
            .get(&word.to_lowercase())
            .into_iter()
            .flat_map(|s| s.iter().map(String::as_str))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.pairs
            .iter()
            .flat_map(|(a, bs)| bs.iter().map(move |b| (a.as_str(), b.as_str())))
    }
}
