//! Linguistic resources and the seeded queries perturbations make on them.
//!
//! Everything here is loaded once and then read-only. Parsing of the
//! tab-separated resource files lives in the std crate; the constructors
//! here enforce the invariants (antonym symmetry, no self-relations,
//! uniform vector dimension, non-negative idf).

mod embeddings;
mod graph;
mod lists;
mod pronouns;
mod synsets;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

pub use embeddings::EmbeddingTable;
pub use graph::{graph_neighbor, ConceptGraph, Triple};
pub use lists::{ListKind, WordList};
pub use pronouns::{pronoun_alternatives, PronounAlternative, PronounCase, PronounTable};
pub use synsets::{
    antonym_candidates, antonym_inflected, synonym_candidates, synonym_inflected, Reading,
    RelationKind, Relations, SynsetLexicon,
};

use crate::error::{Error, Result};

/// Full form ↔ contracted form pairs, e.g. `I will` ↔ `I'll`.
#[derive(Debug, Clone, Default)]
pub struct ContractionMap {
    expand: BTreeMap<String, Vec<String>>,
    contract: BTreeMap<Vec<String>, String>,
}

impl ContractionMap {
    pub fn new<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> ContractionMap {
        let mut map = ContractionMap::default();
        for (full, short) in pairs {
            let full: Vec<String> = full.split_whitespace().map(str::to_lowercase).collect();
            let short = short.trim().to_lowercase();
            if full.is_empty() || short.is_empty() {
                continue;
            }
            map.expand
                .entry(short.clone())
                .or_insert_with(|| full.clone());
            map.contract.entry(full).or_insert(short);
        }
        map
    }

    pub fn expansion(&self, short: &str) -> Option<&[String]> {
        self.expand.get(&short.to_lowercase()).map(Vec::as_slice)
    }

    pub fn contraction(&self, full: &[&str]) -> Option<&str> {
        let key: Vec<String> = full.iter().map(|w| w.to_lowercase()).collect();
        self.contract.get(&key).map(String::as_str)
    }

    /// Lengths (in tokens) of the full forms, longest first.
    pub fn full_lengths(&self) -> Vec<usize> {
        let mut lens: Vec<usize> = self
            .contract
            .keys()
            .map(Vec::len)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        lens.reverse();
        lens
    }

    pub fn is_empty(&self) -> bool {
        self.expand.is_empty()
    }
}

/// Auxiliaries after which `not` is inserted when negating a sentence.
pub const DEFAULT_AUXILIARIES: &[&str] = &[
    "am", "is", "are", "was", "were", "be", "been", "do", "does", "did", "have", "has", "had",
    "can", "could", "will", "would", "shall", "should", "may", "might", "must",
];

/// All resources, each either loaded or absent. Accessors fail fast with
/// [`Error::MissingResource`] when an operation needs an absent member.
#[derive(Debug, Clone, Default)]
pub struct LexiconBundle {
    pub synsets: Option<SynsetLexicon>,
    pub negation: Option<WordList>,
    pub causality: Option<WordList>,
    pub temporal: Option<WordList>,
    pub pronoun_table: Option<PronounTable>,
    pub graph: Option<ConceptGraph>,
    pub embeddings: Option<EmbeddingTable>,
    pub contractions: Option<ContractionMap>,
    pub auxiliaries: BTreeSet<String>,
}

impl LexiconBundle {
    /// An otherwise empty bundle holding the standard pronoun table and the
    /// default auxiliary list.
    pub fn with_defaults() -> LexiconBundle {
        LexiconBundle {
            pronoun_table: Some(PronounTable::standard()),
            auxiliaries: DEFAULT_AUXILIARIES.iter().map(|a| a.to_string()).collect(),
            ..LexiconBundle::default()
        }
    }

    pub fn synsets(&self) -> Result<&SynsetLexicon> {
        self.synsets
            .as_ref()
            .ok_or(Error::MissingResource("synsets"))
    }

    pub fn pronouns(&self) -> Result<&PronounTable> {
        self.pronoun_table
            .as_ref()
            .ok_or(Error::MissingResource("pronouns"))
    }

    pub fn graph(&self) -> Result<&ConceptGraph> {
        self.graph.as_ref().ok_or(Error::MissingResource("graph"))
    }

    pub fn embeddings(&self) -> Result<&EmbeddingTable> {
        self.embeddings
            .as_ref()
            .ok_or(Error::MissingResource("embeddings"))
    }

    pub fn contraction_map(&self) -> Result<&ContractionMap> {
        self.contractions
            .as_ref()
            .ok_or(Error::MissingResource("contractions"))
    }

    pub fn list(&self, kind: ListKind) -> Result<&WordList> {
        match kind {
            ListKind::Negation => self
                .negation
                .as_ref()
                .ok_or(Error::MissingResource("negation list")),
            ListKind::Causality => self
                .causality
                .as_ref()
                .ok_or(Error::MissingResource("causality list")),
            ListKind::Temporal => self
                .temporal
                .as_ref()
                .ok_or(Error::MissingResource("temporal list")),
        }
    }

    pub fn is_auxiliary(&self, word: &str) -> bool {
        self.auxiliaries.contains(&word.to_lowercase())
    }
}
