use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::rng::choose;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Triple {
    pub head: String,
    pub relation: String,
    pub tail: String,
}

/// Commonsense triples with a head → (relation, tail) index. Node lookup is
/// case-insensitive; stored surfaces keep their case.
#[derive(Debug, Clone, Default)]
pub struct ConceptGraph {
    triples: Vec<Triple>,
    index: BTreeMap<String, Vec<(String, String)>>,
}

impl ConceptGraph {
    /// Drops self-loops and multi-word entities, deduplicates, and sorts
    /// each adjacency list.
    pub fn new(triples: impl IntoIterator<Item = Triple>) -> ConceptGraph {
        let set: BTreeSet<Triple> = triples
            .into_iter()
            .filter(|t| t.head.to_lowercase() != t.tail.to_lowercase())
            .filter(|t| {
                ![&t.head, &t.tail]
                    .iter()
                    .any(|e| e.is_empty() || e.contains([' ', '_']))
            })
            .collect();
        let mut index: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
        for t in &set {
            index
                .entry(t.head.to_lowercase())
                .or_default()
                .push((t.relation.clone(), t.tail.clone()));
        }
        for adj in index.values_mut() {
            adj.sort();
        }
        ConceptGraph {
            triples: set.into_iter().collect(),
            index,
        }
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Outgoing (relation, tail) pairs of `lemma`, sorted.
    pub fn neighbors(&self, lemma: &str) -> &[(String, String)] {
        self.index
            .get(&lemma.to_lowercase())
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    fn eligible<'a>(
        &'a self,
        lemma: &str,
        allow: Option<&'a [String]>,
    ) -> Vec<&'a (String, String)> {
        let own = lemma.to_lowercase();
        self.neighbors(lemma)
            .iter()
            .filter(|(rel, tail)| {
                tail.to_lowercase() != own && allow.is_none_or(|a| a.iter().any(|r| r == rel))
            })
            .collect()
    }

    pub fn has_neighbors(&self, lemma: &str, allow: Option<&[String]>) -> bool {
        !self.eligible(lemma, allow).is_empty()
    }

    /// True when some triple has both its head and its tail in `lemmas`
    /// (lowercase).
    pub fn links_any(&self, lemmas: &BTreeSet<String>) -> bool {
        lemmas.iter().any(|h| {
            self.neighbors(h)
                .iter()
                .any(|(_, t)| lemmas.contains(&t.to_lowercase()))
        })
    }
}

/// Uniform seeded choice among the neighbors of `entity_lemma`, optionally
/// restricted to an allow-list of relations.
pub fn graph_neighbor<R: Rng + ?Sized>(
    entity_lemma: &str,
    graph: &ConceptGraph,
    allow: Option<&[String]>,
    rng: &mut R,
) -> Option<(String, String)> {
    choose(rng, &graph.eligible(entity_lemma, allow)).map(|&(r, t)| (r.clone(), t.clone()))
}
