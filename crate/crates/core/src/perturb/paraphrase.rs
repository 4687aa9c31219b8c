use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::corpus::{Segmenter, Sentence};
use crate::error::Result;
use crate::lexicon::EmbeddingTable;
use crate::metrics::{bleu1_precision, mover_similarity};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Paraphrase {
    pub text: String,
    pub similarity: f64,
    pub bleu1: f64,
}

/// Lookup key for a sentence: lowercased tokens joined by single spaces.
pub fn normalize_sentence(text: &str) -> String {
    let sentences = Segmenter::default().segment(text);
    key_of(sentences.iter().flat_map(|s| s.surfaces()))
}

fn key_of<'a>(tokens: impl Iterator<Item = &'a str>) -> String {
    let mut out = String::new();
    for t in tokens {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&t.to_lowercase());
    }
    out
}

/// A paraphrase is usable when it is close in meaning but lexically
/// different: similarity above `min_similarity` and BLEU-1 below `max_bleu1`.
pub fn passes_filter(similarity: f64, bleu1: f64, min_similarity: f64, max_bleu1: f64) -> bool {
    similarity > min_similarity && bleu1 < max_bleu1
}

/// Externally produced paraphrases keyed by normalized source sentence,
/// with precomputed similarity and BLEU-1 scores.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParaphraseBank {
    entries: BTreeMap<String, Vec<Paraphrase>>,
}

impl ParaphraseBank {
    pub fn new() -> ParaphraseBank {
        ParaphraseBank::default()
    }

    pub fn insert(&mut self, source: &str, paraphrase: Paraphrase) {
        self.entries
            .entry(normalize_sentence(source))
            .or_default()
            .push(paraphrase);
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, sentence: &Sentence) -> &[Paraphrase] {
        self.entries
            .get(&key_of(sentence.surfaces()))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Passing paraphrases of `sentence`, sorted by text.
    pub fn passing(
        &self,
        sentence: &Sentence,
        min_similarity: f64,
        max_bleu1: f64,
    ) -> Vec<&Paraphrase> {
        let mut out: Vec<&Paraphrase> = self
            .lookup(sentence)
            .iter()
            .filter(|p| passes_filter(p.similarity, p.bleu1, min_similarity, max_bleu1))
            .collect();
        out.sort_by(|a, b| a.text.cmp(&b.text));
        out.dedup_by(|a, b| a.text == b.text);
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Paraphrase)> {
        self.entries
            .iter()
            .flat_map(|(k, ps)| ps.iter().map(move |p| (k.as_str(), p)))
    }

    /// The same bank with both scores recomputed from `table`: mover
    /// similarity between source and paraphrase, and BLEU-1 of the
    /// paraphrase against the source.
    pub fn recomputed(&self, table: &EmbeddingTable) -> Result<ParaphraseBank> {
        let segmenter = Segmenter::default();
        let tokens = |text: &str| -> Vec<String> {
            segmenter
                .segment(text)
                .into_iter()
                .flat_map(|s| s.tokens.into_iter().map(|t| t.surface))
                .collect()
        };
        let mut out = ParaphraseBank::default();
        for (source, ps) in &self.entries {
            let src = tokens(source);
            let list = ps
                .iter()
                .map(|p| {
                    let para = tokens(&p.text);
                    Ok(Paraphrase {
                        text: p.text.clone(),
                        similarity: mover_similarity(&src, &para, table)?,
                        bleu1: bleu1_precision(&para, &src),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            out.entries.insert(source.clone(), list);
        }
        Ok(out)
    }
}
