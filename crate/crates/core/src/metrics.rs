//! Reference-based and embedding-based similarity metrics.
//!
//! Token sequences are case-folded before counting. Punctuation tokens take
//! part in BLEU and ROUGE-L and are dropped by the embedding metrics.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::{is_punct_word, Story};
use crate::error::{Error, Result};
use crate::lexicon::EmbeddingTable;

fn fold<S: AsRef<str>>(tokens: &[S]) -> Vec<String> {
    tokens.iter().map(|t| t.as_ref().to_lowercase()).collect()
}

/// Counts of case-folded n-grams for n = 1..=max_n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramProfile {
    counts: Vec<BTreeMap<Vec<String>, usize>>,
}

impl NGramProfile {
    pub fn new<S: AsRef<str>>(tokens: &[S], max_n: usize) -> NGramProfile {
        let folded = fold(tokens);
        let counts = (1..=max_n)
            .map(|n| {
                let mut map = BTreeMap::new();
                if folded.len() >= n {
                    for gram in folded.windows(n) {
                        *map.entry(gram.to_vec()).or_insert(0) += 1;
                    }
                }
                map
            })
            .collect();
        NGramProfile { counts }
    }

    pub fn count(&self, gram: &[String]) -> usize {
        self.counts
            .get(gram.len().wrapping_sub(1))
            .and_then(|m| m.get(gram))
            .copied()
            .unwrap_or(0)
    }

    /// Number of n-grams (with multiplicity) of order `n`.
    pub fn total(&self, n: usize) -> usize {
        self.counts
            .get(n.wrapping_sub(1))
            .map(|m| m.values().sum())
            .unwrap_or(0)
    }

    pub fn grams(&self, n: usize) -> impl Iterator<Item = (&Vec<String>, usize)> {
        self.counts
            .get(n.wrapping_sub(1))
            .into_iter()
            .flat_map(|m| m.iter().map(|(g, c)| (g, *c)))
    }

    /// Highest multiplicity of any n-gram of order `n` (0 if none).
    pub fn max_count(&self, n: usize) -> usize {
        self.grams(n).map(|(_, c)| c).max().unwrap_or(0)
    }
}

fn clipped_matches(candidate: &NGramProfile, references: &[NGramProfile], n: usize) -> usize {
    candidate
        .grams(n)
        .map(|(gram, count)| {
            let max_ref = references.iter().map(|r| r.count(gram)).max().unwrap_or(0);
            count.min(max_ref)
        })
        .sum()
}

fn brevity_penalty(c: usize, r: usize) -> f64 {
    if c < r {
        libm::exp(1.0 - r as f64 / c as f64)
    } else {
        1.0
    }
}

/// Smoothed sentence BLEU.
///
/// Modified n-gram precisions are combined by geometric mean over
/// n = 1..=min(max_n, |candidate|); a zero precision is replaced by
/// 1/(2·|candidate|). The brevity penalty uses the closest reference length
/// (the shorter one on ties).
pub fn bleu_sentence<S: AsRef<str>, T: AsRef<str>>(
    candidate: &[S],
    references: &[Vec<T>],
    max_n: usize,
) -> f64 {
    let c = candidate.len();
    if c == 0 {
        log::warn!("bleu_sentence: empty candidate scores 0");
        return 0.0;
    }
    let references: Vec<&Vec<T>> = references.iter().filter(|r| !r.is_empty()).collect();
    if references.is_empty() || max_n == 0 {
        log::warn!("bleu_sentence: no non-empty reference, scoring 0");
        return 0.0;
    }
    let order = max_n.min(c);
    let cand = NGramProfile::new(candidate, order);
    let refs: Vec<NGramProfile> = references
        .iter()
        .map(|r| NGramProfile::new(r, order))
        .collect();
    let mut log_sum = 0.0;
    for n in 1..=order {
        let total = cand.total(n);
        let matches = clipped_matches(&cand, &refs, n);
        let p = if matches == 0 {
            1.0 / (2.0 * c as f64)
        } else {
            matches as f64 / total as f64
        };
        log_sum += libm::log(p);
    }
    let r = references
        .iter()
        .map(|r| r.len())
        .min_by_key(|&len| (len.abs_diff(c), len))
        .unwrap_or(c);
    brevity_penalty(c, r) * libm::exp(log_sum / order as f64)
}

/// Unsmoothed modified unigram precision times the brevity penalty.
pub fn bleu1_precision<S: AsRef<str>, T: AsRef<str>>(candidate: &[S], reference: &[T]) -> f64 {
    let c = candidate.len();
    if c == 0 || reference.is_empty() {
        return 0.0;
    }
    let cand = NGramProfile::new(candidate, 1);
    let refs = [NGramProfile::new(reference, 1)];
    let matches = clipped_matches(&cand, &refs, 1);
    brevity_penalty(c, reference.len()) * matches as f64 / c as f64
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// LCS-based F-measure, `(1+β²)PR / (R + β²P)`.
pub fn rouge_l<S: AsRef<str>, T: AsRef<str>>(candidate: &[S], reference: &[T], beta: f64) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let lcs = lcs_len(&fold(candidate), &fold(reference));
    if lcs == 0 {
        return 0.0;
    }
    let p = lcs as f64 / candidate.len() as f64;
    let r = lcs as f64 / reference.len() as f64;
    let b2 = beta * beta;
    (1.0 + b2) * p * r / (r + b2 * p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingMode {
    Greedy,
    Average,
    Extrema,
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = libm::sqrt(a.iter().map(|x| x * x).sum());
    let nb = libm::sqrt(b.iter().map(|x| x * x).sum());
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

struct Embedded<'a> {
    words: Vec<String>,
    vectors: Vec<&'a [f64]>,
}

fn embed<'a, S: AsRef<str>>(tokens: &[S], table: &'a EmbeddingTable) -> Result<Embedded<'a>> {
    let mut words = Vec::new();
    let mut vectors = Vec::new();
    for t in tokens {
        let t = t.as_ref();
        if is_punct_word(t) {
            continue;
        }
        let lower = t.to_lowercase();
        if let Some(v) = table.get(&lower) {
            words.push(lower);
            vectors.push(v);
        }
    }
    if vectors.is_empty() {
        Err(Error::NoEmbeddableTokens)
    } else {
        Ok(Embedded { words, vectors })
    }
}

fn max_cosine(v: &[f64], others: &[&[f64]]) -> f64 {
    others
        .iter()
        .map(|o| cosine(v, o))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn directional_greedy(a: &Embedded, b: &Embedded) -> f64 {
    a.vectors
        .iter()
        .map(|v| max_cosine(v, &b.vectors))
        .sum::<f64>()
        / a.vectors.len() as f64
}

fn mean_vector(vectors: &[&[f64]], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for v in vectors {
        for (o, x) in out.iter_mut().zip(v.iter()) {
            *o += x;
        }
    }
    let n = vectors.len() as f64;
    out.iter_mut().for_each(|o| *o /= n);
    out
}

fn extrema_vector(vectors: &[&[f64]], dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|d| {
            let hi = vectors
                .iter()
                .map(|v| v[d])
                .fold(f64::NEG_INFINITY, f64::max);
            let lo = vectors.iter().map(|v| v[d]).fold(f64::INFINITY, f64::min);
            if hi >= -lo {
                hi
            } else {
                lo
            }
        })
        .collect()
}

/// Greedy matching, embedding average or vector extrema similarity.
pub fn embedding_metric<S: AsRef<str>, T: AsRef<str>>(
    candidate: &[S],
    reference: &[T],
    table: &EmbeddingTable,
    mode: EmbeddingMode,
) -> Result<f64> {
    let c = embed(candidate, table)?;
    let r = embed(reference, table)?;
    let dim = table.dim();
    Ok(match mode {
        EmbeddingMode::Greedy => (directional_greedy(&c, &r) + directional_greedy(&r, &c)) / 2.0,
        EmbeddingMode::Average => {
            cosine(&mean_vector(&c.vectors, dim), &mean_vector(&r.vectors, dim))
        }
        EmbeddingMode::Extrema => cosine(
            &extrema_vector(&c.vectors, dim),
            &extrema_vector(&r.vectors, dim),
        ),
    })
}

fn directional_mover(a: &Embedded, b: &Embedded, table: &EmbeddingTable) -> f64 {
    let weights: Vec<f64> = a.words.iter().map(|w| table.idf(w)).collect();
    let total: f64 = weights.iter().sum();
    let sims = a.vectors.iter().map(|v| max_cosine(v, &b.vectors));
    if total > 0.0 {
        sims.zip(&weights).map(|(s, w)| s * w).sum::<f64>() / total
    } else {
        sims.sum::<f64>() / a.vectors.len() as f64
    }
}

/// IDF-weighted soft alignment similarity, symmetric in its arguments.
///
/// Each side contributes `Σ idf(w)·max_cos(w, other) / Σ idf(w)` over its
/// embeddable content tokens; the result is the mean of both directions.
/// If a side's idf weights are all zero its tokens are weighted equally.
pub fn mover_similarity<S: AsRef<str>, T: AsRef<str>>(
    s1: &[S],
    s2: &[T],
    table: &EmbeddingTable,
) -> Result<f64> {
    let a = embed(s1, table)?;
    let b = embed(s2, table)?;
    Ok((directional_mover(&a, &b, table) + directional_mover(&b, &a, table)) / 2.0)
}

/// Maximum [`mover_similarity`] over all unordered sentence pairs. Pairs
/// where a sentence has no embeddable token are skipped.
pub fn max_inter_sentence_similarity(story: &Story, table: &EmbeddingTable) -> Result<f64> {
    if story.sentences.len() < 2 {
        return Err(Error::NeedsTwoSentences);
    }
    let sentences: Vec<Vec<&str>> = story
        .sentences
        .iter()
        .map(|s| s.surfaces().collect())
        .collect();
    let mut best: Option<f64> = None;
    for i in 0..sentences.len() {
        for j in i + 1..sentences.len() {
            match mover_similarity(&sentences[i], &sentences[j], table) {
                Ok(v) => best = Some(best.map_or(v, |b| b.max(v))),
                Err(Error::NoEmbeddableTokens) => {}
                Err(e) => return Err(e),
            }
        }
    }
    best.ok_or(Error::NoEmbeddableTokens)
}
