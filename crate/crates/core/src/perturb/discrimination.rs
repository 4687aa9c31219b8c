use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{finish, Aspect, EditOp, Location, Outcome, Paraphrase, ParaphraseBank};
use crate::config::RunConfig;
use crate::corpus::{match_case, Pos, Segmenter, Sentence, Story, Token, WordForm};
use crate::error::Result;
use crate::lexicon::{
    antonym_candidates, graph_neighbor, pronoun_alternatives, LexiconBundle, ListKind,
    SynsetLexicon, WordList,
};
use crate::rng::{choose, rate_count, rng_from_seed, sample_indices, StoryRng};

pub(super) fn surfaces(tokens: &[Token]) -> Vec<String> {
    tokens.iter().map(|t| t.surface.clone()).collect()
}

fn lower_key(tokens: &[Token]) -> Vec<String> {
    tokens.iter().map(|t| t.surface.to_lowercase()).collect()
}

/// Index just past the last non-punctuation token.
fn body_end(tokens: &[Token]) -> usize {
    tokens
        .iter()
        .rposition(|t| !t.is_punct())
        .map_or(0, |i| i + 1)
}

/// Case of `word` adjusted to the token it replaces. A sentence-initial
/// "I" still capitalizes its replacement.
pub(super) fn recase(token: &Token, index: usize, word: &str) -> String {
    if token.surface == "I" && index == 0 {
        return match_case("Ii", word);
    }
    match_case(&token.surface, word)
}

/// Paraphrase tokens, borrowing the source sentence's final mark when the
/// paraphrase has none.
pub(super) fn paraphrase_tokens(source: &Sentence, paraphrase: &Paraphrase) -> Vec<String> {
    let mut out: Vec<String> = Segmenter::default()
        .segment(&paraphrase.text)
        .into_iter()
        .flat_map(|s| surfaces(&s.tokens))
        .collect();
    let ends_with_mark = out.last().is_some_and(|t| crate::corpus::is_punct_word(t));
    if !ends_with_mark {
        if let Some(last) = source.tokens.last().filter(|t| t.is_punct()) {
            out.push(last.surface.clone());
        }
    }
    out
}

/// (sentence, paraphrase) pairs passing the bank filter, in sentence order.
pub(super) fn paraphrase_candidates<'a>(
    story: &Story,
    bank: &'a ParaphraseBank,
    config: &RunConfig,
) -> Vec<(usize, &'a Paraphrase)> {
    story
        .sentences
        .iter()
        .enumerate()
        .flat_map(|(s, sentence)| {
            bank.passing(
                sentence,
                config.paraphrase_min_similarity,
                config.paraphrase_max_bleu1,
            )
            .into_iter()
            .map(move |p| (s, p))
        })
        .collect()
}

/// (1) repeats a 4-gram of words with "and" before the copy; (2) repeats a
/// sentence right after itself.
pub fn perturb_lexical_repetition(story: &Story, technique: u8, seed: u64) -> Result<Outcome> {
    let mut rng = rng_from_seed(seed);
    let edit = match technique {
        1 => {
            let mut grams = Vec::new();
            for (s, sentence) in story.sentences.iter().enumerate() {
                let t = &sentence.tokens;
                for i in 0..t.len().saturating_sub(3) {
                    if t[i..i + 4].iter().all(|x| !x.is_punct()) {
                        grams.push((s, i));
                    }
                }
            }
            let Some(&(s, i)) = choose(&mut rng, &grams) else {
                return Ok(Outcome::skip("no 4-gram"));
            };
            let mut payload = alloc::vec!["and".to_string()];
            payload.extend(surfaces(&story.sentences[s].tokens[i..i + 4]));
            EditOp::insert_tokens(s, i + 4, payload)
        }
        _ => {
            if story.sentences.is_empty() {
                return Ok(Outcome::skip("no sentence"));
            }
            let s = rng.gen_index(story.sentences.len());
            EditOp::insert_sentence(s + 1, surfaces(&story.sentences[s].tokens))
        }
    };
    finish(
        story,
        Aspect::LexicalRepetition,
        technique,
        seed,
        alloc::vec![edit],
        None,
    )
}

/// Inserts a passing paraphrase right after its source sentence.
pub fn perturb_semantic_repetition(
    story: &Story,
    bank: &ParaphraseBank,
    config: &RunConfig,
    seed: u64,
) -> Result<Outcome> {
    let mut rng = rng_from_seed(seed);
    let candidates = paraphrase_candidates(story, bank, config);
    let Some(&(s, p)) = choose(&mut rng, &candidates) else {
        return Ok(Outcome::skip("no passing paraphrase"));
    };
    let edit = EditOp::insert_sentence(s + 1, paraphrase_tokens(&story.sentences[s], p));
    finish(
        story,
        Aspect::SemanticRepetition,
        1,
        seed,
        alloc::vec![edit],
        None,
    )
}

fn is_nominal(t: &Token) -> bool {
    matches!(t.pos, Pos::Noun | Pos::Pron)
}

/// Subject and object positions: the nearest noun or pronoun before the
/// first verb and the first one after it.
fn subject_object(tokens: &[Token]) -> Option<(usize, usize)> {
    let v = tokens.iter().position(|t| t.pos == Pos::Verb)?;
    let subject = (0..v).rev().find(|&i| is_nominal(&tokens[i]))?;
    let object = (v + 1..tokens.len()).find(|&i| is_nominal(&tokens[i]))?;
    (tokens[subject].surface.to_lowercase() != tokens[object].surface.to_lowercase())
        .then_some((subject, object))
}

/// (1) swaps subject and object; (2) replaces a personal pronoun with the
/// same-case pronoun of another person.
pub fn perturb_character_behavior(
    story: &Story,
    technique: u8,
    bundle: &LexiconBundle,
    seed: u64,
) -> Result<Outcome> {
    let mut rng = rng_from_seed(seed);
    let edit = match technique {
        1 => {
            let patterns: Vec<(usize, usize, usize)> = story
                .sentences
                .iter()
                .enumerate()
                .filter_map(|(s, sentence)| {
                    subject_object(&sentence.tokens).map(|(a, b)| (s, a, b))
                })
                .collect();
            let Some(&(s, a, b)) = choose(&mut rng, &patterns) else {
                return Ok(Outcome::skip("no subject-verb-object pattern"));
            };
            EditOp::swap(
                Location::Tokens {
                    sentence: s,
                    start: a,
                    end: a + 1,
                },
                Location::Tokens {
                    sentence: s,
                    start: b,
                    end: b + 1,
                },
            )
        }
        _ => {
            let table = bundle.pronouns()?;
            let mut sites = Vec::new();
            for (s, sentence) in story.sentences.iter().enumerate() {
                for (i, t) in sentence.tokens.iter().enumerate() {
                    if t.pos == Pos::Pron && !pronoun_alternatives(&t.surface, table).is_empty() {
                        sites.push((s, i));
                    }
                }
            }
            let Some(&(s, i)) = choose(&mut rng, &sites) else {
                return Ok(Outcome::skip("no pronoun with alternatives"));
            };
            let token = &story.sentences[s].tokens[i];
            let mut alternatives: Vec<String> = pronoun_alternatives(&token.surface, table)
                .into_iter()
                .map(|a| a.surface)
                .collect();
            alternatives.sort();
            alternatives.dedup();
            let pick = choose(&mut rng, &alternatives).cloned().unwrap_or_default();
            EditOp::replace_tokens(s, i, i + 1, alloc::vec![recase(token, i, &pick)])
        }
    };
    finish(
        story,
        Aspect::CharacterBehavior,
        technique,
        seed,
        alloc::vec![edit],
        None,
    )
}

fn inflect_like(lexicon: &SynsetLexicon, token: &Token, lemma: &str) -> String {
    let word = if token.form == WordForm::Base {
        lemma.to_string()
    } else {
        lexicon
            .inflect(&lemma.to_lowercase(), token.pos, token.form)
            .unwrap_or_else(|| lemma.to_string())
    };
    match token.surface.chars().next() {
        Some(c) if c.is_uppercase() => match_case(&token.surface, &word),
        _ => word,
    }
}

/// Replaces k = max(1, round(rate·E)) of the E graph-linked noun and verb
/// tokens with an inflected graph neighbor.
pub fn perturb_commonsense(
    story: &Story,
    bundle: &LexiconBundle,
    config: &RunConfig,
    seed: u64,
) -> Result<Outcome> {
    let graph = bundle.graph()?;
    let lexicon = bundle.synsets()?;
    let allow = config.relation_allow_list.as_deref();
    let mut rng = rng_from_seed(seed);
    let mut entities = Vec::new();
    for (s, sentence) in story.sentences.iter().enumerate() {
        for (i, t) in sentence.tokens.iter().enumerate() {
            if t.pos.is_content() && graph.has_neighbors(&t.lemma, allow) {
                entities.push((s, i));
            }
        }
    }
    if entities.is_empty() {
        return Ok(Outcome::skip("no graph entity"));
    }
    let k = rate_count(config.commonsense_rate, entities.len());
    let mut edits = Vec::with_capacity(k);
    for idx in sample_indices(&mut rng, entities.len(), k) {
        let (s, i) = entities[idx];
        let token = &story.sentences[s].tokens[i];
        let (_, tail) =
            graph_neighbor(&token.lemma, graph, allow, &mut rng).expect("entity has neighbors");
        edits.push(EditOp::replace_tokens(
            s,
            i,
            i + 1,
            alloc::vec![inflect_like(lexicon, token, &tail)],
        ));
    }
    finish(
        story,
        Aspect::CommonSense,
        1,
        seed,
        edits,
        Some(entities.len()),
    )
}

const IRREGULAR_NEGATIONS: [(&str, &str); 4] = [
    ("can't", "can"),
    ("won't", "will"),
    ("shan't", "shall"),
    ("ain't", "is"),
];

fn strip_negation(surface: &str) -> Option<String> {
    let lower = surface.to_lowercase().replace('\u{2019}', "'");
    if let Some(&(_, base)) = IRREGULAR_NEGATIONS.iter().find(|(neg, _)| *neg == lower) {
        return Some(match_case(surface, base));
    }
    let stem = lower.strip_suffix("n't")?;
    (!stem.is_empty()).then(|| match_case(surface, stem))
}

/// The single edit that flips the polarity of a sentence, if any.
fn negation_edit(
    s: usize,
    tokens: &[Token],
    negation: &WordList,
    bundle: &LexiconBundle,
) -> Option<EditOp> {
    for (i, t) in tokens.iter().enumerate() {
        if negation.is_function_word(&t.surface) {
            return Some(EditOp::delete_tokens(s, i, i + 1));
        }
        if let Some(base) = strip_negation(&t.surface) {
            return Some(EditOp::replace_tokens(s, i, i + 1, alloc::vec![base]));
        }
    }
    if let Some(a) = tokens.iter().position(|t| bundle.is_auxiliary(&t.surface)) {
        return Some(EditOp::insert_tokens(
            s,
            a + 1,
            alloc::vec!["not".to_string()],
        ));
    }
    let v = tokens.iter().position(|t| t.pos == Pos::Verb)?;
    Some(EditOp::insert_tokens(s, v, alloc::vec!["not".to_string()]))
}

/// (1) replaces one word with an inflected antonym; (2) flips negation in
/// m = max(1, round(rate·S)) sentences by deleting a negation word or
/// inserting "not".
pub fn perturb_consistency(
    story: &Story,
    technique: u8,
    bundle: &LexiconBundle,
    config: &RunConfig,
    seed: u64,
) -> Result<Outcome> {
    let mut rng = rng_from_seed(seed);
    match technique {
        1 => {
            let lexicon = bundle.synsets()?;
            let mut sites = Vec::new();
            for (s, sentence) in story.sentences.iter().enumerate() {
                for (i, t) in sentence.tokens.iter().enumerate() {
                    if !matches!(t.pos, Pos::Punct | Pos::Pron)
                        && !antonym_candidates(t, lexicon).is_empty()
                    {
                        sites.push((s, i));
                    }
                }
            }
            let Some(&(s, i)) = choose(&mut rng, &sites) else {
                return Ok(Outcome::skip("no word with an inflectable antonym"));
            };
            let token = &story.sentences[s].tokens[i];
            let candidates = antonym_candidates(token, lexicon);
            let pick = choose(&mut rng, &candidates).cloned().unwrap_or_default();
            let edit = EditOp::replace_tokens(s, i, i + 1, alloc::vec![recase(token, i, &pick)]);
            finish(story, Aspect::Consistency, 1, seed, alloc::vec![edit], None)
        }
        _ => {
            let negation = bundle.list(ListKind::Negation)?;
            let sentences = story.sentences.len();
            if sentences == 0 {
                return Ok(Outcome::skip("no sentence"));
            }
            let m = rate_count(config.negation_rate, sentences);
            let eligible: Vec<EditOp> = story
                .sentences
                .iter()
                .enumerate()
                .filter_map(|(s, sentence)| negation_edit(s, &sentence.tokens, negation, bundle))
                .collect();
            if eligible.len() < m {
                return Ok(Outcome::skip(format!("fewer than {m} negatable sentences")));
            }
            let edits = sample_indices(&mut rng, eligible.len(), m)
                .into_iter()
                .map(|i| eligible[i].clone())
                .collect();
            finish(story, Aspect::Consistency, 2, seed, edits, Some(sentences))
        }
    }
}

trait GenIndex {
    fn gen_index(&mut self, n: usize) -> usize;
}

impl GenIndex for StoryRng {
    fn gen_index(&mut self, n: usize) -> usize {
        rand::Rng::gen_range(self, 0..n)
    }
}

/// (1) replaces k = max(1, round(rate·C)) of the C noun and verb tokens
/// with random same-POS lexicon words in the same form; (2) replaces a
/// sentence with one from another story.
pub fn perturb_relatedness(
    story: &Story,
    technique: u8,
    corpus: &[Story],
    bundle: &LexiconBundle,
    config: &RunConfig,
    seed: u64,
) -> Result<Outcome> {
    let mut rng = rng_from_seed(seed);
    match technique {
        1 => {
            let lexicon = bundle.synsets()?;
            let mut sites = Vec::new();
            for (s, sentence) in story.sentences.iter().enumerate() {
                for (i, t) in sentence.tokens.iter().enumerate() {
                    if t.pos.is_content() {
                        sites.push((s, i));
                    }
                }
            }
            if sites.is_empty() {
                return Ok(Outcome::skip("no noun or verb"));
            }
            let k = rate_count(config.relatedness_rate, sites.len());
            let mut edits = Vec::with_capacity(k);
            for idx in sample_indices(&mut rng, sites.len(), k) {
                let (s, i) = sites[idx];
                let token = &story.sentences[s].tokens[i];
                let own = token.surface.to_lowercase();
                let replacements: Vec<String> = lexicon
                    .lemmas(token.pos)
                    .filter(|l| *l != token.lemma && !l.contains([' ', '_']))
                    .filter_map(|l| lexicon.inflect(l, token.pos, token.form))
                    .filter(|w| *w != own)
                    .collect();
                let Some(word) = choose(&mut rng, &replacements) else {
                    return Ok(Outcome::skip(format!(
                        "no replacement {}",
                        token.pos.as_str()
                    )));
                };
                edits.push(EditOp::replace_tokens(
                    s,
                    i,
                    i + 1,
                    alloc::vec![recase(token, i, word)],
                ));
            }
            finish(
                story,
                Aspect::Relatedness,
                1,
                seed,
                edits,
                Some(sites.len()),
            )
        }
        _ => {
            if corpus.len() < 2 {
                return Ok(Outcome::skip("corpus has fewer than 2 stories"));
            }
            if story.sentences.is_empty() {
                return Ok(Outcome::skip("no sentence"));
            }
            let s = rng.gen_index(story.sentences.len());
            let target = lower_key(&story.sentences[s].tokens);
            let donors: Vec<&Sentence> = corpus
                .iter()
                .filter(|other| other.id != story.id)
                .flat_map(|other| other.sentences.iter())
                .filter(|d| !d.tokens.is_empty() && lower_key(&d.tokens) != target)
                .collect();
            let Some(donor) = choose(&mut rng, &donors) else {
                return Ok(Outcome::skip("no donor sentence"));
            };
            let edit = EditOp::replace_sentence(s, surfaces(&donor.tokens));
            finish(story, Aspect::Relatedness, 2, seed, alloc::vec![edit], None)
        }
    }
}

/// Swap edits around each connective of `list`, in text order.
///
/// A sentence-initial connective swaps the previous sentence's body with
/// the rest of its own sentence; a mid-sentence connective with a verb on
/// both sides swaps the two clauses; any other mid-sentence connective
/// swaps its sentence with the previous one.
fn reorder_candidates(story: &Story, list: &WordList) -> Vec<EditOp> {
    let mut out = Vec::new();
    for (s, sentence) in story.sentences.iter().enumerate() {
        let t = &sentence.tokens;
        let end = body_end(t);
        for (i, token) in t.iter().enumerate() {
            if !list.is_function_word(&token.surface) {
                continue;
            }
            let first_word = t.iter().position(|x| !x.is_punct()).unwrap_or(0);
            if i == first_word {
                if s == 0 {
                    continue;
                }
                let prev_end = body_end(&story.sentences[s - 1].tokens);
                let mut start = i + 1;
                while start < end && t[start].surface == "," {
                    start += 1;
                }
                if prev_end > 0 && start < end {
                    out.push(EditOp::swap(
                        Location::Tokens {
                            sentence: s - 1,
                            start: 0,
                            end: prev_end,
                        },
                        Location::Tokens {
                            sentence: s,
                            start,
                            end,
                        },
                    ));
                }
                continue;
            }
            let mut left_end = i;
            while left_end > 0 && t[left_end - 1].surface == "," {
                left_end -= 1;
            }
            let has_verb = |r: core::ops::Range<usize>| t[r].iter().any(|x| x.pos == Pos::Verb);
            if left_end > 0 && i + 1 < end && has_verb(0..left_end) && has_verb(i + 1..end) {
                out.push(EditOp::swap(
                    Location::Tokens {
                        sentence: s,
                        start: 0,
                        end: left_end,
                    },
                    Location::Tokens {
                        sentence: s,
                        start: i + 1,
                        end,
                    },
                ));
            } else if s > 0 {
                out.push(EditOp::swap(
                    Location::Sentences {
                        start: s - 1,
                        end: s,
                    },
                    Location::Sentences {
                        start: s,
                        end: s + 1,
                    },
                ));
            }
        }
    }
    out
}

fn perturb_connective(
    story: &Story,
    technique: u8,
    list: &WordList,
    aspect: Aspect,
    seed: u64,
) -> Result<Outcome> {
    let mut rng = rng_from_seed(seed);
    let edit = match technique {
        1 => {
            let candidates = reorder_candidates(story, list);
            let Some(edit) = choose(&mut rng, &candidates) else {
                return Ok(Outcome::skip(format!(
                    "no reorderable {} connective",
                    list.kind.as_str()
                )));
            };
            edit.clone()
        }
        _ => {
            let mut sites = Vec::new();
            for (s, sentence) in story.sentences.iter().enumerate() {
                for (i, t) in sentence.tokens.iter().enumerate() {
                    if list.partners(&t.surface).next().is_some() {
                        sites.push((s, i));
                    }
                }
            }
            let Some(&(s, i)) = choose(&mut rng, &sites) else {
                return Ok(Outcome::skip(format!(
                    "no {} word with an antonym",
                    list.kind.as_str()
                )));
            };
            let token = &story.sentences[s].tokens[i];
            let partners: Vec<&str> = list.partners(&token.surface).collect();
            let pick = choose(&mut rng, &partners).copied().unwrap_or_default();
            EditOp::replace_tokens(s, i, i + 1, alloc::vec![recase(token, i, pick)])
        }
    };
    finish(story, aspect, technique, seed, alloc::vec![edit], None)
}

/// (1) reorders cause and effect around a causal connective; (2) replaces a
/// causality word with its antonym.
pub fn perturb_causal(
    story: &Story,
    technique: u8,
    bundle: &LexiconBundle,
    seed: u64,
) -> Result<Outcome> {
    perturb_connective(
        story,
        technique,
        bundle.list(ListKind::Causality)?,
        Aspect::CausalRelationship,
        seed,
    )
}

/// (1) reorders two events around a time connective; (2) replaces a
/// time word with its antonym.
pub fn perturb_temporal(
    story: &Story,
    technique: u8,
    bundle: &LexiconBundle,
    seed: u64,
) -> Result<Outcome> {
    perturb_connective(
        story,
        technique,
        bundle.list(ListKind::Temporal)?,
        Aspect::TemporalRelationship,
        seed,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{bundle, tagged, tagged_id};
    use crate::perturb::{apply_edits, PerturbationRecord};

    fn done(outcome: Outcome) -> (Story, PerturbationRecord) {
        match outcome {
            Outcome::Perturbed(s, r) => (s, r),
            Outcome::Skipped(reason) => panic!("skipped: {reason}"),
        }
    }

    fn skip_reason(outcome: Outcome) -> String {
        match outcome {
            Outcome::Skipped(reason) => reason,
            Outcome::Perturbed(s, _) => panic!("unexpectedly perturbed: {}", s.render()),
        }
    }

    #[test]
    fn lexical_repetition_4gram() {
        let story = tagged("he stepped on the stage.");
        let (out, record) = done(perturb_lexical_repetition(&story, 1, 3).unwrap());
        let text = out.render();
        // the only word 4-grams are "he stepped on the" and "stepped on the stage"
        assert!(
            text == "he stepped on the stage and stepped on the stage ."
                || text == "he stepped on the and he stepped on the stage .",
            "{text}"
        );
        assert_eq!(apply_edits(&story, &record.edits).unwrap(), out);
        let hits = (0..64)
            .filter(|&seed| {
                done(perturb_lexical_repetition(&story, 1, seed).unwrap())
                    .0
                    .render()
                    == "he stepped on the stage and stepped on the stage ."
            })
            .count();
        assert!(hits > 0 && hits < 64);
    }

    #[test]
    fn lexical_repetition_sentence_and_skips() {
        let story = tagged("One day it rained.");
        let (out, _) = done(perturb_lexical_repetition(&story, 2, 0).unwrap());
        assert_eq!(out.render(), "One day it rained . One day it rained .");
        assert_eq!(
            skip_reason(perturb_lexical_repetition(&tagged("Go now. Run."), 1, 0).unwrap()),
            "no 4-gram"
        );
    }

    #[test]
    fn semantic_repetition_inserts_paraphrase() {
        let mut bank = ParaphraseBank::new();
        bank.insert(
            "he hired an attorney.",
            Paraphrase {
                text: "he employed a lawyer".into(),
                similarity: 0.57,
                bleu1: 0.40,
            },
        );
        bank.insert(
            "She watched a video of the play.",
            Paraphrase {
                text: "She later watched a video of the play".into(),
                similarity: 0.9,
                bleu1: 0.89,
            },
        );
        let config = RunConfig::default();
        let (out, _) = done(
            perturb_semantic_repetition(&tagged("he hired an attorney."), &bank, &config, 0)
                .unwrap(),
        );
        assert_eq!(
            out.render(),
            "he hired an attorney . he employed a lawyer ."
        );
        let rejected = perturb_semantic_repetition(
            &tagged("She watched a video of the play."),
            &bank,
            &config,
            0,
        );
        assert_eq!(skip_reason(rejected.unwrap()), "no passing paraphrase");
        let empty = ParaphraseBank::new();
        assert!(
            perturb_semantic_repetition(&tagged("he hired an attorney."), &empty, &config, 0)
                .unwrap()
                .is_skip()
        );
    }

    #[test]
    fn subject_object_swap() {
        let story = tagged("Then John asked it if John could come.");
        let (out, _) = done(perturb_character_behavior(&story, 1, &bundle(), 0).unwrap());
        assert_eq!(out.render(), "Then it asked John if John could come .");
    }

    #[test]
    fn pronoun_substitution_keeps_the_case_column() {
        let b = bundle();
        let story = tagged("It was my dog.");
        let mut seen = alloc::collections::BTreeSet::new();
        for seed in 0..200 {
            let (out, _) = done(perturb_character_behavior(&story, 2, &b, seed).unwrap());
            let words: Vec<String> = out.sentences[0].surfaces().map(str::to_lowercase).collect();
            if words[0] == "it" {
                seen.insert(words[2].clone());
            }
        }
        let expected: alloc::collections::BTreeSet<String> =
            ["his", "our", "your", "her", "their", "its"]
                .iter()
                .map(|s| s.to_string())
                .collect();
        assert_eq!(seen, expected);
        assert_eq!(
            skip_reason(perturb_character_behavior(&tagged("The dog ran."), 2, &b, 0).unwrap()),
            "no pronoun with alternatives"
        );
    }

    #[test]
    fn commonsense_substitution() {
        let b = bundle();
        let config = RunConfig::default();
        let (out, record) =
            done(perturb_commonsense(&tagged("We love Halloween."), &b, &config, 0).unwrap());
        assert_eq!(out.render(), "We love Christmas .");
        assert_eq!(record.basis, Some(1));
        assert!(
            perturb_commonsense(&tagged("We love music."), &b, &config, 0)
                .unwrap()
                .is_skip()
        );
    }

    #[test]
    fn commonsense_rate() {
        let b = bundle();
        let config = RunConfig::default();
        for (entities, k) in [(7, 1), (25, 3), (14, 1), (15, 2)] {
            let text = alloc::vec!["the oven"; entities].join(" and ") + ".";
            let (_, record) = done(perturb_commonsense(&tagged(&text), &b, &config, 5).unwrap());
            assert_eq!(record.basis, Some(entities));
            assert_eq!(record.edits.len(), k, "E = {entities}");
        }
    }

    #[test]
    fn antonym_substitution() {
        let b = bundle();
        let config = RunConfig::default();
        let (out, _) = done(
            perturb_consistency(&tagged("she agreed to get vaccinated."), 1, &b, &config, 0)
                .unwrap(),
        );
        assert_eq!(out.render(), "she disagreed to get vaccinated .");
    }

    #[test]
    fn negation_flips() {
        let b = bundle();
        let config = RunConfig::default();
        let (out, record) = done(
            perturb_consistency(&tagged("Tom decided not to give up."), 2, &b, &config, 0).unwrap(),
        );
        assert_eq!(out.render(), "Tom decided to give up .");
        assert_eq!(record.basis, Some(1));
        let (out, _) =
            done(perturb_consistency(&tagged("I was hungry."), 2, &b, &config, 0).unwrap());
        assert_eq!(out.render(), "I was not hungry .");
        let (out, _) =
            done(perturb_consistency(&tagged("He didn't jump."), 2, &b, &config, 0).unwrap());
        assert_eq!(out.render(), "He did jump .");
        let (out, _) =
            done(perturb_consistency(&tagged("He won't jump."), 2, &b, &config, 0).unwrap());
        assert_eq!(out.render(), "He will jump .");
        let five = tagged("I was sad. He was sad. It was sad. We were sad. They were sad.");
        let (_, record) = done(perturb_consistency(&five, 2, &b, &config, 9).unwrap());
        assert_eq!(record.edits.len(), 1);
        let eight = tagged("I was sad. He was sad. It was sad. We were sad. They were sad. I was sad. He was sad. Oh.");
        let (_, record) = done(perturb_consistency(&eight, 2, &b, &config, 9).unwrap());
        assert_eq!(record.edits.len(), 2);
        // no sentence has a verb, auxiliary or negation to flip
        let few = tagged("Oh. Ah. Hm. Eh. Ok.");
        assert!(perturb_consistency(&few, 2, &b, &config, 0)
            .unwrap()
            .is_skip());
    }

    #[test]
    fn relatedness_word_substitution_keeps_pos() {
        let b = bundle();
        let config = RunConfig::default();
        let story = tagged("The dog ran to the kitchen.");
        for seed in 0..50 {
            let (out, record) =
                done(perturb_relatedness(&story, 1, &[], &b, &config, seed).unwrap());
            assert_eq!(record.basis, Some(3));
            assert_eq!(record.edits.len(), 1);
            let retagged = crate::corpus::tag_story(&out, &b).unwrap();
            let before: Vec<Pos> = story.tokens().map(|t| t.pos).collect();
            let after: Vec<Pos> = retagged.tokens().map(|t| t.pos).collect();
            assert_eq!(before, after, "{}", out.render());
        }
    }

    #[test]
    fn relatedness_sentence_substitution() {
        let b = bundle();
        let config = RunConfig::default();
        let a = tagged_id("a", "he decided to fight it.");
        let other = tagged_id("b", "Kelly wanted to put up the Christmas tree.");
        let corpus = [a.clone(), other];
        let (out, _) = done(perturb_relatedness(&a, 2, &corpus, &b, &config, 0).unwrap());
        assert_eq!(out.render(), "Kelly wanted to put up the Christmas tree .");
        assert!(perturb_relatedness(&a, 2, &corpus[..1], &b, &config, 0)
            .unwrap()
            .is_skip());
    }

    #[test]
    fn causal_reordering() {
        let b = bundle();
        let (out, _) =
            done(perturb_causal(&tagged("the sky is clear. so he can see it."), 1, &b, 0).unwrap());
        assert_eq!(out.render(), "he can see it . so the sky is clear .");
        let (out, _) =
            done(perturb_causal(&tagged("He ran because the dog ran."), 1, &b, 0).unwrap());
        assert_eq!(out.render(), "the dog ran because He ran .");
        let (out, _) = done(perturb_causal(&tagged("That is the reason."), 2, &b, 0).unwrap());
        assert_eq!(out.render(), "That is the result .");
        assert!(perturb_causal(&tagged("The dog ran."), 1, &b, 0)
            .unwrap()
            .is_skip());
        assert!(perturb_causal(&tagged("The dog ran."), 2, &b, 0)
            .unwrap()
            .is_skip());
    }

    #[test]
    fn temporal_reordering_and_antonyms() {
        let b = bundle();
        let story = tagged("She played with fire. Tina then learnt her lesson.");
        let (out, record) = done(perturb_temporal(&story, 1, &b, 0).unwrap());
        assert_eq!(
            out.render(),
            "Tina then learnt her lesson . She played with fire ."
        );
        assert_eq!(
            apply_edits(&story, &record.edits).unwrap().render(),
            out.render()
        );
        let (out, _) = done(
            perturb_temporal(&tagged("after eating one bite I was not hungry"), 2, &b, 0).unwrap(),
        );
        assert_eq!(out.render(), "before eating one bite I was not hungry");
        let (out, _) = done(
            perturb_temporal(&tagged("After eating one bite I was not hungry"), 2, &b, 0).unwrap(),
        );
        assert_eq!(out.render(), "Before eating one bite I was not hungry");
        assert!(perturb_temporal(&tagged("The dog ran."), 1, &b, 0)
            .unwrap()
            .is_skip());
    }

    #[test]
    fn input_is_never_touched() {
        let b = bundle();
        let mut story = tagged("the sky is clear. so he can see it.");
        story.input = "A prompt .".into();
        let (out, _) = done(perturb_causal(&story, 1, &b, 0).unwrap());
        assert_eq!(out.input, "A prompt .");
    }
}
