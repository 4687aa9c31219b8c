use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use super::discrimination::{paraphrase_candidates, paraphrase_tokens, recase};
use super::{finish, Aspect, EditOp, Outcome, ParaphraseBank};
use crate::config::RunConfig;
use crate::corpus::{Pos, Story, Token};
use crate::error::{Error, Result};
use crate::lexicon::{synonym_candidates, ContractionMap, LexiconBundle};
use crate::rng::{choose, floor_count, rng_from_seed, sample_indices, StoryRng};

fn capital_i(word: String) -> String {
    match word.strip_prefix("i'") {
        Some(rest) => format!("I'{rest}"),
        None => word,
    }
}

fn contraction_edits(story: &Story, map: &ContractionMap) -> Vec<EditOp> {
    let lengths = map.full_lengths();
    let mut out = Vec::new();
    for (s, sentence) in story.sentences.iter().enumerate() {
        let t = &sentence.tokens;
        for (i, token) in t.iter().enumerate() {
            if let Some(full) = map.expansion(&token.surface) {
                let mut payload: Vec<String> = full.to_vec();
                payload[0] = recase(token, i, &payload[0]);
                out.push(EditOp::replace_tokens(s, i, i + 1, payload));
            }
            for &len in &lengths {
                if i + len > t.len() {
                    continue;
                }
                let words: Vec<&str> = t[i..i + len].iter().map(|x| x.surface.as_str()).collect();
                if let Some(short) = map.contraction(&words) {
                    out.push(EditOp::replace_tokens(
                        s,
                        i,
                        i + len,
                        alloc::vec![capital_i(recase(token, i, short))],
                    ));
                }
            }
        }
    }
    out
}

fn adjacent_to_digit(tokens: &[Token], i: usize) -> bool {
    let before = i
        .checked_sub(1)
        .and_then(|j| tokens[j].surface.chars().last());
    let after = tokens.get(i + 1).and_then(|t| t.surface.chars().next());
    before.is_some_and(|c| c.is_ascii_digit()) || after.is_some_and(|c| c.is_ascii_digit())
}

fn typo_eligible(word: &str) -> bool {
    word.chars().count() >= 3 && word.chars().all(char::is_alphabetic)
}

/// Swaps two adjacent differing characters, repeats one, or deletes one.
fn typo(word: &str, rng: &mut StoryRng) -> String {
    let mut chars: Vec<char> = word.chars().collect();
    let n = chars.len();
    let swappable: Vec<usize> = (0..n - 1).filter(|&j| chars[j] != chars[j + 1]).collect();
    match rng.gen_range(0..3) {
        0 if !swappable.is_empty() => {
            let j = swappable[rng.gen_range(0..swappable.len())];
            chars.swap(j, j + 1);
        }
        2 => {
            chars.remove(rng.gen_range(0..n));
        }
        _ => {
            let j = rng.gen_range(0..n);
            chars.insert(j, chars[j]);
        }
    }
    chars.into_iter().collect()
}

/// Meaning-preserving perturbation for an invariance aspect.
///
/// Synonym, Paraphrase and Contraction make exactly one change.
/// Punctuation deletes every configured mark not next to a digit. Typo
/// alters t = max(1, floor(rate·W)) of the W words.
pub fn perturb_invariance(
    story: &Story,
    aspect: Aspect,
    bundle: &LexiconBundle,
    bank: &ParaphraseBank,
    config: &RunConfig,
    seed: u64,
) -> Result<Outcome> {
    let mut rng = rng_from_seed(seed);
    let sites = |pred: &dyn Fn(&Token) -> bool| -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (s, sentence) in story.sentences.iter().enumerate() {
            for (i, t) in sentence.tokens.iter().enumerate() {
                if pred(t) {
                    out.push((s, i));
                }
            }
        }
        out
    };
    let (edits, basis) = match aspect {
        Aspect::Synonym => {
            let lexicon = bundle.synsets()?;
            let candidates = sites(&|t| {
                !matches!(t.pos, Pos::Punct | Pos::Pron)
                    && !synonym_candidates(t, lexicon).is_empty()
            });
            let Some(&(s, i)) = choose(&mut rng, &candidates) else {
                return Ok(Outcome::skip("no word with a synonym"));
            };
            let token = &story.sentences[s].tokens[i];
            let options = synonym_candidates(token, lexicon);
            let pick = choose(&mut rng, &options).cloned().unwrap_or_default();
            (
                alloc::vec![EditOp::replace_tokens(
                    s,
                    i,
                    i + 1,
                    alloc::vec![recase(token, i, &pick)]
                )],
                None,
            )
        }
        Aspect::Paraphrase => {
            let candidates = paraphrase_candidates(story, bank, config);
            let Some(&(s, p)) = choose(&mut rng, &candidates) else {
                return Ok(Outcome::skip("no passing paraphrase"));
            };
            (
                alloc::vec![EditOp::replace_sentence(
                    s,
                    paraphrase_tokens(&story.sentences[s], p)
                )],
                None,
            )
        }
        Aspect::Punctuation => {
            let marks = &config.punctuation_marks;
            let mut targets = Vec::new();
            for (s, sentence) in story.sentences.iter().enumerate() {
                for (i, t) in sentence.tokens.iter().enumerate() {
                    if marks.contains(&t.surface)
                        && !adjacent_to_digit(&sentence.tokens, i)
                    {
                        targets.push((s, i));
                    }
                }
            }
            if targets.is_empty() {
                return Ok(Outcome::skip("no deletable punctuation"));
            }
            // Deleting back to front keeps the remaining indices valid.
            (
                targets
                    .into_iter()
                    .rev()
                    .map(|(s, i)| EditOp::delete_tokens(s, i, i + 1))
                    .collect(),
                None,
            )
        }
        Aspect::Contraction => {
            let candidates = contraction_edits(story, bundle.contraction_map()?);
            let Some(edit) = choose(&mut rng, &candidates) else {
                return Ok(Outcome::skip("no contraction or expandable phrase"));
            };
            (alloc::vec![edit.clone()], None)
        }
        Aspect::Typo => {
            let words = story.word_count();
            let eligible = sites(&|t| typo_eligible(&t.surface));
            let t = floor_count(config.typo_rate, words);
            if eligible.len() < t || eligible.is_empty() {
                return Ok(Outcome::skip(format!(
                    "fewer than {} words of 3+ letters",
                    t.max(1)
                )));
            }
            let edits = sample_indices(&mut rng, eligible.len(), t)
                .into_iter()
                .map(|idx| {
                    let (s, i) = eligible[idx];
                    EditOp::replace_tokens(
                        s,
                        i,
                        i + 1,
                        alloc::vec![typo(&story.sentences[s].tokens[i].surface, &mut rng)],
                    )
                })
                .collect();
            (edits, Some(words))
        }
        other => {
            return Err(Error::UnknownAspect(format!(
                "{other} is not an invariance aspect"
            )))
        }
    };
    finish(story, aspect, 1, seed, edits, basis)
}
