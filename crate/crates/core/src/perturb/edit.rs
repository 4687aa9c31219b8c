use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::corpus::{Sentence, Story, Token};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EditKind {
    Insert,
    Delete,
    Replace,
    SwapSpans,
}

/// A half-open token span inside one sentence, or a half-open range of
/// whole sentences. Indices refer to the story as left by the preceding
/// edits of the same record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Location {
    Tokens {
        sentence: usize,
        start: usize,
        end: usize,
    },
    Sentences {
        start: usize,
        end: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EditOp {
    pub kind: EditKind,
    pub location: Location,
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Vec::is_empty")
    )]
    pub payload: Vec<String>,
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub second_location: Option<Location>,
}

impl EditOp {
    fn new(kind: EditKind, location: Location, payload: Vec<String>) -> EditOp {
        EditOp {
            kind,
            location,
            payload,
            second_location: None,
        }
    }

    pub fn insert_tokens(sentence: usize, at: usize, payload: Vec<String>) -> EditOp {
        EditOp::new(
            EditKind::Insert,
            Location::Tokens {
                sentence,
                start: at,
                end: at,
            },
            payload,
        )
    }

    /// Inserts a new sentence made of `payload` so that it becomes sentence `at`.
    pub fn insert_sentence(at: usize, payload: Vec<String>) -> EditOp {
        EditOp::new(
            EditKind::Insert,
            Location::Sentences { start: at, end: at },
            payload,
        )
    }

    pub fn delete_tokens(sentence: usize, start: usize, end: usize) -> EditOp {
        EditOp::new(
            EditKind::Delete,
            Location::Tokens {
                sentence,
                start,
                end,
            },
            Vec::new(),
        )
    }

    pub fn replace_tokens(
        sentence: usize,
        start: usize,
        end: usize,
        payload: Vec<String>,
    ) -> EditOp {
        EditOp::new(
            EditKind::Replace,
            Location::Tokens {
                sentence,
                start,
                end,
            },
            payload,
        )
    }

    pub fn replace_sentence(sentence: usize, payload: Vec<String>) -> EditOp {
        EditOp::new(
            EditKind::Replace,
            Location::Sentences {
                start: sentence,
                end: sentence + 1,
            },
            payload,
        )
    }

    /// Exchanges two non-overlapping spans of the same granularity; `first`
    /// must precede `second`.
    pub fn swap(first: Location, second: Location) -> EditOp {
        EditOp {
            kind: EditKind::SwapSpans,
            location: first,
            payload: Vec::new(),
            second_location: Some(second),
        }
    }
}

fn invalid(msg: String) -> Error {
    Error::InvalidEdit(msg)
}

fn new_tokens(payload: &[String]) -> Vec<Token> {
    payload.iter().map(|s| Token::new(s, (0, 0))).collect()
}

fn check_range(what: &str, start: usize, end: usize, len: usize, allow_empty: bool) -> Result<()> {
    if start > end || end > len || (!allow_empty && start == end) {
        return Err(invalid(format!(
            "{what} range {start}..{end} invalid for length {len}"
        )));
    }
    Ok(())
}

fn tokens_of(state: &mut [Vec<Token>], sentence: usize) -> Result<&mut Vec<Token>> {
    let n = state.len();
    state
        .get_mut(sentence)
        .ok_or_else(|| invalid(format!("sentence {sentence} out of {n}")))
}

fn apply_one(state: &mut Vec<Vec<Token>>, op: &EditOp) -> Result<()> {
    match (op.kind, op.location) {
        (
            EditKind::Insert,
            Location::Tokens {
                sentence,
                start,
                end,
            },
        ) => {
            let tokens = tokens_of(state, sentence)?;
            check_range("insert", start, end, tokens.len(), true)?;
            if start != end || op.payload.is_empty() {
                return Err(invalid("insert needs an empty span and a payload".into()));
            }
            tokens.splice(start..start, new_tokens(&op.payload));
        }
        (EditKind::Insert, Location::Sentences { start, end }) => {
            check_range("insert", start, end, state.len(), true)?;
            if start != end || op.payload.is_empty() {
                return Err(invalid("insert needs an empty span and a payload".into()));
            }
            state.insert(start, new_tokens(&op.payload));
        }
        (
            EditKind::Delete,
            Location::Tokens {
                sentence,
                start,
                end,
            },
        ) => {
            let tokens = tokens_of(state, sentence)?;
            check_range("delete", start, end, tokens.len(), false)?;
            tokens.drain(start..end);
        }
        (EditKind::Delete, Location::Sentences { start, end }) => {
            check_range("delete", start, end, state.len(), false)?;
            state.drain(start..end);
        }
        (
            EditKind::Replace,
            Location::Tokens {
                sentence,
                start,
                end,
            },
        ) => {
            let tokens = tokens_of(state, sentence)?;
            check_range("replace", start, end, tokens.len(), false)?;
            tokens.splice(start..end, new_tokens(&op.payload));
        }
        (EditKind::Replace, Location::Sentences { start, end }) => {
            check_range("replace", start, end, state.len(), false)?;
            if op.payload.is_empty() {
                return Err(invalid("sentence replacement needs a payload".into()));
            }
            state.splice(start..end, [new_tokens(&op.payload)]);
        }
        (EditKind::SwapSpans, first) => {
            let second = op
                .second_location
                .ok_or_else(|| invalid("swap without second location".into()))?;
            swap(state, first, second)?;
        }
    }
    Ok(())
}

fn swap(state: &mut [Vec<Token>], first: Location, second: Location) -> Result<()> {
    match (first, second) {
        (
            Location::Tokens {
                sentence: s1,
                start: a1,
                end: b1,
            },
            Location::Tokens {
                sentence: s2,
                start: a2,
                end: b2,
            },
        ) => {
            check_range("swap", a1, b1, tokens_of(state, s1)?.len(), false)?;
            check_range("swap", a2, b2, tokens_of(state, s2)?.len(), false)?;
            if s1 == s2 {
                if b1 > a2 {
                    return Err(invalid(format!(
                        "swap spans {a1}..{b1} and {a2}..{b2} overlap or are out of order"
                    )));
                }
                let tokens = &mut state[s1];
                let mut rebuilt: Vec<Token> = tokens[..a1].to_vec();
                rebuilt.extend_from_slice(&tokens[a2..b2]);
                rebuilt.extend_from_slice(&tokens[b1..a2]);
                rebuilt.extend_from_slice(&tokens[a1..b1]);
                rebuilt.extend_from_slice(&tokens[b2..]);
                *tokens = rebuilt;
            } else {
                let left: Vec<Token> = state[s1][a1..b1].to_vec();
                let right: Vec<Token> = state[s2][a2..b2].to_vec();
                state[s1].splice(a1..b1, right);
                state[s2].splice(a2..b2, left);
            }
        }
        (
            Location::Sentences { start: a1, end: b1 },
            Location::Sentences { start: a2, end: b2 },
        ) => {
            check_range("swap", a1, b1, state.len(), false)?;
            check_range("swap", a2, b2, state.len(), false)?;
            if b1 > a2 {
                return Err(invalid(format!(
                    "swap ranges {a1}..{b1} and {a2}..{b2} overlap or are out of order"
                )));
            }
            let block: Vec<Vec<Token>> = state[a1..b2].to_vec();
            let (n1, nm) = (b1 - a1, a2 - b1);
            let mut rebuilt: Vec<Vec<Token>> = Vec::with_capacity(block.len());
            rebuilt.extend_from_slice(&block[n1 + nm..]);
            rebuilt.extend_from_slice(&block[n1..n1 + nm]);
            rebuilt.extend_from_slice(&block[..n1]);
            state[a1..b2].clone_from_slice(&rebuilt);
        }
        _ => {
            return Err(invalid(
                "swap locations must have the same granularity".into(),
            ))
        }
    }
    Ok(())
}

/// Applies `edits` in order. Untouched tokens keep their tags; inserted ones
/// are untagged. Sentences left empty are dropped; the input is untouched.
pub fn apply_edits(story: &Story, edits: &[EditOp]) -> Result<Story> {
    let mut state: Vec<Vec<Token>> = story.sentences.iter().map(|s| s.tokens.clone()).collect();
    for op in edits {
        apply_one(&mut state, op)?;
    }
    let sentences = state
        .into_iter()
        .filter(|t| !t.is_empty())
        .map(Sentence::from_tokens)
        .collect();
    Ok(Story {
        sentences,
        ..story.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Segmenter;
    use alloc::string::ToString;
    use alloc::vec;

    fn story(text: &str) -> Story {
        Segmenter::default().story("s", "", text)
    }

    fn words(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn token_edits() {
        let s = story("he stepped on the stage .");
        let out = apply_edits(
            &s,
            &[EditOp::insert_tokens(
                0,
                5,
                words(&["and", "stepped", "on", "the", "stage"]),
            )],
        )
        .unwrap();
        assert_eq!(
            out.render(),
            "he stepped on the stage and stepped on the stage ."
        );
        let out = apply_edits(&s, &[EditOp::delete_tokens(0, 2, 4)]).unwrap();
        assert_eq!(out.render(), "he stepped stage .");
        let out = apply_edits(&s, &[EditOp::replace_tokens(0, 1, 2, words(&["walked"]))]).unwrap();
        assert_eq!(out.render(), "he walked on the stage .");
    }

    #[test]
    fn sequential_indices() {
        let s = story("a b c d .");
        let out = apply_edits(
            &s,
            &[
                EditOp::delete_tokens(0, 3, 4),
                EditOp::delete_tokens(0, 1, 2),
            ],
        )
        .unwrap();
        assert_eq!(out.render(), "a c .");
    }

    #[test]
    fn swaps() {
        let s = story("John asked it if John could .");
        let op = EditOp::swap(
            Location::Tokens {
                sentence: 0,
                start: 0,
                end: 1,
            },
            Location::Tokens {
                sentence: 0,
                start: 2,
                end: 3,
            },
        );
        assert_eq!(
            apply_edits(&s, &[op]).unwrap().render(),
            "it asked John if John could ."
        );

        let s = story("the sky is clear . so he can see it .");
        let op = EditOp::swap(
            Location::Tokens {
                sentence: 0,
                start: 0,
                end: 4,
            },
            Location::Tokens {
                sentence: 1,
                start: 1,
                end: 5,
            },
        );
        assert_eq!(
            apply_edits(&s, &[op]).unwrap().render(),
            "he can see it . so the sky is clear ."
        );

        let s = story("A . B b . C . D d d .");
        let op = EditOp::swap(
            Location::Sentences { start: 0, end: 1 },
            Location::Sentences { start: 2, end: 4 },
        );
        assert_eq!(
            apply_edits(&s, &[op]).unwrap().render(),
            "C . D d d . B b . A ."
        );
        let op = EditOp::swap(
            Location::Sentences { start: 0, end: 2 },
            Location::Sentences { start: 3, end: 4 },
        );
        assert_eq!(
            apply_edits(&s, &[op]).unwrap().render(),
            "D d d . C . A . B b ."
        );
    }

    #[test]
    fn sentence_edits() {
        let s = story("One . Two .");
        let out = apply_edits(&s, &[EditOp::insert_sentence(1, words(&["One", "."]))]).unwrap();
        assert_eq!(out.render(), "One . One . Two .");
        assert_eq!(out.sentences.len(), 3);
        let out = apply_edits(&s, &[EditOp::replace_sentence(1, words(&["Three", "."]))]).unwrap();
        assert_eq!(out.render(), "One . Three .");
    }

    #[test]
    fn invalid_edits_rejected() {
        let s = story("a b .");
        for op in [
            EditOp::delete_tokens(0, 2, 5),
            EditOp::delete_tokens(3, 0, 1),
            EditOp::insert_tokens(0, 1, vec![]),
            EditOp::swap(
                Location::Tokens {
                    sentence: 0,
                    start: 0,
                    end: 2,
                },
                Location::Tokens {
                    sentence: 0,
                    start: 1,
                    end: 2,
                },
            ),
        ] {
            assert!(matches!(apply_edits(&s, &[op]), Err(Error::InvalidEdit(_))));
        }
    }
}
