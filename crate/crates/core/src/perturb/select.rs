use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::Aspect;
use crate::config::RunConfig;
use crate::corpus::{Corpus, Pos, Story, WordForm};
use crate::error::{Error, Result};
use crate::lexicon::{LexiconBundle, ListKind, PronounTable};
use crate::metrics::max_inter_sentence_similarity;

const PASSIVE_AUXILIARIES: [&str; 3] = ["was", "were", "been"];

/// `was`/`were`/`been` followed (optionally across one adverb) by a past
/// participle: a verb tagged past or past participle, or an untagged word
/// ending in `-ed`/`-en`.
pub fn has_passive_voice(story: &Story) -> bool {
    story.sentences.iter().any(|s| {
        let t = &s.tokens;
        (0..t.len()).any(|i| {
            if !PASSIVE_AUXILIARIES.contains(&t[i].surface.to_lowercase().as_str()) {
                return false;
            }
            let mut j = i + 1;
            if t.get(j).is_some_and(|x| x.pos == Pos::Adv) {
                j += 1;
            }
            t.get(j).is_some_and(|x| {
                let lower = x.surface.to_lowercase();
                (x.pos == Pos::Verb && matches!(x.form, WordForm::Past | WordForm::PastParticiple))
                    || (x.pos == Pos::Other
                        && lower.len() > 3
                        && (lower.ends_with("ed") || lower.ends_with("en")))
            })
        })
    })
}

/// Distinct pronoun-table rows hit by the story's tokens.
pub fn person_types(story: &Story, table: &PronounTable) -> BTreeSet<usize> {
    story
        .tokens()
        .filter_map(|t| table.person_type(&t.surface))
        .collect()
}

fn content_lemmas(story: &Story) -> BTreeSet<String> {
    story
        .tokens()
        .filter(|t| t.pos.is_content())
        .map(|t| t.lemma.to_lowercase())
        .collect()
}

fn contains_listed(story: &Story, bundle: &LexiconBundle, kind: ListKind) -> Result<bool> {
    let list = bundle.list(kind)?;
    Ok(story
        .tokens()
        .any(|t| list.contains(&t.surface) || list.contains(&t.lemma)))
}

/// Whether a tagged story qualifies as a coherent example for `aspect`.
/// Invariance aspects accept every story; their eligibility is decided by
/// the perturbation itself.
pub fn selects(
    story: &Story,
    aspect: Aspect,
    bundle: &LexiconBundle,
    config: &RunConfig,
) -> Result<bool> {
    match aspect {
        Aspect::CharacterBehavior => {
            Ok(has_passive_voice(story) || person_types(story, bundle.pronouns()?).len() >= 3)
        }
        Aspect::CommonSense => Ok(bundle.graph()?.links_any(&content_lemmas(story))),
        Aspect::Consistency => contains_listed(story, bundle, ListKind::Negation),
        Aspect::Relatedness => match max_inter_sentence_similarity(story, bundle.embeddings()?) {
            Ok(sim) => Ok(sim < config.relatedness_threshold),
            Err(Error::NeedsTwoSentences | Error::NoEmbeddableTokens) => Ok(false),
            Err(e) => Err(e),
        },
        Aspect::CausalRelationship => contains_listed(story, bundle, ListKind::Causality),
        Aspect::TemporalRelationship => contains_listed(story, bundle, ListKind::Temporal),
        _ => Ok(true),
    }
}

/// The stories of `corpus` satisfying the aspect's selection rule, in
/// corpus order. Stories are expected to be tagged.
pub fn select_for_aspect<'a>(
    corpus: &'a Corpus,
    aspect: Aspect,
    bundle: &LexiconBundle,
    config: &RunConfig,
) -> Result<Vec<&'a Story>> {
    let mut out = Vec::new();
    for story in &corpus.stories {
        if selects(story, aspect, bundle, config)? {
            out.push(story);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{bundle, tagged};

    #[test]
    fn negation_selects_consistency() {
        let b = bundle();
        let c = RunConfig::default();
        assert!(selects(
            &tagged("Tom decided not to give up."),
            Aspect::Consistency,
            &b,
            &c
        )
        .unwrap());
        assert!(!selects(
            &tagged("Tom decided to give up."),
            Aspect::Consistency,
            &b,
            &c
        )
        .unwrap());
    }

    #[test]
    fn three_person_types_select_character_behavior() {
        let b = bundle();
        let c = RunConfig::default();
        assert!(selects(
            &tagged("I saw him. He saw it."),
            Aspect::CharacterBehavior,
            &b,
            &c
        )
        .unwrap());
        assert!(!selects(
            &tagged("I saw him. He saw me."),
            Aspect::CharacterBehavior,
            &b,
            &c
        )
        .unwrap());
        // singular and plural "you" are one person type
        assert_eq!(
            person_types(&tagged("you and I saw you."), b.pronouns().unwrap()).len(),
            2
        );
        assert!(selects(
            &tagged("The cake was baked by them."),
            Aspect::CharacterBehavior,
            &b,
            &c
        )
        .unwrap());
        assert!(selects(
            &tagged("The cake was quickly eaten."),
            Aspect::CharacterBehavior,
            &b,
            &c
        )
        .unwrap());
    }

    #[test]
    fn graph_links_select_commonsense() {
        let b = bundle();
        let c = RunConfig::default();
        assert!(selects(
            &tagged("She put the cake in the oven in the kitchen."),
            Aspect::CommonSense,
            &b,
            &c
        )
        .unwrap());
        assert!(!selects(
            &tagged("She put the cake in the tree."),
            Aspect::CommonSense,
            &b,
            &c
        )
        .unwrap());
    }

    #[test]
    fn relatedness_threshold() {
        let b = bundle();
        let c = RunConfig::default();
        // "dog" and "cat" are close in the fixture table; "oven" and "lesson" are orthogonal
        assert!(!selects(
            &tagged("The dog ran. The cat ran."),
            Aspect::Relatedness,
            &b,
            &c
        )
        .unwrap());
        assert!(selects(
            &tagged("The oven. The lesson."),
            Aspect::Relatedness,
            &b,
            &c
        )
        .unwrap());
        assert!(!selects(&tagged("The oven."), Aspect::Relatedness, &b, &c).unwrap());
    }

    #[test]
    fn word_lists_select_causal_and_temporal() {
        let b = bundle();
        let c = RunConfig::default();
        let s = tagged("The sky is clear. So he can see it.");
        assert!(selects(&s, Aspect::CausalRelationship, &b, &c).unwrap());
        assert!(!selects(&s, Aspect::TemporalRelationship, &b, &c).unwrap());
        assert!(selects(
            &tagged("Tina then learnt her lesson."),
            Aspect::TemporalRelationship,
            &b,
            &c
        )
        .unwrap());
    }

    #[test]
    fn missing_resource_is_an_error() {
        let b = LexiconBundle::with_defaults();
        let c = RunConfig::default();
        let s = tagged("Tom decided not to give up.");
        assert!(matches!(
            selects(&s, Aspect::Consistency, &b, &c),
            Err(Error::MissingResource(_))
        ));
        assert!(selects(&s, Aspect::LexicalRepetition, &b, &c).unwrap());
    }
}
