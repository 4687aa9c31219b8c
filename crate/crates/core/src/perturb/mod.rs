//! Aspect selection rules and rule-based perturbations.
//!
//! Every perturbation is a pure function of a tagged, canonical story and a
//! seed. It returns either the perturbed story together with a record of the
//! edits that produce it, or a skip with a reason.

mod discrimination;
mod edit;
mod invariance;
mod paraphrase;
mod select;

use alloc::string::String;
use alloc::vec::Vec;

pub use discrimination::{
    perturb_causal, perturb_character_behavior, perturb_commonsense, perturb_consistency,
    perturb_lexical_repetition, perturb_relatedness, perturb_semantic_repetition, perturb_temporal,
};
pub use edit::{apply_edits, EditKind, EditOp, Location};
pub use invariance::perturb_invariance;
pub use paraphrase::{normalize_sentence, passes_filter, Paraphrase, ParaphraseBank};
pub use select::{has_passive_voice, person_types, select_for_aspect, selects};

use crate::config::RunConfig;
use crate::corpus::Story;
use crate::error::{Error, Result};
use crate::lexicon::LexiconBundle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TestType {
    Discrimination,
    Invariance,
}

impl TestType {
    pub fn as_str(self) -> &'static str {
        match self {
            TestType::Discrimination => "discrimination",
            TestType::Invariance => "invariance",
        }
    }

    pub fn parse(s: &str) -> Option<TestType> {
        match s {
            "discrimination" | "dis" => Some(TestType::Discrimination),
            "invariance" | "inv" => Some(TestType::Invariance),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Aspect {
    LexicalRepetition,
    SemanticRepetition,
    CharacterBehavior,
    CommonSense,
    Consistency,
    Relatedness,
    CausalRelationship,
    TemporalRelationship,
    Synonym,
    Paraphrase,
    Punctuation,
    Contraction,
    Typo,
}

impl Aspect {
    pub const DISCRIMINATION: [Aspect; 8] = [
        Aspect::LexicalRepetition,
        Aspect::SemanticRepetition,
        Aspect::CharacterBehavior,
        Aspect::CommonSense,
        Aspect::Consistency,
        Aspect::Relatedness,
        Aspect::CausalRelationship,
        Aspect::TemporalRelationship,
    ];

    pub const INVARIANCE: [Aspect; 5] = [
        Aspect::Synonym,
        Aspect::Paraphrase,
        Aspect::Punctuation,
        Aspect::Contraction,
        Aspect::Typo,
    ];

    pub fn all() -> impl Iterator<Item = Aspect> {
        Aspect::DISCRIMINATION.into_iter().chain(Aspect::INVARIANCE)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Aspect::LexicalRepetition => "lexical_repetition",
            Aspect::SemanticRepetition => "semantic_repetition",
            Aspect::CharacterBehavior => "character_behavior",
            Aspect::CommonSense => "common_sense",
            Aspect::Consistency => "consistency",
            Aspect::Relatedness => "relatedness",
            Aspect::CausalRelationship => "causal_relationship",
            Aspect::TemporalRelationship => "temporal_relationship",
            Aspect::Synonym => "synonym",
            Aspect::Paraphrase => "paraphrase",
            Aspect::Punctuation => "punctuation",
            Aspect::Contraction => "contraction",
            Aspect::Typo => "typo",
        }
    }

    /// Accepts the snake_case name, or the same without underscores.
    pub fn parse(s: &str) -> Result<Aspect> {
        let key: String = s
            .trim()
            .to_ascii_lowercase()
            .chars()
            .filter(|c| *c != '_' && *c != '-')
            .collect();
        Aspect::all()
            .find(|a| a.as_str().replace('_', "") == key)
            .ok_or_else(|| Error::UnknownAspect(s.into()))
    }

    pub fn test_type(self) -> TestType {
        if Aspect::DISCRIMINATION.contains(&self) {
            TestType::Discrimination
        } else {
            TestType::Invariance
        }
    }

    /// Valid technique numbers.
    pub fn techniques(self) -> &'static [u8] {
        match self {
            Aspect::LexicalRepetition
            | Aspect::CharacterBehavior
            | Aspect::Consistency
            | Aspect::Relatedness
            | Aspect::CausalRelationship
            | Aspect::TemporalRelationship => &[1, 2],
            _ => &[1],
        }
    }

    /// Stable small integer used in seed derivation.
    pub fn code(self) -> u64 {
        Aspect::all().position(|a| a == self).unwrap_or(0) as u64
    }
}

impl core::fmt::Display for Aspect {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything needed to reproduce a perturbed story from its source.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PerturbationRecord {
    pub aspect: Aspect,
    pub technique: u8,
    pub edits: Vec<EditOp>,
    pub seed: u64,
    pub source_id: String,
    /// The count a rate was applied to (entities, sentences, content words
    /// or words), when the perturbation is rate-based.
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub basis: Option<usize>,
}

impl PerturbationRecord {
    pub fn validate(&self) -> Result<()> {
        if self.edits.is_empty() {
            return Err(Error::InvalidEdit("record has no edits".into()));
        }
        if !self.aspect.techniques().contains(&self.technique) {
            return Err(Error::InvalidEdit(alloc::format!(
                "technique {} not valid for {}",
                self.technique,
                self.aspect
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Perturbed(Story, PerturbationRecord),
    Skipped(String),
}

impl Outcome {
    pub fn skip(reason: impl Into<String>) -> Outcome {
        Outcome::Skipped(reason.into())
    }

    pub fn is_skip(&self) -> bool {
        matches!(self, Outcome::Skipped(_))
    }

    pub fn perturbed(self) -> Option<(Story, PerturbationRecord)> {
        match self {
            Outcome::Perturbed(s, r) => Some((s, r)),
            Outcome::Skipped(_) => None,
        }
    }
}

/// Read-only inputs shared by all perturbations of one build.
#[derive(Clone, Copy)]
pub struct PerturbContext<'a> {
    pub bundle: &'a LexiconBundle,
    pub config: &'a RunConfig,
    pub bank: Option<&'a ParaphraseBank>,
    /// Donor stories for sentence substitution.
    pub corpus: &'a [Story],
}

/// Runs the perturbation of `aspect` with the given technique.
pub fn perturb(
    story: &Story,
    aspect: Aspect,
    technique: u8,
    ctx: &PerturbContext,
    seed: u64,
) -> Result<Outcome> {
    if !aspect.techniques().contains(&technique) {
        return Err(Error::InvalidEdit(alloc::format!(
            "technique {technique} not valid for {aspect}"
        )));
    }
    let empty = ParaphraseBank::default();
    let bank = ctx.bank.unwrap_or(&empty);
    match aspect {
        Aspect::LexicalRepetition => perturb_lexical_repetition(story, technique, seed),
        Aspect::SemanticRepetition => perturb_semantic_repetition(story, bank, ctx.config, seed),
        Aspect::CharacterBehavior => perturb_character_behavior(story, technique, ctx.bundle, seed),
        Aspect::CommonSense => perturb_commonsense(story, ctx.bundle, ctx.config, seed),
        Aspect::Consistency => perturb_consistency(story, technique, ctx.bundle, ctx.config, seed),
        Aspect::Relatedness => {
            perturb_relatedness(story, technique, ctx.corpus, ctx.bundle, ctx.config, seed)
        }
        Aspect::CausalRelationship => perturb_causal(story, technique, ctx.bundle, seed),
        Aspect::TemporalRelationship => perturb_temporal(story, technique, ctx.bundle, seed),
        _ => perturb_invariance(story, aspect, ctx.bundle, bank, ctx.config, seed),
    }
}

pub(crate) fn finish(
    story: &Story,
    aspect: Aspect,
    technique: u8,
    seed: u64,
    edits: Vec<EditOp>,
    basis: Option<usize>,
) -> Result<Outcome> {
    let perturbed = apply_edits(story, &edits)?;
    let record = PerturbationRecord {
        aspect,
        technique,
        edits,
        seed,
        source_id: story.id.clone(),
        basis,
    };
    record.validate()?;
    Ok(Outcome::Perturbed(perturbed, record))
}
