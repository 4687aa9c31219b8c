//! Core of the `storyprobe` toolkit: builds coherence-discrimination and
//! robustness-invariance test suites for story-generation metrics by
//! rule-based perturbation, and evaluates metric scores over them.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches a
//! file, a process or a thread pool lives in the companion `storyprobe`
//! crate; here every operation is a pure function of its inputs, and every
//! random draw comes from an explicitly seeded generator.
//!
//! Modules follow the pipeline:
//!
//! * [`corpus`]: story data model, segmentation, tagging, truncation and
//!   name delexicalization.
//! * [`lexicon`]: synonym/antonym lexicon with inflection, word lists,
//!   pronoun table, concept graph and embedding table.
//! * [`metrics`]: sentence BLEU, BLEU-1, ROUGE-L, embedding metrics and the
//!   IDF-weighted mover similarity.
//! * [`perturb`]: selection rules and perturbations with replayable edit
//!   records.
//! * [`suite`]: discrimination/invariance suite assembly and the
//!   grammaticality filter.
//! * [`adapter`]: the scoring interface shared by built-in and external
//!   metrics.
//! * [`eval`]: correlations, agreement, annotation handling and the
//!   window-difference analysis.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod adapter;
pub mod config;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod lexicon;
pub mod metrics;
pub mod perturb;
pub mod rng;
pub mod suite;

#[cfg(test)]
mod fixtures;

pub use config::RunConfig;
pub use error::{Error, Result};
