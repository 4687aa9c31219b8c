//! File formats, resource loading, the adapter process protocol and the
//! command-line driver around `storyprobe-core`.

pub use storyprobe_core as core;

pub mod cli;
pub mod corpus_io;
pub mod error;
pub mod parallel;
pub mod process;
pub mod report;
pub mod resources;
pub mod scores;
pub mod suite_io;

pub use error::{Error, Result};
