use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("lexicon member `{0}` is not loaded")]
    MissingResource(&'static str),
    #[error("{0} list empty")]
    EmptyWordList(&'static str),
    #[error("no embeddable tokens")]
    NoEmbeddableTokens,
    #[error("needs ≥ 2 sentences")]
    NeedsTwoSentences,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("unknown aspect `{0}`")]
    UnknownAspect(String),
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error("no aspects")]
    NoAspects,
    #[error("group `{0}`: empty intersection between scores and targets")]
    EmptyIntersection(String),
    #[error("group `{group}`: n < 2 (n = {n})")]
    TooFewPoints { group: String, n: usize },
    #[error("unscored cases: {}", .0.join(", "))]
    Unscored(Vec<String>),
    #[error("window {window} larger than number of stories {n}")]
    WindowTooLarge { window: usize, n: usize },
    #[error("submission ({rater}, {hit}) is missing a `{role}` story")]
    MissingRole {
        rater: String,
        hit: String,
        role: &'static str,
    },
    #[error("rating {0} outside 1..=5")]
    RatingOutOfRange(u8),
    #[error("adapter failure: {0}")]
    Adapter(String),
    #[error("adapter exited with {} unserved request(s): {}", .unserved.len(), .unserved.join(", "))]
    AdapterCrashed { unserved: Vec<String> },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid edit: {0}")]
    InvalidEdit(String),
    #[error("invalid data: {0}")]
    Invalid(String),
}
