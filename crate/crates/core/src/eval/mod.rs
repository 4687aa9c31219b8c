//! Statistics: correlation with significance, inter-rater agreement,
//! annotation quality control and the evaluation procedures built on them.

mod agreement;
mod analysis;
mod annotations;
mod stats;

pub use agreement::{krippendorff_alpha, AgreementResult};
pub use analysis::{
    correlate_metric, discrimination_eval, invariance_eval, score_map, window_difference_analysis,
    LabelCorrelation, PairDifference, ScoreRecord, SourceKind, WindowAnalysis, WindowSummary,
    ALL_GROUP,
};
pub use annotations::{
    aggregate_judgments, error_type_subsets, story_groups, validate_annotations, Aggregation,
    AnnotationPolicy, AnnotationRecord, ErrorSubsets, ErrorType, LabeledSet, Rejection, Role,
    SubsetPolicy, Validation, RATINGS_PER_STORY,
};
pub use stats::{
    pearson, regularized_incomplete_beta, student_t_two_sided, welch_from_summaries, welch_t_test,
    CorrelationResult, SampleSummary, TTest,
};
