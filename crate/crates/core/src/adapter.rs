//! Scoring interface shared by in-process metrics and external processes.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};

use crate::corpus::{Segmenter, Story};
use crate::error::{Error, Result};
use crate::lexicon::{EmbeddingTable, LexiconBundle};
use crate::metrics::{
    bleu1_precision, bleu_sentence, embedding_metric, mover_similarity, rouge_l, EmbeddingMode,
    NGramProfile,
};

/// Wire protocol version spoken by external adapters.
pub const PROTOCOL_VERSION: u32 = 1;

/// Default bound on requests outstanding at an external adapter.
pub const DEFAULT_MAX_IN_FLIGHT: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoreRequest {
    pub request_id: String,
    pub input: String,
    pub story: String,
    #[cfg_attr(feature = "serde", serde(default))]
    pub references: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoreResponse {
    pub request_id: String,
    pub score: f64,
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub diagnostics: Option<String>,
}

/// One entry of a batch result: a score, or a per-request failure such as
/// a timeout. Failures never abort the rest of the batch.
#[derive(Debug, Clone, PartialEq)]
pub enum ScoreOutcome {
    Scored(ScoreResponse),
    Failed { request_id: String, reason: String },
}

impl ScoreOutcome {
    pub fn request_id(&self) -> &str {
        match self {
            ScoreOutcome::Scored(r) => &r.request_id,
            ScoreOutcome::Failed { request_id, .. } => request_id,
        }
    }

    pub fn score(&self) -> Option<f64> {
        match self {
            ScoreOutcome::Scored(r) => Some(r.score),
            ScoreOutcome::Failed { .. } => None,
        }
    }

    pub fn is_flagged(&self) -> bool {
        matches!(self, ScoreOutcome::Failed { .. })
    }
}

/// Anything that turns requests into one outcome per request, in request
/// order. A batch-level `Err` means no result can be trusted (for example
/// the scorer process died).
pub trait Scorer {
    fn metric_id(&self) -> &str;
    fn score_batch(&mut self, requests: &[ScoreRequest]) -> Result<Vec<ScoreOutcome>>;
}

/// Launch settings for an external adapter process.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExternalSpec {
    pub command: Vec<String>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub env: Vec<(String, String)>,
    pub timeout_ms: u64,
    pub max_in_flight: usize,
}

impl ExternalSpec {
    pub fn new(command: Vec<String>) -> ExternalSpec {
        ExternalSpec {
            command,
            env: Vec::new(),
            timeout_ms: 30_000,
            max_in_flight: DEFAULT_MAX_IN_FLIGHT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum HandleKind {
    Builtin,
    External(ExternalSpec),
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricHandle {
    pub metric_id: String,
    pub kind: HandleKind,
}

impl MetricHandle {
    pub fn external(metric_id: &str, spec: ExternalSpec) -> MetricHandle {
        MetricHandle {
            metric_id: metric_id.to_string(),
            kind: HandleKind::External(spec),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BuiltinId {
    Bleu,
    Bleu1,
    RougeL,
    EmbGreedy,
    EmbAverage,
    EmbExtrema,
    MoverSim,
    RepetitionOracle,
}

impl BuiltinId {
    pub const ALL: [BuiltinId; 8] = [
        BuiltinId::Bleu,
        BuiltinId::Bleu1,
        BuiltinId::RougeL,
        BuiltinId::EmbGreedy,
        BuiltinId::EmbAverage,
        BuiltinId::EmbExtrema,
        BuiltinId::MoverSim,
        BuiltinId::RepetitionOracle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BuiltinId::Bleu => "bleu",
            BuiltinId::Bleu1 => "bleu1",
            BuiltinId::RougeL => "rouge_l",
            BuiltinId::EmbGreedy => "emb_greedy",
            BuiltinId::EmbAverage => "emb_average",
            BuiltinId::EmbExtrema => "emb_extrema",
            BuiltinId::MoverSim => "mover_sim",
            BuiltinId::RepetitionOracle => "repetition_oracle",
        }
    }

    pub fn parse(s: &str) -> Result<BuiltinId> {
        BuiltinId::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| Error::UnknownMetric(s.to_string()))
    }

    pub fn needs_references(self) -> bool {
        self != BuiltinId::RepetitionOracle
    }

    pub fn needs_embeddings(self) -> bool {
        matches!(
            self,
            BuiltinId::EmbGreedy
                | BuiltinId::EmbAverage
                | BuiltinId::EmbExtrema
                | BuiltinId::MoverSim
        )
    }
}

/// ROUGE-L recall weight used by the builtin metric.
pub const ROUGE_BETA: f64 = 1.2;

/// Handle for a builtin metric; fails on unknown ids.
pub fn register_builtin(metric_id: &str) -> Result<MetricHandle> {
    BuiltinId::parse(metric_id)?;
    Ok(MetricHandle {
        metric_id: metric_id.to_string(),
        kind: HandleKind::Builtin,
    })
}

/// 1 when no 4-gram repeats within the text, 0 as soon as one does.
pub fn repetition_oracle<S: AsRef<str>>(tokens: &[S]) -> f64 {
    let max = NGramProfile::new(tokens, 4).max_count(4) as f64;
    1.0 - (max - 1.0).clamp(0.0, 1.0)
}

/// An in-process scorer over the metrics module.
#[derive(Debug, Clone)]
pub struct BuiltinMetric {
    id: BuiltinId,
    table: Option<EmbeddingTable>,
    segmenter: Segmenter,
}

impl BuiltinMetric {
    pub fn new(
        metric_id: &str,
        bundle: &LexiconBundle,
        segmenter: Segmenter,
    ) -> Result<BuiltinMetric> {
        let id = BuiltinId::parse(metric_id)?;
        let table = if id.needs_embeddings() {
            Some(bundle.embeddings()?.clone())
        } else {
            None
        };
        Ok(BuiltinMetric {
            id,
            table,
            segmenter,
        })
    }

    pub fn id(&self) -> BuiltinId {
        self.id
    }

    fn tokens(&self, text: &str) -> Vec<String> {
        self.segmenter
            .segment(text)
            .into_iter()
            .flat_map(|s| s.tokens.into_iter().map(|t| t.surface))
            .collect()
    }

    /// Scores a tokenized story directly.
    pub fn score_story(
        &self,
        story: &Story,
        references: &[String],
    ) -> core::result::Result<f64, String> {
        let tokens: Vec<String> = story.tokens().map(|t| t.surface.clone()).collect();
        self.score_tokens(&tokens, references)
    }

    pub fn score_one(&self, request: &ScoreRequest) -> core::result::Result<f64, String> {
        self.score_tokens(&self.tokens(&request.story), &request.references)
    }

    fn score_tokens(
        &self,
        tokens: &[String],
        references: &[String],
    ) -> core::result::Result<f64, String> {
        if self.id == BuiltinId::RepetitionOracle {
            return Ok(repetition_oracle(tokens));
        }
        let refs: Vec<Vec<String>> = references.iter().map(|r| self.tokens(r)).collect();
        let first = refs
            .first()
            .ok_or_else(|| format!("{} needs at least one reference", self.id.as_str()))?;
        let table = || {
            self.table
                .as_ref()
                .ok_or_else(|| "embedding table not loaded".to_string())
        };
        let embedded = |r: Result<f64>| r.map_err(|e| e.to_string());
        match self.id {
            BuiltinId::Bleu => Ok(bleu_sentence(tokens, &refs, 4)),
            BuiltinId::Bleu1 => Ok(bleu1_precision(tokens, first)),
            BuiltinId::RougeL => Ok(rouge_l(tokens, first, ROUGE_BETA)),
            BuiltinId::EmbGreedy => embedded(embedding_metric(
                tokens,
                first,
                table()?,
                EmbeddingMode::Greedy,
            )),
            BuiltinId::EmbAverage => embedded(embedding_metric(
                tokens,
                first,
                table()?,
                EmbeddingMode::Average,
            )),
            BuiltinId::EmbExtrema => embedded(embedding_metric(
                tokens,
                first,
                table()?,
                EmbeddingMode::Extrema,
            )),
            BuiltinId::MoverSim => embedded(mover_similarity(tokens, first, table()?)),
            BuiltinId::RepetitionOracle => unreachable!(),
        }
    }
}

impl Scorer for BuiltinMetric {
    fn metric_id(&self) -> &str {
        self.id.as_str()
    }

    fn score_batch(&mut self, requests: &[ScoreRequest]) -> Result<Vec<ScoreOutcome>> {
        Ok(requests
            .iter()
            .map(|r| match self.score_one(r) {
                Ok(score) => ScoreOutcome::Scored(ScoreResponse {
                    request_id: r.request_id.clone(),
                    score,
                    diagnostics: None,
                }),
                Err(reason) => ScoreOutcome::Failed {
                    request_id: r.request_id.clone(),
                    reason,
                },
            })
            .collect())
    }
}

/// A scorer backed by a fixed id → score table; unknown ids fail.
#[derive(Debug, Clone, Default)]
pub struct TableScorer {
    pub metric_id: String,
    pub scores: alloc::collections::BTreeMap<String, f64>,
}

impl Scorer for TableScorer {
    fn metric_id(&self) -> &str {
        &self.metric_id
    }

    fn score_batch(&mut self, requests: &[ScoreRequest]) -> Result<Vec<ScoreOutcome>> {
        Ok(requests
            .iter()
            .map(|r| match self.scores.get(&r.request_id) {
                Some(&score) => ScoreOutcome::Scored(ScoreResponse {
                    request_id: r.request_id.clone(),
                    score,
                    diagnostics: None,
                }),
                None => ScoreOutcome::Failed {
                    request_id: r.request_id.clone(),
                    reason: "no score".to_string(),
                },
            })
            .collect())
    }
}

/// Checks that `outcomes` answer `requests` one-to-one and in order.
pub fn check_alignment(requests: &[ScoreRequest], outcomes: &[ScoreOutcome]) -> Result<()> {
    if requests.len() != outcomes.len() {
        return Err(Error::Adapter(format!(
            "{} responses for {} requests",
            outcomes.len(),
            requests.len()
        )));
    }
    for (req, out) in requests.iter().zip(outcomes) {
        if req.request_id != out.request_id() {
            return Err(Error::Adapter(format!(
                "response `{}` in the slot of request `{}`",
                out.request_id(),
                req.request_id
            )));
        }
    }
    Ok(())
}

/// Requests for scoring every story of a prepared collection.
pub fn requests_for<'a>(
    items: impl IntoIterator<Item = (&'a str, &'a str, &'a str)>,
) -> Vec<ScoreRequest> {
    items
        .into_iter()
        .map(|(id, input, story)| ScoreRequest {
            request_id: id.to_string(),
            input: input.to_string(),
            story: story.to_string(),
            references: vec![],
        })
        .collect()
}
