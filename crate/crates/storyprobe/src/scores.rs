//! Score files: a JSON header naming the metric and the scored source,
//! then one `{"id","score"}` or `{"id","error"}` object per line.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use storyprobe_core::adapter::ScoreOutcome;

use crate::error::{read_text, write_text, Error, Result};

pub const SCORES_FORMAT: &str = "storyprobe-scores";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Suite,
    Corpus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreFile {
    pub metric_id: String,
    pub target: Target,
    /// Digest of the suite or corpus the scores belong to.
    pub source_hash: String,
    pub entries: Vec<ScoreEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    metric_id: String,
    target: Target,
    source_hash: String,
}

impl ScoreFile {
    pub fn from_outcomes(
        metric_id: &str,
        target: Target,
        source_hash: &str,
        outcomes: &[ScoreOutcome],
    ) -> ScoreFile {
        let entries = outcomes
            .iter()
            .map(|o| match o {
                ScoreOutcome::Scored(r) if r.score.is_finite() => ScoreEntry {
                    id: r.request_id.clone(),
                    score: Some(r.score),
                    error: None,
                },
                ScoreOutcome::Scored(r) => ScoreEntry {
                    id: r.request_id.clone(),
                    score: None,
                    error: Some(format!("non-finite score {}", r.score)),
                },
                ScoreOutcome::Failed { request_id, reason } => ScoreEntry {
                    id: request_id.clone(),
                    score: None,
                    error: Some(reason.clone()),
                },
            })
            .collect();
        ScoreFile {
            metric_id: metric_id.to_string(),
            target,
            source_hash: source_hash.to_string(),
            entries,
        }
    }

    /// Successfully scored ids.
    pub fn scores(&self) -> BTreeMap<String, f64> {
        self.entries
            .iter()
            .filter_map(|e| e.score.map(|s| (e.id.clone(), s)))
            .collect()
    }

    pub fn flagged(&self) -> Vec<&ScoreEntry> {
        self.entries.iter().filter(|e| e.score.is_none()).collect()
    }

    /// Fails unless the file was produced for `target` with digest `hash`.
    pub fn expect_source(&self, target: Target, hash: &str) -> Result<()> {
        if self.target != target {
            return Err(Error::Data(format!(
                "scores for `{}` were computed on a {:?}, expected a {:?}",
                self.metric_id, self.target, target
            )));
        }
        if self.source_hash != hash {
            return Err(Error::Data(format!(
                "scores for `{}` belong to source {}, not {hash}",
                self.metric_id, self.source_hash
            )));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let header = Header {
            format: SCORES_FORMAT.to_string(),
            version: 1,
            metric_id: self.metric_id.clone(),
            target: self.target,
            source_hash: self.source_hash.clone(),
        };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("entry serializes"));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str, file: &str) -> Result<ScoreFile> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| !l.trim().is_empty());
        let (n, first) = lines
            .next()
            .ok_or_else(|| Error::parse(file, 1, "empty score file"))?;
        let header: Header = serde_json::from_str(first)
            .map_err(|e| Error::parse(file, n, format!("malformed header: {e}")))?;
        if header.format != SCORES_FORMAT || header.version != 1 {
            return Err(Error::parse(file, n, "not a version 1 score file"));
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut entries = Vec::new();
        for (n, line) in lines {
            let e: ScoreEntry = serde_json::from_str(line)
                .map_err(|err| Error::parse(file, n, format!("malformed entry: {err}")))?;
            match (e.score, &e.error) {
                (Some(s), None) if s.is_finite() => {}
                (None, Some(_)) => {}
                _ => {
                    return Err(Error::parse(
                        file,
                        n,
                        "entry needs exactly one of a finite `score` or an `error`",
                    ))
                }
            }
            if !seen.insert(e.id.clone()) {
                return Err(Error::parse(file, n, format!("duplicate id `{}`", e.id)));
            }
            entries.push(e);
        }
        Ok(ScoreFile {
            metric_id: header.metric_id,
            target: header.target,
            source_hash: header.source_hash,
            entries,
        })
    }

    pub fn read(path: &Path) -> Result<ScoreFile> {
        ScoreFile::parse(&read_text(path)?, &path.display().to_string())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_text())
    }
}
