//! Evaluation reports: a tab-separated table plus a JSON file with the
//! same rows, and a point file for window-difference plots.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use storyprobe_core::eval::{CorrelationResult, LabelCorrelation, WindowAnalysis};

use crate::error::{read_text, write_text, Error, Result};

pub const REPORT_FORMAT: &str = "storyprobe-report";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub metric_id: String,
    /// Aspect, aspect/source, error type or group value.
    pub group: String,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n1: Option<usize>,
    pub r: f64,
    pub p_value: f64,
    pub significant: bool,
    pub degenerate: bool,
}

impl ReportRow {
    pub fn new(metric_id: &str, group: &str, c: &CorrelationResult, alpha: f64) -> ReportRow {
        ReportRow {
            metric_id: metric_id.to_string(),
            group: group.to_string(),
            n: c.n,
            n0: None,
            n1: None,
            r: c.r,
            p_value: c.p_value,
            significant: !c.degenerate && c.significant(alpha),
            degenerate: c.degenerate,
        }
    }

    pub fn labeled(metric_id: &str, group: &str, l: &LabelCorrelation, alpha: f64) -> ReportRow {
        ReportRow {
            n0: Some(l.n0),
            n1: Some(l.n1),
            ..ReportRow::new(metric_id, group, &l.result, alpha)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub format: String,
    pub version: u32,
    /// Which evaluation produced the rows, e.g. `discrimination`.
    pub kind: String,
    pub config_hash: String,
    /// Digest of the suite or corpus the scores were computed on.
    pub source_hash: String,
    pub alpha: f64,
    pub rows: Vec<ReportRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub windows: Option<WindowSummaryRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSummaryRecord {
    pub n: usize,
    pub window: usize,
    pub stride: usize,
    pub sets: usize,
    pub pairs: usize,
    pub r_squared: f64,
}

impl Report {
    pub fn new(kind: &str, config_hash: &str, source_hash: &str, alpha: f64) -> Report {
        Report {
            format: REPORT_FORMAT.to_string(),
            version: 1,
            kind: kind.to_string(),
            config_hash: config_hash.to_string(),
            source_hash: source_hash.to_string(),
            alpha,
            rows: Vec::new(),
            notes: Vec::new(),
            windows: None,
        }
    }

    /// Signed r, and |r| where robustness is read from the magnitude.
    pub fn to_tsv(&self) -> String {
        let invariance = self.kind == "invariance";
        let mut out =
            String::from("metric_id\tgroup\tn\tn0\tn1\tr\tp_value\tsignificant\tdegenerate");
        if invariance {
            out.push_str("\tabs_r");
        }
        out.push('\n');
        let opt = |v: Option<usize>| v.map(|v| v.to_string()).unwrap_or_else(|| "-".to_string());
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{:.6}\t{:.6e}\t{}\t{}",
                r.metric_id,
                r.group,
                r.n,
                opt(r.n0),
                opt(r.n1),
                r.r,
                r.p_value,
                if r.significant { "*" } else { "" },
                r.degenerate
            ));
            if invariance {
                out.push_str(&format!("\t{:.6}", r.r.abs()));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn parse(text: &str, file: &str) -> Result<Report> {
        let report: Report = serde_json::from_str(text)
            .map_err(|e| Error::parse(file, 1, format!("malformed report: {e}")))?;
        if report.format != REPORT_FORMAT {
            return Err(Error::parse(file, 1, "not a report file"));
        }
        Ok(report)
    }

    pub fn read(path: &Path) -> Result<Report> {
        Report::parse(&read_text(path)?, &path.display().to_string())
    }

    /// Writes `<prefix>.tsv` and `<prefix>.json`.
    pub fn write(&self, prefix: &Path) -> Result<(PathBuf, PathBuf)> {
        let tsv = with_suffix(prefix, ".tsv");
        let json = with_suffix(prefix, ".json");
        write_text(&tsv, &self.to_tsv())?;
        write_text(&json, &self.to_json())?;
        Ok((tsv, json))
    }

    /// Concatenates reports of one kind computed on one source.
    pub fn merge(reports: &[Report]) -> Result<Report> {
        let first = reports
            .first()
            .ok_or_else(|| Error::Data("no reports to merge".to_string()))?;
        let mut out = first.clone();
        for r in &reports[1..] {
            if r.kind != first.kind {
                return Err(Error::Data(format!(
                    "cannot merge a {} report into a {} report",
                    r.kind, first.kind
                )));
            }
            if r.source_hash != first.source_hash {
                return Err(Error::Data(format!(
                    "reports were computed on different sources ({} vs {})",
                    first.source_hash, r.source_hash
                )));
            }
            if r.config_hash != first.config_hash {
                return Err(Error::Data(format!(
                    "reports use different configurations ({} vs {})",
                    first.config_hash, r.config_hash
                )));
            }
            out.rows.extend(r.rows.iter().cloned());
            out.notes.extend(r.notes.iter().cloned());
        }
        out.rows
            .sort_by(|a, b| (&a.group, &a.metric_id).cmp(&(&b.group, &b.metric_id)));
        Ok(out)
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// One line per ordered window pair, ready for plotting.
pub fn window_points_tsv(w: &WindowAnalysis) -> String {
    let mut out = String::from("from\tto\td_human\td_metric\thuman_sig\tmetric_sig\n");
    for p in &w.pairs {
        out.push_str(&format!(
            "{}\t{}\t{:.6}\t{:.6}\t{}\t{}\n",
            p.from, p.to, p.d_human, p.d_metric, p.human_sig, p.metric_sig
        ));
    }
    out
}

pub fn window_record(w: &WindowAnalysis) -> WindowSummaryRecord {
    WindowSummaryRecord {
        n: w.n,
        window: w.window,
        stride: w.stride,
        sets: w.set_count,
        pairs: w.pairs.len(),
        r_squared: w.r_squared,
    }
}
