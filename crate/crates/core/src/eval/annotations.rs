//! Human annotation records: quality control, aggregation and the
//! error-type evaluation subsets.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::config::RunConfig;
use crate::error::{Error, Result};

/// Ratings each generated story is expected to receive.
pub const RATINGS_PER_STORY: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ErrorType {
    Repetitive,
    Unrelated,
    Conflicting,
    Chaotic,
}

impl ErrorType {
    pub const ALL: [ErrorType; 4] = [
        ErrorType::Repetitive,
        ErrorType::Unrelated,
        ErrorType::Conflicting,
        ErrorType::Chaotic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorType::Repetitive => "repetitive",
            ErrorType::Unrelated => "unrelated",
            ErrorType::Conflicting => "conflicting",
            ErrorType::Chaotic => "chaotic",
        }
    }

    /// Accepts full names and the short forms rept/unrel/conf/chao.
    pub fn parse(s: &str) -> Result<ErrorType> {
        match s.trim().to_ascii_lowercase().as_str() {
            "repetitive" | "rept" => Ok(ErrorType::Repetitive),
            "unrelated" | "unrel" => Ok(ErrorType::Unrelated),
            "conflicting" | "conf" => Ok(ErrorType::Conflicting),
            "chaotic" | "chao" => Ok(ErrorType::Chaotic),
            _ => Err(Error::Invalid(format!("unknown error type `{s}`"))),
        }
    }
}

impl core::fmt::Display for ErrorType {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Role {
    Generated,
    Human,
    Negative,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Generated => "generated",
            Role::Human => "human",
            Role::Negative => "negative",
        }
    }

    pub fn parse(s: &str) -> Result<Role> {
        match s.trim().to_ascii_lowercase().as_str() {
            "generated" | "gen" => Ok(Role::Generated),
            "human" => Ok(Role::Human),
            "negative" | "neg" => Ok(Role::Negative),
            other => Err(Error::Invalid(format!("unknown role `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AnnotationRecord {
    pub story_id: String,
    pub rater_id: String,
    /// One rater's submission for one input: the generated stories plus
    /// the human-written and negative controls.
    pub hit_id: String,
    pub overall: u8,
    pub error_flags: BTreeSet<ErrorType>,
    pub role: Role,
    /// e.g. `model` and `dataset`.
    pub group_tags: BTreeMap<String, String>,
}

impl AnnotationRecord {
    pub fn validate(&self) -> Result<()> {
        if !(1..=5).contains(&self.overall) {
            return Err(Error::RatingOutOfRange(self.overall));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnnotationPolicy {
    /// Reject when the human-written story gets less than this.
    pub human_min: u8,
    /// Reject when the negative example gets more than this.
    pub negative_max: u8,
}

impl Default for AnnotationPolicy {
    fn default() -> Self {
        AnnotationPolicy {
            human_min: 4,
            negative_max: 2,
        }
    }
}

impl From<&RunConfig> for AnnotationPolicy {
    fn from(c: &RunConfig) -> Self {
        AnnotationPolicy {
            human_min: c.human_min_rating,
            negative_max: c.negative_max_rating,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub rater_id: String,
    pub hit_id: String,
    pub reasons: Vec<String>,
    pub records: Vec<AnnotationRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Validation {
    pub accepted: Vec<AnnotationRecord>,
    pub rejected: Vec<Rejection>,
}

/// Applies the control-story rule to every (rater, hit) submission: it is
/// rejected iff the human story is rated below `human_min` or the negative
/// one above `negative_max`. Accepted records keep their input order.
pub fn validate_annotations(
    records: &[AnnotationRecord],
    policy: AnnotationPolicy,
) -> Result<Validation> {
    let mut submissions: BTreeMap<(&str, &str), Vec<&AnnotationRecord>> = BTreeMap::new();
    for r in records {
        r.validate()?;
        submissions
            .entry((r.rater_id.as_str(), r.hit_id.as_str()))
            .or_default()
            .push(r);
    }
    let mut rejected_keys = BTreeSet::new();
    let mut out = Validation::default();
    for ((rater, hit), group) in &submissions {
        for (role, name) in [(Role::Human, "human"), (Role::Negative, "negative")] {
            if !group.iter().any(|r| r.role == role) {
                return Err(Error::MissingRole {
                    rater: rater.to_string(),
                    hit: hit.to_string(),
                    role: name,
                });
            }
        }
        let mut reasons = Vec::new();
        for r in group {
            match r.role {
                Role::Human if r.overall < policy.human_min => reasons.push(format!(
                    "human-written story {} rated {} (< {})",
                    r.story_id, r.overall, policy.human_min
                )),
                Role::Negative if r.overall > policy.negative_max => reasons.push(format!(
                    "negative example {} rated {} (> {})",
                    r.story_id, r.overall, policy.negative_max
                )),
                _ => {}
            }
        }
        if !reasons.is_empty() {
            rejected_keys.insert((*rater, *hit));
            out.rejected.push(Rejection {
                rater_id: rater.to_string(),
                hit_id: hit.to_string(),
                reasons,
                records: group.iter().map(|r| (*r).clone()).collect(),
            });
        }
    }
    out.accepted = records
        .iter()
        .filter(|r| !rejected_keys.contains(&(r.rater_id.as_str(), r.hit_id.as_str())))
        .cloned()
        .collect();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Aggregation {
    pub judgments: BTreeMap<String, f64>,
    pub counts: BTreeMap<String, usize>,
    /// Stories whose every rating was rejected.
    pub excluded: Vec<String>,
    pub warnings: Vec<String>,
}

/// Mean accepted rating of each generated story. Stories seen only in
/// rejected submissions are excluded; counts other than five are warned.
pub fn aggregate_judgments(validation: &Validation) -> Aggregation {
    let mut sums: BTreeMap<&str, (u32, usize)> = BTreeMap::new();
    for r in validation
        .accepted
        .iter()
        .filter(|r| r.role == Role::Generated)
    {
        let e = sums.entry(r.story_id.as_str()).or_default();
        e.0 += r.overall as u32;
        e.1 += 1;
    }
    let mut out = Aggregation::default();
    for (id, (sum, count)) in &sums {
        if *count != RATINGS_PER_STORY {
            out.warnings.push(format!(
                "story {id} has {count} accepted rating(s), expected {RATINGS_PER_STORY}"
            ));
        }
        out.judgments
            .insert(id.to_string(), *sum as f64 / *count as f64);
        out.counts.insert(id.to_string(), *count);
    }
    let excluded: BTreeSet<&str> = validation
        .rejected
        .iter()
        .flat_map(|r| &r.records)
        .filter(|r| r.role == Role::Generated && !sums.contains_key(r.story_id.as_str()))
        .map(|r| r.story_id.as_str())
        .collect();
    for id in excluded {
        out.warnings
            .push(format!("story {id} has no accepted rating; excluded"));
        out.excluded.push(id.to_string());
    }
    for w in &out.warnings {
        log::warn!("{w}");
    }
    out
}

/// Story → value of `key` among its generated-role records. The first
/// record seen wins when raters disagree.
pub fn story_groups(records: &[AnnotationRecord], key: &str) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for r in records.iter().filter(|r| r.role == Role::Generated) {
        if let Some(v) = r.group_tags.get(key) {
            out.entry(r.story_id.clone()).or_insert_with(|| v.clone());
        }
    }
    out
}

/// One error type's evaluation set: story id → binary label.
pub type LabeledSet = BTreeMap<String, f64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsetPolicy {
    /// Reasonable means a mean judgment strictly above this.
    pub reasonable_threshold: f64,
    /// Raters needed before an error type counts as flagged.
    pub min_raters: usize,
}

impl Default for SubsetPolicy {
    fn default() -> Self {
        SubsetPolicy {
            reasonable_threshold: 4.0,
            min_raters: 3,
        }
    }
}

impl From<&RunConfig> for SubsetPolicy {
    fn from(c: &RunConfig) -> Self {
        SubsetPolicy {
            reasonable_threshold: c.reasonable_threshold,
            min_raters: c.min_error_raters,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorSubsets {
    pub reasonable: BTreeSet<String>,
    pub unreasonable: BTreeMap<ErrorType, BTreeSet<String>>,
}

impl ErrorSubsets {
    /// reasonable (label 1) ∪ unreasonable_T (label 0).
    pub fn evaluation_set(&self, t: ErrorType) -> LabeledSet {
        let mut out: LabeledSet = self.reasonable.iter().map(|id| (id.clone(), 1.0)).collect();
        if let Some(bad) = self.unreasonable.get(&t) {
            out.extend(bad.iter().map(|id| (id.clone(), 0.0)));
        }
        out
    }
}

/// Splits judged stories into the reasonable set and, per error type T,
/// the stories where T is the only type flagged by at least `min_raters`
/// raters. Reasonable stories never enter an unreasonable set.
pub fn error_type_subsets(
    records: &[AnnotationRecord],
    judgments: &BTreeMap<String, f64>,
    policy: SubsetPolicy,
) -> ErrorSubsets {
    let mut flag_raters: BTreeMap<&str, BTreeMap<ErrorType, BTreeSet<&str>>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.role == Role::Generated) {
        for t in &r.error_flags {
            flag_raters
                .entry(r.story_id.as_str())
                .or_default()
                .entry(*t)
                .or_default()
                .insert(r.rater_id.as_str());
        }
    }
    let mut out = ErrorSubsets::default();
    for t in ErrorType::ALL {
        out.unreasonable.insert(t, BTreeSet::new());
    }
    for (id, &mean) in judgments {
        if mean > policy.reasonable_threshold {
            out.reasonable.insert(id.clone());
            continue;
        }
        let Some(flags) = flag_raters.get(id.as_str()) else {
            continue;
        };
        let mut flagged = flags
            .iter()
            .filter(|(_, raters)| raters.len() >= policy.min_raters)
            .map(|(t, _)| *t);
        if let (Some(t), None) = (flagged.next(), flagged.next()) {
            out.unreasonable
                .get_mut(&t)
                .expect("all types present")
                .insert(id.clone());
        }
    }
    out
}
