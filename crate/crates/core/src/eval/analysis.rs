//! Metric-versus-target correlations: human judgments, suite labels and
//! the sliding-window difference analysis.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::stats::{pearson, welch_from_summaries, CorrelationResult, SampleSummary};
use crate::error::{Error, Result};
use crate::perturb::{Aspect, TestType};
use crate::suite::{Origin, TestSuite};

/// Group name used when no grouping is requested.
pub const ALL_GROUP: &str = "all";

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoreRecord {
    pub metric_id: String,
    /// Case id for suite scores, story id for judged stories.
    pub id: String,
    pub score: f64,
}

/// Id → score, rejecting non-finite values and conflicting duplicates.
pub fn score_map(scores: &[ScoreRecord]) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for s in scores {
        if !s.score.is_finite() {
            return Err(Error::Invalid(format!("score for {} is not finite", s.id)));
        }
        if let Some(prev) = out.insert(s.id.clone(), s.score) {
            if prev != s.score {
                return Err(Error::Invalid(format!("conflicting scores for {}", s.id)));
            }
        }
    }
    Ok(out)
}

fn with_group(e: Error, group: &str) -> Error {
    match e {
        Error::TooFewPoints { n, .. } => Error::TooFewPoints {
            group: group.to_string(),
            n,
        },
        other => other,
    }
}

/// Pearson r between scores and targets over their shared ids, once per
/// value of `groups` (story → tag) or once overall.
pub fn correlate_metric(
    scores: &BTreeMap<String, f64>,
    targets: &BTreeMap<String, f64>,
    groups: Option<&BTreeMap<String, String>>,
) -> Result<BTreeMap<String, CorrelationResult>> {
    let mut buckets: BTreeMap<&str, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    match groups {
        None => {
            buckets.insert(ALL_GROUP, Default::default());
        }
        Some(g) => {
            for tag in g.values() {
                buckets.entry(tag.as_str()).or_default();
            }
        }
    }
    for (id, &target) in targets {
        let Some(&score) = scores.get(id) else {
            continue;
        };
        let group = match groups {
            None => ALL_GROUP,
            Some(g) => match g.get(id) {
                Some(tag) => tag.as_str(),
                None => continue,
            },
        };
        let (xs, ys) = buckets.get_mut(group).expect("bucket per tag");
        xs.push(score);
        ys.push(target);
    }
    let mut out = BTreeMap::new();
    for (group, (xs, ys)) in buckets {
        if xs.is_empty() {
            return Err(Error::EmptyIntersection(group.to_string()));
        }
        out.insert(
            group.to_string(),
            pearson(&xs, &ys).map_err(|e| with_group(e, group))?,
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LabelCorrelation {
    pub n0: usize,
    pub n1: usize,
    pub result: CorrelationResult,
}

/// Source column of an invariance result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SourceKind {
    /// Perturbations of human-written stories.
    Human,
    /// Perturbations of discrimination-suite incoherent cases.
    Dis,
}

impl SourceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceKind::Human => "human",
            SourceKind::Dis => "dis",
        }
    }

    fn of(origin: Origin) -> SourceKind {
        match origin {
            Origin::PerturbedIncoherent => SourceKind::Dis,
            Origin::Human | Origin::PerturbedHuman => SourceKind::Human,
        }
    }
}

fn label_correlations<K: Ord + Copy>(
    suite: &TestSuite,
    scores: &BTreeMap<String, f64>,
    key: impl Fn(&crate::suite::TestCase) -> K,
    name: impl Fn(K) -> String,
) -> Result<BTreeMap<K, LabelCorrelation>> {
    let unscored: Vec<String> = suite
        .cases
        .iter()
        .filter(|c| !scores.contains_key(&c.case_id))
        .map(|c| c.case_id.clone())
        .collect();
    if !unscored.is_empty() {
        return Err(Error::Unscored(unscored));
    }
    let mut buckets: BTreeMap<K, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for c in &suite.cases {
        let (xs, ys) = buckets.entry(key(c)).or_default();
        xs.push(scores[&c.case_id]);
        ys.push(c.label as f64);
    }
    let mut out = BTreeMap::new();
    for (k, (xs, ys)) in buckets {
        let n1 = ys.iter().filter(|y| **y == 1.0).count();
        if xs.len() < 2 {
            log::warn!("{}: {} case(s), no correlation", name(k), xs.len());
            continue;
        }
        let result = pearson(&xs, &ys).map_err(|e| with_group(e, &name(k)))?;
        out.insert(
            k,
            LabelCorrelation {
                n0: ys.len() - n1,
                n1,
                result,
            },
        );
    }
    Ok(out)
}

fn expect_type(suite: &TestSuite, t: TestType) -> Result<()> {
    if suite.test_type() != t {
        return Err(Error::Invalid(format!(
            "expected a {} suite, got {}",
            t.as_str(),
            suite.test_type().as_str()
        )));
    }
    Ok(())
}

/// Per aspect, Pearson r between case scores and the coherent/incoherent
/// labels. Higher is better.
pub fn discrimination_eval(
    suite: &TestSuite,
    scores: &BTreeMap<String, f64>,
) -> Result<BTreeMap<Aspect, LabelCorrelation>> {
    expect_type(suite, TestType::Discrimination)?;
    label_correlations(suite, scores, |c| c.aspect, |a| a.to_string())
}

/// Per aspect and source column, Pearson r between case scores and the
/// original/perturbed labels. A smaller |r| means a more robust metric.
pub fn invariance_eval(
    suite: &TestSuite,
    scores: &BTreeMap<String, f64>,
) -> Result<BTreeMap<(Aspect, SourceKind), LabelCorrelation>> {
    expect_type(suite, TestType::Invariance)?;
    label_correlations(
        suite,
        scores,
        |c| (c.aspect, SourceKind::of(c.origin)),
        |(a, s)| format!("{a}/{}", s.as_str()),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WindowSummary {
    pub start: usize,
    pub human_mean: f64,
    pub metric_mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairDifference {
    pub from: usize,
    pub to: usize,
    pub d_human: f64,
    pub d_metric: f64,
    pub human_sig: bool,
    pub metric_sig: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WindowAnalysis {
    pub n: usize,
    pub window: usize,
    pub stride: usize,
    pub set_count: usize,
    pub windows: Vec<WindowSummary>,
    /// Every ordered pair (i, j), diagonal included, in row-major order.
    pub pairs: Vec<PairDifference>,
    pub r_squared: f64,
    pub correlation: CorrelationResult,
}

/// Sorts stories by judgment (ties by id), takes floor((n − w)/s) windows
/// of `window` consecutive stories at stride `stride`, and compares every
/// ordered pair of windows. Δ = window i − window j. Each pair carries
/// Welch t-test flags at `alpha` for judgments and for metric scores.
pub fn window_difference_analysis(
    judgments: &BTreeMap<String, f64>,
    scores: &BTreeMap<String, f64>,
    window: usize,
    stride: usize,
    alpha: f64,
) -> Result<WindowAnalysis> {
    if window == 0 || stride == 0 {
        return Err(Error::InvalidConfig("window and stride must be ≥ 1".into()));
    }
    if judgments.len() != scores.len() || judgments.keys().any(|k| !scores.contains_key(k)) {
        return Err(Error::Invalid(
            "judgments and scores cover different story ids".into(),
        ));
    }
    let n = judgments.len();
    if window > n {
        return Err(Error::WindowTooLarge { window, n });
    }
    let set_count = (n - window) / stride;
    if set_count == 0 {
        return Err(Error::InsufficientData(format!(
            "{n} stories give no window set at window {window}, stride {stride}"
        )));
    }
    let mut rows: Vec<(&String, f64, f64)> = judgments
        .iter()
        .map(|(id, &h)| (id, h, scores[id]))
        .collect();
    if let Some((id, _, _)) = rows
        .iter()
        .find(|(_, h, m)| !h.is_finite() || !m.is_finite())
    {
        return Err(Error::Invalid(format!("non-finite value for {id}")));
    }
    rows.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
    let human: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let metric: Vec<f64> = rows.iter().map(|r| r.2).collect();

    let summaries: Vec<(SampleSummary, SampleSummary)> = (0..set_count)
        .map(|k| {
            let range = k * stride..k * stride + window;
            (
                SampleSummary::of(&human[range.clone()]),
                SampleSummary::of(&metric[range]),
            )
        })
        .collect();
    let windows = summaries
        .iter()
        .enumerate()
        .map(|(k, (h, m))| WindowSummary {
            start: k * stride,
            human_mean: h.mean,
            metric_mean: m.mean,
        })
        .collect();
    let significant = |a: SampleSummary, b: SampleSummary| -> Result<bool> {
        if window < 2 {
            return Ok(false);
        }
        Ok(welch_from_summaries(a, b)?.p_value < alpha)
    };
    let mut pairs = Vec::with_capacity(set_count * set_count);
    for i in 0..set_count {
        for j in 0..set_count {
            let ((hi, mi), (hj, mj)) = (summaries[i], summaries[j]);
            pairs.push(PairDifference {
                from: i,
                to: j,
                d_human: hi.mean - hj.mean,
                d_metric: mi.mean - mj.mean,
                human_sig: significant(hi, hj)?,
                metric_sig: significant(mi, mj)?,
            });
        }
    }
    let dh: Vec<f64> = pairs.iter().map(|p| p.d_human).collect();
    let dm: Vec<f64> = pairs.iter().map(|p| p.d_metric).collect();
    let correlation = if pairs.len() >= 2 {
        pearson(&dh, &dm)?
    } else {
        CorrelationResult {
            r: 0.0,
            p_value: 1.0,
            n: pairs.len(),
            degenerate: true,
        }
    };
    Ok(WindowAnalysis {
        n,
        window,
        stride,
        set_count,
        windows,
        pairs,
        r_squared: correlation.r * correlation.r,
        correlation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;
    use crate::perturb::PerturbationRecord;
    use crate::suite::{AspectCounts, TestCase};
    use alloc::vec;

    fn ids(values: &[f64]) -> BTreeMap<String, f64> {
        values
            .iter()
            .enumerate()
            .map(|(i, v)| (format!("s{i:04}"), *v))
            .collect()
    }

    #[test]
    fn correlate_groups() {
        let targets = ids(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let r = correlate_metric(&targets, &targets, None).unwrap();
        assert_eq!(r[ALL_GROUP].r, 1.0);
        let groups: BTreeMap<String, String> = targets
            .keys()
            .enumerate()
            .map(|(i, k)| (k.clone(), format!("m{}", i % 3)))
            .collect();
        let r = correlate_metric(&targets, &targets, Some(&groups)).unwrap();
        assert_eq!(r.len(), 3);
        let mut lonely = groups.clone();
        lonely.insert("s0000".into(), "solo".into());
        lonely.insert("s0003".into(), "m1".into());
        assert!(matches!(
            correlate_metric(&targets, &targets, Some(&lonely)),
            Err(Error::TooFewPoints { ref group, n: 1 }) if group == "solo"
        ));
        let empty: BTreeMap<String, f64> = BTreeMap::new();
        assert!(matches!(
            correlate_metric(&empty, &targets, None),
            Err(Error::EmptyIntersection(_))
        ));
    }

    fn toy_suite(test_type: TestType, origins: &[Origin]) -> TestSuite {
        let mut suite = TestSuite::empty(test_type, 0, RunConfig::default());
        let aspect = if test_type == TestType::Discrimination {
            Aspect::LexicalRepetition
        } else {
            Aspect::Typo
        };
        for (i, origin) in origins.iter().enumerate() {
            for label in [1u8, 0] {
                suite.cases.push(TestCase {
                    case_id: format!("c{i}/{label}"),
                    test_type,
                    aspect,
                    label,
                    origin: *origin,
                    source_id: format!("s{i}"),
                    paired_id: Some(format!("c{i}/{}", 1 - label)),
                    input: String::new(),
                    story_text: format!("story {i}"),
                    record: (label == 0).then(|| PerturbationRecord {
                        aspect,
                        technique: 1,
                        edits: vec![],
                        seed: 0,
                        source_id: format!("s{i}"),
                        basis: None,
                    }),
                });
            }
        }
        suite
            .manifest
            .counts
            .insert(aspect, AspectCounts::default());
        suite.recount();
        suite
    }

    #[test]
    fn label_oracle_and_constant() {
        let suite = toy_suite(TestType::Discrimination, &[Origin::Human; 4]);
        let oracle: BTreeMap<String, f64> = suite
            .cases
            .iter()
            .map(|c| (c.case_id.clone(), c.label as f64))
            .collect();
        let r = discrimination_eval(&suite, &oracle).unwrap();
        let row = r[&Aspect::LexicalRepetition];
        assert_eq!(row.result.r, 1.0);
        assert_eq!((row.n0, row.n1), (4, 4));
        let flipped: BTreeMap<String, f64> =
            oracle.iter().map(|(k, v)| (k.clone(), 1.0 - v)).collect();
        assert_eq!(
            discrimination_eval(&suite, &flipped).unwrap()[&Aspect::LexicalRepetition]
                .result
                .r,
            -1.0
        );
        let constant: BTreeMap<String, f64> = oracle.keys().map(|k| (k.clone(), 0.3)).collect();
        let c = discrimination_eval(&suite, &constant).unwrap()[&Aspect::LexicalRepetition].result;
        assert_eq!((c.r, c.degenerate), (0.0, true));
        let mut partial = oracle.clone();
        partial.remove("c2/0");
        assert!(
            matches!(discrimination_eval(&suite, &partial), Err(Error::Unscored(ref v)) if v == &["c2/0"])
        );
        assert!(invariance_eval(&suite, &oracle).is_err());
    }

    #[test]
    fn invariance_split_by_origin() {
        let origins = [
            Origin::Human,
            Origin::Human,
            Origin::PerturbedIncoherent,
            Origin::PerturbedIncoherent,
        ];
        let suite = toy_suite(TestType::Invariance, &origins);
        // pair-constant scores: perfectly robust
        let scores: BTreeMap<String, f64> = suite
            .cases
            .iter()
            .map(|c| {
                (
                    c.case_id.clone(),
                    c.story_text.len() as f64 + c.source_id.len() as f64,
                )
            })
            .collect();
        let r = invariance_eval(&suite, &scores).unwrap();
        assert_eq!(r.len(), 2);
        for row in r.values() {
            assert_eq!(row.result.r.abs(), 0.0);
        }
        let oracle: BTreeMap<String, f64> = suite
            .cases
            .iter()
            .map(|c| (c.case_id.clone(), c.label as f64))
            .collect();
        for row in invariance_eval(&suite, &oracle).unwrap().values() {
            assert_eq!(row.result.r.abs(), 1.0);
        }
    }

    #[test]
    fn window_arithmetic() {
        let judgments = ids(&(0..1000)
            .map(|i| (i % 97) as f64 / 20.0 + 1.0)
            .collect::<Vec<_>>());
        let scores = ids(&(0..1000)
            .map(|i| ((i * 7919) % 1000) as f64)
            .collect::<Vec<_>>());
        let w = window_difference_analysis(&judgments, &scores, 200, 10, 0.01).unwrap();
        assert_eq!(w.set_count, 80);
        assert_eq!(w.pairs.len(), 6400);
        assert!((0.0..=1.0).contains(&w.r_squared));

        let same = window_difference_analysis(&judgments, &judgments, 200, 10, 0.01).unwrap();
        assert!((same.r_squared - 1.0).abs() < 1e-12);
        assert!(same.pairs.iter().all(|p| p.human_sig == p.metric_sig));

        let small = ids(&(0..210).map(|i| i as f64).collect::<Vec<_>>());
        let b = window_difference_analysis(&small, &small, 200, 10, 0.01).unwrap();
        assert_eq!((b.set_count, b.pairs.len()), (1, 1));
        assert_eq!(b.pairs[0].d_human, 0.0);

        assert!(matches!(
            window_difference_analysis(&small, &small, 300, 10, 0.01),
            Err(Error::WindowTooLarge {
                window: 300,
                n: 210
            })
        ));
    }

    #[test]
    fn window_r_squared_is_pearson_of_pairs() {
        let judgments = ids(&(0..300).map(|i| ((i * 31) % 17) as f64).collect::<Vec<_>>());
        let scores = ids(&(0..300)
            .map(|i| ((i * 13) % 23) as f64 * 0.1)
            .collect::<Vec<_>>());
        let w = window_difference_analysis(&judgments, &scores, 50, 7, 0.01).unwrap();
        assert_eq!(w.set_count, 250 / 7);
        let dh: Vec<f64> = w.pairs.iter().map(|p| p.d_human).collect();
        let dm: Vec<f64> = w.pairs.iter().map(|p| p.d_metric).collect();
        let r = pearson(&dh, &dm).unwrap().r;
        assert!((w.r_squared - r * r).abs() < 1e-12);
        // antisymmetry of ordered pairs
        let k = w.set_count;
        assert_eq!(w.pairs[1].d_human, -w.pairs[k].d_human);
    }
}
