//! Labeled test suites: construction, grammaticality filtering and replay.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::adapter::{check_alignment, ScoreOutcome, ScoreRequest, Scorer};
use crate::config::RunConfig;
use crate::corpus::{tag_story, Corpus, Segmenter, Story};
use crate::error::{Error, Result};
use crate::lexicon::LexiconBundle;
use crate::perturb::{
    apply_edits, perturb, selects, Aspect, Outcome, ParaphraseBank, PerturbContext,
    PerturbationRecord, TestType,
};
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Origin {
    Human,
    PerturbedHuman,
    PerturbedIncoherent,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Human => "human",
            Origin::PerturbedHuman => "perturbed_human",
            Origin::PerturbedIncoherent => "perturbed_incoherent",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestCase {
    pub case_id: String,
    pub test_type: TestType,
    pub aspect: Aspect,
    pub label: u8,
    pub origin: Origin,
    /// Story id, or for invariance cases built on a discrimination case,
    /// that case's id.
    pub source_id: String,
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub paired_id: Option<String>,
    pub input: String,
    pub story_text: String,
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub record: Option<PerturbationRecord>,
}

impl TestCase {
    pub fn validate(&self) -> Result<()> {
        match (self.label, &self.record) {
            (1, None) => Ok(()),
            (0, Some(r)) => r.validate(),
            (1, Some(_)) => Err(Error::Invalid(format!(
                "{}: label 1 with a perturbation record",
                self.case_id
            ))),
            (0, None) => Err(Error::Invalid(format!(
                "{}: label 0 without a perturbation record",
                self.case_id
            ))),
            (l, _) => Err(Error::Invalid(format!(
                "{}: label {l} is not 0 or 1",
                self.case_id
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AspectCounts {
    /// Label-1 cases (coherent or original).
    pub positive: usize,
    /// Label-0 cases (incoherent or perturbed).
    pub negative: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SkipEntry {
    pub aspect: Aspect,
    pub source_id: String,
    pub technique: u8,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FilterEntry {
    pub case_id: String,
    pub score: f64,
    pub removed: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Manifest {
    pub test_type: TestType,
    pub seed: u64,
    pub config: RunConfig,
    pub counts: BTreeMap<Aspect, AspectCounts>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub skips: Vec<SkipEntry>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub filter_log: Vec<FilterEntry>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestSuite {
    pub manifest: Manifest,
    pub cases: Vec<TestCase>,
}

fn count_cases(cases: &[TestCase]) -> BTreeMap<Aspect, AspectCounts> {
    let mut counts: BTreeMap<Aspect, AspectCounts> = BTreeMap::new();
    for c in cases {
        let entry = counts.entry(c.aspect).or_default();
        if c.label == 1 {
            entry.positive += 1;
        } else {
            entry.negative += 1;
        }
    }
    counts
}

impl TestSuite {
    pub fn empty(test_type: TestType, seed: u64, config: RunConfig) -> TestSuite {
        TestSuite {
            manifest: Manifest {
                test_type,
                seed,
                config,
                counts: BTreeMap::new(),
                skips: Vec::new(),
                filter_log: Vec::new(),
            },
            cases: Vec::new(),
        }
    }

    pub fn test_type(&self) -> TestType {
        self.manifest.test_type
    }

    /// Recomputes manifest counts from the cases. Aspects already listed
    /// keep an entry even when no case remains.
    pub fn recount(&mut self) {
        let mut counts = count_cases(&self.cases);
        for aspect in self.manifest.counts.keys() {
            counts.entry(*aspect).or_default();
        }
        self.manifest.counts = counts;
    }

    /// Checks the manifest against the cases and every case's own invariants.
    pub fn validate(&self) -> Result<()> {
        for case in &self.cases {
            case.validate()?;
            if case.test_type != self.manifest.test_type {
                return Err(Error::Invalid(format!(
                    "{}: {} case in a {} suite",
                    case.case_id,
                    case.test_type.as_str(),
                    self.manifest.test_type.as_str()
                )));
            }
        }
        let actual = count_cases(&self.cases);
        for (aspect, counts) in &self.manifest.counts {
            let found = actual.get(aspect).copied().unwrap_or_default();
            if found != *counts {
                return Err(Error::Invalid(format!(
                    "manifest counts for {aspect} ({}/{}) differ from cases ({}/{})",
                    counts.positive, counts.negative, found.positive, found.negative
                )));
            }
        }
        if let Some(missing) = actual
            .keys()
            .find(|a| !self.manifest.counts.contains_key(a))
        {
            return Err(Error::Invalid(format!(
                "manifest has no counts for {missing}"
            )));
        }
        let mut ids = BTreeSet::new();
        if let Some(dup) = self.cases.iter().find(|c| !ids.insert(c.case_id.as_str())) {
            return Err(Error::Invalid(format!(
                "duplicate case id `{}`",
                dup.case_id
            )));
        }
        Ok(())
    }

    pub fn get(&self, case_id: &str) -> Option<&TestCase> {
        self.cases.iter().find(|c| c.case_id == case_id)
    }

    pub fn aspects(&self) -> Vec<Aspect> {
        self.manifest.counts.keys().copied().collect()
    }
}

/// Runs `f` over `0..n`, possibly in parallel, returning results in index
/// order.
pub trait Executor {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}

/// Shared read-only inputs of a build.
#[derive(Clone, Copy)]
pub struct BuildInputs<'a> {
    pub bundle: &'a LexiconBundle,
    pub bank: Option<&'a ParaphraseBank>,
    pub config: &'a RunConfig,
    pub segmenter: &'a Segmenter,
}

/// Canonical segmentation plus tagging: the form every perturbation and
/// every suite text is built from.
pub fn prepare_story(
    story: &Story,
    segmenter: &Segmenter,
    bundle: &LexiconBundle,
) -> Result<Story> {
    tag_story(&segmenter.canonical(story), bundle)
}

fn prepare_all<E: Executor>(
    exec: &E,
    stories: &[Story],
    inputs: &BuildInputs,
) -> Result<Vec<Story>> {
    exec.map(stories.len(), |i| {
        prepare_story(&stories[i], inputs.segmenter, inputs.bundle)
    })
    .into_iter()
    .collect()
}

fn dedup_aspects(aspects: &[Aspect], test_type: TestType) -> Result<Vec<Aspect>> {
    if aspects.is_empty() {
        return Err(Error::NoAspects);
    }
    let mut out: Vec<Aspect> = Vec::new();
    for &a in aspects {
        if a.test_type() != test_type {
            return Err(Error::UnknownAspect(format!(
                "{a} is not a {} aspect",
                test_type.as_str()
            )));
        }
        if !out.contains(&a) {
            out.push(a);
        }
    }
    Ok(out)
}

pub fn discrimination_case_id(aspect: Aspect, story_id: &str, label: u8) -> String {
    format!(
        "dis/{aspect}/{story_id}/{}",
        if label == 1 { "coh" } else { "inc" }
    )
}

pub fn invariance_case_id(aspect: Aspect, source_id: &str, label: u8) -> String {
    format!(
        "inv/{aspect}/{source_id}/{}",
        if label == 1 { "orig" } else { "pert" }
    )
}

enum Unit {
    Case(TestCase),
    Skip(SkipEntry),
}

fn perturbed_unit(
    outcome: Outcome,
    aspect: Aspect,
    technique: u8,
    source_id: &str,
    make: impl FnOnce(Story, PerturbationRecord) -> TestCase,
) -> Unit {
    match outcome {
        Outcome::Perturbed(story, record) => Unit::Case(make(story, record)),
        Outcome::Skipped(reason) => Unit::Skip(SkipEntry {
            aspect,
            source_id: source_id.to_string(),
            technique,
            reason,
        }),
    }
}

/// Builds a discrimination suite: every story selected for an aspect gives
/// a coherent case; its perturbation, when possible, an incoherent one.
/// Techniques alternate with the position among selected stories.
pub fn build_discrimination_suite_in<E: Executor>(
    exec: &E,
    corpus: &Corpus,
    aspects: &[Aspect],
    inputs: &BuildInputs,
    seed: u64,
) -> Result<TestSuite> {
    let aspects = dedup_aspects(aspects, TestType::Discrimination)?;
    inputs.config.validate()?;
    let stories = prepare_all(exec, &corpus.stories, inputs)?;
    let ctx = PerturbContext {
        bundle: inputs.bundle,
        config: inputs.config,
        bank: inputs.bank,
        corpus: &stories,
    };
    let mut suite = TestSuite::empty(TestType::Discrimination, seed, inputs.config.clone());
    for aspect in aspects {
        suite
            .manifest
            .counts
            .insert(aspect, AspectCounts::default());
        let flags: Vec<bool> = exec
            .map(stories.len(), |i| {
                selects(&stories[i], aspect, inputs.bundle, inputs.config)
            })
            .into_iter()
            .collect::<Result<_>>()?;
        let selected: Vec<usize> = (0..stories.len()).filter(|&i| flags[i]).collect();
        let techniques = aspect.techniques();
        let units: Vec<(TestCase, Unit)> = exec
            .map(selected.len(), |pos| -> Result<(TestCase, Unit)> {
                let index = selected[pos];
                let story = &stories[index];
                let technique = techniques[pos % techniques.len()];
                let case_seed = derive_seed(seed, &[aspect.code(), technique as u64, index as u64]);
                let coh_id = discrimination_case_id(aspect, &story.id, 1);
                let inc_id = discrimination_case_id(aspect, &story.id, 0);
                let outcome = perturb(story, aspect, technique, &ctx, case_seed)?;
                let mut coherent = TestCase {
                    case_id: coh_id.clone(),
                    test_type: TestType::Discrimination,
                    aspect,
                    label: 1,
                    origin: Origin::Human,
                    source_id: story.id.clone(),
                    paired_id: None,
                    input: story.input.clone(),
                    story_text: story.render(),
                    record: None,
                };
                let unit = perturbed_unit(
                    outcome,
                    aspect,
                    technique,
                    &story.id,
                    |perturbed, record| TestCase {
                        case_id: inc_id.clone(),
                        label: 0,
                        origin: Origin::PerturbedHuman,
                        paired_id: Some(coh_id.clone()),
                        story_text: perturbed.render(),
                        record: Some(record),
                        ..coherent.clone()
                    },
                );
                if matches!(unit, Unit::Case(_)) {
                    coherent.paired_id = Some(inc_id);
                }
                Ok((coherent, unit))
            })
            .into_iter()
            .collect::<Result<_>>()?;
        for (coherent, unit) in units {
            suite.cases.push(coherent);
            match unit {
                Unit::Case(c) => suite.cases.push(c),
                Unit::Skip(s) => suite.manifest.skips.push(s),
            }
        }
    }
    suite.recount();
    Ok(suite)
}

pub fn build_discrimination_suite(
    corpus: &Corpus,
    aspects: &[Aspect],
    bundle: &LexiconBundle,
    bank: Option<&ParaphraseBank>,
    config: &RunConfig,
    seed: u64,
) -> Result<TestSuite> {
    let segmenter = Segmenter::default();
    let inputs = BuildInputs {
        bundle,
        bank,
        config,
        segmenter: &segmenter,
    };
    build_discrimination_suite_in(&Sequential, corpus, aspects, &inputs, seed)
}

struct Source {
    story: Story,
    incoherent: bool,
}

/// Builds an invariance suite over human stories and/or the incoherent
/// cases of a discrimination suite. Each successful perturbation yields an
/// (original, perturbed) pair linked through `paired_id`.
pub fn build_invariance_suite_in<E: Executor>(
    exec: &E,
    corpus: Option<&Corpus>,
    discrimination: Option<&TestSuite>,
    aspects: &[Aspect],
    inputs: &BuildInputs,
    seed: u64,
) -> Result<TestSuite> {
    let aspects = dedup_aspects(aspects, TestType::Invariance)?;
    inputs.config.validate()?;
    if corpus.is_none() && discrimination.is_none() {
        return Err(Error::Invalid("no invariance sources".into()));
    }
    if let Some(d) = discrimination {
        if d.test_type() != TestType::Discrimination {
            return Err(Error::Invalid(
                "source suite is not a discrimination suite".into(),
            ));
        }
    }
    let mut raw: Vec<(Story, bool)> = corpus
        .map(|c| c.stories.iter().map(|s| (s.clone(), false)).collect())
        .unwrap_or_default();
    for case in discrimination
        .iter()
        .flat_map(|d| d.cases.iter())
        .filter(|c| c.label == 0)
    {
        raw.push((
            inputs
                .segmenter
                .story(&case.case_id, &case.input, &case.story_text),
            true,
        ));
    }
    let sources: Vec<Source> = exec
        .map(raw.len(), |i| {
            prepare_story(&raw[i].0, inputs.segmenter, inputs.bundle).map(|story| Source {
                story,
                incoherent: raw[i].1,
            })
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let donors: Vec<Story> = sources
        .iter()
        .filter(|s| !s.incoherent)
        .map(|s| s.story.clone())
        .collect();
    let ctx = PerturbContext {
        bundle: inputs.bundle,
        config: inputs.config,
        bank: inputs.bank,
        corpus: &donors,
    };
    let mut suite = TestSuite::empty(TestType::Invariance, seed, inputs.config.clone());
    for aspect in aspects {
        suite
            .manifest
            .counts
            .insert(aspect, AspectCounts::default());
        let units: Vec<(Option<TestCase>, Unit)> = exec
            .map(sources.len(), |index| -> Result<(Option<TestCase>, Unit)> {
                let Source { story, incoherent } = &sources[index];
                let case_seed = derive_seed(seed, &[aspect.code(), 1, index as u64]);
                let orig_id = invariance_case_id(aspect, &story.id, 1);
                let pert_id = invariance_case_id(aspect, &story.id, 0);
                let original = TestCase {
                    case_id: orig_id.clone(),
                    test_type: TestType::Invariance,
                    aspect,
                    label: 1,
                    origin: if *incoherent {
                        Origin::PerturbedIncoherent
                    } else {
                        Origin::Human
                    },
                    source_id: story.id.clone(),
                    paired_id: Some(pert_id.clone()),
                    input: story.input.clone(),
                    story_text: story.render(),
                    record: None,
                };
                let outcome = perturb(story, aspect, 1, &ctx, case_seed)?;
                let unit = perturbed_unit(outcome, aspect, 1, &story.id, |perturbed, record| {
                    TestCase {
                        case_id: pert_id.clone(),
                        label: 0,
                        origin: if *incoherent {
                            Origin::PerturbedIncoherent
                        } else {
                            Origin::PerturbedHuman
                        },
                        paired_id: Some(orig_id.clone()),
                        story_text: perturbed.render(),
                        record: Some(record),
                        ..original.clone()
                    }
                });
                let original = matches!(unit, Unit::Case(_)).then_some(original);
                Ok((original, unit))
            })
            .into_iter()
            .collect::<Result<_>>()?;
        for (original, unit) in units {
            match unit {
                Unit::Case(c) => {
                    suite.cases.extend(original);
                    suite.cases.push(c);
                }
                Unit::Skip(s) => suite.manifest.skips.push(s),
            }
        }
    }
    suite.recount();
    Ok(suite)
}

pub fn build_invariance_suite(
    corpus: Option<&Corpus>,
    discrimination: Option<&TestSuite>,
    aspects: &[Aspect],
    bundle: &LexiconBundle,
    bank: Option<&ParaphraseBank>,
    config: &RunConfig,
    seed: u64,
) -> Result<TestSuite> {
    let segmenter = Segmenter::default();
    let inputs = BuildInputs {
        bundle,
        bank,
        config,
        segmenter: &segmenter,
    };
    build_invariance_suite_in(&Sequential, corpus, discrimination, aspects, &inputs, seed)
}

/// Scoring requests for the cases the grammar filter looks at: label-0
/// cases of every aspect but Typo.
pub fn grammar_requests(suite: &TestSuite) -> Vec<ScoreRequest> {
    suite
        .cases
        .iter()
        .filter(|c| c.label == 0 && c.aspect != Aspect::Typo)
        .map(|c| ScoreRequest {
            request_id: c.case_id.clone(),
            input: c.input.clone(),
            story: c.story_text.clone(),
            references: Vec::new(),
        })
        .collect()
}

/// Removes label-0 cases the grammar scorer rates below `threshold`.
/// Typo cases are never scored. In invariance suites the paired original
/// goes too. Any scoring failure is an error and leaves `suite` as it was.
pub fn grammatical_filter(
    suite: &TestSuite,
    scorer: &mut dyn Scorer,
    threshold: f64,
) -> Result<TestSuite> {
    let requests = grammar_requests(suite);
    let outcomes = if requests.is_empty() {
        Vec::new()
    } else {
        scorer.score_batch(&requests)?
    };
    check_alignment(&requests, &outcomes)?;
    let failed: Vec<String> = outcomes
        .iter()
        .filter(|o| !o.score().is_some_and(f64::is_finite))
        .map(|o| o.request_id().to_string())
        .collect();
    if !failed.is_empty() {
        return Err(Error::Adapter(format!(
            "grammar scorer failed on {}",
            failed.join(", ")
        )));
    }
    let mut removed: BTreeSet<String> = BTreeSet::new();
    let mut log = Vec::with_capacity(outcomes.len());
    for outcome in &outcomes {
        let ScoreOutcome::Scored(r) = outcome else {
            unreachable!()
        };
        let drop = r.score < threshold;
        if drop {
            removed.insert(r.request_id.clone());
        }
        log.push(FilterEntry {
            case_id: r.request_id.clone(),
            score: r.score,
            removed: drop,
        });
    }
    if suite.test_type() == TestType::Invariance {
        let partners: Vec<String> = suite
            .cases
            .iter()
            .filter(|c| removed.contains(&c.case_id))
            .filter_map(|c| c.paired_id.clone())
            .collect();
        removed.extend(partners);
    }
    let mut out = suite.clone();
    out.cases.retain(|c| !removed.contains(&c.case_id));
    for c in &mut out.cases {
        if c.paired_id.as_ref().is_some_and(|p| removed.contains(p)) {
            c.paired_id = None;
        }
    }
    out.manifest.filter_log.extend(log);
    out.recount();
    Ok(out)
}

/// Ids of label-0 cases whose recorded edits, replayed on the paired
/// label-1 text, do not reproduce their text byte for byte.
pub fn verify_replay(suite: &TestSuite, segmenter: &Segmenter) -> Vec<String> {
    let by_id: BTreeMap<&str, &TestCase> = suite
        .cases
        .iter()
        .map(|c| (c.case_id.as_str(), c))
        .collect();
    let mut bad = Vec::new();
    for case in suite.cases.iter().filter(|c| c.label == 0) {
        let source = case.paired_id.as_deref().and_then(|p| by_id.get(p));
        let ok = match (source, &case.record) {
            (Some(src), Some(record)) => {
                let story = segmenter.story(&src.source_id, &src.input, &src.story_text);
                apply_edits(&story, &record.edits)
                    .is_ok_and(|s| s.render() == case.story_text && s.input == case.input)
            }
            _ => false,
        };
        if !ok {
            bad.push(case.case_id.clone());
        }
    }
    bad
}
