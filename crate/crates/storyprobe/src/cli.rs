//! The `storyprobe` command line. Exit codes: 0 success, 1 usage error,
//! 2 data error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use storyprobe_core::adapter::{
    BuiltinId, BuiltinMetric, ExternalSpec, ScoreOutcome, ScoreRequest, Scorer,
};
use storyprobe_core::corpus::Corpus;
use storyprobe_core::eval::{
    aggregate_judgments, correlate_metric, discrimination_eval, error_type_subsets,
    invariance_eval, krippendorff_alpha, pearson, story_groups, validate_annotations,
    window_difference_analysis, Aggregation, AnnotationPolicy, AnnotationRecord, ErrorType,
    LabelCorrelation, Role, SubsetPolicy,
};
use storyprobe_core::perturb::{Aspect, TestType};
use storyprobe_core::suite::{
    build_discrimination_suite_in, build_invariance_suite_in, grammatical_filter, BuildInputs,
    Origin, TestCase, TestSuite,
};
use storyprobe_core::RunConfig;

use crate::corpus_io::{
    corpus_to_records, prepare_corpus, read_annotations, read_corpus, read_references, read_values,
    write_corpus, CorpusFormat,
};
use crate::error::{read_text, write_text, Error};
use crate::parallel::RayonExecutor;
use crate::process::ProcessScorer;
use crate::report::{window_points_tsv, window_record, Report, ReportRow};
use crate::resources::{load_paraphrases, load_resources, resource_root, Resources};
use crate::scores::{ScoreFile, Target};
use crate::suite_io::{config_hash, digest, read_suite, suite_hash, write_suite};

#[derive(Parser, Debug)]
#[command(
    name = "storyprobe",
    version,
    about = "Behavioral test suites and correlation analysis for story metrics"
)]
pub struct Cli {
    /// Master seed for every randomized decision (overrides the config file).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core. Output does not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Base directory for relative paths.
    #[arg(long, global = true)]
    pub data_dir: Option<PathBuf>,
    /// JSON run configuration; missing fields take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Resource directory; defaults to the shipped starter resources.
    #[arg(long, global = true, env = "STORYPROBE_RESOURCES")]
    pub resources: Option<PathBuf>,
    /// More logging (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Normalize a raw corpus: segment, delexicalize names, truncate.
    Ingest(IngestArgs),
    /// Build a discrimination or invariance suite from a corpus.
    BuildSuite(BuildArgs),
    /// Score a suite or corpus with a builtin metric or an adapter process.
    Score(ScoreArgs),
    /// Correlate metric scores with aggregated human judgments.
    EvalCorr(CorrArgs),
    /// Correlate metric scores with reasonable/unreasonable labels per error type.
    EvalTypes(TypesArgs),
    /// Correlations split by a story tag such as model or dataset.
    EvalGen(GenArgs),
    /// Per-aspect correlation with coherent/incoherent labels.
    EvalDisc(SuiteEvalArgs),
    /// Per-aspect correlation with original/perturbed labels.
    EvalInv(SuiteEvalArgs),
    /// Window-difference analysis of metric scores against judgments.
    EvalWindows(WindowArgs),
    /// Merge report files computed on the same source.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "records")]
    pub format: CorpusFormat,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub max_words: Option<usize>,
    /// Keep character names instead of replacing them with placeholders.
    #[arg(long)]
    pub keep_names: bool,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum SuiteType {
    Discrimination,
    Invariance,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    /// Corpus in records format (the output of `ingest`).
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long = "type", value_enum)]
    pub suite_type: SuiteType,
    /// Comma-separated aspect names, or `all`.
    #[arg(long, default_value = "all")]
    pub aspects: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Discrimination suite whose incoherent cases become extra invariance sources.
    #[arg(long)]
    pub from_suite: Option<PathBuf>,
    /// Paraphrase table: `source<TAB>paraphrase<TAB>similarity<TAB>bleu1`.
    #[arg(long)]
    pub paraphrases: Option<PathBuf>,
    /// Grammaticality adapter command (split on whitespace).
    #[arg(long)]
    pub grammar_cmd: Option<String>,
    #[arg(long)]
    pub grammar_threshold: Option<f64>,
    #[arg(long, default_value_t = 30_000)]
    pub timeout_ms: u64,
}

#[derive(Args, Debug)]
pub struct ScoreArgs {
    #[arg(long, conflicts_with = "corpus", required_unless_present = "corpus")]
    pub suite: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Builtin metric id.
    #[arg(long, conflicts_with = "adapter", required_unless_present = "adapter")]
    pub metric: Option<String>,
    /// Adapter command (split on whitespace).
    #[arg(long)]
    pub adapter: Option<String>,
    /// JSON lines with `id` and `references` (or `story`), keyed by story id.
    #[arg(long)]
    pub references: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 30_000)]
    pub timeout_ms: u64,
    #[arg(long, default_value_t = storyprobe_core::adapter::DEFAULT_MAX_IN_FLIGHT)]
    pub max_in_flight: usize,
}

#[derive(Args, Debug)]
pub struct CorrArgs {
    #[arg(long)]
    pub annotations: PathBuf,
    #[arg(long = "scores", required = true, num_args = 1..)]
    pub scores: Vec<PathBuf>,
    /// Check that the score files belong to this corpus.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub group_by: Option<String>,
    /// Output prefix for `<prefix>.tsv` and `<prefix>.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub annotations: PathBuf,
    #[arg(long = "scores", required = true, num_args = 1..)]
    pub scores: Vec<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Tag to split by, e.g. `model` or `dataset`.
    #[arg(long)]
    pub group_by: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TypesArgs {
    #[arg(long)]
    pub annotations: PathBuf,
    #[arg(long = "scores", required = true, num_args = 1..)]
    pub scores: Vec<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SuiteEvalArgs {
    #[arg(long)]
    pub suite: PathBuf,
    #[arg(long = "scores", required = true, num_args = 1..)]
    pub scores: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct WindowArgs {
    #[arg(
        long,
        conflicts_with = "judgments",
        required_unless_present = "judgments"
    )]
    pub annotations: Option<PathBuf>,
    /// `id<TAB>judgment` rows.
    #[arg(long)]
    pub judgments: Option<PathBuf>,
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-pair point file for plotting.
    #[arg(long)]
    pub points: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[arg(required = true, num_args = 1..)]
    pub reports: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failed command: usage problems exit 1, data problems exit 2.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

impl From<storyprobe_core::Error> for Failure {
    fn from(e: storyprobe_core::Error) -> Self {
        Failure::Data(e.into())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

/// Parses `args`, runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .try_init();
    match execute(&cli) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

struct Session<'a> {
    cli: &'a Cli,
    config: RunConfig,
}

impl Session<'_> {
    fn path(&self, p: &Path) -> PathBuf {
        match &self.cli.data_dir {
            Some(base) if p.is_relative() => base.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn resources(&self) -> Outcome<Resources> {
        let root = resource_root(
            self.cli
                .resources
                .as_deref()
                .map(|p| self.path(p))
                .as_deref(),
        );
        Ok(load_resources(&root)?)
    }

    fn executor(&self) -> Outcome<RayonExecutor> {
        Ok(RayonExecutor::new(self.cli.jobs)?)
    }

    fn emit(&self, report: &Report, out: Option<&Path>) -> Outcome<()> {
        print!("{}", report.to_tsv());
        for note in &report.notes {
            eprintln!("note: {note}");
        }
        if let Some(prefix) = out {
            report.write(&self.path(prefix))?;
        }
        Ok(())
    }
}

fn load_config(cli: &Cli) -> Outcome<RunConfig> {
    let mut config = match &cli.config {
        Some(p) => {
            let p = match &cli.data_dir {
                Some(base) if p.is_relative() => base.join(p),
                _ => p.clone(),
            };
            let text = read_text(&p)?;
            serde_json::from_str::<RunConfig>(&text)
                .map_err(|e| Error::Data(format!("{}: invalid configuration: {e}", p.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(r) = &cli.resources {
        config.resources = r.display().to_string();
    }
    Ok(config)
}

fn execute(cli: &Cli) -> Outcome<()> {
    let config = load_config(cli)?;
    let mut s = Session { cli, config };
    match &cli.command {
        Command::Ingest(a) => ingest(&mut s, a),
        Command::BuildSuite(a) => build_suite(&mut s, a),
        Command::Score(a) => score(&s, a),
        Command::EvalCorr(a) => eval_corr(
            &s,
            &a.annotations,
            &a.scores,
            a.corpus.as_deref(),
            a.group_by.as_deref(),
            a.out.as_deref(),
        ),
        Command::EvalGen(a) => eval_corr(
            &s,
            &a.annotations,
            &a.scores,
            a.corpus.as_deref(),
            Some(&a.group_by),
            a.out.as_deref(),
        ),
        Command::EvalTypes(a) => eval_types(&s, a),
        Command::EvalDisc(a) => eval_suite(&s, a, TestType::Discrimination),
        Command::EvalInv(a) => eval_suite(&s, a, TestType::Invariance),
        Command::EvalWindows(a) => eval_windows(&mut s, a),
        Command::Report(a) => report(&s, a),
    }
}

fn ingest(s: &mut Session, a: &IngestArgs) -> Outcome<()> {
    if let Some(m) = a.max_words {
        s.config.max_words = m;
    }
    s.config.validate()?;
    let res = s.resources()?;
    let corpus = read_corpus(&s.path(&a.input), a.format, &res.segmenter)?;
    let prepared = prepare_corpus(&corpus, &res, s.config.max_words, !a.keep_names);
    write_corpus(&s.path(&a.out), &prepared)?;
    eprintln!("ingested {} stories", prepared.len());
    Ok(())
}

pub fn parse_aspects(spec: &str, test_type: TestType) -> Outcome<Vec<Aspect>> {
    if spec.trim() == "all" {
        return Ok(match test_type {
            TestType::Discrimination => Aspect::DISCRIMINATION.to_vec(),
            TestType::Invariance => Aspect::INVARIANCE.to_vec(),
        });
    }
    spec.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| {
            let a = Aspect::parse(x.trim()).map_err(|e| Failure::Usage(e.to_string()))?;
            if a.test_type() != test_type {
                return Err(Failure::Usage(format!(
                    "`{a}` is not a {} aspect",
                    test_type.as_str()
                )));
            }
            Ok(a)
        })
        .collect()
}

fn command_spec(cmd: &str, timeout_ms: u64, max_in_flight: usize) -> Outcome<ExternalSpec> {
    let parts: Vec<String> = cmd.split_whitespace().map(str::to_string).collect();
    if parts.is_empty() {
        return Err(Failure::Usage("empty adapter command".to_string()));
    }
    Ok(ExternalSpec {
        timeout_ms,
        max_in_flight,
        ..ExternalSpec::new(parts)
    })
}

fn build_suite(s: &mut Session, a: &BuildArgs) -> Outcome<()> {
    if let Some(t) = a.grammar_threshold {
        s.config.grammar_threshold = t;
    }
    s.config.validate()?;
    let test_type = match a.suite_type {
        SuiteType::Discrimination => TestType::Discrimination,
        SuiteType::Invariance => TestType::Invariance,
    };
    let aspects = parse_aspects(&a.aspects, test_type)?;
    let res = s.resources()?;
    let bank = a
        .paraphrases
        .as_ref()
        .map(|p| load_paraphrases(&s.path(p)))
        .transpose()?;
    let corpus = a
        .corpus
        .as_ref()
        .map(|p| read_corpus(&s.path(p), CorpusFormat::Records, &res.segmenter))
        .transpose()?;
    let inputs = BuildInputs {
        bundle: &res.bundle,
        bank: bank.as_ref(),
        config: &s.config,
        segmenter: &res.segmenter,
    };
    let exec = s.executor()?;
    let seed = s.config.seed;
    let suite = match test_type {
        TestType::Discrimination => {
            if a.from_suite.is_some() {
                return Err(Failure::Usage(
                    "--from-suite only applies to invariance suites".to_string(),
                ));
            }
            let corpus =
                corpus.ok_or_else(|| Failure::Usage("--corpus is required".to_string()))?;
            build_discrimination_suite_in(&exec, &corpus, &aspects, &inputs, seed)?
        }
        TestType::Invariance => {
            let dis = a
                .from_suite
                .as_ref()
                .map(|p| read_suite(&s.path(p)))
                .transpose()?;
            if corpus.is_none() && dis.is_none() {
                return Err(Failure::Usage(
                    "invariance suites need --corpus, --from-suite or both".to_string(),
                ));
            }
            build_invariance_suite_in(
                &exec,
                corpus.as_ref(),
                dis.as_ref(),
                &aspects,
                &inputs,
                seed,
            )?
        }
    };
    let suite = match &a.grammar_cmd {
        Some(cmd) => {
            let spec = command_spec(
                cmd,
                a.timeout_ms,
                storyprobe_core::adapter::DEFAULT_MAX_IN_FLIGHT,
            )?;
            let mut scorer = ProcessScorer::spawn(&spec)?;
            let filtered = grammatical_filter(&suite, &mut scorer, s.config.grammar_threshold)?;
            scorer.shutdown();
            filtered
        }
        None => {
            log::info!("no grammar adapter given; perturbed cases are kept unfiltered");
            suite
        }
    };
    write_suite(&s.path(&a.out), &suite)?;
    for (aspect, c) in &suite.manifest.counts {
        eprintln!(
            "{aspect}: {} coherent/original, {} perturbed",
            c.positive, c.negative
        );
    }
    Ok(())
}

/// Story whose references apply to a case: the source story, or for a
/// case derived from an incoherent discrimination case, that case's story.
fn reference_key(case: &TestCase) -> &str {
    if case.origin == Origin::PerturbedIncoherent {
        if let Some((_, tail)) = case
            .source_id
            .strip_prefix("dis/")
            .and_then(|r| r.split_once('/'))
        {
            if let Some(story) = tail.strip_suffix("/inc") {
                return story;
            }
        }
    }
    &case.source_id
}

fn score(s: &Session, a: &ScoreArgs) -> Outcome<()> {
    let res = s.resources()?;
    let references = a
        .references
        .as_ref()
        .map(|p| read_references(&s.path(p)))
        .transpose()?;
    let (target, hash, requests) = if let Some(p) = &a.suite {
        let suite = read_suite(&s.path(p))?;
        let refs = |c: &TestCase| {
            references
                .as_ref()
                .and_then(|r| r.get(reference_key(c)))
                .cloned()
                .unwrap_or_default()
        };
        let requests: Vec<ScoreRequest> = suite
            .cases
            .iter()
            .map(|c| ScoreRequest {
                request_id: c.case_id.clone(),
                input: c.input.clone(),
                story: c.story_text.clone(),
                references: refs(c),
            })
            .collect();
        (Target::Suite, suite_hash(&suite), requests)
    } else {
        let path = s.path(a.corpus.as_ref().expect("clap requires suite or corpus"));
        let corpus: Corpus = read_corpus(&path, CorpusFormat::Records, &res.segmenter)?;
        let requests = corpus
            .stories
            .iter()
            .map(|st| ScoreRequest {
                request_id: st.id.clone(),
                input: st.input.clone(),
                story: st.render(),
                references: references
                    .as_ref()
                    .and_then(|r| r.get(&st.id))
                    .cloned()
                    .unwrap_or_default(),
            })
            .collect();
        (
            Target::Corpus,
            digest(corpus_to_records(&corpus).as_bytes()),
            requests,
        )
    };
    let (metric_id, outcomes) = match (&a.metric, &a.adapter) {
        (Some(id), _) => {
            let builtin = BuiltinId::parse(id).map_err(|e| Failure::Usage(e.to_string()))?;
            if builtin.needs_references() && references.is_none() {
                return Err(Failure::Data(Error::Data(format!(
                    "metric `{id}` compares against references; pass --references"
                ))));
            }
            let metric = BuiltinMetric::new(id, &res.bundle, res.segmenter.clone())?;
            let exec = s.executor()?;
            let outcomes = score_builtin(&exec, &metric, &requests);
            (id.clone(), outcomes)
        }
        (None, Some(cmd)) => {
            let spec = command_spec(cmd, a.timeout_ms, a.max_in_flight)?;
            let mut scorer = ProcessScorer::spawn(&spec)?;
            let outcomes = scorer.score_batch(&requests)?;
            let id = scorer.metric_id().to_string();
            scorer.shutdown();
            (id, outcomes)
        }
        (None, None) => unreachable!("clap requires --metric or --adapter"),
    };
    let file = ScoreFile::from_outcomes(&metric_id, target, &hash, &outcomes);
    let flagged = file.flagged().len();
    file.write(&s.path(&a.out))?;
    eprintln!(
        "{metric_id}: {} scored, {flagged} flagged",
        file.entries.len() - flagged
    );
    Ok(())
}

fn score_builtin(
    exec: &RayonExecutor,
    metric: &BuiltinMetric,
    requests: &[ScoreRequest],
) -> Vec<ScoreOutcome> {
    use storyprobe_core::adapter::ScoreResponse;
    use storyprobe_core::suite::Executor;
    exec.map(requests.len(), |i| {
        let r = &requests[i];
        match metric.score_one(r) {
            Ok(score) => ScoreOutcome::Scored(ScoreResponse {
                request_id: r.request_id.clone(),
                score,
                diagnostics: None,
            }),
            Err(reason) => ScoreOutcome::Failed {
                request_id: r.request_id.clone(),
                reason,
            },
        }
    })
}

fn read_scores(
    s: &Session,
    paths: &[PathBuf],
    target: Target,
    expected: Option<&str>,
) -> Outcome<Vec<ScoreFile>> {
    let files = paths
        .par_iter()
        .map(|p| ScoreFile::read(&s.path(p)))
        .collect::<Result<Vec<_>, _>>()?;
    let hash = expected
        .map(str::to_string)
        .unwrap_or_else(|| files[0].source_hash.clone());
    for f in &files {
        f.expect_source(target, &hash)?;
        let flagged = f.flagged();
        if !flagged.is_empty() {
            log::warn!(
                "{}: {} flagged entries are left out",
                f.metric_id,
                flagged.len()
            );
        }
    }
    Ok(files)
}

fn judged(
    s: &Session,
    annotations: &Path,
) -> Outcome<(Vec<AnnotationRecord>, Aggregation, Vec<String>)> {
    let records = read_annotations(&s.path(annotations))?;
    let validation = validate_annotations(&records, AnnotationPolicy::from(&s.config))?;
    let agg = aggregate_judgments(&validation);
    let mut notes = Vec::new();
    notes.push(format!(
        "{} of {} submissions rejected",
        validation.rejected.len(),
        validation.rejected.len() + submission_count(&validation.accepted)
    ));
    notes.extend(agg.warnings.iter().cloned());
    if let Some(alpha) = agreement(&validation.accepted) {
        notes.push(alpha);
    }
    Ok((validation.accepted, agg, notes))
}

fn submission_count(records: &[AnnotationRecord]) -> usize {
    records
        .iter()
        .map(|r| (&r.rater_id, &r.hit_id))
        .collect::<std::collections::BTreeSet<_>>()
        .len()
}

fn agreement(accepted: &[AnnotationRecord]) -> Option<String> {
    let mut raters: BTreeMap<&str, usize> = BTreeMap::new();
    let mut items: BTreeMap<&str, BTreeMap<usize, f64>> = BTreeMap::new();
    for r in accepted.iter().filter(|r| r.role == Role::Generated) {
        let next = raters.len();
        let col = *raters.entry(&r.rater_id).or_insert(next);
        items
            .entry(&r.story_id)
            .or_default()
            .insert(col, f64::from(r.overall));
    }
    let matrix: Vec<Vec<Option<f64>>> = items
        .values()
        .map(|row| (0..raters.len()).map(|c| row.get(&c).copied()).collect())
        .collect();
    match krippendorff_alpha(&matrix) {
        Ok(a) => Some(format!(
            "Krippendorff's alpha {:.4} over {} items",
            a.alpha, a.item_count
        )),
        Err(e) => Some(format!("agreement not computed: {e}")),
    }
}

fn corpus_hash(s: &Session, corpus: Option<&Path>) -> Outcome<Option<String>> {
    let Some(p) = corpus else { return Ok(None) };
    let res = s.resources()?;
    let c = read_corpus(&s.path(p), CorpusFormat::Records, &res.segmenter)?;
    Ok(Some(digest(corpus_to_records(&c).as_bytes())))
}

fn eval_corr(
    s: &Session,
    annotations: &Path,
    scores: &[PathBuf],
    corpus: Option<&Path>,
    group_by: Option<&str>,
    out: Option<&Path>,
) -> Outcome<()> {
    let expected = corpus_hash(s, corpus)?;
    let files = read_scores(s, scores, Target::Corpus, expected.as_deref())?;
    let (accepted, agg, notes) = judged(s, annotations)?;
    let groups = group_by.map(|k| story_groups(&accepted, k));
    let kind = if group_by.is_some() {
        "generalization"
    } else {
        "correlation"
    };
    let mut report = Report::new(
        kind,
        &config_hash(&s.config),
        &files[0].source_hash,
        s.config.significance,
    );
    report.notes = notes;
    for f in &files {
        let results = correlate_metric(&f.scores(), &agg.judgments, groups.as_ref())?;
        for (group, c) in results {
            report.rows.push(ReportRow::new(
                &f.metric_id,
                &group,
                &c,
                s.config.significance,
            ));
        }
    }
    s.emit(&report, out)
}

fn eval_types(s: &Session, a: &TypesArgs) -> Outcome<()> {
    let expected = corpus_hash(s, a.corpus.as_deref())?;
    let files = read_scores(s, &a.scores, Target::Corpus, expected.as_deref())?;
    let (accepted, agg, notes) = judged(s, &a.annotations)?;
    let subsets = error_type_subsets(&accepted, &agg.judgments, SubsetPolicy::from(&s.config));
    let mut report = Report::new(
        "error_types",
        &config_hash(&s.config),
        &files[0].source_hash,
        s.config.significance,
    );
    report.notes = notes;
    for f in &files {
        let scores = f.scores();
        for t in ErrorType::ALL {
            let labels = subsets.evaluation_set(t);
            let (mut x, mut y) = (Vec::new(), Vec::new());
            for (id, label) in &labels {
                if let Some(v) = scores.get(id) {
                    x.push(*v);
                    y.push(*label);
                }
            }
            let n1 = y.iter().filter(|l| **l == 1.0).count();
            match pearson(&x, &y) {
                Ok(result) => {
                    let l = LabelCorrelation {
                        n0: y.len() - n1,
                        n1,
                        result,
                    };
                    report.rows.push(ReportRow::labeled(
                        &f.metric_id,
                        t.as_str(),
                        &l,
                        s.config.significance,
                    ));
                }
                Err(e) => report.notes.push(format!("{} / {t}: {e}", f.metric_id)),
            }
        }
    }
    s.emit(&report, a.out.as_deref())
}

fn eval_suite(s: &Session, a: &SuiteEvalArgs, test_type: TestType) -> Outcome<()> {
    let suite: TestSuite = read_suite(&s.path(&a.suite))?;
    if suite.test_type() != test_type {
        return Err(Failure::Data(Error::Data(format!(
            "{} is a {} suite",
            a.suite.display(),
            suite.test_type().as_str()
        ))));
    }
    let hash = suite_hash(&suite);
    let files = read_scores(s, &a.scores, Target::Suite, Some(&hash))?;
    let alpha = suite.manifest.config.significance;
    let mut report = Report::new(
        test_type.as_str(),
        &config_hash(&suite.manifest.config),
        &hash,
        alpha,
    );
    for f in &files {
        let scores = f.scores();
        match test_type {
            TestType::Discrimination => {
                for (aspect, l) in discrimination_eval(&suite, &scores)? {
                    report
                        .rows
                        .push(ReportRow::labeled(&f.metric_id, aspect.as_str(), &l, alpha));
                }
            }
            TestType::Invariance => {
                for ((aspect, source), l) in invariance_eval(&suite, &scores)? {
                    let group = format!("{aspect}/{}", source.as_str());
                    report
                        .rows
                        .push(ReportRow::labeled(&f.metric_id, &group, &l, alpha));
                }
            }
        }
    }
    s.emit(&report, a.out.as_deref())
}

fn eval_windows(s: &mut Session, a: &WindowArgs) -> Outcome<()> {
    if let Some(w) = a.window {
        s.config.window = w;
    }
    if let Some(st) = a.stride {
        s.config.stride = st;
    }
    s.config.validate()?;
    let file = ScoreFile::read(&s.path(&a.scores))?;
    let (judgments, mut notes) = match (&a.annotations, &a.judgments) {
        (Some(p), _) => {
            let (_, agg, notes) = judged(s, p)?;
            (agg.judgments, notes)
        }
        (None, Some(p)) => (read_values(&s.path(p))?, Vec::new()),
        (None, None) => unreachable!("clap requires annotations or judgments"),
    };
    let scores = file.scores();
    let judged: BTreeMap<String, f64> = judgments
        .iter()
        .filter(|(k, _)| scores.contains_key(*k))
        .map(|(k, v)| (k.clone(), *v))
        .collect();
    let scored: BTreeMap<String, f64> = scores
        .iter()
        .filter(|(k, _)| judged.contains_key(*k))
        .map(|(k, v)| (k.clone(), *v))
        .collect();
    let dropped = judgments.len() + scores.len() - 2 * judged.len();
    if dropped > 0 {
        notes.push(format!(
            "{dropped} ids lack either a judgment or a score and are left out"
        ));
    }
    let w = window_difference_analysis(
        &judged,
        &scored,
        s.config.window,
        s.config.stride,
        s.config.significance,
    )?;
    let mut report = Report::new(
        "windows",
        &config_hash(&s.config),
        &file.source_hash,
        s.config.significance,
    );
    report.rows.push(ReportRow::new(
        &file.metric_id,
        "window_pairs",
        &w.correlation,
        s.config.significance,
    ));
    report.windows = Some(window_record(&w));
    notes.insert(
        0,
        format!(
            "{} stories, window {} stride {}: {} sets / {} pairs, r² = {:.4}",
            w.n,
            w.window,
            w.stride,
            w.set_count,
            w.pairs.len(),
            w.r_squared
        ),
    );
    report.notes = notes;
    if let Some(p) = &a.points {
        write_text(&s.path(p), &window_points_tsv(&w))?;
    }
    s.emit(&report, a.out.as_deref())
}

fn report(s: &Session, a: &ReportArgs) -> Outcome<()> {
    let reports = a
        .reports
        .iter()
        .map(|p| Report::read(&s.path(p)))
        .collect::<Result<Vec<_>, _>>()?;
    let merged = Report::merge(&reports)?;
    s.emit(&merged, a.out.as_deref())
}
