//! One PASS/FAIL line per acceptance criterion. Run with `--nocapture` to
//! see the lines; the test fails if any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};
use storyprobe::process::ProcessScorer;
use storyprobe::resources::Resources;
use storyprobe_core::adapter::{repetition_oracle, ExternalSpec};
use storyprobe_core::corpus::{Corpus, Pos};
use storyprobe_core::eval::{
    discrimination_eval, error_type_subsets, invariance_eval, krippendorff_alpha, pearson,
    validate_annotations, window_difference_analysis, AnnotationPolicy, AnnotationRecord,
    ErrorType, Role, SubsetPolicy,
};
use storyprobe_core::metrics::bleu1_precision;
use storyprobe_core::perturb::{passes_filter, Aspect, EditOp, Location};
use storyprobe_core::suite::{
    build_discrimination_suite_in, build_invariance_suite_in, grammatical_filter, prepare_story,
    verify_replay, BuildInputs, Sequential, TestSuite,
};
use storyprobe_core::RunConfig;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

struct World {
    res: Resources,
    corpus: Corpus,
    dis: TestSuite,
    inv: TestSuite,
}

fn world() -> World {
    let res = common::resources();
    let corpus = common::synthetic_corpus(500, 2024, &res);
    let bank = common::paraphrase_bank(&corpus);
    let config = RunConfig::default();
    let inputs = BuildInputs {
        bundle: &res.bundle,
        bank: Some(&bank),
        config: &config,
        segmenter: &res.segmenter,
    };
    let dis =
        build_discrimination_suite_in(&Sequential, &corpus, &Aspect::DISCRIMINATION, &inputs, 7)
            .unwrap();
    let inv = build_invariance_suite_in(
        &Sequential,
        Some(&corpus),
        Some(&dis),
        &Aspect::INVARIANCE,
        &inputs,
        7,
    )
    .unwrap();
    World {
        res,
        corpus,
        dis,
        inv,
    }
}

fn window_arithmetic() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let judgments: BTreeMap<String, f64> = (0..1000)
        .map(|i| (format!("g{i}"), rng.gen_range(1.0..5.0)))
        .collect();
    let scores: BTreeMap<String, f64> = judgments
        .iter()
        .map(|(k, v)| (k.clone(), v * 0.3 + rng.gen_range(0.0..1.0)))
        .collect();
    let t = Instant::now();
    let w = window_difference_analysis(&judgments, &scores, 200, 10, 0.01)
        .map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    ensure(w.set_count == 80, format!("{} sets", w.set_count))?;
    ensure(w.pairs.len() == 6400, format!("{} pairs", w.pairs.len()))?;
    ensure(elapsed.as_secs_f64() < 1.0, format!("took {elapsed:?}"))?;
    Ok(format!("80 sets / 6400 pairs in {elapsed:?}"))
}

fn paraphrase_filter() -> Check {
    let cand: Vec<&str> = "he employed a lawyer .".split(' ').collect();
    let reference: Vec<&str> = "he hired an attorney .".split(' ').collect();
    let b = bleu1_precision(&cand, &reference);
    ensure(b == 0.40, format!("bleu1 = {b}"))?;
    let c = RunConfig::default();
    ensure(
        passes_filter(
            0.57,
            0.40,
            c.paraphrase_min_similarity,
            c.paraphrase_max_bleu1,
        ),
        "(0.57, 0.40) rejected",
    )?;
    ensure(
        !passes_filter(
            0.57,
            0.89,
            c.paraphrase_min_similarity,
            c.paraphrase_max_bleu1,
        ),
        "bleu1 0.89 accepted",
    )?;
    Ok("bleu1 = 0.40; accepts (0.57, 0.40); rejects bleu1 0.89".into())
}

fn oracle_r(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx) * (n * syy - sy * sy)).sqrt()
}

fn statistics_oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_r, mut worst_p) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let n = rng.gen_range(3..=50);
        let slope = rng.gen_range(-2.0..2.0);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|v| slope * v + rng.gen_range(-10.0..10.0))
            .collect();
        let ours = pearson(&x, &y).map_err(|e| e.to_string())?;
        let r = oracle_r(&x, &y);
        let df = (n - 2) as f64;
        let t = r * (df / (1.0 - r * r)).sqrt();
        let p = 2.0 * StudentsT::new(0.0, 1.0, df).unwrap().cdf(-t.abs());
        worst_r = worst_r.max((ours.r - r).abs());
        worst_p = worst_p.max((ours.p_value - p).abs());
    }
    ensure(worst_r < 1e-10, format!("max |Δr| = {worst_r:e}"))?;
    ensure(worst_p < 1e-8, format!("max |Δp| = {worst_p:e}"))?;

    let perfect: Vec<Vec<Option<f64>>> = (0..100)
        .map(|i| vec![Some((i % 5 + 1) as f64); 5])
        .collect();
    let a1 = krippendorff_alpha(&perfect)
        .map_err(|e| e.to_string())?
        .alpha;
    ensure(
        (a1 - 1.0).abs() < 1e-12,
        format!("perfect agreement α = {a1}"),
    )?;
    let random: Vec<Vec<Option<f64>>> = (0..1000)
        .map(|_| (0..5).map(|_| Some(rng.gen_range(1..=5) as f64)).collect())
        .collect();
    let a0 = krippendorff_alpha(&random)
        .map_err(|e| e.to_string())?
        .alpha;
    ensure(a0.abs() < 0.05, format!("uniform α = {a0}"))?;
    Ok(format!(
        "max |Δr| {worst_r:.1e}, max |Δp| {worst_p:.1e}; α perfect {a1}, α uniform {a0:.4}"
    ))
}

fn edited_sentences(edits: &[EditOp]) -> BTreeSet<usize> {
    edits
        .iter()
        .map(|e| match e.location {
            Location::Tokens { sentence, .. } => sentence,
            Location::Sentences { start, .. } => start,
        })
        .collect()
}

fn rate_invariants(w: &World) -> Check {
    let c = RunConfig::default();
    let round = |rate: f64, base: usize| ((rate * base as f64).round() as usize).max(1);
    let floor = |rate: f64, base: usize| ((rate * base as f64).floor() as usize).max(1);
    let graph = w.res.bundle.graph.as_ref().unwrap();
    let mut checked: BTreeMap<&str, usize> = BTreeMap::new();
    let mut violations = Vec::new();
    let sources: BTreeMap<&str, _> = w
        .corpus
        .stories
        .iter()
        .map(|s| (s.id.as_str(), s))
        .collect();
    for case in w
        .dis
        .cases
        .iter()
        .chain(&w.inv.cases)
        .filter(|c| c.label == 0)
    {
        let record = case.record.as_ref().unwrap();
        let Some(raw) = sources.get(record.source_id.as_str()) else {
            continue;
        };
        let src = prepare_story(raw, &w.res.segmenter, &w.res.bundle).unwrap();
        let tokens = || src.sentences.iter().flat_map(|s| s.tokens.iter());
        let (name, expected, actual) = match (case.aspect, record.technique) {
            (Aspect::CommonSense, _) => {
                let e = tokens()
                    .filter(|t| {
                        matches!(t.pos, Pos::Noun | Pos::Verb)
                            && graph.has_neighbors(&t.lemma, None)
                    })
                    .count();
                (
                    "commonsense",
                    round(c.commonsense_rate, e),
                    record.edits.len(),
                )
            }
            (Aspect::Consistency, 2) => (
                "consistency/2",
                round(c.negation_rate, src.sentences.len()),
                edited_sentences(&record.edits).len(),
            ),
            (Aspect::Relatedness, 1) => {
                let content = tokens()
                    .filter(|t| matches!(t.pos, Pos::Noun | Pos::Verb))
                    .count();
                (
                    "relatedness/1",
                    round(c.relatedness_rate, content),
                    record.edits.len(),
                )
            }
            (Aspect::Typo, _) => {
                let words = tokens().filter(|t| !t.is_punct()).count();
                ("typo", floor(c.typo_rate, words), record.edits.len())
            }
            _ => continue,
        };
        *checked.entry(name).or_default() += 1;
        if expected != actual {
            violations.push(format!(
                "{}: expected {expected}, found {actual}",
                case.case_id
            ));
        }
    }
    for name in ["commonsense", "consistency/2", "relatedness/1", "typo"] {
        ensure(
            checked.get(name).copied().unwrap_or(0) > 0,
            format!("no {name} case to check"),
        )?;
    }
    ensure(
        violations.is_empty(),
        format!(
            "{} violations, first: {}",
            violations.len(),
            violations.join("; ")
        ),
    )?;
    Ok(format!("0 violations over {checked:?}"))
}

fn provenance(w: &World) -> Check {
    let dis_bad = verify_replay(&w.dis, &w.res.segmenter);
    let inv_bad = verify_replay(&w.inv, &w.res.segmenter);
    let n = w
        .dis
        .cases
        .iter()
        .chain(&w.inv.cases)
        .filter(|c| c.label == 0)
        .count();
    ensure(
        dis_bad.is_empty() && inv_bad.is_empty(),
        format!("replay mismatches: {:?}", [dis_bad, inv_bad].concat()),
    )?;
    Ok(format!("{n} of {n} perturbed cases replay byte-exactly"))
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let texts = common::synthetic_texts(200, 99);
    let raw = common::write(dir.path(), "raw.jsonl", &common::records_text(&texts));
    let base = dir.path().to_str().unwrap();
    let run = |args: &[&str]| {
        let mut full = vec!["storyprobe", "--data-dir", base];
        full.extend_from_slice(args);
        storyprobe::cli::run(full)
    };
    ensure(
        run(&[
            "ingest",
            "--input",
            raw.to_str().unwrap(),
            "--out",
            "corpus.jsonl",
        ]) == 0,
        "ingest failed",
    )?;
    let mut files = Vec::new();
    for (tag, jobs) in [("a", "1"), ("b", "1"), ("c", "8")] {
        let dis = format!("dis_{tag}.jsonl");
        let inv = format!("inv_{tag}.jsonl");
        let code = run(&[
            "--seed",
            "7",
            "--jobs",
            jobs,
            "build-suite",
            "--corpus",
            "corpus.jsonl",
            "--type",
            "discrimination",
            "--out",
            &dis,
        ]);
        ensure(code == 0, format!("build-suite exit {code}"))?;
        let code = run(&[
            "--seed",
            "7",
            "--jobs",
            jobs,
            "build-suite",
            "--corpus",
            "corpus.jsonl",
            "--type",
            "invariance",
            "--from-suite",
            &dis,
            "--out",
            &inv,
        ]);
        ensure(code == 0, format!("build-suite exit {code}"))?;
        files.push((
            std::fs::read(dir.path().join(dis)).unwrap(),
            std::fs::read(dir.path().join(inv)).unwrap(),
        ));
    }
    ensure(files[0] == files[1], "same seed, different bytes")?;
    ensure(files[0] == files[2], "--jobs 1 and --jobs 8 differ")?;
    Ok(format!(
        "identical suites ({} + {} bytes) across runs and --jobs 1/8",
        files[0].0.len(),
        files[0].1.len()
    ))
}

fn case_scores(
    suite: &TestSuite,
    f: impl Fn(&storyprobe_core::suite::TestCase) -> f64,
) -> BTreeMap<String, f64> {
    suite
        .cases
        .iter()
        .map(|c| (c.case_id.clone(), f(c)))
        .collect()
}

fn oracle_separability(w: &World) -> Check {
    let rep = case_scores(&w.dis, |c| {
        repetition_oracle(&c.story_text.split(' ').collect::<Vec<_>>())
    });
    let by_aspect = discrimination_eval(&w.dis, &rep).map_err(|e| e.to_string())?;
    let lex = by_aspect[&Aspect::LexicalRepetition].result.r;
    ensure(lex > 0.9, format!("repetition oracle r = {lex}"))?;

    let constant = case_scores(&w.dis, |_| 0.5);
    for (a, l) in discrimination_eval(&w.dis, &constant).map_err(|e| e.to_string())? {
        ensure(
            l.result.r == 0.0 && l.result.degenerate,
            format!("constant metric on {a}: {:?}", l.result),
        )?;
    }
    let label = case_scores(&w.dis, |c| c.label as f64);
    for (a, l) in discrimination_eval(&w.dis, &label).map_err(|e| e.to_string())? {
        ensure(
            (l.result.r - 1.0).abs() < 1e-12,
            format!("label oracle on {a}: r = {}", l.result.r),
        )?;
    }
    let label = case_scores(&w.inv, |c| c.label as f64);
    let inv = invariance_eval(&w.inv, &label).map_err(|e| e.to_string())?;
    for ((a, s), l) in &inv {
        ensure(
            (l.result.r.abs() - 1.0).abs() < 1e-12,
            format!("label oracle on {a}/{}: r = {}", s.as_str(), l.result.r),
        )?;
    }
    Ok(format!("repetition oracle r = {lex:.4}; constant degenerate on 8 aspects; label oracle |r| = 1 on {} + {} groups", 8, inv.len()))
}

fn record(
    story: &str,
    rater: &str,
    hit: &str,
    overall: u8,
    role: Role,
    flags: &[ErrorType],
) -> AnnotationRecord {
    AnnotationRecord {
        story_id: story.into(),
        rater_id: rater.into(),
        hit_id: hit.into(),
        overall,
        error_flags: flags.iter().copied().collect(),
        role,
        group_tags: BTreeMap::new(),
    }
}

fn annotation_pipeline() -> Check {
    let hit = |h: &str, human: u8, negative: u8| {
        let mut v: Vec<AnnotationRecord> = (0..5)
            .map(|i| record(&format!("{h}g{i}"), "r", h, 3, Role::Generated, &[]))
            .collect();
        v.push(record(&format!("{h}h"), "r", h, human, Role::Human, &[]));
        v.push(record(
            &format!("{h}n"),
            "r",
            h,
            negative,
            Role::Negative,
            &[],
        ));
        v
    };
    let records: Vec<AnnotationRecord> =
        [hit("ok", 5, 1), hit("low", 2, 1), hit("high", 5, 4)].concat();
    let v =
        validate_annotations(&records, AnnotationPolicy::default()).map_err(|e| e.to_string())?;
    let rejected: BTreeSet<&str> = v.rejected.iter().map(|r| r.hit_id.as_str()).collect();
    ensure(
        rejected == BTreeSet::from(["low", "high"]),
        format!("rejected {rejected:?}"),
    )?;
    ensure(
        v.accepted.iter().all(|r| r.hit_id == "ok"),
        "a bad HIT was accepted",
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..10_000 {
        let stories = rng.gen_range(1..12);
        let mut records = Vec::new();
        let mut judgments = BTreeMap::new();
        for s in 0..stories {
            let id = format!("t{trial}s{s}");
            let mut sum = 0.0;
            for r in 0..5 {
                let overall = rng.gen_range(1..=5u8);
                sum += overall as f64;
                let flags: Vec<ErrorType> = ErrorType::ALL
                    .into_iter()
                    .filter(|_| rng.gen_bool(0.4))
                    .collect();
                records.push(record(
                    &id,
                    &format!("r{r}"),
                    &id,
                    overall,
                    Role::Generated,
                    &flags,
                ));
            }
            judgments.insert(id, sum / 5.0);
        }
        let subsets = error_type_subsets(&records, &judgments, SubsetPolicy::default());
        for (i, a) in ErrorType::ALL.iter().enumerate() {
            ensure(
                subsets.unreasonable[a].is_disjoint(&subsets.reasonable),
                format!("trial {trial}: {a} meets reasonable"),
            )?;
            for b in &ErrorType::ALL[i + 1..] {
                ensure(
                    subsets.unreasonable[a].is_disjoint(&subsets.unreasonable[b]),
                    format!("trial {trial}: {a} ∩ {b}"),
                )?;
            }
        }
    }
    Ok("human < 4 and negative > 2 rejected; subsets disjoint in 10000 fuzz trials".into())
}

fn grammar_filter(w: &World) -> Check {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut table = String::new();
    let mut score = BTreeMap::new();
    for case in w
        .dis
        .cases
        .iter()
        .chain(&w.inv.cases)
        .filter(|c| c.label == 0)
    {
        let v: f64 = rng.gen_range(0.0..1.0);
        table.push_str(&format!("{}\t{v}\n", case.case_id));
        score.insert(case.case_id.clone(), v);
    }
    let path = common::write(dir.path(), "grammar.tsv", &table);
    let spec = ExternalSpec::new(vec![
        env!("CARGO_BIN_EXE_echo-adapter").into(),
        "--metric-id".into(),
        "grammar".into(),
        "--table".into(),
        path.to_str().unwrap().into(),
    ]);
    let mut summary = Vec::new();
    for suite in [&w.dis, &w.inv] {
        let mut scorer = ProcessScorer::spawn(&spec).map_err(|e| e.to_string())?;
        let filtered = grammatical_filter(suite, &mut scorer, 0.5).map_err(|e| e.to_string())?;
        scorer.shutdown();
        let drop: BTreeSet<&str> = suite
            .cases
            .iter()
            .filter(|c| c.label == 0 && c.aspect != Aspect::Typo && score[&c.case_id] < 0.5)
            .flat_map(|c| {
                let partner = match suite.test_type() {
                    storyprobe_core::perturb::TestType::Invariance => c.paired_id.as_deref(),
                    _ => None,
                };
                std::iter::once(c.case_id.as_str()).chain(partner)
            })
            .collect();
        let expected: BTreeSet<&str> = suite
            .cases
            .iter()
            .map(|c| c.case_id.as_str())
            .filter(|id| !drop.contains(id))
            .collect();
        let actual: BTreeSet<&str> = filtered.cases.iter().map(|c| c.case_id.as_str()).collect();
        ensure(
            actual == expected,
            format!("{} cases kept, expected {}", actual.len(), expected.len()),
        )?;
        let typos = suite
            .cases
            .iter()
            .filter(|c| c.aspect == Aspect::Typo)
            .count();
        ensure(
            filtered
                .cases
                .iter()
                .filter(|c| c.aspect == Aspect::Typo)
                .count()
                == typos,
            "typo cases removed",
        )?;
        summary.push(format!("{} → {}", suite.cases.len(), filtered.cases.len()));
    }
    Ok(format!(
        "kept sets match the fixture ({})",
        summary.join(", ")
    ))
}

#[test]
fn acceptance() {
    let w = world();
    let results: Vec<(&str, Check)> = vec![
        ("window arithmetic", window_arithmetic()),
        ("paraphrase filter", paraphrase_filter()),
        ("statistics oracles", statistics_oracles()),
        ("perturbation rates", rate_invariants(&w)),
        ("provenance round-trip", provenance(&w)),
        ("determinism", determinism()),
        ("oracle separability", oracle_separability(&w)),
        ("annotation pipeline", annotation_pipeline()),
        ("grammaticality filter", grammar_filter(&w)),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
