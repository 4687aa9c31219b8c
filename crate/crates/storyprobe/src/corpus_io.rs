//! Corpus, annotation, judgment and reference files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use storyprobe_core::corpus::{
    delexicalize_names, truncate_story, Corpus, Pos, Segmenter, Sentence, Story, Token,
};
use storyprobe_core::eval::{AnnotationRecord, ErrorType, Role};

use crate::error::{read_text, tsv_rows, write_text, Error, Result};
use crate::resources::Resources;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CorpusFormat {
    /// `input<TAB>story` per line; ids are ingestion indices.
    Lines,
    /// One JSON object per line with `id`, `input`, `story` and optional
    /// `model`, `dataset`, `tokens`, `metadata`.
    Records,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct StoryRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    input: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    story: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dataset: Option<String>,
    /// Sentences of (surface, pos, lemma) triples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tokens: Option<Vec<Vec<(String, String, String)>>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    metadata: BTreeMap<String, String>,
}

fn annotated_sentences(
    file: &str,
    line: usize,
    sentences: &[Vec<(String, String, String)>],
) -> Result<Vec<Sentence>> {
    sentences
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| {
            let tokens = s
                .iter()
                .map(|(surface, pos, lemma)| {
                    let pos = Pos::parse(pos).ok_or_else(|| {
                        Error::parse(file, line, format!("unknown part of speech `{pos}`"))
                    })?;
                    let mut t = Token::new(surface, (0, 0));
                    t.pos = pos;
                    t.lemma = lemma.clone();
                    Ok(t)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Sentence::from_tokens(tokens))
        })
        .collect()
}

pub fn parse_corpus(
    text: &str,
    format: CorpusFormat,
    segmenter: &Segmenter,
    file: &str,
) -> Result<Corpus> {
    let mut stories = Vec::new();
    for (n, line) in text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
    {
        if line.trim().is_empty() {
            continue;
        }
        let story = match format {
            CorpusFormat::Lines => {
                let (input, body) = line
                    .split_once('\t')
                    .ok_or_else(|| Error::parse(file, n, "expected `input<TAB>story`"))?;
                if body.trim().is_empty() {
                    return Err(Error::parse(file, n, "empty story text"));
                }
                segmenter.story(&stories.len().to_string(), input, body)
            }
            CorpusFormat::Records => {
                let rec: StoryRecord = serde_json::from_str(line)
                    .map_err(|e| Error::parse(file, n, format!("malformed record: {e}")))?;
                let id = rec
                    .id
                    .ok_or_else(|| Error::parse(file, n, "missing field `id`"))?;
                let mut story = match (&rec.tokens, &rec.story) {
                    (Some(tokens), _) => Story {
                        id: id.clone(),
                        input: rec.input.clone().unwrap_or_default(),
                        sentences: annotated_sentences(file, n, tokens)?,
                        ..Story::default()
                    },
                    (None, Some(body)) if !body.trim().is_empty() => {
                        segmenter.story(&id, rec.input.as_deref().unwrap_or_default(), body)
                    }
                    (None, Some(_)) => return Err(Error::parse(file, n, "empty field `story`")),
                    (None, None) => return Err(Error::parse(file, n, "missing field `story`")),
                };
                if story.sentences.is_empty() {
                    return Err(Error::parse(file, n, "story has no sentence"));
                }
                story.source_model = rec.model;
                story.source_dataset = rec.dataset;
                story.metadata = rec.metadata;
                story
            }
        };
        stories.push(story);
    }
    Ok(Corpus::new(stories)?)
}

pub fn read_corpus(path: &Path, format: CorpusFormat, segmenter: &Segmenter) -> Result<Corpus> {
    parse_corpus(
        &read_text(path)?,
        format,
        segmenter,
        &path.display().to_string(),
    )
}

/// Records-format text: the rendered story, input, tags and metadata.
pub fn corpus_to_records(corpus: &Corpus) -> String {
    let mut out = String::new();
    for s in &corpus.stories {
        let rec = StoryRecord {
            id: Some(s.id.clone()),
            input: Some(s.input.clone()),
            story: Some(s.render()),
            model: s.source_model.clone(),
            dataset: s.source_dataset.clone(),
            tokens: None,
            metadata: s.metadata.clone(),
        };
        out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn write_corpus(path: &Path, corpus: &Corpus) -> Result<()> {
    write_text(path, &corpus_to_records(corpus))
}

/// Name delexicalization (unless `delexicalize` is false), then
/// truncation to `max_words`.
pub fn prepare_corpus(
    corpus: &Corpus,
    resources: &Resources,
    max_words: usize,
    delexicalize: bool,
) -> Corpus {
    let stories = corpus
        .stories
        .iter()
        .map(|s| {
            let s = if delexicalize {
                delexicalize_names(s, &resources.names)
            } else {
                s.clone()
            };
            truncate_story(&s, max_words)
        })
        .collect();
    Corpus {
        stories,
        metadata: corpus.metadata.clone(),
    }
}

/// Tab-separated annotations:
/// `story_id rater_id hit_id overall error_flags role [key=value ...]`.
/// `error_flags` is a comma-separated list or `-`. A header row starting
/// with `story_id` is skipped.
pub fn parse_annotations(text: &str, file: &str) -> Result<Vec<AnnotationRecord>> {
    let mut out = Vec::new();
    for (n, row) in tsv_rows(text) {
        if row[0] == "story_id" {
            continue;
        }
        if row.len() < 6 {
            return Err(Error::parse(
                file,
                n,
                format!("expected at least 6 fields, found {}", row.len()),
            ));
        }
        let overall: u8 = row[3]
            .parse()
            .map_err(|_| Error::parse(file, n, format!("rating `{}` is not an integer", row[3])))?;
        let error_flags = row[4]
            .split(',')
            .map(str::trim)
            .filter(|f| !f.is_empty() && *f != "-")
            .map(|f| ErrorType::parse(f).map_err(|e| Error::parse(file, n, e.to_string())))
            .collect::<Result<_>>()?;
        let role = Role::parse(row[5]).map_err(|e| Error::parse(file, n, e.to_string()))?;
        let group_tags = row[6..]
            .iter()
            .filter(|f| !f.is_empty())
            .map(|f| {
                f.split_once('=')
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .ok_or_else(|| {
                        Error::parse(file, n, format!("group tag `{f}` is not key=value"))
                    })
            })
            .collect::<Result<_>>()?;
        let record = AnnotationRecord {
            story_id: row[0].to_string(),
            rater_id: row[1].to_string(),
            hit_id: row[2].to_string(),
            overall,
            error_flags,
            role,
            group_tags,
        };
        record
            .validate()
            .map_err(|e| Error::parse(file, n, e.to_string()))?;
        out.push(record);
    }
    Ok(out)
}

pub fn read_annotations(path: &Path) -> Result<Vec<AnnotationRecord>> {
    parse_annotations(&read_text(path)?, &path.display().to_string())
}

pub fn annotations_to_tsv(records: &[AnnotationRecord]) -> String {
    let mut out = String::from("story_id\trater_id\thit_id\toverall\terror_flags\trole\ttags\n");
    for r in records {
        let flags: Vec<&str> = r.error_flags.iter().map(|f| f.as_str()).collect();
        let tags: Vec<String> = r
            .group_tags
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            r.story_id,
            r.rater_id,
            r.hit_id,
            r.overall,
            if flags.is_empty() {
                "-".to_string()
            } else {
                flags.join(",")
            },
            r.role.as_str(),
            tags.join("\t")
        ));
    }
    out
}

/// `id<TAB>value` rows, e.g. precomputed human judgments.
pub fn parse_values(text: &str, file: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for (n, row) in tsv_rows(text) {
        if row.len() != 2 {
            return Err(Error::parse(file, n, "expected `id<TAB>value`"));
        }
        let v: f64 = row[1]
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| Error::parse(file, n, format!("`{}` is not a finite number", row[1])))?;
        if out.insert(row[0].to_string(), v).is_some() {
            return Err(Error::parse(file, n, format!("duplicate id `{}`", row[0])));
        }
    }
    Ok(out)
}

pub fn read_values(path: &Path) -> Result<BTreeMap<String, f64>> {
    parse_values(&read_text(path)?, &path.display().to_string())
}

#[derive(Debug, Deserialize)]
struct ReferenceRecord {
    id: String,
    #[serde(default)]
    references: Vec<String>,
    #[serde(default)]
    story: Option<String>,
}

/// JSON lines with `id` and `references` (a list) or `story` (a single
/// reference). A corpus in records format is therefore a valid reference
/// file.
pub fn parse_references(text: &str, file: &str) -> Result<BTreeMap<String, Vec<String>>> {
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (n, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l)) {
        if line.trim().is_empty() {
            continue;
        }
        let rec: ReferenceRecord = serde_json::from_str(line)
            .map_err(|e| Error::parse(file, n, format!("malformed record: {e}")))?;
        let entry = out.entry(rec.id).or_default();
        entry.extend(rec.references);
        entry.extend(rec.story);
    }
    Ok(out)
}

pub fn read_references(path: &Path) -> Result<BTreeMap<String, Vec<String>>> {
    parse_references(&read_text(path)?, &path.display().to_string())
}
