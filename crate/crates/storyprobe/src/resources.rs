//! Loading of the linguistic resource directory.
//!
//! Every file is optional; a missing file leaves its bundle member absent
//! and operations needing it fail with a missing-resource error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use storyprobe_core::corpus::{Gender, Pos, Segmenter, WordForm};
use storyprobe_core::lexicon::{
    ConceptGraph, ContractionMap, EmbeddingTable, LexiconBundle, ListKind, PronounTable,
    RelationKind, SynsetLexicon, Triple, WordList,
};
use storyprobe_core::perturb::{Paraphrase, ParaphraseBank};

use crate::error::{read_text, tsv_rows, Error, Result};

pub const SYNSETS: &str = "synsets.tsv";
pub const INFLECTIONS: &str = "inflections.tsv";
pub const DOUBLING: &str = "doubling.txt";
pub const NEGATION: &str = "negation.txt";
pub const CAUSALITY: &str = "causality.txt";
pub const TEMPORAL: &str = "temporal.txt";
pub const PRONOUNS: &str = "pronouns.tsv";
pub const TRIPLES: &str = "triples.tsv";
pub const EMBEDDINGS: &str = "embeddings.txt";
pub const IDF: &str = "idf.tsv";
pub const CONTRACTIONS: &str = "contractions.tsv";
pub const AUXILIARIES: &str = "auxiliaries.txt";
pub const ABBREVIATIONS: &str = "abbreviations.txt";
pub const NAMES: &str = "names.tsv";

/// Environment variable naming the resource directory.
pub const RESOURCE_ENV: &str = "STORYPROBE_RESOURCES";

/// The starter resources shipped with the crate.
pub fn shipped_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

/// `explicit`, else the environment variable, else the shipped resources.
pub fn resource_root(explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(RESOURCE_ENV).map(PathBuf::from))
        .unwrap_or_else(shipped_dir)
}

#[derive(Debug, Clone)]
pub struct Resources {
    pub root: PathBuf,
    pub bundle: LexiconBundle,
    pub segmenter: Segmenter,
    pub names: BTreeMap<String, Gender>,
}

fn optional(dir: &Path, name: &str) -> Result<Option<String>> {
    let path = dir.join(name);
    if path.exists() {
        read_text(&path).map(Some)
    } else {
        Ok(None)
    }
}

pub fn load_resources(dir: &Path) -> Result<Resources> {
    if !dir.is_dir() {
        return Err(Error::Data(format!(
            "resource directory {} does not exist",
            dir.display()
        )));
    }
    let mut bundle = LexiconBundle::with_defaults();
    let relations = optional(dir, SYNSETS)?
        .map(|t| parse_relations(&t, SYNSETS))
        .transpose()?;
    let inflections = optional(dir, INFLECTIONS)?
        .map(|t| parse_inflections(&t, INFLECTIONS))
        .transpose()?;
    if relations.is_some() || inflections.is_some() {
        let doubling = optional(dir, DOUBLING)?
            .map(|t| parse_word_lines(&t))
            .unwrap_or_default();
        bundle.synsets = Some(SynsetLexicon::new(
            relations.unwrap_or_default(),
            inflections.unwrap_or_default(),
            doubling,
        ));
    }
    bundle.negation = optional(dir, NEGATION)?
        .map(|t| parse_word_list(&t, NEGATION))
        .transpose()?;
    bundle.causality = optional(dir, CAUSALITY)?
        .map(|t| parse_word_list(&t, CAUSALITY))
        .transpose()?;
    bundle.temporal = optional(dir, TEMPORAL)?
        .map(|t| parse_word_list(&t, TEMPORAL))
        .transpose()?;
    if let Some(t) = optional(dir, PRONOUNS)? {
        bundle.pronoun_table = Some(parse_pronouns(&t, PRONOUNS)?);
    }
    bundle.graph = optional(dir, TRIPLES)?
        .map(|t| parse_triples(&t, TRIPLES).map(ConceptGraph::new))
        .transpose()?;
    if let Some(t) = optional(dir, EMBEDDINGS)? {
        let mut table = parse_embeddings(&t, EMBEDDINGS)?;
        if let Some(idf) = optional(dir, IDF)? {
            apply_idf(&mut table, &idf, IDF)?;
        }
        bundle.embeddings = Some(table);
    }
    bundle.contractions = optional(dir, CONTRACTIONS)?
        .map(|t| parse_contractions(&t, CONTRACTIONS))
        .transpose()?;
    if let Some(t) = optional(dir, AUXILIARIES)? {
        bundle.auxiliaries = parse_word_lines(&t)
            .into_iter()
            .map(|w| w.to_lowercase())
            .collect();
    }
    let segmenter = match optional(dir, ABBREVIATIONS)? {
        Some(t) => {
            let words = parse_word_lines(&t);
            Segmenter::new(words.iter().map(String::as_str))
        }
        None => Segmenter::default(),
    };
    let names = optional(dir, NAMES)?
        .map(|t| parse_names(&t, NAMES))
        .transpose()?
        .unwrap_or_default();
    Ok(Resources {
        root: dir.to_path_buf(),
        bundle,
        segmenter,
        names,
    })
}

fn columns(file: &str, line: usize, row: &[&str], n: usize) -> Result<()> {
    if row.len() != n {
        return Err(Error::parse(
            file,
            line,
            format!("expected {n} tab-separated fields, found {}", row.len()),
        ));
    }
    Ok(())
}

fn pos(file: &str, line: usize, s: &str) -> Result<Pos> {
    Pos::parse(s).ok_or_else(|| Error::parse(file, line, format!("unknown part of speech `{s}`")))
}

fn real(file: &str, line: usize, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(file, line, format!("`{s}` is not a finite number")))
}

/// `lemma  pos  syn|ant  target`
pub fn parse_relations(text: &str, file: &str) -> Result<Vec<(String, Pos, RelationKind, String)>> {
    tsv_rows(text)
        .map(|(n, row)| {
            columns(file, n, &row, 4)?;
            let kind = RelationKind::parse(row[2]).ok_or_else(|| {
                Error::parse(
                    file,
                    n,
                    format!("relation kind must be syn or ant, got `{}`", row[2]),
                )
            })?;
            Ok((
                row[0].to_string(),
                pos(file, n, row[1])?,
                kind,
                row[3].to_string(),
            ))
        })
        .collect()
}

/// `lemma  pos  form  surface`
pub fn parse_inflections(text: &str, file: &str) -> Result<Vec<(String, Pos, WordForm, String)>> {
    tsv_rows(text)
        .map(|(n, row)| {
            columns(file, n, &row, 4)?;
            let form = WordForm::parse(row[2])
                .ok_or_else(|| Error::parse(file, n, format!("unknown form `{}`", row[2])))?;
            Ok((
                row[0].to_string(),
                pos(file, n, row[1])?,
                form,
                row[3].to_string(),
            ))
        })
        .collect()
}

/// One entry per line; blank lines and `#` comments skipped.
pub fn parse_word_lines(text: &str) -> Vec<String> {
    tsv_rows(text).map(|(_, row)| row.join(" ")).collect()
}

/// A `kind <name>` header, then `function <word>`, `content <word>` and
/// `pair <a> <b>` rows.
pub fn parse_word_list(text: &str, file: &str) -> Result<WordList> {
    let mut rows = tsv_rows(text);
    let (n, header) = rows
        .next()
        .ok_or_else(|| Error::parse(file, 1, "empty word list"))?;
    let kind = match header.as_slice() {
        ["kind", name] => ListKind::parse(name)
            .ok_or_else(|| Error::parse(file, n, format!("unknown list kind `{name}`")))?,
        _ => {
            return Err(Error::parse(
                file,
                n,
                "first line must be `kind<TAB>negation|causality|temporal`",
            ))
        }
    };
    let (mut function, mut content, mut pairs) = (Vec::new(), Vec::new(), Vec::new());
    for (n, row) in rows {
        match row.as_slice() {
            ["function", w] => function.push(w.to_string()),
            ["content", w] => content.push(w.to_string()),
            ["pair", a, b] => pairs.push((a.to_string(), b.to_string())),
            _ => {
                return Err(Error::parse(
                    file,
                    n,
                    "expected `function|content<TAB>word` or `pair<TAB>a<TAB>b`",
                ))
            }
        }
    }
    Ok(WordList::new(kind, function, content, pairs)?)
}

/// Five columns per person type: subjective, objective, possessive
/// adjective, possessive noun, reflexive.
pub fn parse_pronouns(text: &str, file: &str) -> Result<PronounTable> {
    let rows = tsv_rows(text)
        .map(|(n, row)| {
            columns(file, n, &row, 5)?;
            Ok(std::array::from_fn(|i| row[i].to_string()))
        })
        .collect::<Result<Vec<[String; 5]>>>()?;
    Ok(PronounTable::new(rows)?)
}

/// `head  relation  tail`
pub fn parse_triples(text: &str, file: &str) -> Result<Vec<Triple>> {
    tsv_rows(text)
        .map(|(n, row)| {
            columns(file, n, &row, 3)?;
            Ok(Triple {
                head: row[0].to_string(),
                relation: row[1].to_string(),
                tail: row[2].to_string(),
            })
        })
        .collect()
}

/// First line `count d`, then `word v1 … vd` separated by whitespace.
pub fn parse_embeddings(text: &str, file: &str) -> Result<EmbeddingTable> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(file, 1, "missing `count d` header"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .filter_map(|x| x.parse().ok())
        .collect();
    let [count, dim] = dims[..] else {
        return Err(Error::parse(file, 1, "header must be `count d`"));
    };
    let mut table = EmbeddingTable::new(dim);
    for (i, line) in lines {
        let mut parts = line.split_whitespace();
        let word = parts.next().unwrap_or_default();
        let vector = parts
            .map(|x| real(file, i + 1, x))
            .collect::<Result<Vec<f64>>>()?;
        if vector.len() != dim {
            return Err(Error::parse(
                file,
                i + 1,
                format!("expected {dim} values, found {}", vector.len()),
            ));
        }
        table
            .insert(word, vector)
            .map_err(|e| Error::parse(file, i + 1, e.to_string()))?;
    }
    if table.len() != count {
        log::warn!(
            "{file}: header declares {count} vectors, found {}",
            table.len()
        );
    }
    Ok(table)
}

/// `word  idf`; a `*` word sets the default for unknown words.
pub fn apply_idf(table: &mut EmbeddingTable, text: &str, file: &str) -> Result<()> {
    for (n, row) in tsv_rows(text) {
        columns(file, n, &row, 2)?;
        let value = real(file, n, row[1])?;
        let result = if row[0] == "*" {
            table.set_default_idf(value)
        } else {
            table.set_idf(row[0], value)
        };
        result.map_err(|e| Error::parse(file, n, e.to_string()))?;
    }
    Ok(())
}

/// `full form  short form`, e.g. `i will  i'll`.
pub fn parse_contractions(text: &str, file: &str) -> Result<ContractionMap> {
    let pairs = tsv_rows(text)
        .map(|(n, row)| {
            columns(file, n, &row, 2)?;
            Ok((row[0].to_string(), row[1].to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ContractionMap::new(
        pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())),
    ))
}

/// `name  gender`
pub fn parse_names(text: &str, file: &str) -> Result<BTreeMap<String, Gender>> {
    tsv_rows(text)
        .map(|(n, row)| {
            columns(file, n, &row, 2)?;
            let g = Gender::parse(row[1])
                .ok_or_else(|| Error::parse(file, n, format!("unknown gender `{}`", row[1])))?;
            Ok((row[0].to_string(), g))
        })
        .collect()
}

/// `source sentence  paraphrase  similarity  bleu1`
pub fn parse_paraphrases(text: &str, file: &str) -> Result<ParaphraseBank> {
    let mut bank = ParaphraseBank::new();
    for (n, row) in tsv_rows(text) {
        columns(file, n, &row, 4)?;
        bank.insert(
            row[0],
            Paraphrase {
                text: row[1].to_string(),
                similarity: real(file, n, row[2])?,
                bleu1: real(file, n, row[3])?,
            },
        );
    }
    Ok(bank)
}

pub fn load_paraphrases(path: &Path) -> Result<ParaphraseBank> {
    parse_paraphrases(&read_text(path)?, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn antonym_symmetry_after_loading() {
        let rel = parse_relations("happy\tADJ\tant\tupset\n", "x").unwrap();
        let lex = SynsetLexicon::new(rel, vec![], vec![]);
        assert!(lex.antonyms("upset", Pos::Adj).any(|a| a == "happy"));
    }

    #[test]
    fn malformed_lines_name_file_and_line() {
        let err =
            parse_relations("a\tNOUN\tsyn\tb\n\nb\tNOUN\tfoo\tc\n", "synsets.tsv").unwrap_err();
        assert_eq!(
            err.to_string(),
            "synsets.tsv: line 3: relation kind must be syn or ant, got `foo`"
        );
        assert!(parse_embeddings("2 3\nx 1 2 3\ny 1 2\n", "e").is_err());
        assert!(parse_word_list("function\tnot\n", "w").is_err());
    }

    #[test]
    fn word_list_format() {
        let list = parse_word_list("kind\ttemporal\nfunction\tafter\nfunction\tbefore\ncontent\tday\npair\tafter\tbefore\n", "t")
            .unwrap();
        assert!(list.contains("after") && list.contains("day"));
        assert_eq!(list.partners("before").collect::<Vec<_>>(), ["after"]);
    }

    #[test]
    fn idf_default_and_embeddings() {
        let mut table = parse_embeddings("2 2\ndog 1 0\ncat 0.5 0.5\n", "e").unwrap();
        apply_idf(&mut table, "dog\t2.5\n*\t1.5\n", "i").unwrap();
        assert_eq!(table.idf("dog"), 2.5);
        assert_eq!(table.idf("zebra"), 1.5);
        assert!(apply_idf(&mut table, "dog\t-1\n", "i").is_err());
    }

    #[test]
    fn shipped_resources_load() {
        let r = load_resources(&shipped_dir()).unwrap();
        for member in [
            r.bundle.synsets.is_some(),
            r.bundle.negation.is_some(),
            r.bundle.causality.is_some(),
            r.bundle.temporal.is_some(),
            r.bundle.pronoun_table.is_some(),
            r.bundle.graph.is_some(),
            r.bundle.embeddings.is_some(),
            r.bundle.contractions.is_some(),
        ] {
            assert!(member);
        }
        assert!(!r.names.is_empty());
        assert!(r.segmenter.is_abbreviation("Mr."));
    }
}
