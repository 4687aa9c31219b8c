//! Story data model and the deterministic text pipeline: segmentation,
//! tokenization, lexicon-backed tagging, truncation and name masking.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lexicon::LexiconBundle;

/// Coarse part of speech.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "UPPERCASE"))]
pub enum Pos {
    Noun,
    Verb,
    Adj,
    Adv,
    Pron,
    Punct,
    #[default]
    Other,
}

impl Pos {
    pub const ALL: [Pos; 7] = [
        Pos::Noun,
        Pos::Verb,
        Pos::Adj,
        Pos::Adv,
        Pos::Pron,
        Pos::Punct,
        Pos::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Noun => "NOUN",
            Pos::Verb => "VERB",
            Pos::Adj => "ADJ",
            Pos::Adv => "ADV",
            Pos::Pron => "PRON",
            Pos::Punct => "PUNCT",
            Pos::Other => "OTHER",
        }
    }

    pub fn parse(s: &str) -> Option<Pos> {
        Pos::ALL
            .into_iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(s))
    }

    pub fn is_content(self) -> bool {
        matches!(self, Pos::Noun | Pos::Verb)
    }
}

/// Inflectional form of a word relative to its lemma.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum WordForm {
    #[default]
    Base,
    Past,
    PastParticiple,
    Gerund,
    ThirdPerson,
    Plural,
}

impl WordForm {
    pub const ALL: [WordForm; 6] = [
        WordForm::Base,
        WordForm::Past,
        WordForm::PastParticiple,
        WordForm::Gerund,
        WordForm::ThirdPerson,
        WordForm::Plural,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            WordForm::Base => "base",
            WordForm::Past => "past",
            WordForm::PastParticiple => "past_participle",
            WordForm::Gerund => "gerund",
            WordForm::ThirdPerson => "third_person",
            WordForm::Plural => "plural",
        }
    }

    pub fn parse(s: &str) -> Option<WordForm> {
        WordForm::ALL.into_iter().find(|f| f.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    pub pos: Pos,
    pub form: WordForm,
    /// Half-open byte range of `surface` inside the sentence text.
    pub span: (usize, usize),
}

impl Token {
    /// An untagged token; lemma is the lowercased surface.
    pub fn new(surface: &str, span: (usize, usize)) -> Token {
        let pos = if is_punct_word(surface) {
            Pos::Punct
        } else {
            Pos::Other
        };
        Token {
            surface: surface.to_string(),
            lemma: surface.to_lowercase(),
            pos,
            form: WordForm::Base,
            span,
        }
    }

    pub fn is_punct(&self) -> bool {
        self.pos == Pos::Punct || is_punct_word(&self.surface)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Sentence {
    pub text: String,
    pub tokens: Vec<Token>,
}

impl Sentence {
    /// Builds a sentence whose text is the tokens joined by single spaces,
    /// recomputing spans.
    pub fn from_tokens(mut tokens: Vec<Token>) -> Sentence {
        let mut text = String::new();
        for token in &mut tokens {
            if !text.is_empty() {
                text.push(' ');
            }
            let start = text.len();
            text.push_str(&token.surface);
            token.span = (start, text.len());
        }
        Sentence { text, tokens }
    }

    pub fn word_count(&self) -> usize {
        self.tokens.iter().filter(|t| !t.is_punct()).count()
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.surface.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Story {
    pub id: String,
    /// First sentence (ROC-style) or prompt (WP-style).
    pub input: String,
    pub sentences: Vec<Sentence>,
    pub source_model: Option<String>,
    pub source_dataset: Option<String>,
    pub metadata: BTreeMap<String, String>,
}

impl Story {
    /// All token surfaces joined by single spaces. This is the canonical
    /// text written into suites.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for token in self.tokens() {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(&token.surface);
        }
        out
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences.iter().flat_map(|s| s.tokens.iter())
    }

    pub fn word_count(&self) -> usize {
        self.sentences.iter().map(Sentence::word_count).sum()
    }

    pub fn tag(&self, key: &str) -> Option<&str> {
        match key {
            "model" => self.source_model.as_deref(),
            "dataset" => self.source_dataset.as_deref(),
            _ => self.metadata.get(key).map(String::as_str),
        }
    }
}

/// Ordered stories with unique ids. File order is the canonical order for
/// every seeded decision downstream.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Corpus {
    pub stories: Vec<Story>,
    pub metadata: BTreeMap<String, String>,
}

impl Corpus {
    pub fn new(stories: Vec<Story>) -> Result<Corpus> {
        let mut seen = BTreeSet::new();
        for story in &stories {
            if !seen.insert(story.id.as_str()) {
                return Err(Error::Invalid(format!("duplicate story id `{}`", story.id)));
            }
        }
        Ok(Corpus {
            stories,
            metadata: BTreeMap::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.stories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stories.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Story> {
        self.stories.iter().find(|s| s.id == id)
    }
}

/// True when every character is non-alphanumeric.
pub fn is_punct_word(s: &str) -> bool {
    !s.is_empty() && s.chars().all(is_punct_char)
}

fn is_punct_char(c: char) -> bool {
    !c.is_alphanumeric()
}

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closing(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '}' | '\u{201d}' | '\u{2019}')
}

/// Honorifics split into their own data file by the std crate; these are the
/// built-in defaults.
pub const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "mr.", "mrs.", "ms.", "dr.", "prof.", "st.", "jr.", "sr.", "mt.", "capt.", "gen.", "lt.",
    "sgt.", "rev.", "col.", "gov.", "sen.", "rep.", "messrs.",
];

/// Rule-based sentence splitter and tokenizer.
///
/// Sentences end at a chunk (whitespace-delimited run) whose last non-closing
/// character is `.`, `!` or `?`, unless the chunk is a listed abbreviation.
/// Inside a chunk, leading and trailing punctuation characters become
/// separate tokens; inner punctuation (contractions, `1,000`) stays.
#[derive(Debug, Clone)]
pub struct Segmenter {
    abbreviations: BTreeSet<String>,
}

impl Default for Segmenter {
    fn default() -> Self {
        Segmenter::new(DEFAULT_ABBREVIATIONS.iter().copied())
    }
}

impl Segmenter {
    pub fn new<'a>(abbreviations: impl IntoIterator<Item = &'a str>) -> Segmenter {
        Segmenter {
            abbreviations: abbreviations
                .into_iter()
                .map(|a| a.trim().to_lowercase())
                .collect(),
        }
    }

    pub fn is_abbreviation(&self, s: &str) -> bool {
        !s.is_empty() && self.abbreviations.contains(&s.to_lowercase())
    }

    fn ends_sentence(&self, chunk: &str) -> bool {
        let t = chunk.trim_end_matches(is_closing);
        match t.chars().last() {
            Some(c) if is_terminal(c) => {
                !self.is_abbreviation(t.trim_start_matches(|c| is_punct_char(c) && !is_terminal(c)))
            }
            _ => false,
        }
    }

    fn is_placeholder(chunk: &str) -> bool {
        chunk.len() > 2
            && chunk.starts_with('[')
            && chunk.ends_with(']')
            && chunk[1..chunk.len() - 1]
                .chars()
                .all(|c| c.is_ascii_uppercase())
    }

    fn tokenize_chunk(&self, chunk: &str, offset: usize, out: &mut Vec<Token>) {
        if Self::is_placeholder(chunk) || self.is_abbreviation(chunk) {
            out.push(Token::new(chunk, (offset, offset + chunk.len())));
            return;
        }
        let mut start = 0;
        for (i, c) in chunk.char_indices() {
            if !is_punct_char(c) {
                break;
            }
            out.push(Token::new(
                &chunk[i..i + c.len_utf8()],
                (offset + i, offset + i + c.len_utf8()),
            ));
            start = i + c.len_utf8();
        }
        let rest = &chunk[start..];
        if rest.is_empty() {
            return;
        }
        let rest_offset = offset + start;
        // An abbreviation followed only by closing marks keeps its period.
        let without_closing = rest.trim_end_matches(is_closing);
        let (word_end, tail_from) = if self.is_abbreviation(without_closing) {
            (without_closing.len(), without_closing.len())
        } else {
            let word = rest.trim_end_matches(is_punct_char);
            (word.len(), word.len())
        };
        if word_end > 0 {
            out.push(Token::new(
                &rest[..word_end],
                (rest_offset, rest_offset + word_end),
            ));
        }
        for (i, c) in rest[tail_from..].char_indices() {
            let at = tail_from + i;
            out.push(Token::new(
                &rest[at..at + c.len_utf8()],
                (rest_offset + at, rest_offset + at + c.len_utf8()),
            ));
        }
    }

    /// Splits `text` into sentences of tokens. Spans are relative to each
    /// sentence's own text.
    pub fn segment(&self, text: &str) -> Vec<Sentence> {
        let mut sentences = Vec::new();
        let mut current: Option<(usize, usize)> = None;
        let mut chunks: Vec<(usize, &str)> = Vec::new();
        let mut flush = |start: usize, end: usize, chunks: &mut Vec<(usize, &str)>| {
            let mut tokens = Vec::new();
            for (at, chunk) in chunks.drain(..) {
                self.tokenize_chunk(chunk, at - start, &mut tokens);
            }
            sentences.push(Sentence {
                text: text[start..end].to_string(),
                tokens,
            });
        };
        for (at, chunk) in chunk_indices(text) {
            let span = match current {
                Some((s, _)) => (s, at + chunk.len()),
                None => (at, at + chunk.len()),
            };
            current = Some(span);
            chunks.push((at, chunk));
            if self.ends_sentence(chunk) {
                flush(span.0, span.1, &mut chunks);
                current = None;
            }
        }
        if let Some((s, e)) = current {
            flush(s, e, &mut chunks);
        }
        sentences
    }

    /// Builds an untagged story from raw input and story text.
    pub fn story(&self, id: &str, raw_input: &str, raw_story: &str) -> Story {
        Story {
            id: id.to_string(),
            input: raw_input.trim().to_string(),
            sentences: self.segment(raw_story),
            ..Story::default()
        }
    }

    /// Re-segments the rendered text of `story`. The result's rendering
    /// re-segments to itself, which is what makes edit replay byte-exact.
    /// Tags are dropped.
    pub fn canonical(&self, story: &Story) -> Story {
        Story {
            sentences: self.segment(&story.render()),
            ..story.clone()
        }
    }
}

fn chunk_indices(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut rest_at = 0;
    core::iter::from_fn(move || {
        let rest = &text[rest_at..];
        let lead = rest.len() - rest.trim_start().len();
        let body = &rest[lead..];
        if body.is_empty() {
            return None;
        }
        let len = body.find(char::is_whitespace).unwrap_or(body.len());
        let at = rest_at + lead;
        rest_at = at + len;
        Some((at, &text[at..at + len]))
    })
}

/// `segment_and_tokenize` with the default abbreviation list.
pub fn segment_and_tokenize(raw_input: &str, raw_story: &str) -> Story {
    Segmenter::default().story("", raw_input, raw_story)
}

/// Assigns pos, lemma and form to every token using the pronoun table and
/// the synset lexicon, falling back to suffix heuristics.
pub fn tag_story(story: &Story, lexicon: &LexiconBundle) -> Result<Story> {
    let synsets = lexicon.synsets()?;
    let pronouns = lexicon.pronouns()?;
    let mut out = story.clone();
    // Capitalized unknown words seen away from sentence start are proper
    // nouns everywhere in the story.
    let mut proper: BTreeSet<&str> = BTreeSet::new();
    for sentence in &story.sentences {
        let first_word = sentence.tokens.iter().position(|t| !t.is_punct());
        for (i, token) in sentence.tokens.iter().enumerate() {
            if Some(i) != first_word && is_capitalized(&token.surface) {
                let lower = token.surface.to_lowercase();
                if !pronouns.is_pronoun(&lower) && synsets.analyze(&lower).is_none() {
                    proper.insert(token.surface.as_str());
                }
            }
        }
    }
    let proper: BTreeSet<String> = proper.into_iter().map(String::from).collect();
    for sentence in &mut out.sentences {
        for token in &mut sentence.tokens {
            let lower = token.surface.to_lowercase();
            let (pos, lemma, form) = if is_punct_word(&token.surface) {
                (Pos::Punct, token.surface.clone(), WordForm::Base)
            } else if Segmenter::is_placeholder(&token.surface) {
                (Pos::Noun, token.surface.clone(), WordForm::Base)
            } else if pronouns.is_pronoun(&lower) {
                (Pos::Pron, lower, WordForm::Base)
            } else if let Some(reading) = synsets.analyze(&lower) {
                (reading.pos, reading.lemma, reading.form)
            } else if proper.contains(&token.surface) {
                (Pos::Noun, token.surface.clone(), WordForm::Base)
            } else {
                (Pos::Other, lower, WordForm::Base)
            };
            token.pos = pos;
            token.lemma = lemma;
            token.form = form;
        }
    }
    Ok(out)
}

fn is_capitalized(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_uppercase())
        && chars.all(|c| c.is_alphabetic() || c == '\'' || c == '-')
}

/// Longest prefix of whole sentences with at most `max_words` non-punctuation
/// tokens; the first sentence is always kept.
pub fn truncate_story(story: &Story, max_words: usize) -> Story {
    let mut kept = Vec::new();
    let mut words = 0;
    for (i, sentence) in story.sentences.iter().enumerate() {
        let n = sentence.word_count();
        if i > 0 && words + n > max_words {
            break;
        }
        words += n;
        kept.push(sentence.clone());
        if words > max_words {
            break;
        }
    }
    Story {
        sentences: kept,
        ..story.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Gender {
    Male,
    Female,
    Neutral,
}

impl Gender {
    pub fn placeholder(self) -> &'static str {
        match self {
            Gender::Male => "[MALE]",
            Gender::Female => "[FEMALE]",
            Gender::Neutral => "[NEUTRAL]",
        }
    }

    pub fn parse(s: &str) -> Option<Gender> {
        match s.trim().to_ascii_lowercase().as_str() {
            "male" | "m" => Some(Gender::Male),
            "female" | "f" => Some(Gender::Female),
            "neutral" | "n" | "unisex" => Some(Gender::Neutral),
            _ => None,
        }
    }
}

/// Replaces listed names with gender placeholders in the story and its
/// input. Each replacement is recorded as `delex:<name>` in the metadata.
pub fn delexicalize_names(story: &Story, names: &BTreeMap<String, Gender>) -> Story {
    let mut out = story.clone();
    for sentence in &mut out.sentences {
        let mut changed = false;
        for token in &mut sentence.tokens {
            if let Some(gender) = names.get(&token.surface) {
                out.metadata.insert(
                    format!("delex:{}", token.surface),
                    gender.placeholder().to_string(),
                );
                token.surface = gender.placeholder().to_string();
                token.lemma = token.surface.clone();
                token.pos = Pos::Noun;
                token.form = WordForm::Base;
                changed = true;
            }
        }
        if changed {
            *sentence = Sentence::from_tokens(core::mem::take(&mut sentence.tokens));
        }
    }
    out.input = replace_words(&story.input, |word| {
        names.get(word).map(|g| {
            out.metadata
                .insert(format!("delex:{word}"), g.placeholder().to_string());
            g.placeholder()
        })
    });
    out
}

fn replace_words<'a>(text: &str, mut lookup: impl FnMut(&str) -> Option<&'a str>) -> String {
    let mut out = String::with_capacity(text.len());
    let mut word_start: Option<usize> = None;
    let flush = |out: &mut String, word: &str, lookup: &mut dyn FnMut(&str) -> Option<&'a str>| {
        match lookup(word) {
            Some(rep) => out.push_str(rep),
            None => out.push_str(word),
        }
    };
    for (i, c) in text.char_indices() {
        let wordy = c.is_alphanumeric() || c == '\'' || c == '-';
        match (wordy, word_start) {
            (true, None) => word_start = Some(i),
            (false, Some(s)) => {
                flush(&mut out, &text[s..i], &mut lookup);
                word_start = None;
                out.push(c);
            }
            (false, None) => out.push(c),
            (true, Some(_)) => {}
        }
    }
    if let Some(s) = word_start {
        flush(&mut out, &text[s..], &mut lookup);
    }
    out
}

/// Copies the capitalization pattern of `model` onto `word`.
pub fn match_case(model: &str, word: &str) -> String {
    let letters: Vec<char> = model.chars().filter(|c| c.is_alphabetic()).collect();
    if letters.len() > 1 && letters.iter().all(|c| c.is_uppercase()) {
        return word.to_uppercase();
    }
    // "I" is uppercase by convention, not because of sentence position.
    if model == "I" {
        return word.to_string();
    }
    match model.chars().next() {
        Some(c) if c.is_uppercase() => {
            let mut chars = word.chars();
            match chars.next() {
                Some(first) => first.to_uppercase().chain(chars).collect(),
                None => String::new(),
            }
        }
        _ if word == "i" => "I".to_string(),
        _ => word.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn surfaces(s: &Sentence) -> Vec<&str> {
        s.surfaces().collect()
    }

    #[test]
    fn splits_on_terminal_punctuation() {
        let story = segment_and_tokenize("", "He ran. She fell.");
        assert_eq!(story.sentences.len(), 2);
        assert_eq!(surfaces(&story.sentences[0]), ["He", "ran", "."]);
        assert_eq!(surfaces(&story.sentences[1]), ["She", "fell", "."]);
    }

    #[test]
    fn keeps_contractions_whole() {
        let story = segment_and_tokenize("", "I'll wait.");
        assert_eq!(story.sentences.len(), 1);
        assert_eq!(surfaces(&story.sentences[0]), ["I'll", "wait", "."]);
    }

    #[test]
    fn abbreviation_does_not_end_sentence() {
        // Chunks: "Mr." (abbreviation, no split), "Smith", "left." (split),
        // "He", "returned." (split at end of text).
        let story = segment_and_tokenize("", "Mr. Smith left. He returned.");
        assert_eq!(story.sentences.len(), 2);
        assert_eq!(surfaces(&story.sentences[0]), ["Mr.", "Smith", "left", "."]);
        assert_eq!(story.sentences[0].text, "Mr. Smith left.");
        assert_eq!(surfaces(&story.sentences[1]), ["He", "returned", "."]);
    }

    #[test]
    fn spans_address_sentence_text() {
        let story = segment_and_tokenize("", "  \"Wow,\" she said!  Then   left");
        for sentence in &story.sentences {
            for token in &sentence.tokens {
                assert_eq!(&sentence.text[token.span.0..token.span.1], token.surface);
            }
        }
        assert_eq!(story.sentences.len(), 2);
        assert_eq!(
            surfaces(&story.sentences[0]),
            ["\"", "Wow", ",", "\"", "she", "said", "!"]
        );
    }

    #[test]
    fn closing_quote_after_terminal_still_splits() {
        let story = segment_and_tokenize("", "He said \"hi.\" Then he left.");
        assert_eq!(story.sentences.len(), 2);
        assert_eq!(
            surfaces(&story.sentences[0]),
            ["He", "said", "\"", "hi", ".", "\""]
        );
    }

    #[test]
    fn canonical_form_is_a_fixpoint() {
        let seg = Segmenter::default();
        let raw = seg.story("x", "", "He said \"hi.\" Then Dr. Who (left).  Yes?! ok");
        let once = seg.canonical(&raw);
        let twice = seg.canonical(&once);
        assert_eq!(once, twice);
    }

    #[test]
    fn placeholder_is_one_token() {
        let story = segment_and_tokenize("", "[MALE] met [FEMALE] .");
        assert_eq!(
            surfaces(&story.sentences[0]),
            ["[MALE]", "met", "[FEMALE]", "."]
        );
    }

    #[test]
    fn truncation_keeps_whole_sentences() {
        let words = |n: usize| {
            let mut s = String::new();
            for _ in 0..n {
                s.push_str("w ");
            }
            s.push('.');
            s
        };
        let text = format!("{} {} {}", words(100), words(100), words(100));
        let story = segment_and_tokenize("", &text);
        assert_eq!(story.word_count(), 300);
        let cut = truncate_story(&story, 250);
        assert_eq!(cut.sentences.len(), 2);
        assert_eq!(cut.word_count(), 200);

        let short = segment_and_tokenize("", &words(40));
        assert_eq!(truncate_story(&short, 250), short);

        let long = segment_and_tokenize("", &words(300));
        assert_eq!(truncate_story(&long, 250), long);
    }

    #[test]
    fn delexicalization_is_consistent() {
        let names: BTreeMap<String, Gender> = [
            ("John".to_string(), Gender::Male),
            ("Mary".to_string(), Gender::Female),
        ]
        .into_iter()
        .collect();
        let story = segment_and_tokenize("John and Mary.", "John met Mary.");
        let out = delexicalize_names(&story, &names);
        assert_eq!(out.render(), "[MALE] met [FEMALE] .");
        assert_eq!(out.input, "[MALE] and [FEMALE].");
        assert_eq!(
            out.metadata.get("delex:John").map(String::as_str),
            Some("[MALE]")
        );

        let twice = delexicalize_names(&segment_and_tokenize("", "John told John."), &names);
        assert_eq!(twice.render(), "[MALE] told [MALE] .");

        let none = segment_and_tokenize("", "Nobody came.");
        assert_eq!(delexicalize_names(&none, &names), none);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let a = Story {
            id: "a".into(),
            ..Story::default()
        };
        assert!(Corpus::new(vec![a.clone(), a]).is_err());
    }

    #[test]
    fn case_matching() {
        assert_eq!(match_case("Agreed", "disagreed"), "Disagreed");
        assert_eq!(match_case("USA", "uk"), "UK");
        assert_eq!(match_case("my", "i"), "I");
        assert_eq!(match_case("I", "we"), "we");
    }
}
