//! Synthetic corpora and helpers shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use storyprobe::resources::{load_resources, shipped_dir, Resources};
use storyprobe_core::corpus::{Corpus, Story};
use storyprobe_core::perturb::{Paraphrase, ParaphraseBank};

pub fn resources() -> Resources {
    load_resources(&shipped_dir()).expect("shipped resources load")
}

const PERSONS: [(&str, &str, &str, &str); 6] = [
    ("I", "me", "my", "myself"),
    ("we", "us", "our", "ourselves"),
    ("you", "you", "your", "yourself"),
    ("he", "him", "his", "himself"),
    ("she", "her", "her", "herself"),
    ("they", "them", "their", "themselves"),
];
const PAST: [&str; 18] = [
    "walked", "cooked", "watched", "played", "bought", "found", "cleaned", "fixed", "painted",
    "carried", "visited", "opened", "closed", "saw", "ate", "took", "hired", "sold",
];
const BASE: [&str; 12] = [
    "walk", "cook", "watch", "play", "buy", "find", "clean", "fix", "paint", "carry", "open",
    "close",
];
const NOUNS: [&str; 18] = [
    "dog", "cat", "cake", "book", "ball", "car", "gift", "letter", "apple", "bread", "picture",
    "toy", "phone", "bike", "hat", "box", "song", "lawyer",
];
const PLACES: [&str; 11] = [
    "park", "kitchen", "store", "school", "garden", "beach", "library", "city", "hospital",
    "office", "house",
];
const ADJS: [&str; 14] = [
    "happy", "sad", "big", "small", "hot", "cold", "clear", "cloudy", "tired", "excited", "angry",
    "busy", "quiet", "strong",
];

fn cap(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().collect::<String>() + c.as_str(),
        None => String::new(),
    }
}

fn pick<'a, R: Rng>(rng: &mut R, xs: &'a [&'a str]) -> &'a str {
    xs.choose(rng).copied().unwrap()
}

fn sentence<R: Rng>(rng: &mut R, template: usize) -> String {
    let p = PERSONS[rng.gen_range(0..PERSONS.len())];
    let q = PERSONS[rng.gen_range(0..PERSONS.len())];
    let (v, b, n, n2, pl, a) = (
        pick(rng, &PAST),
        pick(rng, &BASE),
        pick(rng, &NOUNS),
        pick(rng, &NOUNS),
        pick(rng, &PLACES),
        pick(rng, &ADJS),
    );
    let s = match template {
        0 => format!("{} {v} the {n} in the {pl}.", p.0),
        1 => format!("{} felt {a} because {} {v} {} {n}.", p.0, q.0, q.2),
        2 => format!("then {} {v} {} {n} at the {pl}.", p.0, p.2),
        3 => format!("after the {n}, {} did not {b} the {n2}.", p.0),
        4 => format!("it is {a}, so {} {v} {}.", p.0, q.1),
        5 => format!("the {n} was near the oven before {} left.", p.0),
        6 => format!("{} {v} a big {n} and felt {a}.", p.0),
        7 => format!("{} {n} {v} {} {n2} on Halloween.", p.2, q.2),
        8 => format!("{} never liked {} {pl}, but {} {v} {}.", p.0, p.2, q.0, q.3),
        _ => format!("{} {v} {} {n} with {}.", p.0, p.2, q.1),
    };
    cap(&s)
}

fn four_grams_unique(text: &str) -> bool {
    let words: Vec<String> = text
        .split_whitespace()
        .flat_map(|w| {
            let w = w.to_lowercase();
            let trimmed = w.trim_end_matches(['.', ',']).to_string();
            let tail = w[trimmed.len()..].to_string();
            [trimmed, tail]
        })
        .filter(|w| !w.is_empty())
        .collect();
    let mut seen = BTreeSet::new();
    words.windows(4).all(|g| seen.insert(g.to_vec()))
}

/// Nouns from unrelated topics of the shipped embedding table, verbs and
/// fillers it does not cover: sentences built from them barely relate.
const TOPIC_NOUNS: [&str; 8] = [
    "dog", "teacher", "cake", "park", "snow", "ball", "money", "morning",
];
const LOOSE_VERBS: [&str; 6] = ["fixed", "painted", "opened", "cleaned", "carried", "closed"];
const FILLERS: [&str; 5] = ["everything", "somehow", "quickly", "twice", "outside"];

fn unrelated<R: Rng>(rng: &mut R) -> String {
    let mut nouns = TOPIC_NOUNS.to_vec();
    nouns.shuffle(rng);
    let k = rng.gen_range(3..=5);
    let sentences: Vec<String> = nouns[..k]
        .iter()
        .map(|n| {
            cap(&format!(
                "{n} {} {}.",
                pick(rng, &LOOSE_VERBS),
                pick(rng, &FILLERS)
            ))
        })
        .collect();
    sentences.join(" ")
}

/// `n` stories with no repeated 4-gram inside any story. Every tenth one
/// is made of weakly related short sentences; the rest have five sentences.
pub fn synthetic_texts(n: usize, seed: u64) -> Vec<(String, String, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let body = loop {
                if i % 10 == 9 {
                    break unrelated(&mut rng);
                }
                let mut templates: Vec<usize> = (0..10).collect();
                templates.shuffle(&mut rng);
                let text: Vec<String> = templates[..5]
                    .iter()
                    .map(|&t| sentence(&mut rng, t))
                    .collect();
                let text = text.join(" ");
                if four_grams_unique(&text) {
                    break text;
                }
            };
            let input = format!("A day with the {}.", pick(&mut rng, &NOUNS));
            (format!("s{i:04}"), input, body)
        })
        .collect()
}

pub fn synthetic_corpus(n: usize, seed: u64, res: &Resources) -> Corpus {
    let stories: Vec<Story> = synthetic_texts(n, seed)
        .iter()
        .map(|(id, input, body)| res.segmenter.story(id, input, body))
        .collect();
    Corpus::new(stories).unwrap()
}

/// Records-format corpus text, optionally tagged with a model name.
pub fn records_text(texts: &[(String, String, String)]) -> String {
    let models = ["s2s", "fusion", "gpt2"];
    texts
        .iter()
        .enumerate()
        .map(|(i, (id, input, story))| {
            serde_json::json!({"id": id, "input": input, "story": story, "model": models[i % 3]})
                .to_string()
                + "\n"
        })
        .collect()
}

/// Paraphrases for the first sentence of some stories, one passing the
/// filter and one rejected for word overlap.
pub fn paraphrase_bank(corpus: &Corpus) -> ParaphraseBank {
    let mut bank = ParaphraseBank::new();
    for story in corpus.stories.iter().step_by(2) {
        let first = &story.sentences[0].text;
        bank.insert(
            first,
            Paraphrase {
                text: "Something like that happened once.".into(),
                similarity: 0.57,
                bleu1: 0.40,
            },
        );
        bank.insert(
            first,
            Paraphrase {
                text: format!("{first} indeed"),
                similarity: 0.9,
                bleu1: 0.89,
            },
        );
    }
    bank
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}
