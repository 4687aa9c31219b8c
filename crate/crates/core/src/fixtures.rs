//! Small hand-built resources shared by unit tests.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::{tag_story, Pos, Segmenter, Story, WordForm};
use crate::lexicon::{
    ConceptGraph, ContractionMap, EmbeddingTable, LexiconBundle, ListKind, RelationKind,
    SynsetLexicon, Triple, WordList,
};

fn s(x: &str) -> String {
    x.to_string()
}

fn words(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|x| s(x)).collect()
}

pub(crate) fn synsets() -> SynsetLexicon {
    use Pos::*;
    use RelationKind::*;
    let rel = |a: &str, p, k, b: &str| (s(a), p, k, s(b));
    let relations = vec![
        rel("agree", Verb, Antonym, "disagree"),
        rel("happy", Adj, Antonym, "sad"),
        rel("clear", Adj, Antonym, "cloudy"),
        rel("big", Adj, Synonym, "large"),
        rel("hire", Verb, Synonym, "employ"),
        rel("attorney", Noun, Synonym, "lawyer"),
        rel("purchase", Verb, Synonym, "buy"),
    ];
    let mut inflections = Vec::new();
    let mut add =
        |lemma: &str, pos, form, surface: &str| inflections.push((s(lemma), pos, form, s(surface)));
    for (form, surface) in [
        (WordForm::Base, "be"),
        (WordForm::Base, "is"),
        (WordForm::Base, "are"),
        (WordForm::Base, "am"),
        (WordForm::Past, "was"),
        (WordForm::Past, "were"),
        (WordForm::PastParticiple, "been"),
    ] {
        add("be", Verb, form, surface);
    }
    add("eat", Verb, WordForm::Past, "ate");
    add("eat", Verb, WordForm::PastParticiple, "eaten");
    add("see", Verb, WordForm::Past, "saw");
    add("see", Verb, WordForm::PastParticiple, "seen");
    add("learn", Verb, WordForm::Past, "learnt");
    add("run", Verb, WordForm::Past, "ran");
    add("put", Verb, WordForm::Past, "put");
    add("give", Verb, WordForm::Past, "gave");
    add("buy", Verb, WordForm::Past, "bought");
    add("go", Verb, WordForm::Past, "went");
    add("can", Other, WordForm::Base, "can");
    add("could", Other, WordForm::Base, "could");
    add("quickly", Adv, WordForm::Base, "quickly");
    add("then", Adv, WordForm::Base, "then");
    for verb in [
        "step",
        "ask",
        "decide",
        "fight",
        "want",
        "walk",
        "bake",
        "come",
        "hire",
        "employ",
        "agree",
        "vaccinate",
        "get",
        "jump",
        "sing",
        "climb",
        "play",
        "watch",
        "read",
        "cook",
    ] {
        add(verb, Verb, WordForm::Base, verb);
    }
    for noun in [
        "stage", "sky", "dog", "cat", "oven", "kitchen", "tree", "lawyer", "attorney", "bite",
        "lesson", "video", "city", "cake", "fence", "song", "hill", "book", "friend", "school",
        "garden",
    ] {
        add(noun, Noun, WordForm::Base, noun);
    }
    add("Halloween", Noun, WordForm::Base, "halloween");
    add("Christmas", Noun, WordForm::Base, "christmas");
    SynsetLexicon::new(relations, inflections, words(&["step", "stop"]))
}

pub(crate) fn embeddings() -> EmbeddingTable {
    let mut table = EmbeddingTable::new(4);
    for (w, v) in [
        ("dog", [1.0, 0.9, 0.0, 0.0]),
        ("cat", [0.9, 1.0, 0.0, 0.0]),
        ("ran", [0.0, 0.0, 1.0, 0.2]),
        ("oven", [0.0, 0.0, 0.0, 1.0]),
        ("kitchen", [0.0, 0.1, 0.0, 1.0]),
        ("lesson", [0.0, 0.0, 1.0, 0.0]),
        ("he", [0.5, 0.5, 0.5, 0.5]),
        ("hired", [0.2, 0.0, 0.9, 0.1]),
        ("employed", [0.25, 0.0, 0.85, 0.1]),
        ("attorney", [0.0, 0.9, 0.1, 0.3]),
        ("lawyer", [0.0, 0.85, 0.15, 0.3]),
    ] {
        table.insert(w, v.to_vec()).unwrap();
    }
    table
}

pub(crate) fn bundle() -> LexiconBundle {
    let mut b = LexiconBundle::with_defaults();
    b.synsets = Some(synsets());
    b.negation = Some(
        WordList::new(
            ListKind::Negation,
            words(&["not", "never", "no"]),
            words(&["hardly", "inactive"]),
            vec![],
        )
        .unwrap(),
    );
    b.causality = Some(
        WordList::new(
            ListKind::Causality,
            words(&["so", "because", "therefore"]),
            words(&["reason", "result"]),
            vec![(s("reason"), s("result"))],
        )
        .unwrap(),
    );
    b.temporal = Some(
        WordList::new(
            ListKind::Temporal,
            words(&["then", "after", "before", "when"]),
            words(&["later"]),
            vec![(s("after"), s("before"))],
        )
        .unwrap(),
    );
    b.graph = Some(ConceptGraph::new(
        [
            ("oven", "RelatedTo", "kitchen"),
            ("Halloween", "Antonyms", "Christmas"),
            ("dog", "RelatedTo", "cat"),
            ("bake", "RelatedTo", "cook"),
            ("cake", "AtLocation", "oven"),
        ]
        .map(|(h, r, t)| Triple {
            head: s(h),
            relation: s(r),
            tail: s(t),
        }),
    ));
    b.embeddings = Some(embeddings());
    b.contractions = Some(ContractionMap::new([
        ("i will", "i'll"),
        ("do not", "don't"),
        ("it is", "it's"),
        ("can not", "can't"),
    ]));
    b
}

pub(crate) fn tagged_id(id: &str, text: &str) -> Story {
    let story = Segmenter::default().story(id, "", text);
    tag_story(&Segmenter::default().canonical(&story), &bundle()).unwrap()
}

pub(crate) fn tagged(text: &str) -> Story {
    tagged_id("s", text)
}
