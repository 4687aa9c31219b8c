use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;

use crate::corpus::{match_case, Pos, Token, WordForm};
use crate::rng::choose;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RelationKind {
    Synonym,
    Antonym,
}

impl RelationKind {
    pub fn parse(s: &str) -> Option<RelationKind> {
        match s {
            "syn" => Some(RelationKind::Synonym),
            "ant" => Some(RelationKind::Antonym),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Relations {
    pub synonyms: BTreeSet<String>,
    pub antonyms: BTreeSet<String>,
}

/// A (lemma, pos, form) analysis of a surface form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Reading {
    pub lemma: String,
    pub pos: Pos,
    pub form: WordForm,
}

/// Synonym/antonym relations keyed by (lemma, pos), plus an explicit
/// inflection table with suffix-rule fallback.
#[derive(Debug, Clone, Default)]
pub struct SynsetLexicon {
    entries: BTreeMap<(String, Pos), Relations>,
    inflections: BTreeMap<(String, Pos, WordForm), String>,
    surfaces: BTreeMap<String, BTreeSet<Reading>>,
    vocabulary: BTreeMap<Pos, BTreeSet<String>>,
    doubling: BTreeSet<String>,
}

fn is_single_word(s: &str) -> bool {
    !s.is_empty() && !s.contains([' ', '_'])
}

impl SynsetLexicon {
    /// Builds the lexicon, closing antonymy under symmetry and dropping
    /// self-relations. Lemmas are lowercased.
    pub fn new(
        relations: impl IntoIterator<Item = (String, Pos, RelationKind, String)>,
        inflections: impl IntoIterator<Item = (String, Pos, WordForm, String)>,
        doubling: impl IntoIterator<Item = String>,
    ) -> SynsetLexicon {
        let mut lex = SynsetLexicon::default();
        for (lemma, pos, kind, target) in relations {
            let (lemma, target) = (lemma.to_lowercase(), target.to_lowercase());
            lex.vocabulary.entry(pos).or_default().insert(lemma.clone());
            if lemma == target {
                continue;
            }
            let entry = lex.entries.entry((lemma.clone(), pos)).or_default();
            match kind {
                RelationKind::Synonym => {
                    entry.synonyms.insert(target);
                }
                RelationKind::Antonym => {
                    entry.antonyms.insert(target.clone());
                    lex.entries
                        .entry((target.clone(), pos))
                        .or_default()
                        .antonyms
                        .insert(lemma);
                    lex.vocabulary.entry(pos).or_default().insert(target);
                }
            }
        }
        for (lemma, pos, form, surface) in inflections {
            let (lemma, surface) = (lemma.to_lowercase(), surface.to_lowercase());
            lex.vocabulary.entry(pos).or_default().insert(lemma.clone());
            lex.surfaces
                .entry(surface.clone())
                .or_default()
                .insert(Reading {
                    lemma: lemma.clone(),
                    pos,
                    form,
                });
            if form != WordForm::Base {
                lex.inflections.insert((lemma, pos, form), surface);
            }
        }
        lex.doubling = doubling.into_iter().map(|d| d.to_lowercase()).collect();
        for ((lemma, _), rel) in lex.entries.iter_mut() {
            rel.synonyms.remove(lemma);
            rel.antonyms.remove(lemma);
        }
        lex
    }

    pub fn relations(&self, lemma: &str, pos: Pos) -> Option<&Relations> {
        self.entries.get(&(lemma.to_string(), pos))
    }

    pub fn antonyms(&self, lemma: &str, pos: Pos) -> impl Iterator<Item = &str> {
        self.relations(lemma, pos)
            .into_iter()
            .flat_map(|r| r.antonyms.iter().map(String::as_str))
    }

    pub fn synonyms(&self, lemma: &str, pos: Pos) -> impl Iterator<Item = &str> {
        self.relations(lemma, pos)
            .into_iter()
            .flat_map(|r| r.synonyms.iter().map(String::as_str))
    }

    pub fn knows(&self, lemma: &str, pos: Pos) -> bool {
        self.vocabulary.get(&pos).is_some_and(|v| v.contains(lemma))
    }

    /// Known lemmas of one part of speech, sorted.
    pub fn lemmas(&self, pos: Pos) -> impl Iterator<Item = &str> {
        self.vocabulary
            .get(&pos)
            .into_iter()
            .flat_map(|v| v.iter().map(String::as_str))
    }

    /// Surface form of `lemma` in `form`: the explicit table first, then the
    /// suffix rules. `None` for combinations no rule covers.
    pub fn inflect(&self, lemma: &str, pos: Pos, form: WordForm) -> Option<String> {
        if form == WordForm::Base {
            return Some(lemma.to_string());
        }
        if let Some(s) = self.inflections.get(&(lemma.to_string(), pos, form)) {
            return Some(s.clone());
        }
        match (pos, form) {
            (Pos::Verb, WordForm::Past) => Some(self.suffix_ed(lemma)),
            (Pos::Verb, WordForm::PastParticiple) => Some(
                self.inflections
                    .get(&(lemma.to_string(), pos, WordForm::Past))
                    .cloned()
                    .unwrap_or_else(|| self.suffix_ed(lemma)),
            ),
            (Pos::Verb, WordForm::Gerund) => Some(self.suffix_ing(lemma)),
            (Pos::Verb, WordForm::ThirdPerson) | (Pos::Noun, WordForm::Plural) => {
                Some(suffix_s(lemma))
            }
            _ => None,
        }
    }

    fn doubled(&self, lemma: &str) -> Option<String> {
        if self.doubling.contains(lemma) {
            let last = lemma.chars().last()?;
            let mut s = lemma.to_string();
            s.push(last);
            Some(s)
        } else {
            None
        }
    }

    fn suffix_ed(&self, lemma: &str) -> String {
        if let Some(d) = self.doubled(lemma) {
            return d + "ed";
        }
        if lemma.ends_with('e') {
            return lemma.to_string() + "d";
        }
        if let Some(stem) = consonant_y_stem(lemma) {
            return stem.to_string() + "ied";
        }
        lemma.to_string() + "ed"
    }

    fn suffix_ing(&self, lemma: &str) -> String {
        if let Some(d) = self.doubled(lemma) {
            return d + "ing";
        }
        if let Some(stem) = lemma.strip_suffix("ie") {
            return stem.to_string() + "ying";
        }
        if lemma.len() > 2
            && lemma.ends_with('e')
            && !lemma.ends_with("ee")
            && !lemma.ends_with("ye")
            && !lemma.ends_with("oe")
        {
            return lemma[..lemma.len() - 1].to_string() + "ing";
        }
        lemma.to_string() + "ing"
    }

    /// Lexicon readings of a lowercase surface, or suffix-rule guesses.
    pub fn analyze(&self, surface: &str) -> Option<Reading> {
        let mut readings: Vec<Reading> = self
            .surfaces
            .get(surface)
            .map(|r| r.iter().cloned().collect())
            .unwrap_or_default();
        for (pos, lemmas) in &self.vocabulary {
            if lemmas.contains(surface) {
                let base = Reading {
                    lemma: surface.to_string(),
                    pos: *pos,
                    form: WordForm::Base,
                };
                if !readings.contains(&base) {
                    readings.push(base);
                }
            }
        }
        if !readings.is_empty() {
            return Some(majority_reading(readings, surface));
        }
        self.analyze_suffix(surface)
    }

    fn analyze_suffix(&self, w: &str) -> Option<Reading> {
        let verb = |lemma: String, form| Reading {
            lemma,
            pos: Pos::Verb,
            form,
        };
        if let Some(stem) = w.strip_suffix("ed") {
            let mut candidates: Vec<String> = Vec::new();
            if let Some(s) = w.strip_suffix("ied") {
                candidates.push(s.to_string() + "y");
            }
            candidates.push(stem.to_string());
            candidates.push(w[..w.len() - 1].to_string());
            if let Some(u) = undouble(stem) {
                candidates.push(u);
            }
            if let Some(lemma) = candidates.into_iter().find(|c| self.knows(c, Pos::Verb)) {
                return Some(verb(lemma, WordForm::Past));
            }
            let guess = undouble(stem).unwrap_or_else(|| stem.to_string());
            return (guess.chars().count() >= 3).then(|| verb(guess, WordForm::Past));
        }
        if let Some(stem) = w.strip_suffix("ing") {
            if w.ends_with("thing") {
                return None;
            }
            let mut candidates = alloc::vec![stem.to_string(), stem.to_string() + "e"];
            if let Some(s) = stem.strip_suffix('y') {
                candidates.push(s.to_string() + "ie");
            }
            if let Some(u) = undouble(stem) {
                candidates.push(u);
            }
            if let Some(lemma) = candidates.into_iter().find(|c| self.knows(c, Pos::Verb)) {
                return Some(verb(lemma, WordForm::Gerund));
            }
            let guess = undouble(stem).unwrap_or_else(|| stem.to_string());
            return (guess.chars().count() >= 3).then(|| verb(guess, WordForm::Gerund));
        }
        if let Some(stem) = w.strip_suffix('s') {
            let mut candidates = Vec::new();
            if let Some(s) = w.strip_suffix("ies") {
                candidates.push(s.to_string() + "y");
            }
            if let Some(s) = w.strip_suffix("es") {
                candidates.push(s.to_string());
            }
            candidates.push(stem.to_string());
            for c in candidates {
                if self.knows(&c, Pos::Verb) {
                    return Some(verb(c, WordForm::ThirdPerson));
                }
                if self.knows(&c, Pos::Noun) {
                    return Some(Reading {
                        lemma: c,
                        pos: Pos::Noun,
                        form: WordForm::Plural,
                    });
                }
            }
        }
        None
    }
}

const POS_PRIORITY: [Pos; 5] = [Pos::Verb, Pos::Noun, Pos::Adj, Pos::Adv, Pos::Other];

fn majority_reading(readings: Vec<Reading>, surface: &str) -> Reading {
    let count = |p: Pos| readings.iter().filter(|r| r.pos == p).count();
    let best = POS_PRIORITY.iter().copied().max_by(|a, b| {
        // Higher count wins; on ties the earlier entry in POS_PRIORITY wins.
        count(*a).cmp(&count(*b)).then_with(|| {
            let ia = POS_PRIORITY.iter().position(|p| p == a);
            let ib = POS_PRIORITY.iter().position(|p| p == b);
            ib.cmp(&ia)
        })
    });
    let pos = best.unwrap_or(Pos::Other);
    let mut of_pos: Vec<Reading> = readings.into_iter().filter(|r| r.pos == pos).collect();
    of_pos.sort();
    let pick = of_pos.iter().position(|r| r.lemma == surface).unwrap_or(0);
    of_pos.swap_remove(pick)
}

fn consonant_y_stem(lemma: &str) -> Option<&str> {
    let stem = lemma.strip_suffix('y')?;
    let before = stem.chars().last()?;
    (!matches!(before, 'a' | 'e' | 'i' | 'o' | 'u')).then_some(stem)
}

fn suffix_s(lemma: &str) -> String {
    if ["s", "x", "z", "ch", "sh", "o"]
        .iter()
        .any(|e| lemma.ends_with(e))
    {
        return lemma.to_string() + "es";
    }
    if let Some(stem) = consonant_y_stem(lemma) {
        return stem.to_string() + "ies";
    }
    lemma.to_string() + "s"
}

fn undouble(stem: &str) -> Option<String> {
    let mut chars = stem.chars().rev();
    let (a, b) = (chars.next()?, chars.next()?);
    let vowel_or_soft = matches!(a, 'a' | 'e' | 'i' | 'o' | 'u' | 'l' | 's' | 'z' | 'f');
    (a == b && !vowel_or_soft && a.is_alphabetic())
        .then(|| stem[..stem.len() - a.len_utf8()].to_string())
}

fn related_candidates<'a>(
    word: &Token,
    lexicon: &'a SynsetLexicon,
    lemmas: impl Iterator<Item = &'a str>,
) -> Vec<String> {
    let surface = word.surface.to_lowercase();
    lemmas
        .filter(|l| is_single_word(l))
        .filter_map(|l| lexicon.inflect(l, word.pos, word.form))
        .filter(|s| *s != surface)
        .collect()
}

/// Inflected antonyms of `word`, in sorted-lemma order, excluding its own
/// surface form.
pub fn antonym_candidates(word: &Token, lexicon: &SynsetLexicon) -> Vec<String> {
    related_candidates(word, lexicon, lexicon.antonyms(&word.lemma, word.pos))
}

/// Inflected synonyms of `word`; see [`antonym_candidates`].
pub fn synonym_candidates(word: &Token, lexicon: &SynsetLexicon) -> Vec<String> {
    related_candidates(word, lexicon, lexicon.synonyms(&word.lemma, word.pos))
}

/// A seeded antonym of `word` in the same inflectional form.
///
/// Candidates are the antonym lemmas (sorted) that can be inflected to the
/// token's form and differ from its surface; one is drawn uniformly.
pub fn antonym_inflected<R: Rng + ?Sized>(
    word: &Token,
    lexicon: &SynsetLexicon,
    rng: &mut R,
) -> Option<String> {
    choose(rng, &antonym_candidates(word, lexicon)).map(|s| match_case(&word.surface, s))
}

/// As [`antonym_inflected`] over synonym sets.
pub fn synonym_inflected<R: Rng + ?Sized>(
    word: &Token,
    lexicon: &SynsetLexicon,
    rng: &mut R,
) -> Option<String> {
    choose(rng, &synonym_candidates(word, lexicon)).map(|s| match_case(&word.surface, s))
}
