use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Grammatical column of the pronoun table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PronounCase {
    Subjective,
    Objective,
    PossessiveAdjective,
    PossessiveNoun,
    Reflexive,
}

impl PronounCase {
    pub const ALL: [PronounCase; 5] = [
        PronounCase::Subjective,
        PronounCase::Objective,
        PronounCase::PossessiveAdjective,
        PronounCase::PossessiveNoun,
        PronounCase::Reflexive,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// One row per person type, five grammatical columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PronounTable {
    rows: Vec<[String; 5]>,
}

const STANDARD: [[&str; 5]; 8] = [
    ["i", "me", "my", "mine", "myself"],
    ["we", "us", "our", "ours", "ourselves"],
    ["you", "you", "your", "yours", "yourself"],
    ["you", "you", "your", "yours", "yourselves"],
    ["he", "him", "his", "his", "himself"],
    ["she", "her", "her", "hers", "herself"],
    ["it", "it", "its", "its", "itself"],
    ["they", "them", "their", "theirs", "themselves"],
];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PronounAlternative {
    pub person: usize,
    pub case: PronounCase,
    pub surface: String,
}

impl PronounTable {
    pub fn new(rows: Vec<[String; 5]>) -> Result<PronounTable> {
        if rows.is_empty() {
            return Err(Error::Invalid("pronoun table has no rows".to_string()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.iter().any(|c| c.trim().is_empty()) {
                return Err(Error::Invalid(alloc::format!(
                    "pronoun table row {} has an empty cell",
                    i + 1
                )));
            }
        }
        let rows = rows
            .into_iter()
            .map(|r| r.map(|c| c.trim().to_lowercase()))
            .collect();
        Ok(PronounTable { rows })
    }

    /// The eight-row personal pronoun table.
    pub fn standard() -> PronounTable {
        PronounTable {
            rows: STANDARD.iter().map(|r| r.map(|c| c.to_string())).collect(),
        }
    }

    pub fn rows(&self) -> &[[String; 5]] {
        &self.rows
    }

    /// Every (row, column) cell equal to `surface` (case-insensitive).
    pub fn readings(&self, surface: &str) -> Vec<(usize, PronounCase)> {
        let s = surface.to_lowercase();
        let mut out = Vec::new();
        for (row, cells) in self.rows.iter().enumerate() {
            for case in PronounCase::ALL {
                if cells[case.index()] == s {
                    out.push((row, case));
                }
            }
        }
        out
    }

    pub fn is_pronoun(&self, surface: &str) -> bool {
        !self.readings(surface).is_empty()
    }

    /// Person type of a pronoun. Surfaces shared by several rows (such as
    /// singular and plural "you") count as the first of them.
    pub fn person_type(&self, surface: &str) -> Option<usize> {
        self.readings(surface).into_iter().map(|(row, _)| row).min()
    }
}

/// Same-column substitutes from other person rows, for every reading of
/// `surface`. Alternatives equal to `surface` itself are left out.
pub fn pronoun_alternatives(surface: &str, table: &PronounTable) -> Vec<PronounAlternative> {
    let query = surface.to_lowercase();
    let mut out: Vec<PronounAlternative> = Vec::new();
    for (row, case) in table.readings(surface) {
        for (other, cells) in table.rows.iter().enumerate() {
            let cell = &cells[case.index()];
            if other != row && *cell != query {
                out.push(PronounAlternative {
                    person: other,
                    case,
                    surface: cell.clone(),
                });
            }
        }
    }
    out.sort();
    out.dedup();
    out
}
