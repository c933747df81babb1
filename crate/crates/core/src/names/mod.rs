//! Name parsing, nickname equivalence, Jaro-Winkler similarity and
//! corpus name statistics.

mod freq;
mod jaro;
mod nickname;
mod parse;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use freq::NameFrequencies;
pub use jaro::{jaro, jaro_winkler, BOOST_THRESHOLD, MAX_PREFIX, PREFIX_SCALE};
pub use nickname::{NicknameTable, DEFAULT_NICKNAMES};
pub use parse::{parse_name, NameParts, UnparseableName};

use crate::records::Corpus;

/// Jaro-Winkler gate for initial-based matches.
pub const DEFAULT_JW_THRESHOLD: f64 = 0.90;

/// How a graduate name and an author name were found compatible.
///
/// Variants are ordered weakest to strongest, so `max` picks the strongest class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchClass {
    Incompatible,
    InitialBased,
    NicknameBased,
    Exact,
}

impl MatchClass {
    pub fn is_compatible(self) -> bool {
        self != MatchClass::Incompatible
    }
}

/// Classifies a graduate/author name pair.
///
/// Last names must agree exactly. First names then match exactly, through
/// the nickname table, or by a shared first initial. The initial route also
/// needs complete, equal middle names on both sides and a full-name
/// Jaro-Winkler score above `jw_threshold`.
pub fn names_compatible_with(
    grad: &NameParts,
    author: &NameParts,
    nicknames: &NicknameTable,
    jw_threshold: f64,
) -> MatchClass {
    if grad.last.is_empty() || grad.last != author.last {
        return MatchClass::Incompatible;
    }
    if grad.first.is_empty() || author.first.is_empty() {
        return MatchClass::Incompatible;
    }
    if grad.first == author.first {
        return MatchClass::Exact;
    }
    let both_full = grad.first.len() > 1 && author.first.len() > 1;
    if both_full && nicknames.equivalent(&grad.first, &author.first) {
        return MatchClass::NicknameBased;
    }
    let one_is_initial = grad.first.len() == 1 || author.first.len() == 1;
    if one_is_initial
        && grad.first_initial() == author.first_initial()
        && grad.has_complete_middle()
        && author.has_complete_middle()
        && grad.middle == author.middle
        && jaro_winkler(&grad.full(), &author.full()) > jw_threshold
    {
        return MatchClass::InitialBased;
    }
    MatchClass::Incompatible
}

pub fn names_compatible(grad: &NameParts, author: &NameParts, nicknames: &NicknameTable) -> MatchClass {
    names_compatible_with(grad, author, nicknames, DEFAULT_JW_THRESHOLD)
}

/// Name counts over the corpus graduates. Unparseable names are skipped
/// (ingestion already rejects them).
pub fn build_frequencies(corpus: &Corpus) -> NameFrequencies {
    let parsed: Vec<NameParts> = corpus
        .graduates
        .values()
        .filter_map(|g| parse_name(&g.raw_name).ok())
        .collect();
    NameFrequencies::from_names(&parsed)
}

/// Parsed names and matching parameters shared by blocking and feature assembly.
#[derive(Debug, Clone)]
pub struct NameKit {
    pub nicknames: NicknameTable,
    pub frequencies: NameFrequencies,
    pub jw_threshold: f64,
    pub graduates: BTreeMap<String, NameParts>,
}

impl NameKit {
    pub fn build(corpus: &Corpus, nicknames: NicknameTable, jw_threshold: f64) -> Self {
        let graduates = corpus
            .graduates
            .iter()
            .filter_map(|(id, g)| parse_name(&g.raw_name).ok().map(|p| (id.clone(), p)))
            .collect();
        NameKit {
            nicknames,
            frequencies: build_frequencies(corpus),
            jw_threshold,
            graduates,
        }
    }

    pub fn compatible(&self, grad: &NameParts, author: &NameParts) -> MatchClass {
        names_compatible_with(grad, author, &self.nicknames, self.jw_threshold)
    }

    /// Strongest class over an authorship's display and raw names.
    pub fn compatible_authorship(&self, grad: &NameParts, display: &str, raw: &str) -> MatchClass {
        [display, raw]
            .iter()
            .filter_map(|n| parse_name(n).ok())
            .map(|a| self.compatible(grad, &a))
            .max()
            .unwrap_or(MatchClass::Incompatible)
    }
}
