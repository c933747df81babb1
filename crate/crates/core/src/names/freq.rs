use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::parse::NameParts;

/// Name occurrence counts over the graduate corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NameFrequencies {
    pub first: BTreeMap<String, u64>,
    pub last: BTreeMap<String, u64>,
    pub full: BTreeMap<String, u64>,
}

impl NameFrequencies {
    pub fn from_names<'a>(names: impl IntoIterator<Item = &'a NameParts>) -> Self {
        let mut f = NameFrequencies::default();
        for n in names {
            if !n.first.is_empty() {
                *f.first.entry(n.first.clone()).or_default() += 1;
            }
            *f.last.entry(n.last.clone()).or_default() += 1;
            *f.full.entry(n.full()).or_default() += 1;
        }
        f
    }

    pub fn first_count(&self, n: &NameParts) -> u64 {
        self.first.get(&n.first).copied().unwrap_or(0)
    }

    pub fn last_count(&self, n: &NameParts) -> u64 {
        self.last.get(&n.last).copied().unwrap_or(0)
    }

    pub fn full_count(&self, n: &NameParts) -> u64 {
        self.full.get(&n.full()).copied().unwrap_or(0)
    }
}
