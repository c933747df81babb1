use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use super::parse::NameParts;

/// Bundled nickname groups.
pub const DEFAULT_NICKNAMES: &str = include_str!("../../data/nicknames.txt");

/// First-name equivalences. Two names are equivalent when they share a
/// group line; the relation is symmetric and reflexive but not transitive.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NicknameTable {
    groups: BTreeMap<String, BTreeSet<String>>,
}

impl NicknameTable {
    /// Parses comma-separated group lines. `#` starts a comment line.
    pub fn parse(text: &str) -> Self {
        let mut groups: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let names: Vec<String> = line
                .split(',')
                .filter_map(|n| super::parse_name(n).ok())
                .map(|p| p.full().replace(' ', ""))
                .filter(|n| !n.is_empty())
                .collect();
            for a in &names {
                let entry = groups.entry(a.clone()).or_default();
                entry.extend(names.iter().cloned());
            }
        }
        NicknameTable { groups }
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn bundled() -> Self {
        Self::parse(DEFAULT_NICKNAMES)
    }

    /// All names equivalent to `name`, including `name` itself.
    pub fn nicknames(&self, name: &str) -> BTreeSet<String> {
        let mut out = self.groups.get(name).cloned().unwrap_or_default();
        out.insert(name.to_string());
        out
    }

    pub fn equivalent(&self, a: &str, b: &str) -> bool {
        a == b || self.groups.get(a).is_some_and(|g| g.contains(b))
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// True when the first names of the two parsed names are nickname-equivalent.
    pub fn first_names_equivalent(&self, a: &NameParts, b: &NameParts) -> bool {
        !a.first.is_empty() && !b.first.is_empty() && self.equivalent(&a.first, &b.first)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_and_reflexive() {
        let t = NicknameTable::bundled();
        assert!(t.equivalent("ROBERT", "BOB"));
        assert!(t.equivalent("BOB", "ROBERT"));
        assert!(t.nicknames("ROBERT").contains("ROBERT"));
        assert!(t.nicknames("ZEBEDEE").contains("ZEBEDEE"));
        for (a, group) in &t.groups {
            for b in group {
                assert!(t.equivalent(b, a), "{b} -> {a}");
            }
        }
    }

    #[test]
    fn not_transitive() {
        let t = NicknameTable::parse("ALEXANDER,ALEX\nALEXANDRA,ALEX\n");
        assert!(t.equivalent("ALEXANDER", "ALEX"));
        assert!(t.equivalent("ALEXANDRA", "ALEX"));
        assert!(!t.equivalent("ALEXANDER", "ALEXANDRA"));
    }

    #[test]
    fn normalises_entries() {
        let t = NicknameTable::parse("robert, bob\n");
        assert!(t.equivalent("BOB", "ROBERT"));
    }
}
