use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use regex::Regex;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use super::GeoError;
use crate::migration::HOME_COUNTRY;

pub const DEFAULT_COUNTRIES: &str = include_str!("../../data/countries.txt");
pub const DEFAULT_STATES: &str = include_str!("../../data/us_states.txt");
pub const DEFAULT_UNIVERSITIES: &str = include_str!("../../data/universities.txt");
pub const DEFAULT_ISO_CODES: &str = include_str!("../../data/iso3166.txt");

/// Strips accents, collapses whitespace and trims.
pub fn normalize_affiliation(s: &str) -> String {
    let folded: String = s.nfkd().filter(|c| !is_combining_mark(*c)).collect();
    folded.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum HitKind {
    Country,
    State,
    University,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Hit {
    start: usize,
    end: usize,
    kind: HitKind,
    code: String,
}

#[derive(Debug, Clone)]
struct PatternSet {
    regex: Option<Regex>,
    codes: BTreeMap<String, String>,
}

impl PatternSet {
    fn build(entries: &[(String, String)]) -> Self {
        let mut names: Vec<&str> = entries.iter().map(|(n, _)| n.as_str()).collect();
        names.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        names.dedup();
        let alternatives: Vec<String> = names
            .iter()
            .map(|n| {
                let lead = if n.starts_with(|c: char| c.is_alphanumeric()) {
                    r"\b"
                } else {
                    ""
                };
                let tail = if n.ends_with(|c: char| c.is_alphanumeric()) {
                    r"\b"
                } else {
                    ""
                };
                format!("{lead}{}{tail}", regex::escape(n))
            })
            .collect();
        let regex = (!alternatives.is_empty())
            .then(|| Regex::new(&format!("(?i)(?:{})", alternatives.join("|"))).expect("escaped gazetteer pattern"));
        let codes = entries.iter().map(|(n, c)| (n.to_lowercase(), c.clone())).collect();
        PatternSet { regex, codes }
    }

    fn hits(&self, text: &str, kind: HitKind, out: &mut Vec<Hit>) {
        let Some(re) = &self.regex else { return };
        for m in re.find_iter(text) {
            if let Some(code) = self.codes.get(&m.as_str().to_lowercase()) {
                out.push(Hit {
                    start: m.start(),
                    end: m.end(),
                    kind,
                    code: code.clone(),
                });
            }
        }
    }
}

/// Regex gazetteer over country names, US states and universities.
///
/// All matches are collected and any match lying strictly inside a longer
/// one is discarded ("New Mexico" hides "Mexico"). Among the rest, the
/// rightmost country name wins, then any US state, then the rightmost
/// university.
#[derive(Debug, Clone)]
pub struct Gazetteer {
    countries: PatternSet,
    states: PatternSet,
    postal: Option<Regex>,
    universities: PatternSet,
    iso: BTreeSet<String>,
}

fn data_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

impl Gazetteer {
    /// Builds from the text formats of the bundled files:
    /// `CODE|name|alias...` for countries, `name|POSTAL` for states,
    /// `name|CODE` for universities and one code per line for ISO codes.
    pub fn from_texts(countries: &str, states: &str, universities: &str, iso_codes: &str) -> Result<Self, GeoError> {
        let iso: BTreeSet<String> = data_lines(iso_codes).map(str::to_ascii_uppercase).collect();
        let check = |code: &str, source: &str| {
            if iso.contains(code) {
                Ok(code.to_string())
            } else {
                Err(GeoError::InvalidGazetteer(format!(
                    "{source}: `{code}` is not an ISO 3166 alpha-2 code"
                )))
            }
        };
        let mut country_entries = Vec::new();
        for line in data_lines(countries) {
            let mut parts = line.split('|').map(str::trim);
            let code = check(&parts.next().unwrap_or("").to_ascii_uppercase(), "countries")?;
            for name in parts.filter(|n| !n.is_empty()) {
                country_entries.push((normalize_affiliation(name), code.clone()));
            }
        }
        let mut state_entries = Vec::new();
        let mut postal_codes = BTreeSet::new();
        for line in data_lines(states) {
            let (name, postal) = line
                .split_once('|')
                .ok_or_else(|| GeoError::InvalidGazetteer(format!("states: malformed line `{line}`")))?;
            state_entries.push((normalize_affiliation(name), HOME_COUNTRY.to_string()));
            postal_codes.insert(postal.trim().to_ascii_uppercase());
        }
        let mut uni_entries = Vec::new();
        for line in data_lines(universities) {
            let (name, code) = line
                .rsplit_once('|')
                .ok_or_else(|| GeoError::InvalidGazetteer(format!("universities: malformed line `{line}`")))?;
            uni_entries.push((
                normalize_affiliation(name),
                check(&code.trim().to_ascii_uppercase(), "universities")?,
            ));
        }
        let postal = (!postal_codes.is_empty()).then(|| {
            let alts: Vec<&str> = postal_codes.iter().map(String::as_str).collect();
            Regex::new(&format!(r"\b(?:{})\s+\d{{5}}(?:-\d{{4}})?\b", alts.join("|"))).expect("postal pattern")
        });
        Ok(Gazetteer {
            countries: PatternSet::build(&country_entries),
            states: PatternSet::build(&state_entries),
            postal,
            universities: PatternSet::build(&uni_entries),
            iso,
        })
    }

    pub fn bundled() -> Self {
        Self::from_texts(
            DEFAULT_COUNTRIES,
            DEFAULT_STATES,
            DEFAULT_UNIVERSITIES,
            DEFAULT_ISO_CODES,
        )
        .expect("bundled gazetteer is valid")
    }

    /// Loads `countries.txt`, `us_states.txt`, `universities.txt` and
    /// `iso3166.txt` from a directory.
    pub fn load_dir(dir: &Path) -> Result<Self, GeoError> {
        let read = |name: &str| std::fs::read_to_string(dir.join(name));
        Self::from_texts(
            &read("countries.txt")?,
            &read("us_states.txt")?,
            &read("universities.txt")?,
            &read("iso3166.txt")?,
        )
    }

    pub fn is_valid_code(&self, code: &str) -> bool {
        self.iso.contains(code)
    }

    pub fn resolve(&self, affiliation: &str) -> Option<String> {
        let text = normalize_affiliation(affiliation);
        let mut hits = Vec::new();
        self.countries.hits(&text, HitKind::Country, &mut hits);
        self.states.hits(&text, HitKind::State, &mut hits);
        if let Some(re) = &self.postal {
            for m in re.find_iter(&text) {
                hits.push(Hit {
                    start: m.start(),
                    end: m.end(),
                    kind: HitKind::State,
                    code: HOME_COUNTRY.to_string(),
                });
            }
        }
        self.universities.hits(&text, HitKind::University, &mut hits);
        let kept: Vec<&Hit> = hits
            .iter()
            .filter(|h| {
                !hits
                    .iter()
                    .any(|o| o.start <= h.start && h.end <= o.end && o.end - o.start > h.end - h.start)
            })
            .collect();
        [HitKind::Country, HitKind::State, HitKind::University]
            .iter()
            .find_map(|&kind| kept.iter().filter(|h| h.kind == kind).max_by_key(|h| h.start))
            .map(|h| h.code.clone())
    }
}
