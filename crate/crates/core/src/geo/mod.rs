//! Affiliation strings to ISO country codes: a regex gazetteer first, then an
//! external classifier for what the gazetteer misses, with a persistent cache.

mod cache;
mod fallback;
mod gazetteer;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cache::{cache_key, CacheEntry, GeoCache};
#[cfg(feature = "http")]
pub use fallback::HttpClassifier;
pub use fallback::{
    ClassifyAnswer, ClassifyItem, ClassifyRequest, ClassifyResponse, CountryClassifier, MockClassifier, RateLimited,
    API_KEY_ENV, URL_ENV,
};
pub use gazetteer::{
    normalize_affiliation, Gazetteer, DEFAULT_COUNTRIES, DEFAULT_ISO_CODES, DEFAULT_STATES, DEFAULT_UNIVERSITIES,
};

use crate::jsonl;
use crate::par;
use crate::records::Corpus;

pub const DEFAULT_BATCH_SIZE: usize = 50;

#[derive(Debug, Error)]
pub enum GeoError {
    #[error("invalid gazetteer: {0}")]
    InvalidGazetteer(String),
    #[error("country classifier unavailable: {0}")]
    ClientUnavailable(String),
    #[error("malformed classifier response: {0}")]
    MalformedResponse(String),
    #[error("geo cache: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolutionMethod {
    Gazetteer,
    Fallback,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionResult {
    pub affiliation_string: String,
    pub country: Option<String>,
    pub method: ResolutionMethod,
    pub cached: bool,
}

impl ResolutionResult {
    fn unresolved(s: &str, cached: bool) -> Self {
        ResolutionResult {
            affiliation_string: s.to_string(),
            country: None,
            method: ResolutionMethod::Unresolved,
            cached,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FallbackStats {
    pub client_calls: usize,
    pub cache_hits: usize,
    pub warnings: Vec<String>,
}

/// Resolves strings through the cache and then the classifier in batches.
///
/// Valid and null answers are cached. Invalid codes, missing answers and
/// client failures leave the string unresolved, uncached and logged.
pub fn resolve_fallback(
    strings: &[String],
    client: Option<&dyn CountryClassifier>,
    gazetteer: &Gazetteer,
    cache: &mut GeoCache,
    batch_size: usize,
) -> Result<(Vec<ResolutionResult>, FallbackStats), GeoError> {
    let mut stats = FallbackStats::default();
    let mut results: BTreeMap<&str, ResolutionResult> = BTreeMap::new();
    let mut pending: BTreeMap<String, Vec<&str>> = BTreeMap::new();
    for s in strings {
        let key = cache_key(s);
        match cache.get(&key) {
            Some(country) => {
                stats.cache_hits += 1;
                let method = if country.is_some() {
                    ResolutionMethod::Fallback
                } else {
                    ResolutionMethod::Unresolved
                };
                results.insert(
                    s,
                    ResolutionResult {
                        affiliation_string: s.clone(),
                        country: country.clone(),
                        method,
                        cached: true,
                    },
                );
            }
            None => pending.entry(key).or_default().push(s),
        }
    }
    let pending: Vec<(String, Vec<&str>)> = pending.into_iter().collect();
    let mut unavailable = client.is_none();
    for batch in pending.chunks(batch_size.max(1)) {
        if unavailable {
            for (_, ss) in batch {
                for s in ss {
                    results.insert(s, ResolutionResult::unresolved(s, false));
                }
            }
            continue;
        }
        let client = client.expect("checked above");
        let items: Vec<ClassifyItem> = batch
            .iter()
            .map(|(key, ss)| ClassifyItem {
                string_id: key.clone(),
                text: ss[0].to_string(),
            })
            .collect();
        stats.client_calls += 1;
        let answers = match client.classify(&items) {
            Ok(a) => a,
            Err(e) => {
                let msg = format!("fallback batch failed: {e}");
                warn!("{msg}");
                stats.warnings.push(msg);
                if matches!(e, GeoError::ClientUnavailable(_)) {
                    unavailable = true;
                }
                for (_, ss) in batch {
                    for s in ss {
                        results.insert(s, ResolutionResult::unresolved(s, false));
                    }
                }
                continue;
            }
        };
        let answers: BTreeMap<&str, &Option<String>> = answers
            .iter()
            .map(|a| (a.string_id.as_str(), &a.country_code))
            .collect();
        let mut fresh = Vec::new();
        for (key, ss) in batch {
            let country = match answers.get(key.as_str()) {
                None => {
                    let msg = format!("no answer for `{}`", ss[0]);
                    warn!("{msg}");
                    stats.warnings.push(msg);
                    None
                }
                Some(Some(code)) if !gazetteer.is_valid_code(&code.to_ascii_uppercase()) => {
                    let msg = format!("invalid country code `{code}` for `{}`", ss[0]);
                    warn!("{msg}");
                    stats.warnings.push(msg);
                    None
                }
                Some(answer) => {
                    let answer = answer.as_ref().map(|c| c.to_ascii_uppercase());
                    fresh.push(CacheEntry {
                        key: key.clone(),
                        country: answer.clone(),
                    });
                    answer
                }
            };
            for s in ss {
                let r = match &country {
                    Some(c) => ResolutionResult {
                        affiliation_string: s.to_string(),
                        country: Some(c.clone()),
                        method: ResolutionMethod::Fallback,
                        cached: false,
                    },
                    None => ResolutionResult::unresolved(s, false),
                };
                results.insert(s, r);
            }
        }
        cache.append(&fresh)?;
    }
    let ordered = strings.iter().map(|s| results[s.as_str()].clone()).collect();
    Ok((ordered, stats))
}

/// Per-authorship sets of resolved countries.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountryAssignments {
    by_pub: BTreeMap<String, BTreeMap<u32, BTreeSet<String>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentRow {
    pub pub_id: String,
    pub author_position: u32,
    pub countries: BTreeSet<String>,
}

impl CountryAssignments {
    pub fn insert(&mut self, pub_id: &str, position: u32, countries: BTreeSet<String>) {
        self.by_pub
            .entry(pub_id.to_string())
            .or_default()
            .insert(position, countries);
    }

    pub fn get(&self, pub_id: &str, position: u32) -> Option<&BTreeSet<String>> {
        self.by_pub.get(pub_id)?.get(&position)
    }

    pub fn rows(&self) -> impl Iterator<Item = AssignmentRow> + '_ {
        self.by_pub.iter().flat_map(|(p, m)| {
            m.iter().map(move |(&pos, cs)| AssignmentRow {
                pub_id: p.clone(),
                author_position: pos,
                countries: cs.clone(),
            })
        })
    }

    pub fn len(&self) -> usize {
        self.by_pub.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn write_jsonl(&self, path: &Path) -> std::io::Result<()> {
        jsonl::write_records(path, self.rows())
    }

    pub fn read_jsonl(path: &Path) -> std::io::Result<Self> {
        let mut out = CountryAssignments::default();
        for (_, line) in jsonl::read_lines(path)? {
            let r: AssignmentRow = serde_json::from_str(&line)?;
            out.insert(&r.pub_id, r.author_position, r.countries);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResolutionReport {
    pub unique_strings: usize,
    pub gazetteer_resolved: usize,
    pub fallback_resolved: usize,
    pub unresolved: usize,
    pub gazetteer_rate: f64,
    pub fallback_rate: f64,
    pub total_rate: f64,
    pub client_calls: usize,
    pub cache_hits: usize,
    pub warnings: Vec<String>,
}

/// Non-empty `;`-separated segments of an affiliation field.
pub fn affiliation_segments(field: &str) -> impl Iterator<Item = &str> {
    field.split(';').map(str::trim).filter(|s| !s.is_empty())
}

/// Resolves every unique affiliation segment in parallel against the
/// gazetteer, sends the rest to the classifier, and joins countries back to
/// authorships.
pub fn resolve_strings(
    unique: &[String],
    gazetteer: &Gazetteer,
    client: Option<&dyn CountryClassifier>,
    cache: &mut GeoCache,
    batch_size: usize,
) -> Result<(Vec<ResolutionResult>, ResolutionReport), GeoError> {
    let by_gazetteer = par::map(unique, |s| gazetteer.resolve(s));
    let leftovers: Vec<String> = unique
        .iter()
        .zip(&by_gazetteer)
        .filter(|(_, c)| c.is_none())
        .map(|(s, _)| s.clone())
        .collect();
    let (fallback, stats) = if leftovers.is_empty() {
        (Vec::new(), FallbackStats::default())
    } else {
        resolve_fallback(&leftovers, client, gazetteer, cache, batch_size)?
    };
    let mut fallback = fallback.into_iter();
    let results: Vec<ResolutionResult> = unique
        .iter()
        .zip(by_gazetteer)
        .map(|(s, c)| match c {
            Some(code) => ResolutionResult {
                affiliation_string: s.clone(),
                country: Some(code),
                method: ResolutionMethod::Gazetteer,
                cached: false,
            },
            None => fallback.next().expect("one fallback result per leftover"),
        })
        .collect();
    let count = |m: ResolutionMethod| results.iter().filter(|r| r.method == m).count();
    let n = unique.len();
    let rate = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    let (g, f) = (count(ResolutionMethod::Gazetteer), count(ResolutionMethod::Fallback));
    let report = ResolutionReport {
        unique_strings: n,
        gazetteer_resolved: g,
        fallback_resolved: f,
        unresolved: n - g - f,
        gazetteer_rate: rate(g),
        fallback_rate: rate(f),
        total_rate: rate(g + f),
        client_calls: stats.client_calls,
        cache_hits: stats.cache_hits,
        warnings: stats.warnings,
    };
    Ok((results, report))
}

pub fn resolve_corpus(
    corpus: &Corpus,
    gazetteer: &Gazetteer,
    client: Option<&dyn CountryClassifier>,
    cache: &mut GeoCache,
    batch_size: usize,
) -> Result<(CountryAssignments, Vec<ResolutionResult>, ResolutionReport), GeoError> {
    let unique: BTreeSet<&str> = corpus
        .publications
        .values()
        .flat_map(|p| {
            p.authorships
                .iter()
                .flat_map(|a| affiliation_segments(&a.affiliation_string))
        })
        .collect();
    let unique: Vec<String> = unique.into_iter().map(str::to_string).collect();
    let (results, report) = resolve_strings(&unique, gazetteer, client, cache, batch_size)?;
    let lookup: BTreeMap<&str, &Option<String>> = results
        .iter()
        .map(|r| (r.affiliation_string.as_str(), &r.country))
        .collect();
    let mut assignments = CountryAssignments::default();
    for p in corpus.publications.values() {
        for a in &p.authorships {
            let countries: BTreeSet<String> = affiliation_segments(&a.affiliation_string)
                .filter_map(|s| lookup.get(s).and_then(|c| (*c).clone()))
                .collect();
            assignments.insert(&p.pub_id, a.position, countries);
        }
    }
    Ok((assignments, results, report))
}
