use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{normalize_affiliation, GeoError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifyItem {
    pub string_id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifyAnswer {
    pub string_id: String,
    pub country_code: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifyRequest {
    pub items: Vec<ClassifyItem>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifyResponse {
    pub results: Vec<ClassifyAnswer>,
}

/// External classifier for affiliation strings the gazetteer cannot place.
pub trait CountryClassifier {
    fn classify(&self, items: &[ClassifyItem]) -> Result<Vec<ClassifyAnswer>, GeoError>;
}

/// Deterministic file-backed classifier. Unknown strings get a null answer.
#[derive(Debug, Default)]
pub struct MockClassifier {
    mapping: BTreeMap<String, Option<String>>,
    calls: AtomicUsize,
    items: AtomicUsize,
}

impl MockClassifier {
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, Option<&'a str>)>) -> Self {
        MockClassifier {
            mapping: pairs
                .into_iter()
                .map(|(t, c)| (normalize_affiliation(t).to_lowercase(), c.map(str::to_string)))
                .collect(),
            ..Default::default()
        }
    }

    /// Tab-separated `text<TAB>code` lines; an empty or `-` code is a null answer.
    pub fn parse(text: &str) -> Self {
        Self::from_pairs(
            text.lines()
                .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
                .map(|l| {
                    let (t, c) = l.rsplit_once('\t').unwrap_or((l, ""));
                    let c = c.trim();
                    (t, (!c.is_empty() && c != "-").then_some(c))
                }),
        )
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    /// Number of `classify` calls so far.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn items_seen(&self) -> usize {
        self.items.load(Ordering::SeqCst)
    }
}

impl CountryClassifier for MockClassifier {
    fn classify(&self, items: &[ClassifyItem]) -> Result<Vec<ClassifyAnswer>, GeoError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.items.fetch_add(items.len(), Ordering::SeqCst);
        Ok(items
            .iter()
            .map(|i| ClassifyAnswer {
                string_id: i.string_id.clone(),
                country_code: self
                    .mapping
                    .get(&normalize_affiliation(&i.text).to_lowercase())
                    .cloned()
                    .flatten(),
            })
            .collect())
    }
}

/// Spaces consecutive requests to an inner classifier at least `min_interval` apart.
pub struct RateLimited<C> {
    inner: C,
    min_interval: Duration,
    last: Mutex<Option<Instant>>,
}

impl<C: CountryClassifier> RateLimited<C> {
    pub fn new(inner: C, min_interval: Duration) -> Self {
        RateLimited {
            inner,
            min_interval,
            last: Mutex::new(None),
        }
    }
}

impl<C: CountryClassifier> CountryClassifier for RateLimited<C> {
    fn classify(&self, items: &[ClassifyItem]) -> Result<Vec<ClassifyAnswer>, GeoError> {
        let mut last = self.last.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(t) = *last {
            let elapsed = t.elapsed();
            if elapsed < self.min_interval {
                std::thread::sleep(self.min_interval - elapsed);
            }
        }
        let result = self.inner.classify(items);
        *last = Some(Instant::now());
        result
    }
}

pub const URL_ENV: &str = "LINKFORGE_GEO_URL";
pub const API_KEY_ENV: &str = "LINKFORGE_GEO_API_KEY";

/// JSON-over-HTTP classifier.
///
/// POSTs `{"items": [{"string_id", "text"}]}` and expects
/// `{"results": [{"string_id", "country_code"}]}` with `country_code` null
/// when the service cannot decide.
#[cfg(feature = "http")]
pub struct HttpClassifier {
    agent: ureq::Agent,
    url: String,
    api_key: Option<String>,
}

#[cfg(feature = "http")]
impl HttpClassifier {
    pub fn new(url: &str, api_key: Option<String>, timeout: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        HttpClassifier {
            agent,
            url: url.to_string(),
            api_key,
        }
    }

    /// Reads the endpoint and key from the environment; `None` without a URL.
    pub fn from_env(timeout: Duration) -> Option<Self> {
        let url = std::env::var(URL_ENV).ok().filter(|u| !u.is_empty())?;
        Some(Self::new(&url, std::env::var(API_KEY_ENV).ok(), timeout))
    }
}

#[cfg(feature = "http")]
impl CountryClassifier for HttpClassifier {
    fn classify(&self, items: &[ClassifyItem]) -> Result<Vec<ClassifyAnswer>, GeoError> {
        let body = ClassifyRequest { items: items.to_vec() };
        let mut req = self.agent.post(&self.url);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req
            .send_json(&body)
            .map_err(|e| GeoError::ClientUnavailable(e.to_string()))?;
        let parsed: ClassifyResponse = resp
            .body_mut()
            .read_json()
            .map_err(|e| GeoError::MalformedResponse(e.to_string()))?;
        Ok(parsed.results)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mock_maps_and_counts() {
        let m = MockClassifier::parse("Acad. Sin.\tTW\nNowhere Inst.\t-\n");
        let items = vec![
            ClassifyItem {
                string_id: "1".into(),
                text: "acad.  sin.".into(),
            },
            ClassifyItem {
                string_id: "2".into(),
                text: "Nowhere Inst.".into(),
            },
        ];
        let out = m.classify(&items).unwrap();
        assert_eq!(out[0].country_code.as_deref(), Some("TW"));
        assert_eq!(out[1].country_code, None);
        assert_eq!((m.calls(), m.items_seen()), (1, 2));
    }

    #[test]
    fn rate_limit_spaces_calls() {
        let r = RateLimited::new(MockClassifier::default(), Duration::from_millis(20));
        let t = Instant::now();
        r.classify(&[]).unwrap();
        r.classify(&[]).unwrap();
        assert!(t.elapsed() >= Duration::from_millis(20));
    }
}
