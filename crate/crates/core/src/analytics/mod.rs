//! Classification metrics, stratified error rates, cohort emigration shares,
//! stayer/leaver comparisons and patent-citation share series.

mod citations;
mod cohort;
mod compare;
mod metrics;
mod stratified;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

pub use citations::{
    categorize, citation_shares, CategoryTag, CitationShareSeries, DestinationShareRow, ScienceCategory, ShareRow,
};
pub use cohort::{
    cohort_emigration, left_within, AbsentCell, CohortCell, CohortConfig, CohortGraduate, CohortSeries,
    DestinationCell, EventSets, FieldCell, DEFAULT_DATA_END_YEAR, DEFAULT_HORIZONS,
};
pub use compare::{group_compare, GraduateOutcome, GroupComparison, GroupSummary, MeasureSummary, MEASURES};
pub use metrics::{classification_metrics, log_loss, roc_auc, ConfusionMatrix, MetricReport, LOG_LOSS_EPS};
pub use stratified::{rate_bin, stratified_error_rates, GroupErrors, LabeledMatch, StratifiedErrors, HISTOGRAM_BINS};

use crate::geo::CountryAssignments;
use crate::linkmodel::AcceptedLink;
use crate::migration::{MigrationEvent, HOME_COUNTRY};
use crate::records::Corpus;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("length mismatch: {0} scores vs {1} labels")]
    LengthMismatch(usize, usize),
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("series overlap in {0} years; at least 3 required")]
    InsufficientOverlap(usize),
    #[error("series has zero variance over the overlapping years")]
    ZeroVariance,
    #[error("group `{0}` is empty")]
    EmptyGroup(&'static str),
}

/// Pearson correlation over the years present in both series.
pub fn series_correlation(a: &BTreeMap<i32, f64>, b: &BTreeMap<i32, f64>) -> Result<f64, AnalyticsError> {
    let pairs: Vec<(f64, f64)> = a.iter().filter_map(|(y, &x)| b.get(y).map(|&v| (x, v))).collect();
    if pairs.len() < 3 {
        return Err(AnalyticsError::InsufficientOverlap(pairs.len()));
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in &pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(AnalyticsError::ZeroVariance);
    }
    Ok(sxy / (sxx.sqrt() * syy.sqrt()))
}

pub const DEFAULT_REGIONS: &str = include_str!("../../data/regions.txt");
pub const OTHER_REGION: &str = "Other";

/// Country code to world region. Unlisted countries map to `"Other"`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RegionMap {
    regions: BTreeMap<String, String>,
}

impl RegionMap {
    /// Parses `CODE,Region` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Self {
        let regions = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter_map(|l| l.split_once(','))
            .map(|(c, r)| (c.trim().to_ascii_uppercase(), r.trim().to_string()))
            .collect();
        RegionMap { regions }
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn bundled() -> Self {
        Self::parse(DEFAULT_REGIONS)
    }

    pub fn region(&self, code: &str) -> &str {
        self.regions.get(code).map(String::as_str).unwrap_or(OTHER_REGION)
    }
}

/// Graduates with at least `min_pubs` accepted links, as cohort inputs.
pub fn eligible_graduates(
    corpus: &Corpus,
    pub_counts: &BTreeMap<String, usize>,
    min_pubs: usize,
) -> Vec<CohortGraduate> {
    corpus
        .graduates
        .values()
        .filter(|g| pub_counts.get(&g.graduate_id).copied().unwrap_or(0) >= min_pubs)
        .map(|g| CohortGraduate {
            graduate_id: g.graduate_id.clone(),
            grad_year: g.grad_year,
            field: g.field.clone(),
            foreign_national: g.foreign_national,
        })
        .collect()
}

/// Outcomes over each graduate's linked publications from the graduation
/// year through `horizon - 1` years after. A leaver departed within `horizon`.
pub fn build_outcomes(
    corpus: &Corpus,
    links: &[AcceptedLink],
    events: &BTreeMap<String, MigrationEvent>,
    graduates: &[CohortGraduate],
    horizon: i32,
) -> Vec<GraduateOutcome> {
    let mut cited_by: BTreeMap<&str, u64> = BTreeMap::new();
    for p in corpus.publications.values() {
        for c in p.cited_pub_ids.iter().collect::<BTreeSet<_>>() {
            *cited_by.entry(c.as_str()).or_default() += 1;
        }
    }
    let mut patent_cites: BTreeMap<&str, u64> = BTreeMap::new();
    for c in &corpus.patent_citations {
        *patent_cites.entry(c.cited_pub_id.as_str()).or_default() += 1;
    }
    let mut pairs: BTreeMap<&str, u64> = BTreeMap::new();
    for p in &corpus.patent_paper_pairs {
        *pairs.entry(p.pub_id.as_str()).or_default() += 1;
    }
    let mut pubs_by_grad: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for l in links {
        pubs_by_grad.entry(&l.graduate_id).or_default().insert(&l.pub_id);
    }
    graduates
        .iter()
        .map(|g| {
            let mut o = GraduateOutcome {
                graduate_id: g.graduate_id.clone(),
                leaver: left_within(events.get(&g.graduate_id), horizon),
                publications: 0,
                citations: 0,
                patent_citations: 0,
                patent_pairs: 0,
            };
            for &pid in pubs_by_grad.get(g.graduate_id.as_str()).into_iter().flatten() {
                let Some(p) = corpus.publications.get(pid) else {
                    continue;
                };
                if !(0..horizon).contains(&(p.pub_year - g.grad_year)) {
                    continue;
                }
                o.publications += 1;
                o.citations += cited_by.get(pid).copied().unwrap_or(0);
                o.patent_citations += patent_cites.get(pid).copied().unwrap_or(0);
                o.patent_pairs += pairs.get(pid).copied().unwrap_or(0);
            }
            o
        })
        .collect()
}

/// Tags each cited publication with its science categories.
///
/// Linked publications take the category of each linked graduate. Unlinked
/// publications are non-US when every resolved authorship country is outside
/// the US (and at least one is resolved); otherwise they stay untagged.
pub fn categorize_publications(
    corpus: &Corpus,
    links: &[AcceptedLink],
    events: &BTreeMap<String, MigrationEvent>,
    countries: Option<&CountryAssignments>,
) -> BTreeMap<String, BTreeSet<CategoryTag>> {
    let mut out: BTreeMap<String, BTreeSet<CategoryTag>> = BTreeMap::new();
    for l in links {
        let (Some(p), Some(g)) = (corpus.publications.get(&l.pub_id), corpus.graduates.get(&l.graduate_id)) else {
            continue;
        };
        let event = events.get(&l.graduate_id).filter(|e| e.migrated);
        let onset = event.and_then(|e| e.onset_relative_year).map(|o| g.grad_year + o);
        let category = categorize(p.pub_year, onset);
        out.entry(l.pub_id.clone()).or_default().insert(CategoryTag {
            category,
            destination: event.and_then(|e| e.destination.clone()),
        });
    }
    if let Some(countries) = countries {
        for p in corpus.publications.values() {
            if out.contains_key(&p.pub_id) {
                continue;
            }
            let resolved: BTreeSet<&String> = p
                .authorships
                .iter()
                .filter_map(|a| countries.get(&p.pub_id, a.position))
                .flatten()
                .collect();
            if !resolved.is_empty() && resolved.iter().all(|c| c.as_str() != HOME_COUNTRY) {
                out.entry(p.pub_id.clone()).or_default().insert(CategoryTag {
                    category: ScienceCategory::NonUs,
                    destination: None,
                });
            }
        }
    }
    out
}

/// Writes rows as a CSV table with a header taken from the row fields.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), csv::Error> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_and_negated() {
        let a: BTreeMap<i32, f64> = [(1, 1.0), (2, 3.0), (3, 4.0), (4, 9.0)].into();
        let b: BTreeMap<i32, f64> = a.iter().map(|(&y, &x)| (y, 2.0 * x + 1.0)).collect();
        let c: BTreeMap<i32, f64> = a.iter().map(|(&y, &x)| (y, -x)).collect();
        assert!((series_correlation(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        assert!((series_correlation(&a, &c).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn correlation_errors() {
        let a: BTreeMap<i32, f64> = [(1, 1.0), (2, 2.0)].into();
        assert_eq!(series_correlation(&a, &a), Err(AnalyticsError::InsufficientOverlap(2)));
        let flat: BTreeMap<i32, f64> = [(1, 1.0), (2, 1.0), (3, 1.0)].into();
        let b: BTreeMap<i32, f64> = [(1, 1.0), (2, 2.0), (3, 5.0)].into();
        assert_eq!(series_correlation(&flat, &b), Err(AnalyticsError::ZeroVariance));
    }

    #[test]
    fn regions_default_other() {
        let r = RegionMap::parse("CN,Asia\n# comment\nde, Europe\n");
        assert_eq!(r.region("CN"), "Asia");
        assert_eq!(r.region("DE"), "Europe");
        assert_eq!(r.region("BR"), OTHER_REGION);
    }
}
