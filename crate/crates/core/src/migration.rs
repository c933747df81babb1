//! Annual location series and migration event detection.
//!
//! A graduate's series counts, for each year relative to graduation, the
//! distinct countries on each linked publication. A year is foreign when
//! non-US counts outnumber US counts. A migration is a run of at least `k`
//! consecutive foreign years after graduation.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytics::ConfusionMatrix;
use crate::geo::CountryAssignments;
use crate::linkmodel::AcceptedLink;
use crate::par;
use crate::records::Corpus;

pub const HOME_COUNTRY: &str = "US";
pub const SERIES_START: i32 = -5;
pub const SERIES_END: i32 = 15;
/// Onsets can only fall in `ONSET_START..=SERIES_END`.
pub const ONSET_START: i32 = 0;
pub const DEFAULT_THRESHOLDS: [f64; 4] = [0.5, 0.6, 0.7, 0.8];
pub const DEFAULT_PERSISTENCE: [u32; 4] = [1, 2, 3, 4];
pub const DEFAULT_STRATA: [usize; 3] = [5, 10, 15];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YearStatus {
    Unknown,
    Domestic,
    Foreign,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearCounts {
    pub countries: BTreeMap<String, u32>,
}

impl YearCounts {
    pub fn add(&mut self, country: &str) {
        *self.countries.entry(country.to_string()).or_default() += 1;
    }

    pub fn home(&self) -> u32 {
        self.countries.get(HOME_COUNTRY).copied().unwrap_or(0)
    }

    pub fn foreign(&self) -> u32 {
        self.countries
            .iter()
            .filter(|(c, _)| c.as_str() != HOME_COUNTRY)
            .map(|(_, n)| n)
            .sum()
    }

    pub fn status(&self) -> YearStatus {
        let (home, foreign) = (self.home(), self.foreign());
        if home + foreign == 0 {
            YearStatus::Unknown
        } else if foreign > home {
            YearStatus::Foreign
        } else {
            YearStatus::Domestic
        }
    }

    /// Most frequent non-US country, alphabetical on ties.
    pub fn modal_foreign(&self) -> Option<&str> {
        let mut best: Option<(&str, u32)> = None;
        for (c, &n) in &self.countries {
            if c == HOME_COUNTRY || n == 0 {
                continue;
            }
            if best.is_none_or(|(_, b)| n > b) {
                best = Some((c, n));
            }
        }
        best.map(|(c, _)| c)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LocationSeries {
    pub graduate_id: String,
    pub prob_threshold: f64,
    /// Keyed by relative year; only years with counts are present.
    pub years: BTreeMap<i32, YearCounts>,
}

impl LocationSeries {
    pub fn new(graduate_id: &str, prob_threshold: f64) -> Self {
        LocationSeries {
            graduate_id: graduate_id.to_string(),
            prob_threshold,
            years: BTreeMap::new(),
        }
    }

    /// Adds one count; years outside the series window are ignored.
    pub fn add(&mut self, relative_year: i32, country: &str) {
        if (SERIES_START..=SERIES_END).contains(&relative_year) {
            self.years.entry(relative_year).or_default().add(country);
        }
    }

    pub fn status(&self, relative_year: i32) -> YearStatus {
        self.years
            .get(&relative_year)
            .map_or(YearStatus::Unknown, YearCounts::status)
    }
}

/// Series from the links whose stage-2 probability reaches `prob_threshold`.
/// Each publication adds one count per distinct country on the linked authorship.
pub fn build_series(
    graduate_id: &str,
    grad_year: i32,
    links: &[&AcceptedLink],
    corpus: &Corpus,
    countries: &CountryAssignments,
    prob_threshold: f64,
) -> LocationSeries {
    let mut series = LocationSeries::new(graduate_id, prob_threshold);
    for link in links.iter().filter(|l| l.p2 >= prob_threshold) {
        let Some(p) = corpus.publications.get(&link.pub_id) else {
            continue;
        };
        let Some(set) = countries.get(&link.pub_id, link.author_position) else {
            continue;
        };
        for c in set {
            series.add(p.pub_year - grad_year, c);
        }
    }
    series
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MigrationEvent {
    pub graduate_id: String,
    pub migrated: bool,
    pub onset_relative_year: Option<i32>,
    pub destination: Option<String>,
    pub prob_threshold: f64,
    pub k: u32,
}

/// Longest run of consecutive foreign years in `ONSET_START..=SERIES_END`,
/// earliest on ties, as `(start, length)`.
pub fn longest_foreign_run(series: &LocationSeries) -> Option<(i32, u32)> {
    let mut best: Option<(i32, u32)> = None;
    let mut current: Option<(i32, u32)> = None;
    for y in ONSET_START..=SERIES_END {
        if series.status(y) == YearStatus::Foreign {
            let (start, len) = current.unwrap_or((y, 0));
            current = Some((start, len + 1));
            let run = current.unwrap();
            if best.is_none_or(|(_, l)| run.1 > l) {
                best = Some(run);
            }
        } else {
            current = None;
        }
    }
    best
}

pub fn detect_migration(series: &LocationSeries, k: u32) -> MigrationEvent {
    let mut event = MigrationEvent {
        graduate_id: series.graduate_id.clone(),
        migrated: false,
        onset_relative_year: None,
        destination: None,
        prob_threshold: series.prob_threshold,
        k,
    };
    if let Some((start, len)) = longest_foreign_run(series) {
        if len >= k {
            event.migrated = true;
            event.onset_relative_year = Some(start);
            event.destination = series.years[&start].modal_foreign().map(str::to_string);
        }
    }
    event
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MigrationParams {
    pub prob_threshold: f64,
    pub k: u32,
}

impl MigrationParams {
    pub fn new(prob_threshold: f64, k: u32) -> Self {
        MigrationParams { prob_threshold, k }
    }

    pub fn matches(&self, other: &MigrationParams) -> bool {
        self.k == other.k && (self.prob_threshold - other.prob_threshold).abs() < 1e-9
    }
}

/// Events for every `(threshold, k)` pair, in threshold-major order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EventGrid {
    pub cells: Vec<(MigrationParams, BTreeMap<String, MigrationEvent>)>,
}

impl EventGrid {
    pub fn get(&self, params: &MigrationParams) -> Option<&BTreeMap<String, MigrationEvent>> {
        self.cells.iter().find(|(p, _)| p.matches(params)).map(|(_, e)| e)
    }

    pub fn params(&self) -> Vec<MigrationParams> {
        self.cells.iter().map(|(p, _)| *p).collect()
    }
}

/// Detects events for every graduate under every parametrization.
pub fn detect_all(
    corpus: &Corpus,
    links: &[AcceptedLink],
    countries: &CountryAssignments,
    thresholds: &[f64],
    persistence: &[u32],
) -> EventGrid {
    let mut by_grad: BTreeMap<&str, Vec<&AcceptedLink>> = BTreeMap::new();
    for l in links {
        by_grad.entry(&l.graduate_id).or_default().push(l);
    }
    let grads: Vec<_> = corpus.graduates.values().collect();
    let per_grad = par::map(&grads, |g| {
        let glinks = by_grad.get(g.graduate_id.as_str()).map(Vec::as_slice).unwrap_or(&[]);
        let mut out = Vec::with_capacity(thresholds.len() * persistence.len());
        for &t in thresholds {
            let series = build_series(&g.graduate_id, g.grad_year, glinks, corpus, countries, t);
            for &k in persistence {
                out.push(detect_migration(&series, k));
            }
        }
        out
    });
    let mut cells: Vec<(MigrationParams, BTreeMap<String, MigrationEvent>)> = thresholds
        .iter()
        .flat_map(|&t| {
            persistence
                .iter()
                .map(move |&k| (MigrationParams::new(t, k), BTreeMap::new()))
        })
        .collect();
    for events in per_grad {
        for (cell, e) in cells.iter_mut().zip(events) {
            cell.1.insert(e.graduate_id.clone(), e);
        }
    }
    EventGrid { cells }
}

/// Ground truth from employment histories: migrated when a non-US stint
/// starts within `[grad_year, grad_year + SERIES_END]`.
pub fn ground_truth(corpus: &Corpus) -> BTreeMap<String, bool> {
    let mut out = BTreeMap::new();
    for (gid, stints) in &corpus.employment_histories {
        let Some(g) = corpus.graduates.get(gid) else {
            continue;
        };
        let migrated = stints
            .iter()
            .any(|s| s.country != HOME_COUNTRY && (g.grad_year..=g.grad_year + SERIES_END).contains(&s.start_year));
        out.insert(gid.clone(), migrated);
    }
    out
}

/// Accepted links per graduate at the base stage-2 threshold.
pub fn publication_counts(links: &[AcceptedLink]) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for l in links {
        *out.entry(l.graduate_id.clone()).or_default() += 1;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub params: MigrationParams,
    pub min_pubs: usize,
    pub confusion: ConfusionMatrix,
    /// `None` when undefined (empty stratum or zero denominator).
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSelection {
    pub base: MigrationParams,
    pub high_precision: MigrationParams,
    pub high_recall: MigrationParams,
}

impl Default for GridSelection {
    fn default() -> Self {
        let p = MigrationParams::new(0.7, 2);
        GridSelection {
            base: p,
            high_precision: p,
            high_recall: p,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MigrationGrid {
    pub thresholds: Vec<f64>,
    pub persistence: Vec<u32>,
    pub strata: Vec<usize>,
    pub cells: Vec<GridCell>,
    /// Strata with no labeled graduates.
    pub empty_strata: Vec<usize>,
    pub selection: GridSelection,
}

fn metric(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn cell_metrics(cm: &ConfusionMatrix) -> (Option<f64>, Option<f64>, Option<f64>) {
    let p = metric(cm.tp, cm.tp + cm.fp);
    let r = metric(cm.tp, cm.tp + cm.fn_);
    let f1 = match (p, r) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        (Some(_), Some(_)) => Some(0.0),
        _ => None,
    };
    (p, r, f1)
}

fn argmax(cells: &[&GridCell], key: impl Fn(&GridCell) -> Option<f64>) -> Option<MigrationParams> {
    let mut best: Option<(MigrationParams, f64)> = None;
    for c in cells {
        if let Some(v) = key(c) {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((c.params, v));
            }
        }
    }
    best.map(|(p, _)| p)
}

/// Scores every grid cell against ground truth within each publication-count
/// stratum, then picks the base, high-precision and high-recall cells from the
/// first stratum (first cell in grid order on ties).
pub fn grid_validate(
    grid: &EventGrid,
    truth: &BTreeMap<String, bool>,
    pub_counts: &BTreeMap<String, usize>,
    strata: &[usize],
) -> MigrationGrid {
    let jobs: Vec<(usize, usize)> = (0..grid.cells.len())
        .flat_map(|c| strata.iter().map(move |&s| (c, s)))
        .collect();
    let cells = par::map(&jobs, |&(ci, min_pubs)| {
        let (params, events) = &grid.cells[ci];
        let mut cm = ConfusionMatrix::default();
        for (gid, &actual) in truth {
            if pub_counts.get(gid).copied().unwrap_or(0) < min_pubs {
                continue;
            }
            let predicted = events.get(gid).is_some_and(|e| e.migrated);
            cm.record(predicted, actual);
        }
        let (precision, recall, f1) = cell_metrics(&cm);
        GridCell {
            params: *params,
            min_pubs,
            confusion: cm,
            precision,
            recall,
            f1,
        }
    });
    let empty_strata: Vec<usize> = strata
        .iter()
        .copied()
        .filter(|&s| {
            cells
                .iter()
                .filter(|c| c.min_pubs == s)
                .all(|c| c.confusion.total() == 0)
        })
        .collect();
    let mut selection = GridSelection::default();
    if let Some(&first) = strata.first() {
        let primary: Vec<&GridCell> = cells.iter().filter(|c| c.min_pubs == first).collect();
        if let Some(p) = argmax(&primary, |c| c.f1) {
            selection.base = p;
        }
        if let Some(p) = argmax(&primary, |c| c.precision) {
            selection.high_precision = p;
        }
        if let Some(p) = argmax(&primary, |c| c.recall) {
            selection.high_recall = p;
        }
    }
    let mut thresholds: Vec<f64> = Vec::new();
    let mut persistence: Vec<u32> = Vec::new();
    for (p, _) in &grid.cells {
        if !thresholds.iter().any(|t| (t - p.prob_threshold).abs() < 1e-9) {
            thresholds.push(p.prob_threshold);
        }
        if !persistence.contains(&p.k) {
            persistence.push(p.k);
        }
    }
    MigrationGrid {
        thresholds,
        persistence,
        strata: strata.to_vec(),
        cells,
        empty_strata,
        selection,
    }
}

type MetricFn = fn(&GridCell) -> Option<f64>;

impl MigrationGrid {
    pub fn cell(&self, params: &MigrationParams, min_pubs: usize) -> Option<&GridCell> {
        self.cells
            .iter()
            .find(|c| c.min_pubs == min_pubs && c.params.matches(params))
    }

    /// Writes `grid_<metric>_ge<n>.csv` matrices (rows: thresholds, columns: k).
    /// Undefined cells are left empty.
    pub fn write_csv(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>, csv::Error> {
        std::fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        let metrics: [(&str, MetricFn); 3] = [
            ("precision", |c| c.precision),
            ("recall", |c| c.recall),
            ("f1", |c| c.f1),
        ];
        for &stratum in &self.strata {
            for (name, get) in metrics {
                let path = dir.join(format!("grid_{name}_ge{stratum}.csv"));
                let mut w = csv::Writer::from_path(&path)?;
                let mut header = vec!["threshold".to_string()];
                header.extend(self.persistence.iter().map(|k| format!("k{k}")));
                w.write_record(&header)?;
                for &t in &self.thresholds {
                    let mut row = vec![format!("{t}")];
                    for &k in &self.persistence {
                        let v = self.cell(&MigrationParams::new(t, k), stratum).and_then(get);
                        row.push(v.map(|v| format!("{v}")).unwrap_or_default());
                    }
                    w.write_record(&row)?;
                }
                w.flush()?;
                paths.push(path);
            }
        }
        Ok(paths)
    }
}
