use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::migration::MigrationEvent;

use super::RegionMap;

pub const DEFAULT_HORIZONS: [i32; 3] = [5, 10, 15];
pub const DEFAULT_DATA_END_YEAR: i32 = 2024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortGraduate {
    pub graduate_id: String,
    pub grad_year: i32,
    pub field: String,
    pub foreign_national: Option<bool>,
}

/// Event maps for the three migration parametrizations.
#[derive(Debug, Clone, Copy)]
pub struct EventSets<'a> {
    pub base: &'a BTreeMap<String, MigrationEvent>,
    pub high_precision: &'a BTreeMap<String, MigrationEvent>,
    pub high_recall: &'a BTreeMap<String, MigrationEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortConfig {
    pub horizons: Vec<i32>,
    pub data_end_year: i32,
}

impl Default for CohortConfig {
    fn default() -> Self {
        CohortConfig {
            horizons: DEFAULT_HORIZONS.to_vec(),
            data_end_year: DEFAULT_DATA_END_YEAR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortCell {
    pub cohort: i32,
    pub horizon: i32,
    pub eligible: usize,
    pub migrants: usize,
    pub share: f64,
    /// Sensitivity band: min and max share over the three parametrizations.
    pub band_low: f64,
    pub band_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldCell {
    pub field: String,
    pub horizon: i32,
    pub eligible: usize,
    pub migrants: usize,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DestinationCell {
    /// First year of the graduation decade.
    pub decade: i32,
    pub region: String,
    pub horizon: i32,
    pub eligible: usize,
    pub migrants: usize,
    pub share: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbsentCell {
    pub cohort: i32,
    pub horizon: i32,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CohortSeries {
    pub cells: Vec<CohortCell>,
    /// Horizons that run past the last data year (too recent to observe).
    pub absent: Vec<AbsentCell>,
    pub foreign_national_share: BTreeMap<i32, f64>,
    pub fields: Vec<FieldCell>,
    pub destinations: Vec<DestinationCell>,
}

impl CohortSeries {
    pub fn cell(&self, cohort: i32, horizon: i32) -> Option<&CohortCell> {
        self.cells.iter().find(|c| c.cohort == cohort && c.horizon == horizon)
    }

    /// Base shares for one horizon, keyed by cohort.
    pub fn share_series(&self, horizon: i32) -> BTreeMap<i32, f64> {
        self.cells
            .iter()
            .filter(|c| c.horizon == horizon)
            .map(|c| (c.cohort, c.share))
            .collect()
    }
}

/// True when the event shows a departure no later than `horizon` years after graduation.
pub fn left_within(event: Option<&MigrationEvent>, horizon: i32) -> bool {
    event.is_some_and(|e| e.migrated && e.onset_relative_year.is_some_and(|o| o <= horizon))
}

fn share(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Emigration shares by graduation cohort and horizon over the given
/// (already eligibility-filtered) graduates.
pub fn cohort_emigration(
    graduates: &[CohortGraduate],
    events: EventSets<'_>,
    config: &CohortConfig,
    regions: &RegionMap,
) -> CohortSeries {
    let mut by_cohort: BTreeMap<i32, Vec<&CohortGraduate>> = BTreeMap::new();
    for g in graduates {
        by_cohort.entry(g.grad_year).or_default().push(g);
    }
    let mut out = CohortSeries::default();
    for (&cohort, grads) in &by_cohort {
        let known: Vec<bool> = grads.iter().filter_map(|g| g.foreign_national).collect();
        if !known.is_empty() {
            let fn_count = known.iter().filter(|&&f| f).count();
            out.foreign_national_share.insert(cohort, share(fn_count, known.len()));
        }
        for &h in &config.horizons {
            if cohort + h > config.data_end_year {
                out.absent.push(AbsentCell { cohort, horizon: h });
                continue;
            }
            let count = |set: &BTreeMap<String, MigrationEvent>| {
                grads.iter().filter(|g| left_within(set.get(&g.graduate_id), h)).count()
            };
            let migrants = count(events.base);
            let shares = [
                share(migrants, grads.len()),
                share(count(events.high_precision), grads.len()),
                share(count(events.high_recall), grads.len()),
            ];
            out.cells.push(CohortCell {
                cohort,
                horizon: h,
                eligible: grads.len(),
                migrants,
                share: shares[0],
                band_low: shares.iter().copied().fold(f64::INFINITY, f64::min),
                band_high: shares.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            });
        }
    }

    for &h in &config.horizons {
        let observed: Vec<&CohortGraduate> = graduates
            .iter()
            .filter(|g| g.grad_year + h <= config.data_end_year)
            .collect();
        let mut fields: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
        let mut decades: BTreeMap<i32, (usize, BTreeMap<String, usize>)> = BTreeMap::new();
        for g in &observed {
            let left = left_within(events.base.get(&g.graduate_id), h);
            let f = fields.entry(g.field.as_str()).or_default();
            f.0 += 1;
            f.1 += usize::from(left);
            let d = decades.entry(g.grad_year.div_euclid(10) * 10).or_default();
            d.0 += 1;
            if left {
                let dest = events.base[&g.graduate_id].destination.as_deref().unwrap_or("");
                *d.1.entry(regions.region(dest).to_string()).or_default() += 1;
            }
        }
        for (field, (eligible, migrants)) in fields {
            out.fields.push(FieldCell {
                field: field.to_string(),
                horizon: h,
                eligible,
                migrants,
                share: share(migrants, eligible),
            });
        }
        for (decade, (eligible, by_region)) in decades {
            for (region, migrants) in by_region {
                out.destinations.push(DestinationCell {
                    decade,
                    region,
                    horizon: h,
                    eligible,
                    migrants,
                    share: share(migrants, eligible),
                });
            }
        }
    }
    out
}
