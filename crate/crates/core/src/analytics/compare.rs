use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::AnalyticsError;

/// Impact measures compared per publication.
pub const MEASURES: [&str; 3] = ["citations", "patent_citations", "patent_pairs"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraduateOutcome {
    pub graduate_id: String,
    pub leaver: bool,
    pub publications: u64,
    pub citations: u64,
    pub patent_citations: u64,
    pub patent_pairs: u64,
}

impl GraduateOutcome {
    fn measure(&self, name: &str) -> u64 {
        match name {
            "citations" => self.citations,
            "patent_citations" => self.patent_citations,
            _ => self.patent_pairs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSummary {
    /// Share of graduates with a nonzero count.
    pub share_any: f64,
    pub graduates_with_any: usize,
    /// Mean per-publication rate among graduates with a nonzero count and at
    /// least one publication. `None` when no graduate qualifies.
    pub rate_given_any: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub graduates: usize,
    pub mean_publications: f64,
    pub measures: BTreeMap<String, MeasureSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupComparison {
    pub stayers: GroupSummary,
    pub leavers: GroupSummary,
    /// Relative gap `(stayer - leaver) / leaver` for mean publications.
    pub publication_gap: Option<f64>,
    /// Relative gaps in the per-publication rates given any.
    pub rate_gaps: BTreeMap<String, Option<f64>>,
}

fn summarize(group: &[&GraduateOutcome]) -> GroupSummary {
    let n = group.len();
    let mean_publications = group.iter().map(|g| g.publications as f64).sum::<f64>() / n as f64;
    let measures = MEASURES
        .iter()
        .map(|&m| {
            let with_any: Vec<&&GraduateOutcome> = group.iter().filter(|g| g.measure(m) > 0).collect();
            let rates: Vec<f64> = with_any
                .iter()
                .filter(|g| g.publications > 0)
                .map(|g| g.measure(m) as f64 / g.publications as f64)
                .collect();
            let summary = MeasureSummary {
                share_any: with_any.len() as f64 / n as f64,
                graduates_with_any: with_any.len(),
                rate_given_any: (!rates.is_empty()).then(|| rates.iter().sum::<f64>() / rates.len() as f64),
            };
            (m.to_string(), summary)
        })
        .collect();
    GroupSummary {
        graduates: n,
        mean_publications,
        measures,
    }
}

fn relative_gap(stayer: f64, leaver: f64) -> Option<f64> {
    (leaver != 0.0).then(|| (stayer - leaver) / leaver)
}

/// Descriptive stayer/leaver means and shares.
pub fn group_compare(outcomes: &[GraduateOutcome]) -> Result<GroupComparison, AnalyticsError> {
    let stayers: Vec<&GraduateOutcome> = outcomes.iter().filter(|o| !o.leaver).collect();
    let leavers: Vec<&GraduateOutcome> = outcomes.iter().filter(|o| o.leaver).collect();
    if stayers.is_empty() {
        return Err(AnalyticsError::EmptyGroup("stayers"));
    }
    if leavers.is_empty() {
        return Err(AnalyticsError::EmptyGroup("leavers"));
    }
    let (s, l) = (summarize(&stayers), summarize(&leavers));
    let rate_gaps = MEASURES
        .iter()
        .map(|&m| {
            let gap = match (s.measures[m].rate_given_any, l.measures[m].rate_given_any) {
                (Some(a), Some(b)) => relative_gap(a, b),
                _ => None,
            };
            (m.to_string(), gap)
        })
        .collect();
    Ok(GroupComparison {
        publication_gap: relative_gap(s.mean_publications, l.mean_publications),
        stayers: s,
        leavers: l,
        rate_gaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(id: &str, leaver: bool, p: u64, c: u64, pc: u64, pp: u64) -> GraduateOutcome {
        GraduateOutcome {
            graduate_id: id.into(),
            leaver,
            publications: p,
            citations: c,
            patent_citations: pc,
            patent_pairs: pp,
        }
    }

    #[test]
    fn identical_groups_have_zero_gaps() {
        let c = group_compare(&[o("a", false, 4, 8, 1, 0), o("b", true, 4, 8, 1, 0)]).unwrap();
        assert_eq!(c.publication_gap, Some(0.0));
        assert_eq!(c.rate_gaps["citations"], Some(0.0));
        assert_eq!(c.rate_gaps["patent_pairs"], None);
    }

    #[test]
    fn empty_group_is_error() {
        assert_eq!(
            group_compare(&[o("a", false, 1, 0, 0, 0)]).unwrap_err(),
            AnalyticsError::EmptyGroup("leavers")
        );
    }
}
