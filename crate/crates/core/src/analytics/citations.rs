use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::records::PatentCitation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScienceCategory {
    PreEmigration,
    PostEmigration,
    NeverLeaver,
    NonUs,
}

impl ScienceCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            ScienceCategory::PreEmigration => "pre_emigration",
            ScienceCategory::PostEmigration => "post_emigration",
            ScienceCategory::NeverLeaver => "never_leaver",
            ScienceCategory::NonUs => "non_us",
        }
    }
}

/// One reason a publication falls in a category: for emigrant science the
/// destination of the emigrating author is carried along.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CategoryTag {
    pub category: ScienceCategory,
    pub destination: Option<String>,
}

/// Category of a graduate's publication relative to their emigration onset.
/// A publication in the onset year counts as post-emigration.
pub fn categorize(pub_year: i32, onset_calendar_year: Option<i32>) -> ScienceCategory {
    match onset_calendar_year {
        Some(onset) if pub_year < onset => ScienceCategory::PreEmigration,
        Some(_) => ScienceCategory::PostEmigration,
        None => ScienceCategory::NeverLeaver,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShareRow {
    pub year: i32,
    pub category: ScienceCategory,
    pub assignee_country: String,
    pub citations: u64,
    pub total: u64,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DestinationShareRow {
    pub year: i32,
    pub category: ScienceCategory,
    pub destination_citations: u64,
    pub total: u64,
    pub share: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CitationShareSeries {
    pub rows: Vec<ShareRow>,
    pub destination_rows: Vec<DestinationShareRow>,
}

impl CitationShareSeries {
    pub fn share(&self, year: i32, category: ScienceCategory, country: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.year == year && r.category == category && r.assignee_country == country)
            .map(|r| r.share)
    }
}

/// Shares of patent citations by filing year, cited-science category and
/// assignee country. A citation to a publication carrying several
/// categories counts once in each. Destination shares count, per emigrant
/// author of the cited publication, whether the assignee sits in that
/// author's destination.
pub fn citation_shares(
    citations: &[PatentCitation],
    categories: &BTreeMap<String, BTreeSet<CategoryTag>>,
) -> CitationShareSeries {
    let mut counts: BTreeMap<(i32, ScienceCategory), BTreeMap<&str, u64>> = BTreeMap::new();
    let mut dest: BTreeMap<(i32, ScienceCategory), (u64, u64)> = BTreeMap::new();
    for c in citations {
        let Some(tags) = categories.get(&c.cited_pub_id) else {
            continue;
        };
        let cats: BTreeSet<ScienceCategory> = tags.iter().map(|t| t.category).collect();
        for cat in cats {
            *counts
                .entry((c.filing_year, cat))
                .or_default()
                .entry(c.assignee_country.as_str())
                .or_default() += 1;
        }
        for t in tags {
            if let Some(d) = &t.destination {
                let e = dest.entry((c.filing_year, t.category)).or_default();
                e.1 += 1;
                e.0 += u64::from(*d == c.assignee_country);
            }
        }
    }
    let mut out = CitationShareSeries::default();
    for ((year, category), by_country) in counts {
        let total: u64 = by_country.values().sum();
        for (country, n) in by_country {
            out.rows.push(ShareRow {
                year,
                category,
                assignee_country: country.to_string(),
                citations: n,
                total,
                share: n as f64 / total as f64,
            });
        }
    }
    for ((year, category), (hits, total)) in dest {
        out.destination_rows.push(DestinationShareRow {
            year,
            category,
            destination_citations: hits,
            total,
            share: hits as f64 / total as f64,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn onset_year_is_post() {
        assert_eq!(categorize(2010, Some(2010)), ScienceCategory::PostEmigration);
        assert_eq!(categorize(2009, Some(2010)), ScienceCategory::PreEmigration);
        assert_eq!(categorize(2009, None), ScienceCategory::NeverLeaver);
    }

    #[test]
    fn half_us_share() {
        let cats = BTreeMap::from([(
            "P".to_string(),
            BTreeSet::from([CategoryTag {
                category: ScienceCategory::PostEmigration,
                destination: Some("DE".into()),
            }]),
        )]);
        let cites: Vec<PatentCitation> = (0..10)
            .map(|i| PatentCitation {
                patent_id: format!("X{i}"),
                filing_year: 2015,
                assignee_country: if i < 5 { "US" } else { "DE" }.into(),
                cited_pub_id: "P".into(),
                confidence: 9,
            })
            .collect();
        let s = citation_shares(&cites, &cats);
        assert_eq!(s.share(2015, ScienceCategory::PostEmigration, "US"), Some(0.5));
        assert_eq!(s.destination_rows[0].share, 0.5);
    }
}
