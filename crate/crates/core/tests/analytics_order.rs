use std::collections::{BTreeMap, BTreeSet};

use linkforge::analytics::{
    citation_shares, cohort_emigration, group_compare, series_correlation, CategoryTag, CohortConfig, CohortGraduate,
    EventSets, GraduateOutcome, RegionMap, ScienceCategory,
};
use linkforge::migration::MigrationEvent;
use linkforge::records::PatentCitation;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cohort_fixture(onsets: &[Option<i32>]) -> (Vec<CohortGraduate>, BTreeMap<String, MigrationEvent>) {
    let mut grads = Vec::new();
    let mut events = BTreeMap::new();
    for (i, onset) in onsets.iter().enumerate() {
        let id = format!("g{i:03}");
        grads.push(CohortGraduate {
            graduate_id: id.clone(),
            grad_year: 1995 + (i % 25) as i32,
            field: ["physics", "chemistry", "biology"][i % 3].into(),
            foreign_national: (i % 4 != 0).then_some(i % 2 == 0),
        });
        events.insert(
            id.clone(),
            MigrationEvent {
                graduate_id: id,
                migrated: onset.is_some(),
                onset_relative_year: *onset,
                destination: onset.map(|_| ["CN", "DE", "GB"][i % 3].to_string()),
                prob_threshold: 0.7,
                k: 2,
            },
        );
    }
    (grads, events)
}

proptest! {
    #[test]
    fn cohort_shares_ignore_row_order(onsets in prop::collection::vec(prop::option::of(0i32..15), 1..60), seed: u64) {
        let (grads, events) = cohort_fixture(&onsets);
        let sets = EventSets { base: &events, high_precision: &events, high_recall: &events };
        let cfg = CohortConfig::default();
        let regions = RegionMap::bundled();
        let a = cohort_emigration(&grads, sets, &cfg, &regions);
        let mut shuffled = grads.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(&a, &cohort_emigration(&shuffled, sets, &cfg, &regions));
        for cohort in a.cells.iter().map(|c| c.cohort).collect::<BTreeSet<_>>() {
            let shares: Vec<f64> = a.cells.iter().filter(|c| c.cohort == cohort).map(|c| c.share).collect();
            prop_assert!(shares.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn citation_shares_ignore_row_order(rows in prop::collection::vec((2000i32..2005, 0usize..3, 0usize..4), 1..80), seed: u64) {
        let countries = ["US", "CN", "DE", "JP"];
        let cites: Vec<PatentCitation> = rows
            .iter()
            .enumerate()
            .map(|(i, &(y, p, c))| PatentCitation {
                patent_id: format!("P{i}"),
                filing_year: y,
                assignee_country: countries[c].into(),
                cited_pub_id: format!("W{p}"),
                confidence: 9,
            })
            .collect();
        let tag = |category, destination: Option<&str>| CategoryTag { category, destination: destination.map(str::to_string) };
        let cats: BTreeMap<String, BTreeSet<CategoryTag>> = [
            ("W0".to_string(), [tag(ScienceCategory::PostEmigration, Some("CN"))].into()),
            ("W1".to_string(), [tag(ScienceCategory::NeverLeaver, None), tag(ScienceCategory::PreEmigration, Some("DE"))].into()),
            ("W2".to_string(), [tag(ScienceCategory::NonUs, None)].into()),
        ]
        .into();
        let a = citation_shares(&cites, &cats);
        let mut shuffled = cites.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(&a, &citation_shares(&shuffled, &cats));
        let mut sums: BTreeMap<(i32, ScienceCategory), f64> = BTreeMap::new();
        for r in &a.rows {
            *sums.entry((r.year, r.category)).or_default() += r.share;
        }
        for s in sums.values() {
            prop_assert!((s - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn group_compare_ignores_row_order(rows in prop::collection::vec((any::<bool>(), 0u64..20, 0u64..50, 0u64..5, 0u64..3), 2..40), seed: u64) {
        let mut outcomes: Vec<GraduateOutcome> = rows
            .iter()
            .enumerate()
            .map(|(i, &(leaver, p, c, pc, pp))| GraduateOutcome {
                graduate_id: format!("g{i}"),
                leaver: leaver || i == 0,
                publications: p,
                citations: c,
                patent_citations: pc,
                patent_pairs: pp,
            })
            .collect();
        outcomes[1].leaver = false;
        let a = group_compare(&outcomes).unwrap();
        outcomes.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let b = group_compare(&outcomes).unwrap();
        prop_assert_eq!(a.stayers.graduates, b.stayers.graduates);
        prop_assert!((a.stayers.mean_publications - b.stayers.mean_publications).abs() < 1e-12);
        for (m, gap) in &a.rate_gaps {
            match (gap, b.rate_gaps[m]) {
                (Some(x), Some(y)) => prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs())),
                (x, y) => prop_assert_eq!(*x, y),
            }
        }
    }

    #[test]
    fn correlation_is_symmetric_and_bounded(values in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..20)) {
        let a: BTreeMap<i32, f64> = values.iter().enumerate().map(|(i, v)| (i as i32, v.0)).collect();
        let b: BTreeMap<i32, f64> = values.iter().enumerate().map(|(i, v)| (i as i32, v.1)).collect();
        if let Ok(r) = series_correlation(&a, &b) {
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&r));
            prop_assert!((r - series_correlation(&b, &a).unwrap()).abs() < 1e-12);
        }
    }
}
