use std::collections::BTreeMap;

use linkforge::linkmodel::AcceptedLink;
use linkforge::migration::{build_series, detect_migration, LocationSeries, YearStatus, HOME_COUNTRY};
use linkforge::synth::{generate, SynthConfig};
use proptest::prelude::*;

const CODES: [&str; 5] = ["US", "CN", "DE", "GB", "KR"];

fn series() -> impl Strategy<Value = LocationSeries> {
    prop::collection::vec((-5i32..=15, 0usize..CODES.len(), 1u32..4), 0..40).prop_map(|adds| {
        let mut s = LocationSeries::new("g", 0.5);
        for (y, c, n) in adds {
            for _ in 0..n {
                s.add(y, CODES[c]);
            }
        }
        s
    })
}

proptest! {
    #[test]
    fn larger_k_never_adds_migration(s in series()) {
        for k in 1..4 {
            let (lo, hi) = (detect_migration(&s, k), detect_migration(&s, k + 1));
            prop_assert!(!hi.migrated || lo.migrated);
            if hi.migrated {
                prop_assert_eq!(hi.onset_relative_year, lo.onset_relative_year);
            }
        }
    }

    #[test]
    fn destination_dominates_onset_year(s in series(), k in 1u32..=4) {
        let e = detect_migration(&s, k);
        prop_assert_eq!(e.migrated, e.onset_relative_year.is_some());
        prop_assert_eq!(e.migrated, e.destination.is_some());
        if let (Some(onset), Some(dest)) = (e.onset_relative_year, e.destination.as_deref()) {
            prop_assert!((0..=15).contains(&onset));
            prop_assert_eq!(s.status(onset), YearStatus::Foreign);
            prop_assert!(dest != HOME_COUNTRY);
            let counts = &s.years[&onset].countries;
            let top = counts.iter().filter(|(c, _)| c.as_str() != HOME_COUNTRY).map(|(_, n)| *n).max().unwrap();
            prop_assert_eq!(counts[dest], top);
        }
    }

    #[test]
    fn years_outside_window_are_ignored(y in prop_oneof![-40i32..-5, 16i32..40]) {
        let mut s = LocationSeries::new("g", 0.5);
        s.add(y, "CN");
        prop_assert!(s.years.is_empty());
    }
}

#[test]
fn higher_threshold_never_adds_counts() {
    let out = generate(&SynthConfig {
        seed: 4,
        graduates: 120,
        ..Default::default()
    });
    let links: Vec<AcceptedLink> = out
        .true_links
        .iter()
        .enumerate()
        .map(|(i, (g, p, pos))| AcceptedLink {
            graduate_id: g.clone(),
            pub_id: p.clone(),
            author_position: *pos,
            p1: 0.9,
            p2: 0.45 + (i % 11) as f64 * 0.05,
            label: None,
        })
        .collect();
    let mut by_grad: BTreeMap<&str, Vec<&AcceptedLink>> = BTreeMap::new();
    for l in &links {
        by_grad.entry(&l.graduate_id).or_default().push(l);
    }
    let thresholds = [0.5, 0.6, 0.7, 0.8];
    for (gid, glinks) in &by_grad {
        let g = &out.corpus.graduates[*gid];
        let all: Vec<LocationSeries> = thresholds
            .iter()
            .map(|&t| build_series(gid, g.grad_year, glinks, &out.corpus, &out.true_countries, t))
            .collect();
        for pair in all.windows(2) {
            for (y, hi) in &pair[1].years {
                let lo = &pair[0].years[y];
                for (c, n) in &hi.countries {
                    assert!(lo.countries[c] >= *n, "{gid} year {y} {c}");
                }
            }
        }
    }
}
