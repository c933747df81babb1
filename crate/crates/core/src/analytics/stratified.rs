use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub const HISTOGRAM_BINS: usize = 10;

/// A link accepted for a graduate, with its ground-truth label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledMatch {
    pub graduate_id: String,
    pub correct: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupErrors {
    pub graduates: usize,
    pub matches: u64,
    pub correct: u64,
    pub true_match_rate: f64,
    pub fp_rate_histogram: [u64; HISTOGRAM_BINS],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StratifiedErrors {
    /// Share of each graduate's matches that are incorrect.
    pub per_graduate: BTreeMap<String, f64>,
    pub fp_rate_histogram: [u64; HISTOGRAM_BINS],
    pub by_group: BTreeMap<String, GroupErrors>,
}

/// Bin of `incorrect / total` on `[0, 1]` in tenths; 1.0 lands in the last bin.
/// Integer arithmetic keeps exact tenths (0.3, 0.7, ...) in their own bin.
pub fn rate_bin(incorrect: u64, total: u64) -> usize {
    ((incorrect * HISTOGRAM_BINS as u64 / total.max(1)) as usize).min(HISTOGRAM_BINS - 1)
}

/// Per-graduate false-positive rates and per-group true-match rates.
///
/// Graduates without a group label are aggregated under `"unknown"`.
pub fn stratified_error_rates(matches: &[LabeledMatch], groups: &BTreeMap<String, String>) -> StratifiedErrors {
    let mut per: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
    for m in matches {
        let e = per.entry(&m.graduate_id).or_default();
        e.0 += 1;
        if m.correct {
            e.1 += 1;
        }
    }
    let mut out = StratifiedErrors::default();
    for (gid, (total, correct)) in per {
        let incorrect = total - correct;
        out.per_graduate
            .insert(gid.to_string(), incorrect as f64 / total as f64);
        let bin = rate_bin(incorrect, total);
        out.fp_rate_histogram[bin] += 1;
        let group = groups.get(gid).map(String::as_str).unwrap_or("unknown");
        let g = out.by_group.entry(group.to_string()).or_default();
        g.graduates += 1;
        g.matches += total;
        g.correct += correct;
        g.fp_rate_histogram[bin] += 1;
    }
    for g in out.by_group.values_mut() {
        g.true_match_rate = g.correct as f64 / g.matches.max(1) as f64;
    }
    out
}
