//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use linkforge::analytics::{
    citation_shares, classification_metrics, cohort_emigration, group_compare, series_correlation, CategoryTag,
    CohortConfig, CohortGraduate, EventSets, GraduateOutcome, RegionMap, ScienceCategory,
};
use linkforge::blocking::{generate_candidates, label_candidates, MatchWindow};
use linkforge::features::FeatureContext;
use linkforge::geo::{resolve_strings, Gazetteer, GeoCache, MockClassifier};
use linkforge::linkmodel::{run_cascade, train_cascade, AcceptedLink, Activation, MlpModel};
use linkforge::migration::{
    detect_all, detect_migration, grid_validate, LocationSeries, MigrationEvent, MigrationParams, DEFAULT_PERSISTENCE,
    DEFAULT_STRATA, DEFAULT_THRESHOLDS, HOME_COUNTRY,
};
use linkforge::names::{jaro_winkler, NameKit, NicknameTable};
use linkforge::pipeline::{write_desk_fixture, Pipeline, PipelineConfig};
use linkforge::records::PatentCitation;
use linkforge::synth::{generate, SynthConfig};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(name: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || {
        format!("{name}: got {got:.6}, want {want} ± {tol}")
    })
}

fn time_limit(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed <= limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

/// Probability/label vectors realizing the given confusion counts at threshold 0.5.
fn vectors(tp: usize, fp: usize, fn_: usize, tn: usize) -> (Vec<f64>, Vec<bool>) {
    let mut p = Vec::with_capacity(tp + fp + fn_ + tn);
    let mut y = Vec::with_capacity(p.capacity());
    for (n, prob, label) in [(tp, 0.9, true), (fp, 0.8, false), (fn_, 0.2, true), (tn, 0.1, false)] {
        p.extend(std::iter::repeat_n(prob, n));
        y.extend(std::iter::repeat_n(label, n));
    }
    (p, y)
}

fn metric_arithmetic() -> Outcome {
    let start = Instant::now();
    let (p, y) = vectors(49_968, 10_086, 1_164, 317_938);
    let (_, s1) = classification_metrics(&p, &y, 0.5).map_err(|e| e.to_string())?;
    let (p, y) = vectors(44_046, 1_400, 7_086, 0);
    let (_, fin) = classification_metrics(&p, &y, 0.5).map_err(|e| e.to_string())?;
    within("stage 1 precision", s1.precision, 0.832, 1e-3)?;
    within("stage 1 recall", s1.recall, 0.977, 1e-3)?;
    within("final precision", fin.precision, 0.969, 1e-3)?;
    within("final recall", fin.recall, 0.861, 1e-3)?;
    time_limit(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!(
        "stage 1 P={:.4} R={:.4}, final P={:.4} R={:.4}",
        s1.precision, s1.recall, fin.precision, fin.recall
    ))
}

fn gradient_check() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let smooth = [Activation::Tanh, Activation::Sigmoid, Activation::Identity];
    let mut worst: f64 = 0.0;
    for net in 0..20 {
        let inputs = rng.random_range(1..=8);
        let depth = rng.random_range(0..=2);
        let hidden: Vec<usize> = (0..depth).map(|_| rng.random_range(1..=16)).collect();
        let act = smooth[net % smooth.len()];
        let names = (0..inputs).map(|i| format!("x{i}")).collect();
        let mut model = MlpModel::new(names, &hidden, act, rng.random());
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|_| (0..inputs).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let labels: Vec<f64> = (0..12).map(|_| f64::from(rng.random_range(0..2u8))).collect();
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let base = model.params();
        let (_, analytic) = model.loss_and_gradient(&refs, &labels);
        let h = 1e-5;
        let mut numeric = vec![0.0; base.len()];
        for i in 0..base.len() {
            let mut p = base.clone();
            p[i] = base[i] + h;
            model.set_params(&p);
            let up = model.loss_and_gradient(&refs, &labels).0;
            p[i] = base[i] - h;
            model.set_params(&p);
            let down = model.loss_and_gradient(&refs, &labels).0;
            numeric[i] = (up - down) / (2.0 * h);
        }
        model.set_params(&base);
        let diff: f64 = analytic
            .iter()
            .zip(&numeric)
            .map(|(a, n)| (a - n).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let rel = diff / (norm(&analytic) + norm(&numeric)).max(1e-12);
        worst = worst.max(rel);
        ensure(rel <= 1e-4, || {
            format!("network {net} (inputs {inputs}, hidden {hidden:?}, {act:?}): relative error {rel:.2e}")
        })?;
    }
    time_limit(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("20 networks, worst relative error {worst:.2e}"))
}

fn cascade_filtering() -> Outcome {
    let start = Instant::now();
    let out = generate(&SynthConfig::default());
    let corpus = &out.corpus;
    let kit = NameKit::build(corpus, NicknameTable::bundled(), 0.9);
    let mut cands = generate_candidates(corpus, &kit, MatchWindow::default());
    label_candidates(&mut cands, corpus);
    let ctx = FeatureContext::new(corpus, &kit);
    let rows = ctx.assemble_rows(&cands).map_err(|e| e.to_string())?;
    let labels: Vec<Option<bool>> = cands.iter().map(|c| c.label).collect();
    let cfg = PipelineConfig::desk(PathBuf::new(), PathBuf::new(), out.config.seed).model;
    let (model, _) = train_cascade(&ctx.layout, &rows, &labels, &cfg, out.config.seed).map_err(|e| e.to_string())?;
    let res = run_cascade(&model, &cands, &rows).map_err(|e| e.to_string())?;

    let truth = |g: &str, p: &str, pos: u32| out.true_links.contains(&(g.to_string(), p.to_string(), pos));
    let (mut tp1, mut fp1, mut tp2, mut fp2) = (0usize, 0usize, 0usize, 0usize);
    for s in &res.scored {
        if s.p1 < model.stage1_threshold {
            continue;
        }
        let t = truth(&s.graduate_id, &s.pub_id, s.author_position);
        if t {
            tp1 += 1;
        } else {
            fp1 += 1;
        }
        if s.p2.is_some_and(|p| p >= model.stage2_threshold) {
            if t {
                tp2 += 1;
            } else {
                fp2 += 1;
            }
        }
    }
    let final_tp = res
        .linked
        .links
        .iter()
        .filter(|l| truth(&l.graduate_id, &l.pub_id, l.author_position))
        .count();
    let prec1 = tp1 as f64 / (tp1 + fp1).max(1) as f64;
    let prec2 = tp2 as f64 / (tp2 + fp2).max(1) as f64;
    let removed = 1.0 - fp2 as f64 / fp1.max(1) as f64;
    let kept = tp2 as f64 / tp1.max(1) as f64;
    let final_p = final_tp as f64 / res.linked.links.len().max(1) as f64;
    let summary = format!(
        "{} candidates, stage 1 P={prec1:.3}, stage 2 P={prec2:.3}, FP removed {removed:.3}, TP kept {kept:.3}, final P={final_p:.3}",
        cands.len()
    );
    ensure(prec2 > prec1, || {
        format!("stage 2 precision not above stage 1: {summary}")
    })?;
    ensure(removed >= 0.70, || {
        format!("too few false positives removed: {summary}")
    })?;
    ensure(kept >= 0.80, || format!("too few true positives retained: {summary}"))?;
    ensure(final_p >= 0.90, || format!("final precision too low: {summary}"))?;
    time_limit(start.elapsed(), Duration::from_secs(300))?;
    Ok(summary)
}

#[derive(Clone, Copy, PartialEq)]
enum Cell {
    Us,
    Cn,
    De,
    Unknown,
}

impl Cell {
    const ALL: [Cell; 4] = [Cell::Us, Cell::Cn, Cell::De, Cell::Unknown];

    fn code(self) -> Option<&'static str> {
        match self {
            Cell::Us => Some("US"),
            Cell::Cn => Some("CN"),
            Cell::De => Some("DE"),
            Cell::Unknown => None,
        }
    }

    fn foreign(self) -> bool {
        matches!(self, Cell::Cn | Cell::De)
    }
}

/// Enumerates every all-foreign interval and keeps the longest, earliest first.
fn run_oracle(seq: &[Cell], k: u32) -> (bool, Option<i32>, Option<String>) {
    let mut best: Option<(usize, usize)> = None;
    for i in 0..seq.len() {
        for j in i..seq.len() {
            if !seq[i..=j].iter().all(|c| c.foreign()) {
                break;
            }
            let len = j - i + 1;
            if best.is_none_or(|(_, l)| len > l) {
                best = Some((i, len));
            }
        }
    }
    match best {
        Some((i, len)) if len as u32 >= k => (true, Some(i as i32), seq[i].code().map(str::to_string)),
        _ => (false, None, None),
    }
}

fn migration_oracle() -> Outcome {
    let start = Instant::now();
    let mut cases = 0usize;
    for len in 0..=8u32 {
        for code in 0..4usize.pow(len) {
            let seq: Vec<Cell> = (0..len).map(|i| Cell::ALL[(code >> (2 * i)) & 3]).collect();
            let mut series = LocationSeries::new("g", 0.5);
            for (y, c) in seq.iter().enumerate() {
                if let Some(code) = c.code() {
                    series.add(y as i32, code);
                }
            }
            for k in 1..=4 {
                let e = detect_migration(&series, k);
                let want = run_oracle(&seq, k);
                ensure(
                    (e.migrated, e.onset_relative_year, e.destination.clone()) == want,
                    || {
                        format!(
                            "series {:?}, k={k}: got {e:?}",
                            seq.iter().map(|c| c.code()).collect::<Vec<_>>()
                        )
                    },
                )?;
                cases += 1;
            }
        }
    }
    time_limit(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("{cases} (series, k) cases agree"))
}

/// Recomputes migration flags from raw links and scores them by plain counting.
fn brute_force_counts(
    corpus: &linkforge::records::Corpus,
    links: &[AcceptedLink],
    countries: &linkforge::geo::CountryAssignments,
    t: f64,
    k: u32,
    min_pubs: usize,
) -> [u64; 4] {
    let mut pubs: BTreeMap<&str, usize> = BTreeMap::new();
    for l in links {
        *pubs.entry(&l.graduate_id).or_default() += 1;
    }
    let mut counts = [0u64; 4];
    for (gid, stints) in &corpus.employment_histories {
        let Some(g) = corpus.graduates.get(gid) else {
            continue;
        };
        if pubs.get(gid.as_str()).copied().unwrap_or(0) < min_pubs {
            continue;
        }
        let actual = stints
            .iter()
            .any(|s| s.country != HOME_COUNTRY && s.start_year >= g.grad_year && s.start_year <= g.grad_year + 15);
        let mut home = [0u32; 16];
        let mut away = [0u32; 16];
        for l in links.iter().filter(|l| &l.graduate_id == gid && l.p2 >= t) {
            let rel = corpus.publications[&l.pub_id].pub_year - g.grad_year;
            if !(0..=15).contains(&rel) {
                continue;
            }
            for c in countries.get(&l.pub_id, l.author_position).into_iter().flatten() {
                if c == HOME_COUNTRY {
                    home[rel as usize] += 1;
                } else {
                    away[rel as usize] += 1;
                }
            }
        }
        let foreign: Vec<bool> = (0..16).map(|y| away[y] > home[y]).collect();
        let predicted = foreign.windows(k as usize).any(|w| w.iter().all(|&f| f));
        let idx = match (predicted, actual) {
            (true, true) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (false, false) => 3,
        };
        counts[idx] += 1;
    }
    counts
}

fn grid_validation() -> Outcome {
    let start = Instant::now();
    let out = generate(&SynthConfig {
        seed: 21,
        graduates: 600,
        ..Default::default()
    });
    let corpus = &out.corpus;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let links: Vec<AcceptedLink> = out
        .true_links
        .iter()
        .map(|(g, p, pos)| AcceptedLink {
            graduate_id: g.clone(),
            pub_id: p.clone(),
            author_position: *pos,
            p1: 0.9,
            p2: rng.random_range(0.45..1.0),
            label: None,
        })
        .collect();
    let countries = &out.true_countries;
    let grid = detect_all(corpus, &links, countries, &DEFAULT_THRESHOLDS, &DEFAULT_PERSISTENCE);
    let truth = linkforge::migration::ground_truth(corpus);
    let counts = linkforge::migration::publication_counts(&links);
    let result = grid_validate(&grid, &truth, &counts, &DEFAULT_STRATA);

    for &t in &DEFAULT_THRESHOLDS {
        for &k in &DEFAULT_PERSISTENCE {
            for &s in &DEFAULT_STRATA {
                let cell = result
                    .cell(&MigrationParams::new(t, k), s)
                    .ok_or_else(|| format!("missing cell ({t}, {k}, ≥{s})"))?;
                let [tp, fp, fn_, tn] = brute_force_counts(corpus, &links, countries, t, k, s);
                let cm = &cell.confusion;
                ensure([cm.tp, cm.fp, cm.fn_, cm.tn] == [tp, fp, fn_, tn], || {
                    format!("({t}, {k}, ≥{s}): grid {cm:?}, brute force {:?}", [tp, fp, fn_, tn])
                })?;
                let p = (tp + fp > 0).then(|| tp as f64 / (tp + fp) as f64);
                let r = (tp + fn_ > 0).then(|| tp as f64 / (tp + fn_) as f64);
                let f1 = match (p, r) {
                    (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
                    (Some(_), Some(_)) => Some(0.0),
                    _ => None,
                };
                ensure(cell.precision == p && cell.recall == r && cell.f1 == f1, || {
                    format!(
                        "({t}, {k}, ≥{s}): metrics {:?} vs {:?}",
                        (cell.precision, cell.recall, cell.f1),
                        (p, r, f1)
                    )
                })?;
            }
        }
    }
    let first = DEFAULT_STRATA[0];
    let best = result
        .cells
        .iter()
        .filter(|c| c.min_pubs == first)
        .filter_map(|c| c.f1)
        .fold(f64::NEG_INFINITY, f64::max);
    let base = result.cell(&result.selection.base, first).and_then(|c| c.f1);
    ensure(base == Some(best), || {
        format!("base F1 {base:?} is not the maximum {best}")
    })?;
    time_limit(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!(
        "48 cells match; base ({}, {}) F1={best:.3}",
        result.selection.base.prob_threshold, result.selection.base.k
    ))
}

fn geo_resolution() -> Outcome {
    let start = Instant::now();
    let text = std::fs::read_to_string(data("geo_affiliations.tsv")).map_err(|e| e.to_string())?;
    let mock_text = std::fs::read_to_string(data("geo_mock.tsv")).map_err(|e| e.to_string())?;
    let rows: Vec<(String, Option<String>, bool)> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (
                f[0].to_string(),
                (f[1] != "-").then(|| f[1].to_string()),
                f[2] == "explicit",
            )
        })
        .collect();
    ensure(rows.len() == 200, || format!("fixture has {} rows", rows.len()))?;
    let gaz = Gazetteer::bundled();

    let explicit: Vec<&(String, Option<String>, bool)> = rows.iter().filter(|r| r.2).collect();
    let correct = explicit.iter().filter(|r| gaz.resolve(&r.0) == r.1).count();
    let rate = correct as f64 / explicit.len() as f64;
    ensure(rate >= 0.95, || {
        format!("gazetteer resolved {correct}/{} explicit strings", explicit.len())
    })?;

    let answers: BTreeMap<&str, &str> = mock_text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .filter_map(|l| l.split_once('\t'))
        .collect();
    let strings: Vec<String> = rows.iter().map(|r| r.0.clone()).collect();
    let by_gaz: Vec<Option<String>> = strings.iter().map(|s| gaz.resolve(s)).collect();
    let gaz_only = by_gaz.iter().filter(|c| c.is_some()).count();
    let expected_lift = strings
        .iter()
        .zip(&by_gaz)
        .filter(|(s, c)| c.is_none() && answers.get(s.as_str()).is_some_and(|a| gaz.is_valid_code(a)))
        .count();

    let mock = MockClassifier::parse(&mock_text);
    let mut cache = GeoCache::in_memory();
    let (first, report) = resolve_strings(&strings, &gaz, Some(&mock), &mut cache, 16).map_err(|e| e.to_string())?;
    let resolved = first.iter().filter(|r| r.country.is_some()).count();
    ensure(resolved == gaz_only + expected_lift, || {
        format!("total resolved {resolved}, expected {gaz_only} + {expected_lift}")
    })?;
    for (r, (s, _, _)) in first.iter().zip(&rows) {
        if let (None, Some(a)) = (gaz.resolve(s), answers.get(s.as_str())) {
            let want = gaz.is_valid_code(a).then(|| a.to_string());
            ensure(r.country == want, || {
                format!("`{s}` resolved to {:?}, mock says {a}", r.country)
            })?;
        }
    }
    let calls_before = mock.calls();
    let (second, report2) = resolve_strings(&strings, &gaz, Some(&mock), &mut cache, 16).map_err(|e| e.to_string())?;
    ensure(mock.calls() == calls_before && report2.client_calls == 0, || {
        format!("second run made {} client calls", mock.calls() - calls_before)
    })?;
    ensure(
        second.iter().map(|r| &r.country).eq(first.iter().map(|r| &r.country)),
        || "second run changed answers".to_string(),
    )?;
    time_limit(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!(
        "explicit {correct}/{} ({:.1}%), total {:.1}% → {:.1}% with mock, second run 0 calls",
        explicit.len(),
        100.0 * rate,
        100.0 * gaz_only as f64 / strings.len() as f64,
        100.0 * report.total_rate
    ))
}

fn event(gid: &str, onset: Option<i32>) -> MigrationEvent {
    MigrationEvent {
        graduate_id: gid.to_string(),
        migrated: onset.is_some(),
        onset_relative_year: onset,
        destination: onset.map(|_| "CN".to_string()),
        prob_threshold: 0.7,
        k: 2,
    }
}

fn close(name: &str, got: f64, want: f64) -> Result<(), String> {
    within(name, got, want, 1e-12)
}

fn aggregation() -> Outcome {
    let start = Instant::now();
    let onsets = [Some(1), Some(3), Some(5), Some(7), None, None, None, None, None, None];
    let mut grads = Vec::new();
    let mut events = BTreeMap::new();
    for (i, onset) in onsets.iter().enumerate() {
        let id = format!("a{i}");
        grads.push(CohortGraduate {
            graduate_id: id.clone(),
            grad_year: 2000,
            field: "physics".into(),
            foreign_national: Some(i < 4),
        });
        events.insert(id.clone(), event(&id, *onset));
    }
    for i in 0..2 {
        let id = format!("r{i}");
        grads.push(CohortGraduate {
            graduate_id: id.clone(),
            grad_year: 2016,
            field: "physics".into(),
            foreign_national: None,
        });
        events.insert(id.clone(), event(&id, Some(2)));
    }
    let sets = EventSets {
        base: &events,
        high_precision: &events,
        high_recall: &events,
    };
    let series = cohort_emigration(&grads, sets, &CohortConfig::default(), &RegionMap::bundled());
    let cell = |c: i32, h: i32| {
        series
            .cell(c, h)
            .map(|x| x.share)
            .ok_or_else(|| format!("missing cell {c}/{h}"))
    };
    close("2000 h5", cell(2000, 5)?, 0.3)?;
    close("2000 h10", cell(2000, 10)?, 0.4)?;
    close("2000 h15", cell(2000, 15)?, 0.4)?;
    close("2016 h5", cell(2016, 5)?, 1.0)?;
    ensure(
        series.cell(2016, 10).is_none() && series.cell(2016, 15).is_none(),
        || "recent cohort shows unobserved horizons".to_string(),
    )?;
    close("foreign national share", series.foreign_national_share[&2000], 0.4)?;
    for c in [2000, 2016] {
        let shares: Vec<f64> = series.cells.iter().filter(|x| x.cohort == c).map(|x| x.share).collect();
        ensure(shares.windows(2).all(|w| w[0] <= w[1]), || {
            format!("cohort {c} not monotone: {shares:?}")
        })?;
    }

    let o = |id: &str, leaver, p, c, pc, pp| GraduateOutcome {
        graduate_id: id.into(),
        leaver,
        publications: p,
        citations: c,
        patent_citations: pc,
        patent_pairs: pp,
    };
    let fixture = [
        o("s1", false, 4, 8, 2, 0),
        o("s2", false, 2, 0, 0, 1),
        o("s3", false, 6, 12, 0, 0),
        o("l1", true, 2, 2, 1, 0),
        o("l2", true, 4, 4, 0, 2),
        o("l3", true, 3, 0, 0, 0),
    ];
    let cmp = group_compare(&fixture).map_err(|e| e.to_string())?;
    close("stayer mean publications", cmp.stayers.mean_publications, 4.0)?;
    close("leaver mean publications", cmp.leavers.mean_publications, 3.0)?;
    close("publication gap", cmp.publication_gap.unwrap_or(f64::NAN), 1.0 / 3.0)?;
    close(
        "stayer citation share",
        cmp.stayers.measures["citations"].share_any,
        2.0 / 3.0,
    )?;
    close(
        "stayer citation rate",
        cmp.stayers.measures["citations"].rate_given_any.unwrap_or(f64::NAN),
        2.0,
    )?;
    close(
        "leaver citation rate",
        cmp.leavers.measures["citations"].rate_given_any.unwrap_or(f64::NAN),
        1.0,
    )?;
    close("citation gap", cmp.rate_gaps["citations"].unwrap_or(f64::NAN), 1.0)?;
    close(
        "patent citation gap",
        cmp.rate_gaps["patent_citations"].unwrap_or(f64::NAN),
        0.0,
    )?;
    close(
        "patent pair gap",
        cmp.rate_gaps["patent_pairs"].unwrap_or(f64::NAN),
        0.0,
    )?;
    close(
        "patent pair share",
        cmp.leavers.measures["patent_pairs"].share_any,
        1.0 / 3.0,
    )?;
    let twins = [o("a", false, 5, 10, 1, 1), o("b", true, 5, 10, 1, 1)];
    let same = group_compare(&twins).map_err(|e| e.to_string())?;
    ensure(
        same.publication_gap == Some(0.0) && same.rate_gaps.values().all(|g| *g == Some(0.0)),
        || format!("identical groups gave gaps {:?}", same.rate_gaps),
    )?;

    let a: BTreeMap<i32, f64> = [(2000, 0.1), (2001, 0.15), (2002, 0.12), (2003, 0.2), (2004, 0.22)].into();
    let b: BTreeMap<i32, f64> = [(2000, 1.0), (2001, 1.4), (2002, 1.3), (2003, 1.9), (2004, 1.8)].into();
    let r = series_correlation(&a, &b).map_err(|e| e.to_string())?;
    close("correlation", r, 0.960_639_541_063_263_5)?;
    let lin: BTreeMap<i32, f64> = a.iter().map(|(&y, &x)| (y, 2.0 * x + 1.0)).collect();
    let neg: BTreeMap<i32, f64> = a.iter().map(|(&y, &x)| (y, -x)).collect();
    close(
        "linear correlation",
        series_correlation(&a, &lin).map_err(|e| e.to_string())?,
        1.0,
    )?;
    close(
        "negated correlation",
        series_correlation(&a, &neg).map_err(|e| e.to_string())?,
        -1.0,
    )?;

    let assignees = ["US", "US", "US", "US", "US", "CN", "CN", "CN", "DE", "DE"];
    let cites: Vec<PatentCitation> = assignees
        .iter()
        .enumerate()
        .map(|(i, c)| PatentCitation {
            patent_id: format!("P{i}"),
            filing_year: 2015,
            assignee_country: c.to_string(),
            cited_pub_id: "W1".into(),
            confidence: 9,
        })
        .collect();
    let tags: BTreeMap<String, BTreeSet<CategoryTag>> = [(
        "W1".to_string(),
        [CategoryTag {
            category: ScienceCategory::PostEmigration,
            destination: Some("CN".into()),
        }]
        .into(),
    )]
    .into();
    let shares = citation_shares(&cites, &tags);
    let post = ScienceCategory::PostEmigration;
    close("US share", shares.share(2015, post, "US").unwrap_or(f64::NAN), 0.5)?;
    close("CN share", shares.share(2015, post, "CN").unwrap_or(f64::NAN), 0.3)?;
    let total: f64 = shares
        .rows
        .iter()
        .filter(|r| r.year == 2015 && r.category == post)
        .map(|r| r.share)
        .sum();
    close("partition sum", total, 1.0)?;
    close("destination share", shares.destination_rows[0].share, 0.3)?;
    time_limit(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!(
        "cohort, comparison, correlation (r={r:.12}) and citation fixtures match"
    ))
}

fn collect_files(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).expect("readable output dir") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).expect("under root").to_path_buf();
                out.insert(rel, std::fs::read(&path).expect("readable output file"));
            }
        }
    }
    out
}

fn determinism() -> Outcome {
    let start = Instant::now();
    let synth = SynthConfig::default();
    let mut trees = Vec::new();
    let mut dirs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let config = write_desk_fixture(dir.path(), &synth).map_err(|e| e.to_string())?;
        let pipeline = Pipeline::load(&config).map_err(|e| e.to_string())?;
        pipeline.run_all(false).map_err(|e| e.to_string())?;
        trees.push(collect_files(&pipeline.config.output_dir));
        dirs.push(dir);
    }
    let (a, b) = (&trees[0], &trees[1]);
    ensure(a.keys().eq(b.keys()), || "runs wrote different file sets".to_string())?;
    for (path, bytes) in a {
        ensure(&b[path] == bytes, || format!("{} differs between runs", path.display()))?;
    }
    Ok(format!(
        "{} files byte-identical across two runs ({:.1?})",
        a.len(),
        start.elapsed()
    ))
}

fn random_word(rng: &mut ChaCha8Rng) -> String {
    let len = rng.random_range(0..=10);
    (0..len).map(|_| char::from(b'A' + rng.random_range(0..6u8))).collect()
}

fn string_metric() -> Outcome {
    let start = Instant::now();
    let reference = [
        ("MARTHA", "MARHTA", 0.961111),
        ("DWAYNE", "DUANE", 0.84),
        ("DIXON", "DICKSONX", 0.813333),
        ("JELLYFISH", "SMELLYFISH", 0.896296),
        ("SHACKLEFORD", "SHACKELFORD", 0.981818),
        ("JONES", "JOHNSON", 0.832381),
        ("MASSEY", "MASSIE", 0.933333),
        ("ABROMS", "ABRAMS", 0.922222),
        ("ABC", "XYZ", 0.0),
        ("CRATE", "TRACE", 0.733333),
    ];
    for (a, b, want) in reference {
        within(&format!("{a}/{b}"), jaro_winkler(a, b), want, 1e-4)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..10_000 {
        let (a, b) = (random_word(&mut rng), random_word(&mut rng));
        let (ab, ba) = (jaro_winkler(&a, &b), jaro_winkler(&b, &a));
        ensure(ab == ba, || format!("asymmetric on {a:?}/{b:?}: {ab} vs {ba}"))?;
        ensure((0.0..=1.0).contains(&ab), || format!("{a:?}/{b:?} out of range: {ab}"))?;
        ensure(a.is_empty() || jaro_winkler(&a, &a) == 1.0, || {
            format!("{a:?} not identical to itself")
        })?;
    }
    time_limit(start.elapsed(), Duration::from_secs(5))?;
    Ok("10 reference values, 10000 random pairs symmetric and in [0, 1]".to_string())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 metric arithmetic", metric_arithmetic),
        ("2 gradient correctness", gradient_check),
        ("3 cascade filtering", cascade_filtering),
        ("4 migration oracle", migration_oracle),
        ("5 grid validation", grid_validation),
        ("6 geo resolution", geo_resolution),
        ("7 aggregation", aggregation),
        ("8 determinism", determinism),
        ("9 string metric", string_metric),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("PASS criterion {name} [{:.2?}]: {detail}", start.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name} [{:.2?}]: {why}", start.elapsed());
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
