use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{FallbackKind, Pipeline, PipelineError, Stage};
use crate::analytics::{
    build_outcomes, categorize_publications, citation_shares, classification_metrics, cohort_emigration,
    eligible_graduates, group_compare, series_correlation, stratified_error_rates, write_csv, CohortConfig, EventSets,
    LabeledMatch, MetricReport, RegionMap, MEASURES,
};
use crate::blocking::{
    generate_candidates, label_candidates, read_candidate_shards, write_candidate_shards, CandidateLink,
};
use crate::features::{FeatureContext, FeatureLayout, FeatureMatrix};
use crate::geo::{
    resolve_corpus, CountryAssignments, CountryClassifier, Gazetteer, GeoCache, MockClassifier, RateLimited,
    ResolutionMethod,
};
use crate::jsonl;
use crate::linkmodel::{run_cascade, train_cascade, AcceptedLink, CascadeConfusion, CascadeModel};
use crate::migration::{
    detect_all, grid_validate, ground_truth, publication_counts, MigrationEvent, MigrationGrid, MigrationParams,
};
use crate::names::{NameKit, NicknameTable};
use crate::records::{ingest_corpus, validate_corpus, Corpus, IngestManifest};

type Rows = BTreeMap<String, u64>;

pub(super) fn run(p: &Pipeline, stage: Stage, dir: &Path) -> Result<Rows, PipelineError> {
    match stage {
        Stage::Ingest => ingest(p, dir),
        Stage::Candidates => candidates(p, dir),
        Stage::Features => features(p, dir),
        Stage::Train => train(p, dir),
        Stage::Classify => classify(p, dir),
        Stage::Geo => geo(p, dir),
        Stage::Migrate => migrate(p, dir),
        Stage::Analyze => analyze(p, dir),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| PipelineError::io(path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::format(path, e))
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), PipelineError> {
    jsonl::write_records(path, rows).map_err(|e| PipelineError::io(path, e))
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, PipelineError> {
    let lines = jsonl::read_lines(path).map_err(|e| PipelineError::io(path, e))?;
    lines
        .into_iter()
        .map(|(n, l)| serde_json::from_str(&l).map_err(|e| PipelineError::format(path, format!("line {n}: {e}"))))
        .collect()
}

fn csv(path: &Path, rows: &[impl Serialize]) -> Result<(), PipelineError> {
    write_csv(path, rows).map_err(|e| PipelineError::format(path, e))
}

fn rows<const N: usize>(pairs: [(&str, usize); N]) -> Rows {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v as u64)).collect()
}

impl Pipeline {
    fn corpus_manifest(&self) -> PathBuf {
        self.stage_dir(Stage::Ingest).join("corpus").join("manifest.toml")
    }

    fn load_corpus(&self) -> Result<Corpus, PipelineError> {
        Ok(ingest_corpus(&IngestManifest::load(&self.corpus_manifest())?)?)
    }

    fn name_kit(&self, corpus: &Corpus) -> Result<NameKit, PipelineError> {
        let table = match &self.config.names.nicknames {
            Some(p) => NicknameTable::load(p).map_err(|e| PipelineError::io(p, e))?,
            None => NicknameTable::bundled(),
        };
        Ok(NameKit::build(corpus, table, self.config.names.jw_threshold))
    }

    fn load_candidates(&self) -> Result<Vec<CandidateLink>, PipelineError> {
        let dir = self.stage_dir(Stage::Candidates).join("shards");
        let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
            .map_err(|e| PipelineError::io(&dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        read_candidate_shards(&paths).map_err(|e| PipelineError::io(&dir, e))
    }

    fn load_features(&self) -> Result<(FeatureLayout, FeatureMatrix), PipelineError> {
        let dir = self.stage_dir(Stage::Features);
        let layout = read_json(&dir.join("layout.json"))?;
        let matrix = FeatureMatrix::read(&dir.join("features.bin"))?;
        Ok((layout, matrix))
    }

    fn load_links(&self) -> Result<Vec<AcceptedLink>, PipelineError> {
        read_jsonl(&self.stage_dir(Stage::Classify).join("links.jsonl"))
    }

    fn load_assignments(&self) -> Result<CountryAssignments, PipelineError> {
        let path = self.stage_dir(Stage::Geo).join("assignments.jsonl");
        CountryAssignments::read_jsonl(&path).map_err(|e| PipelineError::io(&path, e))
    }
}

fn ingest(p: &Pipeline, dir: &Path) -> Result<Rows, PipelineError> {
    let manifest = IngestManifest::load(&p.config.inputs.manifest)?;
    let corpus = ingest_corpus(&manifest)?;
    let report = validate_corpus(&corpus);
    let written = corpus.write_to_dir(&dir.join("corpus"), true)?;
    // Keep the original sample window so re-reading the normalized corpus drops nothing.
    let text = std::fs::read_to_string(&written).map_err(|e| PipelineError::io(&written, e))?;
    let mut normalized: IngestManifest = toml::from_str(&text).map_err(|e| PipelineError::format(&written, e))?;
    normalized.sample_window = manifest.sample_window;
    let text = toml::to_string(&normalized).map_err(|e| PipelineError::format(&written, e))?;
    std::fs::write(&written, text).map_err(|e| PipelineError::io(&written, e))?;
    write_json(&dir.join("report.json"), &report)?;
    for w in report.warnings.iter().take(20) {
        log::warn!("ingest: {} {} -> {}", w.kind, w.from_id, w.to_id);
    }
    Ok(rows([
        ("graduates", corpus.graduates.len()),
        ("publications", corpus.publications.len()),
        ("patent_citations", corpus.patent_citations.len()),
        ("patent_paper_pairs", corpus.patent_paper_pairs.len()),
        ("employment_histories", corpus.employment_histories.len()),
        ("warnings", report.warnings.len()),
    ]))
}

#[derive(Serialize)]
struct CandidateSummary {
    candidates: usize,
    labeled_positive: usize,
    labeled_negative: usize,
    unlabeled: usize,
    by_match_class: BTreeMap<String, usize>,
}

fn candidates(p: &Pipeline, dir: &Path) -> Result<Rows, PipelineError> {
    let corpus = p.load_corpus()?;
    let kit = p.name_kit(&corpus)?;
    let mut cands = generate_candidates(&corpus, &kit, p.config.blocking.window());
    label_candidates(&mut cands, &corpus);
    let shards = dir.join("shards");
    write_candidate_shards(&cands, &shards, p.config.blocking.shard_rows).map_err(|e| PipelineError::io(&shards, e))?;
    let mut by_match_class = BTreeMap::new();
    for c in &cands {
        *by_match_class.entry(format!("{:?}", c.match_class)).or_insert(0) += 1;
    }
    let summary = CandidateSummary {
        candidates: cands.len(),
        labeled_positive: cands.iter().filter(|c| c.label == Some(true)).count(),
        labeled_negative: cands.iter().filter(|c| c.label == Some(false)).count(),
        unlabeled: cands.iter().filter(|c| c.label.is_none()).count(),
        by_match_class,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(rows([
        ("candidates", summary.candidates),
        ("labeled_positive", summary.labeled_positive),
        ("labeled_negative", summary.labeled_negative),
    ]))
}

fn features(p: &Pipeline, dir: &Path) -> Result<Rows, PipelineError> {
    let corpus = p.load_corpus()?;
    let kit = p.name_kit(&corpus)?;
    let cands = p.load_candidates()?;
    let ctx = FeatureContext::new(&corpus, &kit);
    let rows_ = ctx.assemble_rows(&cands)?;
    let matrix = FeatureMatrix {
        columns: ctx.layout.full_names(),
        index: (0..rows_.len() as u64).collect(),
        rows: rows_,
    };
    let path = dir.join("features.bin");
    matrix.write(&path).map_err(|e| PipelineError::io(&path, e))?;
    write_json(&dir.join("layout.json"), &ctx.layout)?;
    Ok(rows([("rows", matrix.rows.len()), ("columns", matrix.columns.len())]))
}

fn labels_of(cands: &[CandidateLink]) -> Vec<Option<bool>> {
    cands.iter().map(|c| c.label).collect()
}

fn train(p: &Pipeline, dir: &Path) -> Result<Rows, PipelineError> {
    let cands = p.load_candidates()?;
    let (layout, matrix) = p.load_features()?;
    let (model, report) = train_cascade(
        &layout,
        &matrix.rows,
        &labels_of(&cands),
        &p.config.model,
        p.config.seed,
    )?;
    let path = dir.join("model.bin");
    model.save(&path).map_err(|e| PipelineError::io(&path, e))?;
    write_json(&dir.join("training_report.json"), &report)?;
    Ok(rows([
        ("stage1_rows", report.stage1.training_rows),
        ("stage2_rows", report.stage2.training_rows),
        ("stage1_true_positives", report.stage1_true_positives),
        ("stage1_false_positives", report.stage1_false_positives),
    ]))
}

#[derive(Serialize)]
struct ClassifyMetrics {
    stage1: Option<MetricReport>,
    stage2: Option<MetricReport>,
    #[serde(rename = "final")]
    final_: Option<MetricReport>,
    confusion: Option<CascadeConfusion>,
    linked_graduates: usize,
    links: usize,
}

fn labeled_report(probs: Vec<f64>, labels: Vec<bool>, threshold: f64) -> Result<Option<MetricReport>, PipelineError> {
    if probs.is_empty() {
        return Ok(None);
    }
    Ok(Some(classification_metrics(&probs, &labels, threshold)?.1))
}

fn classify(p: &Pipeline, dir: &Path) -> Result<Rows, PipelineError> {
    let corpus = p.load_corpus()?;
    let cands = p.load_candidates()?;
    let (_, matrix) = p.load_features()?;
    let model = CascadeModel::load(&p.stage_dir(Stage::Train).join("model.bin"))?;
    let out = run_cascade(&model, &cands, &matrix.rows)?;

    let (mut p1, mut l1, mut p2, mut l2) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (s, c) in out.scored.iter().zip(&cands) {
        let Some(label) = c.label else { continue };
        p1.push(s.p1);
        l1.push(label);
        if let Some(x) = s.p2 {
            p2.push(x);
            l2.push(label);
        }
    }
    let metrics = ClassifyMetrics {
        stage1: labeled_report(p1, l1, model.stage1_threshold)?,
        stage2: labeled_report(p2, l2, model.stage2_threshold)?,
        final_: out.confusion.map(|c| c.final_.report()),
        confusion: out.confusion,
        linked_graduates: out.linked.by_graduate.len(),
        links: out.linked.links.len(),
    };

    let groups: BTreeMap<String, String> = corpus
        .graduates
        .values()
        .filter_map(|g| g.ethnicity_label.clone().map(|e| (g.graduate_id.clone(), e)))
        .collect();
    let stage1_matches: Vec<LabeledMatch> = out
        .scored
        .iter()
        .zip(&cands)
        .filter(|(s, _)| s.p1 >= model.stage1_threshold)
        .filter_map(|(s, c)| {
            c.label.map(|l| LabeledMatch {
                graduate_id: s.graduate_id.clone(),
                correct: l,
            })
        })
        .collect();
    let final_matches: Vec<LabeledMatch> = out
        .linked
        .links
        .iter()
        .filter_map(|l| {
            l.label.map(|x| LabeledMatch {
                graduate_id: l.graduate_id.clone(),
                correct: x,
            })
        })
        .collect();

    write_jsonl(&dir.join("scored.jsonl"), &out.scored)?;
    write_jsonl(&dir.join("links.jsonl"), &out.linked.links)?;
    write_json(&dir.join("metrics.json"), &metrics)?;
    write_json(
        &dir.join("errors_stage1.json"),
        &stratified_error_rates(&stage1_matches, &groups),
    )?;
    write_json(
        &dir.join("errors_final.json"),
        &stratified_error_rates(&final_matches, &groups),
    )?;
    Ok(rows([
        ("scored", out.scored.len()),
        ("stage1_positive", out.scored.iter().filter(|s| s.p2.is_some()).count()),
        ("links", out.linked.links.len()),
        ("linked_graduates", out.linked.by_graduate.len()),
    ]))
}

#[derive(Serialize)]
struct ResolutionRow<'a> {
    affiliation_string: &'a str,
    country: Option<&'a str>,
    method: ResolutionMethod,
}

#[derive(Serialize)]
struct GeoSummary {
    unique_strings: usize,
    gazetteer_resolved: usize,
    fallback_resolved: usize,
    unresolved: usize,
    gazetteer_rate: f64,
    fallback_rate: f64,
    total_rate: f64,
    warnings: Vec<String>,
}

fn classifier(p: &Pipeline) -> Result<Option<Box<dyn CountryClassifier>>, PipelineError> {
    let g = &p.config.geo;
    let interval = Duration::from_millis(g.min_interval_ms);
    Ok(match g.fallback {
        FallbackKind::None => None,
        FallbackKind::Mock => {
            let path = g.mock_answers.as_ref().expect("validated");
            let mock = MockClassifier::load(path).map_err(|e| PipelineError::io(path, e))?;
            Some(Box::new(RateLimited::new(mock, interval)))
        }
        #[cfg(feature = "http")]
        FallbackKind::Http => match crate::geo::HttpClassifier::from_env(Duration::from_secs(g.timeout_secs)) {
            Some(c) => Some(Box::new(RateLimited::new(c, interval))),
            None => {
                log::warn!("geo: {} is not set; fallback disabled", crate::geo::URL_ENV);
                None
            }
        },
        #[cfg(not(feature = "http"))]
        FallbackKind::Http => {
            log::warn!("geo: built without the `http` feature; fallback disabled");
            None
        }
    })
}

fn geo(p: &Pipeline, dir: &Path) -> Result<Rows, PipelineError> {
    let corpus = p.load_corpus()?;
    let g = &p.config.geo;
    let gazetteer = match &g.gazetteer_dir {
        Some(d) => Gazetteer::load_dir(d)?,
        None => Gazetteer::bundled(),
    };
    let mut cache = match &g.cache {
        Some(path) => GeoCache::open(path)?,
        None => GeoCache::in_memory(),
    };
    let client = classifier(p)?;
    let (assignments, results, report) =
        resolve_corpus(&corpus, &gazetteer, client.as_deref(), &mut cache, g.batch_size)?;
    log::info!(
        "geo: {} classifier calls, {} cache hits",
        report.client_calls,
        report.cache_hits
    );
    let path = dir.join("assignments.jsonl");
    assignments
        .write_jsonl(&path)
        .map_err(|e| PipelineError::io(&path, e))?;
    let rows_: Vec<ResolutionRow> = results
        .iter()
        .map(|r| ResolutionRow {
            affiliation_string: &r.affiliation_string,
            country: r.country.as_deref(),
            method: r.method,
        })
        .collect();
    write_jsonl(&dir.join("resolutions.jsonl"), &rows_)?;
    // Call and cache-hit counts depend on cache state, so they stay out of the outputs.
    let summary = GeoSummary {
        unique_strings: report.unique_strings,
        gazetteer_resolved: report.gazetteer_resolved,
        fallback_resolved: report.fallback_resolved,
        unresolved: report.unresolved,
        gazetteer_rate: report.gazetteer_rate,
        fallback_rate: report.fallback_rate,
        total_rate: report.total_rate,
        warnings: report.warnings.clone(),
    };
    write_json(&dir.join("report.json"), &summary)?;
    Ok(rows([
        ("unique_strings", report.unique_strings),
        ("gazetteer_resolved", report.gazetteer_resolved),
        ("fallback_resolved", report.fallback_resolved),
        ("unresolved", report.unresolved),
        ("authorships", assignments.len()),
    ]))
}

fn migrate(p: &Pipeline, dir: &Path) -> Result<Rows, PipelineError> {
    let corpus = p.load_corpus()?;
    let links = p.load_links()?;
    let countries = p.load_assignments()?;
    let m = &p.config.migration;
    let grid = detect_all(&corpus, &links, &countries, &m.thresholds, &m.persistence);
    let truth = ground_truth(&corpus);
    let counts = publication_counts(&links);
    let validated = grid_validate(&grid, &truth, &counts, &m.strata);
    let events: Vec<&MigrationEvent> = grid.cells.iter().flat_map(|(_, e)| e.values()).collect();
    write_jsonl(&dir.join("events.jsonl"), &events)?;
    write_json(&dir.join("grid.json"), &validated)?;
    validated.write_csv(dir).map_err(|e| PipelineError::format(dir, e))?;
    let migrants = grid
        .get(&validated.selection.base)
        .map(|e| e.values().filter(|e| e.migrated).count())
        .unwrap_or(0);
    Ok(rows([
        ("events", events.len()),
        ("graduates_with_truth", truth.len()),
        ("base_migrants", migrants),
    ]))
}

#[derive(Serialize)]
struct ForeignShareRow {
    cohort: i32,
    foreign_national_share: f64,
}

#[derive(Serialize)]
struct CorrelationRow {
    horizon: i32,
    rho: Option<f64>,
    note: String,
}

#[derive(Serialize)]
struct GroupRow {
    group: &'static str,
    graduates: usize,
    mean_publications: f64,
    measure: String,
    share_any: f64,
    graduates_with_any: usize,
    rate_given_any: Option<f64>,
}

#[derive(Serialize)]
struct GapRow {
    measure: String,
    relative_gap: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct Selected {
    base: MigrationParams,
    high_precision: MigrationParams,
    high_recall: MigrationParams,
}

fn events_for(all: &[MigrationEvent], params: &MigrationParams) -> BTreeMap<String, MigrationEvent> {
    all.iter()
        .filter(|e| params.matches(&MigrationParams::new(e.prob_threshold, e.k)))
        .map(|e| (e.graduate_id.clone(), e.clone()))
        .collect()
}

fn analyze(p: &Pipeline, dir: &Path) -> Result<Rows, PipelineError> {
    let corpus = p.load_corpus()?;
    let links = p.load_links()?;
    let countries = p.load_assignments()?;
    let mdir = p.stage_dir(Stage::Migrate);
    let all_events: Vec<MigrationEvent> = read_jsonl(&mdir.join("events.jsonl"))?;
    let grid: MigrationGrid = read_json(&mdir.join("grid.json"))?;
    let sel = &grid.selection;
    let base = events_for(&all_events, &sel.base);
    let high_precision = events_for(&all_events, &sel.high_precision);
    let high_recall = events_for(&all_events, &sel.high_recall);
    write_json(
        &dir.join("selection.json"),
        &Selected {
            base: sel.base,
            high_precision: sel.high_precision,
            high_recall: sel.high_recall,
        },
    )?;

    let a = &p.config.analytics;
    let regions = match &a.regions {
        Some(path) => RegionMap::load(path).map_err(|e| PipelineError::io(path, e))?,
        None => RegionMap::bundled(),
    };
    let counts = publication_counts(&links);
    let eligible = eligible_graduates(&corpus, &counts, a.min_pubs);
    let cohort_config = CohortConfig {
        horizons: a.horizons.clone(),
        data_end_year: a.data_end_year,
    };
    let sets = EventSets {
        base: &base,
        high_precision: &high_precision,
        high_recall: &high_recall,
    };
    let series = cohort_emigration(&eligible, sets, &cohort_config, &regions);
    csv(&dir.join("cohort_shares.csv"), &series.cells)?;
    csv(&dir.join("cohort_absent.csv"), &series.absent)?;
    csv(&dir.join("field_shares.csv"), &series.fields)?;
    csv(&dir.join("destination_shares.csv"), &series.destinations)?;
    let fn_rows: Vec<ForeignShareRow> = series
        .foreign_national_share
        .iter()
        .map(|(&cohort, &s)| ForeignShareRow {
            cohort,
            foreign_national_share: s,
        })
        .collect();
    csv(&dir.join("foreign_national_share.csv"), &fn_rows)?;
    let correlations: Vec<CorrelationRow> = a
        .horizons
        .iter()
        .map(
            |&h| match series_correlation(&series.share_series(h), &series.foreign_national_share) {
                Ok(rho) => CorrelationRow {
                    horizon: h,
                    rho: Some(rho),
                    note: String::new(),
                },
                Err(e) => CorrelationRow {
                    horizon: h,
                    rho: None,
                    note: e.to_string(),
                },
            },
        )
        .collect();
    csv(&dir.join("correlations.csv"), &correlations)?;

    let outcomes = build_outcomes(&corpus, &links, &base, &eligible, a.compare_horizon);
    let (group_rows, gap_rows) = match group_compare(&outcomes) {
        Ok(cmp) => {
            let mut g = Vec::new();
            for (name, s) in [("stayers", &cmp.stayers), ("leavers", &cmp.leavers)] {
                for (measure, m) in &s.measures {
                    g.push(GroupRow {
                        group: name,
                        graduates: s.graduates,
                        mean_publications: s.mean_publications,
                        measure: measure.clone(),
                        share_any: m.share_any,
                        graduates_with_any: m.graduates_with_any,
                        rate_given_any: m.rate_given_any,
                    });
                }
            }
            let mut gaps = vec![GapRow {
                measure: "publications".into(),
                relative_gap: cmp.publication_gap,
            }];
            gaps.extend(MEASURES.iter().map(|m| GapRow {
                measure: m.to_string(),
                relative_gap: cmp.rate_gaps.get(*m).copied().flatten(),
            }));
            (g, gaps)
        }
        Err(e) => {
            log::warn!("analyze: group comparison skipped: {e}");
            (Vec::new(), Vec::new())
        }
    };
    csv(&dir.join("group_compare.csv"), &group_rows)?;
    csv(&dir.join("group_gaps.csv"), &gap_rows)?;

    let categories = categorize_publications(&corpus, &links, &base, Some(&countries));
    let shares = citation_shares(&corpus.patent_citations, &categories);
    csv(&dir.join("citation_shares.csv"), &shares.rows)?;
    csv(&dir.join("destination_citation_shares.csv"), &shares.destination_rows)?;
    let categorized: BTreeSet<&String> = categories.keys().collect();

    Ok(rows([
        ("eligible_graduates", eligible.len()),
        ("cohort_cells", series.cells.len()),
        ("categorized_publications", categorized.len()),
        ("citation_share_rows", shares.rows.len()),
    ]))
}
