//! Staged batch pipeline with file checkpoints.
//!
//! Each stage writes its outputs under `<output_dir>/<stage>/` followed by a
//! `manifest.json` recording the hashes of its inputs and outputs, the hash
//! of the config it depends on, the seed and row counts. A stage whose
//! manifest still matches is skipped unless forced.

mod config;
mod stages;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use config::{
    AnalyticsSection, BlockingSection, FallbackKind, GeoSection, InputsSection, MigrationSection, NamesSection,
    PipelineConfig,
};

use crate::analytics::AnalyticsError;
use crate::features::FeatureError;
use crate::geo::GeoError;
use crate::linkmodel::ModelError;
use crate::records::{IngestManifest, RecordsError};
use crate::synth::{self, SynthConfig};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("stage `{stage}` needs `{upstream}`, which has not been run")]
    MissingUpstream { stage: Stage, upstream: Stage },
    #[error("stage `{stage}` needs `{upstream}`, whose outputs are stale: {reason}")]
    StaleUpstream {
        stage: Stage,
        upstream: Stage,
        reason: String,
    },
    #[error(transparent)]
    Records(#[from] RecordsError),
    #[error(transparent)]
    Features(#[from] FeatureError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl PipelineError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        PipelineError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn format(path: &Path, message: impl fmt::Display) -> Self {
        PipelineError::Format {
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }

    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::InvalidConfig(_) => 2,
            PipelineError::MissingUpstream { .. } => 3,
            PipelineError::StaleUpstream { .. } => 4,
            PipelineError::Records(_) => 5,
            PipelineError::Features(_) => 6,
            PipelineError::Model(_) => 7,
            PipelineError::Geo(_) => 8,
            PipelineError::Analytics(_) => 9,
            PipelineError::Io { .. } | PipelineError::Format { .. } => 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Ingest,
    Candidates,
    Features,
    Train,
    Classify,
    Geo,
    Migrate,
    Analyze,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Ingest,
        Stage::Candidates,
        Stage::Features,
        Stage::Train,
        Stage::Classify,
        Stage::Geo,
        Stage::Migrate,
        Stage::Analyze,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Candidates => "candidates",
            Stage::Features => "features",
            Stage::Train => "train",
            Stage::Classify => "classify",
            Stage::Geo => "geo",
            Stage::Migrate => "migrate",
            Stage::Analyze => "analyze",
        }
    }

    pub fn upstream(self) -> &'static [Stage] {
        match self {
            Stage::Ingest => &[],
            Stage::Candidates => &[Stage::Ingest],
            Stage::Features => &[Stage::Ingest, Stage::Candidates],
            Stage::Train => &[Stage::Candidates, Stage::Features],
            Stage::Classify => &[Stage::Ingest, Stage::Candidates, Stage::Features, Stage::Train],
            Stage::Geo => &[Stage::Ingest],
            Stage::Migrate => &[Stage::Ingest, Stage::Classify, Stage::Geo],
            Stage::Analyze => &[Stage::Ingest, Stage::Classify, Stage::Geo, Stage::Migrate],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| format!("unknown stage `{s}`"))
    }
}

/// Run record written next to every stage's outputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageManifest {
    pub stage: Stage,
    pub seed: u64,
    pub config_hash: String,
    /// Input label to SHA-256. Upstream outputs are labelled by their path
    /// under the output directory.
    pub inputs: BTreeMap<String, String>,
    /// Output path under the output directory to SHA-256.
    pub outputs: BTreeMap<String, String>,
    pub rows: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StageStatus {
    Missing,
    Stale(String),
    Current(StageManifest),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageOutcome {
    pub stage: Stage,
    pub skipped: bool,
    pub manifest: StageManifest,
}

pub fn sha256_file(path: &Path) -> Result<String, PipelineError> {
    let bytes = std::fs::read(path).map_err(|e| PipelineError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn sha256_json<T: Serialize>(value: &T) -> String {
    hex::encode(Sha256::digest(serde_json::to_vec(value).expect("config serializes")))
}

/// Files below `dir`, sorted, as `/`-separated paths relative to `base`.
fn list_files(dir: &Path, base: &Path) -> Result<Vec<(String, PathBuf)>, PipelineError> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).map_err(|e| PipelineError::io(&d, e))? {
            let path = entry.map_err(|e| PipelineError::io(&d, e))?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(base).unwrap_or(&path);
                let label = rel
                    .components()
                    .map(|c| c.as_os_str().to_string_lossy())
                    .collect::<Vec<_>>()
                    .join("/");
                out.push((label, path));
            }
        }
    }
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Pipeline {
    pub config: PipelineConfig,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Self {
        Pipeline { config }
    }

    pub fn load(config_path: &Path) -> Result<Self, PipelineError> {
        Ok(Pipeline::new(PipelineConfig::load(config_path)?))
    }

    pub fn stage_dir(&self, stage: Stage) -> PathBuf {
        self.config.output_dir.join(stage.name())
    }

    fn manifest_path(&self, stage: Stage) -> PathBuf {
        self.stage_dir(stage).join(MANIFEST_FILE)
    }

    pub fn read_manifest(&self, stage: Stage) -> Result<Option<StageManifest>, PipelineError> {
        let path = self.manifest_path(stage);
        if !path.exists() {
            return Ok(None);
        }
        let text = std::fs::read_to_string(&path).map_err(|e| PipelineError::io(&path, e))?;
        serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| PipelineError::format(&path, e))
    }

    /// Hash of the config sections a stage reads, plus the seed where it matters.
    pub fn config_hash(&self, stage: Stage) -> String {
        // File locations stay out of the hash; their contents are tracked as inputs.
        let mut c = self.config.clone();
        let mask = |p: &mut Option<PathBuf>| {
            if p.is_some() {
                *p = Some(PathBuf::from("set"));
            }
        };
        mask(&mut c.names.nicknames);
        mask(&mut c.geo.gazetteer_dir);
        mask(&mut c.geo.mock_answers);
        mask(&mut c.geo.cache);
        mask(&mut c.analytics.regions);
        let section = match stage {
            Stage::Ingest => Ok(serde_json::Value::Null),
            Stage::Candidates => serde_json::to_value((&c.blocking, &c.names)),
            Stage::Features => serde_json::to_value(&c.names),
            Stage::Train => serde_json::to_value((&c.model, c.seed)),
            Stage::Classify => serde_json::to_value(&c.model),
            Stage::Geo => serde_json::to_value(&c.geo),
            Stage::Migrate => serde_json::to_value(&c.migration),
            Stage::Analyze => serde_json::to_value(&c.analytics),
        }
        .expect("config serializes");
        sha256_json(&(stage, section))
    }

    /// Input hashes a stage would see right now: upstream outputs from their
    /// manifests, plus raw inputs and resource files hashed from disk.
    fn current_inputs(&self, stage: Stage) -> Result<BTreeMap<String, String>, PipelineError> {
        let mut inputs = BTreeMap::new();
        for &up in stage.upstream() {
            if let Some(m) = self.read_manifest(up)? {
                inputs.extend(m.outputs);
            }
        }
        let mut resource = |label: &str, path: &Option<PathBuf>| -> Result<(), PipelineError> {
            let Some(p) = path else { return Ok(()) };
            if p.is_dir() {
                for (rel, file) in list_files(p, p)? {
                    inputs.insert(format!("resource/{label}/{rel}"), sha256_file(&file)?);
                }
            } else {
                inputs.insert(format!("resource/{label}"), sha256_file(p)?);
            }
            Ok(())
        };
        let c = &self.config;
        match stage {
            Stage::Ingest => {
                let mpath = &c.inputs.manifest;
                let manifest = IngestManifest::load(mpath)?;
                let base = mpath.parent().unwrap_or(Path::new("."));
                inputs.insert("input/manifest".into(), sha256_file(mpath)?);
                for p in manifest.input_paths() {
                    let rel = p.strip_prefix(base).unwrap_or(p).to_string_lossy().replace('\\', "/");
                    inputs.insert(format!("input/{rel}"), sha256_file(p)?);
                }
            }
            Stage::Candidates | Stage::Features => resource("nicknames", &c.names.nicknames)?,
            Stage::Geo => {
                resource("gazetteer", &c.geo.gazetteer_dir)?;
                if c.geo.fallback == FallbackKind::Mock {
                    resource("mock_answers", &c.geo.mock_answers)?;
                }
            }
            Stage::Analyze => resource("regions", &c.analytics.regions)?,
            _ => {}
        }
        Ok(inputs)
    }

    fn outputs_match(&self, m: &StageManifest) -> Result<Option<String>, PipelineError> {
        let dir = self.stage_dir(m.stage);
        let on_disk: BTreeMap<String, PathBuf> = if dir.exists() {
            list_files(&dir, &self.config.output_dir)?
                .into_iter()
                .filter(|(rel, _)| !rel.ends_with(&format!("/{MANIFEST_FILE}")))
                .collect()
        } else {
            BTreeMap::new()
        };
        if on_disk.len() != m.outputs.len() || on_disk.keys().ne(m.outputs.keys()) {
            return Ok(Some("output file set changed".into()));
        }
        for (rel, hash) in &m.outputs {
            if &sha256_file(&on_disk[rel])? != hash {
                return Ok(Some(format!("{rel} was modified")));
            }
        }
        Ok(None)
    }

    /// Whether a stage's recorded outputs still follow from the current
    /// config, inputs and (recursively) upstream stages.
    pub fn status(&self, stage: Stage) -> Result<StageStatus, PipelineError> {
        let Some(m) = self.read_manifest(stage)? else {
            return Ok(StageStatus::Missing);
        };
        if m.config_hash != self.config_hash(stage) || m.seed != self.config.seed {
            return Ok(StageStatus::Stale("config changed".into()));
        }
        if let Some(reason) = self.outputs_match(&m)? {
            return Ok(StageStatus::Stale(reason));
        }
        for &up in stage.upstream() {
            match self.status(up)? {
                StageStatus::Current(_) => {}
                StageStatus::Missing => return Ok(StageStatus::Stale(format!("upstream `{up}` missing"))),
                StageStatus::Stale(r) => return Ok(StageStatus::Stale(format!("upstream `{up}`: {r}"))),
            }
        }
        match self.current_inputs(stage) {
            Ok(inputs) if inputs == m.inputs => Ok(StageStatus::Current(m)),
            Ok(_) => Ok(StageStatus::Stale("inputs changed".into())),
            Err(e) => Ok(StageStatus::Stale(e.to_string())),
        }
    }

    /// Runs one stage after checking that every upstream stage is current.
    pub fn run_stage(&self, stage: Stage, force: bool) -> Result<StageOutcome, PipelineError> {
        for &up in stage.upstream() {
            match self.status(up)? {
                StageStatus::Current(_) => {}
                StageStatus::Missing => return Err(PipelineError::MissingUpstream { stage, upstream: up }),
                StageStatus::Stale(reason) => {
                    return Err(PipelineError::StaleUpstream {
                        stage,
                        upstream: up,
                        reason,
                    })
                }
            }
        }
        if !force {
            if let StageStatus::Current(manifest) = self.status(stage)? {
                log::info!("{stage}: up to date, skipped");
                return Ok(StageOutcome {
                    stage,
                    skipped: true,
                    manifest,
                });
            }
        }
        let inputs = self.current_inputs(stage)?;
        let dir = self.stage_dir(stage);
        if dir.exists() {
            std::fs::remove_dir_all(&dir).map_err(|e| PipelineError::io(&dir, e))?;
        }
        std::fs::create_dir_all(&dir).map_err(|e| PipelineError::io(&dir, e))?;
        log::info!("{stage}: running");
        let rows = stages::run(self, stage, &dir)?;
        let mut outputs = BTreeMap::new();
        for (rel, path) in list_files(&dir, &self.config.output_dir)? {
            outputs.insert(rel, sha256_file(&path)?);
        }
        let manifest = StageManifest {
            stage,
            seed: self.config.seed,
            config_hash: self.config_hash(stage),
            inputs,
            outputs,
            rows,
        };
        let path = self.manifest_path(stage);
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| PipelineError::io(&path, e))?;
        for (k, v) in &manifest.rows {
            log::info!("{stage}: {k} = {v}");
        }
        Ok(StageOutcome {
            stage,
            skipped: false,
            manifest,
        })
    }

    /// Runs every stage in order.
    pub fn run_all(&self, force: bool) -> Result<Vec<StageOutcome>, PipelineError> {
        Stage::ALL.iter().map(|&s| self.run_stage(s, force)).collect()
    }
}

/// Writes a synthetic corpus, mock fallback answers and a matching
/// `pipeline.toml` into `dir`. Returns the config path.
pub fn write_desk_fixture(dir: &Path, synth_config: &SynthConfig) -> Result<PathBuf, PipelineError> {
    let out = synth::generate(synth_config);
    out.write_to_dir(&dir.join("corpus"))?;
    let mut config = PipelineConfig::desk(
        PathBuf::from("corpus/manifest.toml"),
        PathBuf::from("out"),
        synth_config.seed,
    );
    config.geo.mock_answers = Some(PathBuf::from("corpus/mock_geo.tsv"));
    config.geo.cache = Some(PathBuf::from("geo_cache.jsonl"));
    config.analytics.data_end_year = synth_config.data_end_year;
    let path = dir.join("pipeline.toml");
    std::fs::write(&path, config.to_toml()).map_err(|e| PipelineError::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_names_round_trip() {
        for s in Stage::ALL {
            assert_eq!(s.name().parse::<Stage>().unwrap(), s);
        }
        assert!("bogus".parse::<Stage>().is_err());
    }

    #[test]
    fn upstream_precedes_stage() {
        for (i, s) in Stage::ALL.iter().enumerate() {
            for up in s.upstream() {
                assert!(Stage::ALL[..i].contains(up));
            }
        }
    }

    #[test]
    fn exit_codes_distinct() {
        let errs = [
            PipelineError::InvalidConfig(String::new()),
            PipelineError::MissingUpstream {
                stage: Stage::Train,
                upstream: Stage::Features,
            },
            PipelineError::StaleUpstream {
                stage: Stage::Train,
                upstream: Stage::Features,
                reason: String::new(),
            },
            PipelineError::Analytics(AnalyticsError::ZeroVariance),
            PipelineError::Format {
                path: PathBuf::new(),
                message: String::new(),
            },
        ];
        let codes: std::collections::BTreeSet<i32> = errs.iter().map(PipelineError::exit_code).collect();
        assert_eq!(codes.len(), errs.len());
        assert!(!codes.contains(&0) && !codes.contains(&1));
    }
}
