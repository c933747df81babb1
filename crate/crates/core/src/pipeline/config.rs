use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytics::{DEFAULT_DATA_END_YEAR, DEFAULT_HORIZONS};
use crate::blocking::MatchWindow;
use crate::geo::DEFAULT_BATCH_SIZE;
use crate::linkmodel::{CascadeConfig, TrainConfig};
use crate::migration::{DEFAULT_PERSISTENCE, DEFAULT_STRATA, DEFAULT_THRESHOLDS};

use super::PipelineError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputsSection {
    /// Ingest manifest listing the raw record files.
    pub manifest: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BlockingSection {
    pub min_gap: i32,
    pub max_gap: i32,
    pub shard_rows: usize,
}

impl Default for BlockingSection {
    fn default() -> Self {
        let w = MatchWindow::default();
        BlockingSection {
            min_gap: w.min_gap,
            max_gap: w.max_gap,
            shard_rows: 100_000,
        }
    }
}

impl BlockingSection {
    pub fn window(&self) -> MatchWindow {
        MatchWindow {
            min_gap: self.min_gap,
            max_gap: self.max_gap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NamesSection {
    pub jw_threshold: f64,
    /// Replacement nickname table; the bundled one is used when absent.
    pub nicknames: Option<PathBuf>,
}

impl Default for NamesSection {
    fn default() -> Self {
        NamesSection {
            jw_threshold: 0.9,
            nicknames: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FallbackKind {
    None,
    /// File-backed answers, one `text<TAB>code` pair per line.
    Mock,
    /// JSON-over-HTTP endpoint named by the environment.
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeoSection {
    pub gazetteer_dir: Option<PathBuf>,
    pub fallback: FallbackKind,
    pub mock_answers: Option<PathBuf>,
    pub cache: Option<PathBuf>,
    pub batch_size: usize,
    pub min_interval_ms: u64,
    pub timeout_secs: u64,
}

impl Default for GeoSection {
    fn default() -> Self {
        GeoSection {
            gazetteer_dir: None,
            fallback: FallbackKind::None,
            mock_answers: None,
            cache: None,
            batch_size: DEFAULT_BATCH_SIZE,
            min_interval_ms: 0,
            timeout_secs: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MigrationSection {
    pub thresholds: Vec<f64>,
    pub persistence: Vec<u32>,
    pub strata: Vec<usize>,
}

impl Default for MigrationSection {
    fn default() -> Self {
        MigrationSection {
            thresholds: DEFAULT_THRESHOLDS.to_vec(),
            persistence: DEFAULT_PERSISTENCE.to_vec(),
            strata: DEFAULT_STRATA.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalyticsSection {
    pub horizons: Vec<i32>,
    pub data_end_year: i32,
    pub min_pubs: usize,
    /// Stayer/leaver split and publication window, in years after graduation.
    pub compare_horizon: i32,
    pub regions: Option<PathBuf>,
}

impl Default for AnalyticsSection {
    fn default() -> Self {
        AnalyticsSection {
            horizons: DEFAULT_HORIZONS.to_vec(),
            data_end_year: DEFAULT_DATA_END_YEAR,
            min_pubs: 5,
            compare_horizon: 5,
            regions: None,
        }
    }
}

/// Shared configuration for every stage, read from TOML.
///
/// Relative paths are resolved against the directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub inputs: InputsSection,
    #[serde(default)]
    pub blocking: BlockingSection,
    #[serde(default)]
    pub names: NamesSection,
    #[serde(default)]
    pub model: CascadeConfig,
    #[serde(default)]
    pub geo: GeoSection,
    #[serde(default)]
    pub migration: MigrationSection,
    #[serde(default)]
    pub analytics: AnalyticsSection,
}

fn invalid(msg: impl Into<String>) -> PipelineError {
    PipelineError::InvalidConfig(msg.into())
}

fn check_unit(name: &str, x: f64) -> Result<(), PipelineError> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(invalid(format!("{name} = {x} is outside [0, 1]")))
    }
}

fn check_train(name: &str, t: &TrainConfig) -> Result<(), PipelineError> {
    if t.hidden.is_empty() || t.hidden.contains(&0) {
        return Err(invalid(format!("{name}.hidden needs at least one non-empty layer")));
    }
    if t.batch_size == 0 || t.max_epochs == 0 {
        return Err(invalid(format!("{name}.batch_size and max_epochs must be positive")));
    }
    if !(t.learning_rate > 0.0 && t.learning_rate.is_finite()) {
        return Err(invalid(format!("{name}.learning_rate must be positive")));
    }
    if !(0.0..1.0).contains(&t.momentum) || !(0.0..1.0).contains(&t.holdout_fraction) || t.weight_decay < 0.0 {
        return Err(invalid(format!(
            "{name}: momentum and holdout_fraction must be in [0, 1), weight_decay non-negative"
        )));
    }
    Ok(())
}

impl PipelineConfig {
    pub fn new(manifest: PathBuf, output_dir: PathBuf, seed: u64) -> Self {
        PipelineConfig {
            seed,
            output_dir,
            inputs: InputsSection { manifest },
            blocking: Default::default(),
            names: Default::default(),
            model: Default::default(),
            geo: Default::default(),
            migration: Default::default(),
            analytics: Default::default(),
        }
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, PipelineError> {
        let mut c: PipelineConfig = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        c.resolve_relative(base);
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    fn resolve_relative(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output_dir);
        fix(&mut self.inputs.manifest);
        for p in [
            &mut self.names.nicknames,
            &mut self.geo.gazetteer_dir,
            &mut self.geo.mock_answers,
            &mut self.geo.cache,
            &mut self.analytics.regions,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.blocking.min_gap > self.blocking.max_gap {
            return Err(invalid("blocking.min_gap exceeds blocking.max_gap"));
        }
        if self.blocking.shard_rows == 0 {
            return Err(invalid("blocking.shard_rows must be positive"));
        }
        check_unit("names.jw_threshold", self.names.jw_threshold)?;
        let m = &self.model;
        check_unit("model.stage1_threshold", m.stage1_threshold)?;
        check_unit("model.stage2_threshold", m.stage2_threshold)?;
        check_unit("model.high_confidence_threshold", m.high_confidence_threshold)?;
        if [
            m.stage1_positives,
            m.stage1_negatives,
            m.stage2_positives,
            m.stage2_negatives,
        ]
        .contains(&0)
        {
            return Err(invalid("model sample sizes must be positive"));
        }
        check_train("model.stage1", &m.stage1)?;
        check_train("model.stage2", &m.stage2)?;
        if self.geo.fallback == FallbackKind::Mock && self.geo.mock_answers.is_none() {
            return Err(invalid("geo.fallback = \"mock\" requires geo.mock_answers"));
        }
        if self.geo.batch_size == 0 {
            return Err(invalid("geo.batch_size must be positive"));
        }
        let mig = &self.migration;
        if mig.thresholds.is_empty() || mig.persistence.is_empty() || mig.strata.is_empty() {
            return Err(invalid(
                "migration thresholds, persistence and strata must be non-empty",
            ));
        }
        for &t in &mig.thresholds {
            check_unit("migration.thresholds", t)?;
        }
        if mig.persistence.contains(&0) {
            return Err(invalid("migration.persistence values must be at least 1"));
        }
        let a = &self.analytics;
        if a.horizons.is_empty() || a.horizons.iter().any(|&h| h <= 0) {
            return Err(invalid("analytics.horizons must be positive"));
        }
        if a.compare_horizon <= 0 {
            return Err(invalid("analytics.compare_horizon must be positive"));
        }
        Ok(())
    }

    /// Settings for the synthetic desk fixture: small balanced samples and
    /// short mini-batches so training fits the corpus size.
    pub fn desk(manifest: PathBuf, output_dir: PathBuf, seed: u64) -> Self {
        let mut c = PipelineConfig::new(manifest, output_dir, seed);
        c.model.stage1_positives = 1200;
        c.model.stage1_negatives = 1200;
        c.model.stage2_positives = 150;
        c.model.stage2_negatives = 150;
        c.model.stage1 = TrainConfig {
            batch_size: 64,
            max_epochs: 80,
            ..TrainConfig::default()
        };
        c.model.stage2 = TrainConfig {
            batch_size: 32,
            max_epochs: 100,
            ..TrainConfig::stage2_default()
        };
        c.geo.fallback = FallbackKind::Mock;
        c.analytics.min_pubs = 3;
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = PipelineConfig::parse(
            "seed = 3\noutput_dir = \"out\"\n[inputs]\nmanifest = \"data/manifest.toml\"\n",
            Path::new("/base"),
        )
        .unwrap();
        assert_eq!(c.output_dir, PathBuf::from("/base/out"));
        assert_eq!(c.inputs.manifest, PathBuf::from("/base/data/manifest.toml"));
        assert_eq!(c.migration.thresholds, vec![0.5, 0.6, 0.7, 0.8]);
        assert_eq!(c.model.stage1_positives, 25_000);
    }

    #[test]
    fn out_of_range_rejected() {
        let text = "seed = 1\noutput_dir = \"o\"\n[inputs]\nmanifest = \"m\"\n[model]\nstage1_threshold = 1.5\n";
        assert!(matches!(
            PipelineConfig::parse(text, Path::new(".")),
            Err(PipelineError::InvalidConfig(_))
        ));
        let text = "seed = 1\noutput_dir = \"o\"\n[inputs]\nmanifest = \"m\"\n[blocking]\nmin_gap = 3\nmax_gap = 1\n";
        assert!(PipelineConfig::parse(text, Path::new(".")).is_err());
    }

    #[test]
    fn toml_round_trip() {
        let c = PipelineConfig::desk("/m.toml".into(), "/out".into(), 9);
        let mut back: PipelineConfig = toml::from_str(&c.to_toml()).unwrap();
        back.resolve_relative(Path::new("/"));
        assert_eq!(back, c);
    }
}
