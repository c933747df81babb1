use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::codec::{Reader, Writer, KIND_CASCADE, MAGIC};
use super::mlp::{train_mlp, MlpModel, TrainConfig};
use super::ModelError;
use crate::analytics::ConfusionMatrix;
use crate::blocking::CandidateLink;
use crate::features::FeatureLayout;
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CascadeConfig {
    pub stage1_positives: usize,
    pub stage1_negatives: usize,
    pub stage2_positives: usize,
    pub stage2_negatives: usize,
    pub stage1_threshold: f64,
    pub stage2_threshold: f64,
    pub high_confidence_threshold: f64,
    pub stage1: TrainConfig,
    pub stage2: TrainConfig,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        CascadeConfig {
            stage1_positives: 25_000,
            stage1_negatives: 25_000,
            stage2_positives: 10_000,
            stage2_negatives: 10_000,
            stage1_threshold: 0.5,
            stage2_threshold: 0.5,
            high_confidence_threshold: 0.7,
            stage1: TrainConfig::default(),
            stage2: TrainConfig::stage2_default(),
        }
    }
}

/// Stage 1 scores every candidate on the full layout; stage 2 re-scores the
/// stage-1 positives on the simplified layout plus the stage-1 probability.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeModel {
    pub layout: FeatureLayout,
    pub stage1: MlpModel,
    pub stage2: MlpModel,
    pub stage1_threshold: f64,
    pub stage2_threshold: f64,
    pub high_confidence_threshold: f64,
}

impl CascadeModel {
    pub fn with_thresholds(mut self, stage1: f64, stage2: f64) -> Self {
        self.stage1_threshold = stage1;
        self.stage2_threshold = stage2;
        self
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::default();
        w.buf.extend_from_slice(MAGIC);
        w.u8(KIND_CASCADE);
        w.f64(self.stage1_threshold);
        w.f64(self.stage2_threshold);
        w.f64(self.high_confidence_threshold);
        w.u32(self.layout.embedding_dim as u32);
        w.strs(&self.layout.ethnicity_vocab);
        self.stage1.encode(&mut w);
        self.stage2.encode(&mut w);
        w.buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ModelError> {
        let mut r = Reader::new(bytes);
        r.header(KIND_CASCADE)?;
        let stage1_threshold = r.f64()?;
        let stage2_threshold = r.f64()?;
        let high_confidence_threshold = r.f64()?;
        let layout = FeatureLayout {
            embedding_dim: r.u32()? as usize,
            ethnicity_vocab: r.strs()?,
        };
        let stage1 = MlpModel::decode(&mut r)?;
        let stage2 = MlpModel::decode(&mut r)?;
        r.finish()?;
        let m = CascadeModel {
            layout,
            stage1,
            stage2,
            stage1_threshold,
            stage2_threshold,
            high_confidence_threshold,
        };
        m.stage1.check_layout(&m.layout.full_names())?;
        m.stage2.check_layout(&m.layout.stage2_names())?;
        Ok(m)
    }

    pub fn save(&self, path: &std::path::Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_bytes())
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ModelError> {
        let bytes = std::fs::read(path).map_err(|e| ModelError::Format(format!("{}: {e}", path.display())))?;
        Self::from_bytes(&bytes)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub training_rows: usize,
    pub epochs: usize,
    pub best_epoch: usize,
    pub holdout_accuracy: f64,
    pub final_holdout_loss: f64,
}

impl StageSummary {
    fn of(m: &MlpModel, rows: usize) -> Self {
        StageSummary {
            training_rows: rows,
            epochs: m.meta.epochs,
            best_epoch: m.meta.best_epoch,
            holdout_accuracy: m.meta.holdout_accuracy,
            final_holdout_loss: m.meta.holdout_loss.get(m.meta.best_epoch).copied().unwrap_or(f64::NAN),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeTrainingReport {
    pub labeled_positives: usize,
    pub labeled_negatives: usize,
    pub stage1: StageSummary,
    pub stage1_true_positives: usize,
    pub stage1_false_positives: usize,
    pub stage2: StageSummary,
}

fn sample(pool: &[usize], n: usize, rng: &mut ChaCha8Rng, what: &str) -> Result<Vec<usize>, ModelError> {
    if pool.len() < n {
        return Err(ModelError::InsufficientData {
            what: what.to_string(),
            required: n,
            available: pool.len(),
        });
    }
    let mut p = pool.to_vec();
    p.shuffle(rng);
    p.truncate(n);
    p.sort_unstable();
    Ok(p)
}

/// Trains both stages on labeled full-layout rows.
///
/// Balanced samples are drawn without replacement. Stage 2 samples only
/// from rows that stage 1 scores at or above its threshold.
pub fn train_cascade(
    layout: &FeatureLayout,
    rows: &[Vec<f64>],
    labels: &[Option<bool>],
    config: &CascadeConfig,
    seed: u64,
) -> Result<(CascadeModel, CascadeTrainingReport), ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pos: Vec<usize> = (0..rows.len()).filter(|&i| labels[i] == Some(true)).collect();
    let neg: Vec<usize> = (0..rows.len()).filter(|&i| labels[i] == Some(false)).collect();

    let s1_pos = sample(&pos, config.stage1_positives, &mut rng, "stage-1 positive sample")?;
    let s1_neg = sample(&neg, config.stage1_negatives, &mut rng, "stage-1 negative sample")?;
    let s1_idx: Vec<usize> = s1_pos.iter().chain(&s1_neg).copied().collect();
    let s1_rows: Vec<Vec<f64>> = s1_idx.iter().map(|&i| rows[i].clone()).collect();
    let s1_labels: Vec<bool> = s1_idx.iter().map(|&i| labels[i] == Some(true)).collect();
    let stage1 = train_mlp(
        layout.full_names(),
        &s1_rows,
        &s1_labels,
        &config.stage1,
        seed.wrapping_add(1),
    )?;

    let labeled: Vec<usize> = pos.iter().chain(&neg).copied().collect();
    let p1: Vec<f64> = par::try_map(&labeled, |&i| stage1.predict(&rows[i]))?;
    let mut tp_pool = Vec::new();
    let mut fp_pool = Vec::new();
    let mut p1_of = BTreeMap::new();
    for (&i, &p) in labeled.iter().zip(&p1) {
        p1_of.insert(i, p);
        if p >= config.stage1_threshold {
            if labels[i] == Some(true) {
                tp_pool.push(i);
            } else {
                fp_pool.push(i);
            }
        }
    }
    tp_pool.sort_unstable();
    fp_pool.sort_unstable();

    let s2_pos = sample(&tp_pool, config.stage2_positives, &mut rng, "stage-2 positive sample")?;
    let s2_neg = sample(&fp_pool, config.stage2_negatives, &mut rng, "stage-2 negative sample")?;
    let s2_idx: Vec<usize> = s2_pos.iter().chain(&s2_neg).copied().collect();
    let s2_rows: Vec<Vec<f64>> = s2_idx.iter().map(|&i| layout.stage2_row(&rows[i], p1_of[&i])).collect();
    let s2_labels: Vec<bool> = s2_idx.iter().map(|&i| labels[i] == Some(true)).collect();
    let stage2 = train_mlp(
        layout.stage2_names(),
        &s2_rows,
        &s2_labels,
        &config.stage2,
        seed.wrapping_add(2),
    )?;

    let report = CascadeTrainingReport {
        labeled_positives: pos.len(),
        labeled_negatives: neg.len(),
        stage1: StageSummary::of(&stage1, s1_rows.len()),
        stage1_true_positives: tp_pool.len(),
        stage1_false_positives: fp_pool.len(),
        stage2: StageSummary::of(&stage2, s2_rows.len()),
    };
    Ok((
        CascadeModel {
            layout: layout.clone(),
            stage1,
            stage2,
            stage1_threshold: config.stage1_threshold,
            stage2_threshold: config.stage2_threshold,
            high_confidence_threshold: config.high_confidence_threshold,
        },
        report,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    pub graduate_id: String,
    pub pub_id: String,
    pub author_position: u32,
    pub p1: f64,
    /// Present only for candidates that passed stage 1.
    pub p2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptedLink {
    pub graduate_id: String,
    pub pub_id: String,
    pub author_position: u32,
    pub p1: f64,
    pub p2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<bool>,
}

/// Final links: at most one graduate per `(pub_id, author_position)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinkedSample {
    pub links: Vec<AcceptedLink>,
    pub by_graduate: BTreeMap<String, Vec<String>>,
}

impl LinkedSample {
    pub fn from_links(mut links: Vec<AcceptedLink>) -> Self {
        links.sort_by(|a, b| {
            (&a.graduate_id, &a.pub_id, a.author_position).cmp(&(&b.graduate_id, &b.pub_id, b.author_position))
        });
        let mut by_graduate: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for l in &links {
            by_graduate
                .entry(l.graduate_id.clone())
                .or_default()
                .push(l.pub_id.clone());
        }
        for v in by_graduate.values_mut() {
            v.dedup();
        }
        LinkedSample { links, by_graduate }
    }
}

/// Confusion counts over labeled candidates.
///
/// `stage2` covers only candidates that passed stage 1; `final_` covers all
/// labeled candidates after disambiguation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CascadeConfusion {
    pub stage1: ConfusionMatrix,
    pub stage2: ConfusionMatrix,
    pub final_: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeOutput {
    pub scored: Vec<ScoredCandidate>,
    pub linked: LinkedSample,
    pub confusion: Option<CascadeConfusion>,
}

/// Keeps the highest-`p2` graduate per authorship slot; ties go to the
/// lexicographically smallest graduate id.
pub fn disambiguate(accepted: Vec<AcceptedLink>) -> Vec<AcceptedLink> {
    let mut best: BTreeMap<(String, u32), AcceptedLink> = BTreeMap::new();
    for l in accepted {
        let key = (l.pub_id.clone(), l.author_position);
        match best.get(&key) {
            Some(cur) if cur.p2 > l.p2 || (cur.p2 == l.p2 && cur.graduate_id <= l.graduate_id) => {}
            _ => {
                best.insert(key, l);
            }
        }
    }
    best.into_values().collect()
}

/// Applies both stages to candidates with full-layout feature rows.
pub fn run_cascade(
    model: &CascadeModel,
    candidates: &[CandidateLink],
    rows: &[Vec<f64>],
) -> Result<CascadeOutput, ModelError> {
    if candidates.len() != rows.len() {
        return Err(ModelError::LayoutMismatch {
            expected: candidates.len(),
            found: rows.len(),
        });
    }
    let idx: Vec<usize> = (0..rows.len()).collect();
    let scores: Vec<(f64, Option<f64>)> = par::try_map(&idx, |&i| {
        let p1 = model.stage1.predict(&rows[i])?;
        let p2 = if p1 >= model.stage1_threshold {
            Some(model.stage2.predict(&model.layout.stage2_row(&rows[i], p1))?)
        } else {
            None
        };
        Ok::<_, ModelError>((p1, p2))
    })?;

    let scored: Vec<ScoredCandidate> = candidates
        .iter()
        .zip(&scores)
        .map(|(c, &(p1, p2))| ScoredCandidate {
            graduate_id: c.graduate_id.clone(),
            pub_id: c.pub_id.clone(),
            author_position: c.author_position,
            p1,
            p2,
            label: c.label,
        })
        .collect();

    let accepted: Vec<AcceptedLink> = scored
        .iter()
        .filter_map(|s| {
            let p2 = s.p2?;
            (p2 >= model.stage2_threshold).then(|| AcceptedLink {
                graduate_id: s.graduate_id.clone(),
                pub_id: s.pub_id.clone(),
                author_position: s.author_position,
                p1: s.p1,
                p2,
                label: s.label,
            })
        })
        .collect();
    let linked = LinkedSample::from_links(disambiguate(accepted));

    let confusion = if scored.iter().any(|s| s.label.is_some()) {
        let mut stage1 = ConfusionMatrix::default();
        let mut stage2 = ConfusionMatrix::default();
        let mut final_ = ConfusionMatrix::default();
        let kept: std::collections::BTreeSet<(&str, &str, u32)> = linked
            .links
            .iter()
            .map(|l| (l.graduate_id.as_str(), l.pub_id.as_str(), l.author_position))
            .collect();
        for s in &scored {
            let Some(label) = s.label else { continue };
            let pass1 = s.p1 >= model.stage1_threshold;
            stage1.record(pass1, label);
            if pass1 {
                stage2.record(s.p2.is_some_and(|p| p >= model.stage2_threshold), label);
            }
            final_.record(
                kept.contains(&(s.graduate_id.as_str(), s.pub_id.as_str(), s.author_position)),
                label,
            );
        }
        Some(CascadeConfusion { stage1, stage2, final_ })
    } else {
        None
    };

    Ok(CascadeOutput {
        scored,
        linked,
        confusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn link(g: &str, p: &str, pos: u32, p2: f64) -> AcceptedLink {
        AcceptedLink {
            graduate_id: g.into(),
            pub_id: p.into(),
            author_position: pos,
            p1: 0.9,
            p2,
            label: None,
        }
    }

    #[test]
    fn disambiguation_keeps_max() {
        let out = disambiguate(vec![link("G1", "P", 0, 0.6), link("G2", "P", 0, 0.8)]);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].graduate_id, "G2");
    }

    #[test]
    fn disambiguation_tie_goes_to_smallest_id() {
        let out = disambiguate(vec![
            link("G9", "P", 0, 0.7),
            link("G3", "P", 0, 0.7),
            link("G5", "P", 0, 0.7),
        ]);
        assert_eq!(out[0].graduate_id, "G3");
    }

    #[test]
    fn separate_positions_both_kept() {
        let out = disambiguate(vec![link("G1", "P", 0, 0.6), link("G2", "P", 1, 0.8)]);
        assert_eq!(out.len(), 2);
    }
}
