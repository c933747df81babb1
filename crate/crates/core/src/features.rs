//! Per-candidate feature vectors.
//!
//! Embeddings are L2-normalised before any distance is taken. The scaled
//! Euclidean feature is `1 - e^2/2` (the cosine of the two unit vectors)
//! and the scaled Manhattan feature is `1 - m/dim`; both lie in `[-1, 1]`.
//! Name frequencies enter as `ln(1 + count)`.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blocking::CandidateLink;
use crate::names::{jaro_winkler, parse_name, MatchClass, NameKit, NameParts};
use crate::par;
use crate::records::{Corpus, GraduateRecord, PublicationRecord};

/// Years before graduation in which a cited paper can count as the graduate's own work.
pub const SELF_CITE_LOOKBACK: i32 = 5;

pub const UNKNOWN_ETHNICITY: &str = "unknown";

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("vector dimensions differ: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("candidate refers to unknown {kind} {id}")]
    UnknownRecord { kind: &'static str, id: String },
    #[error("feature shard: {0}")]
    Shard(String),
}

pub fn euclidean(d: &[f64], p: &[f64]) -> Result<f64, FeatureError> {
    same_len(d, p)?;
    Ok(d.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
}

pub fn manhattan(d: &[f64], p: &[f64]) -> Result<f64, FeatureError> {
    same_len(d, p)?;
    Ok(d.iter().zip(p).map(|(a, b)| (a - b).abs()).sum())
}

pub fn diff(d: &[f64], p: &[f64]) -> Result<Vec<f64>, FeatureError> {
    same_len(d, p)?;
    Ok(d.iter().zip(p).map(|(a, b)| a - b).collect())
}

pub fn hadamard(d: &[f64], p: &[f64]) -> Result<Vec<f64>, FeatureError> {
    same_len(d, p)?;
    Ok(d.iter().zip(p).map(|(a, b)| a * b).collect())
}

fn same_len(d: &[f64], p: &[f64]) -> Result<(), FeatureError> {
    if d.len() != p.len() {
        return Err(FeatureError::Dimension(d.len(), p.len()));
    }
    Ok(())
}

/// Unit-L2 copy of `v`; the zero vector is returned unchanged.
pub fn unit_normalize(v: &[f32]) -> Vec<f64> {
    let v: Vec<f64> = v.iter().map(|&x| x as f64).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        v
    } else {
        v.into_iter().map(|x| x / norm).collect()
    }
}

/// Features with no value get imputed zeros and one of these flags.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissingFlags {
    pub embedding: bool,
    pub citations: bool,
    pub advisor: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationFeatures {
    pub direct_self_cite: bool,
    pub indirect_self_cite: bool,
    pub advisor_coauthor: bool,
    pub advisor_cited: bool,
    pub has_advisor_info: bool,
    pub has_committee_info: bool,
    pub missing_citations: bool,
    pub missing_advisor: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub euclidean: f64,
    pub manhattan: f64,
    pub diff_vec: Vec<f64>,
    pub hadamard_vec: Vec<f64>,
    pub direct_self_cite: bool,
    pub indirect_self_cite: bool,
    pub advisor_coauthor: bool,
    pub advisor_cited: bool,
    pub has_advisor_info: bool,
    pub has_committee_info: bool,
    pub jw_display: f64,
    pub jw_raw: f64,
    pub nickname_match: bool,
    pub log_freq_first: f64,
    pub log_freq_last: f64,
    pub log_freq_full: f64,
    pub ethnicity_onehot: Vec<f64>,
    pub year_gap: i32,
    pub missing: MissingFlags,
}

fn b(x: bool) -> f64 {
    if x {
        1.0
    } else {
        0.0
    }
}

impl FeatureVector {
    /// Flattens into the full column order of [`FeatureLayout::full_names`].
    pub fn to_row(&self) -> Vec<f64> {
        let mut r = Vec::with_capacity(2 + 2 * self.diff_vec.len() + 20 + self.ethnicity_onehot.len());
        r.push(self.euclidean);
        r.push(self.manhattan);
        r.extend_from_slice(&self.diff_vec);
        r.extend_from_slice(&self.hadamard_vec);
        r.extend([
            b(self.direct_self_cite),
            b(self.indirect_self_cite),
            b(self.advisor_coauthor),
            b(self.advisor_cited),
            b(self.has_advisor_info),
            b(self.has_committee_info),
            self.jw_display,
            self.jw_raw,
            b(self.nickname_match),
            self.log_freq_first,
            self.log_freq_last,
            self.log_freq_full,
        ]);
        r.extend_from_slice(&self.ethnicity_onehot);
        r.push(self.year_gap as f64);
        r.extend([
            b(self.missing.embedding),
            b(self.missing.citations),
            b(self.missing.advisor),
        ]);
        r
    }
}

/// Column layout of the full (stage-1) and simplified (stage-2) feature rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureLayout {
    pub embedding_dim: usize,
    /// Sorted ingested labels followed by [`UNKNOWN_ETHNICITY`].
    pub ethnicity_vocab: Vec<String>,
}

const SCALAR_NAMES: [&str; 12] = [
    "direct_self_cite",
    "indirect_self_cite",
    "advisor_coauthor",
    "advisor_cited",
    "has_advisor_info",
    "has_committee_info",
    "jw_display",
    "jw_raw",
    "nickname_match",
    "log_freq_first",
    "log_freq_last",
    "log_freq_full",
];

pub const STAGE1_PROBABILITY: &str = "stage1_probability";

impl FeatureLayout {
    pub fn from_corpus(corpus: &Corpus) -> Self {
        let labels: BTreeSet<String> = corpus
            .graduates
            .values()
            .filter_map(|g| g.ethnicity_label.clone())
            .filter(|l| l != UNKNOWN_ETHNICITY)
            .collect();
        let mut ethnicity_vocab: Vec<String> = labels.into_iter().collect();
        ethnicity_vocab.push(UNKNOWN_ETHNICITY.to_string());
        FeatureLayout {
            embedding_dim: corpus.embedding_dim,
            ethnicity_vocab,
        }
    }

    pub fn full_names(&self) -> Vec<String> {
        let mut n = vec!["euclidean".to_string(), "manhattan".to_string()];
        n.extend((0..self.embedding_dim).map(|i| format!("diff_{i}")));
        n.extend((0..self.embedding_dim).map(|i| format!("hadamard_{i}")));
        n.extend(SCALAR_NAMES.iter().map(|s| s.to_string()));
        n.extend(self.ethnicity_vocab.iter().map(|e| format!("ethnicity_{e}")));
        n.push("year_gap".into());
        n.extend(["missing_embedding", "missing_citations", "missing_advisor"].map(String::from));
        n
    }

    pub fn full_len(&self) -> usize {
        2 + 2 * self.embedding_dim + SCALAR_NAMES.len() + self.ethnicity_vocab.len() + 1 + 3
    }

    /// Positions in the full row kept by the simplified layout: everything
    /// except the difference and Hadamard vectors.
    pub fn simplified_indices(&self) -> Vec<usize> {
        let skip = 2..2 + 2 * self.embedding_dim;
        (0..self.full_len()).filter(|i| !skip.contains(i)).collect()
    }

    /// Stage-2 column names: simplified features plus the stage-1 probability.
    pub fn stage2_names(&self) -> Vec<String> {
        let full = self.full_names();
        let mut n: Vec<String> = self.simplified_indices().into_iter().map(|i| full[i].clone()).collect();
        n.push(STAGE1_PROBABILITY.into());
        n
    }

    pub fn stage2_row(&self, full_row: &[f64], p1: f64) -> Vec<f64> {
        let mut r: Vec<f64> = self.simplified_indices().into_iter().map(|i| full_row[i]).collect();
        r.push(p1);
        r
    }

    fn ethnicity_onehot(&self, label: Option<&str>) -> Vec<f64> {
        let mut v = vec![0.0; self.ethnicity_vocab.len()];
        let idx = label
            .and_then(|l| self.ethnicity_vocab.iter().position(|e| e == l))
            .unwrap_or(self.ethnicity_vocab.len() - 1);
        v[idx] = 1.0;
        v
    }
}

fn fold(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Case-folded substring test of the institution name inside an affiliation string.
pub fn institution_aligns(institution: &str, affiliation: &str) -> bool {
    let inst = fold(institution);
    !inst.is_empty() && fold(affiliation).contains(&inst)
}

/// Read-only inputs for feature assembly.
pub struct FeatureContext<'a> {
    pub corpus: &'a Corpus,
    pub kit: &'a NameKit,
    pub layout: FeatureLayout,
}

impl<'a> FeatureContext<'a> {
    pub fn new(corpus: &'a Corpus, kit: &'a NameKit) -> Self {
        FeatureContext {
            corpus,
            kit,
            layout: FeatureLayout::from_corpus(corpus),
        }
    }

    fn graduate(&self, id: &str) -> Result<(&'a GraduateRecord, &'a NameParts), FeatureError> {
        let unknown = || FeatureError::UnknownRecord {
            kind: "graduate",
            id: id.to_string(),
        };
        let g = self.corpus.graduates.get(id).ok_or_else(unknown)?;
        let n = self.kit.graduates.get(id).ok_or_else(unknown)?;
        Ok((g, n))
    }

    fn publication(&self, id: &str) -> Result<&'a PublicationRecord, FeatureError> {
        self.corpus
            .publications
            .get(id)
            .ok_or_else(|| FeatureError::UnknownRecord {
                kind: "publication",
                id: id.to_string(),
            })
    }

    /// A cited paper is the graduate's own prior work when some author is
    /// name-compatible, the affiliation names the graduate's institution, and
    /// it appeared in the years leading up to graduation.
    fn is_own_prior_paper(&self, g: &GraduateRecord, gname: &NameParts, p: &PublicationRecord) -> bool {
        if p.pub_year < g.grad_year - SELF_CITE_LOOKBACK || p.pub_year > g.grad_year {
            return false;
        }
        p.authorships.iter().any(|a| {
            institution_aligns(&g.institution, &a.affiliation_string)
                && self
                    .kit
                    .compatible_authorship(gname, &a.display_name, &a.raw_name)
                    .is_compatible()
        })
    }

    fn cites_own_prior(&self, g: &GraduateRecord, gname: &NameParts, p: &PublicationRecord) -> bool {
        p.cited_pub_ids
            .iter()
            .filter_map(|id| self.corpus.publications.get(id))
            .any(|c| self.is_own_prior_paper(g, gname, c))
    }

    fn advisor_author(
        &self,
        g: &GraduateRecord,
        advisors: &[NameParts],
        p: &PublicationRecord,
        skip: Option<u32>,
    ) -> bool {
        p.authorships.iter().filter(|a| Some(a.position) != skip).any(|a| {
            institution_aligns(&g.institution, &a.affiliation_string)
                && advisors.iter().any(|adv| {
                    self.kit
                        .compatible_authorship(adv, &a.display_name, &a.raw_name)
                        .is_compatible()
                })
        })
    }

    pub fn citation_features(&self, c: &CandidateLink) -> Result<CitationFeatures, FeatureError> {
        let (g, gname) = self.graduate(&c.graduate_id)?;
        let p = self.publication(&c.pub_id)?;
        let mut f = CitationFeatures {
            has_advisor_info: !g.advisor_names.is_empty(),
            has_committee_info: !g.committee_names.is_empty(),
            missing_citations: p.cited_pub_ids.is_empty(),
            ..Default::default()
        };
        f.missing_advisor = !f.has_advisor_info && !f.has_committee_info;

        let cited: Vec<&PublicationRecord> = p
            .cited_pub_ids
            .iter()
            .filter_map(|id| self.corpus.publications.get(id))
            .collect();
        f.direct_self_cite = cited.iter().any(|q| self.is_own_prior_paper(g, gname, q));
        f.indirect_self_cite = cited.iter().any(|q| self.cites_own_prior(g, gname, q));

        if !f.missing_advisor {
            let advisors: Vec<NameParts> = g
                .advisor_names
                .iter()
                .chain(&g.committee_names)
                .filter_map(|n| parse_name(n).ok())
                .collect();
            f.advisor_coauthor = self.advisor_author(g, &advisors, p, Some(c.author_position));
            f.advisor_cited = cited.iter().any(|q| self.advisor_author(g, &advisors, q, None));
        }
        Ok(f)
    }

    pub fn assemble(&self, c: &CandidateLink) -> Result<FeatureVector, FeatureError> {
        let (g, gname) = self.graduate(&c.graduate_id)?;
        let p = self.publication(&c.pub_id)?;
        let dim = self.layout.embedding_dim;

        let (euclid, manh, diff_vec, hadamard_vec, missing_embedding) = match (&g.embedding, &p.embedding) {
            (Some(ge), Some(pe)) => {
                let d = unit_normalize(ge);
                let q = unit_normalize(pe);
                if d.len() != dim || q.len() != dim {
                    return Err(FeatureError::Dimension(d.len().max(q.len()), dim));
                }
                let e = euclidean(&d, &q)?;
                let m = manhattan(&d, &q)?;
                (
                    1.0 - e * e / 2.0,
                    1.0 - m / dim as f64,
                    diff(&d, &q)?,
                    hadamard(&d, &q)?,
                    false,
                )
            }
            _ => (0.0, 0.0, vec![0.0; dim], vec![0.0; dim], true),
        };

        let cf = self.citation_features(c)?;
        let a = p
            .authorship(c.author_position)
            .ok_or_else(|| FeatureError::UnknownRecord {
                kind: "authorship",
                id: format!("{}#{}", c.pub_id, c.author_position),
            })?;
        let gfull = gname.full();
        let jw_to = |s: &str| parse_name(s).map(|n| jaro_winkler(&gfull, &n.full())).unwrap_or(0.0);
        let freqs = &self.kit.frequencies;
        let ln1p = |n: u64| (n as f64).ln_1p();

        Ok(FeatureVector {
            euclidean: euclid,
            manhattan: manh,
            diff_vec,
            hadamard_vec,
            direct_self_cite: cf.direct_self_cite,
            indirect_self_cite: cf.indirect_self_cite,
            advisor_coauthor: cf.advisor_coauthor,
            advisor_cited: cf.advisor_cited,
            has_advisor_info: cf.has_advisor_info,
            has_committee_info: cf.has_committee_info,
            jw_display: jw_to(&a.display_name),
            jw_raw: jw_to(&a.raw_name),
            nickname_match: c.match_class == MatchClass::NicknameBased,
            log_freq_first: ln1p(freqs.first_count(gname)),
            log_freq_last: ln1p(freqs.last_count(gname)),
            log_freq_full: ln1p(freqs.full_count(gname)),
            ethnicity_onehot: self.layout.ethnicity_onehot(g.ethnicity_label.as_deref()),
            year_gap: p.pub_year - g.grad_year,
            missing: MissingFlags {
                embedding: missing_embedding,
                citations: cf.missing_citations,
                advisor: cf.missing_advisor,
            },
        })
    }

    /// Full-layout rows for all candidates, in input order.
    pub fn assemble_rows(&self, candidates: &[CandidateLink]) -> Result<Vec<Vec<f64>>, FeatureError> {
        par::try_map(candidates, |c| self.assemble(c).map(|f| f.to_row()))
    }
}

/// Binary feature rows.
///
/// Layout (little-endian):
///
/// ```text
/// magic    8 bytes "LFFEAT\0\x01"
/// ncols    u32
/// names    ncols times: u16 byte length, UTF-8 bytes
/// nrows    u64
/// rows     nrows times: u64 candidate index, ncols x f64
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub columns: Vec<String>,
    pub index: Vec<u64>,
    pub rows: Vec<Vec<f64>>,
}

const FEAT_MAGIC: &[u8; 8] = b"LFFEAT\0\x01";

impl FeatureMatrix {
    pub fn to_bytes(&self) -> Vec<u8> {
        let ncols = self.columns.len();
        let mut buf = Vec::with_capacity(16 + self.rows.len() * (8 + 8 * ncols));
        buf.extend_from_slice(FEAT_MAGIC);
        buf.extend_from_slice(&(ncols as u32).to_le_bytes());
        for c in &self.columns {
            buf.extend_from_slice(&(c.len() as u16).to_le_bytes());
            buf.extend_from_slice(c.as_bytes());
        }
        buf.extend_from_slice(&(self.rows.len() as u64).to_le_bytes());
        for (idx, row) in self.index.iter().zip(&self.rows) {
            buf.extend_from_slice(&idx.to_le_bytes());
            for x in row {
                buf.extend_from_slice(&x.to_le_bytes());
            }
        }
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FeatureError> {
        let bad = |m: &str| FeatureError::Shard(m.to_string());
        let mut cur = Cursor { bytes, pos: 0 };
        if cur.take(8).ok_or_else(|| bad("truncated header"))? != FEAT_MAGIC {
            return Err(bad("bad magic"));
        }
        let ncols = cur.u32().ok_or_else(|| bad("truncated header"))? as usize;
        let mut columns = Vec::with_capacity(ncols);
        for _ in 0..ncols {
            let len = cur.u16().ok_or_else(|| bad("truncated column name"))? as usize;
            let raw = cur.take(len).ok_or_else(|| bad("truncated column name"))?;
            columns.push(String::from_utf8(raw.to_vec()).map_err(|_| bad("column name not UTF-8"))?);
        }
        let nrows = cur.u64().ok_or_else(|| bad("truncated header"))? as usize;
        if bytes.len() - cur.pos != nrows * (8 + 8 * ncols) {
            return Err(bad("row data length does not match header"));
        }
        let mut index = Vec::with_capacity(nrows);
        let mut rows = Vec::with_capacity(nrows);
        for _ in 0..nrows {
            index.push(cur.u64().unwrap());
            rows.push((0..ncols).map(|_| f64::from_bits(cur.u64().unwrap())).collect());
        }
        Ok(FeatureMatrix { columns, index, rows })
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(&self.to_bytes())?;
        w.flush()
    }

    pub fn read(path: &Path) -> Result<Self, FeatureError> {
        let mut bytes = Vec::new();
        File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| FeatureError::Shard(format!("{}: {e}", path.display())))?;
        Self::from_bytes(&bytes)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let s = self.bytes.get(self.pos..self.pos + n)?;
        self.pos += n;
        Some(s)
    }
    fn u16(&mut self) -> Option<u16> {
        self.take(2).map(|b| u16::from_le_bytes(b.try_into().unwrap()))
    }
    fn u32(&mut self) -> Option<u32> {
        self.take(4).map(|b| u32::from_le_bytes(b.try_into().unwrap()))
    }
    fn u64(&mut self) -> Option<u64> {
        self.take(8).map(|b| u64::from_le_bytes(b.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::names::NicknameTable;
    use crate::records::Authorship;
    use approx::assert_abs_diff_eq;

    #[test]
    fn distance_examples() {
        assert_abs_diff_eq!(
            euclidean(&[1.0, 0.0], &[0.0, 1.0]).unwrap(),
            2f64.sqrt(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(euclidean(&[0.6, 0.8], &[0.8, 0.6]).unwrap(), 0.28284, epsilon = 1e-5);
        assert_eq!(euclidean(&[0.3, 0.4], &[0.3, 0.4]).unwrap(), 0.0);
        assert_eq!(manhattan(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 2.0);
        assert_abs_diff_eq!(manhattan(&[0.6, 0.8], &[0.8, 0.6]).unwrap(), 0.4, epsilon = 1e-12);
        assert_eq!(manhattan(&[0.3, 0.4], &[0.3, 0.4]).unwrap(), 0.0);
    }

    #[test]
    fn elementwise_examples() {
        assert_eq!(diff(&[1.0, 2.0], &[0.5, 1.0]).unwrap(), vec![0.5, 1.0]);
        assert_eq!(hadamard(&[1.0, 2.0], &[0.5, 1.0]).unwrap(), vec![0.5, 2.0]);
        assert_eq!(hadamard(&[3.0, -2.0], &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn dimension_mismatch() {
        assert_eq!(euclidean(&[1.0], &[1.0, 2.0]), Err(FeatureError::Dimension(1, 2)));
        assert!(hadamard(&[1.0], &[]).is_err());
    }

    fn grad(name: &str, emb: Option<Vec<f32>>) -> GraduateRecord {
        let mut g: GraduateRecord = serde_json::from_value(serde_json::json!({
            "graduate_id": "G1", "raw_name": name, "grad_year": 2000,
            "institution": "Stanford University", "ethnicity_label": "asian"
        }))
        .unwrap();
        g.embedding = emb;
        g
    }

    fn publication(
        id: &str,
        year: i32,
        name: &str,
        aff: &str,
        cites: &[&str],
        emb: Option<Vec<f32>>,
    ) -> PublicationRecord {
        PublicationRecord {
            pub_id: id.into(),
            pub_year: year,
            authorships: vec![Authorship {
                position: 0,
                display_name: name.into(),
                raw_name: name.into(),
                affiliation_string: aff.into(),
                registry_id: None,
            }],
            embedding: emb,
            cited_pub_ids: cites.iter().map(|s| s.to_string()).collect(),
            extra: Default::default(),
        }
    }

    fn cand(pub_id: &str) -> CandidateLink {
        CandidateLink {
            graduate_id: "G1".into(),
            pub_id: pub_id.into(),
            author_position: 0,
            match_class: MatchClass::Exact,
            label: None,
        }
    }

    fn ctx_features(corpus: &Corpus, pub_id: &str) -> FeatureVector {
        let kit = NameKit::build(corpus, NicknameTable::bundled(), 0.9);
        FeatureContext::new(corpus, &kit).assemble(&cand(pub_id)).unwrap()
    }

    #[test]
    fn scaled_distances() {
        let c = Corpus::from_records(
            2,
            vec![grad("John Smith", Some(vec![3.0, 0.0]))],
            vec![
                publication("same", 2001, "John Smith", "", &[], Some(vec![1.0, 0.0])),
                publication("orth", 2001, "John Smith", "", &[], Some(vec![0.0, 5.0])),
            ],
        )
        .unwrap();
        let same = ctx_features(&c, "same");
        assert_abs_diff_eq!(same.euclidean, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(same.manhattan, 1.0, epsilon = 1e-12);
        let orth = ctx_features(&c, "orth");
        assert_abs_diff_eq!(orth.euclidean, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(orth.manhattan, 0.0, epsilon = 1e-12);
        assert!(!orth.missing.embedding);
    }

    #[test]
    fn missing_embedding_flagged() {
        let c = Corpus::from_records(
            2,
            vec![grad("John Smith", None)],
            vec![publication("p", 2001, "John Smith", "", &[], Some(vec![1.0, 0.0]))],
        )
        .unwrap();
        let f = ctx_features(&c, "p");
        assert!(f.missing.embedding);
        assert_eq!((f.euclidean, f.manhattan), (0.0, 0.0));
        assert_eq!(f.diff_vec, vec![0.0, 0.0]);
    }

    #[test]
    fn log_frequency_and_onehot() {
        let mut g2 = grad("John Lee", None);
        g2.graduate_id = "G2".into();
        g2.ethnicity_label = Some("white".into());
        let c = Corpus::from_records(
            2,
            vec![grad("John Smith", None), g2],
            vec![publication("p", 2003, "John Smith", "", &[], None)],
        )
        .unwrap();
        let f = ctx_features(&c, "p");
        assert_abs_diff_eq!(f.log_freq_first, 3f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(f.log_freq_last, 2f64.ln(), epsilon = 1e-12);
        assert_eq!(f.ethnicity_onehot, vec![1.0, 0.0, 0.0]);
        assert_eq!(f.year_gap, 3);
        assert_eq!(f.jw_display, 1.0);
    }

    #[test]
    fn direct_and_indirect_self_citation() {
        let stanford = "Dept. of Physics, Stanford University, Stanford, CA";
        let c = Corpus::from_records(
            2,
            vec![grad("John Smith", None)],
            vec![
                publication("own", 1998, "J. Smith", stanford, &[], None),
                publication("own_wrong_inst", 1998, "John Smith", "Harvard University", &[], None),
                publication("bridge", 2001, "Someone Else", "", &["own"], None),
                publication("direct", 2005, "John Smith", "", &["own"], None),
                publication("indirect", 2006, "John Smith", "", &["bridge"], None),
                publication("neither", 2006, "John Smith", "", &["own_wrong_inst"], None),
            ],
        )
        .unwrap();
        // "J. Smith" vs "John Smith" is not name-compatible (no middle names)
        let f = ctx_features(&c, "direct");
        assert!(!f.direct_self_cite);

        let c = Corpus::from_records(
            2,
            vec![grad("John Smith", None)],
            vec![
                publication("own", 1998, "John Smith", stanford, &[], None),
                publication("bridge", 2001, "Someone Else", "", &["own"], None),
                publication("direct", 2005, "John Smith", "", &["own"], None),
                publication("indirect", 2006, "John Smith", "", &["bridge"], None),
                publication("late", 2001, "John Smith", stanford, &[], None),
                publication("cites_late", 2006, "John Smith", "", &["late"], None),
            ],
        )
        .unwrap();
        let d = ctx_features(&c, "direct");
        assert!(d.direct_self_cite && !d.indirect_self_cite);
        let i = ctx_features(&c, "indirect");
        assert!(i.indirect_self_cite && !i.direct_self_cite);
        // published after graduation: outside the self-citation window
        assert!(!ctx_features(&c, "cites_late").direct_self_cite);
        assert!(!d.missing.citations);
        assert!(ctx_features(&c, "own").missing.citations);
    }

    #[test]
    fn advisor_features() {
        let mut g = grad("John Smith", None);
        g.advisor_names = vec!["Mary Jones".into()];
        let mut p = publication("p", 2002, "John Smith", "Stanford University", &["q"], None);
        p.authorships.push(Authorship {
            position: 1,
            display_name: "Mary Jones".into(),
            raw_name: String::new(),
            affiliation_string: "Stanford University".into(),
            registry_id: None,
        });
        let q = publication("q", 1995, "Mary Jones", "Physics, Stanford University", &[], None);
        let c = Corpus::from_records(2, vec![g], vec![p, q]).unwrap();
        let f = ctx_features(&c, "p");
        assert!(f.advisor_coauthor && f.advisor_cited && f.has_advisor_info);
        assert!(!f.has_committee_info && !f.missing.advisor);
    }

    #[test]
    fn no_committee_metadata() {
        let c = Corpus::from_records(
            2,
            vec![grad("John Smith", None)],
            vec![publication("p", 2001, "John Smith", "", &[], None)],
        )
        .unwrap();
        let f = ctx_features(&c, "p");
        assert!(!f.has_committee_info && !f.has_advisor_info);
        assert!(!f.advisor_coauthor && !f.advisor_cited);
        assert!(f.missing.advisor);
    }

    #[test]
    fn layout_lengths_agree() {
        let layout = FeatureLayout {
            embedding_dim: 4,
            ethnicity_vocab: vec!["a".into(), UNKNOWN_ETHNICITY.into()],
        };
        assert_eq!(layout.full_names().len(), layout.full_len());
        let names = layout.stage2_names();
        assert_eq!(names.len(), layout.full_len() - 8 + 1);
        assert!(!names
            .iter()
            .any(|n| n.starts_with("diff_") || n.starts_with("hadamard_")));
        assert_eq!(names.last().unwrap(), STAGE1_PROBABILITY);
    }

    #[test]
    fn feature_matrix_round_trip() {
        let m = FeatureMatrix {
            columns: vec!["a".into(), "b".into()],
            index: vec![0, 7],
            rows: vec![vec![1.0, -0.0], vec![f64::MIN_POSITIVE, 3.5]],
        };
        let bytes = m.to_bytes();
        let back = FeatureMatrix::from_bytes(&bytes).unwrap();
        assert_eq!(back.to_bytes(), bytes);
        assert!(FeatureMatrix::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }
}
