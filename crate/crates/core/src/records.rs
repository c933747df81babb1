//! Canonical record types and corpus ingestion.
//!
//! Inputs are line-delimited JSON files listed in an ingest manifest
//! (TOML). Embeddings may be inline (`"embedding": [...]`) or stored in a
//! sidecar `embeddings.bin`; see [`EmbeddingStore`] for that layout.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::jsonl;
use crate::names;
use crate::par;

/// Minimum patent-citation confidence retained at ingest (scale 1-10).
pub const MIN_CITATION_CONFIDENCE: u8 = 3;

pub const DEFAULT_EMBEDDING_DIM: usize = 768;
pub const DEFAULT_SAMPLE_WINDOW: (i32, i32) = (1980, 2019);

#[derive(Debug, Error)]
pub enum RecordsError {
    #[error("{file}:{line}: {message}")]
    Schema { file: String, line: usize, message: String },
    #[error("embedding for {id} has length {found}, expected {expected}")]
    Dimension { id: String, expected: usize, found: usize },
    #[error("duplicate {kind} id {id}")]
    DuplicateId { kind: &'static str, id: String },
    #[error("reading manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RecordsError + '_ {
    move |source| RecordsError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraduateRecord {
    pub graduate_id: String,
    pub raw_name: String,
    pub grad_year: i32,
    pub institution: String,
    #[serde(default)]
    pub subject: String,
    #[serde(default)]
    pub field: String,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub tech_areas: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub advisor_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub committee_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<f32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ethnicity_label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub foreign_national: Option<bool>,
    /// Authenticated researcher-registry id; present only in validation subsamples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub registry_id: Option<String>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Authorship {
    pub position: u32,
    #[serde(default)]
    pub display_name: String,
    #[serde(default)]
    pub raw_name: String,
    #[serde(default)]
    pub affiliation_string: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub registry_id: Option<String>,
}

impl Authorship {
    /// Preferred name for matching: display name, or the raw name when the display name is blank.
    pub fn best_name(&self) -> &str {
        if self.display_name.trim().is_empty() {
            &self.raw_name
        } else {
            &self.display_name
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublicationRecord {
    pub pub_id: String,
    pub pub_year: i32,
    pub authorships: Vec<Authorship>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<f32>>,
    #[serde(default)]
    pub cited_pub_ids: Vec<String>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

impl PublicationRecord {
    pub fn authorship(&self, position: u32) -> Option<&Authorship> {
        self.authorships.iter().find(|a| a.position == position)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PatentCitation {
    pub patent_id: String,
    pub filing_year: i32,
    pub assignee_country: String,
    pub cited_pub_id: String,
    pub confidence: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PatentPaperPair {
    pub patent_id: String,
    pub pub_id: String,
}

/// One employment spell from a labeled career history.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EmploymentStint {
    pub start_year: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_year: Option<i32>,
    pub country: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmploymentHistory {
    pub graduate_id: String,
    pub stints: Vec<EmploymentStint>,
}

/// Rows removed during ingestion. Kept on the corpus so reports can show them.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropStats {
    pub low_confidence_citations: usize,
    pub out_of_window_graduates: usize,
    pub duplicate_patent_paper_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestManifest {
    #[serde(default = "default_dim")]
    pub embedding_dim: usize,
    #[serde(default = "default_window")]
    pub sample_window: (i32, i32),
    pub graduates: PathBuf,
    pub publications: PathBuf,
    #[serde(default)]
    pub patent_citations: Option<PathBuf>,
    #[serde(default)]
    pub patent_paper_pairs: Option<PathBuf>,
    #[serde(default)]
    pub embeddings: Option<PathBuf>,
    #[serde(default)]
    pub employment_histories: Option<PathBuf>,
}

fn default_dim() -> usize {
    DEFAULT_EMBEDDING_DIM
}

fn default_window() -> (i32, i32) {
    DEFAULT_SAMPLE_WINDOW
}

impl IngestManifest {
    /// Loads a TOML manifest; relative paths are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self, RecordsError> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let mut m: IngestManifest = toml::from_str(&text).map_err(|e| RecordsError::Manifest {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        m.resolve_relative(base);
        Ok(m)
    }

    pub fn resolve_relative(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.graduates);
        fix(&mut self.publications);
        for p in [
            &mut self.patent_citations,
            &mut self.patent_paper_pairs,
            &mut self.embeddings,
            &mut self.employment_histories,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    /// Every input file the manifest refers to.
    pub fn input_paths(&self) -> Vec<&Path> {
        let mut v: Vec<&Path> = vec![&self.graduates, &self.publications];
        for p in [
            &self.patent_citations,
            &self.patent_paper_pairs,
            &self.embeddings,
            &self.employment_histories,
        ]
        .into_iter()
        .flatten()
        {
            v.push(p);
        }
        v
    }
}

/// All record collections, indexed by id. Immutable after ingestion.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub embedding_dim: usize,
    pub graduates: BTreeMap<String, GraduateRecord>,
    pub publications: BTreeMap<String, PublicationRecord>,
    pub patent_citations: Vec<PatentCitation>,
    pub patent_paper_pairs: BTreeSet<PatentPaperPair>,
    pub employment_histories: BTreeMap<String, Vec<EmploymentStint>>,
    pub drops: DropStats,
}

impl Corpus {
    pub fn new(embedding_dim: usize) -> Self {
        Corpus {
            embedding_dim,
            ..Default::default()
        }
    }

    /// Builds a corpus from in-memory records, enforcing the same invariants as file ingestion.
    pub fn from_records(
        embedding_dim: usize,
        graduates: Vec<GraduateRecord>,
        publications: Vec<PublicationRecord>,
    ) -> Result<Self, RecordsError> {
        let mut corpus = Corpus::new(embedding_dim);
        for g in graduates {
            check_graduate(&g, embedding_dim, "<memory>", 0)?;
            insert_unique(&mut corpus.graduates, "graduate", g.graduate_id.clone(), g)?;
        }
        for mut p in publications {
            check_publication(&mut p, embedding_dim, "<memory>", 0)?;
            insert_unique(&mut corpus.publications, "publication", p.pub_id.clone(), p)?;
        }
        Ok(corpus)
    }

    pub fn is_empty(&self) -> bool {
        self.graduates.is_empty() && self.publications.is_empty()
    }

    /// Writes the corpus as line-delimited files plus a manifest, returning the manifest path.
    ///
    /// Embeddings stay inline unless `sidecar` is set, in which case they go to `embeddings.bin`.
    pub fn write_to_dir(&self, dir: &Path, sidecar: bool) -> Result<PathBuf, RecordsError> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let mut store = EmbeddingStore::new(self.embedding_dim);
        let graduates: Vec<GraduateRecord> = self
            .graduates
            .values()
            .map(|g| {
                let mut g = g.clone();
                if sidecar {
                    if let Some(e) = g.embedding.take() {
                        store.insert(EmbeddingKind::Graduate, &g.graduate_id, e);
                    }
                }
                g
            })
            .collect();
        let publications: Vec<PublicationRecord> = self
            .publications
            .values()
            .map(|p| {
                let mut p = p.clone();
                if sidecar {
                    if let Some(e) = p.embedding.take() {
                        store.insert(EmbeddingKind::Publication, &p.pub_id, e);
                    }
                }
                p
            })
            .collect();

        let path = |name: &str| dir.join(name);
        jsonl::write_records(&path("graduates.jsonl"), &graduates).map_err(io_err(&path("graduates.jsonl")))?;
        jsonl::write_records(&path("publications.jsonl"), &publications)
            .map_err(io_err(&path("publications.jsonl")))?;
        jsonl::write_records(&path("patent_citations.jsonl"), &self.patent_citations)
            .map_err(io_err(&path("patent_citations.jsonl")))?;
        jsonl::write_records(&path("patent_paper_pairs.jsonl"), &self.patent_paper_pairs)
            .map_err(io_err(&path("patent_paper_pairs.jsonl")))?;
        let histories: Vec<EmploymentHistory> = self
            .employment_histories
            .iter()
            .map(|(id, stints)| EmploymentHistory {
                graduate_id: id.clone(),
                stints: stints.clone(),
            })
            .collect();
        jsonl::write_records(&path("employment_histories.jsonl"), &histories)
            .map_err(io_err(&path("employment_histories.jsonl")))?;
        if sidecar {
            store.write(&path("embeddings.bin"))?;
        }

        let manifest = IngestManifest {
            embedding_dim: self.embedding_dim,
            sample_window: DEFAULT_SAMPLE_WINDOW,
            graduates: "graduates.jsonl".into(),
            publications: "publications.jsonl".into(),
            patent_citations: Some("patent_citations.jsonl".into()),
            patent_paper_pairs: Some("patent_paper_pairs.jsonl".into()),
            embeddings: sidecar.then(|| "embeddings.bin".into()),
            employment_histories: Some("employment_histories.jsonl".into()),
        };
        let manifest_path = path("manifest.toml");
        let text = toml::to_string(&manifest).map_err(|e| RecordsError::Manifest {
            path: manifest_path.clone(),
            message: e.to_string(),
        })?;
        std::fs::write(&manifest_path, text).map_err(io_err(&manifest_path))?;
        Ok(manifest_path)
    }
}

fn insert_unique<T>(
    map: &mut BTreeMap<String, T>,
    kind: &'static str,
    id: String,
    value: T,
) -> Result<(), RecordsError> {
    if map.contains_key(&id) {
        return Err(RecordsError::DuplicateId { kind, id });
    }
    map.insert(id, value);
    Ok(())
}

fn schema(file: &str, line: usize, message: impl Into<String>) -> RecordsError {
    RecordsError::Schema {
        file: file.to_string(),
        line,
        message: message.into(),
    }
}

fn check_embedding(id: &str, e: &Option<Vec<f32>>, dim: usize) -> Result<(), RecordsError> {
    match e {
        Some(v) if v.len() != dim => Err(RecordsError::Dimension {
            id: id.to_string(),
            expected: dim,
            found: v.len(),
        }),
        _ => Ok(()),
    }
}

fn check_graduate(g: &GraduateRecord, dim: usize, file: &str, line: usize) -> Result<(), RecordsError> {
    if g.graduate_id.is_empty() {
        return Err(schema(file, line, "empty graduate_id"));
    }
    if names::parse_name(&g.raw_name).is_err() {
        return Err(schema(file, line, format!("unparseable raw_name {:?}", g.raw_name)));
    }
    check_embedding(&g.graduate_id, &g.embedding, dim)
}

fn check_publication(p: &mut PublicationRecord, dim: usize, file: &str, line: usize) -> Result<(), RecordsError> {
    if p.pub_id.is_empty() {
        return Err(schema(file, line, "empty pub_id"));
    }
    p.authorships.sort_by_key(|a| a.position);
    if p.authorships.windows(2).any(|w| w[0].position == w[1].position) {
        return Err(schema(
            file,
            line,
            format!("duplicate authorship position in {}", p.pub_id),
        ));
    }
    if let Some(a) = p
        .authorships
        .iter()
        .find(|a| a.display_name.trim().is_empty() && a.raw_name.trim().is_empty())
    {
        return Err(schema(
            file,
            line,
            format!("authorship {} of {} has no name", a.position, p.pub_id),
        ));
    }
    check_embedding(&p.pub_id, &p.embedding, dim)
}

fn parse_rows<T>(path: &Path) -> Result<Vec<(usize, T)>, RecordsError>
where
    T: for<'de> Deserialize<'de> + Send,
{
    let lines = jsonl::read_lines(path).map_err(io_err(path))?;
    let file = path.display().to_string();
    par::try_map(&lines, |(n, line)| {
        serde_json::from_str::<T>(line)
            .map(|row| (*n, row))
            .map_err(|e| schema(&file, *n, e.to_string()))
    })
}

/// Reads every file named in the manifest and enforces record invariants.
///
/// Parsing runs in parallel; merging is sequential into ordered maps so the
/// result does not depend on row order.
pub fn ingest_corpus(manifest: &IngestManifest) -> Result<Corpus, RecordsError> {
    let dim = manifest.embedding_dim;
    let (lo, hi) = manifest.sample_window;
    let mut corpus = Corpus::new(dim);

    let sidecar = match &manifest.embeddings {
        Some(p) => Some(EmbeddingStore::read(p)?),
        None => None,
    };
    if let Some(store) = &sidecar {
        if store.dim != dim {
            return Err(RecordsError::Dimension {
                id: manifest.embeddings.as_ref().unwrap().display().to_string(),
                expected: dim,
                found: store.dim,
            });
        }
    }

    let gfile = manifest.graduates.display().to_string();
    let mut seen = BTreeSet::new();
    for (line, mut g) in parse_rows::<GraduateRecord>(&manifest.graduates)? {
        if g.embedding.is_none() {
            if let Some(store) = &sidecar {
                g.embedding = store.get(EmbeddingKind::Graduate, &g.graduate_id).cloned();
            }
        }
        check_graduate(&g, dim, &gfile, line)?;
        if !seen.insert(g.graduate_id.clone()) {
            return Err(RecordsError::DuplicateId {
                kind: "graduate",
                id: g.graduate_id,
            });
        }
        if g.grad_year < lo || g.grad_year > hi {
            corpus.drops.out_of_window_graduates += 1;
            continue;
        }
        corpus.graduates.insert(g.graduate_id.clone(), g);
    }

    let pfile = manifest.publications.display().to_string();
    for (line, mut p) in parse_rows::<PublicationRecord>(&manifest.publications)? {
        if p.embedding.is_none() {
            if let Some(store) = &sidecar {
                p.embedding = store.get(EmbeddingKind::Publication, &p.pub_id).cloned();
            }
        }
        check_publication(&mut p, dim, &pfile, line)?;
        insert_unique(&mut corpus.publications, "publication", p.pub_id.clone(), p)?;
    }

    if let Some(path) = &manifest.patent_citations {
        let file = path.display().to_string();
        for (line, c) in parse_rows::<PatentCitation>(path)? {
            if !(1..=10).contains(&c.confidence) {
                return Err(schema(
                    &file,
                    line,
                    format!("confidence {} outside 1..=10", c.confidence),
                ));
            }
            if c.assignee_country.len() != 2 {
                return Err(schema(
                    &file,
                    line,
                    format!("bad assignee_country {:?}", c.assignee_country),
                ));
            }
            if c.confidence < MIN_CITATION_CONFIDENCE {
                corpus.drops.low_confidence_citations += 1;
            } else {
                corpus.patent_citations.push(c);
            }
        }
        corpus.patent_citations.sort();
    }

    if let Some(path) = &manifest.patent_paper_pairs {
        for (_, pair) in parse_rows::<PatentPaperPair>(path)? {
            if !corpus.patent_paper_pairs.insert(pair) {
                corpus.drops.duplicate_patent_paper_pairs += 1;
            }
        }
    }

    if let Some(path) = &manifest.employment_histories {
        for (_, h) in parse_rows::<EmploymentHistory>(path)? {
            let mut stints = h.stints;
            stints.sort();
            if corpus
                .employment_histories
                .insert(h.graduate_id.clone(), stints)
                .is_some()
            {
                return Err(RecordsError::DuplicateId {
                    kind: "employment history",
                    id: h.graduate_id,
                });
            }
        }
    }

    Ok(corpus)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IngestWarning {
    pub kind: String,
    pub from_id: String,
    pub to_id: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestCounts {
    pub graduates: usize,
    pub publications: usize,
    pub authorships: usize,
    pub citations: usize,
    pub patent_citations: usize,
    pub patent_paper_pairs: usize,
    pub employment_histories: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub counts: IngestCounts,
    pub drops: DropStats,
    pub warnings: Vec<IngestWarning>,
}

/// Summarises a corpus and collects referential warnings. Never fails.
pub fn validate_corpus(corpus: &Corpus) -> IngestReport {
    let mut warnings = Vec::new();
    let mut citations = 0;
    for p in corpus.publications.values() {
        for cited in &p.cited_pub_ids {
            citations += 1;
            if !corpus.publications.contains_key(cited) {
                warnings.push(IngestWarning {
                    kind: "unknown_cited_pub".into(),
                    from_id: p.pub_id.clone(),
                    to_id: cited.clone(),
                });
            }
        }
    }
    for c in &corpus.patent_citations {
        if !corpus.publications.contains_key(&c.cited_pub_id) {
            warnings.push(IngestWarning {
                kind: "unknown_patent_cited_pub".into(),
                from_id: c.patent_id.clone(),
                to_id: c.cited_pub_id.clone(),
            });
        }
    }
    for pair in &corpus.patent_paper_pairs {
        if !corpus.publications.contains_key(&pair.pub_id) {
            warnings.push(IngestWarning {
                kind: "unknown_pair_pub".into(),
                from_id: pair.patent_id.clone(),
                to_id: pair.pub_id.clone(),
            });
        }
    }
    for id in corpus.employment_histories.keys() {
        if !corpus.graduates.contains_key(id) {
            warnings.push(IngestWarning {
                kind: "unknown_history_graduate".into(),
                from_id: id.clone(),
                to_id: String::new(),
            });
        }
    }
    warnings.sort();
    IngestReport {
        counts: IngestCounts {
            graduates: corpus.graduates.len(),
            publications: corpus.publications.len(),
            authorships: corpus.publications.values().map(|p| p.authorships.len()).sum(),
            citations,
            patent_citations: corpus.patent_citations.len(),
            patent_paper_pairs: corpus.patent_paper_pairs.len(),
            employment_histories: corpus.employment_histories.len(),
        },
        drops: corpus.drops.clone(),
        warnings,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EmbeddingKind {
    Graduate,
    Publication,
}

impl EmbeddingKind {
    fn tag(self) -> u8 {
        match self {
            EmbeddingKind::Graduate => b'G',
            EmbeddingKind::Publication => b'P',
        }
    }

    fn from_tag(t: u8) -> Option<Self> {
        match t {
            b'G' => Some(EmbeddingKind::Graduate),
            b'P' => Some(EmbeddingKind::Publication),
            _ => None,
        }
    }
}

/// Sidecar embedding file.
///
/// Layout (all integers little-endian):
///
/// ```text
/// magic   8 bytes  "LFEMB\0\0\x01"
/// dim     u32
/// count   u64
/// record  count times:
///   kind  u8       'G' graduate, 'P' publication
///   id    63 bytes UTF-8, NUL padded
///   data  dim x f32
/// ```
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmbeddingStore {
    pub dim: usize,
    vectors: BTreeMap<(EmbeddingKind, String), Vec<f32>>,
}

const EMB_MAGIC: &[u8; 8] = b"LFEMB\0\0\x01";
const EMB_ID_WIDTH: usize = 63;

impl EmbeddingStore {
    pub fn new(dim: usize) -> Self {
        EmbeddingStore {
            dim,
            vectors: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, kind: EmbeddingKind, id: &str, v: Vec<f32>) {
        self.vectors.insert((kind, id.to_string()), v);
    }

    pub fn get(&self, kind: EmbeddingKind, id: &str) -> Option<&Vec<f32>> {
        self.vectors.get(&(kind, id.to_string()))
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn write(&self, path: &Path) -> Result<(), RecordsError> {
        let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
        let mut buf = Vec::with_capacity(16 + self.vectors.len() * (1 + EMB_ID_WIDTH + 4 * self.dim));
        buf.extend_from_slice(EMB_MAGIC);
        buf.extend_from_slice(&(self.dim as u32).to_le_bytes());
        buf.extend_from_slice(&(self.vectors.len() as u64).to_le_bytes());
        for ((kind, id), v) in &self.vectors {
            if id.len() > EMB_ID_WIDTH {
                return Err(schema(
                    &path.display().to_string(),
                    0,
                    format!("id {id} longer than 63 bytes"),
                ));
            }
            if v.len() != self.dim {
                return Err(RecordsError::Dimension {
                    id: id.clone(),
                    expected: self.dim,
                    found: v.len(),
                });
            }
            buf.push(kind.tag());
            let mut idbuf = [0u8; EMB_ID_WIDTH];
            idbuf[..id.len()].copy_from_slice(id.as_bytes());
            buf.extend_from_slice(&idbuf);
            for x in v {
                buf.extend_from_slice(&x.to_le_bytes());
            }
        }
        w.write_all(&buf).map_err(io_err(path))?;
        w.flush().map_err(io_err(path))
    }

    pub fn read(path: &Path) -> Result<Self, RecordsError> {
        let mut bytes = Vec::new();
        File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(io_err(path))?;
        let file = path.display().to_string();
        let bad = |m: &str| schema(&file, 0, m.to_string());
        if bytes.len() < 20 || &bytes[..8] != EMB_MAGIC {
            return Err(bad("not an embedding sidecar (bad magic)"));
        }
        let dim = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let count = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
        let width = 1 + EMB_ID_WIDTH + 4 * dim;
        if bytes.len() != 20 + count * width {
            return Err(bad("sidecar length does not match header"));
        }
        let mut store = EmbeddingStore::new(dim);
        for rec in bytes[20..].chunks_exact(width) {
            let kind = EmbeddingKind::from_tag(rec[0]).ok_or_else(|| bad("unknown record kind"))?;
            let raw_id = &rec[1..1 + EMB_ID_WIDTH];
            let end = raw_id.iter().position(|&b| b == 0).unwrap_or(EMB_ID_WIDTH);
            let id = std::str::from_utf8(&raw_id[..end]).map_err(|_| bad("id is not UTF-8"))?;
            let v = rec[1 + EMB_ID_WIDTH..]
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            store.insert(kind, id, v);
        }
        Ok(store)
    }
}
