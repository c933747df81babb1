//! Persistent fallback cache.
//!
//! One JSON object per line, `{"key": "<sha256 hex>", "country": "TW" | null}`,
//! where the key hashes the lowercased, accent-folded, whitespace-collapsed
//! affiliation string. The file is append-only; later lines for the same key
//! win. Each batch of new entries is appended with a single write.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{normalize_affiliation, GeoError};
use crate::jsonl;

pub fn cache_key(affiliation: &str) -> String {
    hex::encode(Sha256::digest(
        normalize_affiliation(affiliation).to_lowercase().as_bytes(),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub country: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct GeoCache {
    path: Option<PathBuf>,
    entries: BTreeMap<String, Option<String>>,
}

impl GeoCache {
    pub fn in_memory() -> Self {
        GeoCache::default()
    }

    /// Opens a cache file, creating nothing until the first append.
    pub fn open(path: &Path) -> Result<Self, GeoError> {
        let mut entries = BTreeMap::new();
        if path.exists() {
            for (line_no, line) in jsonl::read_lines(path)? {
                let e: CacheEntry = serde_json::from_str(&line)
                    .map_err(|e| GeoError::Cache(format!("{}:{line_no}: {e}", path.display())))?;
                entries.insert(e.key, e.country);
            }
        }
        Ok(GeoCache {
            path: Some(path.to_path_buf()),
            entries,
        })
    }

    pub fn get(&self, key: &str) -> Option<&Option<String>> {
        self.entries.get(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn append(&mut self, new: &[CacheEntry]) -> Result<(), GeoError> {
        if new.is_empty() {
            return Ok(());
        }
        if let Some(path) = &self.path {
            let mut buf = Vec::new();
            for e in new {
                serde_json::to_writer(&mut buf, e).map_err(|e| GeoError::Cache(e.to_string()))?;
                buf.push(b'\n');
            }
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir)?;
            }
            let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
            f.write_all(&buf)?;
            f.sync_data()?;
        }
        for e in new {
            self.entries.insert(e.key.clone(), e.country.clone());
        }
        Ok(())
    }
}
