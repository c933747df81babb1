//! Candidate generation: every graduate/authorship pair whose names are
//! compatible and whose years fall inside the linking window.
//!
//! Blocking key is the normalised last name, which is exact-match in
//! [`names_compatible`](crate::names::names_compatible), so blocking never
//! drops a compatible pair.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::jsonl;
use crate::names::{parse_name, MatchClass, NameKit};
use crate::par;
use crate::records::Corpus;

/// Allowed range of `pub_year - grad_year`, inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchWindow {
    pub min_gap: i32,
    pub max_gap: i32,
}

impl Default for MatchWindow {
    fn default() -> Self {
        MatchWindow {
            min_gap: -5,
            max_gap: 15,
        }
    }
}

impl MatchWindow {
    pub fn contains(&self, grad_year: i32, pub_year: i32) -> bool {
        let gap = pub_year - grad_year;
        gap >= self.min_gap && gap <= self.max_gap
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CandidateKey {
    pub graduate_id: String,
    pub pub_id: String,
    pub author_position: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateLink {
    pub graduate_id: String,
    pub pub_id: String,
    pub author_position: u32,
    pub match_class: MatchClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<bool>,
}

impl CandidateLink {
    pub fn key(&self) -> CandidateKey {
        CandidateKey {
            graduate_id: self.graduate_id.clone(),
            pub_id: self.pub_id.clone(),
            author_position: self.author_position,
        }
    }

    fn sort_key(&self) -> (&str, &str, u32) {
        (&self.graduate_id, &self.pub_id, self.author_position)
    }
}

pub fn sort_candidates(c: &mut [CandidateLink]) {
    c.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

/// Authorships grouped by the last names their display/raw names parse to.
struct AuthorIndex<'a> {
    by_last: BTreeMap<String, Vec<(&'a str, u32)>>,
}

impl<'a> AuthorIndex<'a> {
    fn build(corpus: &'a Corpus) -> Self {
        let pubs: Vec<_> = corpus.publications.values().collect();
        let per_pub = par::map(&pubs, |p| {
            let mut out = Vec::new();
            for a in &p.authorships {
                let lasts: BTreeSet<String> = [&a.display_name, &a.raw_name]
                    .iter()
                    .filter_map(|n| parse_name(n).ok())
                    .map(|n| n.last)
                    .collect();
                for last in lasts {
                    out.push((last, (p.pub_id.as_str(), a.position)));
                }
            }
            out
        });
        let mut by_last: BTreeMap<String, Vec<(&str, u32)>> = BTreeMap::new();
        for (last, entry) in per_pub.into_iter().flatten() {
            by_last.entry(last).or_default().push(entry);
        }
        AuthorIndex { by_last }
    }
}

fn block_candidates(
    corpus: &Corpus,
    kit: &NameKit,
    window: MatchWindow,
    grads: &[&str],
    authors: &[(&str, u32)],
) -> Vec<CandidateLink> {
    let mut out = Vec::new();
    for &gid in grads {
        let g = &corpus.graduates[gid];
        let Some(gname) = kit.graduates.get(gid) else {
            continue;
        };
        for &(pid, pos) in authors {
            let p = &corpus.publications[pid];
            if !window.contains(g.grad_year, p.pub_year) {
                continue;
            }
            let Some(a) = p.authorship(pos) else { continue };
            let class = kit.compatible_authorship(gname, &a.display_name, &a.raw_name);
            if class.is_compatible() {
                out.push(CandidateLink {
                    graduate_id: gid.to_string(),
                    pub_id: pid.to_string(),
                    author_position: pos,
                    match_class: class,
                    label: None,
                });
            }
        }
    }
    out
}

/// Visits candidate blocks (one per shared last name) in key order.
///
/// Only one block of candidates is materialised per callback; the name
/// indexes are proportional to the input corpus.
pub fn for_each_block<F>(corpus: &Corpus, kit: &NameKit, window: MatchWindow, mut sink: F)
where
    F: FnMut(&str, Vec<CandidateLink>),
{
    let authors = AuthorIndex::build(corpus);
    let mut grads_by_last: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (gid, n) in &kit.graduates {
        grads_by_last.entry(n.last.as_str()).or_default().push(gid.as_str());
    }
    let keys: Vec<(&str, &Vec<&str>)> = grads_by_last.iter().map(|(k, v)| (*k, v)).collect();
    // Blocks are evaluated in parallel in fixed-size batches, then handed to the sink in order.
    for chunk in keys.chunks(256) {
        let blocks = par::map(chunk, |(last, grads)| {
            let authors = authors.by_last.get(*last).map(Vec::as_slice).unwrap_or(&[]);
            let mut c = block_candidates(corpus, kit, window, grads, authors);
            sort_candidates(&mut c);
            c
        });
        for ((last, _), block) in chunk.iter().zip(blocks) {
            if !block.is_empty() {
                sink(last, block);
            }
        }
    }
}

/// All candidates, sorted by `(graduate_id, pub_id, author_position)`.
pub fn generate_candidates(corpus: &Corpus, kit: &NameKit, window: MatchWindow) -> Vec<CandidateLink> {
    let mut all = Vec::new();
    for_each_block(corpus, kit, window, |_, mut block| all.append(&mut block));
    sort_candidates(&mut all);
    all
}

/// Sets `label` from registry ids: true when graduate and author share an
/// id, false when both carry different ids, absent otherwise.
pub fn label_candidates(candidates: &mut [CandidateLink], corpus: &Corpus) {
    for c in candidates.iter_mut() {
        let grad_reg = corpus
            .graduates
            .get(&c.graduate_id)
            .and_then(|g| g.registry_id.as_deref());
        let auth_reg = corpus
            .publications
            .get(&c.pub_id)
            .and_then(|p| p.authorship(c.author_position))
            .and_then(|a| a.registry_id.as_deref());
        c.label = match (grad_reg, auth_reg) {
            (Some(g), Some(a)) => Some(g == a),
            _ => None,
        };
    }
}

/// Writes candidates into line-delimited shard files of at most `shard_rows`
/// rows each, in the global sort order. Returns the shard paths.
pub fn write_candidate_shards(
    candidates: &[CandidateLink],
    dir: &Path,
    shard_rows: usize,
) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for (i, shard) in candidates.chunks(shard_rows.max(1)).enumerate() {
        let path = dir.join(format!("candidates-{i:05}.jsonl"));
        jsonl::write_records(&path, shard)?;
        paths.push(path);
    }
    if candidates.is_empty() {
        let path = dir.join("candidates-00000.jsonl");
        jsonl::write_records::<&CandidateLink>(&path, [])?;
        paths.push(path);
    }
    Ok(paths)
}

pub fn read_candidate_shards(paths: &[PathBuf]) -> std::io::Result<Vec<CandidateLink>> {
    let mut out = Vec::new();
    for p in paths {
        for (_, line) in jsonl::read_lines(p)? {
            let c: CandidateLink = serde_json::from_str(&line)?;
            out.push(c);
        }
    }
    sort_candidates(&mut out);
    Ok(out)
}
