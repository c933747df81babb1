use std::collections::BTreeSet;

use linkforge::blocking::{generate_candidates, read_candidate_shards, write_candidate_shards, MatchWindow};
use linkforge::names::{NameKit, NicknameTable};
use linkforge::records::{ingest_corpus, validate_corpus, IngestManifest};
use linkforge::synth::{generate, SynthConfig, SynthOutput};

fn small(seed: u64) -> SynthOutput {
    generate(&SynthConfig {
        seed,
        graduates: 150,
        ..Default::default()
    })
}

#[test]
fn written_corpus_ingests_back_unchanged() {
    let out = small(3);
    let dir = tempfile::tempdir().unwrap();
    let manifest = out.corpus.write_to_dir(dir.path(), true).unwrap();
    let back = ingest_corpus(&IngestManifest::load(&manifest).unwrap()).unwrap();
    assert_eq!(back.graduates, out.corpus.graduates);
    assert_eq!(back.publications, out.corpus.publications);
    assert_eq!(back.employment_histories, out.corpus.employment_histories);
    assert_eq!(back.patent_citations, out.corpus.patent_citations);
    let (a, b) = (validate_corpus(&back), validate_corpus(&out.corpus));
    assert_eq!(a.counts, b.counts);
    assert_eq!(a.warnings, b.warnings);
}

#[test]
fn blocking_matches_brute_force() {
    let out = small(5);
    let corpus = &out.corpus;
    let kit = NameKit::build(corpus, NicknameTable::bundled(), 0.9);
    let window = MatchWindow::default();
    let fast: BTreeSet<_> = generate_candidates(corpus, &kit, window)
        .into_iter()
        .map(|c| (c.graduate_id, c.pub_id, c.author_position, c.match_class))
        .collect();
    let mut slow = BTreeSet::new();
    for (gid, g) in &corpus.graduates {
        let Some(gname) = kit.graduates.get(gid) else {
            continue;
        };
        for p in corpus.publications.values() {
            if !window.contains(g.grad_year, p.pub_year) {
                continue;
            }
            for a in &p.authorships {
                let class = kit.compatible_authorship(gname, &a.display_name, &a.raw_name);
                if class.is_compatible() {
                    slow.insert((gid.clone(), p.pub_id.clone(), a.position, class));
                }
            }
        }
    }
    assert!(!slow.is_empty());
    assert_eq!(fast, slow);
}

#[test]
fn wider_window_gives_superset() {
    let out = small(8);
    let kit = NameKit::build(&out.corpus, NicknameTable::bundled(), 0.9);
    let key = |w| -> BTreeSet<_> {
        generate_candidates(&out.corpus, &kit, w)
            .into_iter()
            .map(|c| c.key())
            .collect()
    };
    let narrow = key(MatchWindow { min_gap: 0, max_gap: 3 });
    let default = key(MatchWindow::default());
    let wide = key(MatchWindow {
        min_gap: -8,
        max_gap: 25,
    });
    assert!(narrow.is_subset(&default));
    assert!(default.is_subset(&wide));
}

#[test]
fn shards_round_trip_in_order() {
    let out = small(2);
    let kit = NameKit::build(&out.corpus, NicknameTable::bundled(), 0.9);
    let cands = generate_candidates(&out.corpus, &kit, MatchWindow::default());
    let dir = tempfile::tempdir().unwrap();
    let paths = write_candidate_shards(&cands, dir.path(), 37).unwrap();
    assert_eq!(paths.len(), cands.len().div_ceil(37));
    assert_eq!(read_candidate_shards(&paths).unwrap(), cands);
}
