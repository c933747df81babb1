use std::path::PathBuf;

use linkforge::blocking::{generate_candidates, label_candidates, MatchWindow};
use linkforge::features::FeatureContext;
use linkforge::linkmodel::{run_cascade, train_cascade, CascadeModel};
use linkforge::names::{NameKit, NicknameTable};
use linkforge::pipeline::{write_desk_fixture, Pipeline, PipelineConfig, PipelineError, Stage, StageStatus};
use linkforge::synth::{generate, SynthConfig};

#[test]
fn stricter_thresholds_never_add_links() {
    let out = generate(&SynthConfig::default());
    let corpus = &out.corpus;
    let kit = NameKit::build(corpus, NicknameTable::bundled(), 0.9);
    let mut cands = generate_candidates(corpus, &kit, MatchWindow::default());
    label_candidates(&mut cands, corpus);
    let ctx = FeatureContext::new(corpus, &kit);
    let rows = ctx.assemble_rows(&cands).unwrap();
    let labels: Vec<Option<bool>> = cands.iter().map(|c| c.label).collect();
    let cfg = PipelineConfig::desk(PathBuf::new(), PathBuf::new(), 7).model;
    let (model, _) = train_cascade(&ctx.layout, &rows, &labels, &cfg, 7).unwrap();

    let dir = tempfile::tempdir().unwrap();
    model.save(&dir.path().join("m.bin")).unwrap();
    assert_eq!(CascadeModel::load(&dir.path().join("m.bin")).unwrap(), model);

    let mut previous: Option<usize> = None;
    for t in [0.3, 0.5, 0.7, 0.9] {
        let mut m = model.clone();
        m.stage2_threshold = t;
        let res = run_cascade(&m, &cands, &rows).unwrap();
        let n = res.linked.links.len();
        assert!(previous.is_none_or(|p| n <= p), "threshold {t}: {n} links");
        assert!(res.linked.links.iter().all(|l| l.p2 >= t && l.p1 >= m.stage1_threshold));
        previous = Some(n);
    }
}

#[test]
fn pipeline_skips_current_stages_and_reruns_edited_ones() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_desk_fixture(dir.path(), &SynthConfig::default()).unwrap();
    let p = Pipeline::load(&config).unwrap();
    assert!(matches!(p.status(Stage::Analyze).unwrap(), StageStatus::Missing));

    let first = p.run_all(false).unwrap();
    assert!(first.iter().all(|o| !o.skipped));
    for s in Stage::ALL {
        assert!(matches!(p.status(s).unwrap(), StageStatus::Current(_)), "{s}");
        assert!(p.stage_dir(s).join("manifest.json").exists());
    }
    assert!(p.stage_dir(Stage::Migrate).join("grid.json").exists());
    assert!(p.stage_dir(Stage::Analyze).join("cohort_shares.csv").exists());

    let again = p.run_all(false).unwrap();
    assert!(again.iter().all(|o| o.skipped));

    let mut cfg = p.config.clone();
    cfg.analytics.min_pubs += 1;
    let edited = Pipeline::new(cfg);
    let rerun = edited.run_all(false).unwrap();
    let ran: Vec<Stage> = rerun.iter().filter(|o| !o.skipped).map(|o| o.stage).collect();
    assert_eq!(ran, vec![Stage::Analyze]);

    std::fs::write(p.stage_dir(Stage::Features).join("layout.json"), "{}").unwrap();
    let err = p.run_stage(Stage::Train, false).unwrap_err();
    assert!(matches!(err, PipelineError::StaleUpstream { .. }), "{err}");
    assert_eq!(err.exit_code(), 4);
}

#[test]
fn stage_without_upstream_reports_missing() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_desk_fixture(
        dir.path(),
        &SynthConfig {
            graduates: 50,
            ..Default::default()
        },
    )
    .unwrap();
    let p = Pipeline::load(&config).unwrap();
    let err = p.run_stage(Stage::Train, false).unwrap_err();
    assert!(matches!(err, PipelineError::MissingUpstream { .. }), "{err}");
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn invalid_config_is_rejected_with_its_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(
        &path,
        "seed = 1\noutput_dir = \"o\"\n[inputs]\nmanifest = \"m\"\n[names]\njw_threshold = 2.0\n",
    )
    .unwrap();
    let err = Pipeline::load(&path).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}
