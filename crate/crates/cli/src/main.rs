use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use linkforge::pipeline::{write_desk_fixture, Pipeline, PipelineError, Stage, StageOutcome, StageStatus};
use linkforge::synth::SynthConfig;

/// Graduate-to-publication linkage and migration analytics pipeline.
#[derive(Parser)]
#[command(name = "linkforge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct StageArgs {
    /// Pipeline config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Re-run even when the stage manifest is current.
    #[arg(long)]
    force: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Read and validate raw records.
    Ingest(StageArgs),
    /// Block graduates against authorships.
    Candidates(StageArgs),
    /// Assemble feature rows for every candidate.
    Features(StageArgs),
    /// Train the two-stage cascade.
    Train(StageArgs),
    /// Score candidates and emit the linked sample.
    Classify(StageArgs),
    /// Resolve affiliation strings to countries.
    Geo(StageArgs),
    /// Detect migration events and validate the parameter grid.
    Migrate(StageArgs),
    /// Write emigration and citation-share tables.
    Analyze(StageArgs),
    /// Run every stage in order.
    All(StageArgs),
    /// Show whether each stage is current.
    Status {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write a synthetic corpus and matching pipeline config.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        graduates: usize,
    },
}

fn report(outcomes: &[StageOutcome]) {
    for o in outcomes {
        let state = if o.skipped { "skipped" } else { "done" };
        log::info!("{}: {state}", o.stage);
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let (stage, args) = match cli.command {
        Command::Ingest(a) => (Some(Stage::Ingest), a),
        Command::Candidates(a) => (Some(Stage::Candidates), a),
        Command::Features(a) => (Some(Stage::Features), a),
        Command::Train(a) => (Some(Stage::Train), a),
        Command::Classify(a) => (Some(Stage::Classify), a),
        Command::Geo(a) => (Some(Stage::Geo), a),
        Command::Migrate(a) => (Some(Stage::Migrate), a),
        Command::Analyze(a) => (Some(Stage::Analyze), a),
        Command::All(a) => (None, a),
        Command::Status { config } => {
            let p = Pipeline::load(&config)?;
            for s in Stage::ALL {
                let state = match p.status(s)? {
                    StageStatus::Current(_) => "current".to_string(),
                    StageStatus::Missing => "missing".to_string(),
                    StageStatus::Stale(r) => format!("stale ({r})"),
                };
                log::info!("{s}: {state}");
            }
            return Ok(());
        }
        Command::Synth { out, seed, graduates } => {
            let cfg = SynthConfig {
                seed,
                graduates,
                ..Default::default()
            };
            let path =
                write_desk_fixture(&out, &cfg).with_context(|| format!("writing fixture to {}", out.display()))?;
            log::info!("wrote {}", path.display());
            return Ok(());
        }
    };
    let p = Pipeline::load(&args.config)?;
    let outcomes = match stage {
        Some(s) => vec![p.run_stage(s, args.force)?],
        None => p.run_all(args.force)?,
    };
    report(&outcomes);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e:#}");
            let code = e.downcast_ref::<PipelineError>().map_or(1, PipelineError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
