//! `foca` command-line runner.
//!
//! Exit codes: 0 success, 1 I/O or file format, 2 configuration, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use foca::experiment::{render_from_checkpoints, run_experiment, ExperimentConfig, ExperimentKind, Section};
use foca::FocaError;

#[derive(Parser)]
#[command(name = "foca", version, about = "FOCA feature-extractor training experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Two-dimensional toy run (toy_foca / toy_joint): decision maps and compactness.
    Toy(RunArgs),
    /// Secondary-optimization error versus training subset size.
    PartialCurve(RunArgs),
    /// Approximate geodesic distance between large- and small-dataset classifiers.
    Geodesic(RunArgs),
    /// Class-vs-rest LDA of normalized features.
    Lda(RunArgs),
    /// PCA scatter plots of normalized features.
    Pca(RunArgs),
    /// Re-render decision maps from the checkpoints of a finished toy run.
    Render(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` config file (a run manifest works too).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

fn load(args: &RunArgs) -> Result<ExperimentConfig, FocaError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| {
        FocaError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", args.config.display())))
    })?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn expect_kind(cfg: &ExperimentConfig, allowed: &[ExperimentKind], command: &str) -> Result<(), FocaError> {
    if allowed.contains(&cfg.kind) {
        Ok(())
    } else {
        Err(FocaError::Config(format!(
            "'{command}' cannot run a '{}' config",
            cfg.kind.name()
        )))
    }
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, FocaError> {
    use ExperimentKind::*;
    let files = match cli.command {
        Command::Toy(a) => {
            let cfg = load(&a)?;
            expect_kind(&cfg, &[ToyFoca, ToyJoint], "toy")?;
            run_experiment(&cfg, &a.out)?
        }
        Command::PartialCurve(a) => {
            let cfg = load(&a)?;
            expect_kind(&cfg, &[PartialDatasetCurve], "partial-curve")?;
            run_experiment(&cfg, &a.out)?
        }
        Command::Geodesic(a) => {
            let cfg = load(&a)?;
            expect_kind(&cfg, &[Geodesic], "geodesic")?;
            run_experiment(&cfg, &a.out)?
        }
        Command::Lda(a) => {
            let mut cfg = load(&a)?;
            expect_kind(&cfg, &[LdaPca], "lda")?;
            cfg.sections = vec![Section::Lda];
            run_experiment(&cfg, &a.out)?
        }
        Command::Pca(a) => {
            let mut cfg = load(&a)?;
            expect_kind(&cfg, &[LdaPca], "pca")?;
            cfg.sections = vec![Section::Pca];
            run_experiment(&cfg, &a.out)?
        }
        Command::Render(a) => {
            let cfg = load(&a)?;
            expect_kind(&cfg, &[ToyFoca, ToyJoint], "render")?;
            render_from_checkpoints(&cfg, &a.out)?
        }
    };
    Ok(files.files)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
