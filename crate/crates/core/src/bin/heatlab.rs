use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use heatlab::experiment::{run, ExperimentConfig, ExperimentKind};

/// Heat-kernel embedding experiments. Thread count: HEATLAB_THREADS.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Io {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Override a config leaf, e.g. `--set t_schedule=[0.1,0.05]`.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenpairs, clusters and solver diagnostics.
    Spectrum(Io),
    /// Truncation levels and embedding coordinates.
    Embed(Io),
    /// Distortion norms along the t schedule.
    Distortion(Io),
    /// Bi-Lipschitz ratios of the embedding.
    Bilip(Io),
    /// Normalized t-energies of a map.
    Energy(Io),
    /// Korevaar-Schoen comparison.
    Ks(Io),
    /// Harmonic-map flow into a sphere.
    Flow(Io),
    /// Takahashi check of a sphere-valued map.
    Takahashi(Io),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(n) = std::env::var("HEATLAB_THREADS") {
        match n.parse::<usize>() {
            Ok(n) => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            }
            Err(_) => {
                eprintln!("error: HEATLAB_THREADS must be a positive integer, got `{n}`");
                return ExitCode::from(1);
            }
        }
    }
    let (kind, io) = match cli.command {
        Command::Spectrum(io) => (ExperimentKind::Spectrum, io),
        Command::Embed(io) => (ExperimentKind::Embed, io),
        Command::Distortion(io) => (ExperimentKind::EmbedDistortion, io),
        Command::Bilip(io) => (ExperimentKind::Bilipschitz, io),
        Command::Energy(io) => (ExperimentKind::Energy, io),
        Command::Ks(io) => (ExperimentKind::KsCompare, io),
        Command::Flow(io) => (ExperimentKind::HarmonicFlow, io),
        Command::Takahashi(io) => (ExperimentKind::Takahashi, io),
    };
    let result = std::fs::read_to_string(&io.config)
        .map_err(heatlab::Error::from)
        .and_then(|text| ExperimentConfig::parse(&text, &io.overrides))
        .and_then(|config| {
            let base = io.config.parent().map(PathBuf::from).unwrap_or_default();
            run(kind, &config, &base, &io.out)
        });
    match result {
        Ok(verdict) => {
            println!("{}: {:?}", kind.name(), verdict);
            ExitCode::from(verdict.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
