use clap::{Parser, Subcommand};
use favard_cli::config::ExperimentConfig;
use favard_cli::{run, CliError, ExperimentKind};
use std::path::PathBuf;
use std::process::ExitCode;

/// Projection and visibility experiments on self-similar sets: generators,
/// Riesz energies, transversality probes, and three independent
/// projected-length estimators.
#[derive(Parser)]
#[command(name = "favard", version)]
struct Cli {
    /// JSON experiment config; each subcommand has a built-in default.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for randomized estimators; a config with "seeds" overrides it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory artifacts are written to.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads; 0 keeps the library default. Results do not depend
    /// on this.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write generation cell sets and their natural measures
    Generate,
    /// Riesz energy growth across generations
    Energy,
    /// Empirical transversality constants for a projection family
    Transversality,
    /// Projected-length decay across generations
    Favard,
    /// Visibility decay seen from a vantage circle
    Visibility,
    /// Neighborhood decay at matched scales
    Decay,
    /// Degenerate configurations: flat slab sweeps, a full shadow, and a
    /// collinear vantage tube
    Counterexample,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: Cli) -> Result<String, CliError> {
    let kind = match cli.command {
        Command::Generate => ExperimentKind::Generate,
        Command::Energy => ExperimentKind::Energy,
        Command::Transversality => ExperimentKind::Transversality,
        Command::Favard => ExperimentKind::Favard,
        Command::Visibility => ExperimentKind::Visibility,
        Command::Decay => ExperimentKind::Decay,
        Command::Counterexample => ExperimentKind::Counterexample,
    };
    let config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str::<ExperimentConfig>(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => favard_cli::run::default_config(kind),
    };
    let outcome = if cli.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build()
            .map_err(|e| CliError::Config(format!("--threads {}: {e}", cli.threads)))?;
        pool.install(|| run(kind, &config, cli.seed, &cli.out))?
    } else {
        run(kind, &config, cli.seed, &cli.out)?
    };
    Ok(serde_json::to_string_pretty(&outcome.summary)?)
}
