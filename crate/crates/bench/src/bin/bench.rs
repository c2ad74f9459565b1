use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use ecomate_bench::{records, report, tables, GridConfig, GridInputs};
use ecomate_core::analysis::TrigramCosine;

#[derive(Parser)]
#[command(name = "bench", about = "Run the comparative LLM grid and report on it")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every grid cell and write records, summaries, pairs and heatmaps.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to the config's output_dir.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exit non-zero when any cell failed at the provider.
        #[arg(long)]
        strict: bool,
    },
    /// Rebuild tables and heatmaps from an existing record CSV.
    Report {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Grid config naming the home template and command dataset.
        #[arg(long, default_value = "fixtures/grid.toml")]
        config: PathBuf,
    },
}

async fn execute(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run { config, out, strict } => {
            let config = GridConfig::load(&config)?;
            let started = std::time::Instant::now();
            let output = ecomate_bench::run(&config).await?;
            let dir = out.unwrap_or_else(|| config.output_dir.clone());
            ecomate_bench::write_outputs(&dir, &output)?;
            println!(
                "{} records ({} errored) written to {} in {:.1}s",
                output.records.len(),
                output.errored,
                dir.display(),
                started.elapsed().as_secs_f64()
            );
            print!("{}", report::summary_table(&output.analysis.summaries));
            if strict && output.errored > 0 {
                return Ok(ExitCode::FAILURE);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { records: path, out, config } => {
            let config = GridConfig::load(&config)?;
            let inputs = GridInputs::load(&config)?;
            let file = std::fs::File::open(&path).with_context(|| format!("opening {}", path.display()))?;
            let records = records::read_records(file)?;
            let analysis = tables::analyze(&records, &inputs.home, &inputs.dataset.categories, &TrigramCosine)?;
            report::write_report(&out, &analysis)?;
            print!("{}", report::summary_table(&analysis.summaries));
            println!();
            print!("{}", report::pair_table(&analysis.pair_summaries));
            Ok(ExitCode::SUCCESS)
        }
    }
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match execute(Cli::parse()).await {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
