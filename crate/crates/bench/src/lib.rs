//! The comparative benchmark: run the model × prompt × temperature ×
//! command grid, persist one record per cell and derive the summary
//! tables and heatmaps.

pub mod config;
mod error;
pub mod grid;
pub mod heatmap;
pub mod records;
pub mod report;
pub mod tables;

use std::path::Path;
use std::sync::Arc;

use ecomate_core::analysis::{RunRecord, TrigramCosine};

pub use config::GridConfig;
pub use error::BenchError;
pub use grid::GridInputs;
pub use tables::Analysis;

/// Outcome of a full run.
#[derive(Debug)]
pub struct RunOutput {
    pub records: Vec<RunRecord>,
    pub analysis: Analysis,
    /// Cells whose provider call failed; they are still recorded.
    pub errored: usize,
}

/// Run the grid described by `config` and derive its analysis.
pub async fn run(config: &GridConfig) -> Result<RunOutput, BenchError> {
    let inputs = Arc::new(GridInputs::load(config)?);
    let providers = grid::build_providers(config)?;
    let records = grid::run_grid(config, inputs.clone(), &providers).await?;
    let analysis = tables::analyze(&records, &inputs.home, &inputs.dataset.categories, &TrigramCosine)?;
    let errored = grid::errored_cells(&records);
    Ok(RunOutput {
        records,
        analysis,
        errored,
    })
}

/// Write the record CSV and every derived artifact into `dir`.
pub fn write_outputs(dir: &Path, output: &RunOutput) -> Result<(), BenchError> {
    std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    let path = dir.join(tables::RECORDS_FILE);
    let file = std::fs::File::create(&path).map_err(|e| BenchError::io(&path, e))?;
    records::write_records(std::io::BufWriter::new(file), &output.records)?;
    report::write_report(dir, &output.analysis)
}
