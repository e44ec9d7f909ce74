//! Configuration files, CSV and VTK output, and the command reports.

pub mod config;
pub mod history;
pub mod report;

pub use config::{parse_config, render_config, OutputConfig, RunConfig};
pub use history::{history_csv, write_history, ERROR_COLUMNS, HISTORY_COLUMNS};
pub use report::{compare, converge, tensor_report, Comparison, ConvergenceStudy};

use std::path::Path;

use crate::amp_stepper::RunSummary;
use crate::error::Result;
use crate::grid::vtk::to_vtk;

/// Writes the history and any field snapshots of a run into `dir`.
pub fn write_run(dir: &Path, output: &OutputConfig, summary: &RunSummary) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_history(&dir.join(&output.history), &summary.history, true)?;
    for (k, (t, fields, grid)) in summary.snapshots.iter().enumerate() {
        let title = format!("t = {t:?}");
        std::fs::write(dir.join(format!("fields_{k:04}.vtk")), to_vtk(grid, fields, &title))?;
    }
    Ok(())
}
