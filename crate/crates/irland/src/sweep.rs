use irland_core::scenario::{
    run_cell, summarize, CellResult, ConfigError, ScenarioConfig, StartGrid, SweepResult,
};
use rayon::prelude::*;

/// Same result as [`irland_core::scenario::sweep_start_grid`], with cells
/// run on the rayon pool. Cell seeds depend only on the index, and results
/// are collected in cell order.
pub fn sweep_parallel(cfg: &ScenarioConfig, grid: &StartGrid) -> Result<SweepResult, ConfigError> {
    grid.validate()?;
    ScenarioConfig {
        start: grid.cell(0),
        ..cfg.clone()
    }
    .validate()?;
    let cells: Vec<CellResult> = (0..grid.len())
        .into_par_iter()
        .map(|i| run_cell(cfg, grid, i))
        .collect();
    let stats = summarize(&cells);
    Ok(SweepResult {
        grid: *grid,
        cells,
        stats,
    })
}
