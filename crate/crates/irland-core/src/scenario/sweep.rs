use alloc::vec::Vec;

use super::{check, run_validated, ConfigError, Outcome, ScenarioConfig};
use crate::lightfield::Vec3;

/// Rectangular lattice of start positions at a fixed height. Cell `i` sits at
/// column `i % nx`, row `i / nx`; both ends of each range are included.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct StartGrid {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub nx: usize,
    pub ny: usize,
    pub z: f64,
}

impl StartGrid {
    pub fn validate(&self) -> Result<(), ConfigError> {
        check(self.nx >= 2, "grid.nx", "resolution must be at least 2")?;
        check(self.ny >= 2, "grid.ny", "resolution must be at least 2")?;
        check(
            self.z > 0.0 && self.z.is_finite(),
            "grid.z",
            "must be positive",
        )?;
        check(
            self.x.iter().chain(&self.y).all(|v| v.is_finite()),
            "grid",
            "ranges must be finite",
        )
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell(&self, index: usize) -> Vec3 {
        let lerp =
            |r: [f64; 2], i: usize, n: usize| r[0] + (r[1] - r[0]) * i as f64 / (n - 1) as f64;
        Vec3::new(
            lerp(self.x, index % self.nx, self.nx),
            lerp(self.y, index / self.nx, self.ny),
            self.z,
        )
    }
}

/// SplitMix64 finalizer over (master seed, cell index); independent of run order.
pub fn cell_seed(master: u64, index: usize) -> u64 {
    let mut z = master
        ^ (index as u64)
            .wrapping_add(1)
            .wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CellResult {
    pub index: usize,
    pub start: Vec3,
    pub seed: u64,
    pub outcome: Outcome,
    pub offset: Option<f64>,
    pub time: Option<f64>,
    pub final_leg_time: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepStats {
    pub cells: usize,
    pub landed: usize,
    pub success_rate: f64,
    pub mean_offset: Option<f64>,
    pub median_offset: Option<f64>,
    pub mean_time: Option<f64>,
    pub median_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepResult {
    pub grid: StartGrid,
    pub cells: Vec<CellResult>,
    pub stats: SweepStats,
}

/// Runs cell `index` of `grid`; `cfg` must already be validated.
pub fn run_cell(cfg: &ScenarioConfig, grid: &StartGrid, index: usize) -> CellResult {
    let start = grid.cell(index);
    let seed = cell_seed(cfg.seed, index);
    let run_cfg = ScenarioConfig {
        start,
        seed,
        ..cfg.clone()
    };
    let r = run_validated(&run_cfg);
    CellResult {
        index,
        start,
        seed,
        outcome: r.outcome,
        offset: r.landing_offset,
        time: r.landing_time,
        final_leg_time: r.final_leg_time,
    }
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    Some(if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    })
}

/// Aggregates cell results; offsets and times are over landed cells only.
pub fn summarize(cells: &[CellResult]) -> SweepStats {
    let offsets: Vec<f64> = cells.iter().filter_map(|c| c.offset).collect();
    let times: Vec<f64> = cells.iter().filter_map(|c| c.time).collect();
    let landed = cells
        .iter()
        .filter(|c| c.outcome == Outcome::Landed)
        .count();
    SweepStats {
        cells: cells.len(),
        landed,
        success_rate: if cells.is_empty() {
            0.0
        } else {
            landed as f64 / cells.len() as f64
        },
        mean_offset: mean(&offsets),
        median_offset: median(&offsets),
        mean_time: mean(&times),
        median_time: median(&times),
    }
}

/// One run per grid cell, in cell order.
pub fn sweep_start_grid(
    cfg: &ScenarioConfig,
    grid: &StartGrid,
) -> Result<SweepResult, ConfigError> {
    grid.validate()?;
    ScenarioConfig {
        start: grid.cell(0),
        ..cfg.clone()
    }
    .validate()?;
    let cells: Vec<CellResult> = (0..grid.len()).map(|i| run_cell(cfg, grid, i)).collect();
    let stats = summarize(&cells);
    Ok(SweepResult {
        grid: *grid,
        cells,
        stats,
    })
}
