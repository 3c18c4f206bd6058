use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use irland_core::lightfield::{fit_bulb_model, FitError, MeasuredFieldGrid, Vec3};
use irland_core::scenario::{
    compute_operating_range, run_scenario, synthetic_field, Outcome, RangeVariant, SyntheticField,
};

use crate::config::load_config;
use crate::error::{Error, Result};
use crate::export;
use crate::grid_csv::{load_field_grid, save_field_grid};
use crate::io::write_atomic;
use crate::sweep::sweep_parallel;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAILED: i32 = 2;
pub const EXIT_TIMEOUT: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "irland",
    version,
    about = "IR light-field drone landing simulator"
)]
pub struct Cli {
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Print nothing on success.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One run: writes trajectory.csv, modes.csv and result.json.
    Simulate {
        config: PathBuf,
        /// Also write the per-PD reading trace (readings.csv).
        #[arg(long)]
        trace: bool,
    },
    /// Start-grid sweep: writes heatmap.csv, heatmap.svg and stats.json.
    Sweep { config: PathBuf },
    /// Field-grid tools.
    #[command(subcommand)]
    Field(FieldCommand),
    /// Operating range of each sensing variant.
    Range { config: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum FieldCommand {
    /// Validate a grid CSV and print its shape.
    Import { grid: PathBuf },
    /// Fit the analytic bulb model to a grid CSV.
    Fit { grid: PathBuf },
    /// Cross-section along one axis at height `z`; writes slice_<axis>.csv.
    Slice {
        grid: PathBuf,
        /// Height of the cross-section (m).
        #[arg(long)]
        z: f64,
        #[arg(long, value_enum, default_value_t = Axis::X)]
        axis: Axis,
        /// Coordinate on the other horizontal axis.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        at: f64,
    },
    /// Write a built-in synthetic field as <kind>.csv.
    Synth {
        #[arg(value_enum)]
        kind: FieldKind,
        /// Grid spacing (m), in [0.01, 0.5].
        #[arg(long, default_value_t = 0.05)]
        spacing: f64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FieldKind {
    Bulb,
    Bimodal,
    Lens1,
    Lens2,
}

impl From<FieldKind> for SyntheticField {
    fn from(k: FieldKind) -> Self {
        match k {
            FieldKind::Bulb => SyntheticField::Bulb,
            FieldKind::Bimodal => SyntheticField::Bimodal,
            FieldKind::Lens1 => SyntheticField::Lens1,
            FieldKind::Lens2 => SyntheticField::Lens2,
        }
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

macro_rules! say {
    ($cli:expr, $($arg:tt)*) => {
        if !$cli.quiet {
            // A closed stdout (e.g. piped into `head`) must not abort the run.
            let _ = writeln!(std::io::stdout(), $($arg)*);
        }
    };
}

pub fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Simulate { config, trace } => simulate(cli, config, *trace),
        Command::Sweep { config } => sweep(cli, config),
        Command::Range { config } => range(cli, config),
        Command::Field(f) => field(cli, f),
    }
}

fn write(dir: &Path, name: &str, content: &str) -> Result<()> {
    write_atomic(&dir.join(name), content.as_bytes())
}

fn simulate(cli: &Cli, config: &Path, trace: bool) -> Result<i32> {
    let resolved = load_config(config)?;
    if !resolved.start_given {
        return Err(Error::config(
            "run.start",
            "required unless a reference environment is used",
        ));
    }
    let mut cfg = resolved.scenario;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let r = run_scenario(&cfg)?;
    write(&cli.out, "trajectory.csv", &export::trajectory_csv(&r)?)?;
    write(&cli.out, "modes.csv", &export::mode_log_csv(&r)?)?;
    write(&cli.out, "result.json", &export::run_json(&r, cfg.seed)?)?;
    if trace {
        write(&cli.out, "readings.csv", &export::readings_csv(&r)?)?;
    }
    let fmt = |v: Option<f64>, unit: &str| v.map_or("-".to_string(), |v| format!("{v:.3} {unit}"));
    say!(cli, "outcome: {}", r.outcome);
    say!(
        cli,
        "offset: {}  time: {}  final leg: {}",
        fmt(r.landing_offset, "m"),
        fmt(r.landing_time, "s"),
        fmt(r.final_leg_time, "s")
    );
    say!(
        cli,
        "modes: {}",
        r.mode_sequence()
            .iter()
            .map(|m| m.name())
            .collect::<Vec<_>>()
            .join(" > ")
    );
    Ok(match r.outcome {
        Outcome::Landed => EXIT_OK,
        Outcome::Failed(_) => EXIT_FAILED,
        Outcome::Timeout => EXIT_TIMEOUT,
    })
}

fn sweep(cli: &Cli, config: &Path) -> Result<i32> {
    let resolved = load_config(config)?;
    let (grid, floor) = resolved
        .sweep
        .ok_or_else(|| Error::config("sweep", "section required for the sweep command"))?;
    let mut cfg = resolved.scenario;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let result = sweep_parallel(&cfg, &grid)?;
    write(&cli.out, "heatmap.csv", &export::heatmap_csv(&result)?)?;
    write(&cli.out, "heatmap.svg", &export::heatmap_svg(&result))?;
    write(
        &cli.out,
        "stats.json",
        &export::stats_json(&result, cfg.seed)?,
    )?;
    let s = &result.stats;
    let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.3}"));
    say!(
        cli,
        "cells: {}  landed: {}  success: {:.1}%",
        s.cells,
        s.landed,
        100.0 * s.success_rate
    );
    say!(
        cli,
        "offset mean/median (m): {} / {}",
        fmt(s.mean_offset),
        fmt(s.median_offset)
    );
    say!(
        cli,
        "time mean/median (s): {} / {}",
        fmt(s.mean_time),
        fmt(s.median_time)
    );
    Ok(if s.success_rate >= floor {
        EXIT_OK
    } else {
        EXIT_FAILED
    })
}

fn variant_name(v: RangeVariant) -> &'static str {
    match v {
        RangeVariant::DownwardArray => "downward_array",
        RangeVariant::SideFacing => "side_facing",
        RangeVariant::Hybrid => "hybrid",
    }
}

fn range(cli: &Cli, config: &Path) -> Result<i32> {
    let r = load_config(config)?;
    let env = &r.scenario.environment;
    let mut table = String::from("variant,r_min_m,r_max_m\n");
    say!(cli, "{:<16} {:>8} {:>8}", "variant", "r_min", "r_max");
    for &v in &r.range.variants {
        let band = compute_operating_range(v, r.range.height, env, &r.sensors, r.range.r_limit);
        let (lo, hi) = band.map_or((String::new(), String::new()), |b| {
            (b.r_min.to_string(), b.r_max.to_string())
        });
        table.push_str(&format!("{},{lo},{hi}\n", variant_name(v)));
        match band {
            Some(b) => say!(
                cli,
                "{:<16} {:>8.2} {:>8.2}",
                variant_name(v),
                b.r_min,
                b.r_max
            ),
            None => say!(cli, "{:<16} {:>8} {:>8}", variant_name(v), "-", "-"),
        }
    }
    write(&cli.out, "range.csv", &table)?;
    Ok(EXIT_OK)
}

fn slice(grid: &MeasuredFieldGrid, z: f64, axis: Axis, at: f64) -> Vec<(Vec3, f64)> {
    let (a, n) = match axis {
        Axis::X => (0, grid.dims()[0]),
        Axis::Y => (1, grid.dims()[1]),
    };
    let o = grid.origin();
    let step = grid.spacing()[a];
    (0..n)
        .map(|i| {
            let s = [o.x, o.y][a] + i as f64 * step;
            let p = match axis {
                Axis::X => Vec3::new(s, at, z),
                Axis::Y => Vec3::new(at, s, z),
            };
            (p, grid.value_at(p))
        })
        .collect()
}

fn field(cli: &Cli, cmd: &FieldCommand) -> Result<i32> {
    match cmd {
        FieldCommand::Import { grid } => {
            let g = load_field_grid(grid)?;
            let [nx, ny, nz] = g.dims();
            let [dx, dy, dz] = g.spacing();
            say!(
                cli,
                "label: {}",
                if g.label.is_empty() { "-" } else { &g.label }
            );
            say!(cli, "dims: {nx} x {ny} x {nz}  spacing: {dx} {dy} {dz} m");
            say!(
                cli,
                "origin: ({}, {}, {})  max sample: {}",
                g.origin().x,
                g.origin().y,
                g.origin().z,
                g.max_sample()
            );
            Ok(EXIT_OK)
        }
        FieldCommand::Fit { grid } => {
            let g = load_field_grid(grid)?;
            let fit = match fit_bulb_model(&g) {
                Ok(f) => f,
                Err(FitError::NotConverged { best }) => {
                    eprintln!(
                        "fit did not converge; best rms relative residual {:.4}",
                        best.rms_relative_residual
                    );
                    return Ok(EXIT_ERROR);
                }
                Err(e) => return Err(e.into()),
            };
            let s = fit.source;
            say!(cli, "power: {:.6}", s.power);
            say!(cli, "lambert_exponent: {:.6}", s.lambert_exponent);
            say!(
                cli,
                "position: ({:.4}, {:.4}, {:.4})",
                s.position.x,
                s.position.y,
                s.position.z
            );
            say!(
                cli,
                "rms_relative_residual: {:.6}  samples: {}  iterations: {}",
                fit.rms_relative_residual,
                fit.samples_used,
                fit.iterations
            );
            Ok(EXIT_OK)
        }
        FieldCommand::Slice { grid, z, axis, at } => {
            let g = load_field_grid(grid)?;
            let pts = slice(&g, *z, *axis, *at);
            let mut csv = String::from("x,y,z,intensity\n");
            for (p, v) in &pts {
                csv.push_str(&format!("{},{},{},{}\n", p.x, p.y, p.z, v));
            }
            let name = match axis {
                Axis::X => "slice_x.csv",
                Axis::Y => "slice_y.csv",
            };
            write(&cli.out, name, &csv)?;
            if let Some((p, v)) = pts.iter().max_by(|a, b| a.1.total_cmp(&b.1)) {
                say!(
                    cli,
                    "{} samples; peak {v} at ({}, {}, {})",
                    pts.len(),
                    p.x,
                    p.y,
                    p.z
                );
            }
            Ok(EXIT_OK)
        }
        FieldCommand::Synth { kind, spacing } => {
            if !(*spacing >= 0.01 && *spacing <= 0.5) {
                return Err(Error::config("spacing", "must lie in [0.01, 0.5] m"));
            }
            let kind = SyntheticField::from(*kind);
            let g = synthetic_field(kind, *spacing);
            let path = cli.out.join(format!("{}.csv", kind.label()));
            save_field_grid(&path, &g)?;
            say!(cli, "wrote {}", path.display());
            Ok(EXIT_OK)
        }
    }
}
