//! CSV, JSON and SVG renderings of run and sweep results.

use std::fmt::Write as _;

use irland_core::scenario::{
    ModeTransition, Outcome, RunResult, StartGrid, SweepResult, SweepStats,
};
use serde::Serialize;

use crate::error::Result;

fn csv_string(
    header: &[&str],
    rows: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    rows(&mut w)?;
    let bytes = w
        .into_inner()
        .map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// `t,x,y,z,yaw,mode`
pub fn trajectory_csv(r: &RunResult) -> Result<String> {
    csv_string(&["t", "x", "y", "z", "yaw", "mode"], |w| {
        for p in &r.trajectory {
            let (x, y, z) = (p.position.x, p.position.y, p.position.z);
            w.write_record([
                p.t.to_string(),
                x.to_string(),
                y.to_string(),
                z.to_string(),
                p.yaw.to_string(),
                p.mode.to_string(),
            ])?;
        }
        Ok(())
    })
}

/// `t,mode_from,mode_to,trigger`
pub fn mode_log_csv(r: &RunResult) -> Result<String> {
    csv_string(&["t", "mode_from", "mode_to", "trigger"], |w| {
        for m in &r.mode_log {
            w.write_record([
                m.t.to_string(),
                m.from.to_string(),
                m.to.to_string(),
                m.trigger.to_string(),
            ])?;
        }
        Ok(())
    })
}

/// `t,pd_id,raw,filtered`, one row per PD per step.
pub fn readings_csv(r: &RunResult) -> Result<String> {
    csv_string(&["t", "pd_id", "raw", "filtered"], |w| {
        for s in &r.readings {
            for (id, (raw, filt)) in s.raw.iter().zip(&s.filtered).enumerate() {
                w.write_record([
                    s.t.to_string(),
                    id.to_string(),
                    raw.to_string(),
                    filt.to_string(),
                ])?;
            }
        }
        Ok(())
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn outcome_label(o: &Outcome) -> String {
    o.to_string()
}

/// `x,y,offset_m,time_s,outcome`; offset and time are empty for runs that did not land.
pub fn heatmap_csv(s: &SweepResult) -> Result<String> {
    csv_string(&["x", "y", "offset_m", "time_s", "outcome"], |w| {
        for c in &s.cells {
            w.write_record([
                c.start.x.to_string(),
                c.start.y.to_string(),
                opt(c.offset),
                opt(c.time),
                outcome_label(&c.outcome),
            ])?;
        }
        Ok(())
    })
}

const PALETTE: [(f64, f64, f64); 5] = [
    (68.0, 1.0, 84.0),
    (59.0, 82.0, 139.0),
    (33.0, 145.0, 140.0),
    (94.0, 201.0, 98.0),
    (253.0, 231.0, 37.0),
];

fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0) * (PALETTE.len() - 1) as f64;
    let i = (t.floor() as usize).min(PALETTE.len() - 2);
    let f = t - i as f64;
    let (a, b) = (PALETTE[i], PALETTE[i + 1]);
    let mix = |x: f64, y: f64| (x + (y - x) * f).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(a.0, b.0),
        mix(a.1, b.1),
        mix(a.2, b.2)
    )
}

/// Landing-offset heatmap, one square per start cell with row 0 at the
/// bottom. Failed and timed-out cells are grey.
pub fn heatmap_svg(s: &SweepResult) -> String {
    const CELL: usize = 24;
    const PAD: usize = 40;
    let g = &s.grid;
    let max = s
        .cells
        .iter()
        .filter_map(|c| c.offset)
        .fold(0.0, f64::max)
        .max(1e-9);
    let (w, h) = (g.nx * CELL + 2 * PAD, g.ny * CELL + 2 * PAD);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{PAD}" y="{}">landing offset (m), max {max:.3}</text>"#,
        PAD / 2
    );
    for c in &s.cells {
        let (col, row) = (c.index % g.nx, c.index / g.nx);
        let x = PAD + col * CELL;
        let y = PAD + (g.ny - 1 - row) * CELL;
        let fill = c
            .offset
            .map_or_else(|| "#9e9e9e".to_string(), |o| color(o / max));
        let _ = writeln!(
            out,
            r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{fill}"><title>({:.3}, {:.3}) {}</title></rect>"#,
            c.start.x, c.start.y, c.outcome
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{PAD}" y="{}">x {:.2} to {:.2}, y {:.2} to {:.2}</text>"#,
        h - PAD / 3,
        g.x[0],
        g.x[1],
        g.y[0],
        g.y[1]
    );
    out.push_str("</svg>\n");
    out
}

#[derive(Debug, Serialize)]
pub struct RunSummary<'a> {
    pub seed: u64,
    pub outcome: String,
    pub landing_offset_m: Option<f64>,
    pub landing_time_s: Option<f64>,
    pub final_leg_time_s: Option<f64>,
    pub elapsed_s: f64,
    pub final_position: [f64; 3],
    pub barrier_stops: usize,
    pub modes: &'a [ModeTransition],
}

pub fn run_json(r: &RunResult, seed: u64) -> Result<String> {
    let p = r.final_position;
    let summary = RunSummary {
        seed,
        outcome: r.outcome.to_string(),
        landing_offset_m: r.landing_offset,
        landing_time_s: r.landing_time,
        final_leg_time_s: r.final_leg_time,
        elapsed_s: r.elapsed,
        final_position: [p.x, p.y, p.z],
        barrier_stops: r.count_mode(irland_core::guidance::ControllerMode::BarrierStop),
        modes: &r.mode_log,
    };
    Ok(serde_json::to_string_pretty(&summary)? + "\n")
}

#[derive(Debug, Serialize)]
struct StatsFile<'a> {
    seed: u64,
    grid: &'a StartGrid,
    stats: &'a SweepStats,
}

pub fn stats_json(s: &SweepResult, seed: u64) -> Result<String> {
    Ok(serde_json::to_string_pretty(&StatsFile {
        seed,
        grid: &s.grid,
        stats: &s.stats,
    })? + "\n")
}
