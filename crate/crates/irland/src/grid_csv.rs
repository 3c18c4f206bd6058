//! Field-grid CSV: `#` comment lines (metadata `label=`, `height=`), a
//! `x,y,z,intensity` header, then one row per sample, x fastest, then y, then z.

use std::fmt::Write as _;
use std::path::Path;

use irland_core::lightfield::{MeasuredFieldGrid, Vec3};

use crate::error::{Error, Result};
use crate::io::{read_to_string, write_atomic};

const HEADER: [&str; 4] = ["x", "y", "z", "intensity"];

struct Row {
    line: u64,
    p: [f64; 3],
    value: f64,
}

pub fn load_field_grid(path: &Path) -> Result<MeasuredFieldGrid> {
    parse_field_grid(&read_to_string(path)?)
}

pub fn save_field_grid(path: &Path, grid: &MeasuredFieldGrid) -> Result<()> {
    write_atomic(path, format_field_grid(grid).as_bytes())
}

pub fn format_field_grid(grid: &MeasuredFieldGrid) -> String {
    let mut out = String::new();
    let label: String = grid
        .label
        .chars()
        .map(|c| if c == '\n' || c == '\r' { ' ' } else { c })
        .collect();
    let _ = writeln!(out, "# label={label}");
    if let Some(h) = grid.height {
        let _ = writeln!(out, "# height={h}");
    }
    out.push_str("x,y,z,intensity\n");
    for (p, v) in grid.points() {
        let _ = writeln!(out, "{},{},{},{}", p.x, p.y, p.z, v);
    }
    out
}

pub fn parse_field_grid(text: &str) -> Result<MeasuredFieldGrid> {
    let mut label = String::new();
    let mut height = None;
    for (i, line) in text.lines().enumerate() {
        let Some(comment) = line.trim_start().strip_prefix('#') else {
            continue;
        };
        let comment = comment.trim();
        if let Some(v) = comment.strip_prefix("label=") {
            label = v.trim().to_string();
        } else if let Some(v) = comment.strip_prefix("height=") {
            let h: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::grid(i as u64 + 1, format!("bad height `{}`", v.trim())))?;
            height = Some(h);
        }
    }

    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = rdr.records();
    let header = match records.next() {
        Some(r) => r?,
        None => return Err(Error::grid(1, "missing header")),
    };
    let header_line = header.position().map_or(1, |p| p.line());
    if header.len() != 4
        || header
            .iter()
            .zip(HEADER)
            .any(|(a, b)| !a.eq_ignore_ascii_case(b))
    {
        return Err(Error::grid(
            header_line,
            "malformed header (expected `x,y,z,intensity`)",
        ));
    }

    let mut rows = Vec::new();
    for rec in records {
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                return Err(Error::grid(line, format!("unreadable row ({e})")));
            }
        };
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 4 {
            return Err(Error::grid(
                line,
                format!("expected 4 columns, found {}", rec.len()),
            ));
        }
        let mut vals = [0.0f64; 4];
        for (slot, field) in vals.iter_mut().zip(rec.iter()) {
            *slot = field
                .parse()
                .map_err(|_| Error::grid(line, format!("bad number `{field}`")))?;
        }
        if vals[..3].iter().any(|v| !v.is_finite()) {
            return Err(Error::grid(line, "non-finite coordinate"));
        }
        if !vals[3].is_finite() {
            return Err(Error::grid(line, "non-finite sample"));
        }
        if vals[3] < 0.0 {
            return Err(Error::grid(line, "negative sample"));
        }
        rows.push(Row {
            line,
            p: [vals[0], vals[1], vals[2]],
            value: vals[3],
        });
    }
    if rows.is_empty() {
        return Err(Error::grid(header_line, "no samples after the header"));
    }

    let (dims, axes) = lattice(&rows)?;
    let spacing = [0, 1, 2].map(|a| {
        if dims[a] > 1 {
            (axes[a][dims[a] - 1] - axes[a][0]) / (dims[a] - 1) as f64
        } else {
            1.0
        }
    });
    for a in 0..3 {
        for (k, &c) in axes[a].iter().enumerate() {
            let expected = axes[a][0] + k as f64 * spacing[a];
            if (c - expected).abs() > tolerance(spacing[a]) {
                let row = &rows[k * [1, dims[0], dims[0] * dims[1]][a]];
                return Err(Error::grid(
                    row.line,
                    format!("uneven {} spacing", ["x", "y", "z"][a]),
                ));
            }
        }
    }
    let origin = Vec3::new(axes[0][0], axes[1][0], axes[2][0]);
    let samples = rows.iter().map(|r| r.value).collect();
    let mut grid = MeasuredFieldGrid::new(origin, spacing, dims, samples, label)?;
    grid.height = height;
    Ok(grid)
}

fn tolerance(spacing: f64) -> f64 {
    1e-6 * spacing + 1e-9
}

/// Infers the lattice from x-fastest row order and checks every row against it.
fn lattice(rows: &[Row]) -> Result<([usize; 3], [Vec<f64>; 3])> {
    let same = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()));
    let first = &rows[0];
    let nx = rows
        .iter()
        .take_while(|r| same(r.p[1], first.p[1]) && same(r.p[2], first.p[2]))
        .count();
    let mut ny = 1;
    while ny * nx < rows.len() && same(rows[ny * nx].p[2], first.p[2]) {
        ny += 1;
    }
    let layer = nx * ny;
    if !rows.len().is_multiple_of(layer) {
        return Err(Error::grid(
            rows[rows.len() - 1].line,
            format!(
                "inconsistent row count: {} rows do not fill {nx}×{ny} layers",
                rows.len()
            ),
        ));
    }
    let nz = rows.len() / layer;
    let xs: Vec<f64> = rows[..nx].iter().map(|r| r.p[0]).collect();
    let ys: Vec<f64> = (0..ny).map(|j| rows[j * nx].p[1]).collect();
    let zs: Vec<f64> = (0..nz).map(|k| rows[k * layer].p[2]).collect();
    let names = ["x", "y", "z"];
    for (a, (axis, stride)) in [(&xs, 1), (&ys, nx), (&zs, layer)].into_iter().enumerate() {
        if let Some(k) = axis
            .windows(2)
            .position(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
        {
            return Err(Error::grid(
                rows[(k + 1) * stride].line,
                format!("non-monotonic {} coordinate", names[a]),
            ));
        }
    }
    for (i, r) in rows.iter().enumerate() {
        let expected = [xs[i % nx], ys[(i / nx) % ny], zs[i / layer]];
        if let Some(a) = (0..3).find(|&a| !same(r.p[a], expected[a])) {
            return Err(Error::grid(
                r.line,
                format!("{} coordinate out of lattice order", names[a]),
            ));
        }
    }
    Ok(([nx, ny, nz], [xs, ys, zs]))
}
