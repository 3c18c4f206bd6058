use alloc::vec::Vec;
use core::fmt;

use super::{LightSource, MeasuredFieldGrid, Vec3};

const MIN_SAMPLES: usize = 25;
const MAX_ITERATIONS: usize = 300;
/// Samples below this fraction of the grid maximum are treated as noise floor.
const FLOOR_FRACTION: f64 = 1e-3;

/// Result of calibrating the analytic bulb against a measured grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BulbFit {
    pub source: LightSource,
    /// Root-mean-square of `(model - measured) / measured` over the fitted samples.
    pub rms_relative_residual: f64,
    pub iterations: usize,
    pub samples_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FitError {
    TooFewSamples {
        found: usize,
    },
    /// The grid shows no decay away from any point; the fit would be degenerate (m ≈ 0).
    NoDecay,
    NotConverged {
        best: BulbFit,
    },
}

impl fmt::Display for FitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitError::TooFewSamples { found } => {
                write!(
                    f,
                    "need at least {MIN_SAMPLES} samples above the noise floor, found {found}"
                )
            }
            FitError::NoDecay => {
                f.write_str("grid is flat: no decay information, isotropic degenerate fit")
            }
            FitError::NotConverged { best } => write!(
                f,
                "fit did not converge in {} iterations (best rms relative residual {:.4})",
                best.iterations, best.rms_relative_residual
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FitError {}

#[cfg(feature = "std")]
extern crate std;

// parameters: [ln power, m, sx, sy, sz]
type Params = [f64; 5];

fn model(params: &Params, p: Vec3) -> f64 {
    let src = Vec3::new(params[2], params[3], params[4]);
    let v = p - src;
    let d2 = v.norm_squared();
    if d2 < 1e-18 || v.z <= 0.0 {
        return 0.0;
    }
    let cos_t = v.z / libm::sqrt(d2);
    libm::exp(params[0]) * libm::pow(cos_t, params[1]) / d2
}

fn residuals(params: &Params, pts: &[(Vec3, f64)], out: &mut Vec<f64>) -> f64 {
    out.clear();
    let mut cost = 0.0;
    for &(p, obs) in pts {
        let r = (model(params, p) - obs) / obs;
        cost += r * r;
        out.push(r);
    }
    cost
}

fn solve5(mut a: [[f64; 5]; 5], mut b: [f64; 5]) -> Option<[f64; 5]> {
    for col in 0..5 {
        let pivot =
            (col..5).max_by(|&i, &j| libm::fabs(a[i][col]).total_cmp(&libm::fabs(a[j][col])))?;
        if libm::fabs(a[pivot][col]) < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..5 {
            let factor = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (v, p) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *v -= factor * p;
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; 5];
    for row in (0..5).rev() {
        let mut s = b[row];
        for k in row + 1..5 {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn initial_guess(grid: &MeasuredFieldGrid, pts: &[(Vec3, f64)]) -> Params {
    let (peak, peak_val) = pts
        .iter()
        .copied()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty sample set");
    // Along the peak column, I ∝ 1/(z - sz)²; two heights pin sz.
    let column: Vec<(f64, f64)> = pts
        .iter()
        .filter(|(p, _)| libm::fabs(p.x - peak.x) < 1e-9 && libm::fabs(p.y - peak.y) < 1e-9)
        .map(|(p, v)| (p.z, *v))
        .collect();
    let lowest = grid.origin().z;
    let mut sz = lowest - 1.0;
    if let (Some(lo), Some(hi)) = (
        column.iter().copied().min_by(|a, b| a.0.total_cmp(&b.0)),
        column.iter().copied().max_by(|a, b| a.0.total_cmp(&b.0)),
    ) {
        if hi.0 > lo.0 && lo.1 > hi.1 {
            let ratio = libm::sqrt(lo.1 / hi.1);
            let est = (ratio * lo.0 - hi.0) / (ratio - 1.0);
            if est.is_finite() && est < lo.0 {
                sz = est;
            }
        }
    }
    let dz = peak.z - sz;
    [libm::log(peak_val * dz * dz), 1.0, peak.x, peak.y, sz]
}

/// Least-squares fit of power, Lambert exponent and position of an upward-facing
/// bulb to the grid, minimizing the relative residual over samples above the
/// noise floor.
pub fn fit_bulb_model(grid: &MeasuredFieldGrid) -> Result<BulbFit, FitError> {
    let max = grid.max_sample();
    let floor = max * FLOOR_FRACTION;
    let pts: Vec<(Vec3, f64)> = grid
        .points()
        .filter(|&(_, v)| v > floor && v > 0.0)
        .collect();
    if pts.len() < MIN_SAMPLES {
        return Err(FitError::TooFewSamples { found: pts.len() });
    }
    let min = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    if (max - min) <= 1e-9 * max {
        return Err(FitError::NoDecay);
    }

    let mut params = initial_guess(grid, &pts);
    let mut res = Vec::with_capacity(pts.len());
    let mut trial_res = Vec::with_capacity(pts.len());
    let mut cost = residuals(&params, &pts, &mut res);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    let mut jac: Vec<[f64; 5]> = Vec::with_capacity(pts.len());

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        jac.clear();
        for &(p, obs) in &pts {
            let mut row = [0.0; 5];
            for k in 0..5 {
                let h = 1e-6 * libm::fabs(params[k]).max(1e-3);
                let mut hi = params;
                let mut lo = params;
                hi[k] += h;
                lo[k] -= h;
                row[k] = (model(&hi, p) - model(&lo, p)) / (2.0 * h * obs);
            }
            jac.push(row);
        }
        let mut jtj = [[0.0; 5]; 5];
        let mut jtr = [0.0; 5];
        for (row, r) in jac.iter().zip(&res) {
            for i in 0..5 {
                jtr[i] += row[i] * r;
                for j in 0..5 {
                    jtj[i][j] += row[i] * row[j];
                }
            }
        }
        let mut improved = false;
        for _ in 0..20 {
            let mut a = jtj;
            for (i, row) in a.iter_mut().enumerate() {
                row[i] += lambda * jtj[i][i].max(1e-12);
            }
            let Some(step) = solve5(a, jtr.map(|v| -v)) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial = params;
            for k in 0..5 {
                trial[k] += step[k];
            }
            trial[1] = trial[1].max(0.0);
            let trial_cost = residuals(&trial, &pts, &mut trial_res);
            if trial_cost.is_finite() && trial_cost < cost {
                let rel_change = (cost - trial_cost) / cost.max(1e-300);
                let step_norm = step.iter().map(|s| s * s).sum::<f64>();
                params = trial;
                core::mem::swap(&mut res, &mut trial_res);
                cost = trial_cost;
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                if rel_change < 1e-12 || step_norm < 1e-24 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved || converged {
            // no downhill step left: a local minimum within numerical precision
            converged = true;
            break;
        }
    }

    let source = LightSource {
        position: Vec3::new(params[2], params[3], params[4]),
        axis: Vec3::Z,
        power: libm::exp(params[0]),
        lambert_exponent: params[1],
    };
    let fit = BulbFit {
        source,
        rms_relative_residual: libm::sqrt(cost / pts.len() as f64),
        iterations,
        samples_used: pts.len(),
    };
    if converged && fit.source.power.is_finite() {
        Ok(fit)
    } else {
        Err(FitError::NotConverged { best: fit })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn synthetic(power: f64, m: f64, pos: Vec3) -> MeasuredFieldGrid {
        let src = LightSource::bulb(pos, power, m).unwrap();
        MeasuredFieldGrid::from_fn(
            Vec3::new(-1.0, -1.0, 0.4),
            [0.1, 0.1, 0.2],
            [21, 21, 5],
            "bulb",
            |p| src.irradiance_at(p).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn recovers_synthetic_parameters() {
        let fit = fit_bulb_model(&synthetic(2.0, 1.3, Vec3::ZERO)).unwrap();
        assert!((fit.source.power - 2.0).abs() / 2.0 < 0.01, "{fit:?}");
        assert!(
            (fit.source.lambert_exponent - 1.3).abs() / 1.3 < 0.01,
            "{fit:?}"
        );
        assert!(fit.rms_relative_residual < 1e-6);
    }

    #[test]
    fn recovers_offset_source() {
        let fit = fit_bulb_model(&synthetic(0.7, 2.0, Vec3::new(0.2, -0.1, 0.1))).unwrap();
        assert!(
            (fit.source.position - Vec3::new(0.2, -0.1, 0.1)).norm() < 1e-3,
            "{fit:?}"
        );
    }

    #[test]
    fn flat_grid_is_flagged() {
        let g =
            MeasuredFieldGrid::new(Vec3::ZERO, [0.1; 3], [6, 6, 2], vec![3.0; 72], "flat").unwrap();
        assert_eq!(fit_bulb_model(&g).unwrap_err(), FitError::NoDecay);
    }

    #[test]
    fn too_few_samples() {
        let g = MeasuredFieldGrid::new(
            Vec3::ZERO,
            [0.1; 3],
            [2, 2, 2],
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0],
            "",
        )
        .unwrap();
        assert!(matches!(
            fit_bulb_model(&g),
            Err(FitError::TooFewSamples { found: 8 })
        ));
    }
}
