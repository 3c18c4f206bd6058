use core::f64::consts::PI;

use alloc::vec::Vec;

use crate::dynamics::{sweep_len, DEFAULT_DT};
use crate::guidance::{
    arpd_direction, spd_sweep_direction, switch_check, GuidanceParams, PdLayout,
    DEFAULT_ARRAY_RADIUS,
};
use crate::lightfield::{angle_between_bearings, Environment, Vec3};
use crate::sensing::{pd_signal, PdMount, PdResponse, Pose};

/// Radial step of the operating-range sweep.
pub const RANGE_STEP: f64 = 0.01;
/// Largest bearing error still counted as a usable estimate.
pub const MAX_BEARING_ERROR: f64 = PI / 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RangeVariant {
    /// Six downward PDs, vector-sum bearing.
    DownwardArray,
    /// One side-facing PD, yaw-sweep bearing.
    SideFacing,
    /// Side-facing sweep where it works, downward array otherwise.
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OperatingRange {
    pub r_min: f64,
    pub r_max: f64,
}

/// Photodiodes compared by the operating-range sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RangeSensors {
    pub downward: PdResponse,
    pub motorized: PdResponse,
    /// Tilt of the motorized PD during the hybrid's yaw sweep.
    pub sweep_tilt: f64,
    pub min_signal: f64,
}

impl RangeSensors {
    pub fn calibrated() -> Self {
        let layout = PdLayout::hybrid(
            DEFAULT_ARRAY_RADIUS,
            super::calibrated_motor_response(),
            super::calibrated_response(),
        );
        Self {
            downward: layout.responses[1],
            motorized: layout.responses[0],
            sweep_tilt: GuidanceParams::default().sweep_tilt,
            min_signal: layout.default_min_signal(),
        }
    }
}

fn quantized(m: &PdMount, resp: &PdResponse, pose: &Pose, env: &Environment) -> f64 {
    resp.quantize(pd_signal(m, resp, pose, env)) as f64
}

/// Bearing from the six-PD downward array, if it is usable.
fn downward_bearing(
    resp: &PdResponse,
    pose: &Pose,
    env: &Environment,
    min_signal: f64,
) -> Option<f64> {
    let layout = PdLayout::arpd(6, DEFAULT_ARRAY_RADIUS, *resp);
    let r: Vec<f64> = layout
        .mounts
        .iter()
        .map(|m| quantized(m, resp, pose, env))
        .collect();
    if r.iter().fold(0.0, |a: f64, &b| a.max(b)) <= min_signal {
        return None;
    }
    arpd_direction(&r, &layout, pose.yaw, min_signal)
        .ok()
        .flatten()
        .map(|d| d.bearing())
}

/// Bearing from a full yaw sweep of one front PD at `tilt`.
fn sweep_bearing(
    resp: &PdResponse,
    tilt: f64,
    pose: &Pose,
    env: &Environment,
    min_signal: f64,
) -> Option<f64> {
    let n = sweep_len(GuidanceParams::default().yaw_rate, DEFAULT_DT);
    let mount = PdMount {
        offset: Vec3::X * DEFAULT_ARRAY_RADIUS,
        azimuth: 0.0,
        tilt,
        motorized: false,
    };
    let samples: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let yaw = core::f64::consts::TAU * i as f64 / n as f64;
            (yaw, quantized(&mount, resp, &Pose { yaw, ..*pose }, env))
        })
        .collect();
    if samples.iter().fold(0.0, |a: f64, s| a.max(s.1)) <= min_signal {
        return None;
    }
    spd_sweep_direction(&samples, min_signal).ok()
}

/// Whether `variant` yields a bearing within 30° of the truth at `pose`.
pub fn bearing_usable(
    variant: RangeVariant,
    sensors: &RangeSensors,
    pose: &Pose,
    env: &Environment,
) -> bool {
    let to_station = env.source_position() - pose.position;
    let truth = to_station.horizontal().bearing();
    let ok =
        |b: Option<f64>| b.is_some_and(|b| angle_between_bearings(b, truth) < MAX_BEARING_ERROR);
    let m = sensors.min_signal;
    match variant {
        RangeVariant::DownwardArray => ok(downward_bearing(&sensors.downward, pose, env, m)),
        RangeVariant::SideFacing => ok(sweep_bearing(&sensors.motorized, 0.0, pose, env, m)),
        RangeVariant::Hybrid => {
            ok(downward_bearing(&sensors.downward, pose, env, m))
                || ok(sweep_bearing(
                    &sensors.motorized,
                    sensors.sweep_tilt,
                    pose,
                    env,
                    m,
                ))
        }
    }
}

/// Longest contiguous band of radii (1 cm steps out to `r_limit`, along +x
/// from the station at `height`) where the variant's noise-free bearing
/// estimate is within 30° and its strongest reading exceeds `min_signal`.
/// `None` when no radius qualifies.
pub fn compute_operating_range(
    variant: RangeVariant,
    height: f64,
    env: &Environment,
    sensors: &RangeSensors,
    r_limit: f64,
) -> Option<OperatingRange> {
    let station = env.source_position();
    let steps = libm::floor(r_limit / RANGE_STEP + 1e-9) as usize;
    let mut best: Option<(usize, usize)> = None;
    let mut run_start: Option<usize> = None;
    for i in 1..=steps + 1 {
        let ok = i <= steps && {
            let r = i as f64 * RANGE_STEP;
            let pose = Pose {
                position: station + Vec3::new(r, 0.0, height),
                yaw: 0.0,
            };
            bearing_usable(variant, sensors, &pose, env)
        };
        match (ok, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                if best.is_none_or(|(bs, be)| i - s > be - bs) {
                    best = Some((s, i));
                }
                run_start = None;
            }
            _ => {}
        }
    }
    best.map(|(s, e)| OperatingRange {
        r_min: s as f64 * RANGE_STEP,
        r_max: (e - 1) as f64 * RANGE_STEP,
    })
}

/// Brute-force hybrid switch radius: walking in from `r_start` along +x at
/// `height`, the first radius (1 mm steps) where [`switch_check`] passes with
/// the motorized PD facing the station at `tilt`. Noise-free and quantized.
pub fn crossover_radius(
    env: &Environment,
    layout: &PdLayout,
    height: f64,
    tilt: f64,
    params: &GuidanceParams,
    r_start: f64,
) -> Option<f64> {
    let station = env.source_position();
    let motor = layout.motorized_index()?;
    let steps = libm::floor(r_start / 0.001) as usize;
    for i in (0..=steps).rev() {
        let r = i as f64 * 0.001;
        let pose = Pose {
            position: station + Vec3::new(r, 0.0, height),
            yaw: PI,
        };
        let readings: Vec<f64> = layout
            .mounts_at_tilt(tilt)
            .zip(&layout.responses)
            .map(|(m, resp)| quantized(&m, resp, &pose, env))
            .collect();
        let down: Vec<f64> = readings
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != motor)
            .map(|(_, &v)| v)
            .collect();
        if down.len() == 2 && switch_check(readings[motor], [down[0], down[1]], params) {
            return Some(r);
        }
    }
    None
}
