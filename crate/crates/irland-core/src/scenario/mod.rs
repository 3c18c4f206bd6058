//! End-to-end runs: sensing → rolling-min filter → controller → dynamics,
//! plus start-grid sweeps, operating-range sweeps and the reference setups.

mod range;
mod reference;
mod sweep;

use core::fmt;

use alloc::vec::Vec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{step, ActuationNoise, DroneState, DEFAULT_DT, MAX_DT};
use crate::guidance::{
    guidance_step, ControllerKind, ControllerMode, ControllerState, FailReason, GuidanceParams,
    PdLayout,
};
use crate::lightfield::{Environment, Vec3};
use crate::sensing::{
    default_filter_window, pd_reading, InterferenceModel, RollingMin, DEFAULT_INTERFERENCE_PERIOD,
};

pub use range::{
    bearing_usable, compute_operating_range, crossover_radius, OperatingRange, RangeSensors,
    RangeVariant,
};
pub use reference::{
    calibrated_motor_response, calibrated_noise, calibrated_params, calibrated_response,
    calibrated_source, grid_environment, reference_environment, reference_environments,
    synthetic_field, ReferenceEnv, SyntheticField, FINAL_LEG_TARGET,
};
pub use sweep::{
    cell_seed, run_cell, summarize, sweep_start_grid, CellResult, StartGrid, SweepResult,
    SweepStats,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfigError {
    pub field: &'static str,
    pub reason: &'static str,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid `{}`: {}", self.field, self.reason)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ConfigError {}

fn check(ok: bool, field: &'static str, reason: &'static str) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError { field, reason })
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub environment: Environment,
    pub layout: PdLayout,
    pub controller: ControllerKind,
    pub start: Vec3,
    pub start_yaw: f64,
    pub dt: f64,
    pub max_time: f64,
    pub seed: u64,
    pub noise: ActuationNoise,
    pub params: GuidanceParams,
    /// Rolling-min window in samples.
    pub filter_window: usize,
    pub interference: Option<InterferenceModel>,
}

impl ScenarioConfig {
    /// Calibrated defaults for the given environment, controller and start.
    pub fn new(environment: Environment, controller: ControllerKind, start: Vec3) -> Self {
        let response = calibrated_response();
        let layout = match controller {
            ControllerKind::Hybrid => PdLayout::hybrid(
                crate::guidance::DEFAULT_ARRAY_RADIUS,
                calibrated_motor_response(),
                response,
            ),
            ControllerKind::ArPd => {
                PdLayout::arpd(3, crate::guidance::DEFAULT_ARRAY_RADIUS, response)
            }
            ControllerKind::Spd => PdLayout::spd(crate::guidance::DEFAULT_ARRAY_RADIUS, response),
        };
        let params = calibrated_params(&layout);
        Self {
            environment,
            layout,
            controller,
            start,
            start_yaw: 0.0,
            dt: DEFAULT_DT,
            max_time: 60.0,
            seed: 0,
            noise: calibrated_noise(),
            params,
            filter_window: default_filter_window(DEFAULT_INTERFERENCE_PERIOD, DEFAULT_DT),
            interference: None,
        }
    }

    /// Replaces the layout and re-derives `min_signal` from its noise floor.
    pub fn with_layout(mut self, layout: PdLayout) -> Self {
        self.params.min_signal = layout.default_min_signal();
        self.layout = layout;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        check(
            self.dt > 0.0 && self.dt <= MAX_DT,
            "dt",
            "must lie in (0, 0.1] s",
        )?;
        check(
            self.max_time > 0.0 && self.max_time.is_finite(),
            "max_time",
            "must be positive",
        )?;
        check(
            self.start.is_finite() && self.start.z > 0.0,
            "start",
            "must be finite with z > 0",
        )?;
        check(self.start_yaw.is_finite(), "start_yaw", "must be finite")?;
        check(
            self.filter_window >= 1,
            "filter_window",
            "must be at least 1 sample",
        )?;
        check(
            self.noise.is_valid(),
            "noise",
            "sigmas must be >= 0 and drift_period > 0",
        )?;
        if self.layout.validate().is_err() {
            return Err(ConfigError {
                field: "layout",
                reason: "inconsistent photodiode layout",
            });
        }
        let needs_motor = self.controller == ControllerKind::Hybrid;
        check(
            !needs_motor || (self.layout.motorized_index().is_some() && self.layout.len() == 3),
            "layout",
            "hybrid needs one motorized and two downward photodiodes",
        )?;
        check(
            self.controller != ControllerKind::ArPd || self.layout.len() >= 2,
            "layout",
            "ArPD needs at least two photodiodes",
        )?;
        if let Some(field) = self.params.invalid_field() {
            return Err(ConfigError {
                field,
                reason: "out of range",
            });
        }
        if let Some(i) = &self.interference {
            check(
                i.validate().is_ok(),
                "interference",
                "amplitude >= 0, period > 0, duty in [0, 1]",
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Outcome {
    Landed,
    Failed(FailReason),
    Timeout,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Landed => f.write_str("landed"),
            Outcome::Failed(r) => write!(f, "failed: {r}"),
            Outcome::Timeout => f.write_str("timeout"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrajectoryPoint {
    pub t: f64,
    pub position: Vec3,
    pub yaw: f64,
    pub mode: ControllerMode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModeTransition {
    pub t: f64,
    pub from: ControllerMode,
    pub to: ControllerMode,
    pub trigger: &'static str,
    /// Drone position when the transition was decided.
    pub position: Vec3,
    /// Motorized tilt the deciding readings were taken at.
    pub tilt: f64,
}

/// Per-step PD counts before and after the rolling-minimum filter.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SensorSample {
    pub t: f64,
    /// Motorized tilt the readings were taken at.
    pub tilt: f64,
    pub raw: Vec<u32>,
    pub filtered: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RunResult {
    pub outcome: Outcome,
    /// Horizontal distance from the station at touchdown.
    pub landing_offset: Option<f64>,
    pub landing_time: Option<f64>,
    /// Time from the last NearFieldArPD entry to touchdown.
    pub final_leg_time: Option<f64>,
    pub elapsed: f64,
    pub final_position: Vec3,
    pub trajectory: Vec<TrajectoryPoint>,
    pub mode_log: Vec<ModeTransition>,
    pub readings: Vec<SensorSample>,
}

impl RunResult {
    pub fn count_mode(&self, mode: ControllerMode) -> usize {
        self.mode_log.iter().filter(|m| m.to == mode).count()
    }

    /// Modes in the order they were entered, starting with the initial one.
    pub fn mode_sequence(&self) -> Vec<ControllerMode> {
        let first = self
            .mode_log
            .first()
            .map(|m| m.from)
            .or(self.trajectory.first().map(|p| p.mode));
        let mut seq: Vec<ControllerMode> = first.into_iter().collect();
        seq.extend(self.mode_log.iter().map(|m| m.to));
        seq
    }
}

/// Runs one scenario to touchdown, failure or `max_time`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunResult, ConfigError> {
    cfg.validate()?;
    Ok(run_validated(cfg))
}

fn run_validated(cfg: &ScenarioConfig) -> RunResult {
    let env = &cfg.environment;
    let layout = &cfg.layout;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut filters: Vec<RollingMin> = (0..layout.len())
        .map(|_| RollingMin::new(cfg.filter_window).expect("validated window"))
        .collect();
    let mut ctrl = ControllerState::new(cfg.controller, cfg.params, cfg.dt);
    let mut drone = DroneState::new(cfg.start, cfg.start_yaw);
    let mut readings = alloc::vec![0.0; layout.len()];
    let steps = libm::ceil(cfg.max_time / cfg.dt - 1e-9) as usize;
    let mut trajectory = Vec::with_capacity(steps + 1);
    let mut mode_log = Vec::new();
    let mut samples = Vec::with_capacity(steps);
    trajectory.push(TrajectoryPoint {
        t: 0.0,
        position: drone.position,
        yaw: drone.yaw,
        mode: ctrl.mode,
    });

    for _ in 0..steps {
        let pose = drone.pose();
        let mut sample = SensorSample {
            t: drone.time,
            tilt: ctrl.tilt,
            raw: alloc::vec![0; layout.len()],
            filtered: alloc::vec![0; layout.len()],
        };
        for (i, mount) in layout.mounts_at_tilt(ctrl.tilt).enumerate() {
            let resp = &layout.responses[i];
            let mut raw = pd_reading(&mount, resp, &pose, env, &mut rng);
            if let Some(model) = &cfg.interference {
                raw = raw
                    .saturating_add(model.offset_counts(drone.time, resp))
                    .min(resp.max_count());
            }
            let filtered = filters[i].push(raw);
            readings[i] = filtered as f64;
            sample.raw[i] = raw;
            sample.filtered[i] = filtered;
        }
        samples.push(sample);
        let before = ctrl.mode;
        let tilt = ctrl.tilt;
        let cmd = guidance_step(&mut ctrl, &readings, &drone, layout);
        let mut next = step(&drone, cmd, &cfg.noise, cfg.dt, &mut rng);
        if env
            .surfaces()
            .iter()
            .any(|s| s.opaque && s.blocks_segment(drone.position, next.position))
        {
            ctrl.fail(FailReason::Collision, "wall contact");
            let t = next.time;
            next = drone;
            next.time = t;
            next.velocity = Vec3::ZERO;
        }
        if ctrl.mode != before {
            mode_log.push(ModeTransition {
                t: drone.time,
                from: before,
                to: ctrl.mode,
                trigger: ctrl.trigger,
                position: drone.position,
                tilt,
            });
        }
        drone = next;
        trajectory.push(TrajectoryPoint {
            t: drone.time,
            position: drone.position,
            yaw: drone.yaw,
            mode: ctrl.mode,
        });
        if ctrl.mode.is_terminal() {
            break;
        }
    }

    let station = env.source_position();
    let outcome = match ctrl.mode {
        ControllerMode::Landed => Outcome::Landed,
        ControllerMode::Failed(r) => Outcome::Failed(r),
        _ => Outcome::Timeout,
    };
    let landed = outcome == Outcome::Landed;
    RunResult {
        outcome,
        landing_offset: landed.then(|| (drone.position - station).horizontal().norm()),
        landing_time: landed.then_some(drone.time),
        final_leg_time: if landed {
            ctrl.final_leg_start.map(|t0| drone.time - t0)
        } else {
            None
        },
        elapsed: drone.time,
        final_position: drone.position,
        trajectory,
        mode_log,
        readings: samples,
    }
}
