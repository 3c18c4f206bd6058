//! Kinematic drone: velocity commands integrated with Euler steps, perturbed
//! by white actuation noise and a slowly resampled drift bias.

use core::f64::consts::{FRAC_PI_2, TAU};
use core::fmt;

use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::lightfield::{wrap_angle, Vec3};
use crate::sensing::Pose;

pub const DEFAULT_DT: f64 = 0.02;
pub const DEFAULT_V_MAX: f64 = 0.5;
pub const DEFAULT_YAW_RATE: f64 = FRAC_PI_2;
pub const DEFAULT_DRIFT_PERIOD: f64 = 5.0;
pub const MAX_DT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DroneState {
    pub position: Vec3,
    pub yaw: f64,
    pub time: f64,
    /// Velocity actually flown during the last step, noise included.
    pub velocity: Vec3,
    /// Current drift bias (m/s); replaced at every drift epoch.
    pub drift: Vec3,
    pub landed: bool,
    drift_epoch: i64,
}

impl DroneState {
    pub fn new(position: Vec3, yaw: f64) -> Self {
        Self {
            position: Vec3::new(position.x, position.y, position.z.max(0.0)),
            yaw: wrap_angle(yaw),
            time: 0.0,
            velocity: Vec3::ZERO,
            drift: Vec3::ZERO,
            landed: false,
            drift_epoch: -1,
        }
    }

    pub fn pose(&self) -> Pose {
        Pose {
            position: self.position,
            yaw: self.yaw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ControlCommand {
    Hover,
    /// `direction` is horizontal and unit length.
    MoveHorizontal {
        direction: Vec3,
        speed: f64,
    },
    YawRate(f64),
    Descend(f64),
    Land,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CommandError {
    Speed,
    Direction,
}

impl fmt::Display for CommandError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommandError::Speed => f.write_str("commanded speed outside (0, v_max]"),
            CommandError::Direction => f.write_str("direction must be a horizontal unit vector"),
        }
    }
}

impl ControlCommand {
    /// Horizontal move toward `direction`, which is flattened and normalized.
    /// Returns `Hover` for a vertical or zero direction.
    pub fn toward(direction: Vec3, speed: f64) -> Self {
        match direction.horizontal().try_normalized() {
            Some(d) if speed > 0.0 => ControlCommand::MoveHorizontal {
                direction: d,
                speed,
            },
            _ => ControlCommand::Hover,
        }
    }

    pub fn validate(&self, v_max: f64) -> Result<(), CommandError> {
        let speed_ok = |s: f64| s > 0.0 && s <= v_max + 1e-12;
        match *self {
            ControlCommand::Hover | ControlCommand::Land => Ok(()),
            ControlCommand::MoveHorizontal { direction, speed } => {
                if direction.z.abs() > 1e-9 || (direction.norm() - 1.0).abs() > 1e-9 {
                    Err(CommandError::Direction)
                } else if !speed_ok(speed) {
                    Err(CommandError::Speed)
                } else {
                    Ok(())
                }
            }
            ControlCommand::YawRate(r) => {
                if r.is_finite() && r != 0.0 {
                    Ok(())
                } else {
                    Err(CommandError::Speed)
                }
            }
            ControlCommand::Descend(s) => {
                if speed_ok(s) {
                    Ok(())
                } else {
                    Err(CommandError::Speed)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ActuationNoise {
    /// Per-axis white velocity noise (m/s).
    pub velocity_sigma: f64,
    /// Per-step yaw noise (rad).
    pub yaw_sigma: f64,
    /// Per-axis standard deviation of the horizontal drift bias (m/s).
    pub drift_sigma: f64,
    pub drift_period: f64,
}

impl Default for ActuationNoise {
    fn default() -> Self {
        Self::NONE
    }
}

impl ActuationNoise {
    pub const NONE: Self = Self {
        velocity_sigma: 0.0,
        yaw_sigma: 0.0,
        drift_sigma: 0.0,
        drift_period: DEFAULT_DRIFT_PERIOD,
    };

    pub fn is_valid(&self) -> bool {
        self.velocity_sigma >= 0.0
            && self.yaw_sigma >= 0.0
            && self.drift_sigma >= 0.0
            && self.drift_period > 0.0
            && self.velocity_sigma.is_finite()
            && self.yaw_sigma.is_finite()
            && self.drift_sigma.is_finite()
    }
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Advances the drone by one Euler step of length `dt` (clamped into (0, 0.1]).
pub fn step<R: Rng + ?Sized>(
    state: &DroneState,
    cmd: ControlCommand,
    noise: &ActuationNoise,
    dt: f64,
    rng: &mut R,
) -> DroneState {
    let dt = dt.clamp(f64::MIN_POSITIVE, MAX_DT);
    let mut next = *state;
    next.time += dt;
    if state.landed {
        next.velocity = Vec3::ZERO;
        return next;
    }
    if let ControlCommand::Land = cmd {
        next.position.z = 0.0;
        next.velocity = Vec3::ZERO;
        next.landed = true;
        return next;
    }

    if noise.drift_sigma > 0.0 {
        let epoch = libm::floor(state.time / noise.drift_period) as i64;
        if epoch != next.drift_epoch {
            next.drift_epoch = epoch;
            next.drift = Vec3::new(normal(rng), normal(rng), 0.0) * noise.drift_sigma;
        }
    }

    let (mut v, yaw_rate) = match cmd {
        ControlCommand::MoveHorizontal { direction, speed } => (direction * speed, 0.0),
        ControlCommand::Descend(speed) => (Vec3::new(0.0, 0.0, -speed), 0.0),
        ControlCommand::YawRate(r) => (Vec3::ZERO, r),
        ControlCommand::Hover | ControlCommand::Land => (Vec3::ZERO, 0.0),
    };
    if noise.velocity_sigma > 0.0 {
        v += Vec3::new(normal(rng), normal(rng), normal(rng)) * noise.velocity_sigma;
    }
    v += next.drift;

    let mut yaw = state.yaw + yaw_rate * dt;
    if noise.yaw_sigma > 0.0 {
        yaw += noise.yaw_sigma * normal(rng);
    }

    next.position += v * dt;
    if next.position.z < 0.0 {
        next.position.z = 0.0;
    }
    next.yaw = wrap_angle(yaw);
    next.velocity = v;
    next
}

/// Number of samples a full sweep takes at `yaw_rate` and `dt`.
pub fn sweep_len(yaw_rate: f64, dt: f64) -> usize {
    libm::ceil(TAU / (yaw_rate * dt) - 1e-9) as usize
}

/// Rotates one full turn, calling `sampler` before each step.
///
/// Returns the final state and `(world yaw, value)` pairs in sweep order.
pub fn yaw_sweep<R: Rng + ?Sized>(
    state: &DroneState,
    dt: f64,
    yaw_rate: f64,
    noise: &ActuationNoise,
    rng: &mut R,
    mut sampler: impl FnMut(&DroneState) -> f64,
) -> (DroneState, Vec<(f64, f64)>) {
    let n = sweep_len(yaw_rate, dt);
    let mut s = *state;
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        samples.push((s.yaw, sampler(&s)));
        s = step(&s, ControlCommand::YawRate(yaw_rate), noise, dt, rng);
    }
    (s, samples)
}
