//! Landing controllers: the downward array (ArPD), the single-PD yaw sweep
//! (SPD) and the motorized-PD hybrid with barrier detection for non
//! line-of-sight starts.

mod controller;
mod estimate;
mod layout;

use core::f64::consts::FRAC_PI_2;
use core::fmt;

pub use controller::{guidance_step, hybrid_step, ControllerKind, ControllerState};
pub use estimate::{
    arpd_direction, array_pull, detect_barrier, equal_intensity_check, polar_sweep_best_tilt,
    relative_imbalance, relative_spread, spd_sweep_direction, switch_check, tilt_schedule,
    IntensityHistory, SweepError,
};
pub use layout::{LayoutError, PdLayout, DEFAULT_ARRAY_RADIUS};

/// Thresholds and speeds for all controllers. Counts are filtered ADC counts.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct GuidanceParams {
    /// Relative spread (max−min)/max below which the array counts as centered.
    pub equal_tol: f64,
    pub switch_margin: f64,
    pub barrier_ratio: f64,
    pub barrier_window: usize,
    /// Tilt increase (rad) per unit relative intensity increase of the motorized PD.
    pub tilt_gain: f64,
    pub min_signal: f64,
    /// Samples to wait after a tilt change so the rolling-min filter flushes.
    pub settle_samples: usize,
    pub history_capacity: usize,
    pub yaw_rate: f64,
    /// Number of evenly spaced tilts visited by the polar sweep, 0 to π/2.
    pub polar_steps: usize,
    /// Motorized tilt held during yaw sweeps.
    pub sweep_tilt: f64,
    pub approach_speed: f64,
    pub near_speed_max: f64,
    /// Near-field speed (m/s) per unit array pull.
    pub near_gain: f64,
    /// Distance (m) flown on past a detected barrier before reorienting, so
    /// the sweep is not taken on the edge of the shadow.
    pub barrier_clearance: f64,
    /// Speed cap (m/s) on horizontal corrections made while descending.
    pub correction_speed_max: f64,
    /// Relative imbalance below which the array counts as balanced.
    pub balance_tol: f64,
    pub descend_speed: f64,
    /// During Descend, lateral corrections start once the imbalance exceeds
    /// `balance_tol * reengage_factor`.
    pub reengage_factor: f64,
    /// Height at which Descend hands over to Land.
    pub z_land: f64,
    pub signal_loss_time: f64,
    /// Duration of one SPD move between sweeps.
    pub spd_leg_time: f64,
}

impl Default for GuidanceParams {
    fn default() -> Self {
        Self {
            equal_tol: 0.01,
            switch_margin: 0.10,
            barrier_ratio: 2.0,
            barrier_window: 10,
            tilt_gain: 0.02,
            min_signal: 3.0,
            settle_samples: 8,
            history_capacity: 256,
            yaw_rate: FRAC_PI_2,
            polar_steps: 7,
            sweep_tilt: FRAC_PI_2 / 3.0,
            approach_speed: 0.3,
            near_speed_max: 0.3,
            near_gain: 7.0,
            barrier_clearance: 0.3,
            correction_speed_max: 0.1,
            balance_tol: 0.0025,
            descend_speed: 0.35,
            reengage_factor: 2.0,
            z_land: 0.05,
            signal_loss_time: 2.0,
            spd_leg_time: 0.5,
        }
    }
}

impl GuidanceParams {
    /// Name of the first invalid field, if any.
    pub fn invalid_field(&self) -> Option<&'static str> {
        let pos = |x: f64| x > 0.0 && x.is_finite();
        let checks: [(&'static str, bool); 22] = [
            ("equal_tol", pos(self.equal_tol) && self.equal_tol < 1.0),
            ("switch_margin", pos(self.switch_margin)),
            (
                "barrier_ratio",
                pos(self.barrier_ratio) && self.barrier_ratio > 1.0,
            ),
            ("barrier_window", self.barrier_window >= 2),
            (
                "tilt_gain",
                self.tilt_gain >= 0.0 && self.tilt_gain.is_finite(),
            ),
            ("min_signal", pos(self.min_signal)),
            ("settle_samples", self.settle_samples >= 1),
            (
                "history_capacity",
                self.history_capacity >= self.barrier_window + 2,
            ),
            ("yaw_rate", pos(self.yaw_rate)),
            ("polar_steps", self.polar_steps >= 5),
            ("sweep_tilt", (0.0..=FRAC_PI_2).contains(&self.sweep_tilt)),
            ("approach_speed", pos(self.approach_speed)),
            ("near_speed_max", pos(self.near_speed_max)),
            ("near_gain", pos(self.near_gain)),
            (
                "barrier_clearance",
                self.barrier_clearance >= 0.0 && self.barrier_clearance.is_finite(),
            ),
            ("correction_speed_max", pos(self.correction_speed_max)),
            ("balance_tol", pos(self.balance_tol)),
            ("descend_speed", pos(self.descend_speed)),
            (
                "reengage_factor",
                self.reengage_factor >= 1.0 && self.reengage_factor.is_finite(),
            ),
            ("z_land", pos(self.z_land)),
            ("signal_loss_time", pos(self.signal_loss_time)),
            ("spd_leg_time", pos(self.spd_leg_time)),
        ];
        checks.iter().find(|(_, ok)| !ok).map(|(name, _)| *name)
    }

    pub fn polar_tilts(&self) -> impl Iterator<Item = f64> {
        let n = self.polar_steps.max(2);
        (0..n).map(move |i| FRAC_PI_2 * i as f64 / (n - 1) as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum FailReason {
    SignalLost,
    Collision,
}

impl fmt::Display for FailReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailReason::SignalLost => "signal lost",
            FailReason::Collision => "collision",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ControllerMode {
    YawSweep,
    PolarSweep,
    Approach,
    NearFieldArPD,
    Descend,
    Landed,
    BarrierStop,
    Failed(FailReason),
}

impl ControllerMode {
    pub fn is_terminal(&self) -> bool {
        matches!(self, ControllerMode::Landed | ControllerMode::Failed(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            ControllerMode::YawSweep => "YawSweep",
            ControllerMode::PolarSweep => "PolarSweep",
            ControllerMode::Approach => "Approach",
            ControllerMode::NearFieldArPD => "NearFieldArPD",
            ControllerMode::Descend => "Descend",
            ControllerMode::Landed => "Landed",
            ControllerMode::BarrierStop => "BarrierStop",
            ControllerMode::Failed(_) => "Failed",
        }
    }
}

impl fmt::Display for ControllerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControllerMode::Failed(r) => write!(f, "Failed({r})"),
            m => f.write_str(m.name()),
        }
    }
}
