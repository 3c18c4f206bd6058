use core::f64::consts::FRAC_PI_2;

use alloc::vec::Vec;

use super::estimate::{
    arpd_direction, array_pull, detect_barrier, equal_intensity_check, polar_sweep_best_tilt,
    relative_imbalance, relative_spread, spd_sweep_direction, switch_check, tilt_schedule,
    IntensityHistory,
};
use super::{ControllerMode, FailReason, GuidanceParams, PdLayout};
use crate::dynamics::{sweep_len, ControlCommand, DroneState};
use crate::lightfield::{wrap_angle, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ControllerKind {
    /// Downward array only: align, then descend.
    ArPd,
    /// One off-center downward PD: repeated yaw sweeps and short moves.
    Spd,
    /// Motorized front PD for the far field, downward array near the station.
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum YawPhase {
    Sweeping,
    Aligning,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState {
    pub kind: ControllerKind,
    pub mode: ControllerMode,
    /// Commanded tilt of the motorized PD.
    pub tilt: f64,
    /// Travel bearing chosen by the last yaw sweep.
    pub heading: f64,
    /// Motorized-PD intensity during the current Approach leg.
    pub history: IntensityHistory,
    pub params: GuidanceParams,
    pub dt: f64,
    /// Why the most recent transition happened.
    pub trigger: &'static str,
    /// Time of the latest NearFieldArPD entry (run start for ArPD).
    pub final_leg_start: Option<f64>,
    settle: usize,
    yaw_phase: YawPhase,
    sweep: Vec<(f64, f64)>,
    sweep_calls: usize,
    polar: Vec<(f64, f64)>,
    // One opening per run: once reoriented, the drone may skirt the LOS
    // boundary and would otherwise re-trigger on every flicker.
    barrier_fired: bool,
    dark_time: f64,
    leg_steps: usize,
    leg_speed: f64,
}

impl ControllerState {
    pub fn new(kind: ControllerKind, params: GuidanceParams, dt: f64) -> Self {
        let mut s = Self {
            kind,
            mode: ControllerMode::YawSweep,
            tilt: 0.0,
            heading: 0.0,
            history: IntensityHistory::new(params.history_capacity),
            params,
            dt,
            trigger: "start",
            final_leg_start: None,
            settle: 0,
            yaw_phase: YawPhase::Sweeping,
            sweep: Vec::new(),
            sweep_calls: 0,
            polar: Vec::new(),
            barrier_fired: false,
            dark_time: 0.0,
            leg_steps: 0,
            leg_speed: 0.0,
        };
        match kind {
            ControllerKind::ArPd => {
                s.mode = ControllerMode::NearFieldArPD;
                s.final_leg_start = Some(0.0);
            }
            ControllerKind::Spd | ControllerKind::Hybrid => s.enter_yaw_sweep("start"),
        }
        s.trigger = "start";
        s
    }

    /// Forces the terminal failure state (used by the runner for collisions).
    pub fn fail(&mut self, reason: FailReason, trigger: &'static str) {
        if !self.mode.is_terminal() {
            self.transition(ControllerMode::Failed(reason), trigger);
        }
    }

    fn transition(&mut self, mode: ControllerMode, trigger: &'static str) {
        self.mode = mode;
        self.trigger = trigger;
    }

    fn enter_yaw_sweep(&mut self, trigger: &'static str) {
        self.transition(ControllerMode::YawSweep, trigger);
        self.tilt = self.params.sweep_tilt;
        self.settle = self.params.settle_samples;
        self.yaw_phase = YawPhase::Sweeping;
        self.sweep.clear();
        self.sweep_calls = 0;
    }

    fn enter_polar_sweep(&mut self) {
        self.transition(ControllerMode::PolarSweep, "aligned to sweep bearing");
        self.polar.clear();
        self.tilt = 0.0;
        self.settle = self.params.settle_samples;
    }

    fn enter_approach(&mut self, trigger: &'static str) {
        self.transition(ControllerMode::Approach, trigger);
        self.history.clear();
        self.settle = self.params.settle_samples;
    }

    fn enter_near_field(&mut self, t: f64, trigger: &'static str) {
        self.transition(ControllerMode::NearFieldArPD, trigger);
        self.final_leg_start = Some(t);
        if self.kind == ControllerKind::Hybrid {
            self.tilt = FRAC_PI_2;
            self.settle = self.params.settle_samples;
        }
    }

    fn sweep_lag(&self) -> f64 {
        (self.params.settle_samples as f64 - 1.0) / 2.0 * self.params.yaw_rate * self.dt
    }

    fn barrier_step(&mut self) -> ControlCommand {
        if self.leg_steps > 0 {
            self.leg_steps -= 1;
            return ControlCommand::toward(
                Vec3::from_bearing(self.heading),
                self.params.approach_speed,
            );
        }
        self.enter_yaw_sweep("reorient");
        ControlCommand::Hover
    }

    fn near_speed(&self, pull: f64) -> f64 {
        (self.params.near_gain * pull).min(self.params.near_speed_max)
    }

    fn lit_count(&self, readings: &[f64]) -> usize {
        readings
            .iter()
            .filter(|&&r| r >= self.params.min_signal)
            .count()
    }
}

/// Pure form of [`guidance_step`] for the hybrid controller.
pub fn hybrid_step(
    ctrl: &ControllerState,
    readings: &[f64],
    drone: &DroneState,
    layout: &PdLayout,
) -> (ControllerState, ControlCommand) {
    let mut next = ctrl.clone();
    let cmd = guidance_step(&mut next, readings, drone, layout);
    (next, cmd)
}

/// Advances any controller kind by one sample of filtered readings (one per
/// layout mount, in layout order) and returns the command for this step.
pub fn guidance_step(
    ctrl: &mut ControllerState,
    readings: &[f64],
    drone: &DroneState,
    layout: &PdLayout,
) -> ControlCommand {
    assert_eq!(readings.len(), layout.len(), "one reading per mount");
    if ctrl.mode.is_terminal() {
        return ControlCommand::Hover;
    }
    let p = ctrl.params;
    if readings.iter().all(|&r| r < p.min_signal) {
        ctrl.dark_time += ctrl.dt;
    } else {
        ctrl.dark_time = 0.0;
    }
    let sweeping = matches!(
        ctrl.mode,
        ControllerMode::YawSweep | ControllerMode::PolarSweep
    );
    if !sweeping && ctrl.dark_time >= p.signal_loss_time - 1e-9 {
        ctrl.fail(FailReason::SignalLost, "no signal");
        return ControlCommand::Hover;
    }
    if ctrl.settle > 1 {
        ctrl.settle -= 1;
        return ControlCommand::Hover;
    }
    ctrl.settle = 0;

    let motor = layout.motorized_index();
    match ctrl.mode {
        ControllerMode::YawSweep => yaw_sweep_step(ctrl, readings, drone, layout),
        ControllerMode::PolarSweep => {
            let m = motor.unwrap_or(0);
            ctrl.polar.push((ctrl.tilt, readings[m]));
            let tilts: Vec<f64> = p.polar_tilts().collect();
            if ctrl.polar.len() < tilts.len() {
                ctrl.tilt = tilts[ctrl.polar.len()];
                ctrl.settle = p.settle_samples;
                return ControlCommand::Hover;
            }
            match polar_sweep_best_tilt(&ctrl.polar, p.min_signal) {
                Ok(t) => {
                    ctrl.tilt = t;
                    ctrl.enter_approach("tilt chosen");
                }
                Err(_) => ctrl.fail(FailReason::SignalLost, "flat polar sweep"),
            }
            ControlCommand::Hover
        }
        ControllerMode::Approach if ctrl.kind == ControllerKind::Spd => {
            if ctrl.leg_steps == 0 {
                ctrl.enter_yaw_sweep("leg complete");
                return ControlCommand::Hover;
            }
            ctrl.leg_steps -= 1;
            ControlCommand::toward(Vec3::from_bearing(ctrl.heading), ctrl.leg_speed)
        }
        ControllerMode::Approach => {
            let m = motor.unwrap_or(0);
            let down = downward_pair(readings, m);
            if switch_check(readings[m], down, &p) {
                ctrl.enter_near_field(drone.time, "downward exceeds motorized");
                return ControlCommand::Hover;
            }
            ctrl.history.push(drone.time, readings[m]);
            if !ctrl.barrier_fired && detect_barrier(&ctrl.history, &p) {
                ctrl.barrier_fired = true;
                ctrl.transition(ControllerMode::BarrierStop, "intensity jump");
                ctrl.leg_steps =
                    libm::ceil(p.barrier_clearance / (p.approach_speed * ctrl.dt) - 1e-9) as usize;
            }
            if ctrl.mode == ControllerMode::BarrierStop {
                return ctrl.barrier_step();
            }
            ctrl.tilt = tilt_schedule(ctrl.tilt, &ctrl.history, &p);
            ControlCommand::toward(Vec3::from_bearing(ctrl.heading), p.approach_speed)
        }
        ControllerMode::BarrierStop => ctrl.barrier_step(),
        ControllerMode::NearFieldArPD => {
            if ctrl.lit_count(readings) < 2 {
                return ControlCommand::Hover;
            }
            // The motorized PD has a narrower view when pointed down; until it
            // picks the station up, keep flying the approach heading.
            if let Some(m) = motor.filter(|_| ctrl.kind == ControllerKind::Hybrid) {
                if readings[m] < p.min_signal {
                    return ControlCommand::toward(
                        Vec3::from_bearing(ctrl.heading),
                        p.near_speed_max,
                    );
                }
            }
            let dir = arpd_direction(readings, layout, drone.yaw, p.min_signal)
                .ok()
                .flatten();
            let imbalance = relative_imbalance(readings, layout);
            match dir {
                None => {
                    ctrl.transition(ControllerMode::Descend, "balanced array");
                    ControlCommand::Descend(p.descend_speed)
                }
                Some(_) if equal_intensity_check(readings, &p) => {
                    ctrl.transition(ControllerMode::Descend, "equal intensity");
                    ControlCommand::Descend(p.descend_speed)
                }
                Some(_) if imbalance <= p.balance_tol => {
                    ctrl.transition(ControllerMode::Descend, "balanced array");
                    ControlCommand::Descend(p.descend_speed)
                }
                Some(d) => ControlCommand::toward(d, ctrl.near_speed(array_pull(readings, layout))),
            }
        }
        ControllerMode::Descend => {
            if drone.position.z <= p.z_land {
                ctrl.transition(ControllerMode::Landed, "touchdown");
                return ControlCommand::Land;
            }
            if ctrl.kind != ControllerKind::Spd && ctrl.lit_count(readings) >= 2 {
                let imbalance = relative_imbalance(readings, layout);
                if imbalance > p.balance_tol * p.reengage_factor {
                    if let Ok(Some(d)) = arpd_direction(readings, layout, drone.yaw, p.min_signal) {
                        return ControlCommand::toward(
                            d,
                            ctrl.near_speed(array_pull(readings, layout))
                                .min(p.correction_speed_max),
                        );
                    }
                }
            }
            ControlCommand::Descend(p.descend_speed)
        }
        ControllerMode::Landed | ControllerMode::Failed(_) => ControlCommand::Hover,
    }
}

fn downward_pair(readings: &[f64], motor: usize) -> [f64; 2] {
    let mut it = readings
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != motor)
        .map(|(_, &r)| r);
    let a = it.next().unwrap_or(0.0);
    let b = it.next().unwrap_or(a);
    [a, b]
}

fn yaw_sweep_step(
    ctrl: &mut ControllerState,
    readings: &[f64],
    drone: &DroneState,
    layout: &PdLayout,
) -> ControlCommand {
    let p = ctrl.params;
    if ctrl.yaw_phase == YawPhase::Aligning {
        let diff = wrap_angle(ctrl.heading - drone.yaw);
        let step = p.yaw_rate * ctrl.dt;
        if diff.abs() <= 0.5 * step + 1e-9 {
            ctrl.enter_polar_sweep();
            return ControlCommand::Hover;
        }
        let rate = (diff.abs() / ctrl.dt).min(p.yaw_rate);
        return ControlCommand::YawRate(if diff > 0.0 { rate } else { -rate });
    }

    let sensor = layout.motorized_index().unwrap_or(0);
    if ctrl.kind == ControllerKind::Hybrid && ctrl.sweep_calls == 0 {
        let down = downward_pair(readings, sensor);
        if switch_check(readings[sensor], down, &p) {
            ctrl.enter_near_field(drone.time, "downward exceeds motorized");
            return ControlCommand::Hover;
        }
    }
    let n = sweep_len(p.yaw_rate, ctrl.dt);
    let first = p.settle_samples.saturating_sub(1);
    if ctrl.sweep_calls >= first {
        let key = drone.yaw + layout.mounts[sensor].azimuth - ctrl.sweep_lag();
        ctrl.sweep.push((key, readings[sensor]));
    }
    ctrl.sweep_calls += 1;
    if ctrl.sweep.len() < n {
        return ControlCommand::YawRate(p.yaw_rate);
    }

    let bearing = match spd_sweep_direction(&ctrl.sweep, p.min_signal) {
        Ok(b) => b,
        Err(_) => {
            ctrl.fail(FailReason::SignalLost, "flat yaw sweep");
            return ControlCommand::Hover;
        }
    };
    ctrl.heading = wrap_angle(bearing);
    match ctrl.kind {
        ControllerKind::Spd => {
            let values: Vec<f64> = ctrl.sweep.iter().map(|s| s.1).collect();
            let spread = relative_spread(&values);
            if spread <= p.equal_tol {
                ctrl.transition(ControllerMode::Descend, "flat near-field sweep");
                ControlCommand::Descend(p.descend_speed)
            } else {
                ctrl.transition(ControllerMode::Approach, "sweep complete");
                ctrl.leg_steps = libm::ceil(p.spd_leg_time / ctrl.dt) as usize;
                ctrl.leg_speed = ctrl.near_speed(spread);
                ControlCommand::Hover
            }
        }
        _ => {
            ctrl.yaw_phase = YawPhase::Aligning;
            ControlCommand::Hover
        }
    }
}
