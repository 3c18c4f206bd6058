use std::f64::consts::TAU;

use irland_core::dynamics::{ActuationNoise, ControlCommand, DroneState};
use irland_core::guidance::*;
use irland_core::lightfield::*;
use irland_core::scenario::{
    calibrated_response, calibrated_source, run_scenario, Outcome, ScenarioConfig,
};
use irland_core::sensing::{pd_signal, Pose};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bulb_env() -> Environment {
    Environment::open(Emitter::Bulb(calibrated_source()))
}

/// Independent argmax: integer 3-tap sums, ties to the larger raw reading,
/// then to the smaller angle.
fn sweep_oracle(samples: &[(f64, u32)]) -> f64 {
    let mut s: Vec<(f64, u32)> = samples
        .iter()
        .map(|&(a, v)| (a.rem_euclid(TAU), v))
        .collect();
    s.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = s.len();
    let key = |i: usize| {
        (
            s[(i + n - 1) % n].1 as u64 + s[i].1 as u64 + s[(i + 1) % n].1 as u64,
            s[i].1,
        )
    };
    let mut best = 0;
    for i in 1..n {
        if key(i) > key(best) {
            best = i;
        }
    }
    s[best].0
}

fn noise_free(mut cfg: ScenarioConfig) -> ScenarioConfig {
    cfg.noise = ActuationNoise::NONE;
    cfg.layout
        .responses
        .iter_mut()
        .for_each(|r| r.noise_sigma = 0.0);
    cfg
}

#[test]
fn arpd_points_toward_source_over_random_poses() {
    let env = bulb_env();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    for n in [2usize, 3, 4, 6, 8, 16] {
        let layout = PdLayout::arpd(n, DEFAULT_ARRAY_RADIUS, calibrated_response());
        let counts = layout.responses[0].counts_per_au();
        for _ in 0..1000 / 6 + 1 {
            let z = rng.random_range(0.5..2.0);
            // Beyond ~0.9 z the source leaves the 45° field of view.
            let rho = rng.random_range(2.0 * DEFAULT_ARRAY_RADIUS..0.9 * z);
            let phi = rng.random_range(0.0..TAU);
            let pose = Pose {
                position: Vec3::new(rho * phi.cos(), rho * phi.sin(), z),
                yaw: rng.random_range(-3.0..3.0),
            };
            let readings: Vec<f64> = layout
                .mounts
                .iter()
                .map(|m| counts * pd_signal(m, &layout.responses[0], &pose, &env))
                .collect();
            let dir = arpd_direction(&readings, &layout, pose.yaw, 0.0).unwrap();
            let to_source = (-pose.position).horizontal().normalized();
            if let Some(d) = dir {
                assert!(d.dot(to_source) > 0.0, "n={n} pose={pose:?} dir={d:?}");
                checked += 1;
            } else {
                // A two-PD array is blind along its perpendicular.
                assert_eq!(n, 2, "balanced reading off-axis at {pose:?}");
            }
        }
    }
    assert!(checked >= 950, "{checked}");
}

#[test]
fn terminal_modes_are_absorbing() {
    let params = GuidanceParams::default();
    let layout = PdLayout::arpd(3, DEFAULT_ARRAY_RADIUS, calibrated_response());
    let mut ctrl = ControllerState::new(ControllerKind::ArPd, params, 0.02);
    let ground = DroneState::new(Vec3::new(0.0, 0.0, 0.0), 0.0);
    let even = [5000.0; 3];
    guidance_step(&mut ctrl, &even, &ground, &layout);
    assert_eq!(ctrl.mode, ControllerMode::Descend);
    guidance_step(&mut ctrl, &even, &ground, &layout);
    assert_eq!(ctrl.mode, ControllerMode::Landed);

    let mut failed = ControllerState::new(ControllerKind::Hybrid, params, 0.02);
    failed.fail(FailReason::SignalLost, "test");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..2000 {
        let r: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..60_000.0)).collect();
        let drone = DroneState::new(
            Vec3::new(rng.random_range(-3.0..3.0), 0.0, rng.random_range(0.0..2.0)),
            0.0,
        );
        for c in [&mut ctrl, &mut failed] {
            let before = c.mode;
            assert_eq!(guidance_step(c, &r, &drone, &layout), ControlCommand::Hover);
            assert_eq!(c.mode, before);
        }
    }
}

#[test]
fn hybrid_step_is_pure() {
    let layout = ScenarioConfig::new(bulb_env(), ControllerKind::Hybrid, Vec3::Z).layout;
    let ctrl = ControllerState::new(ControllerKind::Hybrid, GuidanceParams::default(), 0.02);
    let drone = DroneState::new(Vec3::new(1.0, 0.0, 1.0), 0.0);
    let a = hybrid_step(&ctrl, &[100.0, 50.0, 50.0], &drone, &layout);
    let b = hybrid_step(&ctrl, &[100.0, 50.0, 50.0], &drone, &layout);
    assert_eq!(a, b);
    assert_eq!(
        ctrl,
        ControllerState::new(ControllerKind::Hybrid, GuidanceParams::default(), 0.02)
    );
}

#[test]
fn no_barrier_on_noise_free_los_approaches() {
    for (x, y) in [(3.0, 0.0), (0.0, -2.5), (-2.0, 1.5), (1.5, 1.5)] {
        let cfg = noise_free(ScenarioConfig::new(
            bulb_env(),
            ControllerKind::Hybrid,
            Vec3::new(x, y, 1.0),
        ));
        let r = run_scenario(&cfg).unwrap();
        assert_eq!(r.count_mode(ControllerMode::BarrierStop), 0, "({x}, {y})");
        assert_eq!(r.outcome, Outcome::Landed, "({x}, {y})");
    }
}

#[test]
fn detect_barrier_ignores_polynomial_growth() {
    let params = GuidanceParams::default();
    let mut h = IntensityHistory::new(params.history_capacity);
    // Intensity ~ 1/d^2 while closing from 4 m to 0.5 m at 0.5 m/s.
    for k in 0..350 {
        let t = k as f64 * 0.02;
        let d = 4.0 - 0.5 * t;
        h.push(t, 1000.0 / (d * d));
        assert!(!detect_barrier(&h, &params), "fired at d={d}");
    }
    h.push(7.0, 1000.0 / 0.25 * 4.0);
    assert!(detect_barrier(&h, &params));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn sweep_direction_matches_oracle(
        values in prop::collection::vec(0u32..8, 48..120),
        offset in 0.0..TAU,
        jitter in prop::collection::vec(-0.15..0.15f64, 120),
    ) {
        let n = values.len();
        let step = TAU / n as f64;
        let samples: Vec<(f64, u32)> = values.iter().enumerate().map(|(i, &v)| (offset + (i as f64 + jitter[i]) * step, v)).collect();
        let as_f64: Vec<(f64, f64)> = samples.iter().map(|&(a, v)| (a, v as f64)).collect();
        let (lo, hi) = (values.iter().min().unwrap(), values.iter().max().unwrap());
        match spd_sweep_direction(&as_f64, 1.0) {
            Ok(b) => prop_assert_eq!(b, sweep_oracle(&samples)),
            Err(e) => prop_assert!(hi - lo < 1, "{:?}", e),
        }
    }

    #[test]
    fn symmetric_arrays_cancel(n in 2usize..=16, r in 1.0..60_000.0f64, yaw in -3.0..3.0f64) {
        let layout = PdLayout::arpd(n, DEFAULT_ARRAY_RADIUS, calibrated_response());
        let readings = vec![r; n];
        prop_assert_eq!(arpd_direction(&readings, &layout, yaw, 1e-6 * r).unwrap(), None);
        prop_assert!(relative_imbalance(&readings, &layout) < 1e-12);
    }

    #[test]
    fn arpd_direction_scale_invariant(
        readings in prop::collection::vec(0.0..50_000.0f64, 3..=16),
        k in 0.01..100.0f64,
        min_signal in 0.0..500.0f64,
        yaw in -3.0..3.0f64,
    ) {
        let layout = PdLayout::arpd(readings.len(), DEFAULT_ARRAY_RADIUS, calibrated_response());
        let scaled: Vec<f64> = readings.iter().map(|r| r * k).collect();
        let a = arpd_direction(&readings, &layout, yaw, min_signal).unwrap();
        let b = arpd_direction(&scaled, &layout, yaw, min_signal * k).unwrap();
        match (a, b) {
            (Some(a), Some(b)) => prop_assert!((a - b).norm() < 1e-9),
            (None, None) => {}
            // The threshold comparison may flip only at the boundary itself.
            _ => {
                let v = readings.iter().zip(&layout.mounts).fold(Vec3::ZERO, |acc, (r, m)| acc + m.offset.horizontal().normalized() * *r);
                prop_assert!((v.norm() - min_signal).abs() <= 1e-9 * min_signal.max(1.0));
            }
        }
    }
}
