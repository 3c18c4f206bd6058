use irland_core::dynamics::ActuationNoise;
use irland_core::guidance::{ControllerKind, ControllerMode, FailReason};
use irland_core::lightfield::*;
use irland_core::scenario::*;

fn bulb_env() -> Environment {
    Environment::open(Emitter::Bulb(calibrated_source()))
}

fn hybrid(start: Vec3, seed: u64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(bulb_env(), ControllerKind::Hybrid, start);
    cfg.seed = seed;
    cfg
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (
        m,
        (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)).sqrt(),
    )
}

#[test]
fn on_axis_start_descends_straight() {
    let mut cfg = ScenarioConfig::new(bulb_env(), ControllerKind::ArPd, Vec3::new(0.0, 0.0, 1.0));
    cfg.noise = ActuationNoise::NONE;
    cfg.layout
        .responses
        .iter_mut()
        .for_each(|r| r.noise_sigma = 0.0);
    let r = run_scenario(&cfg).unwrap();
    assert_eq!(r.outcome, Outcome::Landed);
    assert!(r.landing_offset.unwrap() < 0.02);
    assert_eq!(
        r.mode_sequence(),
        [
            ControllerMode::NearFieldArPD,
            ControllerMode::Descend,
            ControllerMode::Landed
        ]
    );

    let r = run_scenario(&hybrid(Vec3::new(0.0, 0.0, 1.0), 0)).unwrap();
    assert_eq!(r.outcome, Outcome::Landed);
    assert!(r.landing_offset.unwrap() < 0.02);
    assert_eq!(
        r.mode_sequence(),
        [
            ControllerMode::YawSweep,
            ControllerMode::NearFieldArPD,
            ControllerMode::Descend,
            ControllerMode::Landed
        ]
    );
}

#[test]
fn runs_are_bitwise_deterministic() {
    let cfg = hybrid(Vec3::new(2.0, 1.0, 1.0), 42);
    assert_eq!(run_scenario(&cfg).unwrap(), run_scenario(&cfg).unwrap());
    let other = run_scenario(&hybrid(Vec3::new(2.0, 1.0, 1.0), 43)).unwrap();
    assert_ne!(run_scenario(&cfg).unwrap().trajectory, other.trajectory);
}

#[test]
fn sweep_is_order_independent() {
    let cfg = ScenarioConfig::new(bulb_env(), ControllerKind::ArPd, Vec3::new(0.2, 0.2, 1.0));
    let grid = StartGrid {
        x: [0.1, 0.4],
        y: [-0.3, 0.3],
        nx: 3,
        ny: 2,
        z: 1.0,
    };
    let a = sweep_start_grid(&cfg, &grid).unwrap();
    assert_eq!(a.cells.len(), 6);
    assert_eq!(a, sweep_start_grid(&cfg, &grid).unwrap());
    let mut reversed: Vec<CellResult> = (0..grid.len())
        .rev()
        .map(|i| run_cell(&cfg, &grid, i))
        .collect();
    reversed.reverse();
    assert_eq!(reversed, a.cells);
    assert_eq!(summarize(&reversed), a.stats);

    let small = StartGrid {
        nx: 2,
        ny: 2,
        ..grid
    };
    assert_eq!(sweep_start_grid(&cfg, &small).unwrap().cells.len(), 4);
    assert!(sweep_start_grid(&cfg, &StartGrid { nx: 1, ..grid }).is_err());
}

#[test]
fn los_start_lands_with_expected_mode_sequence() {
    use ControllerMode::*;
    let mut landed = 0;
    for seed in 0..10 {
        let r = run_scenario(&hybrid(Vec3::new(3.0, 0.0, 1.0), seed)).unwrap();
        if r.outcome == Outcome::Landed && r.landing_offset.unwrap() < 0.15 {
            landed += 1;
        }
        assert_eq!(
            r.mode_sequence(),
            [
                YawSweep,
                PolarSweep,
                Approach,
                NearFieldArPD,
                Descend,
                Landed
            ],
            "seed {seed}"
        );
        let switch = r.mode_log.iter().find(|m| m.to == NearFieldArPD).unwrap();
        let radius = switch.position.horizontal().norm();
        assert!(
            (radius - 0.9).abs() <= 0.3,
            "seed {seed}: switched at {radius}"
        );
    }
    assert!(landed >= 9, "{landed}/10");
}

#[test]
fn fully_hidden_start_loses_signal() {
    let re = reference_environment("env3").unwrap();
    let r = run_scenario(&ScenarioConfig::new(
        re.environment,
        ControllerKind::Hybrid,
        re.start,
    ))
    .unwrap();
    assert_eq!(r.outcome, Outcome::Failed(FailReason::SignalLost));
}

#[test]
fn door_run_stops_once_at_the_opening() {
    let re = reference_environment("env4").unwrap();
    let src = calibrated_source().position;
    for seed in 0..3 {
        let mut cfg = ScenarioConfig::new(re.environment.clone(), ControllerKind::Hybrid, re.start);
        cfg.seed = seed;
        let r = run_scenario(&cfg).unwrap();
        assert_eq!(r.outcome, Outcome::Landed, "seed {seed}");
        let stops: Vec<_> = r
            .mode_log
            .iter()
            .filter(|m| m.to == ControllerMode::BarrierStop)
            .collect();
        assert_eq!(stops.len(), 1, "seed {seed}");
        let transition = r
            .trajectory
            .windows(2)
            .find(|w| {
                !re.environment.los_visible(w[0].position, src)
                    && re.environment.los_visible(w[1].position, src)
            })
            .map(|w| w[1].position)
            .expect("path crosses into view");
        let d = (stops[0].position - transition).horizontal().norm();
        assert!(d <= 0.3, "seed {seed}: stop {d} m from the transition");
    }
}

#[test]
fn success_rate_falls_with_sensor_noise() {
    let rate = |sigma: f64| {
        (0..10)
            .filter(|&seed| {
                let mut cfg = hybrid(Vec3::new(3.0, 0.0, 1.0), seed);
                cfg.layout
                    .responses
                    .iter_mut()
                    .for_each(|r| r.noise_sigma = sigma);
                run_scenario(&cfg).unwrap().outcome == Outcome::Landed
            })
            .count()
    };
    let rates = [rate(1e-4), rate(3e-2), rate(1e-1)];
    assert!(rates.windows(2).all(|w| w[1] <= w[0]), "{rates:?}");
    assert!(rates[0] > rates[2], "{rates:?}");
}

#[test]
fn offsets_are_rotation_invariant() {
    let offsets = |angle: f64| -> Vec<f64> {
        (0..10)
            .map(|seed| {
                let start = Vec3::new(3.0 * angle.cos(), 3.0 * angle.sin(), 1.0);
                run_scenario(&hybrid(start, seed))
                    .unwrap()
                    .landing_offset
                    .expect("landed")
            })
            .collect()
    };
    let (m0, s0) = mean_std(&offsets(0.0));
    for angle in [1.0, 2.5, 4.0] {
        let (m, s) = mean_std(&offsets(angle));
        let se = ((s0 * s0 + s * s) / 10.0).sqrt();
        assert!(
            (m - m0).abs() <= 3.0 * se + 0.002,
            "angle {angle}: {m} vs {m0}"
        );
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let mut cfg = hybrid(Vec3::new(1.0, 0.0, 1.0), 0);
    cfg.dt = -0.02;
    assert_eq!(run_scenario(&cfg).unwrap_err().field, "dt");
    let mut cfg = hybrid(Vec3::new(1.0, 0.0, 0.0), 0);
    assert_eq!(run_scenario(&cfg).unwrap_err().field, "start");
    cfg.start.z = 1.0;
    cfg.filter_window = 0;
    assert_eq!(run_scenario(&cfg).unwrap_err().field, "filter_window");
}

#[test]
fn timeout_is_reported() {
    let mut cfg = hybrid(Vec3::new(3.0, 0.0, 1.0), 0);
    cfg.max_time = 2.0;
    let r = run_scenario(&cfg).unwrap();
    assert_eq!(r.outcome, Outcome::Timeout);
    assert!(r.landing_offset.is_none());
    assert!(r.elapsed <= 2.0 + 1e-9);
}
