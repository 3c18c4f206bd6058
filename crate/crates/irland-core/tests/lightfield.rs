use std::f64::consts::PI;

use irland_core::lightfield::*;
use irland_core::scenario::{
    grid_environment, reference_environment, synthetic_field, SyntheticField,
};
use proptest::prelude::*;

fn bulb(m: f64) -> LightSource {
    LightSource::bulb(Vec3::ZERO, 1.0, m).unwrap()
}

fn open(m: f64) -> Environment {
    Environment::open(Emitter::Bulb(bulb(m)))
}

#[test]
fn direct_examples() {
    let env = open(1.0);
    assert_eq!(
        env.direct_irradiance(Vec3::new(0.0, 0.0, 1.0)).unwrap(),
        1.0
    );
    assert_eq!(
        env.direct_irradiance(Vec3::new(0.0, 0.0, -1.0)).unwrap(),
        0.0
    );
    let v = env.direct_irradiance(Vec3::new(1.0, 0.0, 1.0)).unwrap();
    assert!((v - (PI / 4.0).cos() / 2.0).abs() < 1e-12);
    assert_eq!(env.direct_irradiance(Vec3::ZERO), Err(FieldError::AtSource));
}

#[test]
fn total_is_additive() {
    let env = open(1.0).with_ambient(0.1).unwrap();
    assert!((env.total_irradiance(Vec3::new(0.0, 0.0, 1.0)) - 1.1).abs() < 1e-12);
}

#[test]
fn wall_with_opening() {
    let wall = Surface::wall(-1.0, 1.0, 1.0, 1.0, 0.0, 2.0, 0.0).unwrap();
    let (a, b) = (Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 2.0, 1.0));
    assert!(open(1.0).los_visible(a, b));
    let env = Environment::new(Emitter::Bulb(bulb(1.0)), vec![wall], 0.0).unwrap();
    assert!(!env.los_visible(a, b));
    let panels = vec![
        Surface::wall(-1.0, 1.0, -0.2, 1.0, 0.0, 2.0, 0.0).unwrap(),
        Surface::wall(0.2, 1.0, 1.0, 1.0, 0.0, 2.0, 0.0).unwrap(),
    ];
    let env = Environment::new(Emitter::Bulb(bulb(1.0)), panels, 0.0).unwrap();
    assert!(env.los_visible(a, b));
}

#[test]
fn occluded_point_sees_bounce_and_ambient_only() {
    let walls = vec![
        Surface::wall(-1.0, 1.0, 1.0, 1.0, 0.0, 2.0, 0.8).unwrap(),
        Surface::wall(-2.0, -1.0, 2.0, -1.0, 0.0, 2.0, 0.8).unwrap(),
    ];
    let env = Environment::new(Emitter::Bulb(bulb(1.0)), walls, 0.05).unwrap();
    let p = Vec3::new(0.0, 1.5, 0.5);
    assert_eq!(env.direct_irradiance(p).unwrap(), 0.0);
    assert!((env.total_irradiance(p) - (0.05 + env.bounce_irradiance(p))).abs() < 1e-15);
}

#[test]
fn bounce_is_zero_without_reflectance() {
    let p = Vec3::new(0.3, 0.2, 0.8);
    assert_eq!(open(1.0).bounce_irradiance(p), 0.0);
    let wall = Surface::wall(-0.5, 1.0, 0.5, 1.0, 0.2, 1.2, 0.0).unwrap();
    let env = Environment::new(Emitter::Bulb(bulb(1.0)), vec![wall], 0.0).unwrap();
    assert_eq!(env.bounce_irradiance(p), 0.0);
}

/// Single-bounce quadrature over an `n`×`n` split of a 1 m × 1 m wall at
/// y = 1 (x in [-0.5, 0.5], z in [0.2, 1.2]) facing the bulb at the origin.
fn fine_bounce(rho: f64, p: Vec3, n: usize) -> f64 {
    let src = bulb(1.0);
    let area = 1.0 / (n * n) as f64;
    let normal = Vec3::new(0.0, -1.0, 0.0);
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let c = Vec3::new(
                -0.5 + (i as f64 + 0.5) / n as f64,
                1.0,
                0.2 + (j as f64 + 0.5) / n as f64,
            );
            let to_src = src.position - c;
            let cos_in = normal.dot(to_src) / to_src.norm();
            let e = src.irradiance_at(c).unwrap() * cos_in;
            let w = p - c;
            let cos_out = normal.dot(w) / w.norm();
            if cos_out > 0.0 {
                total += rho * e / PI * cos_out * area / w.norm_squared();
            }
        }
    }
    total
}

#[test]
fn bounce_matches_fine_quadrature() {
    let wall = Surface::wall(-0.5, 1.0, 0.5, 1.0, 0.2, 1.2, 0.7).unwrap();
    let env = Environment::new(Emitter::Bulb(bulb(1.0)), vec![wall], 0.0).unwrap();
    for p in [
        Vec3::new(0.0, 0.3, 0.7),
        Vec3::new(0.4, 0.0, 1.0),
        Vec3::new(-0.6, 0.5, 0.4),
    ] {
        let oracle = fine_bounce(0.7, p, 120);
        let got = env.bounce_irradiance(p);
        assert!(
            ((got - oracle) / oracle).abs() < 0.02,
            "{p:?}: {got} vs {oracle}"
        );
    }
}

#[test]
fn halving_patch_edge_changes_bounce_under_one_percent() {
    let re = reference_environment("env5").unwrap();
    let env = &re.environment;
    let build = |edge: f64| {
        Environment::with_patch_edge(env.source().clone(), env.surfaces().to_vec(), 0.0, edge)
            .unwrap()
    };
    let (coarse, fine) = (build(0.05), build(0.025));
    for p in [
        Vec3::new(2.3, 4.0, 1.0),
        Vec3::new(1.7, 2.0, 1.0),
        Vec3::new(0.0, 0.0, 1.0),
    ] {
        let (a, b) = (coarse.bounce_irradiance(p), fine.bounce_irradiance(p));
        assert!(((a - b) / b).abs() < 0.01, "{p:?}: {a} vs {b}");
    }
}

#[test]
fn env4_path_jumps_at_los_transition() {
    let re = reference_environment("env4").unwrap();
    let env = &re.environment;
    let src = env.source_position();
    let pts: Vec<Vec3> = (0..=250)
        .map(|i| Vec3::new(2.5 - 0.01 * i as f64, 2.0, 1.0))
        .collect();
    let k = pts
        .windows(2)
        .position(|w| !env.los_visible(w[0], src) && env.los_visible(w[1], src))
        .expect("path crosses into LOS")
        + 1;
    let ratio = env.total_irradiance(pts[k]) / env.total_irradiance(pts[k - 1]);
    assert!(ratio >= 2.0, "ratio {ratio}");
    for w in pts[..k].windows(2) {
        let r = env.total_irradiance(w[1]) / env.total_irradiance(w[0]);
        assert!(r < 2.0);
    }
}

#[test]
fn gradient_vanishes_on_axis() {
    let env = open(0.0);
    let g = env.field_gradient(Vec3::new(0.0, 0.0, 1.3));
    assert!(g.x.abs() < 1e-6 && g.y.abs() < 1e-6);
}

#[test]
fn imported_bulb_decays_along_x() {
    let env = grid_environment(synthetic_field(SyntheticField::Bulb, 0.05));
    for i in 0..12 {
        let x = 0.1 + 0.1 * i as f64;
        for z in [0.4, 0.8, 1.2] {
            assert!(
                env.field_gradient(Vec3::new(x, 0.0, z)).x < 0.0,
                "x={x} z={z}"
            );
        }
    }
}

#[test]
fn fit_rejects_bimodal_field() {
    let bulb_fit = fit_bulb_model(&synthetic_field(SyntheticField::Bulb, 0.1)).unwrap();
    let bimodal = match fit_bulb_model(&synthetic_field(SyntheticField::Bimodal, 0.1)) {
        Ok(f) => f,
        Err(FitError::NotConverged { best }) => best,
        Err(e) => panic!("{e}"),
    };
    assert!(bimodal.rms_relative_residual >= 5.0 * bulb_fit.rms_relative_residual);
}

fn symbolic_gradient(src: &LightSource, p: Vec3) -> Vec3 {
    let v = p - src.position;
    let d = v.norm();
    let av = src.axis.dot(v);
    let m = src.lambert_exponent;
    src.axis * (src.power * m * av.powf(m - 1.0) / d.powf(m + 2.0))
        - v * (src.power * (m + 2.0) * av.powf(m) / d.powf(m + 4.0))
}

fn wall_strategy() -> impl Strategy<Value = Surface> {
    (
        -2.0..2.0f64,
        -2.0..2.0f64,
        0.3..2.0f64,
        0.0..PI,
        0.5..2.0f64,
    )
        .prop_map(|(x, y, len, ang, h)| {
            Surface::wall(x, y, x + len * ang.cos(), y + len * ang.sin(), 0.0, h, 0.5).unwrap()
        })
}

fn point() -> impl Strategy<Value = Vec3> {
    (-3.0..3.0f64, -3.0..3.0f64, 0.05..2.5f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn gradient_matches_symbolic(x in -2.0..2.0f64, y in -2.0..2.0f64, z in 0.3..2.5f64, tilt in 0.0..0.4f64, m in 0.0..3.0f64) {
        let axis = Vec3::new(tilt.sin(), 0.0, tilt.cos());
        let src = LightSource::new(Vec3::ZERO, axis, 1.5, m).unwrap();
        let p = Vec3::new(x, y, z);
        prop_assume!(axis.dot(p) / p.norm() > 0.2);
        let env = Environment::open(Emitter::Bulb(src));
        let g = env.field_gradient(p);
        let s = symbolic_gradient(&src, p);
        prop_assert!((g - s).norm() <= 1e-4 * s.norm(), "{g:?} vs {s:?}");
    }

    #[test]
    fn los_is_symmetric(walls in prop::collection::vec(wall_strategy(), 1..4), a in point(), b in point()) {
        let env = Environment::new(Emitter::Bulb(LightSource::bulb(Vec3::new(0.0, 0.0, 3.0), 1.0, 1.0).unwrap()), walls, 0.0).unwrap();
        prop_assert_eq!(env.los_visible(a, b), env.los_visible(b, a));
    }

    #[test]
    fn direct_nonincreasing_along_rays(az in 0.0..2.0 * PI, el in 0.05..(PI / 2.0), d1 in 0.1..5.0f64, extra in 0.0..5.0f64, m in 0.0..3.0f64) {
        let env = open(m);
        let dir = Vec3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin());
        let near = env.direct_irradiance(dir * d1).unwrap();
        let far = env.direct_irradiance(dir * (d1 + extra)).unwrap();
        prop_assert!(far <= near);
    }

    #[test]
    fn horizontal_maximum_is_on_axis(z in 0.2..2.0f64, m in 0.0..3.0f64) {
        let env = open(m);
        let mut best = (Vec3::ZERO, f64::MIN);
        for i in -20..=20 {
            for j in -20..=20 {
                let p = Vec3::new(0.1 * i as f64, 0.1 * j as f64, z);
                let v = env.total_irradiance(p);
                if v > best.1 {
                    best = (p, v);
                }
            }
        }
        prop_assert!(best.0.horizontal().norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bounce_monotone_in_reflectance(r1 in 0.0..1.0f64, r2 in 0.0..1.0f64, p in (-1.0..1.0f64, -0.5..0.8f64, 0.2..1.5f64)) {
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let p = Vec3::new(p.0, p.1, p.2);
        let make = |rho: f64| {
            let wall = Surface::wall(-1.0, 1.0, 1.0, 1.0, 0.0, 1.5, rho).unwrap();
            Environment::with_patch_edge(Emitter::Bulb(bulb(1.0)), vec![wall], 0.0, 0.1).unwrap()
        };
        prop_assert!(make(lo).bounce_irradiance(p) <= make(hi).bounce_irradiance(p));
        prop_assert!(make(0.0).bounce_irradiance(p) == 0.0);
    }
}
