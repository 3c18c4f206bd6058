use core::f64::consts::{FRAC_PI_3, FRAC_PI_4};

use alloc::vec;
use alloc::vec::Vec;

use crate::dynamics::ActuationNoise;
use crate::guidance::{GuidanceParams, PdLayout};
use crate::lightfield::{Emitter, Environment, LightSource, MeasuredFieldGrid, Surface, Vec3};
use crate::sensing::PdResponse;

/// Final-leg duration (s) the calibrated hybrid aims for from (3, 0, 1).
pub const FINAL_LEG_TARGET: f64 = 7.1;

const WALL_HEIGHT: f64 = 2.0;
const WALL_REFLECTANCE: f64 = 0.8;

/// Lambertian (m = 1) station at the origin, facing up, unit power.
pub fn calibrated_source() -> LightSource {
    LightSource::bulb(Vec3::ZERO, 1.0, 1.0).expect("valid constants")
}

/// 16-bit PD behind a small lens: cos⁴ angular response, 45° field of view,
/// 2 au full scale.
pub fn calibrated_response() -> PdResponse {
    PdResponse {
        angular_exponent: 4.0,
        adc_bits: 16,
        full_scale: 2.0,
        noise_sigma: 1e-4,
        fov_half_angle: FRAC_PI_4,
    }
}

/// The motorized PD is the same part with a wider 60° aperture.
pub fn calibrated_motor_response() -> PdResponse {
    PdResponse {
        fov_half_angle: FRAC_PI_3,
        ..calibrated_response()
    }
}

pub fn calibrated_noise() -> ActuationNoise {
    ActuationNoise {
        velocity_sigma: 0.02,
        yaw_sigma: 0.002,
        drift_sigma: 0.005,
        drift_period: 5.0,
    }
}

pub fn calibrated_params(layout: &PdLayout) -> GuidanceParams {
    GuidanceParams {
        min_signal: layout.default_min_signal(),
        ..GuidanceParams::default()
    }
}

#[derive(Debug, Clone)]
pub struct ReferenceEnv {
    pub name: &'static str,
    pub description: &'static str,
    pub environment: Environment,
    pub start: Vec3,
    /// Second start closer to the opening, where one exists.
    pub near_start: Option<Vec3>,
}

fn wall(x0: f64, y0: f64, x1: f64, y1: f64) -> Surface {
    Surface::wall(x0, y0, x1, y1, 0.0, WALL_HEIGHT, WALL_REFLECTANCE).expect("valid constants")
}

fn build(surfaces: Vec<Surface>) -> Environment {
    Environment::new(Emitter::Bulb(calibrated_source()), surfaces, 0.0).expect("valid constants")
}

/// The five indoor layouts; walls are 2 m tall vertical panels, ρ = 0.8.
pub fn reference_environments() -> Vec<ReferenceEnv> {
    vec![
        // Station in a 3 m × 3 m room whose front wall (y = 1.5) has a 1 m
        // opening. Far start well outside; near start just past the wall.
        ReferenceEnv {
            name: "env1",
            description: "far opening: closed room with a 1 m gap in the front wall",
            environment: build(vec![
                wall(-1.5, -1.5, 1.5, -1.5),
                wall(-1.5, -1.5, -1.5, 1.5),
                wall(1.5, -1.5, 1.5, 1.5),
                wall(-1.5, 1.5, -0.5, 1.5),
                wall(0.5, 1.5, 1.5, 1.5),
            ]),
            start: Vec3::new(5.0, 8.0, 1.0),
            near_start: Some(Vec3::new(1.2, 2.5, 1.0)),
        },
        // Open space split by a 0.8 m high partition along y = 1.2; the lit
        // back wall at y = -1 shows over the top. The drone flies over it.
        ReferenceEnv {
            name: "env2",
            description: "partial open space: station hidden behind a low partition",
            environment: build(vec![
                Surface::wall(-1.5, 1.2, 1.5, 1.2, 0.0, 0.8, WALL_REFLECTANCE)
                    .expect("valid constants"),
                wall(-2.0, -1.0, 2.0, -1.0),
            ]),
            start: Vec3::new(0.3, 3.5, 1.0),
            near_start: None,
        },
        // Station boxed in on all four sides.
        ReferenceEnv {
            name: "env3",
            description: "fully occluded: station enclosed by four walls",
            environment: build(vec![
                wall(-1.0, -1.0, 1.0, -1.0),
                wall(1.0, -1.0, 1.0, 1.0),
                wall(1.0, 1.0, -1.0, 1.0),
                wall(-1.0, 1.0, -1.0, -1.0),
            ]),
            start: Vec3::new(0.0, 3.0, 1.0),
            near_start: None,
        },
        // 3 m × 1.8 m room (x in [-1.5, 1.5], y in [-1, 0.8]) whose front
        // wall has a 0.9 m door centred on x = 0.
        ReferenceEnv {
            name: "env4",
            description: "door: 0.9 m opening in a dividing wall",
            environment: build(vec![
                wall(-3.0, 0.8, -0.45, 0.8),
                wall(0.45, 0.8, 3.0, 0.8),
                wall(-1.5, -1.0, 1.5, -1.0),
                wall(-1.5, -1.0, -1.5, 0.8),
                wall(1.5, -1.0, 1.5, 0.8),
            ]),
            start: Vec3::new(1.8, 2.3, 1.0),
            near_start: None,
        },
        // L-shaped corridor: station in the x-corridor (|y| < 1), drone in the
        // y-corridor (0.7 < x < 2.7) around the inner corner at (0.7, 1).
        ReferenceEnv {
            name: "env5",
            description: "corner: L-shaped corridor",
            environment: build(vec![
                wall(-1.0, 1.0, 0.7, 1.0),
                wall(0.7, 1.0, 0.7, 5.0),
                wall(-1.0, -1.0, 2.7, -1.0),
                wall(2.7, -1.0, 2.7, 5.0),
                wall(-1.0, -1.0, -1.0, 1.0),
            ]),
            start: Vec3::new(2.3, 4.0, 1.0),
            near_start: None,
        },
    ]
}

pub fn reference_environment(name: &str) -> Option<ReferenceEnv> {
    reference_environments()
        .into_iter()
        .find(|e| e.name == name)
}

/// Stand-ins for measured station fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SyntheticField {
    /// Bare emitter: single smooth peak over the station.
    Bulb,
    /// Two lobes either side of the station.
    Bimodal,
    /// Ring-shaped maximum around a dim centre.
    Lens1,
    /// Narrower, wider-radius ring.
    Lens2,
}

impl SyntheticField {
    pub const ALL: [SyntheticField; 4] = [
        SyntheticField::Bulb,
        SyntheticField::Bimodal,
        SyntheticField::Lens1,
        SyntheticField::Lens2,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            SyntheticField::Bulb => "bulb",
            SyntheticField::Bimodal => "bimodal",
            SyntheticField::Lens1 => "lens1",
            SyntheticField::Lens2 => "lens2",
        }
    }

    fn value(&self, p: Vec3) -> f64 {
        let rho = libm::hypot(p.x, p.y);
        let z = p.z;
        match self {
            SyntheticField::Bulb => {
                // calibrated bulb as read by a level downward PD: z²/d⁴
                let d2 = rho * rho + z * z;
                let ripple = 1.0 + 0.01 * libm::sin(7.0 * p.x) * libm::sin(7.0 * p.y);
                z * z / (d2 * d2) * ripple
            }
            SyntheticField::Bimodal => {
                // two lobes on the -45°/135° diagonal, drifting apart with height
                let s = 0.28 + 0.5 * z;
                let w = 0.2 + 0.1 * z;
                let (c, sn) = (
                    core::f64::consts::FRAC_1_SQRT_2,
                    -core::f64::consts::FRAC_1_SQRT_2,
                );
                let lobe = |k: f64| {
                    let (dx, dy) = (p.x - k * s * c, p.y - k * s * sn);
                    libm::exp(-(dx * dx + dy * dy) / (2.0 * w * w))
                };
                (lobe(1.0) + lobe(-1.0)) / ((z + 0.3) * (z + 0.3))
            }
            SyntheticField::Lens1 => ring(p, 0.35, 0.35, 0.12, 0.05, 2.0, -FRAC_PI_4),
            SyntheticField::Lens2 => ring(p, 0.45, 0.3, 0.1, 0.04, 3.0, -FRAC_PI_4),
        }
    }
}

/// Ring of radius `r0 + r_slope·z` and width `w0 + w_slope·z` over a dim
/// centre, brightened at `lobes` azimuths starting from `phase`.
fn ring(p: Vec3, r0: f64, r_slope: f64, w0: f64, w_slope: f64, lobes: f64, phase: f64) -> f64 {
    let rho = libm::hypot(p.x, p.y);
    let z = p.z;
    let r = r0 + r_slope * z;
    let w = w0 + w_slope * z;
    let phi = libm::atan2(p.y, p.x);
    let modulation = 1.0 + 0.6 * libm::cos(lobes * (phi - phase));
    let base = 0.05 * libm::exp(-rho * rho / 2.0);
    (libm::exp(-(rho - r) * (rho - r) / (2.0 * w * w)) * modulation + base)
        / ((z + 0.3) * (z + 0.3))
}

/// Samples a synthetic field on a 3 m × 3 m × 1.55 m grid centred over the
/// station, at `spacing` metres.
pub fn synthetic_field(kind: SyntheticField, spacing: f64) -> MeasuredFieldGrid {
    let nxy = libm::round(3.0 / spacing) as usize + 1;
    let nz = libm::round(1.55 / spacing) as usize + 1;
    let origin = Vec3::new(-1.5, -1.5, 0.05);
    MeasuredFieldGrid::from_fn(origin, [spacing; 3], [nxy, nxy, nz], kind.label(), |p| {
        kind.value(p)
    })
    .expect("synthetic fields are finite and nonnegative")
}

/// A grid field anchored at the origin.
pub fn grid_environment(grid: MeasuredFieldGrid) -> Environment {
    Environment::open(Emitter::Grid {
        grid,
        anchor: Vec3::ZERO,
    })
}
