use core::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::SensingError;
use crate::lightfield::{Environment, Vec3};

/// Largest offset of a PD from the drone center (palm-size airframe).
pub const MAX_MOUNT_OFFSET: f64 = 0.2;

/// Weight of the isotropic ambient offset on any PD orientation.
const AMBIENT_WEIGHT: f64 = 0.5;

/// Drone position and heading, all a PD needs to locate itself in the world.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose {
    pub position: Vec3,
    pub yaw: f64,
}

/// Where a photodiode sits on the airframe and which way it looks.
///
/// `tilt` is the polar angle below the horizon: 0 faces sideways along
/// `azimuth`, π/2 faces straight down.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PdMount {
    pub offset: Vec3,
    pub azimuth: f64,
    pub tilt: f64,
    pub motorized: bool,
}

impl PdMount {
    pub fn new(
        offset: Vec3,
        azimuth: f64,
        tilt: f64,
        motorized: bool,
    ) -> Result<Self, SensingError> {
        if !(0.0..=FRAC_PI_2).contains(&tilt) {
            return Err(SensingError::Invalid("tilt must lie in [0, pi/2]"));
        }
        if !(offset.is_finite() && offset.norm() <= MAX_MOUNT_OFFSET) {
            return Err(SensingError::Invalid(
                "mount offset exceeds the airframe bound",
            ));
        }
        if !azimuth.is_finite() {
            return Err(SensingError::Invalid("azimuth must be finite"));
        }
        Ok(Self {
            offset,
            azimuth,
            tilt,
            motorized,
        })
    }

    /// Downward-facing PD at `radius` from the center along body azimuth `azimuth`.
    pub fn downward_at(radius: f64, azimuth: f64) -> Self {
        Self {
            offset: Vec3::from_bearing(azimuth) * radius,
            azimuth,
            tilt: FRAC_PI_2,
            motorized: false,
        }
    }

    /// Copy with a different tilt, clamped into [0, π/2].
    pub fn with_tilt(self, tilt: f64) -> Self {
        Self {
            tilt: tilt.clamp(0.0, FRAC_PI_2),
            ..self
        }
    }

    pub fn world_position(&self, pose: &Pose) -> Vec3 {
        pose.position + self.offset.rotate_z(pose.yaw)
    }

    /// Unit normal of the sensing face in world coordinates.
    pub fn world_normal(&self, pose: &Pose) -> Vec3 {
        let heading = self.azimuth + pose.yaw;
        let c = libm::cos(self.tilt);
        Vec3::new(
            c * libm::cos(heading),
            c * libm::sin(heading),
            -libm::sin(self.tilt),
        )
    }
}

/// Electro-optical model of one PD channel.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct PdResponse {
    /// Reading ∝ cosᵏ(incidence).
    pub angular_exponent: f64,
    pub adc_bits: u32,
    /// Irradiance (au) at which the ADC saturates.
    pub full_scale: f64,
    /// Additive Gaussian noise before quantization, in au.
    pub noise_sigma: f64,
    /// Half-angle of the field of view; light arriving beyond it is blocked by
    /// the housing. π/2 is an unobstructed hemisphere.
    pub fov_half_angle: f64,
}

impl Default for PdResponse {
    fn default() -> Self {
        Self {
            angular_exponent: 1.0,
            adc_bits: 16,
            full_scale: 2.0,
            noise_sigma: 0.0,
            fov_half_angle: FRAC_PI_2,
        }
    }
}

impl PdResponse {
    pub fn validate(&self) -> Result<(), SensingError> {
        if !(self.angular_exponent >= 1.0 && self.angular_exponent.is_finite()) {
            return Err(SensingError::Invalid("angular exponent must be >= 1"));
        }
        if !(8..=16).contains(&self.adc_bits) {
            return Err(SensingError::Invalid("adc_bits must lie in [8, 16]"));
        }
        if !(self.full_scale > 0.0 && self.full_scale.is_finite()) {
            return Err(SensingError::Invalid("full_scale must be positive"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(SensingError::Invalid("noise_sigma must be >= 0"));
        }
        if !(self.fov_half_angle > 0.0 && self.fov_half_angle <= FRAC_PI_2) {
            return Err(SensingError::Invalid(
                "fov_half_angle must lie in (0, pi/2]",
            ));
        }
        Ok(())
    }

    pub fn max_count(&self) -> u32 {
        (1u32 << self.adc_bits) - 1
    }

    pub fn counts_per_au(&self) -> f64 {
        self.max_count() as f64 / self.full_scale
    }

    /// Noise floor in counts: the analog noise or one LSB, whichever is larger.
    pub fn noise_floor_counts(&self) -> f64 {
        (self.noise_sigma * self.counts_per_au()).max(1.0)
    }

    /// Relative sensitivity for light arriving at `cos_incidence`.
    pub fn angular_weight(&self, cos_incidence: f64) -> f64 {
        if cos_incidence <= 0.0 || cos_incidence < libm::cos(self.fov_half_angle) - 1e-12 {
            return 0.0;
        }
        if self.angular_exponent == 1.0 {
            cos_incidence
        } else {
            libm::pow(cos_incidence, self.angular_exponent)
        }
    }

    /// Rounds an analog level (au) to ADC counts, saturating at both ends.
    pub fn quantize(&self, analog: f64) -> u32 {
        let counts = libm::round(analog * self.counts_per_au());
        if counts.is_nan() || counts <= 0.0 {
            0
        } else if counts >= self.max_count() as f64 {
            self.max_count()
        } else {
            counts as u32
        }
    }
}

/// Noise-free analog level (au) seen by the PD, before quantization.
pub fn pd_signal(pd: &PdMount, resp: &PdResponse, pose: &Pose, env: &Environment) -> f64 {
    let p = pd.world_position(pose);
    let n = pd.world_normal(pose);
    let mut total = env.ambient_dc() * AMBIENT_WEIGHT;
    env.for_each_arrival(p, |a| {
        total += a.irradiance * resp.angular_weight(n.dot(a.direction))
    });
    total
}

/// One ADC reading: noise-free signal plus Gaussian noise, quantized and clamped.
pub fn pd_reading<R: Rng + ?Sized>(
    pd: &PdMount,
    resp: &PdResponse,
    pose: &Pose,
    env: &Environment,
    rng: &mut R,
) -> u32 {
    let mut analog = pd_signal(pd, resp, pose, env);
    if resp.noise_sigma > 0.0 {
        let z: f64 = StandardNormal.sample(rng);
        analog += resp.noise_sigma * z;
    }
    resp.quantize(analog)
}

/// [`pd_reading`] with a fresh generator seeded from `seed`.
pub fn pd_reading_seeded(
    pd: &PdMount,
    resp: &PdResponse,
    pose: &Pose,
    env: &Environment,
    seed: u64,
) -> u32 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pd_reading(pd, resp, pose, env, &mut rng)
}
