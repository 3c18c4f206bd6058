use super::{FieldError, Vec3};

/// Generalized Lambertian emitter: radiant intensity `power · cosᵐ(θ)` about `axis`,
/// falling off with the inverse square of distance.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LightSource {
    pub position: Vec3,
    pub axis: Vec3,
    pub power: f64,
    pub lambert_exponent: f64,
}

impl LightSource {
    pub fn new(
        position: Vec3,
        axis: Vec3,
        power: f64,
        lambert_exponent: f64,
    ) -> Result<Self, FieldError> {
        if !(power > 0.0 && power.is_finite()) {
            return Err(FieldError::Invalid("power must be positive and finite"));
        }
        if !(lambert_exponent >= 0.0 && lambert_exponent.is_finite()) {
            return Err(FieldError::Invalid("lambert exponent must be >= 0"));
        }
        if !position.is_finite() {
            return Err(FieldError::Invalid("source position must be finite"));
        }
        let axis = axis
            .try_normalized()
            .ok_or(FieldError::Invalid("emission axis must be nonzero"))?;
        Ok(Self {
            position,
            axis,
            power,
            lambert_exponent,
        })
    }

    /// Upward-facing bulb at `position`.
    pub fn bulb(position: Vec3, power: f64, lambert_exponent: f64) -> Result<Self, FieldError> {
        Self::new(position, Vec3::Z, power, lambert_exponent)
    }

    /// Unoccluded irradiance at `p`; zero behind the emission hemisphere.
    /// Returns `None` when `p` coincides with the source.
    pub fn irradiance_at(&self, p: Vec3) -> Option<f64> {
        let v = p - self.position;
        let d2 = v.norm_squared();
        if d2 < 1e-24 {
            return None;
        }
        let cos_theta = self.axis.dot(v) / libm::sqrt(d2);
        if cos_theta <= 0.0 {
            return Some(0.0);
        }
        let angular = if self.lambert_exponent == 0.0 {
            1.0
        } else {
            libm::pow(cos_theta, self.lambert_exponent)
        };
        Some(self.power * angular / d2)
    }
}
