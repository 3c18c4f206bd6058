//! Irradiance from the landing-station emitter: analytic bulbs, imported
//! measured grids, occluding walls and single-bounce diffuse reflections.

mod environment;
mod fit;
mod grid;
mod source;
mod surface;
mod vec3;

use core::fmt;

pub use environment::{Arrival, Emitter, Environment, DEFAULT_GRADIENT_STEP, DEFAULT_PATCH_EDGE};
pub use fit::{fit_bulb_model, BulbFit, FitError};
pub use grid::MeasuredFieldGrid;
pub use source::LightSource;
pub use surface::Surface;
pub use vec3::{angle_between_bearings, rem_euclid, wrap_angle, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub enum FieldError {
    Invalid(&'static str),
    AtSource,
    SampleCount { expected: usize, found: usize },
    NegativeSample { index: usize },
    NonFiniteSample { index: usize },
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::Invalid(msg) => f.write_str(msg),
            FieldError::AtSource => f.write_str("query point coincides with the source position"),
            FieldError::SampleCount { expected, found } => {
                write!(f, "expected {expected} samples, found {found}")
            }
            FieldError::NegativeSample { index } => write!(f, "negative sample at index {index}"),
            FieldError::NonFiniteSample { index } => {
                write!(f, "non-finite sample at index {index}")
            }
        }
    }
}

#[cfg(feature = "std")]
extern crate std;

#[cfg(feature = "std")]
impl std::error::Error for FieldError {}
