//! Photodiode channels: geometry, angular response, ADC, noise, height-sensor
//! interference and the rolling-minimum filter that removes it.

mod filter;
mod photodiode;

use core::fmt;

pub use filter::{
    apply_interference, default_filter_window, rolling_min_filter, InterferenceModel, ReadingTrace,
    RollingMin, DEFAULT_INTERFERENCE_PERIOD,
};
pub use photodiode::{pd_reading, pd_reading_seeded, pd_signal, PdMount, PdResponse, Pose};

#[derive(Debug, Clone, PartialEq)]
pub enum SensingError {
    Invalid(&'static str),
    ZeroWindow,
    EmptyTrace,
}

impl fmt::Display for SensingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SensingError::Invalid(msg) => f.write_str(msg),
            SensingError::ZeroWindow => f.write_str("filter window must be at least one sample"),
            SensingError::EmptyTrace => f.write_str("trace is empty"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SensingError {}
