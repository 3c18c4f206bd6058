use core::f64::consts::TAU;
use core::fmt;

use alloc::vec::Vec;

use crate::lightfield::{wrap_angle, Vec3};
use crate::sensing::{PdMount, PdResponse, SensingError};

/// Distance of every array PD from the drone center.
pub const DEFAULT_ARRAY_RADIUS: f64 = 0.04;

#[derive(Debug, Clone, PartialEq)]
pub enum LayoutError {
    Empty,
    LengthMismatch,
    MultipleMotorized,
    DuplicateAzimuth,
    Sensing(SensingError),
}

impl fmt::Display for LayoutError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayoutError::Empty => f.write_str("layout has no photodiodes"),
            LayoutError::LengthMismatch => f.write_str("mounts and responses differ in length"),
            LayoutError::MultipleMotorized => {
                f.write_str("at most one motorized photodiode is allowed")
            }
            LayoutError::DuplicateAzimuth => {
                f.write_str("array photodiodes must sit at distinct azimuths")
            }
            LayoutError::Sensing(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for LayoutError {}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PdLayout {
    pub mounts: Vec<PdMount>,
    pub responses: Vec<PdResponse>,
}

impl PdLayout {
    pub fn new(mounts: Vec<PdMount>, responses: Vec<PdResponse>) -> Result<Self, LayoutError> {
        let layout = Self { mounts, responses };
        layout.validate()?;
        Ok(layout)
    }

    pub fn validate(&self) -> Result<(), LayoutError> {
        if self.mounts.is_empty() {
            return Err(LayoutError::Empty);
        }
        if self.mounts.len() != self.responses.len() {
            return Err(LayoutError::LengthMismatch);
        }
        if self.mounts.iter().filter(|m| m.motorized).count() > 1 {
            return Err(LayoutError::MultipleMotorized);
        }
        for r in &self.responses {
            r.validate().map_err(LayoutError::Sensing)?;
        }
        let fixed: Vec<f64> = self
            .mounts
            .iter()
            .filter(|m| !m.motorized)
            .map(|m| m.offset.horizontal().bearing())
            .collect();
        for (i, a) in fixed.iter().enumerate() {
            if fixed[i + 1..]
                .iter()
                .any(|b| wrap_angle(a - b).abs() < 1e-9)
            {
                return Err(LayoutError::DuplicateAzimuth);
            }
        }
        Ok(())
    }

    /// `n` downward PDs evenly spaced on a circle, the first at body azimuth 0.
    pub fn arpd(n: usize, radius: f64, response: PdResponse) -> Self {
        let mounts = (0..n)
            .map(|i| PdMount::downward_at(radius, TAU * i as f64 / n as f64))
            .collect();
        Self {
            mounts,
            responses: alloc::vec![response; n],
        }
    }

    /// Equilateral triangle: a motorized PD at the front (azimuth 0) and two
    /// downward PDs at ±120°.
    pub fn hybrid(radius: f64, motorized: PdResponse, downward: PdResponse) -> Self {
        let mut layout = Self::arpd(3, radius, downward);
        layout.mounts[0] = PdMount {
            offset: Vec3::X * radius,
            azimuth: 0.0,
            tilt: 0.0,
            motorized: true,
        };
        layout.responses[0] = motorized;
        layout
    }

    /// One downward PD off center, swept around by yawing.
    pub fn spd(radius: f64, response: PdResponse) -> Self {
        Self::arpd(1, radius, response)
    }

    /// One fixed side-facing PD at the front.
    pub fn side_facing(radius: f64, response: PdResponse) -> Self {
        let mount = PdMount {
            offset: Vec3::X * radius,
            azimuth: 0.0,
            tilt: 0.0,
            motorized: false,
        };
        Self {
            mounts: alloc::vec![mount],
            responses: alloc::vec![response],
        }
    }

    pub fn len(&self) -> usize {
        self.mounts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mounts.is_empty()
    }

    pub fn motorized_index(&self) -> Option<usize> {
        self.mounts.iter().position(|m| m.motorized)
    }

    /// Three times the worst channel's noise floor.
    pub fn default_min_signal(&self) -> f64 {
        3.0 * self
            .responses
            .iter()
            .map(|r| r.noise_floor_counts())
            .fold(1.0, f64::max)
    }

    /// Mounts with the motorized PD set to `tilt`.
    pub fn mounts_at_tilt(&self, tilt: f64) -> impl Iterator<Item = PdMount> + '_ {
        self.mounts
            .iter()
            .map(move |m| if m.motorized { m.with_tilt(tilt) } else { *m })
    }
}
