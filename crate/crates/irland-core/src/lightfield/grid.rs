use alloc::string::String;
use alloc::vec::Vec;

use super::{FieldError, Vec3};

/// Intensities sampled on a regular axis-aligned lattice, stored x-fastest.
///
/// An axis with a single sample is treated as extruded: the field does not vary
/// along it and any coordinate on that axis is inside the grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeasuredFieldGrid {
    origin: Vec3,
    spacing: [f64; 3],
    dims: [usize; 3],
    samples: Vec<f64>,
    pub label: String,
    /// Measurement height metadata carried through import/export.
    pub height: Option<f64>,
}

impl MeasuredFieldGrid {
    pub fn new(
        origin: Vec3,
        spacing: [f64; 3],
        dims: [usize; 3],
        samples: Vec<f64>,
        label: impl Into<String>,
    ) -> Result<Self, FieldError> {
        if dims.contains(&0) {
            return Err(FieldError::Invalid("grid dimensions must be >= 1"));
        }
        if spacing.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(FieldError::Invalid("grid spacing must be positive"));
        }
        if !origin.is_finite() {
            return Err(FieldError::Invalid("grid origin must be finite"));
        }
        let expected = dims[0] * dims[1] * dims[2];
        if samples.len() != expected {
            return Err(FieldError::SampleCount {
                expected,
                found: samples.len(),
            });
        }
        if let Some(index) = samples.iter().position(|s| !s.is_finite()) {
            return Err(FieldError::NonFiniteSample { index });
        }
        if let Some(index) = samples.iter().position(|&s| s < 0.0) {
            return Err(FieldError::NegativeSample { index });
        }
        Ok(Self {
            origin,
            spacing,
            dims,
            samples,
            label: label.into(),
            height: None,
        })
    }

    /// Samples `f` at every lattice point.
    pub fn from_fn(
        origin: Vec3,
        spacing: [f64; 3],
        dims: [usize; 3],
        label: impl Into<String>,
        mut f: impl FnMut(Vec3) -> f64,
    ) -> Result<Self, FieldError> {
        let mut samples = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for iz in 0..dims[2] {
            for iy in 0..dims[1] {
                for ix in 0..dims[0] {
                    samples.push(f(Self::point_of(origin, spacing, [ix, iy, iz])));
                }
            }
        }
        Self::new(origin, spacing, dims, samples, label)
    }

    fn point_of(origin: Vec3, spacing: [f64; 3], idx: [usize; 3]) -> Vec3 {
        Vec3::new(
            origin.x + idx[0] as f64 * spacing[0],
            origin.y + idx[1] as f64 * spacing[1],
            origin.z + idx[2] as f64 * spacing[2],
        )
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        ix + self.dims[0] * (iy + self.dims[1] * iz)
    }

    pub fn sample(&self, ix: usize, iy: usize, iz: usize) -> f64 {
        self.samples[self.index(ix, iy, iz)]
    }

    /// World position of the lattice point at the given indices.
    pub fn point(&self, ix: usize, iy: usize, iz: usize) -> Vec3 {
        Self::point_of(self.origin, self.spacing, [ix, iy, iz])
    }

    /// Iterator over `(position, intensity)` for every sample, x-fastest.
    pub fn points(&self) -> impl Iterator<Item = (Vec3, f64)> + '_ {
        let [nx, ny, _] = self.dims;
        self.samples.iter().enumerate().map(move |(i, &v)| {
            let ix = i % nx;
            let iy = (i / nx) % ny;
            let iz = i / (nx * ny);
            (self.point(ix, iy, iz), v)
        })
    }

    /// Upper corner of the sampled box.
    pub fn extent_max(&self) -> Vec3 {
        self.point(self.dims[0] - 1, self.dims[1] - 1, self.dims[2] - 1)
    }

    /// Trilinear interpolation; zero outside the sampled box.
    pub fn value_at(&self, p: Vec3) -> f64 {
        let coords = [p.x, p.y, p.z];
        let origin = [self.origin.x, self.origin.y, self.origin.z];
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for axis in 0..3 {
            let n = self.dims[axis];
            if n == 1 {
                continue;
            }
            let u = (coords[axis] - origin[axis]) / self.spacing[axis];
            let last = (n - 1) as f64;
            if !(u >= -1e-9 && u <= last + 1e-9) {
                return 0.0;
            }
            let u = u.clamp(0.0, last);
            let i = (libm::floor(u) as usize).min(n - 2);
            base[axis] = i;
            frac[axis] = u - i as f64;
        }
        let mut acc = 0.0;
        for corner in 0..8usize {
            let mut weight = 1.0;
            let mut idx = [0usize; 3];
            for axis in 0..3 {
                let hi = (corner >> axis) & 1 == 1;
                if self.dims[axis] == 1 {
                    if hi {
                        weight = 0.0;
                    }
                    idx[axis] = 0;
                } else {
                    idx[axis] = base[axis] + hi as usize;
                    weight *= if hi { frac[axis] } else { 1.0 - frac[axis] };
                }
            }
            if weight != 0.0 {
                acc += weight * self.sample(idx[0], idx[1], idx[2]);
            }
        }
        acc
    }

    pub fn max_sample(&self) -> f64 {
        self.samples.iter().copied().fold(0.0, f64::max)
    }
}
