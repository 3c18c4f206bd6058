use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{FieldError, LightSource, MeasuredFieldGrid, Surface, Vec3};

/// Default edge length of the reflection patches, in meters.
pub const DEFAULT_PATCH_EDGE: f64 = 0.05;
/// Default central-difference step for [`Environment::field_gradient`], in meters.
pub const DEFAULT_GRADIENT_STEP: f64 = 1e-4;

/// The landing-station emitter: an analytic bulb or an imported measured field.
///
/// Grid values are downward-PD readings, so their light is treated as arriving
/// from straight below. `anchor` is the physical light position, used for
/// occlusion and for lighting reflectors.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Emitter {
    Bulb(LightSource),
    Grid {
        grid: MeasuredFieldGrid,
        anchor: Vec3,
    },
}

impl Emitter {
    pub fn position(&self) -> Vec3 {
        match self {
            Emitter::Bulb(s) => s.position,
            Emitter::Grid { anchor, .. } => *anchor,
        }
    }

    /// Unit vector from `p` toward where the emitter's light appears to come
    /// from. Grid samples are downward-PD measurements, so grid light arrives
    /// from straight below.
    fn arrival_direction(&self, p: Vec3) -> Option<Vec3> {
        match self {
            Emitter::Bulb(s) => (s.position - p).try_normalized(),
            Emitter::Grid { .. } => Some(-Vec3::Z),
        }
    }

    fn unoccluded(&self, p: Vec3) -> f64 {
        match self {
            Emitter::Bulb(s) => s.irradiance_at(p).unwrap_or(0.0),
            Emitter::Grid { grid, anchor } => {
                if (p - *anchor).norm_squared() < 1e-24 {
                    0.0
                } else {
                    grid.value_at(p)
                }
            }
        }
    }
}

/// One irradiance contribution reaching a point: `direction` is the unit vector
/// from the receiver toward where the light comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrival {
    pub direction: Vec3,
    pub irradiance: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct Patch {
    center: Vec3,
    /// Unit normal on the lit side.
    normal: Vec3,
    area: f64,
    /// Outgoing diffuse radiance, ρ·E_surface/π.
    radiance: f64,
    surface: usize,
}

/// Emitter, reflecting/occluding surfaces and a uniform ambient offset.
/// Immutable once built; every query is a pure function of it.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    source: Emitter,
    surfaces: Vec<Surface>,
    ambient_dc: f64,
    patch_edge: f64,
    patches: Vec<Patch>,
}

impl Environment {
    pub fn new(
        source: Emitter,
        surfaces: Vec<Surface>,
        ambient_dc: f64,
    ) -> Result<Self, FieldError> {
        Self::with_patch_edge(source, surfaces, ambient_dc, DEFAULT_PATCH_EDGE)
    }

    pub fn with_patch_edge(
        source: Emitter,
        surfaces: Vec<Surface>,
        ambient_dc: f64,
        patch_edge: f64,
    ) -> Result<Self, FieldError> {
        if !(ambient_dc >= 0.0 && ambient_dc.is_finite()) {
            return Err(FieldError::Invalid("ambient_dc must be >= 0"));
        }
        if !(patch_edge > 0.0 && patch_edge.is_finite()) {
            return Err(FieldError::Invalid("patch edge must be positive"));
        }
        let src = source.position();
        if surfaces.iter().any(|s| s.contains_point(src, 1e-9)) {
            return Err(FieldError::Invalid("source lies inside a surface"));
        }
        let mut env = Self {
            source,
            surfaces,
            ambient_dc,
            patch_edge,
            patches: Vec::new(),
        };
        env.patches = env.build_patches();
        Ok(env)
    }

    /// Environment with only an emitter: no surfaces, no ambient light.
    pub fn open(source: Emitter) -> Self {
        Self::new(source, Vec::new(), 0.0).expect("open environment is always valid")
    }

    pub fn source(&self) -> &Emitter {
        &self.source
    }

    pub fn source_position(&self) -> Vec3 {
        self.source.position()
    }

    pub fn surfaces(&self) -> &[Surface] {
        &self.surfaces
    }

    pub fn ambient_dc(&self) -> f64 {
        self.ambient_dc
    }

    pub fn patch_edge(&self) -> f64 {
        self.patch_edge
    }

    pub fn patch_count(&self) -> usize {
        self.patches.len()
    }

    /// Same geometry with a different ambient offset.
    pub fn with_ambient(&self, ambient_dc: f64) -> Result<Self, FieldError> {
        if !(ambient_dc >= 0.0 && ambient_dc.is_finite()) {
            return Err(FieldError::Invalid("ambient_dc must be >= 0"));
        }
        let mut env = self.clone();
        env.ambient_dc = ambient_dc;
        Ok(env)
    }

    fn build_patches(&self) -> Vec<Patch> {
        let src = self.source.position();
        let mut patches = Vec::new();
        for (index, surface) in self.surfaces.iter().enumerate() {
            if surface.reflectance == 0.0 {
                continue;
            }
            let u = surface.edge_u();
            let v = surface.edge_v();
            let nu = libm::ceil(u.norm() / self.patch_edge).max(1.0) as usize;
            let nv = libm::ceil(v.norm() / self.patch_edge).max(1.0) as usize;
            let area = surface.area() / (nu * nv) as f64;
            let base = surface.corners()[0];
            let normal = surface.normal();
            for i in 0..nu {
                for j in 0..nv {
                    let center = base
                        + u * ((i as f64 + 0.5) / nu as f64)
                        + v * ((j as f64 + 0.5) / nv as f64);
                    let to_src = src - center;
                    let dist = to_src.norm();
                    if dist < 1e-12 {
                        continue;
                    }
                    let cos_in_signed = normal.dot(to_src) / dist;
                    if cos_in_signed == 0.0 || !self.visible_skipping(src, center, Some(index)) {
                        continue;
                    }
                    let lit_normal = if cos_in_signed > 0.0 { normal } else { -normal };
                    let e_surface = self.source.unoccluded(center) * libm::fabs(cos_in_signed);
                    let radiance = surface.reflectance * e_surface / PI;
                    if radiance > 0.0 {
                        patches.push(Patch {
                            center,
                            normal: lit_normal,
                            area,
                            radiance,
                            surface: index,
                        });
                    }
                }
            }
        }
        patches
    }

    fn visible_skipping(&self, a: Vec3, b: Vec3, skip: Option<usize>) -> bool {
        self.surfaces
            .iter()
            .enumerate()
            .all(|(i, s)| Some(i) == skip || !s.opaque || !s.blocks_segment(a, b))
    }

    /// Line of sight between two points; grazing a surface rim counts as visible.
    pub fn los_visible(&self, a: Vec3, b: Vec3) -> bool {
        self.visible_skipping(a, b, None)
    }

    fn direct_at(&self, p: Vec3) -> f64 {
        let src = self.source.position();
        if (p - src).norm_squared() < 1e-24 || !self.los_visible(src, p) {
            return 0.0;
        }
        self.source.unoccluded(p)
    }

    /// Irradiance received straight from the emitter, zero when occluded.
    pub fn direct_irradiance(&self, p: Vec3) -> Result<f64, FieldError> {
        if (p - self.source.position()).norm_squared() < 1e-24 {
            return Err(FieldError::AtSource);
        }
        Ok(self.direct_at(p))
    }

    /// Single diffuse bounce off every reflecting surface.
    pub fn bounce_irradiance(&self, p: Vec3) -> f64 {
        let mut total = 0.0;
        self.for_each_bounce(p, |a| total += a.irradiance);
        total
    }

    fn for_each_bounce(&self, p: Vec3, mut f: impl FnMut(Arrival)) {
        for patch in &self.patches {
            let w = p - patch.center;
            let r2 = w.norm_squared();
            if r2 < 1e-18 {
                continue;
            }
            let r = libm::sqrt(r2);
            let cos_out = patch.normal.dot(w) / r;
            if cos_out <= 0.0 || !self.visible_skipping(patch.center, p, Some(patch.surface)) {
                continue;
            }
            f(Arrival {
                direction: -w / r,
                irradiance: patch.radiance * cos_out * patch.area / r2,
            });
        }
    }

    /// Direct + bounce + ambient.
    pub fn total_irradiance(&self, p: Vec3) -> f64 {
        self.direct_at(p) + self.bounce_irradiance(p) + self.ambient_dc
    }

    /// Every directional contribution reaching `p` (direct first, then bounces).
    /// Ambient light is not directional and is not included.
    pub fn for_each_arrival(&self, p: Vec3, mut f: impl FnMut(Arrival)) {
        let direct = self.direct_at(p);
        if direct > 0.0 {
            if let Some(direction) = self.source.arrival_direction(p) {
                f(Arrival {
                    direction,
                    irradiance: direct,
                });
            }
        }
        self.for_each_bounce(p, f);
    }

    /// Central finite-difference gradient of [`Self::total_irradiance`].
    pub fn field_gradient_with_step(&self, p: Vec3, h: f64) -> Vec3 {
        let d = |axis: Vec3| {
            (self.total_irradiance(p + axis * h) - self.total_irradiance(p - axis * h)) / (2.0 * h)
        };
        Vec3::new(d(Vec3::X), d(Vec3::Y), d(Vec3::Z))
    }

    pub fn field_gradient(&self, p: Vec3) -> Vec3 {
        self.field_gradient_with_step(p, DEFAULT_GRADIENT_STEP)
    }
}
