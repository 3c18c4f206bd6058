use super::{FieldError, Vec3};

const EDGE_EPS: f64 = 1e-9;

/// Rectangular reflector or occluder. Corners are given in order around the rim.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Surface {
    corners: [Vec3; 4],
    pub reflectance: f64,
    pub opaque: bool,
}

impl Surface {
    pub fn new(corners: [Vec3; 4], reflectance: f64, opaque: bool) -> Result<Self, FieldError> {
        if !(0.0..=1.0).contains(&reflectance) {
            return Err(FieldError::Invalid("reflectance must lie in [0, 1]"));
        }
        if corners.iter().any(|c| !c.is_finite()) {
            return Err(FieldError::Invalid("surface corners must be finite"));
        }
        let u = corners[1] - corners[0];
        let v = corners[3] - corners[0];
        let n = u.cross(v);
        let n_norm = n.norm();
        if n_norm < 1e-12 {
            return Err(FieldError::Invalid("surface corners are degenerate"));
        }
        let n = n / n_norm;
        if libm::fabs(n.dot(corners[2] - corners[0])) > 1e-6 {
            return Err(FieldError::Invalid("surface corners are not coplanar"));
        }
        if (corners[0] + u + v - corners[2]).norm() > 1e-6
            || libm::fabs(u.dot(v)) > 1e-6 * u.norm() * v.norm()
        {
            return Err(FieldError::Invalid(
                "surface corners do not form a rectangle",
            ));
        }
        Ok(Self {
            corners,
            reflectance,
            opaque,
        })
    }

    /// Rectangle spanned by `corner`, `corner + u`, `corner + u + v`, `corner + v`.
    pub fn from_edges(
        corner: Vec3,
        u: Vec3,
        v: Vec3,
        reflectance: f64,
        opaque: bool,
    ) -> Result<Self, FieldError> {
        Self::new(
            [corner, corner + u, corner + u + v, corner + v],
            reflectance,
            opaque,
        )
    }

    /// Vertical opaque wall over the floor segment (x0, y0)-(x1, y1), from z0 to z1.
    pub fn wall(
        x0: f64,
        y0: f64,
        x1: f64,
        y1: f64,
        z0: f64,
        z1: f64,
        reflectance: f64,
    ) -> Result<Self, FieldError> {
        Self::from_edges(
            Vec3::new(x0, y0, z0),
            Vec3::new(x1 - x0, y1 - y0, 0.0),
            Vec3::new(0.0, 0.0, z1 - z0),
            reflectance,
            true,
        )
    }

    pub fn corners(&self) -> [Vec3; 4] {
        self.corners
    }

    pub fn edge_u(&self) -> Vec3 {
        self.corners[1] - self.corners[0]
    }

    pub fn edge_v(&self) -> Vec3 {
        self.corners[3] - self.corners[0]
    }

    /// Unit normal (right-handed with respect to the corner order).
    pub fn normal(&self) -> Vec3 {
        self.edge_u().cross(self.edge_v()).normalized()
    }

    pub fn area(&self) -> f64 {
        self.edge_u().cross(self.edge_v()).norm()
    }

    /// True when the open segment a→b crosses the rectangle's interior.
    /// Contact along the rim, or a segment lying in the surface plane, does not count.
    pub fn blocks_segment(&self, a: Vec3, b: Vec3) -> bool {
        let u = self.edge_u();
        let v = self.edge_v();
        let n = u.cross(v);
        let d = b - a;
        let denom = n.dot(d);
        if libm::fabs(denom) < 1e-14 * n.norm() * d.norm() {
            return false;
        }
        let t = n.dot(self.corners[0] - a) / denom;
        if t <= EDGE_EPS || t >= 1.0 - EDGE_EPS {
            return false;
        }
        let q = a + d * t - self.corners[0];
        let s = q.dot(u) / u.norm_squared();
        let r = q.dot(v) / v.norm_squared();
        s > EDGE_EPS && s < 1.0 - EDGE_EPS && r > EDGE_EPS && r < 1.0 - EDGE_EPS
    }

    /// True when `p` lies in the interior of the rectangle (within `tol` of the plane).
    pub fn contains_point(&self, p: Vec3, tol: f64) -> bool {
        let u = self.edge_u();
        let v = self.edge_v();
        let q = p - self.corners[0];
        if libm::fabs(q.dot(self.normal())) > tol {
            return false;
        }
        let s = q.dot(u) / u.norm_squared();
        let r = q.dot(v) / v.norm_squared();
        s > 0.0 && s < 1.0 && r > 0.0 && r < 1.0
    }
}
