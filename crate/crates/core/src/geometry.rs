//! Implicit 2D domain geometry: level sets, signed distances, normals and
//! closest-point projections.
//!
//! A domain is the sublevel set `Omega = { phi < 0 }` of a scalar field `phi`.
//! Disks and strips carry an exact signed distance; composite shapes are built
//! with C2 polynomial smooth-min blending and answer distance queries through
//! a damped closest-point iteration.

use crate::vec2::Vec2;
use thiserror::Error;

/// Default blend radius for composite shapes.
pub const DEFAULT_BLEND_RADIUS: f64 = 0.05;
/// Convergence tolerance of the closest-point iteration.
pub const PROJECTION_TOL: f64 = 1e-10;
/// Iteration cap of the closest-point iteration.
pub const MAX_PROJECTION_ITERS: usize = 50;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("closest-point projection failed to converge at ({x}, {y})", x = .at.x, y = .at.y)]
    ProjectionFailed { at: Vec2 },
    #[error("point ({x}, {y}) lies outside the trusted tube (d = {distance}, tube = {tube})", x = .at.x, y = .at.y)]
    OutsideTube { at: Vec2, distance: f64, tube: f64 },
    #[error("degenerate blend: blend_radius {blend_radius} exceeds feature radius {feature_radius}")]
    DegenerateBlend {
        blend_radius: f64,
        feature_radius: f64,
    },
}

/// Implicit shape tree. Leaves carry exact signed distance fields; interior
/// nodes blend their children with a C2 smooth min/max.
#[derive(Debug, Clone)]
enum LevelSet {
    Disk { center: Vec2, radius: f64 },
    Strip { y_min: f64, y_max: f64 },
    SmoothUnion { a: Box<LevelSet>, b: Box<LevelSet>, blend: f64 },
    SmoothIntersection { a: Box<LevelSet>, b: Box<LevelSet>, blend: f64 },
    Complement(Box<LevelSet>),
}

/// C2 polynomial smooth minimum (cubic falloff) together with the blend
/// weight of the first argument; the weight of the second is `1 - w_a`.
fn smooth_min(a: f64, b: f64, k: f64) -> (f64, f64) {
    let d = a - b;
    let h = ((k - d.abs()).max(0.0)) / k;
    let s = a.min(b) - h * h * h * k / 6.0;
    let w_a = if d < 0.0 {
        1.0 - h * h / 2.0
    } else if d > 0.0 {
        h * h / 2.0
    } else {
        0.5
    };
    (s, w_a)
}

impl LevelSet {
    fn value(&self, x: Vec2) -> f64 {
        match self {
            LevelSet::Disk { center, radius } => (x - *center).norm() - radius,
            LevelSet::Strip { y_min, y_max } => (y_min - x.y).max(x.y - y_max),
            LevelSet::SmoothUnion { a, b, blend } => smooth_min(a.value(x), b.value(x), *blend).0,
            LevelSet::SmoothIntersection { a, b, blend } => {
                -smooth_min(-a.value(x), -b.value(x), *blend).0
            }
            LevelSet::Complement(inner) => -inner.value(x),
        }
    }

    fn gradient(&self, x: Vec2) -> Vec2 {
        match self {
            LevelSet::Disk { center, radius: _ } => {
                let r = x - *center;
                let n = r.norm();
                if n == 0.0 {
                    // Degenerate at the center; any unit direction works there.
                    Vec2::new(1.0, 0.0)
                } else {
                    r / n
                }
            }
            LevelSet::Strip { y_min, y_max } => {
                if y_min - x.y > x.y - y_max {
                    Vec2::new(0.0, -1.0)
                } else {
                    Vec2::new(0.0, 1.0)
                }
            }
            LevelSet::SmoothUnion { a, b, blend } => {
                let (_, w_a) = smooth_min(a.value(x), b.value(x), *blend);
                w_a * a.gradient(x) + (1.0 - w_a) * b.gradient(x)
            }
            LevelSet::SmoothIntersection { a, b, blend } => {
                let (_, w_a) = smooth_min(-a.value(x), -b.value(x), *blend);
                w_a * a.gradient(x) + (1.0 - w_a) * b.gradient(x)
            }
            LevelSet::Complement(inner) => -inner.gradient(x),
        }
    }

    /// True when the leaf signed distances are exact everywhere, so no
    /// projection iteration is needed.
    fn is_exact_distance(&self) -> bool {
        matches!(self, LevelSet::Disk { .. } | LevelSet::Strip { .. })
    }

    /// Smallest geometric feature length, used to size tubes and to reject
    /// oversized blends.
    fn feature_radius(&self) -> f64 {
        match self {
            LevelSet::Disk { radius, .. } => *radius,
            LevelSet::Strip { y_min, y_max } => (y_max - y_min) / 2.0,
            LevelSet::SmoothUnion { a, b, .. } | LevelSet::SmoothIntersection { a, b, .. } => {
                a.feature_radius().min(b.feature_radius())
            }
            LevelSet::Complement(inner) => inner.feature_radius(),
        }
    }
}

/// Result of a boundary distance/normal/projection query.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryQuery {
    /// Signed distance to the boundary: negative inside the closed domain,
    /// positive outside, zero on the boundary.
    pub signed_distance: f64,
    /// Outward unit normal at the foot point.
    pub normal: Vec2,
    /// Closest boundary point.
    pub foot_point: Vec2,
    /// False when the closest-point iteration did not converge.
    pub converged: bool,
}

/// Immutable confining domain `Omega = { phi < 0 }` with distance queries
/// trusted inside a tube of width `tube_width` around the boundary.
#[derive(Debug, Clone)]
pub struct DomainGeometry {
    shape: LevelSet,
    tube_width: f64,
    blend_radius: f64,
}

pub fn make_disk(center: Vec2, radius: f64) -> DomainGeometry {
    let shape = LevelSet::Disk { center, radius };
    let tube = 0.1 * shape.feature_radius();
    DomainGeometry {
        shape,
        tube_width: tube,
        blend_radius: DEFAULT_BLEND_RADIUS,
    }
}

pub fn make_strip(y_min: f64, y_max: f64) -> DomainGeometry {
    assert!(y_max > y_min, "strip requires y_max > y_min");
    let shape = LevelSet::Strip { y_min, y_max };
    let tube = 0.1 * shape.feature_radius();
    DomainGeometry {
        shape,
        tube_width: tube,
        blend_radius: DEFAULT_BLEND_RADIUS,
    }
}

fn combine(
    a: DomainGeometry,
    b: DomainGeometry,
    blend_radius: f64,
    union: bool,
) -> Result<DomainGeometry, GeometryError> {
    let feature = a.shape.feature_radius().min(b.shape.feature_radius());
    if blend_radius <= 0.0 || blend_radius >= feature {
        return Err(GeometryError::DegenerateBlend {
            blend_radius,
            feature_radius: feature,
        });
    }
    let shape = if union {
        LevelSet::SmoothUnion {
            a: Box::new(a.shape),
            b: Box::new(b.shape),
            blend: blend_radius,
        }
    } else {
        LevelSet::SmoothIntersection {
            a: Box::new(a.shape),
            b: Box::new(b.shape),
            blend: blend_radius,
        }
    };
    let tube = 0.1 * shape.feature_radius();
    Ok(DomainGeometry {
        shape,
        tube_width: tube,
        blend_radius,
    })
}

pub fn smooth_union(
    a: DomainGeometry,
    b: DomainGeometry,
    blend_radius: f64,
) -> Result<DomainGeometry, GeometryError> {
    combine(a, b, blend_radius, true)
}

pub fn smooth_intersection(
    a: DomainGeometry,
    b: DomainGeometry,
    blend_radius: f64,
) -> Result<DomainGeometry, GeometryError> {
    combine(a, b, blend_radius, false)
}

pub fn complement(a: DomainGeometry) -> DomainGeometry {
    let tube = a.tube_width;
    let blend = a.blend_radius;
    DomainGeometry {
        shape: LevelSet::Complement(Box::new(a.shape)),
        tube_width: tube,
        blend_radius: blend,
    }
}

impl DomainGeometry {
    pub fn tube_width(&self) -> f64 {
        self.tube_width
    }

    pub fn with_tube_width(mut self, tube_width: f64) -> Self {
        assert!(tube_width > 0.0);
        self.tube_width = tube_width;
        self
    }

    /// Raw level set value; negative inside the domain.
    pub fn level_set(&self, x: Vec2) -> f64 {
        self.shape.value(x)
    }

    /// Gradient of the level set field.
    pub fn level_set_gradient(&self, x: Vec2) -> Vec2 {
        self.shape.gradient(x)
    }

    /// Exact set membership: the domain is defined as `{ phi < 0 }`, so the
    /// sign of the level set decides membership without any iteration.
    pub fn contains(&self, x: Vec2) -> bool {
        self.shape.value(x) < 0.0
    }

    /// Cheap distance estimate `phi / |grad phi|`, used only where exactness
    /// is not needed (rendering, sampling heuristics).
    pub fn approx_signed_distance(&self, x: Vec2) -> f64 {
        let g = self.shape.gradient(x).norm();
        if g == 0.0 {
            self.shape.value(x)
        } else {
            self.shape.value(x) / g
        }
    }

    /// Signed distance to the boundary: negative inside the closed domain,
    /// positive outside. Exact for analytic shapes; composites go through the
    /// closest-point projection.
    pub fn signed_distance(&self, x: Vec2) -> Result<f64, GeometryError> {
        if self.shape.is_exact_distance() {
            return Ok(self.shape.value(x));
        }
        let q = self.boundary_query(x)?;
        Ok(q.signed_distance)
    }

    /// Full boundary query: signed distance, outward normal and foot point.
    pub fn boundary_query(&self, x: Vec2) -> Result<BoundaryQuery, GeometryError> {
        match &self.shape {
            LevelSet::Disk { center, radius } => {
                let r = x - *center;
                let n = r.norm();
                let normal = if n == 0.0 { Vec2::new(1.0, 0.0) } else { r / n };
                Ok(BoundaryQuery {
                    signed_distance: n - radius,
                    normal,
                    foot_point: *center + normal * *radius,
                    converged: true,
                })
            }
            LevelSet::Strip { y_min, y_max } => {
                let (d, normal, foot_y) = if y_min - x.y > x.y - y_max {
                    (y_min - x.y, Vec2::new(0.0, -1.0), *y_min)
                } else {
                    (x.y - y_max, Vec2::new(0.0, 1.0), *y_max)
                };
                Ok(BoundaryQuery {
                    signed_distance: d,
                    normal,
                    foot_point: Vec2::new(x.x, foot_y),
                    converged: true,
                })
            }
            _ => self.project_to_boundary(x),
        }
    }

    /// Closest-point iteration for composite shapes. Alternates a Newton
    /// step onto the zero level set with a tangential slide toward `x`,
    /// seeded at `x - phi grad phi / |grad phi|^2`.
    fn project_to_boundary(&self, x: Vec2) -> Result<BoundaryQuery, GeometryError> {
        let phi_x = self.shape.value(x);
        let g0 = self.shape.gradient(x);
        let g0n2 = g0.norm_squared();
        if g0n2 == 0.0 {
            return Err(GeometryError::ProjectionFailed { at: x });
        }
        let seed = x - g0 * (phi_x / g0n2);
        let mut z = seed;
        let mut converged = false;
        // Near a medial axis (e.g. atop a narrow blend neck) the plain slide
        // contracts with ratio close to 1; successive slide vectors are then
        // nearly parallel, so the geometric tail is summed by extrapolating
        // with 1/(1 - r), where r is the observed contraction ratio.
        let mut prev_slide: Option<Vec2> = None;
        for _ in 0..MAX_PROJECTION_ITERS {
            let g = self.shape.gradient(z);
            let gn2 = g.norm_squared();
            if gn2 == 0.0 {
                return Err(GeometryError::ProjectionFailed { at: x });
            }
            // Newton step onto the surface.
            let phi = self.shape.value(z);
            z -= g * (phi / gn2);
            // Tangential slide toward the query point.
            let g = self.shape.gradient(z);
            let n = g / g.norm();
            let to_x = x - z;
            let tangential = to_x - n * to_x.dot(n);
            let mut multiplier = 1.0;
            if let Some(prev) = prev_slide {
                let prev_n2 = prev.norm_squared();
                if prev_n2 > 0.0 {
                    let r = tangential.dot(prev) / prev_n2;
                    if r > 0.0 && r < 0.98 {
                        multiplier = (1.0 / (1.0 - r)).min(50.0);
                    }
                }
            }
            prev_slide = Some(tangential);
            z += tangential * multiplier;
            if self.shape.value(z).abs() <= PROJECTION_TOL && tangential.norm() <= PROJECTION_TOL {
                converged = true;
                break;
            }
        }
        let g = self.shape.gradient(z);
        let normal = g / g.norm();
        let dist = (x - z).norm();
        let signed = if phi_x < 0.0 {
            -dist
        } else if phi_x > 0.0 {
            dist
        } else {
            0.0
        };
        Ok(BoundaryQuery {
            signed_distance: signed,
            normal,
            foot_point: z,
            converged,
        })
    }

    /// The penalty restoring field `d grad d`: zero on the closed domain,
    /// `d_s(x) nu(xbar)` outside. Errors when the query leaves the trusted
    /// tube, since the penalty solver must keep particles inside it.
    pub fn d_grad_d(&self, x: Vec2) -> Result<Vec2, GeometryError> {
        if self.shape.value(x) <= 0.0 {
            return Ok(Vec2::ZERO);
        }
        let q = self.boundary_query(x)?;
        if !q.converged {
            return Err(GeometryError::ProjectionFailed { at: x });
        }
        if q.signed_distance > self.tube_width {
            return Err(GeometryError::OutsideTube {
                at: x,
                distance: q.signed_distance,
                tube: self.tube_width,
            });
        }
        Ok(q.normal * q.signed_distance)
    }
}
