//! Geometric primitives: points, bounding balls, condensation sets and their
//! delta-discretizations.

use crate::error::{Error, Result};

/// Point in R^n for n <= 3; unused coordinates are zero.
pub type Pt = [f64; 3];

#[inline]
pub fn pt_sub(a: Pt, b: Pt) -> Pt {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn pt_add(a: Pt, b: Pt) -> Pt {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn pt_scale(a: Pt, k: f64) -> Pt {
    [a[0] * k, a[1] * k, a[2] * k]
}

#[inline]
pub fn pt_norm(a: Pt) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

#[inline]
pub fn pt_dist(a: Pt, b: Pt) -> f64 {
    pt_norm(pt_sub(a, b))
}

pub fn pt_from_slice(v: &[f64]) -> Pt {
    let mut p = [0.0; 3];
    p[..v.len()].copy_from_slice(v);
    p
}

/// Compact ball X with S_i(X) inside X and C inside X.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: Pt,
    pub radius: f64,
    pub n: usize,
}

impl Ball {
    pub fn new(center: Pt, radius: f64, n: usize) -> Result<Ball> {
        if radius <= 0.0 || !radius.is_finite() {
            return Err(Error::Domain(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Ball { center, radius, n })
    }

    /// Lower corner of the bounding box, used as the grid origin.
    pub fn corner(&self) -> Pt {
        let mut c = self.center;
        for d in 0..self.n {
            c[d] -= self.radius;
        }
        c
    }

    pub fn contains(&self, p: Pt, tol: f64) -> bool {
        pt_dist(p, self.center) <= self.radius + tol
    }
}

/// One piece of a condensation set.
#[derive(Clone, Debug, PartialEq)]
pub enum Primitive {
    /// Circle boundary in the plane.
    Circle { center: Pt, radius: f64 },
    Segment { a: Pt, b: Pt },
    /// Closed polygonal boundary through the given vertices.
    PolygonBoundary { vertices: Vec<Pt> },
    PointCloud { points: Vec<Pt> },
}

impl Primitive {
    /// Radius of a ball at `center` enclosing this primitive.
    pub fn enclosing_radius_from(&self, center: Pt) -> f64 {
        match self {
            Primitive::Circle { center: c, radius } => pt_dist(*c, center) + radius,
            Primitive::Segment { a, b } => pt_dist(*a, center).max(pt_dist(*b, center)),
            Primitive::PolygonBoundary { vertices } => vertices
                .iter()
                .map(|&v| pt_dist(v, center))
                .fold(0.0, f64::max),
            Primitive::PointCloud { points } => points
                .iter()
                .map(|&p| pt_dist(p, center))
                .fold(0.0, f64::max),
        }
    }

    /// An arbitrary reference point on the primitive.
    pub fn sample_point(&self) -> Pt {
        match self {
            Primitive::Circle { center, radius } => [center[0] + radius, center[1], 0.0],
            Primitive::Segment { a, .. } => *a,
            Primitive::PolygonBoundary { vertices } => vertices[0],
            Primitive::PointCloud { points } => points[0],
        }
    }

    fn rescaled(&self, center: Pt, k: f64) -> Primitive {
        let f = |p: Pt| pt_scale(pt_sub(p, center), k);
        match self {
            Primitive::Circle { center: c, radius } => {
                Primitive::Circle { center: f(*c), radius: radius * k }
            }
            Primitive::Segment { a, b } => Primitive::Segment { a: f(*a), b: f(*b) },
            Primitive::PolygonBoundary { vertices } => Primitive::PolygonBoundary {
                vertices: vertices.iter().map(|&v| f(v)).collect(),
            },
            Primitive::PointCloud { points } => Primitive::PointCloud {
                points: points.iter().map(|&p| f(p)).collect(),
            },
        }
    }
}

/// Non-empty compact condensation set, a union of primitives.
#[derive(Clone, Debug, PartialEq)]
pub struct CondensationSet {
    primitives: Vec<Primitive>,
    n: usize,
}

impl CondensationSet {
    pub fn new(primitives: Vec<Primitive>, n: usize) -> Result<CondensationSet> {
        if primitives.is_empty() {
            return Err(Error::Domain("condensation set must be non-empty".into()));
        }
        for (i, p) in primitives.iter().enumerate() {
            let planar = !matches!(p, Primitive::PointCloud { .. });
            if planar && n != 2 {
                return Err(Error::Unsupported(format!(
                    "condensation primitive {i}: curves are only supported in dimension 2"
                )));
            }
            if let Primitive::PointCloud { points } = p {
                if points.is_empty() {
                    return Err(Error::Domain(format!("condensation primitive {i}: empty point cloud")));
                }
            }
            if let Primitive::Circle { radius, .. } = p {
                if *radius <= 0.0 {
                    return Err(Error::Domain(format!("condensation primitive {i}: circle radius must be positive")));
                }
            }
        }
        Ok(CondensationSet { primitives, n })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    pub fn enclosing_radius_from(&self, center: Pt) -> f64 {
        self.primitives
            .iter()
            .map(|p| p.enclosing_radius_from(center))
            .fold(0.0, f64::max)
    }

    /// Rescales by x -> (x - center) * k.
    pub fn rescaled(&self, center: Pt, k: f64) -> CondensationSet {
        CondensationSet {
            primitives: self.primitives.iter().map(|p| p.rescaled(center, k)).collect(),
            n: self.n,
        }
    }

    /// Points along each primitive with successive spacing at most delta/8.
    /// The margin over delta keeps cells clipped by short arc segments from
    /// being missed when the samples are box-counted at scale delta.
    pub fn discretize(&self, delta: f64) -> Result<Vec<Pt>> {
        if delta <= 0.0 || !delta.is_finite() {
            return Err(Error::Domain(format!("discretization delta must be positive, got {delta}")));
        }
        let step = delta / 8.0;
        let mut out = Vec::new();
        for p in &self.primitives {
            match p {
                Primitive::Circle { center, radius } => {
                    let arc = 2.0 * std::f64::consts::PI * radius;
                    let npts = ((arc / step).ceil() as usize).max(8);
                    for t in 0..npts {
                        let th = 2.0 * std::f64::consts::PI * t as f64 / npts as f64;
                        out.push([center[0] + radius * th.cos(), center[1] + radius * th.sin(), 0.0]);
                    }
                }
                Primitive::Segment { a, b } => sample_segment(*a, *b, step, &mut out),
                Primitive::PolygonBoundary { vertices } => {
                    let m = vertices.len();
                    for i in 0..m {
                        sample_segment(vertices[i], vertices[(i + 1) % m], step, &mut out);
                    }
                }
                Primitive::PointCloud { points } => out.extend_from_slice(points),
            }
        }
        Ok(out)
    }
}

fn sample_segment(a: Pt, b: Pt, step: f64, out: &mut Vec<Pt>) {
    let len = pt_dist(a, b);
    let npts = ((len / step).ceil() as usize).max(1) + 1;
    for t in 0..npts {
        let f = t as f64 / (npts - 1) as f64;
        out.push([
            a[0] + f * (b[0] - a[0]),
            a[1] + f * (b[1] - a[1]),
            a[2] + f * (b[2] - a[2]),
        ]);
    }
}

/// Axis-aligned open rectangle in the plane, the only open-set shape the COSC
/// checker supports.
#[derive(Clone, Debug, PartialEq)]
pub struct Rect {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Rect {
    pub fn new(lo: [f64; 2], hi: [f64; 2]) -> Result<Rect> {
        if lo[0] >= hi[0] || lo[1] >= hi[1] {
            return Err(Error::Domain("rectangle corners must satisfy lo < hi".into()));
        }
        Ok(Rect { lo, hi })
    }

    pub fn corners(&self) -> [Pt; 4] {
        [
            [self.lo[0], self.lo[1], 0.0],
            [self.hi[0], self.lo[1], 0.0],
            [self.hi[0], self.hi[1], 0.0],
            [self.lo[0], self.hi[1], 0.0],
        ]
    }

    pub fn contains(&self, p: Pt, tol: f64) -> bool {
        p[0] >= self.lo[0] - tol
            && p[0] <= self.hi[0] + tol
            && p[1] >= self.lo[1] - tol
            && p[1] <= self.hi[1] + tol
    }

    /// Distance from an interior point to the rectangle boundary.
    pub fn boundary_distance(&self, p: Pt) -> f64 {
        let dx = (p[0] - self.lo[0]).min(self.hi[0] - p[0]);
        let dy = (p[1] - self.lo[1]).min(self.hi[1] - p[1]);
        dx.min(dy)
    }
}

/// Distance from a point to a segment in the plane.
pub fn point_segment_distance(p: Pt, a: Pt, b: Pt) -> f64 {
    let ab = pt_sub(b, a);
    let ap = pt_sub(p, a);
    let len2 = ab[0] * ab[0] + ab[1] * ab[1] + ab[2] * ab[2];
    if len2 == 0.0 {
        return pt_dist(p, a);
    }
    let t = ((ap[0] * ab[0] + ap[1] * ab[1] + ap[2] * ab[2]) / len2).clamp(0.0, 1.0);
    pt_dist(p, pt_add(a, pt_scale(ab, t)))
}
