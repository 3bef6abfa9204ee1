//! Closed polygons in R^3 and the distance primitives everything else is
//! built on.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used to call two consecutive edge directions opposite.
const ANTI_PARALLEL_TOL: f64 = 1e-12;

/// `md(K)` must exceed this multiple of the arclength for `K` to count as
/// embedded.
pub const EMBED_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    #[serde(with = "crate::io::real17")]
    pub x: f64,
    #[serde(with = "crate::io::real17")]
    pub y: f64,
    #[serde(with = "crate::io::real17")]
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn dist(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    /// Unit vector in the same direction; the zero vector maps to itself.
    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        if n > 0.0 {
            self / n
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    #[inline]
    pub fn lerp(self, o: Vec3, t: f64) -> Vec3 {
        self + (o - self) * t
    }

    /// Some unit vector perpendicular to `self` (which must be nonzero).
    pub fn any_perpendicular(self) -> Vec3 {
        let a = if self.x.abs() <= self.y.abs() && self.x.abs() <= self.z.abs() {
            Vec3::new(1.0, 0.0, 0.0)
        } else if self.y.abs() <= self.z.abs() {
            Vec3::new(0.0, 1.0, 0.0)
        } else {
            Vec3::new(0.0, 0.0, 1.0)
        };
        self.cross(a).normalized()
    }

    /// Rotate about the unit axis `axis` (through the origin) by `angle`.
    pub fn rotate_about(self, axis: Vec3, angle: f64) -> Vec3 {
        let (s, c) = angle.sin_cos();
        self * c + axis.cross(self) * s + axis * (axis.dot(self) * (1.0 - c))
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Angle between two nonzero vectors, in `[0, pi]`.
#[inline]
pub fn angle_between(a: Vec3, b: Vec3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

/// A point on a polygon, addressed by edge index and a fraction along that
/// edge. Vertices are canonically `(i, 0.0)` on their outgoing edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointOnKnot {
    pub edge: usize,
    #[serde(with = "crate::io::real17")]
    pub t: f64,
}

impl PointOnKnot {
    pub fn vertex(i: usize) -> Self {
        PointOnKnot { edge: i, t: 0.0 }
    }

    pub fn is_vertex(&self) -> bool {
        self.t == 0.0
    }
}

/// Closest points between two closed segments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentClosest {
    pub distance: f64,
    /// Parameter along the first segment, in `[0, 1]`.
    pub s: f64,
    /// Parameter along the second segment, in `[0, 1]`.
    pub t: f64,
}

/// Exact closest points between segments `[a0, a1]` and `[b0, b1]`.
///
/// Zero-length segments are treated as points. Parallel segments pick the
/// clamped solution with the smallest `s`.
pub fn segment_closest(a0: Vec3, a1: Vec3, b0: Vec3, b1: Vec3) -> SegmentClosest {
    let d1 = a1 - a0;
    let d2 = b1 - b0;
    let r = a0 - b0;
    let a = d1.norm_sq();
    let e = d2.norm_sq();
    let f = d2.dot(r);

    let (s, t) = if a <= f64::MIN_POSITIVE && e <= f64::MIN_POSITIVE {
        (0.0, 0.0)
    } else if a <= f64::MIN_POSITIVE {
        (0.0, (f / e).clamp(0.0, 1.0))
    } else {
        let c = d1.dot(r);
        if e <= f64::MIN_POSITIVE {
            ((-c / a).clamp(0.0, 1.0), 0.0)
        } else {
            let b = d1.dot(d2);
            let denom = a * e - b * b;
            let mut s = if denom > 1e-14 * a * e {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t = (b * s + f) / e;
            if t < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            }
            (s, t)
        }
    };
    let p = if s >= 1.0 { a1 } else { a0 + d1 * s };
    let q = if t >= 1.0 { b1 } else { b0 + d2 * t };
    SegmentClosest { distance: p.dist(q), s, t }
}

pub fn segment_distance(a0: Vec3, a1: Vec3, b0: Vec3, b1: Vec3) -> f64 {
    segment_closest(a0, a1, b0, b1).distance
}

/// Parameter of the closest point to `p` on segment `[a, b]`, clamped.
pub fn project_to_segment(p: Vec3, a: Vec3, b: Vec3) -> f64 {
    let d = b - a;
    let l2 = d.norm_sq();
    if l2 == 0.0 {
        return 0.0;
    }
    ((p - a).dot(d) / l2).clamp(0.0, 1.0)
}

/// Realizing data for `md(K)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinDistance {
    pub distance: f64,
    pub edges: (usize, usize),
    pub points: (PointOnKnot, PointOnKnot),
}

/// Ordered closed sequence of vertices; edge `i` joins `v_i` to `v_{i+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonalKnot {
    vertices: Vec<Vec3>,
}

impl PolygonalKnot {
    /// Validates the structural invariants: at least three finite vertices
    /// and no zero-length edge. Embeddedness is checked separately by
    /// [`PolygonalKnot::check_embedded`].
    pub fn new(vertices: Vec<Vec3>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidInput(format!(
                "a closed polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if let Some(i) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("vertex {i} is not finite")));
        }
        let n = vertices.len();
        for i in 0..n {
            if vertices[i] == vertices[(i + 1) % n] {
                return Err(Error::InvalidInput(format!("edge {i} has zero length")));
            }
        }
        Ok(PolygonalKnot { vertices })
    }

    /// Like [`PolygonalKnot::new`] but additionally requires embeddedness.
    pub fn new_embedded(vertices: Vec<Vec3>) -> Result<Self> {
        let k = Self::new(vertices)?;
        k.check_embedded()?;
        Ok(k)
    }

    /// `n` equally spaced vertices on a circle in the `z = 0` plane,
    /// starting at angle zero.
    pub fn regular_ngon(n: usize, circumradius: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidInput(format!("regular n-gon needs n >= 3, got {n}")));
        }
        if !(circumradius > 0.0 && circumradius.is_finite()) {
            return Err(Error::InvalidInput("circumradius must be positive".into()));
        }
        let vertices = (0..n)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n as f64;
                Vec3::new(circumradius * a.cos(), circumradius * a.sin(), 0.0)
            })
            .collect();
        Self::new(vertices)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Vec3> {
        self.vertices
    }

    /// Vertex with cyclic indexing.
    #[inline]
    pub fn vertex(&self, i: usize) -> Vec3 {
        self.vertices[i % self.vertices.len()]
    }

    #[inline]
    pub fn prev(&self, i: usize) -> usize {
        (i + self.len() - 1) % self.len()
    }

    #[inline]
    pub fn next(&self, i: usize) -> usize {
        (i + 1) % self.len()
    }

    #[inline]
    pub fn edge(&self, i: usize) -> (Vec3, Vec3) {
        (self.vertex(i), self.vertex(i + 1))
    }

    #[inline]
    pub fn edge_vector(&self, i: usize) -> Vec3 {
        self.vertex(i + 1) - self.vertex(i)
    }

    #[inline]
    pub fn edge_length(&self, i: usize) -> f64 {
        self.edge_vector(i).norm()
    }

    #[inline]
    pub fn edge_direction(&self, i: usize) -> Vec3 {
        self.edge_vector(i).normalized()
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.edge_length(i)).collect()
    }

    pub fn arclength(&self) -> f64 {
        (0..self.len()).map(|i| self.edge_length(i)).sum()
    }

    pub fn min_edge(&self) -> f64 {
        (0..self.len()).map(|i| self.edge_length(i)).fold(f64::INFINITY, f64::min)
    }

    pub fn mean_edge(&self) -> f64 {
        self.arclength() / self.len() as f64
    }

    /// Largest relative deviation of an edge length from the mean.
    pub fn equilateral_deviation(&self) -> f64 {
        let mean = self.mean_edge();
        (0..self.len())
            .map(|i| (self.edge_length(i) - mean).abs() / mean)
            .fold(0.0, f64::max)
    }

    pub fn is_equilateral(&self, tol: f64) -> bool {
        self.equilateral_deviation() <= tol
    }

    /// Two edges are adjacent when they share a vertex (an edge is adjacent
    /// to itself).
    #[inline]
    pub fn edges_adjacent(&self, i: usize, j: usize) -> bool {
        let n = self.len();
        let d = (i + n - j) % n;
        d == 0 || d == 1 || d == n - 1
    }

    /// Position of a point on the knot. `t == 1` yields the far vertex
    /// exactly.
    pub fn point(&self, p: PointOnKnot) -> Vec3 {
        let (a, b) = self.edge(p.edge);
        if p.t <= 0.0 {
            a
        } else if p.t >= 1.0 {
            b
        } else {
            a.lerp(b, p.t)
        }
    }

    /// Canonical form of a point: `t == 1` is re-expressed as the start of the
    /// next edge.
    pub fn canonical(&self, p: PointOnKnot) -> PointOnKnot {
        if p.t >= 1.0 {
            PointOnKnot::vertex(self.next(p.edge))
        } else {
            PointOnKnot { edge: p.edge % self.len(), t: p.t.max(0.0) }
        }
    }

    /// Exterior angle at vertex `i` between the directions of `e_{i-1}` and
    /// `e_i`, in `[0, pi)`.
    pub fn turning_angle(&self, i: usize) -> Result<f64> {
        let a = self.edge_vector(self.prev(i));
        let b = self.edge_vector(i);
        let c = a.cross(b).norm();
        let d = a.dot(b);
        if d < 0.0 && c <= ANTI_PARALLEL_TOL * a.norm() * b.norm() {
            return Err(Error::AntiParallelEdges { vertex: i % self.len() });
        }
        Ok(c.atan2(d))
    }

    pub fn turning_angles(&self) -> Result<Vec<f64>> {
        (0..self.len()).map(|i| self.turning_angle(i)).collect()
    }

    /// Sum of all turning angles (total curvature of the closed polygon).
    pub fn total_turning(&self) -> Result<f64> {
        Ok(self.turning_angles()?.iter().sum())
    }

    /// Minimum over the two arcs joining `x` and `y` of the summed turning
    /// angles, counting the angle at `x` and `y` when they are vertices.
    pub fn total_curvature(&self, x: PointOnKnot, y: PointOnKnot) -> Result<f64> {
        let angles = self.turning_angles()?;
        Ok(total_curvature_with(&angles, self.canonical(x), self.canonical(y)))
    }

    /// Minimum distance between non-adjacent edges with the realizing pair.
    /// Triangles have no non-adjacent pairs and report `+inf`.
    pub fn min_distance(&self) -> MinDistance {
        let n = self.len();
        let mut best = MinDistance {
            distance: f64::INFINITY,
            edges: (0, 0),
            points: (PointOnKnot::vertex(0), PointOnKnot::vertex(0)),
        };
        for i in 0..n {
            let (a0, a1) = self.edge(i);
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (b0, b1) = self.edge(j);
                let c = segment_closest(a0, a1, b0, b1);
                if c.distance < best.distance {
                    best = MinDistance {
                        distance: c.distance,
                        edges: (i, j),
                        points: (
                            self.canonical(PointOnKnot { edge: i, t: c.s }),
                            self.canonical(PointOnKnot { edge: j, t: c.t }),
                        ),
                    };
                }
            }
        }
        best
    }

    /// `MD(K)`: minimum distance between non-adjacent edges; errors with
    /// `NotEmbedded` when it vanishes relative to the arclength.
    pub fn md(&self) -> Result<MinDistance> {
        let m = self.min_distance();
        if m.distance <= EMBED_REL_TOL * self.arclength() {
            return Err(Error::NotEmbedded { distance: m.distance });
        }
        Ok(m)
    }

    pub fn check_embedded(&self) -> Result<()> {
        self.turning_angles()?;
        self.md().map(|_| ())
    }

    pub fn scaled(&self, s: f64) -> PolygonalKnot {
        PolygonalKnot { vertices: self.vertices.iter().map(|&v| v * s).collect() }
    }

    pub fn translated(&self, d: Vec3) -> PolygonalKnot {
        PolygonalKnot { vertices: self.vertices.iter().map(|&v| v + d).collect() }
    }

    /// Reflection through the `z = 0` plane.
    pub fn mirrored(&self) -> PolygonalKnot {
        PolygonalKnot {
            vertices: self.vertices.iter().map(|v| Vec3::new(v.x, v.y, -v.z)).collect(),
        }
    }

    pub fn centroid(&self) -> Vec3 {
        let s = self.vertices.iter().fold(Vec3::ZERO, |acc, &v| acc + v);
        s / self.len() as f64
    }
}

/// Total curvature between canonical points given precomputed turning angles.
pub(crate) fn total_curvature_with(angles: &[f64], x: PointOnKnot, y: PointOnKnot) -> f64 {
    let n = angles.len() as f64;
    let pos = |p: PointOnKnot| p.edge as f64 + p.t;
    // Sum of angles at vertices met walking forward from `a` to `b`, both
    // ends inclusive.
    let arc = |a: PointOnKnot, b: PointOnKnot| -> f64 {
        let start = pos(a);
        let span = (pos(b) - start).rem_euclid(n);
        angles
            .iter()
            .enumerate()
            .filter(|(k, _)| (*k as f64 - start).rem_euclid(n) <= span)
            .map(|(_, a)| a)
            .sum()
    };
    arc(x, y).min(arc(y, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn square() -> PolygonalKnot {
        PolygonalKnot::regular_ngon(4, 1.0).unwrap()
    }

    #[test]
    fn regular_ngon_edges() {
        assert_abs_diff_eq!(square().edge_length(0), std::f64::consts::SQRT_2, epsilon = 1e-7);
        let k9 = PolygonalKnot::regular_ngon(9, 1.0).unwrap();
        assert_abs_diff_eq!(k9.edge_length(3), 0.684_040_3, epsilon = 1e-7);
        let tri = PolygonalKnot::regular_ngon(3, 2.0).unwrap();
        assert_abs_diff_eq!(tri.edge_length(1), 3.464_101_6, epsilon = 1e-7);
        assert!(PolygonalKnot::regular_ngon(2, 1.0).is_err());
        assert!(PolygonalKnot::regular_ngon(5, 0.0).is_err());
    }

    #[test]
    fn aggregates() {
        let sq = square();
        assert_abs_diff_eq!(sq.arclength(), 5.656_854_2, epsilon = 1e-7);
        assert_abs_diff_eq!(sq.min_edge(), std::f64::consts::SQRT_2, epsilon = 1e-7);
        assert!(sq.is_equilateral(1e-9));
        let k9 = PolygonalKnot::regular_ngon(9, 1.0).unwrap();
        assert_abs_diff_eq!(k9.arclength(), 6.156_362_4, epsilon = 1e-6);

        let mut v = sq.vertices().to_vec();
        v[1].x += 0.1;
        assert!(!PolygonalKnot::new(v).unwrap().is_equilateral(1e-9));
    }

    #[test]
    fn rejects_bad_polygons() {
        assert!(PolygonalKnot::new(vec![Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0)]).is_err());
        let dup = vec![Vec3::ZERO, Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0)];
        assert!(PolygonalKnot::new(dup).is_err());
        let nan = vec![Vec3::ZERO, Vec3::new(f64::NAN, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)];
        assert!(PolygonalKnot::new(nan).is_err());
    }

    #[test]
    fn turning_angles() {
        let k32 = PolygonalKnot::regular_ngon(32, 1.0).unwrap();
        for i in 0..32 {
            assert_abs_diff_eq!(k32.turning_angle(i).unwrap(), 0.196_349_5, epsilon = 1e-7);
        }
        for i in 0..4 {
            assert_abs_diff_eq!(square().turning_angle(i).unwrap(), PI / 2.0, epsilon = 1e-12);
        }
        let straight = PolygonalKnot::new(vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
        ])
        .unwrap();
        assert_eq!(straight.turning_angle(1).unwrap(), 0.0);
    }

    #[test]
    fn anti_parallel_rejected() {
        let k = PolygonalKnot::new(vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
        ])
        .unwrap();
        assert_eq!(k.turning_angle(1), Err(Error::AntiParallelEdges { vertex: 1 }));
        assert!(k.check_embedded().is_err());
    }

    #[test]
    fn segment_distance_examples() {
        let o = Vec3::ZERO;
        let x = Vec3::new(1.0, 0.0, 0.0);
        assert_abs_diff_eq!(
            segment_distance(o, x, Vec3::new(0.0, 1.0, 0.0), Vec3::new(1.0, 1.0, 0.0)),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            segment_distance(o, x, Vec3::new(2.0, 0.0, 0.0), Vec3::new(3.0, 0.0, 0.0)),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            segment_distance(o, x, Vec3::new(0.5, 0.5, 1.0), Vec3::new(0.5, -0.5, 1.0)),
            1.0,
            epsilon = 1e-15
        );
        // crossing segments
        assert_eq!(
            segment_distance(o, x, Vec3::new(0.5, -1.0, 0.0), Vec3::new(0.5, 1.0, 0.0)),
            0.0
        );
        // point-like segment
        assert_abs_diff_eq!(
            segment_distance(o, x, Vec3::new(0.5, 2.0, 0.0), Vec3::new(0.5, 2.0, 0.0)),
            2.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn md_examples() {
        let m = square().md().unwrap();
        assert_abs_diff_eq!(m.distance, std::f64::consts::SQRT_2, epsilon = 1e-7);
        // e_0 and e_2 are non-adjacent and come within one edge length
        let hex = PolygonalKnot::regular_ngon(6, 1.0).unwrap();
        let m = hex.md().unwrap();
        assert_abs_diff_eq!(m.distance, 1.0, epsilon = 1e-12);
        assert!(m.distance <= hex.min_edge() + 1e-15);
        let tri = PolygonalKnot::regular_ngon(3, 1.0).unwrap();
        assert!(tri.min_distance().distance.is_infinite());
    }

    #[test]
    fn md_detects_touching_edges() {
        // figure-of-eight shaped planar polygon whose edges cross
        let k = PolygonalKnot::new(vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ])
        .unwrap();
        assert!(matches!(k.md(), Err(Error::NotEmbedded { .. })));
    }

    #[test]
    fn total_curvature_examples() {
        let k8 = PolygonalKnot::regular_ngon(8, 1.0).unwrap();
        let mid = |e| PointOnKnot { edge: e, t: 0.5 };
        assert_abs_diff_eq!(
            k8.total_curvature(mid(0), mid(1)).unwrap(),
            std::f64::consts::FRAC_PI_4,
            epsilon = 1e-7
        );
        assert_abs_diff_eq!(k8.total_curvature(mid(2), mid(6)).unwrap(), PI, epsilon = 1e-12);
        // vertex endpoints count their own angle
        assert_abs_diff_eq!(
            k8.total_curvature(PointOnKnot::vertex(0), PointOnKnot::vertex(1)).unwrap(),
            PI / 2.0,
            epsilon = 1e-12
        );
        // same edge, no vertex in between on the short arc
        assert_abs_diff_eq!(
            k8.total_curvature(PointOnKnot { edge: 3, t: 0.2 }, PointOnKnot { edge: 3, t: 0.7 })
                .unwrap(),
            0.0,
            epsilon = 1e-15
        );
        for n in [3, 7, 32, 100] {
            let k = PolygonalKnot::regular_ngon(n, 1.0).unwrap();
            assert_abs_diff_eq!(k.total_turning().unwrap(), 2.0 * PI, epsilon = 1e-12);
        }
    }
}
