//! Cell decomposition of the radius-`r` tube about a polygon, the nearest
//! point retraction, and a numerical embeddedness check.
//!
//! Cell `i` is the capsule of radius `r` about edge `e_i` clipped by the
//! angle-bisecting planes at `v_i` and `v_{i+1}`. Cells are intersections of
//! convex sets, so distances between them are found by alternating
//! projection, with each projection computed by Dykstra's algorithm.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{project_to_segment, segment_closest, PointOnKnot, PolygonalKnot, Vec3};
use crate::io::Real;
use crate::thickness;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub point: Vec3,
    pub normal: Vec3,
}

impl Plane {
    pub fn new(point: Vec3, normal: Vec3) -> Self {
        Plane { point, normal: normal.normalized() }
    }

    pub fn signed_distance(&self, x: Vec3) -> f64 {
        (x - self.point).dot(self.normal)
    }

    pub fn project(&self, x: Vec3) -> Vec3 {
        x - self.normal * self.signed_distance(x)
    }
}

/// Plane `P_i` through each vertex bisecting the angle between the incident
/// edges; its normal is the mean of the incoming and outgoing directions, so
/// it points along the knot's orientation. At a straight vertex it is normal
/// to the common direction.
pub fn bisecting_planes(k: &PolygonalKnot) -> Result<Vec<Plane>> {
    (0..k.len())
        .map(|i| {
            k.turning_angle(i)?;
            let n = k.edge_direction(k.prev(i)) + k.edge_direction(i);
            Ok(Plane::new(k.vertex(i), n))
        })
        .collect()
}

/// Nearest point of the knot to `x` and its distance. Ties go to the lowest
/// edge index; a clamped foot is reported as the vertex itself.
pub fn retract(k: &PolygonalKnot, x: Vec3) -> (PointOnKnot, f64) {
    let mut best = (PointOnKnot::vertex(0), f64::INFINITY);
    for e in 0..k.len() {
        let (a, b) = k.edge(e);
        let t = project_to_segment(x, a, b);
        let p = PointOnKnot { edge: e, t };
        let d = x.dist(k.point(p));
        if d < best.1 {
            best = (k.canonical(p), d);
        }
    }
    best
}

pub fn point_in_tube(k: &PolygonalKnot, r: f64, x: Vec3) -> bool {
    retract(k, x).1 <= r
}

/// True when `x` lies in both half-spaces at `v_i` that face away from the
/// incident edges, where the nearest point on `e_{i-1} ∪ e_i` is `v_i`.
pub fn in_vertex_wedge(k: &PolygonalKnot, i: usize, x: Vec3) -> bool {
    let v = k.vertex(i);
    (x - v).dot(k.edge_direction(k.prev(i))) >= 0.0 && (x - v).dot(k.edge_direction(i)) <= 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TubeCell {
    pub edge: usize,
    pub radius: f64,
    pub start: Vec3,
    pub end: Vec3,
    /// `P_i`; the cell lies on its non-negative side.
    pub start_plane: Plane,
    /// `P_{i+1}`; the cell lies on its non-positive side.
    pub end_plane: Plane,
}

const DYKSTRA_TOL: f64 = 1e-13;
const DYKSTRA_MAX_ITER: usize = 500;

impl TubeCell {
    fn scale(&self) -> f64 {
        self.radius.max(self.start.dist(self.end))
    }

    pub fn contains(&self, x: Vec3, tol: f64) -> bool {
        let slack = tol * self.scale();
        self.core_distance(x) <= self.radius + slack
            && self.start_plane.signed_distance(x) >= -slack
            && self.end_plane.signed_distance(x) <= slack
    }

    pub fn core_distance(&self, x: Vec3) -> f64 {
        x.dist(self.start.lerp(self.end, project_to_segment(x, self.start, self.end)))
    }

    fn project_capsule(&self, x: Vec3) -> Vec3 {
        let c = self.start.lerp(self.end, project_to_segment(x, self.start, self.end));
        let d = x.dist(c);
        if d <= self.radius {
            x
        } else {
            c + (x - c) * (self.radius / d)
        }
    }

    fn project_start(&self, x: Vec3) -> Vec3 {
        if self.start_plane.signed_distance(x) >= 0.0 {
            x
        } else {
            self.start_plane.project(x)
        }
    }

    fn project_end(&self, x: Vec3) -> Vec3 {
        if self.end_plane.signed_distance(x) <= 0.0 {
            x
        } else {
            self.end_plane.project(x)
        }
    }

    /// Euclidean projection onto the cell.
    pub fn project(&self, x: Vec3) -> Vec3 {
        if self.contains(x, 0.0) {
            return x;
        }
        let tol = DYKSTRA_TOL * self.scale();
        let mut y = x;
        let mut inc = [Vec3::ZERO; 3];
        for _ in 0..DYKSTRA_MAX_ITER {
            let before = y;
            for (s, inc_s) in inc.iter_mut().enumerate() {
                let z = y + *inc_s;
                let p = match s {
                    0 => self.project_capsule(z),
                    1 => self.project_start(z),
                    _ => self.project_end(z),
                };
                *inc_s = z - p;
                y = p;
            }
            if y.dist(before) <= tol {
                break;
            }
        }
        y
    }

    /// Semi-axes `(minor, major)` of the ellipse cut from the cylinder about
    /// `e_i` by the end plane.
    pub fn end_face_axes(&self) -> (f64, f64) {
        let u = (self.end - self.start).normalized();
        let cos = u.dot(self.end_plane.normal).abs();
        (self.radius, self.radius / cos)
    }

    /// Point on the half-ellipse face in the end plane at parameter
    /// `phi ∈ [0, pi]`. The major axis points back along the edge.
    pub fn end_face_point(&self, phi: f64) -> Vec3 {
        let n = self.end_plane.normal;
        let u = (self.end - self.start).normalized();
        let (minor, major) = self.end_face_axes();
        let along = u - n * u.dot(n);
        let w1 = if along.norm() > 1e-12 { along.normalized() } else { n.any_perpendicular() };
        let w2 = n.cross(w1);
        self.end + w1 * (-major * phi.sin()) + w2 * (minor * phi.cos())
    }
}

fn cells_unchecked(k: &PolygonalKnot, r: f64) -> Result<Vec<TubeCell>> {
    let planes = bisecting_planes(k)?;
    Ok((0..k.len())
        .map(|i| {
            let (a, b) = k.edge(i);
            TubeCell {
                edge: i,
                radius: r,
                start: a,
                end: b,
                start_plane: planes[i],
                end_plane: planes[k.next(i)],
            }
        })
        .collect())
}

/// The `n` tube cells for `0 < r < MinRad(K)`.
pub fn build_cells(k: &PolygonalKnot, r: f64) -> Result<Vec<TubeCell>> {
    if !(r > 0.0) {
        return Err(Error::InvalidInput(format!("tube radius must be positive, got {r}")));
    }
    let (minrad, _) = thickness::minrad(k)?;
    if r >= minrad {
        return Err(Error::RadiusExceedsMinRad { radius: r, minrad });
    }
    cells_unchecked(k, r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub cells: (usize, usize),
    pub points: (Vec3, Vec3),
    pub distance: Real,
    pub midpoint: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub embedded: bool,
    pub radius: Real,
    pub pairs_checked: usize,
    pub witness: Option<Witness>,
}

/// Closest points of two cells by alternating projection.
fn cell_distance(a: &TubeCell, b: &TubeCell, max_iter: usize) -> (Vec3, Vec3, f64) {
    let c = segment_closest(a.start, a.end, b.start, b.end);
    let mut q = b.project(b.start.lerp(b.end, c.t));
    let mut p = a.project(q);
    let tol = 1e-12 * a.scale().max(b.scale());
    for _ in 0..max_iter {
        let q_next = b.project(p);
        let p_next = a.project(q_next);
        let moved = p_next.dist(p).max(q_next.dist(q));
        p = p_next;
        q = q_next;
        if moved <= tol {
            break;
        }
    }
    (p, q, p.dist(q))
}

fn cyclic_separation(n: usize, i: usize, j: usize) -> usize {
    let d = (j + n - i) % n;
    d.min(n - d)
}

/// Checks pairwise disjointness of non-consecutive tube cells.
///
/// When several pairs overlap, the witness is the pair farthest apart along
/// the knot, then the lowest indices.
///
/// Pairs whose cores are more than `2r` apart are skipped; the rest are
/// resolved by alternating projection with at most `max_iter` rounds. Cells
/// are built for any `r > 0`: past `MinRad` they are still convex, though no
/// longer a decomposition of the tube, and any overlap found is a genuine
/// self-intersection of the tube.
pub fn verify_embedded(k: &PolygonalKnot, r: f64, max_iter: usize) -> Result<Verdict> {
    if !(r > 0.0) {
        return Err(Error::InvalidInput(format!("tube radius must be positive, got {r}")));
    }
    let cells = cells_unchecked(k, r)?;
    let n = k.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 2)..n).map(move |j| (i, j)))
        .filter(|&(i, j)| !(i == 0 && j == n - 1))
        .filter(|&(i, j)| {
            let (a, b) = (&cells[i], &cells[j]);
            segment_closest(a.start, a.end, b.start, b.end).distance <= 2.0 * r
        })
        .collect();
    let touch_tol = 1e-9 * r;
    let results: Vec<(usize, usize, Vec3, Vec3, f64)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (p, q, d) = cell_distance(&cells[i], &cells[j], max_iter.max(1));
            (i, j, p, q, d)
        })
        .collect();
    let witness = results
        .iter()
        .filter(|r| r.4 <= touch_tol)
        .min_by_key(|x| (std::cmp::Reverse(cyclic_separation(n, x.0, x.1)), x.0, x.1))
        .map(|&(i, j, p, q, d)| Witness {
            cells: (i, j),
            points: (p, q),
            distance: Real(d),
            midpoint: (p + q) * 0.5,
        });
    Ok(Verdict { embedded: witness.is_none(), radius: Real(r), pairs_checked: pairs.len(), witness })
}

/// Points on the boundary of each cell along `per_cell` directions from the
/// core midpoint, found by bisection. Returned as `(point, cell index)`.
pub fn boundary_samples(cells: &[TubeCell], per_cell: usize, rng: &mut impl rand::Rng) -> Vec<(Vec3, usize)> {
    use rand_distr::{Distribution, StandardNormal};
    let mut out = Vec::with_capacity(cells.len() * per_cell);
    for (idx, cell) in cells.iter().enumerate() {
        let centre = cell.start.lerp(cell.end, 0.5);
        let reach = cell.start.dist(cell.end) + 2.0 * cell.radius;
        for _ in 0..per_cell {
            let dir = loop {
                let g = Vec3::new(
                    StandardNormal.sample(rng),
                    StandardNormal.sample(rng),
                    StandardNormal.sample(rng),
                );
                if g.norm() > 1e-9 {
                    break g.normalized();
                }
            };
            let (mut lo, mut hi) = (0.0, reach);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if cell.contains(centre + dir * mid, 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push((centre + dir * lo, idx));
        }
    }
    out
}

/// CSV text with header `x,y,z,cell`.
pub fn boundary_csv(samples: &[(Vec3, usize)]) -> String {
    use crate::io::fmt17;
    let mut s = String::from("x,y,z,cell\n");
    for (p, c) in samples {
        s.push_str(&format!("{},{},{},{}\n", fmt17(p.x), fmt17(p.y), fmt17(p.z), c));
    }
    s
}
