//! Polygonal thickness: `Rad`, `MinRad`, the doubly/singly critical
//! self-distances, the thickness radius `R(K)` and ropelength.
//!
//! Critical self-distances are found by enumerating a finite candidate set.
//! The distance function `d_x(y) = |x - y|` restricted to one edge is the
//! square root of a convex quadratic, so its turning points are perpendicular
//! feet in edge interiors or vertices. Candidates are therefore:
//!
//! * vertex/vertex pairs,
//! * a vertex and its perpendicular foot on another edge,
//! * common perpendiculars of two edges (the overlap midpoint for parallel
//!   edges),
//! * for the singly critical distance only, points `x` on an edge lying on a
//!   plane through a vertex normal to one of its edges. There the foot of `x`
//!   leaves an edge interior and the local minimum disappears; the
//!   self-distance is the infimum over the singly critical set, and these
//!   limit pairs realize it.
//!
//! Each candidate is then classified with exact one-sided slopes of the
//! distance function at the candidate point.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geom::{total_curvature_with, PointOnKnot, PolygonalKnot, Vec3};
use crate::io::Real;

/// Slopes within this magnitude count as zero; ties are classified as turning
/// points (and as both minimum and maximum at a vertex), which can only lower
/// a reported self-distance.
pub const SLOPE_TOL: f64 = 1e-9;

/// Feet closer than this (in edge parameter) to an edge end are left to the
/// vertex candidates.
const FOOT_EPS: f64 = 1e-12;

/// `min(|e_{i-1}|, |e_i|) / (2 tan(angle(v_i)/2))`; `+inf` at a straight
/// vertex.
pub fn rad_vertex(k: &PolygonalKnot, i: usize) -> Result<f64> {
    let angle = k.turning_angle(i)?;
    if angle == 0.0 {
        return Ok(f64::INFINITY);
    }
    let shorter = k.edge_length(k.prev(i)).min(k.edge_length(i));
    Ok(shorter / (2.0 * (angle / 2.0).tan()))
}

/// `MinRad(K)` and the lowest vertex index realizing it.
pub fn minrad(k: &PolygonalKnot) -> Result<(f64, usize)> {
    let mut best = (f64::INFINITY, 0);
    for i in 0..k.len() {
        let r = rad_vertex(k, i)?;
        if r < best.0 {
            best = (r, i);
        }
    }
    Ok(best)
}

/// A pair of points on the knot realizing a self-distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPair {
    pub x: PointOnKnot,
    pub y: PointOnKnot,
    pub distance: Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witnesses {
    pub minrad_vertex: usize,
    pub dcsd: Option<CriticalPair>,
    pub scsd: Option<CriticalPair>,
    pub mdcsd: Option<CriticalPair>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThicknessReport {
    pub minrad: Real,
    pub dcsd: Real,
    pub scsd: Real,
    pub mdcsd: Real,
    pub radius: Real,
    pub ropelength: Real,
    pub witnesses: Witnesses,
}

/// One-sided behaviour of `d_x` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Turning {
    min: bool,
    max: bool,
}

impl Turning {
    fn any(self) -> bool {
        self.min || self.max
    }
}

/// Precomputed edge data for repeated distance-function queries.
struct Frame<'a> {
    knot: &'a PolygonalKnot,
    dirs: Vec<Vec3>,
}

impl<'a> Frame<'a> {
    fn new(knot: &'a PolygonalKnot) -> Self {
        let dirs = (0..knot.len()).map(|i| knot.edge_direction(i)).collect();
        Frame { knot, dirs }
    }

    fn n(&self) -> usize {
        self.knot.len()
    }

    /// Classify `y` as a turning point of `d_x`.
    fn turning(&self, x: Vec3, y: PointOnKnot) -> Turning {
        let py = self.knot.point(y);
        let diff = py - x;
        let d = diff.norm();
        if d == 0.0 {
            return Turning { min: false, max: false };
        }
        if y.is_vertex() {
            let incoming = diff.dot(self.dirs[self.knot.prev(y.edge)]) / d;
            let outgoing = diff.dot(self.dirs[y.edge]) / d;
            Turning {
                min: incoming <= SLOPE_TOL && outgoing >= -SLOPE_TOL,
                max: incoming >= -SLOPE_TOL && outgoing <= SLOPE_TOL,
            }
        } else {
            // d_x is strictly convex along an edge interior: a flat slope is a
            // minimum, never a maximum.
            let slope = diff.dot(self.dirs[y.edge]) / d;
            Turning { min: slope.abs() <= SLOPE_TOL, max: false }
        }
    }

    /// Edges containing a point (two for a vertex).
    fn edges_of(&self, p: PointOnKnot) -> [usize; 2] {
        if p.is_vertex() {
            [self.knot.prev(p.edge), p.edge]
        } else {
            [p.edge, p.edge]
        }
    }

    /// True when some edge through `x` is non-adjacent to some edge through
    /// `y`.
    fn on_non_adjacent_edges(&self, x: PointOnKnot, y: PointOnKnot) -> bool {
        let ex = self.edges_of(x);
        let ey = self.edges_of(y);
        ex.iter().any(|&a| ey.iter().any(|&b| !self.knot.edges_adjacent(a, b)))
    }

    fn foot(&self, p: Vec3, edge: usize) -> Option<f64> {
        let (a, b) = self.knot.edge(edge);
        let d = b - a;
        let t = (p - a).dot(d) / d.norm_sq();
        (t > FOOT_EPS && t < 1.0 - FOOT_EPS).then_some(t)
    }

    /// Interior points of edges `i` and `j` realizing a common perpendicular.
    fn common_perpendicular(&self, i: usize, j: usize) -> Option<(f64, f64)> {
        let (a0, a1) = self.knot.edge(i);
        let (b0, b1) = self.knot.edge(j);
        let d1 = a1 - a0;
        let d2 = b1 - b0;
        let r = a0 - b0;
        let a = d1.norm_sq();
        let e = d2.norm_sq();
        let b = d1.dot(d2);
        let c = d1.dot(r);
        let f = d2.dot(r);
        let denom = a * e - b * b;
        let interior = |t: f64| t > FOOT_EPS && t < 1.0 - FOOT_EPS;
        if denom > 1e-12 * a * e {
            let s = (b * f - c * e) / denom;
            let t = (a * f - b * c) / denom;
            (interior(s) && interior(t)).then_some((s, t))
        } else {
            // Parallel: every point of the overlap is a common foot. Use the
            // overlap midpoint.
            let t_at = |s: f64| (b * s + f) / e;
            let (t0, t1) = (t_at(0.0), t_at(1.0));
            let (lo_t, hi_t) = (t0.min(t1).max(0.0), t0.max(t1).min(1.0));
            if hi_t - lo_t <= FOOT_EPS {
                return None;
            }
            let t = 0.5 * (lo_t + hi_t);
            let s = (b * t - c) / a;
            (interior(s) && interior(t)).then_some((s, t))
        }
    }
}

/// Enumerate candidate pairs whose members are both vertices or
/// perpendicular feet.
fn candidates(f: &Frame) -> Vec<(PointOnKnot, PointOnKnot)> {
    let n = f.n();
    let k = f.knot;
    let mut out = Vec::with_capacity(3 * n * n);
    for i in 0..n {
        for j in (i + 1)..n {
            out.push((PointOnKnot::vertex(i), PointOnKnot::vertex(j)));
        }
    }
    for i in 0..n {
        let v = k.vertex(i);
        for j in 0..n {
            if j == i || j == k.prev(i) {
                continue;
            }
            if let Some(t) = f.foot(v, j) {
                out.push((PointOnKnot::vertex(i), PointOnKnot { edge: j, t }));
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if k.edges_adjacent(i, j) {
                continue;
            }
            if let Some((s, t)) = f.common_perpendicular(i, j) {
                out.push((PointOnKnot { edge: i, t: s }, PointOnKnot { edge: j, t }));
            }
        }
    }
    out
}

/// Limit pairs of the singly critical set: `x` on some edge lies on the plane
/// through vertex `v` normal to an edge `e` incident to `v`. Moving `x`
/// slightly to one side puts its foot on `e` into the interior of `e`, so
/// `(x, v)` is a limit of singly critical pairs with the foot on `e`.
/// Returns `(x, v, e)`.
fn foot_exit_candidates(f: &Frame) -> Vec<(PointOnKnot, usize, usize)> {
    let n = f.n();
    let k = f.knot;
    let mut out = Vec::new();
    for vi in 0..n {
        let v = k.vertex(vi);
        for foot_edge in [k.prev(vi), vi] {
            let normal = f.dirs[foot_edge];
            for e in 0..n {
                if k.edges_adjacent(e, foot_edge) {
                    continue;
                }
                let (a, b) = k.edge(e);
                let da = (a - v).dot(normal);
                let db = (b - v).dot(normal);
                if da == db {
                    continue;
                }
                let t = da / (da - db);
                if t > FOOT_EPS && t < 1.0 - FOOT_EPS {
                    out.push((PointOnKnot { edge: e, t }, vi, foot_edge));
                }
            }
        }
    }
    out
}

/// The three critical self-distances with witnesses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfDistances {
    pub dcsd: Option<CriticalPair>,
    pub scsd: Option<CriticalPair>,
    pub mdcsd: Option<CriticalPair>,
}

impl SelfDistances {
    pub fn dcsd(&self) -> f64 {
        self.dcsd.map_or(f64::INFINITY, |p| p.distance.0)
    }
    pub fn scsd(&self) -> f64 {
        self.scsd.map_or(f64::INFINITY, |p| p.distance.0)
    }
    pub fn mdcsd(&self) -> f64 {
        self.mdcsd.map_or(f64::INFINITY, |p| p.distance.0)
    }
}

fn keep_min(slot: &mut Option<CriticalPair>, x: PointOnKnot, y: PointOnKnot, d: f64) {
    if slot.is_none_or(|p| d < p.distance.0) {
        *slot = Some(CriticalPair { x, y, distance: Real(d) });
    }
}

/// Compute `dcsd`, `scsd` and `mdcsd` in one pass over the candidates.
pub fn self_distances(k: &PolygonalKnot) -> Result<SelfDistances> {
    k.turning_angles()?;
    let f = Frame::new(k);
    let mut out = SelfDistances { dcsd: None, scsd: None, mdcsd: None };
    for (a, b) in candidates(&f) {
        let pa = k.point(a);
        let pb = k.point(b);
        let d = pa.dist(pb);
        if d == 0.0 {
            continue;
        }
        let b_for_a = f.turning(pa, b);
        let a_for_b = f.turning(pb, a);
        if b_for_a.any() && a_for_b.any() {
            keep_min(&mut out.dcsd, a, b, d);
            if b_for_a.min && a_for_b.min {
                keep_min(&mut out.mdcsd, a, b, d);
            }
        }
        if f.on_non_adjacent_edges(a, b) {
            if b_for_a.min {
                keep_min(&mut out.scsd, a, b, d);
            }
            if a_for_b.min {
                keep_min(&mut out.scsd, b, a, d);
            }
        }
    }
    for (x, vi, _) in foot_exit_candidates(&f) {
        let d = k.point(x).dist(k.vertex(vi));
        keep_min(&mut out.scsd, x, PointOnKnot::vertex(vi), d);
    }
    Ok(out)
}

pub fn dcsd(k: &PolygonalKnot) -> Result<f64> {
    Ok(self_distances(k)?.dcsd())
}

pub fn scsd(k: &PolygonalKnot) -> Result<f64> {
    Ok(self_distances(k)?.scsd())
}

pub fn mdcsd(k: &PolygonalKnot) -> Result<f64> {
    Ok(self_distances(k)?.mdcsd())
}

/// `R(K) = min(MinRad(K), dcsd(K)/2)`.
pub fn thickness_radius(k: &PolygonalKnot) -> Result<f64> {
    let (mr, _) = minrad(k)?;
    Ok(mr.min(dcsd(k)? / 2.0))
}

pub fn ropelength(k: &PolygonalKnot) -> Result<f64> {
    Ok(k.arclength() / thickness_radius(k)?)
}

pub fn report(k: &PolygonalKnot) -> Result<ThicknessReport> {
    let (mr, mr_vertex) = minrad(k)?;
    let sd = self_distances(k)?;
    let radius = mr.min(sd.dcsd() / 2.0);
    Ok(ThicknessReport {
        minrad: Real(mr),
        dcsd: Real(sd.dcsd()),
        scsd: Real(sd.scsd()),
        mdcsd: Real(sd.mdcsd()),
        radius: Real(radius),
        ropelength: Real(k.arclength() / radius),
        witnesses: Witnesses {
            minrad_vertex: mr_vertex,
            dcsd: sd.dcsd,
            scsd: sd.scsd,
            mdcsd: sd.mdcsd,
        },
    })
}

/// Sampled form of the characterization
/// `R(K) = min(MinRad, min{|x-y|/2 : tc(x,y) >= pi})`.
///
/// Only sampled pairs are examined, so the result approaches the thickness
/// radius from above as `samples_per_edge` grows.
pub fn tc_radius(k: &PolygonalKnot, samples_per_edge: usize) -> Result<f64> {
    if samples_per_edge < 8 {
        return Err(crate::Error::InvalidInput("tc_radius needs at least 8 samples per edge".into()));
    }
    let (mr, _) = minrad(k)?;
    let angles = k.turning_angles()?;
    let n = k.len();
    let s = samples_per_edge;
    let pts: Vec<PointOnKnot> = (0..n)
        .flat_map(|e| (0..s).map(move |j| PointOnKnot { edge: e, t: j as f64 / s as f64 }))
        .collect();
    let pos: Vec<Vec3> = pts.iter().map(|&p| k.point(p)).collect();

    // prefix[i] = sum of angles[0..i] over a doubled array for cyclic sums.
    let mut prefix = vec![0.0; 2 * n + 1];
    for i in 0..2 * n {
        prefix[i + 1] = prefix[i] + angles[i % n];
    }
    let arc = |a: PointOnKnot, b: PointOnKnot| -> f64 {
        if a.edge == b.edge && !a.is_vertex() && b.t >= a.t {
            return 0.0;
        }
        let first = if a.is_vertex() { a.edge } else { a.edge + 1 };
        let count = (b.edge + n - first % n) % n + 1;
        let start = first % n;
        prefix[start + count] - prefix[start]
    };

    let mut best = f64::INFINITY;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let d = pos[i].dist(pos[j]);
            if d / 2.0 >= best {
                continue;
            }
            let tc = arc(pts[i], pts[j]).min(arc(pts[j], pts[i]));
            if tc >= std::f64::consts::PI {
                best = d / 2.0;
            }
        }
    }
    Ok(mr.min(best))
}

/// Total curvature between two points, reusing precomputed angles.
pub fn total_curvature_between(angles: &[f64], x: PointOnKnot, y: PointOnKnot) -> f64 {
    total_curvature_with(angles, x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn ngon(n: usize) -> PolygonalKnot {
        PolygonalKnot::regular_ngon(n, 1.0).unwrap()
    }

    #[test]
    fn rad_examples() {
        assert_abs_diff_eq!(rad_vertex(&ngon(4), 0).unwrap(), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-7);
        assert_abs_diff_eq!(rad_vertex(&ngon(9), 4).unwrap(), 0.939_692_6, epsilon = 1e-7);
        let straight = PolygonalKnot::new(vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
        ])
        .unwrap();
        assert!(rad_vertex(&straight, 1).unwrap().is_infinite());
    }

    #[test]
    fn minrad_examples() {
        assert_abs_diff_eq!(minrad(&ngon(32)).unwrap().0, 0.995_184_7, epsilon = 1e-7);
        assert_abs_diff_eq!(minrad(&ngon(4)).unwrap().0, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-7);
        let a = minrad(&ngon(7)).unwrap().0;
        let b = minrad(&ngon(7).scaled(3.5)).unwrap().0;
        assert_abs_diff_eq!(b, 3.5 * a, epsilon = 1e-12);
    }

    #[test]
    fn hexagon_self_distances() {
        let sd = self_distances(&ngon(6)).unwrap();
        let r3 = 3f64.sqrt();
        assert_abs_diff_eq!(sd.dcsd(), r3, epsilon = 1e-12);
        assert_abs_diff_eq!(sd.scsd(), r3, epsilon = 1e-12);
        assert_abs_diff_eq!(sd.mdcsd(), r3, epsilon = 1e-12);
    }

    #[test]
    fn square_scsd() {
        assert_abs_diff_eq!(scsd(&ngon(4)).unwrap(), 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn triangle_has_no_minimal_pairs() {
        let sd = self_distances(&ngon(3)).unwrap();
        assert!(sd.mdcsd().is_infinite());
        assert!(sd.scsd().is_infinite());
        assert!(sd.dcsd() <= sd.mdcsd());
        assert_abs_diff_eq!(thickness_radius(&ngon(3)).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn regular_closed_forms() {
        for n in 3..=128 {
            let k = ngon(n);
            let r = thickness_radius(&k).unwrap();
            assert_abs_diff_eq!(r, (PI / n as f64).cos(), epsilon = 1e-12);
            let rope = ropelength(&k).unwrap();
            let expect = 2.0 * n as f64 * (PI / n as f64).tan();
            assert_abs_diff_eq!(rope, expect, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(ropelength(&ngon(4)).unwrap(), 8.0, epsilon = 1e-12);
    }

    #[test]
    fn edge_unit_ratios() {
        let k9 = ngon(9);
        let r = thickness_radius(&k9).unwrap();
        assert_abs_diff_eq!(r, 0.939_692_6, epsilon = 1e-7);
        assert_abs_diff_eq!(r / k9.edge_length(0), 1.3737, epsilon = 5e-5);
        let k11 = ngon(11);
        assert_abs_diff_eq!(
            thickness_radius(&k11).unwrap() / k11.edge_length(0),
            1.7028,
            epsilon = 5e-5
        );
    }

    #[test]
    fn report_invariants() {
        let rep = report(&ngon(9)).unwrap();
        assert_eq!(rep.radius.0, rep.minrad.0.min(rep.dcsd.0 / 2.0));
        assert_abs_diff_eq!(rep.ropelength.0, ngon(9).arclength() / rep.radius.0, epsilon = 1e-12);
        assert!(rep.dcsd.0 / 2.0 >= 0.939_692_6);
        let json = serde_json::to_string(&report(&ngon(3)).unwrap()).unwrap();
        assert!(json.contains(r#""mdcsd":"inf""#), "{json}");
    }

    #[test]
    fn tc_radius_examples() {
        let hex = ngon(6);
        assert_abs_diff_eq!(tc_radius(&hex, 64).unwrap(), 0.866_025_4, epsilon = 1e-3);
        let a = tc_radius(&hex, 16).unwrap();
        let b = tc_radius(&hex.scaled(2.5), 16).unwrap();
        assert_abs_diff_eq!(b / 2.5, a, epsilon = 1e-12);
        assert!(tc_radius(&hex, 4).is_err());
    }
}
