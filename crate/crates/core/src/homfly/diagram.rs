//! Oriented link diagrams as signed Gauss codes, and projection of polygons.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{PolygonalKnot, Vec3};

/// One passage of a strand through a crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Visit {
    pub crossing: usize,
    pub over: bool,
}

/// Each component is the cyclic sequence of crossings met along it. Crossing
/// `c` has sign `signs[c]` (`+1` when the over strand turns anticlockwise
/// onto the under strand, seen from the viewer) and is met exactly twice,
/// once over and once under. `positions` keeps the planar location of each
/// crossing when the diagram came from a projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotDiagram {
    pub components: Vec<Vec<Visit>>,
    pub signs: Vec<i8>,
    pub positions: Vec<[f64; 2]>,
}

impl KnotDiagram {
    pub fn unknot() -> Self {
        KnotDiagram { components: vec![Vec::new()], signs: Vec::new(), positions: Vec::new() }
    }

    pub fn crossing_count(&self) -> usize {
        self.signs.len()
    }

    pub fn writhe(&self) -> i64 {
        self.signs.iter().map(|&s| s as i64).sum()
    }

    /// Checks that every crossing is visited once over and once under.
    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![(0u8, 0u8); self.signs.len()];
        for v in self.components.iter().flatten() {
            let slot = seen
                .get_mut(v.crossing)
                .ok_or_else(|| Error::InvalidInput(format!("crossing {} has no sign", v.crossing)))?;
            if v.over {
                slot.0 += 1;
            } else {
                slot.1 += 1;
            }
        }
        if let Some(c) = seen.iter().position(|&s| s != (1, 1)) {
            return Err(Error::InvalidInput(format!("crossing {c} is not visited once over and once under")));
        }
        if self.signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidInput("crossing signs must be ±1".into()));
        }
        Ok(())
    }

    /// Closure of a braid word on `strands` strands. Generator `k > 0` is
    /// `σ_k` (strand `k` crosses over strand `k+1` going left to right, a
    /// positive crossing); `-k` is its inverse.
    pub fn from_braid(strands: usize, word: &[i32]) -> Result<Self> {
        if word.iter().any(|&g| g == 0 || g.unsigned_abs() as usize >= strands) {
            return Err(Error::InvalidInput(format!("braid word {word:?} out of range for {strands} strands")));
        }
        let signs: Vec<i8> = word.iter().map(|&g| g.signum() as i8).collect();
        let mut done = vec![false; strands];
        let mut components = Vec::new();
        for start in 0..strands {
            if done[start] {
                continue;
            }
            let mut comp = Vec::new();
            let mut pos = start;
            loop {
                done[pos] = true;
                for (c, &g) in word.iter().enumerate() {
                    let k = g.unsigned_abs() as usize;
                    let positive = g > 0;
                    if pos == k - 1 {
                        comp.push(Visit { crossing: c, over: positive });
                        pos = k;
                    } else if pos == k {
                        comp.push(Visit { crossing: c, over: !positive });
                        pos = k - 1;
                    }
                }
                if pos == start {
                    break;
                }
            }
            components.push(comp);
        }
        let positions = (0..word.len()).map(|c| [c as f64, 0.0]).collect();
        Ok(KnotDiagram { components, signs, positions })
    }

    /// Mirror image: every crossing switched.
    pub fn mirror(&self) -> Self {
        let mut d = self.clone();
        for v in d.components.iter_mut().flatten() {
            v.over = !v.over;
        }
        for s in &mut d.signs {
            *s = -*s;
        }
        d
    }

    /// Connected sum of two knot diagrams, joined at the start of each code.
    pub fn connected_sum(&self, other: &Self) -> Result<Self> {
        if self.components.len() != 1 || other.components.len() != 1 {
            return Err(Error::InvalidInput("connected sum needs two knot diagrams".into()));
        }
        let shift = self.signs.len();
        let mut comp = self.components[0].clone();
        comp.extend(other.components[0].iter().map(|v| Visit { crossing: v.crossing + shift, over: v.over }));
        let mut signs = self.signs.clone();
        signs.extend(&other.signs);
        let mut positions = self.positions.clone();
        positions.extend(other.positions.iter().map(|p| [p[0] + 1e3, p[1]]));
        Ok(KnotDiagram { components: vec![comp], signs, positions })
    }

    /// Inserts a Reidemeister-1 kink into component `comp` before position
    /// `at`.
    pub fn with_kink(&self, comp: usize, at: usize, sign: i8, over_first: bool) -> Self {
        let mut d = self.clone();
        let c = d.signs.len();
        d.signs.push(sign);
        d.positions.push([f64::NAN, f64::NAN]);
        let at = at.min(d.components[comp].len());
        d.components[comp].splice(
            at..at,
            [Visit { crossing: c, over: over_first }, Visit { crossing: c, over: !over_first }],
        );
        d
    }
}

/// A crossing found while projecting: edge indices and parameters of the
/// over and under passages.
struct RawCrossing {
    over: (usize, f64),
    under: (usize, f64),
    sign: i8,
    position: [f64; 2],
}

fn cross2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn sub2(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm2(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

fn point_segment_distance2(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = sub2(b, a);
    let l2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if l2 > 0.0 { ((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / l2 } else { 0.0 };
    let t = t.clamp(0.0, 1.0);
    norm2(sub2(p, [a[0] + t * ab[0], a[1] + t * ab[1]]))
}

/// Projects the polygon along `direction` (the viewer sits at `+direction`).
///
/// `tol` is relative: projected features closer than `tol` times the mean
/// edge length, and crossing angles with sine below `tol`, count as
/// degenerate.
pub fn project_diagram(k: &PolygonalKnot, direction: Vec3, tol: f64) -> Result<KnotDiagram> {
    let d = direction.normalized();
    if !d.is_finite() {
        return Err(Error::InvalidInput("projection direction must be nonzero".into()));
    }
    let a = d.any_perpendicular().normalized();
    let b = d.cross(a);
    let n = k.len();
    let p2: Vec<[f64; 2]> = k.vertices().iter().map(|v| [v.dot(a), v.dot(b)]).collect();
    let depth: Vec<f64> = k.vertices().iter().map(|v| v.dot(d)).collect();
    let eps = tol * k.mean_edge();

    let seg = |i: usize| (p2[i], p2[(i + 1) % n]);
    for i in 0..n {
        let (s0, s1) = seg(i);
        if norm2(sub2(s1, s0)) <= eps {
            return Err(Error::DegenerateProjection("edge nearly parallel to the projection direction"));
        }
    }

    let mut raw = Vec::new();
    for i in 0..n {
        let (p0, p1) = seg(i);
        let r = sub2(p1, p0);
        let lr = norm2(r);
        let lo = [p0[0].min(p1[0]) - eps, p0[1].min(p1[1]) - eps];
        let hi = [p0[0].max(p1[0]) + eps, p0[1].max(p1[1]) + eps];
        for j in (i + 1)..n {
            let (q0, q1) = seg(j);
            if q0[0].max(q1[0]) < lo[0] || q0[0].min(q1[0]) > hi[0] || q0[1].max(q1[1]) < lo[1] || q0[1].min(q1[1]) > hi[1] {
                continue;
            }
            let s = sub2(q1, q0);
            let ls = norm2(s);
            let denom = cross2(r, s);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // Consecutive edges only meet at their shared vertex unless
                // the projection folds one back onto the other.
                if denom.abs() <= tol * lr * ls && (r[0] * s[0] + r[1] * s[1]) < 0.0 {
                    return Err(Error::DegenerateProjection("consecutive edges overlap in projection"));
                }
                continue;
            }
            if denom.abs() <= tol * lr * ls {
                let close = point_segment_distance2(p0, q0, q1)
                    .min(point_segment_distance2(p1, q0, q1))
                    .min(point_segment_distance2(q0, p0, p1))
                    .min(point_segment_distance2(q1, p0, p1));
                if close <= eps {
                    return Err(Error::DegenerateProjection("nearly parallel edges overlap in projection"));
                }
                continue;
            }
            let w = sub2(q0, p0);
            let t = cross2(w, s) / denom;
            let u = cross2(w, r) / denom;
            let (dt, du) = (eps / lr, eps / ls);
            if t < -dt || t > 1.0 + dt || u < -du || u > 1.0 + du {
                continue;
            }
            if t <= dt || t >= 1.0 - dt || u <= du || u >= 1.0 - du {
                return Err(Error::DegenerateProjection("vertex projects onto another edge"));
            }
            let zi = depth[i] + t * (depth[(i + 1) % n] - depth[i]);
            let zj = depth[j] + u * (depth[(j + 1) % n] - depth[j]);
            if (zi - zj).abs() <= eps {
                return Err(Error::DegenerateProjection("edges nearly intersect in space"));
            }
            let (ei, ej) = (k.edge_vector(i), k.edge_vector(j));
            let (over, under, od, ud) = if zi > zj { ((i, t), (j, u), ei, ej) } else { ((j, u), (i, t), ej, ei) };
            let sign = if od.cross(ud).dot(d) > 0.0 { 1 } else { -1 };
            raw.push(RawCrossing { over, under, sign, position: [p0[0] + t * r[0], p0[1] + t * r[1]] });
        }
    }

    let mut per_edge: Vec<Vec<(f64, Visit)>> = vec![Vec::new(); n];
    for (c, x) in raw.iter().enumerate() {
        per_edge[x.over.0].push((x.over.1, Visit { crossing: c, over: true }));
        per_edge[x.under.0].push((x.under.1, Visit { crossing: c, over: false }));
    }
    let mut comp = Vec::with_capacity(2 * raw.len());
    for (e, list) in per_edge.iter_mut().enumerate() {
        list.sort_by(|x, y| x.0.total_cmp(&y.0));
        let min_gap = eps / norm2(sub2(seg(e).1, seg(e).0));
        if list.windows(2).any(|w| w[1].0 - w[0].0 <= min_gap) {
            return Err(Error::DegenerateProjection("crossings too close together"));
        }
        comp.extend(list.iter().map(|x| x.1));
    }
    Ok(KnotDiagram {
        components: vec![comp],
        signs: raw.iter().map(|x| x.sign).collect(),
        positions: raw.iter().map(|x| x.position).collect(),
    })
}
