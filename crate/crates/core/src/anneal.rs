//! Simulated annealing of ropelength over equilateral polygons.
//!
//! The only move is the crankshaft: the open sub-chain strictly between two
//! vertices is rotated rigidly about the line through them, which keeps every
//! edge length. A move is applied only if the swept motion never brings a
//! moving edge into contact with a fixed one, so the knot type is preserved.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{segment_distance, PolygonalKnot, Vec3};
use crate::thickness::ropelength;

/// Equilaterality tolerance (relative) required of the starting polygon.
pub const EQUILATERAL_TOL: f64 = 1e-9;

const MAX_BISECTIONS: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepGuard {
    /// Angular resolution of the sweep check.
    pub step: f64,
    /// Smallest allowed distance between a moving and a fixed edge,
    /// relative to the mean edge length.
    pub clearance: f64,
}

impl Default for SweepGuard {
    fn default() -> Self {
        SweepGuard { step: PI / 256.0, clearance: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub initial_temperature: f64,
    /// Temperature multiplier per epoch, in `(0, 1)`.
    pub cooling: f64,
    pub moves_per_epoch: usize,
    pub epochs: usize,
    /// Largest rotation angle at the initial temperature; it shrinks in
    /// proportion to the temperature down to `min_amplitude`.
    pub amplitude: f64,
    pub min_amplitude: f64,
    pub seed: u64,
    pub guard: SweepGuard,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule {
            initial_temperature: 1.0,
            cooling: 0.95,
            moves_per_epoch: 400,
            epochs: 150,
            amplitude: PI / 2.0,
            min_amplitude: 1e-3,
            seed: 0,
            guard: SweepGuard::default(),
        }
    }
}

impl AnnealSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_temperature > 0.0) {
            return Err(Error::InvalidInput("temperature must be positive".into()));
        }
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(Error::InvalidInput("cooling factor must lie in (0, 1)".into()));
        }
        if !(self.amplitude > 0.0 && self.min_amplitude > 0.0 && self.guard.step > 0.0) {
            return Err(Error::InvalidInput("amplitudes and sweep step must be positive".into()));
        }
        Ok(())
    }

    pub fn temperature(&self, epoch: usize) -> f64 {
        self.initial_temperature * self.cooling.powi(epoch as i32)
    }

    pub fn amplitude_at(&self, epoch: usize) -> f64 {
        (self.amplitude * self.cooling.powi(epoch as i32)).max(self.min_amplitude)
    }
}

/// Indices strictly between `i` and `j` going forward around the polygon.
fn arc(n: usize, i: usize, j: usize) -> impl Iterator<Item = usize> {
    let len = (j + n - i) % n;
    (1..len).map(move |s| (i + s) % n)
}

struct Crankshaft<'a> {
    k: &'a PolygonalKnot,
    axis_point: Vec3,
    axis: Vec3,
    moving: Vec<bool>,
    /// Edges `i .. j-1`, all of which move rigidly.
    moving_edges: Vec<usize>,
    fixed_edges: Vec<usize>,
    reach: f64,
}

impl<'a> Crankshaft<'a> {
    fn new(k: &'a PolygonalKnot, i: usize, j: usize) -> Option<Self> {
        let n = k.len();
        let gap = (j + n - i) % n;
        if i >= n || j >= n || gap < 2 || gap > n - 2 {
            return None;
        }
        let axis_point = k.vertex(i);
        let axis = k.vertex(j) - axis_point;
        if axis.norm() == 0.0 {
            return None;
        }
        let axis = axis.normalized();
        let mut moving = vec![false; n];
        for v in arc(n, i, j) {
            moving[v] = true;
        }
        let moving_edges: Vec<usize> = (0..gap).map(|s| (i + s) % n).collect();
        let fixed_edges: Vec<usize> = (0..n - gap).map(|s| (j + s) % n).collect();
        let reach = arc(n, i, j)
            .map(|v| {
                let d = k.vertex(v) - axis_point;
                (d - axis * d.dot(axis)).norm()
            })
            .fold(0.0, f64::max);
        Some(Crankshaft { k, axis_point, axis, moving, moving_edges, fixed_edges, reach })
    }

    fn vertex_at(&self, v: usize, angle: f64) -> Vec3 {
        let p = self.k.vertex(v);
        if self.moving[v] {
            self.axis_point + (p - self.axis_point).rotate_about(self.axis, angle)
        } else {
            p
        }
    }

    fn edge_at(&self, e: usize, angle: f64) -> (Vec3, Vec3) {
        (self.vertex_at(e, angle), self.vertex_at(self.k.next(e), angle))
    }

    /// Smallest distance between a moving and a non-adjacent fixed edge.
    fn clearance_at(&self, angle: f64) -> f64 {
        let mut best = f64::INFINITY;
        for &m in &self.moving_edges {
            let (a0, a1) = self.edge_at(m, angle);
            for &f in &self.fixed_edges {
                if self.k.edges_adjacent(m, f) {
                    continue;
                }
                let (b0, b1) = self.k.edge(f);
                best = best.min(segment_distance(a0, a1, b0, b1));
            }
        }
        best
    }

    /// Distances change by at most `reach·|Δθ|` along the sweep, so an
    /// interval is clear once the clearances at its ends leave room for that.
    fn interval_clear(&self, a: f64, da: f64, b: f64, db: f64, min: f64, depth: u32) -> bool {
        if da <= min || db <= min {
            return false;
        }
        if da + db - 2.0 * min > self.reach * (b - a).abs() {
            return true;
        }
        if depth == MAX_BISECTIONS {
            return false;
        }
        let mid = 0.5 * (a + b);
        let dm = self.clearance_at(mid);
        self.interval_clear(a, da, mid, dm, min, depth + 1) && self.interval_clear(mid, dm, b, db, min, depth + 1)
    }

    fn sweep_clear(&self, angle: f64, guard: &SweepGuard) -> bool {
        let min = guard.clearance * self.k.mean_edge();
        let steps = (angle.abs() / guard.step).ceil().max(1.0) as usize;
        let mut prev = (0.0, self.clearance_at(0.0));
        for s in 1..=steps {
            let t = angle * s as f64 / steps as f64;
            let d = self.clearance_at(t);
            if !self.interval_clear(prev.0, prev.1, t, d, min, 0) {
                return false;
            }
            prev = (t, d);
        }
        true
    }

    fn apply(&self, angle: f64) -> Option<PolygonalKnot> {
        let vs = (0..self.k.len()).map(|v| self.vertex_at(v, angle)).collect();
        let out = PolygonalKnot::new(vs).ok()?;
        out.turning_angles().ok()?;
        Some(out)
    }
}

/// Rotates the vertices strictly between `v_i` and `v_j` by `angle` about
/// the axis `v_i → v_j`. Returns `None` (rejected) when the indices do not
/// leave a vertex on each side, or the swept arc touches a fixed edge.
pub fn crankshaft_move(k: &PolygonalKnot, i: usize, j: usize, angle: f64, guard: &SweepGuard) -> Option<PolygonalKnot> {
    let c = Crankshaft::new(k, i, j)?;
    if angle == 0.0 {
        return Some(k.clone());
    }
    if !c.sweep_clear(angle, guard) {
        return None;
    }
    c.apply(angle)
}

fn random_move(k: &PolygonalKnot, amplitude: f64, guard: &SweepGuard, rng: &mut impl Rng) -> Option<PolygonalKnot> {
    let n = k.len();
    let i = rng.gen_range(0..n);
    let j = (i + rng.gen_range(2..=n - 2)) % n;
    let angle = rng.gen_range(-amplitude..=amplitude);
    crankshaft_move(k, i, j, angle, guard)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub temperature: f64,
    pub current: f64,
    pub best: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealResult {
    pub best: PolygonalKnot,
    pub best_ropelength: f64,
    pub initial_ropelength: f64,
    pub seed: u64,
    pub accepted: usize,
    pub rejected_by_guard: usize,
    pub log: Vec<EpochLog>,
}

fn require_equilateral(k: &PolygonalKnot) -> Result<()> {
    k.check_embedded()?;
    if !k.is_equilateral(EQUILATERAL_TOL) {
        return Err(Error::NotEquilateral { deviation: k.equilateral_deviation() });
    }
    Ok(())
}

/// Metropolis annealing of ropelength from `k0`; returns the best polygon
/// seen, which is never worse than `k0`.
pub fn anneal(k0: &PolygonalKnot, schedule: &AnnealSchedule) -> Result<AnnealResult> {
    schedule.validate()?;
    require_equilateral(k0)?;
    if k0.len() < 4 {
        return Err(Error::InvalidInput("annealing needs at least 4 edges".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    let initial = ropelength(k0)?;
    let mut current = k0.clone();
    let mut current_rope = initial;
    let mut best = k0.clone();
    let mut best_rope = initial;
    let mut accepted = 0;
    let mut rejected_by_guard = 0;
    let mut log = Vec::with_capacity(schedule.epochs);
    for epoch in 0..schedule.epochs {
        let temperature = schedule.temperature(epoch);
        let amplitude = schedule.amplitude_at(epoch);
        for _ in 0..schedule.moves_per_epoch {
            let Some(candidate) = random_move(&current, amplitude, &schedule.guard, &mut rng) else {
                rejected_by_guard += 1;
                continue;
            };
            let Ok(rope) = ropelength(&candidate) else {
                rejected_by_guard += 1;
                continue;
            };
            let delta = rope - current_rope;
            let u: f64 = rng.gen();
            if delta <= 0.0 || u < (-delta / temperature).exp() {
                current = candidate;
                current_rope = rope;
                accepted += 1;
                if rope < best_rope {
                    best = current.clone();
                    best_rope = rope;
                }
            }
        }
        log.push(EpochLog { epoch, temperature, current: current_rope, best: best_rope });
    }
    Ok(AnnealResult {
        best,
        best_ropelength: best_rope,
        initial_ropelength: initial,
        seed: schedule.seed,
        accepted,
        rejected_by_guard,
        log,
    })
}

/// Independent chains, one per seed, run in parallel. The lowest ropelength
/// wins, ties going to the smaller seed.
pub fn anneal_chains(k0: &PolygonalKnot, schedule: &AnnealSchedule, seeds: &[u64]) -> Result<AnnealResult> {
    if seeds.is_empty() {
        return Err(Error::InvalidInput("at least one seed is required".into()));
    }
    let results: Result<Vec<AnnealResult>> =
        seeds.par_iter().map(|&seed| anneal(k0, &AnnealSchedule { seed, ..*schedule })).collect();
    Ok(results?
        .into_iter()
        .min_by(|a, b| a.best_ropelength.total_cmp(&b.best_ropelength).then(a.seed.cmp(&b.seed)))
        .expect("nonempty"))
}

/// Applies `moves` guarded crankshaft moves of arbitrary angle, giving a
/// crumpled equilateral polygon of the same knot type.
pub fn crumple(k: &PolygonalKnot, moves: usize, seed: u64) -> PolygonalKnot {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let guard = SweepGuard::default();
    let mut out = k.clone();
    for _ in 0..moves {
        if let Some(next) = random_move(&out, PI, &guard, &mut rng) {
            out = next;
        }
    }
    out
}

/// Equilateral `n`-gon inscribed in the `(p, q)` torus knot
/// `((2 + cos qt) cos pt, (2 + cos qt) sin pt, sin qt)`. The common chord
/// length is found by bisection so that `n` chords close the curve.
pub fn equilateral_torus_knot(p: u32, q: u32, n: usize) -> Result<PolygonalKnot> {
    if n < 3 {
        return Err(Error::InvalidInput("need at least 3 edges".into()));
    }
    let (p, q) = (p as f64, q as f64);
    let curve = |t: f64| Vec3::new((2.0 + (q * t).cos()) * (p * t).cos(), (2.0 + (q * t).cos()) * (p * t).sin(), (q * t).sin());
    let total = 2.0 * PI;
    let probe = total / (64.0 * n as f64);
    // Smallest parameter after `t` at chord distance `len` from curve(t).
    let advance = |t: f64, len: f64| -> f64 {
        let origin = curve(t);
        let mut hi = t + probe;
        while curve(hi).dist(origin) < len {
            hi += probe;
            if hi > t + total {
                return f64::INFINITY;
            }
        }
        let mut lo = hi - probe;
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if curve(mid).dist(origin) < len {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let march = |len: f64| -> Vec<f64> {
        let mut ts = vec![0.0];
        for _ in 0..n {
            let t = advance(*ts.last().expect("nonempty"), len);
            ts.push(t);
            if !t.is_finite() {
                break;
            }
        }
        ts
    };
    let arclength: f64 = (0..4096)
        .map(|s| curve(total * s as f64 / 4096.0).dist(curve(total * (s + 1) as f64 / 4096.0)))
        .sum();
    let (mut lo, mut hi) = (0.0, 1.5 * arclength / n as f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        match march(mid).last() {
            Some(&t) if t.is_finite() && t < total => lo = mid,
            _ => hi = mid,
        }
    }
    let ts = march(0.5 * (lo + hi));
    PolygonalKnot::new_embedded(ts[..n].iter().map(|&t| curve(t)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn octagon() -> PolygonalKnot {
        PolygonalKnot::regular_ngon(8, 1.0).unwrap()
    }

    #[test]
    fn zero_angle_is_identity() {
        let k = octagon();
        assert_eq!(crankshaft_move(&k, 1, 5, 0.0, &SweepGuard::default()).unwrap(), k);
    }

    #[test]
    fn invalid_pairs_are_rejected() {
        let k = octagon();
        let g = SweepGuard::default();
        assert!(crankshaft_move(&k, 2, 3, 0.5, &g).is_none());
        assert!(crankshaft_move(&k, 3, 2, 0.5, &g).is_none());
        assert!(crankshaft_move(&k, 4, 4, 0.5, &g).is_none());
    }

    #[test]
    fn moves_preserve_edge_lengths() {
        let k = octagon();
        let e = k.edge_length(0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut cur = k;
        for _ in 0..500 {
            if let Some(next) = random_move(&cur, PI, &SweepGuard::default(), &mut rng) {
                cur = next;
            }
        }
        for l in cur.edge_lengths() {
            assert!((l - e).abs() < 1e-12);
        }
    }

    #[test]
    fn blocked_rotation_is_rejected() {
        // A square flap hinged on the x axis, and a fixed bar crossing the
        // flap's path at angle pi/2.
        let k = PolygonalKnot::new(vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 1.0),
            Vec3::new(0.5, -0.5, 0.5),
            Vec3::new(0.5, 0.5, 2.0),
            Vec3::new(-1.0, 0.0, 2.0),
            Vec3::new(-1.0, 0.0, 0.0),
        ])
        .unwrap();
        k.check_embedded().unwrap();
        let g = SweepGuard::default();
        assert!(crankshaft_move(&k, 0, 3, 0.3, &g).is_some());
        let blocked_from = (1..=400)
            .map(|s| PI * s as f64 / 400.0)
            .find(|&a| crankshaft_move(&k, 0, 3, a, &g).is_none())
            .expect("the flap must hit the bar");
        // The bar meets the cylinder swept by edge 1-2 where
        // (s - 1/2)^2 + (1/2 + 3s/2)^2 = 1.
        let s = (-0.5 + (0.25f64 + 6.5).sqrt()) / 6.5;
        let contact = (0.5 + 1.5 * s).atan2(s - 0.5);
        assert!(blocked_from >= contact && blocked_from - contact <= PI / 400.0, "{blocked_from} {contact}");
        let end = crankshaft_move(&k, 0, 3, blocked_from - PI / 400.0, &g).unwrap();
        end.check_embedded().unwrap();
        // The half-turn ends in an embedded state, so only the sweep check
        // can reject it.
        let c = Crankshaft::new(&k, 0, 3).unwrap();
        c.apply(PI).unwrap().check_embedded().unwrap();
        assert!(crankshaft_move(&k, 0, 3, PI, &g).is_none());
    }

    #[test]
    fn regular_polygon_is_not_worsened() {
        let k = octagon();
        let schedule = AnnealSchedule { epochs: 20, moves_per_epoch: 50, ..Default::default() };
        let r = anneal(&k, &schedule).unwrap();
        assert!(r.best_ropelength <= 16.0 * (PI / 8.0).tan() + 1e-9);
        assert!(r.log.windows(2).all(|w| w[1].best <= w[0].best));
    }

    #[test]
    fn non_equilateral_input_is_rejected() {
        let k = PolygonalKnot::new(vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ])
        .unwrap();
        assert!(matches!(anneal(&k, &AnnealSchedule::default()), Err(Error::NotEquilateral { .. })));
    }

    #[test]
    fn torus_trefoil_is_equilateral() {
        let k = equilateral_torus_knot(2, 3, 24).unwrap();
        assert!(k.equilateral_deviation() < 1e-10, "{}", k.equilateral_deviation());
    }
}
