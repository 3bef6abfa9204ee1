//! Shared test helpers: random polygon generators and brute-force oracles
//! that are independent of the library's candidate enumeration.

#![allow(dead_code)]

use polyknot::{PointOnKnot, PolygonalKnot, Vec3};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point in the ball of the given radius (rejection sampling, kept
/// separate from the library's sampler).
pub fn ball_point(rng: &mut impl Rng, radius: f64) -> Vec3 {
    loop {
        let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if v.norm_sq() <= 1.0 {
            return v * radius;
        }
    }
}

/// A regular `n`-gon (circumradius 1) with every vertex moved by up to
/// `amp` times the edge length, retried until embedded.
pub fn random_polygon(rng: &mut impl Rng, n: usize, amp: f64) -> PolygonalKnot {
    let base = PolygonalKnot::regular_ngon(n, 1.0).unwrap();
    let edge = base.edge_length(0);
    loop {
        let vs: Vec<Vec3> = base.vertices().iter().map(|&v| v + ball_point(rng, amp * edge)).collect();
        if let Ok(k) = PolygonalKnot::new_embedded(vs) {
            return k;
        }
    }
}

/// Minimum distance between two segments by a 1000x1000 parameter grid
/// followed by a 1000x1000 zoom around the best cell.
pub fn grid_segment_distance(a0: Vec3, a1: Vec3, b0: Vec3, b1: Vec3) -> f64 {
    let m = 1000usize;
    let eval = |s: f64, t: f64| a0.lerp(a1, s).dist(b0.lerp(b1, t));
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=m {
        let s = i as f64 / m as f64;
        for j in 0..=m {
            let t = j as f64 / m as f64;
            let d = eval(s, t);
            if d < best.0 {
                best = (d, s, t);
            }
        }
    }
    let h = 1.0 / m as f64;
    let (s0, t0) = ((best.1 - h).max(0.0), (best.2 - h).max(0.0));
    let (s1, t1) = ((best.1 + h).min(1.0), (best.2 + h).min(1.0));
    for i in 0..=m {
        let s = s0 + (s1 - s0) * i as f64 / m as f64;
        for j in 0..=m {
            let t = t0 + (t1 - t0) * j as f64 / m as f64;
            best.0 = best.0.min(eval(s, t));
        }
    }
    best.0
}

/// Turning-point kinds of `d_x` found on a sampled polygon.
const MIN: u8 = 1;
const MAX: u8 = 2;

/// Brute-force doubly and singly critical self-distances on a uniform grid
/// of `samples_per_edge` points per edge.
///
/// A sample `y` is a turning point of `d_x` when its distance to `x` is a
/// discrete local extremum along the cyclic sample sequence. Returns
/// `(dcsd, scsd)`.
pub fn grid_self_distances(k: &PolygonalKnot, samples_per_edge: usize) -> (f64, f64) {
    let n = k.len();
    let s = samples_per_edge;
    let total = n * s;
    let pts: Vec<Vec3> = (0..total)
        .map(|m| k.point(PointOnKnot { edge: m / s, t: (m % s) as f64 / s as f64 }))
        .collect();

    let mut extrema: Vec<Vec<(u32, u8)>> = Vec::with_capacity(total);
    let mut d = vec![0.0; total];
    for a in 0..total {
        let x = pts[a];
        for (b, p) in pts.iter().enumerate() {
            d[b] = x.dist(*p);
        }
        let mut list = Vec::new();
        for b in 0..total {
            if b == a {
                continue;
            }
            let prev = d[(b + total - 1) % total];
            let next = d[(b + 1) % total];
            let mut kind = 0;
            if d[b] <= prev && d[b] <= next {
                kind |= MIN;
            }
            if d[b] >= prev && d[b] >= next {
                kind |= MAX;
            }
            if kind != 0 {
                list.push((b as u32, kind));
            }
        }
        extrema.push(list);
    }

    // Edges containing a sample; vertices sit on two edges.
    let edges_of = |m: usize| -> [usize; 2] {
        let e = m / s;
        if m.is_multiple_of(s) {
            [(e + n - 1) % n, e]
        } else {
            [e, e]
        }
    };
    let adjacent = |i: usize, j: usize| {
        let dd = (i + n - j) % n;
        dd == 0 || dd == 1 || dd == n - 1
    };

    let mut dcsd = f64::INFINITY;
    let mut scsd = f64::INFINITY;
    for a in 0..total {
        for &(b, kind) in &extrema[a] {
            let b = b as usize;
            let dist = pts[a].dist(pts[b]);
            if extrema[b].binary_search_by_key(&(a as u32), |e| e.0).is_ok() {
                dcsd = dcsd.min(dist);
            }
            if kind & MIN != 0 {
                let (ea, eb) = (edges_of(a), edges_of(b));
                if ea.iter().any(|&i| eb.iter().any(|&j| !adjacent(i, j))) {
                    scsd = scsd.min(dist);
                }
            }
        }
    }
    (dcsd, scsd)
}

/// Singly critical self-distance with `x` sampled densely (`x_samples` per
/// edge) and, for each `x`, the local minima of `d_x` located directly: an
/// unclamped foot strictly inside an edge, or a vertex whose neighbouring
/// points at parameter offset `1e-9` are no closer.
pub fn dense_scsd(k: &PolygonalKnot, x_samples: usize) -> f64 {
    let n = k.len();
    let adjacent = |i: usize, j: usize| {
        let dd = (i + n - j) % n;
        dd == 0 || dd == 1 || dd == n - 1
    };
    let mut best = f64::INFINITY;
    for ex in 0..n {
        for m in 0..x_samples {
            let xt = (m as f64 + 0.5) / x_samples as f64;
            let x = k.point(PointOnKnot { edge: ex, t: xt });
            for j in 0..n {
                if adjacent(ex, j) {
                    continue;
                }
                let (a, b) = k.edge(j);
                let d = b - a;
                let t = (x - a).dot(d) / d.norm_sq();
                if t > 0.0 && t < 1.0 {
                    best = best.min(x.dist(a.lerp(b, t)));
                }
            }
            for v in 0..n {
                let prev = (v + n - 1) % n;
                if adjacent(ex, prev) && adjacent(ex, v) {
                    continue;
                }
                let dv = x.dist(k.vertex(v));
                let before = x.dist(k.point(PointOnKnot { edge: prev, t: 1.0 - 1e-9 }));
                let after = x.dist(k.point(PointOnKnot { edge: v, t: 1e-9 }));
                if dv <= before && dv <= after {
                    best = best.min(dv);
                }
            }
        }
    }
    best
}
