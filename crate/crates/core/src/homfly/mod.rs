//! Knot diagrams, HOMFLY polynomials and classification by polynomial.
//!
//! Knot types are identified only up to their polynomial: distinct knots
//! with equal polynomials are indistinguishable here.

mod diagram;
mod poly;
mod skein;

use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub use diagram::{project_diagram, KnotDiagram, Visit};
pub use poly::{LaurentPoly2, Monomial};
pub use skein::{homfly, homfly_with_cap, simplify, DEFAULT_CROSSING_CAP, SKEIN_NODE_BUDGET};

use crate::error::{Error, Result};
use crate::geom::{PolygonalKnot, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomflyOptions {
    pub cap: usize,
    /// Relative genericity tolerance passed to [`project_diagram`].
    pub tol: f64,
    /// Projection attempts per direction before giving up.
    pub attempts: usize,
    /// Generic directions sampled; the two giving the fewest crossings after
    /// simplification are evaluated and compared.
    pub candidates: usize,
}

impl Default for HomflyOptions {
    fn default() -> Self {
        HomflyOptions { cap: DEFAULT_CROSSING_CAP, tol: 1e-9, attempts: 64, candidates: 2 }
    }
}

pub fn random_direction(rng: &mut impl rand::Rng) -> Vec3 {
    loop {
        let v = Vec3::new(StandardNormal.sample(rng), StandardNormal.sample(rng), StandardNormal.sample(rng));
        let n = v.norm();
        if n > 1e-6 {
            return v / n;
        }
    }
}

/// A simplified diagram from a random generic direction.
pub fn generic_diagram(k: &PolygonalKnot, rng: &mut impl rand::Rng, opts: &HomflyOptions) -> Result<KnotDiagram> {
    for _ in 0..opts.attempts {
        match project_diagram(k, random_direction(rng), opts.tol) {
            Ok(d) => return Ok(simplify(&d)),
            Err(Error::DegenerateProjection(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::ProjectionFailure { attempts: opts.attempts })
}

pub fn homfly_of_knot(k: &PolygonalKnot, seed: u64) -> Result<LaurentPoly2> {
    homfly_of_knot_with(k, seed, &HomflyOptions::default())
}

/// HOMFLY polynomial of a polygon, computed from two independent generic
/// projections that must agree.
pub fn homfly_of_knot_with(k: &PolygonalKnot, seed: u64, opts: &HomflyOptions) -> Result<LaurentPoly2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    homfly_of_knot_rng(k, &mut rng, opts)
}

pub fn homfly_of_knot_rng(k: &PolygonalKnot, rng: &mut impl rand::Rng, opts: &HomflyOptions) -> Result<LaurentPoly2> {
    let mut diagrams = Vec::with_capacity(opts.candidates.max(2));
    for _ in 0..opts.candidates.max(2) {
        diagrams.push(generic_diagram(k, rng, opts)?);
    }
    diagrams.sort_by_key(|d| d.crossing_count());
    let first = homfly_with_cap(&diagrams[0], opts.cap)?;
    let second = homfly_with_cap(&diagrams[1], opts.cap)?;
    if first != second {
        return Err(Error::ProjectionMismatch);
    }
    Ok(first)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableEntry {
    pub label: String,
    pub polynomial: LaurentPoly2,
}

/// Braid words whose closures are the table knots, with labels for the knot
/// and its mirror (equal labels when amphichiral).
const TABLE_BRAIDS: [(&str, &str, usize, &[i32]); 7] = [
    ("Trefoil_R", "Trefoil_L", 2, &[1, 1, 1]),
    ("FigureEight", "FigureEight", 3, &[1, -2, 1, -2]),
    ("5_1", "5_1*", 2, &[1, 1, 1, 1, 1]),
    ("5_2", "5_2*", 3, &[1, 1, 1, 2, -1, 2]),
    ("6_1", "6_1*", 4, &[1, 1, 2, -1, -3, 2, -3]),
    ("6_2", "6_2*", 3, &[1, 1, 1, -2, 1, -2]),
    ("6_3", "6_3", 3, &[1, 1, -2, 1, -2, -2]),
];

/// Prime knots recognised by [`classify`], computed once from braid closures
/// by the skein engine.
pub fn table() -> &'static [TableEntry] {
    static TABLE: OnceLock<Vec<TableEntry>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut out = Vec::new();
        for (label, mirror_label, strands, word) in TABLE_BRAIDS {
            let d = KnotDiagram::from_braid(strands, word).expect("table braid");
            let p = homfly(&d).expect("table polynomial");
            let m = p.mirror();
            let amphichiral = m == p;
            out.push(TableEntry { label: label.into(), polynomial: p });
            if !amphichiral {
                out.push(TableEntry { label: mirror_label.into(), polynomial: m });
            }
        }
        out
    })
}

pub fn trefoil_polynomial() -> &'static LaurentPoly2 {
    &table()[0].polynomial
}

pub fn figure_eight_polynomial() -> &'static LaurentPoly2 {
    &table()[2].polynomial
}

fn is_trefoil(label: &str) -> bool {
    label.starts_with("Trefoil")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnotClass {
    /// `Unknot`, a table label, prime labels joined by `#` for a composite,
    /// or `Unknown`.
    pub label: String,
    /// Prime summands in table order; empty for the unknot and unknown
    /// polynomials.
    pub factors: Vec<String>,
    pub trefoil_summand_count: Option<usize>,
    pub polynomial: String,
}

impl KnotClass {
    pub fn is_unknot(&self) -> bool {
        self.label == "Unknot"
    }

    pub fn is_known(&self) -> bool {
        self.label != "Unknown"
    }
}

const MAX_SUMMANDS: usize = 8;

fn factor(p: &LaurentPoly2, from: usize, depth: usize, acc: &mut Vec<usize>) -> bool {
    if p.is_one() {
        return true;
    }
    if depth == MAX_SUMMANDS {
        return false;
    }
    let t = table();
    for (i, entry) in t.iter().enumerate().skip(from) {
        if let Some(q) = p.div_exact(&entry.polynomial) {
            acc.push(i);
            if factor(&q, i, depth + 1, acc) {
                return true;
            }
            acc.pop();
        }
    }
    false
}

/// Identifies a polynomial as the unknot, a table knot, or a connected sum
/// of table knots (found by trial division), else `Unknown`.
pub fn classify(p: &LaurentPoly2) -> KnotClass {
    let polynomial = p.to_string();
    if p.is_one() {
        return KnotClass { label: "Unknot".into(), factors: vec![], trefoil_summand_count: Some(0), polynomial };
    }
    let mut acc = Vec::new();
    if factor(p, 0, 0, &mut acc) {
        let factors: Vec<String> = acc.iter().map(|&i| table()[i].label.clone()).collect();
        let count = factors.iter().filter(|l| is_trefoil(l)).count();
        return KnotClass { label: factors.join("#"), factors, trefoil_summand_count: Some(count), polynomial };
    }
    KnotClass { label: "Unknown".into(), factors: vec![], trefoil_summand_count: None, polynomial }
}

/// A right-handed trefoil with six edges, the fewest possible.
pub fn stick_trefoil() -> PolygonalKnot {
    PolygonalKnot::new(STICK_TREFOIL.iter().map(|&[x, y, z]| Vec3::new(x, y, z)).collect()).expect("trefoil vertices")
}

const STICK_TREFOIL: [[f64; 3]; 6] = [
    [4.0, 0.0, 0.0],
    [0.0, 2.0, 2.0],
    [4.0, 3.0, 1.0],
    [4.0, 1.0, 4.0],
    [0.0, 2.0, 0.0],
    [1.0, 4.0, 3.0],
];
