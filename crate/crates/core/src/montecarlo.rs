//! Seeded vertex-perturbation sampling and HOMFLY tallies.
//!
//! Sample `i` of a run with seed `s` draws from a ChaCha8 stream keyed by
//! `(s, i)`, so results do not depend on how samples are split across
//! threads.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{PolygonalKnot, Vec3};
use crate::homfly::{classify, homfly_of_knot_rng, HomflyOptions, KnotClass, LaurentPoly2};
use crate::io::Real;
use crate::thickness::thickness_radius;

/// Perturbed polygons with two non-adjacent edges closer than this are
/// counted as degenerate.
pub const DEGENERATE_DISTANCE: f64 = 1e-12;

pub const OVERFLOW_KEY: &str = "overflow";
pub const DEGENERATE_KEY: &str = "degenerate";

/// Uniform point in the closed ball of radius `r` about the origin.
pub fn uniform_in_ball(rng: &mut impl Rng, r: f64) -> Vec3 {
    let dir = loop {
        let v = Vec3::new(StandardNormal.sample(rng), StandardNormal.sample(rng), StandardNormal.sample(rng));
        let n = v.norm();
        if n > 1e-12 {
            break v / n;
        }
    };
    let u: f64 = rng.gen();
    dir * (r * u.cbrt())
}

/// Displaces every vertex by an independent uniform vector in the ball of
/// radius `r`. Fails only if two consecutive vertices land on each other.
pub fn perturb(k: &PolygonalKnot, r: f64, rng: &mut impl Rng) -> Result<PolygonalKnot> {
    if !(r >= 0.0) {
        return Err(Error::InvalidInput(format!("perturbation radius must be nonnegative, got {r}")));
    }
    if r == 0.0 {
        return Ok(k.clone());
    }
    PolygonalKnot::new(k.vertices().iter().map(|&v| v + uniform_in_ball(rng, r)).collect())
}

/// The random stream used by sample `index` of a run.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SampleOutcome {
    Classified(LaurentPoly2),
    /// The diagram exceeded the crossing cap.
    Overflow,
    /// Not embedded, or no consistent generic projection was found.
    Degenerate,
}

pub fn sample_one(k: &PolygonalKnot, r: f64, seed: u64, index: u64, opts: &HomflyOptions) -> SampleOutcome {
    let mut rng = sample_rng(seed, index);
    let Ok(p) = perturb(k, r, &mut rng) else { return SampleOutcome::Degenerate };
    if p.turning_angles().is_err() || p.min_distance().distance <= DEGENERATE_DISTANCE {
        return SampleOutcome::Degenerate;
    }
    match homfly_of_knot_rng(&p, &mut rng, opts) {
        Ok(poly) => SampleOutcome::Classified(poly),
        Err(Error::TooManyCrossings { .. } | Error::SkeinBudget { .. }) => SampleOutcome::Overflow,
        Err(_) => SampleOutcome::Degenerate,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationTally {
    pub host: String,
    pub n: usize,
    pub radius: Real,
    pub samples: u64,
    pub seed: u64,
    /// Canonical polynomial string to count.
    pub counts: BTreeMap<String, u64>,
    pub overflow: u64,
    pub degenerate: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TallyRow {
    pub host: String,
    pub n: usize,
    pub r: Real,
    #[serde(rename = "N")]
    pub samples: u64,
    pub seed: u64,
    pub polynomial: String,
    pub label: String,
    pub count: u64,
    pub frequency: Real,
}

impl PerturbationTally {
    fn empty(host: &str, n: usize, radius: f64, samples: u64, seed: u64) -> Self {
        PerturbationTally {
            host: host.to_string(),
            n,
            radius: Real(radius),
            samples,
            seed,
            counts: BTreeMap::new(),
            overflow: 0,
            degenerate: 0,
        }
    }

    fn record(&mut self, outcome: SampleOutcome) {
        match outcome {
            SampleOutcome::Classified(p) => *self.counts.entry(p.to_string()).or_insert(0) += 1,
            SampleOutcome::Overflow => self.overflow += 1,
            SampleOutcome::Degenerate => self.degenerate += 1,
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (key, c) in other.counts {
            *self.counts.entry(key).or_insert(0) += c;
        }
        self.overflow += other.overflow;
        self.degenerate += other.degenerate;
        self
    }

    pub fn classified(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn total(&self) -> u64 {
        self.classified() + self.overflow + self.degenerate
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn frequency(&self, count: u64) -> f64 {
        count as f64 / self.samples as f64
    }

    /// Classes of the tallied polynomials, with counts, in key order.
    pub fn classes(&self) -> Vec<(KnotClass, u64)> {
        self.counts
            .iter()
            .map(|(key, &c)| {
                let p: LaurentPoly2 = key.parse().expect("tally keys are canonical polynomials");
                (classify(&p), c)
            })
            .collect()
    }

    /// Frequency of samples whose class label satisfies `pred`.
    pub fn frequency_where(&self, pred: impl Fn(&str) -> bool) -> f64 {
        let c: u64 = self.classes().into_iter().filter(|(k, _)| pred(&k.label)).map(|(_, c)| c).sum();
        self.frequency(c)
    }

    pub fn unknot_frequency(&self) -> f64 {
        self.frequency_where(|l| l == "Unknot")
    }

    /// Frequency of a single trefoil of either handedness.
    pub fn trefoil_frequency(&self) -> f64 {
        self.frequency_where(|l| l == "Trefoil_R" || l == "Trefoil_L")
    }

    pub fn figure_eight_frequency(&self) -> f64 {
        self.frequency_where(|l| l == "FigureEight")
    }

    /// Largest trefoil summand count among the classified samples.
    pub fn max_trefoil_summands(&self) -> usize {
        self.classes().iter().filter_map(|(k, _)| k.trefoil_summand_count).max().unwrap_or(0)
    }

    /// One row per polynomial, then the overflow and degenerate buckets when
    /// nonempty.
    pub fn rows(&self) -> Vec<TallyRow> {
        let row = |polynomial: String, label: String, count: u64| TallyRow {
            host: self.host.clone(),
            n: self.n,
            r: self.radius,
            samples: self.samples,
            seed: self.seed,
            polynomial,
            label,
            count,
            frequency: Real(self.frequency(count)),
        };
        let mut out: Vec<TallyRow> =
            self.classes().into_iter().map(|(k, c)| row(k.polynomial.clone(), k.label, c)).collect();
        if self.overflow > 0 {
            out.push(row(OVERFLOW_KEY.into(), OVERFLOW_KEY.into(), self.overflow));
        }
        if self.degenerate > 0 {
            out.push(row(DEGENERATE_KEY.into(), DEGENERATE_KEY.into(), self.degenerate));
        }
        out
    }
}

/// Classifies `samples` independent perturbations of `k` at radius `r`.
/// Runs on the current rayon pool; the result does not depend on its size.
pub fn sample(k: &PolygonalKnot, host: &str, r: f64, samples: u64, seed: u64) -> Result<PerturbationTally> {
    sample_with(k, host, r, samples, seed, &HomflyOptions::default())
}

pub fn sample_with(
    k: &PolygonalKnot,
    host: &str,
    r: f64,
    samples: u64,
    seed: u64,
    opts: &HomflyOptions,
) -> Result<PerturbationTally> {
    if samples == 0 {
        return Err(Error::InvalidInput("sample count must be at least 1".into()));
    }
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::InvalidInput(format!("perturbation radius must be nonnegative, got {r}")));
    }
    let empty = || PerturbationTally::empty(host, k.len(), r, samples, seed);
    Ok((0..samples)
        .into_par_iter()
        .fold(empty, |mut t, i| {
            t.record(sample_one(k, r, seed, i, opts));
            t
        })
        .reduce(empty, PerturbationTally::merge))
}

/// One tally per radius, all with the same seed.
pub fn radius_scan(
    k: &PolygonalKnot,
    host: &str,
    radii: &[f64],
    samples: u64,
    seed: u64,
) -> Result<Vec<PerturbationTally>> {
    if radii.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidInput("radii must be sorted ascending".into()));
    }
    radii.iter().map(|&r| sample(k, host, r, samples, seed)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeScanEntry {
    pub n: usize,
    pub thickness: Real,
    pub tally: PerturbationTally,
}

/// Samples each host at its own thickness radius.
pub fn edge_scan(hosts: &[(String, PolygonalKnot)], samples: u64, seed: u64) -> Result<Vec<EdgeScanEntry>> {
    hosts
        .iter()
        .map(|(name, k)| {
            k.check_embedded()?;
            let r = thickness_radius(k)?;
            Ok(EdgeScanEntry { n: k.len(), thickness: Real(r), tally: sample(k, name, r, samples, seed)? })
        })
        .collect()
}

/// `(n, frequency)` pairs for labels matching `pred`.
pub fn frequency_series(entries: &[EdgeScanEntry], pred: impl Fn(&str) -> bool + Copy) -> Vec<(usize, f64)> {
    entries.iter().map(|e| (e.n, e.tally.frequency_where(pred))).collect()
}

pub fn max_summands(tallies: &[PerturbationTally]) -> usize {
    tallies.iter().map(PerturbationTally::max_trefoil_summands).max().unwrap_or(0)
}

/// Reference count `⌊(n − 4)/8⌋` of trefoil summands seen about unknots
/// with `n` edges.
pub fn expected_summands(n: usize) -> usize {
    n.saturating_sub(4) / 8
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_radius_is_identity() {
        let k = PolygonalKnot::regular_ngon(7, 1.0).unwrap();
        assert_eq!(perturb(&k, 0.0, &mut sample_rng(1, 0)).unwrap(), k);
    }

    #[test]
    fn displacement_bounded_and_second_moment() {
        let mut rng = sample_rng(2, 0);
        let r = 0.3;
        let draws = 100_000;
        let mut sum = 0.0;
        for _ in 0..draws {
            let v = uniform_in_ball(&mut rng, r);
            assert!(v.norm() <= r);
            sum += v.norm_sq();
        }
        let mean = sum / draws as f64;
        assert!((mean / (0.6 * r * r) - 1.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn radial_law_passes_ks() {
        let mut rng = sample_rng(3, 0);
        let draws = 100_000;
        let mut t: Vec<f64> = (0..draws).map(|_| uniform_in_ball(&mut rng, 1.0).norm()).collect();
        t.sort_by(f64::total_cmp);
        let ks = t
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = x.powi(3);
                (f - i as f64 / draws as f64).abs().max(((i + 1) as f64 / draws as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.01, "{ks}");
    }

    #[test]
    fn streams_are_keyed_by_index() {
        let a: u64 = sample_rng(5, 3).gen();
        let b: u64 = sample_rng(5, 3).gen();
        let c: u64 = sample_rng(5, 4).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn tally_conserves_samples_and_is_deterministic() {
        let k = PolygonalKnot::regular_ngon(12, 1.0).unwrap();
        let a = sample(&k, "ngon:12", 0.5, 200, 9).unwrap();
        assert_eq!(a.total(), 200);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| sample(&k, "ngon:12", 0.5, 200, 9).unwrap());
        assert_eq!(a, b);
        let rows = a.rows();
        assert_eq!(rows.iter().map(|r| r.count).sum::<u64>(), 200);
        assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.frequency.0)));
    }

    #[test]
    fn below_threshold_is_pure() {
        let k = PolygonalKnot::regular_ngon(32, 1.0).unwrap();
        let t = sample(&k, "ngon:32", 0.2, 500, 4).unwrap();
        assert_eq!(t.distinct(), 1);
        assert_eq!(t.unknot_frequency(), 1.0);
    }

    #[test]
    fn radii_must_ascend() {
        let k = PolygonalKnot::regular_ngon(8, 1.0).unwrap();
        assert!(radius_scan(&k, "x", &[0.2, 0.1], 1, 0).is_err());
    }

    #[test]
    fn expected_summand_formula() {
        assert_eq!(expected_summands(12), 1);
        assert_eq!(expected_summands(20), 2);
        assert_eq!(expected_summands(9), 0);
        assert_eq!(expected_summands(3), 0);
    }
}
