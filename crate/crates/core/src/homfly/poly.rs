//! Sparse Laurent polynomials in `ℓ` and `m` with integer coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exponent pair `(ℓ, m)`.
pub type Monomial = (i32, i32);

/// Terms are kept sorted by `(ℓ, m)` exponent with no zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LaurentPoly2 {
    terms: Vec<(Monomial, i64)>,
}

const MINUS: char = '\u{2212}';

impl LaurentPoly2 {
    pub fn zero() -> Self {
        LaurentPoly2 { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::monomial(1, 0, 0)
    }

    pub fn monomial(coeff: i64, l: i32, m: i32) -> Self {
        if coeff == 0 {
            Self::zero()
        } else {
            LaurentPoly2 { terms: vec![((l, m), coeff)] }
        }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, i64)>) -> Self {
        let mut map: BTreeMap<Monomial, i64> = BTreeMap::new();
        for (e, c) in terms {
            *map.entry(e).or_insert(0) += c;
        }
        LaurentPoly2 { terms: map.into_iter().filter(|(_, c)| *c != 0).collect() }
    }

    /// The unlink factor `δ = −(ℓ + ℓ⁻¹)/m`.
    pub fn delta() -> Self {
        Self::from_terms([((1, -1), -1), ((-1, -1), -1)])
    }

    pub fn terms(&self) -> &[(Monomial, i64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0] == ((0, 0), 1)
    }

    pub fn leading(&self) -> Option<(Monomial, i64)> {
        self.terms.last().copied()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            let take_a = j >= other.terms.len() || (i < self.terms.len() && self.terms[i].0 < other.terms[j].0);
            let take_b = i >= self.terms.len() || (j < other.terms.len() && other.terms[j].0 < self.terms[i].0);
            if take_a {
                out.push(self.terms[i]);
                i += 1;
            } else if take_b {
                out.push(other.terms[j]);
                j += 1;
            } else {
                let c = self.terms[i].1 + other.terms[j].1;
                if c != 0 {
                    out.push((self.terms[i].0, c));
                }
                i += 1;
                j += 1;
            }
        }
        LaurentPoly2 { terms: out }
    }

    pub fn neg(&self) -> Self {
        LaurentPoly2 { terms: self.terms.iter().map(|&(e, c)| (e, -c)).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Multiplies by `coeff·ℓ^l·m^m`.
    pub fn scale(&self, coeff: i64, l: i32, m: i32) -> Self {
        if coeff == 0 {
            return Self::zero();
        }
        LaurentPoly2 { terms: self.terms.iter().map(|&((a, b), c)| ((a + l, b + m), c * coeff)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut map: BTreeMap<Monomial, i64> = BTreeMap::new();
        for &((a, b), c) in &self.terms {
            for &((x, y), d) in &other.terms {
                *map.entry((a + x, b + y)).or_insert(0) += c * d;
            }
        }
        LaurentPoly2 { terms: map.into_iter().filter(|(_, c)| *c != 0).collect() }
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(), |acc, _| acc.mul(self))
    }

    /// Substitutes `ℓ ↦ ℓ⁻¹` (the mirror image).
    pub fn mirror(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|&((a, b), c)| ((-a, b), c)))
    }

    fn min_exponents(&self) -> Option<(i32, i32)> {
        let l = self.terms.iter().map(|t| t.0 .0).min()?;
        let m = self.terms.iter().map(|t| t.0 .1).min()?;
        Some((l, m))
    }

    fn max_exponents(&self) -> Option<(i32, i32)> {
        let l = self.terms.iter().map(|t| t.0 .0).max()?;
        let m = self.terms.iter().map(|t| t.0 .1).max()?;
        Some((l, m))
    }

    /// Exact quotient `self / divisor`, or `None` when the division leaves a
    /// remainder.
    pub fn div_exact(&self, divisor: &Self) -> Option<Self> {
        let (dl, dc) = divisor.leading()?;
        if self.is_zero() {
            return Some(Self::zero());
        }
        let (lo_a, hi_a) = (self.min_exponents()?, self.max_exponents()?);
        let (lo_b, hi_b) = (divisor.min_exponents()?, divisor.max_exponents()?);
        let lo = (lo_a.0 - lo_b.0, lo_a.1 - lo_b.1);
        let hi = (hi_a.0 - hi_b.0, hi_a.1 - hi_b.1);
        let mut rem = self.clone();
        let mut quotient = Vec::new();
        while let Some((rl, rc)) = rem.leading() {
            if rc % dc != 0 {
                return None;
            }
            let e = (rl.0 - dl.0, rl.1 - dl.1);
            if e.0 < lo.0 || e.0 > hi.0 || e.1 < lo.1 || e.1 > hi.1 {
                return None;
            }
            let q = rc / dc;
            quotient.push((e, q));
            rem = rem.sub(&divisor.scale(q, e.0, e.1));
        }
        Some(Self::from_terms(quotient))
    }

    /// Value at complex `ℓ`, `m` given as `(re, im)` pairs.
    pub fn eval_complex(&self, l: (f64, f64), m: (f64, f64)) -> (f64, f64) {
        fn mul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
            (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
        }
        fn powi(z: (f64, f64), k: i32) -> (f64, f64) {
            let base = if k < 0 {
                let d = z.0 * z.0 + z.1 * z.1;
                (z.0 / d, -z.1 / d)
            } else {
                z
            };
            (0..k.unsigned_abs()).fold((1.0, 0.0), |acc, _| mul(acc, base))
        }
        self.terms.iter().fold((0.0, 0.0), |acc, &((a, b), c)| {
            let t = mul(powi(l, a), powi(m, b));
            (acc.0 + c as f64 * t.0, acc.1 + c as f64 * t.1)
        })
    }

    /// Knot determinant `|P(ℓ = i, m = 2)|`.
    pub fn determinant(&self) -> f64 {
        let (re, im) = self.eval_complex((0.0, 1.0), (2.0, 0.0));
        re.hypot(im)
    }
}

fn signed(x: i64) -> String {
    if x < 0 {
        format!("{MINUS}{}", x.unsigned_abs())
    } else {
        x.to_string()
    }
}

/// Terms `c·ℓ^i·m^j` joined by ` + `, sorted by `(i, j)`, with U+2212 for
/// minus signs. The zero polynomial is `0`.
impl fmt::Display for LaurentPoly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (idx, &((a, b), c)) in self.terms.iter().enumerate() {
            if idx > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{}·ℓ^{}·m^{}", signed(c), signed(a as i64), signed(b as i64))?;
        }
        Ok(())
    }
}

impl FromStr for LaurentPoly2 {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "0" {
            return Ok(Self::zero());
        }
        let bad = |msg: &str| Error::InvalidInput(format!("bad polynomial term {msg:?}"));
        let num = |t: &str| -> Result<i64> { t.replace(MINUS, "-").parse::<i64>().map_err(|_| bad(t)) };
        let mut terms = Vec::new();
        for term in s.split(" + ") {
            let parts: Vec<&str> = term.trim().split('·').collect();
            if parts.len() != 3 {
                return Err(bad(term));
            }
            let c = num(parts[0])?;
            let l = parts[1].strip_prefix("ℓ^").ok_or_else(|| bad(term))?;
            let m = parts[2].strip_prefix("m^").ok_or_else(|| bad(term))?;
            terms.push(((num(l)? as i32, num(m)? as i32), c));
        }
        Ok(Self::from_terms(terms))
    }
}

impl Serialize for LaurentPoly2 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for LaurentPoly2 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly() -> impl Strategy<Value = LaurentPoly2> {
        proptest::collection::vec(((-4i32..5, -3i32..4), -5i64..6), 0..6).prop_map(LaurentPoly2::from_terms)
    }

    #[test]
    fn string_form() {
        let p = LaurentPoly2::from_terms([((-4, 0), -1), ((-2, 0), -2), ((-2, 2), 1)]);
        assert_eq!(p.to_string(), "−1·ℓ^−4·m^0 + −2·ℓ^−2·m^0 + 1·ℓ^−2·m^2");
        assert_eq!(p.to_string().parse::<LaurentPoly2>().unwrap(), p);
        assert_eq!(LaurentPoly2::one().to_string(), "1·ℓ^0·m^0");
        assert_eq!(LaurentPoly2::zero().to_string(), "0");
    }

    #[test]
    fn delta_identity() {
        // m·δ + ℓ + ℓ⁻¹ = 0
        let d = LaurentPoly2::delta().scale(1, 0, 1);
        let s = LaurentPoly2::from_terms([((1, 0), 1), ((-1, 0), 1)]);
        assert!(d.add(&s).is_zero());
    }

    #[test]
    fn mirror_involution() {
        let p = LaurentPoly2::from_terms([((-4, 0), -1), ((-2, 0), -2), ((-2, 2), 1)]);
        assert_eq!(p.mirror().mirror(), p);
        assert_eq!(p.mirror().terms()[0], ((2, 0), -2));
    }

    #[test]
    fn division_fails_on_remainder() {
        let a = LaurentPoly2::from_terms([((0, 0), 1), ((1, 0), 1)]);
        let b = LaurentPoly2::from_terms([((0, 0), 1), ((2, 0), 1)]);
        assert!(a.div_exact(&b).is_none());
        assert_eq!(a.div_exact(&a).unwrap(), LaurentPoly2::one());
        assert!(LaurentPoly2::from_terms([((0, 0), 3)]).div_exact(&LaurentPoly2::monomial(2, 0, 0)).is_none());
    }

    proptest! {
        #[test]
        fn product_divides(a in poly(), b in poly()) {
            prop_assume!(!b.is_zero());
            prop_assert_eq!(a.mul(&b).div_exact(&b), Some(a.clone()));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.to_string().parse::<LaurentPoly2>().unwrap(), a);
        }

        #[test]
        fn mirror_is_multiplicative(a in poly(), b in poly()) {
            prop_assert_eq!(a.mul(&b).mirror(), a.mirror().mul(&b.mirror()));
        }
    }
}
