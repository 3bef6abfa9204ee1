//! HOMFLY polynomial of a diagram by descending-diagram skein recursion,
//! normalized by `ℓ·P(L₊) + ℓ⁻¹·P(L₋) + m·P(L₀) = 0` and `P(unknot) = 1`.

use std::collections::HashMap;

use super::diagram::{KnotDiagram, Visit};
use super::poly::LaurentPoly2;
use crate::error::{Error, Result};

pub const DEFAULT_CROSSING_CAP: usize = 200;

/// Distinct subdiagrams the skein expansion may memoise before giving up.
pub const SKEIN_NODE_BUDGET: usize = 200_000;

/// Compact working form: visits encoded as `2·crossing + over`.
#[derive(Clone, Debug)]
struct Code {
    comps: Vec<Vec<u32>>,
    signs: Vec<i8>,
}

#[inline]
fn crossing(v: u32) -> usize {
    (v >> 1) as usize
}

#[inline]
fn is_over(v: u32) -> bool {
    v & 1 == 1
}

impl Code {
    fn from_diagram(d: &KnotDiagram) -> Self {
        Code {
            comps: d
                .components
                .iter()
                .map(|c| c.iter().map(|v| (v.crossing as u32) << 1 | v.over as u32).collect())
                .collect(),
            signs: d.signs.clone(),
        }
    }

    fn to_diagram(&self) -> KnotDiagram {
        KnotDiagram {
            components: self
                .comps
                .iter()
                .map(|c| c.iter().map(|&v| Visit { crossing: crossing(v), over: is_over(v) }).collect())
                .collect(),
            signs: self.signs.clone(),
            positions: vec![[f64::NAN, f64::NAN]; self.signs.len()],
        }
    }

    fn crossing_count(&self) -> usize {
        self.signs.len()
    }

    /// `(component, index)` of both visits of every crossing.
    fn locations(&self) -> Vec<[(usize, usize); 2]> {
        let mut loc = vec![[(usize::MAX, 0); 2]; self.signs.len()];
        for (ci, comp) in self.comps.iter().enumerate() {
            for (i, &v) in comp.iter().enumerate() {
                let slot = &mut loc[crossing(v)];
                if slot[0].0 == usize::MAX {
                    slot[0] = (ci, i);
                } else {
                    slot[1] = (ci, i);
                }
            }
        }
        loc
    }

    /// Drops the marked crossings and renumbers the rest in order of first
    /// appearance.
    fn remove(&mut self, dead: &[bool]) {
        let mut relabel = vec![u32::MAX; self.signs.len()];
        let mut signs = Vec::with_capacity(self.signs.len());
        for comp in &mut self.comps {
            comp.retain(|&v| !dead[crossing(v)]);
            for v in comp.iter_mut() {
                let c = crossing(*v);
                if relabel[c] == u32::MAX {
                    relabel[c] = signs.len() as u32;
                    signs.push(self.signs[c]);
                }
                *v = relabel[c] << 1 | (*v & 1);
            }
        }
        self.signs = signs;
    }

    fn reidemeister1(&mut self) -> bool {
        let mut dead = vec![false; self.signs.len()];
        let mut any = false;
        for comp in &self.comps {
            let len = comp.len();
            for i in 0..len {
                let (a, b) = (comp[i], comp[(i + 1) % len]);
                if len >= 2 && crossing(a) == crossing(b) {
                    dead[crossing(a)] = true;
                    any = true;
                }
            }
        }
        if any {
            self.remove(&dead);
        }
        any
    }

    fn reidemeister2(&mut self) -> bool {
        let loc = self.locations();
        let mut dead = vec![false; self.signs.len()];
        let mut any = false;
        let adjacent = |a: (usize, usize), b: (usize, usize), comps: &Vec<Vec<u32>>| {
            if a.0 != b.0 {
                return false;
            }
            let len = comps[a.0].len();
            (a.1 + 1) % len == b.1 || (b.1 + 1) % len == a.1
        };
        for (ci, comp) in self.comps.iter().enumerate() {
            let len = comp.len();
            if len < 2 {
                continue;
            }
            for i in 0..len {
                let (v, w) = (comp[i], comp[(i + 1) % len]);
                let (c, d) = (crossing(v), crossing(w));
                if c == d || dead[c] || dead[d] || is_over(v) != is_over(w) {
                    continue;
                }
                if self.signs[c] == self.signs[d] {
                    continue;
                }
                let other = |x: usize, here: (usize, usize)| if loc[x][0] == here { loc[x][1] } else { loc[x][0] };
                let oc = other(c, (ci, i));
                let od = other(d, (ci, (i + 1) % len));
                if adjacent(oc, od, &self.comps) {
                    dead[c] = true;
                    dead[d] = true;
                    any = true;
                }
            }
        }
        if any {
            self.remove(&dead);
        }
        any
    }

    fn simplify(&mut self) {
        loop {
            let a = self.reidemeister1();
            let b = self.reidemeister2();
            if !a && !b {
                break;
            }
        }
    }

    fn switch(&self, c: usize) -> Code {
        let mut out = self.clone();
        for comp in &mut out.comps {
            for v in comp.iter_mut() {
                if crossing(*v) == c {
                    *v ^= 1;
                }
            }
        }
        out.signs[c] = -out.signs[c];
        out
    }

    /// Oriented smoothing at crossing `c`.
    fn smooth(&self, c: usize) -> Code {
        let loc = self.locations()[c];
        let (a, b) = (loc[0], loc[1]);
        let mut comps: Vec<Vec<u32>> = Vec::with_capacity(self.comps.len() + 1);
        if a.0 == b.0 {
            let s = &self.comps[a.0];
            let (i, j) = (a.1.min(b.1), a.1.max(b.1));
            for (ci, comp) in self.comps.iter().enumerate() {
                if ci != a.0 {
                    comps.push(comp.clone());
                }
            }
            comps.push(s[i + 1..j].to_vec());
            let mut rest = s[j + 1..].to_vec();
            rest.extend_from_slice(&s[..i]);
            comps.push(rest);
        } else {
            let (sa, sb) = (&self.comps[a.0], &self.comps[b.0]);
            let mut merged = sa[..a.1].to_vec();
            merged.extend_from_slice(&sb[b.1 + 1..]);
            merged.extend_from_slice(&sb[..b.1]);
            merged.extend_from_slice(&sa[a.1 + 1..]);
            for (ci, comp) in self.comps.iter().enumerate() {
                if ci != a.0 && ci != b.0 {
                    comps.push(comp.clone());
                }
            }
            comps.push(merged);
        }
        let mut out = Code { comps, signs: self.signs.clone() };
        let mut dead = vec![false; out.signs.len()];
        dead[c] = true;
        out.remove(&dead);
        out
    }

    /// Base point per component minimizing crossings first met as under.
    fn choose_bases(&self) -> Vec<usize> {
        self.comps
            .iter()
            .map(|comp| {
                let len = comp.len();
                let mut first = HashMap::with_capacity(len / 2);
                let mut pairs = Vec::new();
                for (i, &v) in comp.iter().enumerate() {
                    if let Some((j, vj)) = first.insert(crossing(v), (i, v)) {
                        pairs.push((j, i, is_over(vj)));
                    }
                }
                let mut best = (usize::MAX, 0);
                for base in 0..len {
                    // From `base`, position `p` is met before `q` unless the
                    // base lies in `(p, q]`.
                    let bad = pairs
                        .iter()
                        .filter(|&&(p, q, p_over)| {
                            let p_first = base <= p || base > q;
                            if p_first {
                                !p_over
                            } else {
                                p_over
                            }
                        })
                        .count();
                    if bad < best.0 {
                        best = (bad, base);
                    }
                }
                best.1
            })
            .collect()
    }

    /// First crossing met as under in the traversal from the chosen bases,
    /// with components stacked in order (earlier components above).
    fn first_bad(&self, bases: &[usize]) -> Option<usize> {
        let mut comp_of_first: Vec<Option<usize>> = vec![None; self.signs.len()];
        for (ci, comp) in self.comps.iter().enumerate() {
            let len = comp.len();
            for k in 0..len {
                let v = comp[(bases[ci] + k) % len];
                let c = crossing(v);
                if comp_of_first[c].is_none() {
                    if !is_over(v) {
                        return Some(c);
                    }
                    comp_of_first[c] = Some(ci);
                }
            }
        }
        None
    }

    /// Memo key: components rotated to their bases, crossings relabeled in
    /// order of appearance, signs folded in.
    fn key(&self, bases: &[usize]) -> Vec<u32> {
        let mut relabel = vec![u32::MAX; self.signs.len()];
        let mut next = 0u32;
        let mut key = Vec::with_capacity(2 * self.signs.len() + self.comps.len());
        for (ci, comp) in self.comps.iter().enumerate() {
            let len = comp.len();
            for k in 0..len {
                let v = comp[(bases[ci] + k) % len];
                let c = crossing(v);
                if relabel[c] == u32::MAX {
                    relabel[c] = next;
                    next += 1;
                }
                key.push(relabel[c] << 2 | (v & 1) << 1 | (self.signs[c] > 0) as u32);
            }
            key.push(u32::MAX);
        }
        key
    }
}

struct Engine {
    memo: HashMap<Vec<u32>, LaurentPoly2>,
    delta_pows: Vec<LaurentPoly2>,
    budget: usize,
}

impl Engine {
    fn delta_pow(&mut self, k: usize) -> LaurentPoly2 {
        while self.delta_pows.len() <= k {
            let next = self.delta_pows.last().unwrap().mul(&LaurentPoly2::delta());
            self.delta_pows.push(next);
        }
        self.delta_pows[k].clone()
    }

    fn eval(&mut self, mut code: Code) -> Option<LaurentPoly2> {
        code.simplify();
        let empties = code.comps.iter().filter(|c| c.is_empty()).count();
        code.comps.retain(|c| !c.is_empty());
        if code.comps.is_empty() {
            return Some(self.delta_pow(empties - 1));
        }
        let factor = self.delta_pow(empties);
        if code.comps.len() == 1 && code.crossing_count() <= 2 {
            return Some(factor);
        }
        let bases = code.choose_bases();
        let key = code.key(&bases);
        if let Some(p) = self.memo.get(&key) {
            return Some(p.mul(&factor));
        }
        if self.memo.len() >= self.budget {
            return None;
        }
        let value = match code.first_bad(&bases) {
            None => self.delta_pow(code.comps.len() - 1),
            Some(c) => {
                let s = code.signs[c] as i32;
                let switched = self.eval(code.switch(c))?;
                let smoothed = self.eval(code.smooth(c))?;
                // P(D) = −ℓ^(−2s)·P(switched) − ℓ^(−s)·m·P(smoothed)
                switched.scale(-1, -2 * s, 0).add(&smoothed.scale(-1, -s, 1))
            }
        };
        self.memo.insert(key, value.clone());
        Some(value.mul(&factor))
    }
}

/// Applies Reidemeister-1 and -2 reductions until none applies.
pub fn simplify(d: &KnotDiagram) -> KnotDiagram {
    let mut code = Code::from_diagram(d);
    code.simplify();
    code.to_diagram()
}

pub fn homfly(d: &KnotDiagram) -> Result<LaurentPoly2> {
    homfly_with_cap(d, DEFAULT_CROSSING_CAP)
}

/// HOMFLY polynomial; errors when more than `cap` crossings remain after
/// simplification.
pub fn homfly_with_cap(d: &KnotDiagram, cap: usize) -> Result<LaurentPoly2> {
    d.validate()?;
    let mut code = Code::from_diagram(d);
    code.simplify();
    if code.crossing_count() > cap {
        return Err(Error::TooManyCrossings { count: code.crossing_count(), cap });
    }
    expand(code, SKEIN_NODE_BUDGET)
}

fn expand(code: Code, budget: usize) -> Result<LaurentPoly2> {
    let crossings = code.crossing_count();
    let mut engine = Engine { memo: HashMap::new(), delta_pows: vec![LaurentPoly2::one()], budget };
    engine.eval(code).ok_or(Error::SkeinBudget { crossings, nodes: budget })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(terms: &[((i32, i32), i64)]) -> LaurentPoly2 {
        LaurentPoly2::from_terms(terms.iter().copied())
    }

    fn braid(strands: usize, word: &[i32]) -> KnotDiagram {
        KnotDiagram::from_braid(strands, word).unwrap()
    }

    /// Right-handed trefoil expanded by hand from its positive 3-crossing
    /// diagram: switching one crossing gives the unknot, smoothing it gives
    /// the positive Hopf link, whose own expansion gives a 2-component
    /// unlink and an unknot.
    fn hand_trefoil() -> LaurentPoly2 {
        let unknot = LaurentPoly2::one();
        let unlink2 = LaurentPoly2::delta();
        let hopf = unlink2.scale(-1, -2, 0).add(&unknot.scale(-1, -1, 1));
        unknot.scale(-1, -2, 0).add(&hopf.scale(-1, -1, 1))
    }

    #[test]
    fn unknot_and_unlinks() {
        assert!(homfly(&KnotDiagram::unknot()).unwrap().is_one());
        let unlink3 = KnotDiagram { components: vec![vec![], vec![], vec![]], signs: vec![], positions: vec![] };
        assert_eq!(homfly(&unlink3).unwrap(), LaurentPoly2::delta().pow(2));
        assert!(homfly(&braid(2, &[1, -1, 1])).unwrap().is_one());
    }

    #[test]
    fn trefoil_matches_hand_expansion() {
        let t = homfly(&braid(2, &[1, 1, 1])).unwrap();
        assert_eq!(t, hand_trefoil());
        assert_eq!(t, p(&[((-4, 0), -1), ((-2, 0), -2), ((-2, 2), 1)]));
        assert_eq!(t.terms().len(), 3);
    }

    #[test]
    fn hopf_link() {
        let h = homfly(&braid(2, &[1, 1])).unwrap();
        assert_eq!(h, p(&[((-3, -1), 1), ((-1, -1), 1), ((-1, 1), -1)]));
    }

    #[test]
    fn figure_eight_is_amphichiral() {
        let f = homfly(&braid(3, &[1, -2, 1, -2])).unwrap();
        assert_eq!(f, p(&[((-2, 0), -1), ((0, 0), -1), ((2, 0), -1), ((0, 2), 1)]));
        assert_eq!(f.mirror(), f);
        assert_eq!(homfly(&braid(3, &[1, -2, 1, -2]).mirror()).unwrap(), f);
    }

    #[test]
    fn mirror_diagram_mirrors_polynomial() {
        for word in [&[1, 1, 1][..], &[1, 1, 1, 1, 1], &[1, 1, 1, 2, -1, 2]] {
            let d = braid(3, word);
            assert_eq!(homfly(&d.mirror()).unwrap(), homfly(&d).unwrap().mirror());
        }
    }

    #[test]
    fn connected_sum_multiplies() {
        let t = braid(2, &[1, 1, 1]);
        let f = braid(3, &[1, -2, 1, -2]);
        let pt = homfly(&t).unwrap();
        let pf = homfly(&f).unwrap();
        assert_eq!(homfly(&t.connected_sum(&t).unwrap()).unwrap(), pt.mul(&pt));
        assert_eq!(homfly(&t.connected_sum(&f).unwrap()).unwrap(), pt.mul(&pf));
        assert_eq!(homfly(&t.connected_sum(&t.mirror()).unwrap()).unwrap(), pt.mul(&pt.mirror()));
    }

    #[test]
    fn kinks_do_not_matter() {
        let t = braid(2, &[1, 1, 1]);
        let pt = homfly(&t).unwrap();
        for at in 0..6 {
            for sign in [-1, 1] {
                for over in [false, true] {
                    assert_eq!(homfly(&t.with_kink(0, at, sign, over)).unwrap(), pt);
                }
            }
        }
    }

    #[test]
    fn determinants() {
        let cases: [(usize, &[i32], f64); 7] = [
            (2, &[1, 1, 1], 3.0),
            (3, &[1, -2, 1, -2], 5.0),
            (2, &[1, 1, 1, 1, 1], 5.0),
            (3, &[1, 1, 1, 2, -1, 2], 7.0),
            (4, &[1, 1, 2, -1, -3, 2, -3], 9.0),
            (3, &[1, 1, 1, -2, 1, -2], 11.0),
            (3, &[1, 1, -2, 1, -2, -2], 13.0),
        ];
        for (s, w, det) in cases {
            let d = braid(s, w);
            assert_eq!(d.components.len(), 1);
            assert!((homfly(&d).unwrap().determinant() - det).abs() < 1e-9, "{w:?}");
        }
    }

    #[test]
    fn cap_is_enforced() {
        let d = braid(2, &[1; 9]);
        assert!(matches!(homfly_with_cap(&d, 5), Err(Error::TooManyCrossings { count: 9, cap: 5 })));
        let mut code = Code::from_diagram(&d);
        code.simplify();
        assert!(matches!(expand(code, 2), Err(Error::SkeinBudget { crossings: 9, nodes: 2 })));
    }

    #[test]
    fn simplify_removes_reducible_crossings() {
        let d = braid(3, &[1, -1, 2, 2, -2, 1]);
        let s = simplify(&d);
        s.validate().unwrap();
        assert!(s.crossing_count() <= 2);
    }
}
