use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use super::arith::{divisors, lcm, solve_linear_congruence};
use super::EPSet;
use crate::model::{Element, Gen};

/// Source exponents `p + q·t` map to `to^(r + s·t)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Piece {
    pub p: u64,
    pub q: u64,
    pub to: Gen,
    pub r: BigUint,
    pub s: BigUint,
}

impl Piece {
    pub fn contains(&self, k: u64) -> bool {
        k >= self.p && (k - self.p) % self.q == 0
    }

    fn contains_big(&self, k: &BigUint) -> bool {
        match k.to_u64() {
            Some(k) => self.contains(k),
            None => (k - self.p) % self.q == BigUint::zero(),
        }
    }

    fn eval(&self, k: &BigUint) -> Element {
        let t = (k - self.p) / self.q;
        Element { gen: self.to, exp: &self.r + &self.s * t }
    }

    fn law(&self) -> Law {
        let q = BigInt::from(self.q);
        let slope = BigRational::new(BigInt::from(self.s.clone()), q.clone());
        let intercept = BigRational::from_integer(BigInt::from(self.r.clone()))
            - &slope * BigRational::from_integer(BigInt::from(self.p));
        Law { to: self.to, slope, intercept }
    }
}

/// Affine law `k ↦ to^(slope·k + intercept)` on a residue class.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Law {
    to: Gen,
    slope: BigRational,
    intercept: BigRational,
}

impl Law {
    fn value(&self, k: u64) -> BigRational {
        &self.slope * BigRational::from_integer(BigInt::from(k)) + &self.intercept
    }

    fn matches(&self, k: u64, e: &Element) -> bool {
        e.gen == self.to && self.value(k) == BigRational::from_integer(BigInt::from(e.exp.clone()))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("exponent {0} is not covered")]
    Uncovered(u64),
    #[error("exponent {0} is covered more than once")]
    Overlap(u64),
    #[error("zero threshold, period or intercept")]
    Zero,
    #[error("structure too large to check ({0} exponents)")]
    TooLarge(u64),
}

const MAX_CHECK: u64 = 1 << 22;

/// A total map from positive exponents of one block to elements: finitely many
/// exceptions plus arithmetic-progression pieces with linear exponent action.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EvLinMap {
    exceptions: Vec<(u64, Element)>,
    pieces: Vec<Piece>,
}

impl EvLinMap {
    /// Checks the partition invariant: every `k ≥ 1` is matched exactly once.
    pub fn new(exceptions: Vec<(u64, Element)>, pieces: Vec<Piece>) -> Result<Self, PartitionError> {
        let m = EvLinMap { exceptions, pieces };
        m.check_partition()?;
        Ok(m)
    }

    /// `k ↦ to^(k + by)`.
    pub fn shift(to: Gen, by: impl Into<BigUint>) -> Self {
        EvLinMap {
            exceptions: Vec::new(),
            pieces: vec![Piece { p: 1, q: 1, to, r: by.into() + 1u32, s: BigUint::one() }],
        }
    }

    /// `k ↦ to^k`.
    pub fn identity(to: Gen) -> Self {
        EvLinMap::shift(to, 0u32)
    }

    pub fn exceptions(&self) -> &[(u64, Element)] {
        &self.exceptions
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Least `P` beyond which no exception applies and every piece is active.
    pub fn threshold(&self) -> u64 {
        let p = self.pieces.iter().map(|pc| pc.p).max().unwrap_or(1);
        let e = self.exceptions.iter().map(|(k, _)| k + 1).max().unwrap_or(1);
        p.max(e)
    }

    /// Lcm of piece periods.
    pub fn period(&self) -> u64 {
        self.pieces.iter().fold(1, |acc, pc| lcm(acc, pc.q))
    }

    pub fn check_partition(&self) -> Result<(), PartitionError> {
        if self.pieces.iter().any(|pc| pc.p == 0 || pc.q == 0 || pc.r.is_zero())
            || self.exceptions.iter().any(|(k, e)| *k == 0 || e.exp.is_zero())
        {
            return Err(PartitionError::Zero);
        }
        let end = self.threshold().saturating_add(self.period());
        if end > MAX_CHECK {
            return Err(PartitionError::TooLarge(end));
        }
        let mut seen = BTreeMap::new();
        for (k, _) in &self.exceptions {
            if seen.insert(*k, ()).is_some() {
                return Err(PartitionError::Overlap(*k));
            }
        }
        for k in 1..end {
            let hits = self.exceptions.iter().filter(|(x, _)| *x == k).count()
                + self.pieces.iter().filter(|pc| pc.contains(k)).count();
            match hits {
                0 => return Err(PartitionError::Uncovered(k)),
                1 => {}
                _ => return Err(PartitionError::Overlap(k)),
            }
        }
        Ok(())
    }

    pub fn apply(&self, k: &BigUint) -> Element {
        assert!(!k.is_zero(), "exponents start at 1");
        if let Some(k64) = k.to_u64() {
            if let Some((_, e)) = self.exceptions.iter().find(|(x, _)| *x == k64) {
                return e.clone();
            }
        }
        self.pieces
            .iter()
            .find(|pc| pc.contains_big(k))
            .expect("partition invariant")
            .eval(k)
    }

    pub fn apply_u64(&self, k: u64) -> Element {
        self.apply(&BigUint::from(k))
    }

    /// Block of the image of `k`, without computing the exponent.
    pub fn target_gen(&self, k: u64) -> Gen {
        if let Some((_, e)) = self.exceptions.iter().find(|(x, _)| *x == k) {
            return e.gen;
        }
        self.pieces.iter().find(|pc| pc.contains(k)).expect("partition invariant").to
    }

    fn piece_at(&self, k: u64) -> &Piece {
        self.pieces.iter().find(|pc| pc.contains(k)).expect("partition invariant")
    }

    /// Canonical representative of the extensional map.
    ///
    /// The least period for which every residue class eventually follows one affine
    /// law is found first; residues are then merged greedily (ascending residue,
    /// smallest modulus first) into classes sharing a law, and every piece is
    /// lowered as far as the map agrees with its law. Everything left is an exception.
    pub fn canonical(&self) -> EvLinMap {
        let p0 = self.threshold();
        let l0 = self.period();
        let laws: Vec<Law> = (0..l0)
            .map(|rho| {
                let k = p0 + (rho + l0 - p0 % l0) % l0;
                self.piece_at(k).law()
            })
            .collect();
        let d = divisors(l0)
            .into_iter()
            .find(|&d| (0..l0).all(|r| laws[r as usize] == laws[(r % d) as usize]))
            .expect("l0 divides itself");
        let mut taken = vec![false; d as usize];
        let mut pieces = Vec::new();
        for rho in 0..d {
            if taken[rho as usize] {
                continue;
            }
            let law = &laws[rho as usize];
            for q in divisors(d) {
                let class: Vec<u64> = (0..d).filter(|r| r % q == rho % q).collect();
                if class.iter().all(|&r| !taken[r as usize] && laws[r as usize] == *law) {
                    for &r in &class {
                        taken[r as usize] = true;
                    }
                    let mut k = p0 + (rho % q + q - p0 % q) % q;
                    while k > q && law.matches(k - q, &self.apply_u64(k - q)) {
                        k -= q;
                    }
                    let r = law.value(k);
                    let s = &law.slope * BigRational::from_integer(BigInt::from(q));
                    debug_assert!(r.is_integer() && s.is_integer());
                    pieces.push(Piece {
                        p: k,
                        q,
                        to: law.to,
                        r: r.to_integer().to_biguint().expect("positive exponent"),
                        s: s.to_integer().to_biguint().expect("nonnegative slope"),
                    });
                    break;
                }
            }
        }
        pieces.sort_by_key(|pc| (pc.p, pc.q));
        let top = pieces.iter().map(|pc| pc.p).max().unwrap_or(1);
        let exceptions = (1..top)
            .filter(|&k| !pieces.iter().any(|pc| pc.contains(k)))
            .map(|k| (k, self.apply_u64(k)))
            .collect();
        EvLinMap { exceptions, pieces }
    }

    pub fn is_canonical(&self) -> bool {
        *self == self.canonical()
    }

    /// Exponents whose image lies in block `b`.
    pub fn preimage_of_block(&self, b: Gen) -> EPSet {
        EPSet::from_fn(self.threshold(), self.period(), |k| self.target_gen(k) == b)
    }

    /// Image of `domain` under the map, split by target block; empty parts omitted.
    /// Target exponents must fit in `u64`.
    pub fn image(&self, domain: &EPSet) -> BTreeMap<Gen, EPSet> {
        let mut out: BTreeMap<Gen, EPSet> = BTreeMap::new();
        let mut add = |g: Gen, s: EPSet| {
            if s.is_empty() {
                return;
            }
            let e = out.entry(g).or_insert_with(EPSet::empty);
            *e = e.union(&s);
        };
        for (k, e) in &self.exceptions {
            if domain.member(*k) {
                add(e.gen, EPSet::finite([e.exp.to_u64().expect("image exponent fits u64")]));
            }
        }
        for pc in &self.pieces {
            let r = pc.r.to_u64().expect("image exponent fits u64");
            let s = pc.s.to_u64().expect("image slope fits u64");
            // Indices u = t + 1 of progression members lying in the domain.
            let start = domain.threshold().saturating_sub(pc.p).div_ceil(pc.q) + 1;
            let per = domain.period() / domain.period().gcd(&pc.q);
            let hits = EPSet::from_fn(start, per, |u| domain.member(pc.p + pc.q * (u - 1)));
            if hits.is_empty() {
                continue;
            }
            if s == 0 {
                add(pc.to, EPSet::finite([r]));
            } else {
                let img = EPSet::from_fn(r + s * (hits.threshold() - 1), s * hits.period(), |k| {
                    k >= r && (k - r) % s == 0 && hits.member((k - r) / s + 1)
                });
                add(pc.to, img);
            }
        }
        out
    }
}

/// `k ↦ g(f(k))`, where `g(c)` is the map applied on block `c`. Canonical result.
pub fn compose<'a>(f: &EvLinMap, g: impl Fn(Gen) -> &'a EvLinMap) -> EvLinMap {
    let mut exceptions: Vec<(u64, Element)> = Vec::new();
    let mut pieces: Vec<Piece> = Vec::new();
    for (k, e) in &f.exceptions {
        exceptions.push((*k, g(e.gen).apply(&e.exp)));
    }
    for pc in &f.pieces {
        let gm = g(pc.to);
        if pc.s.is_zero() {
            let v = gm.apply(&pc.r);
            pieces.push(Piece { p: pc.p, q: pc.q, to: v.gen, r: v.exp, s: BigUint::zero() });
            continue;
        }
        for (k2, e2) in &gm.exceptions {
            let k2b = BigUint::from(*k2);
            if k2b >= pc.r && ((&k2b - &pc.r) % &pc.s).is_zero() {
                let t = ((&k2b - &pc.r) / &pc.s).to_u64().expect("small");
                exceptions.push((source_add(pc.p, pc.q, t), e2.clone()));
            }
        }
        for pc2 in &gm.pieces {
            // r + s·t ≡ p2 (mod q2), r + s·t ≥ p2
            let s_mod = (&pc.s % pc2.q).to_u64().expect("reduced");
            let r_mod = (&pc.r % pc2.q).to_u64().expect("reduced");
            let rhs = (pc2.p % pc2.q + pc2.q - r_mod) % pc2.q;
            let Some((t0, m)) = solve_linear_congruence(s_mod, rhs, pc2.q) else {
                continue;
            };
            let tmin = if pc.r >= BigUint::from(pc2.p) {
                0
            } else {
                let gap = BigUint::from(pc2.p) - &pc.r;
                gap.div_ceil(&pc.s).to_u64().expect("small")
            };
            let t1 = tmin + (t0 % m + m - tmin % m) % m;
            let mid = &pc.r + &pc.s * t1;
            let t2 = (mid - pc2.p) / pc2.q;
            let g = pc.s.gcd(&BigUint::from(pc2.q));
            pieces.push(Piece {
                p: source_add(pc.p, pc.q, t1),
                q: pc.q.checked_mul(m).expect("period overflow"),
                to: pc2.to,
                r: &pc2.r + &pc2.s * t2,
                s: &pc2.s * (&pc.s / g),
            });
        }
    }
    exceptions.sort_by_key(|(k, _)| *k);
    let raw = EvLinMap { exceptions, pieces };
    debug_assert_eq!(raw.check_partition(), Ok(()));
    raw.canonical()
}

fn source_add(p: u64, q: u64, t: u64) -> u64 {
    q.checked_mul(t).and_then(|x| x.checked_add(p)).expect("source exponent overflow")
}

/// Composes two families of per-block maps: block `a` of the result is
/// `compose(f[a], g)`.
pub fn compose_family(f: &[EvLinMap], g: &[EvLinMap]) -> Vec<EvLinMap> {
    f.iter().map(|m| compose(m, |c| &g[c.0])).collect()
}

/// `j`-fold composition of a family with itself, by square-and-multiply.
pub fn power(family: &[EvLinMap], j: &BigUint) -> Vec<EvLinMap> {
    assert!(!j.is_zero(), "power exponent must be at least 1");
    let mut acc: Option<Vec<EvLinMap>> = None;
    let mut base: Vec<EvLinMap> = family.iter().map(EvLinMap::canonical).collect();
    let bits = j.bits();
    for i in 0..bits {
        if j.bit(i) {
            acc = Some(match acc {
                None => base.clone(),
                Some(a) => compose_family(&a, &base),
            });
        }
        if i + 1 < bits {
            base = compose_family(&base, &base);
        }
    }
    acc.expect("j ≥ 1")
}

/// Extensional equality, decided by pointwise comparison on `1..=P+2L`.
pub fn maps_equal(f: &EvLinMap, g: &EvLinMap) -> bool {
    first_difference(f, g).is_none()
}

/// Smallest exponent where the maps differ, if any.
pub fn first_difference(f: &EvLinMap, g: &EvLinMap) -> Option<u64> {
    if f == g {
        return None;
    }
    let p = f.threshold().max(g.threshold());
    let l = lcm(f.period(), g.period());
    (1..=p + 2 * l).find(|&k| f.apply_u64(k) != g.apply_u64(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const A: Gen = Gen(0);
    const B: Gen = Gen(1);

    fn el(g: Gen, e: u64) -> Element {
        Element::new(g, e)
    }

    fn pc(p: u64, q: u64, to: Gen, r: u64, s: u64) -> Piece {
        Piece { p, q, to, r: r.into(), s: s.into() }
    }

    #[test]
    fn apply_examples() {
        assert_eq!(EvLinMap::shift(A, 1u32).apply_u64(5), el(A, 6));
        let m = EvLinMap::new(vec![(1, el(A, 2))], vec![pc(2, 1, A, 3, 1)]).unwrap();
        assert_eq!(m.apply_u64(1), el(A, 2));
        assert_eq!(m.apply_u64(10), el(A, 11));
    }

    #[test]
    fn canonical_absorbs_exceptions() {
        let m = EvLinMap::new(vec![(1, el(A, 2))], vec![pc(2, 1, A, 3, 1)]).unwrap();
        assert_eq!(m.canonical(), EvLinMap::shift(A, 1u32));
        assert!(maps_equal(&m, &EvLinMap::shift(A, 1u32)));
        assert!(!maps_equal(&EvLinMap::shift(A, 1u32), &EvLinMap::shift(A, 2u32)));
        assert_eq!(first_difference(&EvLinMap::shift(A, 1u32), &EvLinMap::shift(A, 2u32)), Some(1));
    }

    #[test]
    fn canonical_merges_residues() {
        // odds and evens with the same law collapse to one piece
        let m = EvLinMap::new(vec![], vec![pc(1, 2, B, 4, 2), pc(2, 2, B, 5, 2)]).unwrap();
        assert_eq!(m.canonical(), EvLinMap::new(vec![], vec![pc(1, 1, B, 4, 1)]).unwrap());
    }

    #[test]
    fn compose_examples() {
        let sh = EvLinMap::shift(A, 1u32);
        let two = compose(&sh, |_| &sh);
        assert_eq!(two, EvLinMap::new(vec![], vec![pc(1, 1, A, 3, 1)]).unwrap());
        let id = EvLinMap::identity(A);
        let f = EvLinMap::new(vec![(1, el(A, 7))], vec![pc(2, 2, A, 1, 3), pc(3, 2, A, 9, 0)]).unwrap();
        assert_eq!(compose(&f, |_| &id), f.canonical());
    }

    #[test]
    fn power_examples() {
        let fam = vec![EvLinMap::shift(A, 1u32)];
        assert_eq!(power(&fam, &5u32.into())[0], EvLinMap::shift(A, 5u32));
        assert_eq!(power(&fam, &1u32.into())[0], fam[0]);
    }

    #[test]
    fn preimage_and_image() {
        let m = EvLinMap::new(vec![], vec![pc(1, 2, A, 1, 1), pc(2, 2, B, 3, 2)]).unwrap();
        assert_eq!(m.preimage_of_block(A), EPSet::progression(1, 2));
        assert_eq!(m.preimage_of_block(B), EPSet::progression(2, 2));
        let img = m.image(&EPSet::full());
        assert_eq!(img[&A], EPSet::full());
        assert_eq!(img[&B], EPSet::progression(3, 2));
        let img = m.image(&EPSet::progression(3, 4));
        // k = 3,7,11,… → t = 1,3,5,… → a^(1+t) = a^2, a^4, …
        assert_eq!(img[&A], EPSet::progression(2, 2));
        assert!(!img.contains_key(&B));
    }

    #[test]
    fn partition_errors() {
        assert_eq!(
            EvLinMap::new(vec![], vec![pc(2, 1, A, 1, 1)]).unwrap_err(),
            PartitionError::Uncovered(1)
        );
        assert_eq!(
            EvLinMap::new(vec![(3, el(A, 1))], vec![pc(1, 1, A, 1, 1)]).unwrap_err(),
            PartitionError::Overlap(3)
        );
        assert_eq!(
            EvLinMap::new(vec![], vec![pc(1, 2, A, 1, 1), pc(1, 3, A, 1, 1)]).unwrap_err(),
            PartitionError::Overlap(1)
        );
    }

    /// Random total map over blocks {0,1}: period q, one piece per residue,
    /// exceptions filling the gaps.
    pub(crate) fn arb_map() -> impl Strategy<Value = EvLinMap> {
        (1u64..4).prop_flat_map(|q| {
            (
                prop::collection::vec((0u64..3, 0usize..2, 1u64..6, 0u64..3), q as usize),
                prop::collection::vec((0usize..2, 1u64..9), 9),
            )
                .prop_map(move |(ps, ex)| {
                    let mut pieces = Vec::new();
                    for (i, (lift, to, r, s)) in ps.into_iter().enumerate() {
                        pieces.push(pc(i as u64 + 1 + lift * q, q, Gen(to), r, s));
                    }
                    let exceptions = (1..pieces.iter().map(|p| p.p).max().unwrap())
                        .filter(|&k| !pieces.iter().any(|p| p.contains(k)))
                        .map(|k| {
                            let (g, e) = ex[(k as usize) % ex.len()];
                            (k, el(Gen(g), e))
                        })
                        .collect();
                    EvLinMap::new(exceptions, pieces).expect("constructed as a partition")
                })
        })
    }

    proptest! {
        #[test]
        fn compose_is_pointwise(f in arb_map(), g0 in arb_map(), g1 in arb_map()) {
            let gs = [g0, g1];
            let h = compose(&f, |c| &gs[c.0]);
            prop_assert!(h.is_canonical());
            for k in 1..=500u64 {
                let mid = f.apply_u64(k);
                prop_assert_eq!(h.apply_u64(k), gs[mid.gen.0].apply(&mid.exp));
            }
        }

        #[test]
        fn canonical_preserves_extension(f in arb_map()) {
            let c = f.canonical();
            prop_assert_eq!(c.check_partition(), Ok(()));
            prop_assert_eq!(c.canonical(), c.clone());
            for k in 1..=1000u64 {
                prop_assert_eq!(c.apply_u64(k), f.apply_u64(k));
            }
        }

        #[test]
        fn maps_equal_agrees_with_scan(f in arb_map(), g in arb_map()) {
            let p = f.threshold().max(g.threshold());
            let l = lcm(f.period(), g.period());
            let scan = (1..=p + 2 * l + 50).all(|k| f.apply_u64(k) == g.apply_u64(k));
            prop_assert_eq!(maps_equal(&f, &g), scan);
            prop_assert!(maps_equal(&f, &f.canonical()));
        }

        #[test]
        fn preimages_partition(f in arb_map()) {
            let a = f.preimage_of_block(A);
            let b = f.preimage_of_block(B);
            prop_assert!(a.is_disjoint(&b));
            prop_assert_eq!(a.union(&b), EPSet::full());
            for k in 1..=300u64 {
                prop_assert_eq!(a.member(k), f.apply_u64(k).gen == A);
            }
        }

        #[test]
        fn image_matches_scan(f in arb_map(), p in 1u64..8, q in 1u64..5) {
            let dom = EPSet::progression(p, q);
            let img = f.image(&dom);
            let bound = 60u64;
            for (g, set) in &img {
                for k in 1..=bound {
                    if set.member(k) {
                        // every member is hit by some domain point
                        let hit = (1..=2000u64).any(|x| dom.member(x) && f.apply_u64(x) == el(*g, k));
                        prop_assert!(hit, "k={} not hit", k);
                    }
                }
            }
            for x in 1..=200u64 {
                if dom.member(x) {
                    let e = f.apply_u64(x);
                    prop_assert!(img[&e.gen].member_big(&e.exp));
                }
            }
        }
    }
}
