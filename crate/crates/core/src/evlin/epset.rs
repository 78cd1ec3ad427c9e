use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use super::arith::{divisors, lcm};

/// An eventually periodic subset of the positive integers.
///
/// Stored canonically: beyond `threshold` membership depends only on `k mod period`,
/// `period` is the least such period and `threshold` the least threshold for it.
/// Members below the threshold are listed explicitly.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EPSet {
    threshold: u64,
    period: u64,
    pattern: Vec<bool>,
    below: BTreeSet<u64>,
}

impl EPSet {
    /// Canonical set from a membership predicate known to be periodic with period
    /// `period_hint` from `threshold_hint` on.
    pub fn from_fn(threshold_hint: u64, period_hint: u64, member: impl Fn(u64) -> bool) -> Self {
        let p0 = threshold_hint.max(1);
        let l0 = period_hint.max(1);
        let mut raw = vec![false; l0 as usize];
        for i in 0..l0 {
            let k = p0 + i;
            raw[(k % l0) as usize] = member(k);
        }
        let period = divisors(l0)
            .into_iter()
            .find(|&d| (0..l0).all(|r| raw[r as usize] == raw[(r % d) as usize]))
            .expect("l0 divides itself");
        let pattern: Vec<bool> = raw[..period as usize].to_vec();
        let mut threshold = p0;
        while threshold > 1 && member(threshold - 1) == pattern[((threshold - 1) % period) as usize] {
            threshold -= 1;
        }
        let below = (1..threshold).filter(|&k| member(k)).collect();
        EPSet { threshold, period, pattern, below }
    }

    pub fn empty() -> Self {
        EPSet { threshold: 1, period: 1, pattern: vec![false], below: BTreeSet::new() }
    }

    /// All positive integers.
    pub fn full() -> Self {
        EPSet { threshold: 1, period: 1, pattern: vec![true], below: BTreeSet::new() }
    }

    /// `{p + q·t : t ≥ 0}`.
    pub fn progression(p: u64, q: u64) -> Self {
        assert!(p >= 1 && q >= 1);
        EPSet::from_fn(p, q, |k| k >= p && (k - p) % q == 0)
    }

    pub fn finite(members: impl IntoIterator<Item = u64>) -> Self {
        let set: BTreeSet<u64> = members.into_iter().filter(|&k| k >= 1).collect();
        let top = set.iter().next_back().map_or(1, |m| m + 1);
        EPSet::from_fn(top, 1, |k| set.contains(&k))
    }

    /// Union of a finite set and progressions `(p, q)`.
    pub fn from_parts(finite: &[u64], progressions: &[(u64, u64)]) -> Self {
        let mut s = EPSet::finite(finite.iter().copied());
        for &(p, q) in progressions {
            s = s.union(&EPSet::progression(p, q));
        }
        s
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn member(&self, k: u64) -> bool {
        if k == 0 {
            return false;
        }
        if k < self.threshold {
            self.below.contains(&k)
        } else {
            self.pattern[(k % self.period) as usize]
        }
    }

    pub fn member_big(&self, k: &BigUint) -> bool {
        match k.to_u64() {
            Some(k) => self.member(k),
            None => self.pattern[(k % self.period).to_usize().expect("reduced")],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.below.is_empty() && self.is_finite()
    }

    pub fn is_finite(&self) -> bool {
        self.pattern.iter().all(|b| !b)
    }

    pub fn is_full(&self) -> bool {
        *self == EPSet::full()
    }

    /// Number of members, if finite.
    pub fn len(&self) -> Option<usize> {
        self.is_finite().then(|| self.below.len())
    }

    pub fn least(&self) -> Option<u64> {
        if let Some(&m) = self.below.iter().next() {
            return Some(m);
        }
        (self.threshold..self.threshold + self.period).find(|&k| self.member(k))
    }

    /// Members `≤ bound`, ascending.
    pub fn members_up_to(&self, bound: u64) -> impl Iterator<Item = u64> + '_ {
        (1..=bound).filter(move |&k| self.member(k))
    }

    fn combine(&self, other: &EPSet, op: impl Fn(bool, bool) -> bool) -> EPSet {
        let p0 = self.threshold.max(other.threshold);
        let l0 = lcm(self.period, other.period);
        EPSet::from_fn(p0, l0, |k| op(self.member(k), other.member(k)))
    }

    pub fn union(&self, other: &EPSet) -> EPSet {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersect(&self, other: &EPSet) -> EPSet {
        self.combine(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &EPSet) -> EPSet {
        self.combine(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> EPSet {
        EPSet::from_fn(self.threshold, self.period, |k| !self.member(k))
    }

    pub fn is_subset(&self, other: &EPSet) -> bool {
        self.difference(other).is_empty()
    }

    pub fn is_disjoint(&self, other: &EPSet) -> bool {
        self.intersect(other).is_empty()
    }

    /// Pairwise disjoint progressions `(p, q)` covering the eventual part, each
    /// started as low as membership allows. Residue classes are merged greedily
    /// into the coarsest class mod a divisor of the period.
    pub fn progressions(&self) -> Vec<(u64, u64)> {
        let d = self.period;
        let mut taken = vec![false; d as usize];
        let mut out = Vec::new();
        for rho in 0..d {
            if !self.pattern[rho as usize] || taken[rho as usize] {
                continue;
            }
            for q in divisors(d) {
                let class: Vec<u64> = (0..d).filter(|r| r % q == rho % q).collect();
                if class.iter().all(|&r| self.pattern[r as usize] && !taken[r as usize]) {
                    for &r in &class {
                        taken[r as usize] = true;
                    }
                    let mut p = self.threshold + (rho % q + q - self.threshold % q) % q;
                    while p > q && self.member(p - q) {
                        p -= q;
                    }
                    out.push((p, q));
                    break;
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Members not covered by [`EPSet::progressions`].
    pub fn finite_part(&self) -> Vec<u64> {
        let progs = self.progressions();
        self.below
            .iter()
            .copied()
            .filter(|&k| !progs.iter().any(|&(p, q)| k >= p && (k - p) % q == 0))
            .collect()
    }
}

impl fmt::Debug for EPSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for EPSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.finite_part().iter().map(|k| k.to_string()).collect();
        for (p, q) in self.progressions() {
            parts.push(format!("{p}+{q}t"));
        }
        if parts.is_empty() {
            f.write_str("{}")
        } else {
            write!(f, "{{{}}}", parts.join(", "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(fin: &[u64], progs: &[(u64, u64)], k: u64) -> bool {
        fin.contains(&k) || progs.iter().any(|&(p, q)| k >= p && (k - p) % q == 0)
    }

    #[test]
    fn basic_identities() {
        let n = EPSet::full();
        assert_eq!(n.intersect(&n), n);
        let odd = EPSet::progression(1, 2);
        let even = EPSet::progression(2, 2);
        assert_eq!(odd.union(&even), n);
        assert!(odd.is_disjoint(&even));
        assert_eq!(odd.complement(), even);
    }

    #[test]
    fn crt_intersection() {
        let x = EPSet::progression(1, 2).intersect(&EPSet::progression(1, 3));
        assert_eq!(x, EPSet::progression(1, 6));
        for k in 1..=100 {
            assert_eq!(x.member(k), k % 2 == 1 && k % 3 == 1);
        }
        assert_eq!(x.progressions(), vec![(1, 6)]);
    }

    #[test]
    fn threshold_is_minimal() {
        // {3,4,5,...} written as {5+t} ∪ {3,4}
        let s = EPSet::from_parts(&[3, 4], &[(5, 1)]);
        assert_eq!(s.threshold(), 3);
        assert_eq!(s.progressions(), vec![(3, 1)]);
        assert!(s.finite_part().is_empty());
    }

    #[test]
    fn empty_and_finite() {
        assert!(EPSet::empty().is_empty());
        let f = EPSet::finite([2, 7]);
        assert!(f.is_finite());
        assert_eq!(f.len(), Some(2));
        assert_eq!(f.least(), Some(2));
        assert_eq!(f.to_string(), "{2, 7}");
        assert_eq!(EPSet::empty().to_string(), "{}");
    }

    fn arb_set() -> impl Strategy<Value = (Vec<u64>, Vec<(u64, u64)>)> {
        (
            prop::collection::vec(1u64..30, 0..4),
            prop::collection::vec((1u64..20, 1u64..7), 0..3),
        )
    }

    proptest! {
        #[test]
        fn algebra_matches_brute_force((f1, p1) in arb_set(), (f2, p2) in arb_set()) {
            let a = EPSet::from_parts(&f1, &p1);
            let b = EPSet::from_parts(&f2, &p2);
            let (u, i, d, c) = (a.union(&b), a.intersect(&b), a.difference(&b), a.complement());
            for k in 1..=1000u64 {
                let x = brute(&f1, &p1, k);
                let y = brute(&f2, &p2, k);
                prop_assert_eq!(a.member(k), x);
                prop_assert_eq!(u.member(k), x || y);
                prop_assert_eq!(i.member(k), x && y);
                prop_assert_eq!(d.member(k), x && !y);
                prop_assert_eq!(c.member(k), !x);
            }
        }

        #[test]
        fn readout_reconstructs((f1, p1) in arb_set()) {
            let a = EPSet::from_parts(&f1, &p1);
            let again = EPSet::from_parts(&a.finite_part(), &a.progressions());
            prop_assert_eq!(&again, &a);
            let canon = EPSet::from_fn(a.threshold() + 7, a.period() * 3, |k| a.member(k));
            prop_assert_eq!(canon, a);
        }
    }
}
