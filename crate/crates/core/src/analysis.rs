//! T-sets and the structural checks built on them.
//!
//! `T(a,x,b)` is the set of exponents `k` with `a^k · x` in block `b`. For a
//! genuine semigroup each T-set is either a singleton/empty or a finite head `F`
//! followed by one arithmetic progression `{p + q·t}` with `F ⊆ {1,…,p−1}`.
//! The checks here test such consequences on concrete instances; a failed check
//! is a finding against the input, never a panic.

use std::collections::{BTreeMap, HashSet};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::evlin::{EPSet, EvLinMap};
use crate::model::{big_number, words_of_length, Element, Gen, SemigroupSpec};
use crate::wordprob::Multiplier;

pub const DEFAULT_HORIZON: usize = 4;

/// `T(a,x,b)` in finite-head-plus-progression shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TSet {
    pub a: Gen,
    pub x: Element,
    pub b: Gen,
    pub set: EPSet,
    /// The finite head `F`; the whole set when there is no progression.
    pub finite: Vec<u64>,
    /// `(p, q)` with `q` the least gap between members and `p` least for that `q`.
    pub prog: Option<(u64, u64)>,
    /// `(r, s)` with `a^(p+qt) · x = b^(r+st)`.
    pub law: Option<(BigUint, BigUint)>,
}

impl TSet {
    pub fn is_infinite(&self) -> bool {
        self.prog.is_some()
    }

    pub fn to_json(&self, spec: &SemigroupSpec) -> Value {
        json!({
            "a": spec.name(self.a),
            "x": spec.render_element(&self.x),
            "b": spec.name(self.b),
            "F": self.finite,
            "p": self.prog.map(|(p, _)| p),
            "q": self.prog.map(|(_, q)| q),
            "r": self.law.as_ref().map(|(r, _)| big_number(r)),
            "s": self.law.as_ref().map(|(_, s)| big_number(s)),
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ShapeViolation {
    #[error("finite T-set with {0} members; two members force a progression")]
    FiniteWithSeveral(usize),
    #[error("members beyond the progression start {p} outside {{{p}+{q}t}}")]
    NotSingleProgression { p: u64, q: u64 },
    #[error("image law decreases: a^{p}x has exponent {r}, a^({p}+{q})x has exponent {next}")]
    DecreasingLaw { p: u64, q: u64, r: BigUint, next: BigUint },
}

/// `T(a,x,b)` read off the right-multiplication map `k ↦ a^k · x`.
pub fn t_set_of_map(map: &EvLinMap, a: Gen, x: &Element, b: Gen) -> Result<TSet, ShapeViolation> {
    let set = map.preimage_of_block(b);
    let base = TSet { a, x: x.clone(), b, set: set.clone(), finite: Vec::new(), prog: None, law: None };
    if set.is_finite() {
        let members: Vec<u64> = set.members_up_to(set.threshold()).collect();
        if members.len() > 1 {
            return Err(ShapeViolation::FiniteWithSeveral(members.len()));
        }
        return Ok(TSet { finite: members, ..base });
    }
    let window = set.threshold() + 2 * set.period() + 1;
    let members: Vec<u64> = set.members_up_to(window).collect();
    let q = members.windows(2).map(|w| w[1] - w[0]).min().expect("infinite set has two members");
    let p = *members.iter().find(|&&y| set.member(y + q)).expect("gap attained");
    let prog = EPSet::progression(p, q);
    let head = set.difference(&prog);
    if !prog.is_subset(&set) || !head.is_finite() || head.members_up_to(head.threshold()).any(|k| k >= p) {
        return Err(ShapeViolation::NotSingleProgression { p, q });
    }
    let r = map.apply_u64(p).exp;
    let next = map.apply_u64(p + q).exp;
    if next < r {
        return Err(ShapeViolation::DecreasingLaw { p, q, r, next });
    }
    let s = &next - &r;
    Ok(TSet {
        finite: head.members_up_to(head.threshold()).collect(),
        prog: Some((p, q)),
        law: Some((r, s)),
        ..base
    })
}

pub fn t_set(spec: &SemigroupSpec, a: Gen, x: &Element, b: Gen) -> Result<TSet, ShapeViolation> {
    let map = crate::wordprob::right_mult_map(spec, a, x);
    t_set_of_map(&map, a, x, b)
}

/// `Σ 1/q(a,x,b)` over the infinite T-sets of `(a, x)`. Equals 1 for every
/// genuine semigroup.
pub fn q_sum_check(spec: &SemigroupSpec, a: Gen, x: &Element) -> Result<BigRational, ShapeViolation> {
    let map = crate::wordprob::right_mult_map(spec, a, x);
    q_sum_of_map(spec, &map, a, x)
}

fn q_sum_of_map(spec: &SemigroupSpec, map: &EvLinMap, a: Gen, x: &Element) -> Result<BigRational, ShapeViolation> {
    let mut sum = BigRational::zero();
    for b in spec.gens() {
        if let Some((_, q)) = t_set_of_map(map, a, x, b)?.prog {
            sum += BigRational::new(BigInt::one(), BigInt::from(q));
        }
    }
    Ok(sum)
}

/// All nonincreasing `n`-tuples of positive integers with `Σ 1/m_i = r`, in
/// lexicographic order. The smallest entry is bounded by `n / r`.
pub fn unit_fraction_solutions(n: usize, r: &BigRational) -> Vec<Vec<u64>> {
    fn go(n: usize, r: &BigRational, lo: u64, suffix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if r <= &BigRational::zero() {
            return;
        }
        if n == 1 {
            let inv = r.recip();
            if inv.is_integer() {
                if let Some(m) = inv.to_integer().to_u64() {
                    if m >= lo {
                        let mut t = vec![m];
                        t.extend(suffix.iter().rev());
                        out.push(t);
                    }
                }
            }
            return;
        }
        let first = r.recip().ceil().to_integer().to_u64().unwrap_or(u64::MAX).max(lo);
        let last = (BigRational::from_integer(BigInt::from(n)) / r).floor().to_integer().to_u64().unwrap_or(0);
        for m in first..=last {
            let rest = r - BigRational::new(BigInt::one(), BigInt::from(m));
            suffix.push(m);
            go(n - 1, &rest, m, suffix, out);
            suffix.pop();
        }
    }
    let mut out = Vec::new();
    if n >= 1 {
        go(n, r, 1, &mut Vec::new(), &mut out);
    }
    out.sort();
    out
}

/// A failed check together with a concrete witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Finding {
    pub check: String,
    pub witness: String,
}

impl Finding {
    pub fn new(check: &str, witness: impl Into<String>) -> Self {
        Finding { check: check.to_string(), witness: witness.into() }
    }

    pub fn to_json(&self) -> Value {
        json!({ "check": self.check, "witness": self.witness })
    }
}

/// Distinct elements represented by words of length `1..=horizon`, tagged with the
/// shortest length reaching them; ordered by length, then word.
pub fn elements_up_to(mult: &Multiplier<'_>, horizon: usize) -> Vec<(usize, Element)> {
    let spec = mult.spec();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for len in 1..=horizon {
        let words = words_of_length(spec.len(), len);
        let elems: Vec<Element> = words.par_iter().map(|w| mult.normalize(w)).collect();
        for e in elems {
            if seen.insert(e.clone()) {
                out.push((len, e));
            }
        }
    }
    out
}

/// All T-sets for the given elements, or the first shape violation.
pub fn t_sets_for(
    mult: &Multiplier<'_>,
    elems: &[(usize, Element)],
) -> Vec<(usize, Result<TSet, ShapeViolation>)> {
    let spec = mult.spec();
    let per: Vec<Vec<(usize, Result<TSet, ShapeViolation>)>> = elems
        .par_iter()
        .map(|(h, x)| {
            let fam = mult.family(x);
            let mut v = Vec::new();
            for a in spec.gens() {
                for b in spec.gens() {
                    v.push((*h, t_set_of_map(&fam[a.0], a, x, b)));
                }
            }
            v
        })
        .collect();
    per.into_iter().flatten().collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CensusEntry {
    pub a: Gen,
    pub b: Gen,
    pub set: EPSet,
    pub first_horizon: usize,
}

/// Distinct nonempty T-sets seen up to a word-length horizon.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TCensus {
    pub horizon: usize,
    pub entries: Vec<CensusEntry>,
    /// Last horizon at which a new T-set appeared, when that is below `horizon`.
    pub stabilized_at: Option<usize>,
}

impl TCensus {
    pub fn to_json(&self, spec: &SemigroupSpec) -> Value {
        json!({
            "horizon": self.horizon,
            "distinct": self.entries.len(),
            "stabilized_at": self.stabilized_at,
            "entries": self.entries.iter().map(|e| json!({
                "a": spec.name(e.a),
                "b": spec.name(e.b),
                "set": e.set.to_string(),
                "first_horizon": e.first_horizon,
            })).collect::<Vec<_>>(),
        })
    }
}

pub fn census(spec: &SemigroupSpec, horizon: usize) -> TCensus {
    let mult = Multiplier::new(spec);
    census_with(&mult, horizon)
}

pub fn census_with(mult: &Multiplier<'_>, horizon: usize) -> TCensus {
    let spec = mult.spec();
    let elems = elements_up_to(mult, horizon);
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for (h, x) in &elems {
        let fam = mult.family(x);
        for a in spec.gens() {
            for b in spec.gens() {
                let set = fam[a.0].preimage_of_block(b);
                if !set.is_empty() && seen.insert((a, b, set.clone())) {
                    entries.push(CensusEntry { a, b, set, first_horizon: *h });
                }
            }
        }
    }
    let last = entries.iter().map(|e| e.first_horizon).max().unwrap_or(0);
    TCensus { horizon, entries, stabilized_at: (last < horizon).then_some(last) }
}

/// Largest `p(a,x,b)` and `q(a,x,b)` per generator pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PBoundReport {
    pub horizon: usize,
    pub generators: usize,
    pub q_max: u64,
    pub bound: u64,
    pub maxima: BTreeMap<(Gen, Gen), (u64, u64)>,
    pub findings: Vec<Finding>,
}

impl PBoundReport {
    pub fn passed(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn to_json(&self, spec: &SemigroupSpec) -> Value {
        json!({
            "horizon": self.horizon,
            "n": self.generators,
            "Q": self.q_max,
            "bound": self.bound,
            "maxima": self.maxima.iter().map(|((a, b), (p, q))| json!({
                "a": spec.name(*a), "b": spec.name(*b), "p_max": p, "q_max": q,
            })).collect::<Vec<_>>(),
            "findings": self.findings.iter().map(Finding::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Checks `p(a,x,b) ≤ 2·n·Q` with `Q` the largest period seen up to the horizon.
pub fn p_bound_check(spec: &SemigroupSpec, horizon: usize) -> PBoundReport {
    let mult = Multiplier::new(spec);
    let elems = elements_up_to(&mult, horizon);
    p_bound_from(spec, horizon, &t_sets_for(&mult, &elems))
}

fn p_bound_from(spec: &SemigroupSpec, horizon: usize, tsets: &[(usize, Result<TSet, ShapeViolation>)]) -> PBoundReport {
    let ok: Vec<&TSet> = tsets.iter().filter_map(|(_, t)| t.as_ref().ok()).collect();
    let q_max = ok.iter().filter_map(|t| t.prog.map(|(_, q)| q)).max().unwrap_or(1);
    let bound = 2 * spec.len() as u64 * q_max;
    let mut maxima: BTreeMap<(Gen, Gen), (u64, u64)> = BTreeMap::new();
    let mut findings = Vec::new();
    for t in &ok {
        if let Some((p, q)) = t.prog {
            let m = maxima.entry((t.a, t.b)).or_insert((0, 0));
            m.0 = m.0.max(p);
            m.1 = m.1.max(q);
            if p > bound {
                findings.push(Finding::new(
                    "p_bound",
                    format!("p({},{},{}) = {p} > {bound}", spec.name(t.a), spec.render_element(&t.x), spec.name(t.b)),
                ));
            }
        }
    }
    PBoundReport { horizon, generators: spec.len(), q_max, bound, maxima, findings }
}

/// `|T·x| ≤ 1`, or `x` is injective on `T` (here: strictly increasing). Checked on
/// members up to two full periods past both thresholds, beyond which every
/// residue class is affine.
pub fn dichotomy_holds(t: &TSet, map: &EvLinMap) -> bool {
    let period = num_integer::Integer::lcm(&t.set.period(), &map.period());
    let window = t.set.threshold().max(map.threshold()) + 2 * period;
    let images: Vec<BigUint> = t.set.members_up_to(window).map(|k| map.apply_u64(k).exp).collect();
    images.windows(2).all(|w| w[0] == w[1]) || images.windows(2).all(|w| w[0] < w[1])
}

pub fn dichotomy_check(spec: &SemigroupSpec, horizon: usize) -> Vec<Finding> {
    let mult = Multiplier::new(spec);
    let elems = elements_up_to(&mult, horizon);
    let mut out = Vec::new();
    for (_, t) in t_sets_for(&mult, &elems) {
        if let Ok(t) = t {
            let map = mult.right_mult_map(t.a, &t.x);
            if !dichotomy_holds(&t, &map) {
                out.push(Finding::new("dichotomy", describe(spec, &t)));
            }
        }
    }
    out
}

fn describe(spec: &SemigroupSpec, t: &TSet) -> String {
    format!(
        "T({},{},{}) = {}",
        spec.name(t.a),
        spec.render_element(&t.x),
        spec.name(t.b),
        t.set
    )
}

/// `a^p · b^q = a^r` implies `p ≤ r`, for `p, q ≤ bound`.
pub fn monotone_check(mult: &Multiplier<'_>, bound: u64) -> Vec<Finding> {
    let spec = mult.spec();
    let mut out = Vec::new();
    for a in spec.gens() {
        for b in spec.gens() {
            for q in 1..=bound {
                let map = mult.right_mult_map(a, &Element::new(b, q));
                for p in 1..=bound {
                    let e = map.apply_u64(p);
                    if e.gen == a && e.exp < BigUint::from(p) {
                        out.push(Finding::new(
                            "monotone_exponent",
                            format!("{}^{p} {}^{q} = {}", spec.name(a), spec.name(b), spec.render_element(&e)),
                        ));
                    }
                }
            }
        }
    }
    out
}

/// For `p < p'` with `a^p x` and `a^p' x` in one block, exponents do not decrease.
pub fn order_check(mult: &Multiplier<'_>, exp_bound: u64) -> Vec<Finding> {
    let spec = mult.spec();
    let mut out = Vec::new();
    for a in spec.gens() {
        for c in spec.gens() {
            for j in 1..=exp_bound {
                let x = Element::new(c, j);
                let map = mult.right_mult_map(a, &x);
                let mut last: BTreeMap<Gen, (u64, BigUint)> = BTreeMap::new();
                for p in 1..=exp_bound {
                    let e = map.apply_u64(p);
                    if let Some((p0, r0)) = last.get(&e.gen) {
                        if e.exp < *r0 {
                            out.push(Finding::new(
                                "exponent_order",
                                format!(
                                    "{a}^{p0} x = {b}^{r0}, {a}^{p} x = {b}^{s} with x = {x}",
                                    a = spec.name(a),
                                    b = spec.name(e.gen),
                                    s = e.exp,
                                    x = spec.render_element(&x)
                                ),
                            ));
                        }
                    }
                    last.insert(e.gen, (p, e.exp));
                }
            }
        }
    }
    out
}

/// Everything the structural checks produce for one instance.
#[derive(Clone, Debug)]
pub struct AnalysisReport {
    pub horizon: usize,
    pub checks: Vec<(String, Vec<Finding>)>,
    pub q_sums: Vec<(Gen, Element, BigRational)>,
    pub p_bound: PBoundReport,
    pub census: TCensus,
}

impl AnalysisReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|(_, f)| f.is_empty())
    }

    pub fn findings(&self) -> Vec<Finding> {
        self.checks.iter().flat_map(|(_, f)| f.iter().cloned()).collect()
    }

    pub fn to_json(&self, spec: &SemigroupSpec) -> Value {
        json!({
            "horizon": self.horizon,
            "passed": self.passed(),
            "checks": self.checks.iter().map(|(id, f)| json!({
                "id": id,
                "passed": f.is_empty(),
                "findings": f.iter().map(Finding::to_json).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "q_sums": self.q_sums.iter().map(|(a, x, s)| json!({
                "a": spec.name(*a),
                "x": spec.render_element(x),
                "sum": s.to_string(),
            })).collect::<Vec<_>>(),
            "p_bound": self.p_bound.to_json(spec),
            "census": self.census.to_json(spec),
        })
    }
}

pub const MONOTONE_BOUND: u64 = 50;
pub const ORDER_BOUND: u64 = 20;
pub const LINEARITY_STEPS: u64 = 25;
pub const MEMBERSHIP_BOUND: u64 = 500;

/// Runs every structural check up to `horizon`.
pub fn analyze(spec: &SemigroupSpec, horizon: usize) -> AnalysisReport {
    let mult = Multiplier::new(spec);
    let elems = elements_up_to(&mult, horizon);
    let tsets = t_sets_for(&mult, &elems);

    let mut shape = Vec::new();
    let mut linear = Vec::new();
    let mut membership = Vec::new();
    let mut dichotomy = Vec::new();
    for (_, t) in &tsets {
        let t = match t {
            Ok(t) => t,
            Err(e) => {
                shape.push(Finding::new("single_progression", e.to_string()));
                continue;
            }
        };
        let map = mult.right_mult_map(t.a, &t.x);
        if !dichotomy_holds(t, &map) {
            dichotomy.push(Finding::new("dichotomy", describe(spec, t)));
        }
        for k in 1..=MEMBERSHIP_BOUND {
            let direct = mult.multiply(&Element::new(t.a, k), &t.x).gen == t.b;
            if direct != t.set.member(k) {
                membership.push(Finding::new("tset_membership", format!("{} at k = {k}", describe(spec, t))));
                break;
            }
        }
        if let (Some((p, q)), Some((r, s))) = (t.prog, &t.law) {
            for step in 0..=LINEARITY_STEPS {
                let got = mult.multiply(&Element::new(t.a, p + q * step), &t.x);
                let want = Element { gen: t.b, exp: r + s * step };
                if got != want {
                    linear.push(Finding::new(
                        "linearity",
                        format!("{} at t = {step}: {}", describe(spec, t), spec.render_element(&got)),
                    ));
                    break;
                }
            }
        }
    }

    let mut partition = Vec::new();
    let mut q_sum = Vec::new();
    let mut unit = Vec::new();
    let mut q_sums = Vec::new();
    let n = spec.len();
    for (i, (_, x)) in elems.iter().enumerate() {
        for a in spec.gens() {
            let row: Vec<&TSet> = (0..n)
                .filter_map(|b| tsets[(i * n + a.0) * n + b].1.as_ref().ok())
                .collect();
            if row.len() != n {
                continue;
            }
            let mut union = EPSet::empty();
            for t in &row {
                if !union.is_disjoint(&t.set) {
                    partition.push(Finding::new("partition", format!("overlap at {}", describe(spec, t))));
                }
                union = union.union(&t.set);
            }
            if !union.is_full() {
                partition.push(Finding::new(
                    "partition",
                    format!("a = {}, x = {}: union is {}", spec.name(a), spec.render_element(x), union),
                ));
            }
            let mut sum = BigRational::zero();
            let mut qs = Vec::new();
            for t in &row {
                if let Some((_, q)) = t.prog {
                    sum += BigRational::new(BigInt::one(), BigInt::from(q));
                    qs.push(q);
                }
            }
            if !sum.is_one() {
                q_sum.push(Finding::new(
                    "q_sum",
                    format!("a = {}, x = {}: sum = {}", spec.name(a), spec.render_element(x), sum),
                ));
            }
            qs.sort_unstable_by(|x, y| y.cmp(x));
            if !qs.is_empty() && !unit_fraction_solutions(qs.len(), &BigRational::one()).contains(&qs) {
                unit.push(Finding::new("unit_fractions", format!("{qs:?} for a = {}", spec.name(a))));
            }
            q_sums.push((a, x.clone(), sum));
        }
    }

    let p_bound = p_bound_from(spec, horizon, &tsets);
    let census = census_with(&mult, horizon);
    let checks = vec![
        ("monotone_exponent".to_string(), monotone_check(&mult, MONOTONE_BOUND)),
        ("exponent_order".to_string(), order_check(&mult, ORDER_BOUND)),
        ("linearity".to_string(), linear),
        ("partition".to_string(), partition),
        ("single_progression".to_string(), shape),
        ("dichotomy".to_string(), dichotomy),
        ("q_sum".to_string(), q_sum),
        ("unit_fractions".to_string(), unit),
        ("p_bound".to_string(), p_bound.findings.clone()),
        ("tset_membership".to_string(), membership),
    ];
    AnalysisReport { horizon, checks, q_sums, p_bound, census }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evlin::Piece;
    use crate::model::parse_spec;

    fn ex2() -> SemigroupSpec {
        parse_spec(include_str!("../tests/fixtures/ex2.json")).unwrap()
    }

    fn ex1() -> SemigroupSpec {
        parse_spec(include_str!("../tests/fixtures/ex1.json")).unwrap()
    }

    const A: Gen = Gen(0);
    const B: Gen = Gen(1);

    fn brute_unit_fractions(n: usize, bound: u64) -> Vec<Vec<u64>> {
        // every nonincreasing tuple with entries ≤ bound summing to exactly 1
        fn go(n: usize, max: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
            if cur.len() == n {
                let s: BigRational = cur.iter().map(|&m| BigRational::new(1.into(), m.into())).sum();
                if s.is_one() {
                    out.push(cur.clone());
                }
                return;
            }
            for m in 1..=max {
                cur.push(m);
                go(n, m, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        go(n, bound, &mut Vec::new(), &mut out);
        out.sort();
        out
    }

    #[test]
    fn unit_fraction_examples() {
        let one = BigRational::one();
        assert_eq!(unit_fraction_solutions(1, &one), vec![vec![1]]);
        assert_eq!(unit_fraction_solutions(2, &one), vec![vec![2, 2]]);
        assert_eq!(
            unit_fraction_solutions(3, &one),
            vec![vec![3, 3, 3], vec![4, 4, 2], vec![6, 3, 2]]
        );
        // n=4 has largest entry 42, so 42 bounds the brute force
        assert_eq!(unit_fraction_solutions(4, &one), brute_unit_fractions(4, 42));
        assert_eq!(unit_fraction_solutions(3, &BigRational::new(5.into(), 2.into())), vec![vec![2, 1, 1]]);
        assert!(unit_fraction_solutions(2, &BigRational::new(3.into(), 1.into())).is_empty());
    }

    #[test]
    fn t_set_examples() {
        let s = ex2();
        let b1 = Element::new(B, 1u32);
        let t = t_set(&s, A, &b1, A).unwrap();
        assert_eq!(t.prog, Some((1, 1)));
        assert_eq!(t.law, Some((2u32.into(), 1u32.into())));
        assert!(t.finite.is_empty());
        let t = t_set(&s, A, &b1, B).unwrap();
        assert!(t.set.is_empty() && t.prog.is_none());
        let t = t_set(&ex1(), A, &Element::new(A, 5u32), A).unwrap();
        assert_eq!(t.prog, Some((1, 1)));
        assert_eq!(t.law, Some((6u32.into(), 1u32.into())));
    }

    #[test]
    fn q_sums() {
        assert!(q_sum_check(&ex2(), A, &Element::new(B, 1u32)).unwrap().is_one());
        assert!(q_sum_check(&ex1(), A, &Element::new(A, 1u32)).unwrap().is_one());
        let half = BigRational::new(1.into(), 2.into());
        assert!((&half + &half).is_one());
    }

    #[test]
    fn shape_violation_reported() {
        // odds of block a go to b, evens to a: T-set for b has period 2 (fine), but a
        // map sending {1,2} to b and the rest to a has two members and no progression
        let bad = EvLinMap::new(
            vec![(1, Element::new(B, 1u32)), (2, Element::new(B, 5u32))],
            vec![Piece { p: 3, q: 1, to: A, r: 4u32.into(), s: 1u32.into() }],
        )
        .unwrap();
        let x = Element::new(B, 1u32);
        assert_eq!(t_set_of_map(&bad, A, &x, B), Err(ShapeViolation::FiniteWithSeveral(2)));
        let t = t_set_of_map(&bad, A, &x, A).unwrap();
        assert_eq!(t.prog, Some((3, 1)));
    }

    #[test]
    fn dichotomy_flags_constant_with_two_values() {
        let m = EvLinMap::new(
            vec![(1, Element::new(B, 2u32))],
            vec![Piece { p: 2, q: 1, to: B, r: 7u32.into(), s: 0u32.into() }],
        )
        .unwrap();
        let t = t_set_of_map(&m, A, &Element::new(B, 1u32), B).unwrap();
        assert!(!dichotomy_holds(&t, &m));
        let empty = t_set_of_map(&m, A, &Element::new(B, 1u32), A).unwrap();
        assert!(dichotomy_holds(&empty, &m));
    }

    #[test]
    fn census_examples() {
        let c = census(&ex2(), 4);
        assert_eq!(c.entries.len(), 3);
        assert_eq!(c.stabilized_at, Some(1));
        assert!(c.entries.iter().all(|e| e.set.is_full()));
        assert_eq!(census(&ex1(), 4).entries.len(), 1);
        let small = census(&ex2(), 2);
        for e in &small.entries {
            assert!(c.entries.iter().any(|f| f.a == e.a && f.b == e.b && f.set == e.set));
        }
    }

    #[test]
    fn p_bound_examples() {
        let r = p_bound_check(&ex2(), 3);
        assert!(r.passed());
        assert_eq!(r.bound, 4);
        assert!(r.maxima.values().all(|&(p, _)| p == 1));
        assert_eq!(p_bound_check(&ex1(), 2).bound, 2);
    }

    #[test]
    fn analyze_ex2_passes() {
        let r = analyze(&ex2(), 3);
        assert!(r.passed(), "{:?}", r.findings());
        assert!(r.q_sums.iter().all(|(_, _, s)| s.is_one()));
        assert!(analyze(&ex1(), 3).passed());
    }
}
