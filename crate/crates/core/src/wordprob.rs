//! Normal forms and multiplication.
//!
//! Every element has a unique normal form `g^k`. Words are folded left to
//! right one run at a time; multiplying by an element with a large exponent goes
//! through [`power`] on the generator's right-multiplication family, so the cost
//! is logarithmic in the exponent.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::evlin::{compose_family, power, EvLinMap};
use crate::model::{Element, Gen, SemigroupSpec, Word};

/// Right multiplication by `x` on every block, indexed by source block.
pub fn right_family(spec: &SemigroupSpec, x: &Element) -> Vec<EvLinMap> {
    power(&spec.column(x.gen), &x.exp)
}

/// `k ↦ a^k · x`, canonical.
pub fn right_mult_map(spec: &SemigroupSpec, a: Gen, x: &Element) -> EvLinMap {
    right_family(spec, x).swap_remove(a.0)
}

/// Right multiplication by the word `w` on every block.
pub fn word_family(spec: &SemigroupSpec, w: &Word) -> Vec<EvLinMap> {
    let mut runs = w.runs().into_iter();
    let first = runs.next().expect("words are nonempty");
    let mut fam = right_family(spec, &first);
    for r in runs {
        fam = compose_family(&fam, &right_family(spec, &r));
    }
    fam
}

pub fn multiply(spec: &SemigroupSpec, x: &Element, y: &Element) -> Element {
    if x.gen == y.gen {
        return Element { gen: x.gen, exp: &x.exp + &y.exp };
    }
    right_mult_map(spec, x.gen, y).apply(&x.exp)
}

/// Normal form of a word.
pub fn normalize(spec: &SemigroupSpec, w: &Word) -> Element {
    let mut runs = w.runs().into_iter();
    let mut cur = runs.next().expect("words are nonempty");
    for r in runs {
        cur = multiply(spec, &cur, &r);
    }
    cur
}

/// Single-letter folding that reads the raw tables directly, sharing no code
/// with the map algebra. Used as an independent reference.
pub fn naive_oracle(spec: &SemigroupSpec, w: &Word) -> Element {
    let mut letters = w.letters().iter();
    let mut cur = Element::generator(*letters.next().expect("words are nonempty"));
    for &g in letters {
        cur = naive_step(spec.table(cur.gen, g), &cur.exp);
    }
    cur
}

/// `x · y` by folding `y` one letter at a time.
pub fn naive_multiply(spec: &SemigroupSpec, x: &Element, y: &Element) -> Element {
    let mut cur = x.clone();
    let mut i = BigUint::zero();
    while i < y.exp {
        cur = naive_step(spec.table(cur.gen, y.gen), &cur.exp);
        i += 1u32;
    }
    cur
}

fn naive_step(table: &EvLinMap, k: &BigUint) -> Element {
    for (x, e) in table.exceptions() {
        if BigUint::from(*x) == *k {
            return e.clone();
        }
    }
    for pc in table.pieces() {
        let p = BigUint::from(pc.p);
        if *k >= p {
            let d = k - &p;
            if (&d % pc.q).is_zero() {
                return Element { gen: pc.to, exp: &pc.r + &pc.s * (d / pc.q) };
            }
        }
    }
    unreachable!("table does not cover exponent {k}")
}

/// Memoizing front end; results are identical to the free functions.
pub struct Multiplier<'a> {
    spec: &'a SemigroupSpec,
    cache: Mutex<HashMap<(Gen, BigUint), Arc<Vec<EvLinMap>>>>,
}

impl<'a> Multiplier<'a> {
    pub fn new(spec: &'a SemigroupSpec) -> Self {
        Multiplier { spec, cache: Mutex::new(HashMap::new()) }
    }

    pub fn spec(&self) -> &'a SemigroupSpec {
        self.spec
    }

    pub fn family(&self, x: &Element) -> Arc<Vec<EvLinMap>> {
        let key = (x.gen, x.exp.clone());
        if let Some(f) = self.cache.lock().expect("cache lock").get(&key) {
            return f.clone();
        }
        // Build from the cached half power where possible.
        let fam = if x.exp.is_one() {
            Arc::new(self.spec.column(x.gen).iter().map(EvLinMap::canonical).collect::<Vec<_>>())
        } else if x.exp.to_u64().is_some_and(|e| e <= 64) {
            let prev = self.family(&Element { gen: x.gen, exp: &x.exp - 1u32 });
            let one = self.family(&Element::generator(x.gen));
            Arc::new(compose_family(&prev, &one))
        } else {
            Arc::new(right_family(self.spec, x))
        };
        self.cache.lock().expect("cache lock").insert(key, fam.clone());
        fam
    }

    pub fn right_mult_map(&self, a: Gen, x: &Element) -> EvLinMap {
        self.family(x)[a.0].clone()
    }

    pub fn multiply(&self, x: &Element, y: &Element) -> Element {
        if x.gen == y.gen {
            return Element { gen: x.gen, exp: &x.exp + &y.exp };
        }
        self.family(y)[x.gen.0].apply(&x.exp)
    }

    pub fn normalize(&self, w: &Word) -> Element {
        let mut runs = w.runs().into_iter();
        let mut cur = runs.next().expect("words are nonempty");
        for r in runs {
            cur = self.multiply(&cur, &r);
        }
        cur
    }

    pub fn word_family(&self, w: &Word) -> Vec<EvLinMap> {
        let mut runs = w.runs().into_iter();
        let first = runs.next().expect("words are nonempty");
        let mut fam = (*self.family(&first)).clone();
        for r in runs {
            fam = compose_family(&fam, &self.family(&r));
        }
        fam
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_spec, words_of_length};
    use std::str::FromStr;

    fn ex2() -> SemigroupSpec {
        parse_spec(include_str!("../tests/fixtures/ex2.json")).unwrap()
    }

    fn ex1() -> SemigroupSpec {
        parse_spec(include_str!("../tests/fixtures/ex1.json")).unwrap()
    }

    fn nf(spec: &SemigroupSpec, w: &str) -> String {
        spec.render_element(&normalize(spec, &spec.parse_word(w).unwrap()))
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(nf(&ex1(), "aaa"), "a^3");
        let s = ex2();
        assert_eq!(nf(&s, "ba"), "a^2");
        assert_eq!(nf(&s, "bbba"), "a^4");
        assert_eq!(nf(&s, "bb"), "b^2");
    }

    #[test]
    fn oracle_examples() {
        let s = ex2();
        let w = s.parse_word("abab").unwrap();
        assert_eq!(s.render_element(&naive_oracle(&s, &w)), "a^4");
        let s1 = ex1();
        assert_eq!(s1.render_element(&naive_oracle(&s1, &s1.parse_word("a").unwrap())), "a^1");
    }

    #[test]
    fn multiply_examples() {
        let s1 = ex1();
        let m = |s: &SemigroupSpec, x: &str, y: &str| {
            s.render_element(&multiply(s, &s.parse_element(x).unwrap(), &s.parse_element(y).unwrap()))
        };
        assert_eq!(m(&s1, "a^3", "a^4"), "a^7");
        let s = ex2();
        assert_eq!(m(&s, "b^2", "a^5"), "a^7");
        assert_eq!(m(&s, "a^1000000000000", "b"), "a^1000000000001");
        let huge = BigUint::from_str("123456789012345678901234567890").unwrap();
        let x = Element::new(Gen(1), huge.clone());
        let y = multiply(&s, &x, &Element::new(Gen(0), huge.clone()));
        assert_eq!(y, Element::new(Gen(0), &huge * 2u32));
    }

    #[test]
    fn right_mult_map_examples() {
        let s = ex2();
        let (a, b) = (Gen(0), Gen(1));
        assert_eq!(right_mult_map(&s, a, &Element::new(b, 3u32)), EvLinMap::shift(a, 3u32));
        assert_eq!(right_mult_map(&s, b, &Element::new(a, 1u32)), EvLinMap::shift(a, 1u32));
        assert_eq!(right_mult_map(&s, b, &Element::new(b, 3u32)), EvLinMap::shift(b, 3u32));
        assert_eq!(right_mult_map(&ex1(), a, &Element::new(a, 9u32)), EvLinMap::shift(a, 9u32));
    }

    #[test]
    fn normalize_matches_oracle_exhaustively() {
        let s = ex2();
        let mult = Multiplier::new(&s);
        for len in 1..=8 {
            for w in words_of_length(2, len) {
                let expect = naive_oracle(&s, &w);
                assert_eq!(normalize(&s, &w), expect);
                assert_eq!(mult.normalize(&w), expect);
            }
        }
    }
}
