use monogenic::residual::{then, Separator, DEFAULT_MAX_HORIZON};
use monogenic::wordprob::Multiplier;
use monogenic::{parse_spec, Element, Gen, SemigroupSpec, Word};
use proptest::prelude::*;

fn corpus() -> Vec<SemigroupSpec> {
    [
        include_str!("fixtures/ex2.json"),
        include_str!("fixtures/exceptional.json"),
        include_str!("fixtures/slope_two.json"),
        include_str!("fixtures/weighted3.json"),
    ]
    .iter()
    .map(|t| parse_spec(t).unwrap())
    .collect()
}

fn word(spec: &SemigroupSpec, letters: &[usize]) -> Word {
    Word::new(letters.iter().map(|&i| Gen(i % spec.len())).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normal_form_is_a_homomorphism(
        which in 0usize..4,
        u in prop::collection::vec(0usize..3, 1..12),
        v in prop::collection::vec(0usize..3, 1..12),
    ) {
        let spec = &corpus()[which];
        let mult = Multiplier::new(spec);
        let (u, v) = (word(spec, &u), word(spec, &v));
        let mut uv = u.letters().to_vec();
        uv.extend_from_slice(v.letters());
        let joined = mult.normalize(&Word::new(uv).unwrap());
        prop_assert_eq!(joined, mult.multiply(&mult.normalize(&u), &mult.normalize(&v)));
    }

    #[test]
    fn products_associate_at_large_exponents(
        which in 0usize..4,
        gens in prop::collection::vec(0usize..3, 3),
        exps in prop::collection::vec(1u64..1_000_000_000, 3),
    ) {
        let spec = &corpus()[which];
        let mult = Multiplier::new(spec);
        let e: Vec<Element> = gens.iter().zip(&exps).map(|(&g, &k)| Element::new(Gen(g % spec.len()), k)).collect();
        let left = mult.multiply(&mult.multiply(&e[0], &e[1]), &e[2]);
        let right = mult.multiply(&e[0], &mult.multiply(&e[1], &e[2]));
        prop_assert_eq!(left, right);
    }

    #[test]
    fn quotient_map_is_a_homomorphism(
        gx in 0usize..3, kx in 1u64..200,
        gy in 0usize..3, ky in 1u64..200,
    ) {
        let spec = &corpus()[1];
        let sep = Separator::new(spec, DEFAULT_MAX_HORIZON).unwrap();
        let q = &sep.rho_quotient;
        let (x, y) = (Element::new(Gen(gx), kx), Element::new(Gen(gy), ky));
        let xy = Multiplier::new(spec).multiply(&x, &y);
        prop_assert_eq!(q.transformation(&xy), then(&q.transformation(&x), &q.transformation(&y)));
    }
}
