// Which exponents of one block are carried into another by a fixed element,
// and the unit-fraction identity their periods satisfy.

use monogenic::analysis::{census, elements_up_to, q_sum_check, t_set};
use monogenic::parse_spec;
use monogenic::wordprob::Multiplier;
use num_traits::One;

fn run_example() -> String {
    let spec = parse_spec(include_str!("../tests/fixtures/exceptional.json")).expect("fixture parses");
    let mult = Multiplier::new(&spec);
    let mut out = String::new();
    for x in ["b^1", "b^2", "c^1"] {
        let x = spec.parse_element(x).unwrap();
        for a in spec.gens() {
            for b in spec.gens() {
                let t = t_set(&spec, a, &x, b).unwrap();
                if !t.set.is_empty() {
                    out.push_str(&format!(
                        "T({}, {}, {}) = {}\n",
                        spec.name(a),
                        spec.render_element(&x),
                        spec.name(b),
                        t.set
                    ));
                }
            }
        }
    }
    for (_, x) in elements_up_to(&mult, 2) {
        for a in spec.gens() {
            let sum = q_sum_check(&spec, a, &x).unwrap();
            assert!(sum.is_one());
        }
    }
    out.push_str("sum of 1/q is 1 for every generator and element of length <= 2\n");
    let c = census(&spec, 3);
    out.push_str(&format!("{} distinct T-set shapes up to length 3\n", c.entries.len()));
    out
}

fn main() {
    print!("{}", run_example());
}
