// Separates distinct elements by explicit finite transformation semigroups
// and replays each certificate from its serialized form.

use monogenic::parse_spec;
use monogenic::residual::{SeparationCertificate, Separator, DEFAULT_MAX_HORIZON};

fn run_example() -> String {
    let spec = parse_spec(include_str!("../tests/fixtures/exceptional.json")).expect("fixture parses");
    let sep = Separator::new(&spec, DEFAULT_MAX_HORIZON).unwrap();
    let mut out = format!("rho has {} classes\n", sep.rho.class_count());
    for (x, y) in [("a^1", "b^1"), ("a^1", "a^2"), ("a^2", "a^5"), ("b^3", "b^10")] {
        let ex = spec.parse_element(x).unwrap();
        let ey = spec.parse_element(y).unwrap();
        let cert = sep.separate(&ex, &ey).unwrap();
        // a third party only sees the JSON
        let replayed = SeparationCertificate::from_json(&cert.to_json(&spec)).unwrap();
        replayed.verify().unwrap();
        out.push_str(&format!(
            "{x} vs {y}: {} quotient with {} states\n",
            cert.congruence,
            cert.quotient.len()
        ));
    }
    out
}

fn main() {
    print!("{}", run_example());
}
