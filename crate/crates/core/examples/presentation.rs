// Reads a finite presentation off the tables and proves a few words equal
// using nothing but its relations.

use monogenic::parse_spec;
use monogenic::presentation::{check_derivation, default_budget, derive, extract_presentation, verify_presentation};

fn run_example() -> String {
    let spec = parse_spec(include_str!("../tests/fixtures/ex2.json")).expect("fixture parses");
    let pres = extract_presentation(&spec).expect("valid instance has a presentation");
    let mut out = pres.render();

    let u = spec.parse_word("bbba").unwrap();
    let v = spec.parse_word("aaaa").unwrap();
    let d = derive(&pres, &u, &v, default_budget(&u, &v)).unwrap();
    assert!(check_derivation(&pres, &d));
    out.push_str(&format!("bbba -> aaaa in {} steps:\n", d.len()));
    for step in &d.steps {
        out.push_str(&format!("  {}\n", spec.render_word(&step.result)));
    }

    let report = verify_presentation(&spec, &pres, 5);
    out.push_str(&format!(
        "{}/{} words up to length 5 certified, longest derivation {}\n",
        report.certified, report.words, report.longest
    ));
    out
}

fn main() {
    print!("{}", run_example());
}
