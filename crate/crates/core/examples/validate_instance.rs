// Validation of a good instance and of one with a single wrong intercept.

use monogenic::parse_spec;
use monogenic::validate::validate;

fn run_example() -> String {
    let good = include_str!("../tests/fixtures/ex2.json");
    let mut v: serde_json::Value = serde_json::from_str(good).unwrap();
    v["tables"]["b|a"]["pieces"][0]["r"] = 3.into();
    let mut out = String::new();
    for (name, text) in [("ex2", good.to_string()), ("ex2 with b|a intercept 3", v.to_string())] {
        let spec = parse_spec(&text).expect("well-typed");
        let report = validate(&spec);
        out.push_str(&format!("{name}: {}\n", report.verdict));
        for f in &report.findings {
            out.push_str(&format!("  {}: {}\n", f.check, f.witness));
        }
    }
    out
}

fn main() {
    print!("{}", run_example());
}
