// Enumerates every two-block instance within the smallest bounds and
// double-checks each hit by brute force.

use monogenic::validate::{brute_oracle_associativity, search, SearchConfig};

fn run_example() -> String {
    let outcome = search(&SearchConfig::default());
    let mut out = format!(
        "examined {}, rejected by shape {}, valid {}\n",
        outcome.examined,
        outcome.shape_rejected.len(),
        outcome.specs.len()
    );
    for spec in &outcome.specs {
        assert!(brute_oracle_associativity(spec, 30, 5).is_valid());
        let tables: Vec<String> = spec
            .gens()
            .flat_map(|a| spec.gens().map(move |b| (a, b)))
            .filter(|(a, b)| a != b)
            .map(|(a, b)| {
                let images: Vec<String> = (1..=4).map(|k| spec.render_element(&spec.table(a, b).apply_u64(k))).collect();
                format!("{}|{}: {} ...", spec.name(a), spec.name(b), images.join(" "))
            })
            .collect();
        out.push_str(&format!("{}\n", tables.join("; ")));
    }
    out
}

fn main() {
    print!("{}", run_example());
}
