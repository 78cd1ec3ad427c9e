// Normal forms in the two-block example, computed through the tables and
// checked against plain left-to-right folding.

use monogenic::model::words_of_length;
use monogenic::wordprob::{naive_oracle, Multiplier};
use monogenic::{parse_spec, Element};

fn run_example() -> String {
    let spec = parse_spec(include_str!("../tests/fixtures/ex2.json")).expect("fixture parses");
    let mult = Multiplier::new(&spec);
    let mut out = String::new();
    for text in ["ba", "ab", "bbba", "abab", "bbbbbb"] {
        let w = spec.parse_word(text).unwrap();
        out.push_str(&format!("{text} = {}\n", spec.render_element(&mult.normalize(&w))));
    }

    // exponents far beyond anything folding could reach
    let big = Element::new(spec.gen_by_name("b").unwrap(), 10u64.pow(18));
    let a = Element::generator(spec.gen_by_name("a").unwrap());
    out.push_str(&format!("b^(10^18) a = {}\n", spec.render_element(&mult.multiply(&big, &a))));

    let words: Vec<_> = (1..=6).flat_map(|l| words_of_length(spec.len(), l)).collect();
    let agree = words.iter().filter(|w| mult.normalize(w) == naive_oracle(&spec, w)).count();
    out.push_str(&format!("{agree}/{} words up to length 6 agree with folding\n", words.len()));
    out
}

fn main() {
    print!("{}", run_example());
}
