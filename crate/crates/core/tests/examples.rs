// Each example's `run_example` is compiled in here so `cargo test` keeps
// them honest.

macro_rules! example {
    ($name:ident, $path:literal) => {
        #[allow(dead_code)]
        mod $name {
            include!($path);

            pub fn output() -> String {
                run_example()
            }
        }
    };
}

example!(word_problem, "../examples/word_problem.rs");
example!(t_sets, "../examples/t_sets.rs");
example!(presentation, "../examples/presentation.rs");
example!(residual_finiteness, "../examples/residual_finiteness.rs");
example!(corpus_search, "../examples/corpus_search.rs");
example!(validate_instance, "../examples/validate_instance.rs");

#[test]
fn word_problem_example() {
    let out = word_problem::output();
    assert!(out.starts_with("ba = a^2\n"));
    assert!(out.contains("b^(10^18) a = a^1000000000000000001"));
    assert!(out.contains("126/126"));
}

#[test]
fn t_sets_example() {
    let out = t_sets::output();
    assert!(out.contains("T(a, b^1, c) = {1}\n"));
    assert!(out.contains("T(a, b^1, a) = {2+1t}\n"));
}

#[test]
fn presentation_example() {
    let out = presentation::output();
    assert!(out.starts_with("ab = aa\nba = aa\naab = aaa\nbba = aaa\n"));
    assert!(out.contains("62/62"));
}

#[test]
fn residual_example() {
    let out = residual_finiteness::output();
    assert!(out.contains("rho has 4 classes"));
    assert!(out.contains("a^2 vs a^5: tau quotient with 20 states"));
}

#[test]
fn search_example() {
    let out = corpus_search::output();
    assert!(out.starts_with("examined 36, rejected by shape 0, valid 6\n"));
}

#[test]
fn validate_example() {
    let out = validate_instance::output();
    assert!(out.contains("ex2: valid\n"));
    assert!(out.contains("intercept 3: invalid\n"));
}
