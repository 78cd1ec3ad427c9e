//! Acceptance criteria, one line of output each. Runs without the libtest
//! harness so the lines come out in order.

use std::path::{Path, PathBuf};
use std::time::Instant;

use monogenic::analysis::{analyze, elements_up_to, q_sum_check, DEFAULT_HORIZON};
use monogenic::model::words_of_length;
use monogenic::presentation::{extract_presentation, unsatisfied_relations, verify_presentation};
use monogenic::residual::{block_params, divisibility_findings, rho, tau_quotient_size, SeparationCertificate, Separator, DEFAULT_MAX_HORIZON};
use monogenic::validate::{brute_oracle_associativity, candidates, search, verify_associativity, SearchConfig, Verdict};
use monogenic::wordprob::{naive_multiply, naive_oracle, Multiplier};
use monogenic::{parse_spec, Element, SemigroupSpec};
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;

type Outcome = Result<String, String>;

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn corpus() -> Vec<(String, SemigroupSpec)> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(fixtures_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            let spec = parse_spec(&std::fs::read_to_string(&p).unwrap()).unwrap();
            (name, spec)
        })
        .collect()
}

fn elements(spec: &SemigroupSpec, bound: u64) -> Vec<Element> {
    spec.gens().flat_map(|a| (1..=bound).map(move |k| Element::new(a, k))).collect()
}

fn each_spec(corpus: &[(String, SemigroupSpec)], f: impl Fn(&SemigroupSpec) -> Result<usize, String> + Sync) -> Outcome {
    let mut total = 0;
    for (name, spec) in corpus {
        total += f(spec).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(format!("{} specs, {total} checks", corpus.len()))
}

fn q_sums(corpus: &[(String, SemigroupSpec)]) -> Outcome {
    each_spec(corpus, |spec| {
        let mult = Multiplier::new(spec);
        let mut n = 0;
        for (_, x) in elements_up_to(&mult, 4) {
            for a in spec.gens() {
                let sum = q_sum_check(spec, a, &x).map_err(|e| e.to_string())?;
                if !sum.is_one() {
                    return Err(format!("a = {}, x = {}: sum {sum}", spec.name(a), spec.render_element(&x)));
                }
                n += 1;
            }
        }
        Ok(n)
    })
}

fn oracle_equivalence(corpus: &[(String, SemigroupSpec)]) -> Outcome {
    each_spec(corpus, |spec| {
        let mult = Multiplier::new(spec);
        let words: Vec<_> = (1..=8).flat_map(|l| words_of_length(spec.len(), l)).collect();
        if let Some(w) = words.par_iter().find_any(|w| mult.normalize(w) != naive_oracle(spec, w)) {
            return Err(format!("word {}", spec.render_word(w)));
        }
        let elems = elements(spec, 50);
        let pairs: Vec<(&Element, &Element)> = elems.iter().flat_map(|x| elems.iter().map(move |y| (x, y))).collect();
        if let Some((x, y)) = pairs.par_iter().find_any(|(x, y)| mult.multiply(x, y) != naive_multiply(spec, x, y)) {
            return Err(format!("{} · {}", spec.render_element(x), spec.render_element(y)));
        }
        Ok(words.len() + pairs.len())
    })
}

fn associativity_cross_validation() -> Outcome {
    let config = SearchConfig::default();
    let all = candidates(&config);
    let disagreements: Vec<usize> = (0..all.len())
        .into_par_iter()
        .filter(|&i| {
            let symbolic = verify_associativity(&all[i]).verdict;
            let brute = brute_oracle_associativity(&all[i], 50, 6).verdict;
            brute == Verdict::Inconclusive || symbolic != brute
        })
        .collect();
    if !disagreements.is_empty() {
        return Err(format!("candidates {disagreements:?} disagree"));
    }
    let found = search(&config);
    let ex2 = parse_spec(&std::fs::read_to_string(fixtures_dir().join("ex2.json")).unwrap()).unwrap();
    if !found.specs.contains(&ex2) {
        return Err("two-block example not found".into());
    }
    Ok(format!("{} candidates agree, {} valid", all.len(), found.specs.len()))
}

fn structural_suite(corpus: &[(String, SemigroupSpec)]) -> Outcome {
    each_spec(corpus, |spec| {
        let report = analyze(spec, DEFAULT_HORIZON);
        match report.findings().first() {
            Some(f) => Err(format!("{}: {}", f.check, f.witness)),
            None => Ok(report.checks.len()),
        }
    })
}

fn presentation(corpus: &[(String, SemigroupSpec)]) -> Outcome {
    each_spec(corpus, |spec| {
        let pres = extract_presentation(spec).map_err(|e| e.to_string())?;
        if let Some(f) = unsatisfied_relations(spec, &pres).first() {
            return Err(f.witness.clone());
        }
        let report = verify_presentation(spec, &pres, 6);
        match report.failures.first().or(report.unsound.first()) {
            Some(f) => Err(format!("{}: {}", f.check, f.witness)),
            None => Ok(report.certified),
        }
    })
}

fn separation(corpus: &[(String, SemigroupSpec)]) -> Outcome {
    each_spec(corpus, |spec| {
        let sep = Separator::new(spec, DEFAULT_MAX_HORIZON).map_err(|e| e.to_string())?;
        let elems = elements(spec, 20);
        let pairs: Vec<(&Element, &Element)> =
            elems.iter().enumerate().flat_map(|(i, x)| elems[i + 1..].iter().map(move |y| (x, y))).collect();
        let failures: Vec<String> = pairs
            .par_iter()
            .filter_map(|(x, y)| {
                let describe = |why: String| Some(format!("{} vs {}: {why}", spec.render_element(x), spec.render_element(y)));
                let cert = match sep.separate(x, y) {
                    Ok(c) => c,
                    Err(e) => return describe(e.to_string()),
                };
                let replayed = match SeparationCertificate::from_json(&cert.to_json(spec)) {
                    Ok(c) => c,
                    Err(e) => return describe(e.to_string()),
                };
                if let Err(e) = replayed.verify() {
                    return describe(e.to_string());
                }
                if let Some(d) = &cert.distance {
                    let expected = tau_quotient_size(&sep.params, d.to_u64().unwrap());
                    if cert.quotient.len() != expected {
                        return describe(format!("quotient size {} != {expected}", cert.quotient.len()));
                    }
                }
                None
            })
            .collect();
        match failures.first() {
            Some(f) => Err(f.clone()),
            None => Ok(pairs.len()),
        }
    })
}

fn divisibility(corpus: &[(String, SemigroupSpec)]) -> Outcome {
    each_spec(corpus, |spec| {
        let cong = rho(spec, DEFAULT_MAX_HORIZON).map_err(|e| e.to_string())?;
        let params = block_params(spec, &cong).map_err(|e| e.to_string())?;
        match divisibility_findings(spec, &cong, &params, 20, 3).first() {
            Some(f) => Err(f.witness.clone()),
            None => Ok(1),
        }
    })
}

fn determinism() -> Outcome {
    let fixture = |n: &str| fixtures_dir().join(n).to_string_lossy().into_owned();
    let ex2 = fixture("ex2.json");
    let exc = fixture("exceptional.json");
    let runs: Vec<Vec<&str>> = vec![
        vec!["monogenic", "analyze", &ex2],
        vec!["monogenic", "analyze", &exc],
        vec!["monogenic", "present", &exc],
        vec!["monogenic", "separate", &exc, "a^2", "a^7"],
        vec!["monogenic", "separate", &ex2, "a^1", "b^3"],
    ];
    for args in &runs {
        let first = monogenic::cli::run(args.clone());
        let second = monogenic::cli::run(args.clone());
        if first.code != 0 || first != second {
            return Err(format!("{}", args[1..].join(" ")));
        }
    }
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut listings = Vec::new();
    for d in &dirs {
        let out = d.path().to_string_lossy().into_owned();
        let o = monogenic::cli::run(["monogenic", "search", "--blocks", "2", "--out", &out]);
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(d.path())
            .unwrap()
            .map(|e| {
                let p = e.unwrap().path();
                (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
            })
            .collect();
        files.sort();
        listings.push((o, files));
    }
    if listings[0] != listings[1] {
        return Err("search output differs".into());
    }
    Ok(format!("{} commands repeated", runs.len() + 1))
}

fn main() {
    let corpus = corpus();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("unit-fraction identity", Box::new(|| q_sums(&corpus))),
        ("oracle equivalence", Box::new(|| oracle_equivalence(&corpus))),
        ("associativity cross-validation", Box::new(associativity_cross_validation)),
        ("structural suite", Box::new(|| structural_suite(&corpus))),
        ("presentation certification", Box::new(|| presentation(&corpus))),
        ("residual finiteness", Box::new(|| separation(&corpus))),
        ("distance divisibility", Box::new(|| divisibility(&corpus))),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail}; {secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why}; {secs:.1}s)", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
