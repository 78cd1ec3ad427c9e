//! Batch command-line surface. [`run`] does all the work and returns the
//! buffered output so the binary stays a two-liner and tests can call it
//! in-process.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::analysis::{self, t_set, DEFAULT_HORIZON};
use crate::model::{parse_spec, ModelError, SemigroupSpec};
use crate::presentation::{extract_presentation, verify_presentation};
use crate::residual::{separate, ResidualError, DEFAULT_MAX_HORIZON};
use crate::validate::{validate, SearchConfig, Verdict};
use crate::wordprob::{multiply, normalize};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

/// Overrides the rayon pool size.
pub const THREADS_ENV: &str = "MONOGENIC_THREADS";

pub const DEFAULT_MAX_LEN: usize = 6;

#[derive(Parser, Debug)]
#[command(name = "monogenic", version, about = "Finite unions of free monogenic semigroups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Type, associativity and structural checks.
    Validate {
        spec: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Normal form of a word.
    Normalize { spec: PathBuf, word: String },
    /// Product of two elements.
    Mult { spec: PathBuf, x: String, y: String },
    /// The set of exponents of block `a` sent into block `b` by `x`.
    Tset { spec: PathBuf, a: String, x: String, b: String },
    /// Full structural report.
    Analyze {
        spec: PathBuf,
        #[arg(long, default_value_t = DEFAULT_HORIZON)]
        horizon: usize,
    },
    /// Finite presentation read off the tables.
    Present {
        spec: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Derive every short word to its normal form using only the relations.
    VerifyPresentation {
        spec: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_LEN)]
        max_len: usize,
    },
    /// Certificate that a finite quotient separates two elements.
    Separate {
        spec: PathBuf,
        x: String,
        y: String,
        #[arg(long, default_value_t = DEFAULT_MAX_HORIZON)]
        max_horizon: usize,
    },
    /// Exhaustive search for valid specs within bounds.
    Search(SearchArgs),
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(long)]
    blocks: usize,
    #[arg(long, default_value_t = 1)]
    max_exceptions: usize,
    #[arg(long, default_value_t = 1)]
    max_threshold: u64,
    #[arg(long, default_value_t = 1)]
    max_period: u64,
    #[arg(long, default_value_t = 1)]
    max_slope: u64,
    #[arg(long, default_value_t = 1)]
    max_intercept: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Buffered result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { code: EXIT_OK, stdout, stderr: String::new() }
    }

    fn with_code(code: i32, stdout: String) -> Self {
        Outcome { code, stdout, stderr: String::new() }
    }

    fn error(code: i32, message: impl std::fmt::Display) -> Self {
        Outcome { code, stdout: String::new(), stderr: format!("error: {message}\n") }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn load(path: &Path) -> Result<SemigroupSpec, Outcome> {
    let text = std::fs::read_to_string(path).map_err(|e| Outcome::error(EXIT_USAGE, format!("{}: {e}", path.display())))?;
    parse_spec(&text).map_err(|e| Outcome::error(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn bad_input(e: ModelError) -> Outcome {
    Outcome::error(EXIT_USAGE, e)
}

/// Sizes the global rayon pool from [`THREADS_ENV`] if it is set.
pub fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        // a second call in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code, stdout: String::new(), stderr: text }
            } else {
                Outcome::ok(text)
            };
        }
    };
    match dispatch(cli.command) {
        Ok(o) | Err(o) => o,
    }
}

fn dispatch(command: Command) -> Result<Outcome, Outcome> {
    match command {
        Command::Validate { spec, json } => {
            let text = std::fs::read_to_string(&spec).map_err(|e| Outcome::error(EXIT_USAGE, format!("{}: {e}", spec.display())))?;
            let report = match parse_spec(&text) {
                Ok(s) => validate(&s),
                Err(e @ ModelError::Syntax { .. }) => return Err(bad_input(e)),
                Err(e) => crate::validate::ValidationReport {
                    verdict: Verdict::Invalid,
                    findings: vec![analysis::Finding::new("type", e.to_string())],
                },
            };
            let code = match report.verdict {
                Verdict::Valid => EXIT_OK,
                Verdict::Invalid => EXIT_INVALID,
                Verdict::Inconclusive => EXIT_INCONCLUSIVE,
            };
            let out = if json {
                pretty(&report.to_json())
            } else {
                let mut s = format!("{}\n", report.verdict);
                for f in &report.findings {
                    s.push_str(&format!("  {}: {}\n", f.check, f.witness));
                }
                s
            };
            Ok(Outcome::with_code(code, out))
        }
        Command::Normalize { spec, word } => {
            let spec = load(&spec)?;
            let w = spec.parse_word(&word).map_err(bad_input)?;
            Ok(Outcome::ok(format!("{}\n", spec.render_element(&normalize(&spec, &w)))))
        }
        Command::Mult { spec, x, y } => {
            let spec = load(&spec)?;
            let x = spec.parse_element(&x).map_err(bad_input)?;
            let y = spec.parse_element(&y).map_err(bad_input)?;
            Ok(Outcome::ok(format!("{}\n", spec.render_element(&multiply(&spec, &x, &y)))))
        }
        Command::Tset { spec, a, x, b } => {
            let spec = load(&spec)?;
            let gen = |n: &str| spec.gen_by_name(n).ok_or_else(|| bad_input(ModelError::UnknownGenerator(n.to_string())));
            let (a, b) = (gen(&a)?, gen(&b)?);
            let x = spec.parse_element(&x).map_err(bad_input)?;
            match t_set(&spec, a, &x, b) {
                Ok(t) => Ok(Outcome::ok(pretty(&t.to_json(&spec)))),
                Err(e) => Err(Outcome::error(EXIT_INVALID, e)),
            }
        }
        Command::Analyze { spec, horizon } => {
            let spec = load(&spec)?;
            let report = analysis::analyze(&spec, horizon);
            let mut v = report.to_json(&spec);
            v["bounds"] = json!({
                "monotone": analysis::MONOTONE_BOUND,
                "order": analysis::ORDER_BOUND,
                "linearity_steps": analysis::LINEARITY_STEPS,
                "membership": analysis::MEMBERSHIP_BOUND,
            });
            v["presentation"] = match extract_presentation(&spec) {
                Ok(p) => json!(p.lines()),
                Err(e) => json!({ "error": e.to_string() }),
            };
            let code = if report.passed() { EXIT_OK } else { EXIT_INVALID };
            Ok(Outcome::with_code(code, pretty(&v)))
        }
        Command::Present { spec, json } => {
            let spec = load(&spec)?;
            let pres = extract_presentation(&spec).map_err(|e| Outcome::error(EXIT_INVALID, e))?;
            Ok(Outcome::ok(if json { pretty(&pres.to_json()) } else { pres.render() }))
        }
        Command::VerifyPresentation { spec, max_len } => {
            let spec = load(&spec)?;
            let pres = extract_presentation(&spec).map_err(|e| Outcome::error(EXIT_INVALID, e))?;
            let report = verify_presentation(&spec, &pres, max_len);
            let code = if !report.unsound.is_empty() {
                EXIT_INVALID
            } else if !report.failures.is_empty() {
                EXIT_INCONCLUSIVE
            } else {
                EXIT_OK
            };
            Ok(Outcome::with_code(code, pretty(&report.to_json())))
        }
        Command::Separate { spec, x, y, max_horizon } => {
            let spec = load(&spec)?;
            let x = spec.parse_element(&x).map_err(bad_input)?;
            let y = spec.parse_element(&y).map_err(bad_input)?;
            match separate(&spec, &x, &y, max_horizon) {
                Ok(cert) => {
                    let mut v = cert.to_json(&spec);
                    v["max_horizon"] = json!(max_horizon);
                    Ok(Outcome::ok(pretty(&v)))
                }
                Err(e @ ResidualError::Equal) => Err(Outcome::error(EXIT_USAGE, e)),
                Err(e @ (ResidualError::NotClosed { .. } | ResidualError::TooLarge)) => Err(Outcome::error(EXIT_INCONCLUSIVE, e)),
                Err(e) => Err(Outcome::error(EXIT_INVALID, e)),
            }
        }
        Command::Search(a) => {
            if a.blocks == 0 {
                return Err(Outcome::error(EXIT_USAGE, "--blocks must be at least 1"));
            }
            let config = SearchConfig {
                blocks: a.blocks,
                max_exceptions: a.max_exceptions,
                max_threshold: a.max_threshold,
                max_period: a.max_period,
                max_slope: a.max_slope,
                max_intercept: a.max_intercept,
            };
            let outcome = crate::validate::search(&config);
            outcome.write(&a.out).map_err(|e| Outcome::error(EXIT_USAGE, format!("{}: {e}", a.out.display())))?;
            Ok(Outcome::ok(pretty(&outcome.index_json())))
        }
    }
}
