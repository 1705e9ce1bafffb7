//! Command-line driver for exact Witt algebra computations.
//!
//! Subcommands: `check` (nilpotency of one element), `normalize` (unipotent
//! normal form), `nilcone` (exhaustive or sampled cone census), `borel`
//! (classification and standard-Borel verification), `conjecture` (seeded
//! explorer for maximal solvable subalgebras of W_n).
//!
//! Exit codes: 0 success, 1 a verification contract failed (the violation is
//! in the report, never only logged), 2 usage error. Reports are a single
//! JSON object on stdout; identical (command, seed) pairs produce
//! byte-identical reports regardless of `--jobs`.

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use witt_core::borel::{BorelError, BorelTag, Subalgebra};
use witt_core::jacobson::{self, WnAlgebra};
use witt_core::nilcone::{self, ConeMode, ConeReport, ConeScanner, NilpotencyMethod};
use witt_core::witt::WittElement;
use witt_core::{Automorphism, Prime};

#[derive(Parser)]
#[command(name = "witt", version, about = "Exact computations in the modular Witt algebra W1")]
struct Cli {
    /// Worker threads for sharded scans (0 = available parallelism).
    /// Results are contractually independent of this value.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    /// Write the report to a file instead of standard output.
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide nilpotency of one element by one or all criteria.
    Check(CheckArgs),
    /// Conjugate an element with nonzero leading coefficient to its normal
    /// form D + c x^{p-1} D.
    Normalize(ElementArgs),
    /// Census of the nilpotent cone: exhaustive (p <= 7) or seeded sample.
    Nilcone(NilconeArgs),
    /// Classify a Borel subalgebra or verify the two standard ones.
    Borel(BorelArgs),
    /// Grow maximal solvable subalgebras of W_n from seeded lines and
    /// report the class or signature census.
    Conjecture(ConjectureArgs),
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    p: u64,
    /// Element encoding "k_{-1},k_0,...,k_{p-2}".
    #[arg(long)]
    element: String,
    #[arg(long, value_enum, default_value_t = MethodArg::All)]
    method: MethodArg,
}

#[derive(Args)]
struct ElementArgs {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    element: String,
}

#[derive(Args)]
struct NilconeArgs {
    #[arg(long)]
    p: u64,
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Sample size (sample mode).
    #[arg(long, default_value_t = 100_000)]
    n: u64,
    /// Stream seed (sample mode).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BorelArgs {
    #[arg(long)]
    p: u64,
    /// Subalgebra encoding: semicolon-separated element encodings.
    #[arg(long, conflicts_with = "verify_standard")]
    classify: Option<String>,
    /// Check both standard Borel subalgebras end to end.
    #[arg(long)]
    verify_standard: bool,
}

#[derive(Args)]
struct ConjectureArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: u64,
    /// Number of seeds (the seed list is 0..seeds).
    #[arg(long, default_value_t = 1000)]
    seeds: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Recursive,
    Determinant,
    Operator,
    All,
}

impl MethodArg {
    fn name(self) -> &'static str {
        match self {
            MethodArg::Recursive => "recursive",
            MethodArg::Determinant => "determinant",
            MethodArg::Operator => "operator",
            MethodArg::All => "all",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Enumerate,
    Sample,
}

#[derive(Serialize)]
struct RunReport {
    command: String,
    version: String,
    result: Value,
}

enum RunError {
    /// Invalid request: bad prime, bad encoding, out-of-budget mode.
    Usage(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let outcome = run(&cli.command, cli.jobs);
    match outcome {
        Err(RunError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Ok((command, result, ok)) => {
            let report = RunReport {
                command,
                version: env!("CARGO_PKG_VERSION").to_string(),
                result,
            };
            let body = serde_json::to_string(&report).expect("report serializes");
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, format!("{body}\n")) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                let mut stdout = std::io::stdout().lock();
                let _ = writeln!(stdout, "{body}");
            }
            eprintln!("completed in {} ms", started.elapsed().as_millis());
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn parse_prime(p: u64) -> Result<Prime, RunError> {
    Prime::new(p).map_err(|e| RunError::Usage(e.to_string()))
}

fn thread_pool(jobs: usize) -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if jobs > 0 {
        builder = builder.num_threads(jobs);
    }
    builder.build().expect("thread pool")
}

fn run(cmd: &Command, jobs: usize) -> Result<(String, Value, bool), RunError> {
    match cmd {
        Command::Check(args) => run_check(args),
        Command::Normalize(args) => run_normalize(args),
        Command::Nilcone(args) => run_nilcone(args, jobs),
        Command::Borel(args) => run_borel(args),
        Command::Conjecture(args) => run_conjecture(args, jobs),
    }
}

fn run_check(args: &CheckArgs) -> Result<(String, Value, bool), RunError> {
    let p = parse_prime(args.p)?;
    let x = WittElement::parse(p, &args.element)
        .map_err(|e| RunError::Usage(format!("bad --element: {e}")))?;
    let command = format!(
        "check --p {} --element {} --method {}",
        args.p,
        x.encode(),
        args.method.name()
    );
    let psi0 = x.restriction_scalar().value();
    let result = match args.method {
        MethodArg::All => {
            let rec = nilcone::is_nilpotent(&x, NilpotencyMethod::Recursive);
            let det = nilcone::is_nilpotent(&x, NilpotencyMethod::Determinant);
            let oper = nilcone::is_nilpotent(&x, NilpotencyMethod::Operator);
            if rec == det && det == oper {
                json!({ "nilpotent": oper, "psi0": psi0 })
            } else {
                // Contract violation: the three criteria must agree.
                let v = json!({
                    "criteria_disagreement": true,
                    "methods": { "recursive": rec, "determinant": det, "operator": oper },
                    "psi0": psi0,
                });
                return Ok((command, v, false));
            }
        }
        m => {
            let method = match m {
                MethodArg::Recursive => NilpotencyMethod::Recursive,
                MethodArg::Determinant => NilpotencyMethod::Determinant,
                MethodArg::Operator => NilpotencyMethod::Operator,
                MethodArg::All => unreachable!(),
            };
            json!({
                "nilpotent": nilcone::is_nilpotent(&x, method),
                "psi0": psi0,
                "method": m.name(),
            })
        }
    };
    Ok((command, result, true))
}

fn run_normalize(args: &ElementArgs) -> Result<(String, Value, bool), RunError> {
    let p = parse_prime(args.p)?;
    let x = WittElement::parse(p, &args.element)
        .map_err(|e| RunError::Usage(format!("bad --element: {e}")))?;
    let lead = x.coeff(-1);
    if lead.is_zero() {
        return Err(RunError::Usage(
            "normalize needs a nonzero leading coefficient k_{-1}".into(),
        ));
    }
    let command = format!("normalize --p {} --element {}", args.p, x.encode());
    let scale = Automorphism::scaling(p, lead).expect("nonzero");
    let scaled = scale.apply(&x);
    let nf = nilcone::normalize_to_d(&scaled).expect("leading coefficient is one");
    let witness = nf.sigma.compose(&scale);
    let normal = witness.apply(&x);
    let result = json!({
        "torus": lead.value(),
        "sigma": nf.sigma.encode(),
        "witness": witness.encode(),
        "c": nf.c.value(),
        "normal_form": normal.encode(),
        "nilpotent": nf.c.is_zero(),
    });
    Ok((command, result, true))
}

fn run_nilcone(args: &NilconeArgs, jobs: usize) -> Result<(String, Value, bool), RunError> {
    let p = parse_prime(args.p)?;
    let pool = thread_pool(jobs);
    let report = match args.mode {
        ModeArg::Enumerate => {
            if args.p > 7 {
                return Err(RunError::Usage(
                    "enumerate is limited to p <= 7 (p^p elements); use --mode sample".into(),
                ));
            }
            let command = format!("nilcone --p {} --mode enumerate", args.p);
            let total = nilcone::element_count(p);
            let tally = pool.install(|| {
                use rayon::prelude::*;
                let shards = (pool.current_num_threads() * 8) as u64;
                let step = (total / shards).max(1);
                (0..total)
                    .step_by(step as usize)
                    .collect::<Vec<_>>()
                    .into_par_iter()
                    .map(|start| {
                        ConeScanner::new(p).scan_range(start..(start + step).min(total))
                    })
                    .reduce(Default::default, |a, b| a.merge(b))
            });
            (command, ConeReport::from_tally(p, ConeMode::Exhaustive, tally, None))
        }
        ModeArg::Sample => {
            let command = format!(
                "nilcone --p {} --mode sample --n {} --seed {}",
                args.p, args.n, args.seed
            );
            let seed = args.seed;
            let total = args.n;
            let tally = pool.install(|| {
                use rayon::prelude::*;
                let shards = (pool.current_num_threads() * 8) as u64;
                let step = (total / shards).max(1);
                (0..total)
                    .step_by(step as usize)
                    .collect::<Vec<_>>()
                    .into_par_iter()
                    .map(|start| {
                        ConeScanner::new(p).sample_range(seed, start..(start + step).min(total))
                    })
                    .reduce(Default::default, |a, b| a.merge(b))
            });
            (command, ConeReport::from_tally(p, ConeMode::Sample, tally, Some(seed)))
        }
    };
    let (command, report) = report;
    let ok = report.criteria_disagreements == 0;
    let value = serde_json::to_value(&report).expect("report serializes");
    Ok((command, value, ok))
}

fn run_borel(args: &BorelArgs) -> Result<(String, Value, bool), RunError> {
    let p = parse_prime(args.p)?;
    if let Some(enc) = &args.classify {
        let b = Subalgebra::parse(p, enc)
            .map_err(|e| RunError::Usage(format!("bad --classify: {e}")))?;
        let command = format!("borel --p {} --classify {}", args.p, b.encode());
        let (value, ok) = match b.classify_borel() {
            Ok(class) => (
                json!({
                    "class": match class.tag { BorelTag::Plus => "plus", BorelTag::Minus => "minus" },
                    "witness": class.witness.encode(),
                }),
                true,
            ),
            Err(BorelError::ClassificationFailed) => {
                (json!({ "error": "classification_failed" }), false)
            }
            Err(_) => (json!({ "error": "not_borel" }), false),
        };
        return Ok((command, value, ok));
    }
    if !args.verify_standard {
        return Err(RunError::Usage(
            "borel needs --classify <subalgebra> or --verify-standard".into(),
        ));
    }
    let command = format!("borel --p {} --verify-standard", args.p);
    let (plus, minus) = Subalgebra::standard_borels(p);
    let verify = |b: &Subalgebra| -> Result<Value, BorelError> {
        let maximal = b.is_maximal_solvable()?;
        let class = b.classify_borel()?;
        Ok(json!({
            "dim": b.dim(),
            "maximal_solvable": maximal,
            "class": match class.tag { BorelTag::Plus => "plus", BorelTag::Minus => "minus" },
            "witness": class.witness.encode(),
        }))
    };
    let sl2_span = Subalgebra::span(
        p,
        &[
            WittElement::basis(p, -1),
            WittElement::basis(p, 0),
            WittElement::basis(p, 1),
        ],
    );
    let triple = sl2_span.sl2_triple().expect("closed span");
    let mut ok = triple.is_some() && !sl2_span.is_solvable().expect("closed");
    let plus_report = match verify(&plus) {
        Ok(v) => v,
        Err(e) => {
            ok = false;
            json!({ "error": e.to_string() })
        }
    };
    let minus_report = match verify(&minus) {
        Ok(v) => v,
        Err(e) => {
            ok = false;
            json!({ "error": e.to_string() })
        }
    };
    if let Some(v) = plus_report.get("class") {
        ok = ok && v == "plus";
    }
    if let Some(v) = minus_report.get("class") {
        ok = ok && v == "minus";
    }
    let value = json!({
        "p": args.p,
        "b_plus": plus_report,
        "b_minus": minus_report,
        "sl2_span_solvable": false,
        "sl2_triple": triple.map(|t| json!({
            "e": t.e.encode(), "h": t.h.encode(), "f": t.f.encode(),
        })),
    });
    Ok((command, value, ok))
}

fn run_conjecture(args: &ConjectureArgs, jobs: usize) -> Result<(String, Value, bool), RunError> {
    let p = parse_prime(args.p)?;
    if args.n < 1 {
        return Err(RunError::Usage("--n must be at least 1".into()));
    }
    let alg = WnAlgebra::new(args.n, p);
    if alg.dim() > 64 {
        return Err(RunError::Usage(format!(
            "n * p^n = {} exceeds the explorer budget (64)",
            alg.dim()
        )));
    }
    let command = format!(
        "conjecture --n {} --p {} --seeds {}",
        args.n, args.p, args.seeds
    );
    let pool = thread_pool(jobs);
    if args.n == 1 {
        // Grown subalgebras of W_1 are classified against the two standard
        // Borel classes; everything else is a reported finding.
        #[derive(Clone, Copy, PartialEq, Eq)]
        enum Outcome {
            Plus,
            Minus,
            Unclassified,
        }
        let outcomes: Vec<Outcome> = pool.install(|| {
            use rayon::prelude::*;
            (0..args.seeds)
                .into_par_iter()
                .map(|seed| {
                    let grown = jacobson::grow_maximal_solvable(&alg, seed)
                        .expect("dimension within budget");
                    let b = jacobson::to_w1(&alg, &grown);
                    match b.classify_borel() {
                        Ok(c) if c.tag == BorelTag::Plus => Outcome::Plus,
                        Ok(_) => Outcome::Minus,
                        Err(_) => Outcome::Unclassified,
                    }
                })
                .collect()
        });
        let count = |o: Outcome| outcomes.iter().filter(|&&x| x == o).count() as u64;
        let unclassified = count(Outcome::Unclassified);
        let value = json!({
            "n": 1,
            "p": args.p,
            "seeds": args.seeds,
            "classes": {
                "plus": count(Outcome::Plus),
                "minus": count(Outcome::Minus),
                "unclassified": unclassified,
            },
        });
        return Ok((command, value, unclassified == 0));
    }
    let signatures: Vec<jacobson::SolvableSignature> = pool.install(|| {
        use rayon::prelude::*;
        (0..args.seeds)
            .into_par_iter()
            .map(|seed| {
                let grown = jacobson::grow_maximal_solvable(&alg, seed)
                    .expect("dimension within budget");
                jacobson::signature(&alg, &grown).expect("grown subalgebras are solvable")
            })
            .collect()
    });
    let report = jacobson::census(args.n, p, &signatures);
    let value = serde_json::to_value(&report).expect("report serializes");
    Ok((command, value, true))
}
