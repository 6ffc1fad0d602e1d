//! Batch analyzer for symmetric bilinear forms on finite modules, with
//! built-in verification suites for the structural theorems.
//!
//! Exit codes: 0 success, 1 property violation found, 2 input or
//! parameter error, 3 enumeration budget exhausted.

mod report;
mod spec;

use aniso_core::oracle::{run_suite, SuiteName, SuiteParams, SuiteResult};
use aniso_core::ring::RingFamily;
use aniso_core::{Error, DEFAULT_ENUM_BUDGET};
use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "aniso", version, about = "Anisotropy analysis for bilinear forms on finite modules")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Analyze one instance document.
    Analyze {
        /// Path to a JSON instance file.
        path: PathBuf,
        /// Emit the machine-readable report.
        #[arg(long)]
        json: bool,
        /// Skip the definition-level radical-root oracle.
        #[arg(long)]
        no_oracle: bool,
        /// Element-count budget for submodule enumeration.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Run one of the named verification suites.
    Verify {
        #[arg(long)]
        suite: String,
        /// Residue characteristic.
        #[arg(long)]
        p: u64,
        /// Ring family: zp or fpt.
        #[arg(long, default_value = "zp")]
        family: String,
        /// Maximum total module length of the generated shapes.
        #[arg(long = "max-len", default_value_t = 4)]
        max_len: u32,
        /// Maximum number of cyclic factors per shape.
        #[arg(long = "max-factors", default_value_t = 2)]
        max_factors: usize,
        /// Exhaustive iteration while the Gram count stays at or below
        /// this; seeded sampling of this many instances otherwise.
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Element-count budget for submodule enumeration.
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Print a bundled example instance.
    Example {
        /// One of: paper-z4, semisimple-hyperbolic, cyclic-unit,
        /// composite-12, poly-mixed.
        name: String,
    },
}

fn env_budget() -> Option<u64> {
    std::env::var("ANISO_BUDGET").ok().and_then(|v| v.parse().ok())
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Analyze { path, json, no_oracle, budget } => cmd_analyze(&path, json, no_oracle, budget),
        Cmd::Verify { suite, p, family, max_len, max_factors, samples, seed, budget, json } => {
            cmd_verify(&suite, p, &family, max_len, max_factors, samples, seed, budget, json)
        }
        Cmd::Example { name } => cmd_example(&name),
    };
    std::process::exit(code);
}

fn cmd_analyze(path: &PathBuf, json: bool, no_oracle: bool, budget: Option<u64>) -> i32 {
    let budget = budget.or_else(env_budget).unwrap_or(DEFAULT_ENUM_BUDGET);
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return 2;
        }
    };
    let raw: spec::RawInstance = match serde_json::from_str(&text) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return 2;
        }
    };
    let instance = match spec::build_instance(&raw) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return 2;
        }
    };
    let report = match report::analyze(&instance, !no_oracle, budget) {
        Ok(r) => r,
        Err(report::AnalyzeError::Budget(msg)) => {
            eprintln!("error: budget exhausted: {msg}");
            return 3;
        }
        Err(report::AnalyzeError::Input(msg)) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    debug_assert!(report::descriptors_round_trip(&instance, &report));
    if json {
        println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize"));
    } else {
        print!("{}", report::render_text(&report));
    }
    0
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    suite: &str,
    p: u64,
    family: &str,
    max_len: u32,
    max_factors: usize,
    samples: u64,
    seed: u64,
    budget: Option<u64>,
    json: bool,
) -> i32 {
    let Some(suite) = SuiteName::parse(suite) else {
        eprintln!(
            "error: unknown suite {suite:?} (expected one of {})",
            SuiteName::all().map(|s| s.as_str()).join(", ")
        );
        return 2;
    };
    let family = match family {
        "zp" | "Zp" => RingFamily::IntegersModPrimePower,
        "fpt" | "Fpt" => RingFamily::TruncatedPolynomials,
        other => {
            eprintln!("error: unknown family {other:?} (expected zp or fpt)");
            return 2;
        }
    };
    let mut params = SuiteParams::new(suite, p);
    params.family = family;
    params.max_len = max_len;
    params.max_factors = max_factors;
    params.samples = samples;
    params.seed = seed;
    params.enum_budget = budget.or_else(env_budget).unwrap_or(DEFAULT_ENUM_BUDGET);
    let result = match run_suite(&params) {
        Ok(r) => r,
        Err(Error::BudgetExceeded { size, budget }) => {
            eprintln!(
                "error: a shape needs {size} elements enumerated, budget is {budget} \
                 (raise --budget or shrink --max-len)"
            );
            return 2;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&result).expect("results serialize"));
    } else {
        print!("{}", render_suite(&result));
    }
    if result.passed() {
        0
    } else {
        1
    }
}

fn render_suite(result: &SuiteResult) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "suite {} (p={}, max-len {}, max-factors {}, samples {}, seed {})\n",
        result.params.suite.as_str(),
        result.params.p,
        result.params.max_len,
        result.params.max_factors,
        result.params.samples,
        result.params.seed,
    ));
    out.push_str(&format!(
        "instances: {} ({} skipped as degenerate where the statement needs \
         non-degeneracy)\n",
        result.instances, result.degenerate_skipped
    ));
    if !result.stats.is_empty() {
        out.push_str("stats:\n");
        for (k, v) in &result.stats {
            out.push_str(&format!("  {k}: {v}\n"));
        }
    }
    out.push_str(&format!("runtime: {} ms\n", result.duration_ms));
    if result.failures.is_empty() {
        out.push_str("result: all checks passed\n");
    } else {
        out.push_str(&format!("result: {} FAILURES\n", result.failures.len()));
        for f in &result.failures {
            out.push_str(&format!(
                "  {}: {}\n  replay: {}\n",
                f.check,
                f.detail,
                f.instance.to_spec_json()
            ));
        }
    }
    out
}

fn cmd_example(name: &str) -> i32 {
    match spec::bundled(name) {
        Some(doc) => {
            print!("{doc}");
            0
        }
        None => {
            eprintln!(
                "error: unknown example {name:?} (expected one of {})",
                spec::bundled_names().join(", ")
            );
            2
        }
    }
}
