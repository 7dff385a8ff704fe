use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use singlet_core::fidelity::singlet_fraction;
use singlet_core::filtering::optimize_filter;
use singlet_core::report::{analyze, matrix_entries, AnalyzeOptions};
use singlet_core::states::{rho_family, DensityMatrix};
use singlet_core::sweep::{self, SweepOptions};
use singlet_core::verify::{self, Mutation};

const SEED_ENV: &str = "SINGLET_BOUND_SEED";
const DEFAULT_RESTARTS: u64 = 32;

const EXIT_INPUT: u8 = 1;
const EXIT_VERIFY: u8 = 2;

#[derive(Parser)]
#[command(
    name = "singlet-bound",
    version,
    about = "Singlet fraction, eigenvalue bounds and local filtering for two-qubit states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report fidelities, entanglement, bounds and anomaly flags for one state.
    Analyze {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        search: Search,
        /// Use the identity filter instead of optimizing one.
        #[arg(long)]
        identity_filter: bool,
    },
    /// Tabulate the rho(F) family as CSV.
    Sweep {
        #[arg(long, default_value_t = sweep::DEFAULT_FROM)]
        from: f64,
        #[arg(long, default_value_t = sweep::DEFAULT_TO)]
        to: f64,
        #[arg(long, default_value_t = sweep::DEFAULT_STEP)]
        step: f64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also run the filter optimizer at every grid point.
        #[arg(long)]
        numeric: bool,
        #[command(flatten)]
        search: Search,
    },
    /// Run the randomized property suites.
    Verify {
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, env = SEED_ENV, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = MutationArg::None, hide = true)]
        inject_mutation: MutationArg,
    },
    /// Search for the local filter that maximizes the singlet fraction.
    OptimizeFilter {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        search: Search,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Member F of the rho(F) family.
    #[arg(long)]
    family: Option<f64>,
    /// JSON state file: {"matrix": [[[re, im], ...], ...]}.
    #[arg(long)]
    state: Option<PathBuf>,
}

#[derive(Args)]
struct Search {
    #[arg(long, default_value_t = DEFAULT_RESTARTS, value_parser = clap::value_parser!(u64).range(1..))]
    restarts: u64,
    #[arg(long, env = SEED_ENV, default_value_t = 42)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum MutationArg {
    None,
    DropDemboSqrt,
}

impl From<MutationArg> for Mutation {
    fn from(m: MutationArg) -> Self {
        match m {
            MutationArg::None => Mutation::None,
            MutationArg::DropDemboSqrt => Mutation::DropDemboSqrt,
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.to_string(),
        }
    }
}

impl From<singlet_core::Error> for Failure {
    fn from(e: singlet_core::Error) -> Self {
        Failure::input(e)
    }
}

impl Source {
    fn load(&self) -> Result<(DensityMatrix, Option<f64>), Failure> {
        match (self.family, &self.state) {
            (Some(f), _) => Ok((rho_family(f)?, Some(f))),
            (None, Some(path)) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
                let rho = DensityMatrix::from_json_str(&text)
                    .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
                Ok((rho, None))
            }
            (None, None) => unreachable!("clap requires one source"),
        }
    }
}

fn print_json(rendered: serde_json::Result<String>) -> Result<(), Failure> {
    let text = rendered.map_err(Failure::input)?;
    println!("{text}");
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze {
            source,
            search,
            identity_filter,
        } => {
            let (rho, family) = source.load()?;
            let options = AnalyzeOptions {
                restarts: search.restarts as usize,
                seed: search.seed,
                identity_filter,
            };
            print_json(serde_json::to_string_pretty(&analyze(
                &rho, family, &options,
            )?))
        }
        Command::Sweep {
            from,
            to,
            step,
            out,
            numeric,
            search,
        } => {
            let rows = sweep::sweep(&SweepOptions {
                from,
                to,
                step,
                numeric,
                restarts: search.restarts as usize,
                seed: search.seed,
            })?;
            let mut buf = Vec::new();
            sweep::write_csv(&mut buf, &rows).map_err(Failure::input)?;
            match out {
                Some(path) => fs::write(&path, &buf)
                    .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display()))),
                None => io::stdout().write_all(&buf).map_err(Failure::input),
            }
        }
        Command::Verify {
            trials,
            seed,
            inject_mutation,
        } => {
            let report = verify::run_all(trials as usize, seed, inject_mutation.into());
            for suite in &report.suites {
                println!(
                    "{:<24} {:>6} passed {:>6} failed",
                    suite.name, suite.passed, suite.failed
                );
                if let Some(f) = &suite.first_failure {
                    println!(
                        "  first failure: trial {} (seed {seed}, trial seed {:#018x}): {}",
                        f.trial, f.trial_seed, f.detail
                    );
                }
            }
            if report.all_passed() {
                println!("all suites passed ({trials} trials, seed {seed})");
                Ok(())
            } else {
                Err(Failure {
                    code: EXIT_VERIFY,
                    message: "verification failed".into(),
                })
            }
        }
        Command::OptimizeFilter { source, search } => {
            let (rho, _) = source.load()?;
            let best = optimize_filter(&rho, search.restarts as usize, search.seed);
            print_json(serde_json::to_string_pretty(&json!({
                "filter": matrix_entries(best.filter.matrix()),
                "F_before": singlet_fraction(&rho),
                "F_after": best.value,
                "success_probability": best.success_probability,
                "filtered_singlet_fraction": best.filtered_singlet_fraction,
                "restart": best.restart,
                "restarts": search.restarts,
                "seed": search.seed,
            })))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
