//! Command-line entry point: argument parsing, environment overrides, and
//! dispatch into the run orchestrator.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qcdiag::count::CountTask;
use qcdiag::forms::DiagonalSystem;
use qcdiag::report::{read_system_spec, run, RunConfig, Task};
use qcdiag::{Error, Result};

const OUT_DIR_ENV: &str = "QCDIAG_OUT_DIR";
const THREADS_ENV: &str = "QCDIAG_THREADS";

#[derive(Parser)]
#[command(
    name = "qcdiag",
    version,
    about = "Diagnostics for diagonal quadratic+cubic systems over residues"
)]
struct Cli {
    /// Output directory for certificates and reports
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads (default: all available)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search all admissible forms for full residue-pair coverage
    VerifyLocal {
        /// Smallest prime to search
        #[arg(long, default_value_t = 5)]
        p_min: u64,
        /// Largest prime to search
        #[arg(long, default_value_t = 37)]
        p_max: u64,
        /// Largest arity to search
        #[arg(long, default_value_t = 7)]
        t_max: usize,
        /// Allow primes above the analytically covered range
        #[arg(long)]
        allow_above_range: bool,
    },
    /// Evaluate one complete exponential sum
    Expsum {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 0)]
        a: i64,
        #[arg(long, default_value_t = 0)]
        b: i64,
        #[arg(long, default_value_t = 1)]
        u: i64,
        #[arg(long, default_value_t = 1)]
        v: i64,
    },
    /// Truncated series and Euler factors for a coefficient system
    Singular {
        #[command(flatten)]
        system: SystemArgs,
        /// Sum the coefficients over q < Q
        #[arg(long = "Q", default_value_t = 50)]
        q_bound: u64,
        /// Euler-factor depth
        #[arg(long = "K", default_value_t = 2)]
        depth: u32,
    },
    /// Solution counts at several heights with a growth-exponent fit
    Count {
        /// T (even moments), R (weighted primes), or R0 (unweighted primes)
        #[arg(long)]
        kind: String,
        /// Number of equations per side, for kind T
        #[arg(long)]
        r: Option<usize>,
        #[command(flatten)]
        system: SystemArgs,
        /// Comma-separated heights P
        #[arg(long, value_delimiter = ',')]
        heights: Vec<u64>,
    },
    /// Normalize a coefficient system modulo p
    Canonical {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        p: Option<u64>,
    },
    /// Threshold root and square-root cancellation checks
    CheckBounds {
        #[arg(long, default_value_t = 7)]
        t: u32,
        /// Comma-separated primes to evaluate the bound at
        #[arg(long, value_delimiter = ',', default_value = "37,41")]
        primes: Vec<u64>,
    },
}

#[derive(Args)]
struct SystemArgs {
    /// Path to a system-spec file (keys u, v, U, V, optional p)
    #[arg(long)]
    system: Option<PathBuf>,
}

impl SystemArgs {
    fn load(&self, context: &str) -> Result<(DiagonalSystem, Option<u64>)> {
        let path = self.system.as_ref().ok_or_else(|| Error::InvalidConfig {
            field: format!("{context}.system"),
            reason: "a system-spec file is required".to_string(),
        })?;
        read_system_spec(path)
    }
}

fn build_config(cli: Cli) -> Result<RunConfig> {
    let out_dir = cli
        .out_dir
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("reports"));
    let threads = match cli.threads {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(s) => Some(s.parse().map_err(|_| Error::InvalidConfig {
                field: THREADS_ENV.to_string(),
                reason: format!("`{s}` is not a thread count"),
            })?),
            Err(_) => None,
        },
    };
    let task = match cli.command {
        Command::VerifyLocal {
            p_min,
            p_max,
            t_max,
            allow_above_range,
        } => Task::VerifyLocal {
            p_min,
            p_max,
            t_max,
            allow_above_range,
        },
        Command::Expsum { q, a, b, u, v } => Task::ExpSum { q, a, b, u, v },
        Command::Singular {
            system,
            q_bound,
            depth,
        } => Task::Singular {
            system: system.load("singular")?.0,
            q_bound,
            depth,
        },
        Command::Count {
            kind,
            r,
            system,
            heights,
        } => {
            let task = match kind.as_str() {
                "T" => CountTask::TR {
                    r: r.ok_or_else(|| Error::InvalidConfig {
                        field: "count.r".to_string(),
                        reason: "kind T needs --r".to_string(),
                    })?,
                },
                "R" => CountTask::RWeighted(system.load("count")?.0),
                "R0" => CountTask::RUnweighted(system.load("count")?.0),
                other => {
                    return Err(Error::InvalidConfig {
                        field: "count.kind".to_string(),
                        reason: format!("`{other}` is not one of T, R, R0"),
                    })
                }
            };
            Task::Count { task, heights }
        }
        Command::Canonical { system, p } => {
            let (sys, spec_p) = system.load("canonical")?;
            let p = p.or(spec_p).ok_or_else(|| Error::InvalidConfig {
                field: "canonical.p".to_string(),
                reason: "a prime is required (flag --p or spec key p)".to_string(),
            })?;
            Task::Canonical { system: sys, p }
        }
        Command::CheckBounds { t, primes } => Task::CheckBounds { t, primes },
    };
    Ok(RunConfig {
        task,
        out_dir,
        threads,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match build_config(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&config) {
        Ok(manifest) => {
            print!("{}", manifest.to_text(true));
            if manifest.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
