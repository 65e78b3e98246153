//! Run orchestration: validated run configurations, pipeline execution,
//! and persistence of certificates and reports to a run-stamped directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Deserialize;

use crate::count::{exponent_fit, CountTask};
use crate::error::{Error, Result};
use crate::expsum::{w_sum, weil_check};
use crate::forms::{canonicalize, DiagonalSystem};
use crate::local::{
    mpbound_threshold, mpbound_value, verify_prime_with_override, VERIFICATION_PRIMES,
};
use crate::series::truncated_series;

/// Which pipeline a run executes.
#[derive(Debug, Clone)]
pub enum Task {
    VerifyLocal {
        p_min: u64,
        p_max: u64,
        t_max: usize,
        allow_above_range: bool,
    },
    ExpSum {
        q: u64,
        a: i64,
        b: i64,
        u: i64,
        v: i64,
    },
    Singular {
        system: DiagonalSystem,
        q_bound: u64,
        depth: u32,
    },
    Count {
        task: CountTask,
        heights: Vec<u64>,
    },
    Canonical {
        system: DiagonalSystem,
        p: u64,
    },
    CheckBounds {
        t: u32,
        primes: Vec<u64>,
    },
}

/// Fully validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub task: Task,
    pub out_dir: PathBuf,
    /// worker threads; `None` means all available
    pub threads: Option<usize>,
}

fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::InvalidConfig {
        field: field.to_string(),
        reason: reason.into(),
    }
}

impl RunConfig {
    /// Check every range precondition, naming the first offending field.
    pub fn validate(&self) -> Result<()> {
        if self.threads == Some(0) {
            return Err(invalid("threads", "must be at least 1"));
        }
        match &self.task {
            Task::VerifyLocal {
                p_min,
                p_max,
                t_max,
                ..
            } => {
                if *p_min < 5 {
                    return Err(invalid("verify-local.p-min", "must be at least 5"));
                }
                if p_max < p_min {
                    return Err(invalid("verify-local.p-max", "must be >= p-min"));
                }
                if !(3..=8).contains(t_max) {
                    return Err(invalid("verify-local.t-max", "must lie in 3..=8"));
                }
            }
            Task::ExpSum { q, .. } => {
                if *q == 0 {
                    return Err(invalid("expsum.q", "modulus must be positive"));
                }
            }
            Task::Singular {
                system,
                q_bound,
                depth,
            } => {
                if system.arity() < 2 {
                    return Err(invalid("singular.system", "need at least two variables"));
                }
                if *q_bound < 2 {
                    return Err(invalid("singular.Q", "truncation must be at least 2"));
                }
                if *depth < 1 {
                    return Err(invalid("singular.K", "depth must be at least 1"));
                }
            }
            Task::Count { task, heights } => {
                if heights.len() < 3 {
                    return Err(invalid("count.heights", "need at least three heights"));
                }
                if !heights.windows(2).all(|w| w[0] < w[1]) {
                    return Err(invalid("count.heights", "must be strictly increasing"));
                }
                if let CountTask::TR { r } = task {
                    if *r < 1 {
                        return Err(invalid("count.r", "must be at least 1"));
                    }
                }
            }
            Task::Canonical { p, system } => {
                if *p < 5 {
                    return Err(invalid("canonical.p", "normalization needs p >= 5"));
                }
                if system.arity() == 0 {
                    return Err(invalid("canonical.system", "form has no coefficients"));
                }
            }
            Task::CheckBounds { t, primes } => {
                if !(3..=8).contains(t) {
                    return Err(invalid("check-bounds.t", "must lie in 3..=8"));
                }
                if primes.iter().any(|&p| p < 5) {
                    return Err(invalid("check-bounds.primes", "primes must be >= 5"));
                }
            }
        }
        Ok(())
    }
}

/// System-spec document: coefficient arrays plus optional targets and a
/// prime for normalization runs.
#[derive(Debug, Deserialize)]
struct SystemSpec {
    u: Vec<i64>,
    v: Vec<i64>,
    #[serde(rename = "U", default)]
    target_u: i64,
    #[serde(rename = "V", default)]
    target_v: i64,
    p: Option<u64>,
}

/// Read a system-spec file. Returns the system and the optional prime.
pub fn read_system_spec(path: &Path) -> Result<(DiagonalSystem, Option<u64>)> {
    let text = fs::read_to_string(path)?;
    let spec: SystemSpec = toml::from_str(&text)
        .map_err(|e| invalid("system", format!("parse failure: {e}")))?;
    if spec.u.len() != spec.v.len() {
        return Err(invalid("system.u", "u and v must have equal length"));
    }
    let sys = DiagonalSystem::new(spec.u, spec.v, spec.target_u, spec.target_v)?;
    Ok((sys, spec.p))
}

/// One launched task and whether it passed.
#[derive(Debug, Clone)]
pub struct TaskOutcome {
    pub name: String,
    pub pass: bool,
}

/// Summary of a completed run.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub version: String,
    pub config_echo: String,
    pub outcomes: Vec<TaskOutcome>,
    pub run_dir: PathBuf,
    pub wall_secs: f64,
}

impl RunManifest {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.pass)
    }

    /// Fixed-order rendering; the timing line comes last so byte
    /// comparisons can drop it.
    pub fn to_text(&self, include_timing: bool) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "version: {}", self.version);
        let _ = writeln!(out, "config: {}", self.config_echo);
        for o in &self.outcomes {
            let _ = writeln!(out, "task {}: {}", o.name, if o.pass { "pass" } else { "fail" });
        }
        let _ = writeln!(out, "all passed: {}", self.all_passed());
        if include_timing {
            let _ = writeln!(out, "wall_secs: {:.3}", self.wall_secs);
        }
        out
    }
}

fn config_echo(task: &Task) -> String {
    match task {
        Task::VerifyLocal {
            p_min,
            p_max,
            t_max,
            allow_above_range,
        } => format!(
            "verify-local p_min={p_min} p_max={p_max} t_max={t_max} override={allow_above_range}"
        ),
        Task::ExpSum { q, a, b, u, v } => format!("expsum q={q} a={a} b={b} u={u} v={v}"),
        Task::Singular {
            system,
            q_bound,
            depth,
        } => format!(
            "singular u={:?} v={:?} U={} V={} Q={q_bound} K={depth}",
            system.u, system.v, system.target_u, system.target_v
        ),
        Task::Count { task, heights } => {
            let kind = match task {
                CountTask::TR { r } => format!("T r={r}"),
                CountTask::RWeighted(sys) => format!("R u={:?} v={:?}", sys.u, sys.v),
                CountTask::RUnweighted(sys) => format!("R0 u={:?} v={:?}", sys.u, sys.v),
            };
            format!("count kind={kind} heights={heights:?}")
        }
        Task::Canonical { system, p } => {
            format!("canonical u={:?} v={:?} p={p}", system.u, system.v)
        }
        Task::CheckBounds { t, primes } => format!("check-bounds t={t} primes={primes:?}"),
    }
}

/// Create `<out_dir>/run-NNNN` with the first free ordinal and point the
/// `latest` file at it.
fn create_run_dir(out_dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(out_dir)?;
    for ordinal in 1u32.. {
        let candidate = out_dir.join(format!("run-{ordinal:04}"));
        match fs::create_dir(&candidate) {
            Ok(()) => {
                fs::write(out_dir.join("latest"), format!("run-{ordinal:04}\n"))?;
                return Ok(candidate);
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e.into()),
        }
    }
    unreachable!("ordinal space exhausted");
}

fn write_report(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::write(dir.join(name), text)?;
    Ok(())
}

/// Execute the configured pipeline, persisting certificates and reports.
///
/// Work runs inside a dedicated thread pool of the configured size, so runs
/// at different parallelism degrees can be compared within one process.
/// Certificates and reports are written without timing fields; the timing
/// lives in the returned manifest.
pub fn run(config: &RunConfig) -> Result<RunManifest> {
    config.validate()?;
    let started = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0))
        .build()
        .map_err(|e| invalid("threads", e.to_string()))?;
    let run_dir = create_run_dir(&config.out_dir)?;
    let outcomes = pool.install(|| execute(&config.task, &run_dir))?;

    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_echo: config_echo(&config.task),
        outcomes,
        run_dir: run_dir.clone(),
        wall_secs: started.elapsed().as_secs_f64(),
    };
    write_report(&run_dir, "manifest.txt", &manifest.to_text(true))?;
    Ok(manifest)
}

fn execute(task: &Task, run_dir: &Path) -> Result<Vec<TaskOutcome>> {
    let mut outcomes = Vec::new();
    match task {
        Task::VerifyLocal {
            p_min,
            p_max,
            t_max,
            allow_above_range,
        } => {
            let primes: Vec<u64> = VERIFICATION_PRIMES
                .iter()
                .copied()
                .chain(first_primes_above(*p_max))
                .filter(|p| (*p_min..=*p_max).contains(p))
                .collect();
            let mut all_pass = true;
            for &p in &primes {
                let cert = verify_prime_with_override(p, *t_max, *allow_above_range)?;
                write_report(run_dir, &format!("verify-p{p}.txt"), &cert.to_text(false))?;
                outcomes.push(TaskOutcome {
                    name: format!("verify p={p}"),
                    pass: cert.pass,
                });
                all_pass &= cert.pass;
            }
            write_report(
                run_dir,
                "search.txt",
                &format!("search complete: {all_pass}\n"),
            )?;
        }
        Task::ExpSum { q, a, b, u, v } => {
            let w = w_sum(*q, *a, *b, *u, *v);
            let text = format!(
                "q: {q}\na: {a}\nb: {b}\nu: {u}\nv: {v}\nre: {:.14e}\nim: {:.14e}\nabs: {:.14e}\n",
                w.value.re,
                w.value.im,
                w.value.norm()
            );
            write_report(run_dir, "expsum.txt", &text)?;
            outcomes.push(TaskOutcome {
                name: format!("expsum q={q}"),
                pass: true,
            });
        }
        Task::Singular {
            system,
            q_bound,
            depth,
        } => {
            let report = truncated_series(system, *q_bound, *depth)?;
            write_report(run_dir, "series.txt", &report.to_text())?;
            let pass = report.euler_factors.iter().all(|&(_, _, positive)| positive);
            outcomes.push(TaskOutcome {
                name: format!("singular Q={q_bound} K={depth}"),
                pass,
            });
        }
        Task::Count { task, heights } => {
            let fit = exponent_fit(task, heights)?;
            write_report(run_dir, "counts.txt", &fit.to_text(false))?;
            outcomes.push(TaskOutcome {
                name: format!("count heights={heights:?}"),
                pass: true,
            });
        }
        Task::Canonical { system, p } => {
            let (form, transform) = canonicalize(system, *p)?;
            let text = format!(
                "p: {p}\nu: {:?}\nv: {:?}\nones_count: {}\nnonresidue: {}\nquad_scale: {}\ncubic_scale: {}\n",
                form.u, form.v, form.ones_count, form.nonresidue,
                transform.quad_scale, transform.cubic_scale
            );
            write_report(run_dir, "canonical.txt", &text)?;
            outcomes.push(TaskOutcome {
                name: format!("canonical p={p}"),
                pass: true,
            });
        }
        Task::CheckBounds { t, primes } => {
            let root = mpbound_threshold(*t)?;
            let mut text = format!("t: {t}\nthreshold: {root:.6}\n");
            let mut all_pass = true;
            for &p in primes {
                let value = mpbound_value(p as f64, *t);
                let _ = writeln!(text, "bound p={p}: {value:.6e}");
                let report = weil_check(p, &[(1, 1)])?;
                let _ = writeln!(
                    text,
                    "weil p={p}: checked={} max_ratio={:.6}",
                    report.sums_checked, report.max_ratio
                );
                all_pass &= report.max_ratio <= 1.0 + 1e-9;
            }
            write_report(run_dir, "bounds.txt", &text)?;
            outcomes.push(TaskOutcome {
                name: format!("check-bounds t={t}"),
                pass: all_pass,
            });
        }
    }
    Ok(outcomes)
}

/// Odd primes in (37, p_max], for override runs past the verified range.
fn first_primes_above(p_max: u64) -> Vec<u64> {
    (38..=p_max)
        .filter(|&n| n % 2 == 1 && (3..n).take_while(|d| d * d <= n).all(|d| n % d != 0))
        .collect()
}
