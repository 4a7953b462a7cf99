//! `fom`: run experiments, check declared constants and fit rates.

mod config;
mod report;

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use fom_core::{
    fit_rate, make_instance, make_named, reference_optimum, run, verify_constants, Error,
    RunOptions,
};

use config::{env_tolerance, RunConfig};
use report::{read_primal_column, read_summary, write_summary, write_trace, Summary};

const EXIT_OK: u8 = 0;
const EXIT_CONFIG: u8 = 1;
const EXIT_VIOLATION: u8 = 2;

#[derive(Parser)]
#[command(
    name = "fom",
    version,
    about = "First-order methods with certified duality gaps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more JSON configs, writing trace.csv and summary.json.
    Run {
        #[arg(long = "config", required = true, num_args = 1..)]
        configs: Vec<PathBuf>,
        /// Output directory; one subdirectory per config when several are given.
        #[arg(long, default_value = "fom-out")]
        out: PathBuf,
        /// Configs to run concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Sample the declared smoothness constants of a registry instance.
    Verify {
        #[arg(long)]
        instance: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Multiply every declared M before checking.
        #[arg(long, default_value_t = 1.0)]
        m_scale: f64,
        /// Multiply every declared L before checking.
        #[arg(long, default_value_t = 1.0)]
        l_scale: f64,
    },
    /// Fit the log-log slope of suboptimality in a trace.
    Rates {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        tail: f64,
    },
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

fn config_err(err: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        err: err.into(),
    }
}

/// Library errors raised while iterating are mathematical failures;
/// everything caught before the first step is a configuration problem.
fn runtime_err(err: Error) -> Failure {
    let code = match err {
        Error::BacktrackFailed { .. }
        | Error::Domain(_)
        | Error::NotAdmissible(_)
        | Error::Underflow
        | Error::NonFinite => EXIT_VIOLATION,
        _ => EXIT_CONFIG,
    };
    Failure {
        code,
        err: err.into(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK });
        }
    };
    let code = match cli.command {
        Command::Run { configs, out, jobs } => cmd_run(&configs, &out, jobs),
        Command::Verify {
            instance,
            seed,
            samples,
            m_scale,
            l_scale,
        } => report_failure(cmd_verify(&instance, seed, samples, m_scale, l_scale)),
        Command::Rates { trace, tail } => report_failure(cmd_rates(&trace, tail).map(|()| EXIT_OK)),
    };
    ExitCode::from(code)
}

fn report_failure(res: Result<u8, Failure>) -> u8 {
    res.unwrap_or_else(|f| {
        eprintln!("error: {:#}", f.err);
        f.code
    })
}

fn output_dirs(configs: &[PathBuf], out: &Path) -> Result<Vec<PathBuf>> {
    if configs.len() == 1 {
        return Ok(vec![out.to_path_buf()]);
    }
    let mut seen = HashSet::new();
    configs
        .iter()
        .map(|c| {
            let stem = c
                .file_stem()
                .with_context(|| format!("{} has no file name", c.display()))?
                .to_string_lossy()
                .into_owned();
            if !seen.insert(stem.clone()) {
                bail!("two configs share the name `{stem}`; outputs would collide");
            }
            Ok(out.join(stem))
        })
        .collect()
}

fn cmd_run(configs: &[PathBuf], out: &Path, jobs: usize) -> u8 {
    let env_tol = match env_tolerance() {
        Ok(t) => t,
        Err(e) => return report_failure(Err(config_err(e))),
    };
    let dirs = match output_dirs(configs, out) {
        Ok(d) => d,
        Err(e) => return report_failure(Err(config_err(e))),
    };
    let next = AtomicUsize::new(0);
    let codes = Mutex::new(vec![EXIT_OK; configs.len()]);
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, configs.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(path) = configs.get(i) else { break };
                let code = match run_config(path, &dirs[i], env_tol) {
                    Ok(code) => code,
                    Err(f) => {
                        eprintln!("error: {}: {:#}", path.display(), f.err);
                        f.code
                    }
                };
                codes.lock().unwrap()[i] = code;
            });
        }
    });
    codes
        .into_inner()
        .unwrap()
        .into_iter()
        .max()
        .unwrap_or(EXIT_OK)
}

fn run_config(path: &Path, out: &Path, env_tol: Option<f64>) -> Result<u8, Failure> {
    let cfg = RunConfig::load(path).map_err(config_err)?;
    let mut inst = make_instance::<f64>(&cfg.instance).map_err(config_err)?;
    if let Some(s) = cfg.constant_scale {
        inst.claims = inst
            .claims
            .iter()
            .map(|c| c.scale_l(s.l).scale_m(s.m))
            .collect();
    }
    cfg.method.validate(&inst).map_err(config_err)?;
    cfg.method
        .step_rule(&inst, cfg.iterations)
        .validate()
        .map_err(config_err)?;

    let reference = match (&inst.known_optimum, cfg.reference_budget()) {
        (Some(opt), _) => Some(opt.clone()),
        (None, 0) => None,
        (None, budget) => Some(
            reference_optimum(&inst, budget)
                .map_err(runtime_err)?
                .optimum,
        ),
    };
    let opts = RunOptions {
        iterations: cfg.iterations,
        tolerances: cfg.tolerances(env_tol),
    };
    let started = Instant::now();
    let trace = run(&inst, &cfg.method, &opts, reference.as_ref()).map_err(runtime_err)?;
    let wall_time_ms = started.elapsed().as_secs_f64() * 1e3;

    std::fs::create_dir_all(out)
        .with_context(|| format!("creating {}", out.display()))
        .map_err(config_err)?;
    write_trace(&out.join("trace.csv"), &trace).map_err(config_err)?;
    let last = trace
        .last()
        .ok_or_else(|| config_err(anyhow!("run produced no rows")))?;
    let summary = Summary {
        final_gap: last.gap,
        final_primal: last.primal,
        iterations: trace.rows.len(),
        wall_time_ms,
        violations: trace.violations.clone(),
        reference_value: trace.reference_value,
        theoretical_exponent: trace.theoretical_exponent,
        method: trace.method.clone(),
        instance: trace.instance.clone(),
    };
    write_summary(&out.join("summary.json"), &summary).map_err(config_err)?;

    println!(
        "{}: {} on {}, {} iterations, gap {:e}, {} violations -> {}",
        path.display(),
        summary.method,
        summary.instance,
        summary.iterations,
        summary.final_gap,
        summary.violations.len(),
        out.display()
    );
    if let Some(v) = summary.violations.first() {
        eprintln!(
            "violation: {} at k={}: {:e} exceeds {:e}",
            v.check, v.k, v.value, v.limit
        );
        return Ok(EXIT_VIOLATION);
    }
    Ok(EXIT_OK)
}

fn cmd_verify(
    name: &str,
    seed: u64,
    samples: usize,
    m_scale: f64,
    l_scale: f64,
) -> Result<u8, Failure> {
    for s in [m_scale, l_scale] {
        if !(s > 0.0 && s.is_finite()) {
            return Err(config_err(anyhow!("constant scale {s} must be positive")));
        }
    }
    let mut inst = make_named::<f64>(name, seed).map_err(config_err)?;
    inst.claims = inst
        .claims
        .iter()
        .map(|c| c.scale_l(l_scale).scale_m(m_scale))
        .collect();
    let report = verify_constants(&inst, samples, seed).map_err(config_err)?;
    for c in &report.claims {
        println!(
            "{:<4} {}: max ratio {:.6} over {} samples ({} skipped)",
            if c.passed { "ok" } else { "FAIL" },
            c.claim,
            c.max_ratio,
            c.samples,
            c.skipped
        );
    }
    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}

fn cmd_rates(trace: &Path, tail: f64) -> Result<(), Failure> {
    let dir = trace.parent().unwrap_or_else(|| Path::new("."));
    let summary = read_summary(&dir.join("summary.json")).map_err(config_err)?;
    let reference = summary.reference_value.ok_or_else(|| {
        config_err(anyhow!(
            "summary has no reference value; rerun with a reference budget"
        ))
    })?;
    let rows = read_primal_column(trace).map_err(config_err)?;
    let pts: Vec<_> = rows.iter().map(|&(k, p)| (k, p - reference)).collect();
    let fit = fit_rate(&pts, tail, reference).map_err(config_err)?;
    let theory = summary
        .theoretical_exponent
        .map_or_else(|| "n/a".to_string(), |p| p.to_string());
    println!(
        "slope {:.4} (theory {theory}) from {} rows, tail {tail}, {} on {}",
        fit.slope, fit.rows_used, summary.method, summary.instance
    );
    Ok(())
}
