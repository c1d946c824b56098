//! `quasimode-lab`: eigenpair and residual checks, exponent tables, radius
//! sweeps and the full blow-up experiment.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use quasimode_core::sweep::{threads_from_env, THREADS_ENV};
use quasimode_core::LabError;

use commands::*;
use config::RunConfig;

#[derive(Parser)]
#[command(name = "quasimode-lab", version, about = "Quasimode scaling experiments for Schrödinger operators with homogeneous potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground state of the transverse oscillator and its finite-difference residual.
    EigenCheck(Overrides),
    /// Finite-difference residual of the truncated quasimode at one radius.
    PdeResidual(Overrides),
    /// Exponents of a configuration.
    Exponents {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        json: bool,
    },
    /// Norms over the radius grid, written as CSV.
    Sweep(Overrides),
    /// Slope fits, upper-bound audit and blow-up summary of a sweep CSV.
    Fit {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Certificate, sweep, fits and audit in one run.
    Counterexample(Overrides),
}

/// Flags override the values read from `--config`.
#[derive(Args, Debug, Default)]
struct Overrides {
    /// JSON config, or a report containing a `config` object.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    base: Option<f64>,
    #[arg(long)]
    min_exp: Option<i32>,
    #[arg(long)]
    max_exp: Option<i32>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    z_panels: Option<usize>,
    #[arg(long)]
    u_panels: Option<usize>,
    #[arg(long)]
    t_nodes: Option<usize>,
    /// Radius of the residual certificate.
    #[arg(long = "R")]
    radius: Option<f64>,
    /// Finite-difference steps of the residual certificate; repeat the flag.
    #[arg(long = "fd-step")]
    fd_steps: Vec<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    fit_tol: Option<f64>,
    #[arg(long)]
    target: Option<f64>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

impl Overrides {
    fn apply(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag.clone() { c.$($field).+ = v; })*
            };
        }
        set!(n => n, sigma => sigma, p => p, profile => profile, base => grid.base, min_exp => grid.min_exp,
            max_exp => grid.max_exp, rel_tol => quadrature.rel_tol, z_panels => quadrature.z_panels,
            u_panels => quadrature.u_panels, t_nodes => quadrature.t_nodes, radius => residual.radius,
            samples => residual.samples, fit_tol => fit_tol, target => target);
        if self.gamma.is_some() {
            c.gamma = self.gamma;
        }
        if self.alpha.is_some() {
            c.alpha = self.alpha;
        }
        if !self.fd_steps.is_empty() {
            c.residual.fd_steps = self.fd_steps.clone();
        }
        if self.csv.is_some() {
            c.output.csv = self.csv.clone();
        }
        if self.report.is_some() {
            c.output.report = self.report.clone();
        }
        Ok(c)
    }
}

fn numerical_exit(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<LabError>() {
        Some(LabError::NonconvergedQuadrature { .. }) => EXIT_QUADRATURE,
        Some(LabError::BoundViolated(_)) => EXIT_AUDIT,
        _ => EXIT_CHECK_FAILED,
    }
}

fn configure_threads() -> Result<()> {
    if let Some(k) = threads_from_env()? {
        if rayon::ThreadPoolBuilder::new().num_threads(k).build_global().is_err() {
            bail!("could not start a pool of {k} threads ({THREADS_ENV})");
        }
    }
    Ok(())
}

fn run(cli: Cli) -> i32 {
    let overrides = match &cli.command {
        Command::EigenCheck(o) | Command::PdeResidual(o) | Command::Sweep(o) | Command::Counterexample(o) => o,
        Command::Exponents { overrides, .. } | Command::Fit { overrides, .. } => overrides,
    };
    let resolved = overrides.apply().and_then(|c| Ok(c.resolve()?)).and_then(|r| {
        configure_threads()?;
        Ok(r)
    });
    let (cfg, plan) = match resolved {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_INVALID;
        }
    };
    let outcome = match &cli.command {
        Command::EigenCheck(_) => eigen_check(&cfg),
        Command::PdeResidual(_) => pde_residual(&cfg, &plan),
        Command::Exponents { json, .. } => exponents(&plan, *json),
        Command::Sweep(_) => sweep(&cfg, &plan),
        Command::Fit { input, .. } => match input.clone().or_else(|| cfg.output.csv.clone()) {
            Some(path) => fit(&cfg, &plan, &path),
            None => {
                eprintln!("error: fit needs --input or a csv path in the config");
                return EXIT_INVALID;
            }
        },
        Command::Counterexample(_) => counterexample(&cfg, &plan),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            numerical_exit(&e)
        }
    }
}

fn main() -> ExitCode {
    let code = run(Cli::parse());
    ExitCode::from(code as u8)
}
