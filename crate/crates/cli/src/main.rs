//! `gaugesymp` command-line front end.
//!
//! Every subcommand reads an optional JSON experiment manifest (`--config`)
//! and applies flag overrides on top. Exit codes: 0 success, 1 runtime
//! failure, 2 usage or configuration error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{ExperimentConfig, InitialCondition, MetricSpec, RawSpec, SchemeSpec};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

#[derive(Parser)]
#[command(
    name = "gaugesymp",
    version,
    about = "Gauge-parameterised implicit symplectic integrators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one trajectory CSV per (initial condition, scheme, step size).
    Integrate(Overrides),
    /// Energy-error statistics for several schemes on the same problem.
    Compare(Overrides),
    /// Tune (beta, gamma) per step size and fit the linear scaling law.
    Tune(Overrides),
    /// Estimate convergence order from a list of step sizes.
    Order(Overrides),
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    State,
    Energy,
}

#[derive(Args, Default)]
struct Overrides {
    /// JSON experiment manifest.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `pendulum` or `oscillator`.
    #[arg(long)]
    problem: Option<String>,
    /// Pendulum coupling epsilon.
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<f64>,
    /// Initial positions, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    q0: Option<Vec<f64>>,
    /// Initial momenta, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    p0: Option<Vec<f64>>,
    /// Step sizes, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    h: Option<Vec<f64>>,
    #[arg(long)]
    steps: Option<usize>,
    /// Named schemes, comma separated: euler_a, euler_b, midpoint, saba2, saba2_lr.
    #[arg(long, value_delimiter = ',')]
    scheme: Option<Vec<String>>,
    /// Raw family member; one value or one per degree of freedom.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    alpha: Option<Vec<f64>>,
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        requires = "alpha"
    )]
    beta: Option<Vec<f64>>,
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        requires = "alpha"
    )]
    gamma: Option<Vec<f64>>,
    /// Fixed number of corrector sweeps.
    #[arg(long, conflicts_with = "tol")]
    kappa: Option<usize>,
    /// Corrector residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Error measure for `order`.
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
    /// Final time for `order`.
    #[arg(long)]
    t_final: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Overrides {
    fn resolve(self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(problem) = self.problem {
            cfg.problem = problem;
        }
        if let Some(eps) = self.eps {
            cfg.epsilon = Some(eps);
        }
        match (self.q0, self.p0) {
            (Some(q), Some(p)) => cfg.initial = vec![InitialCondition { q, p }],
            (None, None) => {}
            _ => {
                return Err(CliError::Usage(
                    "--q0 and --p0 must be given together".into(),
                ))
            }
        }
        if let Some(h) = self.h {
            cfg.h = h;
        }
        if let Some(steps) = self.steps {
            cfg.steps = steps;
        }
        if self.scheme.is_some() || self.alpha.is_some() {
            let mut schemes: Vec<SchemeSpec> = self
                .scheme
                .unwrap_or_default()
                .into_iter()
                .map(SchemeSpec::Named)
                .collect();
            if let Some(alpha) = self.alpha {
                schemes.push(SchemeSpec::Raw(RawSpec {
                    alpha,
                    beta: self.beta.unwrap_or_else(|| vec![0.0]),
                    gamma: self.gamma.unwrap_or_else(|| vec![0.0]),
                }));
            }
            cfg.schemes = schemes;
        }
        if let Some(kappa) = self.kappa {
            cfg.stop.kappa = Some(kappa);
            cfg.stop.tol = None;
            cfg.stop.max_iter = None;
        }
        if let Some(tol) = self.tol {
            cfg.stop.tol = Some(tol);
            cfg.stop.kappa = None;
        }
        if let Some(metric) = self.metric {
            cfg.order.metric = match metric {
                MetricArg::State => MetricSpec::State,
                MetricArg::Energy => MetricSpec::Energy,
            };
        }
        if let Some(t) = self.t_final {
            cfg.order.t_final = t;
        }
        if let Some(out) = self.out {
            cfg.out = out;
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Integrate(o) => commands::integrate(&o.resolve()?),
        Command::Compare(o) => commands::compare(&o.resolve()?),
        Command::Tune(o) => commands::tune_cmd(&o.resolve()?),
        Command::Order(o) => commands::order(&o.resolve()?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Usage(_) => 2,
                CliError::Runtime(_) => 1,
            })
        }
    }
}
