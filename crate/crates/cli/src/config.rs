//! Experiment manifests: one JSON document per run, unknown keys rejected.

use std::path::{Path, PathBuf};

use gaugesymp::diagnostics::{ErrorMetric, Reference};
use gaugesymp::{
    PhaseState, Problem, SabaCoefficients, Scheme, SchemeParams, StopRule, TuneOptions, TuneRegion,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// `pendulum` or `oscillator`.
    pub problem: String,
    /// Pendulum coupling.
    pub epsilon: Option<f64>,
    /// Oscillator frequency.
    pub omega: Option<f64>,
    pub initial: Vec<InitialCondition>,
    pub schemes: Vec<SchemeSpec>,
    /// Step sizes; `integrate` and `compare` run every entry.
    pub h: Vec<f64>,
    pub steps: usize,
    pub stop: StopSpec,
    pub tune: TuneSpec,
    pub order: OrderSpec,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: "pendulum".into(),
            epsilon: None,
            omega: None,
            initial: Vec::new(),
            schemes: vec![SchemeSpec::Named("midpoint".into())],
            h: Vec::new(),
            steps: 1000,
            stop: StopSpec::default(),
            tune: TuneSpec::default(),
            order: OrderSpec::default(),
            out: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialCondition {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

/// A scheme by name, a rotation member, raw `(alpha, beta, gamma)` vectors,
/// or the step-scaled gauge `(alpha, h b, h c)`. Length-1 vectors are
/// broadcast to every degree of freedom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SchemeSpec {
    Named(String),
    Rotation(RotationSpec),
    Raw(RawSpec),
    Scaled(ScaledSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationSpec {
    pub rotation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSpec {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaledSpec {
    pub alpha: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

pub const SCHEME_NAMES: [&str; 5] = ["euler_a", "euler_b", "midpoint", "saba2", "saba2_lr"];

/// Corrector stopping: `kappa` fixed sweeps, or residual `tol` with `max_iter`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StopSpec {
    pub kappa: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TuneSpec {
    /// Explicit search intervals; when absent the square `[-r h, r h]^2`
    /// with `r = relative` is searched.
    pub beta: Option<(f64, f64)>,
    pub gamma: Option<(f64, f64)>,
    pub relative: f64,
    /// Steps per objective evaluation; defaults to the top-level `steps`.
    pub steps: Option<usize>,
    pub grid: usize,
    pub budget: usize,
    pub simplex_tol: f64,
}

impl Default for TuneSpec {
    fn default() -> Self {
        let opts = TuneOptions::default();
        Self {
            beta: None,
            gamma: None,
            relative: 0.2,
            steps: None,
            grid: opts.grid,
            budget: opts.budget,
            simplex_tol: opts.simplex_tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricSpec {
    #[default]
    State,
    Energy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrderSpec {
    pub t_final: f64,
    pub metric: MetricSpec,
    /// Reference step is `min(h) / reference_divisor`.
    pub reference_divisor: f64,
    pub reference_tol: f64,
}

impl Default for OrderSpec {
    fn default() -> Self {
        Self {
            t_final: 10.0,
            metric: MetricSpec::State,
            reference_divisor: 1000.0,
            reference_tol: 1e-15,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn resolve_problem(&self) -> Result<Problem, CliError> {
        let param = match (self.problem.as_str(), self.epsilon, self.omega) {
            ("pendulum", eps, None) => eps,
            ("oscillator", None, omega) => omega,
            ("pendulum", _, Some(_)) => {
                return Err(CliError::Usage(
                    "'omega' applies to the oscillator only".into(),
                ))
            }
            ("oscillator", Some(_), _) => {
                return Err(CliError::Usage(
                    "'epsilon' applies to the pendulum only".into(),
                ))
            }
            _ => None,
        };
        Problem::by_name(&self.problem, param).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn initial_states(&self, n: usize) -> Result<Vec<PhaseState>, CliError> {
        if self.initial.is_empty() {
            return Err(CliError::Usage(
                "no initial condition given (use --q0/--p0 or 'initial')".into(),
            ));
        }
        self.initial
            .iter()
            .map(|ic| {
                let z = PhaseState::new(ic.q.clone(), ic.p.clone())
                    .map_err(|e| CliError::Usage(format!("initial condition: {e}")))?;
                if z.dim() != n {
                    return Err(CliError::Usage(format!(
                        "initial condition has {} degrees of freedom, problem has {n}",
                        z.dim()
                    )));
                }
                Ok(z)
            })
            .collect()
    }

    pub fn stop_rule(&self) -> Result<StopRule, CliError> {
        let rule = match (self.stop.kappa, self.stop.tol) {
            (Some(_), Some(_)) => {
                return Err(CliError::Usage(
                    "give either 'kappa' or 'tol', not both".into(),
                ))
            }
            (Some(kappa), None) => {
                if self.stop.max_iter.is_some() {
                    return Err(CliError::Usage("'max_iter' only applies with 'tol'".into()));
                }
                StopRule::FixedIterations(kappa)
            }
            (None, tol) => {
                let StopRule::ResidualTolerance {
                    tol: d_tol,
                    max_iter: d_max,
                } = StopRule::default()
                else {
                    unreachable!("default stop rule is tolerance based")
                };
                StopRule::ResidualTolerance {
                    tol: tol.unwrap_or(d_tol),
                    max_iter: self.stop.max_iter.unwrap_or(d_max),
                }
            }
        };
        rule.validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(rule)
    }

    /// Step sizes, each finite and nonzero; at least `min` of them.
    pub fn step_sizes(&self, min: usize) -> Result<Vec<f64>, CliError> {
        if self.h.len() < min {
            return Err(CliError::Usage(format!(
                "need at least {min} step size(s) in 'h', got {}",
                self.h.len()
            )));
        }
        if let Some(bad) = self.h.iter().find(|h| !h.is_finite() || **h == 0.0) {
            return Err(CliError::Usage(format!(
                "step size {bad} must be finite and nonzero"
            )));
        }
        Ok(self.h.clone())
    }

    pub fn resolve_schemes(&self, n: usize) -> Result<Vec<Scheme>, CliError> {
        if self.schemes.is_empty() {
            return Err(CliError::Usage("no scheme given".into()));
        }
        self.schemes.iter().map(|s| s.resolve(n)).collect()
    }

    pub fn tune_region(&self, h: f64) -> Result<TuneRegion, CliError> {
        let spec = &self.tune;
        let half = spec.relative * h.abs();
        let region = match (spec.beta, spec.gamma) {
            (None, None) => TuneRegion::square(half),
            (beta, gamma) => TuneRegion::new(
                beta.unwrap_or((-half, half)),
                gamma.unwrap_or((-half, half)),
            ),
        };
        region.map_err(|e| CliError::Usage(format!("tuning region: {e}")))
    }

    pub fn tune_options(&self) -> Result<TuneOptions, CliError> {
        Ok(TuneOptions {
            grid: self.tune.grid,
            budget: self.tune.budget,
            simplex_tol: self.tune.simplex_tol,
            stop: self.stop_rule()?,
        })
    }

    pub fn order_metric(&self) -> ErrorMetric {
        match self.order.metric {
            MetricSpec::State => ErrorMetric::State,
            MetricSpec::Energy => ErrorMetric::Energy,
        }
    }

    pub fn order_reference(&self) -> Reference {
        Reference::FineMidpoint {
            divisor: self.order.reference_divisor,
            tol: self.order.reference_tol,
        }
    }
}

fn broadcast(name: &str, v: &[f64], n: usize) -> Result<Vec<f64>, CliError> {
    match v.len() {
        1 => Ok(vec![v[0]; n]),
        len if len == n => Ok(v.to_vec()),
        len => Err(CliError::Usage(format!(
            "'{name}' has {len} entries, expected 1 or {n}"
        ))),
    }
}

impl SchemeSpec {
    pub fn resolve(&self, n: usize) -> Result<Scheme, CliError> {
        let usage = |e: gaugesymp::Error| CliError::Usage(format!("scheme: {e}"));
        match self {
            SchemeSpec::Named(name) => match name.as_str() {
                "euler_a" => Ok(Scheme::euler_a(n)),
                "euler_b" => Ok(Scheme::euler_b(n)),
                "midpoint" => Ok(Scheme::midpoint(n)),
                "saba2" => Ok(Scheme::saba2()),
                "saba2_lr" => Ok(Scheme::Saba2(SabaCoefficients::laskar_robutel())),
                other => Err(CliError::Usage(format!(
                    "unknown scheme '{other}' (expected one of {SCHEME_NAMES:?}, or an object with alpha/beta/gamma)"
                ))),
            },
            SchemeSpec::Rotation(r) => SchemeParams::rotation(n, r.rotation).map(Scheme::Family).map_err(usage),
            SchemeSpec::Raw(r) => SchemeParams::new(
                broadcast("alpha", &r.alpha, n)?,
                broadcast("beta", &r.beta, n)?,
                broadcast("gamma", &r.gamma, n)?,
            )
            .map(Scheme::Family)
            .map_err(usage),
            SchemeSpec::Scaled(s) => {
                let scheme = Scheme::Scaled {
                    alpha: broadcast("alpha", &s.alpha, n)?,
                    b: broadcast("b", &s.b, n)?,
                    c: broadcast("c", &s.c, n)?,
                };
                // validates finiteness
                scheme.params_for(1.0).map_err(usage)?;
                Ok(scheme)
            }
        }
    }
}
