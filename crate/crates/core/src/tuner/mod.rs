//! Search for the gauge terms `(beta, gamma)` of the symmetric member that
//! minimise the energy error, and the fit of their dependence on `h`.
//!
//! The objective is `max_k |H(z_k) - H(z_0)|` along a trajectory of the
//! member `(1/2, beta, gamma)`. The search evaluates a coarse grid over a box
//! (in parallel) and refines the best cell with Nelder-Mead.

mod simplex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::energy_stats;
use crate::error::{Error, Result};
use crate::integrator::integrate;
use crate::params::{SchemeParams, StepConfig, StopRule};
use crate::state::PhaseState;
use crate::system::HamiltonianSystem;

/// Axis-aligned box in the `(beta, gamma)` plane containing the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuneRegion {
    pub beta: (f64, f64),
    pub gamma: (f64, f64),
}

impl TuneRegion {
    pub fn new(beta: (f64, f64), gamma: (f64, f64)) -> Result<Self> {
        let region = Self { beta, gamma };
        region.validate()?;
        Ok(region)
    }

    /// `[-half, half]^2`
    pub fn square(half: f64) -> Result<Self> {
        Self::new((-half, half), (-half, half))
    }

    pub fn validate(&self) -> Result<()> {
        for (lo, hi) in [self.beta, self.gamma] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidParams(format!(
                    "bad search interval [{lo}, {hi}]"
                )));
            }
            if !(lo <= 0.0 && 0.0 <= hi) {
                return Err(Error::InvalidParams(format!(
                    "search interval [{lo}, {hi}] must contain 0"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuneOptions {
    /// Grid points per axis.
    pub grid: usize,
    /// Maximum objective evaluations, grid included.
    pub budget: usize,
    /// Nelder-Mead stops once the simplex is smaller than this.
    pub simplex_tol: f64,
    pub stop: StopRule,
}

impl Default for TuneOptions {
    fn default() -> Self {
        Self {
            grid: 17,
            budget: 1200,
            simplex_tol: 1e-9,
            stop: StopRule::ResidualTolerance {
                tol: 1e-14,
                max_iter: 50,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub beta: f64,
    pub gamma: f64,
    /// `+inf` when the trajectory failed.
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub h: f64,
    pub beta_star: f64,
    pub gamma_star: f64,
    pub objective: f64,
    pub evaluations: usize,
    /// The simplex had not shrunk below tolerance when the budget ran out.
    pub budget_exhausted: bool,
    pub trace: Vec<TracePoint>,
}

/// Energy objective of the member `(1/2, beta, gamma)` over `steps` steps.
pub fn energy_objective<S: HamiltonianSystem + ?Sized>(
    sys: &S,
    z0: &PhaseState,
    h: f64,
    steps: usize,
    stop: StopRule,
    beta: f64,
    gamma: f64,
) -> Result<f64> {
    let params = SchemeParams::uniform(sys.dim(), 0.5, beta, gamma)?;
    let cfg = StepConfig::new(h, stop)?;
    let traj = integrate(sys, z0, &cfg, &params, steps)?;
    Ok(energy_stats(&traj)?.max_abs_deviation)
}

pub fn tune<S: HamiltonianSystem + ?Sized>(
    sys: &S,
    z0: &PhaseState,
    h: f64,
    steps: usize,
    region: &TuneRegion,
    opts: &TuneOptions,
) -> Result<TuneResult> {
    z0.check_dim(sys.dim())?;
    StepConfig::new(h, opts.stop)?;
    tune_with(
        |beta, gamma| energy_objective(sys, z0, h, steps, opts.stop, beta, gamma).ok(),
        h,
        region,
        opts,
    )
}

/// The search on an arbitrary objective; `None` marks a failed evaluation.
pub fn tune_with<F>(
    objective: F,
    h: f64,
    region: &TuneRegion,
    opts: &TuneOptions,
) -> Result<TuneResult>
where
    F: Fn(f64, f64) -> Option<f64> + Sync,
{
    region.validate()?;
    if opts.grid < 2 {
        return Err(Error::InvalidParams(
            "grid needs at least 2 points per axis".into(),
        ));
    }
    let grid_size = opts.grid * opts.grid;
    if opts.budget < grid_size {
        return Err(Error::InvalidParams(format!(
            "budget {} is smaller than the {grid_size}-point grid",
            opts.budget
        )));
    }

    let axis = |(lo, hi): (f64, f64), k: usize| lo + (hi - lo) * k as f64 / (opts.grid - 1) as f64;
    let points: Vec<(f64, f64)> = (0..opts.grid)
        .flat_map(|i| (0..opts.grid).map(move |j| (i, j)))
        .map(|(i, j)| (axis(region.beta, i), axis(region.gamma, j)))
        .collect();

    let mut trace: Vec<TracePoint> = points
        .par_iter()
        .map(|&(beta, gamma)| TracePoint {
            beta,
            gamma,
            objective: objective(beta, gamma).unwrap_or(f64::INFINITY),
        })
        .collect();

    let start = trace
        .iter()
        .filter(|p| p.objective.is_finite())
        .min_by(|a, b| a.objective.total_cmp(&b.objective))
        .copied()
        .ok_or_else(|| Error::TuningFailed("every grid evaluation failed".into()))?;

    let d_beta = (region.beta.1 - region.beta.0) / (opts.grid - 1) as f64;
    let d_gamma = (region.gamma.1 - region.gamma.0) / (opts.grid - 1) as f64;
    let simplex = [
        [start.beta, start.gamma],
        [start.beta + d_beta, start.gamma],
        [start.beta, start.gamma + d_gamma],
    ];
    let outcome = simplex::minimize(
        |x| {
            let value = objective(x[0], x[1]).unwrap_or(f64::INFINITY);
            trace.push(TracePoint {
                beta: x[0],
                gamma: x[1],
                objective: value,
            });
            value
        },
        simplex,
        opts.simplex_tol,
        opts.budget - grid_size,
    );

    // The optimum reported is the best point ever evaluated.
    let best = trace
        .iter()
        .min_by(|a, b| a.objective.total_cmp(&b.objective))
        .copied()
        .expect("non-empty trace");
    Ok(TuneResult {
        h,
        beta_star: best.beta,
        gamma_star: best.gamma,
        objective: best.objective,
        evaluations: trace.len(),
        budget_exhausted: !outcome.converged,
        trace,
    })
}

/// Through-origin fits `beta* = h b` and `gamma* = h c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub b: f64,
    pub c: f64,
    /// Uncentred `1 - SS_res / sum(beta*^2)`, the usual measure for models without intercept.
    pub r_squared_beta: f64,
    pub r_squared_gamma: f64,
    pub samples: Vec<TuneResult>,
}

impl ScalingFit {
    /// `(h, beta* - h b, gamma* - h c)` per sample.
    pub fn residuals(&self) -> Vec<(f64, f64, f64)> {
        self.samples
            .iter()
            .map(|s| (s.h, s.beta_star - s.h * self.b, s.gamma_star - s.h * self.c))
            .collect()
    }
}

pub fn fit_scaling(results: &[TuneResult]) -> Result<ScalingFit> {
    if results.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "scaling fit needs at least 2 tuned step sizes, got {}",
            results.len()
        )));
    }
    let first = results[0].h;
    if results.iter().all(|r| r.h == first) {
        return Err(Error::InsufficientData(
            "all samples share the same step size".into(),
        ));
    }
    let shh: f64 = results.iter().map(|r| r.h * r.h).sum();
    let fit = |value: fn(&TuneResult) -> f64| {
        let slope = results.iter().map(|r| r.h * value(r)).sum::<f64>() / shh;
        let ss_res: f64 = results
            .iter()
            .map(|r| (value(r) - slope * r.h).powi(2))
            .sum();
        let ss_tot: f64 = results.iter().map(|r| value(r).powi(2)).sum();
        let r2 = if ss_tot == 0.0 {
            1.0
        } else {
            1.0 - ss_res / ss_tot
        };
        (slope, r2)
    };
    let (b, r_squared_beta) = fit(|r| r.beta_star);
    let (c, r_squared_gamma) = fit(|r| r.gamma_star);
    Ok(ScalingFit {
        b,
        c,
        r_squared_beta,
        r_squared_gamma,
        samples: results.to_vec(),
    })
}

/// Which part of a trajectory `cusp_profile` keeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Window {
    /// Samples with `t0 <= t <= t1`.
    Interval(f64, f64),
    /// From `t = 0` to the end of the first full oscillation, detected as the
    /// second sign change of the first momentum.
    FirstPeriod,
}

/// Energy deviation `(t, H(z_t) - H(z_0))` over one window of the trajectory.
pub fn cusp_profile<S: HamiltonianSystem + ?Sized>(
    sys: &S,
    z0: &PhaseState,
    cfg: &StepConfig,
    params: &SchemeParams,
    steps: usize,
    window: Window,
) -> Result<Vec<(f64, f64)>> {
    let traj = integrate(sys, z0, cfg, params, steps)?;
    let deviation = traj.energy_deviation();
    let rows = traj.times.iter().copied().zip(deviation);
    let profile: Vec<(f64, f64)> = match window {
        Window::Interval(t0, t1) => rows.filter(|&(t, _)| t0 <= t && t <= t1).collect(),
        Window::FirstPeriod => {
            let mut last_sign = 0.0_f64;
            let mut changes = 0;
            let mut end = None;
            for (k, z) in traj.states.iter().enumerate() {
                let p = z.p()[0];
                if p == 0.0 {
                    continue;
                }
                let sign = p.signum();
                if last_sign != 0.0 && sign != last_sign {
                    changes += 1;
                    if changes == 2 {
                        end = Some(k);
                        break;
                    }
                }
                last_sign = sign;
            }
            match end {
                Some(k) => rows.take(k + 1).collect(),
                None => Vec::new(),
            }
        }
    };
    if profile.is_empty() {
        return Err(Error::InsufficientData(
            "profile window contains no samples".into(),
        ));
    }
    Ok(profile)
}
