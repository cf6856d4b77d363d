//! Energy statistics, convergence order and symplecticity defect.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{SchemeParams, StepConfig, StopRule};
use crate::scheme::Scheme;
use crate::state::PhaseState;
use crate::system::HamiltonianSystem;
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyErrorStats {
    /// `max_k |H(z_k) - H(z_0)|`
    pub max_abs_deviation: f64,
    /// Least-squares slope of `H` against `t`.
    pub drift_slope: f64,
    /// `max_k H(z_k) - min_k H(z_k)`
    pub amplitude: f64,
}

pub fn energy_stats(traj: &Trajectory) -> Result<EnergyErrorStats> {
    let h0 = *traj.energies.first().ok_or(Error::EmptyTrajectory)?;
    let mut max_abs_deviation = 0.0_f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &e in &traj.energies {
        max_abs_deviation = max_abs_deviation.max((e - h0).abs());
        lo = lo.min(e);
        hi = hi.max(e);
    }
    let deviations = traj.energy_deviation();
    let drift_slope = linear_fit(&traj.times, &deviations).map_or(0.0, |fit| fit.slope);
    Ok(EnergyErrorStats {
        max_abs_deviation,
        drift_slope,
        amplitude: hi - lo,
    })
}

/// Ordinary least squares `y = slope x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// `None` with fewer than two points or no spread in `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = x[..n].iter().sum::<f64>() / nf;
    let my = y[..n].iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        let (dx, dy) = (xi - mx, yi - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Some(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// What is compared at the final time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ErrorMetric {
    /// `|z_num(T) - z_ref(T)|_inf`
    #[default]
    State,
    /// `|H(z_num(T)) - H(z_0)|`; the reference is not used.
    Energy,
}

/// Ground truth at the final time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Reference {
    /// Known state at `T`.
    Exact(PhaseState),
    /// Midpoint rule at `min(h) / divisor`, corrector tolerance `tol`.
    FineMidpoint { divisor: f64, tol: f64 },
}

impl Default for Reference {
    fn default() -> Self {
        Reference::FineMidpoint {
            divisor: 1000.0,
            tol: 1e-15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderOptions {
    pub t_final: f64,
    pub reference: Reference,
    pub stop: StopRule,
    pub metric: ErrorMetric,
}

impl OrderOptions {
    pub fn new(t_final: f64) -> Self {
        Self {
            t_final,
            reference: Reference::default(),
            stop: StopRule::ResidualTolerance {
                tol: 1e-14,
                max_iter: 100,
            },
            metric: ErrorMetric::State,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderEstimate {
    /// Effective step sizes `T / round(T / h)`, strictly decreasing.
    pub stepsizes: Vec<f64>,
    pub global_errors: Vec<f64>,
    /// Fitted exponent of `error ~ h^slope`.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

fn steps_for(t_final: f64, h: f64) -> usize {
    ((t_final / h).round() as usize).max(1)
}

/// Global error at `opts.t_final` for each step size and the log-log slope.
pub fn estimate_order<S: HamiltonianSystem + ?Sized>(
    sys: &S,
    z0: &PhaseState,
    scheme: &Scheme,
    stepsizes: &[f64],
    opts: &OrderOptions,
) -> Result<OrderEstimate> {
    let t_final = opts.t_final;
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "final time {t_final} must be positive"
        )));
    }
    scheme.check_dim(sys.dim())?;
    if stepsizes.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
        return Err(Error::InvalidParams("step sizes must be positive".into()));
    }
    let mut grid: Vec<(usize, f64)> = stepsizes
        .iter()
        .map(|&h| {
            let n = steps_for(t_final, h);
            (n, t_final / n as f64)
        })
        .collect();
    grid.sort_by_key(|&(n, _)| n);
    grid.dedup_by_key(|&mut (n, _)| n);
    if grid.len() < 2 {
        return Err(Error::InsufficientData(
            "order estimation needs at least two distinct step sizes".into(),
        ));
    }

    let reference = match (&opts.metric, &opts.reference) {
        (ErrorMetric::Energy, _) => None,
        (ErrorMetric::State, Reference::Exact(z)) => Some(z.clone()),
        (ErrorMetric::State, Reference::FineMidpoint { divisor, tol }) => {
            let h_min = grid.last().map(|&(_, h)| h).expect("non-empty grid");
            let n = steps_for(t_final, h_min / divisor);
            let cfg = StepConfig::tolerance(t_final / n as f64, *tol, 200)?;
            Some(final_state(
                sys,
                z0,
                &Scheme::Family(SchemeParams::midpoint(sys.dim())),
                &cfg,
                n,
            )?)
        }
    };
    let h0 = sys.energy(z0);

    let errors: Vec<Result<f64>> = grid
        .par_iter()
        .map(|&(n, h)| {
            let cfg = StepConfig::new(h, opts.stop)?;
            let z_t = final_state(sys, z0, scheme, &cfg, n)?;
            Ok(match &reference {
                Some(z_ref) => z_t.distance_inf(z_ref),
                None => (sys.energy(&z_t) - h0).abs(),
            })
        })
        .collect();

    let mut hs = Vec::with_capacity(grid.len());
    let mut errs = Vec::with_capacity(grid.len());
    for (&(_, h), err) in grid.iter().zip(errors) {
        let err = err?;
        if err > 0.0 && err.is_finite() {
            hs.push(h);
            errs.push(err);
        }
    }
    let log_h: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let log_e: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let fit = linear_fit(&log_h, &log_e)
        .ok_or_else(|| Error::InsufficientData("fewer than two positive errors".into()))?;
    Ok(OrderEstimate {
        stepsizes: hs,
        global_errors: errs,
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
    })
}

/// Steps without storing the trajectory.
fn final_state<S: HamiltonianSystem + ?Sized>(
    sys: &S,
    z0: &PhaseState,
    scheme: &Scheme,
    cfg: &StepConfig,
    steps: usize,
) -> Result<PhaseState> {
    let mut z = z0.clone();
    for k in 1..=steps {
        z = scheme
            .step(sys, &z, cfg)
            .map_err(|e| Error::StepFailed {
                step: k,
                source: Box::new(e),
            })?
            .0;
    }
    Ok(z)
}

/// Central-difference Jacobian of `map` at `z` with probe `delta`.
pub fn map_jacobian<F>(z: &PhaseState, delta: f64, map: F) -> Result<DMatrix<f64>>
where
    F: Fn(&PhaseState) -> Result<PhaseState>,
{
    let base = z.to_stacked();
    let m = base.len();
    let mut jac = DMatrix::zeros(m, m);
    for j in 0..m {
        let mut plus = base.clone();
        let mut minus = base.clone();
        plus[j] += delta;
        minus[j] -= delta;
        let fp = map(&PhaseState::from_stacked(&plus)?)?.to_stacked();
        let fm = map(&PhaseState::from_stacked(&minus)?)?.to_stacked();
        for i in 0..m {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * delta);
        }
    }
    Ok(jac)
}

/// Canonical structure matrix `[[0, I], [-I, 0]]` of size `2n`.
pub fn canonical_j(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if j == i + n {
            1.0
        } else if i == j + n {
            -1.0
        } else {
            0.0
        }
    })
}

/// `|M^T J M - J|_inf` taken entrywise.
pub fn symplectic_defect(m: &DMatrix<f64>) -> f64 {
    let j = canonical_j(m.nrows() / 2);
    (m.transpose() * &j * m - j).amax()
}

pub fn symplecticity_residual<S: HamiltonianSystem + ?Sized>(
    sys: &S,
    z: &PhaseState,
    scheme: &Scheme,
    cfg: &StepConfig,
    delta: f64,
) -> Result<f64> {
    let jac = map_jacobian(z, delta, |x| scheme.step(sys, x, cfg).map(|(next, _)| next))?;
    Ok(symplectic_defect(&jac))
}
