//! The implicit one-step family and its fixed-point corrector.
//!
//! One step solves `Z = z + h J grad H(zbar)` where the evaluation point
//! `zbar` is a linear projection of the pair `(z, Z)`:
//!
//! ```text
//! Qbar_i = alpha_i Q_i + (1 - alpha_i) q_i + gamma_i (p_i - P_i)
//! Pbar_i = alpha_i p_i + (1 - alpha_i) P_i + beta_i  (q_i - Q_i)
//! ```
//!
//! The solve is a predictor-corrector sweep: the explicit Euler point
//! `z + h J grad H(z)` seeds repeated substitution into the right-hand side.
//! `J` is the canonical matrix with `J grad H = (dH/dp, -dH/dq)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{SchemeParams, StepConfig, StopRule};
use crate::state::PhaseState;
use crate::system::HamiltonianSystem;
use crate::trajectory::Trajectory;

/// Divergence guard: a growing residual above this multiple of `|z|_inf`
/// aborts the solve.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

/// Outcome of one corrector solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    /// Corrector sweeps performed after the predictor.
    pub iterations: usize,
    /// `|Z^(j+1) - Z^(j)|_inf` of the last sweep.
    pub residual: f64,
}

/// Diagonal blocks of the gauge matrix `A = diag(gamma I, -beta I)` used by
/// the difference-quotient form of the symmetric members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeMatrix {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
}

impl GaugeMatrix {
    pub fn new(gamma: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if gamma.len() != beta.len() {
            return Err(Error::DimensionMismatch {
                expected: gamma.len(),
                found: beta.len(),
            });
        }
        if !gamma.iter().chain(&beta).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("gauge matrix"));
        }
        Ok(Self { gamma, beta })
    }

    pub fn dim(&self) -> usize {
        self.gamma.len()
    }

    /// The equivalent family member `(1/2, beta, gamma)`.
    pub fn to_params(&self) -> SchemeParams {
        SchemeParams::new(vec![0.5; self.dim()], self.beta.clone(), self.gamma.clone())
            .expect("validated gauge blocks")
    }
}

/// Evaluation point `zbar` for the pair `(z, Z)`.
pub fn project_midstate(
    z: &PhaseState,
    big_z: &PhaseState,
    params: &SchemeParams,
) -> Result<PhaseState> {
    let n = z.dim();
    big_z.check_dim(n)?;
    params.check_dim(n)?;
    z.check_finite("source state")?;
    big_z.check_finite("target state")?;
    let mut out = PhaseState::zeros(n);
    project_into(z, big_z, params, &mut out);
    Ok(out)
}

fn project_into(z: &PhaseState, big_z: &PhaseState, params: &SchemeParams, out: &mut PhaseState) {
    let (q, p) = (z.q(), z.p());
    let (bq, bp) = (big_z.q(), big_z.p());
    let (alpha, beta, gamma) = (params.alpha(), params.beta(), params.gamma());
    for i in 0..q.len() {
        let a = alpha[i];
        out.q_mut()[i] = a * bq[i] + (1.0 - a) * q[i] + gamma[i] * (p[i] - bp[i]);
        out.p_mut()[i] = a * p[i] + (1.0 - a) * bp[i] + beta[i] * (q[i] - bq[i]);
    }
}

/// `out = z + h J grad`, i.e. `Q = q + h dH/dp`, `P = p - h dH/dq`.
fn apply_field(z: &PhaseState, h: f64, grad: &[f64], out: &mut PhaseState) {
    let n = z.dim();
    for i in 0..n {
        out.q_mut()[i] = z.q()[i] + h * grad[n + i];
        out.p_mut()[i] = z.p()[i] - h * grad[i];
    }
}

fn check_inputs<S: HamiltonianSystem + ?Sized>(
    sys: &S,
    z: &PhaseState,
    cfg: &StepConfig,
) -> Result<()> {
    z.check_dim(sys.dim())?;
    z.check_finite("initial state")?;
    cfg.validate()
}

/// Predictor-corrector loop shared by both parameterisations. `midstate`
/// fills the evaluation point from `(z, Z^(j))`.
fn solve<S, F>(
    sys: &S,
    z: &PhaseState,
    cfg: &StepConfig,
    mut midstate: F,
) -> Result<(PhaseState, StepReport)>
where
    S: HamiltonianSystem + ?Sized,
    F: FnMut(&PhaseState, &PhaseState, &mut PhaseState),
{
    let n = z.dim();
    let h = cfg.h;
    let mut grad = vec![0.0; 2 * n];
    let mut current = PhaseState::zeros(n);
    let mut next = PhaseState::zeros(n);
    let mut zbar = PhaseState::zeros(n);

    sys.gradient_into(z, &mut grad);
    apply_field(z, h, &grad, &mut current);

    let (sweeps, tol) = match cfg.stop {
        StopRule::FixedIterations(kappa) => (kappa, None),
        StopRule::ResidualTolerance { tol, max_iter } => (max_iter, Some(tol)),
    };
    let guard = DIVERGENCE_FACTOR * z.norm_inf().max(1.0);
    let mut residual = f64::INFINITY;
    let mut previous = f64::INFINITY;

    for iteration in 1..=sweeps {
        midstate(z, &current, &mut zbar);
        sys.gradient_into(&zbar, &mut grad);
        apply_field(z, h, &grad, &mut next);
        residual = next.distance_inf(&current);
        std::mem::swap(&mut current, &mut next);

        if !residual.is_finite()
            || !current.is_finite()
            || (residual > previous && residual > guard)
        {
            return Err(Error::Divergence {
                residual,
                iterations: iteration,
            });
        }
        previous = residual;

        if let Some(tol) = tol {
            // Below a few ulps of |Z| the sweep can only cycle on rounding.
            let floor = 4.0 * f64::EPSILON * current.norm_inf();
            if residual <= tol.max(floor) {
                return Ok((
                    current,
                    StepReport {
                        iterations: iteration,
                        residual,
                    },
                ));
            }
        }
    }

    match tol {
        Some(_) => Err(Error::NonConvergence {
            residual,
            iterations: sweeps,
        }),
        None => Ok((
            current,
            StepReport {
                iterations: sweeps,
                residual,
            },
        )),
    }
}

/// One step of the family member `params` from `z`.
pub fn implicit_step<S: HamiltonianSystem + ?Sized>(
    sys: &S,
    z: &PhaseState,
    cfg: &StepConfig,
    params: &SchemeParams,
) -> Result<(PhaseState, StepReport)> {
    check_inputs(sys, z, cfg)?;
    params.check_dim(sys.dim())?;
    solve(sys, z, cfg, |z, big_z, out| {
        project_into(z, big_z, params, out)
    })
}

/// One step of the symmetric member written with the gauge matrix,
/// `(Z - z)/h = J grad H((Z + z)/2 + h A (-J (Z - z)/h))`.
///
/// With `A = diag(gamma I, -beta I)` this reproduces
/// `implicit_step` with `(1/2, beta, gamma)`.
pub fn step_amatrix<S: HamiltonianSystem + ?Sized>(
    sys: &S,
    z: &PhaseState,
    cfg: &StepConfig,
    gauge: &GaugeMatrix,
) -> Result<PhaseState> {
    check_inputs(sys, z, cfg)?;
    if gauge.dim() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            found: gauge.dim(),
        });
    }
    let h = cfg.h;
    if h == 0.0 {
        return Ok(z.clone());
    }
    let n = z.dim();
    let (state, _) = solve(sys, z, cfg, |z, big_z, out| {
        for i in 0..n {
            // -J (Z - z)/h = (-(P - p)/h, (Q - q)/h)
            let vq = -(big_z.p()[i] - z.p()[i]) / h;
            let vp = (big_z.q()[i] - z.q()[i]) / h;
            out.q_mut()[i] = 0.5 * (big_z.q()[i] + z.q()[i]) + h * (gauge.gamma[i] * vq);
            out.p_mut()[i] = 0.5 * (big_z.p()[i] + z.p()[i]) + h * (-gauge.beta[i] * vp);
        }
    })?;
    Ok(state)
}

/// `steps` applications of `implicit_step`, recording energy and residuals.
pub fn integrate<S: HamiltonianSystem + ?Sized>(
    sys: &S,
    z0: &PhaseState,
    cfg: &StepConfig,
    params: &SchemeParams,
    steps: usize,
) -> Result<Trajectory> {
    check_inputs(sys, z0, cfg)?;
    params.check_dim(sys.dim())?;
    integrate_with(sys, z0, cfg.h, steps, |z| {
        implicit_step(sys, z, cfg, params)
    })
}

/// Generic stepping loop; `step` returns the next state with its report.
pub(crate) fn integrate_with<S, F>(
    sys: &S,
    z0: &PhaseState,
    h: f64,
    steps: usize,
    mut step: F,
) -> Result<Trajectory>
where
    S: HamiltonianSystem + ?Sized,
    F: FnMut(&PhaseState) -> Result<(PhaseState, StepReport)>,
{
    let mut traj = Trajectory::with_capacity(z0.clone(), sys.energy(z0), steps);
    let mut z = z0.clone();
    for k in 1..=steps {
        let (next, report) = step(&z).map_err(|e| Error::StepFailed {
            step: k,
            source: Box::new(e),
        })?;
        traj.push(
            k as f64 * h,
            next.clone(),
            sys.energy(&next),
            report.residual,
            report.iterations,
        );
        z = next;
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{HarmonicOscillator, Pendulum};
    use approx::assert_abs_diff_eq;

    fn tight(h: f64) -> StepConfig {
        StepConfig::tolerance(h, 1e-14, 100).unwrap()
    }

    #[test]
    fn projection_midpoint_is_mean() {
        let z = PhaseState::scalar(0.3, -1.2).unwrap();
        let big = PhaseState::scalar(0.5, 0.4).unwrap();
        let bar = project_midstate(&z, &big, &SchemeParams::midpoint(1)).unwrap();
        assert_eq!(bar.q()[0], 0.4);
        assert_eq!(bar.p()[0], (-1.2 + 0.4) / 2.0);
    }

    #[test]
    fn projection_euler_a_picks_q_and_big_p() {
        let z = PhaseState::scalar(0.3, -1.2).unwrap();
        let big = PhaseState::scalar(0.5, 0.4).unwrap();
        let bar = project_midstate(&z, &big, &SchemeParams::euler_a(1)).unwrap();
        assert_eq!(bar, PhaseState::scalar(0.3, 0.4).unwrap());
    }

    #[test]
    fn projection_with_gauge_terms() {
        // Qbar = 0.5*0.79978 + 0.5*0.8 + 0.1*(0 + 0.00215)
        // Pbar = 0.5*0 + 0.5*(-0.00215) + 0.1*(0.8 - 0.79978)
        let z = PhaseState::scalar(0.8, 0.0).unwrap();
        let big = PhaseState::scalar(0.79978, -0.00215).unwrap();
        let params = SchemeParams::uniform(1, 0.5, 0.1, 0.1).unwrap();
        let bar = project_midstate(&z, &big, &params).unwrap();
        assert_abs_diff_eq!(bar.q()[0], 0.800105, epsilon = 1e-15);
        assert_abs_diff_eq!(bar.p()[0], -0.001053, epsilon = 1e-15);
    }

    #[test]
    fn projection_errors() {
        let z = PhaseState::scalar(0.0, 0.0).unwrap();
        let big = PhaseState::new(vec![0.0, 0.0], vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            project_midstate(&z, &big, &SchemeParams::midpoint(1)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(project_midstate(&z, &z, &SchemeParams::midpoint(2)).is_err());
    }

    #[test]
    fn zero_step_is_identity() {
        let sys = Pendulum::default();
        let z = PhaseState::scalar(1.3, -0.4).unwrap();
        for params in [
            SchemeParams::euler_a(1),
            SchemeParams::midpoint(1),
            SchemeParams::uniform(1, 0.3, 0.2, -0.1).unwrap(),
        ] {
            let (big, report) = implicit_step(&sys, &z, &tight(0.0), &params).unwrap();
            assert_eq!(big, z);
            assert_eq!(report.residual, 0.0);
        }
        let gauge = GaugeMatrix::new(vec![0.1], vec![0.2]).unwrap();
        assert_eq!(step_amatrix(&sys, &z, &tight(0.0), &gauge).unwrap(), z);
    }

    #[test]
    fn euler_a_pendulum_step() {
        let sys = Pendulum::new(0.03);
        let z = PhaseState::scalar(0.8, 0.0).unwrap();
        let (big, _) = implicit_step(&sys, &z, &tight(0.1), &SchemeParams::euler_a(1)).unwrap();
        let p_new = 0.0 - 0.1 * 0.03 * 0.8_f64.sin();
        let q_new = 0.8 + 0.1 * p_new;
        assert_abs_diff_eq!(big.p()[0], p_new, epsilon = 1e-15);
        assert_abs_diff_eq!(big.q()[0], q_new, epsilon = 1e-15);
        assert_abs_diff_eq!(big.q()[0], 0.7997848, epsilon = 1e-7);
        assert_abs_diff_eq!(big.p()[0], -0.0021521, epsilon = 1e-7);
    }

    #[test]
    fn midpoint_oscillator_is_cayley_rotation() {
        let sys = HarmonicOscillator::new(1.0).unwrap();
        let z = PhaseState::scalar(1.0, 0.0).unwrap();
        let h = 0.1;
        let (big, _) = implicit_step(&sys, &z, &tight(h), &SchemeParams::midpoint(1)).unwrap();
        // rotation by theta with tan(theta/2) = h/2, clockwise in (q, p)
        let theta = 2.0 * (h / 2.0_f64).atan();
        assert_abs_diff_eq!(big.q()[0], theta.cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(big.p()[0], -theta.sin(), epsilon = 1e-14);
        assert_abs_diff_eq!(sys.energy(&big), sys.energy(&z), epsilon = 1e-13);
    }

    #[test]
    fn fixed_iterations_report_residual_and_never_fail() {
        let sys = Pendulum::default();
        let z = PhaseState::scalar(3.0, 0.1).unwrap();
        let cfg = StepConfig::fixed(0.7, 5).unwrap();
        let (_, report) = implicit_step(&sys, &z, &cfg, &SchemeParams::midpoint(1)).unwrap();
        assert_eq!(report.iterations, 5);
        assert!(report.residual > 0.0);
    }

    #[test]
    fn tolerance_mode_reports_non_convergence() {
        let sys = Pendulum::default();
        let z = PhaseState::scalar(3.0, 0.1).unwrap();
        let cfg = StepConfig::tolerance(0.7, 1e-14, 2).unwrap();
        match implicit_step(&sys, &z, &cfg, &SchemeParams::midpoint(1)) {
            Err(Error::NonConvergence {
                residual,
                iterations,
            }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 1e-14);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn divergence_is_detected() {
        // The oscillator corrector contracts only for |h| < 2 at the midpoint.
        let sys = HarmonicOscillator::new(1.0).unwrap();
        let z = PhaseState::scalar(1.0, 0.0).unwrap();
        let cfg = StepConfig::tolerance(50.0, 1e-14, 200).unwrap();
        let err = implicit_step(&sys, &z, &cfg, &SchemeParams::midpoint(1)).unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }), "{err:?}");
    }

    #[test]
    fn integrate_zero_steps() {
        let sys = Pendulum::default();
        let z0 = PhaseState::scalar(0.8, 0.0).unwrap();
        let traj = integrate(&sys, &z0, &tight(0.1), &SchemeParams::midpoint(1), 0).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.states[0], z0);
        assert_eq!(traj.times, vec![0.0]);
    }

    #[test]
    fn integrate_annotates_failing_step() {
        let sys = HarmonicOscillator::new(1.0).unwrap();
        let z0 = PhaseState::scalar(1.0, 0.0).unwrap();
        let cfg = StepConfig::tolerance(50.0, 1e-14, 200).unwrap();
        let err = integrate(&sys, &z0, &cfg, &SchemeParams::midpoint(1), 3).unwrap_err();
        match err {
            Error::StepFailed { step, .. } => assert_eq!(step, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dimension_checks() {
        let sys = Pendulum::default();
        let z2 = PhaseState::new(vec![0.0, 0.0], vec![0.0, 0.0]).unwrap();
        assert!(implicit_step(&sys, &z2, &tight(0.1), &SchemeParams::midpoint(2)).is_err());
        let z = PhaseState::scalar(0.1, 0.0).unwrap();
        assert!(implicit_step(&sys, &z, &tight(0.1), &SchemeParams::midpoint(2)).is_err());
        let gauge = GaugeMatrix::new(vec![0.0, 0.0], vec![0.0, 0.0]).unwrap();
        assert!(step_amatrix(&sys, &z, &tight(0.1), &gauge).is_err());
    }

    #[test]
    fn amatrix_zero_gauge_is_midpoint() {
        let sys = Pendulum::default();
        let z = PhaseState::scalar(3.1, 0.0).unwrap();
        let cfg = StepConfig::fixed(0.1, 8).unwrap();
        let gauge = GaugeMatrix::new(vec![0.0], vec![0.0]).unwrap();
        let a = step_amatrix(&sys, &z, &cfg, &gauge).unwrap();
        let (b, _) = implicit_step(&sys, &z, &cfg, &SchemeParams::midpoint(1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn amatrix_matches_family_member() {
        let sys = Pendulum::default();
        let z = PhaseState::scalar(3.1, 0.0).unwrap();
        let cfg = tight(0.1);
        let gauge = GaugeMatrix::new(vec![-8.333e-3], vec![-2.498e-4]).unwrap();
        let a = step_amatrix(&sys, &z, &cfg, &gauge).unwrap();
        let params = SchemeParams::uniform(1, 0.5, -2.498e-4, -8.333e-3).unwrap();
        assert_eq!(gauge.to_params(), params);
        let (b, _) = implicit_step(&sys, &z, &cfg, &params).unwrap();
        assert!(a.distance_inf(&b) <= 1e-15);
    }
}
