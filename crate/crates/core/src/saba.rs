//! Explicit SABA2 splitting for `H = A(p) + eps B(q)`.
//!
//! A step alternates drifts `q <- q + s dA/dp(p)` and kicks
//! `p <- p - s eps dB/dq(q)`: drift(a0 h), kick(b0 h), drift(a1 h),
//! kick(b1 h), drift(a2 h).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::StepReport;
use crate::state::PhaseState;
use crate::system::HamiltonianSystem;
use crate::trajectory::Trajectory;

const SUM_TOL: f64 = 1e-12;

/// Drift weights `a` (one more than kicks) and kick weights `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SabaCoefficients {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Default for SabaCoefficients {
    /// `a = (1/6, 2/3, 1/6)`, `b = (1/2, 1/2)`.
    fn default() -> Self {
        Self {
            a: vec![1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
            b: vec![0.5, 0.5],
        }
    }
}

impl SabaCoefficients {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() + 1 || b.is_empty() {
            return Err(Error::InvalidParams(format!(
                "need k kick and k+1 drift weights, got {} drifts and {} kicks",
                a.len(),
                b.len()
            )));
        }
        let (sa, sb) = (a.iter().sum::<f64>(), b.iter().sum::<f64>());
        if (sa - 1.0).abs() > SUM_TOL || (sb - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidParams(format!(
                "splitting weights must each sum to 1 (drifts {sa}, kicks {sb})"
            )));
        }
        Ok(Self { a, b })
    }

    /// The Laskar-Robutel constants `a = (1/2 - sqrt3/6, sqrt3/3, 1/2 - sqrt3/6)`,
    /// `b = (1/2, 1/2)`.
    pub fn laskar_robutel() -> Self {
        let s3 = 3.0_f64.sqrt();
        let edge = 0.5 - s3 / 6.0;
        Self::new(vec![edge, 1.0 - 2.0 * edge, edge], vec![0.5, 0.5]).expect("consistent constants")
    }

    pub fn drifts(&self) -> &[f64] {
        &self.a
    }

    pub fn kicks(&self) -> &[f64] {
        &self.b
    }
}

pub fn saba2_step<S: HamiltonianSystem + ?Sized>(
    sys: &S,
    z: &PhaseState,
    h: f64,
    coeffs: &SabaCoefficients,
) -> Result<PhaseState> {
    let split = sys.split().ok_or_else(|| {
        Error::Unsupported("splitting scheme needs an A(p) + eps B(q) system".into())
    })?;
    z.check_dim(sys.dim())?;
    if !h.is_finite() {
        return Err(Error::NonFinite("step size"));
    }
    let n = z.dim();
    let eps = split.coupling();
    let mut out = z.clone();
    let mut grad = vec![0.0; n];

    let drift = |out: &mut PhaseState, grad: &mut [f64], s: f64| {
        split.kinetic_gradient(out.p(), grad);
        for (q, g) in out.q_mut().iter_mut().zip(grad.iter()) {
            *q += s * g;
        }
    };
    let kick = |out: &mut PhaseState, grad: &mut [f64], s: f64| {
        split.potential_gradient(out.q(), grad);
        for (p, g) in out.p_mut().iter_mut().zip(grad.iter()) {
            *p -= s * eps * g;
        }
    };

    for (a, b) in coeffs.a.iter().zip(&coeffs.b) {
        drift(&mut out, &mut grad, a * h);
        kick(&mut out, &mut grad, b * h);
    }
    drift(&mut out, &mut grad, coeffs.a[coeffs.a.len() - 1] * h);

    out.check_finite("splitting step")?;
    Ok(out)
}

pub fn saba2_integrate<S: HamiltonianSystem + ?Sized>(
    sys: &S,
    z0: &PhaseState,
    h: f64,
    steps: usize,
    coeffs: &SabaCoefficients,
) -> Result<Trajectory> {
    z0.check_dim(sys.dim())?;
    crate::integrator::integrate_with(sys, z0, h, steps, |z| {
        saba2_step(sys, z, h, coeffs).map(|next| {
            (
                next,
                StepReport {
                    iterations: 0,
                    residual: 0.0,
                },
            )
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{HarmonicOscillator, Pendulum};
    use approx::assert_abs_diff_eq;

    struct NoSplit;
    impl HamiltonianSystem for NoSplit {
        fn dim(&self) -> usize {
            1
        }
        fn energy(&self, z: &PhaseState) -> f64 {
            z.q()[0] * z.p()[0]
        }
        fn gradient_into(&self, z: &PhaseState, out: &mut [f64]) {
            out[0] = z.p()[0];
            out[1] = z.q()[0];
        }
    }

    #[test]
    fn coefficient_sums_are_checked() {
        let d = SabaCoefficients::default();
        assert_abs_diff_eq!(d.drifts().iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        assert!(SabaCoefficients::new(vec![0.2, 0.6, 0.1], vec![0.5, 0.5]).is_err());
        assert!(SabaCoefficients::new(vec![0.5, 0.5], vec![0.5, 0.5]).is_err());
        let lr = SabaCoefficients::laskar_robutel();
        assert_abs_diff_eq!(lr.drifts()[1], 3.0_f64.sqrt() / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_step_is_identity() {
        let z = PhaseState::scalar(0.8, 0.3).unwrap();
        let out = saba2_step(&Pendulum::default(), &z, 0.0, &SabaCoefficients::default()).unwrap();
        assert_eq!(out, z);
    }

    #[test]
    fn pendulum_step_matches_hand_composition() {
        let (eps, h) = (0.03_f64, 0.1_f64);
        let (mut q, mut p) = (0.8_f64, 0.0_f64);
        q += h / 6.0 * p;
        p -= h / 2.0 * eps * q.sin();
        q += 2.0 * h / 3.0 * p;
        p -= h / 2.0 * eps * q.sin();
        q += h / 6.0 * p;

        let z = PhaseState::scalar(0.8, 0.0).unwrap();
        let out = saba2_step(&Pendulum::new(eps), &z, h, &SabaCoefficients::default()).unwrap();
        assert_abs_diff_eq!(out.q()[0], q, epsilon = 1e-16);
        assert_abs_diff_eq!(out.p()[0], p, epsilon = 1e-16);
    }

    #[test]
    fn requires_split_form() {
        let z = PhaseState::scalar(0.1, 0.1).unwrap();
        assert!(matches!(
            saba2_step(&NoSplit, &z, 0.1, &SabaCoefficients::default()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn reversible() {
        let sys = Pendulum::default();
        let coeffs = SabaCoefficients::default();
        let z0 = PhaseState::scalar(0.8, 0.0).unwrap();
        let fwd = saba2_integrate(&sys, &z0, 0.2, 50, &coeffs).unwrap();
        let back = saba2_integrate(&sys, fwd.last().unwrap(), -0.2, 50, &coeffs).unwrap();
        assert!(back.last().unwrap().distance_inf(&z0) < 1e-12);
    }

    #[test]
    fn zero_steps() {
        let z0 = PhaseState::scalar(0.8, 0.0).unwrap();
        let traj = saba2_integrate(
            &Pendulum::default(),
            &z0,
            0.2,
            0,
            &SabaCoefficients::default(),
        )
        .unwrap();
        assert_eq!(traj.len(), 1);
    }

    #[test]
    fn oscillator_energy_error_over_a_period() {
        // One period of the oscillator; the energy error scales as h^2 for
        // these weights, so halving h cuts it by roughly 4.
        let osc = HarmonicOscillator::new(1.0).unwrap();
        let coeffs = SabaCoefficients::default();
        let z0 = PhaseState::scalar(1.0, 0.0).unwrap();
        let max_dev = |h: f64| {
            let steps = (2.0 * std::f64::consts::PI / h).round() as usize;
            let traj = saba2_integrate(&osc, &z0, h, steps, &coeffs).unwrap();
            traj.energy_deviation()
                .iter()
                .fold(0.0_f64, |m, d| m.max(d.abs()))
        };
        let (e1, e2) = (max_dev(0.1), max_dev(0.05));
        assert!(e1 < 1e-3, "{e1}");
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }
}
