//! Family parameters and stepping configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-degree-of-freedom triples `(alpha_i, beta_i, gamma_i)` selecting one
/// member of the implicit family.
///
/// `alpha` interpolates between the staggered Euler schemes (`0` is Euler A,
/// `1` is Euler B, `1/2` the midpoint rule); `beta` and `gamma` are the gauge
/// terms that shift the evaluation point without changing symplecticity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    gamma: Vec<f64>,
}

impl SchemeParams {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        let n = alpha.len();
        if n == 0 {
            return Err(Error::InvalidParams("scheme parameters need n >= 1".into()));
        }
        for len in [beta.len(), gamma.len()] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: len,
                });
            }
        }
        if !alpha
            .iter()
            .chain(&beta)
            .chain(&gamma)
            .all(|v| v.is_finite())
        {
            return Err(Error::NonFinite("scheme parameters"));
        }
        Ok(Self { alpha, beta, gamma })
    }

    /// Broadcasts one triple to all `n` degrees of freedom.
    pub fn uniform(n: usize, alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        Self::new(vec![alpha; n], vec![beta; n], vec![gamma; n])
    }

    /// Staggered symplectic Euler A, `(0, 0, 0)`.
    pub fn euler_a(n: usize) -> Self {
        Self::uniform(n.max(1), 0.0, 0.0, 0.0).expect("finite constants")
    }

    /// Staggered symplectic Euler B, `(1, 0, 0)`.
    pub fn euler_b(n: usize) -> Self {
        Self::uniform(n.max(1), 1.0, 0.0, 0.0).expect("finite constants")
    }

    /// Implicit midpoint rule, `(1/2, 0, 0)`.
    pub fn midpoint(n: usize) -> Self {
        Self::uniform(n.max(1), 0.5, 0.0, 0.0).expect("finite constants")
    }

    /// Rotation sub-family `(a, sqrt(a(1-a)), sqrt(a(1-a)))`, `a` in `[0, 1]`.
    pub fn rotation(n: usize, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParams(format!(
                "rotation parameter {alpha} outside [0, 1]"
            )));
        }
        let g = (alpha * (1.0 - alpha)).sqrt();
        Self::uniform(n.max(1), alpha, g, g)
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// True when every `alpha_i` is exactly `1/2`. Such members are
    /// time-symmetric when the gauge terms change sign with `h`.
    pub fn is_symmetric(&self) -> bool {
        self.alpha.iter().all(|&a| a == 0.5)
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        if self.dim() == n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: n,
                found: self.dim(),
            })
        }
    }
}

/// When to stop the fixed-point corrector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StopRule {
    /// Exactly `kappa` corrector sweeps after the predictor, whatever the residual.
    FixedIterations(usize),
    /// Iterate until the update is at most `tol`; fail after `max_iter` sweeps.
    ResidualTolerance { tol: f64, max_iter: usize },
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule::ResidualTolerance {
            tol: 1e-14,
            max_iter: 50,
        }
    }
}

impl StopRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StopRule::FixedIterations(0) => Err(Error::InvalidParams("kappa must be >= 1".into())),
            StopRule::FixedIterations(_) => Ok(()),
            StopRule::ResidualTolerance { tol, max_iter } => {
                if !(tol > 0.0 && tol.is_finite()) {
                    Err(Error::InvalidParams(format!(
                        "tolerance {tol} must be positive"
                    )))
                } else if max_iter == 0 {
                    Err(Error::InvalidParams("max_iter must be >= 1".into()))
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Step size plus stopping rule. Negative `h` integrates backwards; `h = 0`
/// is accepted at this level and yields the identity map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepConfig {
    pub h: f64,
    pub stop: StopRule,
}

impl StepConfig {
    pub fn new(h: f64, stop: StopRule) -> Result<Self> {
        let cfg = Self { h, stop };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Default residual-tolerance stopping, `tol = 1e-14`, 50 sweeps.
    pub fn with_step(h: f64) -> Self {
        Self {
            h,
            stop: StopRule::default(),
        }
    }

    pub fn tolerance(h: f64, tol: f64, max_iter: usize) -> Result<Self> {
        Self::new(h, StopRule::ResidualTolerance { tol, max_iter })
    }

    pub fn fixed(h: f64, kappa: usize) -> Result<Self> {
        Self::new(h, StopRule::FixedIterations(kappa))
    }

    pub fn validate(&self) -> Result<()> {
        if !self.h.is_finite() {
            return Err(Error::NonFinite("step size"));
        }
        self.stop.validate()
    }

    pub fn with_h(&self, h: f64) -> Self {
        Self { h, stop: self.stop }
    }
}
