use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{implicit_step, integrate, StepReport};
use crate::params::{SchemeParams, StepConfig};
use crate::saba::{saba2_integrate, saba2_step, SabaCoefficients};
use crate::state::PhaseState;
use crate::system::HamiltonianSystem;
use crate::trajectory::Trajectory;

/// Any one-step method the diagnostics and the CLI can drive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Scheme {
    /// Fixed member of the implicit family.
    Family(SchemeParams),
    /// Family member whose gauge terms scale with the step:
    /// `(alpha, h * b, h * c)`.
    Scaled {
        alpha: Vec<f64>,
        b: Vec<f64>,
        c: Vec<f64>,
    },
    Saba2(SabaCoefficients),
}

impl Scheme {
    pub fn euler_a(n: usize) -> Self {
        Scheme::Family(SchemeParams::euler_a(n))
    }

    pub fn euler_b(n: usize) -> Self {
        Scheme::Family(SchemeParams::euler_b(n))
    }

    pub fn midpoint(n: usize) -> Self {
        Scheme::Family(SchemeParams::midpoint(n))
    }

    pub fn saba2() -> Self {
        Scheme::Saba2(SabaCoefficients::default())
    }

    /// Symmetric member with `beta = h b`, `gamma = h c` on every degree of freedom.
    pub fn scaled(n: usize, b: f64, c: f64) -> Self {
        Scheme::Scaled {
            alpha: vec![0.5; n],
            b: vec![b; n],
            c: vec![c; n],
        }
    }

    /// The family parameters used at step size `h`; `None` for splitting.
    pub fn params_for(&self, h: f64) -> Result<Option<SchemeParams>> {
        match self {
            Scheme::Family(p) => Ok(Some(p.clone())),
            Scheme::Scaled { alpha, b, c } => SchemeParams::new(
                alpha.clone(),
                b.iter().map(|v| h * v).collect(),
                c.iter().map(|v| h * v).collect(),
            )
            .map(Some),
            Scheme::Saba2(_) => Ok(None),
        }
    }

    pub fn is_implicit(&self) -> bool {
        !matches!(self, Scheme::Saba2(_))
    }

    /// Short label for tables and file names.
    pub fn label(&self) -> String {
        fn fmt_vec(v: &[f64]) -> String {
            v.iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(":")
        }
        match self {
            Scheme::Family(p) => {
                let n = p.dim();
                if *p == SchemeParams::euler_a(n) {
                    "euler_a".into()
                } else if *p == SchemeParams::euler_b(n) {
                    "euler_b".into()
                } else if *p == SchemeParams::midpoint(n) {
                    "midpoint".into()
                } else {
                    format!(
                        "a{}_b{}_g{}",
                        fmt_vec(p.alpha()),
                        fmt_vec(p.beta()),
                        fmt_vec(p.gamma())
                    )
                }
            }
            Scheme::Scaled { alpha, b, c } => {
                format!("a{}_hb{}_hc{}", fmt_vec(alpha), fmt_vec(b), fmt_vec(c))
            }
            Scheme::Saba2(coeffs) if *coeffs == SabaCoefficients::default() => "saba2".into(),
            Scheme::Saba2(_) => "saba2_custom".into(),
        }
    }

    pub fn step<S: HamiltonianSystem + ?Sized>(
        &self,
        sys: &S,
        z: &PhaseState,
        cfg: &StepConfig,
    ) -> Result<(PhaseState, StepReport)> {
        match self {
            Scheme::Saba2(coeffs) => saba2_step(sys, z, cfg.h, coeffs).map(|next| {
                (
                    next,
                    StepReport {
                        iterations: 0,
                        residual: 0.0,
                    },
                )
            }),
            other => {
                let params = other.params_for(cfg.h)?.expect("implicit scheme");
                implicit_step(sys, z, cfg, &params)
            }
        }
    }

    pub fn integrate<S: HamiltonianSystem + ?Sized>(
        &self,
        sys: &S,
        z0: &PhaseState,
        cfg: &StepConfig,
        steps: usize,
    ) -> Result<Trajectory> {
        match self {
            Scheme::Saba2(coeffs) => {
                cfg.validate()?;
                saba2_integrate(sys, z0, cfg.h, steps, coeffs)
            }
            other => {
                let params = other.params_for(cfg.h)?.expect("implicit scheme");
                integrate(sys, z0, cfg, &params, steps)
            }
        }
    }

    pub fn check_dim(&self, n: usize) -> Result<()> {
        let found = match self {
            Scheme::Family(p) => p.dim(),
            Scheme::Scaled { alpha, b, c } => {
                if b.len() != alpha.len() || c.len() != alpha.len() {
                    return Err(Error::DimensionMismatch {
                        expected: alpha.len(),
                        found: b.len().min(c.len()),
                    });
                }
                alpha.len()
            }
            Scheme::Saba2(_) => n,
        };
        if found == n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: n, found })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels() {
        assert_eq!(Scheme::euler_a(1).label(), "euler_a");
        assert_eq!(Scheme::euler_b(1).label(), "euler_b");
        assert_eq!(Scheme::midpoint(1).label(), "midpoint");
        assert_eq!(Scheme::saba2().label(), "saba2");
        let s = Scheme::Family(SchemeParams::uniform(1, 0.1, 0.3, 0.3).unwrap());
        assert_eq!(s.label(), "a0.1_b0.3_g0.3");
    }

    #[test]
    fn scaled_params_follow_step() {
        let s = Scheme::scaled(1, -0.0025, -0.08);
        let p = s.params_for(0.1).unwrap().unwrap();
        assert_eq!(p.alpha(), &[0.5]);
        assert_eq!(p.beta(), &[0.1 * -0.0025]);
        assert_eq!(p.gamma(), &[0.1 * -0.08]);
        assert!(Scheme::saba2().params_for(0.1).unwrap().is_none());
    }
}
