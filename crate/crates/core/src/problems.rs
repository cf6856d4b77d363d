//! Concrete Hamiltonians.

use crate::error::{Error, Result};
use crate::state::PhaseState;
use crate::system::{HamiltonianSystem, SeparableSplit};

/// `H(q, p) = p^2/2 - eps cos q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pendulum {
    pub epsilon: f64,
}

impl Default for Pendulum {
    fn default() -> Self {
        Self { epsilon: 0.03 }
    }
}

impl Pendulum {
    pub fn new(epsilon: f64) -> Self {
        Self { epsilon }
    }

    pub fn checked(epsilon: f64) -> Result<Self> {
        if epsilon.is_finite() {
            Ok(Self { epsilon })
        } else {
            Err(Error::NonFinite("pendulum coupling"))
        }
    }
}

impl HamiltonianSystem for Pendulum {
    fn dim(&self) -> usize {
        1
    }

    fn energy(&self, z: &PhaseState) -> f64 {
        let (q, p) = (z.q()[0], z.p()[0]);
        0.5 * p * p - self.epsilon * q.cos()
    }

    fn gradient_into(&self, z: &PhaseState, out: &mut [f64]) {
        out[0] = self.epsilon * z.q()[0].sin();
        out[1] = z.p()[0];
    }

    fn split(&self) -> Option<&dyn SeparableSplit> {
        Some(self)
    }
}

/// `A(p) = p^2/2`, `B(q) = -cos q`, coupling `eps`.
impl SeparableSplit for Pendulum {
    fn coupling(&self) -> f64 {
        self.epsilon
    }

    fn kinetic_gradient(&self, p: &[f64], out: &mut [f64]) {
        out[0] = p[0];
    }

    fn potential_gradient(&self, q: &[f64], out: &mut [f64]) {
        out[0] = q[0].sin();
    }
}

/// `H(q, p) = p^2/2 + omega^2 q^2/2`, with closed-form flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicOscillator {
    omega: f64,
}

impl HarmonicOscillator {
    pub fn new(omega: f64) -> Result<Self> {
        if omega > 0.0 && omega.is_finite() {
            Ok(Self { omega })
        } else {
            Err(Error::InvalidParams(format!(
                "oscillator frequency {omega} must be positive"
            )))
        }
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Exact solution at time `t` (`q' = p`, `p' = -omega^2 q`).
    pub fn exact_flow(&self, z0: &PhaseState, t: f64) -> PhaseState {
        let w = self.omega;
        let (s, c) = (w * t).sin_cos();
        let (q, p) = (z0.q()[0], z0.p()[0]);
        PhaseState::scalar(q * c + p / w * s, -q * w * s + p * c).expect("finite rotation")
    }
}

impl HamiltonianSystem for HarmonicOscillator {
    fn dim(&self) -> usize {
        1
    }

    fn energy(&self, z: &PhaseState) -> f64 {
        let (q, p) = (z.q()[0], z.p()[0]);
        0.5 * (p * p + self.omega * self.omega * q * q)
    }

    fn gradient_into(&self, z: &PhaseState, out: &mut [f64]) {
        out[0] = self.omega * self.omega * z.q()[0];
        out[1] = z.p()[0];
    }

    fn split(&self) -> Option<&dyn SeparableSplit> {
        Some(self)
    }
}

/// `A(p) = p^2/2`, `B(q) = q^2/2`, coupling `omega^2`.
impl SeparableSplit for HarmonicOscillator {
    fn coupling(&self) -> f64 {
        self.omega * self.omega
    }

    fn kinetic_gradient(&self, p: &[f64], out: &mut [f64]) {
        out[0] = p[0];
    }

    fn potential_gradient(&self, q: &[f64], out: &mut [f64]) {
        out[0] = q[0];
    }
}

/// Problems addressable by name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Problem {
    Pendulum(Pendulum),
    Oscillator(HarmonicOscillator),
}

impl Problem {
    pub const NAMES: [&'static str; 2] = ["pendulum", "oscillator"];

    /// `param` is `epsilon` for the pendulum and `omega` for the oscillator;
    /// `None` picks the defaults `0.03` and `1`.
    pub fn by_name(name: &str, param: Option<f64>) -> Result<Self> {
        match name {
            "pendulum" => Ok(Problem::Pendulum(Pendulum::checked(param.unwrap_or(0.03))?)),
            "oscillator" => Ok(Problem::Oscillator(HarmonicOscillator::new(
                param.unwrap_or(1.0),
            )?)),
            other => Err(Error::InvalidParams(format!(
                "unknown problem '{other}' (expected one of {:?})",
                Self::NAMES
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Problem::Pendulum(_) => "pendulum",
            Problem::Oscillator(_) => "oscillator",
        }
    }

    pub fn system(&self) -> &dyn HamiltonianSystem {
        match self {
            Problem::Pendulum(p) => p,
            Problem::Oscillator(o) => o,
        }
    }
}
