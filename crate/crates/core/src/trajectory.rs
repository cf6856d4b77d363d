use serde::{Deserialize, Serialize};

use crate::state::PhaseState;

/// Sampled solution on the grid `t_k = k * h`.
///
/// Row `k` holds the state, its energy, and the final corrector residual and
/// sweep count of the step that produced it (both zero for the initial row
/// and for explicit schemes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhaseState>,
    pub energies: Vec<f64>,
    pub residuals: Vec<f64>,
    pub iterations: Vec<usize>,
}

impl Trajectory {
    pub fn new(z0: PhaseState, energy: f64) -> Self {
        Self::with_capacity(z0, energy, 0)
    }

    pub fn with_capacity(z0: PhaseState, energy: f64, steps: usize) -> Self {
        let mut traj = Self {
            times: Vec::with_capacity(steps + 1),
            states: Vec::with_capacity(steps + 1),
            energies: Vec::with_capacity(steps + 1),
            residuals: Vec::with_capacity(steps + 1),
            iterations: Vec::with_capacity(steps + 1),
        };
        traj.push(0.0, z0, energy, 0.0, 0);
        traj
    }

    pub fn push(&mut self, t: f64, z: PhaseState, energy: f64, residual: f64, iterations: usize) {
        self.times.push(t);
        self.states.push(z);
        self.energies.push(energy);
        self.residuals.push(residual);
        self.iterations.push(iterations);
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn initial(&self) -> Option<&PhaseState> {
        self.states.first()
    }

    pub fn last(&self) -> Option<&PhaseState> {
        self.states.last()
    }

    /// `H(z_k) - H(z_0)` for every row.
    pub fn energy_deviation(&self) -> Vec<f64> {
        match self.energies.first() {
            Some(&h0) => self.energies.iter().map(|h| h - h0).collect(),
            None => Vec::new(),
        }
    }
}
