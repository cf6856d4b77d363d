//! Points of the canonical phase space `T*R^n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A phase-space point `z = (q, p)` with `n` positions and `n` momenta.
///
/// Every state built through [`PhaseState::new`] has matching lengths,
/// `n >= 1`, and only finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    q: Vec<f64>,
    p: Vec<f64>,
}

impl PhaseState {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::InvalidParams("phase state needs n >= 1".into()));
        }
        if q.len() != p.len() {
            return Err(Error::DimensionMismatch {
                expected: q.len(),
                found: p.len(),
            });
        }
        let state = Self { q, p };
        state.check_finite("phase state")?;
        Ok(state)
    }

    /// One degree of freedom.
    pub fn scalar(q: f64, p: f64) -> Result<Self> {
        Self::new(vec![q], vec![p])
    }

    /// Builds a state from the stacked layout `(q_1..q_n, p_1..p_n)`.
    pub fn from_stacked(z: &[f64]) -> Result<Self> {
        if !z.len().is_multiple_of(2) {
            return Err(Error::InvalidParams(format!(
                "stacked phase vector has odd length {}",
                z.len()
            )));
        }
        let n = z.len() / 2;
        Self::new(z[..n].to_vec(), z[n..].to_vec())
    }

    pub(crate) fn zeros(n: usize) -> Self {
        Self {
            q: vec![0.0; n],
            p: vec![0.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub(crate) fn q_mut(&mut self) -> &mut [f64] {
        &mut self.q
    }

    pub(crate) fn p_mut(&mut self) -> &mut [f64] {
        &mut self.p
    }

    /// `(q_1..q_n, p_1..p_n)`.
    pub fn to_stacked(&self) -> Vec<f64> {
        self.q.iter().chain(self.p.iter()).copied().collect()
    }

    pub fn norm_inf(&self) -> f64 {
        self.q
            .iter()
            .chain(self.p.iter())
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// `max_i |self_i - other_i|` over both halves.
    pub fn distance_inf(&self, other: &PhaseState) -> f64 {
        self.q
            .iter()
            .zip(&other.q)
            .chain(self.p.iter().zip(&other.p))
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(self.p.iter()).all(|v| v.is_finite())
    }

    pub(crate) fn check_finite(&self, what: &'static str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite(what))
        }
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

    /// Momentum flip `(q, p) -> (q, -p)`.
    pub fn reflected(&self) -> PhaseState {
        PhaseState {
            q: self.q.clone(),
            p: self.p.iter().map(|v| -v).collect(),
        }
    }
}
