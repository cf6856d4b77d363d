use crate::state::PhaseState;

/// A Hamiltonian `H(q, p)` on canonical coordinates.
///
/// Gradients use the stacked layout `(dH/dq_1..dH/dq_n, dH/dp_1..dH/dp_n)`.
/// Implementations must be read-only so sweeps can evaluate them from
/// several threads.
pub trait HamiltonianSystem: Sync {
    fn dim(&self) -> usize;

    fn energy(&self, z: &PhaseState) -> f64;

    /// Writes `grad H(z)` into `out`, which has length `2 * dim()`.
    fn gradient_into(&self, z: &PhaseState, out: &mut [f64]);

    fn gradient(&self, z: &PhaseState) -> Vec<f64> {
        let mut out = vec![0.0; 2 * self.dim()];
        self.gradient_into(z, &mut out);
        out
    }

    /// The `H = A(p) + eps * B(q)` decomposition, if the system has one.
    fn split(&self) -> Option<&dyn SeparableSplit> {
        None
    }
}

/// Separable form `H = A(p) + coupling * B(q)` used by splitting schemes.
pub trait SeparableSplit {
    fn coupling(&self) -> f64;

    /// `dA/dp` written into `out` (length n).
    fn kinetic_gradient(&self, p: &[f64], out: &mut [f64]);

    /// `dB/dq` written into `out` (length n), without the coupling factor.
    fn potential_gradient(&self, q: &[f64], out: &mut [f64]);
}

/// Largest deviation between `gradient` and central differences of `energy`
/// at `z`, relative to `max(|grad H|_inf, 1)`.
pub fn gradient_consistency<S: HamiltonianSystem + ?Sized>(
    sys: &S,
    z: &PhaseState,
    delta: f64,
) -> f64 {
    let grad = sys.gradient(z);
    let scale = grad.iter().fold(1.0_f64, |acc, g| acc.max(g.abs()));
    let base = z.to_stacked();
    let mut worst = 0.0_f64;
    for (i, g) in grad.iter().enumerate() {
        let mut plus = base.clone();
        let mut minus = base.clone();
        plus[i] += delta;
        minus[i] -= delta;
        let e_plus = sys.energy(&PhaseState::from_stacked(&plus).expect("finite probe"));
        let e_minus = sys.energy(&PhaseState::from_stacked(&minus).expect("finite probe"));
        let fd = (e_plus - e_minus) / (2.0 * delta);
        worst = worst.max((fd - g).abs() / scale);
    }
    worst
}
