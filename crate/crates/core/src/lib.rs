//! A family of implicit one-step symplectic integrators for canonical
//! Hamiltonian systems, parameterised per degree of freedom by
//! `(alpha, beta, gamma)`. The family contains both staggered symplectic
//! Euler schemes and the midpoint rule; the gauge terms `beta` and `gamma`
//! can be tuned to shrink the energy error.
//!
//! Alongside the integrator the crate ships the pendulum and harmonic
//! oscillator test problems, an explicit SABA2 splitting baseline,
//! diagnostics (energy statistics, convergence order, symplecticity defect)
//! and a `(beta, gamma)` tuner.

pub mod diagnostics;
pub mod error;
pub mod integrator;
pub mod params;
pub mod problems;
pub mod saba;
pub mod scheme;
pub mod state;
pub mod system;
pub mod trajectory;
pub mod tuner;

pub use diagnostics::{
    energy_stats, estimate_order, symplecticity_residual, EnergyErrorStats, ErrorMetric,
    OrderEstimate, OrderOptions, Reference,
};
pub use error::{Error, Result};
pub use integrator::{
    implicit_step, integrate, project_midstate, step_amatrix, GaugeMatrix, StepReport,
};
pub use params::{SchemeParams, StepConfig, StopRule};
pub use problems::{HarmonicOscillator, Pendulum, Problem};
pub use saba::{saba2_integrate, saba2_step, SabaCoefficients};
pub use scheme::Scheme;
pub use state::PhaseState;
pub use system::{HamiltonianSystem, SeparableSplit};
pub use trajectory::Trajectory;
pub use tuner::{
    cusp_profile, fit_scaling, tune, ScalingFit, TuneOptions, TuneRegion, TuneResult, Window,
};
