use gaugesymp::diagnostics::symplecticity_residual;
use gaugesymp::{
    energy_stats, implicit_step, HamiltonianSystem, HarmonicOscillator, Pendulum, PhaseState,
    Scheme, SchemeParams, StepConfig,
};
use proptest::prelude::*;

fn cfg(h: f64) -> StepConfig {
    StepConfig::tolerance(h, 1e-14, 100).unwrap()
}

/// Two pendulums joined by a spring `k (q1 - q2)^2 / 2`.
struct Coupled {
    eps: [f64; 2],
    k: f64,
}

impl HamiltonianSystem for Coupled {
    fn dim(&self) -> usize {
        2
    }

    fn energy(&self, z: &PhaseState) -> f64 {
        let (q, p) = (z.q(), z.p());
        0.5 * (p[0] * p[0] + p[1] * p[1]) - self.eps[0] * q[0].cos() - self.eps[1] * q[1].cos()
            + 0.5 * self.k * (q[0] - q[1]).powi(2)
    }

    fn gradient_into(&self, z: &PhaseState, out: &mut [f64]) {
        let (q, p) = (z.q(), z.p());
        let spring = self.k * (q[0] - q[1]);
        out[0] = self.eps[0] * q[0].sin() + spring;
        out[1] = self.eps[1] * q[1].sin() - spring;
        out[2] = p[0];
        out[3] = p[1];
    }
}

#[test]
fn midpoint_long_run_has_no_drift() {
    let sys = Pendulum::new(0.03);
    let z0 = PhaseState::scalar(3.1, 0.0).unwrap();
    let traj = Scheme::midpoint(1)
        .integrate(&sys, &z0, &StepConfig::with_step(0.1), 100_000)
        .unwrap();
    let stats = energy_stats(&traj).unwrap();
    assert!(stats.drift_slope.abs() < 1e-12, "{}", stats.drift_slope);
    assert!(stats.max_abs_deviation < 1e-4);
}

#[test]
fn off_centre_member_oscillates_more_than_midpoint() {
    let sys = Pendulum::new(0.03);
    let z0 = PhaseState::scalar(3.1, 0.0).unwrap();
    let c = StepConfig::with_step(0.1);
    let mid = energy_stats(
        &Scheme::midpoint(1)
            .integrate(&sys, &z0, &c, 20_000)
            .unwrap(),
    )
    .unwrap();
    let other = Scheme::Family(SchemeParams::uniform(1, 0.5, 0.5, 0.5).unwrap());
    let traj = other.integrate(&sys, &z0, &c, 20_000).unwrap();
    let skew = energy_stats(&traj).unwrap();
    assert!(
        skew.amplitude > mid.amplitude,
        "{} vs {}",
        skew.amplitude,
        mid.amplitude
    );
    // bounded, not drifting: the second half stays within the first half's envelope
    let dev = traj.energy_deviation();
    let envelope = |s: &[f64]| s.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    let (early, late) = dev.split_at(dev.len() / 2);
    assert!(
        envelope(late) < 1.05 * envelope(early),
        "{} vs {}",
        envelope(late),
        envelope(early)
    );
}

#[test]
fn rotation_endpoints_are_the_euler_schemes() {
    assert_eq!(
        SchemeParams::rotation(3, 0.0).unwrap(),
        SchemeParams::euler_a(3)
    );
    assert_eq!(
        SchemeParams::rotation(3, 1.0).unwrap(),
        SchemeParams::euler_b(3)
    );
}

#[test]
fn per_dof_parameters_act_independently_on_decoupled_systems() {
    let sys = Coupled {
        eps: [0.03, 0.5],
        k: 0.0,
    };
    let params = SchemeParams::new(vec![0.0, 0.5], vec![0.0, 0.01], vec![0.0, -0.02]).unwrap();
    let z = PhaseState::new(vec![1.0, -0.4], vec![0.1, 0.3]).unwrap();
    let (joint, _) = implicit_step(&sys, &z, &cfg(0.2), &params).unwrap();

    let (first, _) = implicit_step(
        &Pendulum::new(0.03),
        &PhaseState::scalar(1.0, 0.1).unwrap(),
        &cfg(0.2),
        &SchemeParams::euler_a(1),
    )
    .unwrap();
    let second_params = SchemeParams::uniform(1, 0.5, 0.01, -0.02).unwrap();
    let (second, _) = implicit_step(
        &Pendulum::new(0.5),
        &PhaseState::scalar(-0.4, 0.3).unwrap(),
        &cfg(0.2),
        &second_params,
    )
    .unwrap();

    assert!((joint.q()[0] - first.q()[0]).abs() < 1e-14);
    assert!((joint.p()[0] - first.p()[0]).abs() < 1e-14);
    assert!((joint.q()[1] - second.q()[0]).abs() < 1e-14);
    assert!((joint.p()[1] - second.p()[0]).abs() < 1e-14);
}

#[test]
fn coupled_two_dof_member_is_symplectic() {
    let sys = Coupled {
        eps: [0.03, 0.2],
        k: 0.3,
    };
    let scheme = Scheme::Family(
        SchemeParams::new(vec![0.2, 0.7], vec![0.05, -0.1], vec![0.0, 0.3]).unwrap(),
    );
    let z = PhaseState::new(vec![0.7, -1.1], vec![0.2, 0.05]).unwrap();
    let r = symplecticity_residual(&sys, &z, &scheme, &cfg(0.1), 1e-6).unwrap();
    assert!(r < 1e-6, "{r}");
}

#[test]
fn oscillator_midpoint_is_a_cayley_rotation() {
    let osc = HarmonicOscillator::new(1.0).unwrap();
    let z = PhaseState::scalar(1.0, 0.0).unwrap();
    let traj = Scheme::midpoint(1)
        .integrate(&osc, &z, &cfg(0.1), 1000)
        .unwrap();
    let stats = energy_stats(&traj).unwrap();
    // exact for quadratic H; only the 1e-14 solver tolerance and rounding accumulate
    assert!(
        stats.max_abs_deviation < 1e-11,
        "{}",
        stats.max_abs_deviation
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Fixed-gauge members satisfy `R Phi_h R Phi_h = id` for the momentum flip `R`.
    #[test]
    fn fixed_gauge_members_are_reversible_under_momentum_flip(
        q in -3.0..3.0f64,
        p in -0.5..0.5f64,
        h in 0.01..0.5f64,
        beta in -0.1..0.1f64,
        gamma in -0.1..0.1f64,
    ) {
        let sys = Pendulum::new(0.03);
        let params = SchemeParams::uniform(1, 0.5, beta, gamma).unwrap();
        let z = PhaseState::scalar(q, p).unwrap();
        let (one, _) = implicit_step(&sys, &z, &cfg(h), &params).unwrap();
        let (two, _) = implicit_step(&sys, &one.reflected(), &cfg(h), &params).unwrap();
        prop_assert!(two.reflected().distance_inf(&z) < 1e-13);
    }

    #[test]
    fn euler_schemes_are_adjoint(q in -3.0..3.0f64, p in -0.5..0.5f64, h in 0.01..0.5f64) {
        let sys = Pendulum::new(0.03);
        let z = PhaseState::scalar(q, p).unwrap();
        let (fwd, _) = implicit_step(&sys, &z, &cfg(h), &SchemeParams::euler_a(1)).unwrap();
        let (back, _) = implicit_step(&sys, &fwd, &cfg(-h), &SchemeParams::euler_b(1)).unwrap();
        prop_assert!(back.distance_inf(&z) < 1e-14);
    }
}
