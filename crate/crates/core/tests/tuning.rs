use gaugesymp::tuner::energy_objective;
use gaugesymp::{
    fit_scaling, tune, Pendulum, PhaseState, Scheme, StepConfig, StopRule, TuneOptions, TuneRegion,
    TuneResult,
};

const STEPS: usize = 2_000;

fn z0() -> PhaseState {
    PhaseState::scalar(3.1, 0.0).unwrap()
}

fn tuned(h: f64) -> TuneResult {
    let region = TuneRegion::square(0.2 * h).unwrap();
    tune(
        &Pendulum::new(0.03),
        &z0(),
        h,
        STEPS,
        &region,
        &TuneOptions::default(),
    )
    .unwrap()
}

fn max_energy_error(scheme: &Scheme, h: f64, steps: usize) -> f64 {
    let cfg = StepConfig::tolerance(h, 1e-14, 100).unwrap();
    let traj = scheme
        .integrate(&Pendulum::new(0.03), &z0(), &cfg, steps)
        .unwrap();
    traj.energy_deviation()
        .iter()
        .fold(0.0, |m, d| m.max(d.abs()))
}

#[test]
fn fitted_law_extrapolates_to_a_smaller_step() {
    let fit = fit_scaling(&[tuned(0.2), tuned(0.4), tuned(0.8)]).unwrap();
    for (h, dbeta, dgamma) in fit.residuals() {
        let sample = fit.samples.iter().find(|s| s.h == h).unwrap();
        assert!(
            dbeta.abs() < 0.05 * sample.beta_star.abs(),
            "h={h}: beta residual {dbeta}"
        );
        assert!(
            dgamma.abs() < 0.05 * sample.gamma_star.abs(),
            "h={h}: gamma residual {dgamma}"
        );
    }

    let h = 0.007;
    let steps = 20_000;
    let midpoint = max_energy_error(&Scheme::midpoint(1), h, steps);
    let law = max_energy_error(&Scheme::scaled(1, fit.b, fit.c), h, steps);
    assert!(
        law * 10.0 < midpoint,
        "midpoint {midpoint:.3e}, extrapolated {law:.3e}"
    );
}

#[test]
fn objective_is_continuous_and_grows_linearly_off_the_optimum() {
    let h = 0.1;
    let sys = Pendulum::new(0.03);
    let f = |beta: f64| {
        energy_objective(
            &sys,
            &z0(),
            h,
            STEPS,
            StopRule::default(),
            beta,
            h * -8.33321735568e-2,
        )
        .unwrap()
    };
    let centre = h * -2.4978136594e-3;
    let delta = 1e-5;
    let (f0, f1, f2) = (f(centre), f(centre + delta), f(centre + 2.0 * delta));
    assert!(f0 < f1 && f1 < f2);
    let ratio = (f2 - f0) / (f1 - f0);
    assert!((ratio - 2.0).abs() < 0.2, "ratio {ratio}");
    // nearby points give nearby values
    let g = f(centre + delta + 1e-9);
    assert!((g - f1).abs() < 1e-3 * f1, "{g} vs {f1}");
}

#[test]
fn origin_of_the_region_reproduces_midpoint() {
    let h = 0.1;
    let sys = Pendulum::new(0.03);
    let origin = energy_objective(&sys, &z0(), h, STEPS, StopRule::default(), 0.0, 0.0).unwrap();
    let cfg = StepConfig::with_step(h);
    let traj = Scheme::midpoint(1)
        .integrate(&sys, &z0(), &cfg, STEPS)
        .unwrap();
    let direct = traj
        .energy_deviation()
        .iter()
        .fold(0.0, |m: f64, d| m.max(d.abs()));
    assert_eq!(origin, direct);
}
