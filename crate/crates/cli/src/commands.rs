use std::path::PathBuf;

use gaugesymp::diagnostics::OrderOptions;
use gaugesymp::{
    energy_stats, estimate_order, fit_scaling, tune, EnergyErrorStats, OrderEstimate, PhaseState,
    Problem, Scheme, StepConfig, StopRule, TuneResult,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::output::{
    coordinate_header, discard, ensure_dir, field, num, table, write_file, write_json,
    write_trajectory,
};
use crate::CliError;

struct Setup {
    problem: Problem,
    states: Vec<PhaseState>,
    stop: StopRule,
    out: PathBuf,
}

fn setup(cfg: &ExperimentConfig) -> Result<Setup, CliError> {
    let problem = cfg.resolve_problem()?;
    let states = cfg.initial_states(problem.system().dim())?;
    Ok(Setup {
        problem,
        states,
        stop: cfg.stop_rule()?,
        out: cfg.out.clone(),
    })
}

/// Output directory plus the effective configuration, so a run can be replayed.
fn prepare_out(cfg: &ExperimentConfig) -> Result<(), CliError> {
    ensure_dir(&cfg.out)?;
    write_file(&cfg.out.join("config.json"), |out| {
        writeln!(out, "{}", cfg.to_json())
    })
}

fn single_state(setup: &Setup, command: &str) -> Result<PhaseState, CliError> {
    match setup.states.as_slice() {
        [z] => Ok(z.clone()),
        many => Err(CliError::Usage(format!(
            "'{command}' takes exactly one initial condition, got {}",
            many.len()
        ))),
    }
}

/// Schemes with distinct labels, since labels name the output files.
fn schemes(cfg: &ExperimentConfig, n: usize) -> Result<Vec<(String, Scheme)>, CliError> {
    let mut out: Vec<(String, Scheme)> = Vec::new();
    for scheme in cfg.resolve_schemes(n)? {
        let label = scheme.label();
        if out.iter().any(|(l, _)| *l == label) {
            return Err(CliError::Usage(format!("scheme '{label}' listed twice")));
        }
        out.push((label, scheme));
    }
    Ok(out)
}

fn step_config(h: f64, stop: StopRule) -> StepConfig {
    StepConfig { h, stop }
}

fn error_text(e: &gaugesymp::Error) -> String {
    match e {
        gaugesymp::Error::StepFailed { step, source } => format!("step {step}: {}", source.root()),
        other => other.to_string(),
    }
}

/// One batch entry: initial condition, scheme and step size indices.
#[derive(Debug, Clone, Copy)]
struct Run {
    ic: usize,
    scheme: usize,
    h: usize,
}

fn batch(ics: usize, schemes: usize, hs: usize) -> Vec<Run> {
    let mut runs = Vec::with_capacity(ics * schemes * hs);
    for scheme in 0..schemes {
        for ic in 0..ics {
            for h in 0..hs {
                runs.push(Run { ic, scheme, h });
            }
        }
    }
    runs
}

fn state_cells(z: &PhaseState) -> Vec<String> {
    z.q().iter().chain(z.p()).map(|v| num(*v)).collect()
}

pub fn integrate(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let setup = setup(cfg)?;
    let sys = setup.problem.system();
    let schemes = schemes(cfg, sys.dim())?;
    let hs = cfg.step_sizes(1)?;
    prepare_out(cfg)?;

    let runs = batch(setup.states.len(), schemes.len(), hs.len());
    let outcomes: Vec<(String, Result<(), String>)> = runs
        .par_iter()
        .map(|run| {
            let name = format!("traj_{}_ic{}_h{}.csv", schemes[run.scheme].0, run.ic, run.h);
            let path = setup.out.join(&name);
            discard(&path);
            let result = schemes[run.scheme]
                .1
                .integrate(
                    sys,
                    &setup.states[run.ic],
                    &step_config(hs[run.h], setup.stop),
                    cfg.steps,
                )
                .map_err(|e| error_text(&e))
                .and_then(|traj| write_trajectory(&path, &traj).map_err(|e| e.to_string()));
            (name, result)
        })
        .collect();

    let n = sys.dim();
    write_file(&setup.out.join("integrate_runs.csv"), |out| {
        writeln!(
            out,
            "file,scheme,ic,{},h,steps,status",
            coordinate_header(n)
        )?;
        for (run, (name, result)) in runs.iter().zip(&outcomes) {
            let status = match result {
                Ok(()) => "ok".to_string(),
                Err(e) => format!("error: {}", field(e)),
            };
            writeln!(
                out,
                "{name},{},{},{},{},{},{status}",
                schemes[run.scheme].0,
                run.ic,
                state_cells(&setup.states[run.ic]).join(","),
                num(hs[run.h]),
                cfg.steps
            )?;
        }
        Ok(())
    })?;

    let mut failed = 0;
    for (name, result) in &outcomes {
        match result {
            Ok(()) => println!("wrote {}", setup.out.join(name).display()),
            Err(e) => {
                failed += 1;
                eprintln!("failed {name}: {e}");
            }
        }
    }
    if failed > 0 {
        return Err(CliError::Runtime(format!(
            "{failed} of {} runs failed",
            outcomes.len()
        )));
    }
    Ok(())
}

pub fn compare(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let setup = setup(cfg)?;
    let sys = setup.problem.system();
    let schemes = schemes(cfg, sys.dim())?;
    let hs = cfg.step_sizes(1)?;
    prepare_out(cfg)?;

    let runs = batch(setup.states.len(), schemes.len(), hs.len());
    let stats: Vec<Result<EnergyErrorStats, String>> = runs
        .par_iter()
        .map(|run| {
            schemes[run.scheme]
                .1
                .integrate(
                    sys,
                    &setup.states[run.ic],
                    &step_config(hs[run.h], setup.stop),
                    cfg.steps,
                )
                .and_then(|traj| energy_stats(&traj))
                .map_err(|e| error_text(&e))
        })
        .collect();

    let mut csv_rows = Vec::with_capacity(runs.len());
    let mut table_rows = Vec::with_capacity(runs.len());
    for (run, result) in runs.iter().zip(&stats) {
        let label = &schemes[run.scheme].0;
        let (values, status) = match result {
            Ok(s) => (
                [s.max_abs_deviation, s.drift_slope, s.amplitude],
                "ok".to_string(),
            ),
            Err(e) => ([f64::NAN; 3], format!("error: {}", field(e))),
        };
        csv_rows.push(format!(
            "{label},{},{},{},{},{},{},{status}",
            run.ic,
            num(hs[run.h]),
            cfg.steps,
            num(values[0]),
            num(values[1]),
            num(values[2])
        ));
        let short = |v: f64| {
            if v.is_nan() {
                "-".to_string()
            } else {
                format!("{v:.6e}")
            }
        };
        table_rows.push(vec![
            label.clone(),
            run.ic.to_string(),
            format!("{}", hs[run.h]),
            short(values[0]),
            short(values[1]),
            short(values[2]),
            status,
        ]);
    }

    write_file(&setup.out.join("compare.csv"), |out| {
        writeln!(
            out,
            "scheme,ic,h,steps,max_abs_deviation,drift_slope,amplitude,status"
        )?;
        for row in &csv_rows {
            writeln!(out, "{row}")?;
        }
        Ok(())
    })?;
    print!(
        "{}",
        table(
            &[
                "scheme",
                "ic",
                "h",
                "max|dH|",
                "drift",
                "amplitude",
                "status"
            ],
            &table_rows
        )
    );

    if stats.iter().all(Result::is_err) {
        return Err(CliError::Runtime("every scheme failed".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct TuneRow {
    h: f64,
    #[serde(flatten)]
    outcome: TuneOutcome,
}

#[derive(Serialize)]
#[serde(untagged)]
enum TuneOutcome {
    Ok {
        beta_star: f64,
        gamma_star: f64,
        objective: f64,
        evaluations: usize,
        budget_exhausted: bool,
    },
    Failed {
        error: String,
    },
}

#[derive(Serialize)]
struct FitSummary {
    b: f64,
    c: f64,
    r_squared_beta: f64,
    r_squared_gamma: f64,
}

#[derive(Serialize)]
struct TuneSummary {
    problem: &'static str,
    q0: Vec<f64>,
    p0: Vec<f64>,
    steps: usize,
    results: Vec<TuneRow>,
    fit: Option<FitSummary>,
    fit_status: String,
}

pub fn tune_cmd(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let setup = setup(cfg)?;
    let sys = setup.problem.system();
    let z0 = single_state(&setup, "tune")?;
    let hs = cfg.step_sizes(1)?;
    let opts = cfg.tune_options()?;
    let steps = cfg.tune.steps.unwrap_or(cfg.steps);
    let regions = hs
        .iter()
        .map(|&h| cfg.tune_region(h))
        .collect::<Result<Vec<_>, _>>()?;
    prepare_out(cfg)?;

    // the tuner already spreads its grid over all cores
    let results: Vec<Result<TuneResult, String>> = hs
        .iter()
        .zip(&regions)
        .map(|(&h, region)| tune(sys, &z0, h, steps, region, &opts).map_err(|e| error_text(&e)))
        .collect();

    for (j, result) in results.iter().enumerate() {
        let path = setup.out.join(format!("tune_trace_h{j}.csv"));
        discard(&path);
        if let Ok(res) = result {
            write_file(&path, |out| {
                writeln!(out, "beta,gamma,objective")?;
                for p in &res.trace {
                    writeln!(out, "{},{},{}", num(p.beta), num(p.gamma), num(p.objective))?;
                }
                Ok(())
            })?;
        }
    }

    write_file(&setup.out.join("tune_results.csv"), |out| {
        writeln!(
            out,
            "h,beta_star,gamma_star,objective,evaluations,budget_exhausted,status"
        )?;
        for (h, result) in hs.iter().zip(&results) {
            match result {
                Ok(r) => writeln!(
                    out,
                    "{},{},{},{},{},{},ok",
                    num(*h),
                    num(r.beta_star),
                    num(r.gamma_star),
                    num(r.objective),
                    r.evaluations,
                    r.budget_exhausted
                )?,
                Err(e) => writeln!(out, "{},NaN,NaN,NaN,0,false,error: {}", num(*h), field(e))?,
            }
        }
        Ok(())
    })?;

    let successes: Vec<TuneResult> = results
        .iter()
        .filter_map(|r| r.as_ref().ok().cloned())
        .collect();
    let (fit, fit_status) = if successes.len() < 2 {
        (
            None,
            format!(
                "unavailable: {} successful step size(s), need 2",
                successes.len()
            ),
        )
    } else {
        match fit_scaling(&successes) {
            Ok(f) => (
                Some(FitSummary {
                    b: f.b,
                    c: f.c,
                    r_squared_beta: f.r_squared_beta,
                    r_squared_gamma: f.r_squared_gamma,
                }),
                "ok".to_string(),
            ),
            Err(e) => (None, format!("unavailable: {e}")),
        }
    };

    let mut table_rows = Vec::new();
    for (h, result) in hs.iter().zip(&results) {
        table_rows.push(match result {
            Ok(r) => vec![
                format!("{h}"),
                format!("{:.6e}", r.beta_star),
                format!("{:.6e}", r.gamma_star),
                format!("{:.3e}", r.objective),
                r.evaluations.to_string(),
            ],
            Err(e) => vec![
                format!("{h}"),
                "-".into(),
                "-".into(),
                "-".into(),
                format!("error: {e}"),
            ],
        });
    }
    print!(
        "{}",
        table(
            &["h", "beta*", "gamma*", "objective", "evaluations"],
            &table_rows
        )
    );
    match &fit {
        Some(f) => println!(
            "fit: beta* = {:.6e} h (R^2 {:.6}), gamma* = {:.6e} h (R^2 {:.6})",
            f.b, f.r_squared_beta, f.c, f.r_squared_gamma
        ),
        None => println!("fit: {fit_status}"),
    }

    let summary = TuneSummary {
        problem: setup.problem.name(),
        q0: z0.q().to_vec(),
        p0: z0.p().to_vec(),
        steps,
        results: hs
            .iter()
            .zip(&results)
            .map(|(&h, r)| TuneRow {
                h,
                outcome: match r {
                    Ok(r) => TuneOutcome::Ok {
                        beta_star: r.beta_star,
                        gamma_star: r.gamma_star,
                        objective: r.objective,
                        evaluations: r.evaluations,
                        budget_exhausted: r.budget_exhausted,
                    },
                    Err(e) => TuneOutcome::Failed { error: e.clone() },
                },
            })
            .collect(),
        fit,
        fit_status,
    };
    write_json(&setup.out.join("tune_summary.json"), &summary)?;

    if successes.is_empty() {
        return Err(CliError::Runtime(
            "tuning failed for every step size".into(),
        ));
    }
    Ok(())
}

#[derive(Serialize)]
struct OrderRow {
    scheme: String,
    #[serde(flatten)]
    outcome: OrderOutcome,
}

#[derive(Serialize)]
#[serde(untagged)]
enum OrderOutcome {
    Ok(OrderEstimate),
    Failed { error: String },
}

pub fn order(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let setup = setup(cfg)?;
    let sys = setup.problem.system();
    let z0 = single_state(&setup, "order")?;
    let schemes = schemes(cfg, sys.dim())?;
    let hs = cfg.step_sizes(2)?;
    if !(cfg.order.t_final.is_finite() && cfg.order.t_final > 0.0) {
        return Err(CliError::Usage(format!(
            "t_final {} must be positive",
            cfg.order.t_final
        )));
    }
    if hs.iter().any(|&h| h < 0.0) {
        return Err(CliError::Usage(
            "order estimation needs positive step sizes".into(),
        ));
    }
    let opts = OrderOptions {
        t_final: cfg.order.t_final,
        reference: cfg.order_reference(),
        stop: setup.stop,
        metric: cfg.order_metric(),
    };
    prepare_out(cfg)?;

    // estimate_order runs its step sizes in parallel
    let estimates: Vec<Result<OrderEstimate, String>> = schemes
        .iter()
        .map(|(_, scheme)| estimate_order(sys, &z0, scheme, &hs, &opts).map_err(|e| error_text(&e)))
        .collect();

    let mut table_rows = Vec::new();
    for ((label, _), est) in schemes.iter().zip(&estimates) {
        let path = setup.out.join(format!("order_{label}.csv"));
        discard(&path);
        match est {
            Ok(e) => {
                write_file(&path, |out| {
                    writeln!(out, "h,error")?;
                    for (h, err) in e.stepsizes.iter().zip(&e.global_errors) {
                        writeln!(out, "{},{}", num(*h), num(*err))?;
                    }
                    Ok(())
                })?;
                table_rows.push(vec![
                    label.clone(),
                    format!("{:.4}", e.slope),
                    format!("{:.6}", e.r_squared),
                    e.stepsizes.len().to_string(),
                ]);
            }
            Err(err) => table_rows.push(vec![
                label.clone(),
                "-".into(),
                "-".into(),
                format!("error: {err}"),
            ]),
        }
    }
    print!(
        "{}",
        table(&["scheme", "slope", "R^2", "points"], &table_rows)
    );

    let summary: Vec<OrderRow> = schemes
        .iter()
        .zip(&estimates)
        .map(|((label, _), est)| OrderRow {
            scheme: label.clone(),
            outcome: match est {
                Ok(e) => OrderOutcome::Ok(e.clone()),
                Err(error) => OrderOutcome::Failed {
                    error: error.clone(),
                },
            },
        })
        .collect();
    write_json(&setup.out.join("order_summary.json"), &summary)?;

    let failed = estimates.iter().filter(|e| e.is_err()).count();
    if failed > 0 {
        return Err(CliError::Runtime(format!(
            "order estimation failed for {failed} scheme(s)"
        )));
    }
    Ok(())
}
