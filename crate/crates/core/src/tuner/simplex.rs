//! Two-parameter Nelder-Mead with an evaluation budget.

/// Outcome of a simplex run.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SimplexOutcome {
    pub best: [f64; 2],
    pub value: f64,
    pub converged: bool,
}

/// Minimises `f` from the triangle `start`. `f` must return a comparable
/// value for every point (failures as `+inf`). Stops once the largest vertex
/// distance from the best vertex is below `tol`, or when `f` has been called
/// `budget` times.
pub(crate) fn minimize<F>(mut f: F, start: [[f64; 2]; 3], tol: f64, budget: usize) -> SimplexOutcome
where
    F: FnMut([f64; 2]) -> f64,
{
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    let mut used = 0usize;
    let mut eval = |x: [f64; 2], used: &mut usize| {
        *used += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut pts: Vec<([f64; 2], f64)> = Vec::with_capacity(3);
    for x in start {
        if used >= budget {
            break;
        }
        let v = eval(x, &mut used);
        pts.push((x, v));
    }
    if pts.len() < 3 {
        let (best, value) = pts
            .iter()
            .copied()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((start[0], f64::INFINITY));
        return SimplexOutcome {
            best,
            value,
            converged: false,
        };
    }

    let lerp =
        |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];

    loop {
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diameter = pts[1..]
            .iter()
            .map(|(x, _)| ((x[0] - pts[0].0[0]).powi(2) + (x[1] - pts[0].0[1]).powi(2)).sqrt())
            .fold(0.0_f64, f64::max);
        if diameter < tol {
            return SimplexOutcome {
                best: pts[0].0,
                value: pts[0].1,
                converged: true,
            };
        }
        if used >= budget {
            return SimplexOutcome {
                best: pts[0].0,
                value: pts[0].1,
                converged: false,
            };
        }

        let centroid = lerp(pts[0].0, pts[1].0, 0.5);
        let (worst, f_worst) = pts[2];
        let reflected = lerp(centroid, worst, -REFLECT);
        let f_r = eval(reflected, &mut used);

        if f_r < pts[0].1 {
            if used >= budget {
                pts[2] = (reflected, f_r);
                continue;
            }
            let expanded = lerp(centroid, worst, -EXPAND);
            let f_e = eval(expanded, &mut used);
            pts[2] = if f_e < f_r {
                (expanded, f_e)
            } else {
                (reflected, f_r)
            };
        } else if f_r < pts[1].1 {
            pts[2] = (reflected, f_r);
        } else {
            if used >= budget {
                if f_r < f_worst {
                    pts[2] = (reflected, f_r);
                }
                continue;
            }
            // outside contraction when the reflection beat the worst vertex
            let (contracted, f_c) = if f_r < f_worst {
                let x = lerp(centroid, reflected, CONTRACT);
                (x, eval(x, &mut used))
            } else {
                let x = lerp(centroid, worst, CONTRACT);
                (x, eval(x, &mut used))
            };
            if f_c < f_worst.min(f_r) {
                pts[2] = (contracted, f_c);
            } else {
                let best = pts[0].0;
                for vertex in pts.iter_mut().skip(1) {
                    if used >= budget {
                        break;
                    }
                    let x = lerp(best, vertex.0, SHRINK);
                    *vertex = (x, eval(x, &mut used));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_minimum() {
        let f = |x: [f64; 2]| {
            (x[0] - 0.003).powi(2)
                + 4.0 * (x[1] + 0.001).powi(2)
                + 0.5 * (x[0] - 0.003) * (x[1] + 0.001)
        };
        let out = minimize(f, [[0.0, 0.0], [0.01, 0.0], [0.0, 0.01]], 1e-10, 10_000);
        assert!(out.converged);
        assert!((out.best[0] - 0.003).abs() < 1e-8);
        assert!((out.best[1] + 0.001).abs() < 1e-8);
    }

    #[test]
    fn respects_budget() {
        let mut calls = 0;
        let out = minimize(
            |x| {
                calls += 1;
                x[0].powi(2) + x[1].powi(2)
            },
            [[1.0, 1.0], [1.1, 1.0], [1.0, 1.1]],
            1e-300,
            40,
        );
        assert!(!out.converged);
        assert!(calls <= 40);
    }

    #[test]
    fn rosenbrock() {
        let f = |x: [f64; 2]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let out = minimize(f, [[-1.2, 1.0], [-1.0, 1.0], [-1.2, 1.2]], 1e-10, 20_000);
        assert!(
            (out.best[0] - 1.0).abs() < 1e-6 && (out.best[1] - 1.0).abs() < 1e-6,
            "{out:?}"
        );
    }
}
