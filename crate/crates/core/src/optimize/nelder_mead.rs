//! Derivative-free maximization on an axis-aligned starting simplex.

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct NelderMeadResult {
    pub best: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    /// Spread of objective values over the simplex fell below the tolerance.
    pub converged: bool,
    /// Best value after every iteration.
    pub history: Vec<f64>,
}

/// Maximizes `f` starting from `start`, with initial vertices
/// `start + spread * e_i`. Stops once the objective values at the simplex
/// vertices differ by less than `tol`, or after `max_evals` evaluations.
/// NaN counts as the worst possible value.
pub fn nelder_mead<F>(mut f: F, start: &[f64], spread: f64, tol: f64, max_evals: usize) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = start.len();
    let mut evals = 0usize;
    // minimize the negated objective
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        let v = -f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut points: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut values: Vec<f64> = Vec::with_capacity(n + 1);
    if max_evals == 0 {
        return NelderMeadResult {
            best: start.to_vec(),
            value: f64::NAN,
            evals: 0,
            converged: false,
            history: Vec::new(),
        };
    }
    points.push(start.to_vec());
    values.push(eval(start, &mut evals));
    for i in 0..n {
        if evals >= max_evals {
            break;
        }
        let mut p = start.to_vec();
        p[i] += spread;
        values.push(eval(&p, &mut evals));
        points.push(p);
    }

    let mut history = Vec::new();
    let mut converged = false;
    if points.len() == n + 1 {
        loop {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            points = order.iter().map(|&i| points[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();
            history.push(-values[0]);

            if values[n] - values[0] < tol {
                converged = true;
                break;
            }
            if evals >= max_evals {
                break;
            }

            let mut centroid = vec![0.0; n];
            for p in &points[..n] {
                for (c, x) in centroid.iter_mut().zip(p) {
                    *c += x / n as f64;
                }
            }
            let along = |from: &[f64], to: &[f64], t: f64| -> Vec<f64> {
                from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
            };

            let worst = points[n].clone();
            let reflected = along(&centroid, &worst, -REFLECT);
            let fr = eval(&reflected, &mut evals);

            if fr < values[0] {
                if evals >= max_evals {
                    points[n] = reflected;
                    values[n] = fr;
                    continue;
                }
                let expanded = along(&centroid, &reflected, EXPAND);
                let fe = eval(&expanded, &mut evals);
                if fe < fr {
                    points[n] = expanded;
                    values[n] = fe;
                } else {
                    points[n] = reflected;
                    values[n] = fr;
                }
                continue;
            }
            if fr < values[n - 1] {
                points[n] = reflected;
                values[n] = fr;
                continue;
            }
            if evals >= max_evals {
                continue;
            }
            let (contracted, fc, accept) = if fr < values[n] {
                let c = along(&centroid, &reflected, CONTRACT);
                let fc = eval(&c, &mut evals);
                let ok = fc <= fr;
                (c, fc, ok)
            } else {
                let c = along(&centroid, &worst, CONTRACT);
                let fc = eval(&c, &mut evals);
                let ok = fc < values[n];
                (c, fc, ok)
            };
            if accept {
                points[n] = contracted;
                values[n] = fc;
                continue;
            }
            let best = points[0].clone();
            for i in 1..=n {
                if evals >= max_evals {
                    break;
                }
                points[i] = along(&best, &points[i], SHRINK);
                values[i] = eval(&points[i], &mut evals);
            }
        }
    }

    let (bi, bv) = values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    NelderMeadResult {
        best: points[bi].clone(),
        value: -bv,
        evals,
        converged,
        history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_origin_of_negative_norm() {
        let f = |x: &[f64]| -x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let r = nelder_mead(f, &[1.3, -0.7, 2.1], 0.3, 1e-9, 5000);
        assert!(r.converged);
        assert!(r.best.iter().all(|v| v.abs() < 1e-3), "{:?}", r.best);
    }

    #[test]
    fn constant_stops_after_initial_simplex() {
        let r = nelder_mead(|_| 4.0, &[0.0; 5], 0.3, 1e-4, 1000);
        assert!(r.converged);
        assert_eq!(r.evals, 6);
        assert_eq!(r.value, 4.0);
    }

    #[test]
    fn respects_eval_cap_and_is_monotone() {
        let f = |x: &[f64]| -(x[0] - 1.0).powi(2) - 10.0 * (x[1] + x[0] * x[0]).powi(2);
        let r = nelder_mead(f, &[0.0, 0.0], 0.3, 0.0, 40);
        assert!(r.evals <= 40);
        assert!(r.history.windows(2).all(|w| w[1] >= w[0]));
        assert!(r.value >= f(&[0.0, 0.0]));
    }

    #[test]
    fn nan_is_never_preferred() {
        let f = |x: &[f64]| if x[0] > 0.5 { f64::NAN } else { -(x[0] - 0.4).abs() };
        let r = nelder_mead(f, &[0.0], 0.3, 1e-10, 500);
        assert!((r.best[0] - 0.4).abs() < 1e-4);
    }
}
