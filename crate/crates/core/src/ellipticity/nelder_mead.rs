//! Derivative-free local minimization, used to polish sampled margins.

pub(crate) struct Options {
    pub max_evals: usize,
    pub f_tol: f64,
}

/// Standard Nelder–Mead with reflection 1, expansion 2, contraction ½ and
/// shrink ½. Returns the best vertex and its value.
pub(crate) fn minimize(
    f: &mut dyn FnMut(&[f64]) -> f64,
    start: &[f64],
    steps: &[f64],
    opts: &Options,
) -> (Vec<f64>, f64) {
    let n = start.len();
    if n == 0 {
        let v = f(start);
        return (Vec::new(), v);
    }
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += steps[i];
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();
    let mut evals = n + 1;

    let combine = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
    };

    while evals < opts.max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        if values[n] - values[0] <= opts.f_tol || values[0] == 0.0 {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|p| p[d]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let reflected = combine(&centroid, &worst, -1.0);
        let fr = f(&reflected);
        evals += 1;
        if fr < values[0] {
            let expanded = combine(&centroid, &worst, -2.0);
            let fe = f(&expanded);
            evals += 1;
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        let (candidate, fc) = if fr < values[n] {
            let c = combine(&centroid, &reflected, 0.5);
            let v = f(&c);
            (c, v)
        } else {
            let c = combine(&centroid, &worst, 0.5);
            let v = f(&c);
            (c, v)
        };
        evals += 1;
        if fc < values[n].min(fr) {
            simplex[n] = candidate;
            values[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=n {
            simplex[i] = combine(&best, &simplex[i], 0.5);
            values[i] = f(&simplex[i]);
        }
        evals += n;
    }
    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap();
    (simplex[best].clone(), values[best])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_minimum() {
        let mut f = |p: &[f64]| (p[0] - 1.0).powi(2) + 10.0 * (p[1] + 2.0).powi(2);
        let (x, v) = minimize(&mut f, &[0.0, 0.0], &[0.5, 0.5], &Options { max_evals: 2000, f_tol: 1e-20 });
        assert!(v < 1e-12 && (x[0] - 1.0).abs() < 1e-5 && (x[1] + 2.0).abs() < 1e-5);
    }

    #[test]
    fn finds_cone_zero() {
        // |a·p| has a kink at its zero set, the typical shape of |symbol|.
        let mut f = |p: &[f64]| (p[0].cos() - 2.0 * p[1].sin()).abs();
        let (_, v) = minimize(&mut f, &[0.3, 0.9], &[0.1, 0.1], &Options { max_evals: 4000, f_tol: 1e-18 });
        assert!(v < 1e-9, "{v}");
    }
}
