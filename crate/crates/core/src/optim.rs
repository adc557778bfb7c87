//! Derivative-free simplex minimization (Nelder-Mead).

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions<T> {
    /// Stop once `f_max - f_min <= rel_tol * (|f_min| + abs_floor)` across the simplex.
    pub rel_tol: T,
    pub abs_floor: T,
    pub max_evals: usize,
    /// Edge length of the initial simplex along each axis.
    pub initial_step: T,
}

impl<T: Scalar> Default for SimplexOptions<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-9),
            abs_floor: T::lit(1e-12),
            max_evals: 2000,
            initial_step: T::one(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult<T> {
    pub x: Vec<T>,
    pub value: T,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0`. Non-finite objective values are treated as `+inf`.
pub fn nelder_mead<T: Scalar>(
    mut f: impl FnMut(&[T]) -> T,
    x0: &[T],
    opts: &SimplexOptions<T>,
) -> SimplexResult<T> {
    let n = x0.len();
    assert!(n >= 1, "need at least one parameter");
    let mut evals = 0usize;
    let mut eval = |x: &[T], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            T::infinity()
        }
    };

    let mut simplex: Vec<Vec<T>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] = p[i] + opts.initial_step;
        simplex.push(p);
    }
    let mut values: Vec<T> = simplex.iter().map(|p| eval(p, &mut evals)).collect();

    let (alpha, gamma, rho, sigma) = (T::one(), T::lit(2.0), T::lit(0.5), T::lit(0.5));
    let mut converged = false;

    loop {
        // order vertices best -> worst
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
        simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        values = idx.iter().map(|&i| values[i]).collect();

        let best = values[0];
        let worst = values[n];
        if best.is_finite() && worst - best <= opts.rel_tol * (best.abs() + opts.abs_floor) {
            converged = true;
            break;
        }
        if evals >= opts.max_evals {
            break;
        }

        let centroid: Vec<T> = (0..n)
            .map(|j| simplex[..n].iter().map(|p| p[j]).sum::<T>() / T::of_usize(n))
            .collect();
        let along = |t: T| -> Vec<T> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(&c, &w)| c + t * (c - w))
                .collect()
        };

        let xr = along(alpha);
        let fr = eval(&xr, &mut evals);
        if fr < values[0] {
            let xe = along(gamma);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        // contraction: outside if the reflected point beats the worst
        let (xc, fc) = if fr < values[n] {
            let xc = along(rho);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = along(-rho);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < values[n].min(fr) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        // shrink toward the best vertex
        let x_best = simplex[0].clone();
        for i in 1..=n {
            let p: Vec<T> = x_best
                .iter()
                .zip(&simplex[i])
                .map(|(&b, &v)| b + sigma * (v - b))
                .collect();
            values[i] = eval(&p, &mut evals);
            simplex[i] = p;
        }
    }

    let (bi, _) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
        .expect("non-empty simplex");
    SimplexResult {
        x: simplex[bi].clone(),
        value: values[bi],
        evaluations: evals,
        converged,
    }
}
