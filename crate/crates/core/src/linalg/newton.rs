use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Damped Newton with a forward-difference Jacobian and a halving line search on `‖F‖`.
/// Only returns `Ok` when `‖F(x)‖ ≤ tol`.
pub fn newton_solve<F>(f: F, x0: &[f64], tol: f64, max_iter: usize) -> Result<NewtonOutcome>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut res = norm(&fx);
    for iterations in 0..=max_iter {
        if res <= tol {
            return Ok(NewtonOutcome {
                x,
                residual_norm: res,
                iterations,
            });
        }
        if iterations == max_iter {
            break;
        }
        let mut jac = DMatrix::<f64>::zeros(fx.len(), n);
        for k in 0..n {
            let h = 1e-7 * (1.0 + x[k].abs());
            let mut xh = x.clone();
            xh[k] += h;
            let fh = f(&xh);
            for (row, (a, b)) in fh.iter().zip(&fx).enumerate() {
                jac[(row, k)] = (a - b) / h;
            }
        }
        let rhs = -DVector::from_vec(fx.clone());
        let step = jac.lu().solve(&rhs).ok_or(Error::SingularJacobian)?;
        if !step.iter().all(|s| s.is_finite()) {
            return Err(Error::SingularJacobian);
        }

        let mut damping = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a + damping * s).collect();
            let ft = f(&trial);
            let rt = norm(&ft);
            if rt.is_finite() && rt < res {
                x = trial;
                fx = ft;
                res = rt;
                accepted = true;
                break;
            }
            damping *= 0.5;
        }
        if !accepted {
            return Err(Error::NoDecrease(res));
        }
    }
    Err(Error::NoConvergence {
        method: "newton",
        iterations: max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_square_root() {
        let out = newton_solve(|x| vec![x[0] * x[0] - 4.0], &[3.0], 1e-10, 50).unwrap();
        assert!((out.x[0] - 2.0).abs() < 1e-10);
        assert!(out.residual_norm <= 1e-10);
    }

    #[test]
    fn linear_system_in_one_step() {
        let f = |x: &[f64]| vec![2.0 * x[0] + x[1] - 3.0, x[0] - x[1]];
        let out = newton_solve(f, &[10.0, -4.0], 1e-6, 10).unwrap();
        assert_eq!(out.iterations, 1);
        assert!((out.x[0] - 1.0).abs() < 1e-6 && (out.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn failures_are_errors() {
        // x² + 1 has no real root: the line search eventually stalls.
        let err = newton_solve(|x| vec![x[0] * x[0] + 1.0], &[0.5], 1e-10, 100).unwrap_err();
        assert!(matches!(
            err,
            Error::NoDecrease(_) | Error::SingularJacobian | Error::NoConvergence { .. }
        ));
        let err = newton_solve(|x| vec![x[0] * x[0] - 4.0], &[3.0], 1e-10, 1).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. }));
    }
}
