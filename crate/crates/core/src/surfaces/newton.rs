use nalgebra::{DMatrix, DVector};

pub(crate) const MAX_ITER: usize = 50;
const MAX_HALVINGS: usize = 40;
const POLISH_STEPS: usize = 3;

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub residual: f64,
    pub converged: bool,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn eval_norm(f: &impl Fn(&[f64]) -> Option<Vec<f64>>, x: &[f64]) -> Option<f64> {
    f(x).map(|v| norm(&v)).filter(|r| r.is_finite())
}

fn backtrack(
    f: &impl Fn(&[f64]) -> Option<Vec<f64>>,
    x: &[f64],
    dir: &[f64],
    current: f64,
) -> Option<(Vec<f64>, f64)> {
    let mut lambda = 1.0;
    for _ in 0..MAX_HALVINGS {
        let trial: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a + lambda * d).collect();
        if let Some(r) = eval_norm(f, &trial) {
            if r < current {
                return Some((trial, r));
            }
        }
        lambda *= 0.5;
    }
    None
}

/// Damped Newton on a square system `F(x) = 0`. Singular or unproductive
/// Newton steps fall back to steepest descent on `|F|^2`.
pub(crate) fn solve(
    f: impl Fn(&[f64]) -> Option<Vec<f64>>,
    jacobian: impl Fn(&[f64]) -> Option<DMatrix<f64>>,
    start: Vec<f64>,
    tol: f64,
) -> Outcome {
    let mut x = start;
    let Some(mut fx) = f(&x).filter(|v| v.iter().all(|c| c.is_finite())) else {
        return Outcome {
            residual: f64::INFINITY,
            x,
            converged: false,
        };
    };
    let mut res = norm(&fx);
    for _ in 0..MAX_ITER {
        if res <= tol {
            break;
        }
        let Some(j) = jacobian(&x).filter(|j| j.iter().all(|c| c.is_finite())) else {
            break;
        };
        let rhs = DVector::from_column_slice(&fx);
        let newton = j
            .clone()
            .lu()
            .solve(&(-&rhs))
            .filter(|d| d.iter().all(|c| c.is_finite()))
            .map(|d| d.as_slice().to_vec());
        let mut step = newton.and_then(|d| backtrack(&f, &x, &d, res));
        if step.is_none() {
            let g = j.transpose() * &rhs;
            let jg = &j * &g;
            let denom = jg.norm_squared();
            if denom > 0.0 {
                let alpha = g.norm_squared() / denom;
                let d: Vec<f64> = g.iter().map(|c| -alpha * c).collect();
                step = backtrack(&f, &x, &d, res);
            }
        }
        let Some((next, _)) = step else {
            break;
        };
        x = next;
        match f(&x) {
            Some(v) => fx = v,
            None => break,
        }
        res = norm(&fx);
    }
    if res <= tol {
        for _ in 0..POLISH_STEPS {
            let Some(j) = jacobian(&x) else { break };
            let rhs = DVector::from_column_slice(&fx);
            let Some(d) = j.lu().solve(&(-&rhs)) else { break };
            let trial: Vec<f64> = x.iter().zip(d.iter()).map(|(a, c)| a + c).collect();
            match f(&trial) {
                Some(v) if norm(&v) < res => {
                    res = norm(&v);
                    fx = v;
                    x = trial;
                }
                _ => break,
            }
        }
    }
    Outcome {
        converged: res <= tol,
        residual: res,
        x,
    }
}

/// Central-difference Jacobian of `f` at `x`.
pub(crate) fn fd_jacobian(f: &impl Fn(&[f64]) -> Option<Vec<f64>>, x: &[f64]) -> Option<DMatrix<f64>> {
    let rows = f(x)?.len();
    let mut j = DMatrix::zeros(rows, x.len());
    for (col, &xc) in x.iter().enumerate() {
        let h = f64::EPSILON.cbrt() * xc.abs().max(1.0);
        let mut plus = x.to_vec();
        let mut minus = x.to_vec();
        plus[col] += h;
        minus[col] -= h;
        let (a, b) = (f(&plus)?, f(&minus)?);
        let width = plus[col] - minus[col];
        for row in 0..rows {
            j[(row, col)] = (a[row] - b[row]) / width;
        }
    }
    Some(j)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_a_circle_and_line() {
        let f = |x: &[f64]| Some(vec![x[0] * x[0] + x[1] * x[1] - 1.0, x[0] - x[1]]);
        let out = solve(f, |x| fd_jacobian(&f, x), vec![1.0, 0.2], 1e-12);
        assert!(out.converged);
        let h = 0.5f64.sqrt();
        assert!((out.x[0] - h).abs() < 1e-12 && (out.x[1] - h).abs() < 1e-12);
    }

    #[test]
    fn singular_start_uses_descent() {
        // Jacobian vanishes at the origin of the first component
        let f = |x: &[f64]| Some(vec![x[0] * x[0] - 0.25, x[1]]);
        let out = solve(f, |x| fd_jacobian(&f, x), vec![0.0, 1.0], 1e-12);
        assert!(out.residual < 0.25 + 1e-12);
    }

    #[test]
    fn polishes_past_the_tolerance() {
        let f = |x: &[f64]| Some(vec![x[0] * x[0] - 2.0]);
        let out = solve(f, |x| fd_jacobian(&f, x), vec![1.0], 1e-3);
        assert!((out.x[0] - 2f64.sqrt()).abs() <= 1e-14);
    }

    #[test]
    fn reports_failure_without_root() {
        let f = |x: &[f64]| Some(vec![x[0] * x[0] + 1.0, x[1]]);
        let out = solve(f, |x| fd_jacobian(&f, x), vec![0.3, 0.1], 1e-12);
        assert!(!out.converged);
        assert!(out.residual >= 1.0);
    }
}
