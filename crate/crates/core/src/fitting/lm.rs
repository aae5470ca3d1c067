//! Levenberg–Marquardt damped least squares with analytic Jacobians.

use nalgebra::{DMatrix, DVector};

/// Model `y = f(x; p)` with its gradient in `p`.
pub trait Model {
    fn n_params(&self) -> usize;
    fn eval(&self, x: f64, p: &[f64]) -> f64;
    fn grad(&self, x: f64, p: &[f64], out: &mut [f64]);
}

#[derive(Clone, Copy, Debug)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Convergence threshold on the MINPACK gradient cosine.
    pub gtol: f64,
    /// Stop when a step changes every parameter by less than this (relative).
    pub xtol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iter: 2000, gtol: 1e-6, xtol: 1e-15 }
    }
}

#[derive(Clone, Debug)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    pub sum_sq: f64,
    pub iterations: usize,
    /// `max_j |J_j . r| / (|J_j| max(|r|, 1e-6 |y|))`.
    pub gradient_cosine: f64,
    pub converged: bool,
    /// Diagonal of `s^2 (J^T J)^-1`; `None` when singular.
    pub variance: Option<Vec<f64>>,
}

fn residuals<M: Model>(m: &M, x: &[f64], y: &[f64], p: &[f64]) -> DVector<f64> {
    DVector::from_iterator(x.len(), x.iter().zip(y).map(|(&xi, &yi)| m.eval(xi, p) - yi))
}

fn jacobian<M: Model>(m: &M, x: &[f64], p: &[f64]) -> DMatrix<f64> {
    let n = m.n_params();
    let mut jac = DMatrix::zeros(x.len(), n);
    let mut row = vec![0.0; n];
    for (i, &xi) in x.iter().enumerate() {
        m.grad(xi, p, &mut row);
        for (j, v) in row.iter().enumerate() {
            jac[(i, j)] = *v;
        }
    }
    jac
}

/// MINPACK gradient cosine, with the residual norm floored at `1e-6 |y|`
/// so that an exact fit (residual at rounding level) reads as converged.
fn gradient_cosine(jac: &DMatrix<f64>, r: &DVector<f64>, y_norm: f64) -> f64 {
    let rn = r.norm().max(1e-6 * y_norm);
    if rn == 0.0 {
        return 0.0;
    }
    let g = jac.tr_mul(r);
    (0..jac.ncols())
        .map(|j| {
            let cn = jac.column(j).norm();
            if cn == 0.0 {
                0.0
            } else {
                g[j].abs() / (cn * rn)
            }
        })
        .fold(0.0, f64::max)
}

pub fn levenberg_marquardt<M: Model>(m: &M, x: &[f64], y: &[f64], p0: &[f64], opts: &LmOptions) -> LmOutcome {
    let n = m.n_params();
    assert_eq!(p0.len(), n);
    let scale = y.iter().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE);
    let y_norm = scale.sqrt();
    let mut p = p0.to_vec();
    let mut r = residuals(m, x, y, &p);
    let mut ss = r.norm_squared();
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut jac = jacobian(m, x, &p);

    while iterations < opts.max_iter {
        iterations += 1;
        if ss <= 1e-30 * scale || gradient_cosine(&jac, &r, y_norm) < 1e-15 {
            break;
        }
        let jtj = jac.tr_mul(&jac);
        let g = jac.tr_mul(&r);
        let diag: Vec<f64> = (0..n).map(|j| jtj[(j, j)].max(1e-300)).collect();
        let mut accepted = false;
        let mut small_step = false;
        while lambda < 1e20 {
            let mut a = jtj.clone();
            for j in 0..n {
                a[(j, j)] += lambda * diag[j];
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let r_new = residuals(m, x, y, &trial);
            let ss_new = r_new.norm_squared();
            if ss_new.is_finite() && ss_new < ss {
                small_step = p.iter().zip(step.iter()).all(|(pi, si)| si.abs() <= opts.xtol * pi.abs().max(1e-300));
                p = trial;
                r = r_new;
                ss = ss_new;
                lambda = (lambda / 10.0).max(1e-15);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            break;
        }
        jac = jacobian(m, x, &p);
        if small_step {
            break;
        }
    }

    let gcos = gradient_cosine(&jac, &r, y_norm);
    let dof = x.len().saturating_sub(n).max(1) as f64;
    let variance = jac.tr_mul(&jac).try_inverse().map(|inv| {
        let s2 = ss / dof;
        (0..n).map(|j| (inv[(j, j)] * s2).max(0.0)).collect()
    });
    LmOutcome { params: p, sum_sq: ss, iterations, gradient_cosine: gcos, converged: gcos < opts.gtol, variance }
}

/// Central-difference Jacobian row, for checking analytic gradients.
pub fn finite_difference_grad<M: Model>(m: &M, x: f64, p: &[f64]) -> Vec<f64> {
    (0..p.len())
        .map(|j| {
            let h = if p[j] == 0.0 { 1e-6 } else { 1e-6 * p[j].abs() };
            let mut hi = p.to_vec();
            let mut lo = p.to_vec();
            hi[j] += h;
            lo[j] -= h;
            (m.eval(x, &hi) - m.eval(x, &lo)) / (2.0 * h)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Line;
    impl Model for Line {
        fn n_params(&self) -> usize {
            2
        }
        fn eval(&self, x: f64, p: &[f64]) -> f64 {
            p[0] + p[1] * x
        }
        fn grad(&self, x: f64, _p: &[f64], out: &mut [f64]) {
            out[0] = 1.0;
            out[1] = x;
        }
    }

    struct Gauss;
    impl Model for Gauss {
        fn n_params(&self) -> usize {
            2
        }
        fn eval(&self, x: f64, p: &[f64]) -> f64 {
            (-(x - p[0]).powi(2) / p[1]).exp()
        }
        fn grad(&self, x: f64, p: &[f64], out: &mut [f64]) {
            let f = self.eval(x, p);
            out[0] = f * 2.0 * (x - p[0]) / p[1];
            out[1] = f * (x - p[0]).powi(2) / (p[1] * p[1]);
        }
    }

    #[test]
    fn linear_least_squares_matches_normal_equations() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y = [1.1, 2.9, 5.2, 7.1, 8.8];
        let out = levenberg_marquardt(&Line, &x, &y, &[0.0, 0.0], &LmOptions::default());
        // closed-form slope/intercept
        let n = x.len() as f64;
        let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
        let sxx: f64 = x.iter().map(|v| v * v).sum();
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let icpt = (sy - slope * sx) / n;
        assert!((out.params[1] - slope).abs() < 1e-10);
        assert!((out.params[0] - icpt).abs() < 1e-10);
        assert!(out.converged);
    }

    #[test]
    fn nonlinear_exact_recovery() {
        let x: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let truth = [2.3, 0.7];
        let y: Vec<f64> = x.iter().map(|&xi| Gauss.eval(xi, &truth)).collect();
        let out = levenberg_marquardt(&Gauss, &x, &y, &[2.0, 1.0], &LmOptions::default());
        assert!((out.params[0] - 2.3).abs() < 1e-10 && (out.params[1] - 0.7).abs() < 1e-10);
        assert!(out.converged);
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let p = [2.3, 0.7];
        for x in [0.5, 2.0, 3.1] {
            let mut g = [0.0; 2];
            Gauss.grad(x, &p, &mut g);
            let fd = finite_difference_grad(&Gauss, x, &p);
            for j in 0..2 {
                assert!((g[j] - fd[j]).abs() <= 1e-6 * g[j].abs().max(1e-12));
            }
        }
    }
}
