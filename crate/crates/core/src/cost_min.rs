//! Minimum cost of producing a given output.
//!
//! The first-order conditions `w_i - lambda MP_i = 0`, `f(x) - y = 0` are
//! solved by damped Newton iteration. The iteration runs in logarithmic
//! coordinates (`ln x_i`, `ln lambda`) on the equivalent system
//! `ln lambda + ln MP_i - ln w_i = 0`, `ln f(x) - ln y = 0`, which keeps
//! inputs positive and is exactly linear for Cobb-Douglas technologies.
//! Convergence is judged on the residuals of the original system.

use serde::Serialize;
use thiserror::Error;

use crate::fnparse::EvalError;
use crate::linalg::solve_dense;
use crate::production::ProductionFunction;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("invalid problem: {0}")]
    InvalidInput(String),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("output {y} is not attainable along the input ray")]
    Infeasible { y: f64 },
    #[error("marginal product of input {index} is not positive at the iterate")]
    NonIncreasing { index: usize },
    #[error("step kept leaving the function's domain after {halvings} halvings")]
    DomainEscape { halvings: usize },
    #[error("Newton system is singular (no interior optimum)")]
    SingularSystem,
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Feasibility tolerance on `|f(x) - y|`, relative to `y`.
    pub tol_feas: f64,
    /// Tolerance on `|w_i - lambda MP_i|`, relative to the largest input price.
    pub tol_foc: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol_feas: 1e-10, tol_foc: 1e-10, max_iter: 100, max_halvings: 60 }
    }
}

/// A cost-minimizing input bundle for output `y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostSolution {
    pub y: f64,
    /// Conditional factor demands `phi_i(w, y)`.
    pub x: Vec<f64>,
    /// Multiplier on the output constraint.
    pub lambda: f64,
    /// `sum_i w_i x_i`
    pub cost: f64,
    pub iterations: usize,
}

/// Derivatives of the optimum with respect to the output level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSensitivity {
    pub dphi_dy: Vec<f64>,
    pub dlambda_dy: f64,
}

pub(crate) fn validate(f: &dyn ProductionFunction, w: &[f64], y: f64) -> Result<(), SolveError> {
    if w.len() != f.arity() {
        return Err(SolveError::InvalidInput(format!(
            "{} input prices for a function of {} inputs",
            w.len(),
            f.arity()
        )));
    }
    if w.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(SolveError::InvalidInput("input prices must be positive".into()));
    }
    if !y.is_finite() || y <= 0.0 {
        return Err(SolveError::InvalidInput(format!("output level must be positive, got {y}")));
    }
    Ok(())
}

pub fn minimize_cost<F: ProductionFunction + ?Sized>(
    f: &F,
    w: &[f64],
    y: f64,
    x0: Option<&[f64]>,
) -> Result<CostSolution, SolveError> {
    minimize_cost_with(f, w, y, x0, &SolverOptions::default())
}

pub fn minimize_cost_with<F: ProductionFunction + ?Sized>(
    f: &F,
    w: &[f64],
    y: f64,
    x0: Option<&[f64]>,
    opts: &SolverOptions,
) -> Result<CostSolution, SolveError> {
    let f = &f as &dyn ProductionFunction;
    validate(f, w, y)?;
    let n = w.len();
    let x_start = match x0 {
        Some(x) => {
            if x.len() != n || x.iter().any(|v| !v.is_finite() || *v <= 0.0) {
                return Err(SolveError::InvalidInput("initial guess must be positive".into()));
            }
            x.to_vec()
        }
        None => ray_guess(f, n, y)?,
    };
    let grad = f.gradient(&x_start)?;
    if let Some(index) = grad.iter().position(|g| *g <= 0.0 || !g.is_finite()) {
        return Err(SolveError::NonIncreasing { index });
    }
    let gg: f64 = grad.iter().map(|g| g * g).sum();
    let lambda0 = w.iter().zip(&grad).map(|(a, b)| a * b).sum::<f64>() / gg;

    let mut z: Vec<f64> = x_start.iter().map(|v| v.ln()).collect();
    z.push(if lambda0 > 0.0 { lambda0.ln() } else { 0.0 });
    let ln_w: Vec<f64> = w.iter().map(|v| v.ln()).collect();
    let w_max = w.iter().copied().fold(0.0, f64::max);

    let mut state = LogState::at(f, &z, &ln_w, y)?;
    for iteration in 0..=opts.max_iter {
        let (feas, foc) = state.original_residuals(w, y);
        if feas <= opts.tol_feas * y && foc <= opts.tol_foc * w_max {
            let lambda = z[n].exp();
            let cost = w.iter().zip(&state.x).map(|(a, b)| a * b).sum();
            return Ok(CostSolution { y, x: state.x, lambda, cost, iterations: iteration });
        }
        if iteration == opts.max_iter {
            return Err(SolveError::NonConvergence { iterations: iteration, residual: feas.max(foc) });
        }
        let jac = state.jacobian(f)?;
        let rhs: Vec<f64> = state.g.iter().map(|v| -v).collect();
        let step = solve_dense(&jac, &rhs).ok_or(SolveError::SingularSystem)?;

        let merit = state.merit();
        let mut t = 1.0;
        let mut halvings = 0;
        let mut saw_valid = false;
        loop {
            let trial: Vec<f64> = z.iter().zip(&step).map(|(a, d)| a + t * d).collect();
            match LogState::at(f, &trial, &ln_w, y) {
                Ok(next) => {
                    saw_valid = true;
                    if next.merit() < (1.0 - 1e-4 * t) * merit {
                        z = trial;
                        state = next;
                        break;
                    }
                }
                Err(SolveError::Eval(_)) | Err(SolveError::NonIncreasing { .. }) => {}
                Err(e) => return Err(e),
            }
            halvings += 1;
            if halvings > opts.max_halvings {
                if saw_valid {
                    let (feas, foc) = state.original_residuals(w, y);
                    return Err(SolveError::NonConvergence {
                        iterations: iteration + 1,
                        residual: feas.max(foc),
                    });
                }
                return Err(SolveError::DomainEscape { halvings });
            }
            t *= 0.5;
        }
    }
    unreachable!("loop returns on the final iteration")
}

/// Iterate in log coordinates with its residual vector.
struct LogState {
    x: Vec<f64>,
    lambda: f64,
    value: f64,
    grad: Vec<f64>,
    g: Vec<f64>,
}

impl LogState {
    fn at(f: &dyn ProductionFunction, z: &[f64], ln_w: &[f64], y: f64) -> Result<Self, SolveError> {
        let n = ln_w.len();
        let x: Vec<f64> = z[..n].iter().map(|v| v.exp()).collect();
        if x.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(SolveError::Eval(EvalError::Domain(crate::fnparse::DomainError::OutsideDomain(
                x.iter().copied().find(|v| !v.is_finite() || *v <= 0.0).unwrap_or(0.0),
            ))));
        }
        let value = f.value(&x)?;
        if !(value.is_finite() && value > 0.0) {
            return Err(SolveError::Eval(EvalError::Domain(crate::fnparse::DomainError::OutsideDomain(value))));
        }
        let grad = f.gradient(&x)?;
        if let Some(index) = grad.iter().position(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(SolveError::NonIncreasing { index });
        }
        let mu = z[n];
        let mut g: Vec<f64> = grad.iter().zip(ln_w).map(|(mp, lw)| mu + mp.ln() - lw).collect();
        g.push(value.ln() - y.ln());
        Ok(LogState { x, lambda: mu.exp(), value, grad, g })
    }

    fn merit(&self) -> f64 {
        self.g.iter().map(|v| v * v).sum()
    }

    fn original_residuals(&self, w: &[f64], y: f64) -> (f64, f64) {
        let feas = (self.value - y).abs();
        let foc = w
            .iter()
            .zip(&self.grad)
            .map(|(wi, mp)| (wi - self.lambda * mp).abs())
            .fold(0.0, f64::max);
        (feas, foc)
    }

    fn jacobian(&self, f: &dyn ProductionFunction) -> Result<Vec<Vec<f64>>, SolveError> {
        let n = self.x.len();
        let h = f.hessian(&self.x)?;
        let mut jac = vec![vec![0.0; n + 1]; n + 1];
        for i in 0..n {
            for j in 0..n {
                jac[i][j] = h[i][j] * self.x[j] / self.grad[i];
            }
            jac[i][n] = 1.0;
        }
        for j in 0..n {
            jac[n][j] = self.grad[j] * self.x[j] / self.value;
        }
        Ok(jac)
    }
}

/// Equal inputs `t (1, .., 1)` with `f = y`, found by bracketing and bisection on `ln t`.
fn ray_guess(f: &dyn ProductionFunction, n: usize, y: f64) -> Result<Vec<f64>, SolveError> {
    let at = |ln_t: f64| -> Result<f64, SolveError> { Ok(f.value(&vec![ln_t.exp(); n])? - y) };
    let (mut lo, mut hi) = (0.0_f64, 0.0_f64);
    let g0 = at(0.0)?;
    if g0 < 0.0 {
        while at(hi)? < 0.0 {
            hi += 1.0;
            if hi > 700.0 {
                return Err(SolveError::Infeasible { y });
            }
        }
    } else {
        while at(lo)? >= 0.0 {
            lo -= 1.0;
            if lo < -700.0 {
                return Err(SolveError::Infeasible { y });
            }
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if at(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(vec![(0.5 * (lo + hi)).exp(); n])
}

/// `dphi/dy` and `dlambda/dy` from the implicit-function theorem on the
/// first-order conditions:
///
/// ```text
/// [ -lambda H   -grad ] [ dx/dy      ]   [ 0 ]
/// [  grad^T      0    ] [ dlambda/dy ] = [ 1 ]
/// ```
pub fn output_sensitivity<F: ProductionFunction + ?Sized>(
    f: &F,
    solution: &CostSolution,
) -> Result<OutputSensitivity, SolveError> {
    let n = solution.x.len();
    let h = f.hessian(&solution.x)?;
    let grad = f.gradient(&solution.x)?;
    let mut m = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            m[i][j] = -solution.lambda * h[i][j];
        }
        m[i][n] = -grad[i];
        m[n][i] = grad[i];
    }
    let mut rhs = vec![0.0; n + 1];
    rhs[n] = 1.0;
    let d = solve_dense(&m, &rhs).ok_or(SolveError::SingularSystem)?;
    Ok(OutputSensitivity { dphi_dy: d[..n].to_vec(), dlambda_dy: d[n] })
}

/// `MC = dC/dy = sum_i w_i dphi_i/dy` along the expansion path.
pub fn marginal_cost<F: ProductionFunction + ?Sized>(f: &F, w: &[f64], y: f64) -> Result<f64, SolveError> {
    let solution = minimize_cost(f, w, y, None)?;
    let sens = output_sensitivity(f, &solution)?;
    Ok(w.iter().zip(&sens.dphi_dy).map(|(a, b)| a * b).sum())
}
