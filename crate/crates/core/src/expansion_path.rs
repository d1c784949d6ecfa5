//! The least-cost expansion path `y -> phi(y)` and the product vectors
//! defined along it.
//!
//! `phi` is only known implicitly through the cost-minimization conditions,
//! so `dphi/dy` comes from a linear solve on the bordered first-order
//! system; [`path_point`] also differences `phi` across `y +- h` as an
//! independent check.

use serde::Serialize;
use thiserror::Error;

use crate::cost_min::{
    minimize_cost_with, output_sensitivity, CostSolution, OutputSensitivity, SolveError, SolverOptions,
};
use crate::product_vectors::{responsible_whole_product, whole_product, ProductVector};
use crate::production::ProductionFunction;
use crate::quadrature::{integrate, QuadError};

/// `|dphi_factor/dy|` below which the responsible-factor vector is undefined.
pub const ZERO_DERIVATIVE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("input index {index} out of range for {inputs} inputs")]
    IndexOutOfRange { index: usize, inputs: usize },
    #[error("dphi/dy of input {factor} is {value:e}; responsible-factor product undefined")]
    ZeroDerivative { factor: usize, value: f64 },
    #[error("demand for input {factor} is not increasing in output near y={y}")]
    NonMonotone { factor: usize, y: f64 },
    #[error("integrand component {component} behaves like l^{exponent:.3} near zero; not integrable")]
    NonIntegrable { component: usize, exponent: f64 },
    #[error("quadrature failed: {0}")]
    Quadrature(String),
}

/// One point on the expansion path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionPoint {
    pub y: f64,
    /// `phi(y)`
    pub x: Vec<f64>,
    /// `dphi_i/dy` from the implicit-function solve.
    pub dphi_dy: Vec<f64>,
    /// `dphi_i/dy` by central differences of re-solved optima.
    pub dphi_dy_fd: Vec<f64>,
    /// `sum_i w_i dphi_i/dy`
    pub mc: f64,
    pub lambda: f64,
    pub cost: f64,
    /// `MP_i` at `phi(y)`
    pub mp: Vec<f64>,
}

impl ExpansionPoint {
    /// Largest relative gap between the two `dphi/dy` routes.
    pub fn fd_discrepancy(&self) -> f64 {
        self.dphi_dy
            .iter()
            .zip(&self.dphi_dy_fd)
            .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }

    /// `sum_i MP_i dphi_i/dy`, identically one along the path.
    pub fn mp_dphi_sum(&self) -> f64 {
        self.mp.iter().zip(&self.dphi_dy).map(|(a, b)| a * b).sum()
    }

    pub fn mwp(&self) -> ProductVector {
        mwp_from(&self.dphi_dy)
    }

    pub fn whole_product(&self) -> ProductVector {
        whole_product(self.y, &self.x)
    }
}

fn mwp_from(dphi_dy: &[f64]) -> ProductVector {
    ProductVector::new(1.0, dphi_dy.iter().map(|d| -d).collect())
}

fn solve_at<F: ProductionFunction + ?Sized>(
    f: &F,
    w: &[f64],
    y: f64,
    x0: Option<&[f64]>,
) -> Result<(CostSolution, OutputSensitivity), PathError> {
    let solution = minimize_cost_with(f, w, y, x0, &SolverOptions::default())?;
    let sens = output_sensitivity(f, &solution)?;
    Ok((solution, sens))
}

/// Solves at `y` and cross-checks `dphi/dy` against central differences.
pub fn path_point<F: ProductionFunction + ?Sized>(f: &F, w: &[f64], y: f64) -> Result<ExpansionPoint, PathError> {
    path_point_from(f, w, y, None)
}

/// [`path_point`] with a warm-start input bundle.
pub fn path_point_from<F: ProductionFunction + ?Sized>(
    f: &F,
    w: &[f64],
    y: f64,
    x0: Option<&[f64]>,
) -> Result<ExpansionPoint, PathError> {
    let (solution, sens) = solve_at(f, w, y, x0)?;
    let h = 1e-5 * y;
    let up = minimize_cost_with(f, w, y + h, Some(&solution.x), &SolverOptions::default())?;
    let down = minimize_cost_with(f, w, y - h, Some(&solution.x), &SolverOptions::default())?;
    let dphi_dy_fd = up.x.iter().zip(&down.x).map(|(u, d)| (u - d) / (2.0 * h)).collect();
    let mp = f.gradient(&solution.x).map_err(SolveError::from)?;
    let mc = w.iter().zip(&sens.dphi_dy).map(|(a, b)| a * b).sum();
    Ok(ExpansionPoint {
        y,
        x: solution.x,
        dphi_dy: sens.dphi_dy,
        dphi_dy_fd,
        mc,
        lambda: solution.lambda,
        cost: solution.cost,
        mp,
    })
}

/// `p MP_i - w_i` for each input at the optimum for `y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarMpReport {
    pub y: f64,
    pub mc: f64,
    pub p_minus_mc: f64,
    pub residuals: Vec<f64>,
}

pub fn scalar_mp_condition<F: ProductionFunction + ?Sized>(
    f: &F,
    w: &[f64],
    p: f64,
    y: f64,
) -> Result<ScalarMpReport, PathError> {
    let point = path_point(f, w, y)?;
    Ok(scalar_mp_report(&point, w, p))
}

pub fn scalar_mp_report(point: &ExpansionPoint, w: &[f64], p: f64) -> ScalarMpReport {
    ScalarMpReport {
        y: point.y,
        mc: point.mc,
        p_minus_mc: p - point.mc,
        residuals: point.mp.iter().zip(w).map(|(mp, wi)| p * mp - wi).collect(),
    }
}

/// `MWP(y) = (1, -dphi_1/dy, .., -dphi_n/dy)`.
pub fn mwp<F: ProductionFunction + ?Sized>(f: &F, w: &[f64], y: f64) -> Result<ProductVector, PathError> {
    let (_, sens) = solve_at(f, w, y, None)?;
    Ok(mwp_from(&sens.dphi_dy))
}

/// Whole-product increment from `y0` to `y0 + delta_y`, per unit of output.
pub fn discrete_mwp<F: ProductionFunction + ?Sized>(
    f: &F,
    w: &[f64],
    y0: f64,
    delta_y: f64,
) -> Result<ProductVector, PathError> {
    if delta_y == 0.0 || !delta_y.is_finite() {
        return Err(PathError::InvalidArgument(format!("delta_y must be finite and non-zero, got {delta_y}")));
    }
    let base = minimize_cost_with(f, w, y0, None, &SolverOptions::default())?;
    let next = minimize_cost_with(f, w, y0 + delta_y, Some(&base.x), &SolverOptions::default())?;
    Ok(ProductVector::new(
        1.0,
        base.x.iter().zip(&next.x).map(|(a, b)| -(b - a) / delta_y).collect(),
    ))
}

fn responsible_from(dphi_dy: &[f64], factor: usize) -> Result<ProductVector, PathError> {
    if factor >= dphi_dy.len() {
        return Err(PathError::IndexOutOfRange { index: factor, inputs: dphi_dy.len() });
    }
    let d = dphi_dy[factor];
    if d.abs() < ZERO_DERIVATIVE {
        return Err(PathError::ZeroDerivative { factor, value: d });
    }
    let inputs = dphi_dy
        .iter()
        .enumerate()
        .map(|(i, v)| if i == factor { 0.0 } else { -v / d })
        .collect();
    Ok(ProductVector::new(1.0 / d, inputs))
}

/// Marginal whole product with input `factor` (zero-based) responsible:
/// `(1/d_f, .., -d_i/d_f, .., 0 at f, ..)` with `d = dphi/dy`.
pub fn mwp_responsible<F: ProductionFunction + ?Sized>(
    f: &F,
    w: &[f64],
    y: f64,
    factor: usize,
) -> Result<ProductVector, PathError> {
    if factor >= w.len() {
        return Err(PathError::IndexOutOfRange { index: factor, inputs: w.len() });
    }
    let (_, sens) = solve_at(f, w, y, None)?;
    responsible_from(&sens.dphi_dy, factor)
}

/// Result of integrating the responsible factor's marginal whole product.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResponsibleIntegral {
    /// Quadrature over `[lower_limit, L]` plus the extrapolated tail.
    pub integral: ProductVector,
    /// Whole product of the responsible factor at `L`, for comparison.
    pub endpoint: ProductVector,
    /// Output level at which the responsible input reaches `L`.
    pub y_at_limit: f64,
    pub lower_limit: f64,
    /// Power-law estimate of the integral over `(0, lower_limit)`.
    pub tail: ProductVector,
    pub evaluations: usize,
}

impl ResponsibleIntegral {
    pub fn max_abs_error(&self) -> f64 {
        self.integral.max_abs_diff(&self.endpoint).unwrap_or(f64::INFINITY)
    }
}

/// Integrates the responsible factor's marginal whole product over factor
/// levels `(0, l_max]`, which should reproduce its whole product at `l_max`.
///
/// Output levels are recovered from factor levels by inverting the
/// (monotone) factor demand. The integrand may be singular at zero; the
/// interval is cut at `eps` chosen from a power-law fit near zero so that
/// the neglected piece is below `abs_tol / 10`, and that piece is added
/// back from the fit.
pub fn integrate_responsible<F: ProductionFunction + ?Sized>(
    f: &F,
    w: &[f64],
    l_max: f64,
    factor: usize,
    abs_tol: f64,
) -> Result<ResponsibleIntegral, PathError> {
    let n = w.len();
    if factor >= n {
        return Err(PathError::IndexOutOfRange { index: factor, inputs: n });
    }
    if !(l_max.is_finite() && l_max >= 0.0) {
        return Err(PathError::InvalidArgument(format!("factor level must be non-negative, got {l_max}")));
    }
    if !(abs_tol.is_finite() && abs_tol > 0.0) {
        return Err(PathError::InvalidArgument(format!("abs_tol must be positive, got {abs_tol}")));
    }
    if l_max == 0.0 {
        let zero = ProductVector::zero(n);
        return Ok(ResponsibleIntegral {
            integral: zero.clone(),
            endpoint: zero.clone(),
            y_at_limit: 0.0,
            lower_limit: 0.0,
            tail: zero,
            evaluations: 0,
        });
    }

    let mut inverter = DemandInverter::new(f, w, factor);
    let top = inverter.invert(l_max)?;
    let endpoint = responsible_whole_product(&whole_product(top.y, &top.x), factor)
        .expect("factor index checked above");

    // Power-law fit of each component near zero from two probes.
    let probe_hi = l_max * 2f64.powi(-20);
    let probe_lo = 0.5 * probe_hi;
    let g_hi = inverter.integrand(probe_hi)?;
    let g_lo = inverter.integrand(probe_lo)?;
    let mut exponents = vec![0.0; n + 1];
    let mut eps = probe_lo;
    for c in 0..=n {
        let (a, b) = (g_lo[c], g_hi[c]);
        if a == 0.0 && b == 0.0 {
            continue;
        }
        let s = if a != 0.0 && b != 0.0 && a.signum() == b.signum() {
            (b / a).log2()
        } else {
            0.0
        };
        if s <= -1.0 {
            return Err(PathError::NonIntegrable { component: c, exponent: s });
        }
        exponents[c] = s;
        // tail(e) = |g(probe_lo)| probe_lo (e / probe_lo)^(s+1) / (s+1)
        let budget = 0.1 * abs_tol * (s + 1.0) / (a.abs() * probe_lo);
        if budget < 1.0 {
            eps = eps.min(probe_lo * budget.powf(1.0 / (s + 1.0)));
        }
    }

    let g_eps = inverter.integrand(eps)?;
    let tail: Vec<f64> = g_eps
        .iter()
        .zip(&exponents)
        .map(|(g, s)| g * eps / (s + 1.0))
        .collect();

    // Substituting l = e^t turns power-law behavior near zero into smooth
    // exponentials, so subdivision stays shallow.
    let quad = integrate(
        |t: f64| {
            let l = t.exp();
            inverter.integrand(l).map(|g| g.into_iter().map(|v| v * l).collect::<Vec<f64>>())
        },
        eps.ln(),
        l_max.ln(),
        0.5 * abs_tol,
        4000,
    )
    .map_err(|e| match e {
        QuadError::Integrand(inner) => inner,
        other => PathError::Quadrature(other.to_string()),
    })?;

    inverter.check_monotone(eps, l_max)?;

    let total: Vec<f64> = quad.value.iter().zip(&tail).map(|(q, t)| q + t).collect();
    Ok(ResponsibleIntegral {
        integral: ProductVector::from_components(&total).expect("n+1 components"),
        endpoint,
        y_at_limit: top.y,
        lower_limit: eps,
        tail: ProductVector::from_components(&tail).expect("n+1 components"),
        evaluations: quad.evaluations + inverter.solves,
    })
}

struct Solved {
    ln_level: f64,
    y: f64,
    x: Vec<f64>,
    dphi_dy: Vec<f64>,
}

/// Inverts `y -> phi_factor(y)` with a bracketed Newton iteration on
/// `ln y`, warm-started from the nearest previously solved level.
struct DemandInverter<'a, F: ?Sized> {
    f: &'a F,
    w: &'a [f64],
    factor: usize,
    cache: Vec<Solved>,
    solves: usize,
}

impl<'a, F: ProductionFunction + ?Sized> DemandInverter<'a, F> {
    fn new(f: &'a F, w: &'a [f64], factor: usize) -> Self {
        DemandInverter { f, w, factor, cache: Vec::new(), solves: 0 }
    }

    fn integrand(&mut self, level: f64) -> Result<Vec<f64>, PathError> {
        let s = self.invert(level)?;
        Ok(responsible_from(&s.dphi_dy, self.factor)?.components())
    }

    fn nearest(&self, ln_level: f64) -> Option<&Solved> {
        let idx = self.cache.partition_point(|s| s.ln_level < ln_level);
        let before = idx.checked_sub(1).and_then(|i| self.cache.get(i));
        let after = self.cache.get(idx);
        match (before, after) {
            (Some(b), Some(a)) => {
                if ln_level - b.ln_level <= a.ln_level - ln_level {
                    Some(b)
                } else {
                    Some(a)
                }
            }
            (b, a) => b.or(a),
        }
    }

    fn solve(&mut self, ln_y: f64, x0: Option<Vec<f64>>) -> Result<Solved, PathError> {
        self.solves += 1;
        let y = ln_y.exp();
        let (solution, sens) = solve_at(self.f, self.w, y, x0.as_deref())?;
        let level = solution.x[self.factor];
        Ok(Solved { ln_level: level.ln(), y, x: solution.x, dphi_dy: sens.dphi_dy })
    }

    fn invert(&mut self, level: f64) -> Result<Solved, PathError> {
        let target = level.ln();
        let (mut ln_y, mut x0) = match self.nearest(target) {
            Some(s) => {
                let elasticity = s.y * s.dphi_dy[self.factor] / s.ln_level.exp();
                let guess = if elasticity > 0.0 {
                    s.y.ln() + ((target - s.ln_level) / elasticity).clamp(-20.0, 20.0)
                } else {
                    s.y.ln()
                };
                (guess, Some(s.x.clone()))
            }
            None => (0.0, None),
        };
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for _ in 0..200 {
            let s = self.solve(ln_y, x0.take())?;
            let gap = s.ln_level - target;
            let d = s.dphi_dy[self.factor];
            if d <= 0.0 {
                return Err(PathError::NonMonotone { factor: self.factor, y: s.y });
            }
            if gap.abs() <= 1e-13 || (hi - lo) <= 1e-15 * ln_y.abs().max(1.0) {
                let idx = self.cache.partition_point(|c| c.ln_level < s.ln_level);
                self.cache.insert(
                    idx,
                    Solved { ln_level: s.ln_level, y: s.y, x: s.x.clone(), dphi_dy: s.dphi_dy.clone() },
                );
                return Ok(s);
            }
            if gap < 0.0 {
                lo = ln_y;
            } else {
                hi = ln_y;
            }
            let elasticity = s.y * d / s.ln_level.exp();
            let mut next = ln_y - (gap / elasticity).clamp(-5.0, 5.0);
            if !(next > lo && next < hi) {
                next = if lo.is_finite() && hi.is_finite() {
                    0.5 * (lo + hi)
                } else if lo.is_finite() {
                    lo + 5.0
                } else {
                    hi - 5.0
                };
            }
            ln_y = next;
            x0 = Some(s.x);
        }
        Err(PathError::Solve(SolveError::NonConvergence { iterations: 200, residual: f64::NAN }))
    }

    /// Factor demand must rise with output across the integration range.
    fn check_monotone(&mut self, from: f64, to: f64) -> Result<(), PathError> {
        let steps = 16;
        let lo = self.invert(from)?;
        let hi = self.invert(to)?;
        let mut prev_level = f64::NEG_INFINITY;
        let mut x0 = Some(lo.x.clone());
        for k in 0..=steps {
            let ln_y = lo.y.ln() + (hi.y.ln() - lo.y.ln()) * k as f64 / steps as f64;
            let s = self.solve(ln_y, x0.take())?;
            if s.ln_level <= prev_level {
                return Err(PathError::NonMonotone { factor: self.factor, y: s.y });
            }
            prev_level = s.ln_level;
            x0 = Some(s.x);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cobb_douglas::{cd_cost_point, cd_wp_l, CobbDouglasParams, CAPITAL, LABOR};
    use crate::fnparse::parse;
    use crate::product_vectors::{value, PriceSystem};
    use approx::assert_relative_eq;

    fn crs() -> crate::fnparse::Expr {
        parse("1*x1^0.5*x2^0.5", 2).unwrap()
    }

    #[test]
    fn path_point_crs() {
        let pt = path_point(&crs(), &[1.0, 1.0], 3.0).unwrap();
        for i in 0..2 {
            assert_relative_eq!(pt.x[i], 3.0, max_relative = 1e-12);
            assert_relative_eq!(pt.dphi_dy[i], 1.0, max_relative = 1e-12);
            assert_relative_eq!(pt.mp[i], 0.5, max_relative = 1e-12);
        }
        assert_relative_eq!(pt.mc, 2.0, max_relative = 1e-12);
        assert!(pt.fd_discrepancy() < 1e-5);
        // MP_L is 0.5 while 1/(dphi_L/dy) is 1
        assert_relative_eq!(1.0 / pt.dphi_dy[LABOR], 1.0, max_relative = 1e-12);
        assert!((pt.mp[LABOR] - 1.0 / pt.dphi_dy[LABOR]).abs() > 0.4);
    }

    #[test]
    fn mp_constant_along_crs_path() {
        let f = parse("2*x1^0.3*x2^0.7", 2).unwrap();
        let w = [1.3, 0.6];
        let first = path_point(&f, &w, 0.5).unwrap();
        for y in [1.0, 4.0, 9.0] {
            let pt = path_point(&f, &w, y).unwrap();
            for i in 0..2 {
                assert_relative_eq!(pt.mp[i], first.mp[i], max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn scalar_condition_examples() {
        let r = scalar_mp_condition(&crs(), &[1.0, 1.0], 2.0, 1.7).unwrap();
        assert!(r.residuals.iter().all(|v| v.abs() < 1e-10));
        let r = scalar_mp_condition(&crs(), &[1.0, 1.0], 3.0, 1.7).unwrap();
        assert!(r.residuals.iter().all(|v| (v - 0.5).abs() < 1e-10));
        let linear = parse("x1", 1).unwrap();
        let r = scalar_mp_condition(&linear, &[1.0], 1.0, 2.0).unwrap();
        assert!(r.residuals[0].abs() < 1e-12);
    }

    #[test]
    fn mwp_examples() {
        let v = mwp(&crs(), &[1.0, 1.0], 1.0).unwrap();
        assert!(v.max_abs_diff(&ProductVector::new(1.0, vec![-1.0, -1.0])).unwrap() < 1e-12);
        let p2 = PriceSystem::new(2.0, vec![1.0, 1.0]).unwrap();
        let p3 = PriceSystem::new(3.0, vec![1.0, 1.0]).unwrap();
        assert!(value(&p2, &v).unwrap().abs() < 1e-12);
        assert!((value(&p3, &v).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn discrete_mwp_examples() {
        let v = discrete_mwp(&crs(), &[1.0, 1.0], 1.0, 1.0).unwrap();
        assert!(v.max_abs_diff(&ProductVector::new(1.0, vec![-1.0, -1.0])).unwrap() < 1e-10);
        let p2 = PriceSystem::new(2.0, vec![1.0, 1.0]).unwrap();
        assert!(value(&p2, &v).unwrap().abs() < 1e-10);
        let drs = parse("x1^0.25*x2^0.25", 2).unwrap();
        let fine = discrete_mwp(&drs, &[1.0, 1.0], 1.0, 1e-4).unwrap();
        let exact = mwp(&drs, &[1.0, 1.0], 1.0).unwrap();
        assert!(fine.max_abs_diff(&exact).unwrap() < 1e-3);
        assert!(matches!(discrete_mwp(&drs, &[1.0, 1.0], 1.0, 0.0), Err(PathError::InvalidArgument(_))));
    }

    #[test]
    fn responsible_examples() {
        let w = [1.0, 1.0];
        let prices = PriceSystem::new(2.0, vec![1.0, 1.0]).unwrap();
        let l = mwp_responsible(&crs(), &w, 1.0, LABOR).unwrap();
        assert!(l.max_abs_diff(&ProductVector::new(1.0, vec![-1.0, 0.0])).unwrap() < 1e-12);
        assert!((value(&prices, &l).unwrap() - 1.0).abs() < 1e-12);
        let k = mwp_responsible(&crs(), &w, 1.0, CAPITAL).unwrap();
        assert!(k.max_abs_diff(&ProductVector::new(1.0, vec![0.0, -1.0])).unwrap() < 1e-12);
        assert!((value(&prices, &k).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(
            mwp_responsible(&crs(), &w, 1.0, 2),
            Err(PathError::IndexOutOfRange { index: 2, inputs: 2 })
        ));
    }

    #[test]
    fn zero_derivative_is_reported() {
        assert!(matches!(
            responsible_from(&[1.0, 0.0], 1),
            Err(PathError::ZeroDerivative { factor: 1, .. })
        ));
    }

    #[test]
    fn responsible_value_identity() {
        let f = parse("x1^0.3*x2^0.45", 2).unwrap();
        let w = [1.4, 0.8];
        let y = 1.9;
        let pt = path_point(&f, &w, y).unwrap();
        for p in [1.0, pt.mc, 4.0] {
            let prices = PriceSystem::new(p, w.to_vec()).unwrap();
            for factor in 0..2 {
                let v = value(&prices, &responsible_from(&pt.dphi_dy, factor).unwrap()).unwrap();
                let expected = w[factor] + (p - pt.mc) / pt.dphi_dy[factor];
                assert!((v - expected).abs() < 1e-10 * (1.0 + expected.abs()));
            }
        }
    }

    #[test]
    fn integral_crs() {
        let r = integrate_responsible(&crs(), &[1.0, 1.0], 2.0, LABOR, 1e-8).unwrap();
        let exact = ProductVector::new(2.0, vec![-2.0, 0.0]);
        assert!(r.integral.max_abs_diff(&exact).unwrap() < 1e-8, "{:?}", r.integral);
        assert!(r.endpoint.max_abs_diff(&exact).unwrap() < 1e-10);
    }

    #[test]
    fn integral_of_empty_range() {
        let r = integrate_responsible(&crs(), &[1.0, 1.0], 0.0, LABOR, 1e-8).unwrap();
        assert_eq!(r.integral, ProductVector::zero(2));
    }

    #[test]
    fn integral_decreasing_returns_with_singular_endpoint() {
        let params = CobbDouglasParams::new(1.0, 0.25, 0.25).unwrap();
        let f = parse(&params.to_expression(), 2).unwrap();
        let r = integrate_responsible(&f, &[1.0, 1.0], 1.0, LABOR, 1e-8).unwrap();
        let exact = cd_wp_l(&params, 1.0, 1.0, 1.0).unwrap();
        assert!(r.integral.max_abs_diff(&exact).unwrap() < 1e-6, "{:?} vs {:?}", r.integral, exact);
        assert!(r.lower_limit < 1e-10);
    }

    #[test]
    fn integral_capital_responsible() {
        let params = CobbDouglasParams::new(1.3, 0.4, 0.35).unwrap();
        let (r, w) = (0.9, 1.2);
        let res = integrate_responsible(&params, &[r, w], 1.5, CAPITAL, 1e-8).unwrap();
        // capital level 1.5 fixes labor at K / k and output at A K^a L^b
        let k = params.a * w / (params.b * r);
        let labor = 1.5 / k;
        let exact = ProductVector::new(params.output(1.5, labor), vec![0.0, -labor]);
        assert!(res.integral.max_abs_diff(&exact).unwrap() < 1e-6);
        let at = cd_cost_point(&params, r, w, res.y_at_limit).unwrap();
        assert_relative_eq!(at.capital, 1.5, max_relative = 1e-10);
    }
}
