//! Closed forms for `Q = A K^a L^b` with rental `r` and wage `w`.
//!
//! These serve as a fast path and as ground truth for the numerical
//! solver. Inputs are ordered `(K, L)`; labor is input index 1.

use serde::Serialize;
use thiserror::Error;

use crate::fnparse::EvalError;
use crate::product_vectors::ProductVector;
use crate::production::ProductionFunction;

pub const CAPITAL: usize = 0;
pub const LABOR: usize = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CobbDouglasError {
    #[error("Cobb-Douglas parameters must be positive and finite (A={scale}, a={a}, b={b})")]
    InvalidParams { scale: f64, a: f64, b: f64 },
    #[error("prices must be positive and finite")]
    InvalidPrices,
    #[error("labor level must be non-negative, got {0}")]
    NegativeLabor(f64),
    #[error("marginal whole product is singular at L=0 when a+b < 1")]
    SingularAtZero,
    #[error("condition is constant in L under constant returns; no unique solution")]
    ConstantReturns,
    #[error("no root of the condition found in the search bracket")]
    NoRoot,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CobbDouglasParams {
    pub scale: f64,
    pub a: f64,
    pub b: f64,
}

impl CobbDouglasParams {
    pub fn new(scale: f64, a: f64, b: f64) -> Result<Self, CobbDouglasError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(scale) && ok(a) && ok(b)) {
            return Err(CobbDouglasError::InvalidParams { scale, a, b });
        }
        Ok(CobbDouglasParams { scale, a, b })
    }

    pub fn returns_to_scale(&self) -> f64 {
        self.a + self.b
    }

    pub fn output(&self, capital: f64, labor: f64) -> f64 {
        self.scale * capital.powf(self.a) * labor.powf(self.b)
    }

    /// Text form accepted by the expression parser (`x1` = K, `x2` = L).
    pub fn to_expression(&self) -> String {
        format!("{}*x1^{}*x2^{}", self.scale, self.a, self.b)
    }
}

fn check_prices(prices: &[f64]) -> Result<(), CobbDouglasError> {
    if prices.iter().all(|p| p.is_finite() && *p > 0.0) {
        Ok(())
    } else {
        Err(CobbDouglasError::InvalidPrices)
    }
}

impl ProductionFunction for CobbDouglasParams {
    fn arity(&self) -> usize {
        2
    }

    fn value(&self, x: &[f64]) -> Result<f64, EvalError> {
        check_inputs(x)?;
        Ok(self.output(x[0], x[1]))
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        check_inputs(x)?;
        let q = self.output(x[0], x[1]);
        Ok(vec![self.a * q / x[0], self.b * q / x[1]])
    }

    fn hessian(&self, x: &[f64]) -> Result<Vec<Vec<f64>>, EvalError> {
        check_inputs(x)?;
        let (k, l) = (x[0], x[1]);
        let q = self.output(k, l);
        let (a, b) = (self.a, self.b);
        let kl = a * b * q / (k * l);
        Ok(vec![
            vec![a * (a - 1.0) * q / (k * k), kl],
            vec![kl, b * (b - 1.0) * q / (l * l)],
        ])
    }
}

fn check_inputs(x: &[f64]) -> Result<(), EvalError> {
    use crate::fnparse::DomainError;
    if x.len() != 2 {
        return Err(EvalError::DimensionMismatch { expected: 2, got: x.len() });
    }
    if let Some(v) = x.iter().find(|v| **v <= 0.0 || !v.is_finite()) {
        return Err(EvalError::Domain(DomainError::OutsideDomain(*v)));
    }
    Ok(())
}

/// Capital-labor ratio `K/L = a w / (b r)` along the least-cost expansion path.
pub fn cd_expansion_ratio(params: &CobbDouglasParams, r: f64, w: f64) -> Result<f64, CobbDouglasError> {
    check_prices(&[r, w])?;
    Ok(params.a * w / (params.b * r))
}

/// Whole product of labor as a function of `L`: `(A k^a L^(a+b), -k L, 0)`.
pub fn cd_wp_l(params: &CobbDouglasParams, r: f64, w: f64, labor: f64) -> Result<ProductVector, CobbDouglasError> {
    if labor < 0.0 {
        return Err(CobbDouglasError::NegativeLabor(labor));
    }
    let k = cd_expansion_ratio(params, r, w)?;
    let q = params.scale * k.powf(params.a) * labor.powf(params.returns_to_scale());
    Ok(ProductVector::new(q, vec![-k * labor, 0.0]))
}

/// Marginal whole product of labor: `((a+b) A k^a L^(a+b-1), -k, 0)`.
pub fn cd_mwp_l(params: &CobbDouglasParams, r: f64, w: f64, labor: f64) -> Result<ProductVector, CobbDouglasError> {
    if labor < 0.0 {
        return Err(CobbDouglasError::NegativeLabor(labor));
    }
    let s = params.returns_to_scale();
    if labor == 0.0 && s < 1.0 {
        return Err(CobbDouglasError::SingularAtZero);
    }
    let k = cd_expansion_ratio(params, r, w)?;
    let dq = s * params.scale * k.powf(params.a) * labor.powf(s - 1.0);
    Ok(ProductVector::new(dq, vec![-k, 0.0]))
}

/// Cost-minimizing quantities at output `y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CdCostPoint {
    pub y: f64,
    pub capital: f64,
    pub labor: f64,
    pub cost: f64,
    /// `dC/dy`, equal to the cost-minimization multiplier.
    pub marginal_cost: f64,
    /// `(dK/dy, dL/dy)` along the expansion path.
    pub dphi_dy: [f64; 2],
    /// `(MP_K, MP_L)` at the optimum.
    pub marginal_products: [f64; 2],
}

impl CdCostPoint {
    /// `(1, -dK/dy, -dL/dy)`.
    pub fn mwp(&self) -> ProductVector {
        ProductVector::new(1.0, vec![-self.dphi_dy[0], -self.dphi_dy[1]])
    }

    /// Marginal whole product with `factor` responsible.
    pub fn mwp_responsible(&self, factor: usize) -> ProductVector {
        let d = self.dphi_dy[factor];
        let mut inputs: Vec<f64> = self.dphi_dy.iter().map(|v| -v / d).collect();
        inputs[factor] = 0.0;
        ProductVector::new(1.0 / d, inputs)
    }
}

/// Conditional factor demands, cost and marginal cost at output `y`.
///
/// `L = (y / (A k^a))^(1/(a+b))`, `K = k L`, and since `C(y)` is
/// proportional to `y^(1/(a+b))`, `MC = C / ((a+b) y)` and
/// `dx_i/dy = x_i / ((a+b) y)`.
pub fn cd_cost_point(params: &CobbDouglasParams, r: f64, w: f64, y: f64) -> Result<CdCostPoint, CobbDouglasError> {
    let k = cd_expansion_ratio(params, r, w)?;
    let s = params.returns_to_scale();
    let labor = (y / (params.scale * k.powf(params.a))).powf(1.0 / s);
    let capital = k * labor;
    let cost = r * capital + w * labor;
    Ok(CdCostPoint {
        y,
        capital,
        labor,
        cost,
        marginal_cost: cost / (s * y),
        dphi_dy: [capital / (s * y), labor / (s * y)],
        marginal_products: [params.a * y / capital, params.b * y / labor],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarIdentities {
    pub labor: f64,
    pub capital: f64,
    pub output: f64,
    /// `p MP_L`
    pub p_mp_l: f64,
    /// `P . MWP_L`
    pub value_mwp_l: f64,
    /// `(b P.MWP_L + a w) / (a + b)`, which equals `p MP_L`.
    pub converted_p_mp_l: f64,
    /// `K MP_K`
    pub capital_share: f64,
    /// `L MP_L`
    pub labor_share: f64,
    /// `(a + b) Q`
    pub scaled_output: f64,
}

impl ScalarIdentities {
    pub fn conversion_gap(&self) -> f64 {
        self.p_mp_l - self.converted_p_mp_l
    }

    pub fn exhaustion_gap(&self) -> f64 {
        self.capital_share + self.labor_share - self.scaled_output
    }
}

/// Scalar and vectorial labor valuations at labor level `L` on the
/// expansion path, plus the factor shares `K MP_K + L MP_L`.
pub fn cd_scalar_identities(
    params: &CobbDouglasParams,
    p: f64,
    r: f64,
    w: f64,
    labor: f64,
) -> Result<ScalarIdentities, CobbDouglasError> {
    if labor <= 0.0 {
        return Err(CobbDouglasError::NegativeLabor(labor));
    }
    let k = cd_expansion_ratio(params, r, w)?;
    let capital = k * labor;
    let output = params.output(capital, labor);
    let mp_k = params.a * params.scale * capital.powf(params.a - 1.0) * labor.powf(params.b);
    let mp_l = params.b * params.scale * capital.powf(params.a) * labor.powf(params.b - 1.0);
    let mwp = cd_mwp_l(params, r, w, labor)?;
    let value_mwp_l = p * mwp.output + r * mwp.inputs[0];
    let s = params.returns_to_scale();
    Ok(ScalarIdentities {
        labor,
        capital,
        output,
        p_mp_l: p * mp_l,
        value_mwp_l,
        converted_p_mp_l: (params.b * value_mwp_l + params.a * w) / s,
        capital_share: capital * mp_k,
        labor_share: labor * mp_l,
        scaled_output: s * output,
    })
}

/// Which labor-market condition to solve for `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WageCondition {
    /// `p MP_L = w`
    Scalar,
    /// `P . MWP_L = w`
    Vectorial,
}

/// Solves the chosen condition for the labor level by bisection on `ln L`.
///
/// Both sides are monotone in `L` whenever `a + b != 1`.
pub fn cd_labor_for_wage(
    params: &CobbDouglasParams,
    p: f64,
    r: f64,
    w: f64,
    condition: WageCondition,
) -> Result<f64, CobbDouglasError> {
    if (params.returns_to_scale() - 1.0).abs() < 1e-12 {
        return Err(CobbDouglasError::ConstantReturns);
    }
    let k = cd_expansion_ratio(params, r, w)?;
    let s = params.returns_to_scale();
    let gap = |ln_l: f64| {
        let l = ln_l.exp();
        let core = params.scale * k.powf(params.a) * l.powf(s - 1.0);
        match condition {
            WageCondition::Scalar => p * params.b * core - w,
            WageCondition::Vectorial => p * s * core - r * k - w,
        }
    };
    let (mut lo, mut hi) = (-300.0_f64, 300.0_f64);
    let (g_lo, g_hi) = (gap(lo), gap(hi));
    if !(g_lo.is_finite() && g_hi.is_finite()) || g_lo.signum() == g_hi.signum() {
        return Err(CobbDouglasError::NoRoot);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if gap(mid).signum() == g_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cd(scale: f64, a: f64, b: f64) -> CobbDouglasParams {
        CobbDouglasParams::new(scale, a, b).unwrap()
    }

    #[test]
    fn expansion_ratio_examples() {
        assert_eq!(cd_expansion_ratio(&cd(1.0, 0.5, 0.5), 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(cd_expansion_ratio(&cd(1.0, 1.0, 1.0), 2.0, 1.0).unwrap(), 0.5);
        let p = cd(1.0, 0.3, 0.6);
        let base = cd_expansion_ratio(&p, 1.3, 0.7).unwrap();
        let scaled = cd_expansion_ratio(&p, 1.3 * 7.0, 0.7 * 7.0).unwrap();
        assert_relative_eq!(base, scaled, max_relative = 1e-15);
        assert!(cd_expansion_ratio(&p, 0.0, 1.0).is_err());
    }

    #[test]
    fn wp_l_examples() {
        let p = cd(1.0, 0.5, 0.5);
        assert_eq!(cd_wp_l(&p, 1.0, 1.0, 2.0).unwrap().components(), vec![2.0, -2.0, 0.0]);
        assert_eq!(cd_wp_l(&p, 1.0, 1.0, 0.0).unwrap(), ProductVector::zero(2));
        // consistency with whole_product((Q, K, L)) with labor zeroed
        let p = cd(1.3, 0.4, 0.35);
        let (r, w, l) = (0.8, 1.6, 2.7);
        let k = cd_expansion_ratio(&p, r, w).unwrap() * l;
        let wp = crate::product_vectors::whole_product(p.output(k, l), &[k, l]);
        let wp_l = crate::product_vectors::responsible_whole_product(&wp, LABOR).unwrap();
        assert!(cd_wp_l(&p, r, w, l).unwrap().max_abs_diff(&wp_l).unwrap() < 1e-14);
    }

    #[test]
    fn mwp_l_examples() {
        let p = cd(1.0, 0.5, 0.5);
        for l in [0.0, 0.3, 1.0, 17.0] {
            assert_eq!(cd_mwp_l(&p, 1.0, 1.0, l).unwrap().components(), vec![1.0, -1.0, 0.0]);
        }
        let p = cd(1.0, 0.25, 0.25);
        assert_eq!(cd_mwp_l(&p, 1.0, 1.0, 1.0).unwrap().components(), vec![0.5, -1.0, 0.0]);
        assert_eq!(cd_mwp_l(&p, 1.0, 1.0, 0.0), Err(CobbDouglasError::SingularAtZero));
    }

    #[test]
    fn mwp_l_is_derivative_of_wp_l() {
        let p = cd(1.4, 0.3, 0.45);
        let (r, w, l) = (1.2, 0.9, 1.8);
        let h = 1e-5;
        let up = cd_wp_l(&p, r, w, l + h).unwrap();
        let down = cd_wp_l(&p, r, w, l - h).unwrap();
        let fd = (&up - &down).scale(1.0 / (2.0 * h));
        let exact = cd_mwp_l(&p, r, w, l).unwrap();
        assert!(fd.max_abs_diff(&exact).unwrap() < 1e-8);
    }

    #[test]
    fn scalar_identity_examples() {
        let p = cd(1.0, 0.5, 0.5);
        let s = cd_scalar_identities(&p, 2.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(s.p_mp_l, 1.0);
        assert_eq!(s.value_mwp_l, 1.0);
        assert_eq!(s.converted_p_mp_l, 1.0);
        let s = cd_scalar_identities(&p, 3.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(s.p_mp_l, 1.5);
        assert_eq!(s.value_mwp_l, 2.0);
        assert_eq!(s.converted_p_mp_l, 1.5);
        assert_eq!(s.capital_share + s.labor_share, s.output);
        let p = cd(1.0, 0.25, 0.25);
        let s = cd_scalar_identities(&p, 2.0, 1.0, 1.0, 3.0).unwrap();
        assert_relative_eq!(s.capital_share + s.labor_share, 0.5 * s.output, max_relative = 1e-14);
    }

    #[test]
    fn cost_point_examples() {
        let c = cd_cost_point(&cd(1.0, 0.5, 0.5), 1.0, 1.0, 1.0).unwrap();
        assert_eq!((c.capital, c.labor, c.cost, c.marginal_cost), (1.0, 1.0, 2.0, 2.0));
        let c = cd_cost_point(&cd(1.0, 0.5, 0.5), 4.0, 1.0, 2.0).unwrap();
        assert_relative_eq!(c.capital, 1.0, max_relative = 1e-15);
        assert_relative_eq!(c.labor, 4.0, max_relative = 1e-15);
        assert_relative_eq!(c.cost, 8.0, max_relative = 1e-15);
        assert_relative_eq!(c.marginal_cost, 4.0, max_relative = 1e-15);
        let c = cd_cost_point(&cd(1.0, 0.5, 0.5), 1.0, 1.0, 3.0).unwrap();
        assert_eq!(c.dphi_dy, [1.0, 1.0]);
        assert_eq!(c.mwp_responsible(LABOR).components(), vec![1.0, -1.0, 0.0]);
        assert_eq!(c.mwp_responsible(CAPITAL).components(), vec![1.0, 0.0, -1.0]);
    }

    #[test]
    fn wage_conditions_agree() {
        let p = cd(1.2, 0.3, 0.4);
        let (price, r, w) = (2.5, 0.9, 1.1);
        let scalar = cd_labor_for_wage(&p, price, r, w, WageCondition::Scalar).unwrap();
        let vector = cd_labor_for_wage(&p, price, r, w, WageCondition::Vectorial).unwrap();
        assert_relative_eq!(scalar, vector, max_relative = 1e-12);
        // closed-form root of p b A k^a L^(a+b-1) = w
        let k = cd_expansion_ratio(&p, r, w).unwrap();
        let analytic = (w / (price * p.b * p.scale * k.powf(p.a))).powf(1.0 / (p.returns_to_scale() - 1.0));
        assert_relative_eq!(scalar, analytic, max_relative = 1e-12);
        assert_eq!(
            cd_labor_for_wage(&cd(1.0, 0.5, 0.5), 2.0, 1.0, 1.0, WageCondition::Scalar),
            Err(CobbDouglasError::ConstantReturns)
        );
    }

    #[test]
    fn analytic_derivatives_match_expression() {
        let p = cd(1.7, 0.35, 0.55);
        let e = crate::fnparse::parse(&p.to_expression(), 2).unwrap();
        let x = [2.3, 0.8];
        assert_relative_eq!(p.value(&x).unwrap(), e.eval(&x).unwrap(), max_relative = 1e-14);
        let (g1, g2) = (p.gradient(&x).unwrap(), e.grad(&x).unwrap());
        let (h1, h2) = (ProductionFunction::hessian(&p, &x).unwrap(), ProductionFunction::hessian(&e, &x).unwrap());
        for i in 0..2 {
            assert_relative_eq!(g1[i], g2[i], max_relative = 1e-13);
            for j in 0..2 {
                assert_relative_eq!(h1[i][j], h2[i][j], max_relative = 1e-12);
            }
        }
    }
}
