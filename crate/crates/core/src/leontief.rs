//! Fixed-coefficient (Leontief-Sraffa) economies.
//!
//! `A[i][j]` is the amount of good `i` used per unit of good `j`, `a0[j]`
//! the labor per unit of good `j`. Prices are a row vector `p`, outputs a
//! column vector `x`. Inputs are bought a year before outputs are sold and
//! labor is paid at the end of the year, so equilibrium prices satisfy
//! `p = (1 + r) p A + w a0`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

const POWER_ITERATIONS: usize = 200;
const POWER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LeontiefError {
    #[error("technology matrix must be square and non-empty ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("labor vector has {got} entries for {expected} goods")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("technology and labor coefficients must be finite and non-negative")]
    NegativeCoefficient,
    #[error("at least one good must require labor")]
    NoLabor,
    #[error("interest rate must be finite and non-negative, got {0}")]
    InvalidInterest(f64),
    #[error("wage must be finite and positive, got {0}")]
    InvalidWage(f64),
    #[error("economy is not viable: spectral radius of (1+r)A is {radius:.12}")]
    NonViable { radius: f64 },
    #[error("price system is singular")]
    Singular,
    #[error("good index {index} out of range for {goods} goods")]
    IndexOutOfRange { index: usize, goods: usize },
    #[error("output quantities must be non-negative")]
    NegativeOutput,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeontiefEconomy {
    /// Row-major `n x n` technology matrix.
    pub a: Vec<Vec<f64>>,
    pub a0: Vec<f64>,
    pub r: f64,
    pub w: f64,
}

impl LeontiefEconomy {
    pub fn new(a: Vec<Vec<f64>>, a0: Vec<f64>, r: f64, w: f64) -> Result<Self, LeontiefError> {
        let n = a.len();
        if n == 0 || a.iter().any(|row| row.len() != n) {
            let cols = a.first().map_or(0, Vec::len);
            return Err(LeontiefError::NotSquare { rows: n, cols });
        }
        if a0.len() != n {
            return Err(LeontiefError::DimensionMismatch { expected: n, got: a0.len() });
        }
        let ok = |v: &f64| v.is_finite() && *v >= 0.0;
        if !a.iter().flatten().all(ok) || !a0.iter().all(ok) {
            return Err(LeontiefError::NegativeCoefficient);
        }
        if !a0.iter().any(|v| *v > 0.0) {
            return Err(LeontiefError::NoLabor);
        }
        if !(r.is_finite() && r >= 0.0) {
            return Err(LeontiefError::InvalidInterest(r));
        }
        if !(w.is_finite() && w > 0.0) {
            return Err(LeontiefError::InvalidWage(w));
        }
        Ok(LeontiefEconomy { a, a0, r, w })
    }

    pub fn goods(&self) -> usize {
        self.a0.len()
    }

    pub fn with_wage(&self, w: f64) -> Result<Self, LeontiefError> {
        LeontiefEconomy::new(self.a.clone(), self.a0.clone(), self.r, w)
    }

    fn matrix(&self) -> DMatrix<f64> {
        let n = self.goods();
        DMatrix::from_fn(n, n, |i, j| self.a[i][j])
    }

    /// `A x` for a column vector `x`.
    fn inputs_for(&self, x: &[f64]) -> Vec<f64> {
        self.a.iter().map(|row| row.iter().zip(x).map(|(a, v)| a * v).sum()).collect()
    }

    /// `p A` for a row vector `p`.
    fn cost_of_inputs(&self, p: &[f64]) -> Vec<f64> {
        let n = self.goods();
        (0..n).map(|j| (0..n).map(|i| p[i] * self.a[i][j]).sum()).collect()
    }

    fn check_output(&self, x: &[f64]) -> Result<(), LeontiefError> {
        if x.len() != self.goods() {
            return Err(LeontiefError::DimensionMismatch { expected: self.goods(), got: x.len() });
        }
        if x.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(LeontiefError::NegativeOutput);
        }
        Ok(())
    }
}

/// Perron root of the non-negative matrix `(1 + r) A`.
///
/// Power iteration runs on `(1 + r) A + I`, which shares the Perron vector
/// and keeps every iterate strictly positive; the Collatz-Wielandt bounds
/// `min_i (Bv)_i / v_i <= rho(B) <= max_i (Bv)_i / v_i` give the stopping
/// rule.
pub fn spectral_radius(econ: &LeontiefEconomy) -> f64 {
    let n = econ.goods();
    let b = econ.matrix() * (1.0 + econ.r) + DMatrix::<f64>::identity(n, n);
    let mut v = DVector::from_element(n, 1.0);
    let (mut lower, mut upper) = (1.0, f64::INFINITY);
    for _ in 0..POWER_ITERATIONS {
        let next = &b * &v;
        let ratios = next.component_div(&v);
        lower = ratios.min();
        upper = ratios.max();
        v = &next / next.max();
        if upper - lower <= POWER_TOL * upper {
            break;
        }
    }
    0.5 * (lower + upper) - 1.0
}

/// Solves `p (I - (1+r) A) = w a0` for the equilibrium price row vector.
pub fn solve_prices(econ: &LeontiefEconomy) -> Result<Vec<f64>, LeontiefError> {
    let radius = spectral_radius(econ);
    if radius >= 1.0 {
        return Err(LeontiefError::NonViable { radius });
    }
    let n = econ.goods();
    // transpose: (I - (1+r) A)^T p^T = w a0^T
    let system = (DMatrix::<f64>::identity(n, n) - econ.matrix() * (1.0 + econ.r)).transpose();
    let rhs = DVector::from_iterator(n, econ.a0.iter().map(|v| v * econ.w));
    let lu = system.clone().lu();
    let mut p = lu.solve(&rhs).ok_or(LeontiefError::Singular)?;
    // one round of iterative refinement
    let residual = &rhs - &system * &p;
    if let Some(correction) = lu.solve(&residual) {
        p += correction;
    }
    if p.iter().any(|v| !v.is_finite()) {
        return Err(LeontiefError::Singular);
    }
    let scale = p.amax();
    Ok(p.iter().map(|v| if *v < 0.0 && v.abs() <= 1e-14 * scale { 0.0 } else { *v }).collect())
}

/// `p - (1+r) p A - w a0`, zero at equilibrium.
pub fn equilibrium_residual(econ: &LeontiefEconomy, p: &[f64]) -> Vec<f64> {
    let pa = econ.cost_of_inputs(p);
    p.iter()
        .zip(&pa)
        .zip(&econ.a0)
        .map(|((pj, paj), lj)| pj - (1.0 + econ.r) * paj - econ.w * lj)
        .collect()
}

/// `(x, -A x, -a0 x)`: outputs at year end, produced inputs used a year earlier, labor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SraffaWholeProduct {
    pub outputs: Vec<f64>,
    /// Stored negated: `-A x`.
    pub used_inputs: Vec<f64>,
    /// Stored negated: `-a0 x`.
    pub labor: f64,
}

impl SraffaWholeProduct {
    /// The `2n + 1` vector `(x, -A x, -a0 x)`.
    pub fn components(&self) -> Vec<f64> {
        self.outputs
            .iter()
            .chain(&self.used_inputs)
            .copied()
            .chain(std::iter::once(self.labor))
            .collect()
    }

    /// Adds back the labor services: `(x, -A x, 0)`.
    pub fn of_labor(&self) -> SraffaWholeProduct {
        SraffaWholeProduct { labor: 0.0, ..self.clone() }
    }
}

pub fn sraffa_wp(econ: &LeontiefEconomy, x: &[f64]) -> Result<SraffaWholeProduct, LeontiefError> {
    econ.check_output(x)?;
    Ok(SraffaWholeProduct {
        outputs: x.to_vec(),
        used_inputs: econ.inputs_for(x).into_iter().map(|v| -v).collect(),
        labor: -econ.a0.iter().zip(x).map(|(a, v)| a * v).sum::<f64>(),
    })
}

/// Marginal whole product of labor with respect to good `j` (zero-based),
/// `(delta_j, -A delta_j, 0)`, and the labor `a0_j` it requires.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaborMarginal {
    pub good: usize,
    pub vector: SraffaWholeProduct,
    pub labor_required: f64,
}

pub fn sraffa_mwp_labor(econ: &LeontiefEconomy, j: usize) -> Result<LaborMarginal, LeontiefError> {
    let n = econ.goods();
    if j >= n {
        return Err(LeontiefError::IndexOutOfRange { index: j, goods: n });
    }
    let mut delta = vec![0.0; n];
    delta[j] = 1.0;
    let column: Vec<f64> = econ.a.iter().map(|row| -row[j]).collect();
    Ok(LaborMarginal {
        good: j,
        vector: SraffaWholeProduct { outputs: delta, used_inputs: column, labor: 0.0 },
        labor_required: econ.a0[j],
    })
}

/// Year-end price vector `(p, (1+r) p, w)`.
pub fn year_end_prices(econ: &LeontiefEconomy, p: &[f64]) -> Vec<f64> {
    p.iter()
        .copied()
        .chain(p.iter().map(|v| (1.0 + econ.r) * v))
        .chain(std::iter::once(econ.w))
        .collect()
}

/// `P . v` with `P` the year-end prices.
pub fn year_end_value(econ: &LeontiefEconomy, p: &[f64], v: &SraffaWholeProduct) -> f64 {
    year_end_prices(econ, p).iter().zip(v.components()).map(|(a, b)| a * b).sum()
}

/// `P . grad_j WP_L - w a0_j` for every good `j`.
pub fn mwp_labor_residuals(econ: &LeontiefEconomy, p: &[f64]) -> Vec<f64> {
    (0..econ.goods())
        .map(|j| {
            let m = sraffa_mwp_labor(econ, j).expect("index in range");
            year_end_value(econ, p, &m.vector) - econ.w * m.labor_required
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumCheck {
    pub prices: Vec<f64>,
    pub spectral_radius: f64,
    /// `p - (1+r) p A - w a0`
    pub condition_residual: Vec<f64>,
    /// `P . grad_j WP_L - w a0_j`
    pub mwp_residuals: Vec<f64>,
}

impl EquilibriumCheck {
    pub fn max_relative_residual(&self) -> f64 {
        let scale = 1.0 + self.prices.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        self.condition_residual
            .iter()
            .chain(&self.mwp_residuals)
            .fold(0.0_f64, |m, v| m.max(v.abs()))
            / scale
    }
}

/// Solves for prices and evaluates both forms of the equilibrium condition.
pub fn verify_equilibrium(econ: &LeontiefEconomy) -> Result<EquilibriumCheck, LeontiefError> {
    let prices = solve_prices(econ)?;
    Ok(EquilibriumCheck {
        condition_residual: equilibrium_residual(econ, &prices),
        mwp_residuals: mwp_labor_residuals(econ, &prices),
        spectral_radius: spectral_radius(econ),
        prices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one_good() -> LeontiefEconomy {
        LeontiefEconomy::new(vec![vec![0.5]], vec![1.0], 0.0, 1.0).unwrap()
    }

    fn two_goods() -> LeontiefEconomy {
        LeontiefEconomy::new(vec![vec![0.2, 0.3], vec![0.4, 0.1]], vec![1.0, 0.5], 0.1, 1.0).unwrap()
    }

    #[test]
    fn validation() {
        assert!(matches!(
            LeontiefEconomy::new(vec![vec![0.1, 0.2]], vec![1.0], 0.0, 1.0),
            Err(LeontiefError::NotSquare { .. })
        ));
        assert!(matches!(
            LeontiefEconomy::new(vec![vec![0.1]], vec![1.0, 2.0], 0.0, 1.0),
            Err(LeontiefError::DimensionMismatch { .. })
        ));
        assert_eq!(
            LeontiefEconomy::new(vec![vec![-0.1]], vec![1.0], 0.0, 1.0),
            Err(LeontiefError::NegativeCoefficient)
        );
        assert_eq!(LeontiefEconomy::new(vec![vec![0.1]], vec![0.0], 0.0, 1.0), Err(LeontiefError::NoLabor));
        assert!(LeontiefEconomy::new(vec![vec![0.1]], vec![1.0], -0.5, 1.0).is_err());
        assert!(LeontiefEconomy::new(vec![vec![0.1]], vec![1.0], 0.0, 0.0).is_err());
    }

    #[test]
    fn one_good_prices() {
        assert_eq!(solve_prices(&one_good()).unwrap(), vec![2.0]);
        for r in [0.0, 0.3, 5.0] {
            let e = LeontiefEconomy::new(vec![vec![0.0]], vec![1.0], r, 1.0).unwrap();
            assert_eq!(solve_prices(&e).unwrap(), vec![1.0]);
        }
    }

    #[test]
    fn two_good_prices_satisfy_condition() {
        let e = two_goods();
        let p = solve_prices(&e).unwrap();
        let scale = 1.0 + p.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        assert!(equilibrium_residual(&e, &p).iter().all(|v| v.abs() <= 1e-10 * scale));
        assert!(p.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn non_viable_reports_radius() {
        let e = LeontiefEconomy::new(vec![vec![0.5, 0.6], vec![0.6, 0.5]], vec![1.0, 1.0], 0.0, 1.0).unwrap();
        match solve_prices(&e) {
            Err(LeontiefError::NonViable { radius }) => assert!((radius - 1.1).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
        // exactly at the boundary
        let e = LeontiefEconomy::new(vec![vec![0.5]], vec![1.0], 1.0, 1.0).unwrap();
        assert!(matches!(solve_prices(&e), Err(LeontiefError::NonViable { .. })));
    }

    #[test]
    fn spectral_radius_of_periodic_matrix() {
        // eigenvalues +-0.6; plain power iteration on A would oscillate
        let e = LeontiefEconomy::new(vec![vec![0.0, 0.6], vec![0.6, 0.0]], vec![1.0, 1.0], 0.0, 1.0).unwrap();
        assert!((spectral_radius(&e) - 0.6).abs() < 1e-10);
    }

    #[test]
    fn whole_products() {
        let e = one_good();
        assert_eq!(sraffa_wp(&e, &[1.0]).unwrap().components(), vec![1.0, -0.5, -1.0]);
        assert_eq!(sraffa_wp(&e, &[0.0]).unwrap().components(), vec![0.0, 0.0, 0.0]);
        assert!(sraffa_wp(&e, &[-1.0]).is_err());
        let e = two_goods();
        let (x, y) = ([1.0, 2.0], [0.5, 3.0]);
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let lhs = sraffa_wp(&e, &sum).unwrap().components();
        let rhs: Vec<f64> = sraffa_wp(&e, &x)
            .unwrap()
            .components()
            .iter()
            .zip(sraffa_wp(&e, &y).unwrap().components())
            .map(|(a, b)| a + b)
            .collect();
        for (a, b) in lhs.iter().zip(&rhs) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn labor_marginals() {
        let m = sraffa_mwp_labor(&one_good(), 0).unwrap();
        assert_eq!(m.vector.components(), vec![1.0, -0.5, 0.0]);
        assert_eq!(m.labor_required, 1.0);
        let e = LeontiefEconomy::new(vec![vec![0.2, 0.0], vec![0.4, 0.0]], vec![1.0, 0.5], 0.1, 1.0).unwrap();
        assert_eq!(sraffa_mwp_labor(&e, 1).unwrap().vector.components(), vec![0.0, 1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(sraffa_mwp_labor(&e, 2), Err(LeontiefError::IndexOutOfRange { .. })));
        // x-weighted sum of marginals reproduces WP_L
        let e = two_goods();
        let x = [1.5, 0.7];
        let mut acc = [0.0; 5];
        for (j, xj) in x.iter().enumerate() {
            for (a, c) in acc.iter_mut().zip(sraffa_mwp_labor(&e, j).unwrap().vector.components()) {
                *a += xj * c;
            }
        }
        let wp_l = sraffa_wp(&e, &x).unwrap().of_labor().components();
        for (a, b) in acc.iter().zip(&wp_l) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn equilibrium_residuals() {
        let check = verify_equilibrium(&one_good()).unwrap();
        assert_eq!(check.mwp_residuals, vec![0.0]);
        let e = two_goods();
        let check = verify_equilibrium(&e).unwrap();
        assert!(check.max_relative_residual() <= 1e-10);
        // wage raised 10% without re-solving prices
        let raised = e.with_wage(1.1).unwrap();
        let res = mwp_labor_residuals(&raised, &check.prices);
        for (r, l) in res.iter().zip(&e.a0) {
            assert!((r + 0.1 * l).abs() < 1e-12);
        }
    }

    fn viable_economy() -> impl Strategy<Value = LeontiefEconomy> {
        (1usize..=6, 0.0..0.5f64).prop_flat_map(|(n, r)| {
            (
                prop::collection::vec(prop::collection::vec(0.0..1.0f64, n), n),
                prop::collection::vec(0.0..2.0f64, n),
                0.1..3.0f64,
                0.5..0.98f64,
            )
                .prop_map(move |(raw, mut a0, w, target)| {
                    // rescale rows so each sums to target / (1 + r)
                    let a: Vec<Vec<f64>> = raw
                        .into_iter()
                        .map(|row| {
                            let s: f64 = row.iter().sum::<f64>().max(1e-9);
                            row.iter().map(|v| v / s * target / (1.0 + r) * 0.999).collect()
                        })
                        .collect();
                    a0[0] += 0.1;
                    LeontiefEconomy::new(a, a0, r, w).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn solved_prices_are_equilibrium(e in viable_economy()) {
            let check = verify_equilibrium(&e).unwrap();
            prop_assert!(check.max_relative_residual() <= 1e-10);
            prop_assert!(check.prices.iter().all(|v| *v >= 0.0));
        }

        #[test]
        fn prices_scale_with_wage(e in viable_economy(), s in 0.1..10.0f64) {
            let base = solve_prices(&e).unwrap();
            let scaled = solve_prices(&e.with_wage(e.w * s).unwrap()).unwrap();
            for (a, b) in base.iter().zip(&scaled) {
                prop_assert!((s * a - b).abs() <= 1e-10 * (1.0 + b.abs()));
            }
        }

        #[test]
        fn residual_vanishes_only_at_solved_prices(e in viable_economy(), bump in 0usize..6, size in 1e-3..1.0f64) {
            let mut p = solve_prices(&e).unwrap();
            let j = bump % e.goods();
            p[j] += size;
            let res = mwp_labor_residuals(&e, &p);
            prop_assert!(res.iter().any(|v| v.abs() > 1e-6));
        }
    }
}
