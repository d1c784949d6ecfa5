//! Signed product vectors and their valuation at a price vector.
//!
//! A product vector lists the output first and then one component per input.
//! Whole products carry inputs with a negative sign; marginal vectors reuse
//! the same type and may have either sign on any component.

use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VectorError {
    #[error("dimension mismatch: expected {expected} inputs, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("input index {index} out of range for {inputs} inputs")]
    IndexOutOfRange { index: usize, inputs: usize },
    #[error("price system needs finite prices and strictly positive input prices")]
    InvalidPrices,
}

/// `(output, input_1, ..., input_n)` with signs kept as given.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductVector {
    pub output: f64,
    pub inputs: Vec<f64>,
}

impl ProductVector {
    pub fn new(output: f64, inputs: Vec<f64>) -> Self {
        ProductVector { output, inputs }
    }

    pub fn zero(n_inputs: usize) -> Self {
        ProductVector { output: 0.0, inputs: vec![0.0; n_inputs] }
    }

    /// Builds from `[output, input_1, ..]`.
    pub fn from_components(components: &[f64]) -> Option<Self> {
        let (&output, inputs) = components.split_first()?;
        Some(ProductVector { output, inputs: inputs.to_vec() })
    }

    pub fn n_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn components(&self) -> Vec<f64> {
        std::iter::once(self.output).chain(self.inputs.iter().copied()).collect()
    }

    pub fn scale(&self, s: f64) -> Self {
        ProductVector {
            output: self.output * s,
            inputs: self.inputs.iter().map(|v| v * s).collect(),
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, VectorError> {
        self.check_dim(other.n_inputs())?;
        Ok(ProductVector {
            output: self.output + other.output,
            inputs: self.inputs.iter().zip(&other.inputs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, VectorError> {
        self.checked_add(&-other.clone())
    }

    /// Largest absolute componentwise difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, VectorError> {
        self.check_dim(other.n_inputs())?;
        Ok(self
            .components()
            .iter()
            .zip(other.components())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    fn check_dim(&self, got: usize) -> Result<(), VectorError> {
        if got != self.n_inputs() {
            return Err(VectorError::DimensionMismatch { expected: self.n_inputs(), got });
        }
        Ok(())
    }
}

impl Add for &ProductVector {
    type Output = ProductVector;

    /// Panics on dimension mismatch; use [`ProductVector::checked_add`] otherwise.
    fn add(self, rhs: Self) -> ProductVector {
        self.checked_add(rhs).expect("product vectors of equal dimension")
    }
}

impl Sub for &ProductVector {
    type Output = ProductVector;

    fn sub(self, rhs: Self) -> ProductVector {
        self.checked_sub(rhs).expect("product vectors of equal dimension")
    }
}

impl Neg for ProductVector {
    type Output = ProductVector;

    fn neg(self) -> ProductVector {
        self.scale(-1.0)
    }
}

impl Mul<&ProductVector> for f64 {
    type Output = ProductVector;

    fn mul(self, rhs: &ProductVector) -> ProductVector {
        rhs.scale(self)
    }
}

/// Output price `p` and input prices `w`; as a vector `P = (p, w_1, .., w_n)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceSystem {
    pub output_price: f64,
    pub input_prices: Vec<f64>,
}

impl PriceSystem {
    pub fn new(output_price: f64, input_prices: Vec<f64>) -> Result<Self, VectorError> {
        if !output_price.is_finite()
            || input_prices.is_empty()
            || input_prices.iter().any(|w| !w.is_finite() || *w <= 0.0)
        {
            return Err(VectorError::InvalidPrices);
        }
        Ok(PriceSystem { output_price, input_prices })
    }

    pub fn n_inputs(&self) -> usize {
        self.input_prices.len()
    }

    pub fn components(&self) -> Vec<f64> {
        std::iter::once(self.output_price).chain(self.input_prices.iter().copied()).collect()
    }
}

/// `(y, -x_1, .., -x_n)`: output positive, used-up inputs negative.
pub fn whole_product(y: f64, x: &[f64]) -> ProductVector {
    ProductVector { output: y, inputs: x.iter().map(|v| -v).collect() }
}

/// The positive part `(y, 0, .., 0)` of a whole product.
pub fn positive_product(y: f64, n_inputs: usize) -> ProductVector {
    ProductVector { output: y, inputs: vec![0.0; n_inputs] }
}

/// The negative part `(0, -x_1, .., -x_n)` of a whole product.
pub fn negative_product(x: &[f64]) -> ProductVector {
    whole_product(0.0, x)
}

/// The dot product `P . v`.
pub fn value(prices: &PriceSystem, v: &ProductVector) -> Result<f64, VectorError> {
    if prices.n_inputs() != v.n_inputs() {
        return Err(VectorError::DimensionMismatch { expected: prices.n_inputs(), got: v.n_inputs() });
    }
    Ok(prices.output_price * v.output
        + prices.input_prices.iter().zip(&v.inputs).map(|(w, q)| w * q).sum::<f64>())
}

/// Adds back the services of the responsible input (zero-based `factor`),
/// i.e. zeroes that input's component.
pub fn responsible_whole_product(v: &ProductVector, factor: usize) -> Result<ProductVector, VectorError> {
    if factor >= v.n_inputs() {
        return Err(VectorError::IndexOutOfRange { index: factor, inputs: v.n_inputs() });
    }
    let mut out = v.clone();
    out.inputs[factor] = 0.0;
    Ok(out)
}

/// `(0, .., q, .., 0)`: a quantity `q` of input `factor` as a commodity.
pub fn input_services(n_inputs: usize, factor: usize, quantity: f64) -> Result<ProductVector, VectorError> {
    if factor >= n_inputs {
        return Err(VectorError::IndexOutOfRange { index: factor, inputs: n_inputs });
    }
    let mut v = ProductVector::zero(n_inputs);
    v.inputs[factor] = quantity;
    Ok(v)
}
