//! Forward-mode dual numbers.
//!
//! `Dual<T>` is generic over its component type so that `Dual<Dual<f64>>`
//! carries mixed second partials, which the cost solver uses for Hessians.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar arithmetic needed to evaluate an expression tree.
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    /// The primal (non-derivative) part.
    fn value(&self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    /// General power; callers guarantee a positive base.
    fn powf(self, exponent: Self) -> Self;
    fn powi(self, n: i32) -> Self;
}

impl Real for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn powf(self, exponent: Self) -> Self {
        f64::powf(self, exponent)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
}

/// A value together with one directional derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<T = f64> {
    pub value: T,
    pub derivative: T,
}

impl<T: Real> Dual<T> {
    pub fn new(value: T, derivative: T) -> Self {
        Dual { value, derivative }
    }

    pub fn constant(value: T) -> Self {
        Dual { value, derivative: T::from_f64(0.0) }
    }

    /// Seeds the variable being differentiated.
    pub fn variable(value: T) -> Self {
        Dual { value, derivative: T::from_f64(1.0) }
    }
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Dual::new(self.value + rhs.value, self.derivative + rhs.derivative)
    }
}

impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Dual::new(self.value - rhs.value, self.derivative - rhs.derivative)
    }
}

impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Dual::new(
            self.value * rhs.value,
            self.value * rhs.derivative + self.derivative * rhs.value,
        )
    }
}

impl<T: Real> Div for Dual<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let quotient = self.value / rhs.value;
        Dual::new(
            quotient,
            (self.derivative - quotient * rhs.derivative) / rhs.value,
        )
    }
}

impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.value, -self.derivative)
    }
}

impl<T: Real> Real for Dual<T> {
    fn from_f64(v: f64) -> Self {
        Dual::constant(T::from_f64(v))
    }

    fn value(&self) -> f64 {
        self.value.value()
    }

    fn exp(self) -> Self {
        let e = self.value.exp();
        Dual::new(e, self.derivative * e)
    }

    fn ln(self) -> Self {
        Dual::new(self.value.ln(), self.derivative / self.value)
    }

    fn powf(self, exponent: Self) -> Self {
        // d(a^b) = b a^(b-1) da + a^b ln(a) db
        let v = self.value.powf(exponent.value);
        let d_base = exponent.value * self.value.powf(exponent.value - T::from_f64(1.0));
        Dual::new(
            v,
            d_base * self.derivative + v * self.value.ln() * exponent.derivative,
        )
    }

    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Dual::constant(T::from_f64(1.0));
        }
        let v = self.value.powi(n);
        let d = T::from_f64(n as f64) * self.value.powi(n - 1);
        Dual::new(v, d * self.derivative)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        let a = Dual::new(3.0, 2.0);
        let b = Dual::new(5.0, -1.0);
        let p = a * b;
        assert_eq!(p.value, 15.0);
        assert_eq!(p.derivative, -3.0 + 2.0 * 5.0);
    }

    #[test]
    fn quotient_rule() {
        let a = Dual::new(3.0, 1.0);
        let b = Dual::new(2.0, 0.0);
        let q = a / b;
        assert_eq!(q.value, 1.5);
        assert_eq!(q.derivative, 0.5);
    }

    #[test]
    fn nested_dual_gives_second_derivative() {
        // f(x) = x^3 at x = 2: f'' = 6x = 12
        let x = Dual::new(Dual::variable(2.0), Dual::constant(1.0));
        let y = x.powi(3);
        assert_eq!(y.value.value, 8.0);
        assert_eq!(y.derivative.value, 12.0);
        assert_eq!(y.derivative.derivative, 12.0);
    }

    #[test]
    fn powf_matches_powi_for_positive_base() {
        let x = Dual::variable(1.7);
        let a = x.powf(Dual::constant(3.0));
        let b = x.powi(3);
        assert!((a.value - b.value).abs() < 1e-12);
        assert!((a.derivative - b.derivative).abs() < 1e-12);
    }
}
