use crate::fnparse::{EvalError, Expr};

/// A smooth production function `y = f(x_1, .., x_n)` with exact gradient.
pub trait ProductionFunction: Send + Sync {
    fn arity(&self) -> usize;

    fn value(&self, x: &[f64]) -> Result<f64, EvalError>;

    /// Marginal products `MP_i = df/dx_i`.
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>, EvalError>;

    /// Second partials. The default differences the gradient centrally.
    fn hessian(&self, x: &[f64]) -> Result<Vec<Vec<f64>>, EvalError> {
        let n = x.len();
        let mut h = vec![vec![0.0; n]; n];
        let mut probe = x.to_vec();
        for j in 0..n {
            let step = 1e-5 * x[j].abs().max(1e-3);
            probe[j] = x[j] + step;
            let up = self.gradient(&probe)?;
            probe[j] = x[j] - step;
            let down = self.gradient(&probe)?;
            probe[j] = x[j];
            for i in 0..n {
                h[i][j] = (up[i] - down[i]) / (2.0 * step);
            }
        }
        for i in 0..n {
            for j in 0..i {
                let avg = 0.5 * (h[i][j] + h[j][i]);
                h[i][j] = avg;
                h[j][i] = avg;
            }
        }
        Ok(h)
    }
}

impl ProductionFunction for Expr {
    fn arity(&self) -> usize {
        Expr::arity(self)
    }

    fn value(&self, x: &[f64]) -> Result<f64, EvalError> {
        self.eval(x)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        self.grad(x)
    }

    fn hessian(&self, x: &[f64]) -> Result<Vec<Vec<f64>>, EvalError> {
        Expr::hessian(self, x)
    }
}

impl<F: ProductionFunction + ?Sized> ProductionFunction for &F {
    fn arity(&self) -> usize {
        (**self).arity()
    }

    fn value(&self, x: &[f64]) -> Result<f64, EvalError> {
        (**self).value(x)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        (**self).gradient(x)
    }

    fn hessian(&self, x: &[f64]) -> Result<Vec<Vec<f64>>, EvalError> {
        (**self).hessian(x)
    }
}

impl<F: ProductionFunction + ?Sized> ProductionFunction for Box<F> {
    fn arity(&self) -> usize {
        (**self).arity()
    }

    fn value(&self, x: &[f64]) -> Result<f64, EvalError> {
        (**self).value(x)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        (**self).gradient(x)
    }

    fn hessian(&self, x: &[f64]) -> Result<Vec<Vec<f64>>, EvalError> {
        (**self).hessian(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fnparse::parse;

    struct GradOnly(Expr);

    impl ProductionFunction for GradOnly {
        fn arity(&self) -> usize {
            self.0.arity()
        }
        fn value(&self, x: &[f64]) -> Result<f64, EvalError> {
            self.0.eval(x)
        }
        fn gradient(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
            self.0.grad(x)
        }
    }

    #[test]
    fn default_hessian_matches_nested_duals() {
        let e = parse("x1^0.3*x2^0.6*exp(0.1*x1)", 2).unwrap();
        let x = [1.7, 2.4];
        let exact = ProductionFunction::hessian(&e, &x).unwrap();
        let approx = GradOnly(e).hessian(&x).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((exact[i][j] - approx[i][j]).abs() < 1e-8, "{i}{j}");
            }
        }
    }
}
