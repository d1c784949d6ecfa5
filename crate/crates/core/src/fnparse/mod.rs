//! Textual production functions with exact first derivatives.
//!
//! Expressions such as `2*x1^0.5*x2^0.5` are parsed into an [`Expr`] tree
//! over variables `x1..xn`. Evaluation is generic over [`Real`], so the same
//! tree yields values (`f64`), gradients (`Dual<f64>`, one sweep per
//! coordinate) and Hessians (`Dual<Dual<f64>>`).

mod dual;
mod parser;

use std::fmt;

use thiserror::Error;

pub use dual::{Dual, Real};
pub use parser::{parse, ParseError, ParseErrorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 3,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
}

/// Expression tree node. Variables are stored zero-based (`x1` is `Var(0)`).
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var(usize),
    Binary { op: BinOp, lhs: Box<Node>, rhs: Box<Node> },
    Func { func: Func, arg: Box<Node> },
}

impl Node {
    pub fn binary(op: BinOp, lhs: Node, rhs: Node) -> Node {
        Node::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    /// True when the subtree references no variables.
    pub fn is_constant(&self) -> bool {
        match self {
            Node::Const(_) => true,
            Node::Var(_) => false,
            Node::Binary { lhs, rhs, .. } => lhs.is_constant() && rhs.is_constant(),
            Node::Func { arg, .. } => arg.is_constant(),
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Node::Const(_) => None,
            Node::Var(i) => Some(*i),
            Node::Binary { lhs, rhs, .. } => lhs.max_var().max(rhs.max_var()),
            Node::Func { arg, .. } => arg.max_var(),
        }
    }

    fn eval<T: Real>(&self, x: &[T]) -> Result<T, EvalError> {
        match self {
            Node::Const(c) => Ok(T::from_f64(*c)),
            Node::Var(i) => Ok(x[*i]),
            Node::Func { func, arg } => {
                let a = arg.eval(x)?;
                match func {
                    Func::Exp => Ok(a.exp()),
                    Func::Log => {
                        if a.value() <= 0.0 {
                            return Err(EvalError::Domain(DomainError::LogNonPositive(a.value())));
                        }
                        Ok(a.ln())
                    }
                }
            }
            Node::Binary { op, lhs, rhs } => {
                let a = lhs.eval(x)?;
                let b = rhs.eval(x)?;
                match op {
                    BinOp::Add => Ok(a + b),
                    BinOp::Sub => Ok(a - b),
                    BinOp::Mul => Ok(a * b),
                    BinOp::Div => {
                        if b.value() == 0.0 {
                            return Err(EvalError::Domain(DomainError::DivisionByZero));
                        }
                        Ok(a / b)
                    }
                    BinOp::Pow => power(a, b, rhs),
                }
            }
        }
    }
}

fn power<T: Real>(base: T, exponent: T, exponent_node: &Node) -> Result<T, EvalError> {
    let base_value = base.value();
    if base_value > 0.0 {
        return Ok(base.powf(exponent));
    }
    let e = exponent.value();
    if !exponent_node.is_constant() || e.fract() != 0.0 || e.abs() > i32::MAX as f64 {
        return Err(EvalError::Domain(DomainError::NonIntegerPower { base: base_value, exponent: e }));
    }
    if base_value == 0.0 && e < 0.0 {
        return Err(EvalError::Domain(DomainError::ZeroToNegativePower(e)));
    }
    Ok(base.powi(e as i32))
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("log of non-positive value {0}")]
    LogNonPositive(f64),
    #[error("zero raised to negative power {0}")]
    ZeroToNegativePower(f64),
    #[error("non-positive base {base} raised to non-integer or variable power {exponent}")]
    NonIntegerPower { base: f64, exponent: f64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("input {0} outside the function's domain")]
    OutsideDomain(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("expected {expected} arguments, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("domain error: {0}")]
    Domain(#[from] DomainError),
}

/// A parsed expression together with its declared arity.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub(crate) root: Node,
    pub(crate) arity: usize,
}

impl Expr {
    /// Builds an expression from a tree; fails if a variable exceeds `arity`.
    pub fn new(root: Node, arity: usize) -> Result<Self, ParseError> {
        if arity == 0 {
            return Err(ParseError { kind: ParseErrorKind::ZeroArity, position: 0 });
        }
        if let Some(i) = root.max_var() {
            if i >= arity {
                return Err(ParseError {
                    kind: ParseErrorKind::VariableOutOfRange { index: i + 1, arity },
                    position: 0,
                });
            }
        }
        Ok(Expr { root, arity })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    fn check_len(&self, len: usize) -> Result<(), EvalError> {
        if len != self.arity {
            return Err(EvalError::DimensionMismatch { expected: self.arity, got: len });
        }
        Ok(())
    }

    /// Evaluates over any [`Real`] scalar type.
    pub fn eval_generic<T: Real>(&self, x: &[T]) -> Result<T, EvalError> {
        self.check_len(x.len())?;
        self.root.eval(x)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        self.eval_generic(x)
    }

    /// Exact partial derivatives, one dual sweep per coordinate.
    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        self.check_len(x.len())?;
        let mut seeded: Vec<Dual> = x.iter().map(|&v| Dual::constant(v)).collect();
        let mut out = Vec::with_capacity(x.len());
        for i in 0..x.len() {
            seeded[i].derivative = 1.0;
            out.push(self.root.eval(&seeded)?.derivative);
            seeded[i].derivative = 0.0;
        }
        Ok(out)
    }

    /// Second partials via nested duals. Used internally by the cost solver.
    pub(crate) fn hessian(&self, x: &[f64]) -> Result<Vec<Vec<f64>>, EvalError> {
        self.check_len(x.len())?;
        let n = x.len();
        let mut h = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let seeded: Vec<Dual<Dual>> = x
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| {
                        let inner = Dual::new(v, if k == j { 1.0 } else { 0.0 });
                        let outer = Dual::new(if k == i { 1.0 } else { 0.0 }, 0.0);
                        Dual::new(inner, outer)
                    })
                    .collect();
                let r = self.root.eval(&seeded)?;
                h[i][j] = r.derivative.derivative;
                h[j][i] = h[i][j];
            }
        }
        Ok(h)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(&self.root, f)
    }
}

// Parenthesizes children only where re-parsing would otherwise regroup them.
fn write_node(node: &Node, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match node {
        Node::Const(c) if *c < 0.0 || c.is_sign_negative() => write!(f, "(0 - {})", -c),
        Node::Const(c) => write!(f, "{c}"),
        Node::Var(i) => write!(f, "x{}", i + 1),
        Node::Func { func, arg } => {
            let name = match func {
                Func::Exp => "exp",
                Func::Log => "log",
            };
            write!(f, "{name}(")?;
            write_node(arg, f)?;
            write!(f, ")")
        }
        Node::Binary { op, lhs, rhs } => {
            let prec = op.precedence();
            let right_assoc = *op == BinOp::Pow;
            let lhs_parens = match lhs.as_ref() {
                Node::Binary { op: l, .. } => {
                    l.precedence() < prec || (right_assoc && l.precedence() == prec)
                }
                _ => false,
            };
            let rhs_parens = match rhs.as_ref() {
                Node::Binary { op: r, .. } => {
                    r.precedence() < prec || (!right_assoc && r.precedence() == prec)
                }
                _ => false,
            };
            write_child(lhs, lhs_parens, f)?;
            if *op == BinOp::Pow {
                write!(f, "^")?;
            } else {
                write!(f, " {} ", op.symbol())?;
            }
            write_child(rhs, rhs_parens, f)
        }
    }
}

fn write_child(node: &Node, parens: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if parens {
        write!(f, "(")?;
        write_node(node, f)?;
        write!(f, ")")
    } else {
        write_node(node, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central_fd(e: &Expr, x: &[f64], i: usize) -> f64 {
        let h = 1e-6 * x[i].abs().max(1.0);
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        (e.eval(&xp).unwrap() - e.eval(&xm).unwrap()) / (2.0 * h)
    }

    #[test]
    fn cobb_douglas_text_evaluates() {
        let e = parse("2*x1^0.5*x2^0.5", 2).unwrap();
        assert_eq!(e.eval(&[1.0, 4.0]).unwrap(), 4.0);
        let e = parse("1*x1^0.5*x2^0.5", 2).unwrap();
        assert_eq!(e.eval(&[4.0, 9.0]).unwrap(), 6.0);
    }

    #[test]
    fn identity() {
        let e = parse("x1", 1).unwrap();
        assert_eq!(e.eval(&[7.0]).unwrap(), 7.0);
    }

    #[test]
    fn arity_violation() {
        let err = parse("x3", 2).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::VariableOutOfRange { index: 3, arity: 2 });
        assert_eq!(err.position, 0);
    }

    #[test]
    fn empty_and_syntax_errors() {
        assert_eq!(parse("   ", 1).unwrap_err().kind, ParseErrorKind::Empty);
        let err = parse("x1 + * x2", 2).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedChar('*'));
        assert_eq!(err.position, 5);
        let err = parse("(x1 + x2", 2).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Expected(')'));
        assert!(matches!(parse("sqrt(x1)", 1).unwrap_err().kind, ParseErrorKind::UnknownFunction(_)));
        assert_eq!(parse("x0", 1).unwrap_err().kind, ParseErrorKind::ZeroVariable);
        assert_eq!(parse("x1 x2", 2).unwrap_err().kind, ParseErrorKind::UnexpectedChar('x'));
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse("2^3^2", 1).unwrap();
        assert_eq!(e.eval(&[0.0]).unwrap(), 512.0);
        let e = parse("8/4/2", 1).unwrap();
        assert_eq!(e.eval(&[0.0]).unwrap(), 1.0);
        let e = parse("1 + 2*3^2", 1).unwrap();
        assert_eq!(e.eval(&[0.0]).unwrap(), 19.0);
        let e = parse("10 - 4 - 3", 1).unwrap();
        assert_eq!(e.eval(&[0.0]).unwrap(), 3.0);
        let e = parse("-x1^2", 1).unwrap();
        assert_eq!(e.eval(&[3.0]).unwrap(), -9.0);
        let e = parse("x1^-1", 1).unwrap();
        assert_eq!(e.eval(&[4.0]).unwrap(), 0.25);
        let e = parse("1.5e1 + .5", 1).unwrap();
        assert_eq!(e.eval(&[0.0]).unwrap(), 15.5);
    }

    #[test]
    fn zero_subtree_propagates() {
        let e = parse("0*x1^0.3*exp(x2)", 2).unwrap();
        assert_eq!(e.eval(&[2.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn domain_errors() {
        let e = parse("log(x1)", 1).unwrap();
        assert!(matches!(
            e.eval(&[0.0]),
            Err(EvalError::Domain(DomainError::LogNonPositive(_)))
        ));
        let e = parse("x1^-2", 1).unwrap();
        assert!(matches!(
            e.eval(&[0.0]),
            Err(EvalError::Domain(DomainError::ZeroToNegativePower(_)))
        ));
        let e = parse("x1^0.5", 1).unwrap();
        assert!(matches!(
            e.eval(&[-1.0]),
            Err(EvalError::Domain(DomainError::NonIntegerPower { .. }))
        ));
        let e = parse("x1/x2", 2).unwrap();
        assert!(matches!(e.eval(&[1.0, 0.0]), Err(EvalError::Domain(DomainError::DivisionByZero))));
        assert!(matches!(
            e.eval(&[1.0]),
            Err(EvalError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn integer_power_of_negative_base() {
        let e = parse("x1^3", 1).unwrap();
        assert_eq!(e.eval(&[-2.0]).unwrap(), -8.0);
        assert_eq!(e.grad(&[-2.0]).unwrap(), vec![12.0]);
        // exponent must be constant, not merely integer-valued
        let e = parse("x1^x2", 2).unwrap();
        assert!(e.eval(&[-2.0, 2.0]).is_err());
    }

    #[test]
    fn gradients() {
        let e = parse("1*x1^0.5*x2^0.5", 2).unwrap();
        assert_eq!(e.grad(&[1.0, 1.0]).unwrap(), vec![0.5, 0.5]);
        let e = parse("x1 + x2", 2).unwrap();
        assert_eq!(e.grad(&[3.0, -8.0]).unwrap(), vec![1.0, 1.0]);
        let e = parse("exp(x1*x2) / log(x1 + 2) - x2^x1", 2).unwrap();
        let x = [0.7, 1.3];
        let g = e.grad(&x).unwrap();
        for i in 0..2 {
            let fd = central_fd(&e, &x, i);
            assert!((g[i] - fd).abs() <= 1e-6 * (1.0 + g[i].abs()), "{i}: {} vs {fd}", g[i]);
        }
    }

    #[test]
    fn hessian_of_cobb_douglas() {
        let e = parse("x1^0.5*x2^0.5", 2).unwrap();
        let h = e.hessian(&[1.0, 4.0]).unwrap();
        // f_11 = -0.25 x1^-1.5 x2^0.5, f_12 = 0.25 (x1 x2)^-0.5, f_22 = -0.25 x1^0.5 x2^-1.5
        assert!((h[0][0] + 0.5).abs() < 1e-14);
        assert!((h[0][1] - 0.125).abs() < 1e-14);
        assert!((h[1][0] - 0.125).abs() < 1e-14);
        assert!((h[1][1] + 0.25 * 0.125).abs() < 1e-14);
    }

    #[test]
    fn pretty_print_round_trips() {
        for src in [
            "2*x1^0.5*x2^0.5",
            "x1 - (x2 - 3)",
            "(x1 - x2) - 3",
            "(x1^x2)^2",
            "x1^x2^2",
            "x1 / (x2 * 3)",
            "-x1 + exp(-(x2))",
            "log(x1 + 1e-7)*1e300",
        ] {
            let e = parse(src, 2).unwrap();
            let printed = e.to_string();
            let again = parse(&printed, 2).unwrap();
            assert_eq!(e, again, "{src} -> {printed}");
        }
    }
}
