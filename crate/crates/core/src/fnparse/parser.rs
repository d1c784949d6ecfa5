//! Recursive-descent parser for production-function expressions.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?          right-associative
//! primary := number | 'x' index | '(' expr ')' | ('exp' | 'log') '(' expr ')'
//! ```
//!
//! Unary minus is sugar for `0 - operand`.

use super::{BinOp, Expr, Func, Node};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("empty expression")]
    Empty,
    #[error("unexpected character '{0}'")]
    UnexpectedChar(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("expected '{0}'")]
    Expected(char),
    #[error("unknown function '{0}'")]
    UnknownFunction(String),
    #[error("malformed number")]
    BadNumber,
    #[error("variable x{index} exceeds arity {arity}")]
    VariableOutOfRange { index: usize, arity: usize },
    #[error("variable indices start at 1")]
    ZeroVariable,
    #[error("arity must be positive")]
    ZeroArity,
}

/// Parse failure with the byte offset it was detected at.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at position {position}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub position: usize,
}

/// Parses `source` as a function of `arity` variables `x1..x{arity}`.
pub fn parse(source: &str, arity: usize) -> Result<Expr, ParseError> {
    if arity == 0 {
        return Err(ParseError { kind: ParseErrorKind::ZeroArity, position: 0 });
    }
    let mut parser = Parser { src: source.as_bytes(), pos: 0, arity };
    parser.skip_ws();
    if parser.at_end() {
        return Err(parser.error(ParseErrorKind::Empty));
    }
    let root = parser.expr()?;
    parser.skip_ws();
    if !parser.at_end() {
        return Err(parser.unexpected());
    }
    Ok(Expr { root, arity })
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    arity: usize,
}

impl Parser<'_> {
    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { kind, position: self.pos }
    }

    fn unexpected(&self) -> ParseError {
        let c = std::str::from_utf8(&self.src[self.pos..])
            .ok()
            .and_then(|rest| rest.chars().next())
            .unwrap_or(char::REPLACEMENT_CHARACTER);
        self.error(ParseErrorKind::UnexpectedChar(c))
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    /// Consumes `c` after optional whitespace.
    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(ParseErrorKind::Expected(c as char)))
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat(b'+') {
                BinOp::Add
            } else if self.eat(b'-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Node::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat(b'*') {
                BinOp::Mul
            } else if self.eat(b'/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Node::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.eat(b'-') {
            let operand = self.unary()?;
            return Ok(Node::binary(BinOp::Sub, Node::Const(0.0), operand));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.primary()?;
        if self.eat(b'^') {
            let exponent = self.unary()?;
            return Ok(Node::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, ParseError> {
        self.skip_ws();
        let Some(c) = self.peek() else {
            return Err(self.error(ParseErrorKind::UnexpectedEnd));
        };
        match c {
            b'(' => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            b'0'..=b'9' | b'.' => self.number(),
            b'a'..=b'z' | b'A'..=b'Z' => self.identifier(),
            _ => Err(self.unexpected()),
        }
    }

    fn number(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while matches!(p.peek(), Some(b'0'..=b'9')) {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut count = digits(self);
        if self.peek() == Some(b'.') {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            self.pos = start;
            return Err(self.error(ParseErrorKind::BadNumber));
        }
        // Only treat 'e' as an exponent marker when digits follow.
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        text.parse::<f64>()
            .map(Node::Const)
            .map_err(|_| ParseError { kind: ParseErrorKind::BadNumber, position: start })
    }

    fn identifier(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        if self.peek() == Some(b'x') && matches!(self.src.get(self.pos + 1), Some(b'0'..=b'9')) {
            self.pos += 1;
            let digits_start = self.pos;
            while matches!(self.peek(), Some(b'0'..=b'9')) {
                self.pos += 1;
            }
            let text = std::str::from_utf8(&self.src[digits_start..self.pos]).expect("ascii slice");
            let index: usize = text
                .parse()
                .map_err(|_| ParseError { kind: ParseErrorKind::BadNumber, position: digits_start })?;
            if index == 0 {
                return Err(ParseError { kind: ParseErrorKind::ZeroVariable, position: start });
            }
            if index > self.arity {
                return Err(ParseError {
                    kind: ParseErrorKind::VariableOutOfRange { index, arity: self.arity },
                    position: start,
                });
            }
            return Ok(Node::Var(index - 1));
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        let func = match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            _ => {
                return Err(ParseError {
                    kind: ParseErrorKind::UnknownFunction(name.to_string()),
                    position: start,
                })
            }
        };
        self.expect(b'(')?;
        let arg = self.expr()?;
        self.expect(b')')?;
        Ok(Node::Func { func, arg: Box::new(arg) })
    }
}
