//! Arithmetic expressions in the coordinates `x1..xn`.
//!
//! Grammar: numbers, `pi`, `x1..xn`, `+ - * / ^` (right-associative power,
//! binding tighter than unary minus) and the functions `sin cos exp sqrt j0`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::special_fn::bessel_j;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    J0,
}

/// A parsed expression, cheap to clone and evaluable from many threads.
#[derive(Clone)]
pub struct Expr {
    source: Arc<str>,
    root: Arc<Node>,
    dimension: usize,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({:?})", self.source)
    }
}

impl Expr {
    /// Parse `text` for points of the given dimension; `field` names the
    /// configuration entry in error messages.
    pub fn parse(text: &str, dimension: usize, field: &str) -> Result<Self> {
        let mut p = Parser {
            chars: text.chars().collect(),
            pos: 0,
            dimension,
            field,
        };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos != p.chars.len() {
            return Err(p.err(format!("unexpected `{}`", p.chars[p.pos])));
        }
        Ok(Expr {
            source: text.into(),
            root: Arc::new(root),
            dimension,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        eval(&self.root, x)
    }

    /// True when the expression is the literal constant zero.
    pub fn is_zero(&self) -> bool {
        matches!(*self.root, Node::Num(v) if v == 0.0)
    }
}

fn eval(node: &Node, x: &[f64]) -> f64 {
    match node {
        Node::Num(v) => *v,
        Node::Var(i) => x[*i],
        Node::Neg(a) => -eval(a, x),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval(a, x), eval(b, x));
            match op {
                '+' => a + b,
                '-' => a - b,
                '*' => a * b,
                '/' => a / b,
                _ => a.powf(b),
            }
        }
        Node::Call(f, a) => {
            let a = eval(a, x);
            match f {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Exp => a.exp(),
                Func::Sqrt => a.sqrt(),
                Func::J0 => bessel_j(0.0, a.abs()).unwrap_or(f64::NAN),
            }
        }
    }
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    dimension: usize,
    field: &'a str,
}

impl Parser<'_> {
    fn err(&self, reason: String) -> Error {
        Error::parse(self.field, format!("{reason} at column {}", self.pos + 1))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek() {
            self.pos += 1;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Bin('^', Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.peek() {
            None => Err(self.err("unexpected end of expression".into())),
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected `)`".into()));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.name(),
            Some(c) => Err(self.err(format!("unexpected `{c}`"))),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        while self.pos < self.chars.len() {
            let c = self.chars[self.pos];
            let exp_sign = (c == '+' || c == '-') && matches!(self.chars[self.pos - 1], 'e' | 'E');
            if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse()
            .map(Node::Num)
            .map_err(|_| self.err(format!("bad number `{text}`")))
    }

    fn name(&mut self) -> Result<Node> {
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name: String = self.chars[start..self.pos].iter().collect();
        if name == "pi" {
            return Ok(Node::Num(std::f64::consts::PI));
        }
        if let Some(idx) = name.strip_prefix('x').and_then(|s| s.parse::<usize>().ok()) {
            if idx == 0 || idx > self.dimension {
                self.pos = start;
                return Err(self.err(format!("variable `{name}` outside x1..x{}", self.dimension)));
            }
            return Ok(Node::Var(idx - 1));
        }
        let func = match name.as_str() {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "j0" => Func::J0,
            _ => {
                self.pos = start;
                return Err(self.err(format!("unknown name `{name}`")));
            }
        };
        if self.peek() != Some('(') {
            return Err(self.err(format!("`{name}` needs an argument in parentheses")));
        }
        Ok(Node::Call(func, Box::new(self.atom()?)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: &[f64]) -> f64 {
        Expr::parse(s, x.len(), "f").unwrap().eval(x)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3", &[]), 7.0);
        assert_eq!(ev("2 ^ 3 ^ 2", &[]), 512.0);
        assert_eq!(ev("-2 ^ 2", &[]), -4.0);
        assert_eq!(ev("(1 - 2) - 3", &[]), -4.0);
        assert_eq!(ev("8 / 4 / 2", &[]), 1.0);
        assert_eq!(ev("1.5e-1 * 2E+1", &[]), 3.0);
    }

    #[test]
    fn variables_and_functions() {
        let x = [0.25, 2.0];
        assert!((ev("sin(pi*x1)", &x) - (std::f64::consts::PI * 0.25).sin()).abs() < 1e-15);
        assert_eq!(ev("x2^2 + exp(0) + cos(0)", &x), 6.0);
        assert_eq!(ev("sqrt(x2 * 8)", &x), 4.0);
        assert!((ev("j0(2.404825557695773)", &x)).abs() < 1e-12);
    }

    #[test]
    fn errors_name_the_field() {
        for bad in ["sin x1", "x3", "1 +", "foo(1)", "(1", "2 $ 3", "x0"] {
            let e = Expr::parse(bad, 2, "initial.phi").unwrap_err();
            assert_eq!(e.field(), "initial.phi", "{bad}");
        }
    }

    #[test]
    fn zero_literal() {
        assert!(Expr::parse(" 0 ", 1, "f").unwrap().is_zero());
        assert!(!Expr::parse("0*x1", 1, "f").unwrap().is_zero());
    }
}
