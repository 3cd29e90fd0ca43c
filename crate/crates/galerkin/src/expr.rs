//! Arithmetic expressions in one variable `x`.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := primary ("^" unary)?
//! primary := number | "x" | "pi" | func "(" expr ")" | "(" expr ")"
//! func    := sin | cos | tan | exp | log | sqrt | abs | acos | asin
//! ```
//!
//! `^` binds tighter than unary minus, so `-x^2` is `-(x^2)`, and is right
//! associative. Integer exponents evaluate by repeated multiplication.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Acos,
    Asin,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "acos" => Func::Acos,
            "asin" => Func::Asin,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    X,
    Pi,
    Num { value: f64, exact: bool },
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    pub fn eval<T: Scalar>(&self, x: T) -> T {
        match self {
            Node::X => x,
            Node::Pi => T::pi(),
            Node::Num { value, exact } => T::literal(*value, *exact),
            Node::Neg(a) => -a.eval(x),
            Node::Bin(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                }
            }
            Node::Pow(a, b) => match b.integer_value() {
                Some(n) => a.eval(x).powi(n),
                None => a.eval(x).powf(b.eval(x)),
            },
            Node::Call(f, a) => {
                let a = a.eval(x);
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Tan => a.tan(),
                    Func::Exp => a.exp(),
                    Func::Log => a.ln(),
                    Func::Sqrt => a.sqrt(),
                    Func::Abs => a.abs(),
                    Func::Acos => a.acos(),
                    Func::Asin => a.asin(),
                }
            }
        }
    }

    fn integer_value(&self) -> Option<i32> {
        match self {
            Node::Num { value, .. } if value.fract() == 0.0 && value.abs() < 1e6 => Some(*value as i32),
            Node::Neg(a) => a.integer_value().map(|n| -n),
            _ => None,
        }
    }

    fn degree(&self) -> Option<u32> {
        match self {
            Node::X => Some(1),
            Node::Pi | Node::Num { .. } => Some(0),
            Node::Neg(a) => a.degree(),
            Node::Bin(op, a, b) => {
                let (da, db) = (a.degree()?, b.degree()?);
                match op {
                    BinOp::Add | BinOp::Sub => Some(da.max(db)),
                    BinOp::Mul => Some(da + db),
                    BinOp::Div => (db == 0).then_some(da),
                }
            }
            Node::Pow(a, b) => {
                let da = a.degree()?;
                match b.integer_value() {
                    Some(n) if n >= 0 => Some(da * n as u32),
                    _ => (da == 0 && b.degree()? == 0).then_some(0),
                }
            }
            Node::Call(_, a) => (a.degree()? == 0).then_some(0),
        }
    }

    fn any(&self, pred: &dyn Fn(&Node) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Node::Neg(a) | Node::Call(_, a) => a.any(pred),
            Node::Bin(_, a, b) | Node::Pow(a, b) => a.any(pred) || b.any(pred),
            _ => false,
        }
    }
}

/// A parsed expression together with its source text.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub root: Node,
    source: String,
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr> {
        Self::parse_at(text, 0)
    }

    /// Parses `text`, reporting error positions offset by `base` so errors
    /// inside a larger document point at the right byte.
    pub fn parse_at(text: &str, base: usize) -> Result<Expr> {
        let tokens = lex(text, base)?;
        let mut p = Parser { tokens, pos: 0, end: base + text.len() };
        let root = p.expr()?;
        if let Some(t) = p.peek() {
            return Err(Error::Syntax { pos: t.pos, expected: "operator or end of expression".into(), found: t.describe() });
        }
        Ok(Expr { root, source: text.trim().to_string() })
    }

    pub fn eval<T: Scalar>(&self, x: T) -> T {
        self.root.eval(x)
    }

    /// True when the expression uses a function that has no holomorphic
    /// extension (currently only `abs`).
    /// Degree when the expression is a polynomial in x, judged syntactically
    /// (so `sqrt(x)^2` is not recognised).
    pub fn polynomial_degree(&self) -> Option<u32> {
        self.root.degree()
    }

    pub fn uses_abs(&self) -> bool {
        self.root.any(&|n| matches!(n, Node::Call(Func::Abs, _)))
    }

    /// True when the expression does not mention `x`.
    pub fn is_constant(&self) -> bool {
        !self.root.any(&|n| matches!(n, Node::X))
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64, bool),
    Ident(String),
    Sym(char),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    pos: usize,
}

impl Token {
    fn describe(&self) -> String {
        match &self.tok {
            Tok::Num(v, _) => format!("number {v}"),
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Sym(c) => format!("'{c}'"),
        }
    }
}

/// Whether the decimal literal `text` converts to binary64 without rounding.
fn decimal_is_exact(text: &str) -> bool {
    let lower = text.to_ascii_lowercase();
    let (mant, exp) = match lower.split_once('e') {
        Some((m, e)) => match e.parse::<i32>() {
            Ok(e) => (m.to_string(), e),
            Err(_) => return false,
        },
        None => (lower, 0),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((&mant, ""));
    let mut digits: String = format!("{int}{frac}");
    let mut e10 = exp - frac.len() as i32;
    while digits.len() > 1 && digits.ends_with('0') {
        digits.pop();
        e10 += 1;
    }
    let digits = digits.trim_start_matches('0');
    if digits.is_empty() {
        return true;
    }
    let Ok(mut m) = digits.parse::<u128>() else { return false };
    const LIMIT: u128 = 1 << 53;
    if e10 >= 0 {
        for _ in 0..e10 {
            m = match m.checked_mul(10) {
                Some(v) => v,
                None => return false,
            };
        }
        return m <= LIMIT;
    }
    for _ in 0..(-e10) {
        if m % 5 != 0 {
            return false;
        }
        m /= 5;
    }
    m <= LIMIT
}

fn lex(text: &str, base: usize) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == '.' && i + 1 < bytes.len() && (bytes[i + 1] as char).is_ascii_digit()) {
            while i < bytes.len() && ((bytes[i] as char).is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s = &text[start..i];
            let v: f64 = s.parse().map_err(|_| Error::Syntax { pos: base + start, expected: "number".into(), found: format!("'{s}'") })?;
            out.push(Token { tok: Tok::Num(v, decimal_is_exact(s)), pos: base + start });
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(text[start..i].to_string()), pos: base + start });
        } else if "+-*/^()".contains(c) {
            out.push(Token { tok: Tok::Sym(c), pos: base + start });
            i += 1;
        } else {
            let ch = text[start..].chars().next().unwrap_or('?');
            return Err(Error::Syntax {
                pos: base + start,
                expected: "number, 'x', function or operator".into(),
                found: format!("'{ch}'"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_sym(&self, c: char) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Sym(s), .. }) if *s == c)
    }

    fn err(&self, expected: &str) -> Error {
        match self.peek() {
            Some(t) => Error::Syntax { pos: t.pos, expected: expected.into(), found: t.describe() },
            None => Error::Syntax { pos: self.end, expected: expected.into(), found: "end of expression".into() },
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<()> {
        if self.peek_sym(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("'{c}'")))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.peek_sym('+') {
                BinOp::Add
            } else if self.peek_sym('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.peek_sym('*') {
                BinOp::Mul
            } else if self.peek_sym('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.peek_sym('-') {
            self.pos += 1;
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.peek_sym('+') {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if self.peek_sym('^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node> {
        let Some(t) = self.peek().cloned() else {
            return Err(self.err("number, 'x', function or '('"));
        };
        match t.tok {
            Tok::Num(value, exact) => {
                self.pos += 1;
                Ok(Node::Num { value, exact })
            }
            Tok::Sym('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Tok::Ident(ref name) if name == "x" => {
                self.pos += 1;
                Ok(Node::X)
            }
            Tok::Ident(ref name) if name == "pi" => {
                self.pos += 1;
                Ok(Node::Pi)
            }
            Tok::Ident(ref name) => match Func::from_name(name) {
                Some(f) => {
                    self.pos += 1;
                    self.expect_sym('(')?;
                    let arg = self.expr()?;
                    self.expect_sym(')')?;
                    Ok(Node::Call(f, Box::new(arg)))
                }
                None => Err(Error::Syntax { pos: t.pos, expected: "'x', 'pi' or a function name".into(), found: format!("'{name}'") }),
            },
            _ => Err(self.err("number, 'x', function or '('")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Interval;

    fn ev(s: &str, x: f64) -> f64 {
        Expr::parse(s).unwrap().eval(x)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3", 0.0), 7.0);
        assert_eq!(ev("-x^2", 3.0), -9.0);
        assert_eq!(ev("2^3^2", 0.0), 512.0);
        assert_eq!(ev("8 / 4 / 2", 0.0), 1.0);
        assert_eq!(ev("2^-1", 0.0), 0.5);
        assert!((ev("5*x/2 - x^2/2", 0.5) - 1.125).abs() < 1e-15);
    }

    #[test]
    fn functions_and_pi() {
        assert!((ev("cos(pi)", 0.0) + 1.0).abs() < 1e-15);
        assert!((ev("sqrt(abs(x))", -4.0) - 2.0).abs() < 1e-15);
        assert!((ev("log(exp(x))", 1.25) - 1.25).abs() < 1e-15);
        assert!((ev("acos(x) + asin(x)", 0.3) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn syntax_errors_report_position_and_expectation() {
        match Expr::parse("2 * (x + 1") {
            Err(Error::Syntax { pos, expected, .. }) => {
                assert_eq!(pos, 10);
                assert!(expected.contains(')'));
            }
            other => panic!("{other:?}"),
        }
        match Expr::parse("x + foo(1)") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        assert!(Expr::parse("x $ 2").is_err());
        assert!(Expr::parse("x x").is_err());
    }

    #[test]
    fn literal_exactness() {
        assert!(decimal_is_exact("0.5"));
        assert!(decimal_is_exact("2.5e1"));
        assert!(decimal_is_exact("3"));
        assert!(!decimal_is_exact("0.1"));
        assert!(!decimal_is_exact("1e-1"));
        assert!(decimal_is_exact("0.125"));
    }

    #[test]
    fn inexact_literal_is_widened_in_intervals() {
        let e = Expr::parse("0.1").unwrap();
        let i: Interval = e.eval(Interval::point(0.0));
        assert!(i.lo < 0.1 && 0.1 < i.hi);
        let e = Expr::parse("0.5").unwrap();
        let i: Interval = e.eval(Interval::point(0.0));
        assert_eq!((i.lo, i.hi), (0.5, 0.5));
    }

    #[test]
    fn abs_detection() {
        assert!(Expr::parse("1 + abs(x)").unwrap().uses_abs());
        assert!(!Expr::parse("sin(x)").unwrap().uses_abs());
    }

    #[test]
    fn polynomial_degrees() {
        let d = |s: &str| Expr::parse(s).unwrap().polynomial_degree();
        assert_eq!(d("x^2"), Some(2));
        assert_eq!(d("(x - 1)*(x + 1)^3/4 + pi"), Some(4));
        assert_eq!(d("cos(2)*x"), Some(1));
        assert_eq!(d("1/x"), None);
        assert_eq!(d("sin(x)"), None);
        assert_eq!(d("x^0.5"), None);
    }
}
