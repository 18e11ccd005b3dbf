//! A small arithmetic expression language over `x1..xn` (aliases `x,y,z`
//! for dimensions up to 3) with exact gradients via forward-mode dual
//! numbers.
//!
//! Grammar (precedence `^` > unary `-` > `*` `/` > `+` `-`):
//!
//! ```text
//! expr    := term (("+"|"-") term)*
//! term    := unary (("*"|"/") unary)*
//! unary   := "-" unary | postfix
//! postfix := base ("^" ("-")? number)?
//! base    := number | ident | "(" expr ")" | func "(" expr ")"
//! func    := sin | cos | exp | log | sqrt | abs | neg
//! ```
//!
//! Exponents are constant literals; general `f^g` is rejected so that
//! differentiation stays total.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use core::fmt;

use crate::num;

/// Maximum number of variables supported by the dual-number evaluator.
pub const MAX_VARS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
}

/// Expression AST node. `Var` indices are 0-based internally.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Var(usize),
    Num(f64),
    Bin(BinOp, Box<Node>, Box<Node>),
    Pow(Box<Node>, f64),
    Neg(Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed, immutable expression together with its ambient dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
    dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedEnd,
    UnknownIdent(String),
    VariableOutOfRange { index: usize, dim: usize },
    NonConstantExponent,
    TrailingInput,
    EmptyInput,
    BadDimension(usize),
    BadNumber,
}

/// Syntax error with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::UnexpectedChar(c) => {
                write!(f, "unexpected character '{}' at offset {}", c, self.offset)
            }
            ParseErrorKind::UnexpectedEnd => {
                write!(f, "unexpected end of input at offset {}", self.offset)
            }
            ParseErrorKind::UnknownIdent(s) => {
                write!(f, "unknown identifier '{}' at offset {}", s, self.offset)
            }
            ParseErrorKind::VariableOutOfRange { index, dim } => write!(
                f,
                "variable x{} exceeds dimension {} (offset {})",
                index, dim, self.offset
            ),
            ParseErrorKind::NonConstantExponent => write!(
                f,
                "exponent must be a numeric constant (offset {})",
                self.offset
            ),
            ParseErrorKind::TrailingInput => {
                write!(f, "trailing input at offset {}", self.offset)
            }
            ParseErrorKind::EmptyInput => write!(f, "empty expression"),
            ParseErrorKind::BadDimension(d) => {
                write!(f, "dimension {} outside supported range 1..={}", d, MAX_VARS)
            }
            ParseErrorKind::BadNumber => write!(f, "malformed number at offset {}", self.offset),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ParseError {}

/// Runtime evaluation failure, naming the offending operation.
#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    Domain { op: &'static str, arg: f64 },
    DivisionByZero,
    DimensionMismatch { expected: usize, got: usize },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::Domain { op, arg } => write!(f, "domain error: {}({})", op, arg),
            EvalError::DivisionByZero => write!(f, "division by zero"),
            EvalError::DimensionMismatch { expected, got } => {
                write!(f, "point has dimension {}, expected {}", got, expected)
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for EvalError {}

/// Value and gradient at a point, plus a flag set when the subgradient
/// convention for `abs` at 0 was used.
#[derive(Debug, Clone, Copy)]
pub struct EvalGrad {
    pub value: f64,
    grad: [f64; MAX_VARS],
    dim: usize,
    pub abs_subgradient: bool,
}

impl EvalGrad {
    pub fn gradient(&self) -> &[f64] {
        &self.grad[..self.dim]
    }

    pub fn gradient_norm(&self) -> f64 {
        num::norm(self.gradient())
    }
}

#[derive(Clone, Copy)]
struct Dual {
    v: f64,
    d: [f64; MAX_VARS],
}

impl Dual {
    fn constant(v: f64) -> Self {
        Dual { v, d: [0.0; MAX_VARS] }
    }
}

impl Expression {
    /// Parses `text` as an expression over `dim` variables.
    pub fn parse(text: &str, dim: usize) -> Result<Expression, ParseError> {
        if !(1..=MAX_VARS).contains(&dim) {
            return Err(ParseError { kind: ParseErrorKind::BadDimension(dim), offset: 0 });
        }
        let mut p = Parser { src: text.as_bytes(), pos: 0, dim };
        p.skip_ws();
        if p.pos >= p.src.len() {
            return Err(ParseError { kind: ParseErrorKind::EmptyInput, offset: 0 });
        }
        let root = p.expr()?;
        p.skip_ws();
        if p.pos < p.src.len() {
            return Err(ParseError { kind: ParseErrorKind::TrailingInput, offset: p.pos });
        }
        Ok(Expression { root, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Evaluates the expression at `p`.
    pub fn eval(&self, p: &[f64]) -> Result<f64, EvalError> {
        Ok(self.eval_with_gradient(p)?.value)
    }

    /// Evaluates value and gradient at `p` in a single dual-number pass.
    pub fn eval_with_gradient(&self, p: &[f64]) -> Result<EvalGrad, EvalError> {
        if p.len() != self.dim {
            return Err(EvalError::DimensionMismatch { expected: self.dim, got: p.len() });
        }
        let mut abs_flag = false;
        let d = eval_node(&self.root, p, &mut abs_flag)?;
        Ok(EvalGrad { value: d.v, grad: d.d, dim: self.dim, abs_subgradient: abs_flag })
    }
}

fn eval_node(node: &Node, p: &[f64], abs_flag: &mut bool) -> Result<Dual, EvalError> {
    match node {
        Node::Num(v) => Ok(Dual::constant(*v)),
        Node::Var(i) => {
            let mut d = Dual::constant(p[*i]);
            d.d[*i] = 1.0;
            Ok(d)
        }
        Node::Neg(a) => {
            let mut a = eval_node(a, p, abs_flag)?;
            a.v = -a.v;
            for g in &mut a.d {
                *g = -*g;
            }
            Ok(a)
        }
        Node::Bin(op, a, b) => {
            let a = eval_node(a, p, abs_flag)?;
            let b = eval_node(b, p, abs_flag)?;
            let mut out = Dual::constant(0.0);
            match op {
                BinOp::Add => {
                    out.v = a.v + b.v;
                    for i in 0..MAX_VARS {
                        out.d[i] = a.d[i] + b.d[i];
                    }
                }
                BinOp::Sub => {
                    out.v = a.v - b.v;
                    for i in 0..MAX_VARS {
                        out.d[i] = a.d[i] - b.d[i];
                    }
                }
                BinOp::Mul => {
                    out.v = a.v * b.v;
                    for i in 0..MAX_VARS {
                        out.d[i] = a.d[i] * b.v + a.v * b.d[i];
                    }
                }
                BinOp::Div => {
                    if b.v == 0.0 {
                        return Err(EvalError::DivisionByZero);
                    }
                    out.v = a.v / b.v;
                    let inv2 = 1.0 / (b.v * b.v);
                    for i in 0..MAX_VARS {
                        out.d[i] = (a.d[i] * b.v - a.v * b.d[i]) * inv2;
                    }
                }
            }
            Ok(out)
        }
        Node::Pow(a, e) => {
            let a = eval_node(a, p, abs_flag)?;
            let e = *e;
            let is_int = e == num::floor(e);
            if a.v < 0.0 && !is_int {
                return Err(EvalError::Domain { op: "pow", arg: a.v });
            }
            if a.v == 0.0 && e < 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            let v = num::powf(a.v, e);
            // d/dx b^e = e * b^(e-1) * b'; at b = 0 with 0 < e <= 1 the
            // one-sided derivative may be infinite, which is propagated.
            let factor = if a.v == 0.0 && e > 1.0 { 0.0 } else { e * num::powf(a.v, e - 1.0) };
            let mut out = Dual::constant(v);
            for i in 0..MAX_VARS {
                out.d[i] = factor * a.d[i];
            }
            Ok(out)
        }
        Node::Call(f, a) => {
            let a = eval_node(a, p, abs_flag)?;
            let (v, factor) = match f {
                Func::Sin => (num::sin(a.v), num::cos(a.v)),
                Func::Cos => (num::cos(a.v), -num::sin(a.v)),
                Func::Exp => {
                    let e = num::exp(a.v);
                    (e, e)
                }
                Func::Log => {
                    if a.v <= 0.0 {
                        return Err(EvalError::Domain { op: "log", arg: a.v });
                    }
                    (num::ln(a.v), 1.0 / a.v)
                }
                Func::Sqrt => {
                    if a.v < 0.0 {
                        return Err(EvalError::Domain { op: "sqrt", arg: a.v });
                    }
                    let s = num::sqrt(a.v);
                    (s, if a.v == 0.0 { f64::INFINITY } else { 0.5 / s })
                }
                Func::Abs => {
                    if a.v == 0.0 {
                        *abs_flag = true;
                        (0.0, 0.0)
                    } else {
                        (num::abs(a.v), if a.v > 0.0 { 1.0 } else { -1.0 })
                    }
                }
            };
            let mut out = Dual::constant(v);
            for i in 0..MAX_VARS {
                out.d[i] = factor * a.d[i];
            }
            Ok(out)
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { kind, offset: self.pos }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Node::Bin(BinOp::Add, Box::new(lhs), Box::new(rhs));
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Node::Bin(BinOp::Sub, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = Node::Bin(BinOp::Mul, Box::new(lhs), Box::new(rhs));
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = Node::Bin(BinOp::Div, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        self.skip_ws();
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(Node::Neg(Box::new(inner)));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Node, ParseError> {
        let base = self.base()?;
        self.skip_ws();
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let neg = if self.peek() == Some(b'-') {
                self.pos += 1;
                self.skip_ws();
                true
            } else {
                false
            };
            match self.peek() {
                Some(c) if c.is_ascii_digit() || c == b'.' => {
                    let e = self.number()?;
                    return Ok(Node::Pow(Box::new(base), if neg { -e } else { e }));
                }
                Some(_) => return Err(self.err(ParseErrorKind::NonConstantExponent)),
                None => return Err(self.err(ParseErrorKind::UnexpectedEnd)),
            }
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Node, ParseError> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.err(ParseErrorKind::UnexpectedEnd)),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.skip_ws();
                if self.peek() == Some(b')') {
                    self.pos += 1;
                    Ok(inner)
                } else if self.peek().is_none() {
                    Err(self.err(ParseErrorKind::UnexpectedEnd))
                } else {
                    Err(self.err(ParseErrorKind::UnexpectedChar(self.peek().unwrap() as char)))
                }
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Node::Num(self.number()?)),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(c) => Err(self.err(ParseErrorKind::UnexpectedChar(c as char))),
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == b'.') {
            self.pos += 1;
        }
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                // "e" belonged to something else (or nothing); back off.
                self.pos = mark;
            }
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>().map_err(|_| ParseError {
            kind: ParseErrorKind::BadNumber,
            offset: start,
        })
    }

    fn ident(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric()) {
            self.pos += 1;
        }
        let name = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let func = match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sqrt" => Some(Func::Sqrt),
            "abs" => Some(Func::Abs),
            "neg" => None, // handled below, lowered to unary minus
            _ => {
                let var = self.var_index(name).ok_or(ParseError {
                    kind: ParseErrorKind::UnknownIdent(name.to_string()),
                    offset: start,
                })?;
                if var >= self.dim {
                    return Err(ParseError {
                        kind: ParseErrorKind::VariableOutOfRange { index: var + 1, dim: self.dim },
                        offset: start,
                    });
                }
                return Ok(Node::Var(var));
            }
        };
        self.skip_ws();
        if self.peek() != Some(b'(') {
            return Err(self.err(ParseErrorKind::UnexpectedChar(
                self.peek().map(|c| c as char).unwrap_or(' '),
            )));
        }
        self.pos += 1;
        let arg = self.expr()?;
        self.skip_ws();
        if self.peek() != Some(b')') {
            return Err(if self.peek().is_none() {
                self.err(ParseErrorKind::UnexpectedEnd)
            } else {
                self.err(ParseErrorKind::UnexpectedChar(self.peek().unwrap() as char))
            });
        }
        self.pos += 1;
        Ok(match func {
            Some(f) => Node::Call(f, Box::new(arg)),
            None => Node::Neg(Box::new(arg)),
        })
    }

    fn var_index(&self, name: &str) -> Option<usize> {
        match name {
            "x" if self.dim <= 3 => return Some(0),
            "y" if self.dim <= 3 => return Some(1),
            "z" if self.dim <= 3 => return Some(2),
            _ => {}
        }
        let rest = name.strip_prefix('x')?;
        if rest.is_empty() || rest.starts_with('0') {
            return None;
        }
        rest.parse::<usize>().ok().map(|i| i - 1)
    }
}

// Serialization. Parenthesization follows the grammar so that parsing the
// output reproduces the AST exactly.

fn prec(node: &Node) -> u8 {
    match node {
        Node::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Node::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Node::Neg(..) => 3,
        Node::Pow(..) => 4,
        Node::Var(..) | Node::Num(..) | Node::Call(..) => 5,
    }
}

fn write_node(f: &mut fmt::Formatter<'_>, node: &Node, dim: usize) -> fmt::Result {
    let child = |f: &mut fmt::Formatter<'_>, c: &Node, min: u8| -> fmt::Result {
        if prec(c) < min {
            write!(f, "(")?;
            write_node(f, c, dim)?;
            write!(f, ")")
        } else {
            write_node(f, c, dim)
        }
    };
    match node {
        Node::Var(i) => {
            if dim <= 3 {
                write!(f, "{}", ["x", "y", "z"][*i])
            } else {
                write!(f, "x{}", i + 1)
            }
        }
        Node::Num(v) => write!(f, "{}", v),
        Node::Neg(a) => {
            write!(f, "-")?;
            child(f, a, 3)
        }
        Node::Bin(op, a, b) => {
            let (sym, p) = match op {
                BinOp::Add => ("+", 1),
                BinOp::Sub => ("-", 1),
                BinOp::Mul => ("*", 2),
                BinOp::Div => ("/", 2),
            };
            child(f, a, p)?;
            write!(f, "{}", sym)?;
            // Subtraction and division do not associate to the right.
            let min_r = if matches!(op, BinOp::Sub | BinOp::Div) { p + 1 } else { p };
            child(f, b, min_r)
        }
        Node::Pow(a, e) => {
            child(f, a, 5)?;
            if *e < 0.0 {
                write!(f, "^-{}", -e)
            } else {
                write!(f, "^{}", e)
            }
        }
        Node::Call(func, a) => {
            let name = match func {
                Func::Sin => "sin",
                Func::Cos => "cos",
                Func::Exp => "exp",
                Func::Log => "log",
                Func::Sqrt => "sqrt",
                Func::Abs => "abs",
            };
            write!(f, "{}(", name)?;
            write_node(f, a, dim)?;
            write!(f, ")")
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.root, self.dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse2(s: &str) -> Expression {
        Expression::parse(s, 2).unwrap()
    }

    #[test]
    fn paraboloid_parses_and_evaluates() {
        let e = parse2("x^2+y^2-1");
        let g = e.eval_with_gradient(&[1.0, 0.0]).unwrap();
        assert_eq!(g.value, 0.0);
        assert_eq!(g.gradient(), &[2.0, 0.0]);
        let g = e.eval_with_gradient(&[2.0, 0.0]).unwrap();
        assert_eq!(g.value, 3.0);
        assert_eq!(g.gradient(), &[4.0, 0.0]);
    }

    #[test]
    fn identity_expression() {
        let e = Expression::parse("x", 1).unwrap();
        assert_eq!(e.eval(&[3.0]).unwrap(), 3.0);
    }

    #[test]
    fn sine_gradient_at_zero() {
        let e = Expression::parse("sin(x)", 1).unwrap();
        let g = e.eval_with_gradient(&[0.0]).unwrap();
        assert_eq!(g.value, 0.0);
        assert_eq!(g.gradient(), &[1.0]);
    }

    #[test]
    fn syntax_error_position() {
        let err = Expression::parse("x^2+", 1).unwrap_err();
        assert_eq!(err.offset, 4);
    }

    #[test]
    fn unknown_identifier() {
        let err = Expression::parse("foo(x)", 1).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::UnknownIdent(_)));
    }

    #[test]
    fn variable_out_of_dim() {
        let err = Expression::parse("x2", 1).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::VariableOutOfRange { .. }));
        assert!(Expression::parse("y", 1).is_err());
    }

    #[test]
    fn nonconstant_exponent_rejected() {
        let err = Expression::parse("x^y", 2).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::NonConstantExponent);
    }

    #[test]
    fn domain_error_names_node() {
        let e = Expression::parse("log(x)", 1).unwrap();
        let err = e.eval(&[-1.0]).unwrap_err();
        assert_eq!(err, EvalError::Domain { op: "log", arg: -1.0 });
    }

    #[test]
    fn abs_subgradient_flagged() {
        let e = Expression::parse("abs(x)", 1).unwrap();
        let g = e.eval_with_gradient(&[0.0]).unwrap();
        assert!(g.abs_subgradient);
        assert_eq!(g.gradient(), &[0.0]);
        let g = e.eval_with_gradient(&[-2.0]).unwrap();
        assert!(!g.abs_subgradient);
        assert_eq!(g.gradient(), &[-1.0]);
    }

    #[test]
    fn precedence_matches_convention() {
        // ^ binds tighter than unary minus: -x^2 = -(x^2)
        let e = Expression::parse("-x^2", 1).unwrap();
        assert_eq!(e.eval(&[3.0]).unwrap(), -9.0);
        let e = Expression::parse("2+3*4^2", 1).unwrap();
        assert_eq!(e.eval(&[0.0]).unwrap(), 50.0);
        let e = Expression::parse("2-3-4", 1).unwrap();
        assert_eq!(e.eval(&[0.0]).unwrap(), -5.0);
    }

    #[test]
    fn neg_function_alias() {
        let e = Expression::parse("neg(x)", 1).unwrap();
        assert_eq!(e.eval(&[2.5]).unwrap(), -2.5);
    }

    #[test]
    fn serialize_parse_round_trip() {
        let cases = [
            "x^2+y^2-1",
            "sin(x)*cos(y)",
            "-x^2",
            "x- -y",
            "2-3-1",
            "(x+y)/(x-y)",
            "sqrt(abs(x*y))",
            "exp(-x)^2",
            "x/(y/2)",
            "1/(x^2+y^2)",
        ];
        for s in cases {
            let e = parse2(s);
            let printed = e.to_string();
            let reparsed = Expression::parse(&printed, 2).unwrap();
            assert_eq!(e, reparsed, "round trip failed for {} -> {}", s, printed);
        }
    }
}
