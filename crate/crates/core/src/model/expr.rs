//! Coefficient expressions: the text grammar used in problem files, its
//! parser, and a small tree-walking evaluator.
//!
//! The grammar is documented in `GRAMMAR.md` at the crate root. Values are
//! either scalars or vectors (the state `x` and the row vector `z`); a vector
//! of length one is accepted wherever a scalar is expected.

use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::error::{Error, Result};

/// Which coefficient of the forward-backward system an expression describes.
/// Determines the variables the expression may reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Slot {
    Drift,
    Diffusion,
    Driver,
    Terminal,
}

impl Slot {
    fn allows(self, var: &Var) -> bool {
        match (self, var) {
            (_, Var::X(_)) => true,
            (Slot::Terminal, _) => false,
            (_, Var::T) => true,
            (Slot::Driver, Var::Y | Var::Z(_)) => true,
            _ => false,
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Slot::Drift => "drift",
            Slot::Diffusion => "diffusion",
            Slot::Driver => "driver",
            Slot::Terminal => "terminal",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("function `{func}` takes {expected} argument(s), got {got}")]
    Arity {
        func: &'static str,
        expected: &'static str,
        got: usize,
    },
}

/// A parse failure with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} at position {position}")]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    T,
    Y,
    /// `None` is the whole state vector, `Some(i)` its i-th component.
    X(Option<usize>),
    Z(Option<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Abs,
    Sqrt,
    Sin,
    Cos,
    Norm,
    Min,
    Max,
    Dot,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "norm" => Func::Norm,
            "min" => Func::Min,
            "max" => Func::Max,
            "dot" => Func::Dot,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Norm => "norm",
            Func::Min => "min",
            Func::Max => "max",
            Func::Dot => "dot",
        }
    }

    fn check_arity(self, got: usize) -> std::result::Result<(), ParseErrorKind> {
        let (ok, expected) = match self {
            Func::Min | Func::Max => (got >= 2, "at least 2"),
            Func::Dot => (got == 2, "2"),
            _ => (got == 1, "1"),
        };
        if ok {
            Ok(())
        } else {
            Err(ParseErrorKind::Arity {
                func: self.name(),
                expected,
                got,
            })
        }
    }
}

/// Expression tree node.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

impl Node {
    pub fn num(v: f64) -> Node {
        Node::Num(v)
    }
    pub fn t() -> Node {
        Node::Var(Var::T)
    }
    pub fn y() -> Node {
        Node::Var(Var::Y)
    }
    /// The whole state vector.
    pub fn x() -> Node {
        Node::Var(Var::X(None))
    }
    pub fn xi(i: usize) -> Node {
        Node::Var(Var::X(Some(i)))
    }
    /// The whole `z` row vector.
    pub fn z() -> Node {
        Node::Var(Var::Z(None))
    }
    pub fn zi(i: usize) -> Node {
        Node::Var(Var::Z(Some(i)))
    }
    pub fn bin(op: BinOp, a: Node, b: Node) -> Node {
        Node::Bin(op, Box::new(a), Box::new(b))
    }
    pub fn call(f: Func, args: Vec<Node>) -> Node {
        Node::Call(f, args)
    }
    pub fn add(a: Node, b: Node) -> Node {
        Node::bin(BinOp::Add, a, b)
    }
    pub fn sub(a: Node, b: Node) -> Node {
        Node::bin(BinOp::Sub, a, b)
    }
    pub fn mul(a: Node, b: Node) -> Node {
        Node::bin(BinOp::Mul, a, b)
    }
    pub fn div(a: Node, b: Node) -> Node {
        Node::bin(BinOp::Div, a, b)
    }
    pub fn pow(a: Node, b: Node) -> Node {
        Node::bin(BinOp::Pow, a, b)
    }

    fn visit_vars(&self, f: &mut impl FnMut(&Var)) {
        match self {
            Node::Num(_) => {}
            Node::Var(v) => f(v),
            Node::Neg(a) => a.visit_vars(f),
            Node::Bin(_, a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Node::Call(_, args) => args.iter().for_each(|a| a.visit_vars(f)),
        }
    }
}

/// Variable bindings for one evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Env<'a> {
    pub t: f64,
    pub x: &'a [f64],
    pub y: f64,
    pub z: &'a [f64],
}

impl<'a> Env<'a> {
    pub fn state(t: f64, x: &'a [f64]) -> Self {
        Env { t, x, y: 0.0, z: &[] }
    }
}

type Vector = SmallVec<[f64; 4]>;

#[derive(Debug, Clone)]
enum Value {
    Scalar(f64),
    Vector(Vector),
}

fn domain(op: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        op,
        detail: detail.into(),
    }
}

fn finite(op: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain(op, format!("non-finite result {v}")))
    }
}

impl Value {
    fn scalar(self, op: &'static str) -> Result<f64> {
        match self {
            Value::Scalar(s) => Ok(s),
            Value::Vector(v) if v.len() == 1 => Ok(v[0]),
            Value::Vector(v) => Err(domain(
                op,
                format!("expected a scalar, got a vector of length {}", v.len()),
            )),
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn eval_node(node: &Node, env: &Env<'_>) -> Result<Value> {
    Ok(match node {
        Node::Num(v) => Value::Scalar(*v),
        Node::Var(var) => match *var {
            Var::T => Value::Scalar(env.t),
            Var::Y => Value::Scalar(env.y),
            Var::X(None) => Value::Vector(SmallVec::from_slice(env.x)),
            Var::Z(None) => Value::Vector(SmallVec::from_slice(env.z)),
            Var::X(Some(i)) => Value::Scalar(*env.x.get(i).ok_or_else(|| {
                domain("x", format!("index {i} out of range for dimension {}", env.x.len()))
            })?),
            Var::Z(Some(i)) => Value::Scalar(*env.z.get(i).ok_or_else(|| {
                domain("z", format!("index {i} out of range for dimension {}", env.z.len()))
            })?),
        },
        Node::Neg(a) => match eval_node(a, env)? {
            Value::Scalar(s) => Value::Scalar(-s),
            Value::Vector(v) => Value::Vector(v.iter().map(|a| -a).collect()),
        },
        Node::Bin(op, a, b) => eval_bin(*op, eval_node(a, env)?, eval_node(b, env)?)?,
        Node::Call(func, args) => eval_call(*func, args, env)?,
    })
}

fn eval_bin(op: BinOp, a: Value, b: Value) -> Result<Value> {
    let elementwise = |v: &[f64], f: &dyn Fn(f64) -> Result<f64>| -> Result<Value> {
        Ok(Value::Vector(v.iter().map(|x| f(*x)).collect::<Result<Vector>>()?))
    };
    match (coerce(a), coerce(b)) {
        (Value::Scalar(a), Value::Scalar(b)) => Ok(Value::Scalar(scalar_bin(op, a, b)?)),
        (Value::Vector(a), Value::Vector(b)) if matches!(op, BinOp::Add | BinOp::Sub) => {
            if a.len() != b.len() {
                return Err(domain("+/-", "vector length mismatch"));
            }
            let out = a
                .iter()
                .zip(b.iter())
                .map(|(x, y)| scalar_bin(op, *x, *y))
                .collect::<Result<Vector>>()?;
            Ok(Value::Vector(out))
        }
        (Value::Scalar(s), Value::Vector(v)) if op == BinOp::Mul => {
            elementwise(&v, &|x| scalar_bin(op, s, x))
        }
        (Value::Vector(v), Value::Scalar(s)) if matches!(op, BinOp::Mul | BinOp::Div) => {
            elementwise(&v, &|x| scalar_bin(op, x, s))
        }
        _ => Err(domain(
            "operator",
            "unsupported vector operation (use dot() for inner products)",
        )),
    }
}

fn coerce(v: Value) -> Value {
    match v {
        Value::Vector(v) if v.len() == 1 => Value::Scalar(v[0]),
        other => other,
    }
}

fn scalar_bin(op: BinOp, a: f64, b: f64) -> Result<f64> {
    match op {
        BinOp::Add => finite("+", a + b),
        BinOp::Sub => finite("-", a - b),
        BinOp::Mul => finite("*", a * b),
        BinOp::Div => {
            if b == 0.0 {
                Err(domain("/", "division by zero"))
            } else {
                finite("/", a / b)
            }
        }
        BinOp::Pow => {
            let v = if b.fract() == 0.0 && b.abs() <= 64.0 {
                a.powi(b as i32)
            } else {
                a.powf(b)
            };
            finite("^", v)
        }
    }
}

fn eval_call(func: Func, args: &[Node], env: &Env<'_>) -> Result<Value> {
    let name = func.name();
    let scalar_arg = |i: usize| -> Result<f64> { eval_node(&args[i], env)?.scalar(name) };
    let v = match func {
        Func::Exp => finite(name, scalar_arg(0)?.exp())?,
        Func::Log => {
            let a = scalar_arg(0)?;
            if a <= 0.0 {
                return Err(domain(name, format!("log of nonpositive value {a}")));
            }
            a.ln()
        }
        Func::Sqrt => {
            let a = scalar_arg(0)?;
            if a < 0.0 {
                return Err(domain(name, format!("sqrt of negative value {a}")));
            }
            a.sqrt()
        }
        Func::Sin => scalar_arg(0)?.sin(),
        Func::Cos => scalar_arg(0)?.cos(),
        Func::Abs | Func::Norm => match eval_node(&args[0], env)? {
            Value::Scalar(s) => s.abs(),
            Value::Vector(v) => finite(name, norm(&v))?,
        },
        Func::Min | Func::Max => {
            let mut acc = scalar_arg(0)?;
            for i in 1..args.len() {
                let b = scalar_arg(i)?;
                acc = if func == Func::Min { acc.min(b) } else { acc.max(b) };
            }
            acc
        }
        Func::Dot => {
            let a = eval_node(&args[0], env)?;
            let b = eval_node(&args[1], env)?;
            match (a, b) {
                (Value::Vector(a), Value::Vector(b)) if a.len() == b.len() => {
                    finite(name, a.iter().zip(b.iter()).map(|(p, q)| p * q).sum())?
                }
                (a, b) => {
                    let (a, b) = (a.scalar(name)?, b.scalar(name)?);
                    finite(name, a * b)?
                }
            }
        }
    };
    Ok(Value::Scalar(v))
}

/// A validated coefficient expression for one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientExpr {
    source: String,
    root: Node,
    slot: Slot,
}

impl CoefficientExpr {
    /// Wraps a programmatically built tree, validating variables against the slot.
    pub fn from_node(root: Node, slot: Slot) -> Result<Self> {
        if let Some(bad) = first_disallowed(&root, slot) {
            return Err(ParseError {
                position: 0,
                kind: ParseErrorKind::UnknownIdentifier(bad),
            }
            .into());
        }
        Ok(CoefficientExpr {
            source: root.to_string(),
            root,
            slot,
        })
    }

    pub fn constant(v: f64, slot: Slot) -> Self {
        CoefficientExpr {
            source: Node::Num(v).to_string(),
            root: Node::Num(v),
            slot,
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn slot(&self) -> Slot {
        self.slot
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Evaluates to a scalar; non-finite intermediate values are domain errors.
    pub fn eval(&self, env: &Env<'_>) -> Result<f64> {
        eval_node(&self.root, env)?.scalar("result")
    }

    pub fn references_x(&self) -> bool {
        self.any_var(|v| matches!(v, Var::X(_)))
    }

    pub fn references_t(&self) -> bool {
        self.any_var(|v| matches!(v, Var::T))
    }

    fn any_var(&self, pred: impl Fn(&Var) -> bool) -> bool {
        let mut hit = false;
        self.root.visit_vars(&mut |v| hit |= pred(v));
        hit
    }

    /// Largest explicit component index used for `x` and `z`.
    pub fn max_indices(&self) -> (Option<usize>, Option<usize>) {
        let (mut xi, mut zi) = (None, None);
        self.root.visit_vars(&mut |v| match v {
            Var::X(Some(i)) => xi = xi.max(Some(*i)),
            Var::Z(Some(i)) => zi = zi.max(Some(*i)),
            _ => {}
        });
        (xi, zi)
    }

    /// True when the tree is the literal constant zero.
    pub fn is_zero(&self) -> bool {
        matches!(self.root, Node::Num(v) if v == 0.0)
    }
}

impl Serialize for CoefficientExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.source)
    }
}

fn first_disallowed(node: &Node, slot: Slot) -> Option<String> {
    let mut bad = None;
    node.visit_vars(&mut |v| {
        if bad.is_none() && !slot.allows(v) {
            bad = Some(Node::Var(*v).to_string());
        }
    });
    bad
}

/// Parses `source` for the given slot.
pub fn parse_coefficient(source: &str, slot: Slot) -> std::result::Result<CoefficientExpr, ParseError> {
    let tokens = lex(source)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        end: source.len(),
        slot,
    };
    let root = p.expr()?;
    if let Some(tok) = p.peek() {
        return Err(ParseError {
            position: tok.pos,
            kind: ParseErrorKind::Syntax(format!("unexpected {}", tok.kind)),
        });
    }
    Ok(CoefficientExpr {
        source: source.trim().to_string(),
        root,
        slot,
    })
}

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
}

impl fmt::Display for TokKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokKind::Num(v) => write!(f, "number {v}"),
            TokKind::Ident(s) => write!(f, "identifier `{s}`"),
            TokKind::Op(c) => write!(f, "`{c}`"),
            TokKind::LParen => f.write_str("`(`"),
            TokKind::RParen => f.write_str("`)`"),
            TokKind::Comma => f.write_str("`,`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokKind,
    pos: usize,
}

fn lex(src: &str) -> std::result::Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let kind = if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| ParseError {
                position: start,
                kind: ParseErrorKind::Syntax(format!("malformed number `{text}`")),
            })?;
            TokKind::Num(v)
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            TokKind::Ident(src[start..i].to_string())
        } else {
            i += c.len_utf8();
            match c {
                '+' | '-' | '*' | '/' | '^' => TokKind::Op(c),
                '(' => TokKind::LParen,
                ')' => TokKind::RParen,
                ',' => TokKind::Comma,
                _ => {
                    return Err(ParseError {
                        position: start,
                        kind: ParseErrorKind::Syntax(format!("unexpected character `{c}`")),
                    })
                }
            }
        };
        out.push(Token { kind, pos: start });
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
    slot: Slot,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn here(&self) -> usize {
        self.peek().map_or(self.end, |t| t.pos)
    }

    fn syntax(&self, msg: impl Into<String>) -> ParseError {
        ParseError {
            position: self.here(),
            kind: ParseErrorKind::Syntax(msg.into()),
        }
    }

    fn eat_op(&mut self, ops: &[char]) -> Option<char> {
        match self.peek() {
            Some(Token {
                kind: TokKind::Op(c),
                ..
            }) if ops.contains(c) => {
                let c = *c;
                self.pos += 1;
                Some(c)
            }
            _ => None,
        }
    }

    fn expr(&mut self) -> std::result::Result<Node, ParseError> {
        let mut lhs = self.product()?;
        while let Some(c) = self.eat_op(&['+', '-']) {
            let rhs = self.product()?;
            lhs = Node::bin(if c == '+' { BinOp::Add } else { BinOp::Sub }, lhs, rhs);
        }
        Ok(lhs)
    }

    fn product(&mut self) -> std::result::Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(c) = self.eat_op(&['*', '/']) {
            let rhs = self.unary()?;
            lhs = Node::bin(if c == '*' { BinOp::Mul } else { BinOp::Div }, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> std::result::Result<Node, ParseError> {
        match self.eat_op(&['-', '+']) {
            Some('-') => Ok(Node::Neg(Box::new(self.unary()?))),
            Some(_) => self.unary(),
            None => self.power(),
        }
    }

    fn power(&mut self) -> std::result::Result<Node, ParseError> {
        let base = self.atom()?;
        if self.eat_op(&['^']).is_some() {
            let exp = self.unary()?;
            return Ok(Node::pow(base, exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> std::result::Result<Node, ParseError> {
        let Some(tok) = self.next() else {
            return Err(self.syntax("unexpected end of input"));
        };
        match tok.kind {
            TokKind::Num(v) => Ok(Node::Num(v)),
            TokKind::LParen => {
                let inner = self.expr()?;
                match self.next() {
                    Some(Token {
                        kind: TokKind::RParen,
                        ..
                    }) => Ok(inner),
                    _ => {
                        self.pos -= 1;
                        Err(self.syntax("expected `)`"))
                    }
                }
            }
            TokKind::Ident(name) => {
                let is_call = matches!(
                    self.peek(),
                    Some(Token {
                        kind: TokKind::LParen,
                        ..
                    })
                );
                if is_call {
                    let func = Func::from_name(&name).ok_or(ParseError {
                        position: tok.pos,
                        kind: ParseErrorKind::UnknownIdentifier(name.clone()),
                    })?;
                    self.pos += 1;
                    let args = self.args()?;
                    func.check_arity(args.len()).map_err(|kind| ParseError {
                        position: tok.pos,
                        kind,
                    })?;
                    return Ok(Node::Call(func, args));
                }
                self.ident(&name, tok.pos)
            }
            other => {
                self.pos -= 1;
                Err(self.syntax(format!("unexpected {other}")))
            }
        }
    }

    fn args(&mut self) -> std::result::Result<Vec<Node>, ParseError> {
        let mut args = Vec::new();
        if let Some(Token {
            kind: TokKind::RParen,
            ..
        }) = self.peek()
        {
            self.pos += 1;
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            match self.next().map(|t| t.kind) {
                Some(TokKind::Comma) => continue,
                Some(TokKind::RParen) => return Ok(args),
                _ => {
                    self.pos -= 1;
                    return Err(self.syntax("expected `,` or `)`"));
                }
            }
        }
    }

    fn ident(&self, name: &str, pos: usize) -> std::result::Result<Node, ParseError> {
        let unknown = || ParseError {
            position: pos,
            kind: ParseErrorKind::UnknownIdentifier(name.to_string()),
        };
        let var = match name {
            "pi" => return Ok(Node::Num(std::f64::consts::PI)),
            "t" => Var::T,
            "y" => Var::Y,
            "x" => Var::X(None),
            "z" => Var::Z(None),
            _ => {
                let (head, digits) = name.split_at(1);
                if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(unknown());
                }
                let idx: usize = digits.parse().map_err(|_| unknown())?;
                match head {
                    "x" => Var::X(Some(idx)),
                    "z" => Var::Z(Some(idx)),
                    _ => return Err(unknown()),
                }
            }
        };
        if !self.slot.allows(&var) {
            return Err(unknown());
        }
        Ok(Node::Var(var))
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Num(v) => {
                if *v < 0.0 {
                    write!(f, "(-{})", -v)
                } else {
                    write!(f, "{v}")
                }
            }
            Node::Var(Var::T) => f.write_str("t"),
            Node::Var(Var::Y) => f.write_str("y"),
            Node::Var(Var::X(None)) => f.write_str("x"),
            Node::Var(Var::Z(None)) => f.write_str("z"),
            Node::Var(Var::X(Some(i))) => write!(f, "x{i}"),
            Node::Var(Var::Z(Some(i))) => write!(f, "z{i}"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Bin(op, a, b) => {
                let c = match op {
                    BinOp::Add => '+',
                    BinOp::Sub => '-',
                    BinOp::Mul => '*',
                    BinOp::Div => '/',
                    BinOp::Pow => '^',
                };
                write!(f, "({a} {c} {b})")
            }
            Node::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}
