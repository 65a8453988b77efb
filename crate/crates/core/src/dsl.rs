//! The germ-description language.
//!
//! ```text
//! map G : R^3 -> R^2
//! vars x, y, z
//! G1 = x*y
//! G2 = x*z
//! assert_set V {
//!   (0, s, u)
//!   (s, 0, 0)
//! }
//! ```
//!
//! Besides `map` and `mixed` declarations a document may hold `witness`,
//! `bwitness` and `compose` items that refer to germs by name. Parsing is a
//! hand-written lexer plus recursive descent; lowering to polynomials happens in
//! a second pass so errors can point at the offending token.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::facts::Fact;
use crate::germ::{Parametrization, RealMapGerm};
use crate::laurent::{CurveFamily, LaurentPoly};
use crate::mixed::{ComplexRational, MixedExpr, MixedFunction, MixedMap};
use crate::poly::{Ctx, Polynomial, Rational, VarContext};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: {message}{}", expected_suffix(.expected))]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
    pub expected: Vec<String>,
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected one of: {})", expected.join(", "))
    }
}

impl ParseError {
    fn at(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError { line, col, message: message.into(), expected: Vec::new() }
    }
}

// ---------------------------------------------------------------- lexer

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Sym(&'static str),
    Newline,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: [&str; 15] = ["->", ":", "^", ",", "=", "+", "-", "*", "/", "(", ")", "{", "}", "[", "]"];

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            out.push(Token { tok: Tok::Newline, line, col });
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = col;
        if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                i += 1;
                col += 1;
            }
            out.push(Token { tok: Tok::Int(s.parse().expect("digits")), line, col: start });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                i += 1;
                col += 1;
            }
            out.push(Token { tok: Tok::Ident(s), line, col: start });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(*s)) {
            Some(s) => {
                out.push(Token { tok: Tok::Sym(s), line, col: start });
                i += s.len();
                col += s.len();
            }
            None => return Err(ParseError::at(line, col, format!("unexpected character `{}`", c))),
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

// ---------------------------------------------------------------- syntax tree

#[derive(Debug, Clone)]
struct Expr {
    kind: ExprKind,
    line: usize,
    col: usize,
}

#[derive(Debug, Clone)]
enum ExprKind {
    Num(BigInt),
    Ident(String),
    Conj(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
}

impl Expr {
    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::at(self.line, self.col, msg)
    }

    /// Identifiers in order of first appearance (`conj(x)` contributes `x`).
    fn idents(&self, out: &mut Vec<(String, usize, usize)>) {
        match &self.kind {
            ExprKind::Num(_) => {}
            ExprKind::Ident(n) | ExprKind::Conj(n) => {
                if !out.iter().any(|(m, _, _)| m == n) {
                    out.push((n.clone(), self.line, self.col));
                }
            }
            ExprKind::Add(a, b) | ExprKind::Sub(a, b) | ExprKind::Mul(a, b) | ExprKind::Div(a, b) => {
                a.idents(out);
                b.idents(out);
            }
            ExprKind::Neg(a) | ExprKind::Pow(a, _) => a.idents(out),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeclKind {
    Map,
    Mixed,
}

#[derive(Debug, Clone)]
struct RawSet {
    name: String,
    tuples: Vec<Vec<Expr>>,
}

#[derive(Debug, Clone)]
struct RawGerm {
    kind: DeclKind,
    name: String,
    line: usize,
    col: usize,
    source: usize,
    target: usize,
    vars: Option<Vec<(String, usize, usize)>>,
    comps: Vec<(String, Expr)>,
    declares: Vec<(String, usize, usize)>,
    sets: Vec<RawSet>,
}

#[derive(Debug, Clone)]
struct RawWitness {
    name: String,
    germ: String,
    line: usize,
    col: usize,
    stratum: Option<Vec<Expr>>,
    curve: Option<Vec<Expr>>,
    coeffs: Option<Vec<Expr>>,
}

#[derive(Debug, Clone)]
struct RawCompose {
    name: String,
    outer: String,
    inner: String,
    line: usize,
    col: usize,
    sets: Vec<RawSet>,
    closure: Option<Expr>,
}

#[derive(Debug, Clone)]
enum RawItem {
    Germ(RawGerm),
    Witness(RawWitness, bool),
    Compose(RawCompose),
}

// ---------------------------------------------------------------- parser

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: &str, expected: &[&str]) -> ParseError {
        let t = self.peek();
        let found = match &t.tok {
            Tok::Ident(s) => format!("`{}`", s),
            Tok::Int(n) => format!("`{}`", n),
            Tok::Sym(s) => format!("`{}`", s),
            Tok::Newline => "end of line".to_string(),
            Tok::Eof => "end of input".to_string(),
        };
        ParseError {
            line: t.line,
            col: t.col,
            message: format!("{}, found {}", msg, found),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(x) if x == kw)
    }

    fn eat_sym(&mut self, s: &'static str) -> Result<Token, ParseError> {
        if self.is_sym(s) {
            Ok(self.bump())
        } else {
            Err(self.error("unexpected token", &[s]))
        }
    }

    fn eat_kw(&mut self, kw: &'static str) -> Result<Token, ParseError> {
        if self.is_kw(kw) {
            Ok(self.bump())
        } else {
            Err(self.error("unexpected token", &[kw]))
        }
    }

    fn ident(&mut self) -> Result<(String, usize, usize), ParseError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Ident(s) => {
                self.bump();
                Ok((s, t.line, t.col))
            }
            _ => Err(self.error("unexpected token", &["identifier"])),
        }
    }

    fn int(&mut self) -> Result<usize, ParseError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Int(n) => {
                self.bump();
                n.try_into().map_err(|_| ParseError::at(t.line, t.col, "integer too large"))
            }
            _ => Err(self.error("unexpected token", &["integer"])),
        }
    }

    fn end_line(&mut self) -> Result<(), ParseError> {
        match self.peek().tok {
            Tok::Newline => {
                self.skip_newlines();
                Ok(())
            }
            Tok::Eof => Ok(()),
            _ => Err(self.error("unexpected token", &["end of line"])),
        }
    }

    fn skip_newlines(&mut self) {
        while self.peek().tok == Tok::Newline {
            self.bump();
        }
    }

    fn document(&mut self) -> Result<Vec<RawItem>, ParseError> {
        let mut items = Vec::new();
        self.skip_newlines();
        while self.peek().tok != Tok::Eof {
            let item = if self.is_kw("map") {
                RawItem::Germ(self.germ(DeclKind::Map)?)
            } else if self.is_kw("mixed") {
                RawItem::Germ(self.germ(DeclKind::Mixed)?)
            } else if self.is_kw("witness") {
                RawItem::Witness(self.witness("witness")?, false)
            } else if self.is_kw("bwitness") {
                RawItem::Witness(self.witness("bwitness")?, true)
            } else if self.is_kw("compose") {
                RawItem::Compose(self.compose()?)
            } else {
                return Err(self.error(
                    "expected a declaration",
                    &["map", "mixed", "witness", "bwitness", "compose"],
                ));
            };
            items.push(item);
            self.skip_newlines();
        }
        Ok(items)
    }

    fn germ(&mut self, kind: DeclKind) -> Result<RawGerm, ParseError> {
        self.bump();
        let (name, line, col) = self.ident()?;
        self.eat_sym(":")?;
        let field = if kind == DeclKind::Map { "R" } else { "C" };
        let field_kw: &'static str = if kind == DeclKind::Map { "R" } else { "C" };
        self.eat_kw(field_kw)?;
        self.eat_sym("^")?;
        let source = self.int()?;
        self.eat_sym("->")?;
        self.eat_kw(field_kw)?;
        let target = if kind == DeclKind::Mixed && !self.is_sym("^") {
            1
        } else {
            self.eat_sym("^")?;
            self.int()?
        };
        let _ = field;
        self.end_line()?;
        let mut vars = None;
        if self.is_kw("vars") && !matches!(self.peek_at(1), Tok::Sym("=")) {
            self.bump();
            let mut v = vec![self.ident()?];
            while self.is_sym(",") {
                self.bump();
                v.push(self.ident()?);
            }
            self.end_line()?;
            vars = Some(v);
        }
        let mut comps = Vec::new();
        while matches!(self.peek().tok, Tok::Ident(_)) && matches!(self.peek_at(1), Tok::Sym("=")) {
            let (label, _, _) = self.ident()?;
            self.bump();
            let e = self.expr()?;
            self.end_line()?;
            comps.push((label, e));
        }
        if comps.is_empty() {
            return Err(self.error("expected a component line", &["NAME = expression"]));
        }
        let mut declares = Vec::new();
        let mut sets = Vec::new();
        loop {
            if self.is_kw("declare") {
                self.bump();
                declares.push(self.ident()?);
                while self.is_sym(",") {
                    self.bump();
                    declares.push(self.ident()?);
                }
                self.end_line()?;
            } else if self.is_kw("assert_set") {
                sets.push(self.assert_set()?);
            } else {
                break;
            }
        }
        Ok(RawGerm { kind, name, line, col, source, target, vars, comps, declares, sets })
    }

    fn assert_set(&mut self) -> Result<RawSet, ParseError> {
        self.eat_kw("assert_set")?;
        let (name, _, _) = self.ident()?;
        self.eat_sym("{")?;
        self.skip_newlines();
        let mut tuples = Vec::new();
        while !self.is_sym("}") {
            tuples.push(self.tuple()?);
            if !self.is_sym("}") {
                self.end_line()?;
            }
        }
        if tuples.is_empty() {
            return Err(self.error("empty assert_set block", &["("]));
        }
        self.eat_sym("}")?;
        self.end_line()?;
        Ok(RawSet { name, tuples })
    }

    fn tuple(&mut self) -> Result<Vec<Expr>, ParseError> {
        self.eat_sym("(")?;
        let mut v = vec![self.expr()?];
        while self.is_sym(",") {
            self.bump();
            v.push(self.expr()?);
        }
        self.eat_sym(")")?;
        Ok(v)
    }

    fn witness(&mut self, kw: &'static str) -> Result<RawWitness, ParseError> {
        self.eat_kw(kw)?;
        let (name, line, col) = self.ident()?;
        self.eat_kw("for")?;
        let (germ, _, _) = self.ident()?;
        self.eat_sym("{")?;
        self.skip_newlines();
        let mut w = RawWitness { name, germ, line, col, stratum: None, curve: None, coeffs: None };
        while !self.is_sym("}") {
            let allowed: &[&str] = if kw == "witness" { &["stratum", "curve", "coeffs", "}"] } else { &["curve", "}"] };
            let slot = if self.is_kw("stratum") && kw == "witness" {
                &mut w.stratum
            } else if self.is_kw("coeffs") && kw == "witness" {
                &mut w.coeffs
            } else if self.is_kw("curve") {
                &mut w.curve
            } else {
                return Err(self.error("unexpected token", allowed));
            };
            let t = self.bump();
            if slot.is_some() {
                return Err(ParseError::at(t.line, t.col, "duplicate entry in witness block"));
            }
            *slot = Some(self.tuple()?);
            if !self.is_sym("}") {
                self.end_line()?;
            }
        }
        self.eat_sym("}")?;
        self.end_line()?;
        Ok(w)
    }

    fn compose(&mut self) -> Result<RawCompose, ParseError> {
        self.eat_kw("compose")?;
        let (name, line, col) = self.ident()?;
        self.eat_sym("=")?;
        let (outer, _, _) = self.ident()?;
        self.eat_kw("o")?;
        let (inner, _, _) = self.ident()?;
        self.end_line()?;
        let mut sets = Vec::new();
        let mut closure = None;
        loop {
            if self.is_kw("assert_set") {
                sets.push(self.assert_set()?);
            } else if self.is_kw("closure") {
                self.bump();
                closure = Some(self.expr()?);
                self.end_line()?;
            } else {
                break;
            }
        }
        Ok(RawCompose { name, outer, inner, line, col, sets, closure })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let (line, col) = (self.peek().line, self.peek().col);
            let kind = if self.is_sym("+") {
                self.bump();
                ExprKind::Add(Box::new(lhs), Box::new(self.term()?))
            } else if self.is_sym("-") {
                self.bump();
                ExprKind::Sub(Box::new(lhs), Box::new(self.term()?))
            } else {
                return Ok(lhs);
            };
            lhs = Expr { kind, line, col };
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let (line, col) = (self.peek().line, self.peek().col);
            let kind = if self.is_sym("*") {
                self.bump();
                ExprKind::Mul(Box::new(lhs), Box::new(self.unary()?))
            } else if self.is_sym("/") {
                self.bump();
                ExprKind::Div(Box::new(lhs), Box::new(self.unary()?))
            } else {
                return Ok(lhs);
            };
            lhs = Expr { kind, line, col };
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.is_sym("-") {
            let t = self.bump();
            let inner = self.unary()?;
            return Ok(Expr { kind: ExprKind::Neg(Box::new(inner)), line: t.line, col: t.col });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if !self.is_sym("^") {
            return Ok(base);
        }
        let t = self.bump();
        let neg = if self.is_sym("-") {
            self.bump();
            true
        } else {
            false
        };
        let e = self.int()? as i64;
        let e = if neg { -e } else { e };
        Ok(Expr { kind: ExprKind::Pow(Box::new(base), e), line: t.line, col: t.col })
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let t = self.peek().clone();
        let kind = match &t.tok {
            Tok::Int(n) => {
                self.bump();
                ExprKind::Num(n.clone())
            }
            Tok::Ident(s) if s == "conj" && matches!(self.peek_at(1), Tok::Sym("(")) => {
                self.bump();
                self.bump();
                let (v, _, _) = self.ident()?;
                self.eat_sym(")")?;
                ExprKind::Conj(v)
            }
            Tok::Ident(s) => {
                self.bump();
                ExprKind::Ident(s.clone())
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.eat_sym(")")?;
                return Ok(e);
            }
            _ => return Err(self.error("expected an expression", &["number", "identifier", "conj(", "("])),
        };
        Ok(Expr { kind, line: t.line, col: t.col })
    }
}

// ---------------------------------------------------------------- lowering

fn lower_poly(e: &Expr, ctx: &Ctx) -> Result<Polynomial, ParseError> {
    Ok(match &e.kind {
        ExprKind::Num(n) => Polynomial::constant(ctx, Rational::from_integer(n.clone())),
        ExprKind::Ident(name) => Polynomial::var(ctx, name)
            .map_err(|_| e.err(format!("use of undeclared variable `{}`", name)))?,
        ExprKind::Conj(_) => return Err(e.err("conj() is only allowed in mixed declarations")),
        ExprKind::Add(a, b) => &lower_poly(a, ctx)? + &lower_poly(b, ctx)?,
        ExprKind::Sub(a, b) => &lower_poly(a, ctx)? - &lower_poly(b, ctx)?,
        ExprKind::Neg(a) => -lower_poly(a, ctx)?,
        ExprKind::Mul(a, b) => &lower_poly(a, ctx)? * &lower_poly(b, ctx)?,
        ExprKind::Div(a, b) => {
            let d = lower_poly(b, ctx)?;
            if !d.is_constant() || d.is_zero() {
                return Err(b.err("division is only allowed by a nonzero constant here"));
            }
            lower_poly(a, ctx)?.scale(&(Rational::one() / d.constant_term()))
        }
        ExprKind::Pow(a, k) => {
            if *k < 0 {
                return Err(e.err("negative exponent not allowed here"));
            }
            lower_poly(a, ctx)?.pow(*k as u32)
        }
    })
}

/// `(numerator, denominator)` of a rational-function expression.
fn lower_ratfun(e: &Expr, ctx: &Ctx) -> Result<(Polynomial, Polynomial), ParseError> {
    let one = || Polynomial::one(ctx);
    let r = match &e.kind {
        ExprKind::Num(_) | ExprKind::Ident(_) | ExprKind::Conj(_) => (lower_poly(e, ctx)?, one()),
        ExprKind::Add(a, b) | ExprKind::Sub(a, b) => {
            let (an, ad) = lower_ratfun(a, ctx)?;
            let (bn, bd) = lower_ratfun(b, ctx)?;
            let (l, r) = (&an * &bd, &bn * &ad);
            let n = if matches!(e.kind, ExprKind::Add(..)) { &l + &r } else { &l - &r };
            (n, &ad * &bd)
        }
        ExprKind::Neg(a) => {
            let (n, d) = lower_ratfun(a, ctx)?;
            (-n, d)
        }
        ExprKind::Mul(a, b) => {
            let (an, ad) = lower_ratfun(a, ctx)?;
            let (bn, bd) = lower_ratfun(b, ctx)?;
            (&an * &bn, &ad * &bd)
        }
        ExprKind::Div(a, b) => {
            let (an, ad) = lower_ratfun(a, ctx)?;
            let (bn, bd) = lower_ratfun(b, ctx)?;
            if bn.is_zero() {
                return Err(b.err("division by zero"));
            }
            (&an * &bd, &ad * &bn)
        }
        ExprKind::Pow(a, k) => {
            let (n, d) = lower_ratfun(a, ctx)?;
            if *k >= 0 {
                (n.pow(*k as u32), d.pow(*k as u32))
            } else {
                if n.is_zero() {
                    return Err(e.err("negative power of zero"));
                }
                (d.pow(k.unsigned_abs() as u32), n.pow(k.unsigned_abs() as u32))
            }
        }
    };
    Ok(normalize_ratfun(r))
}

fn normalize_ratfun((n, d): (Polynomial, Polynomial)) -> (Polynomial, Polynomial) {
    if d.is_constant() {
        let c = d.constant_term();
        return (n.scale(&(Rational::one() / c)), Polynomial::one(d.ctx()));
    }
    if let Some(q) = n.div_exact(&d) {
        return (q, Polynomial::one(d.ctx()));
    }
    (n, d)
}

fn const_value(e: &Expr) -> Option<Rational> {
    Some(match &e.kind {
        ExprKind::Num(n) => Rational::from_integer(n.clone()),
        ExprKind::Add(a, b) => const_value(a)? + const_value(b)?,
        ExprKind::Sub(a, b) => const_value(a)? - const_value(b)?,
        ExprKind::Mul(a, b) => const_value(a)? * const_value(b)?,
        ExprKind::Div(a, b) => {
            let d = const_value(b)?;
            if d.is_zero() {
                return None;
            }
            const_value(a)? / d
        }
        ExprKind::Neg(a) => -const_value(a)?,
        ExprKind::Pow(a, k) if *k >= 0 => {
            let b = const_value(a)?;
            (0..*k).fold(Rational::one(), |acc, _| acc * &b)
        }
        _ => return None,
    })
}

fn lower_mixed(e: &Expr, vars: &[String]) -> Result<MixedExpr, ParseError> {
    let index = |name: &str| {
        vars.iter()
            .position(|v| v == name)
            .ok_or_else(|| e.err(format!("use of undeclared variable `{}`", name)))
    };
    Ok(match &e.kind {
        ExprKind::Num(n) => MixedExpr::Lit(ComplexRational::real(Rational::from_integer(n.clone()))),
        ExprKind::Ident(name) if name == "i" => MixedExpr::I,
        ExprKind::Ident(name) => MixedExpr::Var(index(name)?),
        ExprKind::Conj(name) => MixedExpr::Conj(index(name)?),
        ExprKind::Add(a, b) => MixedExpr::Sum(vec![lower_mixed(a, vars)?, lower_mixed(b, vars)?]),
        ExprKind::Sub(a, b) => MixedExpr::Sum(vec![lower_mixed(a, vars)?, MixedExpr::neg(lower_mixed(b, vars)?)]),
        ExprKind::Neg(a) => MixedExpr::neg(lower_mixed(a, vars)?),
        ExprKind::Mul(a, b) => MixedExpr::Product(vec![lower_mixed(a, vars)?, lower_mixed(b, vars)?]),
        ExprKind::Div(a, b) => {
            let d = const_value(b)
                .filter(|d| !d.is_zero())
                .ok_or_else(|| b.err("division is only allowed by a nonzero rational constant"))?;
            MixedExpr::Product(vec![
                lower_mixed(a, vars)?,
                MixedExpr::Lit(ComplexRational::real(Rational::one() / d)),
            ])
        }
        ExprKind::Pow(a, k) => {
            if *k < 0 {
                return Err(e.err("negative exponent not allowed here"));
            }
            MixedExpr::Pow(Box::new(lower_mixed(a, vars)?), *k as u32)
        }
    })
}

fn param_context(exprs: &[&Expr], forbidden: &Ctx, skip: &[&str]) -> Result<Ctx, ParseError> {
    let mut names = BTreeSet::new();
    for e in exprs {
        let mut ids = Vec::new();
        e.idents(&mut ids);
        for (n, line, col) in ids {
            if skip.contains(&n.as_str()) {
                continue;
            }
            if forbidden.index_of(&n).is_some() {
                return Err(ParseError::at(
                    line,
                    col,
                    format!("parameter `{}` shadows a variable of the germ", n),
                ));
            }
            names.insert(n);
        }
    }
    let names: Vec<String> = names.into_iter().collect();
    Ok(VarContext::new(&names).expect("set has unique names"))
}

fn lower_param(tuple: &[Expr], target: &Ctx, line: usize, col: usize) -> Result<Parametrization, ParseError> {
    if tuple.len() != target.arity() {
        return Err(ParseError::at(
            line,
            col,
            format!("tuple has {} coordinates, expected {}", tuple.len(), target.arity()),
        ));
    }
    let refs: Vec<&Expr> = tuple.iter().collect();
    let params = param_context(&refs, target, &[])?;
    let coords = tuple
        .iter()
        .map(|e| lower_ratfun(e, &params))
        .collect::<Result<Vec<_>, _>>()?;
    Parametrization::new(target, &params, coords).map_err(|err| ParseError::at(line, col, err.to_string()))
}

fn lower_laurent(e: &Expr, full: &Ctx, spect: &Ctx) -> Result<LaurentPoly, ParseError> {
    let (n, d) = lower_ratfun(e, full)?;
    // Denominator must be c·t^k.
    if d.num_terms() != 1 {
        return Err(e.err("only powers of t may appear in denominators of curve data"));
    }
    let (dm, dc) = d.leading_term().map(|(m, c)| (m.clone(), c.clone())).expect("nonzero");
    if dm.exponents()[1..].iter().any(|&k| k > 0) {
        return Err(e.err("only powers of t may appear in denominators of curve data"));
    }
    let shift = dm.exponents()[0] as i32;
    let inv = Rational::one() / dc;
    let mut terms = Vec::new();
    for (k, c) in n.collect_in(0) {
        let c = c.embed(spect).map_err(|err| e.err(err.to_string()))?;
        terms.push((k as i32 - shift, c.scale(&inv)));
    }
    LaurentPoly::from_terms(spect, terms).map_err(|err| e.err(err.to_string()))
}

// ---------------------------------------------------------------- resolved declarations

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeclaredSet {
    pub name: String,
    pub components: Vec<Parametrization>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GermDecl {
    pub name: String,
    pub kind: DeclKind,
    /// `m` for real maps, `n` for mixed ones.
    pub source_arity: usize,
    pub target_arity: usize,
    pub vars: Vec<String>,
    pub labels: Vec<String>,
    pub germ: RealMapGerm,
    pub mixed: Option<MixedMap>,
    pub sets: Vec<DeclaredSet>,
    pub declared: Vec<Fact>,
}

impl GermDecl {
    pub fn set(&self, name: &str) -> Option<&DeclaredSet> {
        self.sets.iter().find(|s| s.name == name)
    }

    pub fn set_components(&self, name: &str) -> &[Parametrization] {
        self.set(name).map(|s| s.components.as_slice()).unwrap_or(&[])
    }

    /// Components in canonical text.
    pub fn component_texts(&self) -> Vec<String> {
        match &self.mixed {
            Some(m) => m.functions().iter().map(|f| f.formal().to_string()).collect(),
            None => self.germ.components().iter().map(ToString::to_string).collect(),
        }
    }

    /// Single mixed function, when this declares `ℂⁿ → ℂ`.
    pub fn mixed_function(&self) -> Option<&MixedFunction> {
        self.mixed.as_ref().filter(|m| m.functions().len() == 1).map(|m| &m.functions()[0])
    }

    pub fn to_dsl(&self) -> String {
        let mut s = String::new();
        match self.kind {
            DeclKind::Map => {
                let _ = writeln!(s, "map {} : R^{} -> R^{}", self.name, self.source_arity, self.target_arity);
            }
            DeclKind::Mixed if self.target_arity == 1 => {
                let _ = writeln!(s, "mixed {} : C^{} -> C", self.name, self.source_arity);
            }
            DeclKind::Mixed => {
                let _ = writeln!(s, "mixed {} : C^{} -> C^{}", self.name, self.source_arity, self.target_arity);
            }
        }
        let _ = writeln!(s, "vars {}", self.vars.join(", "));
        for (label, text) in self.labels.iter().zip(self.component_texts()) {
            let _ = writeln!(s, "{} = {}", label, text);
        }
        if !self.declared.is_empty() {
            let names: Vec<&str> = self.declared.iter().map(|f| f.name()).collect();
            let _ = writeln!(s, "declare {}", names.join(", "));
        }
        for set in &self.sets {
            write_set(&mut s, &set.name, &set.components);
        }
        s
    }
}

fn write_set(s: &mut String, name: &str, comps: &[Parametrization]) {
    let _ = writeln!(s, "assert_set {} {{", name);
    for p in comps {
        let _ = writeln!(s, "  {}", param_tuple(p));
    }
    let _ = writeln!(s, "}}");
}

/// `(n_1, (n_2)/(d_2), …)`.
pub fn param_tuple(p: &Parametrization) -> String {
    let coords: Vec<String> = p
        .coords()
        .iter()
        .map(|(n, d)| {
            if d.is_constant() && d.constant_term().is_one() {
                n.to_string()
            } else {
                format!("({})/({})", n, d)
            }
        })
        .collect();
    format!("({})", coords.join(", "))
}

fn laurent_tuple(v: &[LaurentPoly]) -> String {
    let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(", "))
}

/// Declared Thom-irregularity witness data: stratum `M(s)`, curve `γ(t, s)`, coefficients `c(t, s)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessDecl {
    pub name: String,
    pub germ: String,
    pub stratum: Parametrization,
    pub curve: CurveFamily,
    pub coeffs: Vec<LaurentPoly>,
}

/// Declared condition-(b) violation family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BWitnessDecl {
    pub name: String,
    pub germ: String,
    pub curve: CurveFamily,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComposeDecl {
    pub name: String,
    /// `G` in `H = G ∘ F`.
    pub outer: String,
    /// `F` in `H = G ∘ F`.
    pub inner: String,
    /// Declared components of `M(H)`, in `F`'s source variables.
    pub milnor_components: Vec<Parametrization>,
    /// Claimed defining polynomial of the closure of `F(M(H) ∖ Sing H)`, in `G`'s variables.
    pub closure: Option<Polynomial>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Germ(GermDecl),
    Witness(WitnessDecl),
    BWitness(BWitnessDecl),
    Compose(ComposeDecl),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Document {
    pub items: Vec<Item>,
}

impl Document {
    pub fn germs(&self) -> impl Iterator<Item = &GermDecl> {
        self.items.iter().filter_map(|i| match i {
            Item::Germ(g) => Some(g),
            _ => None,
        })
    }

    pub fn germ(&self, name: &str) -> Option<&GermDecl> {
        self.germs().find(|g| g.name == name)
    }

    pub fn witnesses(&self) -> impl Iterator<Item = &WitnessDecl> {
        self.items.iter().filter_map(|i| match i {
            Item::Witness(w) => Some(w),
            _ => None,
        })
    }

    pub fn bwitnesses(&self) -> impl Iterator<Item = &BWitnessDecl> {
        self.items.iter().filter_map(|i| match i {
            Item::BWitness(w) => Some(w),
            _ => None,
        })
    }

    pub fn compositions(&self) -> impl Iterator<Item = &ComposeDecl> {
        self.items.iter().filter_map(|i| match i {
            Item::Compose(c) => Some(c),
            _ => None,
        })
    }

    pub fn to_dsl(&self) -> String {
        let mut parts = Vec::new();
        for item in &self.items {
            parts.push(match item {
                Item::Germ(g) => g.to_dsl(),
                Item::Witness(w) => format!(
                    "witness {} for {} {{\n  stratum {}\n  curve {}\n  coeffs {}\n}}\n",
                    w.name,
                    w.germ,
                    param_tuple(&w.stratum),
                    laurent_tuple(w.curve.components()),
                    laurent_tuple(&w.coeffs)
                ),
                Item::BWitness(b) => format!(
                    "bwitness {} for {} {{\n  curve {}\n}}\n",
                    b.name,
                    b.germ,
                    laurent_tuple(b.curve.components())
                ),
                Item::Compose(c) => {
                    let mut s = format!("compose {} = {} o {}\n", c.name, c.outer, c.inner);
                    if !c.milnor_components.is_empty() {
                        write_set(&mut s, "M", &c.milnor_components);
                    }
                    if let Some(p) = &c.closure {
                        let _ = writeln!(s, "closure {}", p);
                    }
                    s
                }
            });
        }
        parts.join("\n")
    }
}

fn resolve_germ(raw: &RawGerm) -> Result<GermDecl, ParseError> {
    let here = |msg: String| ParseError::at(raw.line, raw.col, msg);
    let vars: Vec<(String, usize, usize)> = match &raw.vars {
        Some(v) => v.clone(),
        None => {
            let mut ids = Vec::new();
            for (_, e) in &raw.comps {
                e.idents(&mut ids);
            }
            if raw.kind == DeclKind::Mixed {
                ids.retain(|(n, _, _)| n != "i");
            }
            ids
        }
    };
    for (k, (v, line, col)) in vars.iter().enumerate() {
        if vars[..k].iter().any(|(w, _, _)| w == v) {
            return Err(ParseError::at(*line, *col, format!("duplicate variable `{}`", v)));
        }
        if raw.kind == DeclKind::Mixed && v == "i" {
            return Err(ParseError::at(*line, *col, "`i` is reserved in mixed declarations"));
        }
    }
    let names: Vec<String> = vars.iter().map(|(n, _, _)| n.clone()).collect();
    if names.len() != raw.source {
        return Err(here(format!(
            "arity mismatch: `{}` declares source dimension {} but has {} variables",
            raw.name,
            raw.source,
            names.len()
        )));
    }
    if raw.comps.len() != raw.target {
        return Err(here(format!(
            "arity mismatch: `{}` declares target dimension {} but has {} components",
            raw.name,
            raw.target,
            raw.comps.len()
        )));
    }
    let labels: Vec<String> = raw.comps.iter().map(|(l, _)| l.clone()).collect();
    let (germ, mixed) = match raw.kind {
        DeclKind::Map => {
            let ctx = VarContext::new(&names).map_err(|e| here(e.to_string()))?;
            let comps = raw
                .comps
                .iter()
                .map(|(_, e)| lower_poly(e, &ctx))
                .collect::<Result<Vec<_>, _>>()?;
            let germ = RealMapGerm::new(&raw.name, &ctx, comps).map_err(|e| here(e.to_string()))?;
            (germ, None)
        }
        DeclKind::Mixed => {
            let mut fs = Vec::new();
            for (label, e) in &raw.comps {
                let expr = lower_mixed(e, &names)?;
                let fname = if raw.comps.len() == 1 { raw.name.clone() } else { label.clone() };
                fs.push(MixedFunction::new(&fname, &names, expr).map_err(|err| e.err(err.to_string()))?);
            }
            let map = MixedMap::new(&raw.name, fs).map_err(|e| here(e.to_string()))?;
            (map.realified().clone(), Some(map))
        }
    };
    let mut declared = Vec::new();
    for (d, line, col) in &raw.declares {
        let f: Fact = d.parse().map_err(|e: String| ParseError::at(*line, *col, e))?;
        if !declared.contains(&f) {
            declared.push(f);
        }
    }
    let sets = resolve_sets(&raw.sets, germ.ctx(), raw.line, raw.col)?;
    Ok(GermDecl {
        name: raw.name.clone(),
        kind: raw.kind,
        source_arity: raw.source,
        target_arity: raw.target,
        vars: names,
        labels,
        germ,
        mixed,
        sets,
        declared,
    })
}

fn resolve_sets(raw: &[RawSet], target: &Ctx, line: usize, col: usize) -> Result<Vec<DeclaredSet>, ParseError> {
    let mut sets: Vec<DeclaredSet> = Vec::new();
    for rs in raw {
        let comps = rs
            .tuples
            .iter()
            .map(|t| {
                let (l, c) = t.first().map(|e| (e.line, e.col)).unwrap_or((line, col));
                lower_param(t, target, l, c)
            })
            .collect::<Result<Vec<_>, _>>()?;
        match sets.iter_mut().find(|s| s.name == rs.name) {
            Some(s) => s.components.extend(comps),
            None => sets.push(DeclaredSet { name: rs.name.clone(), components: comps }),
        }
    }
    Ok(sets)
}

fn resolve_witness(raw: &RawWitness, is_b: bool, germs: &[GermDecl]) -> Result<Item, ParseError> {
    let here = |msg: String| ParseError::at(raw.line, raw.col, msg);
    let g = germs
        .iter()
        .find(|g| g.name == raw.germ)
        .ok_or_else(|| here(format!("witness refers to unknown germ `{}`", raw.germ)))?;
    let target = g.germ.ctx();
    let curve = raw.curve.as_ref().ok_or_else(|| here("witness block needs a `curve` entry".into()))?;
    let mut all: Vec<&Expr> = curve.iter().collect();
    if let Some(s) = &raw.stratum {
        all.extend(s.iter());
    }
    if let Some(c) = &raw.coeffs {
        all.extend(c.iter());
    }
    let spect = param_context(&all, target, &["t"])?;
    let mut full_names = vec!["t".to_string()];
    full_names.extend(spect.names().iter().cloned());
    let full = VarContext::new(&full_names).map_err(|e| here(e.to_string()))?;
    if curve.len() != target.arity() {
        return Err(here(format!("curve has {} coordinates, expected {}", curve.len(), target.arity())));
    }
    let comps = curve
        .iter()
        .map(|e| lower_laurent(e, &full, &spect))
        .collect::<Result<Vec<_>, _>>()?;
    let curve = CurveFamily::new(target, &spect, comps).map_err(|e| here(e.to_string()))?;
    if is_b {
        return Ok(Item::BWitness(BWitnessDecl { name: raw.name.clone(), germ: raw.germ.clone(), curve }));
    }
    let stratum = raw.stratum.as_ref().ok_or_else(|| here("witness block needs a `stratum` entry".into()))?;
    if stratum.len() != target.arity() {
        return Err(here(format!("stratum has {} coordinates, expected {}", stratum.len(), target.arity())));
    }
    let mut scoords = Vec::new();
    for e in stratum {
        let mut ids = Vec::new();
        e.idents(&mut ids);
        if ids.iter().any(|(n, _, _)| n == "t") {
            return Err(e.err("the stratum may not depend on the curve parameter `t`"));
        }
        scoords.push(lower_ratfun(e, &spect)?);
    }
    let stratum = Parametrization::new(target, &spect, scoords).map_err(|e| here(e.to_string()))?;
    let coeffs = raw.coeffs.as_ref().ok_or_else(|| here("witness block needs a `coeffs` entry".into()))?;
    if coeffs.len() != g.germ.target_dim() {
        return Err(here(format!(
            "coeffs has {} entries, expected {}",
            coeffs.len(),
            g.germ.target_dim()
        )));
    }
    let coeffs = coeffs
        .iter()
        .map(|e| lower_laurent(e, &full, &spect))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Item::Witness(WitnessDecl {
        name: raw.name.clone(),
        germ: raw.germ.clone(),
        stratum,
        curve,
        coeffs,
    }))
}

fn resolve_compose(raw: &RawCompose, germs: &[GermDecl]) -> Result<ComposeDecl, ParseError> {
    let here = |msg: String| ParseError::at(raw.line, raw.col, msg);
    let find = |n: &str| {
        germs
            .iter()
            .find(|g| g.name == n)
            .ok_or_else(|| here(format!("compose refers to unknown germ `{}`", n)))
    };
    let g = find(&raw.outer)?;
    let f = find(&raw.inner)?;
    if f.germ.target_dim() != g.germ.source_dim() {
        return Err(here(format!(
            "composition arity mismatch: `{}` has {} components but `{}` has {} variables",
            f.name,
            f.germ.target_dim(),
            g.name,
            g.germ.source_dim()
        )));
    }
    let sets = resolve_sets(&raw.sets, f.germ.ctx(), raw.line, raw.col)?;
    let mut milnor_components = Vec::new();
    for s in sets {
        if s.name != "M" {
            return Err(here(format!("compose blocks only accept `assert_set M`, found `{}`", s.name)));
        }
        milnor_components.extend(s.components);
    }
    let closure = raw.closure.as_ref().map(|e| lower_poly(e, g.germ.ctx())).transpose()?;
    Ok(ComposeDecl {
        name: raw.name.clone(),
        outer: raw.outer.clone(),
        inner: raw.inner.clone(),
        milnor_components,
        closure,
    })
}

/// Parses a whole document, including witness and composition items.
pub fn parse_document(src: &str) -> Result<Document, ParseError> {
    let toks = lex(src)?;
    let raw = Parser { toks, pos: 0 }.document()?;
    let mut germs: Vec<GermDecl> = Vec::new();
    for item in &raw {
        if let RawItem::Germ(g) = item {
            if germs.iter().any(|d| d.name == g.name) {
                return Err(ParseError::at(g.line, g.col, format!("duplicate declaration `{}`", g.name)));
            }
            germs.push(resolve_germ(g)?);
        }
    }
    let mut names: Vec<String> = germs.iter().map(|g| g.name.clone()).collect();
    let mut items = Vec::new();
    let mut gi = germs.iter();
    for item in &raw {
        let (resolved, name, line, col) = match item {
            RawItem::Germ(_) => {
                items.push(Item::Germ(gi.next().expect("resolved above").clone()));
                continue;
            }
            RawItem::Witness(w, b) => (resolve_witness(w, *b, &germs)?, w.name.clone(), w.line, w.col),
            RawItem::Compose(c) => (Item::Compose(resolve_compose(c, &germs)?), c.name.clone(), c.line, c.col),
        };
        if names.contains(&name) {
            return Err(ParseError::at(line, col, format!("duplicate declaration `{}`", name)));
        }
        names.push(name);
        items.push(resolved);
    }
    Ok(Document { items })
}

/// Parses a document and returns its germ declarations.
pub fn parse_source(src: &str) -> Result<Vec<GermDecl>, ParseError> {
    Ok(parse_document(src)?.germs().cloned().collect())
}

/// Parses a single polynomial expression over `ctx`.
pub fn parse_polynomial(src: &str, ctx: &Ctx) -> Result<Polynomial, ParseError> {
    let e = parse_expr(src)?;
    lower_poly(&e, ctx)
}

/// Parses a rational-function expression over `ctx` as `(numerator, denominator)`.
pub fn parse_ratfun(src: &str, ctx: &Ctx) -> Result<(Polynomial, Polynomial), ParseError> {
    let e = parse_expr(src)?;
    lower_ratfun(&e, ctx)
}

fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if p.peek().tok != Tok::Eof {
        return Err(p.error("trailing input after expression", &["end of input"]));
    }
    Ok(e)
}

/// Builds a real map germ from component expressions.
pub fn parse_map(name: &str, vars: &[&str], comps: &[&str]) -> Result<RealMapGerm, ParseError> {
    let ctx = VarContext::new(vars).map_err(|e| ParseError::at(1, 1, e.to_string()))?;
    let polys = comps
        .iter()
        .map(|c| parse_polynomial(c, &ctx))
        .collect::<Result<Vec<_>, _>>()?;
    RealMapGerm::new(name, &ctx, polys).map_err(|e| ParseError::at(1, 1, e.to_string()))
}

/// Builds a mixed function from an expression over complex variables `vars`.
pub fn parse_mixed_function(name: &str, vars: &[&str], src: &str) -> Result<MixedFunction, ParseError> {
    let e = parse_expr(src)?;
    let names: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
    let expr = lower_mixed(&e, &names)?;
    MixedFunction::new(name, &names, expr).map_err(|err| e.err(err.to_string()))
}

/// Parses a parametrization tuple like `(0, s, u)` into `target`.
pub fn parse_parametrization(src: &str, target: &Ctx) -> Result<Parametrization, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let t = p.tuple()?;
    if p.peek().tok != Tok::Eof {
        return Err(p.error("trailing input after tuple", &["end of input"]));
    }
    lower_param(&t, target, 1, 1)
}

/// Parses a Laurent tuple like `(t, 0, s)`; spectators are all identifiers other than `t`, sorted.
pub fn parse_curve(src: &str, target: &Ctx) -> Result<CurveFamily, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let t = p.tuple()?;
    let refs: Vec<&Expr> = t.iter().collect();
    let spect = param_context(&refs, target, &["t"])?;
    let mut full_names = vec!["t".to_string()];
    full_names.extend(spect.names().iter().cloned());
    let full = VarContext::new(&full_names).map_err(|e| ParseError::at(1, 1, e.to_string()))?;
    let comps = t.iter().map(|e| lower_laurent(e, &full, &spect)).collect::<Result<Vec<_>, _>>()?;
    CurveFamily::new(target, &spect, comps).map_err(|e| ParseError::at(1, 1, e.to_string()))
}

/// Parses a Laurent tuple over an existing spectator context.
pub fn parse_laurent_tuple(src: &str, spect: &Ctx) -> Result<Vec<LaurentPoly>, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let t = p.tuple()?;
    let mut full_names = vec!["t".to_string()];
    full_names.extend(spect.names().iter().cloned());
    let full = VarContext::new(&full_names).map_err(|e| ParseError::at(1, 1, e.to_string()))?;
    t.iter().map(|e| lower_laurent(e, &full, spect)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document() {
        assert!(parse_source("").unwrap().is_empty());
        assert!(parse_source("\n# only a comment\n\n").unwrap().is_empty());
    }

    #[test]
    fn map_declaration() {
        let d = parse_source("map G : R^3 -> R^2\nvars x,y,z\nG1 = x*y\nG2 = x*z").unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].name, "G");
        assert_eq!(d[0].component_texts(), ["x*y", "x*z"]);
        assert_eq!(d[0].vars, ["x", "y", "z"]);
    }

    #[test]
    fn mixed_declaration() {
        let d = parse_source("mixed T : C^2 -> C\nvars x,y\nT = x*y*conj(x)").unwrap();
        let f = d[0].mixed_function().unwrap();
        assert_eq!(f.formal().to_string(), "x*y*conj(x)");
        assert_eq!(d[0].germ.source_dim(), 4);
        assert_eq!(d[0].germ.target_dim(), 2);
    }

    #[test]
    fn inferred_vars() {
        let d = parse_source("map G : R^3 -> R^2\nG1 = x\nG2 = y*(x^2+y^2) + x*z^2\n").unwrap();
        assert_eq!(d[0].vars, ["x", "y", "z"]);
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_source("map G : R^2 -> R^1\nvars x,y\nG1 = x*w\n").unwrap_err();
        assert_eq!((e.line, e.col), (3, 8));
        assert!(e.message.contains("undeclared variable `w`"));

        let e = parse_source("map G : R^2 -> R^1\nvars x,y\nG1 = x*\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.expected.contains(&"identifier".to_string()));

        let e = parse_source("map G : R^3 -> R^1\nvars x,y\nG1 = x\n").unwrap_err();
        assert!(e.message.contains("arity mismatch"));

        let src = "map G : R^1 -> R^1\nG1 = x\nmap G : R^1 -> R^1\nG1 = y\n";
        let e = parse_source(src).unwrap_err();
        assert!(e.message.contains("duplicate declaration"));
        assert_eq!(e.line, 3);
    }

    #[test]
    fn i_is_reserved_only_in_mixed() {
        assert!(parse_source("map G : R^2 -> R^1\nvars i, j\nG1 = i*j\n").is_ok());
        let e = parse_source("mixed f : C^1 -> C\nvars i\nf = i\n").unwrap_err();
        assert!(e.message.contains("reserved"));
    }

    #[test]
    fn assert_sets_and_round_trip() {
        let src = "\
map G : R^3 -> R^2
vars x, y, z
G1 = x*y
G2 = x*z
declare condition_b
assert_set M {
  (0, s, u)
  (r, (r - r*s^2)/(1 + s^2), 2*r*s/(1 + s^2))
}
";
        let doc = parse_document(src).unwrap();
        let g = doc.germ("G").unwrap();
        let m = g.set("M").unwrap();
        assert_eq!(m.components.len(), 2);
        assert_eq!(m.components[1].dimension(), 2);
        assert_eq!(g.declared, [Fact::ConditionB]);
        let printed = doc.to_dsl();
        assert_eq!(parse_document(&printed).unwrap(), doc);
    }

    #[test]
    fn witness_round_trip() {
        let src = "\
map G : R^3 -> R^2
G1 = x
G2 = y*(x^2+y^2) + x*z^2
witness w for G {
  stratum (0, 0, s)
  curve (t, 0, s)
  coeffs (-s^2*t^-1, 1/t)
}
bwitness b for G {
  curve (t, s, 0)
}
";
        let doc = parse_document(src).unwrap();
        let w = doc.witnesses().next().unwrap();
        assert_eq!(w.coeffs[0].to_string(), "-s^2*t^-1");
        assert_eq!(w.coeffs[1].to_string(), "t^-1");
        let printed = doc.to_dsl();
        assert_eq!(parse_document(&printed).unwrap(), doc);
    }

    #[test]
    fn compose_block() {
        let src = "\
map F : R^4 -> R^3
vars x, y, z, w
F1 = x
F2 = y
F3 = z*(x^2+y^2+z^2+w^2)
map G : R^3 -> R^2
vars u, v, t
G1 = u*t
G2 = v*t
compose H = G o F
assert_set M {
  (r*(1 - s^2)/(1 + s^2), 2*r*s/(1 + s^2), r, 0)
}
closure t^2 - 4*(u^2+v^2)^3
";
        let doc = parse_document(src).unwrap();
        let c = doc.compositions().next().unwrap();
        assert_eq!(c.milnor_components.len(), 1);
        assert!(c.closure.is_some());
        assert_eq!(parse_document(&doc.to_dsl()).unwrap(), doc);

        let bad = src.replace("compose H = G o F", "compose H = F o G");
        assert!(parse_document(&bad).unwrap_err().message.contains("arity mismatch"));
    }

    #[test]
    fn mixed_multi_component() {
        let src = "mixed E : C^3 -> C^2\nvars x, y, z\nE1 = x^2 - y^2*z\nE2 = y\n";
        let d = parse_source(src).unwrap();
        assert_eq!(d[0].germ.source_dim(), 6);
        assert_eq!(d[0].germ.target_dim(), 4);
        assert_eq!(parse_source(&d[0].to_dsl()).unwrap(), d);
    }
}
