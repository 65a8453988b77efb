//! Exact multivariate polynomials over arbitrary-precision rationals.
//!
//! Every polynomial carries a shared [`VarContext`] naming its variables. Terms
//! are kept in a `BTreeMap` keyed by dense exponent vectors ordered graded
//! lexicographically, so two equal polynomials always have identical term maps.

use std::cmp::Ordering;
use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Coefficient field of every polynomial in the crate.
pub type Rational = BigRational;

/// Builds the rational `num/den`. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Builds the integer `n` as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Lossy conversion used only by numeric cross-checks and sampled probes.
pub fn to_f64(r: &Rational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Huge numerator or denominator: scale both down by the same power of two.
            let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
            let n = (r.numer() >> shift).to_f64().unwrap_or(0.0);
            let d = (r.denom() >> shift).to_f64().unwrap_or(1.0);
            n / d
        }
    }
}

/// Closest "nice" rational to `x` with denominator at most `max_den`.
pub fn from_f64_approx(x: f64, max_den: i64) -> Rational {
    let den = max_den.max(1);
    let num = (x * den as f64).round() as i64;
    rat(num, den)
}

/// Formats a rational as `num/den`, dropping the denominator when it is 1.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("variable context mismatch: [{left}] vs [{right}]")]
    ContextMismatch { left: String, right: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate variable `{0}` in context")]
    DuplicateVariable(String),
    #[error("point has {got} coordinates, context has arity {expected}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix entries: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("inexact polynomial division")]
    InexactDivision,
}

/// Ordered list of distinct variable names.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarContext {
    names: Vec<String>,
}

/// Contexts are shared between all polynomials that use them.
pub type Ctx = Arc<VarContext>;

impl VarContext {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Ctx, PolyError> {
        let mut out: Vec<String> = Vec::with_capacity(names.len());
        for n in names {
            let n = n.as_ref().to_string();
            if out.contains(&n) {
                return Err(PolyError::DuplicateVariable(n));
            }
            out.push(n);
        }
        Ok(Arc::new(VarContext { names: out }))
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn arity(&self) -> usize {
        self.names.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn describe(&self) -> String {
        self.names.join(",")
    }
}

fn same_ctx(a: &Ctx, b: &Ctx) -> bool {
    Arc::ptr_eq(a, b) || a.names == b.names
}

fn mismatch(a: &Ctx, b: &Ctx) -> PolyError {
    PolyError::ContextMismatch {
        left: a.describe(),
        right: b.describe(),
    }
}

/// Dense exponent vector, ordered graded-lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(arity: usize) -> Self {
        Monomial(vec![0; arity])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    fn div(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

#[derive(Clone)]
pub struct Polynomial {
    ctx: Ctx,
    terms: BTreeMap<Monomial, Rational>,
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        same_ctx(&self.ctx, &other.ctx) && self.terms == other.terms
    }
}

impl Eq for Polynomial {}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial[{}]({})", self.ctx.describe(), self)
    }
}

/// Exact `op(a, b)`, rejecting operands from different contexts.
pub fn poly_arith(op: ArithOp, a: &Polynomial, b: &Polynomial) -> Result<Polynomial, PolyError> {
    match op {
        ArithOp::Add => a.checked_add(b),
        ArithOp::Sub => a.checked_sub(b),
        ArithOp::Mul => a.checked_mul(b),
    }
}

impl Polynomial {
    pub fn zero(ctx: &Ctx) -> Self {
        Polynomial {
            ctx: ctx.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ctx: &Ctx, c: Rational) -> Self {
        let mut p = Self::zero(ctx);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(ctx.arity()), c);
        }
        p
    }

    pub fn one(ctx: &Ctx) -> Self {
        Self::constant(ctx, Rational::one())
    }

    pub fn var_index(ctx: &Ctx, i: usize) -> Self {
        let mut e = vec![0; ctx.arity()];
        e[i] = 1;
        Self::monomial(ctx, Monomial(e), Rational::one())
    }

    pub fn var(ctx: &Ctx, name: &str) -> Result<Self, PolyError> {
        ctx.index_of(name)
            .map(|i| Self::var_index(ctx, i))
            .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))
    }

    pub fn monomial(ctx: &Ctx, m: Monomial, c: Rational) -> Self {
        assert_eq!(m.0.len(), ctx.arity(), "exponent vector length");
        let mut p = Self::zero(ctx);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    /// Builds a polynomial from possibly repeated or zero terms.
    pub fn from_terms<I>(ctx: &Ctx, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, Rational)>,
    {
        let mut p = Self::zero(ctx);
        for (m, c) in terms {
            assert_eq!(m.0.len(), ctx.arity(), "exponent vector length");
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    pub fn constant_term(&self) -> Rational {
        self.terms
            .get(&Monomial::one(self.ctx.arity()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.0[i]).max().unwrap_or(0)
    }

    pub fn min_degree_in(&self, i: usize) -> Option<u32> {
        self.terms.keys().map(|m| m.0[i]).min()
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    /// True when no term involves variable `i`.
    pub fn is_free_of(&self, i: usize) -> bool {
        self.terms.keys().all(|m| m.0[i] == 0)
    }

    /// Indices of the variables that actually occur.
    pub fn support(&self) -> Vec<usize> {
        (0..self.ctx.arity())
            .filter(|&i| !self.is_free_of(i))
            .collect()
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, PolyError> {
        if !same_ctx(&self.ctx, &other.ctx) {
            return Err(mismatch(&self.ctx, &other.ctx));
        }
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, PolyError> {
        if !same_ctx(&self.ctx, &other.ctx) {
            return Err(mismatch(&self.ctx, &other.ctx));
        }
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, PolyError> {
        if !same_ctx(&self.ctx, &other.ctx) {
            return Err(mismatch(&self.ctx, &other.ctx));
        }
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(&self.ctx));
        }
        // Multiply integer multiples and divide once per result term; rational
        // products would reduce by a gcd on every pair.
        let (ia, la) = self.integer_terms();
        let (ib, lb) = other.integer_terms();
        let mut acc: HashMap<Monomial, BigInt> = HashMap::with_capacity(ia.len() * ib.len() / 2 + 1);
        for (ma, ca) in &ia {
            for (mb, cb) in &ib {
                let prod = ca * cb;
                match acc.entry(ma.mul(mb)) {
                    Entry::Occupied(mut o) => *o.get_mut() += prod,
                    Entry::Vacant(v) => {
                        v.insert(prod);
                    }
                }
            }
        }
        let den = la * lb;
        let terms = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, c)| (m, Rational::new(c, den.clone())))
            .collect();
        Ok(Polynomial { ctx: self.ctx.clone(), terms })
    }

    /// Terms scaled by the lcm `l` of the coefficient denominators, and `l`.
    fn integer_terms(&self) -> (Vec<(&Monomial, BigInt)>, BigInt) {
        let l = self.terms.values().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let terms = self.terms.iter().map(|(m, c)| (m, c.numer() * (&l / c.denom()))).collect();
        (terms, l)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(&self.ctx);
        }
        Polynomial {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut result = Self::one(&self.ctx);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn partial_derivative(&self, var: &str) -> Result<Self, PolyError> {
        let i = self
            .ctx
            .index_of(var)
            .ok_or_else(|| PolyError::UnknownVariable(var.to_string()))?;
        Ok(self.derivative(i))
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(&self.ctx);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut nm = m.clone();
            nm.0[i] -= 1;
            out.add_term(nm, c * Rational::from_integer(BigInt::from(e)));
        }
        out
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.ctx.arity()).map(|i| self.derivative(i)).collect()
    }

    pub fn evaluate(&self, point: &[Rational]) -> Result<Rational, PolyError> {
        if point.len() != self.ctx.arity() {
            return Err(PolyError::ArityMismatch {
                expected: self.ctx.arity(),
                got: point.len(),
            });
        }
        // Integer arithmetic throughout: x_i = n_i / d and c = c' / l, one division at the end.
        let d = point.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let l = self.terms.values().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let top = self.degree().unwrap_or(0) as usize;
        let mut d_pow = Vec::with_capacity(top + 1);
        d_pow.push(BigInt::one());
        for k in 1..=top {
            let next = &d_pow[k - 1] * &d;
            d_pow.push(next);
        }
        let mut powers: Vec<Vec<BigInt>> = Vec::with_capacity(point.len());
        for (i, x) in point.iter().enumerate() {
            let n = x.numer() * (&d / x.denom());
            let deg = self.degree_in(i) as usize;
            let mut v = Vec::with_capacity(deg + 1);
            v.push(BigInt::one());
            for k in 1..=deg {
                let next = &v[k - 1] * &n;
                v.push(next);
            }
            powers.push(v);
        }
        let mut acc = BigInt::zero();
        for (m, c) in &self.terms {
            let mut t = c.numer() * (&l / c.denom());
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t *= &powers[i][e as usize];
                }
            }
            t *= &d_pow[top - m.degree() as usize];
            acc += t;
        }
        Ok(Rational::new(acc, l * &d_pow[top]))
    }

    /// Exact test for `p(point) = 0`; see [`ZeroTester`].
    pub fn vanishes_at(&self, point: &[Rational]) -> Result<bool, PolyError> {
        ZeroTester::new(self).vanishes_at(point)
    }

    /// Floating-point evaluation for numeric probes. Panics on arity mismatch.
    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.ctx.arity());
        self.terms
            .iter()
            .map(|(m, c)| {
                m.0.iter()
                    .zip(point)
                    .fold(to_f64(c), |acc, (&e, &x)| acc * x.powi(e as i32))
            })
            .sum()
    }

    /// Substitutes `images[i]` for variable `i`; all images share one target context.
    pub fn substitute(&self, images: &[Polynomial], target: &Ctx) -> Result<Self, PolyError> {
        if images.len() != self.ctx.arity() {
            return Err(PolyError::ArityMismatch {
                expected: self.ctx.arity(),
                got: images.len(),
            });
        }
        for img in images {
            if !same_ctx(img.ctx(), target) {
                return Err(mismatch(img.ctx(), target));
            }
        }
        let mut cache: Vec<Vec<Polynomial>> = images
            .iter()
            .map(|p| vec![Polynomial::one(target), p.clone()])
            .collect();
        let mut out = Self::zero(target);
        for (m, c) in &self.terms {
            let mut t = Polynomial::constant(target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while cache[i].len() <= e as usize {
                    let next = cache[i].last().unwrap() * &images[i];
                    cache[i].push(next);
                }
                t = &t * &cache[i][e as usize];
            }
            for (tm, tc) in t.terms {
                out.add_term(tm, tc);
            }
        }
        Ok(out)
    }

    /// Re-expresses the polynomial in a context containing all of its variables by name.
    pub fn embed(&self, target: &Ctx) -> Result<Self, PolyError> {
        if same_ctx(&self.ctx, target) {
            return Ok(Polynomial {
                ctx: target.clone(),
                terms: self.terms.clone(),
            });
        }
        let mut map = Vec::with_capacity(self.ctx.arity());
        for (i, name) in self.ctx.names().iter().enumerate() {
            match target.index_of(name) {
                Some(j) => map.push(Some(j)),
                None if self.is_free_of(i) => map.push(None),
                None => return Err(PolyError::UnknownVariable(name.clone())),
            }
        }
        let mut out = Self::zero(target);
        for (m, c) in &self.terms {
            let mut e = vec![0; target.arity()];
            for (i, &k) in m.0.iter().enumerate() {
                if let Some(j) = map[i] {
                    e[j] += k;
                }
            }
            out.add_term(Monomial(e), c.clone());
        }
        Ok(out)
    }

    /// Exact quotient `self / divisor`, or `None` when the division leaves a remainder.
    pub fn div_exact(&self, divisor: &Polynomial) -> Option<Polynomial> {
        if !same_ctx(&self.ctx, &divisor.ctx) || divisor.is_zero() {
            return None;
        }
        let (lm, lc) = divisor.leading_term().map(|(m, c)| (m.clone(), c.clone()))?;
        let mut rem = self.clone();
        let mut quot = Self::zero(&self.ctx);
        while let Some((m, c)) = rem.leading_term().map(|(m, c)| (m.clone(), c.clone())) {
            if !lm.divides(&m) {
                return None;
            }
            let qm = m.div(&lm);
            let qc = c / &lc;
            for (dm, dc) in &divisor.terms {
                rem.add_term(dm.mul(&qm), -(dc * &qc));
            }
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Splits by powers of variable `i`: `self = Σ_k coeff_k · x_i^k`, coefficients free of `x_i`.
    pub fn collect_in(&self, i: usize) -> BTreeMap<u32, Polynomial> {
        let mut out: BTreeMap<u32, Polynomial> = BTreeMap::new();
        for (m, c) in &self.terms {
            let k = m.0[i];
            let mut nm = m.clone();
            nm.0[i] = 0;
            out.entry(k)
                .or_insert_with(|| Polynomial::zero(&self.ctx))
                .add_term(nm, c.clone());
        }
        out
    }

    /// Multiplies by `x_i^k`.
    pub fn shift_in(&self, i: usize, k: u32) -> Self {
        Polynomial {
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut nm = m.clone();
                    nm.0[i] += k;
                    (nm, c.clone())
                })
                .collect(),
        }
    }

    /// Divides by `x_i^k`; every term must carry at least that power.
    pub fn unshift_in(&self, i: usize, k: u32) -> Self {
        Polynomial {
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut nm = m.clone();
                    assert!(nm.0[i] >= k, "unshift below zero");
                    nm.0[i] -= k;
                    (nm, c.clone())
                })
                .collect(),
        }
    }

    /// Canonical text: terms in decreasing graded-lex order, `*` and `^` explicit.
    pub fn to_canonical(&self) -> String {
        self.to_string()
    }
}

const MERSENNE: u64 = (1 << 61) - 1;

fn mod_mersenne(n: &BigInt) -> u64 {
    let p = BigInt::from(MERSENNE);
    let r = ((n % &p) + &p) % &p;
    r.to_u64().expect("residue fits")
}

fn mulmod(a: u64, b: u64) -> u64 {
    let x = a as u128 * b as u128;
    let r = (x as u64 & MERSENNE) + (x >> 61) as u64;
    if r >= MERSENNE {
        r - MERSENNE
    } else {
        r
    }
}

/// Repeated exact zero tests of one polynomial. A nonzero residue of the
/// cleared-denominator value modulo `2^61 - 1` proves the value nonzero; a zero
/// residue falls back to rational evaluation.
#[derive(Debug, Clone)]
pub struct ZeroTester<'a> {
    poly: &'a Polynomial,
    coeffs: Vec<u64>,
    exps: Vec<Vec<(usize, u32)>>,
    degrees: Vec<u32>,
    var_degrees: Vec<u32>,
}

impl<'a> ZeroTester<'a> {
    pub fn new(poly: &'a Polynomial) -> Self {
        let l = poly.terms.values().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let mut coeffs = Vec::with_capacity(poly.num_terms());
        let mut exps = Vec::with_capacity(poly.num_terms());
        let mut degrees = Vec::with_capacity(poly.num_terms());
        for (m, c) in &poly.terms {
            coeffs.push(mod_mersenne(&(c.numer() * (&l / c.denom()))));
            exps.push(m.0.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, &e)| (i, e)).collect());
            degrees.push(m.degree());
        }
        let var_degrees = (0..poly.ctx.arity()).map(|i| poly.degree_in(i)).collect();
        ZeroTester { poly, coeffs, exps, degrees, var_degrees }
    }

    pub fn vanishes_at(&self, point: &[Rational]) -> Result<bool, PolyError> {
        let p = self.poly;
        if point.len() != p.ctx.arity() {
            return Err(PolyError::ArityMismatch { expected: p.ctx.arity(), got: point.len() });
        }
        if p.is_zero() {
            return Ok(true);
        }
        let d = point.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let top = p.degree().unwrap_or(0) as usize;
        let dm = mod_mersenne(&d);
        let mut d_pow = vec![1u64; top + 1];
        for k in 1..=top {
            d_pow[k] = mulmod(d_pow[k - 1], dm);
        }
        let powers: Vec<Vec<u64>> = point
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let n = mod_mersenne(&(x.numer() * (&d / x.denom())));
                let mut v = vec![1u64; self.var_degrees[i] as usize + 1];
                for k in 1..v.len() {
                    v[k] = mulmod(v[k - 1], n);
                }
                v
            })
            .collect();
        let mut acc = 0u64;
        for ((c, e), &deg) in self.coeffs.iter().zip(&self.exps).zip(&self.degrees) {
            let t = e.iter().fold(*c, |t, &(i, k)| mulmod(t, powers[i][k as usize]));
            acc += mulmod(t, d_pow[top - deg as usize]);
            if acc >= MERSENNE {
                acc -= MERSENNE;
            }
        }
        if acc != 0 {
            return Ok(false);
        }
        Ok(p.evaluate(point)?.is_zero())
    }
}

pub fn format_monomial(ctx: &VarContext, m: &Monomial) -> String {
    let mut parts = Vec::new();
    for (i, &e) in m.0.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(ctx.names[i].clone()),
            _ => parts.push(format!("{}^{}", ctx.names[i], e)),
        }
    }
    parts.join("*")
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mono = format_monomial(&self.ctx, m);
            if mono.is_empty() {
                write!(f, "{}", format_rational(&abs))?;
            } else if abs.is_one() {
                write!(f, "{}", mono)?;
            } else {
                write!(f, "{}*{}", format_rational(&abs), mono)?;
            }
        }
        Ok(())
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl std::ops::$tr<&Polynomial> for &Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                self.$checked(rhs).expect("polynomial context mismatch")
            }
        }
        impl std::ops::$tr<Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                (&self).$checked(&rhs).expect("polynomial context mismatch")
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl std::ops::Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Rational::one())
    }
}

impl std::ops::Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xyz() -> Ctx {
        VarContext::new(&["x", "y", "z"]).unwrap()
    }

    fn v(ctx: &Ctx, n: &str) -> Polynomial {
        Polynomial::var(ctx, n).unwrap()
    }

    #[test]
    fn zero_tester_matches_evaluation() {
        let ctx = xyz();
        let (x, y, z) = (v(&ctx, "x"), v(&ctx, "y"), v(&ctx, "z"));
        let p = &(&(&x * &x) - &(&y * &y).scale(&rat(4, 9))) + &(&z * &x).scale(&rat(1, 7));
        let zt = ZeroTester::new(&p);
        for pt in [[rat(2, 3), rat(1, 1), int(0)], [rat(2, 3), rat(1, 1), rat(1, 5)], [int(0), int(0), int(0)]] {
            assert_eq!(zt.vanishes_at(&pt).unwrap(), p.evaluate(&pt).unwrap().is_zero());
        }
        assert!(zt.vanishes_at(&[int(1)]).is_err());
    }

    #[test]
    fn difference_of_squares() {
        let c = xyz();
        let (x, y) = (v(&c, "x"), v(&c, "y"));
        let p = poly_arith(ArithOp::Mul, &(&x + &y), &(&x - &y)).unwrap();
        assert_eq!(p.to_string(), "x^2 - y^2");
    }

    #[test]
    fn context_mismatch_names_both() {
        let a = Polynomial::var(&xyz(), "x").unwrap();
        let other = VarContext::new(&["u", "v"]).unwrap();
        let b = Polynomial::var(&other, "u").unwrap();
        let err = poly_arith(ArithOp::Add, &a, &b).unwrap_err();
        assert_eq!(
            err,
            PolyError::ContextMismatch {
                left: "x,y,z".into(),
                right: "u,v".into()
            }
        );
    }

    #[test]
    fn derivatives() {
        let c = xyz();
        let (x, y, z) = (v(&c, "x"), v(&c, "y"), v(&c, "z"));
        let p = &x.pow(3) - &(&x * &y.pow(2));
        assert_eq!(p.partial_derivative("x").unwrap().to_string(), "3*x^2 - y^2");
        let g2 = &(&y * &(&x.pow(2) + &y.pow(2))) + &(&x * &z.pow(2));
        assert_eq!(g2.partial_derivative("y").unwrap().to_string(), "x^2 + 3*y^2");
        let k = Polynomial::constant(&c, int(7));
        assert!(k.partial_derivative("z").unwrap().is_zero());
        assert_eq!(
            p.partial_derivative("w").unwrap_err(),
            PolyError::UnknownVariable("w".into())
        );
    }

    #[test]
    fn evaluation() {
        let c = xyz();
        let (x, y, z) = (v(&c, "x"), v(&c, "y"), v(&c, "z"));
        let q = &(&x.pow(2) - &y.pow(2)) - &z.pow(2);
        assert_eq!(q.evaluate(&[int(1), int(1), int(0)]).unwrap(), int(0));
        assert_eq!(q.evaluate(&[int(2), int(1), int(1)]).unwrap(), int(2));
        let c2 = VarContext::new(&["x", "y"]).unwrap();
        let rho = &v(&c2, "x").pow(2) + &v(&c2, "y").pow(2);
        assert_eq!(rho.evaluate(&[rat(3, 2), rat(1, 2)]).unwrap(), rat(5, 2));
        assert_eq!(
            rho.evaluate(&[int(1)]).unwrap_err(),
            PolyError::ArityMismatch { expected: 2, got: 1 }
        );
    }

    #[test]
    fn canonical_text_uses_fractions_and_order() {
        let c = xyz();
        let (x, y, z) = (v(&c, "x"), v(&c, "y"), v(&c, "z"));
        let p = &(&(&x.pow(3) - &(&x * &y.pow(2))) - &(&x * &z.pow(2)))
            + &Polynomial::constant(&c, rat(-1, 2));
        assert_eq!(p.to_string(), "x^3 - x*y^2 - x*z^2 - 1/2");
        let q = (&x * &y).scale(&rat(3, 4));
        assert_eq!(q.to_string(), "3/4*x*y");
        assert_eq!(Polynomial::zero(&c).to_string(), "0");
        assert_eq!((-&x).to_string(), "-x");
    }

    #[test]
    fn exact_division() {
        let c = xyz();
        let (x, y) = (v(&c, "x"), v(&c, "y"));
        let a = &x + &y;
        let b = &(&x - &y) * &x;
        let prod = &a * &b;
        assert_eq!(prod.div_exact(&a).unwrap(), b);
        assert!(prod.div_exact(&(&x + &Polynomial::one(&c))).is_none());
    }

    #[test]
    fn substitution_and_embedding() {
        let c = xyz();
        let st = VarContext::new(&["s", "t"]).unwrap();
        let (s, t) = (v(&st, "s"), v(&st, "t"));
        let p = &v(&c, "x") * &v(&c, "y") - v(&c, "z");
        let q = p
            .substitute(&[s.clone(), t.clone(), &s * &t], &st)
            .unwrap();
        assert!(q.is_zero());
        let big = VarContext::new(&["a", "x", "y", "z"]).unwrap();
        let e = p.embed(&big).unwrap();
        assert_eq!(e.to_string(), "x*y - z");
        assert!(p.embed(&st).is_err());
    }

    #[test]
    fn duplicate_names_rejected() {
        assert_eq!(
            VarContext::new(&["x", "x"]).unwrap_err(),
            PolyError::DuplicateVariable("x".into())
        );
    }
}
