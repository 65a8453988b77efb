//! Mixed polynomials `f(z, z̄)`: expansion, realification and Wirtinger gradients.
//!
//! Two representations are kept side by side. The *formal* one treats `z_j` and
//! `conj(z_j)` as independent variables with complex coefficients; the
//! *realified* one substitutes `z_j = x_j + i·y_j` and splits into `u + i·v`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::germ::{GermError, RealMapGerm};
use crate::poly::{format_monomial, format_rational, int, Ctx, Monomial, PolyError, Polynomial, Rational, VarContext};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MixedError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Germ(#[from] GermError),
    #[error("variable index {index} out of range for {n} complex variables")]
    VariableOutOfRange { index: usize, n: usize },
    #[error("`{0}` is not holomorphic")]
    NotHolomorphic(String),
    #[error("{0}")]
    Partition(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ComplexRational {
    pub re: Rational,
    pub im: Rational,
}

impl ComplexRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        ComplexRational { re, im }
    }

    pub fn real(re: Rational) -> Self {
        ComplexRational { re, im: Rational::zero() }
    }

    pub fn zero() -> Self {
        Self::real(Rational::zero())
    }

    pub fn one() -> Self {
        Self::real(Rational::one())
    }

    pub fn i() -> Self {
        ComplexRational { re: Rational::zero(), im: Rational::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        ComplexRational { re: self.re.clone(), im: -&self.im }
    }

    pub fn norm_sq(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn add(&self, o: &Self) -> Self {
        ComplexRational { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    pub fn sub(&self, o: &Self) -> Self {
        ComplexRational { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    pub fn mul(&self, o: &Self) -> Self {
        ComplexRational {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    pub fn neg(&self) -> Self {
        ComplexRational { re: -&self.re, im: -&self.im }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

impl fmt::Display for ComplexRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", format_rational(&self.re)),
            (true, false) => write!(f, "{}*i", format_rational(&self.im)),
            (false, false) => {
                let sign = if self.im.is_negative() { "-" } else { "+" };
                write!(
                    f,
                    "{} {} {}*i",
                    format_rational(&self.re),
                    sign,
                    format_rational(&self.im.abs())
                )
            }
        }
    }
}

/// Abstract syntax of a mixed polynomial over declared complex variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MixedExpr {
    Lit(ComplexRational),
    I,
    Var(usize),
    Conj(usize),
    Sum(Vec<MixedExpr>),
    Product(Vec<MixedExpr>),
    Pow(Box<MixedExpr>, u32),
}

impl MixedExpr {
    pub fn neg(e: MixedExpr) -> MixedExpr {
        MixedExpr::Product(vec![MixedExpr::Lit(ComplexRational::real(int(-1))), e])
    }

    pub fn max_var(&self) -> Option<usize> {
        match self {
            MixedExpr::Lit(_) | MixedExpr::I => None,
            MixedExpr::Var(j) | MixedExpr::Conj(j) => Some(*j),
            MixedExpr::Sum(v) | MixedExpr::Product(v) => v.iter().filter_map(Self::max_var).max(),
            MixedExpr::Pow(b, _) => b.max_var(),
        }
    }

    pub fn has_conj(&self) -> bool {
        match self {
            MixedExpr::Conj(_) => true,
            MixedExpr::Lit(_) | MixedExpr::I | MixedExpr::Var(_) => false,
            MixedExpr::Sum(v) | MixedExpr::Product(v) => v.iter().any(Self::has_conj),
            MixedExpr::Pow(b, e) => *e > 0 && b.has_conj(),
        }
    }

    /// Direct evaluation at complex rational coordinates.
    pub fn eval(&self, z: &[ComplexRational]) -> ComplexRational {
        match self {
            MixedExpr::Lit(c) => c.clone(),
            MixedExpr::I => ComplexRational::i(),
            MixedExpr::Var(j) => z[*j].clone(),
            MixedExpr::Conj(j) => z[*j].conj(),
            MixedExpr::Sum(v) => v.iter().fold(ComplexRational::zero(), |a, e| a.add(&e.eval(z))),
            MixedExpr::Product(v) => v.iter().fold(ComplexRational::one(), |a, e| a.mul(&e.eval(z))),
            MixedExpr::Pow(b, e) => b.eval(z).pow(*e),
        }
    }

    /// Expansion in the formal context `[z_1..z_n, conj(z_1)..conj(z_n)]`.
    pub fn to_formal(&self, formal: &Ctx) -> ComplexPoly {
        let n = formal.arity() / 2;
        match self {
            MixedExpr::Lit(c) => ComplexPoly::constant(formal, c),
            MixedExpr::I => ComplexPoly::constant(formal, &ComplexRational::i()),
            MixedExpr::Var(j) => ComplexPoly::from_real(Polynomial::var_index(formal, *j)),
            MixedExpr::Conj(j) => ComplexPoly::from_real(Polynomial::var_index(formal, n + *j)),
            MixedExpr::Sum(v) => v
                .iter()
                .fold(ComplexPoly::zero(formal), |a, e| a.add(&e.to_formal(formal))),
            MixedExpr::Product(v) => v
                .iter()
                .fold(ComplexPoly::one(formal), |a, e| a.mul(&e.to_formal(formal))),
            MixedExpr::Pow(b, e) => b.to_formal(formal).pow(*e),
        }
    }

    /// Sum-of-monomials expression for a formal polynomial.
    pub fn from_formal(p: &ComplexPoly) -> MixedExpr {
        let n = p.ctx().arity() / 2;
        let mut terms = Vec::new();
        for (m, c) in p.coefficients() {
            let mut factors = vec![MixedExpr::Lit(c)];
            for (k, &e) in m.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let base = if k < n { MixedExpr::Var(k) } else { MixedExpr::Conj(k - n) };
                factors.push(if e == 1 { base } else { MixedExpr::Pow(Box::new(base), e) });
            }
            terms.push(MixedExpr::Product(factors));
        }
        MixedExpr::Sum(terms)
    }
}

/// `re + i·im` with real polynomial parts sharing one context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexPoly {
    pub re: Polynomial,
    pub im: Polynomial,
}

impl ComplexPoly {
    pub fn new(re: Polynomial, im: Polynomial) -> Self {
        assert_eq!(re.ctx(), im.ctx(), "complex parts must share a context");
        ComplexPoly { re, im }
    }

    pub fn from_real(re: Polynomial) -> Self {
        let im = Polynomial::zero(re.ctx());
        ComplexPoly { re, im }
    }

    pub fn zero(ctx: &Ctx) -> Self {
        ComplexPoly { re: Polynomial::zero(ctx), im: Polynomial::zero(ctx) }
    }

    pub fn one(ctx: &Ctx) -> Self {
        Self::from_real(Polynomial::one(ctx))
    }

    pub fn constant(ctx: &Ctx, c: &ComplexRational) -> Self {
        ComplexPoly {
            re: Polynomial::constant(ctx, c.re.clone()),
            im: Polynomial::constant(ctx, c.im.clone()),
        }
    }

    pub fn ctx(&self) -> &Ctx {
        self.re.ctx()
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        ComplexPoly { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    pub fn sub(&self, o: &Self) -> Self {
        ComplexPoly { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    pub fn mul(&self, o: &Self) -> Self {
        ComplexPoly {
            re: &(&self.re * &o.re) - &(&self.im * &o.im),
            im: &(&self.re * &o.im) + &(&self.im * &o.re),
        }
    }

    pub fn neg(&self) -> Self {
        ComplexPoly { re: -&self.re, im: -&self.im }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        ComplexPoly { re: self.re.scale(c), im: self.im.scale(c) }
    }

    pub fn times_i(&self) -> Self {
        ComplexPoly { re: -&self.im, im: self.re.clone() }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.ctx());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Conjugates the coefficients only. On realified polynomials this is complex conjugation.
    pub fn conj_coeffs(&self) -> Self {
        ComplexPoly { re: self.re.clone(), im: -&self.im }
    }

    /// `|p|² = re² + im²` for realified polynomials.
    pub fn norm_sq(&self) -> Polynomial {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }

    pub fn derivative(&self, i: usize) -> Self {
        ComplexPoly { re: self.re.derivative(i), im: self.im.derivative(i) }
    }

    pub fn embed(&self, ctx: &Ctx) -> Result<Self, PolyError> {
        Ok(ComplexPoly { re: self.re.embed(ctx)?, im: self.im.embed(ctx)? })
    }

    /// Merged coefficient map, monomials in decreasing order.
    pub fn coefficients(&self) -> Vec<(Monomial, ComplexRational)> {
        let mut map: BTreeMap<Monomial, ComplexRational> = BTreeMap::new();
        for (m, c) in self.re.terms() {
            map.entry(m.clone()).or_insert_with(ComplexRational::zero).re = c.clone();
        }
        for (m, c) in self.im.terms() {
            map.entry(m.clone()).or_insert_with(ComplexRational::zero).im = c.clone();
        }
        map.into_iter().rev().collect()
    }

    /// Replaces variable `k` by `images[k]`.
    pub fn substitute(&self, images: &[ComplexPoly], target: &Ctx) -> Self {
        let mut cache: Vec<Vec<ComplexPoly>> = images.iter().map(|p| vec![ComplexPoly::one(target), p.clone()]).collect();
        let mut out = ComplexPoly::zero(target);
        for (m, c) in self.coefficients() {
            let mut t = ComplexPoly::constant(target, &c);
            for (k, &e) in m.exponents().iter().enumerate() {
                let e = e as usize;
                while cache[k].len() <= e {
                    let next = cache[k].last().unwrap().mul(&images[k]);
                    cache[k].push(next);
                }
                if e > 0 {
                    t = t.mul(&cache[k][e]);
                }
            }
            out = out.add(&t);
        }
        out
    }

    pub fn evaluate(&self, point: &[Rational]) -> Result<ComplexRational, PolyError> {
        Ok(ComplexRational::new(self.re.evaluate(point)?, self.im.evaluate(point)?))
    }
}

impl fmt::Display for ComplexPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", self.re);
        }
        if self.is_zero() {
            return write!(f, "0");
        }
        let ctx = self.ctx().clone();
        for (k, (m, c)) in self.coefficients().into_iter().enumerate() {
            let mono = format_monomial(&ctx, &m);
            // Pure real or pure imaginary coefficients keep their sign outside.
            let (neg, body) = if c.im.is_zero() {
                (c.re.is_negative(), coeff_body(&c.re.abs(), "", &mono))
            } else if c.re.is_zero() {
                (c.im.is_negative(), coeff_body(&c.im.abs(), "i", &mono))
            } else {
                let s = format!("({})", c);
                (false, if mono.is_empty() { s } else { format!("{}*{}", s, mono) })
            };
            match (k, neg) {
                (0, true) => write!(f, "-{}", body)?,
                (0, false) => write!(f, "{}", body)?,
                (_, true) => write!(f, " - {}", body)?,
                (_, false) => write!(f, " + {}", body)?,
            }
        }
        Ok(())
    }
}

fn coeff_body(abs: &Rational, unit: &str, mono: &str) -> String {
    let mut parts = Vec::new();
    if !abs.is_one() || (unit.is_empty() && mono.is_empty()) {
        parts.push(format_rational(abs));
    }
    if !unit.is_empty() {
        parts.push(unit.to_string());
    }
    if !mono.is_empty() {
        parts.push(mono.to_string());
    }
    parts.join("*")
}

/// `[z_1..z_n, conj(z_1)..conj(z_n)]`.
pub fn formal_context<S: AsRef<str>>(vars: &[S]) -> Result<Ctx, PolyError> {
    let mut names: Vec<String> = vars.iter().map(|v| v.as_ref().to_string()).collect();
    names.extend(vars.iter().map(|v| format!("conj({})", v.as_ref())));
    VarContext::new(&names)
}

/// Interleaved real coordinates `[z1_re, z1_im, z2_re, z2_im, …]`.
pub fn realified_context<S: AsRef<str>>(vars: &[S]) -> Result<Ctx, PolyError> {
    let names: Vec<String> = vars
        .iter()
        .flat_map(|v| [format!("{}_re", v.as_ref()), format!("{}_im", v.as_ref())])
        .collect();
    VarContext::new(&names)
}

/// `conj` on a formal polynomial: swap `z_j ↔ conj(z_j)` and conjugate coefficients.
pub fn formal_conj(p: &ComplexPoly) -> ComplexPoly {
    let ctx = p.ctx().clone();
    let n = ctx.arity() / 2;
    let images: Vec<ComplexPoly> = (0..2 * n)
        .map(|k| ComplexPoly::from_real(Polynomial::var_index(&ctx, if k < n { k + n } else { k - n })))
        .collect();
    p.conj_coeffs().substitute(&images, &ctx)
}

fn realify_formal(p: &ComplexPoly, real: &Ctx) -> ComplexPoly {
    let n = real.arity() / 2;
    let mut images = Vec::with_capacity(2 * n);
    for j in 0..n {
        images.push(ComplexPoly::new(Polynomial::var_index(real, 2 * j), Polynomial::var_index(real, 2 * j + 1)));
    }
    for j in 0..n {
        images.push(ComplexPoly::new(Polynomial::var_index(real, 2 * j), -Polynomial::var_index(real, 2 * j + 1)));
    }
    p.substitute(&images, real)
}

/// Realifies `f` over `n` complex variables named `vars`: returns `(u, v)` with `f = u + i·v`.
pub fn realify_mixed<S: AsRef<str>>(f: &MixedExpr, vars: &[S]) -> Result<(Polynomial, Polynomial), MixedError> {
    let n = vars.len();
    if let Some(j) = f.max_var().filter(|&j| j >= n) {
        return Err(MixedError::VariableOutOfRange { index: j, n });
    }
    let formal = formal_context(vars)?;
    let real = realified_context(vars)?;
    let r = realify_formal(&f.to_formal(&formal), &real);
    Ok((r.re, r.im))
}

/// A mixed function `ℂⁿ → ℂ` with its realification and both gradient vectors.
#[derive(Debug, Clone)]
pub struct MixedFunction {
    name: String,
    vars: Vec<String>,
    expr: MixedExpr,
    formal: ComplexPoly,
    realified: RealMapGerm,
    /// `∂f/∂z_j`, realified.
    pub dz: Vec<ComplexPoly>,
    /// `∂f/∂z̄_j`, realified.
    pub dzbar: Vec<ComplexPoly>,
}

// Equality is by value, not by the expression tree it was built from.
impl PartialEq for MixedFunction {
    fn eq(&self, o: &Self) -> bool {
        self.name == o.name && self.vars == o.vars && self.formal == o.formal
    }
}

impl Eq for MixedFunction {}

impl MixedFunction {
    pub fn new<S: AsRef<str>>(name: &str, vars: &[S], expr: MixedExpr) -> Result<Self, MixedError> {
        let n = vars.len();
        if let Some(j) = expr.max_var().filter(|&j| j >= n) {
            return Err(MixedError::VariableOutOfRange { index: j, n });
        }
        let formal_ctx = formal_context(vars)?;
        let formal = expr.to_formal(&formal_ctx);
        Self::assemble(name, vars, expr, formal)
    }

    pub fn from_formal<S: AsRef<str>>(name: &str, vars: &[S], formal: ComplexPoly) -> Result<Self, MixedError> {
        let ctx = formal_context(vars)?;
        let formal = formal.embed(&ctx)?;
        let expr = MixedExpr::from_formal(&formal);
        Self::assemble(name, vars, expr, formal)
    }

    fn assemble<S: AsRef<str>>(name: &str, vars: &[S], expr: MixedExpr, formal: ComplexPoly) -> Result<Self, MixedError> {
        let n = vars.len();
        let real = realified_context(vars)?;
        let r = realify_formal(&formal, &real);
        let realified = RealMapGerm::new(name, &real, vec![r.re, r.im])?;
        let dz = (0..n).map(|j| realify_formal(&formal.derivative(j), &real)).collect();
        let dzbar = (0..n).map(|j| realify_formal(&formal.derivative(n + j), &real)).collect();
        Ok(MixedFunction {
            name: name.to_string(),
            vars: vars.iter().map(|v| v.as_ref().to_string()).collect(),
            expr,
            formal,
            realified,
            dz,
            dzbar,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn n(&self) -> usize {
        self.vars.len()
    }

    pub fn expr(&self) -> &MixedExpr {
        &self.expr
    }

    pub fn formal(&self) -> &ComplexPoly {
        &self.formal
    }

    pub fn realified(&self) -> &RealMapGerm {
        &self.realified
    }

    pub fn real_ctx(&self) -> &Ctx {
        self.realified.ctx()
    }

    /// `∂f/∂z_j` in the formal variables, e.g. `y*conj(x)`.
    pub fn dz_formal(&self, j: usize) -> ComplexPoly {
        self.formal.derivative(j)
    }

    pub fn dzbar_formal(&self, j: usize) -> ComplexPoly {
        self.formal.derivative(self.n() + j)
    }

    pub fn is_holomorphic(&self) -> bool {
        self.dzbar.iter().all(ComplexPoly::is_zero)
    }

    /// Holomorphic in the variables of `block`, anti-holomorphic in the rest.
    pub fn is_split_holomorphic(&self, block: &[usize]) -> bool {
        (0..self.n()).all(|j| {
            if block.contains(&j) {
                self.dzbar[j].is_zero()
            } else {
                self.dz[j].is_zero()
            }
        })
    }

    /// Variables the function actually depends on.
    pub fn support(&self) -> Vec<usize> {
        let n = self.n();
        let s = self.formal.re.support().into_iter().chain(self.formal.im.support());
        let mut v: Vec<usize> = s.map(|k| k % n).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Complex value at `z`, via the realified pair.
    pub fn eval_realified(&self, z: &[ComplexRational]) -> Result<ComplexRational, PolyError> {
        let pt = realify_point(z);
        let uv = self.realified.evaluate(&pt)?;
        Ok(ComplexRational::new(uv[0].clone(), uv[1].clone()))
    }

    /// Product with the conjugate of `other`, over the same variables.
    pub fn times_conj(&self, other: &MixedFunction, name: &str) -> Result<MixedFunction, MixedError> {
        let g = other.formal.embed(self.formal.ctx())?;
        MixedFunction::from_formal(name, &self.vars, self.formal.mul(&formal_conj(&g)))
    }
}

/// `[z_1, …] ↦ [Re z_1, Im z_1, …]`.
pub fn realify_point(z: &[ComplexRational]) -> Vec<Rational> {
    z.iter().flat_map(|c| [c.re.clone(), c.im.clone()]).collect()
}

/// Wirtinger gradients recomputed from the realified pair `(u, v)`:
/// `2∂f/∂z_j = (u_x + v_y) + i(v_x − u_y)`, `2∂f/∂z̄_j = (u_x − v_y) + i(v_x + u_y)`.
pub fn wirtinger_gradients(f: &MixedFunction) -> (Vec<ComplexPoly>, Vec<ComplexPoly>) {
    let comps = f.realified().components();
    let (u, v) = (&comps[0], &comps[1]);
    let half = Rational::new(1.into(), 2.into());
    let mut dz = Vec::with_capacity(f.n());
    let mut dzbar = Vec::with_capacity(f.n());
    for j in 0..f.n() {
        let (ux, uy) = (u.derivative(2 * j), u.derivative(2 * j + 1));
        let (vx, vy) = (v.derivative(2 * j), v.derivative(2 * j + 1));
        dz.push(ComplexPoly::new(&ux + &vy, &vx - &uy).scale(&half));
        dzbar.push(ComplexPoly::new(&ux - &vy, &vx + &uy).scale(&half));
    }
    (dz, dzbar)
}

/// Several mixed functions over the same variables, realified as one germ `ℝ²ⁿ → ℝ²ᵏ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedMap {
    name: String,
    functions: Vec<MixedFunction>,
    realified: RealMapGerm,
}

impl MixedMap {
    pub fn new(name: &str, functions: Vec<MixedFunction>) -> Result<Self, MixedError> {
        let first = functions
            .first()
            .ok_or_else(|| GermError::NoComponents(name.to_string()))?;
        let ctx = first.real_ctx().clone();
        let mut comps = Vec::new();
        for f in &functions {
            for c in f.realified().components() {
                comps.push(c.embed(&ctx)?);
            }
        }
        let realified = RealMapGerm::new(name, &ctx, comps)?;
        Ok(MixedMap { name: name.to_string(), functions, realified })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn functions(&self) -> &[MixedFunction] {
        &self.functions
    }

    pub fn realified(&self) -> &RealMapGerm {
        &self.realified
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    fn mixed(vars: &[&str], src: &str) -> MixedFunction {
        crate::dsl::parse_mixed_function("f", vars, src).unwrap()
    }

    fn strs(v: &[ComplexPoly]) -> Vec<String> {
        v.iter().map(ToString::to_string).collect()
    }

    #[test]
    fn realify_basic() {
        let f = mixed(&["z"], "z^2");
        let c: Vec<String> = f.realified().components().iter().map(ToString::to_string).collect();
        assert_eq!(c, ["z_re^2 - z_im^2", "2*z_re*z_im"]);
        let f = mixed(&["z"], "conj(z)");
        let c: Vec<String> = f.realified().components().iter().map(ToString::to_string).collect();
        assert_eq!(c, ["z_re", "-z_im"]);
    }

    #[test]
    fn wirtinger_examples() {
        let f = mixed(&["z"], "z^2");
        assert_eq!(f.dz_formal(0).to_string(), "2*z");
        assert!(f.is_holomorphic());

        let t = mixed(&["x", "y"], "x*y*conj(x)");
        assert_eq!(t.dz_formal(0).to_string(), "y*conj(x)");
        assert_eq!(t.dz_formal(1).to_string(), "x*conj(x)");
        assert_eq!(t.dzbar_formal(0).to_string(), "x*y");
        assert!(t.dzbar_formal(1).is_zero());

        let g = mixed(&["x", "y", "z"], "x*y - conj(z)");
        let dz: Vec<String> = (0..3).map(|j| g.dz_formal(j).to_string()).collect();
        let dzbar: Vec<String> = (0..3).map(|j| g.dzbar_formal(j).to_string()).collect();
        assert_eq!(dz, ["y", "x", "0"]);
        assert_eq!(dzbar, ["0", "0", "-1"]);
    }

    #[test]
    fn both_gradient_routes_agree() {
        for (vars, src) in [
            (vec!["x", "y"], "x*y*conj(x)"),
            (vec!["x", "y", "z"], "x*y - conj(z)"),
            (vec!["z"], "(1 + 2*i)*z^3*conj(z) - i*conj(z)^2"),
        ] {
            let f = mixed(&vars, src);
            let (dz, dzbar) = wirtinger_gradients(&f);
            assert_eq!(strs(&dz), strs(&f.dz));
            assert_eq!(strs(&dzbar), strs(&f.dzbar));
        }
    }

    #[test]
    fn evaluation_routes_agree() {
        let f = mixed(&["x", "y"], "(2 - i)*x*y*conj(x) + i*conj(y)^2");
        let z = [
            ComplexRational::new(rat(1, 2), rat(-3, 4)),
            ComplexRational::new(rat(2, 1), rat(1, 3)),
        ];
        assert_eq!(f.expr().eval(&z), f.eval_realified(&z).unwrap());
    }

    #[test]
    fn complex_printing_round_trips() {
        let f = mixed(&["z"], "(1 + 2*i)*z*conj(z) - i*z - 1/2*i*conj(z) + (3 - 1/2*i)*z^2");
        let printed = f.formal().to_string();
        let again = mixed(&["z"], &printed);
        assert_eq!(again.formal(), f.formal());
    }

    #[test]
    fn conj_of_formal() {
        let f = mixed(&["x", "y"], "i*x*conj(y)^2");
        let g = formal_conj(f.formal());
        assert_eq!(g.to_string(), "-i*y^2*conj(x)");
    }
}
