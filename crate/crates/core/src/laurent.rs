//! Laurent polynomials in a curve parameter `t` with polynomial coefficients in
//! spectator parameters, and curve families built from them.

use std::collections::BTreeMap;
use std::fmt;

use crate::poly::{Ctx, PolyError, Polynomial};

/// `Σ_k c_k(s)·t^k` with finitely many nonzero `c_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentPoly {
    ctx: Ctx,
    terms: BTreeMap<i32, Polynomial>,
}

impl LaurentPoly {
    pub fn zero(ctx: &Ctx) -> Self {
        LaurentPoly { ctx: ctx.clone(), terms: BTreeMap::new() }
    }

    pub fn monomial(k: i32, coeff: Polynomial) -> Self {
        let mut out = Self::zero(coeff.ctx());
        out.add_term(k, coeff);
        out
    }

    pub fn from_poly(p: Polynomial) -> Self {
        Self::monomial(0, p)
    }

    pub fn from_terms(ctx: &Ctx, terms: impl IntoIterator<Item = (i32, Polynomial)>) -> Result<Self, PolyError> {
        let mut out = Self::zero(ctx);
        for (k, c) in terms {
            out.add_term(k, c.embed(ctx)?);
        }
        Ok(out)
    }

    fn add_term(&mut self, k: i32, c: Polynomial) {
        if c.is_zero() {
            return;
        }
        let sum = match self.terms.remove(&k) {
            Some(old) => &old + &c,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(k, sum);
        }
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &Polynomial)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    /// Smallest exponent with a nonzero coefficient.
    pub fn valuation(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    pub fn coeff(&self, k: i32) -> Polynomial {
        self.terms.get(&k).cloned().unwrap_or_else(|| Polynomial::zero(&self.ctx))
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.add_term(*k, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        LaurentPoly {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero(&self.ctx);
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                out.add_term(a + b, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, p: &Polynomial) -> Self {
        let mut out = Self::zero(&self.ctx);
        for (k, c) in &self.terms {
            out.add_term(*k, c * p);
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::from_poly(Polynomial::one(&self.ctx));
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Value at `t` and spectator values `s`.
    pub fn eval_f64(&self, t: f64, s: &[f64]) -> f64 {
        self.terms.iter().map(|(k, c)| c.eval_f64(s) * t.powi(*k)).sum()
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (k, c)) in self.terms.iter().rev().enumerate() {
            let text = c.to_string();
            let single = c.num_terms() == 1;
            let (neg, body) = if single && text.starts_with('-') {
                (true, text[1..].to_string())
            } else {
                (false, text)
            };
            let body = match (*k, single) {
                (0, true) => body,
                (0, false) => format!("({})", body),
                (k, true) if body == "1" => t_power(k),
                (k, true) => format!("{}*{}", body, t_power(k)),
                (k, false) => format!("({})*{}", body, t_power(k)),
            };
            match (n, neg) {
                (0, true) => write!(f, "-{}", body)?,
                (0, false) => write!(f, "{}", body)?,
                (_, true) => write!(f, " - {}", body)?,
                (_, false) => write!(f, " + {}", body)?,
            }
        }
        Ok(())
    }
}

fn t_power(k: i32) -> String {
    if k == 1 {
        "t".to_string()
    } else {
        format!("t^{}", k)
    }
}

/// Vector of Laurent polynomials `γ(t) = (γ_1(t), …, γ_m(t))` in a target space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveFamily {
    target: Ctx,
    params: Ctx,
    comps: Vec<LaurentPoly>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CurveError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("curve has {got} coordinates, target has arity {expected}")]
    Arity { expected: usize, got: usize },
    #[error("curve is identically zero")]
    Zero,
}

impl CurveFamily {
    pub fn new(target: &Ctx, params: &Ctx, comps: Vec<LaurentPoly>) -> Result<Self, CurveError> {
        if comps.len() != target.arity() {
            return Err(CurveError::Arity { expected: target.arity(), got: comps.len() });
        }
        if comps.iter().all(LaurentPoly::is_zero) {
            return Err(CurveError::Zero);
        }
        let comps = comps
            .into_iter()
            .map(|c| LaurentPoly::from_terms(params, c.terms))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CurveFamily { target: target.clone(), params: params.clone(), comps })
    }

    pub fn target(&self) -> &Ctx {
        &self.target
    }

    pub fn params(&self) -> &Ctx {
        &self.params
    }

    pub fn components(&self) -> &[LaurentPoly] {
        &self.comps
    }

    pub fn min_valuation(&self) -> i32 {
        self.comps.iter().filter_map(LaurentPoly::valuation).min().unwrap_or(0)
    }

    /// `γ(0)` when every coordinate is a power series in `t`.
    pub fn at_zero(&self) -> Option<Vec<Polynomial>> {
        if self.min_valuation() < 0 {
            return None;
        }
        Some(self.comps.iter().map(|c| c.coeff(0)).collect())
    }

    /// `p(γ(t))` as a Laurent polynomial.
    pub fn compose(&self, p: &Polynomial) -> Result<LaurentPoly, PolyError> {
        let p = p.embed(&self.target)?;
        let mut cache: Vec<Vec<LaurentPoly>> = self
            .comps
            .iter()
            .map(|c| vec![LaurentPoly::from_poly(Polynomial::one(&self.params)), c.clone()])
            .collect();
        let mut out = LaurentPoly::zero(&self.params);
        for (m, c) in p.terms() {
            let mut t = LaurentPoly::from_poly(Polynomial::constant(&self.params, c.clone()));
            for (i, &e) in m.exponents().iter().enumerate() {
                let e = e as usize;
                if e == 0 {
                    continue;
                }
                while cache[i].len() <= e {
                    let next = cache[i].last().unwrap().mul(&self.comps[i]);
                    cache[i].push(next);
                }
                t = t.mul(&cache[i][e]);
            }
            out = out.add(&t);
        }
        Ok(out)
    }

    pub fn eval_f64(&self, t: f64, s: &[f64]) -> Vec<f64> {
        self.comps.iter().map(|c| c.eval_f64(t, s)).collect()
    }
}

/// Leading behaviour of a Laurent vector as `t → 0⁺`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionLimit {
    pub valuation: i32,
    pub leading: Vec<Polynomial>,
    pub norm_sq: Polynomial,
}

impl DirectionLimit {
    /// Numeric unit direction at spectator values `s`; `None` where the leading vector vanishes.
    pub fn unit_f64(&self, s: &[f64]) -> Option<Vec<f64>> {
        let v: Vec<f64> = self.leading.iter().map(|c| c.eval_f64(s)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        (n > 0.0).then(|| v.iter().map(|x| x / n).collect())
    }
}

/// Minimal-valuation leading vector. `None` when `w` is identically zero.
pub fn leading_vector(w: &[LaurentPoly]) -> Option<DirectionLimit> {
    let nu = w.iter().filter_map(LaurentPoly::valuation).min()?;
    let leading: Vec<Polynomial> = w.iter().map(|c| c.coeff(nu)).collect();
    let ctx = w[0].ctx().clone();
    let norm_sq = leading.iter().fold(Polynomial::zero(&ctx), |a, c| &a + &(c * c));
    debug_assert!(!norm_sq.is_zero() || leading.iter().all(|c| c.is_zero()));
    Some(DirectionLimit { valuation: nu, leading, norm_sq })
}

/// True when every entry is the zero polynomial.
pub fn all_zero(v: &[Polynomial]) -> bool {
    v.iter().all(|p| p.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, VarContext};

    fn s_ctx() -> Ctx {
        VarContext::new(&["s"]).unwrap()
    }

    #[test]
    fn arithmetic_and_valuation() {
        let c = s_ctx();
        let s = Polynomial::var(&c, "s").unwrap();
        let a = LaurentPoly::monomial(-1, s.clone()).add(&LaurentPoly::monomial(2, Polynomial::one(&c)));
        assert_eq!(a.valuation(), Some(-1));
        let sq = a.mul(&a);
        assert_eq!(sq.coeff(-2), &s * &s);
        assert_eq!(sq.coeff(1), s.scale(&int(2)));
        assert_eq!(sq.coeff(4), Polynomial::one(&c));
        assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn display() {
        let c = s_ctx();
        let s = Polynomial::var(&c, "s").unwrap();
        let a = LaurentPoly::monomial(-1, -(&s * &s)).add(&LaurentPoly::monomial(1, Polynomial::one(&c)));
        assert_eq!(a.to_string(), "t - s^2*t^-1");
        let b = LaurentPoly::monomial(0, &s + &Polynomial::one(&c));
        assert_eq!(b.to_string(), "(s + 1)");
    }

    #[test]
    fn minimal_valuation_wins() {
        let c = VarContext::new::<&str>(&[]).unwrap();
        let one = Polynomial::one(&c);
        let w = vec![LaurentPoly::monomial(2, one.clone()), LaurentPoly::monomial(1, one.clone())];
        let d = leading_vector(&w).unwrap();
        assert_eq!(d.valuation, 1);
        assert!(d.leading[0].is_zero());
        assert_eq!(d.leading[1], one);
    }
}
