//! Real polynomial map germs: Jacobians, singular minors, the Milnor-set
//! polynomial `det(A·Aᵀ)` and exact pullbacks along rational parametrizations.

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::matrix::{combinations, PolyMatrix};
use crate::poly::{Ctx, PolyError, Polynomial, Rational, VarContext};
use crate::sample::find_nonzero_point;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GermError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("germ `{0}` has no components")]
    NoComponents(String),
    #[error("germ `{name}` maps R^{m} to R^{p}; need m >= p")]
    TooManyComponents { name: String, m: usize, p: usize },
    #[error("component {index} of `{name}` does not vanish at the origin (constant {constant})")]
    NotAtOrigin {
        name: String,
        index: usize,
        constant: String,
    },
    #[error("parametrization has {got} coordinates, target has arity {expected}")]
    ParamArity { expected: usize, got: usize },
    #[error("denominator of coordinate {0} is identically zero")]
    ZeroDenominator(usize),
    #[error("composition arity mismatch: inner map has {inner} components, outer map has {outer} variables")]
    CompositionArity { inner: usize, outer: usize },
}

/// Polynomial representative of a germ `G:(ℝᵐ,0)→(ℝᵖ,0)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealMapGerm {
    name: String,
    ctx: Ctx,
    components: Vec<Polynomial>,
}

impl RealMapGerm {
    pub fn new(
        name: impl Into<String>,
        ctx: &Ctx,
        components: Vec<Polynomial>,
    ) -> Result<Self, GermError> {
        let name = name.into();
        if components.is_empty() {
            return Err(GermError::NoComponents(name));
        }
        if ctx.arity() < components.len() {
            return Err(GermError::TooManyComponents {
                name,
                m: ctx.arity(),
                p: components.len(),
            });
        }
        let mut comps = Vec::with_capacity(components.len());
        for (index, c) in components.into_iter().enumerate() {
            let c = c.embed(ctx)?;
            let k = c.constant_term();
            if !k.is_zero() {
                return Err(GermError::NotAtOrigin {
                    name,
                    index,
                    constant: crate::poly::format_rational(&k),
                });
            }
            comps.push(c);
        }
        Ok(RealMapGerm {
            name,
            ctx: ctx.clone(),
            components: comps,
        })
    }

    /// Convenience constructor from variable names.
    pub fn from_names<S: AsRef<str>>(
        name: impl Into<String>,
        vars: &[S],
        components: impl FnOnce(&Ctx) -> Vec<Polynomial>,
    ) -> Result<Self, GermError> {
        let ctx = VarContext::new(vars)?;
        let comps = components(&ctx);
        Self::new(name, &ctx, comps)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    /// Source dimension m.
    pub fn source_dim(&self) -> usize {
        self.ctx.arity()
    }

    /// Target dimension p.
    pub fn target_dim(&self) -> usize {
        self.components.len()
    }

    /// `p×m` matrix whose row `i` is `∇G_i`.
    pub fn jacobian(&self) -> PolyMatrix {
        let rows = self.components.iter().map(Polynomial::gradient).collect();
        PolyMatrix::from_rows(rows).expect("gradients share the germ context")
    }

    /// Rows `∇G_1,…,∇G_p, x`. The last row is `½∇ρ` for `ρ = Σ xᵢ²`; same rank everywhere.
    pub fn stacked_matrix(&self) -> PolyMatrix {
        let mut rows: Vec<Vec<Polynomial>> =
            self.components.iter().map(Polynomial::gradient).collect();
        rows.push(
            (0..self.source_dim())
                .map(|i| Polynomial::var_index(&self.ctx, i))
                .collect(),
        );
        PolyMatrix::from_rows(rows).expect("gradients share the germ context")
    }

    pub fn milnor_polynomial(&self) -> MilnorData {
        let stacked = self.stacked_matrix();
        let milnor_poly = stacked
            .gram()
            .determinant_fraction_free()
            .expect("Gram matrix is square");
        let square_det = (stacked.rows() == stacked.cols()).then(|| {
            stacked
                .determinant_fraction_free()
                .expect("checked square")
        });
        MilnorData {
            germ: self.name.clone(),
            stacked,
            milnor_poly,
            square_det,
        }
    }

    /// All maximal minors of the stacked matrix. Their common zero set is `M(G)`;
    /// empty when `m = p`, where `M(G)` is everything.
    pub fn stacked_minors(&self) -> Vec<Polynomial> {
        let stacked = self.stacked_matrix();
        let k = stacked.rows();
        if k > self.source_dim() {
            return Vec::new();
        }
        combinations(self.source_dim(), k)
            .into_iter()
            .map(|cols| {
                stacked
                    .select_columns(&cols)
                    .determinant_fraction_free()
                    .expect("square minor")
            })
            .collect()
    }

    /// All `p×p` minors of the Jacobian, columns taken in lexicographic order.
    pub fn singular_minors(&self) -> Vec<Polynomial> {
        let jac = self.jacobian();
        let p = self.target_dim();
        combinations(self.source_dim(), p)
            .into_iter()
            .map(|cols| {
                jac.select_columns(&cols)
                    .determinant_fraction_free()
                    .expect("square minor")
            })
            .collect()
    }

    /// `outer ∘ self`, expressed in this germ's variables.
    pub fn compose_into(&self, outer: &RealMapGerm, name: &str) -> Result<RealMapGerm, GermError> {
        if outer.source_dim() != self.target_dim() {
            return Err(GermError::CompositionArity {
                inner: self.target_dim(),
                outer: outer.source_dim(),
            });
        }
        let comps = outer
            .components
            .iter()
            .map(|h| h.substitute(&self.components, &self.ctx))
            .collect::<Result<Vec<_>, _>>()?;
        RealMapGerm::new(name, &self.ctx, comps)
    }

    pub fn evaluate(&self, point: &[Rational]) -> Result<Vec<Rational>, PolyError> {
        self.components.iter().map(|c| c.evaluate(point)).collect()
    }

    pub fn eval_f64(&self, point: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.eval_f64(point)).collect()
    }
}

/// `ρ(x) = Σ xᵢ²`.
pub fn euclidean_rho(ctx: &Ctx) -> Polynomial {
    (0..ctx.arity()).fold(Polynomial::zero(ctx), |acc, i| {
        let x = Polynomial::var_index(ctx, i);
        &acc + &(&x * &x)
    })
}

/// Stacked gradient matrix and its Milnor-set polynomial.
#[derive(Debug, Clone)]
pub struct MilnorData {
    pub germ: String,
    pub stacked: PolyMatrix,
    pub milnor_poly: Polynomial,
    /// `det(A)` when `A` is square (`m = p + 1`); same zero set as `milnor_poly`.
    pub square_det: Option<Polynomial>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MilnorJson {
    pub germ: String,
    pub milnor_poly: String,
    pub square_det: Option<String>,
    pub stacked_shape: [usize; 2],
    pub seed: u64,
}

impl MilnorData {
    pub fn to_json(&self, seed: u64) -> MilnorJson {
        MilnorJson {
            germ: self.germ.clone(),
            milnor_poly: self.milnor_poly.to_string(),
            square_det: self.square_det.as_ref().map(ToString::to_string),
            stacked_shape: [self.stacked.rows(), self.stacked.cols()],
            seed,
        }
    }
}

/// Rational parametrization `s ↦ (n₁(s)/d₁(s), …, n_m(s)/d_m(s))` of a set component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parametrization {
    target: Ctx,
    params: Ctx,
    coords: Vec<(Polynomial, Polynomial)>,
}

impl Parametrization {
    pub fn new(
        target: &Ctx,
        params: &Ctx,
        coords: Vec<(Polynomial, Polynomial)>,
    ) -> Result<Self, GermError> {
        if coords.len() != target.arity() {
            return Err(GermError::ParamArity {
                expected: target.arity(),
                got: coords.len(),
            });
        }
        let mut out = Vec::with_capacity(coords.len());
        for (i, (n, d)) in coords.into_iter().enumerate() {
            let d = d.embed(params)?;
            if d.is_zero() {
                return Err(GermError::ZeroDenominator(i));
            }
            out.push((n.embed(params)?, d));
        }
        Ok(Parametrization {
            target: target.clone(),
            params: params.clone(),
            coords: out,
        })
    }

    /// Polynomial parametrization (all denominators 1).
    pub fn polynomial(target: &Ctx, params: &Ctx, coords: Vec<Polynomial>) -> Result<Self, GermError> {
        let coords = coords
            .into_iter()
            .map(|n| (n, Polynomial::one(params)))
            .collect();
        Self::new(target, params, coords)
    }

    pub fn target(&self) -> &Ctx {
        &self.target
    }

    pub fn params(&self) -> &Ctx {
        &self.params
    }

    pub fn coords(&self) -> &[(Polynomial, Polynomial)] {
        &self.coords
    }

    /// Number of free parameters; used as the component dimension.
    pub fn dimension(&self) -> usize {
        self.params.arity()
    }

    pub fn is_polynomial(&self) -> bool {
        self.coords.iter().all(|(_, d)| d.is_constant())
    }

    /// Image point, or `None` where a denominator vanishes.
    pub fn evaluate(&self, s: &[Rational]) -> Option<Vec<Rational>> {
        self.coords
            .iter()
            .map(|(n, d)| {
                let dv = d.evaluate(s).ok()?;
                if dv.is_zero() {
                    None
                } else {
                    Some(n.evaluate(s).ok()? / dv)
                }
            })
            .collect()
    }

    pub fn admissible(&self, s: &[Rational]) -> bool {
        self.coords
            .iter()
            .all(|(_, d)| d.evaluate(s).is_ok_and(|v| !v.is_zero()))
    }

    /// Numerator of `p∘φ` after clearing denominators; zero iff `p` vanishes on the image.
    pub fn pullback(&self, p: &Polynomial) -> Result<Polynomial, GermError> {
        let p = p.embed(&self.target)?;
        let m = self.target.arity();
        let degs: Vec<u32> = (0..m).map(|i| p.degree_in(i)).collect();
        let mut num_pows: Vec<Vec<Polynomial>> = Vec::with_capacity(m);
        let mut den_pows: Vec<Vec<Polynomial>> = Vec::with_capacity(m);
        for (i, (n, d)) in self.coords.iter().enumerate() {
            num_pows.push(powers(n, degs[i]));
            den_pows.push(if d.is_one_poly() {
                Vec::new()
            } else {
                powers(d, degs[i])
            });
        }
        let mut out = Polynomial::zero(&self.params);
        for (mono, c) in p.terms() {
            let mut t = Polynomial::constant(&self.params, c.clone());
            for (i, &e) in mono.exponents().iter().enumerate() {
                let e = e as usize;
                if e > 0 {
                    t = &t * &num_pows[i][e];
                }
                if !den_pows[i].is_empty() {
                    let k = degs[i] as usize - e;
                    if k > 0 {
                        t = &t * &den_pows[i][k];
                    }
                }
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// Pushes the parametrization through `map`: `s ↦ map(φ(s))`, as a parametrization of
    /// the map's target space (whose variable names are `target_names`).
    pub fn push_forward(&self, map: &RealMapGerm, target: &Ctx) -> Result<Parametrization, GermError> {
        if target.arity() != map.target_dim() {
            return Err(GermError::CompositionArity {
                inner: map.target_dim(),
                outer: target.arity(),
            });
        }
        let mut coords = Vec::with_capacity(map.target_dim());
        for comp in map.components() {
            let comp = comp.embed(&self.target)?;
            let num = self.pullback(&comp)?;
            let mut den = Polynomial::one(&self.params);
            for (i, (_, d)) in self.coords.iter().enumerate() {
                let k = comp.degree_in(i);
                if k > 0 && !d.is_one_poly() {
                    den = &den * &d.pow(k);
                }
            }
            coords.push((num, den));
        }
        Parametrization::new(target, &self.params, coords)
    }

    /// Tangent generators `∂φ/∂s_j`, each scaled by `∏ d_i²` so the entries are polynomials.
    pub fn tangent_generators(&self) -> Vec<Vec<Polynomial>> {
        let k = self.params.arity();
        let all_dens_sq: Vec<Polynomial> = self.coords.iter().map(|(_, d)| d * d).collect();
        (0..k)
            .map(|j| {
                self.coords
                    .iter()
                    .enumerate()
                    .map(|(i, (n, d))| {
                        let num = &(&n.derivative(j) * d) - &(n * &d.derivative(j));
                        all_dens_sq
                            .iter()
                            .enumerate()
                            .filter(|(l, _)| *l != i)
                            .fold(num, |acc, (_, q)| &acc * q)
                    })
                    .collect()
            })
            .collect()
    }
}

trait OnePoly {
    fn is_one_poly(&self) -> bool;
}

impl OnePoly for Polynomial {
    fn is_one_poly(&self) -> bool {
        self.is_constant() && self.constant_term().is_one()
    }
}

fn powers(p: &Polynomial, up_to: u32) -> Vec<Polynomial> {
    let mut v = vec![Polynomial::one(p.ctx())];
    for k in 1..=up_to as usize {
        let next = &v[k - 1] * p;
        v.push(next);
    }
    v
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PullbackOutcome {
    Vanishes,
    /// `pulled` is the cleared numerator; `value` is `p(φ(point))`.
    Nonzero {
        pulled: Polynomial,
        point: Vec<Rational>,
        value: Rational,
    },
}

impl PullbackOutcome {
    pub fn vanishes(&self) -> bool {
        matches!(self, PullbackOutcome::Vanishes)
    }
}

/// Decides exactly whether `p` vanishes identically on the image of `φ`.
pub fn pullback_vanishes(p: &Polynomial, phi: &Parametrization) -> Result<PullbackOutcome, GermError> {
    let pulled = phi.pullback(p)?;
    if pulled.is_zero() {
        return Ok(PullbackOutcome::Vanishes);
    }
    let target_p = p.embed(phi.target())?;
    let (point, _) = find_nonzero_point(&pulled, 0x5EED, |s| phi.admissible(s))
        .expect("a nonzero polynomial has a nonzero admissible rational point");
    let image = phi.evaluate(&point).expect("admissible point");
    let value = target_p.evaluate(&image)?;
    Ok(PullbackOutcome::Nonzero {
        pulled,
        point,
        value,
    })
}
