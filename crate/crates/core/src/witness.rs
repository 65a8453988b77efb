//! Limits of normal vectors along curve families, Thom-irregularity witnesses,
//! and the exact and sampled probes for condition (b) and for compositions.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::facts::Fact;
use crate::germ::{pullback_vanishes, GermError, Parametrization, PullbackOutcome, RealMapGerm};
use crate::laurent::{leading_vector, CurveError, CurveFamily, DirectionLimit, LaurentPoly};
use crate::matrix::dot;
use nalgebra::{DMatrix, DVector};

use crate::numeric::{
    distance, gauss_newton_project, levenberg_marquardt, norm, F64Poly, GradientRows, PolySystem, Residuals,
    SolveOptions,
};
use crate::poly::{Ctx, PolyError, Polynomial, VarContext};
use crate::regularity::{is_definite_by_monomials, separable_sum, RegError};
use crate::report::{Contradiction, RegularityReport};
use crate::sample::{RationalSampler, DEFAULT_SAMPLES, DEFAULT_SEED};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Germ(#[from] GermError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Reg(#[from] RegError),
    #[error(transparent)]
    Contradiction(#[from] Contradiction),
    #[error("coefficient path is identically zero")]
    ZeroCoefficients,
    #[error("expected {expected} coefficients, got {got}")]
    CoefficientArity { expected: usize, got: usize },
    #[error("curve lives in ({got}), germ `{germ}` has variables ({expected})")]
    TargetMismatch { germ: String, expected: String, got: String },
    #[error("vector is identically zero; no limit direction")]
    ZeroVector,
    #[error("curve lies in V: every component of `{0}` vanishes along it")]
    CurveInV(String),
    #[error("curve has valuation {0} and does not converge as t -> 0")]
    Unbounded(i32),
    #[error("curve does not reach the stratum: coordinate {index} is {got} at t = 0, stratum gives {expected}")]
    NotOnStratum { index: usize, got: String, expected: String },
    #[error("stratum is not in V: component {index} pulls back to {pulled}")]
    StratumNotInV { index: usize, pulled: String },
    #[error("parameter `{0}` of the stratum is not a curve parameter")]
    Spectator(String),
    #[error("parameter `{0}` is used by both factors")]
    SharedParameter(String),
    #[error("not a witness: every inner product with the stratum tangents vanishes")]
    NotAWitness,
    #[error("q-path is not in Sing g: {0}")]
    NotSingular(String),
    #[error("declared witness fails: {0}")]
    Rejected(String),
}

fn same_vars(a: &Ctx, b: &Ctx) -> bool {
    a.names() == b.names()
}

fn check_target(g: &RealMapGerm, target: &Ctx) -> Result<(), WitnessError> {
    if same_vars(g.ctx(), target) {
        Ok(())
    } else {
        Err(WitnessError::TargetMismatch {
            germ: g.name().to_string(),
            expected: g.ctx().names().join(", "),
            got: target.names().join(", "),
        })
    }
}

fn embed_laurent(l: &LaurentPoly, ctx: &Ctx) -> Result<LaurentPoly, PolyError> {
    LaurentPoly::from_terms(ctx, l.terms().map(|(k, p)| (k, p.clone())))
}

/// Sorted union of parameter names.
fn union_params(a: &Ctx, b: &Ctx) -> Result<Ctx, PolyError> {
    let mut names: Vec<String> = a.names().iter().chain(b.names()).cloned().collect();
    names.sort();
    names.dedup();
    VarContext::new(&names)
}

/// `Σ c_i(t)·∇G_i(γ(t))`.
pub fn normal_vector_along_curve(
    g: &RealMapGerm,
    gamma: &CurveFamily,
    c: &[LaurentPoly],
) -> Result<CurveFamily, WitnessError> {
    check_target(g, gamma.target())?;
    if c.len() != g.target_dim() {
        return Err(WitnessError::CoefficientArity { expected: g.target_dim(), got: c.len() });
    }
    if c.iter().all(LaurentPoly::is_zero) {
        return Err(WitnessError::ZeroCoefficients);
    }
    let params = gamma.params();
    let mut n = vec![LaurentPoly::zero(params); g.source_dim()];
    for (gi, ci) in g.components().iter().zip(c) {
        if ci.is_zero() {
            continue;
        }
        let ci = embed_laurent(ci, params)?;
        for (j, d) in gi.gradient().iter().enumerate() {
            n[j] = n[j].add(&ci.mul(&gamma.compose(d)?));
        }
    }
    CurveFamily::new(gamma.target(), params, n).map_err(|e| match e {
        CurveError::Zero => WitnessError::ZeroVector,
        e => e.into(),
    })
}

pub fn direction_limit(w: &CurveFamily) -> Result<DirectionLimit, WitnessError> {
    leading_vector(w.components()).ok_or(WitnessError::ZeroVector)
}

/// A stratum in `V_G` with its tangent generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StratumParam {
    pub param: Parametrization,
    pub tangents: Vec<Vec<Polynomial>>,
    /// Whether every singular minor also vanishes on the stratum.
    pub in_sing: bool,
}

impl StratumParam {
    pub fn new(g: &RealMapGerm, param: Parametrization) -> Result<Self, WitnessError> {
        check_target(g, param.target())?;
        for (index, comp) in g.components().iter().enumerate() {
            if let PullbackOutcome::Nonzero { pulled, .. } = pullback_vanishes(comp, &param)? {
                return Err(WitnessError::StratumNotInV { index, pulled: pulled.to_string() });
            }
        }
        let mut in_sing = true;
        for m in g.singular_minors() {
            if !param.pullback(&m)?.is_zero() {
                in_sing = false;
                break;
            }
        }
        let tangents = param.tangent_generators();
        Ok(StratumParam { param, tangents, in_sing })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThomWitness {
    pub germ: String,
    pub normal: CurveFamily,
    pub limit: DirectionLimit,
    /// `⟨leading, τ_j⟩` for each tangent generator.
    pub inner_products: Vec<Polynomial>,
    pub is_witness: bool,
    pub stratum_in_sing: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThomWitnessJson {
    pub germ: String,
    pub normal: Vec<String>,
    pub valuation: i32,
    pub limit: Vec<String>,
    pub limit_norm_sq: String,
    pub inner_products: Vec<String>,
    pub is_witness: bool,
    pub stratum_in_sing: bool,
}

impl ThomWitness {
    pub fn to_json(&self) -> ThomWitnessJson {
        ThomWitnessJson {
            germ: self.germ.clone(),
            normal: self.normal.components().iter().map(ToString::to_string).collect(),
            valuation: self.limit.valuation,
            limit: self.limit.leading.iter().map(ToString::to_string).collect(),
            limit_norm_sq: self.limit.norm_sq.to_string(),
            inner_products: self.inner_products.iter().map(ToString::to_string).collect(),
            is_witness: self.is_witness,
            stratum_in_sing: self.stratum_in_sing,
        }
    }

    /// A witness adds `irregularity_witness`; `not_thom_regular` then needs the
    /// stratum's invariance to be declared.
    pub fn record(&self, report: &mut RegularityReport) -> Result<(), Contradiction> {
        if self.is_witness {
            report.verify(Fact::IrregularityWitness, "thom_witness")?;
        }
        Ok(())
    }
}

/// Some component of `G` is not identically zero along `γ`.
fn check_avoids_v(g: &RealMapGerm, gamma: &CurveFamily) -> Result<(), WitnessError> {
    for comp in g.components() {
        if !gamma.compose(comp)?.is_zero() {
            return Ok(());
        }
    }
    Err(WitnessError::CurveInV(g.name().to_string()))
}

fn check_reaches(stratum: &Parametrization, gamma: &CurveFamily) -> Result<(), WitnessError> {
    let params = gamma.params();
    if let Some(v) = stratum.params().names().iter().find(|v| params.index_of(v).is_none()) {
        return Err(WitnessError::Spectator(v.clone()));
    }
    let at0 = gamma.at_zero().ok_or(WitnessError::Unbounded(gamma.min_valuation()))?;
    for (index, ((n, d), g0)) in stratum.coords().iter().zip(&at0).enumerate() {
        let n = n.embed(params)?;
        let d = d.embed(params)?;
        if n != &d * g0 {
            let expected = if d.is_constant() && d.constant_term() == crate::poly::int(1) {
                n.to_string()
            } else {
                format!("({})/({})", n, d)
            };
            return Err(WitnessError::NotOnStratum { index, got: g0.to_string(), expected });
        }
    }
    Ok(())
}

/// Decides whether `(γ, c)` exhibits a limit of normals outside `(T M)^⊥`.
pub fn thom_irregularity_witness(
    g: &RealMapGerm,
    m: &StratumParam,
    gamma: &CurveFamily,
    c: &[LaurentPoly],
) -> Result<ThomWitness, WitnessError> {
    check_target(g, gamma.target())?;
    check_target(g, m.param.target())?;
    check_avoids_v(g, gamma)?;
    check_reaches(&m.param, gamma)?;
    let normal = normal_vector_along_curve(g, gamma, c)?;
    let limit = direction_limit(&normal)?;
    let params = gamma.params();
    let mut inner_products = Vec::with_capacity(m.tangents.len());
    for tau in &m.tangents {
        let tau = tau.iter().map(|p| p.embed(params)).collect::<Result<Vec<_>, _>>()?;
        inner_products.push(dot(&limit.leading, &tau));
    }
    let is_witness = inner_products.iter().any(|p| !p.is_zero());
    Ok(ThomWitness {
        germ: g.name().to_string(),
        normal,
        limit,
        inner_products,
        is_witness,
        stratum_in_sing: m.in_sing,
    })
}

/// Witness data for `f`: stratum, curve and coefficient path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessData {
    pub stratum: Parametrization,
    pub curve: CurveFamily,
    pub coeffs: Vec<LaurentPoly>,
}

#[derive(Debug, Clone)]
pub struct LiftedWitness {
    pub germ: RealMapGerm,
    pub data: WitnessData,
    pub witness: ThomWitness,
}

/// Carries a witness for `f` over to `f + g` along `(γ_p, γ_q)`, with stratum
/// `M × q_path`, and re-verifies it on the sum.
pub fn lift_witness_sum(
    f: &RealMapGerm,
    fw: &WitnessData,
    g: &RealMapGerm,
    q_path: &Parametrization,
    gamma_q: &CurveFamily,
) -> Result<LiftedWitness, WitnessError> {
    let base = thom_irregularity_witness(f, &StratumParam::new(f, fw.stratum.clone())?, &fw.curve, &fw.coeffs)?;
    if !base.is_witness {
        return Err(WitnessError::NotAWitness);
    }
    let sum = separable_sum(f, g, &[], &[])?.germ;

    let q = StratumParam::new(g, q_path.clone())?;
    if !q.in_sing {
        return Err(WitnessError::NotSingular(format!("a minor of `{}` survives on the q-path", g.name())));
    }
    check_target(g, gamma_q.target())?;
    check_avoids_v(g, gamma_q)?;
    check_reaches(q_path, gamma_q)?;

    if let Some(v) = fw.stratum.params().names().iter().find(|v| q_path.params().index_of(v).is_some()) {
        return Err(WitnessError::SharedParameter(v.clone()));
    }
    let sparams = union_params(fw.stratum.params(), q_path.params())?;
    let coords = fw
        .stratum
        .coords()
        .iter()
        .chain(q_path.coords())
        .map(|(n, d)| Ok((n.embed(&sparams)?, d.embed(&sparams)?)))
        .collect::<Result<Vec<_>, PolyError>>()?;
    let stratum = Parametrization::new(sum.ctx(), &sparams, coords)?;

    let cparams = union_params(fw.curve.params(), gamma_q.params())?;
    let comps = fw
        .curve
        .components()
        .iter()
        .chain(gamma_q.components())
        .map(|l| embed_laurent(l, &cparams))
        .collect::<Result<Vec<_>, _>>()?;
    let curve = CurveFamily::new(sum.ctx(), &cparams, comps)?;
    let coeffs = fw.coeffs.iter().map(|l| embed_laurent(l, &cparams)).collect::<Result<Vec<_>, _>>()?;

    let witness = thom_irregularity_witness(&sum, &StratumParam::new(&sum, stratum.clone())?, &curve, &coeffs)?;
    if !witness.is_witness {
        return Err(WitnessError::NotAWitness);
    }
    Ok(LiftedWitness { germ: sum, data: WitnessData { stratum, curve, coeffs }, witness })
}

/// A verified family in `M(G) ∖ V_G` whose limit lies on `V_G ∖ {0}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BWitness {
    pub germ: String,
    pub limit: Vec<Polynomial>,
    pub limit_norm_sq: Polynomial,
}

#[derive(Debug, Clone, Serialize)]
pub struct BWitnessJson {
    pub germ: String,
    pub limit: Vec<String>,
    pub limit_norm_sq: String,
}

impl BWitness {
    pub fn to_json(&self) -> BWitnessJson {
        BWitnessJson {
            germ: self.germ.clone(),
            limit: self.limit.iter().map(ToString::to_string).collect(),
            limit_norm_sq: self.limit_norm_sq.to_string(),
        }
    }

    pub fn record(&self, report: &mut RegularityReport) -> Result<(), Contradiction> {
        report.verify(Fact::NotConditionB, "b_witness")
    }
}

/// Exact check of a declared condition-(b) violation family.
pub fn verify_b_witness(
    g: &RealMapGerm,
    milnor_poly: &Polynomial,
    gamma: &CurveFamily,
) -> Result<BWitness, WitnessError> {
    check_target(g, gamma.target())?;
    let pulled = gamma.compose(milnor_poly)?;
    if !pulled.is_zero() {
        return Err(WitnessError::Rejected(format!("milnor polynomial along the curve is {}", pulled)));
    }
    check_avoids_v(g, gamma)?;
    let limit = gamma.at_zero().ok_or(WitnessError::Unbounded(gamma.min_valuation()))?;
    for (i, comp) in g.components().iter().enumerate() {
        let v = comp.substitute(&limit, gamma.params())?;
        if !v.is_zero() {
            return Err(WitnessError::Rejected(format!("limit is off V: component {} gives {}", i, v)));
        }
    }
    let limit_norm_sq = limit.iter().fold(Polynomial::zero(gamma.params()), |a, c| &a + &(c * c));
    if limit_norm_sq.is_zero() {
        return Err(WitnessError::Rejected("the curve tends to the origin".into()));
    }
    Ok(BWitness { germ: g.name().to_string(), limit, limit_norm_sq })
}

/// Shared settings of the sampled probes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeConfig {
    pub seed: u64,
    pub samples: usize,
    /// Points must have norm at most `r_max`; their limits at least `r_min`.
    pub r_min: f64,
    pub r_max: f64,
    /// Scaled residual accepted as "on the variety".
    pub tolerance: f64,
    /// Distances below this (relative to the point's norm) count as accumulation.
    pub threshold: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            seed: DEFAULT_SEED,
            samples: DEFAULT_SAMPLES,
            r_min: 0.05,
            r_max: 0.5,
            tolerance: 1e-9,
            threshold: 1e-3,
        }
    }
}

/// Outcome of a sampled accumulation search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledProbe {
    pub seed: u64,
    pub samples: usize,
    /// Samples that landed on the variety and passed the radius filters.
    pub accepted: usize,
    /// Smallest relative distance seen, with the point and its nearby target point.
    pub min_relative_distance: Option<f64>,
    pub best_point: Option<Vec<f64>>,
    pub best_target: Option<Vec<f64>>,
    pub violation: bool,
}

impl SampledProbe {
    fn collect(cfg: &ProbeConfig, hits: Vec<Option<(f64, Vec<f64>, Vec<f64>)>>) -> Self {
        let accepted = hits.iter().filter(|h| h.is_some()).count();
        let best = hits
            .into_iter()
            .flatten()
            .min_by(|a, b| a.0.total_cmp(&b.0));
        let violation = best.as_ref().is_some_and(|b| b.0 < cfg.threshold);
        let (d, p, q) = match best {
            Some((d, p, q)) => (Some(d), Some(p), Some(q)),
            None => (None, None, None),
        };
        SampledProbe {
            seed: cfg.seed,
            samples: cfg.samples,
            accepted,
            min_relative_distance: d,
            best_point: p,
            best_target: q,
            violation,
        }
    }
}

const IN_SET: f64 = 1e-10;

/// A parametrization compiled for numeric nearest-point searches.
#[derive(Debug, Clone)]
struct CompiledParam {
    num: Vec<F64Poly>,
    den: Vec<F64Poly>,
    dnum: Vec<Vec<F64Poly>>,
    dden: Vec<Vec<F64Poly>>,
    dim: usize,
}

impl CompiledParam {
    fn new(p: &Parametrization) -> Self {
        let grad = |q: &Polynomial| q.gradient().iter().map(F64Poly::new).collect();
        CompiledParam {
            num: p.coords().iter().map(|(n, _)| F64Poly::new(n)).collect(),
            den: p.coords().iter().map(|(_, d)| F64Poly::new(d)).collect(),
            dnum: p.coords().iter().map(|(n, _)| grad(n)).collect(),
            dden: p.coords().iter().map(|(_, d)| grad(d)).collect(),
            dim: p.dimension(),
        }
    }

    fn point(&self, s: &[f64]) -> Vec<f64> {
        self.num.iter().zip(&self.den).map(|(n, d)| n.eval(s) / d.eval(s)).collect()
    }
}

struct ToPoint<'a> {
    p: &'a CompiledParam,
    y: &'a [f64],
}

impl Residuals for ToPoint<'_> {
    fn residual(&self, s: &[f64]) -> DVector<f64> {
        let x = self.p.point(s);
        DVector::from_iterator(x.len(), x.iter().zip(self.y).map(|(a, b)| a - b))
    }

    fn jacobian(&self, s: &[f64], free: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(self.y.len(), free.len(), |i, j| {
            let (n, d) = (self.p.num[i].eval(s), self.p.den[i].eval(s));
            let k = free[j];
            (self.p.dnum[i][k].eval(s) * d - n * self.p.dden[i][k].eval(s)) / (d * d)
        })
    }
}

/// Closest point found on any of the components, from a few starts each.
fn nearest_on(comps: &[CompiledParam], y: &[f64], rng: &mut RationalSampler) -> Option<(f64, Vec<f64>)> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for c in comps {
        let free: Vec<usize> = (0..c.dim).collect();
        let sys = ToPoint { p: c, y };
        for k in 0..4 {
            let s0 = if k == 0 { vec![0.0; c.dim] } else { rng.point_f64(c.dim, 1.0) };
            let s = if c.dim == 0 { s0 } else { levenberg_marquardt(&sys, &s0, &free, SolveOptions::default()).x };
            let q = c.point(&s);
            let d = distance(y, &q);
            if d.is_finite() && best.as_ref().is_none_or(|b| d < b.0) {
                best = Some((d, q));
            }
            if c.dim == 0 {
                break;
            }
        }
    }
    best
}


/// Searches `M(G) ∖ V_G` for points at norm in `[r_min, r_max]` that sit close
/// to `V_G`. Half the seeds are uniform in the ball, half are small
/// perturbations of points of `V_G`.
///
/// Distances to `V_G` use the declared components `v` when given, and a
/// Gauss–Newton projection onto the components of `G` otherwise.
pub fn condition_b_probe(g: &RealMapGerm, v: &[Parametrization], cfg: &ProbeConfig) -> Result<SampledProbe, WitnessError> {
    for (index, phi) in v.iter().enumerate() {
        check_target(g, phi.target())?;
        for (k, comp) in g.components().iter().enumerate() {
            crate::regularity::expect_vanishes("V", index, &format!("component {}", k), comp, phi)?;
        }
    }
    let compiled: Vec<CompiledParam> = v.iter().map(CompiledParam::new).collect();
    let m_sys = PolySystem::new(g.stacked_minors());
    let v_sys = PolySystem::new(g.components().to_vec());
    let m = g.source_dim();
    let opts = SolveOptions::default();
    let hits = (0..cfg.samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = RationalSampler::derived(cfg.seed, k as u64, 1);
            let mut x0 = rng.point_f64(m, cfg.r_max);
            if k % 2 == 1 {
                let v = gauss_newton_project(&v_sys, &x0, opts).x;
                if norm(&v) < cfg.r_min {
                    return None;
                }
                let eps = 10f64.powf(rng.uniform(-6.0, -4.0));
                let dir = rng.point_f64(m, 1.0);
                let dn = norm(&dir).max(1e-300);
                x0 = v.iter().zip(&dir).map(|(a, b)| a + eps * b / dn).collect();
            }
            let x = if m_sys.polys().is_empty() { x0 } else { gauss_newton_project(&m_sys, &x0, opts).x };
            let r = norm(&x);
            if !(cfg.r_min..=cfg.r_max).contains(&r) || m_sys.scaled_residual(&x) > cfg.tolerance {
                return None;
            }
            let (d, v) = if compiled.is_empty() {
                let v = gauss_newton_project(&v_sys, &x, opts).x;
                if v_sys.scaled_residual(&v) > cfg.tolerance {
                    return None;
                }
                (distance(&x, &v), v)
            } else {
                nearest_on(&compiled, &x, &mut rng)?
            };
            if d < IN_SET {
                return None;
            }
            Some((d / r, x, v))
        })
        .collect();
    Ok(SampledProbe::collect(cfg, hits))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ComponentStatus {
    /// The component lies in `Sing H`, so it does not meet `M(H) ∖ Sing H`.
    InsideSingH,
    /// The image misses `Sing G` generically and satisfies the claimed closure.
    Checked,
    /// The image lies in `Sing G` and is not the origin.
    Violation { image: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompositionExact {
    pub outer: String,
    pub inner: String,
    pub components: Vec<ComponentStatus>,
    /// Canonical text of the verified closure polynomial.
    pub closure: Option<String>,
    /// `closure` restricted to each `Sing G` component, when it is definite.
    pub restricted: Vec<String>,
    pub holds: bool,
}

impl CompositionExact {
    pub fn record(&self, report: &mut RegularityReport) {
        if self.holds {
            let c = self.closure.as_deref().unwrap_or("");
            report.add_check("closure_condition", format!("closure {} meets Sing {} only at 0", c, self.outer));
        } else {
            report.notes.push("the closure condition is not certified".into());
        }
    }
}

/// Checks `closure(F(M(H) ∖ Sing H)) ∩ Sing G ⊆ {0}` for `H = G ∘ F` on declared data.
///
/// `h_comps` parametrize `M(H)`; `closure` is a polynomial in `G`'s variables
/// claimed to vanish on the image; `sing_g` parametrizes `Sing G`. The
/// condition is certified when no component is a violation and the closure
/// polynomial, restricted to each `Sing G` component, is definite.
pub fn composition_condition_exact(
    f: &RealMapGerm,
    g: &RealMapGerm,
    h_comps: &[Parametrization],
    closure: Option<&Polynomial>,
    sing_g: &[Parametrization],
) -> Result<CompositionExact, WitnessError> {
    let h = f.compose_into(g, &format!("{}o{}", g.name(), f.name()))?;
    let h_minors = h.stacked_minors();
    let h_sing = h.singular_minors();
    let g_sing = g.singular_minors();
    let mut components = Vec::with_capacity(h_comps.len());
    for (index, phi) in h_comps.iter().enumerate() {
        check_target(f, phi.target())?;
        for (k, mnr) in h_minors.iter().enumerate() {
            crate::regularity::expect_vanishes("M(H)", index, &format!("stacked minor {}", k), mnr, phi)?;
        }
        let mut inside = true;
        for mnr in &h_sing {
            if !phi.pullback(mnr)?.is_zero() {
                inside = false;
                break;
            }
        }
        if inside {
            components.push(ComponentStatus::InsideSingH);
            continue;
        }
        let psi = phi.push_forward(f, g.ctx())?;
        let mut in_sing_g = true;
        for mnr in &g_sing {
            if !psi.pullback(mnr)?.is_zero() {
                in_sing_g = false;
                break;
            }
        }
        let at_origin = psi.coords().iter().all(|(n, _)| n.is_zero());
        if in_sing_g && !at_origin {
            let image = psi.coords().iter().map(|(n, d)| format!("({})/({})", n, d)).collect();
            components.push(ComponentStatus::Violation { image });
            continue;
        }
        if let Some(c) = closure {
            crate::regularity::expect_vanishes("M(H)", index, "closure polynomial", &c.embed(g.ctx())?, &psi)?;
        }
        components.push(ComponentStatus::Checked);
    }
    let mut restricted = Vec::new();
    let mut definite = closure.is_some();
    if let Some(c) = closure {
        let c = c.embed(g.ctx())?;
        for (index, sigma) in sing_g.iter().enumerate() {
            check_target(g, sigma.target())?;
            for (k, mnr) in g_sing.iter().enumerate() {
                crate::regularity::expect_vanishes("Sing", index, &format!("minor {}", k), mnr, sigma)?;
            }
            let r = sigma.pullback(&c)?;
            definite &= is_definite_by_monomials(&r);
            restricted.push(r.to_string());
        }
        definite &= !sing_g.is_empty();
    }
    let violation = components.iter().any(|c| matches!(c, ComponentStatus::Violation { .. }));
    Ok(CompositionExact {
        outer: g.name().to_string(),
        inner: f.name().to_string(),
        components,
        closure: closure.map(ToString::to_string),
        restricted,
        holds: !violation && definite,
    })
}

/// How one coordinate is seeded in a sampled composition search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Coord {
    Fixed(f64),
    Uniform(f64, f64),
    /// `10^u` with `u` uniform between the logs of the bounds.
    LogUniform(f64, f64),
    /// Starts at the value of another coordinate.
    Copy(usize),
}

/// Seed region for the sampled composition search; `free` coordinates are
/// moved by the solver, the rest stay where they were drawn.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRegion {
    pub coords: Vec<Coord>,
    pub free: Vec<usize>,
}

impl SampleRegion {
    /// The cube `[-r, r]^m`, everything free.
    pub fn cube(m: usize, r: f64) -> Self {
        SampleRegion { coords: vec![Coord::Uniform(-r, r); m], free: (0..m).collect() }
    }

    /// Parses `name=spec` entries separated by `;` or `,`. A spec is a number, `lo:hi`,
    /// `log:lo:hi`, or `free:seed` where `seed` is one of those or another name.
    /// Unlisted variables are uniform in `[-r, r]` and free.
    pub fn parse(src: &str, ctx: &Ctx, r: f64) -> Result<Self, String> {
        let m = ctx.arity();
        let mut coords = vec![None; m];
        let mut free = vec![false; m];
        for entry in src.split([';', ',']).map(str::trim).filter(|e| !e.is_empty()) {
            let (name, spec) = entry.split_once('=').ok_or_else(|| format!("expected `name=spec`, got `{}`", entry))?;
            let i = ctx
                .index_of(name.trim())
                .ok_or_else(|| format!("unknown variable `{}`", name.trim()))?;
            let mut spec = spec.trim();
            if let Some(rest) = spec.strip_prefix("free:") {
                free[i] = true;
                spec = rest.trim();
            }
            coords[i] = Some(parse_coord(spec, ctx)?);
        }
        let listed: Vec<bool> = coords.iter().map(Option::is_some).collect();
        let coords: Vec<Coord> = coords.into_iter().map(|c| c.unwrap_or(Coord::Uniform(-r, r))).collect();
        for (i, c) in coords.iter().enumerate() {
            if let Coord::Copy(j) = c {
                if matches!(coords[*j], Coord::Copy(_)) {
                    return Err(format!("`{}` copies a copied coordinate", ctx.names()[i]));
                }
            }
        }
        let free = (0..m).filter(|&i| free[i] || !listed[i]).collect();
        Ok(SampleRegion { coords, free })
    }

    fn draw(&self, rng: &mut RationalSampler) -> Vec<f64> {
        let mut x: Vec<f64> = self
            .coords
            .iter()
            .map(|c| match *c {
                Coord::Fixed(v) => v,
                Coord::Uniform(lo, hi) => rng.uniform(lo, hi),
                Coord::LogUniform(lo, hi) => 10f64.powf(rng.uniform(lo.log10(), hi.log10())),
                Coord::Copy(_) => 0.0,
            })
            .collect();
        for (i, c) in self.coords.iter().enumerate() {
            if let Coord::Copy(j) = c {
                x[i] = x[*j];
            }
        }
        x
    }
}

fn parse_coord(spec: &str, ctx: &Ctx) -> Result<Coord, String> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("bad number `{}`", s.trim()));
    if let Some(rest) = spec.strip_prefix("log:") {
        let (lo, hi) = rest.split_once(':').ok_or_else(|| format!("expected `log:lo:hi`, got `{}`", spec))?;
        let (lo, hi) = (num(lo)?, num(hi)?);
        if !(lo > 0.0 && hi >= lo) {
            return Err(format!("log range needs 0 < lo <= hi, got `{}`", spec));
        }
        return Ok(Coord::LogUniform(lo, hi));
    }
    if let Some((lo, hi)) = spec.split_once(':') {
        return Ok(Coord::Uniform(num(lo)?, num(hi)?));
    }
    if let Some(j) = ctx.index_of(spec) {
        return Ok(Coord::Copy(j));
    }
    Ok(Coord::Fixed(num(spec)?))
}

/// Samples `M(H) ∖ Sing H` near the origin, maps through `F`, and measures how
/// close the images come to `Sing G` away from the origin. `sing_g`
/// parametrizes `Sing G`; distances are taken to those components.
pub fn composition_condition_sampled(
    f: &RealMapGerm,
    g: &RealMapGerm,
    sing_g: &[Parametrization],
    region: &SampleRegion,
    cfg: &ProbeConfig,
) -> Result<SampledProbe, WitnessError> {
    let h = f.compose_into(g, &format!("{}o{}", g.name(), f.name()))?;
    if region.coords.len() != f.source_dim() {
        return Err(WitnessError::Rejected(format!(
            "sample region has {} coordinates, `{}` has {} variables",
            region.coords.len(),
            f.name(),
            f.source_dim()
        )));
    }
    if sing_g.is_empty() {
        return Err(WitnessError::Rejected("sampled mode needs declared Sing G components".into()));
    }
    let g_minors = g.singular_minors();
    for (index, sigma) in sing_g.iter().enumerate() {
        check_target(g, sigma.target())?;
        for (k, mnr) in g_minors.iter().enumerate() {
            crate::regularity::expect_vanishes("Sing", index, &format!("minor {}", k), mnr, sigma)?;
        }
    }
    let compiled: Vec<CompiledParam> = sing_g.iter().map(CompiledParam::new).collect();
    let m_sys = PolySystem::new(h.stacked_minors());
    let jac_h = GradientRows::new(h.components());
    let opts = SolveOptions::default();
    let hits = (0..cfg.samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = RationalSampler::derived(cfg.seed, k as u64, 1);
            let x0 = region.draw(&mut rng);
            let x = if m_sys.polys().is_empty() {
                x0
            } else {
                levenberg_marquardt(&m_sys, &x0, &region.free, opts).x
            };
            let r = norm(&x);
            if r == 0.0 || r > cfg.r_max || m_sys.scaled_residual(&x) > cfg.tolerance {
                return None;
            }
            if jac_h.conditioning(&x) < cfg.tolerance {
                return None;
            }
            let y = f.eval_f64(&x);
            let ry = norm(&y);
            if ry < cfg.r_min {
                return None;
            }
            let (d, q) = nearest_on(&compiled, &y, &mut rng)?;
            Some((d / ry, y, q))
        })
        .collect();
    Ok(SampledProbe::collect(cfg, hits))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum InclusionVerdict {
    Holds { components: usize },
    Fails { index: usize, pulled: String },
    /// No components were given; nothing is certified.
    NoData,
}

impl InclusionVerdict {
    pub fn record(&self, report: &mut RegularityReport, inner: &str, outer: &str) {
        match self {
            InclusionVerdict::Holds { components } => report.add_check(
                "image_in_milnor",
                format!("{}(M(H)) in M({}) on {} components", inner, outer, components),
            ),
            InclusionVerdict::Fails { index, pulled } => report
                .notes
                .push(format!("image of M(H)-component {} leaves M({}): {}", index, outer, pulled)),
            InclusionVerdict::NoData => report.notes.push("image_in_milnor: no data".into()),
        }
    }
}

/// `F(M(H)) ⊆ M(G)`, checked exactly on each declared `M(H)`-component.
/// Declared `M(G)`-components are verified against `G` as well.
pub fn image_in_milnor_check(
    f: &RealMapGerm,
    g: &RealMapGerm,
    h_comps: &[Parametrization],
    g_comps: &[Parametrization],
) -> Result<InclusionVerdict, WitnessError> {
    let h = f.compose_into(g, &format!("{}o{}", g.name(), f.name()))?;
    let g_minors = g.stacked_minors();
    for (index, sigma) in g_comps.iter().enumerate() {
        check_target(g, sigma.target())?;
        for (k, mnr) in g_minors.iter().enumerate() {
            crate::regularity::expect_vanishes("M(G)", index, &format!("stacked minor {}", k), mnr, sigma)?;
        }
    }
    if h_comps.is_empty() {
        return Ok(InclusionVerdict::NoData);
    }
    let h_minors = h.stacked_minors();
    let milnor_g = g.milnor_polynomial().milnor_poly;
    for (index, phi) in h_comps.iter().enumerate() {
        check_target(f, phi.target())?;
        // A failed inclusion is reported even when the component is not in M(H).
        let psi = phi.push_forward(f, g.ctx())?;
        let pulled = psi.pullback(&milnor_g)?;
        if !pulled.is_zero() {
            return Ok(InclusionVerdict::Fails { index, pulled: pulled.to_string() });
        }
        for (k, mnr) in h_minors.iter().enumerate() {
            crate::regularity::expect_vanishes("M(H)", index, &format!("stacked minor {}", k), mnr, phi)?;
        }
    }
    Ok(InclusionVerdict::Holds { components: h_comps.len() })
}

impl ProbeConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_curve, parse_laurent_tuple, parse_map, parse_parametrization, parse_polynomial};
    use std::time::Instant;

    fn ent1() -> RealMapGerm {
        parse_map("G", &["x", "y", "z"], &["x", "y*(x^2 + y^2) + x*z^2"]).unwrap()
    }

    fn strings(v: &[Polynomial]) -> Vec<String> {
        v.iter().map(ToString::to_string).collect()
    }

    #[test]
    fn ent1_normal_and_witness() {
        let g = ent1();
        let gamma = parse_curve("(t, 0, s)", g.ctx()).unwrap();
        let c = parse_laurent_tuple("(-s^2/t, 1/t)", gamma.params()).unwrap();
        let n = normal_vector_along_curve(&g, &gamma, &c).unwrap();
        let text: Vec<String> = n.components().iter().map(ToString::to_string).collect();
        assert_eq!(text, ["0", "t", "2*s"]);
        let lim = direction_limit(&n).unwrap();
        assert_eq!(lim.valuation, 0);
        assert_eq!(strings(&lim.leading), ["0", "0", "2*s"]);

        let m = StratumParam::new(&g, parse_parametrization("(0, 0, s)", g.ctx()).unwrap()).unwrap();
        assert!(m.in_sing);
        let w = thom_irregularity_witness(&g, &m, &gamma, &c).unwrap();
        assert!(w.is_witness);
        assert_eq!(strings(&w.inner_products), ["2*s"]);
        let mut r = RegularityReport::new("G");
        w.record(&mut r).unwrap();
        r.declare(Fact::WInvariantStratum).unwrap();
        r.derive().unwrap();
        assert!(r.has(Fact::NotThomRegular));
    }

    #[test]
    fn xy_xz_is_not_a_witness() {
        let g = parse_map("G", &["x", "y", "z"], &["x*y", "x*z"]).unwrap();
        let gamma = parse_curve("(s, t, 0)", g.ctx()).unwrap();
        let c = parse_laurent_tuple("(1, 0)", gamma.params()).unwrap();
        let n = normal_vector_along_curve(&g, &gamma, &c).unwrap();
        let text: Vec<String> = n.components().iter().map(ToString::to_string).collect();
        assert_eq!(text, ["t", "s", "0"]);
        let m = StratumParam::new(&g, parse_parametrization("(s, 0, 0)", g.ctx()).unwrap()).unwrap();
        assert!(!m.in_sing);
        let w = thom_irregularity_witness(&g, &m, &gamma, &c).unwrap();
        assert!(!w.is_witness);
        assert_eq!(strings(&w.limit.leading), ["0", "s", "0"]);
        assert!(w.inner_products.iter().all(Polynomial::is_zero));
    }

    #[test]
    fn rejections() {
        let g = ent1();
        let gamma = parse_curve("(0, 0, s + t)", g.ctx()).unwrap();
        let c = parse_laurent_tuple("(1, 1)", gamma.params()).unwrap();
        let m = StratumParam::new(&g, parse_parametrization("(0, 0, s)", g.ctx()).unwrap()).unwrap();
        assert!(matches!(thom_irregularity_witness(&g, &m, &gamma, &c), Err(WitnessError::CurveInV(_))));
        let zero = parse_laurent_tuple("(0, 0)", gamma.params()).unwrap();
        assert_eq!(normal_vector_along_curve(&g, &gamma, &zero).unwrap_err(), WitnessError::ZeroCoefficients);
        let off = parse_curve("(t, 0, s + 1)", g.ctx()).unwrap();
        let c = parse_laurent_tuple("(1, 1)", off.params()).unwrap();
        assert!(matches!(
            thom_irregularity_witness(&g, &m, &off, &c),
            Err(WitnessError::NotOnStratum { index: 2, .. })
        ));
        assert!(matches!(
            StratumParam::new(&g, parse_parametrization("(s, 0, 0)", g.ctx()).unwrap()),
            Err(WitnessError::StratumNotInV { index: 0, .. })
        ));
    }

    #[test]
    fn constant_curve_gives_gradient() {
        let g = ent1();
        let gamma = parse_curve("(1, 2, 3)", g.ctx()).unwrap();
        let c = parse_laurent_tuple("(0, 1)", gamma.params()).unwrap();
        let n = normal_vector_along_curve(&g, &gamma, &c).unwrap();
        let text: Vec<String> = n.components().iter().map(ToString::to_string).collect();
        // ∇G₂ = (2xy + z², x² + 3y², 2xz) at (1,2,3)
        assert_eq!(text, ["13", "13", "6"]);
    }

    #[test]
    fn lift_to_sum() {
        let f = ent1();
        let gamma = parse_curve("(t, 0, s)", f.ctx()).unwrap();
        let fw = WitnessData {
            stratum: parse_parametrization("(0, 0, s)", f.ctx()).unwrap(),
            coeffs: parse_laurent_tuple("(-s^2/t, 1/t)", gamma.params()).unwrap(),
            curve: gamma,
        };
        let g = parse_map("g", &["u", "v"], &["u*(u^2 + v^2)", "v*(u^2 + v^2)"]).unwrap();
        let q = parse_parametrization("(0, 0)", g.ctx()).unwrap();
        let gq = parse_curve("(t, 0)", g.ctx()).unwrap();
        let lifted = lift_witness_sum(&f, &fw, &g, &q, &gq).unwrap();
        assert_eq!(lifted.germ.source_dim(), 5);
        let text: Vec<String> = lifted.witness.normal.components().iter().map(ToString::to_string).collect();
        assert_eq!(text, ["0", "t", "2*s", "-3*s^2*t", "t"]);
        assert_eq!(strings(&lifted.witness.inner_products), ["2*s"]);

        let shared = parse_map("g", &["z", "v"], &["z*(z^2 + v^2)", "v*(z^2 + v^2)"]).unwrap();
        let q2 = parse_parametrization("(0, 0)", shared.ctx()).unwrap();
        let gq2 = parse_curve("(t, 0)", shared.ctx()).unwrap();
        assert!(matches!(
            lift_witness_sum(&f, &fw, &shared, &q2, &gq2),
            Err(WitnessError::Reg(RegError::SharedVariable(_)))
        ));
        let mut bad = fw.clone();
        bad.coeffs = parse_laurent_tuple("(1, 0)", fw.curve.params()).unwrap();
        assert_eq!(lift_witness_sum(&f, &bad, &g, &q, &gq).unwrap_err(), WitnessError::NotAWitness);
    }

    #[test]
    fn mhx1_b_witness() {
        let g = parse_map("G", &["x", "y", "z"], &["x*y", "z^2"]).unwrap();
        let milnor = g.milnor_polynomial().milnor_poly;
        let gamma = parse_curve("(t, s, 0)", g.ctx()).unwrap();
        let w = verify_b_witness(&g, &milnor, &gamma).unwrap();
        assert_eq!(strings(&w.limit), ["0", "s", "0"]);
        let inside = parse_curve("(0, s + t, 0)", g.ctx()).unwrap();
        assert!(verify_b_witness(&g, &milnor, &inside).is_err());
        let off_m = parse_curve("(t, s, t)", g.ctx()).unwrap();
        assert!(matches!(verify_b_witness(&g, &milnor, &off_m), Err(WitnessError::Rejected(_))));

        let probe = condition_b_probe(&g, &[], &ProbeConfig::default()).unwrap();
        assert!(probe.violation, "{:?}", probe);
        let v = [
            parse_parametrization("(0, s, 0)", g.ctx()).unwrap(),
            parse_parametrization("(s, 0, 0)", g.ctx()).unwrap(),
        ];
        assert!(condition_b_probe(&g, &v, &ProbeConfig::default()).unwrap().violation);
    }

    #[test]
    fn exaa_probe_finds_nothing() {
        let g = parse_map("G", &["x", "y", "z"], &["x*y", "x*z"]).unwrap();
        let probe = condition_b_probe(&g, &[], &ProbeConfig::default()).unwrap();
        assert!(!probe.violation, "{:?}", probe);
        assert!(probe.accepted > 0);
        assert_eq!(probe, condition_b_probe(&g, &[], &ProbeConfig::default()).unwrap());
        let v = [
            parse_parametrization("(0, a, b)", g.ctx()).unwrap(),
            parse_parametrization("(s, 0, 0)", g.ctx()).unwrap(),
        ];
        assert!(!condition_b_probe(&g, &v, &ProbeConfig::default()).unwrap().violation);
    }

    #[test]
    fn composition_exact_circle() {
        let f = parse_map("F", &["x", "y", "z", "w"], &["x", "y", "z*(x^2 + y^2 + z^2 + w^2)"]).unwrap();
        let g = parse_map("G", &["u", "v", "t"], &["u*t", "v*t"]).unwrap();
        let comps = [
            parse_parametrization("(a, b, 0, c)", f.ctx()).unwrap(),
            parse_parametrization("(r*(1 - s^2)/(1 + s^2), 2*r*s/(1 + s^2), r, 0)", f.ctx()).unwrap(),
        ];
        let closure = parse_polynomial("t^2 - 4*(u^2 + v^2)^3", g.ctx()).unwrap();
        let sing = [parse_parametrization("(a, b, 0)", g.ctx()).unwrap()];
        let out = composition_condition_exact(&f, &g, &comps, Some(&closure), &sing).unwrap();
        assert_eq!(out.components, [ComponentStatus::InsideSingH, ComponentStatus::Checked]);
        assert!(out.holds, "{:?}", out);
        let wrong = parse_polynomial("t - 2*(u^2 + v^2)", g.ctx()).unwrap();
        assert!(composition_condition_exact(&f, &g, &comps, Some(&wrong), &sing).is_err());
        let g2 = parse_map("G", &["u", "v"], &["u", "v"]).unwrap();
        assert!(matches!(
            composition_condition_exact(&f, &g2, &comps, None, &[]),
            Err(WitnessError::Germ(GermError::CompositionArity { .. }))
        ));
    }

    #[test]
    fn inclusion() {
        let f = parse_map("F", &["x", "y", "z", "w"], &["x*w", "y*w", "z*w"]).unwrap();
        let g = parse_map("G", &["u", "v", "t"], &["u", "v*(u^2 + v^2)"]).unwrap();
        let comps = [
            parse_parametrization("(a, b, c, 0)", f.ctx()).unwrap(),
            parse_parametrization("(0, 0, a, b)", f.ctx()).unwrap(),
            parse_parametrization("(r*(1 - s^2)/(1 + s^2), 2*r*s/(1 + s^2), 0, r)", f.ctx()).unwrap(),
        ];
        assert_eq!(
            image_in_milnor_check(&f, &g, &comps, &[]).unwrap(),
            InclusionVerdict::Holds { components: 3 }
        );
        let g2 = parse_map("G", &["u", "v", "t"], &["u", "v"]).unwrap();
        assert!(matches!(
            image_in_milnor_check(&f, &g2, &comps, &[]).unwrap(),
            InclusionVerdict::Fails { index: 1, .. }
        ));
        assert_eq!(image_in_milnor_check(&f, &g, &[], &[]).unwrap(), InclusionVerdict::NoData);
    }

    #[test]
    fn contraexamplo_sampled() {
        let f = parse_map("F", &["x", "y", "z", "w"], &["x", "y", "z*(x^2 + y^4 + z^6)"]).unwrap();
        let g = parse_map("G", &["u", "v", "t"], &["u*v", "v*t"]).unwrap();
        let region = SampleRegion::parse("x=free:z; y=log:1e-6:1e-4; z=0.05:0.3; w=0", f.ctx(), 0.5).unwrap();
        assert_eq!(region.free, [0]);
        let start = Instant::now();
        let sing = [parse_parametrization("(a, 0, b)", g.ctx()).unwrap()];
        let probe = composition_condition_sampled(&f, &g, &sing, &region, &ProbeConfig::default()).unwrap();
        assert!(start.elapsed().as_secs() < 30);
        assert!(probe.violation, "{:?}", probe);
    }
}
