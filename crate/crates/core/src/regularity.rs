//! Exact regularity checks and the constructors that produce HWC germs.

use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::facts::Fact;
use crate::germ::{pullback_vanishes, GermError, Parametrization, PullbackOutcome, RealMapGerm};
use crate::matrix::{combinations, dot, PolyMatrix};
use crate::mixed::{formal_conj, ComplexPoly, MixedError, MixedFunction};
use crate::poly::{int, rat, PolyError, Polynomial, Rational, VarContext};
use crate::report::{Contradiction, RegularityReport};
use crate::sample::RationalSampler;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Germ(#[from] GermError),
    #[error(transparent)]
    Mixed(#[from] MixedError),
    #[error(transparent)]
    Contradiction(#[from] Contradiction),
    #[error("variables are not separable: `{0}` occurs in both germs")]
    SharedVariable(String),
    #[error("target dimensions differ: {0} vs {1}")]
    TargetMismatch(usize, usize),
    #[error("`{0}` is not holomorphic")]
    NotHolomorphic(String),
    #[error("pair ({pair}) is not horizontally weakly conformal: {}", .residuals.join("; "))]
    PairNotHwc { pair: &'static str, residuals: Vec<String> },
    #[error("product pair needs an even number of variables, got {0}")]
    OddDimension(usize),
    #[error("partition violated: {0}")]
    Partition(String),
    #[error("declared {set}-component {index} fails verification: {what} pulls back to {pulled}")]
    ComponentCheck { set: &'static str, index: usize, what: String, pulled: String },
    #[error("constructed germ failed its own HWC check: {0}")]
    ConstructionFailed(String),
}

/// A named nonzero polynomial that blocks a condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Residual {
    pub label: String,
    pub poly: Polynomial,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HwcCertificate {
    pub germ: String,
    pub holds: bool,
    /// `‖∇G_1‖²`; the common squared length when `holds`.
    pub lambda: Polynomial,
    pub residuals: Vec<Residual>,
    /// `Σ_j ∂f/∂z_j · ∂f/∂z̄_j` in formal variables, for mixed inputs.
    pub pairing: Option<ComplexPoly>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HwcJson {
    pub germ: String,
    pub holds: bool,
    pub lambda: Option<String>,
    pub residuals: Vec<(String, String)>,
    pub pairing: Option<String>,
}

impl HwcCertificate {
    pub fn to_json(&self) -> HwcJson {
        HwcJson {
            germ: self.germ.clone(),
            holds: self.holds,
            lambda: self.holds.then(|| self.lambda.to_string()),
            residuals: self.residuals.iter().map(|r| (r.label.clone(), r.poly.to_string())).collect(),
            pairing: self.pairing.as_ref().map(ToString::to_string),
        }
    }

    /// Adds `hwc` (and the residuals, when it fails) to `report`.
    pub fn record(&self, report: &mut RegularityReport, check: &str) -> Result<(), Contradiction> {
        if self.holds {
            report.verify(Fact::Hwc, check)?;
        } else {
            for r in &self.residuals {
                report.residuals.insert(r.label.clone(), r.poly.to_string());
            }
        }
        Ok(())
    }
}

/// `⟨∇G_i,∇G_j⟩ = 0` for `i ≠ j` and `‖∇G_i‖² = ‖∇G_1‖²`, exactly.
pub fn hwc_check(g: &RealMapGerm) -> HwcCertificate {
    let grads: Vec<Vec<Polynomial>> = g.components().iter().map(Polynomial::gradient).collect();
    let lambda = dot(&grads[0], &grads[0]);
    let mut residuals = Vec::new();
    for i in 0..grads.len() {
        for j in i + 1..grads.len() {
            let ip = dot(&grads[i], &grads[j]);
            if !ip.is_zero() {
                residuals.push(Residual { label: format!("<dG{},dG{}>", i + 1, j + 1), poly: ip });
            }
        }
        if i > 0 {
            let d = &dot(&grads[i], &grads[i]) - &lambda;
            if !d.is_zero() {
                residuals.push(Residual { label: format!("|dG{}|^2 - |dG1|^2", i + 1), poly: d });
            }
        }
    }
    HwcCertificate { germ: g.name().to_string(), holds: residuals.is_empty(), lambda, residuals, pairing: None }
}

/// `J·Jᵀ − λ·I`, entry by entry; all zero iff the germ is HWC with factor `λ`.
pub fn conformal_defect(g: &RealMapGerm, lambda: &Polynomial) -> PolyMatrix {
    let gram = g.jacobian().gram();
    let p = gram.rows();
    let mut entries = Vec::with_capacity(p * p);
    for i in 0..p {
        for j in 0..p {
            let e = gram.get(i, j).clone();
            entries.push(if i == j { &e - lambda } else { e });
        }
    }
    PolyMatrix::new(p, p, entries).expect("square")
}

/// Wirtinger route: HWC iff `Σ_j ∂f/∂z_j · ∂f/∂z̄_j = 0`; then `λ = Σ_j |∂f/∂z_j|² + |∂f/∂z̄_j|²`.
pub fn hwc_check_mixed(f: &MixedFunction) -> HwcCertificate {
    let real = f.real_ctx().clone();
    let mut pairing_real = ComplexPoly::zero(&real);
    let mut lambda = Polynomial::zero(&real);
    for j in 0..f.n() {
        pairing_real = pairing_real.add(&f.dz[j].mul(&f.dzbar[j]));
        lambda = &(&lambda + &f.dz[j].norm_sq()) + &f.dzbar[j].norm_sq();
    }
    let pairing = (0..f.n()).fold(ComplexPoly::zero(f.formal().ctx()), |acc, j| {
        acc.add(&f.dz_formal(j).mul(&f.dzbar_formal(j)))
    });
    let mut residuals = Vec::new();
    if !pairing_real.re.is_zero() {
        residuals.push(Residual { label: "Re sum dz*dzbar".into(), poly: pairing_real.re.clone() });
    }
    if !pairing_real.im.is_zero() {
        residuals.push(Residual { label: "Im sum dz*dzbar".into(), poly: pairing_real.im.clone() });
    }
    HwcCertificate {
        germ: f.name().to_string(),
        holds: residuals.is_empty(),
        lambda,
        residuals,
        pairing: Some(pairing),
    }
}

#[derive(Debug, Clone)]
pub struct FgbarOutcome {
    /// `Σ_j ∂f/∂z_j · conj(∂g/∂z_j)` in formal variables.
    pub pairing: ComplexPoly,
    pub product: MixedFunction,
    /// Direct check of `f·ḡ`.
    pub direct: HwcCertificate,
}

impl FgbarOutcome {
    pub fn holds(&self) -> bool {
        self.pairing.is_zero()
    }
}

/// `f·ḡ` for holomorphic `f`, `g`: HWC iff the gradient pairing vanishes.
pub fn fgbar_check(f: &MixedFunction, g: &MixedFunction) -> Result<FgbarOutcome, RegError> {
    for h in [f, g] {
        if !h.is_holomorphic() {
            return Err(RegError::NotHolomorphic(h.name().to_string()));
        }
    }
    if f.vars() != g.vars() {
        return Err(PolyError::ContextMismatch {
            left: f.vars().join(","),
            right: g.vars().join(","),
        }
        .into());
    }
    let ctx = f.formal().ctx().clone();
    let pairing = (0..f.n()).fold(ComplexPoly::zero(&ctx), |acc, j| {
        acc.add(&f.dz_formal(j).mul(&formal_conj(&g.dz_formal(j).embed(&ctx).expect("same vars"))))
    });
    let product = f.times_conj(g, &format!("{}*conj({})", f.name(), g.name()))?;
    let direct = hwc_check_mixed(&product);
    Ok(FgbarOutcome { pairing, product, direct })
}

#[derive(Debug, Clone)]
pub struct SumOutcome {
    pub germ: RealMapGerm,
    pub hwc: HwcCertificate,
    pub report: RegularityReport,
}

/// `G = f + g` over the disjoint union of the variables.
///
/// `hwc` is re-verified on the sum. Classical Thom regularity is carried over
/// only through the separable-sum rule, from the facts given for `f` and `g`.
pub fn separable_sum(
    f: &RealMapGerm,
    g: &RealMapGerm,
    f_facts: &[Fact],
    g_facts: &[Fact],
) -> Result<SumOutcome, RegError> {
    if let Some(v) = f.ctx().names().iter().find(|v| g.ctx().index_of(v).is_some()) {
        return Err(RegError::SharedVariable(v.clone()));
    }
    if f.target_dim() != g.target_dim() {
        return Err(RegError::TargetMismatch(f.target_dim(), g.target_dim()));
    }
    let mut names = f.ctx().names().to_vec();
    names.extend(g.ctx().names().iter().cloned());
    let ctx = VarContext::new(&names)?;
    let comps = f
        .components()
        .iter()
        .zip(g.components())
        .map(|(a, b)| Ok(&a.embed(&ctx)? + &b.embed(&ctx)?))
        .collect::<Result<Vec<_>, PolyError>>()?;
    let name = format!("{}+{}", f.name(), g.name());
    let germ = RealMapGerm::new(&name, &ctx, comps)?;
    let hwc = hwc_check(&germ);
    let mut report = RegularityReport::new(&name);
    hwc.record(&mut report, "hwc_check")?;
    report.add_check("separable", format!("{} and {} share no variables", f.name(), g.name()));
    report.add_role("f", f.name(), f_facts.iter().copied());
    report.add_role("g", g.name(), g_facts.iter().copied());
    report.derive()?;
    Ok(SumOutcome { germ, hwc, report })
}

#[derive(Debug, Clone)]
pub enum ProductOutcome {
    Built { germ: RealMapGerm, hwc: HwcCertificate },
    /// One of the two bilinear conditions is a nonzero polynomial.
    Rejected { residuals: Vec<Residual> },
}

/// `(G₁G₃ − G₂G₄, G₁G₄ + G₂G₃)` from two HWC pairs satisfying the bilinear conditions.
pub fn product_pair(name: &str, g: [&Polynomial; 4]) -> Result<ProductOutcome, RegError> {
    let ctx = g[0].ctx().clone();
    if ctx.arity() % 2 == 1 {
        return Err(RegError::OddDimension(ctx.arity()));
    }
    let g: Vec<Polynomial> = g.iter().map(|p| p.embed(&ctx)).collect::<Result<_, _>>()?;
    for (pair, a, b) in [("G1,G2", 0, 1), ("G3,G4", 2, 3)] {
        let cert = hwc_check(&RealMapGerm::new(pair, &ctx, vec![g[a].clone(), g[b].clone()])?);
        if !cert.holds {
            return Err(RegError::PairNotHwc {
                pair,
                residuals: cert.residuals.iter().map(|r| format!("{} = {}", r.label, r.poly)).collect(),
            });
        }
    }
    let d: Vec<Vec<Polynomial>> = g.iter().map(Polynomial::gradient).collect();
    let c1 = &dot(&d[0], &d[2]) - &dot(&d[1], &d[3]);
    let c2 = &dot(&d[0], &d[3]) + &dot(&d[1], &d[2]);
    let mut residuals = Vec::new();
    if !c1.is_zero() {
        residuals.push(Residual { label: "<dG1,dG3> - <dG2,dG4>".into(), poly: c1 });
    }
    if !c2.is_zero() {
        residuals.push(Residual { label: "<dG1,dG4> + <dG2,dG3>".into(), poly: c2 });
    }
    if !residuals.is_empty() {
        return Ok(ProductOutcome::Rejected { residuals });
    }
    let h1 = &(&g[0] * &g[2]) - &(&g[1] * &g[3]);
    let h2 = &(&g[0] * &g[3]) + &(&g[1] * &g[2]);
    let germ = RealMapGerm::new(name, &ctx, vec![h1, h2])?;
    let hwc = hwc_check(&germ);
    if !hwc.holds {
        return Err(RegError::ConstructionFailed(name.to_string()));
    }
    Ok(ProductOutcome::Built { germ, hwc })
}

/// Holomorphic building blocks over a common set of complex variables.
#[derive(Debug, Clone, Default)]
pub struct AlgorithmBlocks {
    /// `(f_α, g_α)`, contributing `f_α·ḡ_α`.
    pub products: Vec<(MixedFunction, MixedFunction)>,
    /// `r_β`, contributing `r_β`.
    pub holomorphic: Vec<MixedFunction>,
    /// `h_γ`, contributing `h̄_γ`.
    pub conjugated: Vec<MixedFunction>,
}

/// `f = Σ f_α ḡ_α + Σ r_β + Σ h̄_γ` with `f_α, r_β` in the variables of `block`
/// (0-based indices) and `g_α, h_γ` in the complement.
pub fn mixed_algorithm_build(
    name: &str,
    block: &[usize],
    blocks: &AlgorithmBlocks,
) -> Result<(MixedFunction, HwcCertificate), RegError> {
    let first = blocks
        .products
        .first()
        .map(|(f, _)| f)
        .or(blocks.holomorphic.first())
        .or(blocks.conjugated.first())
        .ok_or_else(|| RegError::Partition("no blocks given".into()))?;
    let vars = first.vars().to_vec();
    let ctx = first.formal().ctx().clone();
    let inside = |h: &MixedFunction, want_inside: bool| -> Result<(), RegError> {
        if h.vars() != vars.as_slice() {
            return Err(RegError::Partition(format!("`{}` uses a different variable list", h.name())));
        }
        if !h.is_holomorphic() {
            return Err(RegError::NotHolomorphic(h.name().to_string()));
        }
        for j in h.support() {
            if block.contains(&j) != want_inside {
                let side = if want_inside { "outside" } else { "inside" };
                return Err(RegError::Partition(format!(
                    "`{}` depends on `{}`, which is {} the block",
                    h.name(),
                    vars[j],
                    side
                )));
            }
        }
        Ok(())
    };
    let mut total = ComplexPoly::zero(&ctx);
    for (f, g) in &blocks.products {
        inside(f, true)?;
        inside(g, false)?;
        total = total.add(&f.formal().mul(&formal_conj(g.formal())));
    }
    for r in &blocks.holomorphic {
        inside(r, true)?;
        total = total.add(r.formal());
    }
    for h in &blocks.conjugated {
        inside(h, false)?;
        total = total.add(&formal_conj(h.formal()));
    }
    let f = MixedFunction::from_formal(name, &vars, total)?;
    let cert = hwc_check_mixed(&f);
    if !cert.holds {
        return Err(RegError::ConstructionFailed(name.to_string()));
    }
    Ok((f, cert))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InteriorVerdict {
    /// No top-dimensional M-component lies inside V.
    Fires { v_dimension: usize },
    /// M-component `index` is annihilated by every component of G.
    Inconclusive { index: usize },
}

/// Decides the empty-interior test on declared components after verifying them.
pub fn empty_interior_criterion(
    g: &RealMapGerm,
    milnor_poly: &Polynomial,
    v: &[Parametrization],
    m: &[Parametrization],
) -> Result<InteriorVerdict, RegError> {
    if v.is_empty() || m.is_empty() {
        return Err(RegError::Partition("both V and M components must be declared".into()));
    }
    for (index, phi) in v.iter().enumerate() {
        for (k, c) in g.components().iter().enumerate() {
            expect_vanishes("V", index, &format!("G{}", k + 1), c, phi)?;
        }
        expect_vanishes("V", index, "milnor_poly", milnor_poly, phi)?;
    }
    for (index, phi) in m.iter().enumerate() {
        expect_vanishes("M", index, "milnor_poly", milnor_poly, phi)?;
    }
    let v_dim = v.iter().map(Parametrization::dimension).max().unwrap_or(0);
    for (index, phi) in m.iter().enumerate() {
        if phi.dimension() < v_dim {
            continue;
        }
        let mut inside_v = true;
        for c in g.components() {
            if !phi.pullback(c)?.is_zero() {
                inside_v = false;
                break;
            }
        }
        if inside_v {
            return Ok(InteriorVerdict::Inconclusive { index });
        }
    }
    Ok(InteriorVerdict::Fires { v_dimension: v_dim })
}

/// Fails with the pullback when `p` does not vanish on `phi`.
pub fn expect_vanishes(
    set: &'static str,
    index: usize,
    what: &str,
    p: &Polynomial,
    phi: &Parametrization,
) -> Result<(), RegError> {
    match pullback_vanishes(p, phi)? {
        PullbackOutcome::Vanishes => Ok(()),
        PullbackOutcome::Nonzero { pulled, .. } => Err(RegError::ComponentCheck {
            set,
            index,
            what: what.to_string(),
            pulled: pulled.to_string(),
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IsolatedProbe {
    /// A nonzero point of `Sing G ∩ V_G`.
    Witness { point: Vec<Rational> },
    /// Minor `index` is a nonzero constant, so `Sing G` is empty.
    SingularSetEmpty { index: usize },
    NoWitnessAtScale { points_checked: usize },
}

const GRID: [(i64, i64); 7] = [(-2, 1), (-1, 1), (-1, 2), (0, 1), (1, 2), (1, 1), (2, 1)];
const FULL_GRID_LIMIT: usize = 5000;

/// Searches for nonzero rational points in `Sing G ∩ V_G`.
///
/// Checks declared V-components first, then a grid (all of it for small `m`,
/// points with at most two nonzero coordinates otherwise), then `samples`
/// seeded random points.
pub fn isolated_singularity_probe(
    g: &RealMapGerm,
    v: &[Parametrization],
    seed: u64,
    samples: usize,
) -> Result<IsolatedProbe, RegError> {
    let minors = g.singular_minors();
    if let Some(index) = minors.iter().position(|p| p.is_constant() && !p.is_zero()) {
        return Ok(IsolatedProbe::SingularSetEmpty { index });
    }
    for phi in v {
        if phi.dimension() == 0 {
            continue;
        }
        let mut all = true;
        for p in g.components().iter().chain(&minors) {
            if !phi.pullback(p)?.is_zero() {
                all = false;
                break;
            }
        }
        if all {
            let norm = crate::germ::euclidean_rho(phi.target());
            let pulled = phi.pullback(&norm)?;
            if let Some((s, _)) = crate::sample::find_nonzero_point(&pulled, seed, |s| phi.admissible(s)) {
                let point = phi.evaluate(&s).expect("admissible");
                return Ok(IsolatedProbe::Witness { point });
            }
        }
    }
    let m = g.source_dim();
    let grid: Vec<Rational> = GRID.iter().map(|&(a, b)| rat(a, b)).collect();
    let in_sing_v = |pt: &[Rational]| -> bool {
        g.components().iter().chain(&minors).all(|p| p.evaluate(pt).is_ok_and(|v| v.is_zero()))
    };
    let mut checked = 0;
    let mut check = |pt: Vec<Rational>| -> Option<Vec<Rational>> {
        if pt.iter().all(Zero::is_zero) {
            return None;
        }
        checked += 1;
        in_sing_v(&pt).then_some(pt)
    };
    if 7usize.checked_pow(m as u32).is_some_and(|n| n <= FULL_GRID_LIMIT) {
        let mut idx = vec![0usize; m];
        loop {
            if let Some(point) = check(idx.iter().map(|&i| grid[i].clone()).collect()) {
                return Ok(IsolatedProbe::Witness { point });
            }
            let mut k = 0;
            while k < m {
                idx[k] += 1;
                if idx[k] < grid.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == m {
                break;
            }
        }
    } else {
        for support in (1..=2).flat_map(|k| combinations(m, k)) {
            let nonzero: Vec<&Rational> = grid.iter().filter(|r| !r.is_zero()).collect();
            let mut idx = vec![0usize; support.len()];
            loop {
                let mut pt = vec![int(0); m];
                for (slot, &var) in support.iter().enumerate() {
                    pt[var] = nonzero[idx[slot]].clone();
                }
                if let Some(point) = check(pt) {
                    return Ok(IsolatedProbe::Witness { point });
                }
                let mut k = 0;
                while k < idx.len() {
                    idx[k] += 1;
                    if idx[k] < nonzero.len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == idx.len() {
                    break;
                }
            }
        }
    }
    let mut sampler = RationalSampler::new(seed, 2);
    for _ in 0..samples {
        if let Some(point) = check(sampler.point(m)) {
            return Ok(IsolatedProbe::Witness { point });
        }
    }
    Ok(IsolatedProbe::NoWitnessAtScale { points_checked: checked })
}

/// Whether a polynomial provably vanishes only at the origin: every monomial has
/// even exponents, all coefficients share one sign, and each variable appears
/// alone in some pure power.
pub fn is_definite_by_monomials(p: &Polynomial) -> bool {
    if p.is_zero() {
        return false;
    }
    let m = p.ctx().arity();
    let mut sign = None;
    let mut pure = vec![false; m];
    for (mono, c) in p.terms() {
        let e = mono.exponents();
        if e.iter().any(|k| k % 2 == 1) {
            return false;
        }
        let s = c.is_positive();
        if *sign.get_or_insert(s) != s {
            return false;
        }
        let nz: Vec<usize> = (0..m).filter(|&i| e[i] > 0).collect();
        if nz.len() == 1 {
            pure[nz[0]] = true;
        }
        if nz.is_empty() {
            return false;
        }
    }
    pure.iter().all(|&b| b)
}
