//! The shipped example corpus. Each entry is `<id>.germ` (DSL) next to
//! `<id>.json` (expectations). Entries run in parallel; results come back sorted by id.

use std::cell::OnceCell;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{parse_curve, parse_document, parse_mixed_function, parse_parametrization, parse_polynomial, Document, GermDecl};
use crate::facts::Fact;
use crate::germ::{pullback_vanishes, Parametrization};
use crate::mixed::{wirtinger_gradients, ComplexPoly, MixedFunction};
use crate::pipeline::{certify, Certification, RunConfig};
use crate::poly::Polynomial;
use crate::regularity::{
    fgbar_check, hwc_check, hwc_check_mixed, mixed_algorithm_build, product_pair, separable_sum, AlgorithmBlocks,
    ProductOutcome,
};
use crate::witness::{
    composition_condition_exact, composition_condition_sampled, condition_b_probe, direction_limit,
    image_in_milnor_check, lift_witness_sum, normal_vector_along_curve, thom_irregularity_witness, verify_b_witness,
    InclusionVerdict, SampleRegion, StratumParam, WitnessData,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Paper,
    Derived,
    Trivial,
}

/// Which polynomials a declared set must annihilate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Components,
    Milnor,
    Minors,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum Check {
    Jacobian { germ: String, expected: Vec<Vec<String>> },
    MilnorPoly { germ: String, expected: String },
    /// `det(A·Aᵀ) = det(A)²` in the square case.
    SquareIdentity { germ: String },
    SquareDet { germ: String, expected: String },
    SingMinors { germ: String, expected: Vec<String> },
    SetVanishes { germ: String, set: String, of: Target },
    Hwc {
        germ: String,
        holds: bool,
        #[serde(default)]
        lambda: Option<String>,
    },
    HwcRoutes { germ: String },
    Wirtinger { germ: String, dz: Vec<String>, dzbar: Vec<String> },
    Facts {
        of: String,
        #[serde(default)]
        includes: Vec<String>,
        #[serde(default)]
        absent: Vec<String>,
    },
    Witness { name: String, normal: Vec<String>, limit: Vec<String>, inner_products: Vec<String>, is_witness: bool },
    Bwitness { name: String, limit: Vec<String> },
    ProbeB {
        germ: String,
        violation: bool,
        #[serde(default)]
        use_v: bool,
    },
    ComposeExact { compose: String, holds: bool },
    ImageInMilnor { compose: String, verdict: String },
    ComposeSampled { compose: String, region: String, violation: bool },
    ProductPair { germ: String, succeeds: bool },
    SeparableSum { f: String, g: String, equals: String, hwc: bool },
    Fgbar { f: String, g: String, holds: bool },
    MixedAlgorithm {
        vars: Vec<String>,
        /// 1-based indices of the holomorphic block.
        block: Vec<usize>,
        #[serde(default)]
        products: Vec<[String; 2]>,
        #[serde(default)]
        holomorphic: Vec<String>,
        #[serde(default)]
        conjugated: Vec<String>,
        equals: String,
    },
    LiftWitness { witness: String, g: String, q_path: String, gamma_q: String, normal: Vec<String>, inner_products: Vec<String> },
}

impl Check {
    pub fn kind(&self) -> &'static str {
        match self {
            Check::Jacobian { .. } => "jacobian",
            Check::MilnorPoly { .. } => "milnor_poly",
            Check::SquareIdentity { .. } => "square_identity",
            Check::SquareDet { .. } => "square_det",
            Check::SingMinors { .. } => "sing_minors",
            Check::SetVanishes { .. } => "set_vanishes",
            Check::Hwc { .. } => "hwc",
            Check::HwcRoutes { .. } => "hwc_routes",
            Check::Wirtinger { .. } => "wirtinger",
            Check::Facts { .. } => "facts",
            Check::Witness { .. } => "witness",
            Check::Bwitness { .. } => "bwitness",
            Check::ProbeB { .. } => "probe_b",
            Check::ComposeExact { .. } => "compose_exact",
            Check::ImageInMilnor { .. } => "image_in_milnor",
            Check::ComposeSampled { .. } => "compose_sampled",
            Check::ProductPair { .. } => "product_pair",
            Check::SeparableSum { .. } => "separable_sum",
            Check::Fgbar { .. } => "fgbar",
            Check::MixedAlgorithm { .. } => "mixed_algorithm",
            Check::LiftWitness { .. } => "lift_witness",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct Expectation {
    #[serde(flatten)]
    pub check: Check,
    pub source: Provenance,
    #[serde(default)]
    pub anchor: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectationFile {
    pub id: String,
    #[serde(default)]
    pub description: String,
    pub expectations: Vec<Expectation>,
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub id: String,
    pub description: String,
    pub source: String,
    pub expectations: Vec<Expectation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("corpus entry `{id}`: {message}")]
pub struct CorpusError {
    pub id: String,
    pub message: String,
}

fn entry_err(id: &str, message: impl Into<String>) -> CorpusError {
    CorpusError { id: id.to_string(), message: message.into() }
}

/// Ids of all entries in `dir` (files with a `.json` expectation file), sorted.
pub fn entry_ids(dir: &Path) -> Result<Vec<String>, CorpusError> {
    let read = fs::read_dir(dir).map_err(|e| entry_err("*", format!("cannot read {}: {}", dir.display(), e)))?;
    let mut ids: Vec<String> = read
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .filter_map(|p| p.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .collect();
    ids.sort();
    Ok(ids)
}

pub fn load_entry(dir: &Path, id: &str) -> Result<CorpusEntry, CorpusError> {
    let json_path = dir.join(format!("{}.json", id));
    let germ_path = dir.join(format!("{}.germ", id));
    let text = fs::read_to_string(&json_path).map_err(|e| entry_err(id, format!("cannot read {}: {}", json_path.display(), e)))?;
    let file: ExpectationFile =
        serde_json::from_str(&text).map_err(|e| entry_err(id, format!("invalid expectation file: {}", e)))?;
    if file.id != id {
        return Err(entry_err(id, format!("expectation file declares id `{}`", file.id)));
    }
    if file.expectations.is_empty() {
        return Err(entry_err(id, "no expectations"));
    }
    for (k, e) in file.expectations.iter().enumerate() {
        if e.source == Provenance::Paper && e.anchor.as_deref().is_none_or(str::is_empty) {
            return Err(entry_err(id, format!("expectation {} ({}) is tagged paper but has no anchor", k, e.check.kind())));
        }
    }
    let source = fs::read_to_string(&germ_path).map_err(|e| entry_err(id, format!("cannot read {}: {}", germ_path.display(), e)))?;
    Ok(CorpusEntry { id: id.to_string(), description: file.description, source, expectations: file.expectations })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub check: &'static str,
    pub source: Provenance,
    pub anchor: Option<String>,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryResult {
    pub id: String,
    pub description: String,
    /// Set when the entry could not be loaded or parsed; no checks ran.
    pub error: Option<CorpusError>,
    pub checks: Vec<CheckResult>,
}

impl EntryResult {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusReport {
    pub schema_version: u32,
    pub config: RunConfig,
    pub filter: Option<String>,
    pub entries: Vec<EntryResult>,
}

impl CorpusReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(EntryResult::passed)
    }

    /// One line per expectation, then a summary line.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let mut pass = 0;
        let mut total = 0;
        for e in &self.entries {
            if let Some(err) = &e.error {
                total += 1;
                out.push_str(&format!("FAIL {:<14} {}\n", e.id, err.message));
                continue;
            }
            for c in &e.checks {
                total += 1;
                if c.passed {
                    pass += 1;
                }
                let tag = match (&c.source, &c.anchor) {
                    (Provenance::Paper, Some(a)) => format!("paper:{}", a),
                    (p, _) => format!("{:?}", p).to_lowercase(),
                };
                out.push_str(&format!(
                    "{} {:<14} {:<16} [{}] {}\n",
                    if c.passed { "ok  " } else { "FAIL" },
                    e.id,
                    c.check,
                    tag,
                    c.detail
                ));
            }
        }
        out.push_str(&format!("{}/{} checks passed in {} entries\n", pass, total, self.entries.len()));
        out
    }
}

/// Directory of the corpus shipped with the crate.
pub fn default_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

pub fn run_corpus(dir: &Path, filter: Option<&str>, cfg: &RunConfig) -> Result<CorpusReport, CorpusError> {
    let all = entry_ids(dir)?;
    // An exact id wins over substring matches.
    let ids: Vec<String> = match filter {
        Some(f) if all.iter().any(|id| id == f) => vec![f.to_string()],
        Some(f) => all.into_iter().filter(|id| id.contains(f)).collect(),
        None => all,
    };
    let mut entries: Vec<EntryResult> = ids.par_iter().map(|id| run_id(dir, id, cfg)).collect();
    entries.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(CorpusReport {
        schema_version: crate::pipeline::SCHEMA_VERSION,
        config: *cfg,
        filter: filter.map(str::to_string),
        entries,
    })
}

fn run_id(dir: &Path, id: &str, cfg: &RunConfig) -> EntryResult {
    match load_entry(dir, id) {
        Ok(entry) => run_entry(&entry, cfg),
        Err(error) => EntryResult { id: id.to_string(), description: String::new(), error: Some(error), checks: Vec::new() },
    }
}

pub fn run_entry(entry: &CorpusEntry, cfg: &RunConfig) -> EntryResult {
    let doc = match parse_document(&entry.source) {
        Ok(d) => d,
        Err(e) => {
            return EntryResult {
                id: entry.id.clone(),
                description: entry.description.clone(),
                error: Some(entry_err(&entry.id, format!("malformed DSL: {}", e))),
                checks: Vec::new(),
            }
        }
    };
    let ctx = EntryCtx { doc: &doc, cfg, cert: OnceCell::new() };
    let checks = entry
        .expectations
        .iter()
        .map(|e| {
            let (passed, detail) = match ctx.run(&e.check) {
                Ok(detail) => (true, detail),
                Err(detail) => (false, detail),
            };
            CheckResult { check: e.check.kind(), source: e.source, anchor: e.anchor.clone(), passed, detail }
        })
        .collect();
    EntryResult { id: entry.id.clone(), description: entry.description.clone(), error: None, checks }
}

type Outcome = Result<String, String>;

struct EntryCtx<'a> {
    doc: &'a Document,
    cfg: &'a RunConfig,
    cert: OnceCell<Result<Certification, String>>,
}

fn texts<T: ToString>(v: &[T]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

fn expect_eq<T: PartialEq + std::fmt::Debug>(what: &str, got: T, want: T) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{}: got {:?}, expected {:?}", what, got, want))
    }
}

fn same_poly(what: &str, got: &Polynomial, want: &str) -> Result<(), String> {
    let w = parse_polynomial(want, got.ctx()).map_err(|e| format!("{}: bad expected polynomial: {}", what, e))?;
    if &w == got {
        Ok(())
    } else {
        Err(format!("{}: got {}, expected {}", what, got, w))
    }
}

impl<'a> EntryCtx<'a> {
    fn germ(&self, name: &str) -> Result<&'a GermDecl, String> {
        self.doc.germ(name).ok_or_else(|| format!("no germ `{}`", name))
    }

    fn single(&self, name: &str) -> Result<&'a MixedFunction, String> {
        self.germ(name)?.mixed_function().ok_or_else(|| format!("`{}` is not a single mixed function", name))
    }

    fn certification(&self) -> Result<&Certification, String> {
        self.cert
            .get_or_init(|| certify(self.doc, self.cfg).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn compose(&self, name: &str) -> Result<&'a crate::dsl::ComposeDecl, String> {
        self.doc.compositions().find(|c| c.name == name).ok_or_else(|| format!("no composition `{}`", name))
    }

    fn run(&self, check: &Check) -> Outcome {
        let err = |e: &dyn std::fmt::Display| e.to_string();
        match check {
            Check::Jacobian { germ, expected } => {
                let j = self.germ(germ)?.germ.jacobian();
                let got: Vec<Vec<String>> = (0..j.rows()).map(|r| (0..j.cols()).map(|c| j.get(r, c).to_string()).collect()).collect();
                expect_eq("jacobian", &got, expected)?;
                Ok(format!("{} rows", got.len()))
            }
            Check::MilnorPoly { germ, expected } => {
                let m = self.germ(germ)?.germ.milnor_polynomial();
                same_poly("milnor_poly", &m.milnor_poly, expected)?;
                Ok(m.milnor_poly.to_string())
            }
            Check::SquareIdentity { germ } => {
                let m = self.germ(germ)?.germ.milnor_polynomial();
                let d = m.square_det.as_ref().ok_or("not a square case")?;
                if (d * d) != m.milnor_poly {
                    return Err("det(A·Aᵀ) differs from det(A)²".into());
                }
                Ok("det(A·Aᵀ) = det(A)²".into())
            }
            Check::SquareDet { germ, expected } => {
                let m = self.germ(germ)?.germ.milnor_polynomial();
                let d = m.square_det.as_ref().ok_or("not a square case")?;
                expect_eq("det(A)", d.to_string(), expected.clone())?;
                Ok(d.to_string())
            }
            Check::SingMinors { germ, expected } => {
                let got = texts(&self.germ(germ)?.germ.singular_minors());
                expect_eq("minors", &got, expected)?;
                Ok(got.join(", "))
            }
            Check::SetVanishes { germ, set, of } => {
                let decl = self.germ(germ)?;
                let comps = decl.set_components(set);
                if comps.is_empty() {
                    return Err(format!("`{}` declares no set `{}`", germ, set));
                }
                let polys = match of {
                    Target::Components => decl.germ.components().to_vec(),
                    Target::Milnor => vec![decl.germ.milnor_polynomial().milnor_poly],
                    Target::Minors => decl.germ.singular_minors(),
                };
                annihilates(comps, &polys)?;
                Ok(format!("{} components of {} annihilate {} polynomials", comps.len(), set, polys.len()))
            }
            Check::Hwc { germ, holds, lambda } => {
                let decl = self.germ(germ)?;
                let cert = crate::pipeline::decl_hwc(decl);
                expect_eq("holds", cert.holds, *holds)?;
                if let Some(l) = lambda {
                    same_poly("lambda", &cert.lambda, l)?;
                }
                if !cert.holds && cert.residuals.is_empty() && cert.pairing.as_ref().is_none_or(ComplexPoly::is_zero) {
                    return Err("rejected without a residual".into());
                }
                Ok(if cert.holds { format!("lambda = {}", cert.lambda) } else { format!("{} residuals", cert.residuals.len()) })
            }
            Check::HwcRoutes { germ } => {
                let decl = self.germ(germ)?;
                let m = decl.mixed.as_ref().ok_or_else(|| format!("`{}` is not mixed", germ))?;
                let mut verdicts = Vec::new();
                for f in m.functions() {
                    let complex = hwc_check_mixed(f).holds;
                    let real = hwc_check(f.realified()).holds;
                    if complex != real {
                        return Err(format!("{}: Wirtinger route {} but real route {}", f.name(), complex, real));
                    }
                    let (dz, dzbar) = wirtinger_gradients(f);
                    if dz != f.dz || dzbar != f.dzbar {
                        return Err(format!("{}: Wirtinger identities fail", f.name()));
                    }
                    verdicts.push(format!("{}={}", f.name(), complex));
                }
                Ok(verdicts.join(", "))
            }
            Check::Wirtinger { germ, dz, dzbar } => {
                let f = self.single(germ)?;
                let got_dz: Vec<String> = (0..f.n()).map(|j| f.dz_formal(j).to_string()).collect();
                let got_bar: Vec<String> = (0..f.n()).map(|j| f.dzbar_formal(j).to_string()).collect();
                expect_eq("dz", &got_dz, dz)?;
                expect_eq("dzbar", &got_bar, dzbar)?;
                Ok(format!("dz = ({}), dzbar = ({})", got_dz.join(", "), got_bar.join(", ")))
            }
            Check::Facts { of, includes, absent } => {
                let cert = self.certification()?;
                let report = cert.report(of).ok_or_else(|| format!("no report for `{}`", of))?;
                let mut shown = Vec::new();
                for name in includes {
                    let f: Fact = name.parse()?;
                    if !report.has(f) {
                        return Err(format!("missing {}; has {}", name, fact_list(report)));
                    }
                    shown.push(format!("{} <- {}", name, report.chain(f)));
                }
                for name in absent {
                    let f: Fact = name.parse()?;
                    if report.has(f) {
                        return Err(format!("unexpected {} <- {}", name, report.chain(f)));
                    }
                }
                Ok(if shown.is_empty() { fact_list(report) } else { shown.join("; ") })
            }
            Check::Witness { name, normal, limit, inner_products, is_witness } => {
                let w = self.doc.witnesses().find(|w| &w.name == name).ok_or_else(|| format!("no witness `{}`", name))?;
                let g = &self.germ(&w.germ)?.germ;
                let n = normal_vector_along_curve(g, &w.curve, &w.coeffs).map_err(|e| err(&e))?;
                expect_eq("normal", &texts(n.components()), normal)?;
                let lim = direction_limit(&n).map_err(|e| err(&e))?;
                expect_eq("limit", &texts(&lim.leading), limit)?;
                let stratum = StratumParam::new(g, w.stratum.clone()).map_err(|e| err(&e))?;
                let tw = thom_irregularity_witness(g, &stratum, &w.curve, &w.coeffs).map_err(|e| err(&e))?;
                expect_eq("inner products", &texts(&tw.inner_products), inner_products)?;
                expect_eq("witness", tw.is_witness, *is_witness)?;
                Ok(format!("limit ({}), inner products ({})", limit.join(", "), inner_products.join(", ")))
            }
            Check::Bwitness { name, limit } => {
                let w = self.doc.bwitnesses().find(|w| &w.name == name).ok_or_else(|| format!("no bwitness `{}`", name))?;
                let g = &self.germ(&w.germ)?.germ;
                let milnor = g.milnor_polynomial().milnor_poly;
                let bw = verify_b_witness(g, &milnor, &w.curve).map_err(|e| err(&e))?;
                expect_eq("limit", &texts(&bw.limit), limit)?;
                Ok(format!("limit ({}) with |limit|^2 = {}", limit.join(", "), bw.limit_norm_sq))
            }
            Check::ProbeB { germ, violation, use_v } => {
                let decl = self.germ(germ)?;
                let v = if *use_v { decl.set_components("V") } else { &[] };
                let p = condition_b_probe(&decl.germ, v, &self.cfg.probe()).map_err(|e| err(&e))?;
                expect_eq("violation", p.violation, *violation)?;
                Ok(format!("{} accepted, min relative distance {:?}", p.accepted, p.min_relative_distance))
            }
            Check::ComposeExact { compose, holds } => {
                let c = self.compose(compose)?;
                let f = self.germ(&c.inner)?;
                let g = self.germ(&c.outer)?;
                let out = composition_condition_exact(
                    &f.germ,
                    &g.germ,
                    &c.milnor_components,
                    c.closure.as_ref(),
                    g.set_components("Sing"),
                )
                .map_err(|e| err(&e))?;
                expect_eq("holds", out.holds, *holds)?;
                Ok(format!("closure {} restricted to Sing {}: ({})", out.closure.unwrap_or_default(), c.outer, out.restricted.join(", ")))
            }
            Check::ImageInMilnor { compose, verdict } => {
                let c = self.compose(compose)?;
                let f = self.germ(&c.inner)?;
                let g = self.germ(&c.outer)?;
                let v = image_in_milnor_check(&f.germ, &g.germ, &c.milnor_components, g.set_components("M"))
                    .map_err(|e| err(&e))?;
                let got = match &v {
                    InclusionVerdict::Holds { .. } => "holds",
                    InclusionVerdict::Fails { .. } => "fails",
                    InclusionVerdict::NoData => "no_data",
                };
                expect_eq("verdict", got, verdict.as_str())?;
                Ok(match v {
                    InclusionVerdict::Holds { components } => format!("{} components", components),
                    InclusionVerdict::Fails { index, pulled } => format!("component {} pulls back to {}", index, pulled),
                    InclusionVerdict::NoData => "no data".into(),
                })
            }
            Check::ComposeSampled { compose, region, violation } => {
                let c = self.compose(compose)?;
                let f = self.germ(&c.inner)?;
                let g = self.germ(&c.outer)?;
                let cfg = self.cfg.probe();
                let region = SampleRegion::parse(region, f.germ.ctx(), cfg.r_max)?;
                let p = composition_condition_sampled(&f.germ, &g.germ, g.set_components("Sing"), &region, &cfg)
                    .map_err(|e| err(&e))?;
                expect_eq("violation", p.violation, *violation)?;
                Ok(format!("{} accepted, min relative distance {:?}", p.accepted, p.min_relative_distance))
            }
            Check::ProductPair { germ, succeeds } => {
                let g = &self.germ(germ)?.germ;
                let c = g.components();
                if c.len() != 4 {
                    return Err("product_pair needs four components".into());
                }
                match product_pair(germ, [&c[0], &c[1], &c[2], &c[3]]).map_err(|e| err(&e))? {
                    ProductOutcome::Built { germ: h, hwc } => {
                        expect_eq("succeeds", true, *succeeds)?;
                        Ok(format!("({}) with lambda = {}", texts(h.components()).join(", "), hwc.lambda))
                    }
                    ProductOutcome::Rejected { residuals } => {
                        expect_eq("succeeds", false, *succeeds)?;
                        let r: Vec<String> = residuals.iter().map(|r| format!("{} = {}", r.label, r.poly)).collect();
                        Ok(r.join("; "))
                    }
                }
            }
            Check::SeparableSum { f, g, equals, hwc } => {
                let (fd, gd) = (self.germ(f)?, self.germ(g)?);
                let out = separable_sum(&fd.germ, &gd.germ, &fd.declared, &gd.declared).map_err(|e| err(&e))?;
                let target = &self.germ(equals)?.germ;
                let same = out.germ.ctx() == target.ctx() && out.germ.components() == target.components();
                if !same {
                    return Err(format!("sum ({}) differs from `{}`", texts(out.germ.components()).join(", "), equals));
                }
                expect_eq("hwc", out.hwc.holds, *hwc)?;
                Ok(format!("{} + {} = {}, lambda = {}", f, g, equals, out.hwc.lambda))
            }
            Check::Fgbar { f, g, holds } => {
                let out = fgbar_check(self.single(f)?, self.single(g)?).map_err(|e| err(&e))?;
                if out.holds() != out.direct.holds {
                    return Err(format!("pairing route {} but direct route {}", out.holds(), out.direct.holds));
                }
                expect_eq("holds", out.holds(), *holds)?;
                Ok(format!("pairing {}", out.pairing))
            }
            Check::MixedAlgorithm { vars, block, products, holomorphic, conjugated, equals } => {
                let vs: Vec<&str> = vars.iter().map(String::as_str).collect();
                let mk = |k: usize, src: &str| parse_mixed_function(&format!("b{}", k), &vs, src).map_err(|e| e.to_string());
                let mut blocks = AlgorithmBlocks::default();
                let mut k = 0;
                let mut next = || {
                    k += 1;
                    k
                };
                for [a, b] in products {
                    blocks.products.push((mk(next(), a)?, mk(next(), b)?));
                }
                for r in holomorphic {
                    blocks.holomorphic.push(mk(next(), r)?);
                }
                for h in conjugated {
                    blocks.conjugated.push(mk(next(), h)?);
                }
                let zero_based: Vec<usize> = block.iter().map(|j| j.saturating_sub(1)).collect();
                let (built, cert) = mixed_algorithm_build(equals, &zero_based, &blocks).map_err(|e| err(&e))?;
                let want = self.single(equals)?;
                if built.formal() != want.formal() {
                    return Err(format!("built {}, expected {}", built.formal(), want.formal()));
                }
                Ok(format!("f = {}, hwc {}", built.formal(), cert.holds))
            }
            Check::LiftWitness { witness, g, q_path, gamma_q, normal, inner_products } => {
                let w = self.doc.witnesses().find(|w| &w.name == witness).ok_or_else(|| format!("no witness `{}`", witness))?;
                let f = &self.germ(&w.germ)?.germ;
                let gg = &self.germ(g)?.germ;
                let q = parse_parametrization(q_path, gg.ctx()).map_err(|e| e.to_string())?;
                let gq = parse_curve(gamma_q, gg.ctx()).map_err(|e| e.to_string())?;
                let fw = WitnessData { stratum: w.stratum.clone(), curve: w.curve.clone(), coeffs: w.coeffs.clone() };
                let lifted = lift_witness_sum(f, &fw, gg, &q, &gq).map_err(|e| err(&e))?;
                expect_eq("normal", &texts(lifted.witness.normal.components()), normal)?;
                expect_eq("inner products", &texts(&lifted.witness.inner_products), inner_products)?;
                Ok(format!("lifted to {} on {} variables", lifted.germ.name(), lifted.germ.source_dim()))
            }
        }
    }
}

fn annihilates(comps: &[Parametrization], polys: &[Polynomial]) -> Result<(), String> {
    for (i, phi) in comps.iter().enumerate() {
        for (k, p) in polys.iter().enumerate() {
            let out = pullback_vanishes(p, phi).map_err(|e| e.to_string())?;
            if !out.vanishes() {
                return Err(format!("component {} does not annihilate polynomial {}", i, k));
            }
        }
    }
    Ok(())
}

fn fact_list(report: &crate::report::RegularityReport) -> String {
    let names: Vec<&str> = report.facts().map(Fact::name).collect();
    format!("{{{}}}", names.join(", "))
}
