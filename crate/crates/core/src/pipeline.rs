//! Certification of whole DSL documents: every germ gets a report, witnesses
//! and compositions are checked and folded in, then the rules are closed.

use serde::Serialize;
use thiserror::Error;

use crate::dsl::{DeclKind, Document, GermDecl, ParseError};
use crate::facts::Fact;
use crate::germ::{pullback_vanishes, Parametrization};
use crate::regularity::{
    empty_interior_criterion, hwc_check, hwc_check_mixed, isolated_singularity_probe, HwcCertificate, HwcJson,
    InteriorVerdict, IsolatedProbe, RegError,
};
use crate::report::{Contradiction, RegularityReport, ReportJson};
use crate::sample::{DEFAULT_RADIUS, DEFAULT_SAMPLES, DEFAULT_SEED};
use crate::witness::{
    composition_condition_exact, image_in_milnor_check, thom_irregularity_witness, verify_b_witness, BWitnessJson,
    CompositionExact, InclusionVerdict, ProbeConfig, StratumParam, ThomWitnessJson, WitnessError,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Reg(#[from] RegError),
    #[error(transparent)]
    Witness(#[from] WitnessError),
    #[error(transparent)]
    Contradiction(#[from] Contradiction),
    #[error("`{0}` declares `holomorphic`, which only applies to a single function C^n -> C")]
    HolomorphicMulti(String),
    #[error("`{0}` declares `holomorphic` but depends on conjugate variables")]
    NotHolomorphic(String),
    #[error("no germ named `{0}`")]
    UnknownGerm(String),
    #[error("{item} `{name}`: {source}")]
    Item {
        item: &'static str,
        name: String,
        #[source]
        source: Box<PipelineError>,
    },
}

impl PipelineError {
    fn within(self, item: &'static str, name: &str) -> Self {
        PipelineError::Item { item, name: name.to_string(), source: Box::new(self) }
    }
}

/// Seed, sample count and cube radius shared by every sampled step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub samples: usize,
    pub radius: i64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { seed: DEFAULT_SEED, samples: DEFAULT_SAMPLES, radius: DEFAULT_RADIUS }
    }
}

impl RunConfig {
    pub fn probe(&self) -> ProbeConfig {
        ProbeConfig::default().with_seed(self.seed).with_samples(self.samples)
    }
}

/// `hwc_check_mixed` for a single mixed function, `hwc_check` otherwise.
pub fn decl_hwc(decl: &GermDecl) -> HwcCertificate {
    match decl.mixed_function() {
        Some(f) => hwc_check_mixed(f),
        None => hwc_check(&decl.germ),
    }
}

#[derive(Debug, Clone)]
pub struct GermOutcome {
    pub name: String,
    pub report: RegularityReport,
    pub hwc: HwcCertificate,
    pub isolated: IsolatedProbe,
    pub interior: Option<InteriorVerdict>,
}

fn isolated_label(p: &IsolatedProbe) -> String {
    match p {
        IsolatedProbe::Witness { point } => {
            let pt: Vec<String> = point.iter().map(crate::poly::format_rational).collect();
            format!("witness ({})", pt.join(", "))
        }
        IsolatedProbe::SingularSetEmpty { index } => format!("minor {} is a nonzero constant", index),
        IsolatedProbe::NoWitnessAtScale { points_checked } => format!("no witness at scale ({} points)", points_checked),
    }
}

/// Report for one germ from its own data: declarations, HWC, the isolated
/// probe and the empty-interior test. Rules are not closed yet.
pub fn germ_report(decl: &GermDecl, cfg: &RunConfig) -> Result<GermOutcome, PipelineError> {
    let mut report = RegularityReport::new(&decl.name);
    let single = decl.mixed_function();
    if decl.declared.contains(&Fact::Holomorphic) {
        match single {
            None => return Err(PipelineError::HolomorphicMulti(decl.name.clone())),
            Some(f) if !f.is_holomorphic() => return Err(PipelineError::NotHolomorphic(decl.name.clone())),
            _ => {}
        }
    }
    for &f in &decl.declared {
        report.declare(f)?;
    }
    if single.is_some_and(|f| f.is_holomorphic()) {
        report.verify(Fact::Holomorphic, "holomorphic")?;
    }

    let hwc = decl_hwc(decl);
    hwc.record(&mut report, if single.is_some() { "hwc_check_mixed" } else { "hwc_check" })?;

    let v = decl.set_components("V");
    let isolated = isolated_singularity_probe(&decl.germ, v, cfg.seed, cfg.samples)?;
    match &isolated {
        IsolatedProbe::Witness { .. } => report.verify(Fact::NotSingVIsolated, "isolated_probe")?,
        IsolatedProbe::SingularSetEmpty { .. } => report.verify(Fact::IsolatedSingularity, "isolated_probe")?,
        IsolatedProbe::NoWitnessAtScale { .. } => {}
    }
    report.notes.push(format!("isolated probe: {}", isolated_label(&isolated)));

    let m = decl.set_components("M");
    let milnor = decl.germ.milnor_polynomial().milnor_poly;
    let v_in_m = |phi: &Parametrization| pullback_vanishes(&milnor, phi).map(|o| o.vanishes());
    let mut outside = None;
    for (i, phi) in v.iter().enumerate() {
        if !v_in_m(phi).map_err(RegError::from)? {
            outside = Some(i);
            break;
        }
    }
    let interior = if let Some(i) = outside {
        report.notes.push(format!("empty-interior test skipped: V-component {} is not inside M", i));
        None
    } else if !v.is_empty() && !m.is_empty() {
        let verdict = empty_interior_criterion(&decl.germ, &milnor, v, m)?;
        if let InteriorVerdict::Fires { v_dimension } = verdict {
            report.verify(Fact::VEmptyInteriorInM, "empty_interior")?;
            if v_dimension > 0 {
                report.verify(Fact::PositiveDimV, "empty_interior")?;
            }
        }
        Some(verdict)
    } else {
        None
    };
    Ok(GermOutcome { name: decl.name.clone(), report, hwc, isolated, interior })
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessOutcome {
    pub name: String,
    pub germ: String,
    pub kind: &'static str,
    pub thom: Option<ThomWitnessJson>,
    pub b: Option<BWitnessJson>,
}

#[derive(Debug, Clone)]
pub struct CompositionOutcome {
    pub name: String,
    pub report: RegularityReport,
    pub exact: Option<CompositionExact>,
    pub inclusion: InclusionVerdict,
}

#[derive(Debug, Clone)]
pub struct Certification {
    pub config: RunConfig,
    pub germs: Vec<GermOutcome>,
    pub witnesses: Vec<WitnessOutcome>,
    pub compositions: Vec<CompositionOutcome>,
}

fn lookup<'a>(doc: &'a Document, name: &str) -> Result<&'a GermDecl, PipelineError> {
    doc.germ(name).ok_or_else(|| PipelineError::UnknownGerm(name.to_string()))
}

pub fn certify(doc: &Document, cfg: &RunConfig) -> Result<Certification, PipelineError> {
    let mut germs = Vec::new();
    for decl in doc.germs() {
        germs.push(germ_report(decl, cfg).map_err(|e| e.within("germ", &decl.name))?);
    }
    let slot = |name: &str, germs: &[GermOutcome]| germs.iter().position(|g| g.name == name);

    let mut witnesses = Vec::new();
    for w in doc.witnesses() {
        let mut run = || -> Result<WitnessOutcome, PipelineError> {
            let decl = lookup(doc, &w.germ)?;
            let stratum = StratumParam::new(&decl.germ, w.stratum.clone())?;
            let tw = thom_irregularity_witness(&decl.germ, &stratum, &w.curve, &w.coeffs)?;
            if let Some(i) = slot(&w.germ, &germs) {
                tw.record(&mut germs[i].report)?;
            }
            Ok(WitnessOutcome { name: w.name.clone(), germ: w.germ.clone(), kind: "thom", thom: Some(tw.to_json()), b: None })
        };
        witnesses.push(run().map_err(|e| e.within("witness", &w.name))?);
    }
    for w in doc.bwitnesses() {
        let mut run = || -> Result<WitnessOutcome, PipelineError> {
            let decl = lookup(doc, &w.germ)?;
            let milnor = decl.germ.milnor_polynomial().milnor_poly;
            let bw = verify_b_witness(&decl.germ, &milnor, &w.curve)?;
            if let Some(i) = slot(&w.germ, &germs) {
                bw.record(&mut germs[i].report)?;
            }
            Ok(WitnessOutcome { name: w.name.clone(), germ: w.germ.clone(), kind: "condition_b", thom: None, b: Some(bw.to_json()) })
        };
        witnesses.push(run().map_err(|e| e.within("bwitness", &w.name))?);
    }
    for g in &mut germs {
        g.report.derive().map_err(|e| PipelineError::from(e).within("germ", &g.name))?;
    }

    let mut compositions = Vec::new();
    for c in doc.compositions() {
        let run = || -> Result<CompositionOutcome, PipelineError> {
            let f = lookup(doc, &c.inner)?;
            let g = lookup(doc, &c.outer)?;
            let mut report = RegularityReport::new(&c.name);
            let exact = match &c.closure {
                Some(cl) => {
                    let out = composition_condition_exact(
                        &f.germ,
                        &g.germ,
                        &c.milnor_components,
                        Some(cl),
                        g.set_components("Sing"),
                    )?;
                    out.record(&mut report);
                    Some(out)
                }
                None => None,
            };
            let inclusion = image_in_milnor_check(&f.germ, &g.germ, &c.milnor_components, g.set_components("M"))?;
            inclusion.record(&mut report, &c.inner, &c.outer);
            for (role, name) in [("F", &c.inner), ("G", &c.outer)] {
                if let Some(i) = slot(name, &germs) {
                    report.add_role(role, name, germs[i].report.facts().collect::<Vec<_>>());
                }
            }
            report.derive()?;
            Ok(CompositionOutcome { name: c.name.clone(), report, exact, inclusion })
        };
        compositions.push(run().map_err(|e| e.within("compose", &c.name))?);
    }
    Ok(Certification { config: *cfg, germs, witnesses, compositions })
}

#[derive(Debug, Clone, Serialize)]
pub struct GermJson {
    pub report: ReportJson,
    pub hwc: HwcJson,
    pub isolated_probe: String,
    pub empty_interior: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompositionJson {
    pub report: ReportJson,
    pub exact: Option<CompositionExact>,
    pub inclusion: InclusionVerdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificationJson {
    pub schema_version: u32,
    pub config: RunConfig,
    pub germs: Vec<GermJson>,
    pub witnesses: Vec<WitnessOutcome>,
    pub compositions: Vec<CompositionJson>,
}

impl Certification {
    pub fn germ(&self, name: &str) -> Option<&GermOutcome> {
        self.germs.iter().find(|g| g.name == name)
    }

    pub fn composition(&self, name: &str) -> Option<&CompositionOutcome> {
        self.compositions.iter().find(|c| c.name == name)
    }

    /// Report of a germ or a composition.
    pub fn report(&self, name: &str) -> Option<&RegularityReport> {
        self.germ(name).map(|g| &g.report).or_else(|| self.composition(name).map(|c| &c.report))
    }

    pub fn to_json(&self) -> CertificationJson {
        CertificationJson {
            schema_version: SCHEMA_VERSION,
            config: self.config,
            germs: self
                .germs
                .iter()
                .map(|g| GermJson {
                    report: g.report.to_json(),
                    hwc: g.hwc.to_json(),
                    isolated_probe: isolated_label(&g.isolated),
                    empty_interior: g.interior.as_ref().map(|v| match v {
                        InteriorVerdict::Fires { v_dimension } => format!("fires (dim V = {})", v_dimension),
                        InteriorVerdict::Inconclusive { index } => format!("inconclusive (M-component {} lies in V)", index),
                    }),
                })
                .collect(),
            witnesses: self.witnesses.clone(),
            compositions: self
                .compositions
                .iter()
                .map(|c| CompositionJson { report: c.report.to_json(), exact: c.exact.clone(), inclusion: c.inclusion.clone() })
                .collect(),
        }
    }
}

/// Kind of a declaration, for listings.
pub fn decl_kind(decl: &GermDecl) -> &'static str {
    match decl.kind {
        DeclKind::Map => "map",
        DeclKind::Mixed => "mixed",
    }
}
