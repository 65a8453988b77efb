//! `germlab` command line: argument parsing, dispatch and the exit-code contract
//! (0 success, 1 analysis rejection, 2 usage error).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::corpus::{default_dir, run_corpus};
use crate::dsl::{parse_document, parse_mixed_function, Document, GermDecl};
use crate::pipeline::{certify, decl_hwc, decl_kind, RunConfig, SCHEMA_VERSION};
use crate::regularity::{mixed_algorithm_build, product_pair, separable_sum, AlgorithmBlocks, ProductOutcome};
use crate::sample::DEFAULT_SEED;
use crate::witness::{
    composition_condition_exact, composition_condition_sampled, condition_b_probe, image_in_milnor_check,
    thom_irregularity_witness, verify_b_witness, SampleRegion, StratumParam,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECTED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "germlab", version, about = "Regularity analysis of polynomial and mixed-polynomial map germs")]
pub struct Cli {
    /// Master seed for every sampled step (default 0xC0FFEE, or $GERMLAB_SEED).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Points per sampled probe (default 200).
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Half-width of the rational sampling cube.
    #[arg(long, global = true)]
    pub radius: Option<i64>,
    /// Write the JSON report here (`-` for standard output, replacing the summary).
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct FileArgs {
    pub file: PathBuf,
    /// Restrict to one declaration.
    #[arg(long)]
    pub germ: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a DSL file and print its declarations in canonical form.
    Parse(FileArgs),
    /// Milnor-set polynomial det(A*A^T) (and det(A) in the square case).
    Milnor(FileArgs),
    /// Maximal minors of the Jacobian.
    Sing(FileArgs),
    /// Horizontally weakly conformal check.
    Hwc(FileArgs),
    /// Build a germ from pieces.
    #[command(subcommand)]
    Construct(Construct),
    /// Verify every `witness` and `bwitness` block.
    Witness(FileArgs),
    /// Sampled condition-(b) probe.
    ProbeB(FileArgs),
    /// Composition checks for every `compose` block.
    ComposeCheck(ComposeArgs),
    /// Full certificate derivation.
    Certify(FileArgs),
    /// The shipped example corpus.
    #[command(subcommand)]
    Corpus(CorpusCmd),
}

#[derive(Debug, Subcommand)]
pub enum Construct {
    /// f + g over disjoint variables.
    Sum {
        file: PathBuf,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
    },
    /// (G1 G3 - G2 G4, G1 G4 + G2 G3) from a four-component germ.
    Product {
        file: PathBuf,
        #[arg(long)]
        germ: String,
    },
    /// Mixed function from holomorphic blocks.
    MixedAlgo {
        /// Comma-separated complex variables.
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
        /// Comma-separated 1-based indices of the holomorphic block.
        #[arg(long, value_delimiter = ',')]
        block: Vec<usize>,
        /// `f;g`, contributing f*conj(g). Repeatable.
        #[arg(long, allow_hyphen_values = true)]
        product: Vec<String>,
        /// r, contributing r. Repeatable
        #[arg(long, allow_hyphen_values = true)]
        holomorphic: Vec<String>,
        /// h, contributing conj(h). Repeatable.
        #[arg(long, allow_hyphen_values = true)]
        conjugated: Vec<String>,
        /// Name of the built function
        #[arg(long, default_value = "f")]
        name: String,
    },
}

#[derive(Debug, Args)]
pub struct ComposeArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub name: Option<String>,
    /// Sampled mode over this region, e.g. `x=free:z; y=log:1e-6:1e-4; z=0.05:0.3; w=0`.
    #[arg(long)]
    pub region: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum CorpusCmd {
    Run {
        #[arg(long)]
        dir: Option<PathBuf>,
        #[arg(long)]
        filter: Option<String>,
    },
}

/// What a command produced: a JSON body, a text summary and the exit code.
struct Output {
    json: Value,
    text: String,
    code: i32,
}

impl Output {
    fn ok(json: Value, text: String) -> Self {
        Output { json, text, code: EXIT_OK }
    }
}

enum Failure {
    Usage(String),
    Rejected(String),
}

type Res = Result<Output, Failure>;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn rejected(e: impl std::fmt::Display) -> Failure {
    Failure::Rejected(e.to_string())
}

fn config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::default();
    cfg.seed = match cli.seed {
        Some(s) => s,
        None => match std::env::var("GERMLAB_SEED") {
            Ok(v) => parse_seed(&v).ok_or_else(|| Failure::Usage(format!("GERMLAB_SEED is not a seed: `{}`", v)))?,
            Err(_) => DEFAULT_SEED,
        },
    };
    if let Some(n) = cli.samples {
        cfg.samples = n;
    }
    if let Some(r) = cli.radius {
        if r <= 0 {
            return Err(Failure::Usage("--radius must be positive".into()));
        }
        cfg.radius = r;
    }
    Ok(cfg)
}

fn parse_seed(s: &str) -> Option<u64> {
    let s = s.trim();
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => s.parse().ok(),
    }
}

fn load(path: &Path) -> Result<Document, Failure> {
    let src = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {}", path.display(), e)))?;
    parse_document(&src).map_err(|e| Failure::Usage(format!("{}:{}", path.display(), e)))
}

fn selected<'a>(doc: &'a Document, only: &Option<String>) -> Result<Vec<&'a GermDecl>, Failure> {
    match only {
        Some(n) => doc.germ(n).map(|g| vec![g]).ok_or_else(|| Failure::Usage(format!("no germ named `{}`", n))),
        None => Ok(doc.germs().collect()),
    }
}

/// Runs `germlab` on `args` (program name first). Summary text goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if code == EXIT_OK { write!(out, "{}", e.render()) } else { write!(err, "{}", e.render()) };
            return code;
        }
    };
    let name = command_name(&cli.command);
    let result = config(&cli).and_then(|cfg| dispatch(&cli.command, &cfg).map(|o| (o, cfg)));
    let (json, text, code) = match result {
        Ok((o, cfg)) => {
            let mut body = json!({ "schema_version": SCHEMA_VERSION, "command": name, "config": to_value(&cfg) });
            if let (Value::Object(b), Value::Object(extra)) = (&mut body, o.json) {
                b.extend(extra);
            }
            (body, o.text, o.code)
        }
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {}", m);
            let body = json!({ "schema_version": SCHEMA_VERSION, "command": name, "error": { "kind": "usage", "message": m } });
            (body, String::new(), EXIT_USAGE)
        }
        Err(Failure::Rejected(m)) => {
            let _ = writeln!(err, "rejected: {}", m);
            let body = json!({ "schema_version": SCHEMA_VERSION, "command": name, "error": { "kind": "rejected", "message": m } });
            (body, String::new(), EXIT_REJECTED)
        }
    };
    let rendered = serde_json::to_string_pretty(&json).expect("json renders") + "\n";
    match &cli.json {
        Some(p) if p.as_os_str() == "-" => {
            let _ = out.write_all(rendered.as_bytes());
        }
        Some(p) => {
            if let Err(e) = fs::write(p, rendered) {
                let _ = writeln!(err, "error: cannot write {}: {}", p.display(), e);
                return EXIT_USAGE;
            }
            let _ = out.write_all(text.as_bytes());
        }
        None => {
            let _ = out.write_all(text.as_bytes());
        }
    }
    code
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Parse(_) => "parse",
        Command::Milnor(_) => "milnor",
        Command::Sing(_) => "sing",
        Command::Hwc(_) => "hwc",
        Command::Construct(Construct::Sum { .. }) => "construct sum",
        Command::Construct(Construct::Product { .. }) => "construct product",
        Command::Construct(Construct::MixedAlgo { .. }) => "construct mixed-algo",
        Command::Witness(_) => "witness",
        Command::ProbeB(_) => "probe-b",
        Command::ComposeCheck(_) => "compose-check",
        Command::Certify(_) => "certify",
        Command::Corpus(_) => "corpus run",
    }
}

fn dispatch(cmd: &Command, cfg: &RunConfig) -> Res {
    match cmd {
        Command::Parse(a) => cmd_parse(a),
        Command::Milnor(a) => cmd_milnor(a, cfg),
        Command::Sing(a) => cmd_sing(a),
        Command::Hwc(a) => cmd_hwc(a),
        Command::Construct(c) => cmd_construct(c),
        Command::Witness(a) => cmd_witness(a),
        Command::ProbeB(a) => cmd_probe(a, cfg),
        Command::ComposeCheck(a) => cmd_compose(a, cfg),
        Command::Certify(a) => cmd_certify(a, cfg),
        Command::Corpus(CorpusCmd::Run { dir, filter }) => {
            let dir = dir.clone().unwrap_or_else(default_dir);
            let report = run_corpus(&dir, filter.as_deref(), cfg).map_err(|e| Failure::Usage(e.to_string()))?;
            let code = if report.passed() { EXIT_OK } else { EXIT_REJECTED };
            let mut json = to_value(&report);
            if let Value::Object(m) = &mut json {
                m.remove("schema_version");
                m.remove("config");
            }
            Ok(Output { json, text: report.table(), code })
        }
    }
}

fn cmd_parse(a: &FileArgs) -> Res {
    let doc = load(&a.file)?;
    let germs: Vec<Value> = selected(&doc, &a.germ)?
        .iter()
        .map(|g| {
            json!({
                "name": g.name,
                "kind": decl_kind(g),
                "vars": g.vars,
                "components": g.component_texts(),
                "real_components": g.germ.components().iter().map(ToString::to_string).collect::<Vec<_>>(),
                "sets": g.sets.iter().map(|s| json!({ "name": s.name, "components": s.components.len() })).collect::<Vec<_>>(),
                "declared": g.declared.iter().map(|f| f.name()).collect::<Vec<_>>(),
            })
        })
        .collect();
    let text = if a.germ.is_some() {
        selected(&doc, &a.germ)?.iter().map(|g| g.to_dsl()).collect::<Vec<_>>().join("\n")
    } else {
        doc.to_dsl()
    };
    Ok(Output::ok(
        json!({
            "germs": germs,
            "witnesses": doc.witnesses().count() + doc.bwitnesses().count(),
            "compositions": doc.compositions().count(),
        }),
        text,
    ))
}

fn cmd_milnor(a: &FileArgs, cfg: &RunConfig) -> Res {
    let doc = load(&a.file)?;
    let mut results = Vec::new();
    let mut text = String::new();
    for g in selected(&doc, &a.germ)? {
        let m = g.germ.milnor_polynomial();
        text.push_str(&format!("{}: milnor_poly = {}\n", g.name, m.milnor_poly));
        if let Some(d) = &m.square_det {
            text.push_str(&format!("{}: det A = {}\n", g.name, d));
        }
        results.push(to_value(&m.to_json(cfg.seed)));
    }
    Ok(Output::ok(json!({ "results": results }), text))
}

fn cmd_sing(a: &FileArgs) -> Res {
    let doc = load(&a.file)?;
    let mut results = Vec::new();
    let mut text = String::new();
    for g in selected(&doc, &a.germ)? {
        let minors: Vec<String> = g.germ.singular_minors().iter().map(ToString::to_string).collect();
        text.push_str(&format!("{}: {}\n", g.name, minors.join(", ")));
        results.push(json!({ "germ": g.name, "minors": minors }));
    }
    Ok(Output::ok(json!({ "results": results }), text))
}

fn cmd_hwc(a: &FileArgs) -> Res {
    let doc = load(&a.file)?;
    let mut results = Vec::new();
    let mut text = String::new();
    for g in selected(&doc, &a.germ)? {
        let c = decl_hwc(g);
        if c.holds {
            text.push_str(&format!("{}: hwc holds, lambda = {}\n", g.name, c.lambda));
        } else {
            text.push_str(&format!("{}: hwc fails\n", g.name));
            for r in &c.residuals {
                text.push_str(&format!("  {} = {}\n", r.label, r.poly));
            }
        }
        results.push(to_value(&c.to_json()));
    }
    Ok(Output::ok(json!({ "results": results }), text))
}

fn cmd_construct(c: &Construct) -> Res {
    match c {
        Construct::Sum { file, f, g } => {
            let doc = load(file)?;
            let (fd, gd) = (selected(&doc, &Some(f.clone()))?[0], selected(&doc, &Some(g.clone()))?[0]);
            let out = separable_sum(&fd.germ, &gd.germ, &fd.declared, &gd.declared).map_err(rejected)?;
            let comps: Vec<String> = out.germ.components().iter().map(ToString::to_string).collect();
            let text = format!("{} = ({})\n{}", out.germ.name(), comps.join(", "), out.report);
            Ok(Output::ok(
                json!({ "germ": out.germ.name(), "vars": out.germ.ctx().names(), "components": comps,
                        "hwc": to_value(&out.hwc.to_json()), "report": to_value(&out.report.to_json()) }),
                text,
            ))
        }
        Construct::Product { file, germ } => {
            let doc = load(file)?;
            let g = &selected(&doc, &Some(germ.clone()))?[0].germ;
            let c = g.components();
            if c.len() != 4 {
                return Err(Failure::Usage(format!("`{}` has {} components, product needs 4", germ, c.len())));
            }
            match product_pair(germ, [&c[0], &c[1], &c[2], &c[3]]).map_err(rejected)? {
                ProductOutcome::Built { germ: h, hwc } => {
                    let comps: Vec<String> = h.components().iter().map(ToString::to_string).collect();
                    let text = format!("({})\nhwc holds, lambda = {}\n", comps.join(", "), hwc.lambda);
                    Ok(Output::ok(json!({ "built": true, "components": comps, "hwc": to_value(&hwc.to_json()) }), text))
                }
                ProductOutcome::Rejected { residuals } => {
                    let r: Vec<Value> = residuals.iter().map(|r| json!({ "condition": r.label, "polynomial": r.poly.to_string() })).collect();
                    let text: String = residuals.iter().map(|r| format!("rejected: {} = {}\n", r.label, r.poly)).collect();
                    Ok(Output { json: json!({ "built": false, "residuals": r }), text, code: EXIT_REJECTED })
                }
            }
        }
        Construct::MixedAlgo { vars, block, product, holomorphic, conjugated, name } => {
            if vars.is_empty() {
                return Err(Failure::Usage("--vars is required".into()));
            }
            let vs: Vec<&str> = vars.iter().map(String::as_str).collect();
            let mut k = 0;
            let mut mk = |src: &str| {
                k += 1;
                parse_mixed_function(&format!("b{}", k), &vs, src).map_err(|e| Failure::Usage(e.to_string()))
            };
            let mut blocks = AlgorithmBlocks::default();
            for p in product {
                let (a, b) = p.split_once(';').ok_or_else(|| Failure::Usage(format!("--product wants `f;g`, got `{}`", p)))?;
                blocks.products.push((mk(a)?, mk(b)?));
            }
            for r in holomorphic {
                blocks.holomorphic.push(mk(r)?);
            }
            for h in conjugated {
                blocks.conjugated.push(mk(h)?);
            }
            if block.iter().any(|&j| j == 0 || j > vars.len()) {
                return Err(Failure::Usage("--block indices are 1-based and within --vars".into()));
            }
            let zero_based: Vec<usize> = block.iter().map(|j| j - 1).collect();
            let (f, cert) = mixed_algorithm_build(name, &zero_based, &blocks).map_err(rejected)?;
            let text = format!("{} = {}\nhwc holds, lambda = {}\n", name, f.formal(), cert.lambda);
            Ok(Output::ok(json!({ "function": f.formal().to_string(), "hwc": to_value(&cert.to_json()) }), text))
        }
    }
}

fn cmd_witness(a: &FileArgs) -> Res {
    let doc = load(&a.file)?;
    let mut results = Vec::new();
    let mut text = String::new();
    let keep = |g: &str| a.germ.as_deref().is_none_or(|n| n == g);
    for w in doc.witnesses().filter(|w| keep(&w.germ)) {
        let g = &selected(&doc, &Some(w.germ.clone()))?[0].germ;
        let stratum = StratumParam::new(g, w.stratum.clone()).map_err(|e| rejected(format!("witness `{}`: {}", w.name, e)))?;
        let tw = thom_irregularity_witness(g, &stratum, &w.curve, &w.coeffs)
            .map_err(|e| rejected(format!("witness `{}`: {}", w.name, e)))?;
        let j = tw.to_json();
        text.push_str(&format!(
            "{}: {} (limit ({}), inner products ({}))\n",
            w.name,
            if tw.is_witness { "witness" } else { "not a witness" },
            j.limit.join(", "),
            j.inner_products.join(", ")
        ));
        results.push(json!({ "name": w.name, "kind": "thom", "result": to_value(&j) }));
    }
    for w in doc.bwitnesses().filter(|w| keep(&w.germ)) {
        let g = &selected(&doc, &Some(w.germ.clone()))?[0].germ;
        let milnor = g.milnor_polynomial().milnor_poly;
        let bw = verify_b_witness(g, &milnor, &w.curve).map_err(|e| rejected(format!("bwitness `{}`: {}", w.name, e)))?;
        let j = bw.to_json();
        text.push_str(&format!("{}: condition (b) fails, limit ({})\n", w.name, j.limit.join(", ")));
        results.push(json!({ "name": w.name, "kind": "condition_b", "result": to_value(&j) }));
    }
    if results.is_empty() {
        return Err(Failure::Usage("no witness blocks".into()));
    }
    Ok(Output::ok(json!({ "results": results }), text))
}

fn cmd_probe(a: &FileArgs, cfg: &RunConfig) -> Res {
    let doc = load(&a.file)?;
    let mut results = Vec::new();
    let mut text = String::new();
    for g in selected(&doc, &a.germ)? {
        let p = condition_b_probe(&g.germ, g.set_components("V"), &cfg.probe()).map_err(rejected)?;
        text.push_str(&format!(
            "{}: {} ({} accepted of {}, min relative distance {})\n",
            g.name,
            if p.violation { "violation" } else { "no witness at scale" },
            p.accepted,
            p.samples,
            p.min_relative_distance.map_or("-".into(), |d| format!("{:.3e}", d))
        ));
        results.push(json!({ "germ": g.name, "probe": to_value(&p) }));
    }
    Ok(Output::ok(json!({ "results": results }), text))
}

fn cmd_compose(a: &ComposeArgs, cfg: &RunConfig) -> Res {
    let doc = load(&a.file)?;
    let comps: Vec<_> = doc.compositions().filter(|c| a.name.as_deref().is_none_or(|n| n == c.name)).collect();
    if comps.is_empty() {
        return Err(Failure::Usage("no matching compose block".into()));
    }
    let mut results = Vec::new();
    let mut text = String::new();
    for c in comps {
        let f = &selected(&doc, &Some(c.inner.clone()))?[0];
        let g = &selected(&doc, &Some(c.outer.clone()))?[0];
        let sing = g.set_components("Sing");
        let exact = match &c.closure {
            Some(cl) => Some(composition_condition_exact(&f.germ, &g.germ, &c.milnor_components, Some(cl), sing).map_err(rejected)?),
            None => None,
        };
        let inclusion = image_in_milnor_check(&f.germ, &g.germ, &c.milnor_components, g.set_components("M")).map_err(rejected)?;
        let sampled = match &a.region {
            Some(r) => {
                let p = cfg.probe();
                let region = SampleRegion::parse(r, f.germ.ctx(), p.r_max).map_err(Failure::Usage)?;
                Some(composition_condition_sampled(&f.germ, &g.germ, sing, &region, &p).map_err(rejected)?)
            }
            None => None,
        };
        text.push_str(&format!("{} = {} o {}\n", c.name, c.outer, c.inner));
        if let Some(e) = &exact {
            text.push_str(&format!("  closure condition: {}\n", if e.holds { "holds" } else { "not certified" }));
        }
        text.push_str(&format!("  image in M({}): {}\n", c.outer, to_value(&inclusion)["verdict"].as_str().unwrap_or("?")));
        if let Some(s) = &sampled {
            text.push_str(&format!(
                "  sampled: {} ({} accepted, min relative distance {})\n",
                if s.violation { "violation" } else { "no witness at scale" },
                s.accepted,
                s.min_relative_distance.map_or("-".into(), |d| format!("{:.3e}", d))
            ));
        }
        results.push(json!({
            "name": c.name, "outer": c.outer, "inner": c.inner,
            "exact": exact.as_ref().map(to_value), "inclusion": to_value(&inclusion),
            "sampled": sampled.as_ref().map(to_value),
        }));
    }
    Ok(Output::ok(json!({ "results": results }), text))
}

fn cmd_certify(a: &FileArgs, cfg: &RunConfig) -> Res {
    let doc = load(&a.file)?;
    let cert = certify(&doc, cfg).map_err(rejected)?;
    let mut text = String::new();
    for g in &cert.germs {
        if a.germ.as_deref().is_none_or(|n| n == g.name) {
            text.push_str(&g.report.to_string());
        }
    }
    for c in &cert.compositions {
        text.push_str(&c.report.to_string());
    }
    let mut json = to_value(&cert.to_json());
    if let Value::Object(m) = &mut json {
        m.remove("schema_version");
        m.remove("config");
    }
    Ok(Output::ok(json, text))
}
