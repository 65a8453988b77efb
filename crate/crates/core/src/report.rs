//! Certificate ledger and the implication rules that close it.
//!
//! Base facts enter either as verified checks (rule id = the check that
//! produced them) or as user declarations. Facts about other germs (the
//! pieces of a sum or a composition) enter under a role such as `F` or `g`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::facts::Fact;
use crate::facts::Fact::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Premise {
    Local(Fact),
    /// A fact about another germ, keyed by role.
    Role(&'static str, Fact),
    /// A verified computational check, e.g. the closure condition of a composition.
    Check(&'static str),
}

pub struct Rule {
    pub id: &'static str,
    premises: &'static [Premise],
    pub conclusions: &'static [Fact],
}

use Premise::{Check, Local, Role};

pub const RULES: &[Rule] = &[
    Rule { id: "tma", premises: &[Local(Hwc)], conclusions: &[DiscZero, ThomRegular] },
    Rule { id: "hl", premises: &[Local(Holomorphic)], conclusions: &[ThomRegular] },
    Rule { id: "ttr", premises: &[Local(IsolatedSingularity)], conclusions: &[ThomRegular] },
    Rule { id: "iso_disc", premises: &[Local(IsolatedSingularity)], conclusions: &[DiscZero] },
    Rule { id: "iso_singv", premises: &[Local(IsolatedSingularity)], conclusions: &[SingVIsolated] },
    Rule { id: "singv_contra", premises: &[Local(NotSingVIsolated)], conclusions: &[NotIsolatedSingularity] },
    Rule {
        id: "tct3",
        premises: &[Local(PairThomRegular), Local(DiscTangentAxes)],
        conclusions: &[ThomRegular],
    },
    Rule {
        id: "p1",
        premises: &[Local(IrregularityWitness), Local(WInvariantStratum)],
        conclusions: &[NotThomRegular],
    },
    Rule {
        id: "f2prop2",
        premises: &[Local(VEmptyInteriorInM), Local(PositiveDimV), Local(DiscZero)],
        conclusions: &[NotConditionB],
    },
    Rule {
        id: "act5.2",
        premises: &[
            Check("separable"),
            Role("f", ThomRegular),
            Role("f", DiscZero),
            Role("f", CodimP),
            Role("g", ThomRegular),
            Role("g", DiscZero),
            Role("g", CodimP),
        ],
        conclusions: &[ThomRegular],
    },
    Rule {
        id: "tp",
        premises: &[
            Check("closure_condition"),
            Role("F", ConditionB),
            Role("F", DiscZero),
            Role("G", DiscZero),
        ],
        conclusions: &[ConditionB],
    },
    Rule {
        id: "incl",
        premises: &[
            Check("image_in_milnor"),
            Role("F", ConditionB),
            Role("F", DiscZero),
            Role("G", ConditionB),
        ],
        conclusions: &[ConditionB],
    },
    Rule { id: "topp1", premises: &[Local(SingVIsolated)], conclusions: &[ConditionB] },
    Rule { id: "ppp", premises: &[Local(ThomRegular)], conclusions: &[ConditionB] },
    Rule { id: "ppp_contra", premises: &[Local(NotConditionB)], conclusions: &[NotThomRegular] },
    Rule {
        id: "ttf",
        premises: &[Local(DiscZero), Local(ConditionB)],
        conclusions: &[TubeFibrationHypothesesMet],
    },
];

pub fn rule(id: &str) -> Option<&'static Rule> {
    RULES.iter().find(|r| r.id == id)
}

/// How a fact entered the report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Derivation {
    pub rule: String,
    pub inputs: Vec<String>,
}

impl Derivation {
    pub fn declared() -> Self {
        Derivation { rule: "declared".into(), inputs: Vec::new() }
    }

    pub fn check(name: &str) -> Self {
        Derivation { rule: name.into(), inputs: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("contradiction: `{fact}` and `{negation}` both hold\n  {fact}: {chain_a}\n  {negation}: {chain_b}")]
pub struct Contradiction {
    pub fact: Fact,
    pub negation: Fact,
    pub chain_a: String,
    pub chain_b: String,
}

#[derive(Debug, Clone, Default)]
struct RoleFacts {
    germ: String,
    facts: BTreeSet<Fact>,
}

#[derive(Debug, Clone, Default)]
pub struct RegularityReport {
    germ: String,
    order: Vec<Fact>,
    facts: BTreeMap<Fact, Derivation>,
    declared: BTreeSet<Fact>,
    roles: BTreeMap<&'static str, RoleFacts>,
    checks: BTreeMap<&'static str, String>,
    pub residuals: BTreeMap<String, String>,
    pub notes: Vec<String>,
}

impl RegularityReport {
    pub fn new(germ: impl Into<String>) -> Self {
        RegularityReport { germ: germ.into(), ..Default::default() }
    }

    pub fn germ(&self) -> &str {
        &self.germ
    }

    pub fn has(&self, f: Fact) -> bool {
        self.facts.contains_key(&f)
    }

    pub fn facts(&self) -> impl Iterator<Item = Fact> + '_ {
        self.order.iter().copied()
    }

    pub fn derivation(&self, f: Fact) -> Option<&Derivation> {
        self.facts.get(&f)
    }

    pub fn declared(&self) -> impl Iterator<Item = Fact> + '_ {
        self.declared.iter().copied()
    }

    pub fn is_declared(&self, f: Fact) -> bool {
        self.declared.contains(&f)
    }

    /// Records a fact established by a computation named `check`.
    pub fn verify(&mut self, f: Fact, check: &str) -> Result<(), Contradiction> {
        self.insert(f, Derivation::check(check))
    }

    pub fn declare(&mut self, f: Fact) -> Result<(), Contradiction> {
        self.declared.insert(f);
        self.insert(f, Derivation::declared())
    }

    /// Facts about a related germ, e.g. role `F` of a composition `G ∘ F`.
    pub fn add_role(&mut self, role: &'static str, germ: &str, facts: impl IntoIterator<Item = Fact>) {
        let entry = self.roles.entry(role).or_default();
        entry.germ = germ.to_string();
        entry.facts.extend(facts);
    }

    /// Marks a computational side condition as verified.
    pub fn add_check(&mut self, name: &'static str, detail: impl Into<String>) {
        self.checks.insert(name, detail.into());
    }

    fn insert(&mut self, f: Fact, d: Derivation) -> Result<(), Contradiction> {
        if self.facts.contains_key(&f) {
            return Ok(());
        }
        if let Some(n) = f.negation().filter(|n| self.facts.contains_key(n)) {
            let mut probe = self.clone();
            probe.facts.insert(f, d);
            return Err(Contradiction {
                fact: f,
                negation: n,
                chain_a: probe.chain(f),
                chain_b: self.chain(n),
            });
        }
        self.facts.insert(f, d);
        self.order.push(f);
        Ok(())
    }

    fn premise_holds(&self, p: &Premise) -> bool {
        match p {
            Local(f) => self.has(*f),
            Role(r, f) => self.roles.get(r).is_some_and(|e| e.facts.contains(f)),
            Check(c) => self.checks.contains_key(c),
        }
    }

    fn premise_label(&self, p: &Premise) -> String {
        match p {
            Local(f) => f.name().to_string(),
            Role(r, f) => {
                let g = self.roles.get(r).map_or("?", |e| e.germ.as_str());
                format!("{}:{}", g, f)
            }
            Check(c) => format!("check:{}", c),
        }
    }

    /// Closes the report under [`RULES`].
    pub fn derive(&mut self) -> Result<(), Contradiction> {
        loop {
            let mut changed = false;
            for r in RULES {
                if !r.premises.iter().all(|p| self.premise_holds(p)) {
                    continue;
                }
                for &c in r.conclusions {
                    if self.has(c) {
                        continue;
                    }
                    let inputs = r.premises.iter().map(|p| self.premise_label(p)).collect();
                    self.insert(c, Derivation { rule: r.id.into(), inputs })?;
                    changed = true;
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    /// Human-readable derivation chain, e.g. `condition_b <= ppp(thom_regular <= tma(hwc <= hwc_check))`.
    pub fn chain(&self, f: Fact) -> String {
        self.chain_depth(f, 0)
    }

    fn chain_depth(&self, f: Fact, depth: usize) -> String {
        let Some(d) = self.facts.get(&f) else {
            return f.name().to_string();
        };
        if d.inputs.is_empty() || depth > ALL_DEPTH {
            return format!("{} <= {}", f, d.rule);
        }
        let inner: Vec<String> = d
            .inputs
            .iter()
            .map(|i| match i.parse::<Fact>() {
                Ok(g) => self.chain_depth(g, depth + 1),
                Err(_) => i.clone(),
            })
            .collect();
        format!("{} <= {}({})", f, d.rule, inner.join(", "))
    }

    /// Replays every derivation: each rule exists, its premises hold and were
    /// recorded before the conclusion. Returns the first offending fact.
    pub fn replay(&self) -> Result<(), Fact> {
        let mut seen = BTreeSet::new();
        for &f in &self.order {
            let d = &self.facts[&f];
            let ok = match d.rule.as_str() {
                "declared" => self.declared.contains(&f),
                id => match rule(id) {
                    Some(r) => {
                        r.conclusions.contains(&f)
                            && r.premises.iter().all(|p| match p {
                                Local(g) => seen.contains(g),
                                _ => self.premise_holds(p),
                            })
                            && d.inputs.len() == r.premises.len()
                    }
                    // A verification check; base fact with no inputs.
                    None => d.inputs.is_empty(),
                },
            };
            if !ok {
                return Err(f);
            }
            seen.insert(f);
        }
        Ok(())
    }

    pub fn to_json(&self) -> ReportJson {
        ReportJson {
            germ: self.germ.clone(),
            facts: self.order.iter().map(|f| f.name().to_string()).collect(),
            provenance: self
                .order
                .iter()
                .map(|f| {
                    let d = &self.facts[f];
                    let mut v = vec![d.rule.clone()];
                    v.extend(d.inputs.iter().cloned());
                    (f.name().to_string(), v)
                })
                .collect(),
            declared: self.declared.iter().map(|f| f.name().to_string()).collect(),
            external: self
                .roles
                .iter()
                .map(|(r, e)| {
                    (
                        format!("{} ({})", r, e.germ),
                        e.facts.iter().map(|f| f.name().to_string()).collect(),
                    )
                })
                .collect(),
            checks: self.checks.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            residuals: self.residuals.clone(),
            notes: self.notes.clone(),
        }
    }
}

const ALL_DEPTH: usize = 32;

#[derive(Debug, Clone, Serialize)]
pub struct ReportJson {
    pub germ: String,
    pub facts: Vec<String>,
    pub provenance: BTreeMap<String, Vec<String>>,
    pub declared: Vec<String>,
    pub external: BTreeMap<String, Vec<String>>,
    pub checks: BTreeMap<String, String>,
    pub residuals: BTreeMap<String, String>,
    pub notes: Vec<String>,
}

impl fmt::Display for RegularityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "report for {}", self.germ)?;
        for &fact in &self.order {
            writeln!(f, "  {}", self.chain(fact))?;
        }
        for (k, v) in &self.residuals {
            writeln!(f, "  residual {}: {}", k, v)?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {}", n)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hwc_chain() {
        let mut r = RegularityReport::new("G");
        r.verify(Hwc, "hwc_check").unwrap();
        r.derive().unwrap();
        for f in [DiscZero, ThomRegular, ConditionB, TubeFibrationHypothesesMet] {
            assert!(r.has(f), "{f}");
        }
        assert_eq!(r.derivation(ThomRegular).unwrap().rule, "tma");
        assert_eq!(r.derivation(ConditionB).unwrap().rule, "ppp");
        assert!(r.replay().is_ok());
        assert_eq!(
            r.chain(TubeFibrationHypothesesMet),
            "tube_fibration_hypotheses_met <= ttf(disc_zero <= tma(hwc <= hwc_check), \
             condition_b <= ppp(thom_regular <= tma(hwc <= hwc_check)))"
        );
    }

    #[test]
    fn isolated_chain() {
        let mut r = RegularityReport::new("ex2");
        r.declare(IsolatedSingularity).unwrap();
        r.derive().unwrap();
        assert_eq!(r.derivation(ThomRegular).unwrap().rule, "ttr");
        assert!(r.has(ConditionB) && r.has(TubeFibrationHypothesesMet));
        assert!(r.replay().is_ok());
    }

    #[test]
    fn contrapositive_and_contradiction() {
        let mut r = RegularityReport::new("G");
        r.verify(NotConditionB, "probe").unwrap();
        r.derive().unwrap();
        assert_eq!(r.derivation(NotThomRegular).unwrap().rule, "ppp_contra");

        let mut r = RegularityReport::new("G");
        r.declare(ConditionB).unwrap();
        let e = r.verify(NotConditionB, "probe").unwrap_err();
        assert_eq!(e.fact, NotConditionB);

        let mut r = RegularityReport::new("G");
        r.verify(Hwc, "hwc_check").unwrap();
        r.verify(NotConditionB, "probe").unwrap();
        let e = r.derive().unwrap_err();
        assert!(e.to_string().contains("tma"), "{e}");
    }

    #[test]
    fn role_rules_need_every_premise() {
        let mut r = RegularityReport::new("H");
        r.add_role("F", "F", [ConditionB, DiscZero]);
        r.add_role("G", "G", [DiscZero]);
        r.derive().unwrap();
        assert!(!r.has(ConditionB));
        r.add_check("closure_condition", "verified");
        r.derive().unwrap();
        let d = r.derivation(ConditionB).unwrap();
        assert_eq!(d.rule, "tp");
        assert!(d.inputs.contains(&"F:condition_b".to_string()));
        assert!(r.replay().is_ok());
    }

    #[test]
    fn every_rule_is_reachable() {
        for rl in RULES {
            let mut r = RegularityReport::new("X");
            for p in rl.premises {
                match *p {
                    Local(f) => r.declare(f).unwrap(),
                    Role(role, f) => r.add_role(role, role, [f]),
                    Check(c) => r.add_check(c, ""),
                }
            }
            r.derive().unwrap();
            for c in rl.conclusions {
                assert!(r.has(*c), "{} -> {}", rl.id, c);
            }
            assert!(r.replay().is_ok());
        }
    }
}
