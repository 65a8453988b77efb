//! Named regularity facts tracked by reports and declarable from the DSL.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Fact {
    Hwc,
    DiscZero,
    ThomRegular,
    NotThomRegular,
    ConditionB,
    NotConditionB,
    IsolatedSingularity,
    NotIsolatedSingularity,
    /// `Sing G ∩ V_G ⊆ {0}`.
    SingVIsolated,
    NotSingVIsolated,
    TubeFibrationHypothesesMet,
    /// `V_G` has codimension `p`.
    CodimP,
    /// `Disc(f,g)` contains only curves tangent to the coordinate axes.
    DiscTangentAxes,
    /// The pair `(f, g)` is Thom regular.
    PairThomRegular,
    IrregularityWitness,
    WInvariantStratum,
    VEmptyInteriorInM,
    PositiveDimV,
    /// A single holomorphic function `ℂⁿ → ℂ`.
    Holomorphic,
}

pub const ALL_FACTS: [Fact; 19] = [
    Fact::Hwc,
    Fact::DiscZero,
    Fact::ThomRegular,
    Fact::NotThomRegular,
    Fact::ConditionB,
    Fact::NotConditionB,
    Fact::IsolatedSingularity,
    Fact::NotIsolatedSingularity,
    Fact::SingVIsolated,
    Fact::NotSingVIsolated,
    Fact::TubeFibrationHypothesesMet,
    Fact::CodimP,
    Fact::DiscTangentAxes,
    Fact::PairThomRegular,
    Fact::IrregularityWitness,
    Fact::WInvariantStratum,
    Fact::VEmptyInteriorInM,
    Fact::PositiveDimV,
    Fact::Holomorphic,
];

impl Fact {
    pub fn name(self) -> &'static str {
        match self {
            Fact::Hwc => "hwc",
            Fact::DiscZero => "disc_zero",
            Fact::ThomRegular => "thom_regular",
            Fact::NotThomRegular => "not_thom_regular",
            Fact::ConditionB => "condition_b",
            Fact::NotConditionB => "not_condition_b",
            Fact::IsolatedSingularity => "isolated_singularity",
            Fact::NotIsolatedSingularity => "not_isolated_singularity",
            Fact::SingVIsolated => "sing_v_isolated",
            Fact::NotSingVIsolated => "not_sing_v_isolated",
            Fact::TubeFibrationHypothesesMet => "tube_fibration_hypotheses_met",
            Fact::CodimP => "codim_p",
            Fact::DiscTangentAxes => "disc_tangent_axes",
            Fact::PairThomRegular => "pair_thom_regular",
            Fact::IrregularityWitness => "irregularity_witness",
            Fact::WInvariantStratum => "w_invariant_stratum",
            Fact::VEmptyInteriorInM => "v_empty_interior_in_m",
            Fact::PositiveDimV => "positive_dim_v",
            Fact::Holomorphic => "holomorphic",
        }
    }

    /// The contradictory fact, if any.
    pub fn negation(self) -> Option<Fact> {
        Some(match self {
            Fact::ThomRegular => Fact::NotThomRegular,
            Fact::NotThomRegular => Fact::ThomRegular,
            Fact::ConditionB => Fact::NotConditionB,
            Fact::NotConditionB => Fact::ConditionB,
            Fact::IsolatedSingularity => Fact::NotIsolatedSingularity,
            Fact::NotIsolatedSingularity => Fact::IsolatedSingularity,
            Fact::SingVIsolated => Fact::NotSingVIsolated,
            Fact::NotSingVIsolated => Fact::SingVIsolated,
            _ => return None,
        })
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Fact {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ALL_FACTS
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown fact `{}`", s))
    }
}

impl Serialize for Fact {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for f in ALL_FACTS {
            assert_eq!(f.name().parse::<Fact>().unwrap(), f);
            if let Some(n) = f.negation() {
                assert_eq!(n.negation(), Some(f));
            }
        }
        assert!("thom".parse::<Fact>().is_err());
    }
}
