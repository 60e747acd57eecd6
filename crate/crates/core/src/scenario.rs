//! JSON scenario files: a game block, optional strategy blocks and
//! command parameters.
//!
//! ```json
//! {
//!   "game": {
//!     "family": "baseline",
//!     "messages": ["m_L", "m_R"],
//!     "distributions": [{ "kind": "piecewise_linear", "knots": [[0, 0], [1, 1]] }]
//!   },
//!   "strategy": { "kind": "builtin", "name": "sigma_alpha", "k": 2, "n": 5 },
//!   "params": { "grid": 201, "tol": 1e-9 }
//! }
//! ```
//!
//! Cutoffs are written as `"ALL_L"`, `"ALL_R"`, a decimal string such as
//! `"0.25"`, or `{ "at": "0.25", "tie_left": "0.5" }` when ties mix.
//! Unknown keys are rejected everywhere.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::canon;
use crate::dist::{DistKind, TypeDistribution};
use crate::error::{ModelError, Result};
use crate::strategy::{ActionTable, Cutoff, Family, GameSpec, MessageFunction, Strategy};

fn decimal(x: f64) -> String {
    format!("{x}")
}

fn parse_decimal<E: serde::de::Error>(s: &str) -> std::result::Result<f64, E> {
    let x: f64 = s.trim().parse().map_err(|_| E::custom(format!("`{s}` is not a decimal number")))?;
    if !x.is_finite() {
        return Err(E::custom(format!("`{s}` is not finite")));
    }
    Ok(x)
}

/// Serde form of a [`Cutoff`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffRepr(pub Cutoff);

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CutoffWire {
    Word(String),
    Tied(TiedWire),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TiedWire {
    at: String,
    tie_left: String,
}

impl Serialize for CutoffRepr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let wire = match self.0 {
            Cutoff::AllL => CutoffWire::Word("ALL_L".into()),
            Cutoff::AllR => CutoffWire::Word("ALL_R".into()),
            Cutoff::At { x, tie_left } if tie_left == 1.0 => CutoffWire::Word(decimal(x)),
            Cutoff::At { x, tie_left } => CutoffWire::Tied(TiedWire { at: decimal(x), tie_left: decimal(tie_left) }),
        };
        wire.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CutoffRepr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = CutoffWire::deserialize(d)
            .map_err(|_| D::Error::custom("a cutoff is \"ALL_L\", \"ALL_R\", a decimal string or {at, tie_left}"))?;
        Ok(CutoffRepr(match wire {
            CutoffWire::Word(w) if w == "ALL_L" => Cutoff::AllL,
            CutoffWire::Word(w) if w == "ALL_R" => Cutoff::AllR,
            CutoffWire::Word(w) => Cutoff::at(parse_decimal(&w)?),
            CutoffWire::Tied(t) => {
                let tie_left = parse_decimal(&t.tie_left)?;
                if !(0.0..=1.0).contains(&tie_left) {
                    return Err(D::Error::custom("tie_left must lie in [0, 1]"));
                }
                Cutoff::At { x: parse_decimal(&t.at)?, tie_left }
            }
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    Atoms {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lower: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        upper: Option<f64>,
        atoms: Vec<(f64, f64)>,
    },
    PiecewiseLinear { knots: Vec<(f64, f64)> },
}

impl DistributionSpec {
    pub fn build(&self) -> Result<TypeDistribution> {
        match self {
            DistributionSpec::Atoms { lower, upper, atoms } => {
                let lo = lower.unwrap_or_else(|| atoms.iter().map(|a| a.0).fold(0.0, f64::min));
                let hi = upper.unwrap_or_else(|| atoms.iter().map(|a| a.0).fold(1.0, f64::max));
                TypeDistribution::atoms(lo, hi, atoms.clone())
            }
            DistributionSpec::PiecewiseLinear { knots } => TypeDistribution::piecewise_linear(knots.clone()),
        }
    }

    pub fn from_dist(d: &TypeDistribution) -> Self {
        match d.kind() {
            DistKind::Atoms => DistributionSpec::Atoms {
                lower: Some(d.lower()),
                upper: Some(d.upper()),
                atoms: d.atom_list().to_vec(),
            },
            DistKind::PiecewiseLinear => DistributionSpec::PiecewiseLinear { knots: d.knot_list().to_vec() },
        }
    }
}

fn default_players() -> usize {
    2
}

fn default_actions() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameBlock {
    pub family: Family,
    #[serde(default = "default_players")]
    pub players: usize,
    #[serde(default = "default_actions")]
    pub actions: usize,
    pub messages: Vec<String>,
    /// One shared distribution, or one per seat.
    pub distributions: Vec<DistributionSpec>,
}

impl GameBlock {
    pub fn build(&self) -> Result<GameSpec> {
        let seats = self.distributions.iter().map(DistributionSpec::build).collect::<Result<Vec<_>>>()?;
        GameSpec::new(self.family, seats, self.messages.clone(), self.players, self.actions)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MessageFunctionSpec {
    #[serde(default)]
    pub cuts: Vec<f64>,
    pub pieces: Vec<Vec<f64>>,
}

/// Constructors available by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinName {
    SigmaL,
    SigmaR,
    SigmaC,
    SigmaAlpha,
    Babbling,
    Extreme,
    Example1Miscoordination,
    SplitLeft,
    PartialCoordination,
    AlwaysLeft,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StrategySpec {
    Builtin {
        name: BuiltinName,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff: Option<CutoffRepr>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<f64>,
        /// Message labels to build over instead of the default ones.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
    Explicit {
        labels: Vec<String>,
        message_function: MessageFunctionSpec,
        /// `actions[m][m']` is the cutoff after own message `m` and
        /// opponent message `m'`.
        actions: Vec<Vec<CutoffRepr>>,
    },
}

fn need(v: Option<usize>, what: &str) -> Result<usize> {
    v.ok_or_else(|| ModelError::Config(format!("builtin strategy needs `{what}`")))
}

impl StrategySpec {
    /// Build the strategy; `dist` is used by constructors that depend on
    /// the type distribution.
    pub fn build(&self, dist: &TypeDistribution) -> Result<Strategy> {
        match self {
            StrategySpec::Builtin { name, k, n, cutoff, epsilon, labels } => {
                let eps = epsilon.unwrap_or(0.01);
                match (name, labels.clone()) {
                    (BuiltinName::SigmaL, None) => Ok(canon::make_sigma_l()),
                    (BuiltinName::SigmaL, Some(l)) => canon::make_sigma_l_in(l),
                    (BuiltinName::SigmaR, None) => Ok(canon::make_sigma_r()),
                    (BuiltinName::SigmaR, Some(l)) => canon::make_sigma_r_in(l),
                    (BuiltinName::SigmaC, None) => Ok(canon::make_sigma_c()),
                    (BuiltinName::SigmaC, Some(l)) => canon::make_sigma_c_in(l),
                    (BuiltinName::SigmaAlpha, None) => canon::make_sigma_alpha(need(*k, "k")?, need(*n, "n")?),
                    (BuiltinName::SigmaAlpha, Some(l)) => canon::make_sigma_alpha_in(need(*k, "k")?, need(*n, "n")?, l),
                    (BuiltinName::Babbling, _) => {
                        let c = cutoff.ok_or_else(|| ModelError::Config("babbling needs `cutoff`".into()))?;
                        Ok(canon::make_babbling(c.0))
                    }
                    (BuiltinName::Extreme, _) => crate::ext::extreme::extreme_strategy(dist),
                    (BuiltinName::Example1Miscoordination, _) => canon::example1_miscoordination(eps),
                    (BuiltinName::SplitLeft, _) => Ok(canon::make_split_left_fixture()),
                    (BuiltinName::PartialCoordination, _) => Ok(canon::make_partial_coordination_fixture()),
                    (BuiltinName::AlwaysLeft, _) => Ok(canon::make_always_left_fixture()),
                }
            }
            StrategySpec::Explicit { labels, message_function, actions } => {
                let mu = MessageFunction::new(message_function.cuts.clone(), message_function.pieces.clone())?;
                let n = labels.len();
                if actions.len() != n || actions.iter().any(|r| r.len() != n) {
                    return Err(ModelError::Config(format!("action table must be {n} x {n}")));
                }
                let xi = ActionTable::from_fn(n, |m, mp| actions[m][mp].0);
                Strategy::new(labels.clone(), mu, xi)
            }
        }
    }

    pub fn from_strategy(s: &Strategy) -> Self {
        let n = s.len();
        StrategySpec::Explicit {
            labels: s.labels().to_vec(),
            message_function: MessageFunctionSpec { cuts: s.mu().cuts().to_vec(), pieces: s.mu().pieces().to_vec() },
            actions: (0..n).map(|m| (0..n).map(|mp| CutoffRepr(s.xi().get(m, mp))).collect()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub game: GameBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<StrategySpec>,
    /// Strategy of the other seat, when it differs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opponent_strategy: Option<StrategySpec>,
    #[serde(default)]
    pub params: Params,
}

impl Scenario {
    /// Parse a scenario. Errors carry the line, column and offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| ModelError::Config(format!("scenario: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario types serialize")
    }

    /// The game and the strategies of both seats. A missing opponent
    /// strategy means the symmetric profile.
    pub fn resolve(&self) -> Result<(GameSpec, Option<(Strategy, Strategy)>)> {
        let game = self.game.build()?;
        let profile = match &self.strategy {
            None => None,
            Some(spec) => {
                let own = spec.build(game.seat(0))?;
                let opp = match &self.opponent_strategy {
                    Some(o) => o.build(game.seat(1))?,
                    None => own.clone(),
                };
                own.check_compatible(&opp)?;
                Some((own, opp))
            }
        };
        Ok((game, profile))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "game": {
            "family": "baseline",
            "messages": ["m_L", "m_R"],
            "distributions": [{ "kind": "piecewise_linear", "knots": [[0, 0], [1, 1]] }]
        },
        "strategy": {
            "kind": "explicit",
            "labels": ["m_L", "m_R"],
            "message_function": { "cuts": [0.5], "pieces": [[1, 0], [0, 1]] },
            "actions": [["ALL_L", "ALL_L"], ["ALL_L", {"at": "0.25", "tie_left": "0.5"}]]
        },
        "params": { "grid": 11 }
    }"#;

    #[test]
    fn parse_and_round_trip() {
        let s = Scenario::from_json(SAMPLE).unwrap();
        let again = Scenario::from_json(&s.to_json()).unwrap();
        assert_eq!(s, again);
        let (game, profile) = s.resolve().unwrap();
        assert_eq!(game.players, 2);
        let (own, _) = profile.unwrap();
        assert_eq!(own.xi().get(1, 1), Cutoff::At { x: 0.25, tie_left: 0.5 });
        assert_eq!(own.mu().prob(0.3, 0), 1.0);
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_location() {
        let bad = SAMPLE.replace("\"grid\"", "\"gird\"");
        let e = Scenario::from_json(&bad).unwrap_err().to_string();
        assert!(e.contains("gird") && e.contains("line"), "{e}");
        let bad = SAMPLE.replace("\"cuts\"", "\"cutz\"");
        assert!(Scenario::from_json(&bad).is_err());
        let bad = SAMPLE.replace("\"ALL_L\", \"ALL_L\"", "\"ALL_L\", \"LEFT\"");
        assert!(Scenario::from_json(&bad).is_err());
    }

    #[test]
    fn cutoff_strings() {
        for c in [Cutoff::AllL, Cutoff::AllR, Cutoff::at(0.1), Cutoff::at(1.0 / 3.0), Cutoff::At { x: 0.7, tie_left: 0.3 }] {
            let text = serde_json::to_string(&CutoffRepr(c)).unwrap();
            let back: CutoffRepr = serde_json::from_str(&text).unwrap();
            assert_eq!(back.0, c, "{text}");
        }
        assert_eq!(serde_json::to_string(&CutoffRepr(Cutoff::at(0.25))).unwrap(), "\"0.25\"");
    }

    #[test]
    fn builtins_and_explicit_forms_agree() {
        let u = TypeDistribution::uniform(0.0, 1.0).unwrap();
        let spec = StrategySpec::Builtin { name: BuiltinName::SigmaAlpha, k: Some(2), n: Some(5), cutoff: None, epsilon: None, labels: None };
        let s = spec.build(&u).unwrap();
        let explicit = StrategySpec::from_strategy(&s);
        let text = serde_json::to_string(&explicit).unwrap();
        let back: StrategySpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back.build(&u).unwrap(), s);
        let missing = StrategySpec::Builtin { name: BuiltinName::SigmaAlpha, k: None, n: Some(5), cutoff: None, epsilon: None, labels: None };
        assert!(missing.build(&u).is_err());
    }

    #[test]
    fn distribution_round_trip() {
        let d = canon::example1_distribution(0.01).unwrap();
        let spec = DistributionSpec::from_dist(&d);
        let text = serde_json::to_string(&spec).unwrap();
        let back: DistributionSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back.build().unwrap(), d);
    }
}
