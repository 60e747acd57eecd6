//! Strategies of the game with one round of cheap talk.
//!
//! A strategy pairs a message function (type to distribution over message
//! labels) with an action table giving, for every ordered message pair, the
//! cutoff type up to which a player chooses L.

use crate::dist::{StepFn, TypeDistribution};
use crate::error::{config, ModelError, Result};

/// Action rule after a message pair: play L iff the own type is at most
/// the cutoff.
///
/// `At` carries the probability of L for a type exactly at the cutoff.
/// Under continuous distributions that probability is payoff irrelevant;
/// under atoms it is part of the strategy and lets an atom mix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cutoff {
    AllL,
    AllR,
    At { x: f64, tie_left: f64 },
}

impl Cutoff {
    /// Cutoff at `x` with ties playing L.
    pub fn at(x: f64) -> Self {
        Cutoff::At { x, tie_left: 1.0 }
    }

    /// Probability that type `u` plays L.
    pub fn left_prob(self, u: f64) -> f64 {
        match self {
            Cutoff::AllL => 1.0,
            Cutoff::AllR => 0.0,
            Cutoff::At { x, tie_left } => {
                if u < x {
                    1.0
                } else if u > x {
                    0.0
                } else {
                    tie_left
                }
            }
        }
    }

    pub fn point(self) -> Option<f64> {
        match self {
            Cutoff::At { x, .. } => Some(x),
            _ => None,
        }
    }

    /// Numeric representative given the support hull of the players who
    /// use it: `AllL` maps to the top of the hull and `AllR` to the bottom.
    pub fn as_number(self, hull: (f64, f64)) -> f64 {
        match self {
            Cutoff::AllL => hull.1,
            Cutoff::AllR => hull.0,
            Cutoff::At { x, .. } => x,
        }
    }
}

/// Type-dependent distribution over message indices.
///
/// Row `j` of `probs` applies on `(cuts[j-1], cuts[j]]`; the outer pieces
/// are unbounded, so the function is defined for every real type.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageFunction {
    cuts: Vec<f64>,
    probs: Vec<Vec<f64>>,
}

impl MessageFunction {
    pub fn new(cuts: Vec<f64>, probs: Vec<Vec<f64>>) -> Result<Self> {
        if probs.len() != cuts.len() + 1 {
            return config(format!("message function needs {} pieces, got {}", cuts.len() + 1, probs.len()));
        }
        if cuts.windows(2).any(|w| !(w[0] < w[1])) || cuts.iter().any(|c| !c.is_finite()) {
            return config("message function cuts must be finite and strictly increasing");
        }
        let n = probs[0].len();
        if n < 2 {
            return config("a message set needs at least two labels");
        }
        for (j, row) in probs.iter().enumerate() {
            if row.len() != n {
                return config(format!("piece {j} has {} entries, expected {n}", row.len()));
            }
            if row.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                return config(format!("piece {j} has a negative or non-finite probability"));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return config(format!("piece {j} sums to {s}, not 1"));
            }
        }
        Ok(MessageFunction { cuts, probs })
    }

    /// Every type sends message `m` out of `n`.
    pub fn constant(n: usize, m: usize) -> Result<Self> {
        let mut row = vec![0.0; n];
        if m >= n {
            return config("message index out of range");
        }
        row[m] = 1.0;
        Self::new(Vec::new(), vec![row])
    }

    /// Types at or below `x` use `low`, types above use `high`.
    pub fn split(x: f64, low: Vec<f64>, high: Vec<f64>) -> Result<Self> {
        Self::new(vec![x], vec![low, high])
    }

    pub fn len(&self) -> usize {
        self.probs[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }

    pub fn pieces(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn row(&self, u: f64) -> &[f64] {
        &self.probs[self.cuts.partition_point(|&c| c < u)]
    }

    pub fn prob(&self, u: f64, m: usize) -> f64 {
        self.row(u)[m]
    }

    /// Probability of sending `m` as a function of type.
    pub fn column(&self, m: usize) -> StepFn {
        StepFn::new(self.cuts.clone(), self.probs.iter().map(|r| r[m]).collect())
            .expect("cuts validated at construction")
    }

    /// Ex-ante probability of `m` under `dist`.
    pub fn mean_prob(&self, dist: &TypeDistribution, m: usize) -> f64 {
        dist.expect(&self.cuts, |u| self.prob(u, m))
    }

    /// Same function with message `i` renamed to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let probs = self
            .probs
            .iter()
            .map(|row| {
                let mut out = vec![0.0; row.len()];
                for (i, &p) in row.iter().enumerate() {
                    out[perm[i]] = p;
                }
                out
            })
            .collect();
        MessageFunction { cuts: self.cuts.clone(), probs }
    }
}

/// Dense table of cutoffs indexed by (own message, opponent message).
#[derive(Debug, Clone, PartialEq)]
pub struct ActionTable {
    n: usize,
    entries: Vec<Cutoff>,
}

impl ActionTable {
    pub fn filled(n: usize, c: Cutoff) -> Self {
        ActionTable { n, entries: vec![c; n * n] }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Cutoff) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for m in 0..n {
            for mp in 0..n {
                entries.push(f(m, mp));
            }
        }
        ActionTable { n, entries }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, m: usize, mp: usize) -> Cutoff {
        self.entries[m * self.n + mp]
    }

    pub fn set(&mut self, m: usize, mp: usize, c: Cutoff) {
        self.entries[m * self.n + mp] = c;
    }

    pub fn cutoff_points(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().filter_map(|c| c.point())
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut out = self.clone();
        for m in 0..self.n {
            for mp in 0..self.n {
                out.set(perm[m], perm[mp], self.get(m, mp));
            }
        }
        out
    }
}

/// A strategy: message labels, message function and action table.
#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    labels: Vec<String>,
    mu: MessageFunction,
    xi: ActionTable,
}

impl Strategy {
    pub fn new(labels: Vec<String>, mu: MessageFunction, xi: ActionTable) -> Result<Self> {
        if labels.len() != mu.len() || labels.len() != xi.len() {
            return config(format!(
                "message set has {} labels but the message function covers {} and the action table {}",
                labels.len(),
                mu.len(),
                xi.len()
            ));
        }
        let mut sorted = labels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != labels.len() {
            return config("message labels must be distinct");
        }
        Ok(Strategy { labels, mu, xi })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn mu(&self) -> &MessageFunction {
        &self.mu
    }

    pub fn xi(&self) -> &ActionTable {
        &self.xi
    }

    pub fn xi_mut(&mut self) -> &mut ActionTable {
        &mut self.xi
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| ModelError::Config(format!("unknown message label `{label}`")))
    }

    pub fn with_mu(&self, mu: MessageFunction) -> Result<Self> {
        Strategy::new(self.labels.clone(), mu, self.xi.clone())
    }

    pub fn with_xi(&self, xi: ActionTable) -> Result<Self> {
        Strategy::new(self.labels.clone(), self.mu.clone(), xi)
    }

    /// Type values at which the payoff of this strategy can change slope
    /// or jump: message-function cuts, cutoff points and one half.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.mu.cuts().to_vec();
        b.extend(self.xi.cutoff_points());
        b.push(0.5);
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// Ensure two strategies use the same labels in the same order.
    pub fn check_compatible(&self, other: &Strategy) -> Result<()> {
        if self.labels != other.labels {
            return config("strategies use different message sets");
        }
        Ok(())
    }

    /// Same strategy with message `i` renamed to label slot `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.len() {
            return config("permutation length mismatch");
        }
        let mut labels = vec![String::new(); self.len()];
        for (i, l) in self.labels.iter().enumerate() {
            labels[perm[i]] = l.clone();
        }
        Strategy::new(labels, self.mu.permuted(perm), self.xi.permuted(perm))
    }

    /// Same strategy under fresh labels (used when a candidate is placed in
    /// a renegotiation stage with its own message set).
    pub fn relabeled(&self, labels: Vec<String>) -> Result<Self> {
        Strategy::new(labels, self.mu.clone(), self.xi.clone())
    }
}

/// Payoff family of a game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Baseline,
    Multidimensional,
    NPlayer,
    MultiAction,
    ExtremeTypes,
}

/// Players, per-seat type distributions, message set and action count.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSpec {
    pub family: Family,
    pub seats: Vec<TypeDistribution>,
    pub messages: Vec<String>,
    pub players: usize,
    pub actions: usize,
}

impl GameSpec {
    pub fn new(
        family: Family,
        seats: Vec<TypeDistribution>,
        messages: Vec<String>,
        players: usize,
        actions: usize,
    ) -> Result<Self> {
        if players < 2 {
            return config("a game needs at least two players");
        }
        if actions < 2 {
            return config("a game needs at least two actions");
        }
        if seats.is_empty() || (seats.len() != 1 && seats.len() != players) {
            return config("give one distribution shared by all seats or one per seat");
        }
        if messages.len() < 2 {
            return config("a message set needs at least two labels");
        }
        let (lo, hi) = (seats[0].lower(), seats[0].upper());
        if seats.iter().any(|s| s.lower() != lo || s.upper() != hi) {
            return config("seat distributions must share the support bounds");
        }
        if family == Family::ExtremeTypes && !(lo < 0.0 && hi > 1.0) {
            return config("the extreme-types family needs support bounds a < 0 < 1 < b");
        }
        Ok(GameSpec { family, seats, messages, players, actions })
    }

    /// The distribution of seat `i`.
    pub fn seat(&self, i: usize) -> &TypeDistribution {
        if self.seats.len() == 1 {
            &self.seats[0]
        } else {
            &self.seats[i]
        }
    }
}

/// Convenience: owned labels from string slices.
pub fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_semantics() {
        assert_eq!(Cutoff::at(0.5).left_prob(0.5), 1.0);
        assert_eq!(Cutoff::at(0.5).left_prob(0.51), 0.0);
        assert_eq!(Cutoff::At { x: 0.5, tie_left: 0.25 }.left_prob(0.5), 0.25);
        assert_eq!(Cutoff::AllL.left_prob(7.0), 1.0);
        assert_eq!(Cutoff::AllR.left_prob(-7.0), 0.0);
    }

    #[test]
    fn message_function_validation() {
        assert!(MessageFunction::new(vec![0.5], vec![vec![1.0, 0.0]]).is_err());
        assert!(MessageFunction::new(vec![], vec![vec![0.5, 0.6]]).is_err());
        assert!(MessageFunction::new(vec![], vec![vec![1.0]]).is_err());
        let mu = MessageFunction::split(0.5, vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
        assert_eq!(mu.prob(0.5, 0), 1.0);
        assert_eq!(mu.prob(0.500001, 1), 1.0);
    }

    #[test]
    fn strategy_rejects_mismatch() {
        let mu = MessageFunction::constant(2, 0).unwrap();
        let xi = ActionTable::filled(3, Cutoff::AllL);
        assert!(Strategy::new(labels(&["a", "b"]), mu.clone(), xi).is_err());
        let xi = ActionTable::filled(2, Cutoff::AllL);
        assert!(Strategy::new(labels(&["a", "a"]), mu, xi).is_err());
    }

    #[test]
    fn permutation_round_trip() {
        let mu = MessageFunction::split(0.5, vec![1.0, 0.0, 0.0], vec![0.0, 0.3, 0.7]).unwrap();
        let xi = ActionTable::from_fn(3, |a, b| if a == b { Cutoff::AllL } else { Cutoff::at(0.1 * (a + b) as f64) });
        let s = Strategy::new(labels(&["x", "y", "z"]), mu, xi).unwrap();
        let p = s.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p.labels(), &["y", "z", "x"]);
        assert_eq!(p.xi().get(2, 0), s.xi().get(0, 1));
        assert_eq!(p.mu().prob(0.9, 1), s.mu().prob(0.9, 2));
    }

    #[test]
    fn game_spec_guards() {
        let u = TypeDistribution::uniform(0.0, 1.0).unwrap();
        assert!(GameSpec::new(Family::Baseline, vec![u.clone()], labels(&["a", "b"]), 1, 2).is_err());
        assert!(GameSpec::new(Family::Baseline, vec![u.clone()], labels(&["a", "b"]), 2, 2).is_ok());
        assert!(GameSpec::new(Family::ExtremeTypes, vec![u], labels(&["a", "b"]), 2, 2).is_err());
    }
}
