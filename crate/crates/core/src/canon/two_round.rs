//! Strategies with two rounds of cheap talk, and the equilibrium in which
//! only moderate types reveal their preference in the first round.

use crate::dist::TypeDistribution;
use crate::error::{config, ModelError, Result};
use crate::strategy::{labels, Cutoff, MessageFunction};

/// A two-round strategy.
///
/// The second-round rule may depend on the first-round message pair
/// (own message first). The action cutoff depends on the full history
/// `(r1, r1', r2, r2')`, again own message first.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoRoundStrategy {
    first_labels: Vec<String>,
    first: MessageFunction,
    second_labels: Vec<String>,
    second: Vec<MessageFunction>,
    actions: Vec<Cutoff>,
}

impl TwoRoundStrategy {
    /// `second[r1 * n1 + r1']` and `actions[((r1 * n1 + r1') * n2 + r2) * n2 + r2']`.
    pub fn new(
        first_labels: Vec<String>,
        first: MessageFunction,
        second_labels: Vec<String>,
        second: Vec<MessageFunction>,
        actions: Vec<Cutoff>,
    ) -> Result<Self> {
        let (n1, n2) = (first_labels.len(), second_labels.len());
        if first.len() != n1 {
            return config("first-round message function does not match its labels");
        }
        if second.len() != n1 * n1 || second.iter().any(|mf| mf.len() != n2) {
            return config("need one second-round rule per first-round pair, each over the second-round labels");
        }
        if actions.len() != n1 * n1 * n2 * n2 {
            return config("action table must cover every two-round history");
        }
        Ok(TwoRoundStrategy { first_labels, first, second_labels, second, actions })
    }

    pub fn first_labels(&self) -> &[String] {
        &self.first_labels
    }

    pub fn second_labels(&self) -> &[String] {
        &self.second_labels
    }

    pub fn first(&self) -> &MessageFunction {
        &self.first
    }

    pub fn n1(&self) -> usize {
        self.first_labels.len()
    }

    pub fn n2(&self) -> usize {
        self.second_labels.len()
    }

    pub fn second(&self, r1: usize, r1p: usize) -> &MessageFunction {
        &self.second[r1 * self.n1() + r1p]
    }

    pub fn action(&self, r1: usize, r1p: usize, r2: usize, r2p: usize) -> Cutoff {
        let (n1, n2) = (self.n1(), self.n2());
        self.actions[((r1 * n1 + r1p) * n2 + r2) * n2 + r2p]
    }

    /// Every type at which some rule of the strategy changes.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.first.cuts().to_vec();
        for mf in &self.second {
            b.extend_from_slice(mf.cuts());
        }
        b.extend(self.actions.iter().filter_map(|c| c.point()));
        b.push(0.5);
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// Probability that type `u` produces own messages `(r1, r2)` given the
    /// opponent's first message `r1p`.
    pub fn plan_prob(&self, u: f64, r1: usize, r1p: usize, r2: usize) -> f64 {
        self.first.prob(u, r1) * self.second(r1, r1p).prob(u, r2)
    }
}

/// Summary of an opponent population following a two-round strategy,
/// seen from the player's side.
#[derive(Debug, Clone)]
pub struct TwoRoundView {
    n1: usize,
    n2: usize,
    /// `[r1'][r2'][r1]`: probability of the opponent history given own `r1`.
    mass: Vec<f64>,
    /// `[r1'][r2'][r1][r2]`: same, jointly with the opponent playing L.
    left: Vec<f64>,
}

impl TwoRoundView {
    pub fn new(opp: &TwoRoundStrategy, dist: &TypeDistribution) -> Self {
        let (n1, n2) = (opp.n1(), opp.n2());
        let breaks = opp.breakpoints();
        let mut mass = vec![0.0; n1 * n2 * n1];
        let mut left = vec![0.0; n1 * n2 * n1 * n2];
        for r1p in 0..n1 {
            for r1 in 0..n1 {
                for r2p in 0..n2 {
                    let w = |v: f64| opp.plan_prob(v, r1p, r1, r2p);
                    let m = dist.expect(&breaks, w);
                    mass[(r1p * n2 + r2p) * n1 + r1] = m;
                    if m == 0.0 {
                        continue;
                    }
                    for r2 in 0..n2 {
                        let c = opp.action(r1p, r1, r2p, r2);
                        left[((r1p * n2 + r2p) * n1 + r1) * n2 + r2] = dist.expect(&breaks, |v| w(v) * c.left_prob(v));
                    }
                }
            }
        }
        TwoRoundView { n1, n2, mass, left }
    }

    pub fn mass(&self, r1p: usize, r2p: usize, r1: usize) -> f64 {
        self.mass[(r1p * self.n2 + r2p) * self.n1 + r1]
    }

    pub fn left(&self, r1p: usize, r2p: usize, r1: usize, r2: usize) -> f64 {
        self.left[((r1p * self.n2 + r2p) * self.n1 + r1) * self.n2 + r2]
    }

    /// Probability that the opponent plays L when own messages are
    /// `(r1, r2)` chosen after seeing `r1p`; summed over opponent round-two
    /// messages.
    fn left_after(&self, r1: usize, r1p: usize, r2: usize) -> f64 {
        (0..self.n2).map(|r2p| self.left(r1p, r2p, r1, r2)).sum()
    }
}

/// Payoff of type `u` following `sigma` against the summarized opponent.
pub fn interim(sigma: &TwoRoundStrategy, view: &TwoRoundView, u: f64) -> f64 {
    let (n1, n2) = (sigma.n1(), sigma.n2());
    let mut acc = 0.0;
    for r1 in 0..n1 {
        let p1 = sigma.first().prob(u, r1);
        if p1 == 0.0 {
            continue;
        }
        for r1p in 0..n1 {
            for r2 in 0..n2 {
                let p2 = sigma.second(r1, r1p).prob(u, r2);
                if p2 == 0.0 {
                    continue;
                }
                for r2p in 0..n2 {
                    let mass = view.mass(r1p, r2p, r1);
                    if mass == 0.0 {
                        continue;
                    }
                    let wl = view.left(r1p, r2p, r1, r2);
                    let a = sigma.action(r1, r1p, r2, r2p).left_prob(u);
                    acc += p1 * p2 * ((1.0 - u) * a * wl + u * (1.0 - a) * (mass - wl));
                }
            }
        }
    }
    acc
}

/// Best payoff type `u` can reach by any choice of messages and actions.
/// Returns the value and the best first-round message.
pub fn best_response(view: &TwoRoundView, u: f64) -> (f64, usize) {
    let mut best = (f64::NEG_INFINITY, 0);
    for r1 in 0..view.n1 {
        let mut total = 0.0;
        for r1p in 0..view.n1 {
            let mut best_r2 = f64::NEG_INFINITY;
            for r2 in 0..view.n2 {
                let mut v = 0.0;
                for r2p in 0..view.n2 {
                    let mass = view.mass(r1p, r2p, r1);
                    let wl = view.left(r1p, r2p, r1, r2);
                    v += ((1.0 - u) * wl).max(u * (mass - wl));
                }
                best_r2 = best_r2.max(v);
            }
            total += best_r2;
        }
        if total > best.0 {
            best = (total, r1);
        }
    }
    best
}

/// Ex-ante payoff of a symmetric two-round profile.
pub fn exante(sigma: &TwoRoundStrategy, dist: &TypeDistribution) -> f64 {
    let view = TwoRoundView::new(sigma, dist);
    dist.expect(&sigma.breakpoints(), |u| interim(sigma, &view, u))
}

/// Probability that the opponent plays L for a player of type `u`
/// following `sigma` (averaged over own randomization).
pub fn left_probability(sigma: &TwoRoundStrategy, view: &TwoRoundView, u: f64) -> f64 {
    let (n1, n2) = (sigma.n1(), sigma.n2());
    let mut acc = 0.0;
    for r1 in 0..n1 {
        for r1p in 0..n1 {
            for r2 in 0..n2 {
                let p = sigma.plan_prob(u, r1, r1p, r2);
                if p > 0.0 {
                    acc += p * view.left_after(r1, r1p, r2);
                }
            }
        }
    }
    acc
}

const FIRST: [&str; 3] = ["e", "m_L", "m_R"];
const SECOND: [&str; 7] = ["e", "m_L", "m_R", "m_L0", "m_L1", "m_R0", "m_R1"];

/// The two-round strategy where types up to `x` and above `1 - x` send `e`
/// and moderates reveal their side; see the module docs for the rest.
///
/// Second round: after `(e, e)` nothing is said; an extreme type facing a
/// moderate reveals its side; a moderate repeats its message unless it
/// faces the opposite moderate message, in which case both run the bit
/// lottery. Actions: an `e` sender plays its own inclination; a moderate
/// facing `e` goes with the extreme type's side unless both second-round
/// messages agree with its own; opposing moderates follow the bit lottery.
pub fn make_sigma_ex(x: f64) -> Result<TwoRoundStrategy> {
    if !(x > 0.0 && x < 0.5) {
        return Err(ModelError::Precondition(format!("threshold {x} must lie in (0, 1/2)")));
    }
    let (n1, n2) = (FIRST.len(), SECOND.len());
    let first = MessageFunction::new(
        vec![x, 0.5, 1.0 - x],
        vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]],
    )?;
    let hot = |i: usize| {
        let mut v = vec![0.0; n2];
        v[i] = 1.0;
        v
    };
    let reveal = MessageFunction::split(0.5, hot(1), hot(2))?;
    let bits = {
        let mut lo = vec![0.0; n2];
        lo[3] = 0.5;
        lo[4] = 0.5;
        let mut hi = vec![0.0; n2];
        hi[5] = 0.5;
        hi[6] = 0.5;
        MessageFunction::split(0.5, lo, hi)?
    };
    let (e, ml, mr) = (0usize, 1usize, 2usize);
    let mut second = Vec::with_capacity(n1 * n1);
    for r1 in 0..n1 {
        for r1p in 0..n1 {
            let rule = match (r1, r1p) {
                (0, 0) => MessageFunction::constant(n2, e)?,
                (0, _) => reveal.clone(),
                (1, 2) | (2, 1) => bits.clone(),
                (1, _) => MessageFunction::constant(n2, ml)?,
                _ => MessageFunction::constant(n2, mr)?,
            };
            second.push(rule);
        }
    }
    // Class and bit of a second-round label for the bit lottery; labels
    // outside the lottery are read as the matching bit-0 label.
    let class = |r2: usize| -> (bool, usize) {
        match r2 {
            4 => (true, 1),
            2 | 5 => (false, 0),
            6 => (false, 1),
            _ => (true, 0),
        }
    };
    let mut actions = Vec::with_capacity(n1 * n1 * n2 * n2);
    for r1 in 0..n1 {
        for r1p in 0..n1 {
            for r2 in 0..n2 {
                for r2p in 0..n2 {
                    let c = match (r1, r1p) {
                        (0, _) => Cutoff::at(0.5),
                        (1, 0) => {
                            if r2 == ml && r2p == ml {
                                Cutoff::AllL
                            } else {
                                Cutoff::AllR
                            }
                        }
                        (2, 0) => {
                            if r2 == mr && r2p == mr {
                                Cutoff::AllR
                            } else {
                                Cutoff::AllL
                            }
                        }
                        (1, 1) => Cutoff::AllL,
                        (2, 2) => Cutoff::AllR,
                        _ => {
                            let ((la, ba), (lb, bb)) = (class(r2), class(r2p));
                            match (la, lb) {
                                (true, true) => Cutoff::AllL,
                                (false, false) => Cutoff::AllR,
                                _ if ba != bb => Cutoff::AllL,
                                _ => Cutoff::AllR,
                            }
                        }
                    };
                    actions.push(c);
                }
            }
        }
    }
    TwoRoundStrategy::new(labels(&FIRST), first, labels(&SECOND), second, actions)
}

/// Indifference gap of the threshold type between sending `e` and
/// revealing its side: 1/4 - F(x)/2 - x/2.
pub fn sigma_ex_indifference(dist: &TypeDistribution, x: f64) -> f64 {
    0.25 - 0.5 * dist.cdf(x) - 0.5 * x
}

/// Threshold in (0, 1/2) that makes the two-round strategy an equilibrium
/// under a distribution symmetric about one half.
pub fn solve_sigma_ex_threshold(dist: &TypeDistribution) -> Result<f64> {
    if !dist.is_symmetric_about(0.5, 1e-9) {
        return Err(ModelError::Precondition("the distribution must be symmetric about 1/2".into()));
    }
    let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
    // The gap is 1/4 at 0 and at most -1/4 at 1/2 and strictly decreasing.
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if sigma_ex_indifference(dist, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform() -> TypeDistribution {
        TypeDistribution::uniform(0.0, 1.0).unwrap()
    }

    #[test]
    fn uniform_threshold_is_a_quarter() {
        let x = solve_sigma_ex_threshold(&uniform()).unwrap();
        assert!((x - 0.25).abs() < 1e-10);
        let skew = TypeDistribution::piecewise_linear(vec![(0.0, 0.0), (0.5, 0.8), (1.0, 1.0)]).unwrap();
        assert!(matches!(solve_sigma_ex_threshold(&skew), Err(ModelError::Precondition(_))));
    }

    #[test]
    fn endpoint_gaps() {
        let f = uniform();
        assert_eq!(sigma_ex_indifference(&f, 0.0), 0.25);
        assert_eq!(sigma_ex_indifference(&f, 0.5), -0.25);
    }

    #[test]
    fn extreme_pair_miscoordinates_half_the_time() {
        let s = make_sigma_ex(0.25).unwrap();
        let f = uniform();
        let view = TwoRoundView::new(&s, &f);
        // An extreme-left type facing another `e` sender: the opponent is
        // extreme left or extreme right with equal probability.
        let (e, r1) = (0, 0);
        let m = view.mass(e, 0, r1);
        let l = view.left(e, 0, r1, 0);
        assert!((m - 0.5).abs() < 1e-12);
        assert!((l / m - 0.5).abs() < 1e-12);
    }

    #[test]
    fn moderate_left_facing_extreme_coordinates_on_left_after_matching_reveal() {
        let s = make_sigma_ex(0.25).unwrap();
        assert_eq!(s.action(1, 0, 1, 1), Cutoff::AllL);
        assert_eq!(s.action(1, 0, 1, 2), Cutoff::AllR);
        assert_eq!(s.action(0, 1, 1, 1), Cutoff::at(0.5));
    }

    #[test]
    fn opposing_moderates_run_the_bit_lottery() {
        let s = make_sigma_ex(0.25).unwrap();
        let f = uniform();
        let view = TwoRoundView::new(&s, &f);
        // Own (m_L, m_L0) after opponent m_R: opponent moderates on the
        // right are (1/2, 3/4], mass 1/4, half of them send the other bit.
        let opp_left: f64 = (0..7).map(|r2p| view.left(2, r2p, 1, 3)).sum();
        let opp_mass: f64 = (0..7).map(|r2p| view.mass(2, r2p, 1)).sum();
        assert!((opp_mass - 0.25).abs() < 1e-12);
        assert!((opp_left / opp_mass - 0.5).abs() < 1e-12);
    }

    #[test]
    fn no_profitable_deviation_at_solved_threshold() {
        let f = uniform();
        let x = solve_sigma_ex_threshold(&f).unwrap();
        let s = make_sigma_ex(x).unwrap();
        let view = TwoRoundView::new(&s, &f);
        for i in 0..=200 {
            let u = i as f64 / 200.0;
            let gap = best_response(&view, u).0 - interim(&s, &view, u);
            assert!(gap < 1e-9, "type {u} gains {gap}");
        }
    }
}
