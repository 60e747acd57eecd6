//! The three structural properties (mutual-preference consistency,
//! coordination, binary communication) and the left tendency.
//!
//! An action entry counts as "L" for the senders of a message when the mass
//! of senders that would play R there is at most [`MASS_TOL`], and
//! symmetrically for "R". Types at or below one half form the L side.

use serde::Serialize;

use crate::canon::two_round::{left_probability, TwoRoundStrategy, TwoRoundView};
use crate::dist::{TypeDistribution, MASS_TOL};
use crate::error::{ModelError, Result};
use crate::payoff::OpponentView;
use crate::strategy::Strategy;

/// Tolerance for comparing opponent L-probabilities across messages.
pub const BETA_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub mpc: bool,
    pub coordinated: bool,
    pub binary: bool,
    pub left_tendency: Option<f64>,
    pub beta_lo: f64,
    pub beta_hi: f64,
    /// Opponent L-probability for every message (or, for two-round
    /// strategies, every piece of the type partition).
    pub betas: Vec<(String, f64)>,
    /// Messages nobody sends.
    pub unused: Vec<String>,
    /// Binary communication judged on used messages only.
    pub binary_on_used: bool,
}

/// Per-message quantities shared by the checks.
struct MessageStats {
    view: OpponentView,
    low: Vec<f64>,
    high: Vec<f64>,
}

impl MessageStats {
    fn new(sigma: &Strategy, dist: &TypeDistribution) -> Self {
        let view = OpponentView::new(sigma, dist);
        let mut breaks = sigma.mu().cuts().to_vec();
        breaks.push(0.5);
        let n = sigma.len();
        let low = (0..n).map(|m| dist.expect(&breaks, |u| if u <= 0.5 { sigma.mu().prob(u, m) } else { 0.0 })).collect();
        let high = (0..n).map(|m| dist.expect(&breaks, |u| if u > 0.5 { sigma.mu().prob(u, m) } else { 0.0 })).collect();
        MessageStats { view, low, high }
    }

    fn used(&self, m: usize) -> bool {
        self.view.mass(m) > MASS_TOL
    }

    /// Every sender of `m` plays L after `(m, mp)`.
    fn all_left(&self, m: usize, mp: usize) -> bool {
        self.view.mass(m) - self.view.left(m, mp) <= MASS_TOL
    }

    fn all_right(&self, m: usize, mp: usize) -> bool {
        self.view.left(m, mp) <= MASS_TOL
    }
}

fn mpc_from(stats: &MessageStats, n: usize) -> bool {
    for m in 0..n {
        for mp in 0..n {
            if stats.low[m] > MASS_TOL && stats.low[mp] > MASS_TOL && !(stats.all_left(m, mp) && stats.all_left(mp, m)) {
                return false;
            }
            if stats.high[m] > MASS_TOL
                && stats.high[mp] > MASS_TOL
                && !(stats.all_right(m, mp) && stats.all_right(mp, m))
            {
                return false;
            }
        }
    }
    true
}

fn coordinated_from(stats: &MessageStats, n: usize) -> bool {
    for m in (0..n).filter(|&m| stats.used(m)) {
        for mp in (0..n).filter(|&mp| stats.used(mp)) {
            let left = stats.all_left(m, mp) && stats.all_left(mp, m);
            let right = stats.all_right(m, mp) && stats.all_right(mp, m);
            if !(left || right) {
                return false;
            }
        }
    }
    true
}

/// Whether the low-side messages reach the top opponent L-probability and
/// the high-side messages the bottom one, with the range taken over
/// `candidates`.
fn binary_pattern(betas: &[f64], low: &[bool], high: &[bool], candidates: &[usize]) -> (bool, f64, f64) {
    let lo = candidates.iter().map(|&m| betas[m]).fold(f64::INFINITY, f64::min);
    let hi = candidates.iter().map(|&m| betas[m]).fold(f64::NEG_INFINITY, f64::max);
    let ok = candidates.iter().all(|&m| {
        (!low[m] || (betas[m] - hi).abs() <= BETA_TOL) && (!high[m] || (betas[m] - lo).abs() <= BETA_TOL)
    });
    (ok, lo, hi)
}

pub fn is_mutual_preference_consistent(sigma: &Strategy, dist: &TypeDistribution) -> bool {
    mpc_from(&MessageStats::new(sigma, dist), sigma.len())
}

pub fn is_coordinated(sigma: &Strategy, dist: &TypeDistribution) -> bool {
    coordinated_from(&MessageStats::new(sigma, dist), sigma.len())
}

/// Binary-communication verdict together with the opponent L-probability
/// of every message.
pub fn has_binary_communication(sigma: &Strategy, dist: &TypeDistribution) -> (bool, Vec<(String, f64)>) {
    let stats = MessageStats::new(sigma, dist);
    let n = sigma.len();
    let betas: Vec<f64> = (0..n).map(|m| stats.view.left_total(m)).collect();
    let low: Vec<bool> = stats.low.iter().map(|&x| x > MASS_TOL).collect();
    let high: Vec<bool> = stats.high.iter().map(|&x| x > MASS_TOL).collect();
    let all: Vec<usize> = (0..n).collect();
    let (ok, _, _) = binary_pattern(&betas, &low, &high, &all);
    (ok, sigma.labels().iter().cloned().zip(betas).collect())
}

/// Probability of coordinating on L when one player is on the L side and
/// the other on the R side. Fails unless all three properties hold.
pub fn left_tendency(sigma: &Strategy, dist: &TypeDistribution) -> Result<f64> {
    let r = properties(sigma, dist);
    r.left_tendency.ok_or_else(|| {
        ModelError::UndefinedLeftTendency(format!(
            "properties do not all hold (mpc={}, coordinated={}, binary={})",
            r.mpc, r.coordinated, r.binary
        ))
    })
}

/// Conditional probability that a low-side and a high-side player both
/// play L, or `None` when one side has no mass.
pub fn disagreement_left_probability(sigma: &Strategy, dist: &TypeDistribution) -> Option<f64> {
    let n = sigma.len();
    let breaks = sigma.breakpoints();
    let side_left = |m: usize, mp: usize, low: bool| {
        let c = sigma.xi().get(m, mp);
        dist.expect(&breaks, |u| {
            if (u <= 0.5) == low {
                sigma.mu().prob(u, m) * c.left_prob(u)
            } else {
                0.0
            }
        })
    };
    let fl = dist.cdf(0.5);
    let fh = 1.0 - fl;
    if fl <= MASS_TOL || fh <= MASS_TOL {
        return None;
    }
    let mut acc = 0.0;
    for m in 0..n {
        for mp in 0..n {
            let a = side_left(m, mp, true);
            if a > 0.0 {
                acc += a * side_left(mp, m, false);
            }
        }
    }
    Some(acc / (fl * fh))
}

/// All property verdicts for a one-round strategy.
pub fn properties(sigma: &Strategy, dist: &TypeDistribution) -> PropertyReport {
    let stats = MessageStats::new(sigma, dist);
    let n = sigma.len();
    let mpc = mpc_from(&stats, n);
    let coordinated = coordinated_from(&stats, n);
    let betas: Vec<f64> = (0..n).map(|m| stats.view.left_total(m)).collect();
    let low: Vec<bool> = stats.low.iter().map(|&x| x > MASS_TOL).collect();
    let high: Vec<bool> = stats.high.iter().map(|&x| x > MASS_TOL).collect();
    let all: Vec<usize> = (0..n).collect();
    let used: Vec<usize> = (0..n).filter(|&m| stats.used(m)).collect();
    let (binary, beta_lo, beta_hi) = binary_pattern(&betas, &low, &high, &all);
    let (binary_on_used, _, _) = binary_pattern(&betas, &low, &high, &used);
    let left_tendency =
        if mpc && coordinated && binary { disagreement_left_probability(sigma, dist) } else { None };
    PropertyReport {
        mpc,
        coordinated,
        binary,
        left_tendency,
        beta_lo,
        beta_hi,
        betas: sigma.labels().iter().cloned().zip(betas).collect(),
        unused: (0..n).filter(|&m| !stats.used(m)).map(|m| sigma.labels()[m].clone()).collect(),
        binary_on_used,
    }
}

/// Whether low-side and high-side types never share a message.
pub fn is_ordinal_preference_revealing(sigma: &Strategy, dist: &TypeDistribution) -> bool {
    let stats = MessageStats::new(sigma, dist);
    (0..sigma.len()).all(|m| !(stats.low[m] > MASS_TOL && stats.high[m] > MASS_TOL))
        && stats.low.iter().any(|&x| x > MASS_TOL)
        && stats.high.iter().any(|&x| x > MASS_TOL)
}

/// Property verdicts for a two-round strategy. A "message" is a full
/// communication history for mutual-preference consistency and
/// coordination, and a piece of the type partition (a complete plan) for
/// binary communication.
pub fn two_round_properties(sigma: &TwoRoundStrategy, dist: &TypeDistribution) -> PropertyReport {
    let view = TwoRoundView::new(sigma, dist);
    let (n1, n2) = (sigma.n1(), sigma.n2());
    let breaks = sigma.breakpoints();
    // Side masses of the plan (r1, r2) chosen after seeing r1p.
    let side = |r1: usize, r1p: usize, r2: usize, low: bool| {
        dist.expect(&breaks, |u| if (u <= 0.5) == low { sigma.plan_prob(u, r1, r1p, r2) } else { 0.0 })
    };
    let mut mpc = true;
    let mut coordinated = true;
    for r1 in 0..n1 {
        for r1p in 0..n1 {
            for r2 in 0..n2 {
                for r2p in 0..n2 {
                    let own_mass = view.mass(r1, r2, r1p);
                    let opp_mass = view.mass(r1p, r2p, r1);
                    if own_mass <= MASS_TOL || opp_mass <= MASS_TOL {
                        continue;
                    }
                    let own_left = view.left(r1, r2, r1p, r2p);
                    let opp_left = view.left(r1p, r2p, r1, r2);
                    let all_l = own_mass - own_left <= MASS_TOL && opp_mass - opp_left <= MASS_TOL;
                    let all_r = own_left <= MASS_TOL && opp_left <= MASS_TOL;
                    if !(all_l || all_r) {
                        coordinated = false;
                    }
                    let both_low = side(r1, r1p, r2, true) > MASS_TOL && side(r1p, r1, r2p, true) > MASS_TOL;
                    let both_high = side(r1, r1p, r2, false) > MASS_TOL && side(r1p, r1, r2p, false) > MASS_TOL;
                    if (both_low && !all_l) || (both_high && !all_r) {
                        mpc = false;
                    }
                }
            }
        }
    }
    // One representative type per piece of the partition that carries mass.
    let (lo, hi) = dist.support_hull();
    let mut pts = vec![lo];
    pts.extend(breaks.iter().copied().filter(|&b| b > lo && b < hi));
    pts.push(hi);
    let mut reps: Vec<f64> = Vec::new();
    if dist.is_atomic() {
        reps.extend(dist.atom_list().iter().map(|a| a.0));
    } else {
        reps.extend(pts.windows(2).filter(|w| dist.cdf(w[1]) - dist.cdf(w[0]) > MASS_TOL).map(|w| 0.5 * (w[0] + w[1])));
    }
    let betas: Vec<(String, f64)> =
        reps.iter().map(|&u| (format!("plan@{u:.6}"), left_probability(sigma, &view, u))).collect();
    // Best and worst reachable opponent L-probability over all pure plans.
    let mut reach_hi = f64::NEG_INFINITY;
    let mut reach_lo = f64::INFINITY;
    for r1 in 0..n1 {
        let mut best = 0.0;
        let mut worst = 0.0;
        for r1p in 0..n1 {
            let vals: Vec<f64> =
                (0..n2).map(|r2| (0..n2).map(|r2p| view.left(r1p, r2p, r1, r2)).sum::<f64>()).collect();
            best += vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            worst += vals.iter().copied().fold(f64::INFINITY, f64::min);
        }
        reach_hi = reach_hi.max(best);
        reach_lo = reach_lo.min(worst);
    }
    let binary = reps.iter().zip(betas.iter()).all(|(&u, (_, b))| {
        if u <= 0.5 {
            (b - reach_hi).abs() <= BETA_TOL
        } else {
            (b - reach_lo).abs() <= BETA_TOL
        }
    });
    PropertyReport {
        mpc,
        coordinated,
        binary,
        left_tendency: None,
        beta_lo: reach_lo,
        beta_hi: reach_hi,
        betas,
        unused: Vec::new(),
        binary_on_used: binary,
    }
}
