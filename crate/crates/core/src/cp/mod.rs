//! Renegotiation after messages: post-communication payoffs, the search for
//! profitable joint deviations (trumps), communication-proofness verdicts
//! and the equivalence check against the structural properties.
//!
//! Every positive-probability message pair of a strategy leaves the two
//! players in a [`Situation`]: each side's posterior type distribution and
//! the cutoff it is about to play. A candidate profile trumps the situation
//! when it is an equilibrium of the game between the two posteriors and no
//! posterior type loses while a set of types of mass at least
//! [`CpConfig::strict_mass`] gains.
//!
//! For continuous distributions the search covers a fixed candidate
//! family, so "no trump" is relative to that family. For atom posteriors
//! the family includes every equilibrium of the induced no-communication
//! game.

pub mod efficiency;
pub mod finite;

use serde::Serialize;

use crate::canon::{self, TwoRoundStrategy};
use crate::dist::{StepFn, TypeDistribution};
use crate::equil::{self, enumerate_induced_equilibria, InducedGame};
use crate::error::{ModelError, Result};
use crate::ext::multidim::PayoffMatrixType;
use crate::payoff::{interim_with_view, posterior_index, stage_payoff, OpponentView};
use crate::props;
use crate::strategy::{Cutoff, Strategy};

/// Search settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CpConfig {
    /// Evenly spaced evaluation types per posterior (continuous case).
    pub grid: usize,
    /// Payoff tolerance for equilibrium checks and weak improvement.
    pub tol: f64,
    /// Posterior mass of strictly improving types required for a trump.
    pub strict_mass: f64,
    /// Denominator of the modular-lottery candidates.
    pub alpha_denominator: usize,
}

impl Default for CpConfig {
    fn default() -> Self {
        CpConfig { grid: 101, tol: 1e-9, strict_mass: 1e-6, alpha_denominator: 8 }
    }
}

const PROBE: f64 = 1e-7;

/// The state of play after a message pair, seen from the player who sent
/// `own_message`.
#[derive(Debug, Clone, PartialEq)]
pub struct Situation {
    pub own_message: String,
    pub opp_message: String,
    pub own: TypeDistribution,
    pub opp: TypeDistribution,
    pub own_cut: Cutoff,
    pub opp_cut: Cutoff,
}

impl Situation {
    /// Continuation payoff of an own-side type `u`.
    pub fn own_payoff(&self, u: f64) -> f64 {
        stage_payoff(u, self.own_cut.left_prob(u), self.opp.prob_left(self.opp_cut))
    }

    /// Continuation payoff of an opponent-side type `v`.
    pub fn opp_payoff(&self, v: f64) -> f64 {
        stage_payoff(v, self.opp_cut.left_prob(v), self.own.prob_left(self.own_cut))
    }

    fn swapped(&self) -> Situation {
        Situation {
            own_message: self.opp_message.clone(),
            opp_message: self.own_message.clone(),
            own: self.opp.clone(),
            opp: self.own.clone(),
            own_cut: self.opp_cut,
            opp_cut: self.own_cut,
        }
    }
}

/// Post-communication payoff of type `u` who sent `m` (under `sigma`)
/// against an opponent who sent `mp` (under `sigma_prime`, types from
/// `opp_dist`).
pub fn post_comm_payoff(
    sigma: &Strategy,
    sigma_prime: &Strategy,
    m: &str,
    mp: &str,
    u: f64,
    opp_dist: &TypeDistribution,
) -> Result<f64> {
    sigma.check_compatible(sigma_prime)?;
    let (i, j) = (sigma.index_of(m)?, sigma_prime.index_of(mp)?);
    let post = posterior_index(opp_dist, sigma_prime.mu(), j)
        .ok_or_else(|| ModelError::ZeroProbabilityMessage(mp.to_string()))?;
    let q = post.prob_left(sigma_prime.xi().get(j, i));
    Ok(stage_payoff(u, sigma.xi().get(i, j).left_prob(u), q))
}

/// All distinct situations of a symmetric one-round strategy. Message
/// pairs that lead to the same posteriors and cutoffs (or mirror images of
/// each other) are listed once.
pub fn situations(sigma: &Strategy, dist: &TypeDistribution) -> Vec<Situation> {
    let n = sigma.len();
    let cols: Vec<StepFn> = (0..n).map(|m| sigma.mu().column(m)).collect();
    let posts: Vec<Option<TypeDistribution>> = (0..n).map(|m| posterior_index(dist, sigma.mu(), m)).collect();
    let mut keys: Vec<(usize, usize, Cutoff, Cutoff)> = Vec::new();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            let (Some(pi), Some(pj)) = (&posts[i], &posts[j]) else { continue };
            let (ci, cj) = (sigma.xi().get(i, j), sigma.xi().get(j, i));
            // Identify messages by their first index with the same column.
            let rep = |m: usize| (0..=m).find(|&k| cols[k] == cols[m]).unwrap();
            let (ri, rj) = (rep(i), rep(j));
            if keys.iter().any(|k| *k == (ri, rj, ci, cj) || *k == (rj, ri, cj, ci)) {
                continue;
            }
            keys.push((ri, rj, ci, cj));
            out.push(Situation {
                own_message: sigma.labels()[i].clone(),
                opp_message: sigma.labels()[j].clone(),
                own: pi.clone(),
                opp: pj.clone(),
                own_cut: ci,
                opp_cut: cj,
            });
        }
    }
    out
}

/// All distinct situations of a symmetric two-round strategy; a situation
/// is a complete history of both rounds.
pub fn two_round_situations(sigma: &TwoRoundStrategy, dist: &TypeDistribution) -> Vec<Situation> {
    let (n1, n2) = (sigma.n1(), sigma.n2());
    let weight = |r1: usize, r1p: usize, r2: usize| sigma.first().column(r1).product(&sigma.second(r1, r1p).column(r2));
    let mut seen: Vec<(StepFn, StepFn, Cutoff, Cutoff)> = Vec::new();
    let mut out = Vec::new();
    for r1 in 0..n1 {
        for r1p in 0..n1 {
            for r2 in 0..n2 {
                for r2p in 0..n2 {
                    let (wo, wp) = (weight(r1, r1p, r2), weight(r1p, r1, r2p));
                    let (Some((own, _)), Some((opp, _))) = (dist.condition(&wo), dist.condition(&wp)) else { continue };
                    let (co, cp) = (sigma.action(r1, r1p, r2, r2p), sigma.action(r1p, r1, r2p, r2));
                    if seen.iter().any(|k| {
                        (k.0 == wo && k.1 == wp && k.2 == co && k.3 == cp) || (k.0 == wp && k.1 == wo && k.2 == cp && k.3 == co)
                    }) {
                        continue;
                    }
                    seen.push((wo, wp, co, cp));
                    let name = |a: usize, b: usize| format!("{}/{}", sigma.first_labels()[a], sigma.second_labels()[b]);
                    out.push(Situation {
                        own_message: name(r1, r2),
                        opp_message: name(r1p, r2p),
                        own,
                        opp,
                        own_cut: co,
                        opp_cut: cp,
                    });
                }
            }
        }
    }
    out
}

/// A candidate renegotiation profile: `own` is played by the own side of
/// a situation and `opp` by the other side.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub name: String,
    pub own: Strategy,
    pub opp: Strategy,
}

impl Candidate {
    fn symmetric(name: impl Into<String>, s: Strategy) -> Self {
        Candidate { name: name.into(), own: s.clone(), opp: s }
    }
}

/// Babbling profile from per-type L-probabilities of an atom population
/// sorted by type.
fn cutoff_from_left(atoms: &[(f64, f64)], left: &[f64]) -> Cutoff {
    if left.iter().all(|&p| p >= 1.0 - 1e-12) {
        return Cutoff::AllL;
    }
    if left.iter().all(|&p| p <= 1e-12) {
        return Cutoff::AllR;
    }
    let i = left.iter().rposition(|&p| p > 1e-12).unwrap();
    Cutoff::At { x: atoms[i].0, tie_left: left[i] }
}

/// Babbling profiles `(x, y)` of the game between the two posteriors:
/// each side's cutoff equals the probability that the other side plays L.
pub fn babbling_profiles(own: &TypeDistribution, opp: &TypeDistribution) -> Vec<(Cutoff, Cutoff)> {
    let mut out = vec![(Cutoff::AllL, Cutoff::AllL), (Cutoff::AllR, Cutoff::AllR)];
    if own.is_atomic() && opp.is_atomic() {
        let side = |d: &TypeDistribution| {
            d.atom_list().iter().map(|&(v, m)| (PayoffMatrixType::baseline(v), m)).collect::<Vec<_>>()
        };
        if let Ok(game) = InducedGame::new(side(own), side(opp)) {
            for e in enumerate_induced_equilibria(&game) {
                out.push((cutoff_from_left(own.atom_list(), &e.row_left), cutoff_from_left(opp.atom_list(), &e.col_left)));
            }
        }
    } else {
        let h = |x: f64| opp.cdf(own.cdf(x)) - x;
        let steps = 1000;
        let mut zeros = Vec::new();
        let mut roots = Vec::new();
        for i in 0..steps {
            let (a, b) = (i as f64 / steps as f64, (i + 1) as f64 / steps as f64);
            let (ha, hb) = (h(a), h(b));
            if ha.abs() <= 1e-12 {
                zeros.push(a);
            } else if ha * hb < 0.0 && hb.abs() > 1e-12 {
                let (mut lo, mut hi) = (a, b);
                while hi - lo > 1e-12 {
                    let mid = 0.5 * (lo + hi);
                    if h(mid) * ha > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
        }
        // A continuum of fixed points is represented by a sample of it.
        let stride = (zeros.len() / 10).max(1);
        roots.extend(zeros.iter().step_by(stride));
        for x in roots {
            if x > 0.0 && x < 1.0 {
                out.push((Cutoff::at(x), Cutoff::at(own.cdf(x))));
            }
        }
    }
    out.dedup();
    out
}

/// The candidate family for a situation.
pub fn candidate_family(s: &Situation, cfg: &CpConfig) -> Vec<Candidate> {
    let mut out = vec![
        Candidate::symmetric("sigma_L", canon::make_sigma_l()),
        Candidate::symmetric("sigma_R", canon::make_sigma_r()),
        Candidate::symmetric("sigma_C", canon::make_sigma_c()),
    ];
    let n = cfg.alpha_denominator;
    for k in 1..n {
        if let Ok(sa) = canon::make_sigma_alpha(k, n) {
            out.push(Candidate::symmetric(format!("sigma_alpha({k}/{n})"), sa));
        }
    }
    for (x, y) in babbling_profiles(&s.own, &s.opp) {
        let (a, b) = canon::make_babbling_pair(x, y);
        out.push(Candidate { name: format!("babbling({}, {})", show_cut(x), show_cut(y)), own: a, opp: b });
    }
    out
}

pub(crate) fn show_cut(c: Cutoff) -> String {
    match c {
        Cutoff::AllL => "ALL_L".into(),
        Cutoff::AllR => "ALL_R".into(),
        Cutoff::At { x, tie_left } if tie_left == 1.0 => format!("{x}"),
        Cutoff::At { x, tie_left } => format!("{x}~{tie_left}"),
    }
}

/// Evaluation types of a posterior with the posterior mass each stands for.
/// Types in gaps of the support get weight zero.
pub(crate) fn weighted_points(d: &TypeDistribution, breaks: &[f64], grid: usize) -> Vec<(f64, f64)> {
    if d.is_atomic() {
        return d.atom_list().to_vec();
    }
    let (lo, hi) = d.support_hull();
    let mut pts = d.grid(grid);
    for &b in breaks {
        for x in [b - PROBE, b + PROBE] {
            if x > lo && x < hi {
                pts.push(x);
            }
        }
    }
    pts.retain(|x| !breaks.contains(x) || *x == lo || *x == hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let k = pts.len();
    (0..k)
        .map(|i| {
            let left = if i > 0 { d.cdf(pts[i]) - d.cdf(pts[i - 1]) } else { 0.0 };
            let right = if i + 1 < k { d.cdf(pts[i + 1]) - d.cdf(pts[i]) } else { 0.0 };
            (pts[i], 0.5 * (left + right))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeGain {
    /// `own` or `opp`.
    pub side: String,
    pub u: f64,
    pub gain: f64,
}

/// A profitable joint deviation after a message pair.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub own_message: String,
    pub opp_message: String,
    pub candidate: String,
    /// Same strategy on both sides.
    pub symmetric: bool,
    pub min_gain: f64,
    pub strict_mass_own: f64,
    pub strict_mass_opp: f64,
    /// The largest gains found, at most five.
    pub gains: Vec<TypeGain>,
    #[serde(skip)]
    pub profile: Option<(Strategy, Strategy)>,
}

/// Gains of one side's types from switching to a candidate.
fn side_gains(
    post: &TypeDistribution,
    own: &Strategy,
    opp: &Strategy,
    opp_post: &TypeDistribution,
    old: impl Fn(f64) -> f64,
    old_break: Option<f64>,
    cfg: &CpConfig,
) -> Vec<(f64, f64, f64)> {
    let view = OpponentView::new(opp, opp_post);
    let mut breaks = own.breakpoints();
    breaks.extend(old_break);
    weighted_points(post, &breaks, cfg.grid)
        .into_iter()
        .filter(|p| p.1 > 0.0)
        .map(|(u, w)| (u, w, interim_with_view(own, &view, u) - old(u)))
        .collect()
}

/// Whether `c` trumps the situation; returns the witness if it does.
pub fn check_candidate(s: &Situation, c: &Candidate, cfg: &CpConfig) -> Option<Witness> {
    let own_gains = side_gains(&s.own, &c.own, &c.opp, &s.opp, |u| s.own_payoff(u), s.own_cut.point(), cfg);
    let opp_gains = side_gains(&s.opp, &c.opp, &c.own, &s.own, |v| s.opp_payoff(v), s.opp_cut.point(), cfg);
    let min_gain = own_gains.iter().chain(&opp_gains).map(|g| g.2).fold(f64::INFINITY, f64::min);
    if min_gain < -cfg.tol {
        return None;
    }
    let strict = |g: &[(f64, f64, f64)]| g.iter().filter(|x| x.2 > cfg.tol).map(|x| x.1).sum::<f64>();
    let (so, sp) = (strict(&own_gains), strict(&opp_gains));
    if so + sp < cfg.strict_mass {
        return None;
    }
    let (r1, r2) = equil::verify_pair(&c.own, &s.own, &c.opp, &s.opp, cfg.grid, cfg.tol).ok()?;
    if !(r1.is_equilibrium && r2.is_equilibrium) {
        return None;
    }
    let mut gains: Vec<TypeGain> = own_gains
        .iter()
        .map(|g| TypeGain { side: "own".into(), u: g.0, gain: g.2 })
        .chain(opp_gains.iter().map(|g| TypeGain { side: "opp".into(), u: g.0, gain: g.2 }))
        .collect();
    gains.sort_by(|a, b| b.gain.total_cmp(&a.gain));
    gains.truncate(5);
    Some(Witness {
        own_message: s.own_message.clone(),
        opp_message: s.opp_message.clone(),
        candidate: c.name.clone(),
        symmetric: c.own == c.opp,
        min_gain,
        strict_mass_own: so,
        strict_mass_opp: sp,
        gains,
        profile: Some((c.own.clone(), c.opp.clone())),
    })
}

/// First trump found over a list of situations.
pub fn find_trump_in(sits: &[Situation], cfg: &CpConfig) -> Option<Witness> {
    sits.iter().find_map(|s| candidate_family(s, cfg).iter().find_map(|c| check_candidate(s, c, cfg)))
}

/// First trump of `sigma` found over its message pairs, or `None`.
pub fn find_cp_trump(sigma: &Strategy, dist: &TypeDistribution, cfg: &CpConfig) -> Option<Witness> {
    find_trump_in(&situations(sigma, dist), cfg)
}

/// Same search for a two-round strategy, over complete histories.
pub fn find_cp_trump_two_round(sigma: &TwoRoundStrategy, dist: &TypeDistribution, cfg: &CpConfig) -> Option<Witness> {
    find_trump_in(&two_round_situations(sigma, dist), cfg)
}

/// Re-check a witness from scratch against the situation it names.
pub fn replay_witness(s: &Situation, w: &Witness, cfg: &CpConfig) -> bool {
    let Some((own, opp)) = &w.profile else { return false };
    let c = Candidate { name: w.candidate.clone(), own: own.clone(), opp: opp.clone() };
    check_candidate(s, &c, cfg).is_some() || check_candidate(&s.swapped(), &Candidate { name: c.name, own: opp.clone(), opp: own.clone() }, cfg).is_some()
}

#[derive(Debug, Clone, Serialize)]
pub struct CpVerdict {
    pub strongly_cp: bool,
    /// Only decided for finite-type games.
    pub weakly_cp: Option<bool>,
    pub witness: Option<Witness>,
    pub situations: usize,
}

/// Strong communication-proofness relative to the candidate family.
pub fn is_strongly_cp(sigma: &Strategy, dist: &TypeDistribution, cfg: &CpConfig) -> CpVerdict {
    let sits = situations(sigma, dist);
    let witness = find_trump_in(&sits, cfg);
    CpVerdict { strongly_cp: witness.is_none(), weakly_cp: None, witness, situations: sits.len() }
}

/// One row of the structural-properties versus renegotiation comparison.
#[derive(Debug, Clone, Serialize)]
pub struct CrosscheckRow {
    pub name: String,
    pub properties: bool,
    pub equilibrium: bool,
    pub trumped: Option<bool>,
    pub agree: bool,
}

/// For every strategy: do the three properties hold, and is it an
/// equilibrium that no candidate trumps? Both answers should coincide.
pub fn theorem1_crosscheck(pool: &[(String, Strategy)], dist: &TypeDistribution, cfg: &CpConfig) -> Vec<CrosscheckRow> {
    pool.iter()
        .map(|(name, s)| {
            let p = props::properties(s, dist);
            let lhs = p.mpc && p.coordinated && p.binary;
            let equilibrium = equil::verify_equilibrium(s, dist, equil::DEFAULT_GRID, cfg.tol).is_equilibrium;
            let trumped = equilibrium.then(|| find_cp_trump(s, dist, cfg).is_some());
            let rhs = equilibrium && trumped == Some(false);
            CrosscheckRow { name: name.clone(), properties: lhs, equilibrium, trumped, agree: lhs == rhs }
        })
        .collect()
}
