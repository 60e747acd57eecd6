//! Evolutionary stability diagnostics for the preference-revealing
//! strategies: neutral and evolutionary stability against a discretized
//! mutant family, dominance of the message function under a fixed action
//! table, and the neighborhood-invader property of the induced action
//! profiles.
//!
//! Every check is a grid certificate. A `false` verdict always carries a
//! concrete violating object that [`Violation::replay`] confirms through
//! the core payoff functions.

use serde::Serialize;

use crate::dist::TypeDistribution;
use crate::error::{ModelError, Result};
use crate::payoff::{exante_payoff, interim_with_view, posterior_index, OpponentView};
use crate::strategy::{ActionTable, Cutoff, MessageFunction, Strategy};

pub use crate::equil::{babbling_fixed_points, stability_density_check};

/// Stability notion a report refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Concept {
    Nss,
    Ess,
    MessageDominance,
    Nis,
}

/// Ex-ante payoffs of an incumbent/mutant pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MutantPayoffs {
    pub incumbent_vs_incumbent: f64,
    pub mutant_vs_incumbent: f64,
    pub incumbent_vs_mutant: f64,
    pub mutant_vs_mutant: f64,
}

impl MutantPayoffs {
    fn compute(sigma: &Strategy, mutant: &Strategy, dist: &TypeDistribution) -> Result<Self> {
        Ok(MutantPayoffs {
            incumbent_vs_incumbent: exante_payoff(sigma, sigma, dist, dist)?,
            mutant_vs_incumbent: exante_payoff(mutant, sigma, dist, dist)?,
            incumbent_vs_mutant: exante_payoff(sigma, mutant, dist, dist)?,
            mutant_vs_mutant: exante_payoff(mutant, mutant, dist, dist)?,
        })
    }
}

/// A mutant strategy together with the payoffs that witness a failure.
#[derive(Debug, Clone, Serialize)]
pub struct MutantRecord {
    pub family: String,
    pub description: String,
    pub payoffs: MutantPayoffs,
    #[serde(skip)]
    pub mutant: Strategy,
}

/// Why a message function fails to dominate its replacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DominanceFailure {
    /// Some type strictly prefers the mutant message function.
    Pointwise,
    /// The positive-measure conditions hold but the ex-ante gap is zero.
    NotStrict,
}

/// A message-function pair that breaks dominance.
#[derive(Debug, Clone, Serialize)]
pub struct MessageRecord {
    pub failure: DominanceFailure,
    pub sample: usize,
    pub u: Option<f64>,
    pub incumbent_value: f64,
    pub mutant_value: f64,
    #[serde(skip)]
    pub opponent_mu: MessageFunction,
    #[serde(skip)]
    pub mutant_mu: MessageFunction,
}

/// Which part of the neighborhood-invader definition failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NisFailure {
    /// A non-equivalent unilateral deviation does at least as well.
    NotStrict,
    /// Neither equilibrium cutoff beats the perturbed state.
    NoInvasion,
}

/// A threshold state of the induced game that breaks the invader property.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateRecord {
    pub failure: NisFailure,
    /// Message pair indices defining the induced game.
    pub messages: (usize, usize),
    /// Seat of the deviating player for `NotStrict` (0 or 1).
    pub player: Option<usize>,
    pub x1: f64,
    pub x2: f64,
    pub gain1: f64,
    pub gain2: f64,
}

/// Concrete object behind a negative verdict.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Mutant(MutantRecord),
    Message(MessageRecord),
    State(StateRecord),
}

/// Outcome of one stability check.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub concept: Concept,
    pub verdict: bool,
    pub violation: Option<Violation>,
    /// Number of mutants, samples or states examined.
    pub checked: usize,
    /// Check-specific diagnostics such as the invasion basin radius.
    pub metrics: Vec<(String, f64)>,
}

/// Grid resolution and tolerances for the stability sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvoConfig {
    pub cutoff_step: f64,
    pub simplex_step: f64,
    pub nis_eps: f64,
    pub nis_step: f64,
    pub tol: f64,
    pub mass_tol: f64,
}

impl Default for EvoConfig {
    fn default() -> Self {
        EvoConfig { cutoff_step: 0.01, simplex_step: 0.1, nis_eps: 0.05, nis_step: 0.005, tol: 1e-9, mass_tol: 1e-6 }
    }
}

/// Almost-sure realization equivalence: the message functions agree for
/// almost all types and, after every message pair the incumbent uses,
/// the action rules agree for almost all senders.
pub fn equivalent(a: &Strategy, b: &Strategy, dist: &TypeDistribution, mass_tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut breaks = a.breakpoints();
    breaks.extend(b.breakpoints());
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let n = a.len();
    for m in 0..n {
        let d = dist.expect(&breaks, |u| (a.mu().prob(u, m) - b.mu().prob(u, m)).abs());
        if d > mass_tol {
            return false;
        }
    }
    let used: Vec<usize> = (0..n).filter(|&m| a.mu().mean_prob(dist, m) > mass_tol).collect();
    for &m in &used {
        for &mp in &used {
            let (ca, cb) = (a.xi().get(m, mp), b.xi().get(m, mp));
            if ca == cb {
                continue;
            }
            let d = dist.expect(&breaks, |u| a.mu().prob(u, m) * (ca.left_prob(u) - cb.left_prob(u)).abs());
            if d > mass_tol {
                return false;
            }
        }
    }
    true
}

fn cutoff_grid(dist: &TypeDistribution, step: f64) -> Vec<Cutoff> {
    let (lo, hi) = dist.support_hull();
    let k = ((hi - lo) / step).round() as usize;
    let mut out = vec![Cutoff::AllL, Cutoff::AllR];
    out.extend((0..=k).map(|i| Cutoff::at(lo + (hi - lo) * i as f64 / k as f64)));
    out
}

/// All weight vectors of length `k` with entries in multiples of `1/steps`.
fn simplex_grid(k: usize, steps: usize) -> Vec<Vec<f64>> {
    fn rec(k: usize, left: usize, steps: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if cur.len() + 1 == k {
            cur.push(left);
            out.push(cur.iter().map(|&c| c as f64 / steps as f64).collect());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(k, left - c, steps, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k > 0 {
        rec(k, steps, steps, &mut Vec::new(), &mut out);
    }
    out
}

fn show(c: Cutoff) -> String {
    match c {
        Cutoff::AllL => "ALL_L".into(),
        Cutoff::AllR => "ALL_R".into(),
        Cutoff::At { x, .. } => format!("{x:.3}"),
    }
}

/// Unused messages that the incumbent's action table treats exactly like
/// the used message `m`, both as own and as opponent message.
fn aliases(sigma: &Strategy, used: &[usize], m: usize) -> Vec<usize> {
    let xi = sigma.xi();
    (0..sigma.len())
        .filter(|f| !used.contains(f))
        .filter(|&f| used.iter().all(|&mp| xi.get(f, mp) == xi.get(m, mp) && xi.get(mp, f) == xi.get(mp, m)))
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n > 6 {
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let mut p: Vec<usize> = (0..n).collect();
                p.swap(i, j);
                out.push(p);
            }
        }
        return out;
    }
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    fn heap(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(p.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, p, out);
            if k % 2 == 0 {
                p.swap(i, k - 1);
            } else {
                p.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut p, &mut out);
    out
}

/// Mutants examined by the neutral-stability sweep.
///
/// * `best_reply`: senders of a used message spread over it and its
///   unused aliases, with every action entry against an unused opponent
///   message set to one grid cutoff.
/// * `relabel`: every permutation of the message labels.
/// * `cutoff`: one on-path action entry moved to a grid cutoff.
/// * `message_cut`: one message-function breakpoint moved on the grid.
/// * `message_mix`: one piece of the message function replaced by a
///   simplex grid distribution.
pub fn mutant_family(sigma: &Strategy, dist: &TypeDistribution, cfg: &EvoConfig) -> Result<Vec<(String, String, Strategy)>> {
    let n = sigma.len();
    let used: Vec<usize> = (0..n).filter(|&m| sigma.mu().mean_prob(dist, m) > cfg.mass_tol).collect();
    let fresh: Vec<usize> = (0..n).filter(|m| !used.contains(m)).collect();
    let cuts = cutoff_grid(dist, cfg.cutoff_step);
    let steps = (1.0 / cfg.simplex_step).round() as usize;
    let labels = sigma.labels();
    let mu = sigma.mu();
    let mut out = Vec::new();

    let off_path = |c: Cutoff| -> ActionTable {
        let mut xi = sigma.xi().clone();
        for m in 0..n {
            for &f in &fresh {
                xi.set(m, f, c);
            }
        }
        xi
    };
    for &m in &used {
        let mut group = vec![m];
        group.extend(aliases(sigma, &used, m));
        if group.len() < 2 {
            continue;
        }
        for w in simplex_grid(group.len(), steps) {
            let probs: Vec<Vec<f64>> = mu
                .pieces()
                .iter()
                .map(|row| {
                    let mut r = row.clone();
                    let p = r[m];
                    for (g, &wg) in group.iter().zip(&w) {
                        r[*g] = if *g == m { p * wg } else { r[*g] + p * wg };
                    }
                    r
                })
                .collect();
            let new_mu = MessageFunction::new(mu.cuts().to_vec(), probs)?;
            let weights: Vec<String> =
                group.iter().zip(&w).map(|(g, wg)| format!("{}:{wg:.1}", labels[*g])).collect();
            for &c in &cuts {
                let s = Strategy::new(labels.to_vec(), new_mu.clone(), off_path(c))?;
                out.push((
                    "best_reply".into(),
                    format!("senders of {} use [{}]; off-path cutoff {}", labels[m], weights.join(", "), show(c)),
                    s,
                ));
            }
        }
    }

    for p in permutations(n) {
        if p.iter().enumerate().all(|(i, &j)| i == j) {
            continue;
        }
        let s = sigma.permuted(&p)?.relabeled(labels.to_vec())?;
        let names: Vec<&str> = p.iter().map(|&j| labels[j].as_str()).collect();
        out.push(("relabel".into(), format!("messages renamed to [{}]", names.join(", ")), s));
    }

    for &m in &used {
        for &mp in &used {
            for &c in &cuts {
                if c == sigma.xi().get(m, mp) {
                    continue;
                }
                let mut xi = sigma.xi().clone();
                xi.set(m, mp, c);
                out.push((
                    "cutoff".into(),
                    format!("cutoff after ({}, {}) set to {}", labels[m], labels[mp], show(c)),
                    sigma.with_xi(xi)?,
                ));
            }
        }
    }

    for i in 0..mu.cuts().len() {
        for &c in &cuts {
            let Some(x) = c.point() else { continue };
            let mut new_cuts = mu.cuts().to_vec();
            new_cuts[i] = x;
            let lo_ok = i == 0 || new_cuts[i - 1] < x;
            let hi_ok = i + 1 == new_cuts.len() || x < new_cuts[i + 1];
            if !lo_ok || !hi_ok || x == mu.cuts()[i] {
                continue;
            }
            let new_mu = MessageFunction::new(new_cuts, mu.pieces().to_vec())?;
            out.push(("message_cut".into(), format!("message breakpoint {i} moved to {x:.3}"), sigma.with_mu(new_mu)?));
        }
    }

    for piece in 0..mu.pieces().len() {
        for w in simplex_grid(n, steps) {
            if w == mu.pieces()[piece] {
                continue;
            }
            let mut probs = mu.pieces().to_vec();
            probs[piece] = w.clone();
            let new_mu = MessageFunction::new(mu.cuts().to_vec(), probs)?;
            let shown: Vec<String> = w.iter().map(|p| format!("{p:.1}")).collect();
            out.push((
                "message_mix".into(),
                format!("message piece {piece} set to [{}]", shown.join(", ")),
                sigma.with_mu(new_mu)?,
            ));
        }
    }
    Ok(out)
}

/// Result of classifying the whole mutant family.
#[derive(Debug, Clone)]
pub struct MutantSweep {
    pub checked: usize,
    pub best_replies: usize,
    pub equivalent: usize,
    /// A mutant earning strictly more against the incumbent than the
    /// incumbent itself (the incumbent is not an equilibrium).
    pub better_reply: Option<MutantRecord>,
    /// A best-reply mutant that does strictly better against itself.
    pub invader: Option<MutantRecord>,
    /// A non-equivalent best-reply mutant that ties against itself.
    pub neutral: Option<MutantRecord>,
}

/// Classify every mutant of [`mutant_family`] by the stability inequalities.
pub fn sweep_mutants(sigma: &Strategy, dist: &TypeDistribution, cfg: &EvoConfig) -> Result<MutantSweep> {
    let family = mutant_family(sigma, dist, cfg)?;
    let view = OpponentView::new(sigma, dist);
    let base = exante_payoff(sigma, sigma, dist, dist)?;
    let mut sweep =
        MutantSweep { checked: family.len(), best_replies: 0, equivalent: 0, better_reply: None, invader: None, neutral: None };
    for (fam, desc, mutant) in family {
        let against = dist.expect(&mutant.breakpoints(), |u| interim_with_view(&mutant, &view, u));
        if against < base - cfg.tol {
            continue;
        }
        let record = |payoffs| MutantRecord { family: fam.clone(), description: desc.clone(), payoffs, mutant: mutant.clone() };
        if against > base + cfg.tol {
            if sweep.better_reply.is_none() {
                sweep.better_reply = Some(record(MutantPayoffs::compute(sigma, &mutant, dist)?));
            }
            continue;
        }
        sweep.best_replies += 1;
        if equivalent(sigma, &mutant, dist, cfg.mass_tol) {
            sweep.equivalent += 1;
            continue;
        }
        let payoffs = MutantPayoffs::compute(sigma, &mutant, dist)?;
        if payoffs.incumbent_vs_mutant < payoffs.mutant_vs_mutant - cfg.tol {
            if sweep.invader.is_none() {
                sweep.invader = Some(record(payoffs));
            }
        } else if payoffs.incumbent_vs_mutant <= payoffs.mutant_vs_mutant + cfg.tol && sweep.neutral.is_none() {
            sweep.neutral = Some(record(payoffs));
        }
    }
    Ok(sweep)
}

fn sweep_metrics(s: &MutantSweep) -> Vec<(String, f64)> {
    vec![("best_replies".into(), s.best_replies as f64), ("equivalent".into(), s.equivalent as f64)]
}

fn require_equilibrium(sweep: &MutantSweep) -> Result<()> {
    match &sweep.better_reply {
        Some(r) => Err(ModelError::Precondition(format!(
            "incumbent is not an equilibrium: mutant `{}` earns {:.12} > {:.12}",
            r.description, r.payoffs.mutant_vs_incumbent, r.payoffs.incumbent_vs_incumbent
        ))),
        None => Ok(()),
    }
}

/// Neutral stability: no best-reply mutant earns strictly more against
/// itself than the incumbent earns against it.
pub fn nss_check(sigma: &Strategy, dist: &TypeDistribution, cfg: &EvoConfig) -> Result<StabilityReport> {
    let sweep = sweep_mutants(sigma, dist, cfg)?;
    require_equilibrium(&sweep)?;
    Ok(nss_report(&sweep))
}

/// Evolutionary stability: additionally, every non-equivalent best-reply
/// mutant earns strictly less against itself.
pub fn ess_check(sigma: &Strategy, dist: &TypeDistribution, cfg: &EvoConfig) -> Result<StabilityReport> {
    let sweep = sweep_mutants(sigma, dist, cfg)?;
    require_equilibrium(&sweep)?;
    Ok(ess_report(&sweep))
}

/// Both reports from a single sweep.
pub fn stability_reports(sigma: &Strategy, dist: &TypeDistribution, cfg: &EvoConfig) -> Result<(StabilityReport, StabilityReport)> {
    let sweep = sweep_mutants(sigma, dist, cfg)?;
    require_equilibrium(&sweep)?;
    Ok((nss_report(&sweep), ess_report(&sweep)))
}

fn nss_report(s: &MutantSweep) -> StabilityReport {
    StabilityReport {
        concept: Concept::Nss,
        verdict: s.invader.is_none(),
        violation: s.invader.clone().map(Violation::Mutant),
        checked: s.checked,
        metrics: sweep_metrics(s),
    }
}

fn ess_report(s: &MutantSweep) -> StabilityReport {
    let v = s.invader.clone().or_else(|| s.neutral.clone());
    StabilityReport {
        concept: Concept::Ess,
        verdict: v.is_none(),
        violation: v.map(Violation::Mutant),
        checked: s.checked,
        metrics: sweep_metrics(s),
    }
}

/// Message classes of a preference-revealing strategy: for every message,
/// the used message it is read as, and the trigger message whose mutual
/// use overrides the fallback action.
struct Classes {
    of: Vec<Option<usize>>,
    trigger: usize,
}

fn classes(sigma: &Strategy, dist: &TypeDistribution, mass_tol: f64) -> Result<Classes> {
    let n = sigma.len();
    let used: Vec<usize> = (0..n).filter(|&m| sigma.mu().mean_prob(dist, m) > mass_tol).collect();
    let pure = (0..n).all(|m| (0..n).all(|mp| matches!(sigma.xi().get(m, mp), Cutoff::AllL | Cutoff::AllR)));
    if used.len() != 2 || !pure {
        return Err(ModelError::Precondition(
            "dominance check needs a strategy with two used messages and constant actions".into(),
        ));
    }
    let fallback = sigma.xi().get(used[0], used[1]);
    let triggers: Vec<usize> = used.iter().copied().filter(|&m| sigma.xi().get(m, m) != fallback).collect();
    if triggers.len() != 1 || sigma.xi().get(used[1], used[0]) != fallback {
        return Err(ModelError::Precondition("action table is not of the fallback form".into()));
    }
    let mut of = vec![None; n];
    for &m in &used {
        of[m] = Some(m);
        for f in aliases(sigma, &used, m) {
            of[f] = Some(m);
        }
    }
    Ok(Classes { of, trigger: triggers[0] })
}

/// Interim values of type `u` for the incumbent message function and for
/// `mutant_mu`, both combined with the incumbent's action table, against
/// opponents using `opponent_mu` with that same table.
pub fn message_values(
    sigma: &Strategy,
    opponent_mu: &MessageFunction,
    mutant_mu: &MessageFunction,
    dist: &TypeDistribution,
    u: f64,
) -> Result<(f64, f64)> {
    let opp = sigma.with_mu(opponent_mu.clone())?;
    let mutant = sigma.with_mu(mutant_mu.clone())?;
    let view = OpponentView::new(&opp, dist);
    Ok((interim_with_view(sigma, &view, u), interim_with_view(&mutant, &view, u)))
}

/// Dominance of the incumbent message function when everybody keeps the
/// incumbent action table.
///
/// For every sample `(opponent_mu, mutant_mu)` and every grid type other
/// than one half, the incumbent message choice must be weakly better. When
/// the opponent uses the trigger class with positive probability and the
/// mutant puts a positive mass of types in the wrong class, the ex-ante
/// gap must be strictly positive.
pub fn message_dominance_check(
    sigma: &Strategy,
    dist: &TypeDistribution,
    samples: &[(MessageFunction, MessageFunction)],
    grid: usize,
    cfg: &EvoConfig,
) -> Result<StabilityReport> {
    let cls = classes(sigma, dist, cfg.mass_tol)?;
    let points: Vec<f64> = dist.grid(grid).into_iter().filter(|u| (u - 0.5).abs() > 1e-12).collect();
    let n = sigma.len();
    let mut checked = 0;
    let mut min_gap = f64::INFINITY;
    for (k, (opp_mu, mut_mu)) in samples.iter().enumerate() {
        let opp = sigma.with_mu(opp_mu.clone())?;
        let mutant = sigma.with_mu(mut_mu.clone())?;
        let view = OpponentView::new(&opp, dist);
        let record = |failure, u, inc, mv| MessageRecord {
            failure,
            sample: k,
            u,
            incumbent_value: inc,
            mutant_value: mv,
            opponent_mu: opp_mu.clone(),
            mutant_mu: mut_mu.clone(),
        };
        for &u in &points {
            checked += 1;
            let inc = interim_with_view(sigma, &view, u);
            let mv = interim_with_view(&mutant, &view, u);
            min_gap = min_gap.min(inc - mv);
            if mv > inc + cfg.tol {
                return Ok(dominance_report(false, Some(record(DominanceFailure::Pointwise, Some(u), inc, mv)), checked, min_gap));
            }
        }
        let gamma: f64 = (0..n).filter(|&f| cls.of[f] == Some(cls.trigger)).map(|f| opp_mu.mean_prob(dist, f)).sum();
        let mut breaks = sigma.breakpoints();
        breaks.extend(mut_mu.cuts());
        breaks.sort_by(f64::total_cmp);
        let wrong = dist.expect(&breaks, |u| {
            let own = sigma.mu().row(u);
            (0..n)
                .map(|m| own[m] * (0..n).filter(|&f| cls.of[f] != cls.of[m]).map(|f| mut_mu.prob(u, f)).sum::<f64>())
                .sum()
        });
        if gamma > cfg.mass_tol && wrong > cfg.mass_tol {
            let inc = dist.expect(&breaks, |u| interim_with_view(sigma, &view, u));
            let mv = dist.expect(&breaks, |u| interim_with_view(&mutant, &view, u));
            if inc <= mv + cfg.tol {
                return Ok(dominance_report(false, Some(record(DominanceFailure::NotStrict, None, inc, mv)), checked, min_gap));
            }
        }
    }
    Ok(dominance_report(true, None, checked, min_gap))
}

fn dominance_report(verdict: bool, v: Option<MessageRecord>, checked: usize, min_gap: f64) -> StabilityReport {
    StabilityReport {
        concept: Concept::MessageDominance,
        verdict,
        violation: v.map(Violation::Message),
        checked,
        metrics: vec![("min_pointwise_gap".into(), if min_gap.is_finite() { min_gap } else { 0.0 })],
    }
}

/// Random piecewise-constant message function over `n` messages with up
/// to three pieces; a third of the rows are deterministic.
pub fn random_message_function<R: rand::Rng>(rng: &mut R, n: usize) -> MessageFunction {
    let pieces = rng.gen_range(1..=3);
    let mut cuts: Vec<f64> = (1..pieces).map(|_| rng.gen_range(0.01..0.99)).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let rows = (0..=cuts.len())
        .map(|_| {
            if rng.gen_bool(1.0 / 3.0) {
                let mut r = vec![0.0; n];
                r[rng.gen_range(0..n)] = 1.0;
                r
            } else {
                let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
                let s: f64 = raw.iter().sum();
                raw.into_iter().map(|x| x / s).collect()
            }
        })
        .collect();
    MessageFunction::new(cuts, rows).expect("rows are normalized")
}

/// `count` seeded `(opponent, mutant)` message-function pairs.
pub fn sample_message_pairs(n: usize, count: usize, seed: u64) -> Vec<(MessageFunction, MessageFunction)> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (random_message_function(&mut rng, n), random_message_function(&mut rng, n))).collect()
}

/// Induced threshold game after a message pair: each seat's posterior and
/// the incumbent cutoffs as numbers on the type range.
struct InducedThresholds {
    post: [TypeDistribution; 2],
    x: [f64; 2],
    lo: f64,
    hi: f64,
}

impl InducedThresholds {
    fn new(sigma: &Strategy, dist: &TypeDistribution, m1: usize, m2: usize) -> Result<Self> {
        let label = |m: usize| sigma.labels().get(m).cloned().unwrap_or_default();
        let p1 = posterior_index(dist, sigma.mu(), m1).ok_or_else(|| ModelError::ZeroProbabilityMessage(label(m1)))?;
        let p2 = posterior_index(dist, sigma.mu(), m2).ok_or_else(|| ModelError::ZeroProbabilityMessage(label(m2)))?;
        let hull = dist.support_hull();
        let x = [sigma.xi().get(m1, m2).as_number(hull), sigma.xi().get(m2, m1).as_number(hull)];
        Ok(InducedThresholds { post: [p1, p2], x, lo: hull.0, hi: hull.1 })
    }

    /// Payoff terms of seat `i` using threshold `y`: expected value when
    /// the opponent coordinates on L and on R respectively.
    fn terms(&self, i: usize, y: f64) -> (f64, f64) {
        let c = Cutoff::at(y);
        let d = &self.post[i];
        let left = d.expect(&[y], |u| (1.0 - u) * c.left_prob(u));
        let right = d.expect(&[y], |u| u * (1.0 - c.left_prob(u)));
        (left, right)
    }

    fn left_prob(&self, i: usize, y: f64) -> f64 {
        self.post[i].prob_left(Cutoff::at(y))
    }
}

/// Expected payoff in the induced game of seat `i` with threshold `own`
/// against the other seat's threshold `opp`.
pub fn induced_threshold_payoff(
    sigma: &Strategy,
    dist: &TypeDistribution,
    (m1, m2): (usize, usize),
    seat: usize,
    own: f64,
    opp: f64,
) -> Result<f64> {
    let g = InducedThresholds::new(sigma, dist, m1, m2)?;
    let (l, r) = g.terms(seat, own);
    let q = g.left_prob(1 - seat, opp);
    Ok(q * l + (1.0 - q) * r)
}

/// Strict-equilibrium and neighborhood-invader check of the incumbent
/// action profile after the message pair `(m1, m2)`.
///
/// Deviations and perturbed states range over a grid of step
/// `cfg.nis_step` on the type range. Besides the verdict for the
/// `cfg.nis_eps` neighborhood, the report carries `basin_radius`: the
/// sup-distance of the nearest grid state from which neither incumbent
/// threshold invades (the full range width when there is none).
pub fn nis_check(sigma: &Strategy, dist: &TypeDistribution, m1: usize, m2: usize, cfg: &EvoConfig) -> Result<StabilityReport> {
    let g = InducedThresholds::new(sigma, dist, m1, m2)?;
    let k = ((g.hi - g.lo) / cfg.nis_step).round() as usize;
    let ys: Vec<f64> = (0..=k).map(|i| g.lo + (g.hi - g.lo) * i as f64 / k as f64).collect();
    let terms: [Vec<(f64, f64)>; 2] = [0, 1].map(|i| ys.iter().map(|&y| g.terms(i, y)).collect());
    let probs: [Vec<f64>; 2] = [0, 1].map(|i| ys.iter().map(|&y| g.left_prob(i, y)).collect());
    let home: [(f64, f64); 2] = [0, 1].map(|i| g.terms(i, g.x[i]));
    let home_q: [f64; 2] = [0, 1].map(|i| g.left_prob(i, g.x[i]));
    let value = |t: (f64, f64), q: f64| q * t.0 + (1.0 - q) * t.1;
    let equiv: [Vec<bool>; 2] = [0, 1].map(|i| probs[i].iter().map(|&p| (p - home_q[i]).abs() <= cfg.mass_tol).collect());
    let mut checked = 0;
    let report = |verdict, v: Option<StateRecord>, checked, basin: f64| StabilityReport {
        concept: Concept::Nis,
        verdict,
        violation: v.map(Violation::State),
        checked,
        metrics: vec![
            ("x1".into(), g.x[0]),
            ("x2".into(), g.x[1]),
            ("basin_radius".into(), basin),
        ],
    };

    for i in 0..2 {
        let j = 1 - i;
        let stay = value(home[i], home_q[j]);
        for (a, &y) in ys.iter().enumerate() {
            if equiv[i][a] {
                continue;
            }
            checked += 1;
            let dev = value(terms[i][a], home_q[j]);
            if dev >= stay - cfg.tol {
                let (x1, x2) = if i == 0 { (y, g.x[1]) } else { (g.x[0], y) };
                let rec = StateRecord { failure: NisFailure::NotStrict, messages: (m1, m2), player: Some(i), x1, x2, gain1: 0.0, gain2: 0.0 };
                let rec = if i == 0 { StateRecord { gain1: stay - dev, ..rec } } else { StateRecord { gain2: stay - dev, ..rec } };
                return Ok(report(false, Some(rec), checked, 0.0));
            }
        }
    }

    let mut basin = g.hi - g.lo;
    let mut first_local: Option<StateRecord> = None;
    for (a, &y1) in ys.iter().enumerate() {
        if equiv[0][a] {
            continue;
        }
        for (b, &y2) in ys.iter().enumerate() {
            if equiv[1][b] {
                continue;
            }
            let dist_inf = (y1 - g.x[0]).abs().max((y2 - g.x[1]).abs());
            let local = dist_inf < cfg.nis_eps - 1e-12;
            if local {
                checked += 1;
            } else if dist_inf >= basin {
                continue;
            }
            let gain1 = value(home[0], probs[1][b]) - value(terms[0][a], probs[1][b]);
            let gain2 = value(home[1], probs[0][a]) - value(terms[1][b], probs[0][a]);
            if gain1 <= cfg.tol && gain2 <= cfg.tol {
                basin = basin.min(dist_inf);
                if local && first_local.is_none() {
                    first_local = Some(StateRecord { failure: NisFailure::NoInvasion, messages: (m1, m2), player: None, x1: y1, x2: y2, gain1, gain2 });
                }
            }
        }
    }
    Ok(report(first_local.is_none(), first_local, checked, basin))
}

impl Violation {
    /// Recompute the violating inequality from scratch through the core
    /// payoff functions. Returns `true` when the violation is confirmed.
    pub fn replay(&self, concept: Concept, sigma: &Strategy, dist: &TypeDistribution, tol: f64) -> Result<bool> {
        match self {
            Violation::Mutant(r) => {
                let p = MutantPayoffs::compute(sigma, &r.mutant, dist)?;
                let best_reply = (p.mutant_vs_incumbent - p.incumbent_vs_incumbent).abs() <= tol;
                Ok(best_reply
                    && match concept {
                        Concept::Nss => p.incumbent_vs_mutant < p.mutant_vs_mutant - tol,
                        _ => p.incumbent_vs_mutant <= p.mutant_vs_mutant + tol && !equivalent(sigma, &r.mutant, dist, 1e-6),
                    })
            }
            Violation::Message(r) => {
                let opp = sigma.with_mu(r.opponent_mu.clone())?;
                let mutant = sigma.with_mu(r.mutant_mu.clone())?;
                let view = OpponentView::new(&opp, dist);
                match r.u {
                    Some(u) => Ok(interim_with_view(&mutant, &view, u) > interim_with_view(sigma, &view, u) + tol),
                    None => {
                        let inc = exante_payoff(sigma, &opp, dist, dist)?;
                        let mv = exante_payoff(&mutant, &opp, dist, dist)?;
                        Ok(inc <= mv + tol)
                    }
                }
            }
            Violation::State(s) => {
                let (m1, m2) = s.messages;
                let pay = |seat, own, opp| induced_threshold_payoff(sigma, dist, (m1, m2), seat, own, opp);
                let g = InducedThresholds::new(sigma, dist, m1, m2)?;
                match s.failure {
                    NisFailure::NotStrict => {
                        let seat = s.player.unwrap_or(0);
                        let (own, opp) = if seat == 0 { (s.x1, g.x[1]) } else { (s.x2, g.x[0]) };
                        Ok(pay(seat, own, opp)? >= pay(seat, g.x[seat], opp)? - tol)
                    }
                    NisFailure::NoInvasion => {
                        let a = pay(0, g.x[0], s.x2)? - pay(0, s.x1, s.x2)?;
                        let b = pay(1, g.x[1], s.x1)? - pay(1, s.x2, s.x1)?;
                        Ok(a <= tol && b <= tol)
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::{make_sigma_l, make_sigma_l_in, make_sigma_r};
    use crate::strategy::labels;

    fn uniform() -> TypeDistribution {
        TypeDistribution::uniform(0.0, 1.0).unwrap()
    }

    #[test]
    fn sigma_l_is_ess_with_two_messages() {
        let (nss, ess) = stability_reports(&make_sigma_l(), &uniform(), &EvoConfig::default()).unwrap();
        assert!(nss.verdict && ess.verdict, "{ess:?}");
        assert!(nss.checked > 100);
    }

    #[test]
    fn sigma_l_with_four_messages_is_neutral_but_not_ess() {
        let s = make_sigma_l_in(labels(&["m_L", "m_R", "m_2", "m_3"])).unwrap();
        let d = uniform();
        let (nss, ess) = stability_reports(&s, &d, &EvoConfig::default()).unwrap();
        assert!(nss.verdict);
        assert!(!ess.verdict);
        let v = ess.violation.unwrap();
        assert!(v.replay(Concept::Ess, &s, &d, 1e-9).unwrap());
        let Violation::Mutant(r) = v else { panic!("mutant expected") };
        assert_eq!(r.family, "best_reply");
    }

    #[test]
    fn positive_measure_deviation_is_strictly_worse() {
        let s = make_sigma_l();
        let d = uniform();
        let base = exante_payoff(&s, &s, &d, &d).unwrap();
        let shifted = s.with_mu(MessageFunction::split(0.4, vec![1.0, 0.0], vec![0.0, 1.0]).unwrap()).unwrap();
        assert!(exante_payoff(&shifted, &s, &d, &d).unwrap() < base - 1e-6);
    }

    #[test]
    fn sigma_r_is_ess() {
        let (nss, ess) = stability_reports(&make_sigma_r(), &uniform(), &EvoConfig::default()).unwrap();
        assert!(nss.verdict && ess.verdict);
    }

    #[test]
    fn dominance_loss_matches_formula() {
        let s = make_sigma_l();
        let d = uniform();
        let gamma = 0.5;
        let opp = MessageFunction::new(vec![], vec![vec![1.0 - gamma, gamma]]).unwrap();
        let all_r = MessageFunction::new(vec![], vec![vec![0.0, 1.0]]).unwrap();
        let (inc, mv) = message_values(&s, &opp, &all_r, &d, 0.3).unwrap();
        // Loss of a low type sending the trigger message: gamma * |2u - 1|.
        assert!((inc - mv - gamma * 0.4).abs() < 1e-12);
        let silent = MessageFunction::new(vec![], vec![vec![1.0, 0.0]]).unwrap();
        let (inc, mv) = message_values(&s, &silent, &all_r, &d, 0.3).unwrap();
        assert!((inc - mv).abs() < 1e-12);
    }

    #[test]
    fn dominance_holds_on_samples() {
        let d = uniform();
        for s in [make_sigma_l(), make_sigma_r()] {
            let samples = sample_message_pairs(2, 50, 7);
            let r = message_dominance_check(&s, &d, &samples, 101, &EvoConfig::default()).unwrap();
            assert!(r.verdict, "{r:?}");
        }
        let s4 = make_sigma_l_in(labels(&["m_L", "m_R", "m_2", "m_3"])).unwrap();
        let r = message_dominance_check(&s4, &d, &sample_message_pairs(4, 20, 11), 51, &EvoConfig::default()).unwrap();
        assert!(r.verdict);
    }

    #[test]
    fn dominance_rejects_non_revealing_incumbent() {
        let d = uniform();
        let mut s = make_sigma_l();
        s = s.with_mu(MessageFunction::split(0.3, vec![1.0, 0.0], vec![0.0, 1.0]).unwrap()).unwrap();
        let samples = vec![(
            MessageFunction::new(vec![], vec![vec![0.5, 0.5]]).unwrap(),
            MessageFunction::split(0.5, vec![1.0, 0.0], vec![0.0, 1.0]).unwrap(),
        )];
        let r = message_dominance_check(&s, &d, &samples, 101, &EvoConfig::default()).unwrap();
        assert!(!r.verdict);
        assert!(r.violation.unwrap().replay(Concept::MessageDominance, &s, &d, 1e-9).unwrap());
    }

    #[test]
    fn nis_holds_in_all_three_cases() {
        let d = uniform();
        let cfg = EvoConfig::default();
        for s in [make_sigma_l(), make_sigma_r()] {
            for (m1, m2) in [(0, 0), (1, 1), (1, 0), (0, 1)] {
                let r = nis_check(&s, &d, m1, m2, &cfg).unwrap();
                assert!(r.verdict, "{m1}{m2}: {r:?}");
                let basin = r.metrics.iter().find(|m| m.0 == "basin_radius").unwrap().1;
                assert!(basin >= cfg.nis_eps);
            }
        }
    }

    #[test]
    fn nis_cutoffs_for_sigma_l() {
        let d = uniform();
        let s = make_sigma_l();
        let r = nis_check(&s, &d, 1, 0, &EvoConfig::default()).unwrap();
        let x: Vec<f64> = r.metrics.iter().take(2).map(|m| m.1).collect();
        assert_eq!(x, vec![1.0, 1.0]);
        let post_r = posterior_index(&d, s.mu(), 1).unwrap();
        let post_l = posterior_index(&d, s.mu(), 0).unwrap();
        assert!(post_r.cdf(0.5).abs() < 1e-12 && (post_l.cdf(0.5) - 1.0).abs() < 1e-12);
        // Senders of m_L are uniform on [0, 1/2]. At a symmetric state y the
        // gain from the all-L threshold is 2[2y(1/2 - y) - (1/4 - y^2)/2],
        // which vanishes at y = 1/6, so the basin radius is 5/6 up to the grid.
        let rr = nis_check(&s, &d, 0, 0, &EvoConfig::default()).unwrap();
        let basin = rr.metrics[2].1;
        assert!((basin - 5.0 / 6.0).abs() <= 0.005, "{basin}");
    }

    #[test]
    fn simplex_grid_counts() {
        assert_eq!(simplex_grid(3, 10).len(), 66);
        assert_eq!(simplex_grid(2, 10).len(), 11);
        assert!(simplex_grid(3, 10).iter().all(|w| (w.iter().sum::<f64>() - 1.0).abs() < 1e-12));
    }
}
