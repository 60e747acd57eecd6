//! Renegotiation in games with finitely many matrix types.
//!
//! A profile lists, for each side, every type's distribution over that
//! side's messages and, for every message pair, a public lottery over
//! action profiles (one L-probability per type on each side). Public
//! lotteries stand for jointly controlled lotteries run with further
//! messages, so any lottery over equilibria of the posterior game is a
//! valid continuation.
//!
//! Weak communication-proofness is decided with a two-level search: the
//! first level collects every trump of a message pair from a candidate
//! family that includes one further round of two-message communication;
//! the second level looks for a trump of each of those.

use serde::Serialize;

use crate::equil::{enumerate_induced_equilibria, InducedGame};
use crate::error::{config, Result};
use crate::ext::multidim::{counterexample_types, PayoffMatrixType, COUNTEREXAMPLE_PRIOR};

/// A finite symmetric type space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteGame {
    pub names: Vec<String>,
    pub types: Vec<PayoffMatrixType>,
    pub prior: Vec<f64>,
}

impl FiniteGame {
    pub fn new(names: Vec<String>, types: Vec<PayoffMatrixType>, prior: Vec<f64>) -> Result<Self> {
        if names.len() != types.len() || types.len() != prior.len() || types.is_empty() {
            return config("names, types and prior must have the same nonzero length");
        }
        if prior.iter().any(|p| !(*p >= 0.0)) || (prior.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return config("prior must be a probability vector");
        }
        Ok(FiniteGame { names, types, prior })
    }

    /// Types `L1, L2, R1, R2` with prior `1/18, 8/18, 1/18, 8/18`.
    pub fn counterexample() -> Self {
        let names = ["L1", "L2", "R1", "R2"].iter().map(|s| s.to_string()).collect();
        FiniteGame::new(names, counterexample_types().to_vec(), COUNTEREXAMPLE_PRIOR.to_vec()).expect("valid")
    }

    /// Both seats drawing from the prior.
    pub fn as_two_sided(&self) -> InducedGame {
        let side: Vec<(PayoffMatrixType, f64)> = self.types.iter().copied().zip(self.prior.iter().copied()).collect();
        InducedGame { row: side.clone(), col: side }
    }
}

/// One outcome of a public lottery.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    pub weight: f64,
    pub row_left: Vec<f64>,
    pub col_left: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteProfile {
    pub name: String,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    /// `[type][message]`.
    pub row_msgs: Vec<Vec<f64>>,
    pub col_msgs: Vec<Vec<f64>>,
    /// `[row message * col messages + col message]`.
    pub cont: Vec<Vec<Branch>>,
}

impl FiniteProfile {
    /// A profile without further messages.
    pub fn single(name: impl Into<String>, branches: Vec<Branch>, n_row: usize, n_col: usize) -> Self {
        FiniteProfile {
            name: name.into(),
            row_labels: vec!["m1".into()],
            col_labels: vec!["m1".into()],
            row_msgs: vec![vec![1.0]; n_row],
            col_msgs: vec![vec![1.0]; n_col],
            cont: vec![branches],
        }
    }

    pub fn n_row_msgs(&self) -> usize {
        self.row_labels.len()
    }

    pub fn n_col_msgs(&self) -> usize {
        self.col_labels.len()
    }

    pub fn branches(&self, m: usize, mp: usize) -> &[Branch] {
        &self.cont[m * self.n_col_msgs() + mp]
    }
}

fn pure(weight: f64, row: Vec<f64>, col: Vec<f64>) -> Branch {
    Branch { weight, row_left: row, col_left: col }
}

/// Expected payoff of a type playing L with probability `a` against an
/// opponent population of total mass `mass` of which `left` plays L.
fn value(t: &PayoffMatrixType, a: f64, left: f64, mass: f64) -> f64 {
    a * (left * t.ll + (mass - left) * t.lr) + (1.0 - a) * (left * t.rl + (mass - left) * t.rr)
}

fn best_value(t: &PayoffMatrixType, left: f64, mass: f64) -> f64 {
    value(t, 1.0, left, mass).max(value(t, 0.0, left, mass))
}

/// Following payoff and best deviation payoff of every type on both sides.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileValues {
    pub row_follow: Vec<f64>,
    pub row_best: Vec<f64>,
    pub col_follow: Vec<f64>,
    pub col_best: Vec<f64>,
    /// `[type][message]`: value of sending the message and then
    /// best-responding.
    pub row_message_best: Vec<Vec<f64>>,
    pub col_message_best: Vec<Vec<f64>>,
}

/// Mass of the side's types sending `m`, and of those sending `m` and
/// playing L in `branch_left`.
fn side_mass(types: &[(PayoffMatrixType, f64)], msgs: &[Vec<f64>], m: usize, branch_left: Option<&[f64]>) -> f64 {
    types
        .iter()
        .enumerate()
        .map(|(i, t)| t.1 * msgs[i][m] * branch_left.map_or(1.0, |l| l[i]))
        .sum()
}

pub fn profile_values(game: &InducedGame, p: &FiniteProfile) -> ProfileValues {
    let (nr, nc) = (p.n_row_msgs(), p.n_col_msgs());
    let mut v = ProfileValues {
        row_follow: vec![0.0; game.row.len()],
        row_best: vec![0.0; game.row.len()],
        col_follow: vec![0.0; game.col.len()],
        col_best: vec![0.0; game.col.len()],
        row_message_best: vec![],
        col_message_best: vec![],
    };
    // Row side: value of each own message against every column message.
    let mut row_msg_follow = vec![vec![0.0; nr]; game.row.len()];
    let mut row_msg_best = vec![vec![0.0; nr]; game.row.len()];
    let mut col_msg_follow = vec![vec![0.0; nc]; game.col.len()];
    let mut col_msg_best = vec![vec![0.0; nc]; game.col.len()];
    for m in 0..nr {
        for mp in 0..nc {
            let col_mass = side_mass(&game.col, &p.col_msgs, mp, None);
            let row_mass = side_mass(&game.row, &p.row_msgs, m, None);
            for b in p.branches(m, mp) {
                let col_left = side_mass(&game.col, &p.col_msgs, mp, Some(&b.col_left));
                let row_left = side_mass(&game.row, &p.row_msgs, m, Some(&b.row_left));
                for (i, t) in game.row.iter().enumerate() {
                    row_msg_follow[i][m] += b.weight * value(&t.0, b.row_left[i], col_left, col_mass);
                    row_msg_best[i][m] += b.weight * best_value(&t.0, col_left, col_mass);
                }
                for (j, t) in game.col.iter().enumerate() {
                    col_msg_follow[j][mp] += b.weight * value(&t.0, b.col_left[j], row_left, row_mass);
                    col_msg_best[j][mp] += b.weight * best_value(&t.0, row_left, row_mass);
                }
            }
        }
    }
    for i in 0..game.row.len() {
        v.row_follow[i] = (0..nr).map(|m| p.row_msgs[i][m] * row_msg_follow[i][m]).sum();
        v.row_best[i] = row_msg_best[i].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    }
    for j in 0..game.col.len() {
        v.col_follow[j] = (0..nc).map(|m| p.col_msgs[j][m] * col_msg_follow[j][m]).sum();
        v.col_best[j] = col_msg_best[j].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    }
    v.row_message_best = row_msg_best;
    v.col_message_best = col_msg_best;
    v
}

/// Whether no type with positive probability gains from a different
/// message or action.
pub fn is_equilibrium(game: &InducedGame, p: &FiniteProfile, tol: f64) -> bool {
    let v = profile_values(game, p);
    let ok = |types: &[(PayoffMatrixType, f64)], f: &[f64], b: &[f64]| {
        types.iter().zip(f.iter().zip(b)).all(|(t, (f, b))| t.1 <= 0.0 || *f >= *b - tol)
    };
    ok(&game.row, &v.row_follow, &v.row_best) && ok(&game.col, &v.col_follow, &v.col_best)
}

/// The game between the senders of `m` (row) and `mp` (column).
pub fn posterior_game(game: &InducedGame, p: &FiniteProfile, m: usize, mp: usize) -> Option<InducedGame> {
    let post = |types: &[(PayoffMatrixType, f64)], msgs: &[Vec<f64>], k: usize| {
        let mass = side_mass(types, msgs, k, None);
        (mass > 1e-15).then(|| types.iter().enumerate().map(|(i, t)| (t.0, t.1 * msgs[i][k] / mass)).collect::<Vec<_>>())
    };
    Some(InducedGame { row: post(&game.row, &p.row_msgs, m)?, col: post(&game.col, &p.col_msgs, mp)? })
}

/// Payoffs of every type from a continuation lottery in `game`.
pub fn continuation_payoffs(game: &InducedGame, branches: &[Branch]) -> (Vec<f64>, Vec<f64>) {
    let p = FiniteProfile::single("", branches.to_vec(), game.row.len(), game.col.len());
    let v = profile_values(game, &p);
    (v.row_follow, v.col_follow)
}

/// Per-type gains if every positive-probability type weakly gains and one
/// strictly gains.
fn pareto_gains(
    game: &InducedGame,
    new: &(Vec<f64>, Vec<f64>),
    old: &(Vec<f64>, Vec<f64>),
    tol: f64,
) -> Option<(Vec<f64>, Vec<f64>)> {
    let gains = |types: &[(PayoffMatrixType, f64)], n: &[f64], o: &[f64]| -> Vec<f64> {
        types.iter().zip(n.iter().zip(o)).map(|(t, (n, o))| if t.1 > 0.0 { n - o } else { 0.0 }).collect()
    };
    let (gr, gc) = (gains(&game.row, &new.0, &old.0), gains(&game.col, &new.1, &old.1));
    let all = gr.iter().chain(&gc);
    if all.clone().any(|&g| g < -tol) || !all.clone().any(|&g| g > tol) {
        return None;
    }
    Some((gr, gc))
}

/// Equilibria of the posterior game without further messages.
fn induced_candidates(game: &InducedGame) -> Vec<FiniteProfile> {
    enumerate_induced_equilibria(game)
        .into_iter()
        .map(|e| {
            let (r, c) = e.pattern();
            FiniteProfile::single(format!("{r}{c}"), vec![pure(1.0, e.row_left, e.col_left)], game.row.len(), game.col.len())
        })
        .collect()
}

/// Public lottery between everyone playing L (weight `lambda`) and
/// everyone playing R.
pub fn coordination_lottery(game: &InducedGame, lambda: f64) -> FiniteProfile {
    let (nr, nc) = (game.row.len(), game.col.len());
    FiniteProfile::single(
        format!("lottery({lambda:.6})"),
        vec![pure(lambda, vec![1.0; nr], vec![1.0; nc]), pure(1.0 - lambda, vec![0.0; nr], vec![0.0; nc])],
        nr,
        nc,
    )
}

/// The lottery weight in the middle of the range that leaves no
/// positive-probability type worse off than `old`, if that range exists.
fn lottery_candidate(game: &InducedGame, old: &(Vec<f64>, Vec<f64>), tol: f64) -> Option<FiniteProfile> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let sides = [(&game.row, &old.0), (&game.col, &old.1)];
    for (types, o) in sides {
        for (t, &base) in types.iter().zip(o.iter()) {
            if t.1 <= 0.0 {
                continue;
            }
            // lambda * ll + (1 - lambda) * rr >= base
            let slope = t.0.ll - t.0.rr;
            let need = base - t.0.rr;
            if slope.abs() < 1e-15 {
                if need > tol {
                    return None;
                }
            } else if slope > 0.0 {
                lo = lo.max(need / slope);
            } else {
                hi = hi.min(need / slope);
            }
        }
    }
    (lo <= hi + tol).then(|| coordination_lottery(game, (0.5 * (lo + hi)).clamp(0.0, 1.0)))
}

/// Two-message construction against a miscoordinating continuation: the
/// designated type on each side always sends `m1`, the other type sends
/// `m1` with probability one third. Play after `(m1, m1)` is `inner`;
/// after a single `m2` everyone follows the action of the `m2` sender's
/// type; after `(m2, m2)` a fair lottery between the coordinated outcomes.
pub fn partial_reveal_profile(game: &InducedGame, row_keep: usize, col_keep: usize, inner: &Branch) -> FiniteProfile {
    let (nr, nc) = (game.row.len(), game.col.len());
    let msgs = |n: usize, keep: usize| (0..n).map(|i| if i == keep { vec![1.0, 0.0] } else { vec![1.0 / 3.0, 2.0 / 3.0] }).collect();
    let other = |n: usize, keep: usize, left: &[f64]| (0..n).find(|&i| i != keep).map_or(0.0, |i| left[i]);
    let row_other = other(nr, row_keep, &inner.row_left);
    let col_other = other(nc, col_keep, &inner.col_left);
    let all = |a: f64| pure(1.0, vec![a; nr], vec![a; nc]);
    FiniteProfile {
        name: "partial_reveal".into(),
        row_labels: vec!["m1".into(), "m2".into()],
        col_labels: vec!["m1".into(), "m2".into()],
        row_msgs: msgs(nr, row_keep),
        col_msgs: msgs(nc, col_keep),
        cont: vec![
            vec![inner.clone()],
            vec![all(col_other)],
            vec![all(row_other)],
            vec![pure(0.5, vec![1.0; nr], vec![1.0; nc]), pure(0.5, vec![0.0; nr], vec![0.0; nc])],
        ],
    }
}

/// Partial-reveal candidates for every choice of designated types among
/// the positive-probability types, when the continuation is a single
/// pure profile.
fn partial_reveal_candidates(game: &InducedGame, old_branches: &[Branch]) -> Vec<FiniteProfile> {
    let [inner] = old_branches else { return vec![] };
    let pos = |t: &[(PayoffMatrixType, f64)]| (0..t.len()).filter(|&i| t[i].1 > 0.0).collect::<Vec<_>>();
    let (pr, pc) = (pos(&game.row), pos(&game.col));
    if pr.len() != 2 || pc.len() != 2 {
        return vec![];
    }
    // Restrict to the positive types so that the "other" type is well defined.
    let mut out = Vec::new();
    for &rk in &pr {
        for &ck in &pc {
            let mut p = partial_reveal_profile(game, rk, ck, inner);
            let ro = pr.iter().copied().find(|&i| i != rk).unwrap();
            let co = pc.iter().copied().find(|&i| i != ck).unwrap();
            for (i, row) in p.row_msgs.iter_mut().enumerate() {
                if i != rk && i != ro {
                    *row = vec![1.0, 0.0];
                }
            }
            for (j, col) in p.col_msgs.iter_mut().enumerate() {
                if j != ck && j != co {
                    *col = vec![1.0, 0.0];
                }
            }
            let all = |a: f64| pure(1.0, vec![a; game.row.len()], vec![a; game.col.len()]);
            p.cont[1] = vec![all(inner.col_left[co])];
            p.cont[2] = vec![all(inner.row_left[ro])];
            out.push(p);
        }
    }
    out
}

/// A trump found at some level of the search.
#[derive(Debug, Clone, Serialize)]
pub struct FiniteWitness {
    pub row_message: String,
    pub col_message: String,
    pub candidate: String,
    pub row_gains: Vec<(String, f64)>,
    pub col_gains: Vec<(String, f64)>,
    #[serde(skip)]
    pub profile: FiniteProfile,
}

fn witness(names: &[String], m: &str, mp: &str, p: &FiniteProfile, gains: (Vec<f64>, Vec<f64>)) -> FiniteWitness {
    let named = |g: Vec<f64>| names.iter().cloned().zip(g).collect();
    FiniteWitness {
        row_message: m.to_string(),
        col_message: mp.to_string(),
        candidate: p.name.clone(),
        row_gains: named(gains.0),
        col_gains: named(gains.1),
        profile: p.clone(),
    }
}

const THIRDS: [f64; 4] = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];

/// Calls `f` with every profile of one further round of two-message talk
/// in which each positive-probability type sends `m1` with probability in
/// {0, 1/3, 2/3, 1} and every message pair is followed by an equilibrium
/// of its posterior game or a fair coordination lottery.
pub fn for_each_one_round_profile(game: &InducedGame, mut f: impl FnMut(&FiniteProfile)) {
    let pos = |t: &[(PayoffMatrixType, f64)]| (0..t.len()).filter(|&i| t[i].1 > 0.0).collect::<Vec<_>>();
    let (pr, pc) = (pos(&game.row), pos(&game.col));
    let splits = |n: usize, idx: &[usize]| -> Vec<Vec<f64>> {
        let mut out = vec![];
        let total = THIRDS.len().pow(idx.len() as u32);
        for code in 0..total {
            let mut probs = vec![1.0; n];
            let mut c = code;
            for &i in idx {
                probs[i] = THIRDS[c % THIRDS.len()];
                c /= THIRDS.len();
            }
            out.push(probs);
        }
        out
    };
    let to_msgs = |probs: &[f64], types: &[(PayoffMatrixType, f64)]| -> (Vec<String>, Vec<Vec<f64>>) {
        let m1: f64 = types.iter().zip(probs).map(|(t, p)| t.1 * p).sum();
        let m2: f64 = types.iter().zip(probs).map(|(t, p)| t.1 * (1.0 - p)).sum();
        if m1 > 1e-15 && m2 > 1e-15 {
            (vec!["m1".into(), "m2".into()], probs.iter().map(|&p| vec![p, 1.0 - p]).collect())
        } else {
            (vec!["m1".into()], probs.iter().map(|_| vec![1.0]).collect())
        }
    };
    for rp in splits(game.row.len(), &pr) {
        let (rl, rm) = to_msgs(&rp, &game.row);
        for cp in splits(game.col.len(), &pc) {
            let (cl, cm) = to_msgs(&cp, &game.col);
            let mut base = FiniteProfile {
                name: "one-round".into(),
                row_labels: rl.clone(),
                col_labels: cl.clone(),
                row_msgs: rm.clone(),
                col_msgs: cm,
                cont: vec![],
            };
            let mut options: Vec<Vec<Vec<Branch>>> = Vec::new();
            for m in 0..rl.len() {
                for mp in 0..cl.len() {
                    let pg = posterior_game(game, &base, m, mp).expect("used messages");
                    let mut opts: Vec<Vec<Branch>> = induced_candidates(&pg).into_iter().map(|p| p.cont[0].clone()).collect();
                    opts.push(coordination_lottery(&pg, 0.5).cont[0].clone());
                    options.push(opts);
                }
            }
            let mut idx = vec![0usize; options.len()];
            loop {
                base.cont = idx.iter().zip(&options).map(|(&k, o)| o[k].clone()).collect();
                base.name = format!("one-round{:?}/{:?}:{:?}", rp, cp, idx);
                f(&base);
                let mut pos = 0;
                while pos < idx.len() {
                    idx[pos] += 1;
                    if idx[pos] < options[pos].len() {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                }
                if pos == idx.len() {
                    break;
                }
            }
        }
    }
}

/// Every candidate of the given level that trumps continuation `old` in
/// `game`. Level 1 includes one further round of talk; level 2 only the
/// no-talk equilibria, coordination lotteries and the partial-reveal
/// construction.
fn trumps(game: &InducedGame, old_branches: &[Branch], with_talk: bool, tol: f64, first_only: bool) -> Vec<(FiniteProfile, (Vec<f64>, Vec<f64>))> {
    let old = continuation_payoffs(game, old_branches);
    let mut out = Vec::new();
    let consider = |p: &FiniteProfile, out: &mut Vec<(FiniteProfile, (Vec<f64>, Vec<f64>))>| {
        if first_only && !out.is_empty() {
            return;
        }
        let v = profile_values(game, p);
        if let Some(g) = pareto_gains(game, &(v.row_follow.clone(), v.col_follow.clone()), &old, tol) {
            if is_equilibrium(game, p, tol) {
                out.push((p.clone(), g));
            }
        }
    };
    for p in induced_candidates(game) {
        consider(&p, &mut out);
    }
    if let Some(p) = lottery_candidate(game, &old, tol) {
        consider(&p, &mut out);
    }
    for p in partial_reveal_candidates(game, old_branches) {
        consider(&p, &mut out);
    }
    if with_talk && !(first_only && !out.is_empty()) {
        for_each_one_round_profile(game, |p| consider(p, &mut out));
    }
    out
}

/// Preference-revealing profile: types preferring L send `m_L`, the others
/// `m_R`; matching messages coordinate on the shared preference and
/// opposing messages are followed by L with probability `lambda`.
pub fn revealing_profile(game: &InducedGame, lambda: f64) -> FiniteProfile {
    let (nr, nc) = (game.row.len(), game.col.len());
    let msgs = |t: &[(PayoffMatrixType, f64)]| {
        t.iter().map(|(u, _)| if u.prefers_left() { vec![1.0, 0.0] } else { vec![0.0, 1.0] }).collect::<Vec<_>>()
    };
    let all = |w: f64, a: f64| pure(w, vec![a; nr], vec![a; nc]);
    let mixed = if lambda <= 0.0 {
        vec![all(1.0, 0.0)]
    } else if lambda >= 1.0 {
        vec![all(1.0, 1.0)]
    } else {
        vec![all(lambda, 1.0), all(1.0 - lambda, 0.0)]
    };
    FiniteProfile {
        name: format!("revealing({lambda:.6})"),
        row_labels: vec!["m_L".into(), "m_R".into()],
        col_labels: vec!["m_L".into(), "m_R".into()],
        row_msgs: msgs(&game.row),
        col_msgs: msgs(&game.col),
        cont: vec![vec![all(1.0, 1.0)], mixed.clone(), mixed, vec![all(1.0, 0.0)]],
    }
}

/// Largest number of positive-probability types per side for which the
/// one-round talk enumeration is run by [`find_finite_trump`].
pub const TALK_SEARCH_LIMIT: usize = 2;

/// Result of a first-trump search over every message pair.
#[derive(Debug, Clone, Serialize)]
pub struct TrumpSearch {
    pub witness: Option<FiniteWitness>,
    /// False when some posterior game was too large for the one-round talk
    /// enumeration and no trump was found there by the other candidates.
    pub exhaustive: bool,
}

/// Search for one trump of `sigma`, trying the no-talk candidates and
/// preference-revealing profiles before the one-round talk enumeration.
pub fn find_finite_trump(game: &FiniteGame, sigma: &FiniteProfile, tol: f64) -> TrumpSearch {
    let g0 = game.as_two_sided();
    let mut exhaustive = true;
    for m in 0..sigma.n_row_msgs() {
        for mp in 0..sigma.n_col_msgs() {
            let Some(full) = posterior_game(&g0, sigma, m, mp) else { continue };
            let (pg, branches, rows, cols) = restrict(&full, sigma.branches(m, mp));
            let old = continuation_payoffs(&pg, &branches);
            let mut found = trumps(&pg, &branches, false, tol, true);
            if found.is_empty() {
                for lambda in [0.0, 0.5, 1.0] {
                    let p = revealing_profile(&pg, lambda);
                    let v = profile_values(&pg, &p);
                    if let Some(g) = pareto_gains(&pg, &(v.row_follow, v.col_follow), &old, tol) {
                        if is_equilibrium(&pg, &p, tol) {
                            found.push((p, g));
                            break;
                        }
                    }
                }
            }
            if found.is_empty() {
                if pg.row.len() <= TALK_SEARCH_LIMIT && pg.col.len() <= TALK_SEARCH_LIMIT {
                    found = trumps(&pg, &branches, true, tol, true);
                } else {
                    exhaustive = false;
                }
            }
            if let Some((p, gains)) = found.into_iter().next() {
                let row_names: Vec<String> = rows.iter().map(|&i| game.names[i].clone()).collect();
                let col_names: Vec<String> = cols.iter().map(|&i| game.names[i].clone()).collect();
                let mut w = witness(&row_names, &sigma.row_labels[m], &sigma.col_labels[mp], &p, gains);
                w.col_gains = col_names.into_iter().zip(w.col_gains.into_iter().map(|g| g.1)).collect();
                return TrumpSearch { witness: Some(w), exhaustive: true };
            }
        }
    }
    TrumpSearch { witness: None, exhaustive }
}

#[derive(Debug, Clone, Serialize)]
pub struct FiniteCpVerdict {
    pub strongly_cp: bool,
    pub weakly_cp: bool,
    /// A trump of the strategy (the first found).
    pub witness: Option<FiniteWitness>,
    /// Number of trumps found in the first-level search.
    pub first_level_trumps: usize,
    /// First-level trumps that no second-level candidate trumps.
    pub untrumped: Vec<FiniteWitness>,
}

/// Whether a profile is trumped at some positive-probability message pair
/// by a second-level candidate.
fn is_trumped_without_talk(game: &InducedGame, p: &FiniteProfile, tol: f64) -> bool {
    for m in 0..p.n_row_msgs() {
        for mp in 0..p.n_col_msgs() {
            if let Some(pg) = posterior_game(game, p, m, mp) {
                if !trumps(&pg, p.branches(m, mp), false, tol, true).is_empty() {
                    return true;
                }
            }
        }
    }
    false
}

/// Drop the zero-probability types of a posterior game, returning the
/// kept indices of each side.
pub fn restrict(game: &InducedGame, branches: &[Branch]) -> (InducedGame, Vec<Branch>, Vec<usize>, Vec<usize>) {
    let keep = |t: &[(PayoffMatrixType, f64)]| (0..t.len()).filter(|&i| t[i].1 > 0.0).collect::<Vec<_>>();
    let (rows, cols) = (keep(&game.row), keep(&game.col));
    let g = InducedGame {
        row: rows.iter().map(|&i| game.row[i]).collect(),
        col: cols.iter().map(|&j| game.col[j]).collect(),
    };
    let b = branches
        .iter()
        .map(|b| Branch {
            weight: b.weight,
            row_left: rows.iter().map(|&i| b.row_left[i]).collect(),
            col_left: cols.iter().map(|&j| b.col_left[j]).collect(),
        })
        .collect();
    (g, b, rows, cols)
}

/// Strong and weak communication-proofness of a symmetric finite profile.
/// Mirror-image message pairs are examined once.
pub fn finite_cp_verdict(game: &FiniteGame, sigma: &FiniteProfile, tol: f64) -> FiniteCpVerdict {
    let g0 = game.as_two_sided();
    let mut witness_out = None;
    let mut count = 0;
    let mut untrumped = Vec::new();
    for m in 0..sigma.n_row_msgs() {
        for mp in m..sigma.n_col_msgs() {
            let Some(full) = posterior_game(&g0, sigma, m, mp) else { continue };
            let (pg, branches, rows, cols) = restrict(&full, sigma.branches(m, mp));
            for (p, gains) in trumps(&pg, &branches, true, tol, false) {
                count += 1;
                let row_names: Vec<String> = rows.iter().map(|&i| game.names[i].clone()).collect();
                let col_names: Vec<String> = cols.iter().map(|&i| game.names[i].clone()).collect();
                let mut w = witness(&row_names, &sigma.row_labels[m], &sigma.col_labels[mp], &p, gains);
                w.col_gains = col_names.into_iter().zip(w.col_gains.into_iter().map(|g| g.1)).collect();
                if !is_trumped_without_talk(&pg, &p, tol) {
                    untrumped.push(w.clone());
                }
                // Prefer the named construction as the reported witness.
                if witness_out.is_none() || p.name == "partial_reveal" {
                    if witness_out.as_ref().map_or(true, |x: &FiniteWitness| x.candidate != "partial_reveal") {
                        witness_out = Some(w);
                    }
                }
            }
        }
    }
    FiniteCpVerdict { strongly_cp: count == 0, weakly_cp: untrumped.is_empty(), witness: witness_out, first_level_trumps: count, untrumped }
}

/// The equilibrium of the counterexample: L types send `m_L`, R types send
/// `m_R`; matching messages coordinate on the shared preference; after
/// opposing messages `L1` and `R1` insist while `L2` and `R2` give in.
pub fn counterexample_strategy() -> FiniteProfile {
    let (l, r) = (1.0, 0.0);
    // Type order L1, L2, R1, R2. Actions of types that cannot have sent a
    // message are set to their choice in the corresponding role.
    let as_l_sender_vs_r = vec![l, r, r, l];
    let as_r_sender_vs_l = vec![l, r, r, l];
    let msgs = vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]];
    FiniteProfile {
        name: "counterexample".into(),
        row_labels: vec!["m_L".into(), "m_R".into()],
        col_labels: vec!["m_L".into(), "m_R".into()],
        row_msgs: msgs.clone(),
        col_msgs: msgs,
        cont: vec![
            vec![pure(1.0, vec![l; 4], vec![l; 4])],
            vec![pure(1.0, as_l_sender_vs_r.clone(), as_r_sender_vs_l.clone())],
            vec![pure(1.0, as_r_sender_vs_l, as_l_sender_vs_r)],
            vec![pure(1.0, vec![r; 4], vec![r; 4])],
        ],
    }
}
