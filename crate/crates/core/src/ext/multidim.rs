//! Types that are general 2x2 coordination payoff matrices.

use serde::Serialize;

use crate::cp::finite::{find_finite_trump, is_equilibrium, revealing_profile, Branch, FiniteGame, FiniteProfile};
use crate::equil::enumerate_induced_equilibria;
use crate::error::{config, Result};

/// Payoffs `u_ab` for playing `a` while the opponent plays `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PayoffMatrixType {
    pub ll: f64,
    pub lr: f64,
    pub rl: f64,
    pub rr: f64,
}

impl PayoffMatrixType {
    /// Validated matrix: coordinating on either action must beat
    /// miscoordinating against it.
    pub fn new(ll: f64, lr: f64, rl: f64, rr: f64) -> Result<Self> {
        if !(ll > rl && rr > lr) {
            return config(format!("({ll}, {lr}, {rl}, {rr}) is not a coordination game"));
        }
        Ok(PayoffMatrixType { ll, lr, rl, rr })
    }

    /// The one-dimensional type `u` as a matrix.
    pub fn baseline(u: f64) -> Self {
        PayoffMatrixType { ll: 1.0 - u, lr: 0.0, rl: 0.0, rr: u }
    }

    /// Expected payoff of playing L with probability `a` when the opponent
    /// plays L with probability `q`.
    pub fn payoff(&self, a: f64, q: f64) -> f64 {
        a * (q * self.ll + (1.0 - q) * self.lr) + (1.0 - a) * (q * self.rl + (1.0 - q) * self.rr)
    }

    /// Whether coordinating on L is (weakly) preferred to coordinating on R.
    pub fn prefers_left(&self) -> bool {
        self.ll >= self.rr
    }
}

/// Opponent L-probability that leaves the type indifferent between L and R.
pub fn indifference_threshold(t: &PayoffMatrixType) -> f64 {
    (t.rr - t.lr) / (t.ll - t.rl + t.rr - t.lr)
}

/// Whether every listed type prefers the coordinated outcome that is also
/// its risk-dominant action.
pub fn check_unambiguous<'a>(types: impl IntoIterator<Item = &'a PayoffMatrixType>) -> bool {
    types.into_iter().all(|t| t.prefers_left() == (indifference_threshold(t) <= 0.5))
}

/// The four types of the standard counterexample, in the order
/// `L1, L2, R1, R2`.
pub fn counterexample_types() -> [PayoffMatrixType; 4] {
    [
        PayoffMatrixType { ll: 2.0, lr: 0.0, rl: 0.0, rr: 1.0 },
        PayoffMatrixType { ll: 2.0, lr: -15.0, rl: 0.0, rr: 1.0 },
        PayoffMatrixType { ll: 1.0, lr: 0.0, rl: 0.0, rr: 2.0 },
        PayoffMatrixType { ll: 1.0, lr: 0.0, rl: -15.0, rr: 2.0 },
    ]
}

/// Prior of the counterexample types (same order).
pub const COUNTEREXAMPLE_PRIOR: [f64; 4] = [1.0 / 18.0, 8.0 / 18.0, 1.0 / 18.0, 8.0 / 18.0];

/// Property triple of a symmetric finite profile, with preference sides
/// taken from [`PayoffMatrixType::prefers_left`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FiniteProperties {
    pub mutual_preference_consistent: bool,
    pub coordinated: bool,
    pub binary: bool,
}

impl FiniteProperties {
    pub fn all(&self) -> bool {
        self.mutual_preference_consistent && self.coordinated && self.binary
    }
}

const PROP_TOL: f64 = 1e-12;

/// Probability of coordinating on L after `(m, mp)`, if play there is
/// coordinated among the positive-probability senders.
fn coordinated_left(game: &FiniteGame, p: &FiniteProfile, m: usize, mp: usize) -> Option<f64> {
    let row: Vec<usize> = (0..game.types.len()).filter(|&i| game.prior[i] * p.row_msgs[i][m] > 0.0).collect();
    let col: Vec<usize> = (0..game.types.len()).filter(|&i| game.prior[i] * p.col_msgs[i][mp] > 0.0).collect();
    let mut left = 0.0;
    for b in p.branches(m, mp) {
        let acts = row.iter().map(|&i| b.row_left[i]).chain(col.iter().map(|&j| b.col_left[j]));
        let mut pure = None;
        for a in acts {
            let side = if a >= 1.0 - PROP_TOL {
                true
            } else if a <= PROP_TOL {
                false
            } else {
                return None;
            };
            if *pure.get_or_insert(side) != side {
                return None;
            }
        }
        if pure == Some(true) {
            left += b.weight;
        }
    }
    Some(left)
}

fn used(game: &FiniteGame, msgs: &[Vec<f64>], m: usize) -> bool {
    (0..game.types.len()).any(|i| game.prior[i] * msgs[i][m] > 0.0)
}

/// Message class (`true` = sent only by L-preferring types), or `None`
/// when both sides send it.
fn class(game: &FiniteGame, msgs: &[Vec<f64>], m: usize) -> Option<bool> {
    let by = |left: bool| {
        (0..game.types.len()).any(|i| game.types[i].prefers_left() == left && game.prior[i] * msgs[i][m] > 0.0)
    };
    match (by(true), by(false)) {
        (true, true) => None,
        (l, _) => Some(l),
    }
}

/// Property triple of `p`. Binary communication requires the coordination
/// probability after any used message pair to depend only on the two
/// messages' preference classes.
pub fn finite_properties(game: &FiniteGame, p: &FiniteProfile) -> FiniteProperties {
    let rows: Vec<usize> = (0..p.n_row_msgs()).filter(|&m| used(game, &p.row_msgs, m)).collect();
    let cols: Vec<usize> = (0..p.n_col_msgs()).filter(|&m| used(game, &p.col_msgs, m)).collect();
    let mpc = rows.iter().all(|&m| class(game, &p.row_msgs, m).is_some())
        && cols.iter().all(|&m| class(game, &p.col_msgs, m).is_some());
    let mut coordinated = true;
    let mut by_class: Vec<((bool, bool), f64)> = Vec::new();
    let mut binary = mpc;
    for &m in &rows {
        for &mp in &cols {
            match coordinated_left(game, p, m, mp) {
                None => coordinated = false,
                Some(l) => {
                    if let (Some(a), Some(b)) = (class(game, &p.row_msgs, m), class(game, &p.col_msgs, mp)) {
                        match by_class.iter().find(|(k, _)| *k == (a, b)) {
                            Some((_, v)) if (v - l).abs() > PROP_TOL => binary = false,
                            Some(_) => {}
                            None => by_class.push(((a, b), l)),
                        }
                    }
                }
            }
        }
    }
    FiniteProperties { mutual_preference_consistent: mpc, coordinated, binary: binary && coordinated }
}

/// An unambiguous four-type game: two L-preferring and two R-preferring
/// matrices with different intensities.
pub fn unambiguous_fixture() -> FiniteGame {
    let types = vec![
        PayoffMatrixType { ll: 2.0, lr: 0.0, rl: 0.0, rr: 1.0 },
        PayoffMatrixType { ll: 1.5, lr: -0.2, rl: 0.0, rr: 1.0 },
        PayoffMatrixType { ll: 1.0, lr: 0.0, rl: 0.0, rr: 2.0 },
        PayoffMatrixType { ll: 1.0, lr: 0.0, rl: -0.2, rr: 1.5 },
    ];
    let names = ["L1", "L2", "R1", "R2"].iter().map(|s| s.to_string()).collect();
    FiniteGame::new(names, types, vec![0.2, 0.3, 0.3, 0.2]).expect("valid")
}

/// Equilibrium profiles of `game` used for the spot-check: the
/// preference-revealing profiles with L, R and fair-lottery fallback, and
/// one-message profiles following each equilibrium of the game without
/// communication.
pub fn spot_check_pool(game: &FiniteGame) -> Vec<FiniteProfile> {
    let g0 = game.as_two_sided();
    let n = game.types.len();
    let mut pool: Vec<FiniteProfile> = [0.0, 0.5, 1.0].iter().map(|&l| revealing_profile(&g0, l)).collect();
    for (k, e) in enumerate_induced_equilibria(&g0).into_iter().enumerate() {
        let (r, c) = e.pattern();
        let b = Branch { weight: 1.0, row_left: e.row_left, col_left: e.col_left };
        pool.push(FiniteProfile::single(format!("babbling{k}{r}{c}"), vec![b], n, n));
    }
    pool.retain(|p| is_equilibrium(&g0, p, 1e-12));
    pool
}

/// One spot-check row.
#[derive(Debug, Clone, Serialize)]
pub struct SpotCheckRow {
    pub name: String,
    pub properties: FiniteProperties,
    pub trumped: bool,
    pub search_exhaustive: bool,
    pub agrees: bool,
}

/// For each pool profile, compare the property triple with the outcome of
/// the trump search.
pub fn multidim_spot_check(game: &FiniteGame, tol: f64) -> Vec<SpotCheckRow> {
    spot_check_pool(game)
        .into_iter()
        .map(|p| {
            let props = finite_properties(game, &p);
            let search = find_finite_trump(game, &p, tol);
            let trumped = search.witness.is_some();
            SpotCheckRow {
                name: p.name.clone(),
                properties: props,
                trumped,
                search_exhaustive: search.exhaustive,
                agrees: props.all() != trumped,
            }
        })
        .collect()
}
