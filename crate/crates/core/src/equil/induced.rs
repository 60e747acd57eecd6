//! Equilibria of a 2x2 coordination game between two finite populations
//! of matrix types.

use serde::Serialize;

use crate::error::{config, Result};
use crate::ext::multidim::{counterexample_types, indifference_threshold, PayoffMatrixType};

const TIE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InducedGame {
    pub row: Vec<(PayoffMatrixType, f64)>,
    pub col: Vec<(PayoffMatrixType, f64)>,
}

impl InducedGame {
    /// Two populations of weighted matrix types; weights on each side
    /// must be nonnegative and sum to one.
    pub fn new(row: Vec<(PayoffMatrixType, f64)>, col: Vec<(PayoffMatrixType, f64)>) -> Result<Self> {
        for side in [&row, &col] {
            let total: f64 = side.iter().map(|t| t.1).sum();
            if side.is_empty() || side.iter().any(|t| !(t.1 >= 0.0)) || (total - 1.0).abs() > 1e-9 {
                return config("induced game weights must be nonnegative and sum to one");
            }
        }
        Ok(InducedGame { row, col })
    }

    /// The game left after a message exchange in the standard
    /// counterexample: the row player is `L1` with probability `alpha`
    /// (else `L2`), the column player is `R1` with probability `beta`
    /// (else `R2`).
    pub fn counterexample(alpha: f64, beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) {
            return config("type probabilities must lie in [0, 1]");
        }
        let [l1, l2, r1, r2] = counterexample_types();
        Self::new(vec![(l1, alpha), (l2, 1.0 - alpha)], vec![(r1, beta), (r2, 1.0 - beta)])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InducedEquilibrium {
    /// L-probability of every row type.
    pub row_left: Vec<f64>,
    pub col_left: Vec<f64>,
    pub row_payoffs: Vec<f64>,
    pub col_payoffs: Vec<f64>,
    /// Probability that the column player plays L, as faced by row types.
    pub row_q: f64,
    /// Probability that the row player plays L, as faced by column types.
    pub col_q: f64,
    /// Part of a continuum, or the split among indifferent types is not pinned down.
    pub degenerate: bool,
}

impl InducedEquilibrium {
    /// Action pattern such as `(L,mix)` for row types followed by column types.
    pub fn pattern(&self) -> (String, String) {
        let show = |v: &[f64]| {
            let parts: Vec<&str> = v
                .iter()
                .map(|&p| if p >= 1.0 - 1e-9 { "L" } else if p <= 1e-9 { "R" } else { "mix" })
                .collect();
            format!("({})", parts.join(","))
        };
        (show(&self.row_left), show(&self.col_left))
    }
}

/// Types of one side grouped by indifference threshold, lowest first.
struct Side {
    phi: Vec<f64>,
    members: Vec<Vec<usize>>,
    weight: Vec<f64>,
    n_types: usize,
}

impl Side {
    fn new(types: &[(PayoffMatrixType, f64)]) -> Side {
        let mut order: Vec<(f64, usize)> = types.iter().enumerate().map(|(i, t)| (indifference_threshold(&t.0), i)).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut side = Side { phi: vec![], members: vec![], weight: vec![], n_types: types.len() };
        for (p, i) in order {
            if side.phi.last().is_some_and(|&q| (p - q).abs() <= TIE) {
                side.members.last_mut().unwrap().push(i);
                *side.weight.last_mut().unwrap() += types[i].1;
            } else {
                side.phi.push(p);
                side.members.push(vec![i]);
                side.weight.push(types[i].1);
            }
        }
        side
    }

    fn groups(&self) -> usize {
        self.phi.len()
    }

    /// Mass of the first `k` groups.
    fn mass_below(&self, k: usize) -> f64 {
        self.weight[..k].iter().sum()
    }

    /// Range of opponent L-probabilities under which exactly the first `k`
    /// groups play L.
    fn pure_range(&self, k: usize) -> (f64, f64) {
        let lo = if k == 0 { f64::NEG_INFINITY } else { self.phi[k - 1] };
        let hi = if k == self.groups() { f64::INFINITY } else { self.phi[k] };
        (lo, hi)
    }

    fn left_probs(&self, state: State) -> Vec<f64> {
        let mut out = vec![0.0; self.n_types];
        let (full, mix) = match state {
            State::Pure(k) => (k, None),
            State::Mix(g, t) => (g, Some((g, t))),
        };
        for group in &self.members[..full] {
            for &i in group {
                out[i] = 1.0;
            }
        }
        if let Some((g, t)) = mix {
            for &i in &self.members[g] {
                out[i] = t;
            }
        }
        out
    }

    fn mass(&self, state: State) -> f64 {
        match state {
            State::Pure(k) => self.mass_below(k),
            State::Mix(g, t) => self.mass_below(g) + t * self.weight[g],
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum State {
    Pure(usize),
    Mix(usize, f64),
}

fn within(x: f64, (lo, hi): (f64, f64)) -> bool {
    x >= lo - TIE && x <= hi + TIE
}

/// Mixing weight of group `g` that makes the side's L-mass equal `target`.
/// Returns `(t, degenerate)` for an interior solution.
fn solve_mix(side: &Side, g: usize, target: f64) -> Option<(f64, bool)> {
    let base = side.mass_below(g);
    let w = side.weight[g];
    if w <= TIE {
        return ((base - target).abs() <= TIE).then_some((0.5, true));
    }
    let t = (target - base) / w;
    (t > TIE && t < 1.0 - TIE).then_some((t, side.members[g].len() > 1))
}

/// Interior mixing weights of group `g` that keep the side's L-mass in `range`.
fn mix_interval(side: &Side, g: usize, range: (f64, f64)) -> Option<(f64, bool)> {
    let base = side.mass_below(g);
    let w = side.weight[g];
    if w <= TIE {
        return within(base, range).then_some((0.5, true));
    }
    let lo = ((range.0 - base) / w).max(0.0);
    let hi = ((range.1 - base) / w).min(1.0);
    if hi < lo - TIE || hi <= TIE || lo >= 1.0 - TIE {
        return None;
    }
    if hi - lo <= TIE {
        Some((lo, side.members[g].len() > 1))
    } else {
        Some((0.5 * (lo + hi), true))
    }
}

/// All equilibria of the induced game. Each side's types play L exactly
/// when the opponent L-probability is at least their threshold, so every
/// equilibrium has a lower set of thresholds playing L with at most one
/// mixing group. Continua are represented by one member and flagged.
pub fn enumerate_induced_equilibria(game: &InducedGame) -> Vec<InducedEquilibrium> {
    let row = Side::new(&game.row);
    let col = Side::new(&game.col);
    let mut found: Vec<(State, State, bool)> = Vec::new();

    for k in 0..=row.groups() {
        for kp in 0..=col.groups() {
            let (a, b) = (row.mass_below(k), col.mass_below(kp));
            if within(b, row.pure_range(k)) && within(a, col.pure_range(kp)) {
                found.push((State::Pure(k), State::Pure(kp), false));
            }
        }
    }
    // One side mixes at the group whose threshold equals the other side's
    // pure mass.
    for g in 0..row.groups() {
        for kp in 0..=col.groups() {
            if (col.mass_below(kp) - row.phi[g]).abs() <= TIE {
                if let Some((t, d)) = mix_interval(&row, g, col.pure_range(kp)) {
                    found.push((State::Mix(g, t), State::Pure(kp), d));
                }
            }
        }
    }
    for gp in 0..col.groups() {
        for k in 0..=row.groups() {
            if (row.mass_below(k) - col.phi[gp]).abs() <= TIE {
                if let Some((t, d)) = mix_interval(&col, gp, row.pure_range(k)) {
                    found.push((State::Pure(k), State::Mix(gp, t), d));
                }
            }
        }
    }
    for g in 0..row.groups() {
        for gp in 0..col.groups() {
            if let (Some((t, d1)), Some((tp, d2))) = (solve_mix(&row, g, col.phi[gp]), solve_mix(&col, gp, row.phi[g])) {
                found.push((State::Mix(g, t), State::Mix(gp, tp), d1 || d2));
            }
        }
    }

    let mut out: Vec<InducedEquilibrium> = Vec::new();
    for (rs, cs, degenerate) in found {
        let row_left = row.left_probs(rs);
        let col_left = col.left_probs(cs);
        let (row_q, col_q) = (col.mass(cs), row.mass(rs));
        let same = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9);
        if out.iter().any(|e| same(&e.row_left, &row_left) && same(&e.col_left, &col_left)) {
            continue;
        }
        let row_payoffs = game.row.iter().zip(&row_left).map(|(t, &a)| t.0.payoff(a, row_q)).collect();
        let col_payoffs = game.col.iter().zip(&col_left).map(|(t, &a)| t.0.payoff(a, col_q)).collect();
        out.push(InducedEquilibrium { row_left, col_left, row_payoffs, col_payoffs, row_q, col_q, degenerate });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_equilibrium(game: &InducedGame, e: &InducedEquilibrium) -> bool {
        let ok = |types: &[(PayoffMatrixType, f64)], left: &[f64], q: f64| {
            types.iter().zip(left).all(|(t, &a)| {
                let best = t.0.payoff(1.0, q).max(t.0.payoff(0.0, q));
                t.1 == 0.0 || t.0.payoff(a, q) >= best - 1e-9
            })
        };
        ok(&game.row, &e.row_left, e.row_q) && ok(&game.col, &e.col_left, e.col_q)
    }

    #[test]
    fn symmetric_game_has_three_equilibria() {
        let t = PayoffMatrixType::baseline(0.5);
        let g = InducedGame::new(vec![(t, 1.0)], vec![(t, 1.0)]).unwrap();
        let eqs = enumerate_induced_equilibria(&g);
        let pats: Vec<_> = eqs.iter().map(|e| e.pattern()).collect();
        assert_eq!(eqs.len(), 3, "{pats:?}");
        assert!(pats.contains(&("(mix)".into(), "(mix)".into())));
    }

    #[test]
    fn counterexample_half_half() {
        let g = InducedGame::counterexample(0.5, 0.5).unwrap();
        let eqs = enumerate_induced_equilibria(&g);
        assert!(eqs.iter().all(|e| is_equilibrium(&g, e)));
        let pats: Vec<_> = eqs.iter().map(|e| e.pattern()).collect();
        assert!(pats.contains(&("(L,R)".into(), "(R,L)".into())), "{pats:?}");
        assert!(pats.contains(&("(L,L)".into(), "(L,L)".into())));
        assert!(pats.contains(&("(R,R)".into(), "(R,R)".into())));
    }

    #[test]
    fn brute_force_agrees_on_grid() {
        // Every pure profile that is an equilibrium must be enumerated.
        for (alpha, beta) in [(0.1, 0.9), (0.3, 0.3), (0.5, 0.5), (0.7, 0.2), (0.9, 0.9)] {
            let g = InducedGame::counterexample(alpha, beta).unwrap();
            let eqs = enumerate_induced_equilibria(&g);
            for bits in 0u32..16 {
                let rl = vec![f64::from(bits & 1), f64::from((bits >> 1) & 1)];
                let cl = vec![f64::from((bits >> 2) & 1), f64::from((bits >> 3) & 1)];
                let row_q = cl[0] * beta + cl[1] * (1.0 - beta);
                let col_q = rl[0] * alpha + rl[1] * (1.0 - alpha);
                let cand = InducedEquilibrium {
                    row_left: rl.clone(),
                    col_left: cl.clone(),
                    row_payoffs: vec![],
                    col_payoffs: vec![],
                    row_q,
                    col_q,
                    degenerate: false,
                };
                if is_equilibrium(&g, &cand) {
                    assert!(eqs.iter().any(|e| e.row_left == rl && e.col_left == cl), "{alpha} {beta} {bits}");
                }
            }
        }
    }
}
