//! Two-player coordination over `k > 2` ordered actions. A type is the
//! vector of payoffs from coordinating on each action; miscoordination
//! pays zero.
//!
//! Type distributions are finite (weighted type vectors). The module
//! builds the bit-lottery strategy over `2k` messages and the trumping
//! profiles used against strategies that miscoordinate after a common
//! message.

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{ModelError, Result};
use crate::ext::lottery::{alpha_window, common_denominator, rational_approximation, to_f64};

/// Payoffs of coordinating on each action.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiActionType(Vec<f64>);

impl MultiActionType {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() <= 2 {
            return Err(ModelError::Config(format!("need more than two actions, got {}", values.len())));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(ModelError::Config("type values must lie in [0, 1]".into()));
        }
        Ok(MultiActionType(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    /// Lowest-index action among the maximizers.
    pub fn preferred(&self) -> usize {
        let m = self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        self.0.iter().position(|&v| v == m).expect("nonempty")
    }
}

/// Finite distribution over multi-action types.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiActionDist {
    pub types: Vec<MultiActionType>,
    pub weights: Vec<f64>,
}

impl MultiActionDist {
    pub fn new(types: Vec<MultiActionType>, weights: Vec<f64>) -> Result<Self> {
        if types.is_empty() || types.len() != weights.len() {
            return Err(ModelError::Config("types and weights must have the same nonzero length".into()));
        }
        let k = types[0].k();
        if types.iter().any(|t| t.k() != k) {
            return Err(ModelError::Config("all types need the same number of actions".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(ModelError::Config("weights must form a probability vector".into()));
        }
        Ok(MultiActionDist { types, weights })
    }

    pub fn k(&self) -> usize {
        self.types[0].k()
    }

    /// Probability that a random type prefers each action.
    pub fn preferred_probs(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.k()];
        for (t, w) in self.types.iter().zip(&self.weights) {
            p[t.preferred()] += w;
        }
        p
    }
}

/// The bit-lottery strategy over `k` actions. Message `(i, b)` announces
/// preferred action `i` and a uniform random bit `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SigmaCMulti {
    pub k: usize,
}

impl SigmaCMulti {
    pub fn new(k: usize) -> Result<Self> {
        if k <= 2 {
            return Err(ModelError::Config(format!("need more than two actions, got {k}")));
        }
        Ok(SigmaCMulti { k })
    }

    /// Labels `m_a{i}_{b}` with 1-based action index `i`.
    pub fn labels(&self) -> Vec<String> {
        (0..2 * self.k).map(|m| format!("m_a{}_{}", m / 2 + 1, m % 2)).collect()
    }

    pub fn n_messages(&self) -> usize {
        2 * self.k
    }

    fn decode(m: usize) -> (usize, usize) {
        (m / 2, m % 2)
    }

    /// Message distribution of a type: its preferred action with each bit
    /// equally likely.
    pub fn message(&self, u: &MultiActionType) -> Vec<(usize, f64)> {
        let i = u.preferred();
        vec![(2 * i, 0.5), (2 * i + 1, 0.5)]
    }

    /// Action after own message `m` and opponent message `mp`.
    pub fn action(&self, m: usize, mp: usize) -> usize {
        let ((i, b), (j, c)) = (Self::decode(m), Self::decode(mp));
        if (i <= j && b == c) || (i >= j && b != c) {
            i
        } else {
            j
        }
    }

    /// Payoff of type `u` sending `m` against a population following the
    /// strategy with types drawn from `dist`.
    pub fn message_value(&self, u: &MultiActionType, m: usize, dist: &MultiActionDist) -> f64 {
        let mut acc = 0.0;
        for (t, w) in dist.types.iter().zip(&dist.weights) {
            for (mp, pm) in self.message(t) {
                let a = self.action(m, mp);
                if self.action(mp, m) == a {
                    acc += w * pm * u.values()[a];
                }
            }
        }
        acc
    }

    /// Payoff of type `u` following the strategy.
    pub fn payoff(&self, u: &MultiActionType, dist: &MultiActionDist) -> f64 {
        self.message(u).into_iter().map(|(m, p)| p * self.message_value(u, m, dist)).sum()
    }

    /// Largest gain any type in `dist` could obtain by sending another
    /// message. Actions are deterministic and coordinated after every
    /// pair, so message deviations are the only ones that can pay.
    pub fn max_regret(&self, dist: &MultiActionDist) -> f64 {
        dist.types
            .iter()
            .map(|u| {
                let best = (0..self.n_messages()).map(|m| self.message_value(u, m, dist)).fold(f64::NEG_INFINITY, f64::max);
                best - self.payoff(u, dist)
            })
            .fold(0.0, f64::max)
    }

    /// Whether both players choose the same action after every message pair.
    pub fn is_coordinated(&self) -> bool {
        let n = self.n_messages();
        (0..n).all(|m| (0..n).all(|mp| self.action(m, mp) == self.action(mp, m)))
    }
}

/// A trumping profile for play that miscoordinates after a common message.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SameMessageTrump {
    /// Modular lottery on `denominator` numbers realizing the rational
    /// action weights `target` (as numerators over `denominator`); the
    /// remaining probability goes to the bit lottery between the two
    /// announced favourites.
    Lottery { denominator: i64, target: Vec<i64> },
    /// Two supported actions `(first, second)`: announce the preferred one
    /// of the two and, after disagreement, pick `first` with probability
    /// `numer / denom`.
    Pair { first: usize, second: usize, numer: i64, denom: i64 },
    /// Everyone in the posterior prefers `action` among the supported pair.
    Direct { action: usize },
}

/// Outcome of testing a trump against the original play.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrumpCheck {
    pub construction: SameMessageTrump,
    pub old_payoffs: Vec<f64>,
    pub new_payoffs: Vec<f64>,
    /// Largest gain any type could get by misreporting in the new profile.
    pub max_regret: f64,
    pub pareto: bool,
    pub strict_somewhere: bool,
}

/// Value to every type of the original play: the best response to an
/// opponent whose action is distributed as `play`.
pub fn original_payoffs(dist: &MultiActionDist, play: &[f64]) -> Vec<f64> {
    dist.types.iter().map(|t| t.values().iter().zip(play).map(|(u, p)| u * p).fold(0.0, f64::max)).collect()
}

/// Modular lottery profile: message `(b_num, i, bit)`. Returns each type's
/// payoff for every announced action (random components integrated out
/// by enumeration over the opponent's numbers and bits).
fn lottery_values(dist: &MultiActionDist, denominator: i64, target: &[i64], own_number: i64) -> Vec<Vec<f64>> {
    let k = dist.k();
    let n = denominator;
    let action_at = |hat: i64| -> Option<usize> {
        let mut acc = 0;
        for (j, &l) in target.iter().enumerate() {
            acc += l;
            if hat < acc {
                return Some(j);
            }
        }
        None
    };
    let pref: Vec<f64> = dist.preferred_probs();
    dist.types
        .iter()
        .map(|u| {
            (0..k)
                .map(|i| {
                    let mut acc = 0.0;
                    for bp in 0..n {
                        let hat = (own_number + bp) % n;
                        let v = match action_at(hat) {
                            Some(a) => u.values()[a],
                            None => {
                                // Bit lottery between the announcements: own
                                // bit uniform, opponent bit uniform.
                                let mut s = 0.0;
                                for (ip, &pi) in pref.iter().enumerate() {
                                    if pi == 0.0 {
                                        continue;
                                    }
                                    for (b, c) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                                        let a = if (i <= ip && b == c) || (i >= ip && b != c) { i } else { ip };
                                        s += pi * 0.25 * u.values()[a];
                                    }
                                }
                                s
                            }
                        };
                        acc += v / n as f64;
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

fn finish(
    construction: SameMessageTrump,
    dist: &MultiActionDist,
    play: &[f64],
    reported: impl Fn(usize) -> usize,
    values: &[Vec<f64>],
    tol: f64,
) -> TrumpCheck {
    let old = original_payoffs(dist, play);
    let new: Vec<f64> = (0..dist.types.len()).map(|t| values[t][reported(t)]).collect();
    let max_regret = (0..dist.types.len())
        .map(|t| values[t].iter().copied().fold(f64::NEG_INFINITY, f64::max) - new[t])
        .fold(0.0, f64::max);
    let live = |t: usize| dist.weights[t] > 0.0;
    let pareto = (0..old.len()).filter(|&t| live(t)).all(|t| new[t] >= old[t] - tol);
    let strict = (0..old.len()).filter(|&t| live(t)).any(|t| new[t] > old[t] + tol);
    TrumpCheck { construction, old_payoffs: old, new_payoffs: new, max_regret, pareto, strict_somewhere: strict }
}

/// Build and evaluate a profile that trumps play distributed as `play`
/// after a common message whose senders are distributed as `dist`.
///
/// With at least three supported actions the modular lottery realizes a
/// rational lower approximation of `play` and hands the remainder to the
/// announced favourites. With two supported actions the announcement is
/// restricted to that pair and disagreement is settled by a lottery whose
/// weight lies in the admissible window.
pub fn same_message_trump(dist: &MultiActionDist, play: &[f64], tol: f64) -> Result<TrumpCheck> {
    let k = dist.k();
    if play.len() != k || (play.iter().sum::<f64>() - 1.0).abs() > 1e-9 || play.iter().any(|p| *p < 0.0) {
        return Err(ModelError::Config("play must be a distribution over the actions".into()));
    }
    let support: Vec<usize> = (0..k).filter(|&a| play[a] > 0.0).collect();
    match support.len() {
        0 | 1 => Err(ModelError::Precondition("play is already coordinated".into())),
        2 => Ok(pair_trump(dist, play, support[0], support[1], tol)?),
        _ => {
            let q = rational_approximation(play, None)?;
            let n = common_denominator(&q);
            let target: Vec<i64> = q.iter().map(|r| r.numer() * (n / r.denom())).collect();
            let values = lottery_values(dist, n, &target, 0);
            let shifted = lottery_values(dist, n, &target, n - 1);
            let construction = SameMessageTrump::Lottery { denominator: n, target };
            let mut check = finish(construction, dist, play, |t| dist.types[t].preferred(), &values, tol);
            // The own number must not matter.
            let drift = values.iter().flatten().zip(shifted.iter().flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            check.max_regret = check.max_regret.max(drift);
            Ok(check)
        }
    }
}

fn pair_trump(dist: &MultiActionDist, play: &[f64], i: usize, j: usize, tol: f64) -> Result<TrumpCheck> {
    let prefers_i = |t: &MultiActionType| t.values()[i] >= t.values()[j];
    let q: f64 = dist.types.iter().zip(&dist.weights).filter(|(t, _)| prefers_i(t)).map(|(_, w)| w).sum();
    let p = play[i];
    // values[t][0] = announce i, values[t][1] = announce j.
    let eval = |alpha: f64| -> Vec<Vec<f64>> {
        dist.types
            .iter()
            .map(|t| {
                let (ui, uj) = (t.values()[i], t.values()[j]);
                let hi = q + alpha * (1.0 - q);
                let lo = alpha * q;
                vec![hi * ui + (1.0 - hi) * uj, lo * ui + (1.0 - lo) * uj]
            })
            .collect()
    };
    let report = |t: usize| if prefers_i(&dist.types[t]) { 0 } else { 1 };
    if q >= 1.0 - 1e-15 || q <= 1e-15 {
        let action = if q >= 0.5 { i } else { j };
        let alpha = if action == i { 1.0 } else { 0.0 };
        return Ok(finish(SameMessageTrump::Direct { action }, dist, play, report, &eval(alpha), tol));
    }
    let a: Ratio<i64> = alpha_window(p, q)?;
    let construction = SameMessageTrump::Pair { first: i, second: j, numer: *a.numer(), denom: *a.denom() };
    Ok(finish(construction, dist, play, report, &eval(to_f64(a)), tol))
}

/// Whether every type sending the common message coordinates with every
/// other such type on one action.
pub fn is_same_message_coordinated(play: &[f64]) -> bool {
    play.iter().any(|&p| p >= 1.0 - 1e-12)
}


/// Empirical search on play after two different announcements: enumerate
/// the pure equilibria of the posterior game between the announcers of
/// `i` and of `j`, keep those with positive miscoordination probability,
/// and test whether a public lottery over coordinated outcomes trumps
/// them. Lotteries are searched on a simplex grid with step `1/grid`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifferentMessageSearch {
    pub games: usize,
    pub miscoordinated_equilibria: usize,
    pub trumped: usize,
    /// Equilibria that no grid lottery trumps, as (game index, row
    /// actions, column actions).
    pub untrumped: Vec<(usize, Vec<usize>, Vec<usize>)>,
}

fn simplex_grid(k: usize, grid: usize) -> Vec<Vec<f64>> {
    fn rec(k: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k - 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for a in 0..=left {
            cur.push(a);
            rec(k, left - a, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, grid, &mut Vec::new(), &mut out);
    out.into_iter().map(|v| v.into_iter().map(|a| a as f64 / grid as f64).collect()).collect()
}

/// Pure equilibria of the game between `row` and `col` (weighted types)
/// and, for each, the payoffs of every type.
fn pure_equilibria(row: &[(MultiActionType, f64)], col: &[(MultiActionType, f64)], k: usize, tol: f64) -> Vec<(Vec<usize>, Vec<usize>)> {
    let total = k.pow((row.len() + col.len()) as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut c = code;
        let mut acts = Vec::with_capacity(row.len() + col.len());
        for _ in 0..row.len() + col.len() {
            acts.push(c % k);
            c /= k;
        }
        let (ra, ca) = acts.split_at(row.len());
        let dist = |side: &[(MultiActionType, f64)], a: &[usize]| {
            let mut d = vec![0.0; k];
            for ((_, w), &x) in side.iter().zip(a) {
                d[x] += w;
            }
            d
        };
        let (rd, cd) = (dist(row, ra), dist(col, ca));
        let ok = |side: &[(MultiActionType, f64)], a: &[usize], opp: &[f64]| {
            side.iter().zip(a).all(|((t, _), &x)| {
                let best = (0..k).map(|b| t.values()[b] * opp[b]).fold(0.0, f64::max);
                t.values()[x] * opp[x] >= best - tol
            })
        };
        if ok(row, ra, &cd) && ok(col, ca, &rd) {
            out.push((ra.to_vec(), ca.to_vec()));
        }
    }
    out
}

/// Run the search on `games` random type sets with `k` actions and up to
/// `max_types` types, seeded for reproducibility.
pub fn different_message_search(seed: u64, games: usize, k: usize, max_types: usize, grid: usize, tol: f64) -> Result<DifferentMessageSearch> {
    use rand::{Rng, SeedableRng};
    if k <= 2 || max_types < 2 {
        return Err(ModelError::Config("need more than two actions and at least two types".into()));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let lotteries = simplex_grid(k, grid);
    let mut report = DifferentMessageSearch { games: 0, miscoordinated_equilibria: 0, trumped: 0, untrumped: Vec::new() };
    let mut g = 0;
    while report.games < games {
        g += 1;
        let n = rng.gen_range(2..=max_types);
        let types: Vec<MultiActionType> =
            (0..n).map(|_| MultiActionType::new((0..k).map(|_| rng.gen::<f64>().powi(3)).collect()).expect("k > 2")).collect();
        let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
        // Two announcement classes: the preferred action of the first type
        // and any other preferred action.
        let first = types[0].preferred();
        let (row, col): (Vec<_>, Vec<_>) =
            types.iter().cloned().zip(weights.iter().copied()).partition(|(t, _)| t.preferred() == first);
        if col.is_empty() {
            continue;
        }
        let norm = |v: Vec<(MultiActionType, f64)>| {
            let s: f64 = v.iter().map(|x| x.1).sum();
            v.into_iter().map(|(t, w)| (t, w / s)).collect::<Vec<_>>()
        };
        let (row, col) = (norm(row), norm(col));
        let game_index = g - 1;
        report.games += 1;
        for (ra, ca) in pure_equilibria(&row, &col, k, tol) {
            let miss: f64 = row
                .iter()
                .zip(&ra)
                .map(|((_, w), &x)| w * col.iter().zip(&ca).filter(|(_, &y)| y != x).map(|(c, _)| c.1).sum::<f64>())
                .sum();
            if miss <= tol {
                continue;
            }
            report.miscoordinated_equilibria += 1;
            let old = |side: &[(MultiActionType, f64)], a: &[usize], opp: &[(MultiActionType, f64)], oa: &[usize]| {
                side.iter()
                    .zip(a)
                    .map(|((t, _), &x)| t.values()[x] * opp.iter().zip(oa).filter(|(_, &y)| y == x).map(|(o, _)| o.1).sum::<f64>())
                    .collect::<Vec<_>>()
            };
            let old_row = old(&row, &ra, &col, &ca);
            let old_col = old(&col, &ca, &row, &ra);
            let everyone: Vec<(&MultiActionType, f64)> =
                row.iter().map(|x| &x.0).zip(old_row).chain(col.iter().map(|x| &x.0).zip(old_col)).collect();
            let trumped = lotteries.iter().any(|w| {
                let gains: Vec<f64> =
                    everyone.iter().map(|(t, o)| t.values().iter().zip(w).map(|(u, p)| u * p).sum::<f64>() - o).collect();
                gains.iter().all(|&d| d >= -tol) && gains.iter().any(|&d| d > tol)
            });
            if trumped {
                report.trumped += 1;
            } else {
                report.untrumped.push((game_index, ra, ca));
            }
        }
    }
    Ok(report)
}
#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(v: &[f64]) -> MultiActionType {
        MultiActionType::new(v.to_vec()).unwrap()
    }

    fn three_types() -> MultiActionDist {
        MultiActionDist::new(
            vec![t(&[0.9, 0.2, 0.4]), t(&[0.1, 0.8, 0.3]), t(&[0.3, 0.3, 0.7]), t(&[0.5, 0.6, 0.6])],
            vec![0.3, 0.3, 0.2, 0.2],
        )
        .unwrap()
    }

    #[test]
    fn preferred_uses_lowest_index_on_ties() {
        assert_eq!(t(&[0.5, 0.6, 0.6]).preferred(), 1);
        assert!(MultiActionType::new(vec![0.1, 0.2]).is_err());
    }

    #[test]
    fn bit_lottery_payoff_matches_closed_form() {
        let d = three_types();
        let s = SigmaCMulti::new(3).unwrap();
        let p = d.preferred_probs();
        for u in &d.types {
            let i = u.preferred();
            let closed = 0.5 * u.values()[i] + 0.5 * (0..3).map(|j| p[j] * u.values()[j]).sum::<f64>();
            assert!((s.payoff(u, &d) - closed).abs() < 1e-12);
        }
        assert!(s.max_regret(&d) <= 1e-12);
        assert!(s.is_coordinated());
    }

    #[test]
    fn bit_lottery_action_table() {
        let s = SigmaCMulti::new(4).unwrap();
        // Shared preference.
        assert_eq!(s.action(2 * 2, 2 * 2 + 1), 2);
        // Disagreement 0 < 3: equal bits give the smaller index.
        assert_eq!(s.action(0, 6), 0);
        assert_eq!(s.action(6, 0), 0);
        assert_eq!(s.action(1, 6), 3);
        assert_eq!(s.labels()[3], "m_a2_1");
    }

    #[test]
    fn lottery_trump_for_three_supported_actions() {
        let d = three_types();
        let c = same_message_trump(&d, &[0.5, 0.3, 0.2], 1e-12).unwrap();
        assert!(matches!(c.construction, SameMessageTrump::Lottery { .. }));
        assert!(c.pareto && c.strict_somewhere && c.max_regret <= 1e-12, "{c:?}");
    }

    #[test]
    fn pair_trump_for_two_supported_actions() {
        let d = three_types();
        let c = same_message_trump(&d, &[0.5, 0.5, 0.0], 1e-12).unwrap();
        assert!(matches!(c.construction, SameMessageTrump::Pair { .. }));
        assert!(c.pareto && c.strict_somewhere && c.max_regret <= 1e-12);
        assert!(same_message_trump(&d, &[1.0, 0.0, 0.0], 1e-12).is_err());
    }

    #[test]
    fn different_message_search_is_reproducible() {
        let a = different_message_search(7, 200, 3, 5, 20, 1e-12).unwrap();
        let b = different_message_search(7, 200, 3, 5, 20, 1e-12).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.games, 200);
        assert_eq!(a.trumped + a.untrumped.len(), a.miscoordinated_equilibria);
    }

    fn arb_case() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, Vec<f64>)> {
        (2usize..6).prop_flat_map(|n| {
            (
                prop::collection::vec(prop::collection::vec(0.0f64..1.0, 3), n),
                prop::collection::vec(0.05f64..1.0, n),
                prop::collection::vec(0.0f64..1.0, 3),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]
        #[test]
        fn miscoordinated_common_message_is_trumped((vals, w, raw) in arb_case()) {
            let total: f64 = w.iter().sum();
            let d = MultiActionDist::new(
                vals.iter().map(|v| t(v)).collect(),
                w.iter().map(|x| x / total).collect(),
            ).unwrap();
            let mut play: Vec<f64> = raw.iter().map(|x| if *x < 0.2 { 0.0 } else { *x }).collect();
            let s: f64 = play.iter().sum();
            prop_assume!(s > 0.0);
            play.iter_mut().for_each(|x| *x /= s);
            prop_assume!(!is_same_message_coordinated(&play));
            let c = same_message_trump(&d, &play, 1e-12).unwrap();
            prop_assert!(c.pareto, "{:?}", c);
            prop_assert!(c.max_regret <= 1e-9, "{:?}", c);
        }
    }
}
