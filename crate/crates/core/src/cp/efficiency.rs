//! Interim efficiency of communication-proof strategies: searches over
//! social choice functions, the payoff bound for coordinated equilibria,
//! and the domination of no-communication equilibria.

use num_rational::Ratio;
use serde::Serialize;

use crate::canon;
use crate::dist::TypeDistribution;
use crate::error::{config, ModelError, Result};
use crate::payoff::{exante_payoff, interim_payoff, stage_payoff, OpponentView};
use crate::props;
use crate::strategy::{Cutoff, Strategy};

/// Outcome order used by social choice functions.
pub const OUTCOMES: [&str; 4] = ["LL", "LR", "RL", "RR"];

/// A social choice function on a finite type set: for every ordered pair
/// of types a distribution over `LL, LR, RL, RR` (own action first).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SocialChoiceFunction {
    pub types: Vec<f64>,
    pub weights: Vec<f64>,
    /// `cells[i * k + j]`.
    pub cells: Vec<[f64; 4]>,
}

impl SocialChoiceFunction {
    /// Validates that every cell is a distribution and that swapping the
    /// players swaps the outcome.
    pub fn new(types: Vec<f64>, weights: Vec<f64>, cells: Vec<[f64; 4]>) -> Result<Self> {
        let k = types.len();
        if weights.len() != k || cells.len() != k * k {
            return config("a social choice function needs one cell per ordered type pair");
        }
        for c in &cells {
            if c.iter().any(|&p| p < -1e-12) || (c.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return config("every cell must be a distribution over the four outcomes");
            }
        }
        for i in 0..k {
            for j in 0..k {
                let (a, b) = (cells[i * k + j], cells[j * k + i]);
                if (a[0] - b[0]).abs() > 1e-12 || (a[3] - b[3]).abs() > 1e-12 || (a[1] - b[2]).abs() > 1e-12 {
                    return config(format!("cells ({i},{j}) and ({j},{i}) are not mirror images"));
                }
            }
        }
        Ok(SocialChoiceFunction { types, weights, cells })
    }

    /// Coordinated social choice function from a symmetric matrix of
    /// L-coordination probabilities.
    pub fn coordinated(types: Vec<f64>, weights: Vec<f64>, left: &[f64]) -> Result<Self> {
        let cells = left.iter().map(|&p| [p, 0.0, 0.0, 1.0 - p]).collect();
        Self::new(types, weights, cells)
    }

    /// Interim payoff of type index `i`.
    pub fn payoff(&self, i: usize) -> f64 {
        let k = self.types.len();
        let u = self.types[i];
        (0..k).map(|j| self.weights[j] * ((1.0 - u) * self.cells[i * k + j][0] + u * self.cells[i * k + j][3])).sum()
    }
}

/// Interim payoff of type `u` under a social choice function given as a
/// function of the type pair, for an opponent drawn from `dist`. The
/// function must be piecewise constant in `v` between `breaks`.
pub fn scf_payoff(phi: impl Fn(f64, f64) -> [f64; 4], u: f64, dist: &TypeDistribution, breaks: &[f64]) -> f64 {
    dist.expect(breaks, |v| {
        let c = phi(u, v);
        (1.0 - u) * c[0] + u * c[3]
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParetoReport {
    pub pareto_optimal: bool,
    /// `exhaustive`, `grid`, `local` and/or `certificate`.
    pub methods: Vec<String>,
    /// Probability of coordinating on L per cell of a dominating function.
    pub dominating: Option<Vec<f64>>,
    pub cells_searched: usize,
}

/// Largest number of atoms for which pure cells are enumerated.
pub const EXHAUSTIVE_ATOMS: usize = 6;
/// Largest number of atoms for which the {0, 1/2, 1} grid is enumerated.
pub const GRID_ATOMS: usize = 4;

fn dominates(types: &[f64], weights: &[f64], left: &[f64], base: &[f64], tol: f64) -> bool {
    let k = types.len();
    let mut strict = false;
    for i in 0..k {
        let u = types[i];
        let v: f64 = (0..k).map(|j| weights[j] * (left[i * k + j] * (1.0 - u) + (1.0 - left[i * k + j]) * u)).sum();
        if v < base[i] - tol {
            return false;
        }
        strict |= v > base[i] + tol;
    }
    strict
}

/// Enumerates symmetric L-coordination matrices with entries from
/// `levels`, returning the first that dominates `base`.
fn enumerate_cells(types: &[f64], weights: &[f64], base: &[f64], levels: &[f64], tol: f64) -> (Option<Vec<f64>>, usize) {
    let k = types.len();
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i..k).map(move |j| (i, j))).collect();
    let total = levels.len().pow(pairs.len() as u32);
    let mut left = vec![0.0; k * k];
    for code in 0..total {
        let mut c = code;
        for &(i, j) in &pairs {
            let p = levels[c % levels.len()];
            c /= levels.len();
            left[i * k + j] = p;
            left[j * k + i] = p;
        }
        if dominates(types, weights, &left, base, tol) {
            return (Some(left), total);
        }
    }
    (None, total)
}

/// Coordinate ascent from the all-L matrix: repeatedly move single cells
/// towards raising the lowest relative payoff.
fn local_search(types: &[f64], weights: &[f64], base: &[f64], tol: f64) -> Option<Vec<f64>> {
    let k = types.len();
    let levels = [0.0, 0.25, 0.5, 0.75, 1.0];
    let score = |left: &[f64]| -> f64 {
        (0..k)
            .map(|i| {
                let u = types[i];
                let v: f64 = (0..k).map(|j| weights[j] * (left[i * k + j] * (1.0 - u) + (1.0 - left[i * k + j]) * u)).sum();
                v - base[i]
            })
            .fold(f64::INFINITY, f64::min)
    };
    for start in [0.0, 0.5, 1.0] {
        let mut left = vec![start; k * k];
        let mut best = score(&left);
        loop {
            let mut improved = false;
            for i in 0..k {
                for j in i..k {
                    for &p in &levels {
                        let old = left[i * k + j];
                        left[i * k + j] = p;
                        left[j * k + i] = p;
                        let s = score(&left);
                        if s > best + 1e-15 {
                            best = s;
                            improved = true;
                        } else {
                            left[i * k + j] = old;
                            left[j * k + i] = old;
                        }
                    }
                }
            }
            if dominates(types, weights, &left, base, tol) {
                return Some(left);
            }
            if !improved {
                break;
            }
        }
    }
    None
}

/// Whether the left tendency of `sigma` certifies interim Pareto
/// optimality: with all three properties, any dominating function would
/// have to raise the cross-side L-probability for every low type and lower
/// it for every high type, which averages to a contradiction.
pub fn averaging_certificate(sigma: &Strategy, dist: &TypeDistribution) -> Option<f64> {
    props::properties(sigma, dist).left_tendency
}

/// Interim Pareto optimality of `sigma` against all symmetric social
/// choice functions on an atom distribution. Continuous distributions are
/// first discretized into `cells` atoms at the midpoints of equal-mass
/// bins.
pub fn interim_pareto_check(sigma: &Strategy, dist: &TypeDistribution, cells: usize, tol: f64) -> Result<ParetoReport> {
    let atoms = if dist.is_atomic() { dist.clone() } else { discretize(dist, cells)? };
    let types: Vec<f64> = atoms.atom_list().iter().map(|a| a.0).collect();
    let weights: Vec<f64> = atoms.atom_list().iter().map(|a| a.1).collect();
    let base: Vec<f64> = types.iter().map(|&u| interim_payoff(sigma, sigma, u, &atoms)).collect::<Result<_>>()?;
    let mut methods = Vec::new();
    let mut searched = 0;
    let mut dominating = None;
    let k = types.len();
    if k <= EXHAUSTIVE_ATOMS {
        let (d, n) = enumerate_cells(&types, &weights, &base, &[0.0, 1.0], tol);
        methods.push("exhaustive".to_string());
        searched += n;
        dominating = d;
        if dominating.is_none() && k <= GRID_ATOMS {
            let (d, n) = enumerate_cells(&types, &weights, &base, &[0.0, 0.5, 1.0], tol);
            methods.push("grid".to_string());
            searched += n;
            dominating = d;
        }
    }
    if dominating.is_none() {
        methods.push("local".to_string());
        dominating = local_search(&types, &weights, &base, tol);
    }
    if dominating.is_none() && averaging_certificate(sigma, &atoms).is_some() {
        methods.push("certificate".to_string());
    }
    Ok(ParetoReport { pareto_optimal: dominating.is_none(), methods, dominating, cells_searched: searched })
}

/// `n` equal-mass atoms, each at the median of its bin.
pub fn discretize(dist: &TypeDistribution, n: usize) -> Result<TypeDistribution> {
    if n < 2 {
        return config("discretization needs at least two atoms");
    }
    let atoms = (0..n).map(|i| (dist.quantile((i as f64 + 0.5) / n as f64), 1.0 / n as f64)).collect();
    TypeDistribution::atoms(dist.lower(), dist.upper(), atoms)
}

/// Ex-ante payoff of `sigma` against the better of the two
/// preference-revealing strategies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PayoffBound {
    pub holds: bool,
    pub payoff: f64,
    pub left_payoff: f64,
    pub right_payoff: f64,
}

pub fn coordinated_payoff_bound_check(sigma: &Strategy, dist: &TypeDistribution, tol: f64) -> Result<PayoffBound> {
    let payoff = exante_payoff(sigma, sigma, dist, dist)?;
    let l = canon::make_sigma_l();
    let r = canon::make_sigma_r();
    let left_payoff = exante_payoff(&l, &l, dist, dist)?;
    let right_payoff = exante_payoff(&r, &r, dist, dist)?;
    Ok(PayoffBound { holds: payoff <= left_payoff.max(right_payoff) + tol, payoff, left_payoff, right_payoff })
}

/// A communication-proof strategy that gives every type of a coordinated
/// equilibrium `sigma` at least its payoff: `sigma_R` or `sigma_L` when
/// all messages lead to L-coordination less (more) often than the
/// mass of low types, otherwise the modular lottery whose left tendency
/// matches the best message of low types.
pub fn dominating_cp_strategy(sigma: &Strategy, dist: &TypeDistribution) -> Result<Strategy> {
    if !props::is_coordinated(sigma, dist) {
        return Err(ModelError::Precondition("the strategy is not coordinated".into()));
    }
    let view = OpponentView::new(sigma, dist);
    let used: Vec<usize> = (0..sigma.len()).filter(|&m| sigma.mu().mean_prob(dist, m) > 0.0).collect();
    let p: Vec<f64> = used.iter().map(|&m| view.left_total(m)).collect();
    let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
    let fh = dist.cdf(0.5);
    if hi <= fh + 1e-12 {
        return Ok(canon::make_sigma_r());
    }
    if lo >= fh - 1e-12 {
        return Ok(canon::make_sigma_l());
    }
    let alpha = (hi - fh) / (1.0 - fh);
    let r = Ratio::<i64>::approximate_float(alpha)
        .filter(|r| *r.denom() <= 4096 && (*r.numer() as f64 / *r.denom() as f64 - alpha).abs() < 1e-9)
        .ok_or_else(|| ModelError::Precondition(format!("left tendency {alpha} has no small rational form")))?;
    canon::make_sigma_alpha(*r.numer() as usize, *r.denom() as usize)
}

/// Which of the canonical strategies dominates a no-communication profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoTalkDomination {
    pub first: String,
    pub second: String,
    /// Name of the first canonical strategy that weakly dominates every
    /// type of both seats.
    pub dominated_by: Option<String>,
    /// Share of evaluated types whose gain exceeds the tolerance.
    pub strict_share: f64,
    pub interior: bool,
}

/// Compares the no-communication profile `(x, y)` (seat one plays `x`)
/// with `sigma_L`, `sigma_R` and `sigma_C` type by type on `grid`.
pub fn dominate_no_talk(x: Cutoff, y: Cutoff, dist: &TypeDistribution, grid: &[f64], tol: f64) -> Result<NoTalkDomination> {
    let q_first = dist.prob_left(y);
    let q_second = dist.prob_left(x);
    let interior = matches!((x, y), (Cutoff::At { .. }, Cutoff::At { .. })) && q_first > 0.0 && q_first < 1.0 && q_second > 0.0 && q_second < 1.0;
    let cands = [("sigma_L", canon::make_sigma_l()), ("sigma_R", canon::make_sigma_r()), ("sigma_C", canon::make_sigma_c())];
    for (name, s) in cands {
        let mut strict = 0usize;
        let mut ok = true;
        for &u in grid {
            let new = interim_payoff(&s, &s, u, dist)?;
            for old in [stage_payoff(u, x.left_prob(u), q_first), stage_payoff(u, y.left_prob(u), q_second)] {
                if new < old - tol {
                    ok = false;
                }
                if new > old + tol {
                    strict += 1;
                }
            }
        }
        if ok {
            return Ok(NoTalkDomination {
                first: crate::cp::show_cut(x),
                second: crate::cp::show_cut(y),
                dominated_by: Some(name.to_string()),
                strict_share: strict as f64 / (2 * grid.len()) as f64,
                interior,
            });
        }
    }
    Ok(NoTalkDomination {
        first: crate::cp::show_cut(x),
        second: crate::cp::show_cut(y),
        dominated_by: None,
        strict_share: 0.0,
        interior,
    })
}

/// Every no-communication equilibrium of `dist`, symmetric or not, and how
/// it is dominated.
pub fn no_talk_dominance_check(dist: &TypeDistribution, grid_size: usize, tol: f64) -> Result<Vec<NoTalkDomination>> {
    let grid = dist.grid(grid_size);
    crate::cp::babbling_profiles(dist, dist)
        .into_iter()
        .map(|(x, y)| dominate_no_talk(x, y, dist, &grid, tol))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::{ActionTable, MessageFunction};

    fn uniform() -> TypeDistribution {
        TypeDistribution::uniform(0.0, 1.0).unwrap()
    }

    #[test]
    fn first_best_is_not_an_improvement_over_sigma_c() {
        let f = uniform();
        let fb = |u: f64, v: f64| if u + v <= 1.0 { [1.0, 0.0, 0.0, 0.0] } else { [0.0, 0.0, 0.0, 1.0] };
        let v = scf_payoff(fb, 0.4, &f, &[0.6]);
        assert!((v - 0.52).abs() < 1e-12);
        let c = interim_payoff(&canon::make_sigma_c(), &canon::make_sigma_c(), 0.4, &f).unwrap();
        assert!((c - 0.55).abs() < 1e-12);
    }

    #[test]
    fn sigma_c_is_pareto_optimal_on_a_grid() {
        let r = interim_pareto_check(&canon::make_sigma_c(), &uniform(), 10, 1e-9).unwrap();
        assert!(r.pareto_optimal, "{r:?}");
    }

    #[test]
    fn four_atom_games() {
        let d = TypeDistribution::unit_atoms(vec![(0.1, 0.3), (0.4, 0.2), (0.6, 0.1), (0.8, 0.4)]).unwrap();
        for (k, n) in [(0, 1), (1, 4), (1, 2), (3, 4), (1, 1)] {
            let s = canon::make_sigma_alpha(k, n).unwrap();
            let r = interim_pareto_check(&s, &d, 0, 1e-9).unwrap();
            assert!(r.pareto_optimal);
        }
        // Babbling on the L side is dominated.
        let r = interim_pareto_check(&canon::make_babbling(Cutoff::AllL), &d, 0, 1e-9).unwrap();
        assert!(!r.pareto_optimal);
    }

    #[test]
    fn payoff_bound_is_linear_in_alpha() {
        let f = TypeDistribution::piecewise_linear(vec![(0.0, 0.0), (0.5, 0.3), (1.0, 1.0)]).unwrap();
        let b = coordinated_payoff_bound_check(&canon::make_sigma_alpha(1, 4).unwrap(), &f, 1e-9).unwrap();
        assert!(b.holds);
        assert!((b.payoff - (0.25 * b.left_payoff + 0.75 * b.right_payoff)).abs() < 1e-12);
    }

    #[test]
    fn mismatched_coordinated_strategy_is_dominated() {
        // Low types send m_a, high types m_b; (a,a) -> L, (b,b) -> R and
        // mixed pairs coordinate on L. Low types then get the L side
        // always, which the modular lottery with tendency 1 matches.
        let mu = MessageFunction::split(0.5, vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
        let xi = ActionTable::from_fn(2, |m, mp| if m == 1 && mp == 1 { Cutoff::AllR } else { Cutoff::AllL });
        let s = Strategy::new(crate::strategy::labels(&["m_a", "m_b"]), mu, xi).unwrap();
        let f = uniform();
        let d = dominating_cp_strategy(&s, &f).unwrap();
        for u in [0.1, 0.3, 0.7, 0.9] {
            let a = interim_payoff(&d, &d, u, &f).unwrap();
            let b = interim_payoff(&s, &s, u, &f).unwrap();
            assert!(a >= b - 1e-12);
        }
    }

    #[test]
    fn no_talk_equilibria_are_dominated() {
        let f = TypeDistribution::piecewise_linear(vec![(0.0, 0.0), (0.4, 0.35), (0.6, 0.65), (1.0, 1.0)]).unwrap();
        for r in no_talk_dominance_check(&f, 201, 1e-9).unwrap() {
            assert!(r.dominated_by.is_some(), "{r:?}");
        }
    }
}
