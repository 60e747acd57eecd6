//! Bayesian Nash equilibrium verification, the exhaustive deviation
//! oracle for atom games, no-communication fixed points and their
//! stability, and equilibria of small induced games.

pub mod induced;

pub use induced::{enumerate_induced_equilibria, InducedEquilibrium, InducedGame};

use serde::Serialize;

use crate::canon::two_round::{best_response, interim as two_round_interim, TwoRoundStrategy, TwoRoundView};
use crate::dist::TypeDistribution;
use crate::error::{config, ModelError, Result};
use crate::payoff::{best_message_value, interim_with_view, stage_payoff, OpponentView};
use crate::strategy::{Cutoff, Strategy};

/// Default regret tolerance for continuous distributions.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default number of evenly spaced grid types.
pub const DEFAULT_GRID: usize = 201;

/// Offset around breakpoints at which extra grid types are placed.
const PROBE: f64 = 1e-7;
/// How many of the worst types a report keeps.
const KEEP_WORST: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstType {
    pub u: f64,
    pub message: String,
    pub regret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub is_equilibrium: bool,
    pub max_regret: f64,
    pub worst: Vec<WorstType>,
    pub grid_points: usize,
}

/// Types at which a strategy is checked: the distribution grid, plus
/// points just around every breakpoint that lie in the support.
pub fn check_points(dist: &TypeDistribution, breaks: &[f64], grid_size: usize) -> Vec<f64> {
    let mut pts = dist.grid(grid_size);
    if !dist.is_atomic() {
        let (lo, hi) = dist.support_hull();
        for &b in breaks {
            for x in [b - PROBE, b, b + PROBE] {
                if x >= lo && x <= hi {
                    pts.push(x);
                }
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
    }
    pts
}

fn finish(mut rows: Vec<WorstType>, tol: f64, grid_points: usize) -> EquilibriumReport {
    let max_regret = rows.iter().map(|w| w.regret).fold(0.0, f64::max);
    rows.sort_by(|a, b| b.regret.total_cmp(&a.regret).then(a.u.total_cmp(&b.u)));
    rows.retain(|w| w.regret > tol);
    rows.truncate(KEEP_WORST);
    EquilibriumReport { is_equilibrium: max_regret <= tol, max_regret, worst: rows, grid_points }
}

/// Regret of the types of one seat playing `own` against an opponent
/// population `opp_dist` playing `opp`.
pub fn verify_profile(
    own: &Strategy,
    own_dist: &TypeDistribution,
    opp: &Strategy,
    opp_dist: &TypeDistribution,
    grid_size: usize,
    tol: f64,
) -> Result<EquilibriumReport> {
    own.check_compatible(opp)?;
    let view = OpponentView::new(opp, opp_dist);
    let pts = check_points(own_dist, &own.breakpoints(), grid_size);
    let n = own.len();
    let rows = pts
        .iter()
        .map(|&u| {
            let follow = interim_with_view(own, &view, u);
            let (best_m, best) = (0..n)
                .map(|m| (m, best_message_value(&view, u, m)))
                .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
            WorstType { u, message: own.labels()[best_m].clone(), regret: (best - follow).max(0.0) }
        })
        .collect();
    Ok(finish(rows, tol, pts.len()))
}

/// Symmetric equilibrium check of `sigma` under `dist`.
pub fn verify_equilibrium(sigma: &Strategy, dist: &TypeDistribution, grid_size: usize, tol: f64) -> EquilibriumReport {
    verify_profile(sigma, dist, sigma, dist, grid_size, tol).expect("a strategy is compatible with itself")
}

/// Equilibrium check for both seats of an asymmetric profile.
pub fn verify_pair(
    first: &Strategy,
    first_dist: &TypeDistribution,
    second: &Strategy,
    second_dist: &TypeDistribution,
    grid_size: usize,
    tol: f64,
) -> Result<(EquilibriumReport, EquilibriumReport)> {
    Ok((
        verify_profile(first, first_dist, second, second_dist, grid_size, tol)?,
        verify_profile(second, second_dist, first, first_dist, grid_size, tol)?,
    ))
}

/// Equilibrium check of a symmetric two-round strategy.
pub fn verify_two_round(sigma: &TwoRoundStrategy, dist: &TypeDistribution, grid_size: usize, tol: f64) -> EquilibriumReport {
    let view = TwoRoundView::new(sigma, dist);
    let pts = check_points(dist, &sigma.breakpoints(), grid_size);
    let rows = pts
        .iter()
        .map(|&u| {
            let (best, r1) = best_response(&view, u);
            let regret = (best - two_round_interim(sigma, &view, u)).max(0.0);
            WorstType { u, message: sigma.first_labels()[r1].clone(), regret }
        })
        .collect();
    finish(rows, tol, pts.len())
}

/// Largest message set the exhaustive oracle accepts.
pub const ORACLE_MAX_MESSAGES: usize = 12;

/// Exhaustive deviation oracle for atom distributions: for every atom,
/// the best payoff over all messages and all pure action vectors (one
/// action per opponent message), computed by direct summation over
/// opponent atoms. Returns `(type, regret)` per atom.
pub fn brute_force_regrets(sigma: &Strategy, dist: &TypeDistribution) -> Result<Vec<(f64, f64)>> {
    if !dist.is_atomic() {
        return config("the exhaustive oracle needs an atom distribution");
    }
    let n = sigma.len();
    if n > ORACLE_MAX_MESSAGES {
        return Err(ModelError::Capacity { needed: n, available: ORACLE_MAX_MESSAGES });
    }
    let atoms = dist.atom_list();
    let mut out = Vec::with_capacity(atoms.len());
    for &(u, _) in atoms {
        let row_u = sigma.mu().row(u);
        let mut follow = 0.0;
        for &(v, w) in atoms {
            let row_v = sigma.mu().row(v);
            for m in 0..n {
                for mp in 0..n {
                    let p = row_u[m] * row_v[mp];
                    if p > 0.0 {
                        let a = sigma.xi().get(m, mp).left_prob(u);
                        let b = sigma.xi().get(mp, m).left_prob(v);
                        follow += w * p * stage_payoff(u, a, b);
                    }
                }
            }
        }
        let mut best = f64::NEG_INFINITY;
        for m in 0..n {
            for bits in 0u32..(1u32 << n) {
                let mut val = 0.0;
                for &(v, w) in atoms {
                    let row_v = sigma.mu().row(v);
                    for mp in 0..n {
                        if row_v[mp] > 0.0 {
                            let a = f64::from((bits >> mp) & 1);
                            let b = sigma.xi().get(mp, m).left_prob(v);
                            val += w * row_v[mp] * stage_payoff(u, a, b);
                        }
                    }
                }
                best = best.max(val);
            }
        }
        out.push((u, (best - follow).max(0.0)));
    }
    Ok(out)
}

/// A no-communication equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BabblingRoot {
    /// Threshold type, equal to the probability that a player plays L.
    pub x: f64,
    /// The action cutoff that realizes it.
    #[serde(skip)]
    pub cutoff: Cutoff,
    /// Whether an atom at the threshold mixes.
    pub mixed: bool,
    /// Density below one at the threshold; `None` at the corners and for
    /// atom distributions.
    pub stable: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BabblingReport {
    pub roots: Vec<BabblingRoot>,
    /// F(x) = x on a whole interval.
    pub degenerate: bool,
}

/// All thresholds x in [0, 1] with F(x) = x, found by sign scanning and
/// bisection; for atom distributions every threshold at which the atoms
/// below play L and the atoms above play R (with an atom at the threshold
/// allowed to mix).
pub fn babbling_fixed_points(dist: &TypeDistribution) -> BabblingReport {
    if dist.is_atomic() {
        return atom_babbling(dist);
    }
    let g = |x: f64| dist.cdf(x) - x;
    let mut pts: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
    pts.extend(dist.knot_list().iter().map(|k| k.0).filter(|&x| (0.0..=1.0).contains(&x)));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let zero = |v: f64| v.abs() <= 1e-12;
    let mut roots: Vec<f64> = Vec::new();
    let mut degenerate = false;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (ga, gb) = (g(a), g(b));
        if zero(ga) && zero(gb) && zero(g(0.5 * (a + b))) {
            degenerate = true;
        }
        if zero(ga) {
            roots.push(a);
        } else if !zero(gb) && ga * gb < 0.0 {
            let (mut lo, mut hi) = (a, b);
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                if g(mid) * ga > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
    }
    if zero(g(1.0)) {
        roots.push(1.0);
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    if degenerate {
        // Keep only the isolated corner representatives of a continuum.
        roots.retain(|&x| x == 0.0 || x == 1.0);
    }
    let roots = roots
        .into_iter()
        .map(|x| {
            let stable = if x > 0.0 && x < 1.0 && !degenerate { dist.density_at(x).map(|f| f < 1.0) } else { None };
            BabblingRoot { x, cutoff: Cutoff::at(x), mixed: false, stable }
        })
        .collect();
    BabblingReport { roots, degenerate }
}

fn atom_babbling(dist: &TypeDistribution) -> BabblingReport {
    let atoms = dist.atom_list();
    let k = atoms.len();
    let mut roots = Vec::new();
    let mut below = 0.0;
    for j in 0..=k {
        // The first j atoms play L: the opponent plays L with probability
        // `below`, so atoms under it must be at most that and atoms over it
        // at least that.
        let p = below;
        let ok = atoms[..j].iter().all(|a| a.0 <= p + 1e-12) && atoms[j..].iter().all(|a| a.0 >= p - 1e-12);
        if ok {
            let cutoff = match j {
                0 => Cutoff::AllR,
                _ if j == k => Cutoff::AllL,
                _ => Cutoff::at(atoms[j - 1].0),
            };
            roots.push(BabblingRoot { x: p, cutoff, mixed: false, stable: None });
        }
        if j < k {
            // Atom j mixes so that the opponent L-probability equals its value.
            let (v, m) = atoms[j];
            let t = (v - below) / m;
            if t > 1e-12 && t < 1.0 - 1e-12 {
                let ok = atoms[..j].iter().all(|a| a.0 <= v) && atoms[j + 1..].iter().all(|a| a.0 >= v);
                if ok {
                    roots.push(BabblingRoot { x: v, cutoff: Cutoff::At { x: v, tie_left: t }, mixed: true, stable: None });
                }
            }
            below += m;
        }
    }
    roots.sort_by(|a, b| a.x.total_cmp(&b.x));
    BabblingReport { roots, degenerate: false }
}

/// Whether an interior no-communication threshold is stable, i.e. the
/// density there is strictly below one.
pub fn stability_density_check(dist: &TypeDistribution, x: f64) -> Result<bool> {
    if !(x > 0.0 && x < 1.0) || (dist.cdf(x) - x).abs() > 1e-9 {
        return Err(ModelError::Precondition(format!("{x} is not an interior fixed point of F")));
    }
    dist.density_at(x)
        .map(|f| f < 1.0)
        .ok_or_else(|| ModelError::Precondition("stability needs a density".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon;

    fn uniform() -> TypeDistribution {
        TypeDistribution::uniform(0.0, 1.0).unwrap()
    }

    #[test]
    fn canonical_strategies_are_equilibria() {
        let f = uniform();
        for s in [canon::make_sigma_l(), canon::make_sigma_r(), canon::make_sigma_c(), canon::make_sigma_alpha(1, 3).unwrap()] {
            let r = verify_equilibrium(&s, &f, DEFAULT_GRID, DEFAULT_TOL);
            assert!(r.is_equilibrium, "{r:?}");
        }
    }

    #[test]
    fn split_left_fixture_is_not_an_equilibrium() {
        let r = verify_equilibrium(&canon::make_split_left_fixture(), &uniform(), DEFAULT_GRID, DEFAULT_TOL);
        assert!(!r.is_equilibrium);
        assert!(r.worst.iter().all(|w| w.u <= 0.25 + 1e-6 && w.message == "m_L2"));
    }

    #[test]
    fn example1_miscoordination_is_an_equilibrium() {
        let d = canon::example1_distribution(0.01).unwrap();
        let s = canon::example1_miscoordination(0.01).unwrap();
        let r = verify_equilibrium(&s, &d, DEFAULT_GRID, DEFAULT_TOL);
        assert!(r.is_equilibrium, "{r:?}");
    }

    #[test]
    fn oracle_matches_on_small_atom_games() {
        let d = canon::example1_distribution(0.01).unwrap();
        for s in [
            canon::make_sigma_l(),
            canon::make_babbling(Cutoff::at(0.3)),
            canon::make_partial_coordination_fixture(),
            canon::make_split_left_fixture(),
        ] {
            let grid = verify_equilibrium(&s, &d, DEFAULT_GRID, DEFAULT_TOL);
            let brute = brute_force_regrets(&s, &d).unwrap();
            let max = brute.iter().map(|r| r.1).fold(0.0, f64::max);
            assert!((max - grid.max_regret).abs() < 1e-12);
        }
    }

    #[test]
    fn example1_babbling_roots() {
        let d = canon::example1_distribution(0.01).unwrap();
        let r = babbling_fixed_points(&d);
        let pure: Vec<f64> = r.roots.iter().filter(|x| !x.mixed).map(|x| x.x).collect();
        assert_eq!(pure, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        for root in &r.roots {
            let s = canon::make_babbling(root.cutoff);
            assert!(verify_equilibrium(&s, &d, DEFAULT_GRID, DEFAULT_TOL).is_equilibrium, "{root:?}");
        }
    }

    #[test]
    fn uniform_babbling_is_degenerate() {
        let r = babbling_fixed_points(&uniform());
        assert!(r.degenerate);
    }

    #[test]
    fn density_stability() {
        let steep = TypeDistribution::piecewise_linear(vec![(0.0, 0.0), (0.4, 0.35), (0.6, 0.65), (1.0, 1.0)]).unwrap();
        assert_eq!(stability_density_check(&steep, 0.5).unwrap(), false);
        let flat = TypeDistribution::piecewise_linear(vec![(0.0, 0.0), (0.4, 0.45), (0.6, 0.55), (1.0, 1.0)]).unwrap();
        assert_eq!(stability_density_check(&flat, 0.5).unwrap(), true);
        assert_eq!(stability_density_check(&uniform(), 0.5).unwrap(), false);
        assert!(stability_density_check(&steep, 0.3).is_err());
        let r = babbling_fixed_points(&steep);
        let xs: Vec<f64> = r.roots.iter().map(|x| x.x).collect();
        assert_eq!(xs.len(), 3);
        assert_eq!(r.roots[1].stable, Some(false));
    }
}
