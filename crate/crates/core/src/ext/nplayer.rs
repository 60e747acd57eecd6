//! Coordination among `n >= 2` players: everyone gets their own value of
//! the common action when all coordinate, and zero otherwise.
//!
//! After a message profile that mixes L-side and R-side senders, cutoff
//! equilibria of the continuation are characterized by each player's
//! cutoff equalling the conditional probability that the others
//! coordinate on L. This module solves for such interior profiles and
//! compares them with the fair coin toss between L and R.

use serde::Serialize;

use crate::dist::TypeDistribution;
use crate::error::{ModelError, Result};
use crate::strategy::Cutoff;

/// Payoffs of every player for one action profile (`true` = L).
pub fn nplayer_payoff(left: &[bool], types: &[f64]) -> Result<Vec<f64>> {
    if left.len() != types.len() || left.len() < 2 {
        return Err(ModelError::Config("need one action per player and at least two players".into()));
    }
    let all_l = left.iter().all(|&a| a);
    let all_r = left.iter().all(|&a| !a);
    Ok(types
        .iter()
        .map(|&u| if all_l { 1.0 - u } else if all_r { u } else { 0.0 })
        .collect())
}

/// Cutoff making a player indifferent when each opponent `j` plays L with
/// probability `opp_left[j]`: the probability that the opponents all play
/// L, conditional on them all playing the same action. `None` when the
/// opponents never coordinate.
pub fn miscoordination_cutoff(opp_left: &[f64]) -> Option<f64> {
    let l: f64 = opp_left.iter().product();
    let r: f64 = opp_left.iter().map(|p| 1.0 - p).product();
    (l + r > 0.0).then(|| l / (l + r))
}

/// Interim payoff of type `u` using cutoff `x` when the opponents play L
/// with probabilities `opp_left`.
pub fn cutoff_payoff(u: f64, x: f64, opp_left: &[f64]) -> f64 {
    let l: f64 = opp_left.iter().product();
    let r: f64 = opp_left.iter().map(|p| 1.0 - p).product();
    if u <= x {
        (1.0 - u) * l
    } else {
        u * r
    }
}

fn left_probs(posteriors: &[TypeDistribution], x: &[f64]) -> Vec<f64> {
    posteriors.iter().zip(x).map(|(d, &c)| d.prob_left(Cutoff::at(c))).collect()
}

fn others(v: &[f64], i: usize) -> Vec<f64> {
    v.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, &p)| p).collect()
}

fn residual(posteriors: &[TypeDistribution], x: &[f64]) -> Option<Vec<f64>> {
    let f = left_probs(posteriors, x);
    (0..x.len()).map(|i| miscoordination_cutoff(&others(&f, i)).map(|c| x[i] - c)).collect()
}

/// Newton iteration for a cutoff profile solving the indifference system,
/// with a finite-difference Jacobian. Returns the profile when the
/// residual falls below `1e-12`.
pub fn solve_cutoff_profile(posteriors: &[TypeDistribution], start: &[f64]) -> Option<Vec<f64>> {
    let n = posteriors.len();
    let mut x = start.to_vec();
    for _ in 0..200 {
        let r = residual(posteriors, &x)?;
        let norm = r.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if norm < 1e-12 {
            return Some(x);
        }
        let h = 1e-7;
        let mut jac = vec![vec![0.0; n]; n];
        for k in 0..n {
            let mut xp = x.clone();
            xp[k] += h;
            let rp = residual(posteriors, &xp)?;
            for i in 0..n {
                jac[i][k] = (rp[i] - r[i]) / h;
            }
        }
        let step = solve_linear(jac, r)?;
        let mut t = 1.0;
        loop {
            let cand: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a - t * s).collect();
            if let Some(rc) = residual(posteriors, &cand) {
                if rc.iter().map(|v| v.abs()).fold(0.0, f64::max) < norm || t < 1e-6 {
                    x = cand;
                    break;
                }
            }
            t /= 2.0;
            if t < 1e-9 {
                return None;
            }
        }
    }
    None
}

fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[piv][c].abs() < 1e-14 {
            return None;
        }
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Cutoff profiles after a message profile in which every player's
/// cutoff lies strictly inside the hull of their posterior support.
/// Starts are taken from a grid of quantile levels, one level per side.
pub fn interior_cutoff_profiles(posteriors: &[TypeDistribution], left_side: &[bool]) -> Vec<Vec<f64>> {
    let levels = [0.1, 0.25, 0.4, 0.5, 0.6, 0.75, 0.9];
    let mut out: Vec<Vec<f64>> = Vec::new();
    for &tl in &levels {
        for &tr in &levels {
            let start: Vec<f64> =
                posteriors.iter().zip(left_side).map(|(d, &l)| d.quantile(if l { tl } else { tr })).collect();
            let Some(x) = solve_cutoff_profile(posteriors, &start) else { continue };
            let interior = posteriors.iter().zip(&x).all(|(d, &c)| {
                let (lo, hi) = d.support_hull();
                c > lo + 1e-9 && c < hi - 1e-9
            });
            if interior && !out.iter().any(|y| y.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-7)) {
                out.push(x);
            }
        }
    }
    out
}

/// Comparison of an interior cutoff profile with the fair coin toss that
/// gives every type one half.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoinTossComparison {
    pub cutoffs: Vec<f64>,
    /// Smallest margin of the coin toss over the profile across players
    /// and grid types.
    pub min_margin: f64,
    /// Whether the coin toss is weakly better for every grid type.
    pub weakly_better: bool,
    /// Whether it is strictly better for at least one grid type.
    pub strictly_somewhere: bool,
}

/// Evaluate the coin toss against the cutoff profile `x` on `grid` types
/// drawn from each player's posterior.
pub fn coin_toss_dominance(posteriors: &[TypeDistribution], x: &[f64], grid: usize, tol: f64) -> CoinTossComparison {
    let f = left_probs(posteriors, x);
    let mut min_margin = f64::INFINITY;
    let mut strict = false;
    for (i, d) in posteriors.iter().enumerate() {
        let opp = others(&f, i);
        for u in d.grid(grid) {
            let margin = 0.5 - cutoff_payoff(u, x[i], &opp);
            min_margin = min_margin.min(margin);
            strict |= margin > tol;
        }
    }
    CoinTossComparison { cutoffs: x.to_vec(), min_margin, weakly_better: min_margin >= -tol, strictly_somewhere: strict }
}

/// Posteriors of the preference-revealing message profile on `dist`:
/// L-side senders are conditioned on types at most one half, R-side
/// senders on the rest.
pub fn revealing_posteriors(dist: &TypeDistribution, left_side: &[bool]) -> Result<Vec<TypeDistribution>> {
    let low = dist
        .condition(&crate::dist::StepFn::indicator_le(0.5))
        .ok_or_else(|| ModelError::Precondition("no types at or below one half".into()))?
        .0;
    let high = dist
        .condition(&crate::dist::StepFn::indicator_gt(0.5))
        .ok_or_else(|| ModelError::Precondition("no types above one half".into()))?
        .0;
    Ok(left_side.iter().map(|&l| if l { low.clone() } else { high.clone() }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn payoff_formula() {
        let u = [0.2, 0.5, 0.9];
        let p = nplayer_payoff(&[true, true, true], &u).unwrap();
        assert!(p.iter().zip([0.8, 0.5, 0.1]).all(|(a, b)| (a - b).abs() < 1e-15));
        assert_eq!(nplayer_payoff(&[true, true, false], &u).unwrap(), vec![0.0; 3]);
        assert_eq!(nplayer_payoff(&[false, false, false], &u).unwrap(), u.to_vec());
        // Two players reproduce the base stage game.
        assert_eq!(nplayer_payoff(&[true, true], &[0.3, 0.6]).unwrap(), vec![0.7, 0.4]);
        assert_eq!(nplayer_payoff(&[true, false], &[0.3, 0.6]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn cutoff_ratio_examples() {
        assert_eq!(miscoordination_cutoff(&[0.5, 0.5]), Some(0.5));
        assert!((miscoordination_cutoff(&[0.8, 0.5]).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(miscoordination_cutoff(&[1.0, 0.3]), Some(1.0));
        assert_eq!(miscoordination_cutoff(&[1.0, 0.0]), None);
    }

    #[test]
    fn two_player_interior_profile_on_uniform() {
        let d = TypeDistribution::uniform(0.0, 1.0).unwrap();
        let side = [true, false];
        let post = revealing_posteriors(&d, &side).unwrap();
        let sols = interior_cutoff_profiles(&post, &side);
        assert_eq!(sols.len(), 1);
        // x1 = 2 x2 - 1 and x2 = 2 x1 give (1/3, 2/3).
        assert!((sols[0][0] - 1.0 / 3.0).abs() < 1e-9 && (sols[0][1] - 2.0 / 3.0).abs() < 1e-9);
        let c = coin_toss_dominance(&post, &sols[0], 101, 1e-12);
        assert!(c.weakly_better && c.strictly_somewhere);
    }

    #[test]
    fn three_player_profiles_are_dominated_by_the_coin_toss() {
        let d = TypeDistribution::uniform(0.0, 1.0).unwrap();
        for side in [[true, false, false], [true, true, false]] {
            let post = revealing_posteriors(&d, &side).unwrap();
            let sols = interior_cutoff_profiles(&post, &side);
            assert!(!sols.is_empty());
            for x in sols {
                let f = left_probs(&post, &x);
                for i in 0..3 {
                    let c = miscoordination_cutoff(&others(&f, i)).unwrap();
                    assert!((x[i] - c).abs() < 1e-10);
                    assert_eq!(x[i] <= 0.5, side[i]);
                }
                let c = coin_toss_dominance(&post, &x, 101, 1e-12);
                assert!(c.weakly_better && c.strictly_somewhere, "{c:?}");
            }
        }
    }
}
