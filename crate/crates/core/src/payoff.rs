//! Payoff evaluation, Bayes posteriors, opponent L-probabilities and the
//! reduction of generalized action rules to cutoffs.

use crate::dist::{StepFn, TypeDistribution, MASS_TOL};
use crate::error::{ModelError, Result};
use crate::strategy::{Cutoff, MessageFunction, Strategy};

/// Stage-game payoff of type `u` when the realized actions are
/// `(own_left, opp_left)` as probabilities of L.
#[inline]
pub fn stage_payoff(u: f64, own_left: f64, opp_left: f64) -> f64 {
    (1.0 - u) * own_left * opp_left + u * (1.0 - own_left) * (1.0 - opp_left)
}

/// Payoff of type `u` using `sigma` against type `v` using `sigma_prime`.
pub fn pairwise_payoff(sigma: &Strategy, sigma_prime: &Strategy, u: f64, v: f64) -> Result<f64> {
    sigma.check_compatible(sigma_prime)?;
    let n = sigma.len();
    let (row_u, row_v) = (sigma.mu().row(u), sigma_prime.mu().row(v));
    let mut acc = 0.0;
    for m in 0..n {
        if row_u[m] == 0.0 {
            continue;
        }
        for mp in 0..n {
            if row_v[mp] == 0.0 {
                continue;
            }
            let a = sigma.xi().get(m, mp).left_prob(u);
            let b = sigma_prime.xi().get(mp, m).left_prob(v);
            acc += row_u[m] * row_v[mp] * stage_payoff(u, a, b);
        }
    }
    Ok(acc)
}

/// What a player needs to know about an opponent population: for every
/// opponent message `m'` its probability and, for every own message `m`,
/// the probability that the opponent sent `m'` and then plays L.
#[derive(Debug, Clone)]
pub struct OpponentView {
    n: usize,
    mass: Vec<f64>,
    left: Vec<f64>,
}

impl OpponentView {
    pub fn new(opp: &Strategy, dist: &TypeDistribution) -> Self {
        let n = opp.len();
        let mu = opp.mu();
        let mass: Vec<f64> = (0..n).map(|mp| mu.mean_prob(dist, mp)).collect();
        let mut left = vec![0.0; n * n];
        let mut breaks = mu.cuts().to_vec();
        let base = breaks.len();
        for mp in 0..n {
            if mass[mp] == 0.0 {
                continue;
            }
            for m in 0..n {
                let c = opp.xi().get(mp, m);
                breaks.truncate(base);
                if let Some(x) = c.point() {
                    breaks.push(x);
                }
                left[mp * n + m] = match c {
                    Cutoff::AllL => mass[mp],
                    Cutoff::AllR => 0.0,
                    _ => dist.expect(&breaks, |v| mu.prob(v, mp) * c.left_prob(v)),
                };
            }
        }
        OpponentView { n, mass, left }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Probability that the opponent sends `mp`.
    pub fn mass(&self, mp: usize) -> f64 {
        self.mass[mp]
    }

    /// Probability that the opponent sends `mp` and then plays L after
    /// seeing own message `m`.
    pub fn left(&self, mp: usize, m: usize) -> f64 {
        self.left[mp * self.n + m]
    }

    /// Probability that the opponent plays L when the own message is `m`.
    pub fn left_total(&self, m: usize) -> f64 {
        (0..self.n).map(|mp| self.left(mp, m)).sum()
    }
}

/// Payoff of type `u` who sends `m` and then follows the action table of `sigma`.
pub fn message_value(sigma: &Strategy, view: &OpponentView, u: f64, m: usize) -> f64 {
    let mut acc = 0.0;
    for mp in 0..view.len() {
        let mass = view.mass(mp);
        if mass == 0.0 {
            continue;
        }
        let wl = view.left(mp, m);
        let a = sigma.xi().get(m, mp).left_prob(u);
        acc += (1.0 - u) * a * wl + u * (1.0 - a) * (mass - wl);
    }
    acc
}

/// Payoff of type `u` who sends `m` and then best-responds to every
/// opponent message.
pub fn best_message_value(view: &OpponentView, u: f64, m: usize) -> f64 {
    let mut acc = 0.0;
    for mp in 0..view.len() {
        let mass = view.mass(mp);
        if mass == 0.0 {
            continue;
        }
        let wl = view.left(mp, m);
        acc += ((1.0 - u) * wl).max(u * (mass - wl));
    }
    acc
}

/// Interim payoff of type `u` under `sigma` against a summarized opponent.
pub fn interim_with_view(sigma: &Strategy, view: &OpponentView, u: f64) -> f64 {
    sigma
        .mu()
        .row(u)
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(m, &p)| p * message_value(sigma, view, u, m))
        .sum()
}

/// Interim payoff of type `u` playing `sigma` against opponents drawn from
/// `opp_dist` playing `sigma_prime`.
pub fn interim_payoff(sigma: &Strategy, sigma_prime: &Strategy, u: f64, opp_dist: &TypeDistribution) -> Result<f64> {
    sigma.check_compatible(sigma_prime)?;
    Ok(interim_with_view(sigma, &OpponentView::new(sigma_prime, opp_dist), u))
}

/// Ex-ante payoff of `sigma` (types from `own_dist`) against `sigma_prime`
/// (types from `opp_dist`).
pub fn exante_payoff(
    sigma: &Strategy,
    sigma_prime: &Strategy,
    own_dist: &TypeDistribution,
    opp_dist: &TypeDistribution,
) -> Result<f64> {
    sigma.check_compatible(sigma_prime)?;
    let view = OpponentView::new(sigma_prime, opp_dist);
    Ok(own_dist.expect(&sigma.breakpoints(), |u| interim_with_view(sigma, &view, u)))
}

/// Posterior type distribution of a sender of message index `m`.
pub fn posterior_index(dist: &TypeDistribution, mu: &MessageFunction, m: usize) -> Option<TypeDistribution> {
    dist.condition(&mu.column(m)).map(|(d, _)| d)
}

/// Posterior type distribution of a sender of message `label` under `sigma`.
pub fn posterior(dist: &TypeDistribution, sigma: &Strategy, label: &str) -> Result<TypeDistribution> {
    let m = sigma.index_of(label)?;
    posterior_index(dist, sigma.mu(), m).ok_or_else(|| ModelError::ZeroProbabilityMessage(label.to_string()))
}

/// Probability that the opponent plays L when the own message is `m`
/// and the opponent follows `sigma`.
pub fn beta(sigma: &Strategy, m: &str, opp_dist: &TypeDistribution) -> Result<f64> {
    let idx = sigma.index_of(m)?;
    Ok(OpponentView::new(sigma, opp_dist).left_total(idx))
}

/// Replace a generalized action rule (probability of L by type) with a
/// cutoff that plays L with the same total probability.
pub fn reduce_to_cutoff(eta: &StepFn, dist: &TypeDistribution) -> Cutoff {
    let p = dist.expect(eta.cuts(), |u| eta.eval(u));
    if p >= 1.0 - MASS_TOL {
        return Cutoff::AllL;
    }
    if p <= MASS_TOL {
        return Cutoff::AllR;
    }
    if dist.is_atomic() {
        let mut below = 0.0;
        for &(v, m) in dist.atom_list() {
            if below + m >= p - MASS_TOL {
                if (below + m - p).abs() <= MASS_TOL {
                    return Cutoff::at(v);
                }
                return Cutoff::At { x: v, tie_left: ((p - below) / m).clamp(0.0, 1.0) };
            }
            below += m;
        }
        Cutoff::AllL
    } else {
        Cutoff::at(dist.quantile(p))
    }
}

/// Expected payoff of a generalized action rule when the opponent plays L
/// with probability `q`.
pub fn rule_payoff(eta: &StepFn, dist: &TypeDistribution, q: f64) -> f64 {
    dist.expect(eta.cuts(), |u| {
        let a = eta.eval(u);
        (1.0 - u) * a * q + u * (1.0 - a) * (1.0 - q)
    })
}

/// Expected payoff of a cutoff rule when the opponent plays L with probability `q`.
pub fn cutoff_payoff(c: Cutoff, dist: &TypeDistribution, q: f64) -> f64 {
    let breaks: Vec<f64> = c.point().into_iter().collect();
    dist.expect(&breaks, |u| {
        let a = c.left_prob(u);
        (1.0 - u) * a * q + u * (1.0 - a) * (1.0 - q)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon;

    fn uniform() -> TypeDistribution {
        TypeDistribution::uniform(0.0, 1.0).unwrap()
    }

    #[test]
    fn pairwise_examples() {
        let l = canon::make_sigma_l();
        let r = canon::make_sigma_r();
        assert_eq!(pairwise_payoff(&l, &l, 0.3, 0.7).unwrap(), 0.7);
        assert_eq!(pairwise_payoff(&r, &r, 0.3, 0.7).unwrap(), 0.3);
        assert_eq!(pairwise_payoff(&l, &l, 0.0, 0.0).unwrap(), 1.0);
        assert!(pairwise_payoff(&l, &canon::make_sigma_c(), 0.3, 0.7).is_err());
    }

    #[test]
    fn interim_examples() {
        let f = uniform();
        let l = canon::make_sigma_l();
        let c = canon::make_sigma_c();
        assert!((interim_payoff(&l, &l, 0.9, &f).unwrap() - 0.5).abs() < 1e-15);
        assert!((interim_payoff(&c, &c, 0.4, &f).unwrap() - 0.55).abs() < 1e-15);
    }

    #[test]
    fn exante_examples() {
        let f = uniform();
        for s in [canon::make_sigma_l(), canon::make_sigma_r(), canon::make_sigma_c()] {
            assert!((exante_payoff(&s, &s, &f, &f).unwrap() - 0.625).abs() < 1e-14);
        }
    }

    #[test]
    fn posterior_examples() {
        let f = uniform();
        let l = canon::make_sigma_l();
        let post = posterior(&f, &l, "m_L").unwrap();
        assert_eq!(post.cdf(0.5), 1.0);
        assert!((post.cdf(0.25) - 0.5).abs() < 1e-15);
        let babble = canon::make_babbling(Cutoff::at(0.5));
        assert!(matches!(posterior(&f, &babble, "m_1"), Err(ModelError::ZeroProbabilityMessage(_))));
    }

    #[test]
    fn beta_examples() {
        let f = uniform();
        assert_eq!(beta(&canon::make_sigma_l(), "m_L", &f).unwrap(), 1.0);
        assert!((beta(&canon::make_sigma_l(), "m_R", &f).unwrap() - 0.5).abs() < 1e-15);
        assert!((beta(&canon::make_sigma_c(), "m_R0", &f).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn reduce_examples() {
        let f = uniform();
        assert_eq!(reduce_to_cutoff(&StepFn::constant(0.5), &f), Cutoff::at(0.5));
        assert_eq!(reduce_to_cutoff(&StepFn::constant(1.0), &f), Cutoff::AllL);
        assert_eq!(reduce_to_cutoff(&StepFn::constant(0.0), &f), Cutoff::AllR);
        let ex1 = canon::example1_distribution(0.01).unwrap();
        // Plays L strictly below 0.3: only the lowest atom, mass one quarter.
        let eta = StepFn::new(vec![0.3 - 1e-12], vec![1.0, 0.0]).unwrap();
        assert_eq!(reduce_to_cutoff(&eta, &ex1), Cutoff::at(ex1.atom_list()[0].0));
        let half = StepFn::constant(0.375);
        assert_eq!(reduce_to_cutoff(&half, &ex1), Cutoff::At { x: ex1.atom_list()[1].0, tie_left: 0.5 });
    }
}
