//! Rational targets for jointly controlled lotteries.
//!
//! A lottery run by summing uniform numbers modulo `n` can only realize
//! probabilities with denominator `n`, so every construction that needs a
//! lottery first picks a rational inside an admissible window.

use num_rational::Ratio;

use crate::error::{ModelError, Result};

/// Largest denominator the mediant search may produce.
pub const MAX_DENOMINATOR: i64 = 1 << 40;

/// The rational with the smallest denominator strictly inside `(lo, hi)`,
/// found by walking the Stern–Brocot tree with batched steps.
pub fn simplest_in_open(lo: f64, hi: f64) -> Result<Ratio<i64>> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi && lo >= 0.0) {
        return Err(ModelError::Precondition(format!("need a nonempty window in [0, inf), got ({lo}, {hi})")));
    }
    // Bounds a/b (left) and c/d (right); the right bound starts at infinity.
    let (mut a, mut b, mut c, mut d) = (0i64, 1i64, 1i64, 0i64);
    loop {
        let (p, q) = (a + c, b + d);
        if q > MAX_DENOMINATOR {
            return Err(ModelError::Precondition(format!("window ({lo}, {hi}) needs a denominator above {MAX_DENOMINATOR}")));
        }
        let v = p as f64 / q as f64;
        if v <= lo {
            let k = ((lo * b as f64 - a as f64) / (c as f64 - lo * d as f64)).floor().max(1.0) as i64;
            a += k * c;
            b += k * d;
        } else if v >= hi {
            let k = ((c as f64 - hi * d as f64) / (hi * b as f64 - a as f64)).floor().max(1.0) as i64;
            c += k * a;
            d += k * b;
        } else {
            return Ok(Ratio::new(p, q));
        }
    }
}

/// A rational `alpha` in `(0, 1)` with `(p - q) / (1 - q) < alpha < p / q`.
///
/// With such an `alpha` as the probability of the first action after a
/// disagreement, both preference classes coordinate on their favourite
/// action strictly more often than under the distribution `(p, 1 - p)`.
pub fn alpha_window(p: f64, q: f64) -> Result<Ratio<i64>> {
    if !(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0) {
        return Err(ModelError::Precondition(format!("p and q must lie in (0, 1), got p={p}, q={q}")));
    }
    let lo = ((p - q) / (1.0 - q)).max(0.0);
    let hi = (p / q).min(1.0);
    simplest_in_open(lo, hi)
}

/// Rational lower approximation of a distribution over at least three
/// actions: every supported entry is lowered by an amount in
/// `(0.9 delta, delta)`, and unsupported entries stay zero.
///
/// `delta` defaults to a quarter of the smallest supported probability.
pub fn rational_approximation(p: &[f64], delta: Option<f64>) -> Result<Vec<Ratio<i64>>> {
    let support: Vec<f64> = p.iter().copied().filter(|&x| x > 0.0).collect();
    if support.len() < 3 {
        return Err(ModelError::Precondition(format!(
            "rational approximation needs at least three supported actions, got {}",
            support.len()
        )));
    }
    if p.iter().any(|&x| x < 0.0) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(ModelError::Precondition("p must be a probability vector".into()));
    }
    let bound = support.iter().copied().fold(f64::INFINITY, f64::min) / 2.0;
    let delta = delta.unwrap_or(bound / 2.0);
    if !(delta > 0.0 && delta < bound) {
        return Err(ModelError::Precondition(format!("delta must lie in (0, {bound}), got {delta}")));
    }
    p.iter()
        .map(|&x| if x > 0.0 { simplest_in_open(x - delta, x - 0.9 * delta) } else { Ok(Ratio::new(0, 1)) })
        .collect()
}

/// Whether `q` is a valid lower approximation of `p`: entries are
/// nonnegative, at most `p`, and no single gap exceeds half the total gap.
pub fn is_valid_approximation(p: &[f64], q: &[Ratio<i64>]) -> bool {
    if p.len() != q.len() {
        return false;
    }
    let qf: Vec<f64> = q.iter().map(|r| *r.numer() as f64 / *r.denom() as f64).collect();
    let total: f64 = p.iter().zip(&qf).map(|(a, b)| a - b).sum();
    p.iter().zip(&qf).all(|(&a, &b)| b >= 0.0 && b <= a && a - b <= 0.5 * total + 1e-15)
}

/// Least common denominator of a list of rationals.
pub fn common_denominator(q: &[Ratio<i64>]) -> i64 {
    q.iter().fold(1i64, |acc, r| num_integer::lcm(acc, *r.denom()))
}

pub fn to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplest_rationals() {
        assert_eq!(simplest_in_open(0.0, 1.0).unwrap(), Ratio::new(1, 2));
        assert_eq!(simplest_in_open(2.0 / 7.0, 1.0).unwrap(), Ratio::new(1, 2));
        assert_eq!(simplest_in_open(0.3, 0.34).unwrap(), Ratio::new(1, 3));
        assert_eq!(simplest_in_open(0.6, 0.7).unwrap(), Ratio::new(2, 3));
        assert_eq!(simplest_in_open(3.2, 3.3).unwrap(), Ratio::new(13, 4));
        let r = simplest_in_open(0.999, 0.9999).unwrap();
        assert!(to_f64(r) > 0.999 && to_f64(r) < 0.9999);
    }

    #[test]
    fn simplest_matches_brute_force() {
        for (lo, hi) in [(0.12, 0.13), (0.41, 0.415), (0.7071, 0.7072), (0.001, 0.002)] {
            let r = simplest_in_open(lo, hi).unwrap();
            let d = *r.denom();
            for q in 1..d {
                for p in 0..=q {
                    let v = p as f64 / q as f64;
                    assert!(!(v > lo && v < hi), "{p}/{q} is simpler than {r}");
                }
            }
        }
    }

    #[test]
    fn alpha_window_examples() {
        assert_eq!(alpha_window(0.5, 0.3).unwrap(), Ratio::new(1, 2));
        assert_eq!(alpha_window(0.4, 0.4).unwrap(), Ratio::new(1, 2));
        let a = to_f64(alpha_window(0.999, 0.5).unwrap());
        assert!(a > (0.999 - 0.5) / 0.5 && a < 1.0);
        assert!(alpha_window(1.0, 0.5).is_err());
    }

    #[test]
    fn approximations_pass_the_three_checks() {
        for p in [vec![1.0 / 3.0; 3], vec![0.5, 0.3, 0.2], vec![0.25, 0.0, 0.25, 0.5]] {
            let q = rational_approximation(&p, None).unwrap();
            assert!(is_valid_approximation(&p, &q), "{p:?} -> {q:?}");
            let delta = p.iter().copied().filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min) / 4.0;
            for (a, b) in p.iter().zip(&q) {
                if *a > 0.0 {
                    let gap = a - to_f64(*b);
                    assert!(gap > 0.9 * delta && gap < delta);
                } else {
                    assert_eq!(*b, Ratio::new(0, 1));
                }
            }
        }
        assert!(rational_approximation(&[0.5, 0.5, 0.0], None).is_err());
    }
}
