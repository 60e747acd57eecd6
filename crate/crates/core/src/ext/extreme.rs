//! Types with dominant actions: the support extends below 0 (types for
//! whom L is dominant) and above 1 (types for whom R is dominant).
//!
//! The coordinated, preference-revealing strategy with binary messages is
//! an equilibrium here only for one left tendency. This module builds that
//! strategy and measures how far the type one half is from indifference.

use num_rational::Ratio;
use serde::Serialize;

use crate::canon::{extreme_left_tendency, make_sigma_alpha, with_dominant_actions};
use crate::dist::TypeDistribution;
use crate::error::Result;
use crate::ext::lottery::{simplest_in_open, to_f64};
use crate::payoff::{message_value, OpponentView};
use crate::strategy::Strategy;

/// Half-width of the window used to turn the target tendency into a
/// rational.
const RATIONAL_WINDOW: f64 = 1e-10;

/// Rational left tendency within `RATIONAL_WINDOW` of `alpha`.
pub fn rational_tendency(alpha: f64) -> Result<Ratio<i64>> {
    if alpha <= 0.0 {
        return Ok(Ratio::new(0, 1));
    }
    if alpha >= 1.0 {
        return Ok(Ratio::new(1, 1));
    }
    simplest_in_open((alpha - RATIONAL_WINDOW).max(0.0), (alpha + RATIONAL_WINDOW).min(1.0))
}

/// Modular-lottery strategy with tendency `alpha` in which the
/// dominant-action types play their dominant action after every message
/// pair.
pub fn extreme_strategy_with(alpha: f64) -> Result<Strategy> {
    let r = rational_tendency(alpha)?;
    let (k, n) = (*r.numer() as usize, (*r.denom() as usize).max(1));
    Ok(with_dominant_actions(&make_sigma_alpha(k, n)?))
}

/// The equilibrium candidate for `dist`, at the tendency that makes the
/// type one half indifferent.
pub fn extreme_strategy(dist: &TypeDistribution) -> Result<Strategy> {
    extreme_strategy_with(extreme_left_tendency(dist)?)
}

/// Values of the type one half for sending an L-class and an R-class
/// message.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalfTypeValues {
    pub alpha: f64,
    pub left_class: f64,
    pub right_class: f64,
}

impl HalfTypeValues {
    pub fn gap(&self) -> f64 {
        (self.left_class - self.right_class).abs()
    }
}

/// Evaluate the type one half under the modular-lottery strategy with
/// tendency `alpha`, against an opponent following the same strategy.
pub fn half_type_values(dist: &TypeDistribution, alpha: f64) -> Result<HalfTypeValues> {
    let r = rational_tendency(alpha)?;
    let sigma = extreme_strategy_with(alpha)?;
    let n = (*r.denom() as usize).max(1);
    let view = OpponentView::new(&sigma, dist);
    Ok(HalfTypeValues {
        alpha: to_f64(r),
        left_class: message_value(&sigma, &view, 0.5, 0),
        right_class: message_value(&sigma, &view, 0.5, n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equil::verify_equilibrium;

    fn fixtures() -> Vec<TypeDistribution> {
        vec![
            TypeDistribution::piecewise_linear(vec![(-0.2, 0.0), (0.0, 0.2), (0.5, 0.5), (1.0, 0.9), (1.2, 1.0)]).unwrap(),
            TypeDistribution::piecewise_linear(vec![(-0.1, 0.0), (0.0, 0.1), (1.0, 0.9), (1.1, 1.0)]).unwrap(),
            TypeDistribution::piecewise_linear(vec![(-0.5, 0.0), (0.0, 0.15), (0.5, 0.45), (1.0, 0.95), (1.5, 1.0)])
                .unwrap(),
        ]
    }

    // Independent oracle: the closed-form class values for the type one
    // half in terms of F(0), F(1/2), F(1).
    fn closed_form(d: &TypeDistribution, a: f64) -> (f64, f64) {
        let (f0, fh, f1) = (d.cdf(0.0), d.cdf(0.5), d.cdf(1.0));
        let left = 0.5 * fh + 0.5 * a * (f1 - fh) + 0.5 * (1.0 - a) * (1.0 - fh);
        let right = 0.5 * a * fh + 0.5 * (1.0 - a) * (fh - f0) + 0.5 * (1.0 - fh);
        (left, right)
    }

    #[test]
    fn tendencies_of_the_fixtures() {
        let want = [2.0 / 3.0, 0.5, 0.75];
        for (d, w) in fixtures().iter().zip(want) {
            assert!((extreme_left_tendency(d).unwrap() - w).abs() < 1e-12);
        }
    }

    #[test]
    fn half_type_is_indifferent_only_at_the_target() {
        for d in fixtures() {
            let a = extreme_left_tendency(&d).unwrap();
            let v = half_type_values(&d, a).unwrap();
            let (l, r) = closed_form(&d, v.alpha);
            assert!((v.left_class - l).abs() < 1e-12 && (v.right_class - r).abs() < 1e-12);
            assert!(v.gap() < 1e-12, "{v:?}");
            for shift in [-0.05, 0.05] {
                let w = half_type_values(&d, a + shift).unwrap();
                let (l, r) = closed_form(&d, w.alpha);
                assert!((w.left_class - l).abs() < 1e-12 && (w.right_class - r).abs() < 1e-12);
                assert!(w.gap() > 1e-3, "{w:?}");
            }
        }
    }

    #[test]
    fn target_strategy_is_an_equilibrium_and_others_are_not() {
        for d in fixtures() {
            let a = extreme_left_tendency(&d).unwrap();
            let rep = verify_equilibrium(&extreme_strategy(&d).unwrap(), &d, 201, 1e-9);
            assert!(rep.is_equilibrium, "{rep:?}");
            let off = verify_equilibrium(&extreme_strategy_with(a + 0.05).unwrap(), &d, 201, 1e-9);
            assert!(!off.is_equilibrium);
        }
    }
}
