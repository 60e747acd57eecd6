//! Type distributions on a real interval.
//!
//! Two shapes are supported: finitely many atoms, and a continuous
//! distribution with a piecewise-linear CDF (piecewise-constant density).
//! Every integrand produced by cutoff strategies is piecewise affine in the
//! integration variable, so expectations are computed exactly by summing
//! segment mass times the integrand at the segment midpoint.

use crate::error::{ModelError, Result};
use crate::strategy::Cutoff;

/// Mass tolerance used when deciding whether a set of types is negligible.
pub const MASS_TOL: f64 = 1e-12;

/// A piecewise-constant function on the real line.
///
/// `values[j]` applies on `(cuts[j-1], cuts[j]]`, with the first piece
/// unbounded below and the last unbounded above.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFn {
    cuts: Vec<f64>,
    values: Vec<f64>,
}

impl StepFn {
    pub fn new(cuts: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != cuts.len() + 1 {
            return Err(ModelError::Config(format!(
                "step function needs {} values for {} cuts, got {}",
                cuts.len() + 1,
                cuts.len(),
                values.len()
            )));
        }
        if cuts.windows(2).any(|w| !(w[0] < w[1])) || cuts.iter().any(|c| !c.is_finite()) {
            return Err(ModelError::Config("step function cuts must be finite and strictly increasing".into()));
        }
        Ok(StepFn { cuts, values })
    }

    pub fn constant(v: f64) -> Self {
        StepFn { cuts: Vec::new(), values: vec![v] }
    }

    /// 1 on `(-inf, x]`, 0 above.
    pub fn indicator_le(x: f64) -> Self {
        StepFn { cuts: vec![x], values: vec![1.0, 0.0] }
    }

    /// 1 on `(x, inf)`, 0 at or below.
    pub fn indicator_gt(x: f64) -> Self {
        StepFn { cuts: vec![x], values: vec![0.0, 1.0] }
    }

    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.values[self.cuts.partition_point(|&c| c < u)]
    }

    /// Pointwise product, on the merged set of cuts.
    pub fn product(&self, other: &StepFn) -> StepFn {
        let mut cuts: Vec<f64> = self.cuts.iter().chain(other.cuts.iter()).copied().collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let values = piece_probes(&cuts).map(|u| self.eval(u) * other.eval(u)).collect();
        StepFn { cuts, values }
    }
}

/// One representative point per piece of a cut list; pieces are
/// left-open, so a cut itself represents the piece it closes.
fn piece_probes(cuts: &[f64]) -> impl Iterator<Item = f64> + '_ {
    (0..=cuts.len()).map(move |j| if j < cuts.len() { cuts[j] } else { cuts.last().map_or(0.0, |c| c + 1.0) })
}

/// Which of the two supported shapes a distribution has.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistKind {
    Atoms,
    PiecewiseLinear,
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    /// Sorted by value, strictly positive masses.
    Atoms(Vec<(f64, f64)>),
    /// Knots `(x, F(x))`, x strictly increasing from `lower` to `upper`.
    Linear(Vec<(f64, f64)>),
}

/// A distribution of private types on `[lower, upper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeDistribution {
    lower: f64,
    upper: f64,
    shape: Shape,
}

impl TypeDistribution {
    /// Finitely many atoms `(value, mass)` on `[lower, upper]`.
    pub fn atoms(lower: f64, upper: f64, atoms: Vec<(f64, f64)>) -> Result<Self> {
        if !(lower <= upper) {
            return Err(ModelError::Distribution("support bounds must satisfy lower <= upper".into()));
        }
        if atoms.is_empty() {
            return Err(ModelError::Distribution("at least one atom is required".into()));
        }
        let mut atoms = atoms;
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (v, m) in atoms {
            if !(m > 0.0) || !m.is_finite() {
                return Err(ModelError::Distribution(format!("atom at {v} has non-positive mass {m}")));
            }
            if v < lower || v > upper {
                return Err(ModelError::Distribution(format!("atom {v} outside [{lower}, {upper}]")));
            }
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += m,
                _ => merged.push((v, m)),
            }
        }
        let total: f64 = merged.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(ModelError::Distribution(format!("atom masses sum to {total}, not 1")));
        }
        Ok(TypeDistribution { lower, upper, shape: Shape::Atoms(merged) })
    }

    /// Atoms on the unit interval.
    pub fn unit_atoms(atoms: Vec<(f64, f64)>) -> Result<Self> {
        Self::atoms(0.0, 1.0, atoms)
    }

    /// Continuous distribution from CDF knots; the first knot fixes the
    /// lower bound and must carry F = 0, the last fixes the upper bound
    /// and must carry F = 1.
    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(ModelError::Distribution("need at least two knots".into()));
        }
        if knots.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(ModelError::Distribution("knot positions must be strictly increasing".into()));
        }
        if knots.windows(2).any(|w| w[1].1 < w[0].1) {
            return Err(ModelError::Distribution("CDF values must be nondecreasing".into()));
        }
        let first = knots[0];
        let last = knots[knots.len() - 1];
        if first.1.abs() > MASS_TOL || (last.1 - 1.0).abs() > MASS_TOL {
            return Err(ModelError::Distribution("CDF must run from 0 to 1".into()));
        }
        let mut knots = knots;
        knots[0].1 = 0.0;
        let n = knots.len();
        knots[n - 1].1 = 1.0;
        Ok(TypeDistribution { lower: first.0, upper: last.0, shape: Shape::Linear(knots) })
    }

    /// Uniform distribution on `[a, b]`.
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::piecewise_linear(vec![(a, 0.0), (b, 1.0)])
    }

    /// Piecewise-linear interpolation of an arbitrary continuous CDF on
    /// `n` equal segments of `[a, b]`.
    pub fn interpolate_cdf(a: f64, b: f64, n: usize, cdf: impl Fn(f64) -> f64) -> Result<Self> {
        if n == 0 || !(a < b) {
            return Err(ModelError::Distribution("interpolation needs n >= 1 and a < b".into()));
        }
        let f0 = cdf(a);
        let f1 = cdf(b);
        let mut knots = Vec::with_capacity(n + 1);
        let mut prev = 0.0;
        for i in 0..=n {
            let x = if i == n { b } else { a + (b - a) * i as f64 / n as f64 };
            let y = ((cdf(x) - f0) / (f1 - f0)).clamp(prev, 1.0);
            knots.push((x, y));
            prev = y;
        }
        Self::piecewise_linear(knots)
    }

    pub fn kind(&self) -> DistKind {
        match self.shape {
            Shape::Atoms(_) => DistKind::Atoms,
            Shape::Linear(_) => DistKind::PiecewiseLinear,
        }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Atoms `(value, mass)`; empty for the continuous shape.
    pub fn atom_list(&self) -> &[(f64, f64)] {
        match &self.shape {
            Shape::Atoms(a) => a,
            Shape::Linear(_) => &[],
        }
    }

    /// CDF knots; empty for the atom shape.
    pub fn knot_list(&self) -> &[(f64, f64)] {
        match &self.shape {
            Shape::Atoms(_) => &[],
            Shape::Linear(k) => k,
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self.shape, Shape::Atoms(_))
    }

    /// P(U <= x).
    pub fn cdf(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Atoms(a) => a.iter().take_while(|p| p.0 <= x).map(|p| p.1).sum::<f64>().min(1.0),
            Shape::Linear(k) => linear_cdf(k, x),
        }
    }

    /// P(U < x).
    pub fn cdf_below(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Atoms(a) => a.iter().take_while(|p| p.0 < x).map(|p| p.1).sum::<f64>().min(1.0),
            Shape::Linear(k) => linear_cdf(k, x),
        }
    }

    /// P(U = x); zero for the continuous shape.
    pub fn mass_at(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Atoms(a) => a.iter().filter(|p| p.0 == x).map(|p| p.1).sum(),
            Shape::Linear(_) => 0.0,
        }
    }

    /// Probability that a type drawn from this distribution plays L under `cut`.
    pub fn prob_left(&self, cut: Cutoff) -> f64 {
        match cut {
            Cutoff::AllL => 1.0,
            Cutoff::AllR => 0.0,
            Cutoff::At { x, tie_left } => self.cdf_below(x) + tie_left * self.mass_at(x),
        }
    }

    /// Density at `x` for the continuous shape. At a knot where the two
    /// adjacent slopes differ, the average of the two is returned.
    pub fn density_at(&self, x: f64) -> Option<f64> {
        let Shape::Linear(k) = &self.shape else { return None };
        if x < self.lower || x > self.upper {
            return Some(0.0);
        }
        let slope = |i: usize| (k[i + 1].1 - k[i].1) / (k[i + 1].0 - k[i].0);
        let segs = k.len() - 1;
        if let Some(i) = k.iter().position(|p| p.0 == x) {
            let left = if i > 0 { Some(slope(i - 1)) } else { None };
            let right = if i < segs { Some(slope(i)) } else { None };
            return Some(match (left, right) {
                (Some(l), Some(r)) => 0.5 * (l + r),
                (Some(l), None) => l,
                (None, Some(r)) => r,
                (None, None) => 0.0,
            });
        }
        let i = k.partition_point(|p| p.0 <= x) - 1;
        Some(slope(i.min(segs - 1)))
    }

    /// Smallest x with F(x) >= p for the continuous shape; for atoms the
    /// smallest atom value whose cumulative mass reaches p.
    pub fn quantile(&self, p: f64) -> f64 {
        match &self.shape {
            Shape::Atoms(a) => {
                let mut acc = 0.0;
                for &(v, m) in a {
                    acc += m;
                    if acc >= p - MASS_TOL {
                        return v;
                    }
                }
                a[a.len() - 1].0
            }
            Shape::Linear(k) => {
                if p <= 0.0 {
                    return self.lower;
                }
                for w in k.windows(2) {
                    let (x0, f0) = w[0];
                    let (x1, f1) = w[1];
                    if f1 >= p && f1 > f0 {
                        return x0 + (p - f0).max(0.0) / (f1 - f0) * (x1 - x0);
                    }
                }
                self.upper
            }
        }
    }

    /// Smallest and largest points of the support (types carrying mass).
    pub fn support_hull(&self) -> (f64, f64) {
        match &self.shape {
            Shape::Atoms(a) => (a[0].0, a[a.len() - 1].0),
            Shape::Linear(k) => {
                let first = k.windows(2).find(|w| w[1].1 > w[0].1).map_or(self.lower, |w| w[0].0);
                let last = k.windows(2).rev().find(|w| w[1].1 > w[0].1).map_or(self.upper, |w| w[1].0);
                (first, last)
            }
        }
    }

    /// Exact expectation of `g(U)` for integrands that are affine between
    /// consecutive `breaks` (and between knots). Atoms are evaluated exactly.
    pub fn expect(&self, breaks: &[f64], g: impl Fn(f64) -> f64) -> f64 {
        match &self.shape {
            Shape::Atoms(a) => a.iter().map(|&(v, m)| m * g(v)).sum(),
            Shape::Linear(k) => {
                let pts = self.merged_points(breaks);
                let mut acc = 0.0;
                for w in pts.windows(2) {
                    let mass = linear_cdf(k, w[1]) - linear_cdf(k, w[0]);
                    if mass > 0.0 {
                        acc += mass * g(0.5 * (w[0] + w[1]));
                    }
                }
                acc
            }
        }
    }

    /// Knots of the continuous shape merged with interior `breaks`.
    fn merged_points(&self, breaks: &[f64]) -> Vec<f64> {
        let mut pts: Vec<f64> = self.knot_list().iter().map(|p| p.0).collect();
        pts.extend(breaks.iter().copied().filter(|&b| b > self.lower && b < self.upper));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Bayes conditioning on a piecewise-constant weight (the probability
    /// of the conditioning event as a function of type). Returns the
    /// posterior and the prior probability of the event, or `None` when
    /// the event has probability zero.
    pub fn condition(&self, weight: &StepFn) -> Option<(TypeDistribution, f64)> {
        match &self.shape {
            Shape::Atoms(a) => {
                let raw: Vec<(f64, f64)> =
                    a.iter().map(|&(v, m)| (v, m * weight.eval(v))).filter(|p| p.1 > 0.0).collect();
                let total: f64 = raw.iter().map(|p| p.1).sum();
                if total <= MASS_TOL * 1e-3 {
                    return None;
                }
                let atoms = raw.into_iter().map(|(v, m)| (v, m / total)).collect();
                Some((TypeDistribution { lower: self.lower, upper: self.upper, shape: Shape::Atoms(atoms) }, total))
            }
            Shape::Linear(k) => {
                let pts = self.merged_points(weight.cuts());
                let mut cum = vec![0.0];
                for w in pts.windows(2) {
                    let mass = (linear_cdf(k, w[1]) - linear_cdf(k, w[0])).max(0.0);
                    let wv = weight.eval(0.5 * (w[0] + w[1])).max(0.0);
                    cum.push(cum[cum.len() - 1] + mass * wv);
                }
                let total = cum[cum.len() - 1];
                if total <= MASS_TOL * 1e-3 {
                    return None;
                }
                let knots: Vec<(f64, f64)> =
                    pts.iter().zip(cum.iter()).map(|(&x, &c)| (x, (c / total).min(1.0))).collect();
                let mut knots = knots;
                let n = knots.len();
                knots[n - 1].1 = 1.0;
                Some((TypeDistribution { lower: self.lower, upper: self.upper, shape: Shape::Linear(knots) }, total))
            }
        }
    }

    /// Whether F(c - t) + F(c + t) = 1 for all t, checked at the knots (or
    /// atoms) and their mirror images.
    pub fn is_symmetric_about(&self, c: f64, tol: f64) -> bool {
        match &self.shape {
            Shape::Atoms(a) => a.iter().all(|&(v, m)| (self.mass_at_approx(2.0 * c - v, tol) - m).abs() <= tol),
            Shape::Linear(k) => k.iter().all(|&(x, _)| (self.cdf(x) + self.cdf(2.0 * c - x) - 1.0).abs() <= tol),
        }
    }

    fn mass_at_approx(&self, x: f64, tol: f64) -> f64 {
        self.atom_list().iter().filter(|p| (p.0 - x).abs() <= tol).map(|p| p.1).sum()
    }

    /// Evaluation points covering the support: atom values, or `n` evenly
    /// spaced points over each knot segment carrying mass plus the knots.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        match &self.shape {
            Shape::Atoms(a) => a.iter().map(|p| p.0).collect(),
            Shape::Linear(k) => {
                let (lo, hi) = self.support_hull();
                let n = n.max(2);
                let mut pts: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
                pts.extend(k.iter().map(|p| p.0).filter(|&x| x >= lo && x <= hi));
                pts.sort_by(f64::total_cmp);
                pts.dedup();
                pts
            }
        }
    }

    /// Whether a type at `u` is in the support (atom present, or positive
    /// density on a neighbourhood side).
    pub fn in_support(&self, u: f64) -> bool {
        match &self.shape {
            Shape::Atoms(a) => a.iter().any(|p| p.0 == u),
            Shape::Linear(_) => {
                let (lo, hi) = self.support_hull();
                u >= lo && u <= hi
            }
        }
    }
}

fn linear_cdf(k: &[(f64, f64)], x: f64) -> f64 {
    if x <= k[0].0 {
        return 0.0;
    }
    if x >= k[k.len() - 1].0 {
        return 1.0;
    }
    let i = k.partition_point(|p| p.0 <= x) - 1;
    let (x0, f0) = k[i];
    let (x1, f1) = k[i + 1];
    f0 + (f1 - f0) * (x - x0) / (x1 - x0)
}
