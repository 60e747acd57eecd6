//! Constructors for the named strategies and the standard fixtures.
//!
//! Label conventions:
//! * `m_L`, `m_R` for the preference-revealing pair,
//! * `m_L0`, `m_L1`, `m_R0`, `m_R1` for the bit-lottery strategy,
//! * `m_L{i}`, `m_R{i}` (i = 1..n) for the modular lottery with n numbers,
//! * `m_0`, `m_1` for babbling.

pub mod fixtures;
pub mod two_round;

pub use two_round::{make_sigma_ex, solve_sigma_ex_threshold, sigma_ex_indifference, TwoRoundStrategy};

use crate::dist::TypeDistribution;
use crate::error::{config, ModelError, Result};
use crate::strategy::{labels, ActionTable, Cutoff, MessageFunction, Strategy};

/// Message function that sends `low` (probabilities) for types at or below
/// one half and `high` above.
fn preference_split(low: Vec<f64>, high: Vec<f64>) -> MessageFunction {
    MessageFunction::split(0.5, low, high).expect("rows are distributions")
}

fn one_hot(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

/// Preference-revealing strategy on an arbitrary label set whose first two
/// labels play the roles of `m_L` and `m_R`; any further label is treated
/// like the first.
fn revealing_with_fallback(names: Vec<String>, fallback_left: bool) -> Result<Strategy> {
    let n = names.len();
    if n < 2 {
        return Err(ModelError::Capacity { needed: 2, available: n });
    }
    let mu = preference_split(one_hot(n, 0), one_hot(n, 1));
    let xi = ActionTable::from_fn(n, |m, mp| {
        let (a, b) = (m == 1, mp == 1);
        match (a, b, fallback_left) {
            (true, true, _) => Cutoff::AllR,
            (false, false, _) => Cutoff::AllL,
            (_, _, true) => Cutoff::AllL,
            (_, _, false) => Cutoff::AllR,
        }
    });
    Strategy::new(names, mu, xi)
}

/// Coordinate on L unless both players reveal a preference for R.
pub fn make_sigma_l() -> Strategy {
    make_sigma_l_in(labels(&["m_L", "m_R"])).expect("two labels")
}

/// Coordinate on R unless both players reveal a preference for L.
pub fn make_sigma_r() -> Strategy {
    make_sigma_r_in(labels(&["m_L", "m_R"])).expect("two labels")
}

/// Left-fallback strategy over `names`: the first label is `m_L`, the
/// second `m_R`, any other label is read as `m_L`.
pub fn make_sigma_l_in(names: Vec<String>) -> Result<Strategy> {
    revealing_with_fallback(names, true)
}

/// Right-fallback counterpart of [`make_sigma_l_in`].
pub fn make_sigma_r_in(names: Vec<String>) -> Result<Strategy> {
    revealing_with_fallback(names, false)
}

/// Bit-lottery strategy: after disagreement, coordinate on L iff the
/// random bits differ.
pub fn make_sigma_c() -> Strategy {
    make_sigma_c_in(labels(&["m_L0", "m_L1", "m_R0", "m_R1"])).expect("four labels")
}

/// Bit-lottery strategy over `names` (first four labels are
/// `m_L0, m_L1, m_R0, m_R1`; extra labels are read as `m_L0`).
pub fn make_sigma_c_in(names: Vec<String>) -> Result<Strategy> {
    let n = names.len();
    if n < 4 {
        return Err(ModelError::Capacity { needed: 4, available: n });
    }
    let mut low = vec![0.0; n];
    low[0] = 0.5;
    low[1] = 0.5;
    let mut high = vec![0.0; n];
    high[2] = 0.5;
    high[3] = 0.5;
    let class = |m: usize| -> (bool, usize) {
        match m {
            1 => (true, 1),
            2 => (false, 0),
            3 => (false, 1),
            _ => (true, 0),
        }
    };
    let xi = ActionTable::from_fn(n, |m, mp| {
        let ((left_a, bit_a), (left_b, bit_b)) = (class(m), class(mp));
        match (left_a, left_b) {
            (true, true) => Cutoff::AllL,
            (false, false) => Cutoff::AllR,
            _ if bit_a != bit_b => Cutoff::AllL,
            _ => Cutoff::AllR,
        }
    });
    Strategy::new(names, preference_split(low, high), xi)
}

/// Labels `m_L1..m_Ln, m_R1..m_Rn`.
pub fn sigma_alpha_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("m_L{i}")).chain((1..=n).map(|i| format!("m_R{i}"))).collect()
}

/// Modular-lottery strategy with left tendency `k / n`.
pub fn make_sigma_alpha(k: usize, n: usize) -> Result<Strategy> {
    make_sigma_alpha_in(k, n, sigma_alpha_labels(n))
}

/// Modular-lottery strategy over `names`. Label `j < n` stands for
/// number `j + 1` with an L preference, label `n + j` for number `j + 1`
/// with an R preference; any further label is read as the first.
///
/// After disagreement the players coordinate on L iff the sum of their
/// numbers modulo `n` is below `k`, which happens with probability
/// exactly `k / n`.
pub fn make_sigma_alpha_in(k: usize, n: usize, names: Vec<String>) -> Result<Strategy> {
    if n == 0 || k > n {
        return config(format!("left tendency {k}/{n} needs 0 <= k <= n and n >= 1"));
    }
    let size = names.len();
    if size < 2 * n {
        return Err(ModelError::Capacity { needed: 2 * n, available: size });
    }
    let mut low = vec![0.0; size];
    let mut high = vec![0.0; size];
    for j in 0..n {
        low[j] = 1.0 / n as f64;
        high[n + j] = 1.0 / n as f64;
    }
    // Rows must sum to one exactly enough for validation.
    let fix = |row: &mut Vec<f64>, at: usize| {
        let s: f64 = row.iter().sum();
        row[at] += 1.0 - s;
    };
    fix(&mut low, 0);
    fix(&mut high, n);
    let decode = |m: usize| -> (bool, usize) {
        if m >= n && m < 2 * n {
            (false, m - n + 1)
        } else if m < n {
            (true, m + 1)
        } else {
            (true, 1)
        }
    };
    let xi = ActionTable::from_fn(size, |m, mp| {
        let ((la, ia), (lb, ib)) = (decode(m), decode(mp));
        match (la, lb) {
            (true, true) => Cutoff::AllL,
            (false, false) => Cutoff::AllR,
            _ if (ia + ib) % n < k => Cutoff::AllL,
            _ => Cutoff::AllR,
        }
    });
    Strategy::new(names, preference_split(low, high), xi)
}

/// No-communication strategy: everyone sends `m_0` and plays the cutoff
/// `x` after every message pair.
pub fn make_babbling(x: Cutoff) -> Strategy {
    let mu = MessageFunction::constant(2, 0).expect("two labels");
    Strategy::new(labels(&["m_0", "m_1"]), mu, ActionTable::filled(2, x)).expect("consistent sizes")
}

/// Asymmetric no-communication profile `(x, x')` expressed as a pair of
/// babbling strategies.
pub fn make_babbling_pair(x: Cutoff, x_prime: Cutoff) -> (Strategy, Strategy) {
    (make_babbling(x), make_babbling(x_prime))
}

/// Replace the `AllL` / `AllR` shorthands with cutoffs at 1 and 0 so that
/// types outside the unit interval play their dominant action.
pub fn with_dominant_actions(sigma: &Strategy) -> Strategy {
    let n = sigma.len();
    let xi = ActionTable::from_fn(n, |m, mp| match sigma.xi().get(m, mp) {
        Cutoff::AllL => Cutoff::at(1.0),
        Cutoff::AllR => Cutoff::at(0.0),
        c => c,
    });
    sigma.with_xi(xi).expect("same labels")
}

/// Left tendency making the type one half indifferent between the two
/// message classes when some types have a dominant action.
pub fn extreme_left_tendency(dist: &TypeDistribution) -> Result<f64> {
    if !(dist.lower() < 0.0 && dist.upper() > 1.0) {
        return Err(ModelError::Precondition("support must extend below 0 and above 1".into()));
    }
    let f0 = dist.cdf(0.0);
    let r1 = 1.0 - dist.cdf(1.0);
    let fh = dist.cdf(0.5);
    if !(f0 > 0.0 && r1 > 0.0) {
        return Err(ModelError::Precondition("both dominant-action regions need positive mass".into()));
    }
    if !(f0 < 0.5 * fh && r1 < 0.5 * (1.0 - fh)) {
        return Err(ModelError::Precondition(format!(
            "dominant-action types must be a minority on their side (F(0)={f0}, 1-F(1)={r1}, F(1/2)={fh})"
        )));
    }
    Ok(f0 / (f0 + r1))
}

/// The four-atom distribution with atoms at 1/10+eps, 1/2-eps, 1/2+eps and
/// 9/10-eps, each with mass one quarter.
pub fn example1_distribution(eps: f64) -> Result<TypeDistribution> {
    if !(eps > 0.0 && eps < 0.2) {
        return config(format!("epsilon {eps} must lie in (0, 0.2)"));
    }
    TypeDistribution::unit_atoms(vec![(0.1 + eps, 0.25), (0.5 - eps, 0.25), (0.5 + eps, 0.25), (0.9 - eps, 0.25)])
}

/// Number of public-lottery outcomes used by [`example1_miscoordination`].
pub const EXAMPLE1_LOTTERY: usize = 10;

/// The miscoordination equilibrium on the four-atom distribution.
///
/// Each atom reveals itself (classes `L`, `l`, `r`, `R` from low to high)
/// together with a uniform number in 0..10; the sum modulo 10 acts as the
/// public lottery. After `(l, r)` the players coordinate on L or R with
/// probability one half each. After `(L, R)` they coordinate on L with
/// probability 3/10, on R with probability 3/10, and otherwise play the
/// mixed equilibrium in which each extreme type plays its preferred action
/// with probability 9/10 - eps.
pub fn example1_miscoordination(eps: f64) -> Result<Strategy> {
    let dist = example1_distribution(eps)?;
    let atoms: Vec<f64> = dist.atom_list().iter().map(|a| a.0).collect();
    let t = EXAMPLE1_LOTTERY;
    let classes = ["L", "l", "r", "R"];
    let names: Vec<String> =
        classes.iter().flat_map(|c| (0..t).map(move |i| format!("m_{c}{i}"))).collect();
    let n = names.len();
    let rows: Vec<Vec<f64>> = (0..4)
        .map(|c| {
            let mut row = vec![0.0; n];
            for i in 0..t {
                row[c * t + i] = 1.0 / t as f64;
            }
            let s: f64 = row.iter().sum();
            row[c * t] += 1.0 - s;
            row
        })
        .collect();
    let mu = MessageFunction::new(atoms[..3].to_vec(), rows)?;
    let keep = 0.9 - eps;
    let xi = ActionTable::from_fn(n, |m, mp| {
        let (a, i) = (m / t, m % t);
        let (b, j) = (mp / t, mp % t);
        let s = (i + j) % t;
        let left_side = |c: usize| c <= 1;
        match (a, b) {
            _ if left_side(a) && left_side(b) => Cutoff::AllL,
            _ if !left_side(a) && !left_side(b) => Cutoff::AllR,
            (0, 2) | (2, 0) => Cutoff::AllL,
            (1, 3) | (3, 1) => Cutoff::AllR,
            (1, 2) | (2, 1) => {
                if s < t / 2 {
                    Cutoff::AllL
                } else {
                    Cutoff::AllR
                }
            }
            _ => {
                if s < 3 * t / 10 {
                    Cutoff::AllL
                } else if s < 6 * t / 10 {
                    Cutoff::AllR
                } else if a == 0 {
                    Cutoff::At { x: atoms[0], tie_left: keep }
                } else {
                    Cutoff::At { x: atoms[3], tie_left: 1.0 - keep }
                }
            }
        }
    });
    Strategy::new(names, mu, xi)
}

/// Three-message fixture: types up to 1/4 and types in (1/4, 1/2] use
/// different L-messages, and only the second kind gets its way against an
/// R-message. Mutual-preference consistent and coordinated, without binary
/// communication.
pub fn make_split_left_fixture() -> Strategy {
    let names = labels(&["m_L1", "m_L2", "m_R"]);
    let mu = MessageFunction::new(vec![0.25, 0.5], vec![one_hot(3, 0), one_hot(3, 1), one_hot(3, 2)])
        .expect("valid rows");
    let xi = ActionTable::from_fn(3, |m, mp| match (m, mp) {
        (2, 2) => Cutoff::AllR,
        (0, 2) | (2, 0) => Cutoff::AllR,
        _ => Cutoff::AllL,
    });
    Strategy::new(names, mu, xi).expect("consistent sizes")
}

/// Two-message fixture that reveals preferences but plays cutoffs 1/4 and
/// 3/4 after disagreement. Mutual-preference consistent with binary
/// communication, not coordinated.
pub fn make_partial_coordination_fixture() -> Strategy {
    let mut s = make_sigma_l();
    s.xi_mut().set(0, 1, Cutoff::at(0.25));
    s.xi_mut().set(1, 0, Cutoff::at(0.75));
    s
}

/// Always coordinate on L regardless of messages, while still revealing
/// preferences. Coordinated with binary communication, not
/// mutual-preference consistent.
pub fn make_always_left_fixture() -> Strategy {
    let mut s = make_sigma_l();
    s.xi_mut().set(1, 1, Cutoff::AllL);
    s
}
