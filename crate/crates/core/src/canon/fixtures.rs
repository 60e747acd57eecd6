//! Named type distributions used by the command line and the test suites.

use crate::dist::TypeDistribution;
use crate::error::{ModelError, Result};

/// Names accepted by [`named_distribution`].
pub const DISTRIBUTION_NAMES: [&str; 9] =
    ["uniform", "example1", "skewed", "steep", "flat", "bimodal", "extreme-a", "extreme-b", "extreme-c"];

/// Build a named distribution; `epsilon` parameterizes `example1`.
pub fn named_distribution(name: &str, epsilon: f64) -> Result<TypeDistribution> {
    let pl = TypeDistribution::piecewise_linear;
    match name {
        "uniform" => TypeDistribution::uniform(0.0, 1.0),
        "example1" => super::example1_distribution(epsilon),
        // Most mass below one half.
        "skewed" => pl(vec![(0.0, 0.0), (0.5, 0.8), (1.0, 1.0)]),
        // Symmetric, with density 1.5 around one half.
        "steep" => pl(vec![(0.0, 0.0), (0.4, 0.35), (0.6, 0.65), (1.0, 1.0)]),
        // Symmetric, with density 0.5 around one half.
        "flat" => pl(vec![(0.0, 0.0), (0.4, 0.45), (0.6, 0.55), (1.0, 1.0)]),
        "bimodal" => pl(vec![(0.0, 0.0), (0.2, 0.4), (0.8, 0.6), (1.0, 1.0)]),
        // Dominant-action types on both sides.
        "extreme-a" => pl(vec![(-0.2, 0.0), (0.0, 0.2), (0.5, 0.5), (1.0, 0.9), (1.2, 1.0)]),
        "extreme-b" => pl(vec![(-0.1, 0.0), (0.0, 0.1), (1.0, 0.9), (1.1, 1.0)]),
        "extreme-c" => pl(vec![(-0.5, 0.0), (0.0, 0.15), (0.5, 0.45), (1.0, 0.95), (1.5, 1.0)]),
        other => Err(ModelError::Config(format!(
            "unknown distribution `{other}`; expected one of {}",
            DISTRIBUTION_NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_builds() {
        for n in DISTRIBUTION_NAMES {
            let d = named_distribution(n, 0.01).unwrap();
            assert!((d.cdf(d.upper()) - 1.0).abs() < 1e-12, "{n}");
        }
        assert!(named_distribution("nope", 0.01).is_err());
    }
}
