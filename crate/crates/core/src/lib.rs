//! Coordination games with private values and pre-play cheap talk.
//!
//! The crate evaluates payoffs of cutoff strategies, checks Bayesian Nash
//! equilibrium, decides the structural properties that characterize
//! communication-proof equilibria, searches for profitable renegotiation
//! after messages, and covers several extensions of the base game.

pub mod canon;
pub mod cp;
pub mod dist;
pub mod equil;
pub mod error;
pub mod evo;
pub mod ext;
pub mod payoff;
pub mod props;
pub mod scenario;
pub mod strategy;

pub use dist::{StepFn, TypeDistribution};
pub use error::{ModelError, Result};
pub use strategy::{ActionTable, Cutoff, Family, GameSpec, MessageFunction, Strategy};
