//! Pareto-optimal selection policies that trade off profit against welfare.
//!
//! Individuals carry a profit score and a welfare score. For a trade-off weight
//! `alpha`, the optimal policy selects everyone whose composite
//! `(1 - alpha) * profit + alpha * welfare` is nonnegative; sweeping `alpha`
//! traces the Pareto frontier. The crate also covers:
//!
//! - plug-in and Bayes-optimal policies built on predicted scores ([`policies`]),
//! - frontier sweeps, concave envelopes and dominance diagnostics ([`frontier`]),
//! - correlated Gaussian simulations with closed-form utility bounds ([`simulation`]),
//! - ridge-regression score learning and the abalone score pipeline ([`learning`]),
//! - demographic-parity constrained profit maximization and its induced
//!   welfare scores ([`fairness`]).

pub mod error;
pub mod fairness;
pub mod frontier;
pub mod isotonic;
pub mod learning;
pub mod model;
pub mod policies;
pub mod simulation;

pub use error::{Error, Result};
pub use model::{
    alpha_utility, evaluate_utilities, pareto_dominates, Cohort, DecisionVector, Group, ScorePair,
    ScoreSet, TradeoffWeight, UtilityPoint,
};
