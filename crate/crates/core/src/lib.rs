//! Probabilistic robustness certificates for scenario minimax problems.
//!
//! A scenario minimax problem intersects the feasible sets of `M` sampled
//! scenarios and asks for an equilibrium of a two-player game on the result.
//! This crate computes the certificate `g(k)` bounding the probability that
//! such an equilibrium violates an unseen scenario, evaluates the complexity
//! `k = S*_M` of a multisample by greedy removal, and runs the Monte Carlo
//! validation of the bound on a unit-commitment game.
//!
//! The numerical kernels ([`bounds`], [`stationary`], the synthetic game)
//! are generic over [`Scalar`]; the aliases below fix them to `f64`, which is
//! what the experiment pipeline uses.

pub mod bounds;
pub mod complexity;
pub mod consistency;
pub mod error;
pub mod experiment;
pub mod problem;
pub mod problems;
pub mod rng;
pub mod sample;
pub mod scalar;
pub mod stationary;

pub use complexity::{greedy_support_sublist, ComplexityResult};
pub use consistency::{check_consistency, ConsistencyOptions, ConsistencyReport};
pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, ProblemKind, ResultRow, Summary, ViolationMode};
pub use problem::{membership_count, ScenarioProblem};
pub use problems::synthetic::{SyntheticInstance, SyntheticProblem};
pub use problems::unit_commitment::{UcPoint, UnitCommitmentInstance};
pub use rng::{derive_seed, SplitMix64};
pub use sample::{sample_multisample, MultiSample, ScenarioDistribution};
pub use scalar::Scalar;

/// Bound table in double precision.
pub type BoundTable = bounds::BoundTable<f64>;
/// Bound table in single precision.
pub type BoundTable32 = bounds::BoundTable<f32>;
/// Axis-aligned box in double precision.
pub type BoxRegion = stationary::BoxRegion<f64>;
/// Strategy pair of the continuous games in double precision.
pub type EquilibriumPoint = stationary::EquilibriumPoint<f64>;
pub type GdaParams = stationary::GdaParams<f64>;
pub type StationaryResult = stationary::StationaryResult<f64>;
