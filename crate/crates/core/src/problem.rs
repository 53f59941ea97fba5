//! The scenario-problem abstraction.

use std::fmt::Debug;

use serde::Serialize;

use crate::error::Result;
use crate::sample::{MultiSample, ScenarioDistribution};

/// A scenario minimax problem: per-scenario feasible sets `X_theta x Y_theta`,
/// a payoff, and a deterministic solver map from multisamples to equilibria.
///
/// `solve` must depend on the multisample only as a multiset.
pub trait ScenarioProblem: Sync {
    type Point: Clone + Debug + PartialEq + Serialize + Send + Sync;

    fn name(&self) -> &'static str;

    /// `(p, q)`: dimensions of the min- and max-player strategies.
    fn dims(&self) -> (usize, usize);

    fn distribution(&self) -> &ScenarioDistribution;

    /// Rejects points whose shape does not match `dims`.
    fn check_point(&self, point: &Self::Point) -> Result<()>;

    /// Is `point` in `X_theta x Y_theta`?
    fn membership(&self, theta: f64, point: &Self::Point) -> bool;

    fn solve(&self, ms: &MultiSample) -> Result<Self::Point>;

    /// Tolerance-aware equality used by the complexity evaluation.
    fn points_equal(&self, a: &Self::Point, b: &Self::Point) -> bool;

    fn payoff(&self, point: &Self::Point) -> f64;

    /// Closed-form violation probability, when the problem has one.
    fn exact_violation(&self, _point: &Self::Point) -> Option<Result<f64>> {
        None
    }
}

/// Number of scenarios in `samples` for which `point` is feasible.
pub fn membership_count<P: ScenarioProblem>(
    problem: &P,
    point: &P::Point,
    samples: &MultiSample,
) -> Result<usize> {
    problem.check_point(point)?;
    Ok(samples.thetas().iter().filter(|&&t| problem.membership(t, point)).count())
}
