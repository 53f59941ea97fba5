//! Randomized check of the three consistency conditions of a solver map:
//!
//! 1. the output does not depend on the order of the scenarios;
//! 2. adding scenarios for which the current solution stays feasible leaves
//!    the solution unchanged;
//! 3. adding a scenario for which the current solution is infeasible changes it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::ScenarioProblem;
use crate::rng::{derive_seed, SplitMix64};
use crate::sample::{sample_multisample, MultiSample};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConsistencyOptions {
    /// Base multisamples have between 1 and `max_base` scenarios.
    pub max_base: usize,
    /// Condition 2 adds between 1 and `max_extra` feasible scenarios.
    pub max_extra: usize,
    /// Rejection-sampling budget per trial and condition.
    pub max_attempts: usize,
}

impl Default for ConsistencyOptions {
    fn default() -> Self {
        Self { max_base: 10, max_extra: 5, max_attempts: 100_000 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ConditionTally {
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    /// Trial seeds that failed; rerun one with [`run_trial`].
    pub failing_seeds: Vec<u64>,
}

impl ConditionTally {
    fn record(&mut self, outcome: Outcome, seed: u64) {
        match outcome {
            Outcome::Pass => self.passed += 1,
            Outcome::Fail => {
                self.failed += 1;
                self.failing_seeds.push(seed);
            }
            Outcome::Skipped => self.skipped += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConsistencyReport {
    pub problem: String,
    pub trials: usize,
    pub permutation: ConditionTally,
    pub feasible_augmentation: ConditionTally,
    pub infeasible_augmentation: ConditionTally,
}

impl ConsistencyReport {
    pub fn total_failures(&self) -> usize {
        self.permutation.failed + self.feasible_augmentation.failed + self.infeasible_augmentation.failed
    }

    pub fn all_passed(&self) -> bool {
        self.total_failures() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Pass,
    Fail,
    Skipped,
}

/// Draws one scenario with `membership == want`, or `None` once the budget is spent.
fn draw_where<P: ScenarioProblem>(
    problem: &P,
    point: &P::Point,
    want: bool,
    rng: &mut SplitMix64,
    budget: &mut usize,
) -> Option<f64> {
    while *budget > 0 {
        *budget -= 1;
        let theta = problem.distribution().draw(rng);
        if problem.membership(theta, point) == want {
            return Some(theta);
        }
    }
    None
}

/// Runs the three conditions on one trial. Returns outcomes in condition order.
pub fn run_trial<P: ScenarioProblem>(
    problem: &P,
    trial_seed: u64,
    opts: &ConsistencyOptions,
) -> Result<[Outcome; 3]> {
    let mut rng = SplitMix64::new(trial_seed);
    let m = 1 + rng.below(opts.max_base.max(1) as u64) as usize;
    let base = sample_multisample(problem.distribution(), m, rng.next_u64())?;
    let solution = problem.solve(&base)?;

    let mut order: Vec<usize> = (0..m).collect();
    rng.shuffle(&mut order);
    let permuted = problem.solve(&base.select(&order)?)?;
    let perm = if permuted == solution { Outcome::Pass } else { Outcome::Fail };

    let n_extra = 1 + rng.below(opts.max_extra.max(1) as u64) as usize;
    let mut budget = opts.max_attempts;
    let extras: Option<Vec<f64>> =
        (0..n_extra).map(|_| draw_where(problem, &solution, true, &mut rng, &mut budget)).collect();
    let feasible = match extras {
        Some(extra) => {
            let grown = problem.solve(&base.extended(&extra)?)?;
            if problem.points_equal(&grown, &solution) { Outcome::Pass } else { Outcome::Fail }
        }
        None => Outcome::Skipped,
    };

    let mut budget = opts.max_attempts;
    let infeasible = match draw_where(problem, &solution, false, &mut rng, &mut budget) {
        Some(theta) => {
            let grown = problem.solve(&base.extended(&[theta])?)?;
            if problem.points_equal(&grown, &solution) { Outcome::Fail } else { Outcome::Pass }
        }
        None => Outcome::Skipped,
    };

    Ok([perm, feasible, infeasible])
}

pub fn check_consistency<P: ScenarioProblem>(
    problem: &P,
    trials: usize,
    seed: u64,
    opts: &ConsistencyOptions,
) -> Result<ConsistencyReport> {
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let mut report = ConsistencyReport {
        problem: problem.name().to_string(),
        trials,
        permutation: ConditionTally::default(),
        feasible_augmentation: ConditionTally::default(),
        infeasible_augmentation: ConditionTally::default(),
    };
    for trial in 0..trials {
        let trial_seed = derive_seed(seed, &[trial as u64]);
        let [a, b, c] = run_trial(problem, trial_seed, opts)?;
        report.permutation.record(a, trial_seed);
        report.feasible_augmentation.record(b, trial_seed);
        report.infeasible_augmentation.record(c, trial_seed);
    }
    Ok(report)
}

/// Sample-consistency helper: the solution is feasible for every scenario it was built from.
pub fn sample_feasible<P: ScenarioProblem>(problem: &P, ms: &MultiSample, point: &P::Point) -> bool {
    ms.thetas().iter().all(|&t| problem.membership(t, point))
}
