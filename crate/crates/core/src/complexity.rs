//! Complexity of a multisample by greedy scenario removal.
//!
//! Starting from the full index list, each scenario is tentatively dropped in
//! ascending original order and the drop is kept when the re-solved point
//! still equals the full-sample solution. The survivors form a support
//! sublist: the solution is reproduced from them alone and no single one of
//! them can be dropped. Greedy removal is not guaranteed to find the
//! minimum-cardinality support list.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::ScenarioProblem;
use crate::sample::MultiSample;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityResult<P> {
    /// Sorted indices into the original multisample.
    pub kept_indices: Vec<usize>,
    pub s_star: usize,
    /// Solution on the full multisample.
    pub reference_point: P,
}

fn solve_subset<P: ScenarioProblem>(problem: &P, ms: &MultiSample, subset: &[usize]) -> Result<P::Point> {
    ms.select(subset)
        .and_then(|sub| problem.solve(&sub))
        .map_err(|e| Error::SubsetSolve { subset: subset.to_vec(), source: Box::new(e) })
}

pub fn greedy_support_sublist<P: ScenarioProblem>(
    problem: &P,
    ms: &MultiSample,
) -> Result<ComplexityResult<P::Point>> {
    let all: Vec<usize> = (0..ms.len()).collect();
    let reference = solve_subset(problem, ms, &all)?;
    let mut kept = all;
    for i in 0..ms.len() {
        if kept.len() <= 1 {
            break;
        }
        let candidate: Vec<usize> = kept.iter().copied().filter(|&k| k != i).collect();
        let point = solve_subset(problem, ms, &candidate)?;
        if problem.points_equal(&point, &reference) {
            kept = candidate;
        }
    }
    Ok(ComplexityResult { s_star: kept.len(), kept_indices: kept, reference_point: reference })
}

/// Checks that `result` is a support sublist of `ms`: solving on the kept
/// indices reproduces the reference point and dropping any one kept index
/// changes it.
pub fn is_support_sublist<P: ScenarioProblem>(
    problem: &P,
    ms: &MultiSample,
    result: &ComplexityResult<P::Point>,
) -> Result<bool> {
    let on_kept = solve_subset(problem, ms, &result.kept_indices)?;
    if !problem.points_equal(&on_kept, &result.reference_point) {
        return Ok(false);
    }
    if result.kept_indices.len() == 1 {
        return Ok(true);
    }
    for &i in &result.kept_indices {
        let rest: Vec<usize> = result.kept_indices.iter().copied().filter(|&k| k != i).collect();
        if problem.points_equal(&solve_subset(problem, ms, &rest)?, &result.reference_point) {
            return Ok(false);
        }
    }
    Ok(true)
}
