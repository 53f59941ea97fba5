//! Unit-commitment game with load uncertainty.
//!
//! The min-player commits generators `u in {0,1}^I` and allocates dispatch
//! `V in R^{I x J}`; the max-player picks loads `y` in the box
//! `||y||_inf <= theta`. Payoff: `sum_i C_i u_i + sum_ij V_ij y_j`. Per
//! scenario, commitment must cover `demand_scale * theta` and dispatch must
//! sum to `total_dispatch` with `0 <= V_ij <= u_i`.
//!
//! # Structural solver
//!
//! On the intersected sets the max-player's box is `||y||_inf <= theta_min`
//! and the commitment constraint is driven by `theta_max`. Since `V >= 0`,
//! every column sum of `V` is non-negative and the inner maximum is attained
//! at `y = theta_min * 1`, giving the envelope
//! `phi(u, V) = sum_i C_i u_i + total_dispatch * theta_min`, which does not
//! depend on `V`. The global minimax point is therefore obtained by
//! enumerating all `2^I` commitments and keeping the cheapest feasible one.
//!
//! Ties are broken deterministically: `u` is the lexicographically smallest
//! cost minimizer, `V` spreads `total_dispatch` uniformly over the active
//! rows, and `y_j = +theta_min` for every node.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::ScenarioProblem;
use crate::sample::{MultiSample, ScenarioDistribution};

/// Absolute tolerance on `sum V = total_dispatch`.
pub const DISPATCH_TOL: f64 = 1e-9;
/// Costs closer than this are treated as tied.
pub const COST_TIE_TOL: f64 = 1e-12;
/// Sup-norm tolerance on the continuous parts in `points_equal`.
pub const POINT_EQ_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitCommitmentInstance {
    pub n_nodes: usize,
    pub turn_on_cost: Vec<f64>,
    pub capacity_coeff: Vec<f64>,
    pub demand_scale: f64,
    pub total_dispatch: f64,
    pub dist: ScenarioDistribution,
}

/// Strategy pair of the unit-commitment game. `V` is stored row-major (`I x J`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcPoint {
    pub u: Vec<u8>,
    #[serde(rename = "V")]
    pub v: Vec<f64>,
    pub y: Vec<f64>,
}

impl UcPoint {
    pub fn dispatch(&self, i: usize, j: usize) -> f64 {
        self.v[i * self.y.len() + j]
    }

    pub fn load_norm(&self) -> f64 {
        self.y.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

impl UnitCommitmentInstance {
    /// Five generators, five demand nodes, `theta ~ U[0.5, 1.5]`.
    pub fn reference() -> Self {
        Self::new(
            5,
            vec![1.0, 1.1, 0.9, 1.05, 1.2],
            vec![1.0, 1.2, 0.9, 1.1, 1.3],
            3.0,
            5.0,
            ScenarioDistribution::uniform(0.5, 1.5).expect("valid support"),
        )
        .expect("reference instance is valid")
    }

    pub fn new(
        n_nodes: usize,
        turn_on_cost: Vec<f64>,
        capacity_coeff: Vec<f64>,
        demand_scale: f64,
        total_dispatch: f64,
        dist: ScenarioDistribution,
    ) -> Result<Self> {
        let n_gen = turn_on_cost.len();
        if n_gen == 0 || n_gen > 20 || capacity_coeff.len() != n_gen {
            return Err(Error::invalid("need 1..=20 generators with matching C and R"));
        }
        if n_nodes == 0 {
            return Err(Error::invalid("need at least one demand node"));
        }
        if turn_on_cost.iter().chain(&capacity_coeff).any(|&c| !(c > 0.0 && c.is_finite())) {
            return Err(Error::invalid("C and R must be strictly positive"));
        }
        if !(demand_scale > 0.0 && total_dispatch > 0.0) {
            return Err(Error::invalid("demand scale and total dispatch must be positive"));
        }
        let inst = Self { n_nodes, turn_on_cost, capacity_coeff, demand_scale, total_dispatch, dist };
        if !inst.covers(&vec![1; n_gen], dist.hi) {
            return Err(Error::invalid(
                "committing every generator must cover demand at the top of the support",
            ));
        }
        if total_dispatch > (n_nodes * n_gen) as f64 {
            return Err(Error::invalid("total dispatch exceeds the dispatch box"));
        }
        Ok(inst)
    }

    pub fn n_gen(&self) -> usize {
        self.turn_on_cost.len()
    }

    /// `sum_i R_i u_i`, summed in generator order.
    pub fn capacity(&self, u: &[u8]) -> f64 {
        self.capacity_coeff.iter().zip(u).filter(|(_, &ui)| ui == 1).map(|(r, _)| r).sum()
    }

    pub fn commitment_cost(&self, u: &[u8]) -> f64 {
        self.turn_on_cost.iter().zip(u).filter(|(_, &ui)| ui == 1).map(|(c, _)| c).sum()
    }

    /// Commitment constraint `sum_i R_i u_i >= demand_scale * theta`.
    pub fn covers(&self, u: &[u8], theta: f64) -> bool {
        self.capacity(u) >= self.demand_scale * theta
    }

    /// `sum_i C_i u_i + sum_ij V_ij y_j`.
    pub fn payoff(&self, pt: &UcPoint) -> f64 {
        let dispatch_cost: f64 = (0..pt.u.len())
            .flat_map(|i| (0..pt.y.len()).map(move |j| (i, j)))
            .map(|(i, j)| pt.dispatch(i, j) * pt.y[j])
            .sum();
        self.commitment_cost(&pt.u) + dispatch_cost
    }

    fn dispatch_feasible(&self, pt: &UcPoint) -> bool {
        if pt.u.iter().any(|&ui| ui > 1) {
            return false;
        }
        let j_count = pt.y.len();
        let bounded = pt.v.iter().enumerate().all(|(idx, &vij)| {
            let ui = f64::from(pt.u[idx / j_count]);
            (0.0..=ui).contains(&vij)
        });
        bounded && (pt.v.iter().sum::<f64>() - self.total_dispatch).abs() <= DISPATCH_TOL
    }

    pub fn membership(&self, theta: f64, pt: &UcPoint) -> bool {
        self.dispatch_feasible(pt) && self.covers(&pt.u, theta) && pt.load_norm() <= theta
    }

    /// Exact violation probability under the instance's uniform law.
    ///
    /// With `a = ||y||_inf` and `b = capacity / demand_scale` the point is
    /// feasible exactly for `theta in [a, b]`.
    pub fn exact_violation(&self, pt: &UcPoint) -> Result<f64> {
        self.check_shape(pt)?;
        if !self.dispatch_feasible(pt) {
            return Err(Error::invalid("point violates the theta-independent constraints"));
        }
        let a = pt.load_norm();
        let b = self.capacity(&pt.u) / self.demand_scale;
        if a > b {
            return Err(Error::invalid(format!("point is feasible for no theta (a = {a} > b = {b})")));
        }
        Ok((self.dist.cdf(a) + self.dist.upper_tail(b)).min(1.0))
    }

    fn check_shape(&self, pt: &UcPoint) -> Result<()> {
        if pt.u.len() != self.n_gen() || pt.y.len() != self.n_nodes || pt.v.len() != self.n_gen() * self.n_nodes {
            return Err(Error::invalid(format!(
                "point shape (u: {}, V: {}, y: {}) does not match I = {}, J = {}",
                pt.u.len(),
                pt.v.len(),
                pt.y.len(),
                self.n_gen(),
                self.n_nodes
            )));
        }
        Ok(())
    }

    fn unpack(&self, mask: u32) -> Vec<u8> {
        let n = self.n_gen();
        (0..n).map(|i| ((mask >> (n - 1 - i)) & 1) as u8).collect()
    }

    /// Cheapest commitment covering `theta_max`; ties go to the lexicographically smallest `u`.
    pub fn best_commitment(&self, theta_max: f64) -> Result<Vec<u8>> {
        let min_active = (self.total_dispatch / self.n_nodes as f64).ceil() as u32;
        let candidates: Vec<(Vec<u8>, f64)> = (0..1u32 << self.n_gen())
            .map(|mask| self.unpack(mask))
            .filter(|u| self.covers(u, theta_max))
            .filter(|u| u.iter().map(|&b| u32::from(b)).sum::<u32>() >= min_active.max(1))
            .map(|u| {
                let cost = self.commitment_cost(&u);
                (u, cost)
            })
            .collect();
        let best_cost = candidates
            .iter()
            .map(|(_, c)| *c)
            .fold(f64::INFINITY, f64::min);
        // Masks were generated in lexicographic order of u, so the first tied entry is the smallest.
        candidates
            .into_iter()
            .find(|(_, c)| *c <= best_cost + COST_TIE_TOL)
            .map(|(u, _)| u)
            .ok_or_else(|| Error::Infeasible(format!("no commitment covers theta = {theta_max}")))
    }

    pub fn solve(&self, ms: &MultiSample) -> Result<UcPoint> {
        let (theta_min, theta_max) = (ms.min(), ms.max());
        let u = self.best_commitment(theta_max)?;
        let active = u.iter().filter(|&&b| b == 1).count() as f64;
        let share = self.total_dispatch / (self.n_nodes as f64 * active);
        let v = u
            .iter()
            .flat_map(|&ui| std::iter::repeat_n(if ui == 1 { share } else { 0.0 }, self.n_nodes))
            .collect();
        Ok(UcPoint { u, v, y: vec![theta_min; self.n_nodes] })
    }
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}

impl ScenarioProblem for UnitCommitmentInstance {
    type Point = UcPoint;

    fn name(&self) -> &'static str {
        "unit_commitment"
    }

    fn dims(&self) -> (usize, usize) {
        (self.n_gen() * (1 + self.n_nodes), self.n_nodes)
    }

    fn distribution(&self) -> &ScenarioDistribution {
        &self.dist
    }

    fn check_point(&self, point: &UcPoint) -> Result<()> {
        self.check_shape(point)
    }

    fn membership(&self, theta: f64, point: &UcPoint) -> bool {
        UnitCommitmentInstance::membership(self, theta, point)
    }

    fn solve(&self, ms: &MultiSample) -> Result<UcPoint> {
        UnitCommitmentInstance::solve(self, ms)
    }

    fn points_equal(&self, a: &UcPoint, b: &UcPoint) -> bool {
        a.u == b.u
            && a.v.len() == b.v.len()
            && a.y.len() == b.y.len()
            && sup_dist(&a.v, &b.v) <= POINT_EQ_TOL
            && sup_dist(&a.y, &b.y) <= POINT_EQ_TOL
    }

    fn payoff(&self, point: &UcPoint) -> f64 {
        UnitCommitmentInstance::payoff(self, point)
    }

    fn exact_violation(&self, point: &UcPoint) -> Option<Result<f64>> {
        Some(UnitCommitmentInstance::exact_violation(self, point))
    }
}
