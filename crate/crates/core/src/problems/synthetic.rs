//! Smooth nonconvex-nonconcave test game on scenario-scaled boxes.
//!
//! `f(x, y) = |x|^2/2 - |y|^2/2 + amp * sum_d sin(freq x_d) sin(freq y_d)`,
//! the sum running over the first `min(p, q)` paired coordinates. Per
//! scenario both players are confined to `[-theta, theta]`, so on a
//! multisample the strategy sets are cubes of half-width `min theta_i`.
//! With the default `amp = 0.3, freq = 5` the diagonal Hessian entries
//! `1 - amp freq^2 sin sin` change sign.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::ScenarioProblem;
use crate::sample::{MultiSample, ScenarioDistribution};
use crate::scalar::Scalar;
use crate::stationary::{
    min_residual_map, BoxRegion, BoxScenarioGame, EquilibriumPoint, GdaParams, MinimaxObjective,
    StationaryResult,
};

pub const DEFAULT_AMP: f64 = 0.3;
pub const DEFAULT_FREQ: f64 = 5.0;
pub const POINT_EQ_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticInstance<T> {
    pub p: usize,
    pub q: usize,
    pub amp: T,
    pub freq: T,
    pub dist: ScenarioDistribution,
}

impl<T: Scalar> SyntheticInstance<T> {
    pub fn new(p: usize, q: usize, amp: T, freq: T, dist: ScenarioDistribution) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::invalid("p and q must be at least 1"));
        }
        if amp.is_nan() || amp < T::zero() || !freq.is_finite() {
            return Err(Error::invalid("amp must be non-negative and freq finite"));
        }
        if dist.lo <= 0.0 {
            return Err(Error::invalid("box half-widths need a positive scenario support"));
        }
        Ok(Self { p, q, amp, freq, dist })
    }

    /// `p = q = 2`, default constants, `theta ~ U[0.5, 1.5]`.
    pub fn reference() -> Self {
        Self::new(
            2,
            2,
            T::lit(DEFAULT_AMP),
            T::lit(DEFAULT_FREQ),
            ScenarioDistribution::uniform(0.5, 1.5).expect("valid support"),
        )
        .expect("reference instance is valid")
    }

    pub fn max_norm(point: &EquilibriumPoint<T>) -> T {
        point.x.iter().chain(&point.y).fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    pub fn membership(&self, theta: f64, point: &EquilibriumPoint<T>) -> bool {
        Self::max_norm(point) <= T::lit(theta)
    }

    /// `P(theta < max(|x|_inf, |y|_inf))`.
    pub fn exact_violation(&self, point: &EquilibriumPoint<T>) -> f64 {
        self.dist.cdf(Self::max_norm(point).to_f64_lossy())
    }
}

impl<T: Scalar> MinimaxObjective<T> for SyntheticInstance<T> {
    fn dims(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    fn payoff(&self, x: &[T], y: &[T]) -> T {
        let half = T::lit(0.5);
        let quad = x.iter().fold(T::zero(), |a, &v| a + v * v) * half
            - y.iter().fold(T::zero(), |a, &v| a + v * v) * half;
        let coupling = x
            .iter()
            .zip(y)
            .fold(T::zero(), |a, (&xd, &yd)| a + (self.freq * xd).sin() * (self.freq * yd).sin());
        quad + self.amp * coupling
    }

    fn gradients(&self, x: &[T], y: &[T]) -> (Vec<T>, Vec<T>) {
        let mut gx = x.to_vec();
        let mut gy: Vec<T> = y.iter().map(|&v| -v).collect();
        let k = self.amp * self.freq;
        for d in 0..self.p.min(self.q) {
            let (sx, cx) = (self.freq * x[d]).sin_cos();
            let (sy, cy) = (self.freq * y[d]).sin_cos();
            gx[d] = gx[d] + k * cx * sy;
            gy[d] = gy[d] + k * sx * cy;
        }
        (gx, gy)
    }
}

impl<T: Scalar> BoxScenarioGame<T> for SyntheticInstance<T> {
    fn boxes(&self, ms: &MultiSample) -> Result<(BoxRegion<T>, BoxRegion<T>)> {
        let half = T::lit(ms.min());
        if half < T::zero() {
            return Err(Error::invalid("scenario below zero gives an empty box"));
        }
        Ok((BoxRegion::cube(self.p, half)?, BoxRegion::cube(self.q, half)?))
    }

    fn start_region(&self) -> Result<(BoxRegion<T>, BoxRegion<T>)> {
        let half = T::lit(self.dist.hi);
        Ok((BoxRegion::cube(self.p, half)?, BoxRegion::cube(self.q, half)?))
    }
}

/// The synthetic game paired with a fixed multistart GDA solver map.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticProblem<T> {
    pub instance: SyntheticInstance<T>,
    pub params: GdaParams<T>,
    pub seed: u64,
}

impl<T: Scalar> SyntheticProblem<T> {
    pub fn new(instance: SyntheticInstance<T>, params: GdaParams<T>, seed: u64) -> Result<Self> {
        params.validate()?;
        Ok(Self { instance, params, seed })
    }

    pub fn solve_detailed(&self, ms: &MultiSample) -> Result<StationaryResult<T>> {
        for &theta in ms.thetas() {
            if !self.instance.dist.contains(theta) {
                return Err(Error::invalid(format!("scenario {theta} outside the support")));
            }
        }
        min_residual_map(&self.instance, ms, &self.params, self.seed)
    }
}

impl<T: Scalar> ScenarioProblem for SyntheticProblem<T> {
    type Point = EquilibriumPoint<T>;

    fn name(&self) -> &'static str {
        "synthetic"
    }

    fn dims(&self) -> (usize, usize) {
        (self.instance.p, self.instance.q)
    }

    fn distribution(&self) -> &ScenarioDistribution {
        &self.instance.dist
    }

    fn check_point(&self, point: &Self::Point) -> Result<()> {
        if point.x.len() != self.instance.p || point.y.len() != self.instance.q {
            return Err(Error::invalid("point dimensions do not match (p, q)"));
        }
        Ok(())
    }

    fn membership(&self, theta: f64, point: &Self::Point) -> bool {
        self.instance.membership(theta, point)
    }

    fn solve(&self, ms: &MultiSample) -> Result<Self::Point> {
        Ok(self.solve_detailed(ms)?.point)
    }

    fn points_equal(&self, a: &Self::Point, b: &Self::Point) -> bool {
        let tol = T::lit(POINT_EQ_TOL);
        a.x.len() == b.x.len()
            && a.y.len() == b.y.len()
            && a.x.iter().chain(&a.y).zip(b.x.iter().chain(&b.y)).all(|(&u, &v)| (u - v).abs() <= tol)
    }

    fn payoff(&self, point: &Self::Point) -> f64 {
        self.instance.payoff(&point.x, &point.y).to_f64_lossy()
    }

    fn exact_violation(&self, point: &Self::Point) -> Option<Result<f64>> {
        Some(Ok(self.instance.exact_violation(point)))
    }
}
