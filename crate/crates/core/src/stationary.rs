//! Stationary residual on box-constrained strategy sets and the
//! projected gradient descent-ascent pipeline built on it.
//!
//! For a box `B` and a point `x in B`, the distance from `0` to
//! `g + N_B(x)` equals the norm of the projection of `-g` onto the tangent
//! cone `T_B(x)`, and projecting onto the tangent cone of a box is a
//! componentwise clamp. The residual of `(x, y)` is the larger of the
//! min-player's and max-player's distances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, SplitMix64};
use crate::sample::MultiSample;
use crate::scalar::Scalar;

/// A coordinate within this distance of a bound counts as on the bound.
pub const BOUNDARY_TOL: f64 = 1e-9;
const CONTAINMENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion<T> {
    lower: Vec<T>,
    upper: Vec<T>,
}

impl<T: Scalar> BoxRegion<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::invalid("box bounds differ in length"));
        }
        if lower.iter().zip(&upper).any(|(l, u)| l.is_nan() || u.is_nan() || l > u) {
            return Err(Error::invalid("box needs lower <= upper componentwise"));
        }
        Ok(Self { lower, upper })
    }

    /// `[-half_width, half_width]^dim`.
    pub fn cube(dim: usize, half_width: T) -> Result<Self> {
        Self::new(vec![-half_width; dim], vec![half_width; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn center(&self) -> Vec<T> {
        let two = T::lit(2.0);
        self.lower.iter().zip(&self.upper).map(|(&l, &u)| (l + u) / two).collect()
    }

    fn slack(bound: T) -> T {
        T::lit(CONTAINMENT_TOL).max(T::epsilon() * T::lit(4.0) * T::one().max(bound.abs()))
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(&xi, (&l, &u))| {
                xi >= l - Self::slack(l) && xi <= u + Self::slack(u)
            })
    }

    /// Euclidean projection onto the box.
    pub fn project(&self, x: &[T]) -> Vec<T> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&xi, (&l, &u))| xi.max(l).min(u))
            .collect()
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::invalid("cannot intersect boxes of different dimension"));
        }
        let lower = self.lower.iter().zip(&other.lower).map(|(&a, &b)| a.max(b)).collect();
        let upper = self.upper.iter().zip(&other.upper).map(|(&a, &b)| a.min(b)).collect();
        Self::new(lower, upper).map_err(|_| Error::invalid("box intersection is empty"))
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && self.lower.iter().zip(&other.lower).all(|(a, b)| a >= b)
            && self.upper.iter().zip(&other.upper).all(|(a, b)| a <= b)
    }
}

/// Projection of `v` onto the tangent cone of `region` at `at`.
///
/// Components at a lower bound are clamped to `[0, inf)`, at an upper bound
/// to `(-inf, 0]`, and at a degenerate coordinate (`lower = upper`) to 0.
pub fn tangent_project<T: Scalar>(region: &BoxRegion<T>, at: &[T], v: &[T]) -> Result<Vec<T>> {
    if v.len() != region.dim() {
        return Err(Error::invalid("direction has the wrong dimension"));
    }
    if !region.contains(at) {
        return Err(Error::invalid("tangent cone requested at a point outside the box"));
    }
    let tol = T::lit(BOUNDARY_TOL);
    Ok(at
        .iter()
        .zip(v)
        .zip(region.lower.iter().zip(&region.upper))
        .map(|((&a, &vd), (&l, &u))| {
            let at_lower = a - l <= tol;
            let at_upper = u - a <= tol;
            match (at_lower, at_upper) {
                (true, true) => T::zero(),
                (true, false) => vd.max(T::zero()),
                (false, true) => vd.min(T::zero()),
                (false, false) => vd,
            }
        })
        .collect())
}

fn norm2<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}

/// Strategy pair of a continuous two-player game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumPoint<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
}

/// A smooth payoff `f(x, y)`; the min-player controls `x`, the max-player `y`.
pub trait MinimaxObjective<T: Scalar> {
    fn dims(&self) -> (usize, usize);

    fn payoff(&self, x: &[T], y: &[T]) -> T;

    /// `(grad_x f, grad_y f)`.
    fn gradients(&self, x: &[T], y: &[T]) -> (Vec<T>, Vec<T>);
}

/// Stationary residual `max(dist(0, grad_x f + N_X(x)), dist(0, -grad_y f + N_Y(y)))`.
pub fn residual<T: Scalar, O: MinimaxObjective<T> + ?Sized>(
    objective: &O,
    x_box: &BoxRegion<T>,
    y_box: &BoxRegion<T>,
    x: &[T],
    y: &[T],
) -> Result<T> {
    let (gx, gy) = objective.gradients(x, y);
    residual_from_gradients(x_box, y_box, x, y, &gx, &gy)
}

fn residual_from_gradients<T: Scalar>(
    x_box: &BoxRegion<T>,
    y_box: &BoxRegion<T>,
    x: &[T],
    y: &[T],
    gx: &[T],
    gy: &[T],
) -> Result<T> {
    let descent: Vec<T> = gx.iter().map(|&g| -g).collect();
    let rx = norm2(&tangent_project(x_box, x, &descent)?);
    let ry = norm2(&tangent_project(y_box, y, gy)?);
    Ok(rx.max(ry))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GdaParams<T> {
    pub step_x: T,
    pub step_y: T,
    pub max_iters: usize,
    pub n_starts: usize,
    pub residual_tol: T,
}

impl<T: Scalar> Default for GdaParams<T> {
    fn default() -> Self {
        Self {
            step_x: T::lit(0.05),
            step_y: T::lit(0.05),
            max_iters: 2000,
            n_starts: 8,
            residual_tol: T::lit(1e-8),
        }
    }
}

impl<T: Scalar> GdaParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_x > T::zero() && self.step_y > T::zero()) {
            return Err(Error::invalid("GDA steps must be positive"));
        }
        if self.n_starts == 0 {
            return Err(Error::invalid("need at least one start"));
        }
        if self.residual_tol.is_nan() || self.residual_tol < T::zero() {
            return Err(Error::invalid("residual tolerance must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryResult<T> {
    pub point: EquilibriumPoint<T>,
    /// Achieved residual at `point`; this is the `epsilon` of the certificate.
    pub residual: T,
    /// GDA iterations executed.
    pub iterations: usize,
    pub start_index: usize,
}

/// Alternating projected GDA: `x` takes a projected descent step, then `y` a
/// projected ascent step at the new `x`. Returns the lowest-residual iterate.
pub fn projected_gda<T: Scalar, O: MinimaxObjective<T> + ?Sized>(
    objective: &O,
    x_box: &BoxRegion<T>,
    y_box: &BoxRegion<T>,
    start: &EquilibriumPoint<T>,
    params: &GdaParams<T>,
) -> Result<StationaryResult<T>> {
    params.validate()?;
    if !x_box.contains(&start.x) || !y_box.contains(&start.y) {
        return Err(Error::invalid("GDA start lies outside the strategy boxes"));
    }
    let mut x = x_box.project(&start.x);
    let mut y = y_box.project(&start.y);
    let (mut gx, _) = objective.gradients(&x, &y);
    let mut best = EquilibriumPoint { x: x.clone(), y: y.clone() };
    let mut best_res = residual(objective, x_box, y_box, &x, &y)?;
    let mut iterations = 0;

    while iterations < params.max_iters && best_res > params.residual_tol {
        iterations += 1;
        let stepped: Vec<T> = x.iter().zip(&gx).map(|(&xi, &g)| xi - params.step_x * g).collect();
        x = x_box.project(&stepped);
        let (_, gy) = objective.gradients(&x, &y);
        let stepped: Vec<T> = y.iter().zip(&gy).map(|(&yi, &g)| yi + params.step_y * g).collect();
        y = y_box.project(&stepped);

        let (ngx, ngy) = objective.gradients(&x, &y);
        if ngx.iter().chain(&ngy).any(|g| !g.is_finite()) {
            return Err(Error::NumericalFailure(format!("non-finite gradient at iteration {iterations}")));
        }
        let r = residual_from_gradients(x_box, y_box, &x, &y, &ngx, &ngy)?;
        if r < best_res {
            best_res = r;
            best = EquilibriumPoint { x: x.clone(), y: y.clone() };
        }
        gx = ngx;
    }

    Ok(StationaryResult { point: best, residual: best_res, iterations, start_index: 0 })
}

/// A game whose strategy sets on a multisample are boxes.
pub trait BoxScenarioGame<T: Scalar>: MinimaxObjective<T> {
    /// `(X^M, Y^M)`: the intersection of the per-scenario boxes.
    fn boxes(&self, ms: &MultiSample) -> Result<(BoxRegion<T>, BoxRegion<T>)>;

    /// Boxes the seeded starts are drawn from before projection onto
    /// `(X^M, Y^M)`. Must not depend on the multisample.
    fn start_region(&self) -> Result<(BoxRegion<T>, BoxRegion<T>)>;
}

fn draw_in<T: Scalar>(region: &BoxRegion<T>, rng: &mut SplitMix64) -> Vec<T> {
    region
        .lower()
        .iter()
        .zip(region.upper())
        .map(|(&l, &u)| l + (u - l) * T::lit(rng.next_f64()))
        .collect()
}

/// Deterministic multistart approximation of `argmin r^M(x, y)`.
///
/// Runs GDA from `n_starts` seeded starts (indices `0..n_starts`, each
/// projected onto `X^M x Y^M`) and from the center of `X^M x Y^M` (index
/// `n_starts`). Among runs that reach `residual_tol` the lowest start index
/// wins; if none does, the lowest residual wins, ties again to the lowest
/// index. Starts depend only on `seed`, and the boxes only on the sample
/// multiset, so the map is permutation invariant.
pub fn min_residual_map<T: Scalar, G: BoxScenarioGame<T> + ?Sized>(
    game: &G,
    ms: &MultiSample,
    params: &GdaParams<T>,
    seed: u64,
) -> Result<StationaryResult<T>> {
    params.validate()?;
    let (x_box, y_box) = game.boxes(ms)?;
    let (sx, sy) = game.start_region()?;
    let mut starts: Vec<EquilibriumPoint<T>> = (0..params.n_starts)
        .map(|s| {
            let mut rng = SplitMix64::new(derive_seed(seed, &[s as u64]));
            let x = draw_in(&sx, &mut rng);
            let y = draw_in(&sy, &mut rng);
            EquilibriumPoint { x: x_box.project(&x), y: y_box.project(&y) }
        })
        .collect();
    starts.push(EquilibriumPoint { x: x_box.center(), y: y_box.center() });

    let mut results = Vec::with_capacity(starts.len());
    for (index, start) in starts.iter().enumerate() {
        let mut run = projected_gda(game, &x_box, &y_box, start, params)?;
        run.start_index = index;
        results.push(run);
    }
    let chosen = match results.iter().find(|r| r.residual <= params.residual_tol) {
        Some(first) => first.clone(),
        None => results
            .iter()
            .fold(None::<&StationaryResult<T>>, |acc, r| match acc {
                Some(b) if b.residual <= r.residual => Some(b),
                _ => Some(r),
            })
            .expect("at least one start")
            .clone(),
    };
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `f(x, y) = x . y`.
    struct Bilinear;

    impl MinimaxObjective<f64> for Bilinear {
        fn dims(&self) -> (usize, usize) {
            (1, 1)
        }
        fn payoff(&self, x: &[f64], y: &[f64]) -> f64 {
            x[0] * y[0]
        }
        fn gradients(&self, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
            (vec![y[0]], vec![x[0]])
        }
    }

    /// `f(x, y) = |x|^2/2 - |y|^2/2` on `[-theta_min, theta_min]`.
    struct Quadratic;

    impl MinimaxObjective<f64> for Quadratic {
        fn dims(&self) -> (usize, usize) {
            (1, 1)
        }
        fn payoff(&self, x: &[f64], y: &[f64]) -> f64 {
            0.5 * x[0] * x[0] - 0.5 * y[0] * y[0]
        }
        fn gradients(&self, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
            (vec![x[0]], vec![-y[0]])
        }
    }

    impl BoxScenarioGame<f64> for Quadratic {
        fn boxes(&self, ms: &MultiSample) -> Result<(BoxRegion<f64>, BoxRegion<f64>)> {
            Ok((BoxRegion::cube(1, ms.min())?, BoxRegion::cube(1, ms.min())?))
        }
        fn start_region(&self) -> Result<(BoxRegion<f64>, BoxRegion<f64>)> {
            Ok((BoxRegion::cube(1, 0.5)?, BoxRegion::cube(1, 0.5)?))
        }
    }

    fn unit() -> BoxRegion<f64> {
        BoxRegion::cube(1, 1.0).unwrap()
    }

    #[test]
    fn tangent_projection_cases() {
        let b = unit();
        assert_eq!(tangent_project(&b, &[0.3], &[2.0]).unwrap(), vec![2.0]);
        assert_eq!(tangent_project(&b, &[1.0], &[2.0]).unwrap(), vec![0.0]);
        assert_eq!(tangent_project(&b, &[1.0], &[-1.0]).unwrap(), vec![-1.0]);
        assert_eq!(tangent_project(&b, &[-1.0], &[-1.0]).unwrap(), vec![0.0]);
        let flat = BoxRegion::new(vec![0.2], vec![0.2]).unwrap();
        assert_eq!(tangent_project(&flat, &[0.2], &[5.0]).unwrap(), vec![0.0]);
        assert!(tangent_project(&b, &[1.1], &[1.0]).is_err());
    }

    #[test]
    fn bilinear_corner_residual() {
        let b = unit();
        let r = residual(&Bilinear, &b, &b, &[1.0], &[1.0]).unwrap();
        assert_eq!(r, 1.0);
        let r = residual(&Bilinear, &b, &b, &[0.0], &[0.0]).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn quadratic_gda_converges() {
        let b = unit();
        let params = GdaParams { step_x: 0.1, step_y: 0.1, max_iters: 1000, n_starts: 1, residual_tol: 1e-6 };
        let start = EquilibriumPoint { x: vec![0.5], y: vec![0.5] };
        let res = projected_gda(&Quadratic, &b, &b, &start, &params).unwrap();
        assert!(res.residual <= 1e-6);
        assert!(res.iterations < 1000);
        let again = residual(&Quadratic, &b, &b, &res.point.x, &res.point.y).unwrap();
        assert!((again - res.residual).abs() <= 1e-12);
    }

    #[test]
    fn stationary_start_is_fixed_point() {
        let b = unit();
        let start = EquilibriumPoint { x: vec![0.0], y: vec![0.0] };
        let res = projected_gda(&Quadratic, &b, &b, &start, &GdaParams::default()).unwrap();
        assert_eq!(res.point, start);
        assert_eq!(res.iterations, 0);
    }

    #[test]
    fn gda_rejects_bad_input() {
        let b = unit();
        let outside = EquilibriumPoint { x: vec![2.0], y: vec![0.0] };
        assert!(projected_gda(&Quadratic, &b, &b, &outside, &GdaParams::default()).is_err());
        let bad = GdaParams { step_x: 0.0, ..GdaParams::default() };
        let start = EquilibriumPoint { x: vec![0.0], y: vec![0.0] };
        assert!(projected_gda(&Quadratic, &b, &b, &start, &bad).is_err());
    }

    #[test]
    fn multistart_quadratic() {
        let ms = MultiSample::new(vec![0.9, 0.7, 1.2]).unwrap();
        let params = GdaParams { step_x: 0.1, step_y: 0.1, max_iters: 1000, n_starts: 1, residual_tol: 1e-6 };
        let res = min_residual_map(&Quadratic, &ms, &params, 4).unwrap();
        assert!(res.residual <= 1e-6);
        assert!(res.point.x[0].abs() < 1e-5 && res.point.y[0].abs() < 1e-5);
        let permuted = MultiSample::new(vec![1.2, 0.9, 0.7]).unwrap();
        assert_eq!(min_residual_map(&Quadratic, &permuted, &params, 4).unwrap(), res);
        let wider = ms.extended(&[1.4]).unwrap();
        assert_eq!(min_residual_map(&Quadratic, &wider, &params, 4).unwrap(), res);
    }

    #[test]
    fn box_ops() {
        let a = BoxRegion::new(vec![-1.0, 0.0], vec![1.0, 2.0]).unwrap();
        let b = BoxRegion::new(vec![0.0, -1.0], vec![3.0, 1.0]).unwrap();
        let c = a.intersect(&b).unwrap();
        assert_eq!(c.lower(), &[0.0, 0.0]);
        assert_eq!(c.upper(), &[1.0, 1.0]);
        assert!(c.is_subset_of(&a) && c.is_subset_of(&b));
        assert_eq!(a.project(&[5.0, -5.0]), vec![1.0, 0.0]);
        assert!(BoxRegion::new(vec![1.0], vec![0.0]).is_err());
        let far = BoxRegion::new(vec![5.0, 5.0], vec![6.0, 6.0]).unwrap();
        assert!(a.intersect(&far).is_err());
    }
}
