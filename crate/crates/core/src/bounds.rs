//! The violation bound `g(k)` as a function of the complexity `k`.
//!
//! For `k < m`, `g(k) = 1 - t(k)` where `t(k)` is the unique root in `(0, 1)` of
//!
//! ```text
//! beta/(m+1) * sum_{j=k}^{m} C(j,k) t^(j-k)  -  C(m,k) t^(m-k) = 0
//! ```
//!
//! and `g(m) = 1`. We divide through by `C(m,k)` so the coefficients stay in
//! `(0, 1]` for any `m`; roots and signs are unchanged.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const MAX_BISECTION_ITERS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundTable<T> {
    pub m: usize,
    pub beta: T,
    /// `g[k]` for `k = 0..=m`.
    pub g: Vec<T>,
    /// `t[k]` for `k = 0..m`.
    pub t: Vec<T>,
}

impl<T: Scalar> BoundTable<T> {
    /// `g(k)`, or `None` for `k > m`.
    pub fn bound(&self, k: usize) -> Option<T> {
        self.g.get(k).copied()
    }

    /// CSV with header `k,t,g`; the `t` field is empty on the `k = m` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,t,g\n");
        for (k, g) in self.g.iter().enumerate() {
            match self.t.get(k) {
                Some(t) => out.push_str(&format!("{k},{t:?},{g:?}\n")),
                None => out.push_str(&format!("{k},,{g:?}\n")),
            }
        }
        out
    }
}

fn check_args<T: Scalar>(k: usize, m: usize, beta: T) -> Result<()> {
    if k >= m {
        return Err(Error::invalid(format!("need k < m, got k = {k}, m = {m}")));
    }
    if !(beta > T::zero() && beta < T::one()) {
        return Err(Error::invalid(format!("beta must lie in (0, 1), got {beta}")));
    }
    Ok(())
}

/// The normalized root function `F(t)`.
///
/// `F(t) = beta/(m+1) * sum_{j=k}^{m} c_j t^(j-k) - t^(m-k)` with
/// `c_j = C(j,k)/C(m,k)`, built by the downward recurrence `c_m = 1`,
/// `c_{j-1} = c_j (j-k)/j` and summed with Horner's scheme.
pub fn eval_root_fn<T: Scalar>(t: T, k: usize, m: usize, beta: T) -> Result<T> {
    check_args(k, m, beta)?;
    Ok(root_fn_unchecked(t, k, m, beta))
}

fn root_fn_unchecked<T: Scalar>(t: T, k: usize, m: usize, beta: T) -> T {
    let mut c = T::one();
    let mut acc = T::one();
    for j in (k + 1..=m).rev() {
        c = c * T::lit((j - k) as f64) / T::lit(j as f64);
        acc = acc * t + c;
    }
    let scale = beta / T::lit((m + 1) as f64);
    scale * acc - t.powi((m - k) as i32)
}

/// Bisection for `t(k)` on `[0, 1]`, where `F(0) > 0 > F(1)`.
///
/// Stops once the bracket is no wider than `tol` or can no longer be split.
pub fn solve_t<T: Scalar>(k: usize, m: usize, beta: T, tol: T) -> Result<T> {
    check_args(k, m, beta)?;
    if tol.is_nan() || tol <= T::zero() {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let (mut lo, mut hi) = (T::zero(), T::one());
    let f_lo = root_fn_unchecked(lo, k, m, beta);
    let f_hi = root_fn_unchecked(hi, k, m, beta);
    if !(f_lo > T::zero() && f_hi < T::zero()) {
        return Err(Error::NumericalFailure(format!(
            "no sign change on [0, 1] for k = {k}, m = {m}: F(0) = {f_lo}, F(1) = {f_hi}"
        )));
    }
    let two = T::lit(2.0);
    for _ in 0..MAX_BISECTION_ITERS {
        let mid = (lo + hi) / two;
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = root_fn_unchecked(mid, k, m, beta);
        if f_mid == T::zero() {
            return Ok(mid);
        }
        if f_mid > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NumericalFailure(format!(
        "bisection did not converge in {MAX_BISECTION_ITERS} iterations (k = {k}, m = {m})"
    )))
}

/// `g(k)` for every `k = 0..=m`.
pub fn bound_table<T: Scalar>(m: usize, beta: T, tol: T) -> Result<BoundTable<T>> {
    if m == 0 {
        return Err(Error::invalid("m must be at least 1"));
    }
    let t = (0..m).map(|k| solve_t(k, m, beta, tol)).collect::<Result<Vec<T>>>()?;
    let mut g: Vec<T> = t.iter().map(|&tk| T::one() - tk).collect();
    g.push(T::one());
    Ok(BoundTable { m, beta, g, t })
}
