//! Scalar root finding for monotone functions.

use alloc::format;

use crate::{Error, Result};

/// Result of a bracketed solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    /// Function value at `x`.
    pub residual: f64,
    pub iterations: usize,
}

/// Finds `x` in `[lo, hi]` with `|f(x)| <= tol` for a nondecreasing `f`.
///
/// `f` returns the value and a (sub)derivative at its argument. Newton steps
/// are taken from `start` while they stay strictly inside the current bracket;
/// otherwise the bracket is bisected. Requires `f(lo) <= 0 <= f(hi)`.
pub fn solve_increasing<F>(mut f: F, lo: f64, hi: f64, start: f64, tol: f64, max_iter: usize) -> Result<Root>
where
    F: FnMut(f64) -> (f64, f64),
{
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::Solver(format!("invalid bracket [{lo}, {hi}]")));
    }
    let (mut lo, mut hi) = (lo, hi);
    let mut x = start.clamp(lo, hi);
    for iteration in 0..max_iter {
        let (fx, slope) = f(x);
        if !fx.is_finite() {
            return Err(Error::Solver(format!("non-finite residual at x = {x}")));
        }
        if fx.abs() <= tol {
            return Ok(Root { x, residual: fx, iterations: iteration + 1 });
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(lo.abs()) {
            return Ok(Root { x, residual: fx, iterations: iteration + 1 });
        }
        let newton = x - fx / slope;
        x = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(Error::Solver(format!(
        "no convergence after {max_iter} iterations, bracket [{lo}, {hi}]"
    )))
}
