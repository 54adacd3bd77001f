//! Lower real branch `W_-1` of the Lambert W function.
//!
//! `W_-1(x)` is the solution `w <= -1` of `w e^w = x` for `-1/e <= x < 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::real::Real;

const MAX_ITERATIONS: usize = 50;
const STEP_TOLERANCE: f64 = 1e-14;
const BRANCH_POINT_WINDOW: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WResult<T: Real> {
    pub value: T,
    /// `|w e^w - x|`
    pub residual: T,
    pub iterations: usize,
}

fn initial_guess<T: Real>(x: T, offset: T) -> T {
    if x < T::lit(-0.25) {
        // Series in p = -sqrt(2(e x + 1)) around the branch point.
        let p = -(T::lit(2.0) * T::E() * offset).sqrt();
        let p2 = p * p;
        -T::one() + p - p2 / T::lit(3.0) + T::lit(11.0 / 72.0) * p2 * p
    } else {
        let l1 = (-x).ln();
        let l2 = (-l1).ln();
        l1 - l2 + l2 / l1
    }
}

/// Evaluates `W_-1(x)` by Halley iteration.
///
/// Inputs within `1e-12` of `-1/e` return `-1` exactly.
pub fn lambert_w_minus1<T: Real>(x: T) -> Result<WResult<T>> {
    let inv_e = T::E().recip();
    let offset = x + inv_e;
    if !x.is_finite() || x >= T::zero() || offset < -T::lit(BRANCH_POINT_WINDOW) {
        return Err(Error::DomainError { x: x.as_f64() });
    }
    if offset.abs() < T::lit(BRANCH_POINT_WINDOW) {
        return Ok(WResult { value: -T::one(), residual: (-inv_e - x).abs(), iterations: 0 });
    }

    let tol = T::tolerance(STEP_TOLERANCE);
    let two = T::lit(2.0);
    let mut w = initial_guess(x, offset);
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + T::one();
        let denom = ew * wp1 - (w + two) * f / (two * wp1);
        if denom == T::zero() || !denom.is_finite() {
            break;
        }
        let step = f / denom;
        // Stay on the lower branch.
        let next = (w - step).min(-T::one());
        let moved = (next - w).abs();
        w = next;
        if moved <= tol * w.abs() {
            break;
        }
    }
    Ok(WResult { value: w, residual: (w * w.exp() - x).abs(), iterations })
}
