//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar: `f32` or `f64`.
///
/// Tolerances quoted throughout the crate (1e-12 and tighter) are only
/// attainable in `f64`; `f32` instantiations work but report their own
/// precision through [`Real::tolerance`].
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Converts a count into this scalar.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    /// `requested` widened to a few ulps of this type when the type cannot
    /// resolve it.
    #[inline]
    fn tolerance(requested: f64) -> Self {
        Self::lit(requested).max(Self::epsilon() * Self::lit(4.0))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `base^n` for `base` in `[0, 1]`, evaluated through `exp(n ln base)` once
/// `n` is large enough that repeated squaring loses accuracy.
/// Neumaier-compensated sum.
pub fn compensated_sum<T: Real>(values: &[T]) -> T {
    let (mut sum, mut carry) = (T::zero(), T::zero());
    for &v in values {
        let t = sum + v;
        carry = carry + if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + carry
}

pub(crate) fn powi_unit<T: Real>(base: T, n: u64) -> T {
    if n == 0 {
        return T::one();
    }
    if base <= T::zero() {
        return T::zero();
    }
    if n <= i32::MAX as u64 / 2 && n < 1 << 20 {
        base.powi(n as i32)
    } else {
        (T::lit(n as f64) * base.ln()).exp()
    }
}

/// `(1 - w)^n` without forming `1 - w` when `w` is tiny.
pub(crate) fn survival<T: Real>(w: T, n: u64) -> T {
    if n == 0 {
        return T::one();
    }
    if w >= T::one() {
        return T::zero();
    }
    if w < T::lit(1e-3) {
        (T::lit(n as f64) * (-w).ln_1p()).exp()
    } else {
        powi_unit(T::one() - w, n)
    }
}
