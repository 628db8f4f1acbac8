//! Scalar abstraction for the numeric kernel.
//!
//! Everything that is plain arithmetic is generic over [`Real`], implemented
//! for `f32` and `f64`. Concrete `f64` aliases live at the crate root.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar the library is generic over.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + Send + Sync + 'static
{
    /// Natural logarithm of the gamma function.
    fn ln_gamma(self) -> Self;
}

impl Real for f32 {
    #[inline]
    fn ln_gamma(self) -> Self {
        libm::lgammaf(self)
    }
}

impl Real for f64 {
    #[inline]
    fn ln_gamma(self) -> Self {
        libm::lgamma(self)
    }
}

/// Convert an `f64` constant into the working scalar type.
#[inline]
pub(crate) fn real<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("f64 constant must convert into the scalar type")
}

/// Convert a whole-number count into the working scalar type.
#[inline]
pub(crate) fn count<T: Real>(k: u64) -> T {
    T::from_u64(k).expect("count must convert into the scalar type")
}

/// Lossy view of a scalar as `f64`, for error reporting.
#[inline]
pub(crate) fn describe<T: Real>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Neumaier-compensated accumulator for long sums of floating-point terms.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    compensation: T,
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            compensation: T::zero(),
        }
    }

    pub fn add(&mut self, term: T) {
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.compensation += (self.sum - t) + term;
        } else {
            self.compensation += (term - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.compensation
    }
}

/// Compensated sum of an iterator of terms.
pub fn compensated_sum<T: Real>(terms: impl IntoIterator<Item = T>) -> T {
    let mut acc = CompensatedSum::new();
    for t in terms {
        acc.add(t);
    }
    acc.value()
}
