//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a count into this scalar type.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum<S> {
    sum: S,
    carry: S,
}

impl<S: Scalar> CompensatedSum<S> {
    pub fn new() -> Self {
        Self {
            sum: S::zero(),
            carry: S::zero(),
        }
    }

    pub fn add(&mut self, value: S) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.carry = self.carry + ((self.sum - t) + value);
        } else {
            self.carry = self.carry + ((value - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> S {
        self.sum + self.carry
    }
}

/// `r - ln(1 + r)` without cancellation for small `r`.
pub(crate) fn r_minus_ln1p<S: Scalar>(r: S) -> S {
    if r.abs() < S::lit(1e-3) {
        // r^2/2 - r^3/3 + r^4/4 - r^5/5 + r^6/6
        let mut term = r * r;
        let mut acc = S::zero();
        let mut sign = S::one();
        for j in 2..=7 {
            acc = acc + sign * term / S::from_count(j);
            term = term * r;
            sign = -sign;
        }
        acc
    } else {
        r - r.ln_1p()
    }
}

/// `(1 + r) ln(1 + r) - r` without cancellation for small `r`.
pub(crate) fn one_plus_r_ln1p_minus_r<S: Scalar>(r: S) -> S {
    if r.abs() < S::lit(1e-3) {
        // sum_{j>=2} (-1)^j r^j / (j (j - 1))
        let mut term = r * r;
        let mut acc = S::zero();
        let mut sign = S::one();
        for j in 2..=7 {
            acc = acc + sign * term / S::from_count(j * (j - 1));
            term = term * r;
            sign = -sign;
        }
        acc
    } else {
        (S::one() + r) * r.ln_1p() - r
    }
}
