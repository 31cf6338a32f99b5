//! Numeric abstraction shared by the plain and the differentiated pipeline.
//!
//! Every stage of decode → resample → loss is written once, generic over
//! [`Scalar`]. Instantiated with `f64` it is the plain computation; with
//! [`crate::autodiff::Var`] it records a tape. Both instantiations execute
//! the same floating-point operations in the same order, so their forward
//! values agree bit for bit.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Magnitude at which logits are clamped before exponentiation.
pub const LOGIT_CLAMP: f64 = 50.0;

pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn value(self) -> f64;

    /// A constant living in the same context as `self` (zero derivative).
    fn constant_like(self, c: f64) -> Self;

    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sqrt(self) -> Self;
    /// Absolute value; the derivative at zero is taken as zero.
    fn abs(self) -> Self;
    fn sigmoid(self) -> Self;
    /// Larger of the two; ties resolve to `self`.
    fn max(self, other: Self) -> Self;
    /// Smaller of the two; ties resolve to `self`.
    fn min(self, other: Self) -> Self;
    /// Clamps into `[-bound, bound]`; the derivative is zero where clamped.
    fn clamp_abs(self, bound: f64) -> Self;
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl Scalar for f64 {
    #[inline]
    fn value(self) -> f64 {
        self
    }

    #[inline]
    fn constant_like(self, c: f64) -> Self {
        c
    }

    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }

    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }

    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }

    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }

    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }

    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }

    #[inline]
    fn sigmoid(self) -> Self {
        sigmoid(self)
    }

    #[inline]
    fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    #[inline]
    fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    #[inline]
    fn clamp_abs(self, bound: f64) -> Self {
        self.clamp(-bound, bound)
    }
}

/// Records the discrete branch decisions taken while evaluating the
/// pipeline (ray bracketing, hit selection, max/min and kink sides).
///
/// Two evaluations with equal logs ran through the same smooth piece of
/// the piecewise-defined loss.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BranchLog {
    enabled: bool,
    codes: Vec<u64>,
}

impl BranchLog {
    pub fn recording() -> Self {
        Self {
            enabled: true,
            codes: Vec::new(),
        }
    }

    pub fn disabled() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, code: u64) {
        if self.enabled {
            self.codes.push(code);
        }
    }

    pub fn codes(&self) -> &[u64] {
        &self.codes
    }
}
