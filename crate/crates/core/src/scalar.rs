//! Floating-point scalar abstraction.
//!
//! All numerical code in this crate is generic over [`Scalar`], a thin
//! extension of `num_traits::Float`. Concrete aliases for `f64` live at the
//! crate root; `f32` builds too but the shipped tolerances assume double
//! precision.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, NumAssign, NumCast};

/// Floating-point scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + NumAssign + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Shorthand for converting an `f64` literal into `Self`.
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as NumCast>::from(v).expect("literal representable in scalar type")
    }

    /// Lossless-enough conversion from a count.
    #[inline]
    fn of_usize(n: usize) -> Self {
        <Self as NumCast>::from(n).expect("usize representable in scalar type")
    }

    /// Relative off-diagonal threshold at which the Jacobi eigensolver stops.
    fn eig_tol() -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn eig_tol() -> Self {
        1e-13
    }
}

impl Scalar for f32 {
    #[inline]
    fn eig_tol() -> Self {
        1e-5
    }
}
