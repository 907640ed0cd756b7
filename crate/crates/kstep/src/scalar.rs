//! Scalar abstraction: the whole crate is generic over the working
//! floating-point type.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the solvers operate on: `f32` or `f64`.
///
/// Everything numeric in this crate is written against this trait; the
/// crate root exports `f64` aliases for the common case.
pub trait Real:
    Float + FromPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Convert an `f64` literal (tolerances, algorithm constants).
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("constant not representable in scalar type")
    }
}

impl<T> Real for T where T: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {}
