//! Scalar abstraction shared by every numeric routine in this crate.
//!
//! All estimators and models are generic over [`Real`] so the same code runs
//! in `f32` or `f64`. The crate root exports `f64` aliases for the common
//! concrete types; `f64` is what the CLI and the accuracy guarantees use.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar usable throughout the library.
///
/// This is [`num_traits::Float`] plus conversions, assignment operators and
/// thread-safety — everything a column of data or a model parameter needs.
/// (Serde bounds are left to the individual derives so they don't conflict
/// with blanket `DeserializeOwned` obligations.) Implemented for `f32` and
/// `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Shorthand for embedding an `f64` literal into the scalar type.
    ///
    /// Panics only if the literal is not representable at all, which cannot
    /// happen for the finite constants used in this crate.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 literal")
    }

    /// Convert a count into the scalar type (rounds for huge counts in `f32`).
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize conversion")
    }
}

impl Real for f32 {}
impl Real for f64 {}
