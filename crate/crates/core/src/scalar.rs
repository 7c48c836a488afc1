use std::fmt::{Debug, Display, LowerExp};

/// Floating point scalar the solvers and assembly are generic over.
///
/// The bounds are the intersection of what the numerical kernels need:
/// `num_traits::Float` for arithmetic and comparisons, `FromPrimitive` to
/// inject literal coefficients, assignment operators for in-place updates.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + num_traits::NumAssign
    + std::iter::Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an f64 coefficient; panics only if the target type cannot
    /// represent any value near it (never for f32/f64).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}
