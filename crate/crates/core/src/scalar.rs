//! Scalar abstraction shared by the numerical modules.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point type the geometry, material and functional code is written against.
///
/// Everything numerical is generic over `Real`; `f64` is the working precision of the
/// experiments and the CLI, `f32` is supported for the pointwise kernels.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + 'static {
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Base step for fourth-order central differences of smooth fields.
    fn fd_step() -> Self;
}

impl Real for f64 {
    fn fd_step() -> Self {
        1e-3
    }
}

impl Real for f32 {
    fn fd_step() -> Self {
        2e-2
    }
}
