use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar the numerical kernels are generic over (f32 or f64).
pub trait Scalar:
    Float + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
