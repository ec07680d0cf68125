use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::AddAssign;

use num_traits::{Float, FloatConst};

/// Floating-point scalar the models are generic over.
pub trait Scalar:
    Float + FloatConst + AddAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal, panicking only for values the type cannot
    /// represent at all (never the case for `f32`/`f64`).
    fn lit(value: f64) -> Self {
        <Self as num_traits::NumCast>::from(value).expect("literal out of range")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
