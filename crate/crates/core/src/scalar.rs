//! Scalar abstraction shared by the deterministic model mathematics.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar usable by the PK/PD and utility arithmetic (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Widens to `f64` for reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Default absolute/relative tolerance for adaptive integration at this precision.
    #[inline]
    fn quad_tolerance() -> Self {
        let floor = Self::epsilon() * Self::lit(100.0);
        Self::lit(1e-10).max(floor)
    }
}

impl Real for f32 {}
impl Real for f64 {}
