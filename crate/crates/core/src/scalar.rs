//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All of the physics is written against [`Real`], so the same code runs in
//! `f64` (the default, and what the crate-root aliases use) or `f32`.

use std::fmt::{Debug, LowerExp};
use std::str::FromStr;

use nalgebra as na;
use num_traits as nt;

/// Floating point types usable by the integrals, quadrature and SCF code.
pub trait Real:
    na::RealField
    + Copy
    + nt::FloatConst
    + nt::ToPrimitive
    + FromStr
    + Debug
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts a literal; every `Real` can represent an `f64` approximately.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as nt::FromPrimitive>::from_f64(x).expect("literal representable")
    }

    #[inline]
    fn count(n: usize) -> Self {
        <Self as nt::FromPrimitive>::from_usize(n).expect("count representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        nt::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Machine epsilon of the concrete type.
    fn eps() -> Self;
}

impl Real for f64 {
    fn eps() -> Self {
        f64::EPSILON
    }
}

impl Real for f32 {
    fn eps() -> Self {
        f32::EPSILON
    }
}

pub type Vec3<T> = na::Vector3<T>;

#[cfg(test)]
mod tests {
    use super::*;

    fn third<T: Real>() -> T {
        T::one() / T::lit(3.0)
    }

    #[test]
    fn literals_round_trip_in_both_widths() {
        assert_eq!(third::<f64>(), 1.0 / 3.0);
        assert_eq!(third::<f32>(), 1.0f32 / 3.0);
        assert_eq!(f32::lit(0.5).as_f64(), 0.5);
        assert_eq!(<f64 as Real>::count(7), 7.0);
    }
}
