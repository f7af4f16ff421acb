//! Floating-point scalar abstraction: every kernel is generic over [`Real`],
//! instantiated as `f32` or `f64`.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Scalar type of all numeric kernels.
///
/// The file formats and the CLI fix `f64`; `f32` is supported for callers
/// that trade precision for footprint.
pub trait Real:
    Float + FromPrimitive + NumAssign + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal or precomputed constant.
    #[inline]
    fn from64(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal")
    }

    /// Widens to `f64` (used by reports and RNG plumbing).
    #[inline]
    fn to64(self) -> f64 {
        ToPrimitive::to_f64(&self).expect("finite scalar")
    }

    /// Exact value of a site or iteration count.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from64(n as f64)
    }

    #[inline]
    fn tau() -> Self {
        Self::from64(std::f64::consts::TAU)
    }

    #[inline]
    fn pi() -> Self {
        Self::from64(std::f64::consts::PI)
    }

    /// Half, used by the pair-counting factor of the coupling energy.
    #[inline]
    fn half() -> Self {
        Self::from64(0.5)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Wraps an angle into `[0, 2π)`.
#[inline]
pub fn wrap_angle<T: Real>(a: T) -> T {
    let tau = T::tau();
    let mut r = a - tau * (a / tau).floor();
    if r >= tau {
        r -= tau;
    }
    if r < T::zero() {
        r += tau;
    }
    r
}

/// Distance between two angles modulo 2π, in `[0, π]`.
#[inline]
pub fn angle_distance<T: Real>(a: T, b: T) -> T {
    let d = wrap_angle(a - b);
    d.min(T::tau() - d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_lands_in_range() {
        for &a in &[-7.0, -1e-9, 0.0, 1.0, 6.283185307179586, 100.0, -100.0] {
            let w = wrap_angle(a);
            assert!((0.0..std::f64::consts::TAU).contains(&w), "wrap({a}) = {w}");
        }
    }

    #[test]
    fn angle_distance_symmetric() {
        let d1 = angle_distance(0.1, 6.2);
        let d2 = angle_distance(6.2, 0.1);
        assert!((d1 - d2).abs() < 1e-12);
        assert!(d1 < 0.2);
    }

    #[test]
    fn works_in_f32() {
        let w = wrap_angle(-1.0f32);
        assert!(w > 5.28 && w < 5.29);
    }
}
