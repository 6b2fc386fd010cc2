//! Scalar abstraction shared by every numerical module.
//!
//! All operator code is written against [`Real`]; `f64` is the working
//! precision for experiments and `f32` is supported for cheap exploratory
//! runs (tolerances then have to be relaxed accordingly).

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating point scalar usable by the operator code.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal or parameter into `Self`.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts an integer index into `Self`.
    #[inline]
    fn of_int(n: i64) -> Self {
        Self::from_i64(n).expect("integer representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`] scalar.
pub type C<T> = Complex<T>;

/// `e(t) = exp(2πi t)`.
#[inline]
pub fn e<T: Real>(t: T) -> C<T> {
    let (s, c) = (T::TAU() * t).sin_cos();
    Complex::new(c, s)
}

/// Fractional part in `[0, 1)`.
///
/// `x - floor(x)` can round up to exactly `1.0` for tiny negative `x`;
/// that case is folded back to zero.
#[inline]
pub fn frac<T: Real>(x: T) -> T {
    let y = x - x.floor();
    if y >= T::one() {
        T::zero()
    } else {
        y
    }
}

/// Distance from `x` to the nearest integer.
#[inline]
pub fn dist_to_int<T: Real>(x: T) -> T {
    (x - x.round()).abs()
}

/// Circular distance on `R/Z`.
#[inline]
pub fn circle_dist<T: Real>(x: T, y: T) -> T {
    let d = frac(x - y);
    d.min(T::one() - d)
}
