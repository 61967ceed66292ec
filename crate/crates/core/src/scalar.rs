//! Scalar abstraction shared by the linear-algebra layer.
//!
//! Operators, states, the Lanczos solver and the Krylov propagator are generic
//! over [`Real`], which is implemented for `f32` and `f64`. Amplitudes are
//! always `Complex<T>`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point type usable as the component type of amplitudes.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Send
    + Sync
    + Debug
    + Display
    + 'static
{
    /// Machine epsilon scaled for "numerically zero" tests.
    fn tiny() -> Self {
        Self::epsilon() * Self::from_f64(64.0).unwrap()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable")
}

/// Lossy conversion to `f64` for reporting.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(lit(re), lit(im))
}

/// `e^{i phi}` with `phi` in radians.
#[inline]
pub fn cis<T: Real>(phi: f64) -> Complex<T> {
    Complex::new(lit(phi.cos()), lit(phi.sin()))
}
