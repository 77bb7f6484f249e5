//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use nalgebra::{Complex, RealField};

/// Real floating-point scalar the library is generic over (`f32` or `f64`).
///
/// Transcendental functions come from [`RealField`]; the extra items here are
/// the few conversions and constants the algorithms need.
pub trait Real: RealField + Copy + Debug + Display + LowerExp + Default {
    /// Machine epsilon.
    const EPSILON: Self;

    /// Converts an `f64` literal or parameter.
    fn c(x: f64) -> Self;

    fn to_f64(self) -> f64;

    /// Converts an index or count.
    fn idx(n: usize) -> Self {
        Self::c(n as f64)
    }

    /// Bit pattern widened to 64 bits; used for exact-value cache keys.
    fn key_bits(self) -> u64;
}

impl Real for f32 {
    const EPSILON: Self = f32::EPSILON;

    fn c(x: f64) -> Self {
        x as f32
    }

    fn to_f64(self) -> f64 {
        self as f64
    }

    fn key_bits(self) -> u64 {
        self.to_bits() as u64
    }
}

impl Real for f64 {
    const EPSILON: Self = f64::EPSILON;

    fn c(x: f64) -> Self {
        x
    }

    fn to_f64(self) -> f64 {
        self
    }

    fn key_bits(self) -> u64 {
        self.to_bits()
    }
}

/// `|z|` for a complex number over a generic real field.
pub fn cabs<T: Real>(z: Complex<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}

/// `|z|²`.
pub fn cabs2<T: Real>(z: Complex<T>) -> T {
    z.re * z.re + z.im * z.im
}

/// `e^{iθ}`.
pub fn phase<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// Absolute value without the `Signed`/`ComplexField` method ambiguity.
pub fn rabs<T: Real>(x: T) -> T {
    if x < T::zero() {
        -x
    } else {
        x
    }
}
