//! Scalar abstraction for the numeric core.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rand::Rng;
use rand_distr::StandardNormal;

/// Floating-point scalar the library is generic over (`f32` or `f64`).
///
/// Bundles the `num-traits` bounds the numerics need plus the two random
/// draws used by matrix and signal generation, so call sites never have to
/// spell out distribution bounds.
pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum<Self>
    + Send
    + Sync
    + Debug
    + Display
    + 'static
{
    /// One standard-normal draw.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One angle uniform on `[0, 2π)`.
    fn uniform_angle<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Default eigensolver residual tolerance (relative to the Frobenius norm).
    fn default_eig_tol() -> Self;

    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("f64 conversion")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("f64 conversion")
    }
}

impl Real for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn uniform_angle<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random_range(0.0..std::f64::consts::TAU)
    }

    fn default_eig_tol() -> Self {
        1e-8
    }
}

impl Real for f32 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn uniform_angle<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random_range(0.0..std::f32::consts::TAU)
    }

    fn default_eig_tol() -> Self {
        1e-4
    }
}

/// Complex number over the library scalar.
pub type Cplx<T> = num_complex::Complex<T>;
