//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating-point type the simulator is generic over (`f32` or `f64`).
///
/// Validation thresholds live here as associated constants because a
/// Hermiticity check at `1e-12` is meaningful for `f64` and unreachable for
/// `f32`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Largest tolerated `max|ρ - ρ†|` for a density matrix.
    const HERMITIAN_TOL: Self;
    /// Slack above one allowed for a density-matrix trace or a state norm.
    const TRACE_SLACK: Self;
    /// Most negative eigenvalue accepted for a density matrix.
    const PSD_TOL: Self;
    /// Below this a trace or a population product counts as zero.
    const EXTINCT: Self;
    /// Target accuracy of truncated exponential series.
    const SERIES_TOL: Self;

    /// Lossy conversion from `f64`, used for literals and configuration values.
    fn lit(x: f64) -> Self;

    fn to_f64_lossy(self) -> f64;
}

impl Real for f64 {
    const HERMITIAN_TOL: Self = 1e-12;
    const TRACE_SLACK: Self = 1e-9;
    const PSD_TOL: Self = 1e-9;
    const EXTINCT: Self = 1e-14;
    const SERIES_TOL: Self = 1e-12;

    #[inline]
    fn lit(x: f64) -> Self {
        x
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

impl Real for f32 {
    const HERMITIAN_TOL: Self = 1e-5;
    const TRACE_SLACK: Self = 1e-5;
    const PSD_TOL: Self = 1e-5;
    const EXTINCT: Self = 1e-7;
    const SERIES_TOL: Self = 1e-6;

    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

/// Complex number over a [`Real`] scalar.
pub type C<T> = Complex<T>;

#[inline]
pub fn c<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub fn cr<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}
