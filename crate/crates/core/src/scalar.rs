//! Floating point abstraction shared by the numerical modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real scalar used throughout the crate: `f32` or `f64`.
///
/// Tolerances that the algorithms rely on are carried as associated
/// constants so that single precision gets thresholds it can actually meet.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Tolerance for symplectic-spectrum and purity checks.
    const EPS_SYM: Self;
    /// Threshold below which `|λ - 1|` is treated as an exactly pure mode.
    const EPS_SING: Self;
    /// Convergence threshold for Jacobi sweeps.
    const EPS_JACOBI: Self;

    /// Lossless literal conversion for constants written as `f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const EPS_SYM: Self = 1e-9;
    const EPS_SING: Self = 1e-9;
    const EPS_JACOBI: Self = 1e-15;
}

impl Scalar for f32 {
    const EPS_SYM: Self = 1e-4;
    const EPS_SING: Self = 1e-4;
    const EPS_JACOBI: Self = 1e-7;
}

/// Complex number over a [`Scalar`].
pub type C<F> = Complex<F>;

#[inline]
pub fn c<F: Scalar>(re: F, im: F) -> C<F> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn re<F: Scalar>(x: F) -> C<F> {
    Complex::new(x, F::zero())
}

/// `e^{iφ}`
#[inline]
pub(crate) fn cis<F: Scalar>(phase: F) -> C<F> {
    Complex::new(phase.cos(), phase.sin())
}
