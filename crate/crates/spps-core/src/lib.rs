//! Spectral parameter power series (SPPS) machinery for one-dimensional
//! Schrodinger operators, with the transmutation-kernel and Darboux-transform
//! constructions built on top of it.
//!
//! The pieces fit together like this:
//!
//! * [`grid`] holds sampled functions on uniform grids plus the quadrature,
//!   differentiation and Bessel primitives everything else uses.
//! * [`formal_powers`] builds the recursive-integral families X, X-tilde and
//!   the formal powers phi_k, psi_k from a non-vanishing particular solution.
//! * [`spps`] sums the series into the two solution branches u1, u2 of
//!   u'' - q u = lambda u for a given lambda.
//! * [`spectral`] assembles truncated characteristic polynomials, finds their
//!   roots, and solves quantum-well problems.
//! * [`transmutation`] constructs integral kernels K(x, t; h) that map
//!   solutions of v'' + omega^2 v = 0 to solutions of the perturbed equation,
//!   and applies them.
//! * [`darboux`] transforms kernels and potentials between Darboux partners.
//! * [`dirac`] solves the supersymmetric one-dimensional Dirac system by the
//!   same power series.
//!
//! Everything is generic over the underlying real float type through the
//! [`Real`] trait; samples and parameters are complex throughout. The `*64`
//! aliases fix `f64`, which is what the stated accuracy targets assume.
//!
//! ```
//! use num_complex::Complex;
//! use spps_core::{grid::GridFn, formal_powers, spps};
//!
//! // q = 0 on [0, 1]: u1 = cosh(sqrt(lambda) x), u2 = sinh(sqrt(lambda) x)/sqrt(lambda)
//! let q = GridFn::<f64>::constant(0.0, 1.0, 2000, Complex::new(0.0, 0.0));
//! let f = formal_powers::build_nonvanishing_solution(&q, 0, 1e-14, 200).unwrap();
//! let fam = formal_powers::build_powers(&f, 0, 61).unwrap();
//! let sol = spps::eval_solution(&fam, Complex::new(4.0, 0.0)).unwrap();
//! let u1_end = sol.u1.values()[2000];
//! assert!((u1_end.re - 2.0f64.cosh()).abs() < 1e-10);
//! ```

pub mod darboux;
pub mod dirac;
pub mod error;
pub mod formal_powers;
pub mod grid;
pub mod spectral;
pub mod spps;
pub mod transmutation;

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive};

pub use error::Error;

/// Real scalar the whole crate is generic over. Implemented by `f32` and `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + LowerExp + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + Debug + Display + LowerExp + Send + Sync + 'static
{
}

/// Shorthand for converting an `f64` constant into the working scalar.
#[inline]
pub(crate) fn r<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("constant representable in the scalar type")
}

pub type GridFn64 = grid::GridFn<f64>;
pub type FormalPowerFamily64 = formal_powers::FormalPowerFamily<f64>;
pub type SppsEval64 = spps::SppsEval<f64>;
pub type CharPolynomial64 = spectral::CharPolynomial<f64>;
pub type SLProblemSpec64 = spectral::SLProblemSpec<f64>;
pub type WellSpec64 = spectral::WellSpec<f64>;
pub type Kernel2D64 = transmutation::Kernel2D<f64>;
pub type HalfKernel2D64 = transmutation::HalfKernel2D<f64>;
pub type DarbouxPair64 = darboux::DarbouxPair<f64>;
pub type DiracSpec64 = dirac::DiracSpec<f64>;
