//! Truncated power-series solutions of `u'' - q u = lambda u` built from a
//! formal-power family.
//!
//! With `phi_k` anchored at `x0` and `h = f'(x0)`,
//!
//! ```text
//! u1 = sum_{k=0}^{K1} lambda^k phi_{2k} / (2k)!
//! u2 = sum_{k=0}^{K2} lambda^k phi_{2k+1} / (2k+1)!
//! ```
//!
//! satisfy `u1(x0) = 1, u1'(x0) = h, u2(x0) = 0, u2'(x0) = 1`. Derivatives
//! come from their own series (never from differencing):
//!
//! ```text
//! u1' = f' + sum_{k>=1} lambda^k/(2k)!     ( (f'/f) phi_{2k}   + 2k     psi_{2k-1} )
//! u2' =      sum_{k>=0} lambda^k/(2k+1)!   ( (f'/f) phi_{2k+1} + (2k+1) psi_{2k}   )
//! ```
//!
//! The pair has Wronskian `u1 u2' - u1' u2 = 1` identically in `lambda`.

use num_complex::Complex;

use crate::error::Result;
use crate::formal_powers::{
    build_nonvanishing_solution_with_derivative, build_powers_with_derivative,
    FormalPowerFamily, PICARD_MAX_ITER, PICARD_TOL,
};
use crate::grid::GridFn;
use crate::{r, Real};

/// Truncated series solutions and their derivative series at one `lambda`.
#[derive(Debug, Clone)]
pub struct SppsEval<T: Real> {
    /// The spectral parameter the series were summed at.
    pub lambda: Complex<T>,
    /// Highest formal-power order consumed.
    pub n_used: usize,
    /// Solution with `u1(x0) = 1`, `u1'(x0) = f'(x0)`.
    pub u1: GridFn<T>,
    /// Solution with `u2(x0) = 0`, `u2'(x0) = 1`.
    pub u2: GridFn<T>,
    /// Derivative series of `u1`.
    pub du1: GridFn<T>,
    /// Derivative series of `u2`.
    pub du2: GridFn<T>,
    /// Sup norm of the last retained term of each series (u1, u2).
    pub tail_estimate: (T, T),
    /// Set when a tail estimate exceeds `1e-6` times the partial sum's
    /// sup norm, i.e. the truncation order is visibly too low for this
    /// `lambda`.
    pub truncation_warning: bool,
}

/// Evaluates the truncated series at `lambda` using all orders the family
/// holds: `u1` keeps terms with `2k <= order`, `u2` keeps `2k + 1 <= order`.
pub fn eval_solution<T: Real>(
    fam: &FormalPowerFamily<T>,
    lambda: Complex<T>,
) -> Result<SppsEval<T>> {
    let order = fam.order();
    let n = fam.f().values().len();
    let zero = Complex::new(T::zero(), T::zero());
    let logdf: Vec<Complex<T>> = fam
        .df()
        .values()
        .iter()
        .zip(fam.f().values())
        .map(|(&d, &f)| d / f)
        .collect();

    let mut u1 = vec![zero; n];
    let mut u2 = vec![zero; n];
    let mut du1: Vec<Complex<T>> = fam.df().values().to_vec();
    let mut du2 = vec![zero; n];
    let mut tail1 = T::zero();
    let mut tail2 = T::zero();
    let mut pow = Complex::new(T::one(), T::zero());
    let mut k = 0usize;
    loop {
        let even = 2 * k;
        let odd = 2 * k + 1;
        let mut any = false;
        if even <= order {
            let phi = fam.phi_scaled(even);
            tail1 = T::zero();
            for i in 0..n {
                let term = pow * phi[i];
                u1[i] = u1[i] + term;
                tail1 = tail1.max(term.norm());
            }
            if k >= 1 {
                // 2k psi_{2k-1}/(2k)! = psi_{2k-1}/(2k-1)!, i.e. the stored row as-is.
                let psi = fam.psi_scaled(odd - 2);
                for i in 0..n {
                    du1[i] = du1[i] + pow * (logdf[i] * phi[i] + psi[i]);
                }
            }
            any = true;
        }
        if odd <= order {
            let phi = fam.phi_scaled(odd);
            let psi = fam.psi_scaled(odd - 1);
            tail2 = T::zero();
            for i in 0..n {
                let term = pow * phi[i];
                u2[i] = u2[i] + term;
                tail2 = tail2.max(term.norm());
                du2[i] = du2[i] + pow * (logdf[i] * phi[i] + psi[i]);
            }
            any = true;
        }
        if !any {
            break;
        }
        pow = pow * lambda;
        k += 1;
    }

    let a = fam.f().a();
    let b = fam.f().b();
    let u1 = GridFn::from_parts(a, b, u1);
    let u2 = GridFn::from_parts(a, b, u2);
    let du1 = GridFn::from_parts(a, b, du1);
    let du2 = GridFn::from_parts(a, b, du2);
    let warn_level = r::<T>(1e-6);
    let truncation_warning = tail1 > warn_level * u1.sup_norm()
        || tail2 > warn_level * u2.sup_norm();
    Ok(SppsEval {
        lambda,
        n_used: order,
        u1,
        u2,
        du1,
        du2,
        tail_estimate: (tail1, tail2),
        truncation_warning,
    })
}

/// Re-centers the series at `lambda0`: builds a non-vanishing solution of
/// `u'' - (q + lambda0) u = 0` and the formal-power family over it, with the
/// same anchor and order as `fam`. Evaluating the returned family at
/// `nu = lambda - lambda0` represents the original equation's solutions,
/// which keeps the truncated series accurate near `lambda0` instead of near
/// zero.
pub fn shift_center<T: Real>(
    fam: &FormalPowerFamily<T>,
    q: &GridFn<T>,
    lambda0: Complex<T>,
) -> Result<FormalPowerFamily<T>> {
    let q_shifted = q.map(|v| v + lambda0);
    let (f, df) = build_nonvanishing_solution_with_derivative(
        &q_shifted,
        fam.i0(),
        PICARD_TOL,
        PICARD_MAX_ITER,
    )?;
    build_powers_with_derivative(&f, &df, fam.i0(), fam.order())
}

/// Rewrites a coefficient sequence `c_k` of a polynomial in `lambda` as
/// coefficients in `nu = lambda - lambda0` (Taylor shift, exact synthetic
/// division).
pub fn shift_polynomial<T: Real>(coeffs: &mut [Complex<T>], lambda0: Complex<T>) {
    let n = coeffs.len();
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            let next = coeffs[j + 1];
            coeffs[j] = coeffs[j] + next * lambda0;
        }
    }
}
