//! Recursive-integral families and the formal powers phi_k, psi_k generated
//! by a non-vanishing particular solution f of f'' - q f = 0.
//!
//! The raw recursions are
//!
//! ```text
//! X^(0) = 1,  X^(n)(x)  = n int_{x0}^{x} X^(n-1)  (f^2)^( (-1)^n )  ds
//! Xt^(0) = 1, Xt^(n)(x) = n int_{x0}^{x} Xt^(n-1) (f^2)^( (-1)^(n-1) ) ds
//!
//! phi_k = f * X^(k)   (k odd)     psi_k = Xt^(k) / f  (k odd)
//! phi_k = f * Xt^(k)  (k even)    psi_k = X^(k) / f   (k even)
//! ```
//!
//! Internally everything is stored factorial-scaled (`X^(n)/n!` and so on):
//! the scaled recursion drops the `n` prefactor, and the scaled values are
//! exactly the series coefficients the solvers consume, which keeps high
//! orders inside floating-point range. The unscaled objects named above are
//! exposed through accessors.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::{self, GridFn};
use crate::{r, Real};

/// Minimum allowed magnitude of a "non-vanishing" particular solution.
pub const MIN_ABS_F: f64 = 1e-12;

/// Default Picard tolerance for [`build_nonvanishing_solution`].
pub const PICARD_TOL: f64 = 1e-14;

/// Default Picard iteration cap.
pub const PICARD_MAX_ITER: usize = 200;

/// Relative plateau level accepted when Picard stagnates at roundoff.
const PICARD_PLATEAU: f64 = 1e-9;

/// Sweeps without improvement that declare a stagnation plateau.
const PICARD_STALL: usize = 8;

/// Formal powers of orders `0..=N` anchored at grid node `i0`.
///
/// `f` is stored normalized to `f(x0) = 1`; `h = f'(x0)` after that
/// normalization. The derivative `f'` is spline-computed unless exact samples
/// were supplied.
#[derive(Debug, Clone)]
pub struct FormalPowerFamily<T: Real> {
    f: GridFn<T>,
    df: GridFn<T>,
    i0: usize,
    h: Complex<T>,
    order: usize,
    // Factorial-scaled rows: x_scaled[n] = X^(n)/n!, and likewise for the rest.
    x_scaled: Vec<Vec<Complex<T>>>,
    xt_scaled: Vec<Vec<Complex<T>>>,
    phi_scaled: Vec<Vec<Complex<T>>>,
    psi_scaled: Vec<Vec<Complex<T>>>,
}

impl<T: Real> FormalPowerFamily<T> {
    /// The normalized particular solution.
    pub fn f(&self) -> &GridFn<T> {
        &self.f
    }

    /// Its derivative on the same grid.
    pub fn df(&self) -> &GridFn<T> {
        &self.df
    }

    /// Anchor node index.
    pub fn i0(&self) -> usize {
        self.i0
    }

    /// Anchor abscissa `x0`.
    pub fn x0(&self) -> T {
        self.f.x(self.i0)
    }

    /// `h = f'(x0)`.
    pub fn h(&self) -> Complex<T> {
        self.h
    }

    /// Highest order built.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Recursive integral `X^(n)` (unscaled).
    pub fn x_power(&self, n: usize) -> GridFn<T> {
        self.unscale(&self.x_scaled[n], n)
    }

    /// Recursive integral `Xt^(n)` (unscaled).
    pub fn xt_power(&self, n: usize) -> GridFn<T> {
        self.unscale(&self.xt_scaled[n], n)
    }

    /// Formal power `phi_k` (unscaled).
    pub fn phi(&self, k: usize) -> GridFn<T> {
        self.unscale(&self.phi_scaled[k], k)
    }

    /// Formal power `psi_k` (unscaled).
    pub fn psi(&self, k: usize) -> GridFn<T> {
        self.unscale(&self.psi_scaled[k], k)
    }

    /// `phi_k / k!` rows; these are the series coefficients.
    pub(crate) fn phi_scaled(&self, k: usize) -> &[Complex<T>] {
        &self.phi_scaled[k]
    }

    pub(crate) fn psi_scaled(&self, k: usize) -> &[Complex<T>] {
        &self.psi_scaled[k]
    }

    fn unscale(&self, row: &[Complex<T>], n: usize) -> GridFn<T> {
        let mut fact = T::one();
        for m in 1..=n {
            fact = fact * T::from_usize(m).unwrap();
        }
        GridFn::from_parts(
            self.f.a(),
            self.f.b(),
            row.iter().map(|&v| v * fact).collect(),
        )
    }
}

/// Builds the formal-power family of orders `0..=order` from a non-vanishing
/// particular solution `f`, anchored at node `i0`. `f` is normalized to
/// `f(x0) = 1`; the derivative is taken from the spline interpolant.
pub fn build_powers<T: Real>(
    f: &GridFn<T>,
    i0: usize,
    order: usize,
) -> Result<FormalPowerFamily<T>> {
    let df = grid::derivative(f)?;
    build_powers_with_derivative(f, &df, i0, order)
}

/// Same as [`build_powers`] with exact derivative samples supplied by the
/// caller (Picard and exponential constructions know `f'` to quadrature
/// accuracy, which beats differentiating the spline at the ends).
pub fn build_powers_with_derivative<T: Real>(
    f: &GridFn<T>,
    df: &GridFn<T>,
    i0: usize,
    order: usize,
) -> Result<FormalPowerFamily<T>> {
    f.check_same_grid(df)?;
    if i0 >= f.values().len() {
        return Err(Error::Input(format!("anchor node {i0} outside grid")));
    }
    let f0 = f.values()[i0];
    if f0.norm() < r::<T>(MIN_ABS_F) {
        return Err(Error::SingularSolution(format!(
            "|f(x0)| = {} below {MIN_ABS_F}",
            f0.norm()
        )));
    }
    let fnorm = f.map(|v| v / f0);
    let dfnorm = df.map(|v| v / f0);
    let min_abs = fnorm
        .values()
        .iter()
        .map(|v| v.norm())
        .fold(T::infinity(), T::min);
    if min_abs < r::<T>(MIN_ABS_F) {
        return Err(Error::SingularSolution(format!(
            "min |f| = {min_abs} below {MIN_ABS_F} after normalization"
        )));
    }

    let one = Complex::new(T::one(), T::zero());
    let f2: Vec<Complex<T>> = fnorm.values().iter().map(|&v| v * v).collect();
    let inv_f2: Vec<Complex<T>> = f2.iter().map(|&v| one / v).collect();
    let n_nodes = fnorm.values().len();

    let mut x_scaled = Vec::with_capacity(order + 1);
    let mut xt_scaled = Vec::with_capacity(order + 1);
    x_scaled.push(vec![one; n_nodes]);
    xt_scaled.push(vec![one; n_nodes]);
    for n in 1..=order {
        // X uses weight (f^2)^((-1)^n): 1/f^2 when n is odd, f^2 when even.
        let (wx, wxt) = if n % 2 == 1 {
            (&inv_f2, &f2)
        } else {
            (&f2, &inv_f2)
        };
        x_scaled.push(scaled_step(&x_scaled[n - 1], wx, &fnorm, i0)?);
        xt_scaled.push(scaled_step(&xt_scaled[n - 1], wxt, &fnorm, i0)?);
    }

    let mut phi_scaled = Vec::with_capacity(order + 1);
    let mut psi_scaled = Vec::with_capacity(order + 1);
    for k in 0..=order {
        let (num_phi, num_psi) = if k % 2 == 1 {
            (&x_scaled[k], &xt_scaled[k])
        } else {
            (&xt_scaled[k], &x_scaled[k])
        };
        phi_scaled.push(
            num_phi
                .iter()
                .zip(fnorm.values())
                .map(|(&u, &fv)| u * fv)
                .collect(),
        );
        psi_scaled.push(
            num_psi
                .iter()
                .zip(fnorm.values())
                .map(|(&u, &fv)| u / fv)
                .collect(),
        );
    }

    let h = dfnorm.values()[i0];
    Ok(FormalPowerFamily {
        f: fnorm,
        df: dfnorm,
        i0,
        h,
        order,
        x_scaled,
        xt_scaled,
        phi_scaled,
        psi_scaled,
    })
}

fn scaled_step<T: Real>(
    prev: &[Complex<T>],
    weight: &[Complex<T>],
    template: &GridFn<T>,
    i0: usize,
) -> Result<Vec<Complex<T>>> {
    let integrand = GridFn::from_parts(
        template.a(),
        template.b(),
        prev.iter().zip(weight).map(|(&p, &w)| p * w).collect(),
    );
    Ok(grid::cumulative_integral(&integrand, i0)?.values().to_vec())
}

/// Builds a particular solution `f = v1 + i v2` of `f'' = q f` that stays
/// away from zero, where `v1, v2` solve the equation with data
/// `v1(x0) = 1, v1'(x0) = 0` and `v2(x0) = 0, v2'(x0) = 1`.
///
/// Each branch is the fixed point of the Volterra form
/// `v(x) = v(x0) + v'(x0)(x - x0) + int_{x0}^{x} (x - s) q(s) v(s) ds`,
/// found by Picard iteration: sweeps stop when the sup-change falls below
/// `tol` relative to the solution scale, or when the change stagnates at a
/// roundoff plateau (no improvement for eight sweeps at or below 1e-9
/// relative, widened to roundoff at the largest intermediate iterate when the
/// sweeps pass through large partial sums). For real `q` the two branches are
/// real, so `|f|^2 = v1^2 + v2^2`
/// cannot vanish; for complex `q` the result is checked and a
/// `SingularSolution` error raised if it dips below 1e-12.
pub fn build_nonvanishing_solution<T: Real>(
    q: &GridFn<T>,
    i0: usize,
    tol: f64,
    max_iter: usize,
) -> Result<GridFn<T>> {
    let (f, _) = build_nonvanishing_solution_with_derivative(q, i0, tol, max_iter)?;
    Ok(f)
}

/// Variant of [`build_nonvanishing_solution`] that also returns `f'`,
/// recovered from the converged iterate as
/// `v'(x) = v'(x0) + int_{x0}^{x} q v`.
pub fn build_nonvanishing_solution_with_derivative<T: Real>(
    q: &GridFn<T>,
    i0: usize,
    tol: f64,
    max_iter: usize,
) -> Result<(GridFn<T>, GridFn<T>)> {
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let i = Complex::new(T::zero(), T::one());
    let (v1, dv1) = picard_branch(q, i0, one, zero, tol, max_iter)?;
    let (v2, dv2) = picard_branch(q, i0, zero, one, tol, max_iter)?;
    let f = v1.zip(&v2, |a, b| a + i * b)?;
    let df = dv1.zip(&dv2, |a, b| a + i * b)?;
    let min_abs = f.values().iter().map(|v| v.norm()).fold(T::infinity(), T::min);
    if min_abs < r::<T>(MIN_ABS_F) {
        return Err(Error::SingularSolution(format!(
            "min |v1 + i v2| = {min_abs}; the combination vanishes on the grid"
        )));
    }
    Ok((f, df))
}

fn picard_branch<T: Real>(
    q: &GridFn<T>,
    i0: usize,
    v0: Complex<T>,
    dv0: Complex<T>,
    tol: f64,
    max_iter: usize,
) -> Result<(GridFn<T>, GridFn<T>)> {
    if max_iter == 0 {
        return Err(Error::Input("picard iteration cap must be positive".into()));
    }
    let x0 = q.x(i0);
    let tol = r::<T>(tol);
    let plateau = r::<T>(PICARD_PLATEAU);
    let affine = |i: usize| v0 + dv0 * Complex::new(q.x(i) - x0, T::zero());
    let mut v = GridFn::from_parts(
        q.a(),
        q.b(),
        (0..q.values().len()).map(affine).collect(),
    );
    let mut best = T::infinity();
    let mut stalled = 0usize;
    // Largest iterate seen across sweeps. Partial sums can swing far above
    // the limit (for |q| ~ c over a span L they peak near cosh(sqrt(c) L)),
    // and the fixed point cannot settle closer than roundoff at that peak,
    // so the plateau test is measured against it.
    let mut hump = T::one();
    for _ in 0..max_iter {
        let qv = v.zip(q, |a, b| a * b)?;
        // int (x - s) q v ds = x int q v - int s q v
        let a_int = grid::cumulative_integral(&qv, i0)?;
        let sqv = GridFn::from_parts(
            q.a(),
            q.b(),
            qv.values()
                .iter()
                .enumerate()
                .map(|(idx, &w)| w * Complex::new(q.x(idx), T::zero()))
                .collect(),
        );
        let b_int = grid::cumulative_integral(&sqv, i0)?;
        let next_vals: Vec<Complex<T>> = (0..q.values().len())
            .map(|idx| {
                affine(idx) + a_int.values()[idx] * Complex::new(q.x(idx), T::zero())
                    - b_int.values()[idx]
            })
            .collect();
        let next = GridFn::from_parts(q.a(), q.b(), next_vals);
        let d = next
            .values()
            .iter()
            .zip(v.values())
            .map(|(&x, &y)| (x - y).norm())
            .fold(T::zero(), T::max);
        v = next;
        let scale = T::one().max(v.sup_norm());
        hump = hump.max(v.sup_norm());
        if d <= tol * scale {
            let dv = derivative_from_iterate(q, &v, i0, dv0)?;
            return Ok((v, dv));
        }
        if d < best {
            best = d;
            stalled = 0;
        } else {
            stalled += 1;
            let floor = (plateau * scale).max(r::<T>(64.0) * T::epsilon() * hump);
            if stalled >= PICARD_STALL && best <= floor {
                // Fixed-point roundoff plateau: no further digits available.
                let dv = derivative_from_iterate(q, &v, i0, dv0)?;
                return Ok((v, dv));
            }
        }
    }
    Err(Error::Convergence(format!(
        "picard iteration still changing by {best} after {max_iter} sweeps"
    )))
}

fn derivative_from_iterate<T: Real>(
    q: &GridFn<T>,
    v: &GridFn<T>,
    i0: usize,
    dv0: Complex<T>,
) -> Result<GridFn<T>> {
    let qv = v.zip(q, |a, b| a * b)?;
    let int_qv = grid::cumulative_integral(&qv, i0)?;
    Ok(int_qv.map(|w| w + dv0))
}
