//! Darboux transformations: given a non-vanishing solution `f` of
//! `f'' = q1 f`, the partner potential `q2 = 2(f'/f)^2 - q1` admits `1/f` as
//! a particular solution, and the transmutation kernel of the partner
//! operator comes from the original kernel by a single integral:
//!
//! ```text
//! K2(x,t;-h) = -(1/f(x)) ( int_{-t}^{x} dK1/dt (s,t;h) f(s) ds + (h/2) f(-t) )
//! ```
//!
//! with `h = f'(0)`, `f(0) = 1`. Iterating with `f_n = (x+1)^{n+1}` walks the
//! ladder of operators `d^2/dx^2 - n(n+1)/(x+1)^2` on rational kernels.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::{cumulative_integral, derivative, GridFn};
use crate::transmutation::{check_axis_match, reparametrize_h, Kernel2D};
use crate::{r, Real};

/// A potential, a distinguished solution, and both transmutation kernels of
/// a Darboux-connected pair of operators. `k1` carries parameter `h = f'(0)`
/// for `q1`; `k2` carries `-h` for `q2`.
#[derive(Debug, Clone)]
pub struct DarbouxPair<T: Real> {
    pub f: GridFn<T>,
    pub q1: GridFn<T>,
    pub q2: GridFn<T>,
    pub k1: Kernel2D<T>,
    pub k2: Kernel2D<T>,
}

impl<T: Real> DarbouxPair<T> {
    /// Assembles the pair from its independent data, deriving `q2` and `k2`.
    /// `f`, `q1` and the kernel axis must share one grid; `f(0)` must be 1
    /// and `f'(0)` must match the kernel tag.
    pub fn build(f: GridFn<T>, q1: GridFn<T>, k1: Kernel2D<T>) -> Result<Self> {
        f.check_same_grid(&q1)?;
        let (q2, _) = darboux_potential(&f, &q1)?;
        let k2 = darboux_kernel(&k1, &f)?;
        Ok(DarbouxPair { f, q1, q2, k1, k2 })
    }

    /// Largest deviations of both kernels from their boundary data:
    /// `(q1, +h)` for `k1` and `(q2, -h)` for `k2`, each as
    /// (on-diagonal, anti-diagonal) sups.
    pub fn diagonal_report(&self) -> Result<((T, T), (T, T))> {
        Ok((
            self.k1.diagonal_mismatch(&self.q1)?,
            self.k2.diagonal_mismatch(&self.q2)?,
        ))
    }
}

fn check_nonvanishing<T: Real>(f: &GridFn<T>) -> Result<()> {
    let floor = r::<T>(1e-14) * f.sup_norm();
    if f.values().iter().any(|v| v.norm() <= floor) {
        return Err(Error::Input(
            "distinguished solution vanishes (or nearly vanishes) on the grid".into(),
        ));
    }
    Ok(())
}

/// Partner potential `q2 = 2(f'/f)^2 - q1` of a non-vanishing solution `f`
/// of `f'' = q1 f`, returned together with `1/f`, which solves the new
/// equation `u'' = q2 u`. `f'` is the derivative of the spline interpolant.
pub fn darboux_potential<T: Real>(
    f: &GridFn<T>,
    q1: &GridFn<T>,
) -> Result<(GridFn<T>, GridFn<T>)> {
    f.check_same_grid(q1)?;
    check_nonvanishing(f)?;
    let df = derivative(f)?;
    let two = Complex::new(r::<T>(2.0), T::zero());
    let ratio = df.zip(f, |d, v| d / v)?;
    let q2 = ratio.zip(q1, |g, q| two * g * g - q)?;
    let one = Complex::new(T::one(), T::zero());
    Ok((q2, f.map(|v| one / v)))
}

/// First derivative along rows (in t) by second-order differences: centered
/// in the interior, one-sided three-point at the two edge columns.
fn d_dt<T: Real>(k: &Kernel2D<T>) -> Vec<Complex<T>> {
    let n = k.nodes();
    let inv_2h = T::one() / (k.step() + k.step());
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let v = |j: usize| k.value(i, j);
        for j in 0..n {
            let num = if j == 0 {
                -v(0) * r::<T>(3.0) + v(1) * r::<T>(4.0) - v(2)
            } else if j == n - 1 {
                v(n - 1) * r::<T>(3.0) - v(n - 2) * r::<T>(4.0) + v(n - 3)
            } else {
                v(j + 1) - v(j - 1)
            };
            out.push(num * inv_2h);
        }
    }
    out
}

/// Transforms the kernel of `T_h` for `q1` into the kernel of the partner
/// operator's `T_{-h}`, using the distinguished solution `f` (sampled on the
/// kernel axis, `f(0) = 1`, `f'(0)` equal to the kernel tag).
pub fn darboux_kernel<T: Real>(k1: &Kernel2D<T>, f: &GridFn<T>) -> Result<Kernel2D<T>> {
    let n = k1.nodes();
    let a = k1.half_width();
    check_axis_match(-a, a, n, f)?;
    check_nonvanishing(f)?;
    let center = (n - 1) / 2;
    let one = Complex::new(T::one(), T::zero());
    let tol = r::<T>(1e-6);
    if (f.values()[center] - one).norm() > tol {
        return Err(Error::Input(format!(
            "distinguished solution must equal 1 at x = 0, got {}",
            f.values()[center]
        )));
    }
    let df0 = derivative(f)?.values()[center];
    if (df0 - k1.h()).norm() > tol * (T::one() + k1.h().norm()) {
        return Err(Error::Input(format!(
            "slope of the distinguished solution at 0 ({df0}) does not match the kernel tag {}",
            k1.h()
        )));
    }

    let dt = d_dt(k1);
    let half_h = k1.h() * r::<T>(0.5);
    let mut values = vec![Complex::new(T::zero(), T::zero()); n * n];
    let mut column = vec![Complex::new(T::zero(), T::zero()); n];
    for j in 0..n {
        for i in 0..n {
            column[i] = dt[i * n + j] * f.values()[i];
        }
        let g = GridFn::from_parts(-a, a, column.clone());
        // lower limit -t_j sits at the reflected node
        let cumulative = cumulative_integral(&g, n - 1 - j)?;
        let boundary = half_h * f.values()[n - 1 - j];
        for i in 0..n {
            values[i * n + j] = -(cumulative.values()[i] + boundary) / f.values()[i];
        }
    }
    Kernel2D::new(a, -k1.h(), n, values)
}

/// Iterates the transformation up the ladder of potentials
/// `q_n = n(n+1)/(x+1)^2` on `[-a, a]`, `a < 1`, starting from the zero
/// kernel. Entry `n` of the result is the kernel of `q_n` with tag `-n`;
/// each step re-tags to `n+1` (the slope of `f_n = (x+1)^{n+1}` at 0) and
/// transforms with `f_n`.
pub fn darboux_chain<T: Real>(n_max: usize, a: T, nodes: usize) -> Result<Vec<Kernel2D<T>>> {
    if !(a > T::zero()) || !(a < T::one()) {
        return Err(Error::Input(format!(
            "half-width {a} must lie in (0, 1) to keep the pole at -1 outside"
        )));
    }
    let zero = Complex::new(T::zero(), T::zero());
    let mut chain = vec![Kernel2D::new(a, zero, nodes, vec![zero; nodes * nodes])?];
    let center = (nodes - 1) / 2;
    for n in 0..n_max {
        let power = (n + 1) as i32;
        let mut f = GridFn::from_fn(-a, a, nodes - 1, |x: T| {
            Complex::new((x + T::one()).powi(power), T::zero())
        })?;
        // renormalize so f(0) = 1 exactly at the node
        let at_zero = f.values()[center];
        f = f.map(|v| v / at_zero);
        let h_next = Complex::new(T::from_usize(n + 1).unwrap(), T::zero());
        let retagged = reparametrize_h(chain.last().unwrap(), h_next)?;
        chain.push(darboux_kernel(&retagged, &f)?);
    }
    Ok(chain)
}

/// Derivatives interleaved with the weights `f^2` and `1/f^2`:
/// `g_0 = g`, `g_k = (f^2)^{odd k ? +1 : -1} g_{k-1}'`. Returns `g_0..=g_n`.
pub fn generalized_derivatives<T: Real>(
    g: &GridFn<T>,
    f: &GridFn<T>,
    n: usize,
) -> Result<Vec<GridFn<T>>> {
    g.check_same_grid(f)?;
    check_nonvanishing(f)?;
    let mut out = vec![g.clone()];
    for k in 1..=n {
        let d = derivative(out.last().unwrap())?;
        let weighted = if k % 2 == 1 {
            d.zip(f, |dv, fv| dv * fv * fv)?
        } else {
            d.zip(f, |dv, fv| dv / (fv * fv))?
        };
        out.push(weighted);
    }
    Ok(out)
}
