//! Transmutation kernels K(x, t; h) relating `d^2/dx^2` to `d^2/dx^2 - q`,
//! and the Volterra operators they induce.
//!
//! The operator `T_h u (x) = u(x) + int K(x,t;h) u(t) dt` (over `[-x, x]`)
//! maps solutions of `v'' + omega^2 v = 0` into solutions of
//! `u'' - q u + omega^2 u = 0` and powers `x^k` into the formal powers
//! `phi_k` of the particular solution with `f'(0) = h`. The kernel is the
//! unique solution of a Goursat problem for the hyperbolic equation
//! `K_xx - q K = K_tt` with data `K(x, x) = h/2 + (1/2) int_0^x q` and
//! `K(x, -x) = h/2`.
//!
//! Kernels are stored on the full square `[-a, a]^2` (rows = x, columns = t):
//! the Darboux constructions integrate K outside the classical triangle
//! `|t| <= |x|`, so the triangle alone is not enough.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::bessel::{i0_sqrt, j1_ratio};
use crate::grid::{cumulative_integral, GridFn};
use crate::{r, Real};

/// Transmutation kernel sampled on the full square `[-a, a]^2`, tagged with
/// its parameter `h`. Rows index x, columns index t, both on the same axis
/// of `nodes` points (odd, so that 0 and sign reflection land on nodes).
#[derive(Debug, Clone)]
pub struct Kernel2D<T: Real> {
    a: T,
    h: Complex<T>,
    nodes: usize,
    values: Vec<Complex<T>>,
}

impl<T: Real> Kernel2D<T> {
    /// Wraps a value matrix; checks shape, finiteness, and the odd node
    /// count the reflection-based operations need.
    pub fn new(a: T, h: Complex<T>, nodes: usize, values: Vec<Complex<T>>) -> Result<Self> {
        if !(a > T::zero()) || !a.is_finite() {
            return Err(Error::Input(format!("kernel half-width {a} must be positive")));
        }
        if nodes < 5 || nodes % 2 == 0 {
            return Err(Error::Input(format!(
                "kernel needs an odd node count of at least 5 per axis, got {nodes}"
            )));
        }
        if values.len() != nodes * nodes {
            return Err(Error::Input(format!(
                "kernel value count {} does not match {nodes}x{nodes}",
                values.len()
            )));
        }
        if !h.re.is_finite() || !h.im.is_finite() {
            return Err(Error::Input("kernel parameter h must be finite".into()));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Input("non-finite kernel value".into()));
        }
        Ok(Kernel2D { a, h, nodes, values })
    }

    pub fn half_width(&self) -> T {
        self.a
    }

    pub fn h(&self) -> Complex<T> {
        self.h
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Axis coordinate of node `i` (shared by rows and columns).
    pub fn axis(&self, i: usize) -> T {
        let m = T::from_usize(self.nodes - 1).unwrap();
        self.a * (T::from_usize(2 * i).unwrap() / m - T::one())
    }

    pub fn step(&self) -> T {
        (self.a + self.a) / T::from_usize(self.nodes - 1).unwrap()
    }

    pub fn value(&self, i: usize, j: usize) -> Complex<T> {
        self.values[i * self.nodes + j]
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    fn row(&self, i: usize) -> &[Complex<T>] {
        &self.values[i * self.nodes..(i + 1) * self.nodes]
    }

    /// Largest deviations from the two diagonal conditions,
    /// `(sup |K(x,x) - h/2 - (1/2) int_0^x q|, sup |K(x,-x) - h/2|)`.
    /// `q` may live on any grid covering `[-a, a]`.
    pub fn diagonal_mismatch(&self, q: &GridFn<T>) -> Result<(T, T)> {
        let eps = r::<T>(1e-9) * (T::one() + self.a);
        if q.a() > -self.a + eps || q.b() < self.a - eps {
            return Err(Error::Input(
                "potential does not cover the kernel square".into(),
            ));
        }
        // Quadrature for int_0^x q runs on a 4x-refined axis so the check
        // measures the kernel, not its own integration error.
        let refine = 4;
        let fine_n = refine * (self.nodes - 1) + 1;
        let step = (self.a + self.a) / T::from_usize(fine_n - 1).unwrap();
        let fine_axis: Vec<T> = (0..fine_n)
            .map(|k| -self.a + step * T::from_usize(k).unwrap())
            .collect();
        let q_fine = GridFn::from_parts(-self.a, self.a, q.sample_many(&fine_axis)?);
        let cumulative = cumulative_integral(&q_fine, (fine_n - 1) / 2)?;
        let half = r::<T>(0.5);
        let mut on = T::zero();
        let mut anti = T::zero();
        for i in 0..self.nodes {
            let want_on = self.h * half + cumulative.values()[refine * i] * half;
            on = on.max((self.value(i, i) - want_on).norm());
            anti = anti.max((self.value(i, self.nodes - 1 - i) - self.h * half).norm());
        }
        Ok((on, anti))
    }
}

/// Kernel restricted to the half-domain `0 <= t, x <= a`: the cosine and
/// sine kernels live here. Rows index x, columns index t.
#[derive(Debug, Clone)]
pub struct HalfKernel2D<T: Real> {
    a: T,
    nodes: usize,
    values: Vec<Complex<T>>,
}

impl<T: Real> HalfKernel2D<T> {
    pub fn new(a: T, nodes: usize, values: Vec<Complex<T>>) -> Result<Self> {
        if !(a > T::zero()) || !a.is_finite() {
            return Err(Error::Input(format!("kernel half-width {a} must be positive")));
        }
        if nodes < 4 {
            return Err(Error::Input(
                "half kernel needs at least 4 nodes per axis".into(),
            ));
        }
        if values.len() != nodes * nodes {
            return Err(Error::Input(format!(
                "kernel value count {} does not match {nodes}x{nodes}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Input("non-finite kernel value".into()));
        }
        Ok(HalfKernel2D { a, nodes, values })
    }

    pub fn half_width(&self) -> T {
        self.a
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Axis coordinate of node `i` on `[0, a]`.
    pub fn axis(&self, i: usize) -> T {
        self.a * T::from_usize(i).unwrap() / T::from_usize(self.nodes - 1).unwrap()
    }

    pub fn value(&self, i: usize, j: usize) -> Complex<T> {
        self.values[i * self.nodes + j]
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    fn row(&self, i: usize) -> &[Complex<T>] {
        &self.values[i * self.nodes..(i + 1) * self.nodes]
    }
}

/// Reference frequency for operator mapping checks: carries `omega` and
/// produces the waves `T` is expected to act on.
#[derive(Debug, Clone, Copy)]
pub struct SpectralProbe<T: Real> {
    pub omega: Complex<T>,
}

impl<T: Real> SpectralProbe<T> {
    /// `e^{i omega x}` sampled on `[-a, a]`.
    pub fn exponential(&self, a: T, intervals: usize) -> Result<GridFn<T>> {
        let i_omega = Complex::new(T::zero(), T::one()) * self.omega;
        GridFn::from_fn(-a, a, intervals, |x| (i_omega * x).exp())
    }
}

/// Analytic kernel of the constant-coefficient operator `d^2/dx^2 + c`
/// (potential `q = -c`):
///
/// ```text
/// K(x,t;h) = -(c(x+t)/2) j1r(c(x^2-t^2)) + (h/2) J0(sqrt(c(x^2-t^2)))
/// ```
///
/// where `j1r(w) = J1(sqrt w)/sqrt w`. Both factors are entire in their
/// squared argument, so the classical removable singularity at `t = x` never
/// appears; the h-term is the change-of-parameter integral in closed form
/// (`int J1 = 1 - J0`).
pub fn kernel_constant_q<T: Real>(
    c: Complex<T>,
    h: Complex<T>,
    a: T,
    nodes: usize,
) -> Result<Kernel2D<T>> {
    if !(a > T::zero()) || !a.is_finite() {
        return Err(Error::Input(format!("half-width {a} must be positive")));
    }
    let half = r::<T>(0.5);
    let step = (a + a) / T::from_usize(nodes.max(2) - 1).unwrap();
    let axis = |i: usize| -a + step * T::from_usize(i).unwrap();
    let mut values = Vec::with_capacity(nodes * nodes);
    for i in 0..nodes {
        let x = axis(i);
        for j in 0..nodes {
            let t = axis(j);
            let w = c * Complex::new(x * x - t * t, T::zero());
            let base = -c * Complex::new((x + t) * half, T::zero()) * j1_ratio(w)?;
            let shift = h * half * i0_sqrt(-w)?;
            values.push(base + shift);
        }
    }
    Kernel2D::new(a, h, nodes, values)
}

const GOURSAT_MAX_ITER: usize = 200;

/// Solves the Goursat problem for the kernel of `T_h` over the potential `q`
/// by Picard iteration on the characteristic coordinates `u = (x+t)/2`,
/// `v = (x-t)/2`:
///
/// ```text
/// H(u,v) = H(u,0) + H(0,v) - H(0,0) + int_0^u int_0^v q(s+tau) H(s,tau) dtau ds
/// ```
///
/// iterated on the full `(u, v)` square until the sup-change drops below
/// `tol`, then mapped back by `K(x,t) = H((x+t)/2, (x-t)/2)`. Values of `q`
/// between its nodes come from spline interpolation; arguments beyond its
/// interval (only reachable outside the diamond that maps onto the kernel
/// square, where H does not influence K) clamp to the endpoint values.
pub fn goursat_kernel<T: Real>(
    q: &GridFn<T>,
    h: Complex<T>,
    nodes: usize,
    tol: f64,
) -> Result<Kernel2D<T>> {
    let span = q.b() - q.a();
    if (q.a() + q.b()).abs() > r::<T>(1e-9) * (T::one() + span) {
        return Err(Error::Input(
            "potential grid must be symmetric about 0".into(),
        ));
    }
    if nodes < 5 || nodes % 2 == 0 {
        return Err(Error::Input(format!(
            "kernel needs an odd node count of at least 5 per axis, got {nodes}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Input("tolerance must be positive".into()));
    }
    let a = q.b();
    let m = 2 * nodes - 1; // H-grid nodes per axis, spacing half the kernel step
    let center = nodes - 1;
    let delta = a / T::from_usize(center).unwrap();
    let h_axis: Vec<T> = (0..m)
        .map(|k| -a + delta * T::from_usize(k).unwrap())
        .collect();

    // Boundary data: H(u, 0) = h/2 + (1/2) int_0^u q and H(0, v) = h/2, so
    // the inhomogeneous part B(u, v) depends on u alone.
    let half = r::<T>(0.5);
    let q_on_axis = GridFn::from_parts(-a, a, q.sample_many(&h_axis)?);
    let q_cumulative = cumulative_integral(&q_on_axis, center)?;
    let b_row: Vec<Complex<T>> = (0..m)
        .map(|k| h * half + q_cumulative.values()[k] * half)
        .collect();

    // q(s + tau) on the sum grid (clamped beyond [-a, a], see above).
    let sum_axis: Vec<T> = (0..2 * m - 1)
        .map(|k| -(a + a) + delta * T::from_usize(k).unwrap())
        .collect();
    let q_sum = q.sample_many(&sum_axis)?;

    let mut current: Vec<Complex<T>> = Vec::with_capacity(m * m);
    for iu in 0..m {
        for _ in 0..m {
            current.push(b_row[iu]);
        }
    }
    let tol_t = r::<T>(tol);
    let mut scratch_col = vec![Complex::new(T::zero(), T::zero()); m];
    for _ in 0..GOURSAT_MAX_ITER {
        // inner integral over tau at fixed s: cumulative along each row
        let mut inner = Vec::with_capacity(m * m);
        for is in 0..m {
            let row: Vec<Complex<T>> = (0..m)
                .map(|jt| q_sum[is + jt] * current[is * m + jt])
                .collect();
            let g = GridFn::from_parts(-a, a, row);
            inner.extend_from_slice(cumulative_integral(&g, center)?.values());
        }
        // outer integral over s at fixed v: cumulative along each column
        let mut next = vec![Complex::new(T::zero(), T::zero()); m * m];
        for jv in 0..m {
            for is in 0..m {
                scratch_col[is] = inner[is * m + jv];
            }
            let g = GridFn::from_parts(-a, a, scratch_col.clone());
            let col = cumulative_integral(&g, center)?;
            for is in 0..m {
                next[is * m + jv] = b_row[is] + col.values()[is];
            }
        }
        let mut diff = T::zero();
        let mut scale = T::one();
        for (new, old) in next.iter().zip(&current) {
            diff = diff.max((new - old).norm());
            scale = scale.max(new.norm());
        }
        current = next;
        if diff <= tol_t * scale {
            // K(x_i, t_j) = H at u-index i+j, v-index i-j+(nodes-1).
            let mut values = Vec::with_capacity(nodes * nodes);
            for i in 0..nodes {
                for j in 0..nodes {
                    values.push(current[(i + j) * m + (i + center - j)]);
                }
            }
            return Kernel2D::new(a, h, nodes, values);
        }
    }
    Err(Error::Convergence(format!(
        "goursat iteration did not reach tolerance {tol} within {GOURSAT_MAX_ITER} sweeps"
    )))
}

/// Changes the parameter of a kernel:
///
/// ```text
/// K(x,t;h') = (h'-h)/2 + K(x,t;h) + ((h'-h)/2) int_t^x (K(x,s;h) - K(x,-s;h)) ds
/// ```
pub fn reparametrize_h<T: Real>(k: &Kernel2D<T>, h_new: Complex<T>) -> Result<Kernel2D<T>> {
    let n = k.nodes();
    let half_shift = (h_new - k.h()) * r::<T>(0.5);
    let center = (n - 1) / 2;
    let mut values = Vec::with_capacity(n * n);
    for i in 0..n {
        let row = k.row(i);
        let odd_part: Vec<Complex<T>> = (0..n).map(|j| row[j] - row[n - 1 - j]).collect();
        let g = GridFn::from_parts(-k.half_width(), k.half_width(), odd_part);
        let cumulative = cumulative_integral(&g, center)?;
        let at_x = cumulative.values()[i];
        for j in 0..n {
            values.push(half_shift + row[j] + half_shift * (at_x - cumulative.values()[j]));
        }
    }
    Kernel2D::new(k.half_width(), h_new, n, values)
}

/// Splits the `h = 0` kernel into the cosine kernel (with free parameter
/// `h_c`) and the sine kernel on the half-domain `0 <= t, x <= a`:
///
/// ```text
/// Kc(x,t) = h_c + K(x,t) + K(x,-t) + h_c int_t^x (K(x,s) - K(x,-s)) ds
/// Ks(x,t) = K(x,t) - K(x,-t)
/// ```
///
/// Applied to the even/odd parts of `u` (over `[0, x]`) these reproduce
/// `T_{h_c} u`; the sine kernel does not depend on any parameter.
pub fn cos_sin_kernels<T: Real>(
    k: &Kernel2D<T>,
    h_c: Complex<T>,
) -> Result<(HalfKernel2D<T>, HalfKernel2D<T>)> {
    if k.h().norm() > r::<T>(1e-12) {
        return Err(Error::Input(
            "cosine/sine split is defined for the h = 0 kernel".into(),
        ));
    }
    let n = k.nodes();
    let center = (n - 1) / 2;
    let n_half = center + 1;
    let mut kc = Vec::with_capacity(n_half * n_half);
    let mut ks = Vec::with_capacity(n_half * n_half);
    for i in center..n {
        let row = k.row(i);
        let odd_part: Vec<Complex<T>> = (0..n).map(|j| row[j] - row[n - 1 - j]).collect();
        let g = GridFn::from_parts(-k.half_width(), k.half_width(), odd_part);
        let cumulative = cumulative_integral(&g, center)?;
        let at_x = cumulative.values()[i];
        for j in center..n {
            let even = row[j] + row[n - 1 - j];
            let odd = row[j] - row[n - 1 - j];
            kc.push(h_c + even + h_c * (at_x - cumulative.values()[j]));
            ks.push(odd);
        }
    }
    Ok((
        HalfKernel2D::new(k.half_width(), n_half, kc)?,
        HalfKernel2D::new(k.half_width(), n_half, ks)?,
    ))
}

/// Integration range of [`apply_kernel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApplyMode {
    /// `(Tu)(x) = u(x) + int_{-x}^{x} K(x,t) u(t) dt`, `u` on `[-a, a]`.
    Full,
    /// `(Tu)(x) = u(x) + int_0^x K(x,t) u(t) dt`, `u` on `[0, a]`.
    Half,
}

pub(crate) fn check_axis_match<T: Real>(lo: T, hi: T, n: usize, u: &GridFn<T>) -> Result<()> {
    let tol = r::<T>(1e-9) * (T::one() + hi - lo);
    if u.values().len() != n || (u.a() - lo).abs() > tol || (u.b() - hi).abs() > tol {
        return Err(Error::Input(format!(
            "function grid [{}, {}] with {} nodes does not match the kernel axis [{lo}, {hi}] with {n} nodes",
            u.a(),
            u.b(),
            u.values().len()
        )));
    }
    Ok(())
}

/// Applies the Volterra operator of a full-square kernel to `u`.
pub fn apply_kernel<T: Real>(
    k: &Kernel2D<T>,
    u: &GridFn<T>,
    mode: ApplyMode,
) -> Result<GridFn<T>> {
    let n = k.nodes();
    let a = k.half_width();
    let center = (n - 1) / 2;
    match mode {
        ApplyMode::Full => {
            check_axis_match(-a, a, n, u)?;
            let mut out = Vec::with_capacity(n);
            for i in 0..n {
                let row = k.row(i);
                let integrand: Vec<Complex<T>> =
                    (0..n).map(|j| row[j] * u.values()[j]).collect();
                let g = GridFn::from_parts(-a, a, integrand);
                let cumulative = cumulative_integral(&g, center)?;
                out.push(u.values()[i] + cumulative.values()[i] - cumulative.values()[n - 1 - i]);
            }
            Ok(GridFn::from_parts(-a, a, out))
        }
        ApplyMode::Half => {
            let n_half = center + 1;
            check_axis_match(T::zero(), a, n_half, u)?;
            let mut out = Vec::with_capacity(n_half);
            for i in 0..n_half {
                let row = k.row(center + i);
                let integrand: Vec<Complex<T>> = (0..n_half)
                    .map(|j| row[center + j] * u.values()[j])
                    .collect();
                let g = GridFn::from_parts(T::zero(), a, integrand);
                let cumulative = cumulative_integral(&g, 0)?;
                out.push(u.values()[i] + cumulative.values()[i]);
            }
            Ok(GridFn::from_parts(T::zero(), a, out))
        }
    }
}

/// Applies a half-domain (cosine or sine) kernel: integration over `[0, x]`.
pub fn apply_half_kernel<T: Real>(k: &HalfKernel2D<T>, u: &GridFn<T>) -> Result<GridFn<T>> {
    let n = k.nodes();
    let a = k.half_width();
    check_axis_match(T::zero(), a, n, u)?;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let row = k.row(i);
        let integrand: Vec<Complex<T>> = (0..n).map(|j| row[j] * u.values()[j]).collect();
        let g = GridFn::from_parts(T::zero(), a, integrand);
        let cumulative = cumulative_integral(&g, 0)?;
        out.push(u.values()[i] + cumulative.values()[i]);
    }
    Ok(GridFn::from_parts(T::zero(), a, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal_powers::build_powers_with_derivative;
    use crate::grid::bessel::{bessel_eval, BesselKind};

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    /// q = 2/(x+1)^2 with its decaying particular solution f = 1/(x+1),
    /// f(0) = 1, f'(0) = -1; the stock worked example for rational kernels.
    fn rational_potential(m: usize) -> GridFn<f64> {
        GridFn::from_fn(-0.5, 0.5, m, |x: f64| c(2.0 / ((x + 1.0) * (x + 1.0)), 0.0)).unwrap()
    }

    fn rational_kernel_h_minus_one(nodes: usize) -> Kernel2D<f64> {
        let step = 1.0 / (nodes - 1) as f64;
        let mut values = Vec::new();
        for i in 0..nodes {
            let x = -0.5 + step * i as f64;
            for j in 0..nodes {
                let t = -0.5 + step * j as f64;
                values.push(c((t - 1.0) / (2.0 * (x + 1.0)), 0.0));
            }
        }
        Kernel2D::new(0.5, c(-1.0, 0.0), nodes, values).unwrap()
    }

    #[test]
    fn constant_potential_kernel_matches_reference_points() {
        let k = kernel_constant_q(c(1.0, 0.0), c(0.0, 0.0), 1.0, 201).unwrap();
        // diagonal condition with q = -c
        for i in 0..201 {
            let x = k.axis(i);
            assert!((k.value(i, i) - c(-x / 2.0, 0.0)).norm() < 1e-14);
            assert!(k.value(i, 200 - i).norm() < 1e-14);
        }
        // value at x = 1, t = 0 (frozen high-precision reference)
        let got = k.value(200, 100);
        assert!((got - c(-0.22002529287246676, 0.0)).norm() < 1e-9, "{got}");
    }

    #[test]
    fn zero_potential_kernel_is_constant_half_h() {
        let k = kernel_constant_q(c(0.0, 0.0), c(1.0, 0.0), 0.8, 41).unwrap();
        for v in k.values() {
            assert!((v - c(0.5, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn goursat_zero_potential_gives_zero_kernel() {
        let q = GridFn::constant(-1.0, 1.0, 400, c(0.0, 0.0));
        let k = goursat_kernel(&q, c(0.0, 0.0), 41, 1e-12).unwrap();
        for v in k.values() {
            assert!(v.norm() < 1e-14);
        }
    }

    #[test]
    fn goursat_reproduces_the_rational_kernel() {
        let q = rational_potential(800);
        let k = goursat_kernel(&q, c(-1.0, 0.0), 101, 1e-12).unwrap();
        let mut worst = 0.0f64;
        for i in 0..101 {
            let x = k.axis(i);
            for j in 0..101 {
                let t = k.axis(j);
                let want = (t - 1.0) / (2.0 * (x + 1.0));
                worst = worst.max((k.value(i, j) - c(want, 0.0)).norm());
            }
        }
        assert!(worst < 1e-6, "sup error {worst}");
        // Goursat boundary data re-verified on the finished kernel.
        let (on, anti) = k.diagonal_mismatch(&q).unwrap();
        assert!(on < 1e-8 && anti < 1e-8, "diagonals: {on}, {anti}");
    }

    #[test]
    fn goursat_agrees_with_analytic_constant_kernel() {
        let q = GridFn::constant(-0.6, 0.6, 600, c(1.5, 0.0));
        let numeric = goursat_kernel(&q, c(0.0, 0.0), 81, 1e-12).unwrap();
        // q = +1.5 corresponds to the operator d^2/dx^2 - 1.5, i.e. c = -1.5.
        let analytic = kernel_constant_q(c(-1.5, 0.0), c(0.0, 0.0), 0.6, 81).unwrap();
        let worst = numeric
            .values()
            .iter()
            .zip(analytic.values())
            .map(|(na, an)| (na - an).norm())
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-6, "sup difference {worst}");
    }

    #[test]
    fn reparametrization_shifts_preserve_and_invert() {
        let k1 = rational_kernel_h_minus_one(201);
        // identity at the same parameter
        let same = reparametrize_h(&k1, c(-1.0, 0.0)).unwrap();
        let drift = k1
            .values()
            .iter()
            .zip(same.values())
            .map(|(u, v)| (u - v).norm())
            .fold(0.0f64, f64::max);
        assert!(drift < 1e-15);
        // worked shift to h = 0
        let k0 = reparametrize_h(&k1, c(0.0, 0.0)).unwrap();
        let mut worst = 0.0f64;
        for i in 0..201 {
            let x = k0.axis(i);
            for j in 0..201 {
                let t = k0.axis(j);
                let want = (2.0 * x + 2.0 * t + x * x - t * t) / (4.0 * (x + 1.0));
                worst = worst.max((k0.value(i, j) - c(want, 0.0)).norm());
            }
        }
        assert!(worst < 1e-8, "sup error {worst}");
        // round trip through a complex parameter
        let k_back = reparametrize_h(&reparametrize_h(&k1, c(0.4, -0.3)).unwrap(), c(-1.0, 0.0))
            .unwrap();
        let round = k1
            .values()
            .iter()
            .zip(k_back.values())
            .map(|(u, v)| (u - v).norm())
            .fold(0.0f64, f64::max);
        assert!(round < 1e-10, "round trip error {round}");
    }

    #[test]
    fn cosine_sine_split_of_the_zero_kernel() {
        let k = kernel_constant_q(c(0.0, 0.0), c(0.0, 0.0), 1.0, 41).unwrap();
        let (kc, ks) = cos_sin_kernels(&k, c(0.7, 0.0)).unwrap();
        for v in kc.values() {
            assert!((v - c(0.7, 0.0)).norm() < 1e-14);
        }
        for v in ks.values() {
            assert!(v.norm() < 1e-14);
        }
        let tagged = kernel_constant_q(c(2.0, 0.0), c(1.0, 0.0), 1.0, 41).unwrap();
        assert!(cos_sin_kernels(&tagged, c(0.0, 0.0)).is_err());
    }

    #[test]
    fn sine_kernel_matches_bessel_form_and_vanishes_at_zero() {
        let k = kernel_constant_q(c(1.0, 0.0), c(0.0, 0.0), 2.0, 161).unwrap();
        let (_, ks) = cos_sin_kernels(&k, c(0.0, 0.0)).unwrap();
        for i in 0..ks.nodes() {
            let x = ks.axis(i);
            assert!(ks.value(i, 0).norm() < 1e-14, "Ks(x, 0) at x = {x}");
            for j in 1..ks.nodes() {
                let t = ks.axis(j);
                if (x - t).abs() < 1e-12 {
                    continue;
                }
                // independent route through J1 itself rather than the ratio
                let z = (x * x - t * t).abs().sqrt();
                let j1 = bessel_eval(BesselKind::J1, c(z, 0.0)).unwrap();
                let want = if x > t {
                    -t * z * j1.re / (x * x - t * t)
                } else {
                    // x^2 < t^2: sqrt(c(x^2-t^2)) imaginary, J1 flips to I1
                    let i1 = bessel_eval(BesselKind::I1, c(z, 0.0)).unwrap();
                    -t * z * i1.re / (t * t - x * x)
                };
                assert!(
                    (ks.value(i, j) - c(want, 0.0)).norm() < 1e-12,
                    "x = {x}, t = {t}"
                );
            }
        }
    }

    #[test]
    fn zero_kernel_application_is_identity() {
        let k = kernel_constant_q(c(0.0, 0.0), c(0.0, 0.0), 1.0, 81).unwrap();
        let u = GridFn::from_fn(-1.0, 1.0, 80, |x: f64| c((2.0 * x).sin(), x)).unwrap();
        let tu = apply_kernel(&k, &u, ApplyMode::Full).unwrap();
        for (a, b) in tu.values().iter().zip(u.values()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn sine_operator_turns_one_into_bessel_j0() {
        // T_s[1](x) = J0(x sqrt(c)) for the constant-coefficient operator.
        let k = kernel_constant_q(c(1.0, 0.0), c(0.0, 0.0), 2.0, 401).unwrap();
        let (_, ks) = cos_sin_kernels(&k, c(0.0, 0.0)).unwrap();
        let one = GridFn::constant(0.0, 2.0, ks.nodes() - 1, c(1.0, 0.0));
        let ts1 = apply_half_kernel(&ks, &one).unwrap();
        let mut worst = 0.0f64;
        for i in 0..ks.nodes() {
            let x = ks.axis(i);
            let want = bessel_eval(BesselKind::J0, c(x, 0.0)).unwrap();
            worst = worst.max((ts1.values()[i] - want).norm());
        }
        assert!(worst < 1e-6, "sup error {worst}");
    }

    #[test]
    fn rational_operator_maps_square_to_known_image() {
        let k1 = rational_kernel_h_minus_one(401);
        let u = GridFn::from_fn(-0.5, 0.5, 400, |x: f64| c(x * x, 0.0)).unwrap();
        let tu = apply_kernel(&k1, &u, ApplyMode::Full).unwrap();
        let mut worst = 0.0f64;
        for i in 0..=400 {
            let x = tu.x(i);
            let want = (2.0 * x * x * x + 3.0 * x * x) / (3.0 * (x + 1.0));
            worst = worst.max((tu.values()[i] - c(want, 0.0)).norm());
        }
        assert!(worst < 1e-8, "sup error {worst}");
    }

    #[test]
    fn kernel_maps_powers_to_formal_powers() {
        // T_h[x^k] = phi_k for the family whose f'(0) equals the kernel tag.
        let nodes = 201;
        let q = rational_potential(800);
        let k1 = goursat_kernel(&q, c(-1.0, 0.0), nodes, 1e-12).unwrap();
        let f = GridFn::from_fn(-0.5, 0.5, nodes - 1, |x: f64| c(1.0 / (x + 1.0), 0.0)).unwrap();
        let df = GridFn::from_fn(-0.5, 0.5, nodes - 1, |x: f64| {
            c(-1.0 / ((x + 1.0) * (x + 1.0)), 0.0)
        })
        .unwrap();
        let fam = build_powers_with_derivative(&f, &df, (nodes - 1) / 2, 10).unwrap();
        for kpow in 0..=8usize {
            let u = GridFn::from_fn(-0.5, 0.5, nodes - 1, |x: f64| c(x.powi(kpow as i32), 0.0))
                .unwrap();
            let tu = apply_kernel(&k1, &u, ApplyMode::Full).unwrap();
            let phi = fam.phi(kpow);
            let worst = tu
                .values()
                .iter()
                .zip(phi.values())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0f64, f64::max);
            assert!(worst < 1e-6, "power {kpow}: sup error {worst}");
        }
    }

    #[test]
    fn classical_kernel_corrects_even_powers() {
        // At h = 0: odd powers map straight to phi_k; even powers acquire
        // the -(h_f/(k+1)) phi_{k+1} correction from the f-family used.
        let nodes = 201;
        let k1 = rational_kernel_h_minus_one(nodes);
        let k0 = reparametrize_h(&k1, c(0.0, 0.0)).unwrap();
        let f = GridFn::from_fn(-0.5, 0.5, nodes - 1, |x: f64| c(1.0 / (x + 1.0), 0.0)).unwrap();
        let df = GridFn::from_fn(-0.5, 0.5, nodes - 1, |x: f64| {
            c(-1.0 / ((x + 1.0) * (x + 1.0)), 0.0)
        })
        .unwrap();
        let fam = build_powers_with_derivative(&f, &df, (nodes - 1) / 2, 10).unwrap();
        let h_f = c(-1.0, 0.0);
        for kpow in 0..=8usize {
            let u = GridFn::from_fn(-0.5, 0.5, nodes - 1, |x: f64| c(x.powi(kpow as i32), 0.0))
                .unwrap();
            let tu = apply_kernel(&k0, &u, ApplyMode::Full).unwrap();
            let phi = fam.phi(kpow);
            let want: Vec<Complex<f64>> = if kpow % 2 == 1 {
                phi.values().to_vec()
            } else {
                let next = fam.phi(kpow + 1);
                phi.values()
                    .iter()
                    .zip(next.values())
                    .map(|(p, pn)| p - pn * (h_f / (kpow as f64 + 1.0)))
                    .collect()
            };
            let worst = tu
                .values()
                .iter()
                .zip(&want)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0f64, f64::max);
            assert!(worst < 1e-6, "power {kpow}: sup error {worst}");
        }
    }

    #[test]
    fn exponentials_map_to_perturbed_solutions() {
        // 801 nodes: q'' grows to ~190 near x = -1/2, so the second-difference
        // truncation h^2 u''''/12 needs h <= 1/800 to sit well under 1e-4.
        let nodes = 801;
        let k1 = rational_kernel_h_minus_one(nodes);
        let q = GridFn::from_fn(-0.5, 0.5, nodes - 1, |x: f64| {
            c(2.0 / ((x + 1.0) * (x + 1.0)), 0.0)
        })
        .unwrap();
        let h = c(-1.0, 0.0);
        for omega in [c(1.0, 0.0), c(0.0, 2.0)] {
            let probe = SpectralProbe { omega };
            let wave = probe.exponential(0.5, nodes - 1).unwrap();
            let u = apply_kernel(&k1, &wave, ApplyMode::Full).unwrap();
            // initial values at the center node
            let mid = (nodes - 1) / 2;
            assert!((u.values()[mid] - c(1.0, 0.0)).norm() < 1e-6);
            let du = crate::grid::derivative(&u).unwrap();
            let want_slope = Complex::new(0.0, 1.0) * omega + h;
            assert!(
                (du.values()[mid] - want_slope).norm() < 1e-6,
                "omega {omega}: slope {}",
                du.values()[mid]
            );
            // u'' - q u + omega^2 u = 0
            let ddu = crate::grid::second_difference(&u).unwrap();
            let scale = u.sup_norm();
            for i in (4..nodes - 4).step_by(7) {
                let resid =
                    ddu.values()[i] - q.values()[i] * u.values()[i] + omega * omega * u.values()[i];
                assert!(resid.norm() < 1e-4 * scale, "node {i}: {resid}");
            }
        }
    }

    #[test]
    fn operator_intertwines_second_derivatives() {
        // (-d^2/dx^2 + q) T u = T (-u'') on smooth u.
        let nodes = 401;
        let k1 = rational_kernel_h_minus_one(nodes);
        let q = GridFn::from_fn(-0.5, 0.5, nodes - 1, |x: f64| {
            c(2.0 / ((x + 1.0) * (x + 1.0)), 0.0)
        })
        .unwrap();
        let cases: [(fn(f64) -> Complex<f64>, fn(f64) -> Complex<f64>); 2] = [
            (|x| c(x * x * x, 0.0), |x| c(-6.0 * x, 0.0)),
            (|x| c(x.cos(), 0.0), |x| c(x.cos(), 0.0)),
        ];
        for (u_fn, neg_ddu_fn) in cases {
            let u = GridFn::from_fn(-0.5, 0.5, nodes - 1, u_fn).unwrap();
            let neg_ddu = GridFn::from_fn(-0.5, 0.5, nodes - 1, neg_ddu_fn).unwrap();
            let tu = apply_kernel(&k1, &u, ApplyMode::Full).unwrap();
            let t_neg_ddu = apply_kernel(&k1, &neg_ddu, ApplyMode::Full).unwrap();
            let dd_tu = crate::grid::second_difference(&tu).unwrap();
            for i in (5..nodes - 5).step_by(6) {
                let lhs = -dd_tu.values()[i] + q.values()[i] * tu.values()[i];
                let resid = lhs - t_neg_ddu.values()[i];
                assert!(resid.norm() < 1e-3, "node {i}: {resid}");
            }
        }
    }

    #[test]
    fn parameter_change_matches_integral_preconditioning() {
        // T_{h2} u = T_{h1}[u + ((h2-h1)/2) int_{-x}^{x} u].
        let nodes = 201;
        let k1 = rational_kernel_h_minus_one(nodes);
        let h2 = c(0.5, 0.3);
        let k2 = reparametrize_h(&k1, h2).unwrap();
        let u = GridFn::from_fn(-0.5, 0.5, nodes - 1, |x: f64| c(x.cos(), (0.5 * x).sin()))
            .unwrap();
        let lhs = apply_kernel(&k2, &u, ApplyMode::Full).unwrap();
        let cumulative = cumulative_integral(&u, (nodes - 1) / 2).unwrap();
        let factor = (h2 - k1.h()) * 0.5;
        let mut w = Vec::with_capacity(nodes);
        for i in 0..nodes {
            let sym = cumulative.values()[i] - cumulative.values()[nodes - 1 - i];
            w.push(u.values()[i] + factor * sym);
        }
        let w = GridFn::from_parts(-0.5, 0.5, w);
        let rhs = apply_kernel(&k1, &w, ApplyMode::Full).unwrap();
        let worst = lhs
            .values()
            .iter()
            .zip(rhs.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-8, "sup difference {worst}");
    }

    #[test]
    fn even_odd_projection_decomposes_the_operator() {
        // T_h u = T_c[even part] + T_s[odd part] on [0, a].
        let nodes = 201;
        let center = (nodes - 1) / 2;
        let k1 = rational_kernel_h_minus_one(nodes);
        let k0 = reparametrize_h(&k1, c(0.0, 0.0)).unwrap();
        let (kc, ks) = cos_sin_kernels(&k0, k1.h()).unwrap();
        let u = GridFn::from_fn(-0.5, 0.5, nodes - 1, |x: f64| {
            c((0.3 * x).exp(), x * x - x)
        })
        .unwrap();
        let tu = apply_kernel(&k1, &u, ApplyMode::Full).unwrap();
        let n_half = center + 1;
        let mut even = Vec::with_capacity(n_half);
        let mut odd = Vec::with_capacity(n_half);
        for i in 0..n_half {
            let plus = u.values()[center + i];
            let minus = u.values()[center - i];
            even.push((plus + minus) * 0.5);
            odd.push((plus - minus) * 0.5);
        }
        let even = GridFn::from_parts(0.0, 0.5, even);
        let odd = GridFn::from_parts(0.0, 0.5, odd);
        let tc = apply_half_kernel(&kc, &even).unwrap();
        let ts = apply_half_kernel(&ks, &odd).unwrap();
        let mut worst = 0.0f64;
        for i in 0..n_half {
            let whole = tc.values()[i] + ts.values()[i];
            worst = worst.max((tu.values()[center + i] - whole).norm());
        }
        assert!(worst < 1e-8, "sup difference {worst}");
    }

    #[test]
    fn construction_rejects_bad_shapes() {
        assert!(Kernel2D::new(1.0, c(0.0, 0.0), 6, vec![c(0.0, 0.0); 36]).is_err());
        assert!(Kernel2D::new(1.0, c(0.0, 0.0), 5, vec![c(0.0, 0.0); 7]).is_err());
        assert!(Kernel2D::new(-1.0, c(0.0, 0.0), 5, vec![c(0.0, 0.0); 25]).is_err());
        assert!(Kernel2D::new(1.0, c(0.0, 0.0), 5, vec![c(f64::NAN, 0.0); 25]).is_err());
        // asymmetric potential grid is rejected by the goursat constructor
        let skew = GridFn::constant(-0.2, 0.6, 100, c(1.0, 0.0));
        assert!(goursat_kernel(&skew, c(0.0, 0.0), 21, 1e-10).is_err());
    }
}
