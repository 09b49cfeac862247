//! Sampled functions on uniform grids and the numeric primitives built on
//! them: cubic-spline antiderivative quadrature, second differences, and
//! series-evaluated Bessel functions.

pub mod bessel;
pub mod spline;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::{r, Real};
use spline::{CubicSpline, SplineBc};

/// Complex-valued function sampled on a uniform grid over `[a, b]`.
///
/// The grid has `M + 1` nodes `x_i = a + i (b - a) / M`. Values are complex
/// throughout, even when the sampled function is real: downstream consumers
/// mix real potentials with complex spectral parameters and complex-valued
/// particular solutions, so a single representation avoids special cases.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFn<T: Real> {
    a: T,
    b: T,
    values: Vec<Complex<T>>,
}

impl<T: Real> GridFn<T> {
    /// Wraps samples over `[a, b]`. Rejects non-finite samples, empty or
    /// single-node grids, and degenerate intervals.
    pub fn new(a: T, b: T, values: Vec<Complex<T>>) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::Input(format!("bad interval [{a}, {b}]")));
        }
        if values.len() < 2 {
            return Err(Error::Input(format!(
                "grid needs at least 2 nodes, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !is_finite(*v)) {
            return Err(Error::Input(format!("non-finite sample at node {i}")));
        }
        Ok(Self { a, b, values })
    }

    /// Samples `g` at every node of an `M + 1`-node grid on `[a, b]`.
    pub fn from_fn(a: T, b: T, m: usize, mut g: impl FnMut(T) -> Complex<T>) -> Result<Self> {
        if m == 0 {
            return Err(Error::Input("grid needs at least 1 interval".into()));
        }
        let mf = T::from_usize(m).unwrap();
        let values = (0..=m)
            .map(|i| g(a + (b - a) * T::from_usize(i).unwrap() / mf))
            .collect();
        Self::new(a, b, values)
    }

    /// Constant function on `[a, b]`.
    pub fn constant(a: T, b: T, m: usize, c: Complex<T>) -> Self {
        Self::from_fn(a, b, m, |_| c).expect("constant grid")
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    /// Number of intervals `M` (one less than the node count).
    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    /// Grid spacing.
    pub fn step(&self) -> T {
        (self.b - self.a) / T::from_usize(self.intervals()).unwrap()
    }

    /// Node abscissa `x_i`.
    pub fn x(&self, i: usize) -> T {
        let m = T::from_usize(self.intervals()).unwrap();
        self.a + (self.b - self.a) * T::from_usize(i).unwrap() / m
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    /// Index of the node nearest to `x0`. Used to snap anchors onto the grid.
    pub fn nearest_node(&self, x0: T) -> usize {
        let m = T::from_usize(self.intervals()).unwrap();
        let t = (x0 - self.a) / (self.b - self.a) * m;
        let i = t.round().to_f64().unwrap_or(0.0) as isize;
        i.clamp(0, self.intervals() as isize) as usize
    }

    /// Samples the spline interpolant of this function at arbitrary points.
    /// Points outside `[a, b]` take the nearest endpoint's value.
    pub fn sample_many(&self, xs: &[T]) -> Result<Vec<Complex<T>>> {
        let sp = CubicSpline::fit(self, SplineBc::default())?;
        Ok(xs.iter().map(|&x| sp.eval_offset(x - self.a)).collect())
    }

    /// Largest sample magnitude.
    pub fn sup_norm(&self) -> T {
        self.values
            .iter()
            .map(|v| v.norm())
            .fold(T::zero(), T::max)
    }

    /// New function with the same grid and values `op(v_i)`.
    pub fn map(&self, op: impl FnMut(Complex<T>) -> Complex<T>) -> Self {
        Self {
            a: self.a,
            b: self.b,
            values: self.values.iter().copied().map(op).collect(),
        }
    }

    /// Pointwise combination with another function on the same grid.
    pub fn zip(
        &self,
        other: &Self,
        mut op: impl FnMut(Complex<T>, Complex<T>) -> Complex<T>,
    ) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            a: self.a,
            b: self.b,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&u, &v)| op(u, v))
                .collect(),
        })
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        let tol = r::<T>(1e-12) * (T::one() + self.a.abs() + self.b.abs());
        if self.values.len() != other.values.len()
            || (self.a - other.a).abs() > tol
            || (self.b - other.b).abs() > tol
        {
            return Err(Error::Input("grid mismatch".into()));
        }
        Ok(())
    }

    pub(crate) fn from_parts(a: T, b: T, values: Vec<Complex<T>>) -> Self {
        Self { a, b, values }
    }
}

#[inline]
pub(crate) fn is_finite<T: Real>(v: Complex<T>) -> bool {
    v.re.is_finite() && v.im.is_finite()
}

/// Cumulative integral `G(x_i) = int_{x_{i0}}^{x_i} g`, spline-antiderivative
/// based with the default boundary treatment. `G` lives on the grid of `g`
/// and vanishes exactly at node `i0`.
pub fn cumulative_integral<T: Real>(g: &GridFn<T>, i0: usize) -> Result<GridFn<T>> {
    cumulative_integral_with(g, i0, SplineBc::default())
}

/// Cumulative integral with an explicit spline boundary condition.
pub fn cumulative_integral_with<T: Real>(
    g: &GridFn<T>,
    i0: usize,
    bc: SplineBc,
) -> Result<GridFn<T>> {
    check_anchor(g, i0)?;
    let sp = CubicSpline::fit(g, bc)?;
    let mut prefix = Vec::with_capacity(g.values.len());
    let mut acc = Complex::new(T::zero(), T::zero());
    prefix.push(acc);
    for i in 0..g.intervals() {
        acc = acc + sp.interval_integral(i);
        prefix.push(acc);
    }
    let shift = prefix[i0];
    Ok(GridFn::from_parts(
        g.a,
        g.b,
        prefix.into_iter().map(|p| p - shift).collect(),
    ))
}

/// Cumulative integral by composite Simpson rules; a fallback used to
/// cross-check the spline route. Odd-index prefixes close with a one-sided
/// three-point rule, so the result is fourth-order on smooth data.
pub fn cumulative_integral_simpson<T: Real>(g: &GridFn<T>, i0: usize) -> Result<GridFn<T>> {
    check_anchor(g, i0)?;
    if g.values.len() < 3 {
        return Err(Error::Input("simpson rule needs at least 3 nodes".into()));
    }
    let h = g.step();
    let y = &g.values;
    let n = g.intervals();
    let c3 = h / r::<T>(3.0);
    let c12 = h / r::<T>(12.0);
    let mut prefix = vec![Complex::new(T::zero(), T::zero()); n + 1];
    for i in 1..=n {
        prefix[i] = if i % 2 == 0 {
            prefix[i - 2] + (y[i - 2] + y[i - 1] * r::<T>(4.0) + y[i]) * c3
        } else if i < n {
            prefix[i - 1] + (y[i - 1] * r::<T>(5.0) + y[i] * r::<T>(8.0) - y[i + 1]) * c12
        } else {
            prefix[i - 1] + (-y[i - 2] + y[i - 1] * r::<T>(8.0) + y[i] * r::<T>(5.0)) * c12
        };
    }
    let shift = prefix[i0];
    Ok(GridFn::from_parts(
        g.a,
        g.b,
        prefix.into_iter().map(|p| p - shift).collect(),
    ))
}

fn check_anchor<T: Real>(g: &GridFn<T>, i0: usize) -> Result<()> {
    if i0 >= g.values.len() {
        return Err(Error::Input(format!(
            "anchor node {i0} outside grid of {} nodes",
            g.values.len()
        )));
    }
    Ok(())
}

/// First derivative at the nodes, from the cubic-spline interpolant.
pub fn derivative<T: Real>(g: &GridFn<T>) -> Result<GridFn<T>> {
    derivative_with(g, SplineBc::default())
}

pub fn derivative_with<T: Real>(g: &GridFn<T>, bc: SplineBc) -> Result<GridFn<T>> {
    let sp = CubicSpline::fit(g, bc)?;
    Ok(GridFn::from_parts(g.a, g.b, sp.node_derivatives()))
}

/// Second difference at the nodes: the central three-point stencil in the
/// interior and second-order one-sided stencils at the two endpoints.
pub fn second_difference<T: Real>(g: &GridFn<T>) -> Result<GridFn<T>> {
    if g.values.len() < 4 {
        return Err(Error::Input(
            "second difference needs at least 4 nodes".into(),
        ));
    }
    let h2 = g.step() * g.step();
    let y = &g.values;
    let n = g.intervals();
    let mut out = Vec::with_capacity(n + 1);
    let two = r::<T>(2.0);
    let four = r::<T>(4.0);
    let five = r::<T>(5.0);
    out.push((y[0] * two - y[1] * five + y[2] * four - y[3]) / h2);
    for i in 1..n {
        out.push((y[i - 1] - y[i] * two + y[i + 1]) / h2);
    }
    out.push((y[n] * two - y[n - 1] * five + y[n - 2] * four - y[n - 3]) / h2);
    Ok(GridFn::from_parts(g.a, g.b, out))
}
