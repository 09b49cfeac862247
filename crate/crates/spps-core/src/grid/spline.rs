//! Cubic-spline interpolation on uniform grids in the second-derivative
//! (moment) representation, for complex samples.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::GridFn;
use crate::{r, Real};

/// End condition of the interpolating spline.
///
/// `NotAKnot` keeps full fourth-order accuracy up to the endpoints and is the
/// crate-wide default. `Natural` (zero second derivative at the ends) is
/// retained as an option; its endpoint boundary layer costs roughly two
/// orders of accuracy in integrals of non-polynomial data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplineBc {
    #[default]
    NotAKnot,
    Natural,
}

/// Interpolating cubic spline through grid samples, stored as node moments
/// `M_i = s''(x_i)`.
pub struct CubicSpline<T: Real> {
    h: T,
    values: Vec<Complex<T>>,
    moments: Vec<Complex<T>>,
}

impl<T: Real> CubicSpline<T> {
    pub fn fit(g: &GridFn<T>, bc: SplineBc) -> Result<Self> {
        let y = g.values();
        let n = g.intervals();
        let min_nodes = match bc {
            SplineBc::NotAKnot => 4,
            SplineBc::Natural => 3,
        };
        if y.len() < min_nodes {
            return Err(Error::Input(format!(
                "spline needs at least {min_nodes} nodes, got {}",
                y.len()
            )));
        }
        let h = g.step();
        let h2 = h * h;
        let six = r::<T>(6.0);
        // Continuity of s' at the interior nodes: M_{i-1} + 4 M_i + M_{i+1} = d_i.
        let d: Vec<Complex<T>> = (1..n)
            .map(|i| (y[i - 1] - y[i] * r::<T>(2.0) + y[i + 1]) * (six / h2))
            .collect();
        let mut m = vec![Complex::new(T::zero(), T::zero()); n + 1];
        match bc {
            SplineBc::Natural => {
                // M_0 = M_n = 0; tridiagonal (1, 4, 1) for the interior.
                let inner = thomas_141(&d);
                m[1..n].copy_from_slice(&inner);
            }
            SplineBc::NotAKnot => {
                // s''' continuous at x_1 and x_{n-1}: M_0 = 2 M_1 - M_2 and
                // M_n = 2 M_{n-1} - M_{n-2}. On a uniform grid substituting
                // into the first and last continuity rows decouples them:
                // 6 M_1 = d_1, 6 M_{n-1} = d_{n-1}.
                m[1] = d[0] / six;
                m[n - 1] = d[n - 2] / six;
                if n > 3 {
                    let mut rhs: Vec<Complex<T>> = d[1..n - 2].to_vec();
                    let k = rhs.len();
                    rhs[0] = rhs[0] - m[1];
                    rhs[k - 1] = rhs[k - 1] - m[n - 1];
                    let inner = thomas_141(&rhs);
                    m[2..n - 1].copy_from_slice(&inner);
                }
                m[0] = m[1] * r::<T>(2.0) - m[2];
                m[n] = m[n - 1] * r::<T>(2.0) - m[n - 2];
            }
        }
        Ok(Self {
            h,
            values: y.to_vec(),
            moments: m,
        })
    }

    /// Exact integral of the spline over interval `[x_i, x_{i+1}]`.
    pub fn interval_integral(&self, i: usize) -> Complex<T> {
        let h = self.h;
        let half = r::<T>(0.5);
        let c24 = h * h * h / r::<T>(24.0);
        (self.values[i] + self.values[i + 1]) * (h * half)
            - (self.moments[i] + self.moments[i + 1]) * c24
    }

    /// Spline value at distance `dx` from the grid start, with `dx` clamped
    /// into the grid span (constant-value extension beyond the ends).
    pub fn eval_offset(&self, dx: T) -> Complex<T> {
        let h = self.h;
        let n = self.values.len() - 1;
        let span = h * T::from_usize(n).unwrap();
        let dx = dx.max(T::zero()).min(span);
        let mut i = (dx / h).floor().to_usize().unwrap_or(0);
        if i >= n {
            i = n - 1;
        }
        let xi = dx - h * T::from_usize(i).unwrap();
        let a = h - xi;
        let six_h = r::<T>(6.0) * h;
        let h2_6 = h * h / r::<T>(6.0);
        (self.moments[i] * a * a * a + self.moments[i + 1] * xi * xi * xi) / six_h
            + (self.values[i] - self.moments[i] * h2_6) * (a / h)
            + (self.values[i + 1] - self.moments[i + 1] * h2_6) * (xi / h)
    }

    /// Spline first derivative at every node.
    pub fn node_derivatives(&self) -> Vec<Complex<T>> {
        let h = self.h;
        let c6 = h / r::<T>(6.0);
        let n = self.values.len() - 1;
        let mut out = Vec::with_capacity(n + 1);
        for i in 0..n {
            let slope = (self.values[i + 1] - self.values[i]) / h;
            out.push(slope - (self.moments[i] * r::<T>(2.0) + self.moments[i + 1]) * c6);
        }
        let slope = (self.values[n] - self.values[n - 1]) / h;
        out.push(slope + (self.moments[n] * r::<T>(2.0) + self.moments[n - 1]) * c6);
        out
    }
}

/// Solves the symmetric tridiagonal system with diagonal 4 and off-diagonals 1.
fn thomas_141<T: Real>(rhs: &[Complex<T>]) -> Vec<Complex<T>> {
    let k = rhs.len();
    if k == 0 {
        return Vec::new();
    }
    let four = r::<T>(4.0);
    let mut diag = Vec::with_capacity(k);
    let mut d = rhs.to_vec();
    diag.push(four);
    for i in 1..k {
        let w = T::one() / diag[i - 1];
        diag.push(four - w);
        let prev = d[i - 1];
        d[i] = d[i] - prev * w;
    }
    let mut x = vec![Complex::new(T::zero(), T::zero()); k];
    x[k - 1] = d[k - 1] / diag[k - 1];
    for i in (0..k - 1).rev() {
        x[i] = (d[i] - x[i + 1]) / diag[i];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubic_exactly() {
        // Both end conditions are exact for a global cubic.
        let g = GridFn::from_fn(-1.0, 2.0, 40, |x: f64| {
            Complex::new(x * x * x - x, 2.0 * x * x)
        })
        .unwrap();
        for bc in [SplineBc::NotAKnot, SplineBc::Natural] {
            let sp = CubicSpline::fit(&g, bc).unwrap();
            let mut acc = Complex::new(0.0, 0.0);
            for i in 0..40 {
                acc += sp.interval_integral(i);
            }
            // int_{-1}^{2} (x^3 - x) dx = 9/4, int 2 x^2 = 6
            let err = (acc - Complex::new(2.25, 6.0)).norm();
            match bc {
                SplineBc::NotAKnot => assert!(err < 1e-13, "{err}"),
                SplineBc::Natural => assert!(err < 1e-2, "{err}"), // end layer
            }
        }
    }

    #[test]
    fn point_evaluation_matches_cubic_and_clamps() {
        let g = GridFn::from_fn(-1.0, 2.0, 60, |x: f64| {
            Complex::new(x * x * x - x, 0.5 * x * x)
        })
        .unwrap();
        let sp = CubicSpline::fit(&g, SplineBc::NotAKnot).unwrap();
        for k in 0..50 {
            let x = -1.0 + 3.0 * (k as f64 + 0.37) / 50.0;
            let want = Complex::new(x * x * x - x, 0.5 * x * x);
            assert!((sp.eval_offset(x + 1.0) - want).norm() < 1e-12, "x = {x}");
        }
        // Beyond the ends the nearest endpoint value is used.
        let right = Complex::new(6.0, 2.0);
        assert!((sp.eval_offset(5.0) - right).norm() < 1e-12);
        assert!((sp.eval_offset(-3.0) - Complex::new(0.0, 0.5)).norm() < 1e-12);
    }

    #[test]
    fn derivative_of_cubic_is_exact_not_a_knot() {
        let g = GridFn::from_fn(0.0, 1.0, 25, |x: f64| Complex::new(x * x * x, 0.0)).unwrap();
        let sp = CubicSpline::fit(&g, SplineBc::NotAKnot).unwrap();
        let d = sp.node_derivatives();
        for (i, v) in d.iter().enumerate() {
            let x = g.x(i);
            assert!((v.re - 3.0 * x * x).abs() < 1e-12, "node {i}");
        }
    }
}
