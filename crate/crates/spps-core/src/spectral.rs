//! Characteristic polynomials for boundary problems of
//! `u'' - q u = lambda u` (or the flipped form `-u'' + q u = lambda u`),
//! their roots, quantum-well bound states, and |Phi| maps.
//!
//! The boundary conditions are
//!
//! ```text
//! u(a) cos(alpha) + u'(a) sin(alpha) = 0
//! beta1 u(b) - beta2 u'(b) = phi(lambda) (beta1' u(b) - beta2' u'(b))
//! ```
//!
//! with `phi` a polynomial. Writing `phi_i(lambda) = beta_i - beta_i' phi`,
//! the eigenvalues are the zeros of
//! `Phi(lambda) = phi_1(lambda) u(b) - phi_2(lambda) u'(b)` where `u` is the
//! series solution satisfying the left condition. Truncating the series gives
//! a genuine polynomial in `lambda` (or in `nu = lambda - lambda0` when the
//! series is re-centered), handed to the root finder.

pub mod roots;

pub use roots::{find_roots, RootRegion, RootSearch};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::formal_powers::{
    build_nonvanishing_solution_with_derivative, build_powers_with_derivative,
    FormalPowerFamily, PICARD_MAX_ITER, PICARD_TOL,
};
use crate::grid::GridFn;
use crate::spps::{eval_solution, shift_polynomial};
use crate::{r, Real};

/// Which sign convention the spectral parameter uses.
///
/// The series machinery natively solves `u'' - q u = lambda u`. Quantum
/// mechanics (and the quantum-well solver) writes `-u'' + q u = lambda u`
/// instead, whose spectral parameter is the negative of the native one; the
/// solver then runs the series at `-lambda` and re-expresses the polynomial
/// in the physical variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Convention {
    /// `u'' - q u = lambda u`, the native series form.
    #[default]
    Direct,
    /// `-u'' + q u = lambda u`.
    Schrodinger,
}

/// A Sturm-Liouville boundary problem on the interval carried by `q`.
#[derive(Debug, Clone)]
pub struct SLProblemSpec<T: Real> {
    /// Potential samples on `[a, b]`; the grid defines the problem interval.
    pub q: GridFn<T>,
    /// Left condition angle: `u(a) cos(alpha) + u'(a) sin(alpha) = 0`.
    pub alpha: Complex<T>,
    /// Right condition data.
    pub beta1: Complex<T>,
    pub beta2: Complex<T>,
    pub beta1p: Complex<T>,
    pub beta2p: Complex<T>,
    /// Coefficients of the polynomial `phi(lambda)` (ascending, physical
    /// variable). Empty means `phi = 0`.
    pub phi_poly: Vec<Complex<T>>,
    /// Series anchor; must coincide with `a` for [`char_polynomial`].
    pub x0: T,
    /// Truncation order N: the series keep terms with index `k <= N/2`.
    pub n: usize,
    /// Sign convention of the spectral parameter.
    pub convention: Convention,
    /// Series center in the physical variable.
    pub lambda0: Complex<T>,
}

impl<T: Real> SLProblemSpec<T> {
    /// Dirichlet problem `u(a) = u(b) = 0` with everything else default.
    pub fn dirichlet(q: GridFn<T>, n: usize) -> Self {
        let zero = Complex::new(T::zero(), T::zero());
        let x0 = q.a();
        SLProblemSpec {
            q,
            alpha: zero,
            beta1: Complex::new(T::one(), T::zero()),
            beta2: zero,
            beta1p: zero,
            beta2p: zero,
            phi_poly: Vec::new(),
            x0,
            n,
            convention: Convention::Direct,
            lambda0: zero,
        }
    }

    fn validate(&self) -> Result<()> {
        let trivial_beta = self.beta1.norm() == T::zero() && self.beta2.norm() == T::zero();
        let trivial_phi = self.phi_poly.iter().all(|c| c.norm() == T::zero());
        if trivial_beta && trivial_phi {
            return Err(Error::Input(
                "right boundary condition is identically zero".into(),
            ));
        }
        Ok(())
    }

    /// The potential the series actually runs on: shifted by the center and
    /// sign-adjusted for the convention.
    fn series_potential(&self) -> GridFn<T> {
        let shift = match self.convention {
            Convention::Direct => self.lambda0,
            Convention::Schrodinger => -self.lambda0,
        };
        self.q.map(|v| v + shift)
    }
}

/// Truncated characteristic function as a polynomial in `nu = lambda - center`.
#[derive(Debug, Clone)]
pub struct CharPolynomial<T: Real> {
    /// Ascending coefficients in `nu`.
    pub coeffs: Vec<Complex<T>>,
    /// Expansion center in the physical variable.
    pub center: Complex<T>,
    /// Estimated |nu| below which truncation artifacts stay under 1e-8
    /// relative to the polynomial's head.
    pub trust_radius: T,
}

impl<T: Real> CharPolynomial<T> {
    /// Wraps coefficients that are exact (no truncation tail), e.g. a
    /// hand-built polynomial: the trust radius is infinite.
    pub fn exact(coeffs: Vec<Complex<T>>, center: Complex<T>) -> Result<Self> {
        Self::with_trust(coeffs, center, T::infinity())
    }

    /// Wraps truncated-series coefficients; the trust radius is estimated
    /// from the coefficient decay.
    pub fn from_series(coeffs: Vec<Complex<T>>, center: Complex<T>) -> Result<Self> {
        let trust = trust_radius_estimate(&coeffs);
        Self::with_trust(coeffs, center, trust)
    }

    fn with_trust(coeffs: Vec<Complex<T>>, center: Complex<T>, trust_radius: T) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Input("empty coefficient vector".into()));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Input("non-finite polynomial coefficient".into()));
        }
        Ok(CharPolynomial {
            coeffs,
            center,
            trust_radius,
        })
    }

    /// Degree (index of the last coefficient).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Horner evaluation at the physical `lambda`.
    pub fn eval(&self, lambda: Complex<T>) -> Complex<T> {
        let nu = lambda - self.center;
        let mut acc = Complex::new(T::zero(), T::zero());
        for &c in self.coeffs.iter().rev() {
            acc = acc * nu + c;
        }
        acc
    }
}

/// Largest |nu| at which the last coefficient's term stays below `1e-8`
/// relative to the polynomial's leading behavior, swept on a log scale.
/// Everything is compared in logs so huge powers cannot overflow.
fn trust_radius_estimate<T: Real>(coeffs: &[Complex<T>]) -> T {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return T::infinity();
    }
    let ln_tail = coeffs[deg].norm().ln(); // -inf for a zero tail is fine
    let head_orders = deg.min(4);
    let ln_tol = r::<T>(1e-8f64.ln());
    let mut best = T::zero();
    let lo = r::<T>(1e-3f64.ln());
    let hi = r::<T>(1e9f64.ln());
    let steps = 2400usize;
    for s in 0..=steps {
        let ln_r = lo + (hi - lo) * T::from_usize(s).unwrap() / T::from_usize(steps).unwrap();
        let mut ln_head = T::zero(); // the constant 1
        for (k, c) in coeffs.iter().enumerate().take(head_orders + 1) {
            if k == deg {
                continue;
            }
            let ln_term = c.norm().ln() + T::from_usize(k).unwrap() * ln_r;
            ln_head = ln_head.max(ln_term);
        }
        let ln_tail_term = ln_tail + T::from_usize(deg).unwrap() * ln_r;
        if ln_tail_term <= ln_tol + ln_head {
            best = ln_r.exp();
        }
    }
    best
}

fn poly_mul<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Vec<Complex<T>> {
    let zero = Complex::new(T::zero(), T::zero());
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![zero; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = out[i + j] + x * y;
        }
    }
    out
}

fn poly_sub<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Vec<Complex<T>> {
    let zero = Complex::new(T::zero(), T::zero());
    let mut out = vec![zero; a.len().max(b.len())];
    for (i, &x) in a.iter().enumerate() {
        out[i] = out[i] + x;
    }
    for (i, &y) in b.iter().enumerate() {
        out[i] = out[i] - y;
    }
    out
}

/// Builds the formal-power family the problem needs: Picard solution of the
/// (shifted, convention-adjusted) potential, powers up to order `n + 1`,
/// anchored at the left endpoint.
pub fn build_family_for<T: Real>(spec: &SLProblemSpec<T>) -> Result<FormalPowerFamily<T>> {
    let q_eff = spec.series_potential();
    let i0 = spec.q.nearest_node(spec.x0);
    let (f, df) =
        build_nonvanishing_solution_with_derivative(&q_eff, i0, PICARD_TOL, PICARD_MAX_ITER)?;
    build_powers_with_derivative(&f, &df, i0, spec.n + 1)
}

/// Endpoint series coefficients of `u1(b)`, `u2(b)`, `u1'(b)`, `u2'(b)` as
/// polynomials in the series variable, `k = 0..=n/2` each.
struct EndpointSeries<T: Real> {
    u1: Vec<Complex<T>>,
    u2: Vec<Complex<T>>,
    du1: Vec<Complex<T>>,
    du2: Vec<Complex<T>>,
}

fn endpoint_series<T: Real>(
    fam: &FormalPowerFamily<T>,
    n: usize,
    node: usize,
) -> Result<EndpointSeries<T>> {
    let terms = n / 2;
    if 2 * terms + 1 > fam.order() {
        return Err(Error::Input(format!(
            "truncation N = {n} needs formal powers up to order {} but the family holds {}",
            2 * terms + 1,
            fam.order()
        )));
    }
    let fb = fam.f().values()[node];
    let dfb = fam.df().values()[node];
    let ratio = dfb / fb;
    let mut u1 = Vec::with_capacity(terms + 1);
    let mut u2 = Vec::with_capacity(terms + 1);
    let mut du1 = Vec::with_capacity(terms + 1);
    let mut du2 = Vec::with_capacity(terms + 1);
    for k in 0..=terms {
        let even = fam.phi_scaled(2 * k)[node];
        let odd = fam.phi_scaled(2 * k + 1)[node];
        u1.push(even);
        u2.push(odd);
        du1.push(if k == 0 {
            dfb
        } else {
            ratio * even + fam.psi_scaled(2 * k - 1)[node]
        });
        du2.push(ratio * odd + fam.psi_scaled(2 * k)[node]);
    }
    Ok(EndpointSeries { u1, u2, du1, du2 })
}

/// Assembles the truncated characteristic polynomial of the boundary problem.
///
/// `fam` must be built over the problem's series potential (see
/// [`build_family_for`]), anchored at the left endpoint, with order at least
/// `n + 1`; a family of higher order may be reused for several truncations.
pub fn char_polynomial<T: Real>(
    spec: &SLProblemSpec<T>,
    fam: &FormalPowerFamily<T>,
) -> Result<CharPolynomial<T>> {
    spec.validate()?;
    fam.f().check_same_grid(&spec.q)?;
    if fam.i0() != 0 {
        return Err(Error::Input(
            "characteristic polynomial requires the series anchored at the left endpoint".into(),
        ));
    }
    if spec.q.nearest_node(spec.x0) != 0 {
        return Err(Error::Input(format!(
            "anchor x0 = {} is not the left endpoint {}",
            spec.x0,
            spec.q.a()
        )));
    }
    let last = spec.q.values().len() - 1;
    let end = endpoint_series(fam, spec.n, last)?;

    // Solution satisfying the left condition: u = c1 u1 + c2 u2. At alpha = 0
    // this is exactly u2 (positive normalization); otherwise c1 = sin(alpha)
    // and c2 kills the residual of the condition at a.
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let (c1, c2) = if spec.alpha == zero {
        (zero, one)
    } else {
        let sa = spec.alpha.sin();
        let ca = spec.alpha.cos();
        (sa, -(ca + fam.h() * sa))
    };

    let terms = spec.n / 2;
    let mut u_b = Vec::with_capacity(terms + 1);
    let mut du_b = Vec::with_capacity(terms + 1);
    for k in 0..=terms {
        let mut uk = c1 * end.u1[k] + c2 * end.u2[k];
        let mut duk = c1 * end.du1[k] + c2 * end.du2[k];
        if spec.convention == Convention::Schrodinger && k % 2 == 1 {
            // The series variable is the negative of the physical one.
            uk = -uk;
            duk = -duk;
        }
        u_b.push(uk);
        du_b.push(duk);
    }

    // phi(lambda) re-expanded around the center, then
    // Phi = (beta1 - beta1' phi) u(b) - (beta2 - beta2' phi) u'(b).
    let mut phi_nu = spec.phi_poly.clone();
    shift_polynomial(&mut phi_nu, spec.lambda0);
    let phi1 = poly_sub(
        &[spec.beta1],
        &phi_nu.iter().map(|&c| c * spec.beta1p).collect::<Vec<_>>(),
    );
    let phi2 = poly_sub(
        &[spec.beta2],
        &phi_nu.iter().map(|&c| c * spec.beta2p).collect::<Vec<_>>(),
    );
    let coeffs = poly_sub(&poly_mul(&phi1, &u_b), &poly_mul(&phi2, &du_b));
    CharPolynomial::from_series(coeffs, spec.lambda0)
}

/// A quantum-well problem `-u'' + q u = lambda u` on the line, with `q` given
/// on a finite segment and constant tails.
#[derive(Debug, Clone)]
pub struct WellSpec<T: Real> {
    /// Potential inside the well; its grid `[0, width]` is the segment.
    pub q: GridFn<T>,
    /// Constant tail level for `x < 0`.
    pub alpha1: T,
    /// Constant tail level for `x > width`.
    pub alpha2: T,
    /// Series truncation order.
    pub n: usize,
}

const WELL_SCAN_POINTS: usize = 4000;

/// Finds the bound states: real eigenvalues in `(min q, min(alpha1, alpha2))`
/// with exponentially decaying tails, located by a sign scan of the matching
/// function plus bisection. An empty search window yields an empty list.
pub fn solve_well<T: Real>(spec: &WellSpec<T>) -> Result<Vec<T>> {
    let im_max = spec
        .q
        .values()
        .iter()
        .map(|v| v.im.abs())
        .fold(T::zero(), T::max);
    if im_max > r::<T>(1e-12) {
        return Err(Error::Input(
            "well potential must be real-valued".into(),
        ));
    }
    let q_min = spec
        .q
        .values()
        .iter()
        .map(|v| v.re)
        .fold(T::infinity(), T::min);
    let top = spec.alpha1.min(spec.alpha2);
    let eps = r::<T>(1e-9) * T::one().max(top - q_min);
    let lo = q_min + eps;
    let hi = top - eps;
    if !(lo < hi) {
        return Ok(Vec::new());
    }

    let fam = well_family(spec)?;
    let last = spec.q.values().len() - 1;
    let left = endpoint_series(&fam, spec.n, 0)?;
    let right = endpoint_series(&fam, spec.n, last)?;
    let matching = |lam: T| well_matching(&left, &right, spec, lam);

    let mut out = Vec::new();
    let npts = WELL_SCAN_POINTS;
    let step = (hi - lo) / T::from_usize(npts).unwrap();
    let mut prev_x = lo;
    let mut prev_v = matching(lo);
    for j in 1..=npts {
        let x = lo + step * T::from_usize(j).unwrap();
        let v = matching(x);
        if prev_v == T::zero() {
            out.push(prev_x);
        } else if prev_v * v < T::zero() {
            out.push(bisect(&matching, prev_x, x, prev_v));
        }
        prev_x = x;
        prev_v = v;
    }
    if prev_v == T::zero() {
        out.push(prev_x);
    }
    Ok(out)
}

fn well_family<T: Real>(spec: &WellSpec<T>) -> Result<FormalPowerFamily<T>> {
    // -u'' + q u = lambda u is the native series equation in -lambda with the
    // same potential, so the family is built over q directly. Anchoring at
    // the segment midpoint halves the span the series pays for: growth goes
    // like exp(sqrt(sup|q - lambda|) * span), and a deep well over a wide
    // segment overwhelms f64 when anchored at an edge.
    let center = (spec.q.values().len() - 1) / 2;
    let (f, df) = build_nonvanishing_solution_with_derivative(
        &spec.q,
        center,
        PICARD_TOL,
        PICARD_MAX_ITER,
    )?;
    build_powers_with_derivative(&f, &df, center, spec.n + 1)
}

/// Left-edge data `u(0) = 1, u'(0) = kappa1` expanded in the basis pair:
/// coefficients `(a, b)` with `u = a u1 + b u2`, inverted through the basis
/// Wronskian, which is identically 1. The identity must be used as such, not
/// recomputed: forming `u1 du2 - du1 u2` at an edge squares the basis
/// magnitude, and once that square reaches 1/eps the computed Wronskian is
/// pure product roundoff; dividing by it would scramble the coefficients.
fn well_mix<T: Real>(
    left: &EndpointSeries<T>,
    kappa1: Complex<T>,
    mu: Complex<T>,
) -> (Complex<T>, Complex<T>) {
    let u1 = horner(&left.u1, mu);
    let u2 = horner(&left.u2, mu);
    let du1 = horner(&left.du1, mu);
    let du2 = horner(&left.du2, mu);
    (du2 - u2 * kappa1, u1 * kappa1 - du1)
}

fn horner<T: Real>(c: &[Complex<T>], mu: Complex<T>) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for &v in c.iter().rev() {
        acc = acc * mu + v;
    }
    acc
}

/// Matching mismatch at the right edge for decaying tails on both sides:
/// `u'(w) + kappa2 u(w)` for the solution with `u(0) = 1, u'(0) = kappa1`.
fn well_matching<T: Real>(
    left: &EndpointSeries<T>,
    right: &EndpointSeries<T>,
    spec: &WellSpec<T>,
    lam: T,
) -> T {
    let mu = Complex::new(-lam, T::zero());
    let kappa1 = Complex::new((spec.alpha1 - lam).max(T::zero()).sqrt(), T::zero());
    let kappa2 = Complex::new((spec.alpha2 - lam).max(T::zero()).sqrt(), T::zero());
    let (a, b) = well_mix(left, kappa1, mu);
    let u = a * horner(&right.u1, mu) + b * horner(&right.u2, mu);
    let du = a * horner(&right.du1, mu) + b * horner(&right.du2, mu);
    (du + kappa2 * u).re
}

fn bisect<T: Real>(f: &dyn Fn(T) -> T, mut lo: T, mut hi: T, flo: T) -> T {
    let mut sign_lo = flo;
    for _ in 0..200 {
        let mid = (lo + hi) * r::<T>(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v == T::zero() {
            return mid;
        }
        if sign_lo * v < T::zero() {
            hi = mid;
        } else {
            lo = mid;
            sign_lo = v;
        }
        if hi - lo <= r::<T>(1e-14) * T::one().max(lo.abs()) {
            break;
        }
    }
    (lo + hi) * r::<T>(0.5)
}

/// Reconstructs the bound-state wavefunction for one well eigenvalue, on the
/// well segment: the basis combination with `u(0) = 1, u'(0) = kappa1`,
/// summed at `-lambda`.
pub fn well_solution<T: Real>(spec: &WellSpec<T>, lambda: T) -> Result<GridFn<T>> {
    let fam = well_family(spec)?;
    let mu = Complex::new(-lambda, T::zero());
    let kappa1 = Complex::new((spec.alpha1 - lambda).max(T::zero()).sqrt(), T::zero());
    let left = endpoint_series(&fam, spec.n, 0)?;
    let (a, b) = well_mix(&left, kappa1, mu);
    let ev = eval_solution(&fam, mu)?;
    ev.u1.zip(&ev.u2, |x, y| a * x + b * y)
}

/// |Phi| sampled on a rectangle in the complex plane: `nx` points across the
/// real axis (rows) by `ny` points across the imaginary axis (columns),
/// row-major.
#[derive(Debug, Clone)]
pub struct MagnitudeMap<T: Real> {
    pub re_axis: Vec<T>,
    pub im_axis: Vec<T>,
    pub values: Vec<T>,
}

/// Evaluates `|p|` over the rectangle `[re_min, re_max] x [im_min, im_max]`.
pub fn magnitude_map<T: Real>(
    p: &CharPolynomial<T>,
    re_range: (T, T),
    im_range: (T, T),
    nx: usize,
    ny: usize,
) -> Result<MagnitudeMap<T>> {
    if nx < 2 || ny < 2 {
        return Err(Error::Input("magnitude map needs at least 2x2 points".into()));
    }
    if !(re_range.0 < re_range.1) || !(im_range.0 < im_range.1) {
        return Err(Error::Input("magnitude map rectangle is empty".into()));
    }
    let axis = |range: (T, T), n: usize| {
        let step = (range.1 - range.0) / T::from_usize(n - 1).unwrap();
        (0..n)
            .map(|i| range.0 + step * T::from_usize(i).unwrap())
            .collect::<Vec<T>>()
    };
    let re_axis = axis(re_range, nx);
    let im_axis = axis(im_range, ny);
    let mut values = Vec::with_capacity(nx * ny);
    for &re in &re_axis {
        for &im in &im_axis {
            values.push(p.eval(Complex::new(re, im)).norm());
        }
    }
    Ok(MagnitudeMap {
        re_axis,
        im_axis,
        values,
    })
}
