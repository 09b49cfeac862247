//! Simultaneous polynomial root finding for characteristic polynomials.
//!
//! Aberth-Ehrlich iteration on the (normalized) coefficient vector with a
//! deterministic circular start, followed by a few Newton steps per root on
//! the Horner-evaluated polynomial. High-degree truncated series produce a
//! ring of spurious far roots that may never pass the convergence test; those
//! are harmless as long as they lie outside the requested region, so
//! non-convergence is an error only for roots inside it.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::{r, Real};

use super::CharPolynomial;

/// Where to keep roots, in the physical spectral variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RootRegion<T: Real> {
    /// Complex disk.
    Disk { center: Complex<T>, radius: T },
    /// Real interval thickened by `im_tol` in the imaginary direction.
    Interval { lo: T, hi: T, im_tol: T },
    /// Axis-aligned rectangle in the complex plane.
    Rect { re_lo: T, re_hi: T, im_lo: T, im_hi: T },
}

impl<T: Real> RootRegion<T> {
    /// Whether `z` lies in the region.
    pub fn contains(&self, z: Complex<T>) -> bool {
        match *self {
            RootRegion::Disk { center, radius } => (z - center).norm() <= radius,
            RootRegion::Interval { lo, hi, im_tol } => {
                z.re >= lo && z.re <= hi && z.im.abs() <= im_tol
            }
            RootRegion::Rect { re_lo, re_hi, im_lo, im_hi } => {
                z.re >= re_lo && z.re <= re_hi && z.im >= im_lo && z.im <= im_hi
            }
        }
    }

    /// Largest |z - center| over the region (used for the trust check).
    fn max_distance_from(&self, center: Complex<T>) -> T {
        let corners = |res: [T; 2], ims: [T; 2]| {
            let mut worst = T::zero();
            for re in res {
                for im in ims {
                    let d = (Complex::new(re, im) - center).norm();
                    worst = worst.max(d);
                }
            }
            worst
        };
        match *self {
            RootRegion::Disk { center: c, radius } => (c - center).norm() + radius,
            RootRegion::Interval { lo, hi, im_tol } => {
                corners([lo, hi], [-im_tol, im_tol])
            }
            RootRegion::Rect { re_lo, re_hi, im_lo, im_hi } => {
                corners([re_lo, re_hi], [im_lo, im_hi])
            }
        }
    }
}

/// Roots found inside the requested region.
#[derive(Debug, Clone)]
pub struct RootSearch<T: Real> {
    /// Converged roots in the physical variable, sorted by real part then
    /// imaginary part.
    pub roots: Vec<Complex<T>>,
    /// Set when the region pokes outside the polynomial's trust radius, i.e.
    /// parts of the answer live where truncation artifacts are possible.
    pub trust_warning: bool,
}

const MAX_SWEEPS: usize = 500;
const FREEZE_TOL: f64 = 1e-14;
/// Normalized coefficients below this are treated as exact zeros when
/// stripping the leading ones (they carry no information at f64 scale).
const NEGLIGIBLE: f64 = 1e-250;

/// Finds the roots of `p` inside `region`.
///
/// Roots of the truncated polynomial outside the region are discarded
/// silently, converged or not. If a root estimate inside the region fails to
/// converge within the sweep cap, the error message carries the roots that
/// did converge.
///
/// The simultaneous iteration can park an estimate on the residual floor far
/// from the root it should have claimed (high-degree series develop wide
/// numerical-root plateaus at large `|nu|`), so the requested region is also
/// swept on a fixed grid: every strict local minimum of `|p|` is polished by
/// Newton and kept when it reaches the residual floor and is not a duplicate
/// of a root already found.
pub fn find_roots<T: Real>(
    p: &CharPolynomial<T>,
    region: &RootRegion<T>,
) -> Result<RootSearch<T>> {
    let trust_warning = region.max_distance_from(p.center) > p.trust_radius;
    let maxc = p.coeffs.iter().map(|c| c.norm()).fold(T::zero(), T::max);
    if maxc == T::zero() {
        return Err(Error::Input("zero polynomial has no discrete roots".into()));
    }
    let mut coeffs: Vec<Complex<T>> = p
        .coeffs
        .iter()
        .map(|&c| c / Complex::new(maxc, T::zero()))
        .collect();
    let negligible = r::<T>(NEGLIGIBLE);
    while coeffs.len() > 1 && coeffs.last().unwrap().norm() < negligible {
        coeffs.pop();
    }
    // Exact zero constant term: factor the root at the center out directly.
    let mut zero_roots = 0usize;
    while coeffs.len() > 1 && coeffs[0].norm() == T::zero() {
        coeffs.remove(0);
        zero_roots += 1;
    }
    let deg = coeffs.len() - 1;
    let mut nu_roots: Vec<Complex<T>> = Vec::new();
    let mut frozen: Vec<bool> = Vec::new();
    for _ in 0..zero_roots {
        nu_roots.push(Complex::new(T::zero(), T::zero()));
        frozen.push(true);
    }

    if deg > 0 {
        let (mut z, mut fz) = aberth(&coeffs);
        newton_polish(&coeffs, &mut z, &mut fz);
        nu_roots.extend(z);
        frozen.extend(fz);
    }

    let mut roots = Vec::new();
    let mut stuck = 0usize;
    for (nu, ok) in nu_roots.iter().zip(&frozen) {
        let lambda = p.center + nu;
        if !region.contains(lambda) {
            continue;
        }
        if *ok {
            roots.push(lambda);
        } else {
            stuck += 1;
        }
    }
    if deg > 0 {
        completeness_sweep(&coeffs, p.center, region, &mut roots);
    }
    sort_roots(&mut roots);
    if stuck > 0 {
        let listed: Vec<String> = roots.iter().map(|z| format!("{z:e}")).collect();
        return Err(Error::Convergence(format!(
            "{stuck} in-region root estimate(s) not converged after {MAX_SWEEPS} sweeps; \
             converged in-region roots: [{}]",
            listed.join(", ")
        )));
    }
    Ok(RootSearch {
        roots,
        trust_warning,
    })
}

/// Inner grid resolution of the completeness sweep over a two-dimensional
/// region; intervals get a finer one-dimensional grid instead.
const SWEEP_GRID_2D: usize = 160;
const SWEEP_GRID_1D: usize = 2048;
const SWEEP_NEWTON_STEPS: usize = 60;

/// Grid-scans the region for roots the simultaneous iteration missed.
///
/// Seeds are the strict local minima of `|p|` on a fixed grid (one margin
/// cell beyond each edge so a basin straddling the boundary still seeds);
/// each seed is driven by step-clamped Newton and accepted when it lands at
/// or below the residual floor, inside the region, and farther from every
/// accepted root than the local numerical-root plateau width. Grids over
/// conjugate-symmetric boxes are built exactly antisymmetric in the
/// imaginary direction so real-coefficient problems keep their root sets
/// closed under conjugation.
fn completeness_sweep<T: Real>(
    coeffs: &[Complex<T>],
    center: Complex<T>,
    region: &RootRegion<T>,
    roots: &mut Vec<Complex<T>>,
) {
    let deg = coeffs.len() - 1;
    // Region bounding box in the polynomial's own variable nu.
    let (re_lo, re_hi, im_lo, im_hi, wide) = match *region {
        RootRegion::Disk { center: rc, radius } => {
            let c = rc - center;
            (c.re - radius, c.re + radius, c.im - radius, c.im + radius, true)
        }
        RootRegion::Interval { lo, hi, im_tol } => (
            lo - center.re,
            hi - center.re,
            -im_tol - center.im,
            im_tol - center.im,
            false,
        ),
        RootRegion::Rect { re_lo, re_hi, im_lo, im_hi } => (
            re_lo - center.re,
            re_hi - center.re,
            im_lo - center.im,
            im_hi - center.im,
            true,
        ),
    };
    if !(re_lo <= re_hi && im_lo <= im_hi) {
        return;
    }

    let linspace = |lo: T, hi: T, inner: usize| -> Vec<T> {
        let n = T::from_usize(inner.max(1)).unwrap();
        let step = (hi - lo) / n;
        // One margin cell on each side: inner + 3 sample points.
        let mut out = Vec::with_capacity(inner + 3);
        for k in 0..inner + 3 {
            let kk = T::from_usize(k).unwrap() - T::one();
            out.push(lo + step * kk);
        }
        out
    };
    let (cols, mut rows) = if wide {
        (
            linspace(re_lo, re_hi, SWEEP_GRID_2D),
            linspace(im_lo, im_hi, SWEEP_GRID_2D),
        )
    } else {
        // Quasi-real interval: fine in re, three rows across the thickness.
        let mid = (im_lo + im_hi) / r::<T>(2.0);
        (linspace(re_lo, re_hi, SWEEP_GRID_1D), vec![im_lo, mid, im_hi])
    };
    if im_lo == -im_hi {
        // Exact mirror so Newton runs at conjugate seeds round identically.
        let n = rows.len();
        for j in 0..n / 2 {
            rows[n - 1 - j] = -rows[j];
        }
        if n % 2 == 1 {
            rows[n / 2] = T::zero();
        }
    }

    let nrows = rows.len();
    let ncols = cols.len();
    let mut vals = vec![T::zero(); nrows * ncols];
    for (j, &im) in rows.iter().enumerate() {
        for (k, &re) in cols.iter().enumerate() {
            let (pv, _) = horner_both(coeffs, Complex::new(re, im));
            vals[j * ncols + k] = pv.norm();
        }
    }

    let col_step = if ncols > 1 { cols[1] - cols[0] } else { T::one() };
    let row_step = if nrows > 1 { rows[1] - rows[0] } else { T::one() };
    let cell = col_step.abs().max(row_step.abs());
    let max_step = r::<T>(2.0) * cell;
    let max_roots = deg + roots.len();
    let zero = T::zero();

    'seeds: for j in 0..nrows {
        for k in 0..ncols {
            if roots.len() >= max_roots {
                break 'seeds;
            }
            let v = vals[j * ncols + k];
            let mut minimal = true;
            for dj in -1i64..=1 {
                for dk in -1i64..=1 {
                    if dj == 0 && dk == 0 {
                        continue;
                    }
                    let (nj, nk) = (j as i64 + dj, k as i64 + dk);
                    if nj < 0 || nk < 0 || nj >= nrows as i64 || nk >= ncols as i64 {
                        continue;
                    }
                    if vals[nj as usize * ncols + nk as usize] <= v {
                        minimal = false;
                    }
                }
            }
            if !minimal {
                continue;
            }

            let mut z = Complex::new(cols[k], rows[j]);
            for _ in 0..SWEEP_NEWTON_STEPS {
                let (pv, dv) = horner_both(coeffs, z);
                if pv.norm() <= residual_floor(coeffs, z) || dv.norm() == zero {
                    break;
                }
                let mut step = pv / dv;
                let sn = step.norm();
                if sn > max_step {
                    step = step * Complex::new(max_step / sn, zero);
                }
                z = z - step;
                if sn <= r::<T>(1e-16) * (T::one() + z.norm()) {
                    break;
                }
            }
            let (pv, dv) = horner_both(coeffs, z);
            let floor = residual_floor(coeffs, z);
            if pv.norm() > floor {
                continue;
            }
            let lambda = center + z;
            if !region.contains(lambda) {
                continue;
            }
            // Two seeds polishing the same root can settle anywhere on its
            // numerical plateau, so duplicates are measured by the plateau's
            // linearized width, capped at half a grid cell.
            let width = if dv.norm() > zero {
                (r::<T>(4.0) * floor / dv.norm()).min(cell / r::<T>(2.0))
            } else {
                cell / r::<T>(2.0)
            };
            let dedup = width.max(r::<T>(1e3) * T::epsilon() * (T::one() + z.norm()));
            if roots.iter().any(|w| (w - lambda).norm() <= dedup) {
                continue;
            }
            roots.push(lambda);
        }
    }
}

fn sort_roots<T: Real>(roots: &mut [Complex<T>]) {
    roots.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
}

/// Horner evaluation of p and p' (ascending coefficients).
fn horner_both<T: Real>(coeffs: &[Complex<T>], z: Complex<T>) -> (Complex<T>, Complex<T>) {
    let zero = Complex::new(T::zero(), T::zero());
    let mut p = zero;
    let mut dp = zero;
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Roundoff floor of the Horner evaluation at `z`: once |p(z)| is below a
/// few eps times `sum |c_k| |z|^k`, the point is a numerical root and no
/// iteration can improve it. Characteristic series with strong internal
/// cancellation (large |lambda|) hit this floor well above the naive
/// correction-size tolerance.
fn residual_floor<T: Real>(coeffs: &[Complex<T>], z: Complex<T>) -> T {
    let az = z.norm();
    let mut s = T::zero();
    for &c in coeffs.iter().rev() {
        s = s * az + c.norm();
    }
    r::<T>(4.0) * T::epsilon() * s
}

fn aberth<T: Real>(coeffs: &[Complex<T>]) -> (Vec<Complex<T>>, Vec<bool>) {
    let deg = coeffs.len() - 1;
    let one = Complex::new(T::one(), T::zero());
    let freeze = r::<T>(FREEZE_TOL);
    // Deterministic start: a circle through the geometric-mean root modulus,
    // rotated off the axes so real-coefficient symmetry cannot trap the
    // iteration on a symmetric stalemate.
    let ratio = coeffs[0].norm() / coeffs[deg].norm();
    let mut radius = ratio.powf(T::one() / T::from_usize(deg).unwrap());
    radius = radius.max(r(1e-8)).min(r(1e8));
    let tau = T::PI() + T::PI();
    let mut z: Vec<Complex<T>> = (0..deg)
        .map(|k| {
            let ang = tau * T::from_usize(k).unwrap() / T::from_usize(deg).unwrap() + r(0.4);
            Complex::new(radius * ang.cos(), radius * ang.sin())
        })
        .collect();
    let mut frozen = vec![false; deg];

    for _ in 0..MAX_SWEEPS {
        let mut all = true;
        for i in 0..deg {
            if frozen[i] {
                continue;
            }
            let (pv, dv) = horner_both(coeffs, z[i]);
            if pv.norm() <= residual_floor(coeffs, z[i]) {
                frozen[i] = true;
                continue;
            }
            if dv.norm() == T::zero() {
                z[i] = z[i] + Complex::new(r::<T>(1e-8) * (T::one() + z[i].norm()), T::zero());
                all = false;
                continue;
            }
            let w = pv / dv;
            let mut s = Complex::new(T::zero(), T::zero());
            let mut collided = false;
            for j in 0..deg {
                if j == i {
                    continue;
                }
                let d = z[i] - z[j];
                if d.norm() == T::zero() {
                    collided = true;
                    break;
                }
                s = s + one / d;
            }
            if collided {
                z[i] = z[i] + Complex::new(r::<T>(1e-6) * (T::one() + z[i].norm()), r(1e-6));
                all = false;
                continue;
            }
            let denom = one - w * s;
            let corr = if denom.norm() == T::zero() { w } else { w / denom };
            z[i] = z[i] - corr;
            if corr.norm() <= freeze * (T::one() + z[i].norm()) {
                frozen[i] = true;
            } else {
                all = false;
            }
        }
        if all {
            break;
        }
    }
    (z, frozen)
}

/// A few full-precision Newton steps per converged root; cheap insurance that
/// each returned root is a fixed point of the polynomial itself rather than
/// of the simultaneous iteration.
fn newton_polish<T: Real>(coeffs: &[Complex<T>], z: &mut [Complex<T>], frozen: &mut [bool]) {
    for (zi, ok) in z.iter_mut().zip(frozen.iter_mut()) {
        if !*ok {
            continue;
        }
        for _ in 0..3 {
            let (pv, dv) = horner_both(coeffs, *zi);
            if pv.norm() <= residual_floor(coeffs, *zi) || dv.norm() == T::zero() {
                break;
            }
            let step = pv / dv;
            *zi = *zi - step;
            if step.norm() <= r::<T>(1e-16) * (T::one() + zi.norm()) {
                break;
            }
        }
    }
}
