//! Bessel functions J0, J1, I0, I1 for complex argument, by ascending power
//! series, plus the entire ratio forms the kernel formulas need.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::{r, Real};

/// Validity bound: the ascending series is used for `|z| <= 40` only.
pub const MAX_ARG: f64 = 40.0;

const MAX_TERMS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselKind {
    J0,
    J1,
    I0,
    I1,
}

/// Evaluates the selected Bessel function at complex `z` by its ascending
/// series, summing until the terms fall below 1e-18 relative to the
/// accumulated value. Arguments with `|z| > 40` are rejected.
pub fn bessel_eval<T: Real>(kind: BesselKind, z: Complex<T>) -> Result<Complex<T>> {
    if z.norm() > r::<T>(MAX_ARG) {
        return Err(Error::OutOfRange(format!(
            "bessel argument |z| = {} exceeds {MAX_ARG}",
            z.norm()
        )));
    }
    let w = z * z / r::<T>(4.0);
    match kind {
        BesselKind::J0 => Ok(series_order0(-w)),
        BesselKind::I0 => Ok(series_order0(w)),
        BesselKind::J1 => Ok(z * series_order1(-w) / r::<T>(2.0)),
        BesselKind::I1 => Ok(z * series_order1(w) / r::<T>(2.0)),
    }
}

/// `J1(sqrt(w)) / sqrt(w)`, entire in `w`; equals 1/2 at `w = 0`.
///
/// With `w = c (x^2 - t^2)` this is the regular factor of the constant-q
/// kernel, valid for any complex `w` with `|w| <= 1600`.
pub fn j1_ratio<T: Real>(w: Complex<T>) -> Result<Complex<T>> {
    check_ratio_arg(w)?;
    Ok(series_order1(-w / r::<T>(4.0)) / r::<T>(2.0))
}

/// `I1(sqrt(w)) / sqrt(w)`, entire in `w`; equals 1/2 at `w = 0`.
pub fn i1_ratio<T: Real>(w: Complex<T>) -> Result<Complex<T>> {
    check_ratio_arg(w)?;
    Ok(series_order1(w / r::<T>(4.0)) / r::<T>(2.0))
}

/// `I0(sqrt(w))`, entire in `w`.
pub fn i0_sqrt<T: Real>(w: Complex<T>) -> Result<Complex<T>> {
    check_ratio_arg(w)?;
    Ok(series_order0(w / r::<T>(4.0)))
}

fn check_ratio_arg<T: Real>(w: Complex<T>) -> Result<()> {
    if w.norm() > r::<T>(MAX_ARG * MAX_ARG) {
        return Err(Error::OutOfRange(format!(
            "squared bessel argument |w| = {} exceeds {}",
            w.norm(),
            MAX_ARG * MAX_ARG
        )));
    }
    Ok(())
}

/// `sum_m u^m / (m!)^2`.
fn series_order0<T: Real>(u: Complex<T>) -> Complex<T> {
    sum_terms(u, |m| {
        let mf = T::from_usize(m).unwrap();
        mf * mf
    })
}

/// `sum_m u^m / (m! (m+1)!)`.
fn series_order1<T: Real>(u: Complex<T>) -> Complex<T> {
    sum_terms(u, |m| {
        let mf = T::from_usize(m).unwrap();
        mf * (mf + T::one())
    })
}

fn sum_terms<T: Real>(u: Complex<T>, denom: impl Fn(usize) -> T) -> Complex<T> {
    let rel = r::<T>(1e-18);
    let mut term = Complex::new(T::one(), T::zero());
    let mut acc = term;
    let mut prev_mag = T::infinity();
    for m in 1..=MAX_TERMS {
        term = term * u / denom(m);
        acc = acc + term;
        let mag = term.norm();
        // Terms may grow before the factorial wins; test the stop rule only
        // once they decrease.
        if mag < prev_mag && mag <= rel * acc.norm().max(T::min_positive_value()) {
            break;
        }
        prev_mag = mag;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn reference_values() {
        // Tolerances scale with the largest series term: the alternating J
        // series at z = 10 peaks near 6.8e2, so roundoff there caps accuracy
        // at a few hundred ulps even though every term is summed.
        let cases = [
            (BesselKind::J1, 1.0, 0.44005058574493351596, 1e-14),
            (BesselKind::I1, 2.0, 1.5906368546373290634, 1e-14),
            (BesselKind::J0, 1.0, 0.76519768655796655145, 1e-14),
            (BesselKind::I0, 1.0, 1.2660658777520083356, 1e-14),
            (BesselKind::J0, 2.7, -0.14244937004601182182, 1e-14),
            (BesselKind::J1, 5.5, -0.34143821542904335018, 1e-13),
            (BesselKind::I0, 3.25, 5.9893359979395184398, 1e-14),
            (BesselKind::I1, 0.75, 0.40199246158092220525, 1e-14),
            (BesselKind::J0, 10.0, -0.2459357644513483352, 1e-12),
        ];
        for (kind, z, want, tol) in cases {
            let got = bessel_eval(kind, c(z, 0.0)).unwrap();
            assert!(
                (got.re - want).abs() < tol && got.im.abs() < 1e-15,
                "{kind:?}({z}) = {got}"
            );
        }
    }

    #[test]
    fn derivative_identities() {
        // J0' = -J1 and I0' = I1, checked by central differences on [0, 10].
        let eps = 1e-6;
        for k in 0..=100 {
            let z = 0.05 + 0.0995 * k as f64;
            let num_j = (bessel_eval(BesselKind::J0, c(z + eps, 0.0)).unwrap()
                - bessel_eval(BesselKind::J0, c(z - eps, 0.0)).unwrap())
                / c(2.0 * eps, 0.0);
            let j1 = bessel_eval(BesselKind::J1, c(z, 0.0)).unwrap();
            assert!((num_j + j1).norm() < 1e-6, "J at {z}");
            let num_i = (bessel_eval(BesselKind::I0, c(z + eps, 0.0)).unwrap()
                - bessel_eval(BesselKind::I0, c(z - eps, 0.0)).unwrap())
                / c(2.0 * eps, 0.0);
            let i1 = bessel_eval(BesselKind::I1, c(z, 0.0)).unwrap();
            assert!((num_i - i1).norm() < 1e-4 * i1.norm().max(1.0), "I at {z}");
        }
    }

    #[test]
    fn rejects_large_argument() {
        assert!(matches!(
            bessel_eval(BesselKind::J0, c(41.0, 0.0)),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn ratio_forms_match_direct_evaluation() {
        for (re, im) in [(0.5, 0.0), (2.0, 1.0), (-3.0, 0.7), (9.0, -2.0)] {
            let w = c(re, im);
            let z = w.sqrt();
            let j_direct = bessel_eval(BesselKind::J1, z).unwrap() / z;
            assert!((j1_ratio(w).unwrap() - j_direct).norm() < 1e-14);
            let i_direct = bessel_eval(BesselKind::I1, z).unwrap() / z;
            assert!((i1_ratio(w).unwrap() - i_direct).norm() < 1e-14);
            let i0_direct = bessel_eval(BesselKind::I0, z).unwrap();
            assert!((i0_sqrt(w).unwrap() - i0_direct).norm() < 1e-14);
        }
        assert!((j1_ratio(c(0.0, 0.0)).unwrap().re - 0.5).abs() < 1e-16);
        assert!((i1_ratio(c(0.0, 0.0)).unwrap().re - 0.5).abs() < 1e-16);
    }
}
