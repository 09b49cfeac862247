//! Power-series solution of the one-dimensional Dirac system with a Lorentz
//! scalar potential `S` and mass `m > 0`:
//!
//! ```text
//! Psi1' + (m + S) Psi1 = E Psi2
//! -Psi2' + (m + S) Psi2 = E Psi1
//! ```
//!
//! Eliminating either component gives a Schrodinger-type equation, so the
//! same formal powers apply: with `eta = m + S`, the function
//! `f = exp(-int_0^x eta)` satisfies `f'/f = -eta`, its families `phi_k`,
//! `psi_k` are built once, and the general solution is a pair of power
//! series in the energy:
//!
//! ```text
//! Psi1 = C1 sum (-1)^k E^{2k} phi_{2k}/(2k)!  + C2 sum (-1)^k E^{2k+1} phi_{2k+1}/(2k+1)!
//! Psi2 = C2 sum (-1)^k E^{2k} psi_{2k}/(2k)!  - C1 sum (-1)^k E^{2k+1} psi_{2k+1}/(2k+1)!
//! ```
//!
//! with `Psi1(0) = C1`, `Psi2(0) = C2`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::formal_powers::build_powers_with_derivative;
use crate::grid::{cumulative_integral, GridFn};
use crate::{r, Real};

/// One Dirac problem: mass, scalar potential samples, energy, and the two
/// combination constants that select the solution.
#[derive(Debug, Clone)]
pub struct DiracSpec<T: Real> {
    pub m: T,
    pub s: GridFn<T>,
    pub e: Complex<T>,
    pub c1: Complex<T>,
    pub c2: Complex<T>,
}

/// Sums the solution pair truncated at formal-power order `n` (terms with
/// `phi_k`, `psi_k` for `k <= n`). The grid of `s` must contain 0 as a node;
/// both components come back on that grid.
pub fn dirac_solve<T: Real>(spec: &DiracSpec<T>, n: usize) -> Result<(GridFn<T>, GridFn<T>)> {
    if !(spec.m > T::zero()) || !spec.m.is_finite() {
        return Err(Error::Input(format!("mass {} must be positive", spec.m)));
    }
    let s = &spec.s;
    let i0 = s.nearest_node(T::zero());
    let span = s.b() - s.a();
    if s.x(i0).abs() > r::<T>(1e-9) * (T::one() + span) {
        return Err(Error::Input(
            "potential grid must contain x = 0 as a node".into(),
        ));
    }
    let mass = Complex::new(spec.m, T::zero());
    let eta = s.map(|v| v + mass);
    let minus_log_f = cumulative_integral(&eta, i0)?;
    let f = minus_log_f.map(|v| (-v).exp());
    // f'/f = -eta exactly, so the derivative never needs differencing
    let df = f.zip(&eta, |fv, ev| -ev * fv)?;
    let fam = build_powers_with_derivative(&f, &df, i0, n)?;

    let nodes = f.values().len();
    let zero = Complex::new(T::zero(), T::zero());
    let mu = -spec.e * spec.e;
    let mut even_phi = vec![zero; nodes];
    let mut odd_phi = vec![zero; nodes];
    let mut even_psi = vec![zero; nodes];
    let mut odd_psi = vec![zero; nodes];
    let mut pow = Complex::new(T::one(), T::zero());
    let mut k = 0usize;
    loop {
        let even = 2 * k;
        let odd = 2 * k + 1;
        let mut any = false;
        if even <= n {
            let phi = fam.phi_scaled(even);
            let psi = fam.psi_scaled(even);
            for i in 0..nodes {
                even_phi[i] = even_phi[i] + pow * phi[i];
                even_psi[i] = even_psi[i] + pow * psi[i];
            }
            any = true;
        }
        if odd <= n {
            let phi = fam.phi_scaled(odd);
            let psi = fam.psi_scaled(odd);
            for i in 0..nodes {
                odd_phi[i] = odd_phi[i] + pow * phi[i];
                odd_psi[i] = odd_psi[i] + pow * psi[i];
            }
            any = true;
        }
        if !any {
            break;
        }
        pow = pow * mu;
        k += 1;
    }

    let mut psi1 = Vec::with_capacity(nodes);
    let mut psi2 = Vec::with_capacity(nodes);
    for i in 0..nodes {
        psi1.push(spec.c1 * even_phi[i] + spec.c2 * spec.e * odd_phi[i]);
        psi2.push(spec.c2 * even_psi[i] - spec.c1 * spec.e * odd_psi[i]);
    }
    Ok((
        GridFn::from_parts(s.a(), s.b(), psi1),
        GridFn::from_parts(s.a(), s.b(), psi2),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::derivative;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    /// Sup norms of the two equation residuals, derivatives by spline.
    fn system_residuals(
        psi1: &GridFn<f64>,
        psi2: &GridFn<f64>,
        eta: &GridFn<f64>,
        e: Complex<f64>,
    ) -> (f64, f64) {
        let d1 = derivative(psi1).unwrap();
        let d2 = derivative(psi2).unwrap();
        let mut r1 = 0.0f64;
        let mut r2 = 0.0f64;
        for i in 0..psi1.values().len() {
            let first = d1.values()[i] + eta.values()[i] * psi1.values()[i] - e * psi2.values()[i];
            let second = -d2.values()[i] + eta.values()[i] * psi2.values()[i] - e * psi1.values()[i];
            r1 = r1.max(first.norm());
            r2 = r2.max(second.norm());
        }
        (r1, r2)
    }

    #[test]
    fn zero_energy_decouples_into_exponentials() {
        let m = 2000;
        let s = GridFn::from_fn(-1.0, 1.0, m, |x: f64| c(0.2 * x, 0.0)).unwrap();
        let spec = DiracSpec {
            m: 1.0,
            s: s.clone(),
            e: c(0.0, 0.0),
            c1: c(0.7, -0.2),
            c2: c(-0.4, 1.1),
        };
        let (psi1, psi2) = dirac_solve(&spec, 40).unwrap();
        // closed forms: Psi1 = C1 exp(-x - 0.1 x^2), Psi2 = C2 / that factor
        for i in 0..=m {
            let x = psi1.x(i);
            let decay = (-x - 0.1 * x * x).exp();
            assert!((psi1.values()[i] - spec.c1 * decay).norm() < 1e-10);
            assert!((psi2.values()[i] - spec.c2 / decay).norm() < 1e-10);
        }
        // and the first equation holds on its own (E couples the pair)
        let eta = s.map(|v| v + c(1.0, 0.0));
        let (r1, _) = system_residuals(&psi1, &psi2, &eta, c(0.0, 0.0));
        assert!(r1 < 1e-8, "decoupled residual {r1}");

        // mass must be positive
        let bad = DiracSpec { m: 0.0, ..spec.clone() };
        assert!(dirac_solve(&bad, 40).is_err());
        let bad = DiracSpec { m: -1.0, ..spec };
        assert!(dirac_solve(&bad, 40).is_err());
    }

    #[test]
    fn free_particle_matches_the_plane_wave_solution() {
        let m = 2000;
        let s = GridFn::constant(-1.0, 1.0, m, c(0.0, 0.0));
        let spec = DiracSpec {
            m: 1.0,
            s: s.clone(),
            e: c(2.0, 0.0),
            c1: c(1.0, 0.0),
            c2: c(0.0, 0.0),
        };
        let (psi1, psi2) = dirac_solve(&spec, 60).unwrap();
        // with eta = m the pair reduces to trig with omega^2 = E^2 - m^2
        let omega = 3.0f64.sqrt();
        let mut worst = 0.0f64;
        for i in 0..=m {
            let x = psi1.x(i);
            let want1 = (omega * x).cos() - (1.0 / omega) * (omega * x).sin();
            let want2 = -(2.0 / omega) * (omega * x).sin();
            worst = worst.max((psi1.values()[i] - c(want1, 0.0)).norm());
            worst = worst.max((psi2.values()[i] - c(want2, 0.0)).norm());
        }
        assert!(worst < 1e-6, "closed-form deviation {worst}");
        let eta = s.map(|v| v + c(1.0, 0.0));
        let (r1, r2) = system_residuals(&psi1, &psi2, &eta, spec.e);
        assert!(r1 < 1e-6 && r2 < 1e-6, "residuals {r1}, {r2}");
    }

    #[test]
    fn smooth_scalar_potential_solves_the_system() {
        let m = 2000;
        let s = GridFn::from_fn(-1.0, 1.0, m, |x: f64| c(0.3 * x.sin(), 0.0)).unwrap();
        let eta = s.map(|v| v + c(1.0, 0.0));
        for (c1, c2) in [(c(1.0, 0.0), c(0.0, 0.0)), (c(0.4, -0.3), c(0.8, 0.1))] {
            let spec = DiracSpec {
                m: 1.0,
                s: s.clone(),
                e: c(1.5, 0.0),
                c1,
                c2,
            };
            let (psi1, psi2) = dirac_solve(&spec, 60).unwrap();
            let (r1, r2) = system_residuals(&psi1, &psi2, &eta, spec.e);
            assert!(r1 < 1e-4 && r2 < 1e-4, "residuals {r1}, {r2}");
        }
    }

    #[test]
    fn solution_map_is_linear_with_exact_initial_values() {
        let m = 1000;
        let s = GridFn::from_fn(-1.0, 1.0, m, |x: f64| c(0.1 * x * x, 0.05 * x)).unwrap();
        let base = DiracSpec {
            m: 0.8,
            s,
            e: c(1.2, 0.4),
            c1: c(0.9, -0.1),
            c2: c(-0.3, 0.6),
        };
        let mid = m / 2;
        let (p1, p2) = dirac_solve(&base, 50).unwrap();
        assert!((p1.values()[mid] - base.c1).norm() < 1e-14);
        assert!((p2.values()[mid] - base.c2).norm() < 1e-14);

        // additivity in the constants
        let other = DiracSpec {
            c1: c(-0.2, 0.5),
            c2: c(1.1, 0.3),
            ..base.clone()
        };
        let summed = DiracSpec {
            c1: base.c1 + other.c1,
            c2: base.c2 + other.c2,
            ..base.clone()
        };
        let (q1, q2) = dirac_solve(&other, 50).unwrap();
        let (t1, t2) = dirac_solve(&summed, 50).unwrap();
        let scale = t1.sup_norm().max(t2.sup_norm());
        for i in 0..=m {
            assert!((t1.values()[i] - p1.values()[i] - q1.values()[i]).norm() < 1e-12 * scale);
            assert!((t2.values()[i] - p2.values()[i] - q2.values()[i]).norm() < 1e-12 * scale);
        }

        // homogeneity
        let alpha = c(0.3, -1.2);
        let scaled = DiracSpec {
            c1: alpha * base.c1,
            c2: alpha * base.c2,
            ..base
        };
        let (w1, w2) = dirac_solve(&scaled, 50).unwrap();
        for i in 0..=m {
            assert!((w1.values()[i] - alpha * p1.values()[i]).norm() < 1e-12 * scale);
            assert!((w2.values()[i] - alpha * p2.values()[i]).norm() < 1e-12 * scale);
        }
    }
}
