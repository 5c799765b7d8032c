//! Closed-form solutions of linear-affine delay equations, used as an
//! independent check on the collocation solver.
//!
//! For `dx/dt = B x(t - tau) + b(t)` the Fourier modes decouple:
//! `(2 pi i k I - B e^{-2 pi i k tau}) x_k = b_k`. Everything here is plain
//! complex arithmetic on the forcing modes and never touches the solver.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::fourier::PeriodicMap;

/// Exact 1-periodic solution of `dx/dt = B x(t - tau) + b(t)`.
///
/// Panics if some mode matrix is singular (the degenerate case, e.g. the
/// scalar equation with `a = 0` at `k = 0`).
pub fn linear_affine_delay_orbit(
    matrix: &DMatrix<f64>,
    forcing: &PeriodicMap,
    tau: f64,
) -> PeriodicMap {
    let dim = forcing.dim();
    let k_max = forcing.k_max() as i64;
    let b_c = matrix.map(|v| Complex64::new(v, 0.0));
    let mut out = PeriodicMap::zero(dim, forcing.k_max());
    // Real data gives x_{-k} = conj(x_k), so solving k >= 0 suffices.
    for k in 0..=k_max {
        let w = Complex64::new(0.0, 2.0 * PI * k as f64);
        let phase = (-w * tau).exp();
        let m = DMatrix::<Complex64>::identity(dim, dim) * w - &b_c * phase;
        let rhs = DVector::from_fn(dim, |j, _| forcing.mode(j, k));
        let x_k = m
            .lu()
            .solve(&rhs)
            .expect("mode matrix singular: degenerate linear delay problem");
        for j in 0..dim {
            out.set_mode(j, k, x_k[j]);
        }
    }
    out
}

/// Scalar specialization: modes `x_k = b_k / (2 pi i k - a e^{-2 pi i k tau})`.
pub fn scalar_linear_delay_orbit(a: f64, forcing: &PeriodicMap, tau: f64) -> PeriodicMap {
    scalar_linear_delay_orbit_derivative(a, forcing, tau, 0)
}

/// `p`-th derivative in `tau` of the closed-form scalar modes, `p <= 4`.
///
/// With `w = 2 pi i k`, `g(tau) = w - a e^{-w tau}` and `x_k = b_k / g`, the
/// derivatives of `y = 1/g` follow from Leibniz applied to `g y = 1`:
/// `y^(p) = -(1/g) * sum_{j=1..p} C(p,j) g^(j) y^(p-j)`,
/// where `g^(j) = -a (-w)^j e^{-w tau}` for `j >= 1`.
pub fn scalar_linear_delay_orbit_derivative(
    a: f64,
    forcing: &PeriodicMap,
    tau: f64,
    order: usize,
) -> PeriodicMap {
    assert!(order <= 4, "derivative order capped at 4");
    assert_eq!(forcing.dim(), 1);
    let k_max = forcing.k_max() as i64;
    let mut out = PeriodicMap::zero(1, forcing.k_max());
    let binom = [
        [1.0, 0.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0, 0.0],
        [1.0, 2.0, 1.0, 0.0, 0.0],
        [1.0, 3.0, 3.0, 1.0, 0.0],
        [1.0, 4.0, 6.0, 4.0, 1.0],
    ];
    for k in 0..=k_max {
        let w = Complex64::new(0.0, 2.0 * PI * k as f64);
        let exp_term = (-w * tau).exp();
        let g = w - a * exp_term;
        let g_deriv = |j: usize| -> Complex64 { -a * (-w).powu(j as u32) * exp_term };
        let mut y = [Complex64::new(0.0, 0.0); 5];
        y[0] = 1.0 / g;
        for p in 1..=order {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 1..=p {
                acc += binom[p][j] * g_deriv(j) * y[p - j];
            }
            y[p] = -acc / g;
        }
        out.set_mode(0, k, forcing.mode(0, k) * y[order]);
    }
    out
}
