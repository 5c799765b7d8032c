//! A small zoo of built-in problems with known behaviour, shared by the
//! property sweeps, the acceptance suite and the CLI examples.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::field::VectorFieldSpec;
use crate::fourier::PeriodicMap;
use crate::oracle;

pub struct NamedProblem {
    pub name: &'static str,
    pub field: VectorFieldSpec,
    /// Starting point for the shooting stage.
    pub guess: DVector<f64>,
    /// The orbit at zero delay, when a closed form is available.
    pub orbit: Option<PeriodicMap>,
}

/// A three-mode scalar forcing used throughout the test problems.
pub fn forcing3(k_max: usize) -> PeriodicMap {
    let mut b = PeriodicMap::zero(1, k_max);
    b.set_mode(0, 0, Complex64::new(0.4, 0.0));
    b.set_mode(0, 1, Complex64::new(0.3, -0.2));
    b.set_mode(0, 2, Complex64::new(-0.1, 0.05));
    b
}

/// Scalar forcing without a mean, so that `a = 0` keeps a (degenerate) orbit.
pub fn forcing3_meanless(k_max: usize) -> PeriodicMap {
    let mut b = forcing3(k_max);
    b.set_mode(0, 0, Complex64::new(0.0, 0.0));
    b
}

pub fn scalar_linear_field(a: f64, k_max: usize) -> VectorFieldSpec {
    VectorFieldSpec::linear_affine(DMatrix::from_element(1, 1, a), forcing3(k_max))
}

/// The unit circle traversed once per period, exactly band-limited.
pub fn unit_circle_orbit(k_max: usize) -> PeriodicMap {
    let mut x = PeriodicMap::zero(2, k_max);
    // cos(2 pi t) and sin(2 pi t).
    x.set_mode(0, 1, Complex64::new(0.5, 0.0));
    x.set_mode(1, 1, Complex64::new(0.0, -0.5));
    x
}

/// The non-normal upper-triangular matrix used in the monodromy oracles.
pub fn non_normal_matrix() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[1.0, 5.0, 0.0, -2.0])
}

/// Closed-form matrix exponential of [`non_normal_matrix`]:
/// for B = [[1, 5], [0, -2]], exp(B) = [[e, 5(e - e^-2)/3], [0, e^-2]].
pub fn non_normal_exponential() -> DMatrix<f64> {
    let e = std::f64::consts::E;
    let em2 = (-2.0_f64).exp();
    DMatrix::from_row_slice(2, 2, &[e, 5.0 * (e - em2) / 3.0, 0.0, em2])
}

pub fn rotation_matrix() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.5, -1.0, 1.0, 0.5])
}

/// Five problems whose seed orbit at zero delay is non-degenerate.
pub fn nondegenerate_suite(k_max: usize) -> Vec<NamedProblem> {
    let mut suite = Vec::new();

    suite.push(NamedProblem {
        name: "scalar_linear",
        field: scalar_linear_field(1.0, k_max),
        guess: DVector::from_element(1, 0.0),
        orbit: Some(oracle::scalar_linear_delay_orbit(1.0, &forcing3(k_max), 0.0)),
    });

    let diag = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -2.0]);
    suite.push(NamedProblem {
        name: "autonomous_diag",
        field: VectorFieldSpec::linear_affine(diag, PeriodicMap::zero(2, k_max)),
        guess: DVector::zeros(2),
        orbit: Some(PeriodicMap::zero(2, k_max)),
    });

    suite.push(NamedProblem {
        name: "autonomous_non_normal",
        field: VectorFieldSpec::linear_affine(non_normal_matrix(), PeriodicMap::zero(2, k_max)),
        guess: DVector::zeros(2),
        orbit: Some(PeriodicMap::zero(2, k_max)),
    });

    let mut rotation_forcing = PeriodicMap::zero(2, k_max);
    // 0.2 (cos 2 pi t, sin 2 pi t), matching `forced_rotation` with eps = 0.2.
    rotation_forcing.set_mode(0, 1, Complex64::new(0.1, 0.0));
    rotation_forcing.set_mode(1, 1, Complex64::new(0.0, -0.1));
    suite.push(NamedProblem {
        name: "forced_rotation",
        field: VectorFieldSpec::forced_rotation(rotation_matrix(), 0.2),
        guess: DVector::zeros(2),
        orbit: Some(oracle::linear_affine_delay_orbit(
            &rotation_matrix(),
            &rotation_forcing,
            0.0,
        )),
    });

    suite.push(NamedProblem {
        name: "logistic",
        field: VectorFieldSpec::logistic(1.0, 0.1),
        guess: DVector::from_element(1, 1.0),
        orbit: None,
    });

    suite
}

/// Problems whose seed orbit carries a Floquet multiplier at 1.
pub fn degenerate_suite(k_max: usize) -> Vec<NamedProblem> {
    // a = 0 scalar with meanless forcing: x' = b(t), every antiderivative is
    // an orbit and the monodromy is the 1x1 identity.
    let forcing = forcing3_meanless(k_max);
    let mut antiderivative = PeriodicMap::zero(1, k_max);
    for k in 1..=k_max as i64 {
        let b_k = forcing.mode(0, k);
        antiderivative.set_mode(0, k, b_k / Complex64::new(0.0, 2.0 * PI * k as f64));
    }

    vec![
        NamedProblem {
            name: "scalar_integrator",
            field: VectorFieldSpec::linear_affine(DMatrix::from_element(1, 1, 0.0), forcing),
            guess: DVector::from_element(1, 0.0),
            orbit: Some(antiderivative),
        },
        NamedProblem {
            name: "limit_cycle",
            field: VectorFieldSpec::limit_cycle(),
            guess: DVector::from_vec(vec![1.0, 0.0]),
            orbit: Some(unit_circle_orbit(k_max)),
        },
    ]
}
