//! Non-degeneracy certification through Floquet theory: fundamental and
//! adjoint systems along an orbit, the monodromy matrix and its multipliers,
//! and cokernel witnesses when a multiplier sits at 1.
//!
//! Along a 1-periodic orbit `x` we set `A(t) = -dX_t(x(t))^T` and integrate
//! `Y' = A Y` and `Z' = -A^T Z` from the identity. Then `Z^T Y = I` holds for
//! all `t`, the monodromy matrix is `(Y(1)^T)^{-1}`, and `Z(1)` is a second,
//! independently integrated route to the same matrix.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{self, VectorFieldSpec};
use crate::fourier::PeriodicMap;
use crate::rk4;
use crate::section::{SectionProblem, TangentVector};

#[derive(Clone, Copy, Debug)]
pub struct FloquetSettings {
    /// RK4 steps over one period.
    pub steps: usize,
    /// Distance of a multiplier to 1 below which the orbit counts as degenerate.
    pub tol_nondeg: f64,
    /// Report the Y-Z defect for Hamiltonian fields, where the two systems coincide.
    pub hamiltonian: bool,
}

impl Default for FloquetSettings {
    fn default() -> Self {
        Self { steps: 2048, tol_nondeg: 1e-4, hamiltonian: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Verdict {
    NonDegenerate,
    Degenerate,
    Inconclusive,
}

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct MonodromyReport {
    pub y1: DMatrix<f64>,
    pub z1: DMatrix<f64>,
    pub monodromy: DMatrix<f64>,
    pub multipliers: Vec<Complex64>,
    pub min_dist_to_one: f64,
    pub verdict: Verdict,
    /// `max_t || Z(t)^T Y(t) - I ||`
    pub adjoint_defect: f64,
    /// Relative disagreement between `(Y(1)^T)^{-1}` and the directly
    /// integrated variational solution `Z(1)`.
    pub two_route_defect: f64,
    /// `max_t || Y(t) - Z(t) ||`, reported for Hamiltonian fields only.
    pub y_z_defect: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct CokernelCandidate {
    pub eta0: DVector<f64>,
    /// Adjoint-equation trajectory `eta(t_i) = Y(t_i) eta(0)` at integrator nodes.
    pub eta: Vec<DVector<f64>>,
    /// `|| eta(1) - eta(0) ||`
    pub periodicity_defect: f64,
    /// Worst normalized pairing `|<ds_0(x) xhat, eta>_0|` over random directions.
    pub pairing_defect: f64,
}

/// Solve `Y' = A(t) Y`, `Y(0) = I` on one period, sampled at `steps + 1` nodes.
pub fn fundamental_system<F>(a: &F, dim: usize, steps: usize) -> Result<Vec<DMatrix<f64>>>
where
    F: Fn(f64) -> DMatrix<f64>,
{
    assert!(steps >= 64, "at least 64 integration steps");
    rk4::integrate_matrix_ode(&|t, y: &DMatrix<f64>| a(t) * y, DMatrix::identity(dim, dim), steps)
}

fn orbit_residual(field: &VectorFieldSpec, x: &PeriodicMap) -> Result<f64> {
    Ok(x.derivative().sub(&field::eval_on_orbit(field, x)?).l2_norm())
}

fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<Complex64> {
    let mut ev: Vec<Complex64> = m
        .clone()
        .complex_eigenvalues()
        .iter()
        .map(|c| Complex64::new(c.re, c.im))
        .collect();
    ev.sort_by(|a, b| {
        b.norm()
            .partial_cmp(&a.norm())
            .unwrap()
            .then(a.arg().partial_cmp(&b.arg()).unwrap())
    });
    ev
}

pub fn monodromy_report(
    field: &VectorFieldSpec,
    x: &PeriodicMap,
    settings: &FloquetSettings,
) -> Result<MonodromyReport> {
    let res = orbit_residual(field, x)?;
    if res > 1e-6 {
        return Err(Error::NotAnOrbit(res));
    }
    let n = field.dim;
    let a = |t: f64| -field.jac(t, &DVector::from_vec(x.eval(t))).transpose();
    let y_nodes = fundamental_system(&a, n, settings.steps)?;
    // Z' = -A^T Z is exactly the variational equation Z' = dX(x) Z.
    let z_nodes = rk4::integrate_matrix_ode(
        &|t, z: &DMatrix<f64>| -a(t).transpose() * z,
        DMatrix::identity(n, n),
        settings.steps,
    )?;

    let eye = DMatrix::<f64>::identity(n, n);
    let mut adjoint_defect = 0.0_f64;
    for (yk, zk) in y_nodes.iter().zip(&z_nodes) {
        adjoint_defect = adjoint_defect.max((zk.transpose() * yk - &eye).norm());
    }
    let mut y_z_defect = None;
    if settings.hamiltonian {
        let d = y_nodes
            .iter()
            .zip(&z_nodes)
            .map(|(yk, zk)| (yk - zk).norm())
            .fold(0.0_f64, f64::max);
        y_z_defect = Some(d);
    }

    let y1 = y_nodes.last().unwrap().clone();
    let z1 = z_nodes.last().unwrap().clone();
    let monodromy = y1
        .transpose()
        .try_inverse()
        .ok_or(Error::SingularJacobian(f64::INFINITY))?;
    let two_route_defect = (&monodromy - &z1).norm() / monodromy.norm();

    let multipliers = sorted_eigenvalues(&monodromy);
    let min_dist_to_one = multipliers
        .iter()
        .map(|l| (l - Complex64::new(1.0, 0.0)).norm())
        .fold(f64::INFINITY, f64::min);
    let verdict = if adjoint_defect > 1e-8 || two_route_defect > 1e-7 {
        Verdict::Inconclusive
    } else if min_dist_to_one > settings.tol_nondeg {
        Verdict::NonDegenerate
    } else {
        Verdict::Degenerate
    };

    Ok(MonodromyReport {
        y1,
        z1,
        monodromy,
        multipliers,
        min_dist_to_one,
        verdict,
        adjoint_defect,
        two_route_defect,
        y_z_defect,
    })
}

/// Witnesses of cokernel directions: 1-periodic solutions of the adjoint ODE
/// `eta' = A(t) eta`, which exist exactly when `Y(1)` has eigenvalue 1. Each
/// witness is checked for L^2-orthogonality against the range of the
/// linearized section at `tau = 0`.
pub fn cokernel_search(
    field: &VectorFieldSpec,
    x: &PeriodicMap,
    settings: &FloquetSettings,
    rng: &mut impl rand::Rng,
) -> Result<Vec<CokernelCandidate>> {
    let res = orbit_residual(field, x)?;
    if res > 1e-6 {
        return Err(Error::NotAnOrbit(res));
    }
    let n = field.dim;
    let a = |t: f64| -field.jac(t, &DVector::from_vec(x.eval(t))).transpose();
    let y_nodes = fundamental_system(&a, n, settings.steps)?;
    let y1 = y_nodes.last().unwrap().clone();

    let near_one = sorted_eigenvalues(&y1)
        .iter()
        .filter(|l| (*l - Complex64::new(1.0, 0.0)).norm() <= settings.tol_nondeg)
        .count();
    if near_one == 0 {
        return Ok(Vec::new());
    }

    // Null directions of Y(1) - I from the smallest right singular vectors.
    let shifted = &y1 - DMatrix::<f64>::identity(n, n);
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("svd requested V^T");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].partial_cmp(&svd.singular_values[j]).unwrap());

    let problem = SectionProblem::plain(field.clone(), x.k_max().max(4));
    let mut candidates = Vec::new();
    for &idx in order.iter().take(near_one) {
        let eta0: DVector<f64> = v_t.row(idx).transpose();
        let eta: Vec<DVector<f64>> = y_nodes.iter().map(|yk| yk * &eta0).collect();
        let periodicity_defect = (eta.last().unwrap() - &eta0).norm();

        let eta_l2 = {
            let steps = settings.steps;
            (eta.iter().take(steps).map(|e| e.norm_squared()).sum::<f64>() / steps as f64).sqrt()
        };
        let mut pairing_defect = 0.0_f64;
        for _ in 0..50 {
            let xhat = PeriodicMap::random(n, x.k_max(), rng);
            let image = problem.linearize(0.0, x, &TangentVector { dtau: 0.0, dx: xhat.clone() })?;
            let steps = settings.steps;
            let mut inner = 0.0;
            for (i, e) in eta.iter().take(steps).enumerate() {
                let t = i as f64 / steps as f64;
                let g = DVector::from_vec(image.eval(t));
                inner += g.dot(e);
            }
            inner /= steps as f64;
            let scale = xhat.sobolev_norm(1).unwrap() * eta_l2;
            pairing_defect = pairing_defect.max(inner.abs() / scale);
        }
        candidates.push(CokernelCandidate { eta0, eta, periodicity_defect, pairing_defect });
    }
    Ok(candidates)
}
