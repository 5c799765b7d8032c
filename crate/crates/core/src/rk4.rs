//! Fixed-step classical Runge-Kutta stepping shared by the flow, variational
//! and delay integrators. Smooth coefficients make adaptivity unnecessary and
//! a fixed step keeps every run deterministic.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Norm ceiling beyond which an integration is reported as blown up.
pub const BLOWUP_NORM: f64 = 1e12;

pub fn rk4_step_vec<F>(f: &F, t: f64, y: &DVector<f64>, h: f64) -> DVector<f64>
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64>,
{
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &(y + 0.5 * h * &k1));
    let k3 = f(t + 0.5 * h, &(y + 0.5 * h * &k2));
    let k4 = f(t + h, &(y + h * &k3));
    y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

pub fn rk4_step_mat<F>(f: &F, t: f64, m: &DMatrix<f64>, h: f64) -> DMatrix<f64>
where
    F: Fn(f64, &DMatrix<f64>) -> DMatrix<f64>,
{
    let k1 = f(t, m);
    let k2 = f(t + 0.5 * h, &(m + 0.5 * h * &k1));
    let k3 = f(t + 0.5 * h, &(m + 0.5 * h * &k2));
    let k4 = f(t + h, &(m + h * &k3));
    m + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Integrate `m' = f(t, m)` on `[0, 1]` with `steps` equal steps, returning
/// the value at every node `t_i = i/steps` (length `steps + 1`).
pub fn integrate_matrix_ode<F>(
    f: &F,
    m0: DMatrix<f64>,
    steps: usize,
) -> Result<Vec<DMatrix<f64>>>
where
    F: Fn(f64, &DMatrix<f64>) -> DMatrix<f64>,
{
    let h = 1.0 / steps as f64;
    let mut nodes = Vec::with_capacity(steps + 1);
    nodes.push(m0);
    for i in 0..steps {
        let t = i as f64 * h;
        let next = rk4_step_mat(f, t, &nodes[i], h);
        if next.norm() > BLOWUP_NORM {
            return Err(Error::IntegratorBlowup(next.norm()));
        }
        nodes.push(next);
    }
    Ok(nodes)
}
