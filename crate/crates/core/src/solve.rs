//! Seed-orbit shooting at zero delay and Newton correction of approximate
//! delay orbits at fixed delay.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::floquet::{self, FloquetSettings, MonodromyReport};
use crate::fourier::PeriodicMap;
use crate::rk4::BLOWUP_NORM;
use crate::section::SectionProblem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Damping {
    None,
    ArmijoHalving,
}

#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct NewtonSettings {
    pub max_iter: usize,
    /// Convergence threshold on the L^2 residual norm.
    pub tol_residual: f64,
    /// Secondary stop on the H^1 norm of the Newton step.
    pub tol_step: f64,
    pub damping: Damping,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self { max_iter: 25, tol_residual: 1e-11, tol_step: 1e-12, damping: Damping::None }
    }
}

#[derive(Clone, Debug)]
pub struct NewtonReport {
    /// L^2 residual norm before each iteration, plus the final one.
    pub iterates: Vec<f64>,
    pub converged: bool,
    pub condition_estimate: f64,
    pub final_x: PeriodicMap,
    /// Fitted constant of the quadratic tail `r_{i+1} <= C r_i^2`, when
    /// enough iterations were performed.
    pub quadratic_fit: Option<f64>,
}

const MAX_CONDITION: f64 = 1e10;

/// Newton iteration on the discretized section at fixed delay.
pub fn newton_correct(
    problem: &SectionProblem,
    tau: f64,
    x_guess: &PeriodicMap,
    settings: &NewtonSettings,
) -> Result<NewtonReport> {
    let mut x = x_guess.clone();
    let mut iterates = Vec::new();
    let mut condition_estimate = 0.0;
    let mut converged = false;

    for _ in 0..settings.max_iter {
        let residual = problem.residual(tau, &x)?;
        let r_norm = residual.l2_norm();
        iterates.push(r_norm);
        if r_norm <= settings.tol_residual {
            converged = true;
            break;
        }

        let jac = problem.assemble_jacobian_x(tau, &x)?;
        let sv = jac.clone().svd(false, false).singular_values;
        condition_estimate = sv.max() / sv.min();
        if condition_estimate > MAX_CONDITION {
            return Err(Error::SingularJacobian(condition_estimate));
        }
        let rhs = -DVector::from_vec(residual.to_real_coeffs());
        let delta = jac
            .lu()
            .solve(&rhs)
            .ok_or(Error::SingularJacobian(condition_estimate))?;
        let step = PeriodicMap::from_real_coeffs(problem.dim(), problem.k_max, delta.as_slice());

        let next = match settings.damping {
            Damping::None => x.add(&step),
            Damping::ArmijoHalving => {
                let mut lambda = 1.0;
                let mut accepted = None;
                for _ in 0..20 {
                    let trial = x.add(&step.scale(lambda));
                    if problem.residual(tau, &trial)?.l2_norm() < r_norm {
                        accepted = Some(trial);
                        break;
                    }
                    lambda *= 0.5;
                }
                accepted.ok_or(Error::LineSearchFailed)?
            }
        };

        let step_small = step.sobolev_norm(1)? <= settings.tol_step;
        x = next;
        if step_small {
            let r = problem.residual(tau, &x)?.l2_norm();
            iterates.push(r);
            converged = r <= settings.tol_residual;
            break;
        }
    }

    if !converged {
        return Err(Error::MaxIterExceeded(settings.max_iter));
    }

    if condition_estimate == 0.0 {
        // Converged without assembling a Jacobian; estimate at the solution.
        let jac = problem.assemble_jacobian_x(tau, &x)?;
        let sv = jac.svd(false, false).singular_values;
        condition_estimate = sv.max() / sv.min();
    }

    let quadratic_fit = if iterates.len() >= 3 {
        let tail = &iterates[iterates.len() - 3..];
        let mut c: f64 = 0.0;
        for w in tail.windows(2) {
            if w[0] > 1e-300 {
                c = c.max(w[1] / (w[0] * w[0]));
            }
        }
        Some(c)
    } else {
        None
    };

    Ok(NewtonReport { iterates, converged, condition_estimate, final_x: x, quadratic_fit })
}

pub struct SeedResult {
    pub orbit: PeriodicMap,
    pub monodromy: MonodromyReport,
    pub newton: NewtonReport,
}

/// Integrate the flow and variational equation jointly over one period,
/// returning the endpoint, the linearized return map, and samples of the
/// trajectory on the collocation grid with `grid_nodes` points.
fn flow_with_variation(
    field: &crate::field::VectorFieldSpec,
    y0: &DVector<f64>,
    steps_hint: usize,
    grid_nodes: usize,
) -> Result<(DVector<f64>, DMatrix<f64>, Vec<f64>)> {
    let n = field.dim;
    let substeps = steps_hint.div_ceil(grid_nodes).max(1);
    let h = 1.0 / (grid_nodes * substeps) as f64;
    let mut y = y0.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let mut samples = vec![0.0; n * grid_nodes];
    for node in 0..grid_nodes {
        for j in 0..n {
            samples[j * grid_nodes + node] = y[j];
        }
        for s in 0..substeps {
            let t = (node * substeps + s) as f64 * h;
            // Joint RK4 step on (y, V).
            let fy = |t: f64, y: &DVector<f64>| field.eval(t, y);
            let k1y = fy(t, &y);
            let k1v = field.jac(t, &y) * &v;
            let y2 = &y + 0.5 * h * &k1y;
            let k2y = fy(t + 0.5 * h, &y2);
            let k2v = field.jac(t + 0.5 * h, &y2) * (&v + 0.5 * h * &k1v);
            let y3 = &y + 0.5 * h * &k2y;
            let k3y = fy(t + 0.5 * h, &y3);
            let k3v = field.jac(t + 0.5 * h, &y3) * (&v + 0.5 * h * &k2v);
            let y4 = &y + h * &k3y;
            let k4y = fy(t + h, &y4);
            let k4v = field.jac(t + h, &y4) * (&v + h * &k3v);
            y += (h / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
            v += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            if y.norm() > BLOWUP_NORM || v.norm() > BLOWUP_NORM {
                return Err(Error::IntegratorBlowup(y.norm().max(v.norm())));
            }
        }
    }
    Ok((y, v, samples))
}

/// Shooting for a 1-periodic orbit of the undelayed equation: Newton on
/// `F(y) = Phi^1(y) - y`, then spectral projection and one function-space
/// Newton polish.
pub fn find_seed_orbit(
    field: &crate::field::VectorFieldSpec,
    y_guess: &DVector<f64>,
    k_max: usize,
    newton: &NewtonSettings,
    floquet_settings: &FloquetSettings,
) -> Result<SeedResult> {
    let n = field.dim;
    let grid_nodes = 2 * k_max + 1;
    let mut y = y_guess.clone();
    let max_shooting = 50;
    let mut converged = false;
    for _ in 0..max_shooting {
        let (y1, v1, _) = flow_with_variation(field, &y, floquet_settings.steps, grid_nodes)?;
        let f = &y1 - &y;
        if f.norm() <= 1e-12 * (1.0 + y.norm()) {
            converged = true;
            break;
        }
        let jac = v1 - DMatrix::<f64>::identity(n, n);
        let sv = jac.clone().svd(false, false).singular_values;
        if sv.min() < 1e-10 * sv.max() {
            return Err(Error::DegenerateSeed);
        }
        let delta = jac.lu().solve(&(-f)).ok_or(Error::DegenerateSeed)?;
        y += delta;
        if y.norm() > BLOWUP_NORM {
            return Err(Error::IntegratorBlowup(y.norm()));
        }
    }
    if !converged {
        return Err(Error::ShootingDiverged(max_shooting));
    }

    let (_, v1, samples) = flow_with_variation(field, &y, floquet_settings.steps, grid_nodes)?;
    // A singular dPhi^1 - I at the converged point means Newton was never
    // well-posed here (a multiplier already sits at 1); refuse early rather
    // than let the function-space correction fail with less context.
    let shoot_jac = &v1 - DMatrix::<f64>::identity(n, n);
    // Absolute scale: when every multiplier sits at 1 the whole matrix
    // vanishes and a relative test would see nothing wrong.
    let sv = shoot_jac.svd(false, false).singular_values;
    if sv.min() < 1e-8 * (1.0 + sv.max()) {
        return Err(Error::DegenerateSeed);
    }
    let projected = PeriodicMap::from_samples(n, &samples)?;
    let problem = SectionProblem::plain(field.clone(), k_max);
    let report = newton_correct(&problem, 0.0, &projected, newton)?;
    let orbit = report.final_x.clone();
    let monodromy = floquet::monodromy_report(field, &orbit, floquet_settings)?;
    Ok(SeedResult { orbit, monodromy, newton: report })
}
