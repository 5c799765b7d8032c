//! Marching the solution branch in the delay parameter: implicit-function
//! tangents, predictor-corrector stepping with adaptive step control, and
//! divided-difference smoothness diagnostics for the parametrization.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::fourier::PeriodicMap;
use crate::section::{IndexReport, SectionProblem};
use crate::solve::{self, NewtonSettings};

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct PointCertificate {
    pub residual_norm: f64,
    pub newton_iterations: usize,
    pub condition_estimate: f64,
    pub kernel_dim_full: usize,
    pub kernel_dim_x_only: usize,
    /// Delay component of the normalized bordered kernel vector.
    pub kernel_tau_component: f64,
    pub tail_energy_fraction: f64,
}

#[derive(Clone)]
pub struct BranchPoint {
    pub tau: f64,
    pub x: PeriodicMap,
    /// dx/dtau from the bordered linear solve.
    pub tangent_dx: PeriodicMap,
    pub certificate: PointCertificate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum TerminationReason {
    ReachedTarget,
    SingularJacobian,
    NewtonFailed,
    StepUnderflow,
}

#[derive(Clone)]
pub struct OrbitBranch {
    pub points: Vec<BranchPoint>,
    pub tau_range: (f64, f64),
    pub termination_reason: TerminationReason,
}

#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct StepControl {
    pub initial: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub growth: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { initial: 0.02, min_step: 1e-5, max_step: 0.05, growth: 1.5 }
    }
}

/// Branch tangent at `(tau, x)`: solve `ds_x . v = -d_tau s`.
pub fn tangent(problem: &SectionProblem, tau: f64, x: &PeriodicMap) -> Result<PeriodicMap> {
    let jac = problem.assemble_jacobian_x(tau, x)?;
    let rhs = -DVector::from_vec(problem.tau_derivative(tau, x)?.to_real_coeffs());
    let sol = jac
        .lu()
        .solve(&rhs)
        .ok_or(Error::SingularJacobian(f64::INFINITY))?;
    Ok(PeriodicMap::from_real_coeffs(problem.dim(), problem.k_max, sol.as_slice()))
}

fn certify_point(
    problem: &SectionProblem,
    tau: f64,
    x: &PeriodicMap,
    report: &solve::NewtonReport,
) -> Result<(PointCertificate, IndexReport)> {
    let index = problem.index_diagnostic(tau, x)?;
    let kernel = problem.bordered_kernel_vector(tau, x)?;
    let cert = PointCertificate {
        residual_norm: *report.iterates.last().unwrap(),
        newton_iterations: report.iterates.len(),
        condition_estimate: report.condition_estimate,
        kernel_dim_full: index.kernel_dim_full,
        kernel_dim_x_only: index.kernel_dim_x_only,
        kernel_tau_component: kernel[0].abs(),
        tail_energy_fraction: x.tail_energy_fraction(),
    };
    Ok((cert, index))
}

/// Build a branch point at a given delay from a converged Newton result.
pub fn accept_point(
    problem: &SectionProblem,
    tau: f64,
    report: &solve::NewtonReport,
) -> Result<BranchPoint> {
    let x = report.final_x.clone();
    let (certificate, _) = certify_point(problem, tau, &x, report)?;
    let tangent_dx = tangent(problem, tau, &x)?;
    Ok(BranchPoint { tau, x, tangent_dx, certificate })
}

/// Tangent-predictor, Newton-corrector continuation from a certified seed at
/// `tau = 0` toward `tau_target` (either sign). Steps halve on Newton failure
/// and grow after two consecutive successes.
pub fn continue_branch(
    problem: &SectionProblem,
    seed: BranchPoint,
    tau_target: f64,
    step: &StepControl,
    newton: &NewtonSettings,
) -> OrbitBranch {
    let sign = if tau_target < seed.tau { -1.0 } else { 1.0 };
    let mut points = vec![seed];
    let mut h = step.initial.min(step.max_step);
    let mut successes = 0usize;
    let reason;

    loop {
        let last = points.last().unwrap();
        if (tau_target - last.tau).abs() < 1e-14 || sign * (tau_target - last.tau) <= 0.0 {
            reason = TerminationReason::ReachedTarget;
            break;
        }
        let remaining = (tau_target - last.tau).abs();
        let h_try = h.min(remaining);
        let tau_next = last.tau + sign * h_try;
        let predictor = last.x.add(&last.tangent_dx.scale(sign * h_try));
        match solve::newton_correct(problem, tau_next, &predictor, newton) {
            Ok(report) => match accept_point(problem, tau_next, &report) {
                Ok(point) => {
                    points.push(point);
                    successes += 1;
                    if successes >= 2 {
                        h = (h * step.growth).min(step.max_step);
                        successes = 0;
                    }
                }
                Err(_) => {
                    reason = TerminationReason::SingularJacobian;
                    break;
                }
            },
            Err(Error::SingularJacobian(_)) => {
                if h_try * 0.5 >= step.min_step {
                    h = h_try * 0.5;
                    successes = 0;
                } else {
                    reason = TerminationReason::SingularJacobian;
                    break;
                }
            }
            Err(_) => {
                if h_try * 0.5 >= step.min_step {
                    h = h_try * 0.5;
                    successes = 0;
                } else {
                    reason = TerminationReason::NewtonFailed;
                    break;
                }
            }
        }
        if h < step.min_step {
            reason = TerminationReason::StepUnderflow;
            break;
        }
    }

    let tau_min = points.iter().map(|p| p.tau).fold(f64::INFINITY, f64::min);
    let tau_max = points.iter().map(|p| p.tau).fold(f64::NEG_INFINITY, f64::max);
    OrbitBranch { points, tau_range: (tau_min, tau_max), termination_reason: reason }
}

/// A branch on a uniform delay grid, for the smoothness diagnostics.
pub fn uniform_branch(
    problem: &SectionProblem,
    seed: &BranchPoint,
    h: f64,
    count_per_side: usize,
    newton: &NewtonSettings,
) -> Result<Vec<BranchPoint>> {
    let mut points = vec![seed.clone()];
    for &sign in &[1.0, -1.0] {
        let mut last = seed.clone();
        for j in 1..=count_per_side {
            let tau = sign * h * j as f64;
            let predictor = last.x.add(&last.tangent_dx.scale(tau - last.tau));
            let report = solve::newton_correct(problem, tau, &predictor, newton)?;
            let point = accept_point(problem, tau, &report)?;
            last = point.clone();
            points.push(point);
        }
    }
    points.sort_by(|a, b| a.tau.partial_cmp(&b.tau).unwrap());
    Ok(points)
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct SmoothnessEntry {
    pub order: usize,
    pub level: usize,
    pub observed_rate: f64,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct SmoothnessReport {
    pub entries: Vec<SmoothnessEntry>,
    pub tangent_agreement: f64,
    pub pass: bool,
}

/// Central divided-difference stencil of the given order at spacing `stride`
/// around the center index.
fn divided_difference(
    points: &[BranchPoint],
    center: usize,
    order: usize,
    stride: usize,
    h: f64,
) -> PeriodicMap {
    let s = stride as f64 * h;
    let x = |offset: i64| -> &PeriodicMap {
        &points[(center as i64 + offset * stride as i64) as usize].x
    };
    match order {
        1 => x(1).sub(x(-1)).scale(1.0 / (2.0 * s)),
        2 => x(1).sub(&x(0).scale(2.0)).add(x(-1)).scale(1.0 / (s * s)),
        3 => x(2)
            .sub(&x(1).scale(2.0))
            .add(&x(-1).scale(2.0))
            .sub(x(-2))
            .scale(1.0 / (2.0 * s * s * s)),
        4 => x(2)
            .sub(&x(1).scale(4.0))
            .add(&x(0).scale(6.0))
            .sub(&x(-1).scale(4.0))
            .add(x(-2))
            .scale(1.0 / (s * s * s * s)),
        _ => panic!("divided differences implemented for orders 1..4"),
    }
}

/// Smoothness of the parametrization `tau -> x_tau` on a uniform grid.
///
/// With an analytic `reference(tau, order)` the observed rate comes from the
/// error at spacings `h` and `2h` (expected 2 for central stencils). Without
/// one, self-convergence uses spacings `h`, `2h`, `4h`.
pub fn smoothness_diagnostic(
    points: &[BranchPoint],
    max_order: usize,
    levels: &[usize],
    reference: Option<&dyn Fn(f64, usize) -> PeriodicMap>,
) -> Result<SmoothnessReport> {
    let needed = if reference.is_some() { 9 } else { 17 };
    if points.len() < needed {
        return Err(Error::InsufficientPoints { needed, got: points.len() });
    }
    let h = points[1].tau - points[0].tau;
    for w in points.windows(2) {
        let d = w[1].tau - w[0].tau;
        if (d - h).abs() > 1e-12 {
            return Err(Error::InsufficientPoints { needed, got: points.len() });
        }
    }
    let center = points.len() / 2;
    let tau_c = points[center].tau;

    let mut entries = Vec::new();
    for order in 1..=max_order.min(4) {
        let d1 = divided_difference(points, center, order, 1, h);
        let d2 = divided_difference(points, center, order, 2, h);
        for &m in levels {
            let rate = match reference {
                Some(f) => {
                    let exact = f(tau_c, order);
                    let e1 = d1.sub(&exact).sobolev_norm(m)?;
                    let e2 = d2.sub(&exact).sobolev_norm(m)?;
                    (e2 / e1).log2()
                }
                None => {
                    let d4 = divided_difference(points, center, order, 4, h);
                    let e1 = d2.sub(&d1).sobolev_norm(m)?;
                    let e2 = d4.sub(&d2).sobolev_norm(m)?;
                    (e2 / e1).log2()
                }
            };
            entries.push(SmoothnessEntry { order, level: m, observed_rate: rate });
        }
    }

    // First-order differences should agree with the stored IFT tangents.
    let d1 = divided_difference(points, center, 1, 1, h);
    let tangent_agreement = d1
        .sub(&points[center].tangent_dx)
        .sobolev_norm(0)?
        / (1.0 + points[center].tangent_dx.sobolev_norm(0)?);

    let pass = entries.iter().all(|e| e.observed_rate >= 1.5);
    Ok(SmoothnessReport { entries, tangent_agreement, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::VectorFieldSpec;
    use crate::oracle;
    use crate::section::TangentVector;
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    fn forcing() -> PeriodicMap {
        let mut b = PeriodicMap::zero(1, 16);
        b.set_mode(0, 0, Complex64::new(0.4, 0.0));
        b.set_mode(0, 1, Complex64::new(0.3, -0.2));
        b.set_mode(0, 2, Complex64::new(-0.1, 0.05));
        b
    }

    fn scalar_problem(a: f64) -> SectionProblem {
        SectionProblem::plain(
            VectorFieldSpec::linear_affine(DMatrix::from_element(1, 1, a), forcing()),
            16,
        )
    }

    fn seed_point(problem: &SectionProblem, a: f64) -> BranchPoint {
        let x = oracle::scalar_linear_delay_orbit(a, &forcing(), 0.0);
        let report =
            solve::newton_correct(problem, 0.0, &x, &NewtonSettings::default()).unwrap();
        accept_point(problem, 0.0, &report).unwrap()
    }

    #[test]
    fn tangent_solves_the_bordered_system() {
        let p = scalar_problem(1.0);
        let tau = 0.12;
        let x = oracle::scalar_linear_delay_orbit(1.0, &forcing(), tau);
        let v = tangent(&p, tau, &x).unwrap();
        let defect = p
            .linearize(tau, &x, &TangentVector { dtau: 1.0, dx: v.clone() })
            .unwrap()
            .l2_norm();
        assert!(defect <= 1e-9 * (1.0 + x.sobolev_norm(1).unwrap()));
    }

    #[test]
    fn tangent_matches_analytic_derivative_of_closed_form() {
        let p = scalar_problem(1.0);
        let tau = 0.15;
        let x = oracle::scalar_linear_delay_orbit(1.0, &forcing(), tau);
        let v = tangent(&p, tau, &x).unwrap();
        let exact = oracle::scalar_linear_delay_orbit_derivative(1.0, &forcing(), tau, 1);
        assert!(v.sub(&exact).l2_norm() <= 1e-8);
    }

    #[test]
    fn tangent_is_zero_on_fixed_point_branch() {
        let field = VectorFieldSpec::linear_affine(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, -2.0]),
            PeriodicMap::zero(2, 8),
        );
        let p = SectionProblem::plain(field, 8);
        let v = tangent(&p, 0.3, &PeriodicMap::zero(2, 8)).unwrap();
        assert!(v.l2_norm() < 1e-12);
    }

    #[test]
    fn tangent_matches_branch_finite_differences() {
        let p = scalar_problem(1.0);
        let tau = 0.1;
        let x = oracle::scalar_linear_delay_orbit(1.0, &forcing(), tau);
        let v = tangent(&p, tau, &x).unwrap();
        let solve_at = |t: f64| {
            let guess = oracle::scalar_linear_delay_orbit(1.0, &forcing(), t);
            solve::newton_correct(&p, t, &guess, &NewtonSettings::default())
                .unwrap()
                .final_x
        };
        let fd = |h: f64| solve_at(tau + h).sub(&solve_at(tau - h)).scale(1.0 / (2.0 * h));
        let e1 = fd(1e-3).sub(&v).l2_norm();
        let e2 = fd(2e-3).sub(&v).l2_norm();
        let rate = (e2 / e1).log2();
        assert!(rate > 1.8, "observed rate {rate:.2}");
    }

    #[test]
    fn branch_reaches_target_and_matches_closed_form() {
        let p = scalar_problem(1.0);
        let seed = seed_point(&p, 1.0);
        let branch = continue_branch(
            &p,
            seed,
            0.3,
            &StepControl::default(),
            &NewtonSettings::default(),
        );
        assert_eq!(branch.termination_reason, TerminationReason::ReachedTarget);
        assert!((branch.tau_range.1 - 0.3).abs() < 1e-13);
        for point in &branch.points {
            let exact = oracle::scalar_linear_delay_orbit(1.0, &forcing(), point.tau);
            let err = point.x.sub(&exact).sobolev_norm(1).unwrap();
            assert!(err <= 1e-8, "tau {}: H^1 error {err:.3e}", point.tau);
            assert_eq!(point.certificate.kernel_dim_full, 1);
            assert!(point.certificate.kernel_tau_component >= 0.1);
            assert!(point.certificate.tail_energy_fraction <= 1e-16);
        }
    }

    #[test]
    fn constant_zero_branch_has_zero_tangents() {
        let field = VectorFieldSpec::linear_affine(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, -2.0]),
            PeriodicMap::zero(2, 8),
        );
        let p = SectionProblem::plain(field, 8);
        let report = solve::newton_correct(
            &p,
            0.0,
            &PeriodicMap::zero(2, 8),
            &NewtonSettings::default(),
        )
        .unwrap();
        let seed = accept_point(&p, 0.0, &report).unwrap();
        let branch = continue_branch(
            &p,
            seed,
            0.5,
            &StepControl::default(),
            &NewtonSettings::default(),
        );
        assert_eq!(branch.termination_reason, TerminationReason::ReachedTarget);
        for point in &branch.points {
            assert!(point.x.l2_norm() < 1e-10);
            assert!(point.tangent_dx.l2_norm() < 1e-10);
        }
    }

    #[test]
    fn reversing_the_branch_returns_to_the_seed() {
        let p = scalar_problem(1.0);
        let seed = seed_point(&p, 1.0);
        let seed_x = seed.x.clone();
        let fwd = continue_branch(
            &p,
            seed,
            0.3,
            &StepControl::default(),
            &NewtonSettings::default(),
        );
        let turn = fwd.points.last().unwrap().clone();
        let back = continue_branch(
            &p,
            turn,
            0.0,
            &StepControl::default(),
            &NewtonSettings::default(),
        );
        let final_x = &back.points.last().unwrap().x;
        let err = final_x.sub(&seed_x).sobolev_norm(1).unwrap();
        assert!(err <= 1e-8, "reversibility defect {err:.3e}");
    }

    #[test]
    fn smoothness_rates_against_analytic_reference() {
        let p = scalar_problem(1.0);
        let seed = seed_point(&p, 1.0);
        let points =
            uniform_branch(&p, &seed, 0.01, 4, &NewtonSettings::default()).unwrap();
        let reference = |tau: f64, order: usize| {
            oracle::scalar_linear_delay_orbit_derivative(1.0, &forcing(), tau, order)
        };
        let report =
            smoothness_diagnostic(&points, 4, &[0, 1, 2, 3], Some(&reference)).unwrap();
        for e in &report.entries {
            assert!(
                e.observed_rate >= 1.9,
                "order {} level {}: rate {:.2}",
                e.order,
                e.level,
                e.observed_rate
            );
        }
        assert!(report.pass);
    }

    #[test]
    fn insufficient_points_are_rejected() {
        let p = scalar_problem(1.0);
        let seed = seed_point(&p, 1.0);
        let points = uniform_branch(&p, &seed, 0.01, 2, &NewtonSettings::default()).unwrap();
        assert!(matches!(
            smoothness_diagnostic(&points, 4, &[0], None),
            Err(Error::InsufficientPoints { .. })
        ));
    }
}
