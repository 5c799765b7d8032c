//! Acceptance suite: one test and one printed pass/fail line per criterion.
//! Tolerances are pinned here, not read from configuration.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use delay_orbits::continuation::{self, BranchPoint, StepControl, TerminationReason};
use delay_orbits::dde;
use delay_orbits::field::VectorFieldSpec;
use delay_orbits::floquet::{self, FloquetSettings, Verdict};
use delay_orbits::fourier::PeriodicMap;
use delay_orbits::oracle;
use delay_orbits::problems;
use delay_orbits::properties;
use delay_orbits::section::SectionProblem;
use delay_orbits::solve::{self, NewtonSettings};

fn conclude(criterion: &str, pass: bool, detail: &str) {
    println!("[{}] {criterion}: {detail}", if pass { "pass" } else { "FAIL" });
    assert!(pass, "{criterion}: {detail}");
}

fn seed_point(problem: &SectionProblem, orbit: &PeriodicMap) -> BranchPoint {
    let report =
        solve::newton_correct(problem, 0.0, orbit, &NewtonSettings::default()).unwrap();
    continuation::accept_point(problem, 0.0, &report).unwrap()
}

fn scalar_branch(k_max: usize, target: f64) -> (SectionProblem, Vec<BranchPoint>) {
    let forcing = problems::forcing3(k_max);
    let problem = SectionProblem::plain(problems::scalar_linear_field(1.0, k_max), k_max);
    let seed = seed_point(&problem, &oracle::scalar_linear_delay_orbit(1.0, &forcing, 0.0));
    let control = StepControl::default();
    let newton = NewtonSettings::default();
    let up = continuation::continue_branch(&problem, seed.clone(), target, &control, &newton);
    let down = continuation::continue_branch(&problem, seed, -target, &control, &newton);
    assert_eq!(up.termination_reason, TerminationReason::ReachedTarget);
    assert_eq!(down.termination_reason, TerminationReason::ReachedTarget);
    let mut points = down.points;
    points.reverse();
    points.extend(up.points.into_iter().skip(1));
    (problem, points)
}

#[test]
fn ac01_linear_oracle_branch_reproduction() {
    let k_max = 32;
    let forcing = problems::forcing3(k_max);
    let (_, points) = scalar_branch(k_max, 0.3);
    let mut worst = 0.0_f64;
    for p in &points {
        let exact = oracle::scalar_linear_delay_orbit(1.0, &forcing, p.tau);
        worst = worst.max(p.x.sub(&exact).sobolev_norm(1).unwrap());
    }
    let span = points.last().unwrap().tau - points[0].tau;
    conclude(
        "AC1 linear-oracle branch reproduction",
        worst <= 1e-8 && span >= 0.6 - 1e-12,
        &format!("worst H1 error {worst:.3e} over {} points", points.len()),
    );
}

#[test]
fn ac02_smoothness_of_the_branch_parametrization() {
    let k_max = 32;
    let forcing = problems::forcing3(k_max);
    let problem = SectionProblem::plain(problems::scalar_linear_field(1.0, k_max), k_max);
    let seed = seed_point(&problem, &oracle::scalar_linear_delay_orbit(1.0, &forcing, 0.0));
    let newton = NewtonSettings::default();
    let grid = continuation::uniform_branch(&problem, &seed, 0.01, 4, &newton).unwrap();
    let reference =
        |tau: f64, order: usize| oracle::scalar_linear_delay_orbit_derivative(1.0, &forcing, tau, order);
    let analytic =
        continuation::smoothness_diagnostic(&grid, 4, &[0, 1, 2, 3], Some(&reference)).unwrap();
    let analytic_rate = analytic
        .entries
        .iter()
        .map(|e| e.observed_rate)
        .fold(f64::INFINITY, f64::min);

    // Order-4 stencils divide by h^4, so the branch points must be solved
    // well below the default tolerance to keep solver noise out of the rates.
    let tight = NewtonSettings { tol_residual: 1e-13, tol_step: 1e-14, ..Default::default() };
    let logistic = VectorFieldSpec::logistic(1.0, 0.1);
    let seed_result = solve::find_seed_orbit(
        &logistic,
        &DVector::from_element(1, 1.0),
        k_max,
        &tight,
        &FloquetSettings::default(),
    )
    .unwrap();
    let problem = SectionProblem::plain(logistic, k_max);
    let report = solve::newton_correct(&problem, 0.0, &seed_result.orbit, &tight).unwrap();
    let seed = continuation::accept_point(&problem, 0.0, &report).unwrap();
    let grid = continuation::uniform_branch(&problem, &seed, 0.01, 8, &tight).unwrap();
    let self_conv =
        continuation::smoothness_diagnostic(&grid, 4, &[0, 1, 2, 3], None).unwrap();
    let self_rate = self_conv
        .entries
        .iter()
        .map(|e| e.observed_rate)
        .fold(f64::INFINITY, f64::min);

    conclude(
        "AC2 smoothness of tau -> x_tau",
        analytic_rate >= 1.9 && self_rate >= 1.5,
        &format!("analytic rate {analytic_rate:.2}, logistic self-convergence rate {self_rate:.2}"),
    );
}

#[test]
fn ac03_floquet_certification_against_closed_forms() {
    let k_max = 16;
    let settings = FloquetSettings::default();

    let forcing = problems::forcing3(k_max);
    let orbit = oracle::scalar_linear_delay_orbit(1.0, &forcing, 0.0);
    let report = floquet::monodromy_report(
        &problems::scalar_linear_field(1.0, k_max),
        &orbit,
        &settings,
    )
    .unwrap();
    let e_err = (report.multipliers[0].re - std::f64::consts::E).abs()
        + report.multipliers[0].im.abs();

    let diag = nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -2.0]);
    let expected_diag =
        nalgebra::DMatrix::from_row_slice(2, 2, &[1.0_f64.exp(), 0.0, 0.0, (-2.0_f64).exp()]);
    let field = VectorFieldSpec::linear_affine(diag, PeriodicMap::zero(2, k_max));
    let diag_report =
        floquet::monodromy_report(&field, &PeriodicMap::zero(2, k_max), &settings).unwrap();
    let diag_err = (&diag_report.monodromy - expected_diag).norm();

    let field =
        VectorFieldSpec::linear_affine(problems::non_normal_matrix(), PeriodicMap::zero(2, k_max));
    let nn_report =
        floquet::monodromy_report(&field, &PeriodicMap::zero(2, k_max), &settings).unwrap();
    let nn_err = (&nn_report.monodromy - problems::non_normal_exponential()).norm();

    conclude(
        "AC3 Floquet certification vs closed forms",
        e_err <= 1e-10 && diag_err <= 1e-8 && nn_err <= 1e-8,
        &format!("|mu - e| = {e_err:.3e}, diag exp error {diag_err:.3e}, non-normal exp error {nn_err:.3e}"),
    );
}

#[test]
fn ac04_degeneracy_triad_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let report = properties::floquet_suite(&mut rng).unwrap();
    let triad: Vec<_> = report
        .checks
        .iter()
        .filter(|c| !c.name.starts_with("adjoint") && !c.name.starts_with("two-route"))
        .collect();
    let pass = triad.iter().all(|c| c.pass);
    let failing: Vec<_> = triad.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
    conclude(
        "AC4 degeneracy triad consistency",
        pass,
        &format!("{} detector checks, failing: {failing:?}", triad.len()),
    );
}

#[test]
fn ac05_adjoint_identity_and_two_route_monodromy() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let report = properties::floquet_suite(&mut rng).unwrap();
    let adjoint = &report.checks[0];
    let two_route = &report.checks[1];
    conclude(
        "AC5 adjoint identity and two-route agreement",
        adjoint.pass && two_route.pass,
        &format!(
            "max |Z^T Y - I| = {:.3e} (<= 1e-8), two-route defect {:.3e} (<= 1e-7)",
            adjoint.value, two_route.value
        ),
    );
}

#[test]
fn ac06_linearization_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let report = properties::linearization_suite(&mut rng).unwrap();
    let min_rate = report
        .checks
        .iter()
        .map(|c| c.value)
        .fold(f64::INFINITY, f64::min);
    conclude(
        "AC6 linearization FD order 2",
        report.pass(),
        &format!("minimum observed FD order {min_rate:.2} (>= 1.9)"),
    );
}

#[test]
fn ac07_shift_map_property_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let report = properties::shift_suite(32, 1000, &mut rng).unwrap();
    let failing: Vec<_> =
        report.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
    conclude(
        "AC7 shift-map property suite",
        report.pass(),
        &format!("{} checks, failing: {failing:?}", report.checks.len()),
    );
}

#[test]
fn ac08_index_one_structure_along_branches() {
    let (_, points) = scalar_branch(32, 0.3);
    let mut pass = true;
    let mut worst_tau_component = f64::INFINITY;
    for p in &points {
        pass &= p.certificate.kernel_dim_full == 1;
        worst_tau_component = worst_tau_component.min(p.certificate.kernel_tau_component);
    }
    pass &= worst_tau_component >= 0.1;
    conclude(
        "AC8 index-1 structure at accepted points",
        pass,
        &format!(
            "{} points, kernel dim 1 everywhere, min |tau-component| {worst_tau_component:.3}",
            points.len()
        ),
    );
}

#[test]
fn ac09_independent_dde_verification() {
    let k_max = 32;
    let field = problems::scalar_linear_field(1.0, k_max);
    let (_, points) = scalar_branch(k_max, 0.3);
    let mut worst = 0.0_f64;
    let mut checked = 0usize;
    for p in &points {
        if p.tau >= 0.01 {
            worst = worst.max(dde::periodicity_residual(&field, &p.x, p.tau, 2048).unwrap());
            checked += 1;
        }
    }

    let forcing = problems::forcing3(k_max);
    let x = oracle::scalar_linear_delay_orbit(1.0, &forcing, 0.2);
    let coarse = dde::periodicity_residual(&field, &x, 0.2, 128).unwrap();
    let fine = dde::periodicity_residual(&field, &x, 0.2, 256).unwrap();
    let ratio = coarse / fine;

    conclude(
        "AC9 method-of-steps verification",
        worst <= 1e-4 && checked > 0 && ratio >= 8.0,
        &format!("worst residual {worst:.3e} over {checked} points, step-doubling ratio {ratio:.1}"),
    );
}

#[test]
fn ac10_local_uniqueness_basin_tests() {
    let k_max = 16;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let newton = NewtonSettings::default();
    let mut worst = 0.0_f64;
    let mut trials = 0usize;
    for named in problems::nondegenerate_suite(k_max) {
        let orbit = match &named.orbit {
            Some(o) => o.clone(),
            None => {
                solve::find_seed_orbit(
                    &named.field,
                    &named.guess,
                    k_max,
                    &newton,
                    &FloquetSettings::default(),
                )
                .unwrap()
                .orbit
            }
        };
        let problem = SectionProblem::plain(named.field.clone(), k_max);
        let reference = solve::newton_correct(&problem, 0.0, &orbit, &newton)
            .unwrap()
            .final_x;
        for _ in 0..20 {
            let noise = PeriodicMap::random(problem.dim(), k_max, &mut rng);
            let scale = 1e-3 / noise.sobolev_norm(1).unwrap();
            let perturbed = reference.add(&noise.scale(scale));
            let back = solve::newton_correct(&problem, 0.0, &perturbed, &newton)
                .unwrap()
                .final_x;
            worst = worst.max(back.sub(&reference).sobolev_norm(1).unwrap());
            trials += 1;
        }
    }
    conclude(
        "AC10 local uniqueness under perturbation",
        worst <= 1e-9 && trials == 100,
        &format!("worst return distance {worst:.3e} over {trials} basin tests"),
    );
}

#[test]
fn degenerate_problems_are_refused_by_the_seeder() {
    // Companion check to AC4: the pipeline refuses to continue from
    // degenerate seeds instead of silently producing branches.
    for named in problems::degenerate_suite(16) {
        let r = solve::find_seed_orbit(
            &named.field,
            &named.guess,
            16,
            &NewtonSettings::default(),
            &FloquetSettings::default(),
        );
        assert!(r.is_err(), "{} unexpectedly seeded", named.name);
    }
    let report = floquet::monodromy_report(
        &VectorFieldSpec::limit_cycle(),
        &problems::unit_circle_orbit(16),
        &FloquetSettings::default(),
    )
    .unwrap();
    assert_eq!(report.verdict, Verdict::Degenerate);
}
