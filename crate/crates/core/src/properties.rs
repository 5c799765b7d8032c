//! Randomized property sweeps over the shift map, the section linearization
//! and the Floquet machinery. Shared by the `properties` CLI command and the
//! acceptance suite.

use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::SQRT_2;

use crate::error::Result;
use crate::floquet::{self, FloquetSettings, Verdict};
use crate::fourier::PeriodicMap;
use crate::problems;
use crate::section::{SectionProblem, TangentVector};
use crate::solve::{self, NewtonSettings};

#[derive(Clone, Debug, serde::Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    /// `<=` means pass iff value <= threshold, `>=` the reverse.
    pub direction: String,
    pub pass: bool,
}

impl Check {
    pub fn le(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            direction: "<=".into(),
            pass: value.is_finite() && value <= threshold,
        }
    }

    pub fn ge(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            direction: ">=".into(),
            pass: value.is_finite() && value >= threshold,
        }
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Shift-map invariants: isometry on levels 0..4, the group law, the
/// derivative identity via second-order finite differences, the difference
/// quotient bound, and the high-frequency discontinuity witness.
pub fn shift_suite(k_max: usize, trials: usize, rng: &mut impl Rng) -> Result<SuiteReport> {
    let mut checks = Vec::new();

    let mut worst_isometry = 0.0_f64;
    let mut worst_group = 0.0_f64;
    let mut worst_quotient = 0.0_f64;
    for _ in 0..trials {
        let x = PeriodicMap::random(2, k_max, rng);
        let tau: f64 = rng.gen_range(-2.0..2.0);
        let shifted = x.shift(tau);
        for level in 0..=4 {
            let a = x.sobolev_norm(level)?;
            let b = shifted.sobolev_norm(level)?;
            worst_isometry = worst_isometry.max((a - b).abs() / a);
        }

        let a: f64 = rng.gen_range(-1.0..1.0);
        let b: f64 = rng.gen_range(-1.0..1.0);
        let two_step = x.shift(a).shift(b);
        let one_step = x.shift(a + b);
        let gap = two_step
            .to_interleaved()
            .iter()
            .zip(one_step.to_interleaved().iter())
            .map(|(p, q)| (p - q).abs())
            .fold(0.0_f64, f64::max);
        worst_group = worst_group.max(gap);

        let mut t: f64 = rng.gen_range(-1.0..1.0);
        if t.abs() < 1e-3 {
            t = 1e-3_f64.copysign(t + f64::MIN_POSITIVE);
        }
        let quotient = x.shift(t).sub(&x).scale(1.0 / t).l2_norm();
        worst_quotient = worst_quotient.max(quotient / x.derivative().l2_norm());
    }
    checks.push(Check::le("shift isometry, levels 0-4, relative", worst_isometry, 1e-12));
    checks.push(Check::le("shift group law, coefficient-wise", worst_group, 1e-12));
    checks.push(Check::le(
        "difference quotient bound |phi(T,x)-x|/|T| vs |dx/dt|",
        worst_quotient,
        1.0 + 1e-12,
    ));

    // d/dtau shift(x, tau) = -shift(dx/dt, tau), checked by central
    // differences at h and 2h; the defect should shrink at second order.
    let mut worst_rate = f64::INFINITY;
    for _ in 0..20 {
        let x = PeriodicMap::random(1, k_max, rng);
        let tau: f64 = rng.gen_range(-1.0..1.0);
        let err = |h: f64| {
            x.shift(tau + h)
                .sub(&x.shift(tau - h))
                .scale(1.0 / (2.0 * h))
                .add(&x.derivative().shift(tau))
                .l2_norm()
        };
        let h = 1e-3;
        worst_rate = worst_rate.min((err(2.0 * h) / err(h)).log2());
    }
    checks.push(Check::ge("derivative-of-shift FD order", worst_rate, 1.9));

    // For delays below the grid scale, a single mode at wavenumber
    // ceil(1/(4T)) moves by at least a quarter turn, so the shift gap stays
    // >= 1 even though T -> 0: the map is not Lipschitz into the same level.
    let mut worst_witness = f64::INFINITY;
    for j in 1..=6 {
        let t = 1.0 / (4.0 * k_max as f64 * (1 << j) as f64);
        let wavenumber = (1.0 / (4.0 * t)).ceil() as usize;
        let mut witness = PeriodicMap::zero(1, wavenumber);
        // sqrt(2) cos(2 pi wavenumber t) has unit L^2 norm.
        witness.set_mode(0, wavenumber as i64, Complex64::new(SQRT_2 / 2.0, 0.0));
        let gap = witness.shift(t).sub(&witness).l2_norm();
        worst_witness = worst_witness.min(gap);
    }
    checks.push(Check::ge("high-frequency shift gap at resolved wavenumber", worst_witness, 1.0));

    Ok(SuiteReport { suite: "shift".into(), checks })
}

fn linearization_rate(
    problem: &SectionProblem,
    tau: f64,
    x: &PeriodicMap,
    v: &TangentVector,
) -> Result<(f64, f64)> {
    let predicted = problem.linearize(tau, x, v)?;
    let err = |h: f64| -> Result<f64> {
        let plus = problem.residual(tau + h * v.dtau, &x.add(&v.dx.scale(h)))?;
        let minus = problem.residual(tau - h * v.dtau, &x.sub(&v.dx.scale(h)))?;
        Ok(plus.sub(&minus).scale(1.0 / (2.0 * h)).sub(&predicted).l2_norm())
    };
    let h = 1e-3;
    let e1 = err(h)?;
    let e2 = err(2.0 * h)?;
    Ok(((e2 / e1).log2(), e1))
}

/// Directional finite differences of the residual against `linearize`, on
/// three fields and ten random directions each, plus the delay column.
pub fn linearization_suite(rng: &mut impl Rng) -> Result<SuiteReport> {
    let k_max = 16;
    let fields = [
        ("scalar_linear", problems::scalar_linear_field(1.0, k_max)),
        ("logistic", crate::field::VectorFieldSpec::logistic(1.0, 0.1)),
        ("limit_cycle", crate::field::VectorFieldSpec::limit_cycle()),
    ];
    let mut checks = Vec::new();
    for (name, field) in fields {
        let problem = SectionProblem::plain(field, k_max);
        let mut worst_rate = f64::INFINITY;
        let mut exact_hits = 0usize;
        for _ in 0..10 {
            let x = PeriodicMap::random(problem.dim(), k_max, rng).scale(0.3);
            let tau: f64 = rng.gen_range(-0.3..0.3);
            let v = TangentVector {
                dtau: rng.gen_range(0.5..1.0),
                dx: PeriodicMap::random(problem.dim(), k_max, rng),
            };
            let (rate, e1) = linearization_rate(&problem, tau, &x, &v)?;
            // Fields linear in x leave no curvature for pure-x directions;
            // a residual at roundoff level counts as a pass.
            if e1 < 1e-10 {
                exact_hits += 1;
            } else {
                worst_rate = worst_rate.min(rate);
            }
        }
        if exact_hits == 10 {
            worst_rate = 2.0;
        }
        checks.push(Check::ge(format!("{name}: directional FD order"), worst_rate, 1.9));

        // Pure delay column.
        let x = PeriodicMap::random(problem.dim(), k_max, rng).scale(0.3);
        let tau = 0.12;
        let v = TangentVector { dtau: 1.0, dx: PeriodicMap::zero(problem.dim(), k_max) };
        let (rate, e1) = linearization_rate(&problem, tau, &x, &v)?;
        let rate = if e1 < 1e-10 { 2.0 } else { rate };
        checks.push(Check::ge(format!("{name}: delay-column FD order"), rate, 1.9));
    }
    Ok(SuiteReport { suite: "linearization".into(), checks })
}

fn orbit_for(problem: &problems::NamedProblem, k_max: usize) -> Result<PeriodicMap> {
    match &problem.orbit {
        Some(orbit) => Ok(orbit.clone()),
        None => {
            let seed = solve::find_seed_orbit(
                &problem.field,
                &problem.guess,
                k_max,
                &NewtonSettings::default(),
                &FloquetSettings::default(),
            )?;
            Ok(seed.orbit)
        }
    }
}

/// Adjoint identity, two-route monodromy agreement, and the three-way
/// degeneracy detectors on the built-in problem zoo.
pub fn floquet_suite(rng: &mut impl Rng) -> Result<SuiteReport> {
    let k_max = 16;
    let settings = FloquetSettings::default();
    let mut checks = Vec::new();

    let mut worst_adjoint = 0.0_f64;
    let mut worst_two_route = 0.0_f64;

    for problem in problems::nondegenerate_suite(k_max) {
        let orbit = orbit_for(&problem, k_max)?;
        let report = floquet::monodromy_report(&problem.field, &orbit, &settings)?;
        worst_adjoint = worst_adjoint.max(report.adjoint_defect);
        worst_two_route = worst_two_route.max(report.two_route_defect);

        let nondegenerate = report.verdict == Verdict::NonDegenerate;
        let witnesses = floquet::cokernel_search(&problem.field, &orbit, &settings, rng)?;
        let section = SectionProblem::plain(problem.field.clone(), k_max);
        let index = section.index_diagnostic(0.0, &orbit)?;
        let agree = nondegenerate && witnesses.is_empty() && index.kernel_dim_x_only == 0;
        checks.push(Check::ge(
            format!("{}: all three detectors report non-degenerate", problem.name),
            if agree { 1.0 } else { 0.0 },
            1.0,
        ));
    }

    for problem in problems::degenerate_suite(k_max) {
        let orbit = orbit_for(&problem, k_max)?;
        let report = floquet::monodromy_report(&problem.field, &orbit, &settings)?;
        worst_adjoint = worst_adjoint.max(report.adjoint_defect);
        worst_two_route = worst_two_route.max(report.two_route_defect);

        checks.push(Check::le(
            format!("{}: multiplier distance to 1", problem.name),
            report.min_dist_to_one,
            1e-6,
        ));
        let witnesses = floquet::cokernel_search(&problem.field, &orbit, &settings, rng)?;
        let pairing = witnesses
            .iter()
            .map(|w| w.pairing_defect)
            .fold(f64::NEG_INFINITY, f64::max);
        checks.push(Check::ge(
            format!("{}: cokernel witnesses found", problem.name),
            witnesses.len() as f64,
            1.0,
        ));
        checks.push(Check::le(format!("{}: witness pairing defect", problem.name), pairing, 1e-6));
        let section = SectionProblem::plain(problem.field.clone(), k_max);
        let index = section.index_diagnostic(0.0, &orbit)?;
        checks.push(Check::le(
            format!("{}: discrete kernel dimension in x", problem.name),
            (index.kernel_dim_x_only as f64 - 1.0).abs(),
            0.0,
        ));
    }

    checks.insert(0, Check::le("adjoint identity max |Z^T Y - I|", worst_adjoint, 1e-8));
    checks.insert(
        1,
        Check::le("two-route monodromy relative disagreement", worst_two_route, 1e-7),
    );

    Ok(SuiteReport { suite: "floquet".into(), checks })
}

/// Jacobian self-tests for every built-in field.
pub fn field_suite(rng: &mut impl Rng) -> Result<SuiteReport> {
    let k_max = 16;
    let mut checks = Vec::new();
    for problem in problems::nondegenerate_suite(k_max)
        .into_iter()
        .chain(problems::degenerate_suite(k_max))
    {
        let worst = problem.field.self_test_jacobian(rng, 25)?;
        checks.push(Check::le(format!("{}: Jacobian FD self-test", problem.name), worst, 1e-5));
    }
    Ok(SuiteReport { suite: "field".into(), checks })
}

pub fn all_suites(k_max: usize, trials: usize, rng: &mut impl Rng) -> Result<Vec<SuiteReport>> {
    Ok(vec![
        shift_suite(k_max, trials, rng)?,
        linearization_suite(rng)?,
        field_suite(rng)?,
        floquet_suite(rng)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shift_suite_passes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let report = shift_suite(32, 200, &mut rng).unwrap();
        assert!(report.pass(), "{:#?}", report.checks);
    }

    #[test]
    fn linearization_suite_passes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let report = linearization_suite(&mut rng).unwrap();
        assert!(report.pass(), "{:#?}", report.checks);
    }

    #[test]
    fn floquet_suite_passes() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let report = floquet_suite(&mut rng).unwrap();
        assert!(report.pass(), "{:#?}", report.checks);
    }
}
