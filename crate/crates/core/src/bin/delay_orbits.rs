//! Command-line front end: seed -> certify -> continue -> verify, plus the
//! randomized property sweeps.
//!
//! Exit codes: 0 success, 1 usage or solver error (with a machine-readable
//! JSON report on standard error), 2 mathematical refusal (degenerate orbit,
//! failed verification, corrupted artifact).

use clap::{Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};

use delay_orbits::config::{self, RunConfig};
use delay_orbits::continuation::{self, TerminationReason};
use delay_orbits::dde;
use delay_orbits::error::Error;
use delay_orbits::floquet::{self, Verdict};
use delay_orbits::fourier::PeriodicMap;
use delay_orbits::io;
use delay_orbits::properties;
use delay_orbits::solve;

#[derive(Parser)]
#[command(
    name = "delay-orbits",
    version,
    about = "Periodic orbits of delay equations: seeding, certification, continuation, verification"
)]
struct Cli {
    /// Emit machine-readable JSON reports on standard output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find and certify a seed orbit at zero delay.
    Seed {
        #[arg(long)]
        config: PathBuf,
        /// Output directory for seed.json (default: current directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run the Floquet certification of a stored seed.
    Certify {
        #[arg(long)]
        seed_file: PathBuf,
    },
    /// Continue the seed into a branch over the configured delay range.
    Continue {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed_file: PathBuf,
        /// Output directory for branch.json and branch.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Method-of-steps verification of a stored branch.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        branch: PathBuf,
    },
    /// Run the shift/linearization/field/Floquet property sweeps.
    Properties {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

/// Refusals grounded in the mathematics rather than in usage or IO.
fn exit_code_for(error: &Error) -> i32 {
    match error {
        Error::DegenerateSeed
        | Error::NotAnOrbit(_)
        | Error::ChecksumMismatch
        | Error::SingularJacobian(_) => 2,
        _ => 1,
    }
}

fn fail(error: Error) -> ! {
    let payload = serde_json::json!({
        "error": error.to_string(),
        "exit_code": exit_code_for(&error),
    });
    eprintln!("{payload}");
    std::process::exit(exit_code_for(&error));
}

fn load_config(path: &Path) -> RunConfig {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => fail(Error::Io(e)),
    };
    match RunConfig::from_toml(&text) {
        Ok(c) => c,
        Err(e) => fail(e),
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.17e}")
}

fn main() {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Seed { config, out } => cmd_seed(&cli, config, out.as_deref()),
        Command::Certify { seed_file } => cmd_certify(&cli, seed_file),
        Command::Continue { config, seed_file, out } => {
            cmd_continue(&cli, config, seed_file, out.as_deref())
        }
        Command::Verify { config, branch } => cmd_verify(&cli, config, branch),
        Command::Properties { config } => cmd_properties(&cli, config.as_deref()),
    };
    std::process::exit(code);
}

fn cmd_seed(cli: &Cli, config_path: &Path, out: Option<&Path>) -> i32 {
    let config = load_config(config_path);
    let field = match config.build_field() {
        Ok(f) => f,
        Err(e) => fail(e),
    };
    let guess = DVector::from_vec(config.seed_guess(field.dim));
    let result = match solve::find_seed_orbit(
        &field,
        &guess,
        config.discretization.k_max,
        &config.newton_settings(),
        &config.floquet_settings(),
    ) {
        Ok(r) => r,
        Err(e) => fail(e),
    };

    let file = io::seed_file(
        &config.problem,
        config.discretization.k_max,
        &result.orbit,
        &result.monodromy,
        &result.newton.iterates,
    );
    let dir = out.unwrap_or(Path::new("."));
    let path = dir.join("seed.json");
    if let Err(e) = io::write_json(&path, &file) {
        fail(e);
    }

    if cli.json {
        println!(
            "{}",
            serde_json::json!({
                "verdict": result.monodromy.verdict,
                "multipliers": result.monodromy.multipliers,
                "min_dist_to_one": result.monodromy.min_dist_to_one,
                "seed_file": path,
            })
        );
    } else {
        println!("seed orbit written to {}", path.display());
        for m in &result.monodromy.multipliers {
            println!("multiplier: {} + {} i", fmt(m.re), fmt(m.im));
        }
        println!("min distance to 1: {}", fmt(result.monodromy.min_dist_to_one));
        println!("verdict: {:?}", result.monodromy.verdict);
    }
    if result.monodromy.verdict == Verdict::NonDegenerate {
        0
    } else {
        2
    }
}

fn cmd_certify(cli: &Cli, seed_path: &Path) -> i32 {
    let seed = match io::read_seed(seed_path) {
        Ok(s) => s,
        Err(e) => fail(e),
    };
    let field = match config::build_field(&seed.problem, seed.k_max) {
        Ok(f) => f,
        Err(e) => fail(e),
    };
    let orbit = match seed.orbit.to_map() {
        Ok(o) => o,
        Err(e) => fail(e),
    };
    let report =
        match floquet::monodromy_report(&field, &orbit, &Default::default()) {
            Ok(r) => r,
            Err(e) => fail(e),
        };
    if cli.json {
        println!("{}", serde_json::to_string(&report).unwrap());
    } else {
        for m in &report.multipliers {
            println!("multiplier: {} + {} i", fmt(m.re), fmt(m.im));
        }
        println!("adjoint defect: {}", fmt(report.adjoint_defect));
        println!("two-route defect: {}", fmt(report.two_route_defect));
        println!("verdict: {:?}", report.verdict);
    }
    if report.verdict == Verdict::NonDegenerate {
        0
    } else {
        2
    }
}

/// Multipliers of the linearization along an arbitrary periodic map. Away
/// from zero delay this is diagnostic data, not a certificate.
fn multiplier_distance(
    field: &delay_orbits::field::VectorFieldSpec,
    x: &PeriodicMap,
    steps: usize,
) -> f64 {
    let a = |t: f64| field.jac(t, &DVector::from_vec(x.eval(t)));
    let nodes = match delay_orbits::rk4::integrate_matrix_ode(
        &|t, y: &DMatrix<f64>| a(t) * y,
        DMatrix::identity(field.dim, field.dim),
        steps,
    ) {
        Ok(n) => n,
        Err(_) => return f64::NAN,
    };
    nodes
        .last()
        .unwrap()
        .clone()
        .complex_eigenvalues()
        .iter()
        .map(|l| ((l.re - 1.0).powi(2) + l.im.powi(2)).sqrt())
        .fold(f64::INFINITY, f64::min)
}

fn cmd_continue(cli: &Cli, config_path: &Path, seed_path: &Path, out: Option<&Path>) -> i32 {
    let config = load_config(config_path);
    let seed = match io::read_seed(seed_path) {
        Ok(s) => s,
        Err(e) => fail(e),
    };
    let k_max = config.discretization.k_max;
    if seed.problem_digest != io::problem_digest(&config.problem, k_max) {
        fail(Error::Config(
            "seed file was produced for a different problem or resolution".into(),
        ));
    }
    if seed.monodromy.verdict != Verdict::NonDegenerate {
        fail(Error::DegenerateSeed);
    }

    let problem = match config.build_problem() {
        Ok(p) => p,
        Err(e) => fail(e),
    };
    let newton = config.newton_settings();
    let orbit = match seed.orbit.to_map() {
        Ok(o) => o,
        Err(e) => fail(e),
    };
    let report = match solve::newton_correct(&problem, 0.0, &orbit, &newton) {
        Ok(r) => r,
        Err(e) => fail(e),
    };
    let seed_point = match continuation::accept_point(&problem, 0.0, &report) {
        Ok(p) => p,
        Err(e) => fail(e),
    };

    let control = config.step_control();
    let up = continuation::continue_branch(
        &problem,
        seed_point.clone(),
        config.continuation.tau_target_pos,
        &control,
        &newton,
    );
    let down = continuation::continue_branch(
        &problem,
        seed_point,
        config.continuation.tau_target_neg,
        &control,
        &newton,
    );

    // Merge the two sign-branches, dropping the duplicated seed point.
    let mut points = down.points;
    points.reverse();
    points.extend(up.points.into_iter().skip(1));
    let reason = if up.termination_reason != TerminationReason::ReachedTarget {
        up.termination_reason
    } else {
        down.termination_reason
    };
    let tau_min = points.iter().map(|p| p.tau).fold(f64::INFINITY, f64::min);
    let tau_max = points.iter().map(|p| p.tau).fold(f64::NEG_INFINITY, f64::max);
    let branch = continuation::OrbitBranch {
        points,
        tau_range: (tau_min, tau_max),
        termination_reason: reason,
    };

    let field = &problem.field;
    let steps_per_unit = config.verify.steps_per_unit;
    let h = 1.0 / steps_per_unit as f64;
    let rows: Vec<io::CsvRow> = branch
        .points
        .iter()
        .map(|p| io::CsvRow {
            tau: p.tau,
            norm0: p.x.sobolev_norm(0).unwrap(),
            norm1: p.x.sobolev_norm(1).unwrap(),
            min_multiplier_dist: multiplier_distance(field, &p.x, config.floquet.steps),
            newton_iters: p.certificate.newton_iterations,
            periodicity_residual: if p.tau >= h.max(0.01) {
                dde::periodicity_residual(field, &p.x, p.tau, steps_per_unit)
                    .unwrap_or(f64::NAN)
            } else {
                f64::NAN
            },
        })
        .collect();

    let dir = out.unwrap_or(Path::new("."));
    let branch_path = dir.join("branch.json");
    let csv_path = dir.join("branch.csv");
    let file = io::branch_file(&config.problem, k_max, &branch);
    if let Err(e) = io::write_json(&branch_path, &file) {
        fail(e);
    }
    if let Err(e) = io::write_csv(&csv_path, &rows) {
        fail(e);
    }

    if cli.json {
        println!(
            "{}",
            serde_json::json!({
                "tau_range": branch.tau_range,
                "points": branch.points.len(),
                "termination_reason": branch.termination_reason,
                "branch_file": branch_path,
                "csv_file": csv_path,
            })
        );
    } else {
        println!(
            "reached tau in [{}, {}] with {} points ({:?})",
            fmt(branch.tau_range.0),
            fmt(branch.tau_range.1),
            branch.points.len(),
            branch.termination_reason,
        );
        println!("branch written to {}", branch_path.display());
        println!("csv written to {}", csv_path.display());
    }
    0
}

fn cmd_verify(cli: &Cli, config_path: &Path, branch_path: &Path) -> i32 {
    let config = load_config(config_path);
    let file = match io::read_branch(branch_path) {
        Ok(f) => f,
        Err(e) => fail(e),
    };
    if file.problem_digest != io::problem_digest(&config.problem, file.k_max) {
        fail(Error::Config(
            "branch file was produced for a different problem or resolution".into(),
        ));
    }
    let field = match config::build_field(&file.problem, file.k_max) {
        Ok(f) => f,
        Err(e) => fail(e),
    };
    let points = match file.to_points() {
        Ok(p) => p,
        Err(e) => fail(e),
    };

    let steps_per_unit = config.verify.steps_per_unit;
    let h = 1.0 / steps_per_unit as f64;
    let mut all_pass = true;
    let mut reports = Vec::new();
    for p in &points {
        let (residual, checked) = if p.tau >= h.max(0.01) {
            match dde::periodicity_residual(&field, &p.x, p.tau, steps_per_unit) {
                Ok(r) => (r, true),
                Err(e) => fail(e),
            }
        } else {
            (f64::NAN, false)
        };
        let pass = !checked || residual <= 1e-4;
        all_pass &= pass;
        reports.push(serde_json::json!({
            "tau": p.tau,
            "periodicity_residual": residual,
            "checked": checked,
            "pass": pass,
        }));
        if !cli.json {
            let status = if !checked { "skipped (delay below floor)" } else if pass { "ok" } else { "FAIL" };
            println!("tau = {}: residual = {} [{}]", fmt(p.tau), fmt(residual), status);
        }
    }
    if cli.json {
        println!("{}", serde_json::json!({ "points": reports, "pass": all_pass }));
    } else {
        println!("verification {}", if all_pass { "passed" } else { "FAILED" });
    }
    if all_pass {
        0
    } else {
        2
    }
}

fn cmd_properties(cli: &Cli, config_path: Option<&Path>) -> i32 {
    let (k_max, rng_seed) = match config_path {
        Some(p) => {
            let config = load_config(p);
            (config.discretization.k_max, config.rng.seed)
        }
        None => (32, 42),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let suites = match properties::all_suites(k_max, 1000, &mut rng) {
        Ok(s) => s,
        Err(e) => fail(e),
    };
    let all_pass = suites.iter().all(|s| s.pass());
    if cli.json {
        println!("{}", serde_json::json!({ "suites": suites, "pass": all_pass }));
    } else {
        for suite in &suites {
            println!("[{}]", suite.suite);
            for c in &suite.checks {
                println!(
                    "  {} {} {} {} ... {}",
                    c.name,
                    fmt(c.value),
                    c.direction,
                    fmt(c.threshold),
                    if c.pass { "pass" } else { "FAIL" }
                );
            }
        }
        println!("properties {}", if all_pass { "passed" } else { "FAILED" });
    }
    if all_pass {
        0
    } else {
        2
    }
}
