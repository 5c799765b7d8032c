//! Versioned JSON artifacts for seeds and branches, plus a plot-ready CSV
//! export. Branch coefficient blocks carry a SHA-256 checksum so corrupted
//! files are refused instead of silently verified.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

use crate::config::ProblemConfig;
use crate::continuation::{BranchPoint, OrbitBranch, PointCertificate, TerminationReason};
use crate::error::{Error, Result};
use crate::floquet::MonodromyReport;
use crate::fourier::PeriodicMap;

pub const SEED_SCHEMA: &str = "delay-orbit/seed/v1";
pub const BRANCH_SCHEMA: &str = "delay-orbit/branch/v1";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapRecord {
    pub dim: usize,
    pub k_max: usize,
    /// Interleaved (re, im) full-spectrum coefficients, row-major by component.
    pub coefficients: Vec<f64>,
}

impl MapRecord {
    pub fn from_map(map: &PeriodicMap) -> Self {
        Self { dim: map.dim(), k_max: map.k_max(), coefficients: map.to_interleaved() }
    }

    pub fn to_map(&self) -> Result<PeriodicMap> {
        if self.coefficients.len() != self.dim * (2 * self.k_max + 1) * 2 {
            return Err(Error::Config("coefficient block has the wrong length".into()));
        }
        Ok(PeriodicMap::from_interleaved(self.dim, self.k_max, &self.coefficients))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeedFile {
    pub schema: String,
    pub problem: ProblemConfig,
    pub problem_digest: String,
    pub k_max: usize,
    pub orbit: MapRecord,
    pub monodromy: MonodromyReport,
    pub newton_residuals: Vec<f64>,
    /// Seconds since the epoch; excluded from determinism comparisons.
    pub timestamp: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BranchPointRecord {
    pub tau: f64,
    pub x: MapRecord,
    pub tangent: MapRecord,
    pub certificate: PointCertificate,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BranchFile {
    pub schema: String,
    pub problem: ProblemConfig,
    pub problem_digest: String,
    pub k_max: usize,
    pub points: Vec<BranchPointRecord>,
    pub tau_range: (f64, f64),
    pub termination_reason: TerminationReason,
    /// SHA-256 of the serialized points block.
    pub checksum: String,
    /// Seconds since the epoch; excluded from determinism comparisons.
    pub timestamp: u64,
}

/// Stable digest of the problem definition, stamped into every artifact so a
/// branch cannot be verified against the wrong configuration.
pub fn problem_digest(problem: &ProblemConfig, k_max: usize) -> String {
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_vec(problem).expect("problem serializes"));
    hasher.update(k_max.to_le_bytes());
    hex(&hasher.finalize())
}

fn points_checksum(points: &[BranchPointRecord]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_vec(points).expect("points serialize"));
    hex(&hasher.finalize())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn now_unix() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn seed_file(
    problem: &ProblemConfig,
    k_max: usize,
    orbit: &PeriodicMap,
    monodromy: &MonodromyReport,
    newton_residuals: &[f64],
) -> SeedFile {
    SeedFile {
        schema: SEED_SCHEMA.into(),
        problem: problem.clone(),
        problem_digest: problem_digest(problem, k_max),
        k_max,
        orbit: MapRecord::from_map(orbit),
        monodromy: monodromy.clone(),
        newton_residuals: newton_residuals.to_vec(),
        timestamp: now_unix(),
    }
}

pub fn branch_file(
    problem: &ProblemConfig,
    k_max: usize,
    branch: &OrbitBranch,
) -> BranchFile {
    let points: Vec<BranchPointRecord> = branch
        .points
        .iter()
        .map(|p| BranchPointRecord {
            tau: p.tau,
            x: MapRecord::from_map(&p.x),
            tangent: MapRecord::from_map(&p.tangent_dx),
            certificate: p.certificate.clone(),
        })
        .collect();
    let checksum = points_checksum(&points);
    BranchFile {
        schema: BRANCH_SCHEMA.into(),
        problem: problem.clone(),
        problem_digest: problem_digest(problem, k_max),
        k_max,
        points,
        tau_range: branch.tau_range,
        termination_reason: branch.termination_reason,
        checksum,
        timestamp: now_unix(),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_seed(path: &Path) -> Result<SeedFile> {
    let text = std::fs::read_to_string(path)?;
    let file: SeedFile = serde_json::from_str(&text)?;
    if file.schema != SEED_SCHEMA {
        return Err(Error::Config(format!("unexpected seed schema `{}`", file.schema)));
    }
    Ok(file)
}

pub fn read_branch(path: &Path) -> Result<BranchFile> {
    let text = std::fs::read_to_string(path)?;
    let file: BranchFile = serde_json::from_str(&text)?;
    if file.schema != BRANCH_SCHEMA {
        return Err(Error::Config(format!("unexpected branch schema `{}`", file.schema)));
    }
    if points_checksum(&file.points) != file.checksum {
        return Err(Error::ChecksumMismatch);
    }
    Ok(file)
}

impl BranchFile {
    pub fn to_points(&self) -> Result<Vec<BranchPoint>> {
        self.points
            .iter()
            .map(|r| {
                Ok(BranchPoint {
                    tau: r.tau,
                    x: r.x.to_map()?,
                    tangent_dx: r.tangent.to_map()?,
                    certificate: r.certificate.clone(),
                })
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct CsvRow {
    pub tau: f64,
    pub norm0: f64,
    pub norm1: f64,
    pub min_multiplier_dist: f64,
    pub newton_iters: usize,
    pub periodicity_residual: f64,
}

pub fn write_csv(path: &Path, rows: &[CsvRow]) -> Result<()> {
    let mut out =
        String::from("tau,norm0,norm1,min_multiplier_dist,newton_iters,periodicity_residual\n");
    for r in rows {
        out.push_str(&format!(
            "{:.17e},{:.17e},{:.17e},{:.17e},{},{:.17e}\n",
            r.tau, r.norm0, r.norm1, r.min_multiplier_dist, r.newton_iters, r.periodicity_residual
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}
