//! Trace files: one CSV row per recorded iterate plus a JSON sidecar with
//! the iterates, curvature vectors, multipliers and certificates.

use std::path::{Path, PathBuf};

use multiprox::diagnostics::{certificate_report, online_constants, CertificateReport};
use multiprox::{Problem, SubsolveOptions, Trace};
use multiprox_bench::{normalized_gap, Reference};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{classify, CliError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub m: usize,
    pub seed: u64,
    pub solver: String,
    pub k: usize,
    pub normalized_gap_percent: Option<f64>,
    pub objective: f64,
    pub step_norm: f64,
    pub online_constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificates {
    pub online_constant: f64,
    pub lipschitz_bound: Option<f64>,
    pub explicit_gamma: Option<f64>,
    pub per_iteration_bound: Vec<f64>,
    pub fermat_residual: f64,
    pub slater_margin: Option<f64>,
}

impl From<CertificateReport<f64>> for Certificates {
    fn from(r: CertificateReport<f64>) -> Self {
        Self {
            online_constant: r.online_constant,
            lipschitz_bound: r.lipschitz_bound,
            explicit_gamma: r.explicit_gamma,
            per_iteration_bound: r.per_iteration_bound,
            fermat_residual: r.fermat_residual,
            slater_margin: r.slater_margin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    /// SHA-256 of the CSV bytes.
    pub trace_sha256: String,
    /// [`crate::ProblemFile::digest`] of the problem that was solved.
    pub problem_sha256: String,
    pub solver: String,
    pub termination: String,
    /// Inflation factor, for backtracking runs only.
    pub eta: Option<f64>,
    pub fermat_tolerance: f64,
    pub final_fermat: Option<f64>,
    /// `L_i` of every component of `F`, identity block included.
    pub lipschitz: Vec<f64>,
    pub iterates: Vec<Vec<f64>>,
    pub alphas: Vec<Vec<f64>>,
    /// `ν_k` for `k ≥ 1`.
    pub multipliers: Vec<Vec<f64>>,
    pub xstar: Option<Vec<f64>>,
    pub gstar: Option<f64>,
    pub certificates: Certificates,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub rows: Vec<TraceRow>,
    pub sidecar: Sidecar,
}

/// Run metadata that does not live in the core trace.
#[derive(Debug, Clone)]
pub struct RunLabel<'a> {
    pub m: usize,
    pub seed: u64,
    pub solver: &'a str,
    pub eta: Option<f64>,
    pub fermat_tolerance: f64,
    pub problem_sha256: String,
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("cert.json")
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl TraceFile {
    pub fn from_run(
        problem: &Problem,
        trace: &Trace,
        label: RunLabel<'_>,
        reference: Option<&Reference>,
        xbar: Option<&[f64]>,
        opts: &SubsolveOptions<f64>,
    ) -> Result<Self, CliError> {
        let objectives = trace.objectives();
        let gaps = reference.and_then(|r| normalized_gap(&objectives, r.gstar).ok());
        let online = online_constants(trace);
        let rows = trace
            .iterations
            .iter()
            .enumerate()
            .map(|(i, it)| TraceRow {
                m: label.m,
                seed: label.seed,
                solver: label.solver.to_string(),
                k: it.k,
                normalized_gap_percent: gaps.as_ref().map(|g| g[i]),
                objective: it.objective,
                step_norm: it.step_norm,
                online_constant: if it.k == 0 { 0.0 } else { online[it.k - 1] },
            })
            .collect();
        let report = certificate_report(problem, trace, reference.map(|r| r.xstar.as_slice()), xbar, opts)
            .map_err(classify)?;
        let sidecar = Sidecar {
            trace_sha256: String::new(),
            problem_sha256: label.problem_sha256,
            solver: label.solver.to_string(),
            termination: trace.termination.as_str().to_string(),
            eta: label.eta,
            fermat_tolerance: label.fermat_tolerance,
            final_fermat: trace.final_fermat,
            lipschitz: problem.curvature().ok_or(CliError::Solver(multiprox::Error::MissingCurvature))?,
            iterates: trace.iterations.iter().map(|it| it.x.clone()).collect(),
            alphas: trace.iterations.iter().map(|it| it.alpha.clone()).collect(),
            multipliers: trace.multipliers().into_iter().map(|(_, nu)| nu.to_vec()).collect(),
            xstar: reference.map(|r| r.xstar.clone()),
            gstar: reference.map(|r| r.gstar),
            certificates: report.into(),
        };
        Ok(Self { rows, sidecar })
    }

    pub fn csv_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).map_err(|e| CliError::Output(e.to_string()))?;
        }
        w.into_inner().map_err(|e| CliError::Output(e.to_string()))
    }

    /// Writes `csv_path` and its sidecar, stamping the CSV hash.
    pub fn write(&mut self, csv_path: &Path) -> Result<(), CliError> {
        let bytes = self.csv_bytes()?;
        self.sidecar.trace_sha256 = sha256_hex(&bytes);
        let json = serde_json::to_vec(&self.sidecar).map_err(|e| CliError::Output(e.to_string()))?;
        let out = |p: &Path, b: &[u8]| std::fs::write(p, b).map_err(|e| CliError::Output(format!("{}: {e}", p.display())));
        out(csv_path, &bytes)?;
        out(&sidecar_path(csv_path), &json)
    }

    /// Reads a trace and its sidecar; `Ok((file, hash_matches))`.
    pub fn read(csv_path: &Path) -> Result<(Self, bool), CliError> {
        let input = |p: &Path| std::fs::read(p).map_err(|e| CliError::Parse(format!("{}: {e}", p.display())));
        let bytes = input(csv_path)?;
        let json = input(&sidecar_path(csv_path))?;
        let sidecar: Sidecar = serde_json::from_slice(&json).map_err(|e| CliError::Parse(format!("sidecar: {e}")))?;
        let rows = csv::Reader::from_reader(bytes.as_slice())
            .deserialize()
            .collect::<Result<Vec<TraceRow>, _>>()
            .map_err(|e| CliError::Parse(format!("trace: {e}")))?;
        let matches = sha256_hex(&bytes) == sidecar.trace_sha256;
        Ok((Self { rows, sidecar }, matches))
    }
}
