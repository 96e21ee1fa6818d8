//! Executable (Δ, η, ε)-simulation certificates.
//!
//! A simulator `H'` simulates a target `H` if the part of `H'` below the cut Δ
//! is unitarily close to `H` under an isometry `Ṽ` that is itself close to a
//! local isometry `V`. The checker builds the polar witness
//! `Ṽ = M (M†M)^(-1/2)` with `M = P V`, `P` the low-energy projector, and reports
//! `η = ||Ṽ - V||` and `ε = ||H'_{≤Δ} - Ṽ H Ṽ†||` exactly.

mod builders;
mod isometry;

pub use builders::{
    assemble_hab, build_first_order, first_order_required_delta, grid_required_delta1,
    synthetic_ha, CouplingGrid, FirstOrder, SyntheticA, KAPPA,
};
pub use isometry::{IsometryBlock, LocalIsometry};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::opcore::{self, full_spectrum, HamiltonianExpr, LowSubspace, OpError};
use crate::{CMatrix, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Op(#[from] OpError),
    #[error("low-energy space has rank {rank} but the isometry's domain has dimension {expected}")]
    RankMismatch { rank: usize, expected: usize },
    #[error("the isometry's range is (nearly) orthogonal to the low-energy space (smallest singular value {0:.3e})")]
    Singular(f64),
    #[error("invalid isometry: {0}")]
    BadIsometry(String),
    #[error("coupling {name} = {value} lies outside [0, {max}]")]
    CouplingRange { name: String, value: f64, max: f64 },
    #[error("invalid coupling grid: {0}")]
    BadGrid(String),
    #[error("H0 violates the first-order precondition: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, SimError>;

/// Smallest singular value of `M = P V` below which the witness is refused.
pub const SINGULAR_TOL: f64 = 1e-10;

/// Requested simulation parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub delta: f64,
    pub eta: f64,
    pub eps: f64,
    /// Constant subtracted from `H'` before the cut is applied.
    #[serde(default)]
    pub energy_shift: f64,
}

impl Request {
    pub fn new(delta: f64, eta: f64, eps: f64) -> Self {
        Request {
            delta,
            eta,
            eps,
            energy_shift: 0.0,
        }
    }

    pub fn shifted(self, energy_shift: f64) -> Self {
        Request {
            energy_shift,
            ..self
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub delta: f64,
    pub energy_shift: f64,
    pub eta_requested: f64,
    pub eps_requested: f64,
    pub eta_achieved: Option<f64>,
    pub eps_achieved: Option<f64>,
    pub low_dim: usize,
    pub target_dim: usize,
    pub rank_ok: bool,
    pub eta_ok: bool,
    pub eps_ok: bool,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub target_eigenvalues: Vec<f64>,
    pub simulator_eigenvalues: Vec<f64>,
}

/// Polar witness together with the data needed to score it.
#[derive(Clone, Debug)]
pub struct Witness {
    pub low: LowSubspace,
    /// `Ṽ` as an `N x m` matrix.
    pub v_tilde: CMatrix,
    /// `V` as an `N x m` matrix.
    pub v: CMatrix,
    /// `B† Ṽ`, unitary when the rank condition holds.
    pub rotation: CMatrix,
}

fn low_space(h_sim: &HamiltonianExpr, cut: f64, shift: f64) -> Result<LowSubspace> {
    let mut spec = full_spectrum(h_sim)?;
    spec.eigenvalues.iter_mut().for_each(|e| *e -= shift);
    Ok(LowSubspace::from_spectrum(&spec, cut)?)
}

fn witness_from(low: LowSubspace, v: CMatrix) -> Result<Witness> {
    let m = v.ncols();
    if low.rank() != m {
        return Err(SimError::RankMismatch {
            rank: low.rank(),
            expected: m,
        });
    }
    let g = low.basis.adjoint() * &v;
    let svd = g.svd(true, true);
    let smin = svd
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if m > 0 && smin < SINGULAR_TOL {
        return Err(SimError::Singular(smin));
    }
    let rotation = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => u * vt,
        _ => unreachable!("SVD requested with both factors"),
    };
    let v_tilde = &low.basis * &rotation;
    Ok(Witness {
        low,
        v_tilde,
        v,
        rotation,
    })
}

/// The polar witness `Ṽ` for `H' - shift` cut at `delta`.
pub fn low_energy_isometry(
    h_sim: &HamiltonianExpr,
    delta: f64,
    energy_shift: f64,
    v: &LocalIsometry,
) -> Result<Witness> {
    let vm = v.matrix(h_sim.system())?;
    witness_from(low_space(h_sim, delta, energy_shift)?, vm)
}

/// Largest singular value.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Largest absolute eigenvalue of a Hermitian matrix.
pub fn hermitian_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .map(|x| x.abs())
        .fold(0.0, f64::max)
}

fn diag(values: &[f64]) -> CMatrix {
    DMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&x| C64::new(x, 0.0)),
    ))
}

/// Check `h_sim` against `target` under `v`.
///
/// Rank mismatch and a singular witness are certified failures (a failing
/// report), not errors. A failed η check means the polar witness failed; a
/// better isometry might still exist.
pub fn verify_simulation(
    h_sim: &HamiltonianExpr,
    target: &HamiltonianExpr,
    req: &Request,
    v: &LocalIsometry,
) -> Result<SimulationReport> {
    if v.target() != target.system() {
        return Err(SimError::BadIsometry(
            "isometry domain differs from the target system".into(),
        ));
    }
    let vm = v.matrix(h_sim.system())?;
    let h = opcore::assemble(target)?;
    let target_eigenvalues = opcore::full_spectrum(target)?.eigenvalues;
    let low = low_space(h_sim, req.delta, req.energy_shift)?;
    let mut report = SimulationReport {
        delta: req.delta,
        energy_shift: req.energy_shift,
        eta_requested: req.eta,
        eps_requested: req.eps,
        eta_achieved: None,
        eps_achieved: None,
        low_dim: low.rank(),
        target_dim: vm.ncols(),
        rank_ok: low.rank() == vm.ncols(),
        eta_ok: false,
        eps_ok: false,
        pass: false,
        reason: None,
        target_eigenvalues,
        simulator_eigenvalues: low.eigenvalues.clone(),
    };
    if low.rank() == vm.nrows() && vm.nrows() == vm.ncols() {
        // The cut keeps the whole space: P = I and V is unitary, so Ṽ = V.
        let h_sim_m = opcore::assemble(h_sim)?
            - CMatrix::identity(vm.nrows(), vm.nrows()) * C64::new(req.energy_shift, 0.0);
        let eps = hermitian_norm(&(h_sim_m - &vm * h * vm.adjoint()));
        return Ok(score(report, req, 0.0, eps));
    }
    let w = match witness_from(low, vm) {
        Ok(w) => w,
        Err(e @ (SimError::RankMismatch { .. } | SimError::Singular(_))) => {
            report.reason = Some(e.to_string());
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    let eta = op_norm(&(&w.v_tilde - &w.v));
    let lam = diag(&w.low.eigenvalues);
    let eps = hermitian_norm(&(lam - &w.rotation * h * w.rotation.adjoint()));
    Ok(score(report, req, eta, eps))
}

fn score(mut report: SimulationReport, req: &Request, eta: f64, eps: f64) -> SimulationReport {
    report.eta_achieved = Some(eta);
    report.eps_achieved = Some(eps);
    report.eta_ok = eta <= req.eta;
    report.eps_ok = eps <= req.eps;
    report.pass = report.rank_ok && report.eta_ok && report.eps_ok;
    if !report.pass {
        let mut why = Vec::new();
        if !report.eta_ok {
            why.push(format!("witness failed: eta {eta:.3e} > {:.3e}", req.eta));
        }
        if !report.eps_ok {
            why.push(format!("eps {eps:.3e} > {:.3e}", req.eps));
        }
        report.reason = Some(why.join("; "));
    }
    report
}
