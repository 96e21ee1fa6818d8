use serde::{Deserialize, Serialize};

use super::gates::GateSequence;
use super::{ClockError, Result};
use crate::opcore::{full_spectrum, HamiltonianExpr, LocalTerm, Site, SiteSystem};
use crate::{CMatrix, C64};

/// Site id of the unary clock register.
pub const CLOCK_SITE: &str = "clk";

/// Site id of logical qubit `k`.
pub fn qubit_site(k: usize) -> String {
    format!("q{k}")
}

/// History-state Hamiltonian on a `(T+1)`-level clock followed by the qubits.
#[derive(Clone, Debug)]
pub struct ClockHamiltonian {
    pub expr: HamiltonianExpr,
    pub steps: usize,
    pub n_qubits: usize,
}

impl ClockHamiltonian {
    pub fn clock_dim(&self) -> usize {
        self.steps + 1
    }
}

fn system(steps: usize, n_qubits: usize) -> Result<SiteSystem> {
    let mut sites = vec![Site::new(CLOCK_SITE, steps + 1)];
    sites.extend((0..n_qubits).map(|k| Site::new(qubit_site(k), 2)));
    Ok(SiteSystem::new(sites)?)
}

/// `(|t-1><t-1| + |t><t|) ⊗ I - |t-1><t| ⊗ U† - |t><t-1| ⊗ U` on the clock and the gate's qubits.
fn transition(clock_dim: usize, t: usize, u: &CMatrix) -> CMatrix {
    let d = u.nrows();
    let mut m = CMatrix::zeros(clock_dim * d, clock_dim * d);
    for a in 0..d {
        m[((t - 1) * d + a, (t - 1) * d + a)] += C64::new(1.0, 0.0);
        m[(t * d + a, t * d + a)] += C64::new(1.0, 0.0);
        for b in 0..d {
            m[((t - 1) * d + a, t * d + b)] -= u[(b, a)].conj();
            m[(t * d + a, (t - 1) * d + b)] -= u[(a, b)];
        }
    }
    m
}

/// Clock Hamiltonian of `seq`, penalising inputs other than `seq.input()`.
///
/// The input penalty is the per-qubit sum `Σ_i |0><0| ⊗ (I - |ψ_i><ψ_i|)`,
/// which keeps every term on at most three sites and has the same kernel as
/// the full projector for product inputs.
pub fn clock_hamiltonian(seq: &GateSequence) -> Result<ClockHamiltonian> {
    let steps = seq.len();
    if steps == 0 {
        return Err(ClockError::NoSteps);
    }
    let n = seq.n_qubits();
    let cd = steps + 1;
    let mut expr = HamiltonianExpr::new(system(steps, n)?);
    for (t, s) in seq.steps().iter().enumerate() {
        let mut support = vec![CLOCK_SITE.to_string()];
        support.extend(s.qubits.iter().map(|&q| qubit_site(q)));
        expr.add_term(LocalTerm::new(
            support,
            transition(cd, t + 1, &s.gate.matrix()),
            1.0,
        )?)?;
    }
    for (k, psi) in seq.input().iter().enumerate() {
        let mut op = CMatrix::zeros(2 * cd, 2 * cd);
        for a in 0..2 {
            for b in 0..2 {
                let id = if a == b { 1.0 } else { 0.0 };
                op[(a, b)] = C64::new(id, 0.0) - psi[a] * psi[b].conj();
            }
        }
        expr.add_term(LocalTerm::new(
            vec![CLOCK_SITE.to_string(), qubit_site(k)],
            op,
            1.0,
        )?)?;
    }
    Ok(ClockHamiltonian {
        expr,
        steps,
        n_qubits: n,
    })
}

/// Clock with no quantum register and identity transitions: the path-graph Laplacian.
pub fn bare_clock(steps: usize) -> Result<ClockHamiltonian> {
    if steps == 0 {
        return Err(ClockError::NoSteps);
    }
    let cd = steps + 1;
    let mut op = CMatrix::zeros(cd, cd);
    let id = CMatrix::identity(1, 1);
    for t in 1..=steps {
        op += transition(cd, t, &id);
    }
    let mut expr = HamiltonianExpr::new(system(steps, 0)?);
    expr.add_term(LocalTerm::new(vec![CLOCK_SITE.to_string()], op, 1.0)?)?;
    Ok(ClockHamiltonian {
        expr,
        steps,
        n_qubits: 0,
    })
}

/// `(T+1)^(-1/2) Σ_t |t> ⊗ U_t ... U_1 |ψ_in>`, clock digit most significant.
pub fn history_state(seq: &GateSequence, psi_in: &[C64]) -> Result<Vec<C64>> {
    let states = seq.states_from(psi_in)?;
    let norm = 1.0 / (states.len() as f64).sqrt();
    Ok(states.into_iter().flatten().map(|z| z * norm).collect())
}

/// Ground data of a clock Hamiltonian compared with a claimed history state.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HistoryCheck {
    pub steps: usize,
    pub ground_energy: f64,
    pub gap: f64,
    /// `|<history|ground>|²`.
    pub overlap: f64,
}

/// Diagonalise `clock_hamiltonian(seq)` and compare its ground vector with the
/// history state built from `claimed_input`.
pub fn verify_history(seq: &GateSequence, claimed_input: &[C64]) -> Result<HistoryCheck> {
    let h = clock_hamiltonian(seq)?;
    let spec = full_spectrum(&h.expr)?;
    let hist = history_state(seq, claimed_input)?;
    let g = spec.eigenvectors.column(0);
    let overlap = hist
        .iter()
        .zip(g.iter())
        .map(|(a, b)| a.conj() * b)
        .sum::<C64>()
        .norm_sqr();
    Ok(HistoryCheck {
        steps: h.steps,
        ground_energy: spec.eigenvalues[0],
        gap: spec.gap().unwrap_or(f64::INFINITY),
        overlap,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub steps: usize,
    pub gap: f64,
    /// `gap · (T+1)²`, which tends to π².
    pub scaled: f64,
}

/// Measured `λ_1 - λ_0` of identity-gate clocks.
pub fn gap_scan(steps: &[usize]) -> Result<Vec<GapRow>> {
    steps
        .iter()
        .map(|&t| {
            let spec = full_spectrum(&bare_clock(t)?.expr)?;
            let gap = spec.gap().expect("clock has at least two levels");
            Ok(GapRow {
                steps: t,
                gap,
                scaled: gap * ((t + 1) as f64).powi(2),
            })
        })
        .collect()
}
