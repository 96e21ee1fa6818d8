use serde::{Deserialize, Serialize};

use super::{GadgetError, Result};
use crate::opcore::{HamiltonianExpr, SiteSystem};
use crate::simcheck::{verify_simulation, IsometryBlock, LocalIsometry, Request, SimulationReport};
use crate::C64;

/// `(|01> - |10>)/√2`, the mediator ground state for both families.
pub fn singlet() -> [C64; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [
        C64::new(0.0, 0.0),
        C64::new(s, 0.0),
        C64::new(-s, 0.0),
        C64::new(0.0, 0.0),
    ]
}

/// Identity on the target sites, mediator pairs frozen in their ground state.
pub fn gadget_isometry(target: &SiteSystem, pairs: &[[String; 2]]) -> Result<LocalIsometry> {
    let mut blocks: Vec<IsometryBlock> =
        target.sites().iter().map(IsometryBlock::identity).collect();
    let s = singlet();
    for [a, b] in pairs {
        blocks.push(IsometryBlock::ancilla(&[a, b], &s));
    }
    Ok(LocalIsometry::new(target.clone(), blocks)?)
}

/// Verify a gadget output against `target` at cut `delta_cut` above `energy_shift`.
pub fn certify(
    target: &HamiltonianExpr,
    sim: &HamiltonianExpr,
    energy_shift: f64,
    pairs: &[[String; 2]],
    delta_cut: f64,
    eta: f64,
    eps: f64,
) -> Result<SimulationReport> {
    let v = gadget_isometry(target.system(), pairs)?;
    let req = Request::new(delta_cut, eta, eps).shifted(energy_shift);
    Ok(verify_simulation(sim, target, &req, &v)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub delta: f64,
    pub eps: f64,
    pub eta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
    /// Least-squares slope of `ln ε` against `ln Δ`; absent when ε vanishes.
    pub slope: Option<f64>,
    /// Every ε is zero to rounding.
    pub exact: bool,
    /// ε never increases along the sweep.
    pub monotone: bool,
}

/// Errors at or below this are treated as exact zeros.
const ZERO_EPS: f64 = 1e-12;

pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    (var > 0.0).then(|| cov / var)
}

/// Certify `builder(Δ)` against `target` at cut `Δ/2` for every Δ and fit the decay.
///
/// The builder returns the simulator, its isometry and its energy shift.
pub fn error_scan<F>(target: &HamiltonianExpr, builder: F, deltas: &[f64]) -> Result<ScanTable>
where
    F: Fn(f64) -> Result<(HamiltonianExpr, LocalIsometry, f64)>,
{
    if deltas.len() < 3 || deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(GadgetError::BadSweep);
    }
    let ratio = deltas[1] / deltas[0];
    let geometric = deltas
        .windows(2)
        .all(|w| ((w[1] / w[0]) / ratio - 1.0).abs() < 1e-9)
        && ratio > 1.0;
    if !geometric {
        return Err(GadgetError::BadSweep);
    }
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let (sim, v, shift) = builder(delta)?;
        let req = Request::new(delta / 2.0, f64::INFINITY, f64::INFINITY).shifted(shift);
        let rep = verify_simulation(&sim, target, &req, &v)?;
        match (rep.eps_achieved, rep.eta_achieved) {
            (Some(eps), Some(eta)) => rows.push(ScanRow { delta, eps, eta }),
            _ => {
                return Err(GadgetError::ScanFailure {
                    delta,
                    reason: rep.reason.unwrap_or_else(|| "no witness".into()),
                })
            }
        }
    }
    let exact = rows.iter().all(|r| r.eps <= ZERO_EPS);
    let positive: Vec<&ScanRow> = rows.iter().filter(|r| r.eps > ZERO_EPS).collect();
    let slope = if exact {
        None
    } else {
        fit_slope(
            &positive.iter().map(|r| r.delta).collect::<Vec<_>>(),
            &positive.iter().map(|r| r.eps).collect::<Vec<_>>(),
        )
    };
    let monotone = rows.windows(2).all(|w| w[1].eps <= w[0].eps);
    Ok(ScanTable {
        rows,
        slope,
        exact,
        monotone,
    })
}
