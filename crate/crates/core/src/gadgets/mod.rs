//! Mediator-qubit gadgets for Heisenberg and XY interactions.
//!
//! Every gadget adds a mediator pair `(a, b)` bound by a heavy term `Δ h_ab`
//! and couples logical qubits to the mediators with strength `√(ρΔ)`, where
//! `ρ` is half the gap of `h_ab` (2 for Heisenberg, 1 for XY). With this
//! normalisation the second-order effective Hamiltonian on the mediators'
//! ground state is `-(1/2) Π H2² Π`, which turns mediator couplings `h_1a h_2b`
//! into `+h_12` and `h_1a h_2a` into `-h_12`; first-order compensation terms
//! cancel the unwanted products for the fork and crossing gadgets.

mod plan;
mod scan;

pub use plan::{
    apply_plan, replay, GadgetPlan, Ledger, LedgerStep, PlanApplication, PlanOutput, Round,
};
pub use scan::{certify, error_scan, fit_slope, gadget_isometry, singlet, ScanRow, ScanTable};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::opcore::{HamiltonianExpr, Interaction, OpError, Site};
use crate::simcheck::SimError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GadgetError {
    #[error(transparent)]
    Op(#[from] OpError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("degenerate gadget: {0}")]
    Degenerate(String),
    #[error("mediator id `{0}` already present")]
    MediatorCollision(String),
    #[error("logical sites must be distinct qubits: {0:?}")]
    BadSites(Vec<String>),
    #[error("heavy scale must be positive, got {0}")]
    BadDelta(f64),
    #[error("interference in round {round}: {detail}")]
    Interference { round: usize, detail: String },
    #[error("invalid plan: {0}")]
    BadPlan(String),
    #[error("no {family} term on ({a}, {b}) to compile")]
    MissingTerm {
        family: Family,
        a: String,
        b: String,
    },
    #[error("scan needs at least 3 geometrically spaced Δ values")]
    BadSweep,
    #[error("verification at Δ = {delta} failed structurally: {reason}")]
    ScanFailure { delta: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, GadgetError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Heisenberg,
    Xy,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Heisenberg => "heisenberg",
            Family::Xy => "xy",
        })
    }
}

impl Family {
    pub fn interaction(self) -> Interaction {
        match self {
            Family::Heisenberg => Interaction::Heisenberg,
            Family::Xy => Interaction::Xy,
        }
    }

    /// Half the gap of `h_ab` above its ground state.
    pub fn rho(self) -> f64 {
        match self {
            Family::Heisenberg => 2.0,
            Family::Xy => 1.0,
        }
    }

    /// Ground energy of `h_ab`.
    pub fn ground_energy(self) -> f64 {
        match self {
            Family::Heisenberg => -3.0,
            Family::Xy => -2.0,
        }
    }

    /// `<s| (σ_a)² |s>` summed over the family's Pauli components, halved:
    /// the constant per unit squared coupling in `-(1/2) Π H2² Π`.
    fn self_energy(self) -> f64 {
        match self {
            Family::Heisenberg => 1.5,
            Family::Xy => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GadgetKind {
    SubdivPos,
    SubdivNeg,
    Fork,
    Crossing,
}

impl GadgetKind {
    pub fn arity(self) -> usize {
        match self {
            GadgetKind::SubdivPos | GadgetKind::SubdivNeg => 2,
            GadgetKind::Fork => 3,
            GadgetKind::Crossing => 4,
        }
    }
}

/// One gadget with all parameters fixed.
///
/// Sites: subdivision `(1, 2)`; fork `(1, 2, 3)` realising `λ h_13 + μ h_23`;
/// crossing `(1, 2, 3, 4)` realising `λ h_14 + μ h_23`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GadgetApplication {
    pub kind: GadgetKind,
    pub sites: Vec<String>,
    pub lambda: f64,
    #[serde(default)]
    pub mu: f64,
    pub mediators: [String; 2],
    pub family: Family,
}

/// Result of applying one gadget.
#[derive(Clone, Debug)]
pub struct Applied {
    pub expr: HamiltonianExpr,
    pub application: GadgetApplication,
    /// Constant the low-energy spectrum sits at: `Δ E0 - c Σ couplings²`.
    pub energy_shift: f64,
    /// Target terms consumed by the gadget, as indices into the input expression.
    pub consumed: Vec<usize>,
}

/// Split `λ` into mediator couplings `(c1, c2)` with `c1 c2 = λ`.
///
/// Small couplings keep the `(1, λ)` form; large ones are balanced so that
/// neither leg exceeds `√|λ|`, which keeps nested gadgets perturbative.
pub fn split_coupling(lambda: f64) -> (f64, f64) {
    if lambda.abs() <= 1.0 {
        (1.0, lambda)
    } else {
        let s = lambda.abs().sqrt();
        (s, lambda.signum() * s)
    }
}

/// Effective interactions the gadget realises: `(site, site, coefficient)`.
pub fn effective_terms(app: &GadgetApplication) -> Vec<(String, String, f64)> {
    let s = &app.sites;
    match app.kind {
        GadgetKind::SubdivPos => vec![(s[0].clone(), s[1].clone(), app.lambda)],
        GadgetKind::SubdivNeg => vec![(s[0].clone(), s[1].clone(), -app.lambda)],
        GadgetKind::Fork => vec![
            (s[0].clone(), s[2].clone(), app.lambda),
            (s[1].clone(), s[2].clone(), app.mu),
        ],
        GadgetKind::Crossing => vec![
            (s[0].clone(), s[3].clone(), app.lambda),
            (s[1].clone(), s[2].clone(), app.mu),
        ],
    }
}

/// Mediator couplings `(logical site, mediator index, coefficient)` and
/// compensation terms `(site, site, coefficient)` of a gadget.
#[allow(clippy::type_complexity)]
fn layout(app: &GadgetApplication) -> Result<(Vec<(usize, usize, f64)>, Vec<(usize, usize, f64)>)> {
    let (l, m) = (app.lambda, app.mu);
    Ok(match app.kind {
        GadgetKind::SubdivPos | GadgetKind::SubdivNeg => {
            if l == 0.0 {
                return Err(GadgetError::Degenerate("subdivision with λ = 0".into()));
            }
            let (c1, c2) = split_coupling(l);
            let second = if app.kind == GadgetKind::SubdivPos {
                1
            } else {
                0
            };
            (vec![(0, 0, c1), (1, second, c2)], vec![])
        }
        GadgetKind::Fork => {
            if l == 0.0 && m == 0.0 {
                return Err(GadgetError::Degenerate("fork with λ = μ = 0".into()));
            }
            (vec![(2, 1, 1.0), (0, 0, l), (1, 0, m)], vec![(0, 1, l * m)])
        }
        GadgetKind::Crossing => (
            vec![(0, 0, 1.0), (1, 0, 1.0), (3, 1, l), (2, 1, m)],
            vec![(0, 1, 1.0), (1, 3, -l), (0, 2, -m), (2, 3, l * m)],
        ),
    })
}

fn mean_coord(coords: &[Option<Vec<f64>>]) -> Option<Vec<f64>> {
    let first = coords.first()?.as_ref()?;
    let mut acc = vec![0.0; first.len()];
    for c in coords {
        let c = c.as_ref()?;
        if c.len() != acc.len() {
            return None;
        }
        acc.iter_mut().zip(c).for_each(|(a, x)| *a += x);
    }
    acc.iter_mut().for_each(|a| *a /= coords.len() as f64);
    Some(acc)
}

/// Index of the term `family` on `(a, b)` with coefficient `coeff` (any coefficient if `None`).
pub(crate) fn find_target(
    h: &HamiltonianExpr,
    family: Family,
    a: &str,
    b: &str,
    coeff: Option<f64>,
) -> Option<usize> {
    let kind = family.interaction();
    h.terms().iter().position(|t| {
        t.is_named_on(&kind, a, b)
            && coeff.is_none_or(|c| (t.coeff() - c).abs() <= 1e-12 * c.abs().max(1.0))
    })
}

/// Apply one gadget, consuming matching target terms when present.
pub fn apply(h: &HamiltonianExpr, app: &GadgetApplication, delta: f64) -> Result<Applied> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(GadgetError::BadDelta(delta));
    }
    let s = &app.sites;
    let distinct = s.iter().enumerate().all(|(i, x)| !s[..i].contains(x));
    let qubits = s
        .iter()
        .all(|x| h.system().site(x).is_some_and(|site| site.dim == 2));
    if s.len() != app.kind.arity() || !distinct || !qubits {
        return Err(GadgetError::BadSites(s.clone()));
    }
    for m in &app.mediators {
        if h.system().contains(m) || s.contains(m) {
            return Err(GadgetError::MediatorCollision(m.clone()));
        }
    }
    if app.mediators[0] == app.mediators[1] {
        return Err(GadgetError::MediatorCollision(app.mediators[0].clone()));
    }
    let (couplings, compensation) = layout(app)?;

    let mut consumed = Vec::new();
    for (a, b, c) in effective_terms(app) {
        if c == 0.0 {
            continue;
        }
        if let Some(i) = find_target(h, app.family, &a, &b, Some(c)) {
            if !consumed.contains(&i) {
                consumed.push(i);
            }
        }
    }
    let mut out = HamiltonianExpr::new(h.system().clone());
    for (i, t) in h.terms().iter().enumerate() {
        if !consumed.contains(&i) {
            out.add_term(t.clone())?;
        }
    }
    let coords: Vec<Option<Vec<f64>>> = s
        .iter()
        .map(|x| h.system().site(x).and_then(|t| t.coord.clone()))
        .collect();
    for (k, m) in app.mediators.iter().enumerate() {
        let linked: Vec<Option<Vec<f64>>> = couplings
            .iter()
            .filter(|c| c.1 == k)
            .map(|c| coords[c.0].clone())
            .collect();
        out.add_site(Site {
            id: m.clone(),
            dim: 2,
            coord: mean_coord(&linked),
        })?;
    }
    let kind = app.family.interaction();
    let [ma, mb] = [&app.mediators[0], &app.mediators[1]];
    out.add_named(kind.clone(), &[ma, mb], delta)?;
    let g = (app.family.rho() * delta).sqrt();
    let mut sum_sq = 0.0;
    for &(site, med, c) in &couplings {
        if c != 0.0 {
            out.add_named(kind.clone(), &[&s[site], &app.mediators[med]], g * c)?;
        }
        sum_sq += c * c;
    }
    for &(x, y, c) in &compensation {
        if c != 0.0 {
            out.add_named(kind.clone(), &[&s[x], &s[y]], c)?;
        }
    }
    let energy_shift = delta * app.family.ground_energy() - app.family.self_energy() * sum_sq;
    Ok(Applied {
        expr: out,
        application: app.clone(),
        energy_shift,
        consumed,
    })
}

fn fresh_pair(h: &HamiltonianExpr) -> [String; 2] {
    let a = h.system().fresh_id("m");
    let mut sys = h.system().clone();
    sys.push(Site::new(a.clone(), 2)).expect("fresh id");
    [a, sys.fresh_id("m")]
}

/// Subdivision of `λ h_12` (`sign = +1`) or `-λ h_12` (`sign = -1`).
pub fn subdivide(
    h: &HamiltonianExpr,
    edge: (&str, &str),
    lambda: f64,
    sign: i8,
    delta: f64,
    family: Family,
) -> Result<Applied> {
    let kind = if sign >= 0 {
        GadgetKind::SubdivPos
    } else {
        GadgetKind::SubdivNeg
    };
    let app = GadgetApplication {
        kind,
        sites: vec![edge.0.to_string(), edge.1.to_string()],
        lambda,
        mu: 0.0,
        mediators: fresh_pair(h),
        family,
    };
    apply(h, &app, delta)
}

/// Fork on `(1, 2, 3)` realising `λ h_13 + μ h_23`.
pub fn fork(
    h: &HamiltonianExpr,
    sites: [&str; 3],
    lambda: f64,
    mu: f64,
    delta: f64,
    family: Family,
) -> Result<Applied> {
    let app = GadgetApplication {
        kind: GadgetKind::Fork,
        sites: sites.iter().map(|s| s.to_string()).collect(),
        lambda,
        mu,
        mediators: fresh_pair(h),
        family,
    };
    apply(h, &app, delta)
}

/// Crossing on `(1, 2, 3, 4)` realising `λ h_14 + μ h_23`.
pub fn crossing(
    h: &HamiltonianExpr,
    sites: [&str; 4],
    lambda: f64,
    mu: f64,
    delta: f64,
    family: Family,
) -> Result<Applied> {
    let app = GadgetApplication {
        kind: GadgetKind::Crossing,
        sites: sites.iter().map(|s| s.to_string()).collect(),
        lambda,
        mu,
        mediators: fresh_pair(h),
        family,
    };
    apply(h, &app, delta)
}

#[cfg(test)]
mod tests;
