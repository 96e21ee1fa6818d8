//! Structured-text (TOML) documents.
//!
//! Hamiltonian documents list the sites in tensor-product order followed by
//! the terms. A term is either a named interaction with a coefficient or an
//! explicit operator given row-major as `re` (and optionally `im`) entries;
//! the first support site is the most significant index digit.
//!
//! ```toml
//! [[sites]]
//! id = "a"
//! dim = 2
//! coord = [0.0, 0.0]
//!
//! [[terms]]
//! support = ["a", "b"]
//! interaction = "heisenberg"
//! coeff = 1.0
//! ```
//!
//! Graph, tileset and gate-sequence documents live with their modules and
//! are re-exported here.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gadgets::{GadgetPlan, Ledger, ScanTable};
use crate::opcore::{HamiltonianExpr, Interaction, LocalTerm, OpError, Site, SiteSystem};
use crate::simcheck::{IsometryBlock, LocalIsometry, SimError, SimulationReport};
use crate::{CMatrix, C64, VERSION};

pub use crate::clocklab::{GateSequence, GateSequenceDoc, StepDoc};
pub use crate::geocompile::{EmbeddedGraph, GraphDoc, VertexDoc};
pub use crate::tilelab::{BoundaryDoc, TileDoc, Tileset, TilesetDoc};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormatError {
    /// Syntax or schema error; the message carries the location.
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Op(#[from] OpError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("invalid document: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, FormatError>;

/// Parse any TOML document into `T`.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| FormatError::Parse(e.to_string()))
}

/// Render `value` as TOML.
pub fn render<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string(value).map_err(|e| FormatError::Invalid(e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<usize>,
    #[serde(default)]
    pub sites: Vec<Site>,
    #[serde(default)]
    pub terms: Vec<TermDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermDoc {
    pub support: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interaction: Option<String>,
    #[serde(default = "one")]
    pub coeff: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub re: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

fn split_entries(m: &CMatrix) -> (Vec<f64>, Option<Vec<f64>>) {
    let mut re = Vec::with_capacity(m.len());
    let mut im = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            re.push(m[(i, j)].re);
            im.push(m[(i, j)].im);
        }
    }
    let im = im.iter().any(|x| *x != 0.0).then_some(im);
    (re, im)
}

fn join_entries(
    rows: usize,
    cols: usize,
    re: &[f64],
    im: Option<&[f64]>,
    what: &str,
) -> Result<CMatrix> {
    let n = rows * cols;
    if re.len() != n || im.is_some_and(|v| v.len() != n) {
        return Err(FormatError::Invalid(format!(
            "{what}: expected {n} entries ({rows}x{cols})"
        )));
    }
    let vals: Vec<C64> = (0..n)
        .map(|k| C64::new(re[k], im.map_or(0.0, |v| v[k])))
        .collect();
    Ok(CMatrix::from_row_slice(rows, cols, &vals))
}

impl HamiltonianDoc {
    pub fn from_expr(h: &HamiltonianExpr) -> Self {
        let cap = h.system().cap();
        let terms = h
            .terms()
            .iter()
            .map(|t| match t.label() {
                Some(l) => TermDoc {
                    support: t.support().to_vec(),
                    interaction: Some(l.to_string()),
                    coeff: t.coeff(),
                    re: None,
                    im: None,
                },
                None => {
                    let (re, im) = split_entries(t.op());
                    TermDoc {
                        support: t.support().to_vec(),
                        interaction: None,
                        coeff: t.coeff(),
                        re: Some(re),
                        im,
                    }
                }
            })
            .collect();
        HamiltonianDoc {
            cap: (cap != crate::opcore::DEFAULT_DIM_CAP).then_some(cap),
            sites: h.system().sites().to_vec(),
            terms,
        }
    }

    pub fn to_expr(&self) -> Result<HamiltonianExpr> {
        let mut sys = SiteSystem::new(self.sites.clone())?;
        if let Some(cap) = self.cap {
            sys = sys.with_cap(cap);
        }
        let mut h = HamiltonianExpr::new(sys);
        for (k, t) in self.terms.iter().enumerate() {
            let support: Vec<&str> = t.support.iter().map(String::as_str).collect();
            let term = match (&t.interaction, &t.re) {
                (Some(name), None) => {
                    let kind: Interaction = name.parse()?;
                    LocalTerm::named(h.system(), kind, &support, t.coeff)?
                }
                (None, Some(re)) => {
                    let dims = support
                        .iter()
                        .map(|id| {
                            h.system()
                                .site(id)
                                .map(|s| s.dim)
                                .ok_or_else(|| OpError::UnknownSite(id.to_string()))
                        })
                        .collect::<std::result::Result<Vec<_>, _>>()?;
                    let d: usize = dims.iter().product();
                    let op = join_entries(d, d, re, t.im.as_deref(), &format!("term {k}"))?;
                    LocalTerm::new(t.support.clone(), op, t.coeff)?
                }
                _ => {
                    return Err(FormatError::Invalid(format!(
                        "term {k}: give exactly one of `interaction` or `re`"
                    )))
                }
            };
            h.add_term(term)?;
        }
        Ok(h)
    }
}

pub fn hamiltonian_to_toml(h: &HamiltonianExpr) -> String {
    render(&HamiltonianDoc::from_expr(h)).expect("hamiltonian documents always serialise")
}

pub fn hamiltonian_from_toml(text: &str) -> Result<HamiltonianExpr> {
    parse::<HamiltonianDoc>(text)?.to_expr()
}

/// A local isometry: the target system plus one block per factor.
///
/// A block's `re`/`im` entries are its map, row-major, with one column per
/// target basis state (a single column for a fixed ancilla state).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsometryDoc {
    pub target: Vec<Site>,
    pub blocks: Vec<BlockDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    pub sites: Vec<String>,
    pub re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<f64>>,
}

impl IsometryDoc {
    pub fn from_isometry(v: &LocalIsometry) -> Self {
        let blocks = v
            .blocks()
            .iter()
            .map(|b| {
                let (re, im) = split_entries(&b.map);
                BlockDoc {
                    target: b.target.clone(),
                    sites: b.sites.clone(),
                    re,
                    im,
                }
            })
            .collect();
        IsometryDoc {
            target: v.target().sites().to_vec(),
            blocks,
        }
    }

    pub fn to_isometry(&self) -> Result<LocalIsometry> {
        let target = SiteSystem::new(self.target.clone())?;
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for (k, b) in self.blocks.iter().enumerate() {
            let cols = match &b.target {
                Some(t) => target
                    .site(t)
                    .map(|s| s.dim)
                    .ok_or_else(|| OpError::UnknownSite(t.clone()))?,
                None => 1,
            };
            if b.re.is_empty() || b.re.len() % cols != 0 {
                return Err(FormatError::Invalid(format!(
                    "block {k}: {} entries for {cols} columns",
                    b.re.len()
                )));
            }
            let map = join_entries(
                b.re.len() / cols,
                cols,
                &b.re,
                b.im.as_deref(),
                &format!("block {k}"),
            )?;
            blocks.push(IsometryBlock {
                target: b.target.clone(),
                sites: b.sites.clone(),
                map,
            });
        }
        Ok(LocalIsometry::new(target, blocks)?)
    }
}

pub fn isometry_to_toml(v: &LocalIsometry) -> String {
    render(&IsometryDoc::from_isometry(v)).expect("isometry documents always serialise")
}

pub fn isometry_from_toml(text: &str) -> Result<LocalIsometry> {
    parse::<IsometryDoc>(text)?.to_isometry()
}

pub fn plan_to_toml(plan: &GadgetPlan) -> String {
    render(plan).expect("plans always serialise")
}

pub fn plan_from_toml(text: &str) -> Result<GadgetPlan> {
    let plan: GadgetPlan = parse(text)?;
    plan.validate()
        .map_err(|e| FormatError::Invalid(e.to_string()))?;
    Ok(plan)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerDoc {
    pub ledger: Ledger,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    /// Process exit code: 0 pass, 1 certified failure, 2 structural error.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Error => 2,
        }
    }
}

/// Envelope shared by every report: version, command and status, then the
/// command's own result table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    pub version: String,
    pub command: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default = "Option::default", skip_serializing_if = "Option::is_none")]
    pub result: Option<T>,
}

impl<T: Serialize> Report<T> {
    pub fn new(command: &str, status: Status, result: T) -> Self {
        Report {
            version: VERSION.to_string(),
            command: command.to_string(),
            status,
            reason: None,
            result: Some(result),
        }
    }

    pub fn with_reason(mut self, reason: impl Into<String>) -> Self {
        self.reason = Some(reason.into());
        self
    }

    pub fn to_toml(&self) -> Result<String> {
        render(self)
    }
}

impl Report<()> {
    /// Report for a job that could not run.
    pub fn error(command: &str, reason: impl Into<String>) -> Self {
        Report {
            version: VERSION.to_string(),
            command: command.to_string(),
            status: Status::Error,
            reason: Some(reason.into()),
            result: None,
        }
    }
}

pub fn simulation_report_to_toml(r: &SimulationReport) -> String {
    render(r).expect("reports always serialise")
}

pub fn simulation_report_from_toml(text: &str) -> Result<SimulationReport> {
    parse(text)
}

/// Scan table as plain text: a header, one `delta eps` row per Δ, then the fit.
pub fn scan_table_text(t: &ScanTable) -> String {
    let mut out = String::from("# delta eps\n");
    for r in &t.rows {
        out.push_str(&format!("{:e} {:e}\n", r.delta, r.eps));
    }
    match t.slope {
        Some(s) => out.push_str(&format!("# slope {s:.6}\n")),
        None if t.exact => out.push_str("# exact\n"),
        None => out.push_str("# slope undefined\n"),
    }
    out
}
