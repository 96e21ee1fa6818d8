//! Jobs behind the `hamsim` command line.
//!
//! Every job produces a TOML report with the crate version, the command and a
//! status, and maps that status onto the process exit code: 0 for pass, 1 for
//! a certified failure, 2 for malformed input or any other structural error.
//! Reports never contain timings, so a fixed job and seed give identical bytes.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hamsim::clocklab::{
    blink_schedule, field_program, gap_scan, snake_path, verify_history, AngleField, Gate,
    GateSequence, GateSet, HistoryCheck, SynthOptions,
};
use hamsim::formats::{self, Report, Status};
use hamsim::gadgets::{
    apply_plan, certify, crossing, error_scan, fork, gadget_isometry, subdivide, Applied, Family,
    GadgetKind, ScanTable,
};
use hamsim::geocompile::{compile, CompileParams, EmbeddedGraph, LocalityParams, PeriodicGraph};
use hamsim::opcore::{full_spectrum, low_spectrum, HamiltonianExpr, SiteSystem};
use hamsim::simcheck::{verify_simulation, CouplingGrid, LocalIsometry, Request, SimulationReport};
use hamsim::tilelab::{
    binary_counter_tileset, counter_row_values, decode_layers, ground_exhaustive, ground_search,
    ground_transfer, layer_stack, SearchOptions, TileConfig, TileError, Tileset,
};
use hamsim::CMatrix;
use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Parser, Debug, Clone)]
#[command(
    name = "hamsim",
    version,
    about = "Compile and certify Hamiltonian simulations"
)]
pub struct JobConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Report file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for every random choice a job makes.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Parse a document and check that it re-renders to an equal value.
    Validate(ValidateArgs),
    /// Eigenvalues of a Hamiltonian document.
    Diag(DiagArgs),
    /// Check a simulator against a target at cut delta.
    Verify(VerifyArgs),
    /// Build and certify one gadget, or apply a plan to a target.
    Gadget(GadgetArgs),
    /// Certified error of a gadget over a geometric sweep of delta.
    Scan(ScanArgs),
    /// Ground states of tiling Hamiltonians.
    Tile(TileArgs),
    /// Clock Hamiltonians, rotation synthesis and field programs.
    Clock(ClockArgs),
    /// Compile a geometrically local target onto a periodic lattice.
    Compile(CompileArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate(_) => "validate",
            Command::Diag(_) => "diag",
            Command::Verify(_) => "verify",
            Command::Gadget(_) => "gadget",
            Command::Scan(_) => "scan",
            Command::Tile(_) => "tile",
            Command::Clock(_) => "clock",
            Command::Compile(_) => "compile",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocKind {
    Hamiltonian,
    Isometry,
    Plan,
    Graph,
    Tileset,
    Gates,
    Grid,
}

#[derive(Args, Debug, Clone)]
pub struct ValidateArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "hamiltonian")]
    pub kind: DocKind,
}

#[derive(Args, Debug, Clone)]
pub struct DiagArgs {
    pub input: PathBuf,
    /// Lowest `k` eigenvalues only (iterative solver above the dense size).
    #[arg(long)]
    pub k: Option<usize>,
    /// Report the number of eigenvalues at or below this energy.
    #[arg(long)]
    pub below: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[arg(long)]
    pub sim: PathBuf,
    #[arg(long)]
    pub target: PathBuf,
    /// Isometry document; the identity when both systems are equal.
    #[arg(long)]
    pub isometry: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: f64,
    #[arg(long, default_value_t = f64::INFINITY)]
    pub eta: f64,
    #[arg(long)]
    pub eps: f64,
    /// Constant subtracted from the simulator before the cut.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub shift: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum KindArg {
    Subdiv,
    SubdivNeg,
    Fork,
    Crossing,
}

impl KindArg {
    fn kind(self) -> GadgetKind {
        match self {
            KindArg::Subdiv => GadgetKind::SubdivPos,
            KindArg::SubdivNeg => GadgetKind::SubdivNeg,
            KindArg::Fork => GadgetKind::Fork,
            KindArg::Crossing => GadgetKind::Crossing,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyArg {
    Heisenberg,
    Xy,
}

impl FamilyArg {
    fn family(self) -> Family {
        match self {
            FamilyArg::Heisenberg => Family::Heisenberg,
            FamilyArg::Xy => Family::Xy,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct GadgetSpec {
    #[arg(long, value_enum, default_value = "subdiv")]
    pub kind: KindArg,
    #[arg(long, value_enum, default_value = "heisenberg")]
    pub family: FamilyArg,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub mu: f64,
}

#[derive(Args, Debug, Clone)]
pub struct GadgetArgs {
    #[command(flatten)]
    pub spec: GadgetSpec,
    #[arg(long, default_value_t = 1e4)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = f64::INFINITY)]
    pub eta: f64,
    /// Apply this plan document to `--target` instead of building one gadget.
    #[arg(long, requires = "target")]
    pub plan: Option<PathBuf>,
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// Certify plan outputs up to this many qubits.
    #[arg(long, default_value_t = 10)]
    pub certify_max_sites: usize,
    #[arg(long)]
    pub emit_sim: Option<PathBuf>,
    #[arg(long)]
    pub emit_target: Option<PathBuf>,
    #[arg(long)]
    pub emit_isometry: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ScanArgs {
    #[command(flatten)]
    pub spec: GadgetSpec,
    /// Geometric sweep of heavy scales, at least three.
    #[arg(long, value_delimiter = ',', default_value = "1e2,1e3,1e4,1e5")]
    pub deltas: Vec<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    Auto,
    Exhaustive,
    Transfer,
    Search,
}

#[derive(Args, Debug, Clone)]
pub struct TileArgs {
    /// Tileset document; the binary counter when absent.
    #[arg(long)]
    pub tileset: Option<PathBuf>,
    #[arg(long)]
    pub width: usize,
    #[arg(long)]
    pub height: usize,
    #[arg(long, value_enum, default_value = "auto")]
    pub solver: Solver,
    /// Solve the counter, mirrored counter and both marker layers, then decode.
    #[arg(long, conflicts_with = "tileset")]
    pub layers: bool,
    /// Report failure when the minimizer is not unique.
    #[arg(long)]
    pub require_unique: bool,
}

#[derive(Args, Debug, Clone)]
pub struct ClockArgs {
    #[command(subcommand)]
    pub mode: ClockMode,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateSetArg {
    VBasis,
    CliffordT,
}

#[derive(Subcommand, Debug, Clone)]
pub enum ClockMode {
    /// Spectral gap of identity clocks against the path-Laplacian law.
    Gap {
        #[arg(long, value_delimiter = ',', default_value = "16,32,64")]
        steps: Vec<usize>,
    },
    /// Ground state of a circuit's clock Hamiltonian against its history state.
    History {
        /// Gate sequence document; a seeded random two-qubit circuit otherwise.
        #[arg(long)]
        gates: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        steps: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Shortest gate word preparing `cos θ|0> + sin θ|1>` within delta.
    Synth {
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, value_enum, default_value = "v-basis")]
        gate_set: GateSetArg,
        #[arg(long, default_value_t = 40)]
        max_len: usize,
    },
    /// Field program for a coupling grid, with the blink expectation per qubit.
    Field {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long)]
        emit_gates: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeArg {
    Square,
    Hexagonal,
    SubdividedSquare,
    Cubic,
}

impl LatticeArg {
    pub fn graph(self) -> PeriodicGraph {
        match self {
            LatticeArg::Square => PeriodicGraph::square(2),
            LatticeArg::Hexagonal => PeriodicGraph::hexagonal(),
            LatticeArg::SubdividedSquare => PeriodicGraph::subdivided_square(),
            LatticeArg::Cubic => PeriodicGraph::square(3),
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct CompileArgs {
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long, value_enum, default_value = "square")]
    pub lattice: LatticeArg,
    /// Largest number of vertices in a closed unit ball.
    #[arg(long, default_value_t = 5)]
    pub ball: usize,
    /// Longest interaction allowed.
    #[arg(long, default_value_t = 1.5)]
    pub range: f64,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub spacing: f64,
    #[arg(long, default_value_t = 1e4)]
    pub delta_base: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = 8)]
    pub certify_max_sites: usize,
    #[arg(long)]
    pub emit_sim: Option<PathBuf>,
    #[arg(long)]
    pub emit_plan: Option<PathBuf>,
    /// Interaction graph of the simulator at its lattice coordinates.
    #[arg(long)]
    pub emit_graph: Option<PathBuf>,
}

/// Status and rendered report of one job.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub status: Status,
    pub reason: Option<String>,
    pub report: String,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }
}

type JobResult = Result<Outcome, String>;

fn finish<T: Serialize>(
    command: &str,
    status: Status,
    reason: Option<String>,
    result: T,
) -> JobResult {
    let mut r = Report::new(command, status, result);
    r.reason = reason.clone();
    Ok(Outcome {
        status,
        reason,
        report: r.to_toml().map_err(|e| e.to_string())?,
    })
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn at<E: std::fmt::Display>(path: &Path) -> impl Fn(E) -> String + '_ {
    move |e| format!("{}: {e}", path.display())
}

fn load_hamiltonian(path: &Path) -> Result<HamiltonianExpr, String> {
    formats::hamiltonian_from_toml(&read(path)?).map_err(at(path))
}

/// Run a job. Structural errors become an error report with exit code 2.
pub fn run(job: &JobConfig) -> Outcome {
    let name = job.command.name();
    let result = match &job.command {
        Command::Validate(a) => validate(a),
        Command::Diag(a) => diag(a),
        Command::Verify(a) => verify(a),
        Command::Gadget(a) => gadget(a),
        Command::Scan(a) => scan(a),
        Command::Tile(a) => tile(a),
        Command::Clock(a) => clock(a, job.seed),
        Command::Compile(a) => compile_job(a),
    };
    result.unwrap_or_else(|reason| {
        let report = Report::error(name, reason.clone())
            .to_toml()
            .expect("error reports always serialise");
        Outcome {
            status: Status::Error,
            reason: Some(reason),
            report,
        }
    })
}

#[derive(Serialize)]
struct ValidateResult {
    kind: String,
    round_trip: bool,
    counts: BTreeMap<String, usize>,
}

fn validate(a: &ValidateArgs) -> JobResult {
    let text = read(&a.input)?;
    let path = a.input.as_path();
    let mut counts = BTreeMap::new();
    let round_trip = match a.kind {
        DocKind::Hamiltonian => {
            let h = formats::hamiltonian_from_toml(&text).map_err(at(path))?;
            counts.insert("sites".into(), h.system().len());
            counts.insert("terms".into(), h.terms().len());
            formats::hamiltonian_from_toml(&formats::hamiltonian_to_toml(&h)).ok() == Some(h)
        }
        DocKind::Isometry => {
            let v = formats::isometry_from_toml(&text).map_err(at(path))?;
            counts.insert("target_sites".into(), v.target().len());
            counts.insert("blocks".into(), v.blocks().len());
            formats::isometry_from_toml(&formats::isometry_to_toml(&v)).ok() == Some(v)
        }
        DocKind::Plan => {
            let p = formats::plan_from_toml(&text).map_err(at(path))?;
            counts.insert("rounds".into(), p.depth());
            counts.insert(
                "applications".into(),
                p.rounds.iter().map(|r| r.applications.len()).sum(),
            );
            formats::plan_from_toml(&formats::plan_to_toml(&p)).ok() == Some(p)
        }
        DocKind::Graph => {
            let g = EmbeddedGraph::from_toml(&text).map_err(at(path))?;
            counts.insert("vertices".into(), g.len());
            counts.insert("edges".into(), g.edges.len());
            counts.insert("max_degree".into(), g.max_degree());
            EmbeddedGraph::from_toml(&g.to_toml()).ok() == Some(g)
        }
        DocKind::Tileset => {
            let t = Tileset::from_toml(&text).map_err(at(path))?;
            counts.insert("tiles".into(), t.len());
            Tileset::from_toml(&t.to_toml()).ok() == Some(t)
        }
        DocKind::Gates => {
            let s = GateSequence::from_toml(&text).map_err(at(path))?;
            counts.insert("qubits".into(), s.n_qubits());
            counts.insert("steps".into(), s.len());
            GateSequence::from_toml(&s.to_toml())
                .map(|b| b.to_toml() == s.to_toml())
                .unwrap_or(false)
        }
        DocKind::Grid => {
            let g = load_grid_text(&text).map_err(at(path))?;
            counts.insert("n".into(), g.n);
            true
        }
    };
    let kind = format!("{:?}", a.kind).to_lowercase();
    let status = Status::from_pass(round_trip);
    let reason = (!round_trip).then(|| "document does not re-parse to an equal value".to_string());
    finish(
        "validate",
        status,
        reason,
        ValidateResult {
            kind,
            round_trip,
            counts,
        },
    )
}

fn load_grid_text(text: &str) -> Result<CouplingGrid, String> {
    let g: CouplingGrid = formats::parse(text).map_err(|e| e.to_string())?;
    g.validate().map_err(|e| e.to_string())?;
    Ok(g)
}

#[derive(Serialize)]
struct DiagResult {
    sites: usize,
    dim: usize,
    eigenvalues: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    below: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    count_below: Option<usize>,
}

fn diag(a: &DiagArgs) -> JobResult {
    let h = load_hamiltonian(&a.input)?;
    let dim = h.dim().map_err(|e| e.to_string())?;
    let spec = match a.k {
        Some(k) => low_spectrum(&h, k.min(dim), 1e-10),
        None => full_spectrum(&h),
    }
    .map_err(|e| e.to_string())?;
    let count_below = a
        .below
        .map(|d| spec.eigenvalues.iter().filter(|&&e| e <= d).count());
    let result = DiagResult {
        sites: h.system().len(),
        dim,
        gap: spec.gap(),
        eigenvalues: spec.eigenvalues,
        below: a.below,
        count_below,
    };
    finish("diag", Status::Pass, None, result)
}

fn verify(a: &VerifyArgs) -> JobResult {
    let sim = load_hamiltonian(&a.sim)?;
    let target = load_hamiltonian(&a.target)?;
    let v = match &a.isometry {
        Some(p) => formats::isometry_from_toml(&read(p)?).map_err(at(p))?,
        None if sim.system() == target.system() => LocalIsometry::identity(target.system()),
        None => return Err("simulator and target systems differ; pass --isometry".into()),
    };
    let req = Request::new(a.delta, a.eta, a.eps).shifted(a.shift);
    let rep = verify_simulation(&sim, &target, &req, &v).map_err(|e| e.to_string())?;
    finish(
        "verify",
        Status::from_pass(rep.pass),
        rep.reason.clone(),
        rep,
    )
}

/// The standard instance for one gadget: target `λ h` on its sites (`μ h` on
/// the second pair for forks and crossings) and the gadget built on an empty
/// system.
pub fn gadget_instance(
    spec: &GadgetSpec,
    delta: f64,
) -> Result<(HamiltonianExpr, Applied), String> {
    let fam = spec.family.family();
    let kind = spec.kind.kind();
    let n = kind.arity();
    let empty = HamiltonianExpr::new(SiteSystem::qubits("q", n));
    let mut target = empty.clone();
    let mut add = |a: &str, b: &str, c: f64| -> Result<(), String> {
        if c != 0.0 {
            target
                .add_named(fam.interaction(), &[a, b], c)
                .map_err(|e| e.to_string())?;
        }
        Ok(())
    };
    let (l, m) = (spec.lambda, spec.mu);
    let out = match kind {
        GadgetKind::SubdivPos => {
            add("q0", "q1", l)?;
            subdivide(&empty, ("q0", "q1"), l, 1, delta, fam)
        }
        GadgetKind::SubdivNeg => {
            add("q0", "q1", -l)?;
            subdivide(&empty, ("q0", "q1"), l, -1, delta, fam)
        }
        GadgetKind::Fork => {
            add("q0", "q2", l)?;
            add("q1", "q2", m)?;
            fork(&empty, ["q0", "q1", "q2"], l, m, delta, fam)
        }
        GadgetKind::Crossing => {
            add("q0", "q3", l)?;
            add("q1", "q2", m)?;
            crossing(&empty, ["q0", "q1", "q2", "q3"], l, m, delta, fam)
        }
    }
    .map_err(|e| e.to_string())?;
    Ok((target, out))
}

#[derive(Serialize)]
struct GadgetResult {
    kind: GadgetKind,
    family: Family,
    delta: f64,
    lambda: f64,
    mu: f64,
    mediators: [String; 2],
    energy_shift: f64,
    sim_sites: usize,
    sim_terms: usize,
    certification: SimulationReport,
}

#[derive(Serialize)]
struct PlanResult {
    depth: usize,
    deltas: Vec<f64>,
    energy_shift: f64,
    sim_sites: usize,
    sim_terms: usize,
    mediator_pairs: Vec<[String; 2]>,
    ledger: hamsim::gadgets::Ledger,
    #[serde(skip_serializing_if = "Option::is_none")]
    certification: Option<SimulationReport>,
}

fn gadget(a: &GadgetArgs) -> JobResult {
    if let (Some(plan_path), Some(target_path)) = (&a.plan, &a.target) {
        let plan = formats::plan_from_toml(&read(plan_path)?).map_err(at(plan_path))?;
        let target = load_hamiltonian(target_path)?;
        let out = apply_plan(&target, &plan).map_err(|e| e.to_string())?;
        let certification = if out.expr.system().len() <= a.certify_max_sites && plan.depth() > 0 {
            let cut = plan
                .rounds
                .iter()
                .map(|r| r.delta)
                .fold(f64::INFINITY, f64::min)
                / 2.0;
            Some(
                certify(
                    &target,
                    &out.expr,
                    out.energy_shift,
                    &out.mediator_pairs,
                    cut,
                    a.eta,
                    a.eps,
                )
                .map_err(|e| e.to_string())?,
            )
        } else {
            None
        };
        emit_gadget_files(a, &target, &out.expr, &out.mediator_pairs)?;
        let status = Status::from_pass(certification.as_ref().is_none_or(|c| c.pass));
        let reason = certification.as_ref().and_then(|c| c.reason.clone());
        let result = PlanResult {
            depth: plan.depth(),
            deltas: plan.rounds.iter().map(|r| r.delta).collect(),
            energy_shift: out.energy_shift,
            sim_sites: out.expr.system().len(),
            sim_terms: out.expr.terms().len(),
            mediator_pairs: out.mediator_pairs,
            ledger: out.ledger,
            certification,
        };
        return finish("gadget", status, reason, result);
    }
    let (target, out) = gadget_instance(&a.spec, a.delta)?;
    let pairs = [out.application.mediators.clone()];
    let rep = certify(
        &target,
        &out.expr,
        out.energy_shift,
        &pairs,
        a.delta / 2.0,
        a.eta,
        a.eps,
    )
    .map_err(|e| e.to_string())?;
    emit_gadget_files(a, &target, &out.expr, &pairs)?;
    let result = GadgetResult {
        kind: a.spec.kind.kind(),
        family: a.spec.family.family(),
        delta: a.delta,
        lambda: a.spec.lambda,
        mu: a.spec.mu,
        mediators: out.application.mediators.clone(),
        energy_shift: out.energy_shift,
        sim_sites: out.expr.system().len(),
        sim_terms: out.expr.terms().len(),
        certification: rep.clone(),
    };
    finish("gadget", Status::from_pass(rep.pass), rep.reason, result)
}

fn emit_gadget_files(
    a: &GadgetArgs,
    target: &HamiltonianExpr,
    sim: &HamiltonianExpr,
    pairs: &[[String; 2]],
) -> Result<(), String> {
    if let Some(p) = &a.emit_sim {
        write(p, &formats::hamiltonian_to_toml(sim))?;
    }
    if let Some(p) = &a.emit_target {
        write(p, &formats::hamiltonian_to_toml(target))?;
    }
    if let Some(p) = &a.emit_isometry {
        let v = gadget_isometry(target.system(), pairs).map_err(|e| e.to_string())?;
        write(p, &formats::isometry_to_toml(&v))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ScanResult {
    kind: GadgetKind,
    family: Family,
    table: ScanTable,
    text: String,
}

/// Error scan of the standard instance over `deltas`.
pub fn scan_table(spec: &GadgetSpec, deltas: &[f64]) -> Result<ScanTable, String> {
    let (target, _) = gadget_instance(spec, deltas.first().copied().unwrap_or(1.0))?;
    let builder = |delta: f64| {
        let (_, out) =
            gadget_instance(spec, delta).map_err(hamsim::gadgets::GadgetError::BadPlan)?;
        let v = gadget_isometry(
            target.system(),
            std::slice::from_ref(&out.application.mediators),
        )?;
        Ok((out.expr, v, out.energy_shift))
    };
    error_scan(&target, builder, deltas).map_err(|e| e.to_string())
}

fn scan(a: &ScanArgs) -> JobResult {
    let table = scan_table(&a.spec, &a.deltas)?;
    info!("scan slope {:?}", table.slope);
    let ok = table.monotone || table.exact;
    let reason = (!ok).then(|| "error does not decrease along the sweep".to_string());
    let text = formats::scan_table_text(&table);
    let result = ScanResult {
        kind: a.spec.kind.kind(),
        family: a.spec.family.family(),
        table,
        text,
    };
    finish("scan", Status::from_pass(ok), reason, result)
}

#[derive(Serialize)]
struct TileResult {
    tileset: String,
    width: usize,
    height: usize,
    solver: String,
    energy: f64,
    /// Number of minimizers (a lower bound when `count_exact` is false).
    count: i64,
    count_exact: bool,
    unique: bool,
    grid: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    row_values: Option<Vec<i64>>,
}

#[derive(Serialize)]
struct StackResult {
    width: usize,
    height: usize,
    counts: Vec<i64>,
    unique: bool,
    energy: f64,
    height_value: i64,
    width_value: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    powers: Option<[u32; 2]>,
    triangle: Vec<[usize; 2]>,
    square: Vec<[usize; 2]>,
    grids: BTreeMap<String, String>,
}

fn clamp(x: u128) -> i64 {
    i64::try_from(x).unwrap_or(i64::MAX)
}

fn tile(a: &TileArgs) -> JobResult {
    if a.width == 0 || a.height == 0 {
        return Err("width and height must be positive".into());
    }
    if a.layers {
        let stack = layer_stack(a.width, a.height).map_err(|e| e.to_string())?;
        let (d, reason) = match decode_layers(&stack) {
            Ok(d) => (Some(d), None),
            Err(e @ TileError::Inconsistent(_)) => (None, Some(e.to_string())),
            Err(e) => return Err(e.to_string()),
        };
        let unique = stack.is_unique();
        let pass = d.is_some() && (unique || !a.require_unique);
        let mut grids = BTreeMap::new();
        for (k, c) in [
            ("counter", &stack.counter),
            ("mirrored", &stack.mirrored),
            ("triangle", &stack.triangle),
            ("square", &stack.square),
        ] {
            grids.insert(k.to_string(), c.to_grid());
        }
        let cells = |v: &[(usize, usize)]| v.iter().map(|&(i, j)| [i, j]).collect();
        let result = StackResult {
            width: a.width,
            height: a.height,
            counts: stack.counts.iter().map(|&c| clamp(c)).collect(),
            unique,
            energy: stack.energy_halves() as f64 / 2.0,
            height_value: d.as_ref().map_or(-1, |d| clamp(d.height_value)),
            width_value: d.as_ref().map_or(-1, |d| clamp(d.width_value)),
            powers: d.as_ref().and_then(|d| d.powers).map(|(n, b)| [n, b]),
            triangle: d.as_ref().map_or_else(Vec::new, |d| cells(&d.triangle)),
            square: d.as_ref().map_or_else(Vec::new, |d| cells(&d.square)),
            grids,
        };
        let reason = reason
            .or_else(|| (!unique && a.require_unique).then(|| "ground state is not unique".into()));
        return finish("tile", Status::from_pass(pass), reason, result);
    }

    let ts = match &a.tileset {
        Some(p) => Tileset::from_toml(&read(p)?).map_err(at(p))?,
        None => binary_counter_tileset(false),
    };
    let (w, h) = (a.width, a.height);
    let search = |ts: &Tileset| -> Result<(i64, u128, bool, TileConfig), String> {
        let r = ground_search(ts, w, h, &SearchOptions::default()).map_err(|e| e.to_string())?;
        let best = r
            .minimizers
            .into_iter()
            .next()
            .ok_or("search found no configuration")?;
        Ok((r.energy_halves, r.count, !r.saturated, best))
    };
    let (solver, (energy_halves, count, exact, best)) = match a.solver {
        Solver::Exhaustive => {
            let r = ground_exhaustive(&ts, w, h).map_err(|e| e.to_string())?;
            let best = r.minimizers.into_iter().next().ok_or("no configuration")?;
            ("exhaustive", (r.energy_halves, r.count, true, best))
        }
        Solver::Transfer => {
            let r = ground_transfer(&ts, w, h).map_err(|e| e.to_string())?;
            ("transfer", (r.energy_halves, r.count, true, r.minimizer))
        }
        Solver::Search => ("search", search(&ts)?),
        Solver::Auto => match ground_transfer(&ts, w, h) {
            Ok(r) => ("transfer", (r.energy_halves, r.count, true, r.minimizer)),
            Err(TileError::TooLarge(_)) => ("search", search(&ts)?),
            Err(e) => return Err(e.to_string()),
        },
    };
    let unique = exact && count == 1;
    let row_values = if a.tileset.is_none() && w > 1 {
        counter_row_values(&best)
            .ok()
            .map(|v| v.into_iter().map(clamp).collect())
    } else {
        None
    };
    let result = TileResult {
        tileset: ts.name().to_string(),
        width: w,
        height: h,
        solver: solver.to_string(),
        energy: energy_halves as f64 / 2.0,
        count: clamp(count),
        count_exact: exact,
        unique,
        grid: best.to_grid(),
        row_values,
    };
    let pass = unique || !a.require_unique;
    let reason = (!pass).then(|| "ground state is not unique".to_string());
    finish("tile", Status::from_pass(pass), reason, result)
}

#[derive(Serialize)]
struct GapResult {
    rows: Vec<GapLine>,
    /// Every row with at least 16 steps has `gap (T+1)^2` within 10% of π².
    law_ok: bool,
}

#[derive(Serialize)]
struct GapLine {
    steps: usize,
    gap: f64,
    exact: f64,
    scaled: f64,
}

#[derive(Serialize)]
struct HistoryResult {
    source: String,
    qubits: usize,
    check: HistoryCheck,
    tol: f64,
}

#[derive(Serialize)]
struct SynthResult {
    theta: f64,
    delta: f64,
    gate_set: GateSet,
    word: Vec<String>,
    length: usize,
    error: f64,
    explored: usize,
}

#[derive(Serialize)]
struct SynthFailure {
    theta: f64,
    delta: f64,
    gate_set: GateSet,
    /// Smallest distance to the target reached by the search.
    best: f64,
    explored: usize,
}

#[derive(Serialize)]
struct FieldResult {
    n: usize,
    eps: f64,
    delta: f64,
    steps: usize,
    qubits: usize,
    replay_error: f64,
    slots: Vec<SlotLine>,
}

#[derive(Serialize)]
struct SlotLine {
    cell: [usize; 2],
    source: [usize; 2],
    coupling: String,
    qubit: usize,
    target: f64,
    theta: f64,
    error: f64,
    word_len: usize,
    excitation: f64,
    blink: f64,
}

/// Random two-qubit circuit of `steps` gates drawn from `rng`.
pub fn random_circuit(rng: &mut ChaCha8Rng, steps: usize) -> GateSequence {
    let mut seq = GateSequence::new(2);
    for _ in 0..steps {
        let r = match rng.random_range(0..4) {
            0 => seq.push(
                Gate::Matrix(random_unitary(rng, 2)),
                &[rng.random_range(0..2)],
            ),
            1 => seq.push(Gate::Matrix(random_unitary(rng, 4)), &[0, 1]),
            2 => seq.push(
                Gate::Ry(rng.random_range(-PI..PI)),
                &[rng.random_range(0..2)],
            ),
            _ => seq.push(Gate::Cnot, &[1, 0]),
        };
        r.expect("generated gates are valid");
    }
    seq
}

fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let m = CMatrix::from_fn(d, d, |_, _| {
        hamsim::C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    m.qr().q()
}

fn clock(a: &ClockArgs, seed: u64) -> JobResult {
    match &a.mode {
        ClockMode::Gap { steps } => {
            let rows = gap_scan(steps).map_err(|e| e.to_string())?;
            let pi2 = PI * PI;
            let law_ok = rows
                .iter()
                .filter(|r| r.steps >= 16)
                .all(|r| (r.scaled - pi2).abs() <= 0.1 * pi2);
            let rows = rows
                .into_iter()
                .map(|r| GapLine {
                    steps: r.steps,
                    gap: r.gap,
                    exact: 2.0 * (1.0 - (PI / (r.steps as f64 + 1.0)).cos()),
                    scaled: r.scaled,
                })
                .collect();
            let reason = (!law_ok).then(|| "gap (T+1)^2 outside 10% of pi^2".to_string());
            finish(
                "clock",
                Status::from_pass(law_ok),
                reason,
                GapResult { rows, law_ok },
            )
        }
        ClockMode::History { gates, steps, tol } => {
            let (seq, source) = match gates {
                Some(p) => (
                    GateSequence::from_toml(&read(p)?).map_err(at(p))?,
                    p.display().to_string(),
                ),
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    (
                        random_circuit(&mut rng, *steps),
                        format!("random seed {seed}"),
                    )
                }
            };
            let check = verify_history(&seq, &seq.input_vector()).map_err(|e| e.to_string())?;
            let ok = check.overlap >= 1.0 - tol;
            let reason = (!ok).then(|| format!("overlap {:.3e} below 1 - {tol:e}", check.overlap));
            let result = HistoryResult {
                source,
                qubits: seq.n_qubits(),
                check,
                tol: *tol,
            };
            finish("clock", Status::from_pass(ok), reason, result)
        }
        ClockMode::Synth {
            theta,
            delta,
            gate_set,
            max_len,
        } => {
            let gate_set = match gate_set {
                GateSetArg::VBasis => GateSet::VBasis,
                GateSetArg::CliffordT => GateSet::CliffordT,
            };
            let opts = SynthOptions {
                gate_set,
                max_len: *max_len,
                ..SynthOptions::default()
            };
            match hamsim::clocklab::synthesize_with(*theta, *delta, &opts) {
                Ok(s) => {
                    let result = SynthResult {
                        theta: *theta,
                        delta: *delta,
                        gate_set,
                        word: s.word.iter().map(|g| g.name().to_string()).collect(),
                        length: s.word.len(),
                        error: s.error,
                        explored: s.explored,
                    };
                    finish("clock", Status::Pass, None, result)
                }
                Err(e @ hamsim::clocklab::ClockError::SynthesisFailed { best, explored, .. }) => {
                    let result = SynthFailure {
                        theta: *theta,
                        delta: *delta,
                        gate_set,
                        best,
                        explored,
                    };
                    finish("clock", Status::Fail, Some(e.to_string()), result)
                }
                Err(e) => Err(e.to_string()),
            }
        }
        ClockMode::Field {
            grid,
            eps,
            emit_gates,
        } => {
            let g = load_grid_text(&read(grid)?).map_err(at(grid))?;
            let n = g.n;
            let field = AngleField::new(g, *eps).map_err(|e| e.to_string())?;
            let layout = snake_path((2 * n).saturating_sub(1).max(1)).map_err(|e| e.to_string())?;
            let prog = field_program(&field, &layout).map_err(|e| e.to_string())?;
            if let Some(p) = emit_gates {
                write(p, &prog.seq.to_toml())?;
            }
            let mut slots = Vec::new();
            for s in &prog.slots {
                let blink = if prog.seq.is_empty() {
                    0.0
                } else {
                    blink_schedule(&prog.seq, s.qubit)
                        .and_then(|b| b.expectation())
                        .map_err(|e| e.to_string())?
                };
                slots.push(SlotLine {
                    cell: [s.cell.0, s.cell.1],
                    source: [s.source.0, s.source.1],
                    coupling: format!("{:?}", s.coupling).to_lowercase(),
                    qubit: s.qubit,
                    target: field.coupling(s.coupling, s.source),
                    theta: s.theta,
                    error: s.error,
                    word_len: s.word_len,
                    excitation: prog.excitation(s.qubit),
                    blink,
                });
            }
            let ok = slots.iter().all(|s| s.error <= field.delta);
            let result = FieldResult {
                n,
                eps: *eps,
                delta: field.delta,
                steps: prog.seq.len(),
                qubits: prog.seq.n_qubits(),
                replay_error: prog.replay_error(),
                slots,
            };
            let reason = (!ok).then(|| "a rotation misses its tolerance".to_string());
            finish("clock", Status::from_pass(ok), reason, result)
        }
    }
}

#[derive(Serialize)]
struct ChainLine {
    a: String,
    b: String,
    length: usize,
}

#[derive(Serialize)]
struct PlacementLine {
    cell: Vec<i64>,
    r: usize,
}

#[derive(Serialize)]
struct CompileResult {
    lattice: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<Family>,
    depth: usize,
    deltas: Vec<f64>,
    forks: usize,
    subdivisions: usize,
    domain_size: usize,
    spacing: f64,
    halvings: u32,
    chains: Vec<ChainLine>,
    total_chain_length: usize,
    chains_disjoint: bool,
    sim_sites: usize,
    sim_terms: usize,
    energy_shift: f64,
    placement: BTreeMap<String, PlacementLine>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certification: Option<SimulationReport>,
}

fn compile_job(a: &CompileArgs) -> JobResult {
    let target = load_hamiltonian(&a.target)?;
    let params = CompileParams {
        locality: LocalityParams::new(a.ball, a.range).map_err(|e| e.to_string())?,
        spacing: a.spacing,
        delta_base: a.delta_base,
        certify_max_sites: a.certify_max_sites,
        certify_eps: a.eps,
        ..CompileParams::default()
    };
    let c = compile(&target, &a.lattice.graph(), &params).map_err(|e| e.to_string())?;
    if let Some(p) = &a.emit_sim {
        write(p, &formats::hamiltonian_to_toml(&c.sim))?;
    }
    if let Some(p) = &a.emit_plan {
        write(p, &formats::plan_to_toml(&c.plan))?;
    }
    if let Some(p) = &a.emit_graph {
        let g = hamsim::geocompile::interaction_graph(&c.sim).map_err(|e| e.to_string())?;
        write(p, &g.to_toml())?;
    }
    let pass = c.certification.as_ref().is_none_or(|r| r.pass);
    let reason = c.certification.as_ref().and_then(|r| r.reason.clone());
    let result = CompileResult {
        lattice: c.lattice.clone(),
        family: c.family,
        depth: c.depth(),
        deltas: c.plan.rounds.iter().map(|r| r.delta).collect(),
        forks: c.degree.forks,
        subdivisions: c.degree.subdivisions,
        domain_size: c.domain.len(),
        spacing: c.snap.spacing,
        halvings: c.snap.halvings,
        chains: c
            .chains
            .iter()
            .map(|ch| ChainLine {
                a: ch.a.clone(),
                b: ch.b.clone(),
                length: ch.path.len() - 1,
            })
            .collect(),
        total_chain_length: c.total_chain_length(),
        chains_disjoint: c.chains_disjoint(),
        sim_sites: c.sim.system().len(),
        sim_terms: c.sim.terms().len(),
        energy_shift: c.energy_shift,
        placement: c
            .placement
            .iter()
            .map(|(k, v)| {
                (
                    k.clone(),
                    PlacementLine {
                        cell: v.cell.clone(),
                        r: v.r,
                    },
                )
            })
            .collect(),
        certification: c.certification,
    };
    finish("compile", Status::from_pass(pass), reason, result)
}
