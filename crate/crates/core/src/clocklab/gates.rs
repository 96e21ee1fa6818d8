use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ClockError, Result};
use crate::{CMatrix, C64};

/// Largest tolerated `||U†U - I||` entry for a step.
pub const UNITARY_TOL: f64 = 1e-12;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    I,
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    /// `(I + 2iX)/√5` and its relatives; together they generate a free group.
    Vx,
    Vxdg,
    Vy,
    Vydg,
    Vz,
    Vzdg,
    /// `exp(-iθY/2)`, so `Ry(θ)|0> = cos(θ/2)|0> + sin(θ/2)|1>`.
    Ry(f64),
    Cnot,
    Swap,
    /// Explicit 2x2 or 4x4 unitary.
    Matrix(CMatrix),
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::I => "I",
            Gate::H => "H",
            Gate::X => "X",
            Gate::Y => "Y",
            Gate::Z => "Z",
            Gate::S => "S",
            Gate::Sdg => "Sdg",
            Gate::T => "T",
            Gate::Tdg => "Tdg",
            Gate::Vx => "Vx",
            Gate::Vxdg => "Vxdg",
            Gate::Vy => "Vy",
            Gate::Vydg => "Vydg",
            Gate::Vz => "Vz",
            Gate::Vzdg => "Vzdg",
            Gate::Ry(_) => "Ry",
            Gate::Cnot => "CNOT",
            Gate::Swap => "SWAP",
            Gate::Matrix(_) => "U",
        }
    }

    /// Parse a parameter-free gate name.
    pub fn from_name(name: &str) -> Option<Gate> {
        Some(match name {
            "I" => Gate::I,
            "H" => Gate::H,
            "X" => Gate::X,
            "Y" => Gate::Y,
            "Z" => Gate::Z,
            "S" => Gate::S,
            "Sdg" => Gate::Sdg,
            "T" => Gate::T,
            "Tdg" => Gate::Tdg,
            "Vx" => Gate::Vx,
            "Vxdg" => Gate::Vxdg,
            "Vy" => Gate::Vy,
            "Vydg" => Gate::Vydg,
            "Vz" => Gate::Vz,
            "Vzdg" => Gate::Vzdg,
            "CNOT" => Gate::Cnot,
            "SWAP" => Gate::Swap,
            _ => return None,
        })
    }

    /// Number of qubits acted on.
    pub fn arity(&self) -> usize {
        match self {
            Gate::Cnot | Gate::Swap => 2,
            Gate::Matrix(m) if m.nrows() == 4 => 2,
            _ => 1,
        }
    }

    pub fn matrix(&self) -> CMatrix {
        let c = |re: f64, im: f64| C64::new(re, im);
        let m2 = |a: C64, b: C64, d: C64, e: C64| CMatrix::from_row_slice(2, 2, &[a, b, d, e]);
        let s5 = 1.0 / 5f64.sqrt();
        let w = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        match self {
            Gate::I => CMatrix::identity(2, 2),
            Gate::H => m2(
                c(FRAC_1_SQRT_2, 0.0),
                c(FRAC_1_SQRT_2, 0.0),
                c(FRAC_1_SQRT_2, 0.0),
                c(-FRAC_1_SQRT_2, 0.0),
            ),
            Gate::X => m2(ZERO, ONE, ONE, ZERO),
            Gate::Y => m2(ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO),
            Gate::Z => m2(ONE, ZERO, ZERO, -ONE),
            Gate::S => m2(ONE, ZERO, ZERO, c(0.0, 1.0)),
            Gate::Sdg => m2(ONE, ZERO, ZERO, c(0.0, -1.0)),
            Gate::T => m2(ONE, ZERO, ZERO, w),
            Gate::Tdg => m2(ONE, ZERO, ZERO, w.conj()),
            Gate::Vx | Gate::Vxdg => {
                let s = if *self == Gate::Vx { 2.0 } else { -2.0 };
                m2(c(s5, 0.0), c(0.0, s * s5), c(0.0, s * s5), c(s5, 0.0))
            }
            Gate::Vy | Gate::Vydg => {
                let s = if *self == Gate::Vy { 2.0 } else { -2.0 };
                m2(c(s5, 0.0), c(s * s5, 0.0), c(-s * s5, 0.0), c(s5, 0.0))
            }
            Gate::Vz | Gate::Vzdg => {
                let s = if *self == Gate::Vz { 2.0 } else { -2.0 };
                m2(c(s5, s * s5), ZERO, ZERO, c(s5, -s * s5))
            }
            Gate::Ry(theta) => {
                let (sn, cs) = (theta / 2.0).sin_cos();
                m2(c(cs, 0.0), c(-sn, 0.0), c(sn, 0.0), c(cs, 0.0))
            }
            Gate::Cnot => {
                let mut m = CMatrix::zeros(4, 4);
                for (r, col) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
                    m[(r, col)] = ONE;
                }
                m
            }
            Gate::Swap => {
                let mut m = CMatrix::zeros(4, 4);
                for (r, col) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
                    m[(r, col)] = ONE;
                }
                m
            }
            Gate::Matrix(m) => m.clone(),
        }
    }

    pub fn dagger(&self) -> Gate {
        match self {
            Gate::S => Gate::Sdg,
            Gate::Sdg => Gate::S,
            Gate::T => Gate::Tdg,
            Gate::Tdg => Gate::T,
            Gate::Vx => Gate::Vxdg,
            Gate::Vxdg => Gate::Vx,
            Gate::Vy => Gate::Vydg,
            Gate::Vydg => Gate::Vy,
            Gate::Vz => Gate::Vzdg,
            Gate::Vzdg => Gate::Vz,
            Gate::Ry(t) => Gate::Ry(-t),
            Gate::Matrix(m) => Gate::Matrix(m.adjoint()),
            g => g.clone(),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Ry(t) => write!(f, "Ry({t})"),
            g => f.write_str(g.name()),
        }
    }
}

/// Largest entry of `U†U - I`.
pub fn unitary_defect(m: &CMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let p = m.adjoint() * m;
    let mut worst = 0.0f64;
    for r in 0..p.nrows() {
        for c in 0..p.ncols() {
            let want = if r == c { ONE } else { ZERO };
            worst = worst.max((p[(r, c)] - want).norm());
        }
    }
    worst
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub gate: Gate,
    /// Qubit indices; the first is the most significant digit of the gate matrix.
    pub qubits: Vec<usize>,
}

/// A circuit `U_T ... U_1` on `n` qubits with a product input state.
#[derive(Clone, Debug, PartialEq)]
pub struct GateSequence {
    n_qubits: usize,
    steps: Vec<Step>,
    input: Vec<[C64; 2]>,
    layout: Option<Vec<(i64, i64)>>,
}

/// Lattice neighbours, diagonals included.
pub fn adjacent(a: (i64, i64), b: (i64, i64)) -> bool {
    a != b && (a.0 - b.0).abs() <= 1 && (a.1 - b.1).abs() <= 1
}

impl GateSequence {
    /// Empty circuit on `n` qubits with input `|0...0>`.
    pub fn new(n_qubits: usize) -> Self {
        GateSequence {
            n_qubits,
            steps: Vec::new(),
            input: vec![[ONE, ZERO]; n_qubits],
            layout: None,
        }
    }

    /// Replace the input by a product of normalised single-qubit states.
    pub fn with_input(mut self, input: Vec<[C64; 2]>) -> Result<Self> {
        if input.len() != self.n_qubits {
            return Err(ClockError::Dimension(format!(
                "{} input states for {} qubits",
                input.len(),
                self.n_qubits
            )));
        }
        for (q, s) in input.iter().enumerate() {
            let norm = (s[0].norm_sqr() + s[1].norm_sqr()).sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(ClockError::Dimension(format!(
                    "input state of qubit {q} has norm {norm}"
                )));
            }
        }
        self.input = input;
        Ok(self)
    }

    /// Pin every qubit to a lattice cell; two-qubit steps must then act on neighbours.
    pub fn with_layout(mut self, coords: Vec<(i64, i64)>) -> Result<Self> {
        if coords.len() != self.n_qubits {
            return Err(ClockError::Dimension(format!(
                "{} coordinates for {} qubits",
                coords.len(),
                self.n_qubits
            )));
        }
        self.layout = Some(coords);
        for (t, s) in self.steps.iter().enumerate() {
            self.check_adjacent(t + 1, &s.qubits)?;
        }
        Ok(self)
    }

    fn check_adjacent(&self, t: usize, qubits: &[usize]) -> Result<()> {
        if let (Some(layout), [a, b]) = (&self.layout, qubits) {
            if layout[*a] != layout[*b] && !adjacent(layout[*a], layout[*b]) {
                return Err(ClockError::NotAdjacent {
                    step: t,
                    a: *a,
                    b: *b,
                });
            }
        }
        Ok(())
    }

    /// Append `gate` on `qubits` as the next time step.
    pub fn push(&mut self, gate: Gate, qubits: &[usize]) -> Result<()> {
        let t = self.steps.len() + 1;
        let m = gate.matrix();
        let want = 1usize << gate.arity();
        if m.nrows() != want || m.ncols() != want || qubits.len() != gate.arity() {
            return Err(ClockError::Dimension(format!(
                "step {t}: {gate} on qubits {qubits:?}"
            )));
        }
        if let Some(&q) = qubits.iter().find(|&&q| q >= self.n_qubits) {
            return Err(ClockError::BadQubit { step: t, qubit: q });
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(ClockError::BadQubit {
                step: t,
                qubit: qubits[0],
            });
        }
        let defect = unitary_defect(&m);
        if defect > UNITARY_TOL {
            return Err(ClockError::NotUnitary { step: t, defect });
        }
        self.check_adjacent(t, qubits)?;
        self.steps.push(Step {
            gate,
            qubits: qubits.to_vec(),
        });
        Ok(())
    }

    /// Append `k` identity steps on qubit 0.
    pub fn pad(&mut self, k: usize) -> Result<()> {
        if self.n_qubits == 0 && k > 0 {
            return Err(ClockError::Dimension(
                "cannot pad a circuit without qubits".into(),
            ));
        }
        for _ in 0..k {
            self.push(Gate::I, &[0])?;
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Number of time steps `T`.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn input(&self) -> &[[C64; 2]] {
        &self.input
    }

    pub fn layout(&self) -> Option<&[(i64, i64)]> {
        self.layout.as_deref()
    }

    /// The input as a `2^n` vector.
    pub fn input_vector(&self) -> Vec<C64> {
        let mut v = vec![ONE];
        for s in &self.input {
            v = v.iter().flat_map(|&a| [a * s[0], a * s[1]]).collect();
        }
        v
    }

    /// `|ψ_t> = U_t ... U_1 |ψ>` for `t = 0..=T`.
    pub fn states_from(&self, psi: &[C64]) -> Result<Vec<Vec<C64>>> {
        if psi.len() != 1 << self.n_qubits {
            return Err(ClockError::Dimension(format!(
                "state of length {} for {} qubits",
                psi.len(),
                self.n_qubits
            )));
        }
        let mut out = vec![psi.to_vec()];
        for s in &self.steps {
            let mut next = out.last().expect("nonempty").clone();
            apply(&mut next, self.n_qubits, &s.qubits, &s.gate.matrix());
            out.push(next);
        }
        Ok(out)
    }

    /// Final state `U|ψ_in>`.
    pub fn replay(&self) -> Vec<C64> {
        self.states_from(&self.input_vector())
            .expect("input matches")
            .pop()
            .expect("nonempty")
    }

    pub fn to_doc(&self) -> GateSequenceDoc {
        GateSequenceDoc {
            qubits: self.n_qubits,
            input: self
                .input
                .iter()
                .map(|s| [[s[0].re, s[0].im], [s[1].re, s[1].im]])
                .collect(),
            layout: self
                .layout
                .as_ref()
                .map(|l| l.iter().map(|&(x, y)| [x, y]).collect()),
            steps: self
                .steps
                .iter()
                .map(|s| StepDoc {
                    gate: s.gate.name().to_string(),
                    qubits: s.qubits.clone(),
                    angle: match s.gate {
                        Gate::Ry(t) => Some(t),
                        _ => None,
                    },
                    matrix: match &s.gate {
                        Gate::Matrix(m) => Some(
                            (0..m.nrows())
                                .map(|r| {
                                    (0..m.ncols())
                                        .map(|c| [m[(r, c)].re, m[(r, c)].im])
                                        .collect()
                                })
                                .collect(),
                        ),
                        _ => None,
                    },
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: &GateSequenceDoc) -> Result<Self> {
        let input = doc
            .input
            .iter()
            .map(|[a, b]| [C64::new(a[0], a[1]), C64::new(b[0], b[1])])
            .collect::<Vec<_>>();
        let mut seq = GateSequence::new(doc.qubits);
        if !input.is_empty() {
            seq = seq.with_input(input)?;
        }
        if let Some(l) = &doc.layout {
            seq = seq.with_layout(l.iter().map(|p| (p[0], p[1])).collect())?;
        }
        for (t, s) in doc.steps.iter().enumerate() {
            let gate = match (s.gate.as_str(), s.angle, &s.matrix) {
                ("Ry", Some(a), None) => Gate::Ry(a),
                ("U", None, Some(rows)) => {
                    let d = rows.len();
                    if rows.iter().any(|r| r.len() != d) {
                        return Err(ClockError::Document(format!(
                            "step {}: matrix is not square",
                            t + 1
                        )));
                    }
                    Gate::Matrix(CMatrix::from_fn(d, d, |r, c| {
                        C64::new(rows[r][c][0], rows[r][c][1])
                    }))
                }
                (name, None, None) => Gate::from_name(name).ok_or_else(|| {
                    ClockError::Document(format!("step {}: unknown gate `{name}`", t + 1))
                })?,
                (name, ..) => {
                    return Err(ClockError::Document(format!(
                        "step {}: bad parameters for gate `{name}`",
                        t + 1
                    )))
                }
            };
            seq.push(gate, &s.qubits)?;
        }
        Ok(seq)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_doc()).expect("gate documents serialise")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let doc: GateSequenceDoc =
            toml::from_str(text).map_err(|e| ClockError::Document(e.to_string()))?;
        Self::from_doc(&doc)
    }
}

/// Apply a 1- or 2-qubit matrix to a state vector in place.
pub(crate) fn apply(state: &mut [C64], n: usize, qubits: &[usize], m: &CMatrix) {
    let strides: Vec<usize> = qubits.iter().map(|&q| 1 << (n - 1 - q)).collect();
    let k = qubits.len();
    let d = 1 << k;
    let mask: usize = strides.iter().sum();
    let offset = |l: usize| {
        (0..k)
            .filter(|&b| l >> (k - 1 - b) & 1 == 1)
            .map(|b| strides[b])
            .sum::<usize>()
    };
    let offsets: Vec<usize> = (0..d).map(offset).collect();
    let mut local = vec![ZERO; d];
    for base in 0..state.len() {
        if base & mask != 0 {
            continue;
        }
        for (l, &o) in offsets.iter().enumerate() {
            local[l] = state[base + o];
        }
        for (r, &o) in offsets.iter().enumerate() {
            state[base + o] = (0..d).map(|c| m[(r, c)] * local[c]).sum();
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSequenceDoc {
    pub qubits: usize,
    /// Per-qubit input `[[re0, im0], [re1, im1]]`; empty means `|0...0>`.
    #[serde(default)]
    pub input: Vec<[[f64; 2]; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<Vec<[i64; 2]>>,
    #[serde(default)]
    pub steps: Vec<StepDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepDoc {
    pub gate: String,
    pub qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
}
