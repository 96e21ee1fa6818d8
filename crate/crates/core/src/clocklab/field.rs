use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::clock::history_state;
use super::gates::GateSequence;
use super::snake::SnakePath;
use super::synth::{synthesize_with, SynthOptions, Synthesis};
use super::{ClockError, Result};
use crate::simcheck::CouplingGrid;
use crate::C64;

/// Target angles `θ = arcsin √(α/Δ2)` for every coupling of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct AngleField {
    pub grid: CouplingGrid,
    pub eps: f64,
    /// Per-rotation tolerance, at most `ε / (4 Δ2 n²)`.
    pub delta: f64,
    pub synth: SynthOptions,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coupling {
    Alpha,
    Beta,
}

impl AngleField {
    pub fn new(grid: CouplingGrid, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(ClockError::BadAngle(format!(
                "ε must be positive, got {eps}"
            )));
        }
        grid.validate()
            .map_err(|e| ClockError::BadAngle(e.to_string()))?;
        let delta = Self::max_delta(&grid, eps);
        Ok(AngleField {
            grid,
            eps,
            delta,
            synth: SynthOptions::default(),
        })
    }

    /// `ε / (4 Δ2 n²)`.
    pub fn max_delta(grid: &CouplingGrid, eps: f64) -> f64 {
        eps / (4.0 * grid.delta2 * (grid.n * grid.n) as f64)
    }

    /// Tighten the tolerance; loosening past the bound is refused.
    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        let max = Self::max_delta(&self.grid, self.eps);
        if !(delta > 0.0 && delta <= max) {
            return Err(ClockError::BadAngle(format!(
                "δ = {delta} must lie in (0, {max}]"
            )));
        }
        self.delta = delta;
        Ok(self)
    }

    pub fn coupling(&self, which: Coupling, cell: (usize, usize)) -> f64 {
        match which {
            Coupling::Alpha => self.grid.alpha[cell.0][cell.1],
            Coupling::Beta => self.grid.beta[cell.0][cell.1],
        }
    }

    pub fn theta(&self, which: Coupling, cell: (usize, usize)) -> f64 {
        (self.coupling(which, cell) / self.grid.delta2)
            .sqrt()
            .asin()
    }
}

/// One rotated qubit of a field program.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    pub cell: (usize, usize),
    /// Grid entry whose angle this qubit carries.
    pub source: (usize, usize),
    pub coupling: Coupling,
    pub qubit: usize,
    pub theta: f64,
    pub error: f64,
    pub word_len: usize,
}

#[derive(Clone, Debug)]
pub struct FieldProgram {
    pub seq: GateSequence,
    pub slots: Vec<Slot>,
    pub delta: f64,
}

impl FieldProgram {
    /// `⊗ (cos θ|0> + sin θ|1>)` over the slots.
    pub fn target_state(&self) -> Vec<C64> {
        let mut v = vec![C64::new(1.0, 0.0)];
        for s in &self.slots {
            let (sn, cs) = s.theta.sin_cos();
            v = v.iter().flat_map(|&a| [a * cs, a * sn]).collect();
        }
        v
    }

    /// `||U|0...0> - ⊗|θ>||` from a full statevector replay.
    pub fn replay_error(&self) -> f64 {
        let out = self.seq.replay();
        out.iter()
            .zip(self.target_state())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Sum of the per-rotation errors, an upper bound on [`Self::replay_error`].
    pub fn error_budget(&self) -> f64 {
        self.slots.iter().map(|s| s.error).sum()
    }

    /// `|<1|θ̃>|²` of one qubit, read from the replayed state.
    pub fn excitation(&self, qubit: usize) -> f64 {
        let n = self.seq.n_qubits();
        let out = self.seq.replay();
        out.iter()
            .enumerate()
            .filter(|(i, _)| i >> (n - 1 - qubit) & 1 == 1)
            .map(|(_, z)| z.norm_sqr())
            .sum()
    }
}

fn build_program(
    field: &AngleField,
    cells: &[((usize, usize), (usize, usize))],
) -> Result<FieldProgram> {
    let mut cache: HashMap<u64, Synthesis> = HashMap::new();
    let nq = 2 * cells.len();
    let coords: Vec<(i64, i64)> = cells
        .iter()
        .flat_map(|&((i, j), _)| [(i as i64, j as i64), (i as i64, j as i64)])
        .collect();
    let mut seq = GateSequence::new(nq).with_layout(coords)?;
    let mut slots = Vec::with_capacity(nq);
    for (k, &(cell, source)) in cells.iter().enumerate() {
        for (c, which) in [Coupling::Alpha, Coupling::Beta].into_iter().enumerate() {
            let theta = field.theta(which, source);
            let syn = match cache.get(&theta.to_bits()) {
                Some(s) => s.clone(),
                None => {
                    let s = synthesize_with(theta, field.delta, &field.synth)?;
                    cache.insert(theta.to_bits(), s.clone());
                    s
                }
            };
            let qubit = 2 * k + c;
            for g in &syn.word {
                seq.push(g.clone(), &[qubit])?;
            }
            slots.push(Slot {
                cell,
                source,
                coupling: which,
                qubit,
                theta,
                error: syn.error,
                word_len: syn.word.len(),
            });
        }
    }
    Ok(FieldProgram {
        seq,
        slots,
        delta: field.delta,
    })
}

/// Rotations writing `|θ̃^α_ij>|θ̃^β_ij>` on every cell of the `n x n`
/// corner, visited in tape order. Qubits `2k, 2k+1` belong to the `k`-th
/// visited cell.
pub fn field_program(field: &AngleField, layout: &SnakePath) -> Result<FieldProgram> {
    let n = field.grid.n;
    let cells: Vec<((usize, usize), (usize, usize))> = layout
        .cells
        .iter()
        .filter(|&&(i, j)| (i as usize) < n && (j as usize) < n)
        .map(|&(i, j)| ((i as usize, j as usize), (i as usize, j as usize)))
        .collect();
    if cells.len() != n * n {
        return Err(ClockError::Layout(format!(
            "triangle of side {} holds {} of the {} corner cells",
            layout.b,
            cells.len(),
            n * n
        )));
    }
    build_program(field, &cells)
}

/// Program padded so the computation's final state is held for exactly half
/// of the clock steps.
#[derive(Clone, Debug)]
pub struct Blink {
    pub seq: GateSequence,
    pub flag_qubit: usize,
    /// Steps of the original computation.
    pub compute_steps: usize,
    /// First clock step of the `done` window.
    pub done_from: usize,
}

/// Pad `seq` (of `T0` steps) with `T0 + 1` identities, giving `T = 2 T0 + 1`
/// and a `done` window `t > T0` of `(T+1)/2` clock steps.
pub fn blink_schedule(seq: &GateSequence, flag_qubit: usize) -> Result<Blink> {
    if flag_qubit >= seq.n_qubits() {
        return Err(ClockError::BadQubit {
            step: 0,
            qubit: flag_qubit,
        });
    }
    let t0 = seq.len();
    let mut padded = seq.clone();
    padded.pad(t0 + 1)?;
    Ok(Blink {
        seq: padded,
        flag_qubit,
        compute_steps: t0,
        done_from: t0 + 1,
    })
}

impl Blink {
    /// Clock steps on which `Π_flag ⊗ |done><done|` can fire.
    pub fn occupancy(&self) -> usize {
        self.seq.len() + 1 - self.done_from
    }

    /// `<Ψ_0| Π_flag ⊗ |done><done| |Ψ_0>` on the history state, with
    /// `Π_flag = |1><1|` on the flag qubit.
    pub fn expectation(&self) -> Result<f64> {
        let n = self.seq.n_qubits();
        let hist = history_state(&self.seq, &self.seq.input_vector())?;
        let block = 1usize << n;
        let bit = n - 1 - self.flag_qubit;
        Ok(hist[self.done_from * block..]
            .iter()
            .enumerate()
            .filter(|(i, _)| (i % block) >> bit & 1 == 1)
            .map(|(_, z)| z.norm_sqr())
            .sum())
    }
}

/// Cells of an `nk x nk` block, each mapped to its source `(i mod k, j mod k)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicLayout {
    pub k: usize,
    pub n: usize,
    /// `(cell, source)` pairs, row-major over cells.
    pub map: Vec<((usize, usize), (usize, usize))>,
}

impl PeriodicLayout {
    pub fn source(&self, cell: (usize, usize)) -> Option<(usize, usize)> {
        self.map.iter().find(|(c, _)| *c == cell).map(|(_, s)| *s)
    }
}

pub fn periodic_layout(k: usize, n: usize, w: usize, h: usize) -> Result<PeriodicLayout> {
    if k == 0 || n == 0 {
        return Err(ClockError::Layout("k and n must be positive".into()));
    }
    if n * k > w.min(h) {
        return Err(ClockError::Layout(format!(
            "{n} patches of side {k} exceed the {w}x{h} lattice"
        )));
    }
    let side = n * k;
    let map = (0..side)
        .flat_map(|j| (0..side).map(move |i| ((i, j), (i % k, j % k))))
        .collect();
    Ok(PeriodicLayout { k, n, map })
}

/// Field program writing the `k x k` patch of `field` onto every cell of `layout`.
pub fn periodic_program(field: &AngleField, layout: &PeriodicLayout) -> Result<FieldProgram> {
    if field.grid.n != layout.k {
        return Err(ClockError::Layout(format!(
            "field is {0}x{0} but the patch is {1}x{1}",
            field.grid.n, layout.k
        )));
    }
    build_program(field, &layout.map)
}
