//! Clock Hamiltonians, history states and the field-writing computation.
//!
//! A [`GateSequence`] `U_T ... U_1` becomes a history-state Hamiltonian on a
//! unary clock qudit `clk` (dimension `T+1`, first site) followed by qubits
//! `q0, q1, ...`. Single-qubit rotations are found by breadth-first search
//! over a fixed gate set, and [`field_program`] strings them together along the
//! [`snake_path`] tape over the marked triangle.

mod clock;
mod field;
mod gates;
mod snake;
mod synth;

#[cfg(test)]
mod tests;

pub use clock::{
    bare_clock, clock_hamiltonian, gap_scan, history_state, qubit_site, verify_history,
    ClockHamiltonian, GapRow, HistoryCheck, CLOCK_SITE,
};
pub use field::{
    blink_schedule, field_program, periodic_layout, periodic_program, AngleField, Blink, Coupling,
    FieldProgram, PeriodicLayout, Slot,
};
pub use gates::{
    adjacent, unitary_defect, Gate, GateSequence, GateSequenceDoc, Step, StepDoc, UNITARY_TOL,
};
pub use snake::{replay_schedule, snake_path, Cell, Direction, Move, SnakePath, Turn, TurnSide};
pub use synth::{
    apply_word, synthesize_rotation, synthesize_with, GateSet, SynthOptions, Synthesis,
};

use thiserror::Error;

use crate::opcore::OpError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClockError {
    #[error(transparent)]
    Op(#[from] OpError),
    #[error("clock needs at least one step")]
    NoSteps,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("step {step}: qubit {qubit} is out of range or repeated")]
    BadQubit { step: usize, qubit: usize },
    #[error("step {step} is not unitary (defect {defect:.3e})")]
    NotUnitary { step: usize, defect: f64 },
    #[error("step {step} couples qubits {a} and {b}, which are not lattice neighbours")]
    NotAdjacent { step: usize, a: usize, b: usize },
    #[error("bad angle or tolerance: {0}")]
    BadAngle(String),
    #[error("no word for θ = {theta} within δ = {delta} (best one-sided distance {best:.3e} after {explored} states)")]
    SynthesisFailed {
        theta: f64,
        delta: f64,
        best: f64,
        explored: usize,
    },
    #[error("layout: {0}")]
    Layout(String),
    #[error("gate sequence document: {0}")]
    Document(String),
}

pub type Result<T> = std::result::Result<T, ClockError>;
