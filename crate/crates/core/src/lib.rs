//! Compile target local Hamiltonians into simulator Hamiltonians and certify
//! the result numerically.
//!
//! The crate is organised as a set of passes sharing one currency,
//! [`opcore::HamiltonianExpr`]:
//!
//! * [`opcore`]: qudit systems, local terms, matrix assembly and eigensolvers.
//! * [`simcheck`]: the (Δ, η, ε)-simulation certificate and first-order builders.
//! * [`gadgets`]: mediator-qubit gadgets (subdivision, fork, crossing) and plans.
//! * [`geocompile`]: locality checks, snapping, routing and fundamental domains.
//! * [`tilelab`]: weighted tiling Hamiltonians, the binary counter and markers.
//! * [`clocklab`]: clock Hamiltonians, history states and gate synthesis.
//! * [`formats`]: the structured-text documents read and written by the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clocklab;
pub mod formats;
pub mod gadgets;
pub mod geocompile;
pub mod opcore;
pub mod simcheck;
pub mod tilelab;

pub use num_complex::Complex64 as C64;

/// Dense complex matrix used throughout the crate.
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Crate version, embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
