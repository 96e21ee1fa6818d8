//! Operator algebra for qudit systems.
//!
//! Sites are kept in a fixed order; that order defines the tensor product,
//! with the first site being the most significant digit of a basis index.
//! Lattice systems are laid out row-major (`y` outer, `x` inner).

mod assemble;
mod eigen;
mod site;
mod term;

pub use assemble::{assemble, assemble_real, assemble_sparse, CsrMatrix};
pub use eigen::{
    eigen_below, full_spectrum, low_spectrum, low_spectrum_dense, low_spectrum_krylov,
    restrict_below, KrylovOptions, LowEnergy, LowSubspace, Spectrum, AMBIGUOUS_CUT_TOL,
    DENSE_SWITCHOVER,
};
pub use site::{Site, SiteSystem, DEFAULT_DIM_CAP};
pub use term::{named_interaction, HamiltonianExpr, Interaction, LocalTerm, HERMITIAN_TOL};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpError {
    #[error("duplicate site id `{0}`")]
    DuplicateSite(String),
    #[error("site `{id}` has local dimension {dim}, need at least 2")]
    BadDimension { id: String, dim: usize },
    #[error("unknown site `{0}`")]
    UnknownSite(String),
    #[error("total dimension {dim} exceeds the cap {cap}")]
    DimensionCap { dim: u128, cap: usize },
    #[error("term support must hold 1 to 3 distinct sites, got {0:?}")]
    BadSupport(Vec<String>),
    #[error("operator is {rows}x{cols} but the support needs {expected}x{expected}")]
    OperatorShape {
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("unknown interaction `{0}`")]
    UnknownInteraction(String),
    #[error("interaction `{kind}` does not fit local dimensions {dims:?}")]
    InteractionDims { kind: String, dims: Vec<usize> },
    #[error("requested {k} eigenpairs of a {dim}-dimensional operator")]
    TooManyEigenpairs { k: usize, dim: usize },
    #[error("eigensolver did not converge after {iterations} iterations (worst residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("eigenvalue {eigenvalue} lies within 1e-9 of the cut {delta}; shift the cut")]
    AmbiguousCut { delta: f64, eigenvalue: f64 },
    #[error("cut must be finite, got {0}")]
    NonFiniteCut(f64),
}

pub type Result<T> = std::result::Result<T, OpError>;
