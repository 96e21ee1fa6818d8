//! Geometric locality, grid snapping, routing and fundamental domains.
//!
//! [`compile`] takes a two-local Heisenberg or XY target whose sites carry
//! coordinates and produces a gadget plan whose simulator lives on a
//! translation-invariant lattice ([`PeriodicGraph`]). Lattices are given by
//! one unit cell; finite [`EmbeddedGraph`] windows are used for documents and
//! invariance checks.

mod compile;
mod degree;
mod domain;
mod graph;
mod route;

#[cfg(test)]
mod tests;

pub use compile::{compile, interaction_graph, ChainPath, CompileParams, Compiled};
pub use degree::{
    interaction_edges, max_degree, reduce_degree, target_family, DegreeSummary, Reduced, MAX_DEGREE,
};
pub use domain::{
    central_vertex, extract_domain, verify_minor, Central, FundamentalDomain, MinorCheck, Port,
};
pub use graph::{
    bfs_path, check_locality, pvertex_id, BallViolation, EdgeViolation, EmbeddedGraph, GraphDoc,
    LocalityParams, LocalityReport, PVertex, PeriodicGraph, VertexDoc, COORD_TOL,
};
pub use route::{
    route_paths, snap_to_grid, snap_with, Crossing, GridPoint, RouteOptions, RoutePlan, Snap,
    MIN_SPACING_FACTOR, ROUTE_STRETCH,
};

use thiserror::Error;

use crate::gadgets::GadgetError;
use crate::opcore::OpError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error(transparent)]
    Op(#[from] OpError),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
    #[error("bad graph: {0}")]
    BadGraph(String),
    #[error("not translation invariant: {0}")]
    NotInvariant(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("fundamental domain: {0}")]
    Domain(String),
    #[error("snapping: {0}")]
    Snap(String),
    #[error("routing: {0}")]
    Route(String),
    #[error("target: {0}")]
    Target(String),
    #[error("target is not geometrically local: {0}")]
    NotLocal(String),
    #[error("parity: {0}")]
    Parity(String),
    #[error("embedding: {0}")]
    Embed(String),
    #[error("graph document: {0}")]
    Document(String),
}

pub type Result<T> = std::result::Result<T, GeoError>;
