//! Island/ocean decompositions of weighted graphs, the induced chain on the
//! ocean, and random-walk diagnostics for graphs with anchored expansion.
//!
//! Graphs are finite and weighted, with an optional *frontier*: boundary
//! vertices where a walk is killed and which candidate sets must avoid.
//! Infinite families are available lazily through [`generators::LazyGraph`].

// `!(x > 0.0)` is used on purpose: it rejects NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fixtures;
pub mod flow;
pub mod generators;
pub mod graph;
pub mod induced;
pub mod io;
pub mod isolation;
pub mod linalg;
pub mod oracle;
pub mod par;
pub mod spectral;
pub mod territories;
pub mod verify;
pub mod walker;

pub use error::{Error, Result};
pub use generators::{percolation, truncate, LazyGraph};
pub use graph::{build_graph, GraphBuilder, VertexSet, WeightedGraph};
pub use induced::{build_induced_graph, InducedGraph};
pub use isolation::{cheeger_constant, compute_a_i, CheegerReport, IslandDecomposition};
pub use territories::{build_countries, dist_i, i_length, Country};
