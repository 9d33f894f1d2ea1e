//! Deterministic construction and numerical verification of regular graphs
//! with large girth and localized adjacency eigenvectors.

pub mod check;
pub mod error;
pub mod graph;
pub mod io;
pub mod lps;
pub mod matching;
pub mod spectral;
pub mod surgery;
pub mod verify;

pub use check::{Check, Relation};
pub use error::GraphError;
pub use graph::{Edge, Girth, Graph, VertexSet};
