//! Exact and constructive tools for partitioning 2-coloured graphs into a red
//! cycle and a blue cycle.
//!
//! A cycle here follows the degenerate convention: the empty set, a single
//! vertex and a single edge all count as cycles. Path lengths are measured in
//! edges throughout.

pub mod absorbing;
pub mod cluster;
pub mod extremal;
pub mod generate;
pub mod graph;
pub mod hamiltonicity;
pub mod matching;
pub mod path_partition;
pub mod robustness;
pub mod solver;
pub mod vertex_set;

pub use graph::{Colour, ColouredGraph, GraphError, Mark, View};
pub use vertex_set::VertexSet;
