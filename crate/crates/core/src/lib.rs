//! Extension calculus of sparse random graphs `G(n, n^(-alpha))`.
//!
//! Exact dense/sparse/safe/rigid classification of extension pairs, rigid
//! closures and kernels, extension counting, a first-order formula
//! evaluator, a seeded sampler and Monte Carlo experiments built on them.

pub mod alpha;
mod bits;
pub mod canon;
pub mod experiments;
pub mod extension;
pub mod format;
pub mod graph;
pub mod logic;
pub mod sampler;

pub use alpha::{classify_pair, AlphaError, AlphaParam, Classification, ExtType, PairSpec};
pub use graph::{Graph, GraphError, Vertex, VertexSet};
