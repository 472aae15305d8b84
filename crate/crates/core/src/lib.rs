//! Spectral partitioning of graphs into expander-induced parts, and a
//! cluster-expansion approximation of the ferromagnetic Potts partition
//! function on top of such partitions, with brute-force oracles.

pub mod budget;
pub mod error;
pub mod generators;
pub mod graph;
pub mod logspace;
pub mod oracle;
pub mod partition;
pub mod potts;

pub use budget::Budgets;
pub use error::{Error, Result};
pub use graph::{Conductance, Graph, GraphError, Parts, Spectrum, VertexSet};
pub use logspace::LogApprox;
