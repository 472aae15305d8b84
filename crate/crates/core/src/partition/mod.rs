//! Partitioning a graph into expander-induced parts.

mod algorithm;
mod sweep;
mod verify;


pub use algorithm::{
    partition_into_expanders, Constants, DegreeRatio, ExpanderPartition, IterationCounts,
    PartCertificate, PartitionParams,
};
pub use sweep::{phi_after_vertex_removal, sweep_cut, SweepCut};
pub use verify::{verify_partition, PartReport, VerificationReport};
