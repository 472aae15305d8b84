//! Polymer models around partition ground states, their cluster expansion,
//! and the approximation pipelines for the Potts partition function.

mod cluster;
mod model;
mod pipeline;


pub use cluster::{
    cluster_series, polymer_log_weights, truncated_log_xi, truncation_depth, ursell, ClusterTable,
    ClusterView, XiEstimate,
};
pub use model::{
    compatible, enumerate_polymers, is_sparse, kp_exponent, kp_verified, monochromatic_edges,
    polymer_log_weight, restricted_log_partition, Polymer, PottsInstance,
};
pub use pipeline::{
    approx_z_expander, approx_z_good_parts, approx_z_sse, approx_z_with_partition,
    expander_beta_threshold, good_parts_beta_threshold, sse_beta_threshold, CertifiedPartition,
    Mode, PottsResult, PsiTerm, SSE_CONSTANT,
};
