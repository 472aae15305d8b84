//! Brute-force ground truth. Every function here enumerates exhaustively
//! under a hard budget and never calls into the approximation pipelines.

mod polymers;
mod sets;
mod states;

pub use polymers::{
    brute_force_log_restricted, brute_force_log_weight, brute_force_polymers, exact_log_xi,
};
pub use sets::{expansion_profile, k_way_expansion, min_conductance, min_edge_expansion};
pub use states::{
    close_state_histograms, exact_log_sparse_sum, exact_log_z, exact_log_z_psi,
    exact_log_z_star, monochromatic_histogram,
};
