use serde::Serialize;

/// Hard enumeration caps. Exceeding one is an error, never a silent truncation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Budgets {
    /// Colourings `q^n` enumerated by the exact partition-function oracles.
    pub colourings: f64,
    /// Polymers in an exact polymer-model sum.
    pub polymers: usize,
    /// Compatible families in an exact polymer-model sum.
    pub families: u64,
    /// Vertices for `2^n` subset enumeration.
    pub subset_vertices: usize,
    /// Vertices for the `k·3^n` k-way expansion search.
    pub kway_vertices: usize,
    /// Largest set whose restricted partition function is enumerated.
    pub restricted_size: usize,
    /// Polymers, and separately clusters, listed by the cluster expansion.
    pub clusters: u64,
    /// Ground states `q^ℓ` summed by the approximation pipelines.
    pub ground_states: f64,
    /// Multiplier `c` in the partition iteration budget `c·k·n·m`.
    pub iteration_factor: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            colourings: 1e8,
            polymers: 1_000,
            families: 10_000_000,
            subset_vertices: 20,
            kway_vertices: 14,
            restricted_size: 20,
            clusters: 20_000_000,
            ground_states: 1e6,
            iteration_factor: 10,
        }
    }
}
