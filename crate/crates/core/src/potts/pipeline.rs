use rayon::prelude::*;
use serde::Serialize;

use crate::budget::Budgets;
use crate::error::{check_budget, Error, Result};
use crate::graph::{Graph, Parts, VertexSet, SPECTRAL_ZERO_TOL};
use crate::logspace::log_sum_exp;
use crate::oracle::{exact_log_z, min_conductance};
use crate::partition::{partition_into_expanders, sweep_cut, ExpanderPartition, PartitionParams};

use super::cluster::{evaluate, polymer_log_weights, truncation_depth, ClusterTable};
use super::model::{require_kp, PottsInstance};

/// Constant in the end-to-end `β` threshold. With Algorithm-1 parts
/// (`φ(G[P_i]) ≥ φ_in²/4`, `φ_in = λ_k/(140k²)`, inner degree `≥ δ/(5(k-1))`,
/// `|P_i| ≥ n/k`) the good-parts threshold is at most
/// `392000·k⁶·(…)/(λ_k² δ)`.
pub const SSE_CONSTANT: f64 = 392_000.0;

fn log_q_delta(q: usize, max_degree: usize) -> f64 {
    ((q * max_degree) as f64).ln()
}

/// `(4 + 2 log(qΔ))/α`.
pub fn expander_beta_threshold(q: usize, max_degree: usize, alpha: f64) -> f64 {
    (4.0 + 2.0 * log_q_delta(q, max_degree)) / alpha
}

/// `max(4 + 2 log(qΔ), 2 + 4 log(qΔ))/(αη)`.
pub fn good_parts_beta_threshold(q: usize, max_degree: usize, alpha: f64, eta: f64) -> f64 {
    let l = log_q_delta(q, max_degree);
    (4.0 + 2.0 * l).max(2.0 + 4.0 * l) / (alpha * eta)
}

/// `SSE_CONSTANT·k⁶·max(4 + 2 log(qΔ), 2 + 4 log(qΔ))/(λ_k² δ)`.
pub fn sse_beta_threshold(k: usize, q: usize, max_degree: usize, min_degree: usize, lambda_k: f64) -> f64 {
    let l = log_q_delta(q, max_degree);
    SSE_CONSTANT * (k as f64).powi(6) * (4.0 + 2.0 * l).max(2.0 + 4.0 * l)
        / (lambda_k * lambda_k * min_degree as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Sse,
    Partition,
    Expander,
    Bruteforce,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PsiTerm {
    pub colours: Vec<usize>,
    /// `m_G(ψ)`.
    pub monochromatic: u64,
    pub log_xi: f64,
    /// `β m_G(ψ) + log Ξ̂^ψ`.
    pub log_term: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PottsResult {
    pub log_z: f64,
    pub eps_bound: f64,
    pub mode: Mode,
    pub ground_states: u64,
    pub truncation_depth: usize,
    /// Cluster terms summed, over all ground states.
    pub clusters_evaluated: u64,
    pub per_psi: Vec<PsiTerm>,
    pub beta_threshold: f64,
    /// Parts below `ηn` vertices, handled separately.
    pub bad_parts: usize,
    /// Edges dropped between bad parts and the rest.
    pub removed_edges: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition: Option<ExpanderPartition>,
}

impl PottsResult {
    fn brute_force(g: &Graph, q: usize, beta: f64, threshold: f64, budgets: &Budgets) -> Result<Self> {
        Ok(PottsResult {
            log_z: exact_log_z(g, q, beta, budgets)?,
            eps_bound: 0.0,
            mode: Mode::Bruteforce,
            ground_states: 0,
            truncation_depth: 0,
            clusters_evaluated: 0,
            per_psi: Vec::new(),
            beta_threshold: threshold,
            bad_parts: 0,
            removed_edges: 0,
            partition: None,
        })
    }
}

/// A partition with verified `(φ_in, φ_out, d)` guarantees: every `G[P_i]`
/// has conductance at least `phi_in` and minimum degree at least
/// `min_degree`, and every `φ_G(P_i) ≤ phi_out`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CertifiedPartition {
    parts: Parts,
    phi_in: f64,
    min_degree: f64,
    phi_out: f64,
}

impl CertifiedPartition {
    /// Certifies a user-supplied partition. The inner conductance of a part
    /// is computed exactly when it has at most `budgets.subset_vertices`
    /// vertices, and otherwise bounded below by `max(φ_s²/4, λ₂/2)` from a
    /// sweep cut.
    pub fn certify(g: &Graph, sets: Vec<VertexSet>, budgets: &Budgets) -> Result<Self> {
        let parts = Parts::new(g.n(), sets).map_err(Error::NotAPartition)?;
        let mut phi_in = f64::INFINITY;
        let mut min_degree = usize::MAX;
        let mut phi_out: f64 = 0.0;
        for (i, part) in parts.sets().iter().enumerate() {
            let (sub, _) = g.induced_subgraph(part, true)?;
            if sub.n() < 2 || sub.has_isolated_vertex() {
                return Err(Error::Precondition(format!(
                    "part {i} has a vertex with no neighbour inside the part"
                )));
            }
            let lower = if sub.n() <= budgets.subset_vertices {
                min_conductance(&sub, budgets)?.0.value()
            } else {
                let cut = sweep_cut(&sub)?;
                let s = cut.conductance.value();
                (s * s / 4.0).max((cut.lambda2 - SPECTRAL_ZERO_TOL).max(0.0) / 2.0)
            };
            phi_in = phi_in.min(lower);
            min_degree = min_degree.min(sub.min_degree());
            phi_out = phi_out.max(g.conductance(part)?.value());
        }
        if !(phi_in > 0.0) {
            return Err(Error::Precondition("some part induces a disconnected subgraph".into()));
        }
        Ok(Self { parts, phi_in, min_degree: min_degree as f64, phi_out })
    }

    /// The `(φ_in²/4, φ_out, τδ)` guarantee of a partition produced by
    /// [`partition_into_expanders`], checked against its sweep certificates.
    pub fn from_expander_partition(g: &Graph, p: &ExpanderPartition) -> Result<Self> {
        let parts = Parts::new(g.n(), p.parts.clone()).map_err(Error::NotAPartition)?;
        let phi_in = p.constants.phi_in * p.constants.phi_in / 4.0;
        let min_degree = p.constants.tau * g.min_degree() as f64;
        for (i, cert) in p.certificates.iter().enumerate() {
            if cert.inner_lower_bound < phi_in {
                return Err(Error::InvariantViolated(format!(
                    "part {i} is certified only to {} < {phi_in}",
                    cert.inner_lower_bound
                )));
            }
            let part = &p.parts[i];
            let mask = part.mask(g.n());
            for v in part.iter() {
                let inside = g.neighbors(v).iter().filter(|&&w| mask[w]).count();
                if (inside as f64) < min_degree {
                    return Err(Error::InvariantViolated(format!(
                        "vertex {v} has {inside} neighbours in its part, below {min_degree}"
                    )));
                }
            }
        }
        Ok(Self { parts, phi_in, min_degree, phi_out: p.constants.phi_out })
    }

    pub fn parts(&self) -> &Parts {
        &self.parts
    }

    pub fn phi_in(&self) -> f64 {
        self.phi_in
    }

    pub fn min_degree(&self) -> f64 {
        self.min_degree
    }

    pub fn phi_out(&self) -> f64 {
        self.phi_out
    }

    /// Each `G[P_i]` is an `α`-expander with `α = φ_in · d`.
    pub fn alpha(&self) -> f64 {
        self.phi_in * self.min_degree
    }
}

fn clamp_xi(eps: f64) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Precondition(format!("eps = {eps} must be positive and finite")));
    }
    Ok(eps.min(0.25))
}

fn require_beta(beta: f64, required: f64) -> Result<()> {
    if beta < required {
        Err(Error::BetaBelowThreshold { beta, required })
    } else {
        Ok(())
    }
}

fn ground_state_count(q: usize, ell: usize, budgets: &Budgets) -> Result<u64> {
    let count = (q as f64).powi(ell as i32);
    check_budget("ground states q^l", count, budgets.ground_states)?;
    Ok(count as u64)
}

/// `log Σ_ψ e^{β m(ψ)} Ξ̂^ψ` with each `Ξ̂^ψ` a relative `ζ`-approximation.
#[allow(clippy::too_many_arguments)]
fn ground_state_sum(
    g: &Graph,
    parts: &Parts,
    q: usize,
    beta: f64,
    zeta: f64,
    alpha: f64,
    threshold: f64,
    budgets: &Budgets,
) -> Result<PottsResult> {
    require_kp(&PottsInstance::new(g, q, beta)?, alpha)?;
    let ell = parts.len();
    let count = ground_state_count(q, ell, budgets)?;
    let table = ClusterTable::build(g, parts, truncation_depth(g.n(), zeta), budgets)?;
    let per_psi = (0..count as usize)
        .into_par_iter()
        .map(|index| {
            let mut colours = vec![0; ell];
            let mut rest = index;
            for c in colours.iter_mut().rev() {
                *c = rest % q;
                rest /= q;
            }
            let weights = polymer_log_weights(g, parts, &colours, q, beta, table.polymers(), budgets)?;
            let xi = evaluate(&table, &weights, zeta);
            let monochromatic = g
                .edges()
                .filter(|&(u, v)| colours[parts.part_of(u)] == colours[parts.part_of(v)])
                .count() as u64;
            let log_xi = xi.approx.log_value;
            Ok(PsiTerm { colours, monochromatic, log_xi, log_term: beta * monochromatic as f64 + log_xi })
        })
        .collect::<Result<Vec<PsiTerm>>>()?;
    let terms: Vec<f64> = per_psi.iter().map(|t| t.log_term).collect();
    Ok(PottsResult {
        log_z: log_sum_exp(&terms),
        eps_bound: 2.0 * zeta,
        mode: Mode::Partition,
        ground_states: count,
        truncation_depth: table.depth(),
        clusters_evaluated: table.len() as u64 * count,
        per_psi,
        beta_threshold: threshold,
        bad_parts: 0,
        removed_edges: 0,
        partition: None,
    })
}

/// Relative `ε`-approximation of `Z_G(β)` for an `α`-expander `G`, using the
/// single part `V` and its `q` monochromatic ground states. The expander
/// property is checked exhaustively when `n ≤ budgets.subset_vertices`.
pub fn approx_z_expander(g: &Graph, q: usize, beta: f64, eps: f64, alpha: f64, budgets: &Budgets) -> Result<PottsResult> {
    PottsInstance::new(g, q, beta)?;
    if !(alpha > 0.0) {
        return Err(Error::Precondition(format!("alpha = {alpha} must be positive")));
    }
    let threshold = expander_beta_threshold(q, g.max_degree(), alpha);
    require_beta(beta, threshold)?;
    if g.n() <= budgets.subset_vertices {
        let check = g.is_alpha_expander(alpha)?;
        if !check.holds {
            return Err(Error::Precondition(format!(
                "graph is not a {alpha}-expander: {:?} has too small a boundary",
                check.witness
            )));
        }
    }
    let xi = clamp_xi(eps)?;
    if xi <= (-(g.n() as f64) / 2.0).exp() {
        return PottsResult::brute_force(g, q, beta, threshold, budgets);
    }
    let mut result = ground_state_sum(g, &Parts::trivial(g.n()), q, beta, xi / 2.0, alpha, threshold, budgets)?;
    result.mode = Mode::Expander;
    Ok(result)
}

/// Relative `ε`-approximation of `Z_G(β)` given a certified partition whose
/// parts all have at least `ηn` vertices, `η = min_i |P_i|/n`.
pub fn approx_z_good_parts(
    g: &Graph,
    partition: &CertifiedPartition,
    q: usize,
    beta: f64,
    eps: f64,
    budgets: &Budgets,
) -> Result<PottsResult> {
    PottsInstance::new(g, q, beta)?;
    let parts = partition.parts();
    if parts.n() != g.n() {
        return Err(Error::NotAPartition(format!(
            "partition covers {} vertices, graph has {}",
            parts.n(),
            g.n()
        )));
    }
    let smallest = parts.part_sizes().into_iter().min().unwrap_or(0);
    let eta = smallest as f64 / g.n() as f64;
    let alpha = partition.alpha();
    let threshold = good_parts_beta_threshold(q, g.max_degree(), alpha, eta);
    require_beta(beta, threshold)?;
    ground_state_count(q, parts.len(), budgets)?;
    let xi = clamp_xi(eps)?;
    if xi <= (-(g.n() as f64) / 2.0).exp() {
        return PottsResult::brute_force(g, q, beta, threshold, budgets);
    }
    ground_state_sum(g, parts, q, beta, xi / 2.0, alpha, threshold, budgets)
}

/// Relative `((s+1)ε + βX/2)`-approximation of `Z_G(β)` given a certified
/// partition in which `s` parts have fewer than `ηn` vertices. The `X` edges
/// leaving those parts are dropped; each small part is handled as an
/// expander on its own and the rest by [`approx_z_good_parts`].
pub fn approx_z_with_partition(
    g: &Graph,
    partition: &CertifiedPartition,
    q: usize,
    beta: f64,
    eps: f64,
    eta: f64,
    budgets: &Budgets,
) -> Result<PottsResult> {
    PottsInstance::new(g, q, beta)?;
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Precondition(format!("eta = {eta} must lie in (0, 1]")));
    }
    let parts = partition.parts();
    if parts.n() != g.n() {
        return Err(Error::NotAPartition(format!(
            "partition covers {} vertices, graph has {}",
            parts.n(),
            g.n()
        )));
    }
    let n = g.n();
    let alpha = partition.alpha();
    let threshold = good_parts_beta_threshold(q, g.max_degree(), alpha, eta);
    require_beta(beta, threshold)?;
    let xi = clamp_xi(eps)?;

    let bad: Vec<bool> = parts.sets().iter().map(|p| (p.len() as f64) < eta * n as f64).collect();
    let s = bad.iter().filter(|&&b| b).count();
    if s == 0 {
        let mut result = approx_z_good_parts(g, partition, q, beta, xi, budgets)?;
        result.beta_threshold = threshold;
        return Ok(result);
    }

    let mut log_z = 0.0;
    let mut clusters = 0;
    let mut depth = 0;
    for (i, part) in parts.sets().iter().enumerate().filter(|&(i, _)| bad[i]) {
        let (sub, _) = g.induced_subgraph(part, false)?;
        let r = approx_z_expander(&sub, q, beta, xi, alpha, budgets)
            .map_err(|e| match e {
                Error::Precondition(msg) => Error::Precondition(format!("part {i}: {msg}")),
                other => other,
            })?;
        log_z += r.log_z;
        clusters += r.clusters_evaluated;
        depth = depth.max(r.truncation_depth);
    }

    let good_vertices: VertexSet = (0..n).filter(|&v| !bad[parts.part_of(v)]).collect();
    let mut per_psi = Vec::new();
    let mut ground_states = 1;
    if !good_vertices.is_empty() {
        let (sub, map) = g.induced_subgraph(&good_vertices, false)?;
        let mut index = vec![usize::MAX; n];
        map.iter().enumerate().for_each(|(new, &old)| index[old] = new);
        let sets: Vec<VertexSet> = parts
            .sets()
            .iter()
            .enumerate()
            .filter(|&(i, _)| !bad[i])
            .map(|(_, p)| p.iter().map(|v| index[v]).collect())
            .collect();
        let good = CertifiedPartition {
            parts: Parts::new(sub.n(), sets).map_err(Error::NotAPartition)?,
            phi_in: partition.phi_in,
            min_degree: partition.min_degree,
            phi_out: partition.phi_out,
        };
        let r = approx_z_good_parts(&sub, &good, q, beta, xi, budgets)?;
        log_z += r.log_z;
        clusters += r.clusters_evaluated;
        depth = depth.max(r.truncation_depth);
        per_psi = r.per_psi;
        ground_states = r.ground_states;
    }

    let removed = g
        .edges()
        .filter(|&(u, v)| {
            let (a, b) = (parts.part_of(u), parts.part_of(v));
            a != b && (bad[a] || bad[b])
        })
        .count() as u64;
    let shift = beta * removed as f64 / 2.0;
    Ok(PottsResult {
        log_z: log_z + shift,
        eps_bound: (s + 1) as f64 * xi + shift,
        mode: Mode::Partition,
        ground_states,
        truncation_depth: depth,
        clusters_evaluated: clusters,
        per_psi,
        beta_threshold: threshold,
        bad_parts: s,
        removed_edges: removed,
        partition: None,
    })
}

/// End-to-end: partition `G` into expanders with parameter `k` and constant
/// `c`, then approximate `Z_G(β)`. With every part of at least `n/k`
/// vertices the result is a relative `ε`-approximation; otherwise the small
/// parts are split off and the weaker bound is reported.
pub fn approx_z_sse(
    g: &Graph,
    k: usize,
    q: usize,
    beta: f64,
    eps: f64,
    c: f64,
    budgets: &Budgets,
) -> Result<PottsResult> {
    PottsInstance::new(g, q, beta)?;
    let params = PartitionParams { k, c, iteration_factor: budgets.iteration_factor };
    let partition = partition_into_expanders(g, &params)?;
    let lambda_k = partition.lambda[k - 1];
    let threshold = sse_beta_threshold(k, q, g.max_degree(), g.min_degree(), lambda_k);
    require_beta(beta, threshold)?;
    let certified = CertifiedPartition::from_expander_partition(g, &partition)?;
    let n = g.n();
    let all_large = partition.parts.iter().all(|p| k * p.len() >= n);
    let mut result = if all_large {
        let mut r = approx_z_good_parts(g, &certified, q, beta, eps, budgets)?;
        if r.mode == Mode::Partition {
            r.mode = Mode::Sse;
        }
        r
    } else {
        approx_z_with_partition(g, &certified, q, beta, eps, 1.0 / k as f64, budgets)?
    };
    result.beta_threshold = threshold;
    result.partition = Some(partition);
    Ok(result)
}
