use serde::Serialize;

use crate::budget::Budgets;
use crate::error::{Error, Result};
use crate::graph::{Conductance, Graph, Parts, VertexSet};
use crate::oracle::min_conductance;

use super::algorithm::{Constants, DegreeRatio};
use super::sweep::{sweep_cut, SweepCut};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PartReport {
    pub size: usize,
    /// `φ_G(P_i)`.
    pub outer: Conductance,
    /// Smallest `deg_{G[P_i]}(v) / deg_G(v)` over the part.
    pub min_degree: DegreeRatio,
    /// Smallest degree inside `G[P_i]`.
    pub min_inner_degree: u64,
    /// Sweep cut of `G[P_i]`, absent when `G[P_i]` has an isolated vertex.
    pub sweep: Option<SweepCut>,
    /// Exact `φ(G[P_i])` when the part is small enough to enumerate.
    pub exact_inner: Option<Conductance>,
    pub inner_ok: bool,
    pub outer_ok: bool,
    pub degree_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationReport {
    /// Required lower bound on every `φ(G[P_i])`, namely `φ_in²/4`.
    pub required_inner: f64,
    pub required_outer: f64,
    pub tau: f64,
    pub parts: Vec<PartReport>,
    pub passed: bool,
}

/// Checks a partition against `(φ_in²/4, φ_out, τ)`.
///
/// The inner bound is accepted when the sweep cut of `G[P_i]` has
/// conductance at least `φ_in` (so `φ(G[P_i]) ≥ φ_in²/4` by the sweep
/// guarantee), or when `λ₂(G[P_i])/2` or, for parts of at most
/// `budgets.subset_vertices` vertices, the exact `φ(G[P_i])` reaches `φ_in²/4`.
pub fn verify_partition(
    g: &Graph,
    parts: &[VertexSet],
    k: usize,
    constants: &Constants,
    budgets: &Budgets,
) -> Result<VerificationReport> {
    let n = g.n();
    Parts::new(n, parts.to_vec()).map_err(Error::NotAPartition)?;
    if k < 2 {
        return Err(Error::Precondition(format!("k = {k} must be at least 2")));
    }
    let required_inner = constants.phi_in * constants.phi_in / 4.0;
    let mut reports = Vec::with_capacity(parts.len());
    for part in parts {
        let mask = part.mask(n);
        let mut min_degree: Option<DegreeRatio> = None;
        let mut min_inner_degree = u64::MAX;
        let mut degree_ok = true;
        for v in part.iter() {
            let inside = g.neighbors(v).iter().filter(|&&w| mask[w]).count() as u64;
            let r = DegreeRatio { vertex: v, inside, degree: g.degree(v) as u64 };
            if min_degree.is_none_or(|m| r.ratio() < m.ratio()) {
                min_degree = Some(r);
            }
            min_inner_degree = min_inner_degree.min(inside);
            degree_ok &= 5 * (k as u64 - 1) * r.inside >= r.degree;
        }
        let outer = g.conductance(part)?;
        let (sub, _) = g.induced_subgraph(part, true)?;
        let usable = sub.n() >= 2 && !sub.has_isolated_vertex();
        let sweep = if usable { Some(sweep_cut(&sub)?) } else { None };
        let exact_inner = if usable && sub.n() <= budgets.subset_vertices {
            Some(min_conductance(&sub, budgets)?.0)
        } else {
            None
        };
        let inner_ok = sweep.as_ref().is_some_and(|s| {
            !s.conductance.lt_f64(constants.phi_in) || s.lambda2 / 2.0 >= required_inner
        }) || exact_inner.is_some_and(|c| !c.lt_f64(required_inner));
        reports.push(PartReport {
            size: part.len(),
            outer,
            min_degree: min_degree.ok_or_else(|| Error::NotAPartition("empty part".into()))?,
            min_inner_degree,
            sweep,
            exact_inner,
            inner_ok,
            outer_ok: outer.le_f64(constants.phi_out),
            degree_ok,
        });
    }
    let passed = reports.iter().all(|r| r.inner_ok && r.outer_ok && r.degree_ok);
    Ok(VerificationReport {
        required_inner,
        required_outer: constants.phi_out,
        tau: constants.tau,
        parts: reports,
        passed,
    })
}
