use num_rational::Ratio;
use serde::Serialize;

use crate::graph::{Conductance, Graph, GraphError, Spectrum, VertexSet};

/// A low-conductance set found by sweeping the second eigenvector.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepCut {
    /// Satisfies `vol(set) ≤ vol(V)/2`.
    pub set: VertexSet,
    pub conductance: Conductance,
    /// `λ₂` of the swept graph (exactly 0 when it is disconnected).
    pub lambda2: f64,
}

/// Cheeger sweep: order vertices by `D^{-1/2} v₂` (ties by index) and return
/// the smaller-volume side of the best threshold cut. The result satisfies
/// `φ(S) ≤ √(2 λ₂)`. A disconnected graph yields its smallest-volume
/// component, which has conductance 0.
pub fn sweep_cut(g: &Graph) -> Result<SweepCut, GraphError> {
    let n = g.n();
    if n < 2 {
        return Err(GraphError::TooFewVertices { n, need: 2 });
    }
    if let Some(v) = (0..n).find(|&v| g.degree(v) == 0) {
        return Err(GraphError::IsolatedVertex(v));
    }

    let components = g.components();
    if components.len() > 1 {
        let set = components
            .into_iter()
            .min_by_key(|c| (c.iter().map(|v| g.degree(v)).sum::<usize>(), c.as_slice()[0]))
            .expect("at least two components");
        let volume = g.volume(&set)?;
        return Ok(SweepCut { set, conductance: Conductance::new(0, volume), lambda2: 0.0 });
    }

    let spectrum = Spectrum::of(g)?;
    let v2 = spectrum.vector(2);
    let x: Vec<f64> = (0..n).map(|v| v2[v] / (g.degree(v) as f64).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));

    let total = 2 * g.m() as u64;
    let mut in_prefix = vec![false; n];
    let mut boundary: u64 = 0;
    let mut volume: u64 = 0;
    let mut best: Option<(Conductance, usize)> = None;
    for (i, &u) in order[..n - 1].iter().enumerate() {
        let inside = g.neighbors(u).iter().filter(|&&w| in_prefix[w]).count() as u64;
        boundary = boundary + g.degree(u) as u64 - 2 * inside;
        volume += g.degree(u) as u64;
        in_prefix[u] = true;
        let c = Conductance::new(boundary, volume.min(total - volume));
        if best.is_none_or(|(b, _)| c < b) {
            best = Some((c, i + 1));
        }
    }
    let (conductance, len) = best.expect("n >= 2");
    let prefix: VertexSet = order[..len].iter().copied().collect();
    let prefix_volume = g.volume(&prefix)?;
    let set = if 2 * prefix_volume <= total { prefix } else { prefix.complement(n) };
    Ok(SweepCut { set, conductance, lambda2: spectrum.lambda(2) })
}

/// `φ(B ∖ {u})` from `φ(B)` via
/// `φ(B-u) = vol(B)/(vol(B)-d_V)·φ(B) - (d_V - 2 d_B)/(vol(B) - d_V)`,
/// with `d_V = deg(u)` and `d_B` the degree of `u` inside `B`.
pub fn phi_after_vertex_removal(g: &Graph, b: &VertexSet, u: usize) -> crate::Result<Ratio<i64>> {
    if !b.contains(u) {
        return Err(crate::Error::Precondition(format!("vertex {u} is not in the set")));
    }
    let vol = g.volume(b)? as i64;
    let d_v = g.degree(u) as i64;
    if vol <= d_v {
        return Err(crate::Error::Precondition(format!(
            "vol(B) = {vol} must exceed deg({u}) = {d_v}"
        )));
    }
    let d_b = g.neighbors(u).iter().filter(|&&w| b.contains(w)).count() as i64;
    let phi_b = Ratio::new(g.boundary_size(b)? as i64, vol);
    let rest = vol - d_v;
    Ok(Ratio::new(vol, rest) * phi_b - Ratio::new(d_v - 2 * d_b, rest))
}
