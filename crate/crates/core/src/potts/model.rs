use serde::Serialize;

use crate::budget::Budgets;
use crate::error::{check_budget, Error, Result};
use crate::graph::{Graph, Parts, VertexSet};
use crate::logspace::LogSum;

/// A ferromagnetic Potts instance `(G, q, β)`.
#[derive(Clone, Debug)]
pub struct PottsInstance<'a> {
    pub g: &'a Graph,
    pub q: usize,
    pub beta: f64,
}

impl<'a> PottsInstance<'a> {
    pub fn new(g: &'a Graph, q: usize, beta: f64) -> Result<Self> {
        if q < 2 {
            return Err(Error::Precondition(format!("q = {q} must be at least 2")));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Precondition(format!("beta = {beta} must be positive and finite")));
        }
        Ok(Self { g, q, beta })
    }

    pub fn max_degree(&self) -> usize {
        self.g.max_degree()
    }

    pub fn min_degree(&self) -> usize {
        self.g.min_degree()
    }
}

/// `m_G(ω)`.
pub fn monochromatic_edges(g: &Graph, colours: &[usize]) -> Result<u64> {
    if colours.len() != g.n() {
        return Err(Error::Precondition(format!(
            "colouring has {} entries for {} vertices",
            colours.len(),
            g.n()
        )));
    }
    Ok(g.edges().filter(|&(u, v)| colours[u] == colours[v]).count() as u64)
}

/// Every component of `G[U]` is small.
pub fn is_sparse(g: &Graph, u: &VertexSet, parts: &Parts) -> Result<bool> {
    if u.is_empty() {
        return Ok(true);
    }
    let (sub, map) = g.induced_subgraph(u, true)?;
    let sparse = sub.components().iter().all(|c| {
        let original: VertexSet = c.iter().map(|v| map[v]).collect();
        parts.is_small(&original)
    });
    debug_assert!(!parts.is_small(u) || sparse);
    Ok(sparse)
}

/// Disjoint with disjoint edge boundaries.
pub fn compatible(g: &Graph, a: &VertexSet, b: &VertexSet) -> Result<bool> {
    if !a.is_disjoint(b) {
        return Ok(false);
    }
    let boundary = |s: &VertexSet| -> Vec<(usize, usize)> {
        let mask = s.mask(g.n());
        g.edges().filter(|&(u, v)| mask[u] != mask[v]).collect()
    };
    let (ba, bb) = (boundary(a), boundary(b));
    Ok(ba.iter().all(|e| !bb.contains(e)))
}

/// Fixed-width bitset over vertices, for the distance-one tests in cluster work.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Bits(Vec<u64>);

impl Bits {
    pub(crate) fn empty(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64).max(1)])
    }

    pub(crate) fn insert(&mut self, v: usize) {
        self.0[v / 64] |= 1 << (v % 64);
    }

    pub(crate) fn meets(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).any(|(a, b)| a & b != 0)
    }
}

/// Vertices of `s` together with their neighbours.
pub(crate) fn reach(g: &Graph, s: &VertexSet) -> Bits {
    let mut bits = Bits::empty(g.n());
    for v in s.iter() {
        bits.insert(v);
        g.neighbors(v).iter().for_each(|&w| bits.insert(w));
    }
    bits
}

pub(crate) fn bits_of(n: usize, s: &VertexSet) -> Bits {
    let mut bits = Bits::empty(n);
    s.iter().for_each(|v| bits.insert(v));
    bits
}

/// `log R^ψ(U, β)`: sum over colourings `λ` of `U` with `λ(v) ≠ ψ(v)` of
/// `e^{β·m}`, `m` counting monochromatic edges that meet `U` when vertices
/// outside `U` keep their ground-state colour.
pub fn restricted_log_partition(
    g: &Graph,
    parts: &Parts,
    psi: &[usize],
    u: &VertexSet,
    q: usize,
    beta: f64,
    budgets: &Budgets,
) -> Result<f64> {
    check_ground_state(g, parts, psi, q)?;
    check_budget("restricted set size", u.len() as f64, budgets.restricted_size as f64)?;
    let n = g.n();
    let verts = u.as_slice();
    let t = verts.len();
    let mut colour: Vec<usize> = (0..n).map(|v| psi[parts.part_of(v)]).collect();
    let in_u = u.mask(n);
    // offsets[i] is the current choice among the q-1 colours avoiding ψ(v)
    let mut offsets = vec![0usize; t];
    let pick = |v: usize, o: usize| {
        let base = psi[parts.part_of(v)];
        (base + 1 + o) % q
    };
    for &v in verts {
        colour[v] = pick(v, 0);
    }
    let mut mono = g
        .edges()
        .filter(|&(a, b)| (in_u[a] || in_u[b]) && colour[a] == colour[b])
        .count() as i64;
    let mut acc = LogSum::new();
    loop {
        acc.add(beta * mono as f64);
        let mut i = 0;
        loop {
            if i == t {
                return Ok(acc.value());
            }
            let v = verts[i];
            let old = colour[v];
            offsets[i] = (offsets[i] + 1) % (q - 1);
            let new = pick(v, offsets[i]);
            for &w in g.neighbors(v) {
                if colour[w] == old {
                    mono -= 1;
                }
                if colour[w] == new {
                    mono += 1;
                }
            }
            colour[v] = new;
            if offsets[i] != 0 {
                break;
            }
            i += 1;
        }
    }
}

/// `log w_γ = -β|∇γ| + log R^ψ(γ, β)`.
pub fn polymer_log_weight(
    g: &Graph,
    parts: &Parts,
    psi: &[usize],
    gamma: &VertexSet,
    q: usize,
    beta: f64,
    budgets: &Budgets,
) -> Result<f64> {
    let closure = g.closure_size(gamma)?;
    Ok(-beta * closure as f64 + restricted_log_partition(g, parts, psi, gamma, q, beta, budgets)?)
}

/// `a = 3 - βα + log(q-1) + log Δ`.
pub fn kp_exponent(q: usize, beta: f64, alpha: f64, max_degree: usize) -> f64 {
    3.0 - beta * alpha + ((q - 1) as f64).ln() + (max_degree as f64).ln()
}

/// Whether `a ≤ -log(Δ+2)`, which gives the Kotecký–Preiss condition with
/// decay `g(γ) = |γ|` for any polymer model whose weights obey
/// `w_γ ≤ (q-1)^{|γ|} e^{-βα|γ|}`.
pub fn kp_verified(instance: &PottsInstance, alpha: f64) -> Result<bool> {
    if !(alpha > 0.0) {
        return Err(Error::Precondition(format!("alpha = {alpha} must be positive")));
    }
    let delta = instance.max_degree();
    let a = kp_exponent(instance.q, instance.beta, alpha, delta);
    Ok(a <= -((delta + 2) as f64).ln())
}

pub(crate) fn require_kp(instance: &PottsInstance, alpha: f64) -> Result<()> {
    if kp_verified(instance, alpha)? {
        Ok(())
    } else {
        let delta = instance.max_degree();
        Err(Error::KpNotVerified {
            a: kp_exponent(instance.q, instance.beta, alpha, delta),
            bound: -((delta + 2) as f64).ln(),
        })
    }
}

/// A connected small vertex set.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Polymer {
    pub vertices: VertexSet,
    pub closure_size: u64,
}

/// Every polymer with at most `max_size` vertices, in lexicographic order of
/// the sorted vertex lists. Connected sets are grown from their smallest
/// vertex, only through larger vertices adjacent to the current set, so each
/// is produced once.
pub fn enumerate_polymers(
    g: &Graph,
    parts: &Parts,
    max_size: usize,
    budgets: &Budgets,
) -> Result<Vec<Polymer>> {
    if parts.n() != g.n() {
        return Err(Error::NotAPartition(format!(
            "partition covers {} vertices, graph has {}",
            parts.n(),
            g.n()
        )));
    }
    check_budget("polymer size", max_size as f64, budgets.restricted_size as f64)?;
    let n = g.n();
    let mut found: Vec<Vec<usize>> = Vec::new();
    let mut per_part = vec![0usize; parts.len()];
    // blocked[v]: v is in the set or adjacent to it (so already offered)
    let mut blocked = vec![0u32; n];

    #[allow(clippy::too_many_arguments)]
    fn extend(
        g: &Graph,
        parts: &Parts,
        root: usize,
        set: &mut Vec<usize>,
        ext: Vec<usize>,
        max_size: usize,
        per_part: &mut [usize],
        blocked: &mut [u32],
        found: &mut Vec<Vec<usize>>,
        limit: u64,
    ) -> Result<()> {
        found.push(set.clone());
        check_budget("polymers", found.len() as f64, limit as f64)?;
        if set.len() == max_size {
            return Ok(());
        }
        let mut ext = ext;
        while let Some(w) = ext.pop() {
            let p = parts.part_of(w);
            if 2 * (per_part[p] + 1) > parts.part(p).len() {
                continue;
            }
            let fresh: Vec<usize> = g
                .neighbors(w)
                .iter()
                .copied()
                .filter(|&x| x > root && blocked[x] == 0)
                .collect();
            per_part[p] += 1;
            set.push(w);
            blocked[w] += 1;
            g.neighbors(w).iter().for_each(|&x| blocked[x] += 1);
            let mut next = ext.clone();
            next.extend(fresh);
            let r = extend(g, parts, root, set, next, max_size, per_part, blocked, found, limit);
            g.neighbors(w).iter().for_each(|&x| blocked[x] -= 1);
            blocked[w] -= 1;
            set.pop();
            per_part[p] -= 1;
            r?;
        }
        Ok(())
    }

    if max_size > 0 {
        for root in 0..n {
            let p = parts.part_of(root);
            if 2 > parts.part(p).len() {
                continue;
            }
            per_part[p] += 1;
            blocked[root] += 1;
            g.neighbors(root).iter().for_each(|&x| blocked[x] += 1);
            let ext: Vec<usize> = g.neighbors(root).iter().copied().filter(|&x| x > root).collect();
            let mut set = vec![root];
            let r = extend(
                g, parts, root, &mut set, ext, max_size, &mut per_part, &mut blocked,
                &mut found, budgets.clusters,
            );
            g.neighbors(root).iter().for_each(|&x| blocked[x] -= 1);
            blocked[root] -= 1;
            per_part[p] -= 1;
            r?;
        }
    }
    let mut polymers = found
        .into_iter()
        .map(|vs| {
            let vertices = VertexSet::from(vs);
            let closure_size = g.closure_size(&vertices)?;
            Ok(Polymer { vertices, closure_size })
        })
        .collect::<Result<Vec<_>>>()?;
    polymers.sort();
    Ok(polymers)
}

pub(crate) fn check_ground_state(g: &Graph, parts: &Parts, psi: &[usize], q: usize) -> Result<()> {
    if parts.n() != g.n() {
        return Err(Error::NotAPartition(format!(
            "partition covers {} vertices, graph has {}",
            parts.n(),
            g.n()
        )));
    }
    if q < 2 {
        return Err(Error::Precondition(format!("q = {q} must be at least 2")));
    }
    if psi.len() != parts.len() {
        return Err(Error::Precondition(format!(
            "ground state has {} colours for {} parts",
            psi.len(),
            parts.len()
        )));
    }
    if let Some(&c) = psi.iter().find(|&&c| c >= q) {
        return Err(Error::Precondition(format!("colour {c} is not below q = {q}")));
    }
    Ok(())
}
