//! Simple undirected graphs together with the volume, boundary, closure and
//! conductance primitives every other module is built on.
//!
//! Vertices are `0..n`. A [`Graph`] built through the public constructors has
//! no self-loops, no parallel edges and no isolated vertices; induced
//! subgraphs may opt into isolated vertices because sets in the interior of
//! the partitioning algorithm can transiently isolate them.

mod conductance;
mod parts;
mod spectrum;

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

pub use conductance::Conductance;
pub use parts::Parts;
pub use spectrum::{symmetric_eigen, Spectrum, SPECTRAL_ZERO_TOL};

/// Largest vertex count for which subset enumeration is attempted.
pub const EXHAUSTIVE_LIMIT: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: self-loop at vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },
    #[error("line {line}: duplicate edge {u}-{v}")]
    DuplicateEdge { line: usize, u: usize, v: usize },
    #[error("vertex {0} is isolated")]
    IsolatedVertex(usize),
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("vertex set is empty")]
    EmptySet,
    #[error("vertex set has zero volume")]
    ZeroVolume,
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("need at least {need} vertices, graph has {n}")]
    TooFewVertices { n: usize, need: usize },
    #[error("exhaustive enumeration is limited to {limit} vertices, graph has {n}")]
    TooLarge { n: usize, limit: usize },
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },
}

/// Sorted set of distinct vertex ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn full(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn singleton(v: usize) -> Self {
        Self(vec![v])
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        Self(
            mask.iter()
                .enumerate()
                .filter_map(|(v, &inside)| inside.then_some(v))
                .collect(),
        )
    }

    /// Vertices of a bitmask over `0..64`.
    pub fn from_bits(bits: u64) -> Self {
        Self((0..64).filter(|&v| bits >> v & 1 == 1).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &v in &self.0 {
            mask[v] = true;
        }
        mask
    }

    /// Bitmask representation; only valid when every id is below 64.
    pub fn bits(&self) -> u64 {
        self.0.iter().fold(0u64, |acc, &v| acc | 1 << v)
    }

    pub fn complement(&self, n: usize) -> Self {
        let mask = self.mask(n);
        Self((0..n).filter(|&v| !mask[v]).collect())
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut out: Vec<usize> = self.0.iter().chain(other.0.iter()).copied().collect();
        out.sort_unstable();
        out.dedup();
        Self(out)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Self(self.iter().filter(|&v| other.contains(v)).collect())
    }

    pub fn difference(&self, other: &Self) -> Self {
        Self(self.iter().filter(|&v| !other.contains(v)).collect())
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.iter().all(|v| other.contains(v))
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.iter().all(|v| !other.contains(v))
    }

    fn check_range(&self, n: usize) -> Result<(), GraphError> {
        match self.0.last() {
            Some(&v) if v >= n => Err(GraphError::VertexOutOfRange { vertex: v, n }),
            _ => Ok(()),
        }
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut v: Vec<usize> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }
}

impl From<Vec<usize>> for VertexSet {
    fn from(v: Vec<usize>) -> Self {
        v.into_iter().collect()
    }
}

impl<const N: usize> From<[usize; N]> for VertexSet {
    fn from(v: [usize; N]) -> Self {
        v.into_iter().collect()
    }
}

/// Outcome of an exhaustive α-expansion check.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionCheck {
    pub holds: bool,
    /// On failure, the set with the smallest `|∂S| / |S|` among `|S| <= n/2`.
    pub witness: Option<VertexSet>,
}

/// Simple undirected graph with sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    m: usize,
}

impl Graph {
    /// Builds a graph and rejects self-loops, duplicate edges and isolated vertices.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let g = Self::build(n, edges.iter().enumerate().map(|(i, &e)| (i + 1, e)))?;
        g.check_no_isolated()?;
        Ok(g)
    }

    /// Same as [`Graph::from_edges`] but isolated vertices are allowed.
    pub fn from_edges_allow_isolated(
        n: usize,
        edges: &[(usize, usize)],
    ) -> Result<Self, GraphError> {
        Self::build(n, edges.iter().enumerate().map(|(i, &e)| (i + 1, e)))
    }

    fn build(
        n: usize,
        edges: impl Iterator<Item = (usize, (usize, usize))>,
    ) -> Result<Self, GraphError> {
        let mut adj = vec![Vec::new(); n];
        let mut m = 0;
        for (line, (u, v)) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop { line, vertex: u });
            }
            adj[u].push(v);
            adj[v].push(u);
            m += 1;
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                let v = w[0];
                return Err(GraphError::DuplicateEdge {
                    line: 0,
                    u: u.min(v),
                    v: u.max(v),
                });
            }
        }
        Ok(Self { adj, m })
    }

    fn check_no_isolated(&self) -> Result<(), GraphError> {
        match self.adj.iter().position(|a| a.is_empty()) {
            Some(v) => Err(GraphError::IsolatedVertex(v)),
            None => Ok(()),
        }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn has_isolated_vertex(&self) -> bool {
        self.adj.iter().any(Vec::is_empty)
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Bitmask adjacency; only meaningful for `n <= 64`.
    pub fn adjacency_bits(&self) -> Vec<u64> {
        self.adj
            .iter()
            .map(|list| list.iter().fold(0u64, |acc, &v| acc | 1 << v))
            .collect()
    }

    /// `vol(S) = Σ_{v∈S} deg(v)`.
    pub fn volume(&self, s: &VertexSet) -> Result<u64, GraphError> {
        s.check_range(self.n())?;
        Ok(s.iter().map(|v| self.degree(v) as u64).sum())
    }

    /// `e(S, T)`: edges with one endpoint in `S` and the other in `T ∖ S`.
    pub fn edges_between(&self, s: &VertexSet, t: &VertexSet) -> Result<u64, GraphError> {
        s.check_range(self.n())?;
        t.check_range(self.n())?;
        let in_s = s.mask(self.n());
        let in_t = t.mask(self.n());
        Ok(self.edges_between_masks(&in_s, &in_t))
    }

    pub(crate) fn edges_between_masks(&self, in_s: &[bool], in_t: &[bool]) -> u64 {
        let mut count = 0;
        for u in (0..self.n()).filter(|&u| in_s[u]) {
            count += self.adj[u].iter().filter(|&&v| in_t[v] && !in_s[v]).count() as u64;
        }
        count
    }

    /// `|∂(S)|`: edges with exactly one endpoint in `S`.
    pub fn boundary_size(&self, s: &VertexSet) -> Result<u64, GraphError> {
        s.check_range(self.n())?;
        let mask = s.mask(self.n());
        Ok(self.boundary_mask(&mask))
    }

    pub(crate) fn boundary_mask(&self, in_s: &[bool]) -> u64 {
        let mut count = 0;
        for u in (0..self.n()).filter(|&u| in_s[u]) {
            count += self.adj[u].iter().filter(|&&v| !in_s[v]).count() as u64;
        }
        count
    }

    /// Number of edges with both endpoints in `S`.
    pub fn internal_edges(&self, s: &VertexSet) -> Result<u64, GraphError> {
        s.check_range(self.n())?;
        let mask = s.mask(self.n());
        let twice: u64 = s
            .iter()
            .map(|u| self.adj[u].iter().filter(|&&v| mask[v]).count() as u64)
            .sum();
        Ok(twice / 2)
    }

    /// `|∇(S)|`: edges with at least one endpoint in `S`.
    pub fn closure_size(&self, s: &VertexSet) -> Result<u64, GraphError> {
        Ok(self.boundary_size(s)? + self.internal_edges(s)?)
    }

    /// `φ(S) = |∂S| / vol(S)`.
    pub fn conductance(&self, s: &VertexSet) -> Result<Conductance, GraphError> {
        if s.is_empty() {
            return Err(GraphError::EmptySet);
        }
        let volume = self.volume(s)?;
        if volume == 0 {
            return Err(GraphError::ZeroVolume);
        }
        Ok(Conductance::new(self.boundary_size(s)?, volume))
    }

    /// `G[S]` relabelled onto `0..|S|`; the returned map sends new ids to old ones.
    pub fn induced_subgraph(
        &self,
        s: &VertexSet,
        allow_isolated: bool,
    ) -> Result<(Graph, Vec<usize>), GraphError> {
        if s.is_empty() {
            return Err(GraphError::EmptySet);
        }
        s.check_range(self.n())?;
        let mut local = vec![usize::MAX; self.n()];
        for (i, v) in s.iter().enumerate() {
            local[v] = i;
        }
        let adj: Vec<Vec<usize>> = s
            .iter()
            .map(|v| {
                self.adj[v]
                    .iter()
                    .filter_map(|&w| (local[w] != usize::MAX).then_some(local[w]))
                    .collect()
            })
            .collect();
        let m = adj.iter().map(Vec::len).sum::<usize>() / 2;
        let g = Graph { adj, m };
        if !allow_isolated {
            if let Some(i) = g.adj.iter().position(Vec::is_empty) {
                return Err(GraphError::IsolatedVertex(s.as_slice()[i]));
            }
        }
        Ok((g, s.as_slice().to_vec()))
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<VertexSet> {
        let mut seen = vec![false; self.n()];
        let mut out = Vec::new();
        for root in 0..self.n() {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut stack = vec![root];
            let mut comp = Vec::new();
            while let Some(u) = stack.pop() {
                comp.push(u);
                for &v in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            out.push(VertexSet::from(comp));
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Whether `G[S]` is connected (the empty set counts as connected).
    pub fn is_connected_subset(&self, s: &VertexSet) -> bool {
        let Some(root) = s.iter().next() else {
            return true;
        };
        let mask = s.mask(self.n());
        let mut seen = vec![false; self.n()];
        seen[root] = true;
        let mut stack = vec![root];
        let mut reached = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.adj[u] {
                if mask[v] && !seen[v] {
                    seen[v] = true;
                    reached += 1;
                    stack.push(v);
                }
            }
        }
        reached == s.len()
    }

    /// Exhaustively checks `|∂S| >= α|S|` for every `S` with `|S| <= n/2`.
    pub fn is_alpha_expander(&self, alpha: f64) -> Result<ExpansionCheck, GraphError> {
        let n = self.n();
        if n > EXHAUSTIVE_LIMIT {
            return Err(GraphError::TooLarge { n, limit: EXHAUSTIVE_LIMIT });
        }
        let adj = self.adjacency_bits();
        let mut worst: Option<(u64, u32, u64)> = None;
        for mask in 1u64..(1 << n) {
            let size = mask.count_ones();
            if 2 * size as usize > n {
                continue;
            }
            let boundary: u64 = (0..n)
                .filter(|&v| mask >> v & 1 == 1)
                .map(|v| (adj[v] & !mask).count_ones() as u64)
                .sum();
            if (boundary as f64) < alpha * size as f64 {
                let better = match worst {
                    None => true,
                    Some((b, s, _)) => (boundary as u128) * (s as u128) < (b as u128) * (size as u128),
                };
                if better {
                    worst = Some((boundary, size, mask));
                }
            }
        }
        Ok(match worst {
            None => ExpansionCheck { holds: true, witness: None },
            Some((_, _, mask)) => ExpansionCheck {
                holds: false,
                witness: Some(VertexSet::from_bits(mask)),
            },
        })
    }

    /// Canonical edge list: header `n m`, then one sorted `u v` per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n(), self.m());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

/// Parses the edge-list format: one `u v` pair per line, blank lines and
/// `#` comments ignored. The first line is read as an `n m` header when the
/// remaining lines are exactly `m` edges whose largest id is `n - 1`.
pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut rows: Vec<(usize, usize, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(GraphError::Parse {
                line,
                msg: format!("expected two integers, found {:?}", trimmed),
            });
        }
        let parse = |s: &str| {
            s.parse::<usize>().map_err(|_| GraphError::Parse {
                line,
                msg: format!("{s:?} is not a vertex id"),
            })
        };
        rows.push((line, parse(fields[0])?, parse(fields[1])?));
    }
    if rows.is_empty() {
        return Err(GraphError::EmptyGraph);
    }

    let (_, a, b) = rows[0];
    let rest = &rows[1..];
    let rest_max = rest.iter().map(|&(_, u, v)| u.max(v)).max();
    let header = matches!(rest_max, Some(mx) if rest.len() == b && a == mx + 1);
    let (n, edges) = if header {
        (a, rest)
    } else {
        let mx = rows.iter().map(|&(_, u, v)| u.max(v)).max().unwrap_or(0);
        (mx + 1, &rows[..])
    };

    let mut seen = std::collections::HashSet::new();
    for &(line, u, v) in edges {
        if u == v {
            return Err(GraphError::SelfLoop { line, vertex: u });
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(GraphError::DuplicateEdge { line, u: u.min(v), v: u.max(v) });
        }
    }
    let g = Graph::build(n, edges.iter().map(|&(line, u, v)| (line, (u, v))))?;
    g.check_no_isolated()?;
    Ok(g)
}

impl FromStr for Graph {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_edge_list(s)
    }
}
