//! Seeded test-graph generators.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::graph::{Graph, GraphError};

/// Pairing attempts before a random regular graph is declared infeasible.
const MAX_ATTEMPTS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase", tag = "kind")]
pub enum GeneratorSpec {
    RandomRegular { n: usize, d: usize },
    /// `t` cliques on `s` vertices each, consecutive cliques joined by `bridges` edges.
    CliqueChain { t: usize, s: usize, bridges: usize },
    Cycle { n: usize },
    Complete { n: usize },
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum GeneratorError {
    #[error("cannot parse generator spec {0:?}; expected e.g. random-regular(10,3), clique-chain(2,5,1), cycle(6), complete(4)")]
    Parse(String),
    #[error("infeasible generator spec: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl FromStr for GeneratorSpec {
    type Err = GeneratorError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let bad = || GeneratorError::Parse(text.to_string());
        let t = text.trim();
        let open = t.find('(').ok_or_else(bad)?;
        let args = t[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let nums = args
            .split(',')
            .map(|a| a.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| bad())?;
        match (&t[..open], nums.as_slice()) {
            ("random-regular", &[n, d]) => Ok(Self::RandomRegular { n, d }),
            ("clique-chain", &[t, s, bridges]) => Ok(Self::CliqueChain { t, s, bridges }),
            ("cycle", &[n]) => Ok(Self::Cycle { n }),
            ("complete", &[n]) => Ok(Self::Complete { n }),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::RandomRegular { n, d } => write!(f, "random-regular({n},{d})"),
            Self::CliqueChain { t, s, bridges } => write!(f, "clique-chain({t},{s},{bridges})"),
            Self::Cycle { n } => write!(f, "cycle({n})"),
            Self::Complete { n } => write!(f, "complete({n})"),
        }
    }
}

impl GeneratorSpec {
    /// Builds the graph; only `random-regular` uses the seed.
    pub fn generate(&self, seed: u64) -> Result<Graph, GeneratorError> {
        match *self {
            Self::RandomRegular { n, d } => random_regular(n, d, seed),
            Self::CliqueChain { t, s, bridges } => clique_chain(t, s, bridges),
            Self::Cycle { n } => cycle(n),
            Self::Complete { n } => complete(n),
        }
    }
}

fn infeasible(msg: String) -> GeneratorError {
    GeneratorError::Infeasible(msg)
}

pub fn cycle(n: usize) -> Result<Graph, GeneratorError> {
    if n < 3 {
        return Err(infeasible(format!("cycle needs n >= 3, got {n}")));
    }
    Ok(Graph::from_edges(n, &(0..n).map(|u| (u, (u + 1) % n)).collect::<Vec<_>>())?)
}

pub fn complete(n: usize) -> Result<Graph, GeneratorError> {
    if n < 2 {
        return Err(infeasible(format!("complete graph needs n >= 2, got {n}")));
    }
    let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    Ok(Graph::from_edges(n, &edges)?)
}

/// Clique `i` occupies vertices `i*s..(i+1)*s`. Bridge `j` between cliques
/// `i` and `i+1` joins `i*s + s-1-j` to `(i+1)*s + j`.
pub fn clique_chain(t: usize, s: usize, bridges: usize) -> Result<Graph, GeneratorError> {
    if t == 0 || s < 2 {
        return Err(infeasible(format!("clique-chain needs t >= 1 and s >= 2, got t={t}, s={s}")));
    }
    if t > 1 && (bridges == 0 || bridges > s) {
        return Err(infeasible(format!("clique-chain needs 1 <= bridges <= s, got {bridges}")));
    }
    let mut edges = Vec::new();
    for i in 0..t {
        let base = i * s;
        edges.extend((0..s).flat_map(|u| (u + 1..s).map(move |v| (base + u, base + v))));
        if i + 1 < t {
            edges.extend((0..bridges).map(|j| (base + s - 1 - j, base + s + j)));
        }
    }
    Ok(Graph::from_edges(t * s, &edges)?)
}

/// Uniform pairing of `n·d` half-edges, retried until the result is simple.
pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph, GeneratorError> {
    if d == 0 || d >= n || (n * d) % 2 == 1 {
        return Err(infeasible(format!("no simple {d}-regular graph on {n} vertices")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<usize> = (0..n * d).map(|i| i / d).collect();
    'attempt: for _ in 0..MAX_ATTEMPTS {
        points.shuffle(&mut rng);
        let mut edges = Vec::with_capacity(n * d / 2);
        for pair in points.chunks(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v {
                continue 'attempt;
            }
            edges.push((u, v));
        }
        edges.sort_unstable();
        if edges.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        return Ok(Graph::from_edges(n, &edges)?);
    }
    Err(infeasible(format!("no simple pairing found in {MAX_ATTEMPTS} attempts")))
}
