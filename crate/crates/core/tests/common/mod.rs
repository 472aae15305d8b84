#![allow(dead_code)]

use expander_potts::generators::{clique_chain, complete, cycle, random_regular};
use expander_potts::{Graph, VertexSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn petersen() -> Graph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((5 + i, 5 + (i + 2) % 5));
    }
    Graph::from_edges(10, &edges).unwrap()
}

pub fn path(n: usize) -> Graph {
    Graph::from_edges(n, &(0..n - 1).map(|u| (u, u + 1)).collect::<Vec<_>>()).unwrap()
}

pub fn star(leaves: usize) -> Graph {
    Graph::from_edges(leaves + 1, &(1..=leaves).map(|v| (0, v)).collect::<Vec<_>>()).unwrap()
}

/// Two triangles joined by the edge 2–3.
pub fn two_triangles() -> Graph {
    expander_potts::graph::parse_edge_list("0 1\n1 2\n2 0\n2 3\n3 4\n4 5\n5 3").unwrap()
}

/// Disjoint cliques of the given sizes in a chain, consecutive ones joined by one edge.
pub fn clique_path(sizes: &[usize]) -> Graph {
    let mut edges = Vec::new();
    let mut base = 0;
    for (i, &s) in sizes.iter().enumerate() {
        edges.extend((0..s).flat_map(|u| (u + 1..s).map(move |v| (base + u, base + v))));
        if i + 1 < sizes.len() {
            edges.push((base + s - 1, base + s));
        }
        base += s;
    }
    Graph::from_edges(base, &edges).unwrap()
}

/// Consecutive blocks of the given sizes.
pub fn blocks(sizes: &[usize]) -> Vec<VertexSet> {
    let mut out = Vec::new();
    let mut base = 0;
    for &s in sizes {
        out.push((base..base + s).collect());
        base += s;
    }
    out
}

/// `G(n, p)` conditioned on having no isolated vertex.
pub fn gnp(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Graph {
    loop {
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|_| rng.random_bool(p))
            .collect();
        if let Ok(g) = Graph::from_edges(n, &edges) {
            return g;
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A fixed zoo of small connected graphs.
pub fn zoo() -> Vec<(String, Graph)> {
    let mut out: Vec<(String, Graph)> = vec![
        ("K2".into(), complete(2).unwrap()),
        ("K4".into(), complete(4).unwrap()),
        ("K6".into(), complete(6).unwrap()),
        ("C5".into(), cycle(5).unwrap()),
        ("C8".into(), cycle(8).unwrap()),
        ("P6".into(), path(6)),
        ("star5".into(), star(5)),
        ("petersen".into(), petersen()),
        ("two-triangles".into(), two_triangles()),
        ("clique-chain(2,4,1)".into(), clique_chain(2, 4, 1).unwrap()),
        ("clique-chain(3,4,1)".into(), clique_chain(3, 4, 1).unwrap()),
    ];
    for (n, seed) in [(8, 1), (10, 2), (12, 3), (14, 4)] {
        out.push((format!("rr({n},3)#{seed}"), random_regular(n, 3, seed).unwrap()));
    }
    let mut r = rng(99);
    for n in [7, 9, 11, 13] {
        out.push((format!("gnp({n},0.4)"), gnp(n, 0.4, &mut r)));
    }
    out
}

/// Graphs on `lo..=hi` vertices from an edge bitmask, with every isolated
/// vertex joined to its successor.
pub fn arb_graph(lo: usize, hi: usize) -> impl proptest::strategy::Strategy<Value = Graph> {
    use proptest::prelude::*;
    (lo..=hi)
        .prop_flat_map(|n| (Just(n), proptest::collection::vec(any::<bool>(), n * (n - 1) / 2)))
        .prop_map(|(n, bits)| {
            let mut edges: Vec<(usize, usize)> = (0..n)
                .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                .zip(bits)
                .filter(|(_, b)| *b)
                .map(|(e, _)| e)
                .collect();
            let mut degree = vec![0; n];
            for &(u, v) in &edges {
                degree[u] += 1;
                degree[v] += 1;
            }
            for v in 0..n {
                if degree[v] == 0 {
                    let w = (v + 1) % n;
                    edges.push((v.min(w), v.max(w)));
                    degree[v] += 1;
                    degree[w] += 1;
                }
            }
            edges.sort();
            edges.dedup();
            Graph::from_edges(n, &edges).unwrap()
        })
}

/// All ground states for `ell` parts in mixed radix, part 0 most significant.
pub fn ground_states(q: usize, ell: usize) -> Vec<Vec<usize>> {
    (0..q.pow(ell as u32))
        .map(|mut i| {
            let mut psi = vec![0; ell];
            for slot in psi.iter_mut().rev() {
                *slot = i % q;
                i /= q;
            }
            psi
        })
        .collect()
}
