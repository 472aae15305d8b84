use crate::budget::Budgets;
use crate::error::{check_budget, Result};
use crate::graph::{Conductance, Graph, VertexSet};

fn subset_tables(g: &Graph, limit: usize) -> Result<(Vec<u64>, Vec<u64>)> {
    let n = g.n();
    check_budget("vertices for subset enumeration", n as f64, limit as f64)?;
    let adj = g.adjacency_bits();
    let size = 1usize << n;
    let mut boundary = vec![0u64; size];
    let mut volume = vec![0u64; size];
    for mask in 1..size {
        let v = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        volume[mask] = volume[rest] + g.degree(v) as u64;
        // adding v: its edges into `rest` leave the boundary, the others join it
        let inside = (adj[v] & rest as u64).count_ones() as u64;
        boundary[mask] = boundary[rest] + g.degree(v) as u64 - 2 * inside;
    }
    Ok((boundary, volume))
}

/// `φ(G) = min { φ(S) : S ≠ ∅, vol(S) ≤ vol(V)/2 }` with a minimising set
/// (the first in bitmask order).
pub fn min_conductance(g: &Graph, budgets: &Budgets) -> Result<(Conductance, VertexSet)> {
    let total = 2 * g.m() as u64;
    let (c, s) = expansion_profile(g, total / 2, budgets)?
        .expect("a graph without isolated vertices has a set of volume at most vol(V)/2");
    Ok((c, s))
}

/// `min { φ(S) : S ≠ ∅, vol(S) ≤ gamma }`, or `None` when no set qualifies.
pub fn expansion_profile(
    g: &Graph,
    gamma: u64,
    budgets: &Budgets,
) -> Result<Option<(Conductance, VertexSet)>> {
    let (boundary, volume) = subset_tables(g, budgets.subset_vertices)?;
    let mut best: Option<(Conductance, usize)> = None;
    for mask in 1..boundary.len() {
        if volume[mask] == 0 || volume[mask] > gamma {
            continue;
        }
        let c = Conductance::new(boundary[mask], volume[mask]);
        if best.is_none_or(|(b, _)| c < b) {
            best = Some((c, mask));
        }
    }
    Ok(best.map(|(c, mask)| (c, VertexSet::from_bits(mask as u64))))
}

/// `min |∂S| / |S|` over `1 ≤ |S| ≤ n/2`, as `(boundary, size, S)`.
pub fn min_edge_expansion(g: &Graph, budgets: &Budgets) -> Result<(u64, usize, VertexSet)> {
    let n = g.n();
    let (boundary, _) = subset_tables(g, budgets.subset_vertices)?;
    let mut best: Option<(u64, usize, usize)> = None;
    for mask in 1..boundary.len() {
        let size = mask.count_ones() as usize;
        if 2 * size > n {
            continue;
        }
        let b = boundary[mask];
        let better = match best {
            None => true,
            Some((bb, bs, _)) => (b as u128) * (bs as u128) < (bb as u128) * (size as u128),
        };
        if better {
            best = Some((b, size, mask));
        }
    }
    let (b, s, mask) = best.expect("n >= 2 has a singleton with |S| <= n/2");
    Ok((b, s, VertexSet::from_bits(mask as u64)))
}

/// `ρ_G(k)`: the least possible maximum conductance over `k` disjoint
/// nonempty sets, with one optimal family.
pub fn k_way_expansion(g: &Graph, k: usize, budgets: &Budgets) -> Result<Option<(Conductance, Vec<VertexSet>)>> {
    let n = g.n();
    check_budget("vertices for k-way expansion", n as f64, budgets.kway_vertices as f64)?;
    if k == 0 || k > n {
        return Ok(None);
    }
    let (boundary, volume) = subset_tables(g, budgets.kway_vertices)?;
    let size = 1usize << n;
    let phi: Vec<Conductance> = (0..size)
        .map(|m| if m == 0 { Conductance::zero() } else { Conductance::new(boundary[m], volume[m]) })
        .collect();

    // best[j][mask]: optimum over j disjoint nonempty subsets of mask
    // choice[j][mask]: the set holding the lowest vertex of mask, or 0 when it is unused
    let mut best: Vec<Vec<Option<Conductance>>> = vec![vec![Some(Conductance::zero()); size]];
    let mut choice: Vec<Vec<usize>> = vec![vec![0; size]];
    for j in 1..=k {
        let prev = &best[j - 1];
        let mut cur: Vec<Option<Conductance>> = vec![None; size];
        let mut ch = vec![0usize; size];
        for mask in 1..size {
            let low = mask & mask.wrapping_neg();
            let rest = mask ^ low;
            let mut opt = cur[rest];
            let mut pick = 0;
            let mut sub = rest;
            loop {
                let s = sub | low;
                if let Some(other) = prev[mask ^ s] {
                    let val = phi[s].max(other);
                    if opt.is_none_or(|o| val < o) {
                        opt = Some(val);
                        pick = s;
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
            cur[mask] = opt;
            ch[mask] = pick;
        }
        best.push(cur);
        choice.push(ch);
    }

    let full = size - 1;
    let Some(value) = best[k][full] else {
        return Ok(None);
    };
    let mut family = Vec::new();
    let (mut j, mut mask) = (k, full);
    while j > 0 {
        let s = choice[j][mask];
        if s == 0 {
            mask ^= mask & mask.wrapping_neg();
        } else {
            family.push(VertexSet::from_bits(s as u64));
            mask ^= s;
            j -= 1;
        }
    }
    Ok(Some((value, family)))
}
