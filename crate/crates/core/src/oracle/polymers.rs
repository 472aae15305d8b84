use crate::budget::Budgets;
use crate::error::{check_budget, Error, Result};
use crate::graph::{Graph, Parts, VertexSet};
use crate::logspace::{log_histogram, LogSum};

use super::states::{check_ground_state, check_parts};

/// All connected small sets, found by testing every subset of `V`.
pub fn brute_force_polymers(g: &Graph, parts: &Parts, budgets: &Budgets) -> Result<Vec<VertexSet>> {
    check_parts(g, parts)?;
    let n = g.n();
    check_budget("vertices for subset enumeration", n as f64, budgets.subset_vertices as f64)?;
    let mut out = Vec::new();
    for mask in 1u64..(1 << n) {
        let s = VertexSet::from_bits(mask);
        if parts.is_small(&s) && g.is_connected_subset(&s) {
            out.push(s);
        }
    }
    out.sort();
    Ok(out)
}

/// `log R^ψ(U, β)` by direct enumeration of the `(q-1)^{|U|}` colourings of
/// `U` that avoid `ψ` pointwise, counting monochromatic edges that meet `U`
/// with the rest of the graph coloured by `ψ`.
pub fn brute_force_log_restricted(
    g: &Graph,
    parts: &Parts,
    psi: &[usize],
    u: &VertexSet,
    q: usize,
    beta: f64,
    budgets: &Budgets,
) -> Result<f64> {
    check_ground_state(parts, psi, q)?;
    check_budget("restricted set size", u.len() as f64, budgets.restricted_size as f64)?;
    let n = g.n();
    let mut colour: Vec<usize> = (0..n).map(|v| psi[parts.part_of(v)]).collect();
    let in_u = u.mask(n);
    let verts = u.as_slice();
    let touching: Vec<(usize, usize)> = g.edges().filter(|&(a, b)| in_u[a] || in_u[b]).collect();
    let mut digit = vec![0usize; verts.len()];
    let mut hist = vec![0u128; touching.len() + 1];
    loop {
        for (i, &v) in verts.iter().enumerate() {
            let base = psi[parts.part_of(v)];
            // the digit-th colour different from ψ(v)
            colour[v] = if digit[i] < base { digit[i] } else { digit[i] + 1 };
        }
        let mono = touching.iter().filter(|&&(a, b)| colour[a] == colour[b]).count();
        hist[mono] += 1;
        let mut i = 0;
        while i < digit.len() {
            digit[i] += 1;
            if digit[i] < q - 1 {
                break;
            }
            digit[i] = 0;
            i += 1;
        }
        if i == digit.len() {
            break;
        }
    }
    Ok(log_histogram(&hist, beta))
}

/// `log w_γ = -β|∇γ| + log R^ψ(γ, β)`, computed without any of the
/// approximation pipeline's code.
pub fn brute_force_log_weight(
    g: &Graph,
    parts: &Parts,
    psi: &[usize],
    gamma: &VertexSet,
    q: usize,
    beta: f64,
    budgets: &Budgets,
) -> Result<f64> {
    let in_g = gamma.mask(g.n());
    let closure = g.edges().filter(|&(a, b)| in_g[a] || in_g[b]).count();
    Ok(-beta * closure as f64 + brute_force_log_restricted(g, parts, psi, gamma, q, beta, budgets)?)
}

/// Exact `log Ξ^ψ = log Σ_Γ Π_{γ∈Γ} w_γ` over all families of mutually
/// compatible polymers. Compatibility here is graph distance at least two.
pub fn exact_log_xi(
    g: &Graph,
    parts: &Parts,
    psi: &[usize],
    q: usize,
    beta: f64,
    budgets: &Budgets,
) -> Result<f64> {
    let polymers = brute_force_polymers(g, parts, budgets)?;
    check_budget("polymers", polymers.len() as f64, budgets.polymers as f64)?;
    let weights = polymers
        .iter()
        .map(|p| brute_force_log_weight(g, parts, psi, p, q, beta, budgets))
        .collect::<Result<Vec<f64>>>()?;
    let adj = g.adjacency_bits();
    let reach: Vec<u64> = polymers
        .iter()
        .map(|p| p.iter().fold(p.bits(), |acc, v| acc | adj[v]))
        .collect();
    let bits: Vec<u64> = polymers.iter().map(VertexSet::bits).collect();
    let k = polymers.len();
    let compatible: Vec<Vec<bool>> = (0..k)
        .map(|i| (0..k).map(|j| reach[i] & bits[j] == 0).collect())
        .collect();

    struct Walk<'a> {
        compatible: &'a [Vec<bool>],
        weights: &'a [f64],
        acc: LogSum,
        families: u64,
        limit: u64,
    }
    impl Walk<'_> {
        fn go(&mut self, candidates: &[usize], log_product: f64) -> Result<()> {
            self.families += 1;
            if self.families > self.limit {
                return Err(Error::Budget {
                    what: "compatible families",
                    needed: self.families as f64,
                    limit: self.limit as f64,
                });
            }
            self.acc.add(log_product);
            for (pos, &i) in candidates.iter().enumerate() {
                let next: Vec<usize> = candidates[pos + 1..]
                    .iter()
                    .copied()
                    .filter(|&j| self.compatible[i][j])
                    .collect();
                self.go(&next, log_product + self.weights[i])?;
            }
            Ok(())
        }
    }
    let mut walk = Walk {
        compatible: &compatible,
        weights: &weights,
        acc: LogSum::new(),
        families: 0,
        limit: budgets.families,
    };
    let all: Vec<usize> = (0..k).collect();
    walk.go(&all, 0.0)?;
    Ok(walk.acc.value())
}
