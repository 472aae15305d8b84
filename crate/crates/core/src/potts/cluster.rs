use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use crate::budget::Budgets;
use crate::error::{Error, Result};
use crate::graph::{Graph, Parts};
use crate::logspace::LogApprox;

use super::model::{
    bits_of, check_ground_state, enumerate_polymers, polymer_log_weight, reach, require_kp,
    Polymer, PottsInstance,
};

/// `m = ⌈log(2n/ξ)⌉`, at least 1.
pub fn truncation_depth(n: usize, xi: f64) -> usize {
    ((2.0 * n as f64 / xi).ln().ceil() as usize).max(1)
}

/// All clusters of total size at most `depth` for the polymers of a
/// partition, with their Ursell coefficients. The table does not depend on
/// the ground state; only the weights do.
#[derive(Clone, Debug)]
pub struct ClusterTable {
    depth: usize,
    polymers: Vec<Polymer>,
    // cluster c is entries[offsets[c]..offsets[c + 1]] as (polymer, multiplicity)
    entries: Vec<(u32, u8)>,
    offsets: Vec<usize>,
    ursell: Vec<f64>,
    sizes: Vec<u8>,
}

/// A cluster as a multiset of polymer indices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterView<'a> {
    pub polymers: &'a [(u32, u8)],
    pub total_size: usize,
    pub ursell: f64,
}

struct Local {
    entries: Vec<(u32, u8)>,
    lens: Vec<usize>,
    ursell: Vec<f64>,
    sizes: Vec<u8>,
}

impl ClusterTable {
    pub fn build(g: &Graph, parts: &Parts, depth: usize, budgets: &Budgets) -> Result<Self> {
        if depth > 64 {
            return Err(Error::Precondition(format!("truncation depth {depth} is too large")));
        }
        let largest_small: usize = parts.sets().iter().map(|p| p.len() / 2).sum();
        let polymers = enumerate_polymers(g, parts, depth.min(largest_small), budgets)?;
        let count = polymers.len();
        let sizes: Vec<usize> = polymers.iter().map(|p| p.vertices.len()).collect();

        // incompatible pairs: a vertex of one lies in the other or next to it
        let mut containing: Vec<Vec<u32>> = vec![Vec::new(); g.n()];
        for (i, p) in polymers.iter().enumerate() {
            p.vertices.iter().for_each(|v| containing[v].push(i as u32));
        }
        let adj: Vec<Vec<u32>> = polymers
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                let near = reach(g, &p.vertices);
                let bits = bits_of(g.n(), &p.vertices);
                let mut out: Vec<u32> = Vec::new();
                let mut seen = std::collections::BTreeSet::new();
                for v in p.vertices.iter() {
                    for &w in std::iter::once(&v).chain(g.neighbors(v)) {
                        for &j in &containing[w] {
                            if j as usize != i && seen.insert(j) {
                                out.push(j);
                            }
                        }
                    }
                }
                debug_assert!(out.iter().all(|&j| {
                    near.meets(&bits_of(g.n(), &polymers[j as usize].vertices))
                        && reach(g, &polymers[j as usize].vertices).meets(&bits)
                }));
                out.sort_unstable();
                out
            })
            .collect();

        let total = AtomicU64::new(0);
        let limit = budgets.clusters;
        let locals: Vec<Result<Local>> = (0..count)
            .into_par_iter()
            .map_init(
                || (vec![0u32; count], HashMap::new()),
                |(blocked, cache), root| {
                    let mut local = Local { entries: Vec::new(), lens: Vec::new(), ursell: Vec::new(), sizes: Vec::new() };
                    let mut walk = Walk { adj: &adj, sizes: &sizes, depth, root, blocked, out: &mut local, total: &total, limit, cache };
                    walk.start()?;
                    Ok(local)
                },
            )
            .collect();

        let mut table = ClusterTable {
            depth,
            polymers,
            entries: Vec::new(),
            offsets: vec![0],
            ursell: Vec::new(),
            sizes: Vec::new(),
        };
        for local in locals {
            let local = local?;
            for len in local.lens {
                let last = *table.offsets.last().expect("offsets start at 0");
                table.offsets.push(last + len);
            }
            table.entries.extend(local.entries);
            table.ursell.extend(local.ursell);
            table.sizes.extend(local.sizes);
        }
        Ok(table)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn polymers(&self) -> &[Polymer] {
        &self.polymers
    }

    pub fn len(&self) -> usize {
        self.ursell.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ursell.is_empty()
    }

    pub fn get(&self, c: usize) -> ClusterView<'_> {
        ClusterView {
            polymers: &self.entries[self.offsets[c]..self.offsets[c + 1]],
            total_size: self.sizes[c] as usize,
            ursell: self.ursell[c],
        }
    }

    /// `S_t = Σ ursell(Γ) Π w_γ` over clusters of total size exactly `t`,
    /// for `t = 0..=depth` (with `S_0 = 0`), summed in table order.
    pub fn partial_sums(&self, log_weights: &[f64]) -> Vec<f64> {
        assert_eq!(log_weights.len(), self.polymers.len());
        let mut sums = vec![0.0; self.depth + 1];
        for c in 0..self.len() {
            let log_product: f64 = self.entries[self.offsets[c]..self.offsets[c + 1]]
                .iter()
                .map(|&(p, mult)| mult as f64 * log_weights[p as usize])
                .sum();
            sums[self.sizes[c] as usize] += self.ursell[c] * log_product.exp();
        }
        sums
    }
}

struct Walk<'a> {
    adj: &'a [Vec<u32>],
    sizes: &'a [usize],
    depth: usize,
    root: usize,
    // number of chosen polymers equal or incompatible to each polymer
    blocked: &'a mut Vec<u32>,
    out: &'a mut Local,
    total: &'a AtomicU64,
    limit: u64,
    cache: &'a mut HashMap<Vec<u64>, Vec<(Vec<u8>, usize, f64)>>,
}

impl Walk<'_> {
    fn start(&mut self) -> Result<()> {
        let r = self.root;
        if self.sizes[r] > self.depth {
            return Ok(());
        }
        self.mark(r, 1);
        let ext: Vec<u32> = self.adj[r].iter().copied().filter(|&j| j as usize > r).collect();
        let mut support = vec![r as u32];
        let res = self.extend(&mut support, self.sizes[r], ext);
        self.mark(r, u32::MAX);
        res
    }

    fn mark(&mut self, i: usize, delta: u32) {
        self.blocked[i] = self.blocked[i].wrapping_add(delta);
        for &j in &self.adj[i] {
            self.blocked[j as usize] = self.blocked[j as usize].wrapping_add(delta);
        }
    }

    fn extend(&mut self, support: &mut Vec<u32>, used: usize, mut ext: Vec<u32>) -> Result<()> {
        self.emit(support)?;
        while let Some(w) = ext.pop() {
            let w = w as usize;
            if used + self.sizes[w] > self.depth {
                continue;
            }
            let fresh: Vec<u32> = self.adj[w]
                .iter()
                .copied()
                .filter(|&x| x as usize > self.root && self.blocked[x as usize] == 0)
                .collect();
            self.mark(w, 1);
            support.push(w as u32);
            let mut next = ext.clone();
            next.extend(fresh);
            let res = self.extend(support, used + self.sizes[w], next);
            support.pop();
            self.mark(w, u32::MAX);
            res?;
        }
        Ok(())
    }

    /// Records every multiplicity assignment on `support` within the depth.
    fn emit(&mut self, support: &[u32]) -> Result<()> {
        let k = support.len();
        // key: incompatibility rows, then sizes
        let mut key = Vec::with_capacity(2 * k);
        for a in 0..k {
            let row = (0..k)
                .filter(|&b| a != b && self.adj[support[a] as usize].binary_search(&support[b]).is_ok())
                .fold(0u64, |acc, b| acc | 1 << b);
            key.push(row);
        }
        key.extend(support.iter().map(|&p| self.sizes[p as usize] as u64));
        let depth = self.depth;
        let coefficients = self
            .cache
            .entry(key)
            .or_insert_with_key(|key| support_coefficients(&key[..k], &key[k..], depth));
        let n = self.total.fetch_add(coefficients.len() as u64, Ordering::Relaxed) + coefficients.len() as u64;
        if n > self.limit {
            return Err(Error::Budget { what: "clusters", needed: n as f64, limit: self.limit as f64 });
        }
        for (mult, size, phi) in coefficients.iter() {
            self.out.entries.extend(support.iter().zip(mult).map(|(&p, &m)| (p, m)));
            self.out.lens.push(k);
            self.out.ursell.push(*phi);
            self.out.sizes.push(*size as u8);
        }
        Ok(())
    }
}

/// Ursell coefficients of every multiset on a fixed support: all vectors
/// `a ≥ 1` with `Σ a_i s_i ≤ depth`, in mixed-radix order.
///
/// Same recursion as [`ursell`], but `G(a - b)` vanishes unless `a - b` is
/// the indicator of an independent set `R`, so only those are visited, with
/// coefficient `Π_{i∈R} (a_i - [i = j])`.
pub(crate) fn support_coefficients(rows: &[u64], sizes: &[u64], depth: usize) -> Vec<(Vec<u8>, usize, f64)> {
    let k = rows.len();
    let sizes: Vec<usize> = sizes.iter().map(|&s| s as usize).collect();
    let used: usize = sizes.iter().sum();
    let radix: Vec<usize> = sizes.iter().map(|&s| (depth - (used - s)) / s + 1).collect();
    let mut stride = vec![1usize; k];
    for i in 1..k {
        stride[i] = stride[i - 1] * radix[i - 1];
    }
    let total = stride[k - 1] * radix[k - 1];
    let mut c = vec![0.0f64; total];
    let mut a = vec![0usize; k];
    let mut weight = 0;
    let mut out = Vec::new();
    for idx in 1..total {
        // advance a to idx
        let mut i = 0;
        while a[i] + 1 == radix[i] {
            weight -= a[i] * sizes[i];
            a[i] = 0;
            i += 1;
        }
        a[i] += 1;
        weight += sizes[i];
        if weight > depth {
            continue;
        }
        let supp = (0..k).filter(|&i| a[i] > 0).fold(0u64, |acc, i| acc | 1 << i);
        let j0 = supp.trailing_zeros() as usize;
        let independent = a.iter().all(|&x| x <= 1) && (0..k).all(|i| a[i] == 0 || rows[i] & supp == 0);
        let mut value = if independent { 1.0 } else { 0.0 };
        // nonempty independent R ⊆ supp
        let mut stack: Vec<(u64, u64, usize, f64)> = vec![(supp, 0, idx, 1.0)];
        while let Some((cands, chosen, at, factor)) = stack.pop() {
            if cands == 0 {
                if chosen != 0 {
                    value -= factor * c[at];
                }
                continue;
            }
            let i = cands.trailing_zeros() as usize;
            let rest = cands & !(1 << i);
            stack.push((rest, chosen, at, factor));
            let f = (a[i] - usize::from(i == j0)) as f64;
            if f != 0.0 {
                stack.push((rest & !rows[i], chosen | 1 << i, at - stride[i], factor * f));
            }
        }
        c[idx] = value;
        if a.iter().all(|&x| x > 0) {
            let factorials: f64 = a.iter().map(|&m| (1..=m).map(|x| x as f64).product::<f64>()).product();
            out.push((a.iter().map(|&m| m as u8).collect(), weight, value / factorials));
        }
    }
    out
}

/// Ursell coefficient of the multiset taking `mult[i]` copies of polymer
/// `i`, where `inc` is the incompatibility relation between distinct
/// polymers (copies of one polymer are always incompatible).
///
/// Writes `C(a)` for the signed count `Σ (-1)^{|A|}` over connected spanning
/// edge sets of the incompatibility graph on a labelled multiset with
/// multiplicity vector `a`, and `G(a) ∈ {0, 1}` for the same sum without
/// connectivity, which is 1 exactly when the multiset is an independent set.
/// Splitting off the component of the first labelled vertex gives
/// `G(a) = Σ_b binom(a - e_j, b - e_j) C(b) G(a - b)`.
pub fn ursell(inc: &[Vec<bool>], mult: &[usize]) -> f64 {
    let k = mult.len();
    let radix: Vec<usize> = mult.iter().map(|m| m + 1).collect();
    let total: usize = radix.iter().product();
    let decode = |mut idx: usize| -> Vec<usize> {
        let mut v = vec![0; k];
        for i in 0..k {
            v[i] = idx % radix[i];
            idx /= radix[i];
        }
        v
    };
    let encode = |v: &[usize]| -> usize { v.iter().zip(&radix).rev().fold(0, |acc, (&x, &r)| acc * r + x) };
    let independent = |v: &[usize]| -> bool {
        v.iter().all(|&x| x <= 1)
            && (0..k).all(|i| v[i] == 0 || (i + 1..k).all(|j| v[j] == 0 || !inc[i][j]))
    };
    let g: Vec<bool> = (0..total).map(|idx| independent(&decode(idx))).collect();
    let mut c = vec![0.0f64; total];
    for idx in 1..total {
        let a = decode(idx);
        let j0 = a.iter().position(|&x| x > 0).expect("nonzero vector");
        let mut value = if g[idx] { 1.0 } else { 0.0 };
        let mut b = vec![0usize; k];
        b[j0] = 1;
        loop {
            if b != a {
                let rest: Vec<usize> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
                if g[encode(&rest)] {
                    let mut coeff = 1.0;
                    for i in 0..k {
                        let (n, r) = if i == j0 { (a[i] - 1, b[i] - 1) } else { (a[i], b[i]) };
                        coeff *= binomial(n, r);
                    }
                    value -= coeff * c[encode(&b)];
                }
            }
            // next b ≤ a with b[j0] ≥ 1
            let mut i = 0;
            loop {
                if i == k {
                    break;
                }
                let low = if i == j0 { 1 } else { 0 };
                if b[i] < a[i] {
                    b[i] += 1;
                    break;
                }
                b[i] = low;
                i += 1;
            }
            if i == k {
                break;
            }
        }
        c[idx] = value;
    }
    let factorials: f64 = mult.iter().map(|&m| (1..=m).map(|x| x as f64).product::<f64>()).product();
    c[total - 1] / factorials
}

fn binomial(n: usize, r: usize) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `log w_γ` for each polymer under the ground state `psi`.
pub fn polymer_log_weights(
    g: &Graph,
    parts: &Parts,
    psi: &[usize],
    q: usize,
    beta: f64,
    polymers: &[Polymer],
    budgets: &Budgets,
) -> Result<Vec<f64>> {
    polymers
        .iter()
        .map(|p| polymer_log_weight(g, parts, psi, &p.vertices, q, beta, budgets))
        .collect()
}

/// Truncated cluster expansion of `log Ξ^ψ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct XiEstimate {
    pub approx: LogApprox,
    pub depth: usize,
    pub clusters: usize,
    /// Contribution of clusters of each total size `0..=depth`.
    pub partial_sums: Vec<f64>,
}

impl XiEstimate {
    /// The truncation at a smaller depth.
    pub fn at_depth(&self, depth: usize) -> f64 {
        self.partial_sums[..=depth.min(self.depth)].iter().sum()
    }
}

pub(crate) fn evaluate(table: &ClusterTable, log_weights: &[f64], eps: f64) -> XiEstimate {
    let partial_sums = table.partial_sums(log_weights);
    XiEstimate {
        approx: LogApprox { log_value: partial_sums.iter().sum(), eps_bound: eps },
        depth: table.depth(),
        clusters: table.len(),
        partial_sums,
    }
}

/// Relative `ξ`-approximation of `Ξ^ψ` from clusters of total size at most
/// `⌈log(2n/ξ)⌉`. Refuses unless the Kotecký–Preiss test passes for `α`.
#[allow(clippy::too_many_arguments)]
pub fn truncated_log_xi(
    g: &Graph,
    parts: &Parts,
    psi: &[usize],
    q: usize,
    beta: f64,
    xi: f64,
    alpha: f64,
    budgets: &Budgets,
) -> Result<XiEstimate> {
    check_ground_state(g, parts, psi, q)?;
    if !(xi > 0.0) {
        return Err(Error::Precondition(format!("xi = {xi} must be positive")));
    }
    require_kp(&PottsInstance::new(g, q, beta)?, alpha)?;
    let table = ClusterTable::build(g, parts, truncation_depth(g.n(), xi), budgets)?;
    let weights = polymer_log_weights(g, parts, psi, q, beta, table.polymers(), budgets)?;
    Ok(evaluate(&table, &weights, xi))
}

/// The per-size sums `S_0..S_depth` of the same series, with no
/// convergence check. For inspecting the expansion outside the regime where
/// it is guaranteed.
pub fn cluster_series(
    g: &Graph,
    parts: &Parts,
    psi: &[usize],
    q: usize,
    beta: f64,
    depth: usize,
    budgets: &Budgets,
) -> Result<Vec<f64>> {
    check_ground_state(g, parts, psi, q)?;
    let table = ClusterTable::build(g, parts, depth, budgets)?;
    let weights = polymer_log_weights(g, parts, psi, q, beta, table.polymers(), budgets)?;
    Ok(table.partial_sums(&weights))
}
