use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::budget::Budgets;
use crate::error::{check_budget, Error, Result};
use crate::graph::{Graph, Parts};
use crate::logspace::log_histogram;

/// Enumerations smaller than this run on the calling thread.
const PARALLEL_THRESHOLD: f64 = 65_536.0;
/// Number of leading work units when parallel; independent of the pool size.
const MIN_CHUNKS: usize = 256;

/// Visits every colouring of `free` (all other vertices keep their colour in
/// `colours`, free ones must start at 0) in reflected mixed-radix Gray order,
/// so consecutive states differ in one vertex and the monochromatic edge
/// count is updated in `O(deg)`.
fn gray_walk(
    g: &Graph,
    q: usize,
    colours: &mut [u8],
    free: &[usize],
    mut visit: impl FnMut(&[u8], usize),
) {
    let mut mono = g.edges().filter(|&(u, v)| colours[u] == colours[v]).count();
    let t = free.len();
    let mut focus: Vec<usize> = (0..=t).collect();
    let mut up = vec![true; t];
    loop {
        visit(colours, mono);
        let j = focus[0];
        focus[0] = 0;
        if j == t {
            return;
        }
        let v = free[j];
        let old = colours[v];
        let new = if up[j] { old + 1 } else { old - 1 };
        for &w in g.neighbors(v) {
            if colours[w] == old {
                mono -= 1;
            } else if colours[w] == new {
                mono += 1;
            }
        }
        colours[v] = new;
        if new == 0 || new as usize == q - 1 {
            up[j] = !up[j];
            focus[j] = focus[j + 1];
            focus[j + 1] = j + 1;
        }
    }
}

/// Folds `visit` over all `q^n` colourings. Large enumerations are split on
/// the colours of the last few vertices; partial results are merged in chunk
/// order, so the outcome does not depend on the number of worker threads.
pub(crate) fn fold_states<T, I, V, M>(
    g: &Graph,
    q: usize,
    budgets: &Budgets,
    init: I,
    visit: V,
    merge: M,
) -> Result<T>
where
    T: Send,
    I: Fn() -> T + Sync,
    V: Fn(&mut T, &[u8], usize) + Sync,
    M: Fn(&mut T, T),
{
    if q < 2 || q > u8::MAX as usize {
        return Err(Error::Precondition(format!("q = {q} must lie in 2..=255")));
    }
    let n = g.n();
    let total = (q as f64).powi(n as i32);
    check_budget("colourings q^n", total, budgets.colourings)?;

    let mut split = 0;
    if total >= PARALLEL_THRESHOLD {
        while split < n && q.pow(split as u32) < MIN_CHUNKS {
            split += 1;
        }
    }
    let free: Vec<usize> = (0..n - split).collect();
    let chunks = q.pow(split as u32);
    let run = |chunk: usize| {
        let mut colours = vec![0u8; n];
        let mut c = chunk;
        for v in (n - split..n).rev() {
            colours[v] = (c % q) as u8;
            c /= q;
        }
        let mut acc = init();
        gray_walk(g, q, &mut colours, &free, |s, mono| visit(&mut acc, s, mono));
        acc
    };
    let parts: Vec<T> = if chunks > 1 {
        (0..chunks).into_par_iter().map(run).collect()
    } else {
        vec![run(0)]
    };
    let mut it = parts.into_iter();
    let mut acc = it.next().expect("at least one chunk");
    for p in it {
        merge(&mut acc, p);
    }
    Ok(acc)
}

fn add_hist(a: &mut Vec<u128>, b: Vec<u128>) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

/// Number of colourings with exactly `j` monochromatic edges, for `j = 0..=m`.
pub fn monochromatic_histogram(g: &Graph, q: usize, budgets: &Budgets) -> Result<Vec<u128>> {
    let m = g.m();
    fold_states(
        g,
        q,
        budgets,
        || vec![0u128; m + 1],
        |h, _, mono| h[mono] += 1,
        add_hist,
    )
}

/// `log Z` by full enumeration of `[q]^V`.
pub fn exact_log_z(g: &Graph, q: usize, beta: f64, budgets: &Budgets) -> Result<f64> {
    Ok(log_histogram(&monochromatic_histogram(g, q, budgets)?, beta))
}

/// Index of the ground state a colouring is close to, if any. Ground states
/// are indexed in mixed radix with part 0 as the most significant digit.
pub(crate) fn close_ground_state(parts: &Parts, q: usize, colours: &[u8], counts: &mut [usize]) -> Option<usize> {
    counts.iter_mut().for_each(|c| *c = 0);
    for (v, &c) in colours.iter().enumerate() {
        counts[parts.part_of(v) * q + c as usize] += 1;
    }
    let mut index = 0;
    for (i, p) in parts.sets().iter().enumerate() {
        let major = (0..q).find(|&c| 2 * counts[i * q + c] > p.len())?;
        index = index * q + major;
    }
    Some(index)
}

/// Histograms of the states close to each ground state, keyed by ground-state index.
pub fn close_state_histograms(
    g: &Graph,
    parts: &Parts,
    q: usize,
    budgets: &Budgets,
) -> Result<BTreeMap<usize, Vec<u128>>> {
    check_parts(g, parts)?;
    let m = g.m();
    let slots = parts.len() * q;
    fold_states(
        g,
        q,
        budgets,
        || (BTreeMap::new(), vec![0usize; slots]),
        |(map, counts): &mut (BTreeMap<usize, Vec<u128>>, Vec<usize>), s, mono| {
            if let Some(psi) = close_ground_state(parts, q, s, counts) {
                map.entry(psi).or_insert_with(|| vec![0u128; m + 1])[mono] += 1;
            }
        },
        |a, b| {
            for (k, h) in b.0 {
                match a.0.get_mut(&k) {
                    Some(x) => add_hist(x, h),
                    None => {
                        a.0.insert(k, h);
                    }
                }
            }
        },
    )
    .map(|(map, _)| map)
}

pub(crate) fn ground_state_index(psi: &[usize], q: usize) -> usize {
    psi.iter().fold(0, |acc, &c| acc * q + c)
}

/// `log Z*`: states close to some ground state.
pub fn exact_log_z_star(g: &Graph, parts: &Parts, q: usize, beta: f64, budgets: &Budgets) -> Result<f64> {
    let map = close_state_histograms(g, parts, q, budgets)?;
    let mut total = vec![0u128; g.m() + 1];
    for h in map.into_values() {
        add_hist(&mut total, h);
    }
    Ok(log_histogram(&total, beta))
}

/// `log Z^ψ`: states close to the ground state `psi` (one colour per part).
pub fn exact_log_z_psi(
    g: &Graph,
    parts: &Parts,
    psi: &[usize],
    q: usize,
    beta: f64,
    budgets: &Budgets,
) -> Result<f64> {
    check_ground_state(parts, psi, q)?;
    let map = close_state_histograms(g, parts, q, budgets)?;
    Ok(match map.get(&ground_state_index(psi, q)) {
        Some(h) => log_histogram(h, beta),
        None => f64::NEG_INFINITY,
    })
}

/// `log Σ e^{β m(ω)}` over the states whose disagreement set `U` with `psi`
/// is sparse, the state-side form of `e^{β m(ψ)}·Ξ^ψ`.
///
/// With `discount_cross` each state is instead weighted by
/// `e^{β (m(ω) - c(U))}`, where `c(U)` counts edges meeting `U` that are
/// bichromatic under `psi`. Polymer weights built from `|∇γ|` charge those
/// edges as if they were monochromatic under `psi`, so this discounted sum is
/// the one they reproduce exactly; `c(U) = 0` whenever `psi` is constant.
pub fn exact_log_sparse_sum(
    g: &Graph,
    parts: &Parts,
    psi: &[usize],
    q: usize,
    beta: f64,
    discount_cross: bool,
    budgets: &Budgets,
) -> Result<f64> {
    check_parts(g, parts)?;
    check_ground_state(parts, psi, q)?;
    let m = g.m();
    let n = g.n();
    let ground: Vec<u8> = (0..n).map(|v| psi[parts.part_of(v)] as u8).collect();
    let cross: Vec<(usize, usize)> = g.edges().filter(|&(u, v)| ground[u] != ground[v]).collect();
    // shifted by m so that a discounted exponent never goes negative
    let hist = fold_states(
        g,
        q,
        budgets,
        || vec![0u128; 2 * m + 1],
        |h, s, mono| {
            let in_u: Vec<bool> = (0..n).map(|v| s[v] != ground[v]).collect();
            if is_sparse_mask(g, parts, &in_u) {
                let c = if discount_cross {
                    cross.iter().filter(|&&(u, v)| in_u[u] || in_u[v]).count()
                } else {
                    0
                };
                h[m + mono - c] += 1;
            }
        },
        add_hist,
    )?;
    Ok(log_histogram(&hist, beta) - beta * m as f64)
}

/// Every connected component of `G[U]` is small.
pub(crate) fn is_sparse_mask(g: &Graph, parts: &Parts, in_u: &[bool]) -> bool {
    let n = g.n();
    let mut seen = vec![false; n];
    let mut comp = vec![false; n];
    for root in 0..n {
        if !in_u[root] || seen[root] {
            continue;
        }
        let mut members = vec![root];
        seen[root] = true;
        let mut i = 0;
        while i < members.len() {
            let u = members[i];
            i += 1;
            for &w in g.neighbors(u) {
                if in_u[w] && !seen[w] {
                    seen[w] = true;
                    members.push(w);
                }
            }
        }
        members.iter().for_each(|&v| comp[v] = true);
        let small = parts.is_small_mask(&comp);
        members.iter().for_each(|&v| comp[v] = false);
        if !small {
            return false;
        }
    }
    true
}

pub(crate) fn check_parts(g: &Graph, parts: &Parts) -> Result<()> {
    if parts.n() != g.n() {
        return Err(Error::NotAPartition(format!(
            "partition covers {} vertices, graph has {}",
            parts.n(),
            g.n()
        )));
    }
    Ok(())
}

pub(crate) fn check_ground_state(parts: &Parts, psi: &[usize], q: usize) -> Result<()> {
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
