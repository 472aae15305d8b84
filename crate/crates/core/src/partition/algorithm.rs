use std::collections::HashMap;

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Conductance, Graph, GraphError, Spectrum, VertexSet, SPECTRAL_ZERO_TOL};

use super::sweep::{phi_after_vertex_removal, sweep_cut, SweepCut};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PartitionParams {
    pub k: usize,
    /// The unspecified universal constant scaling `ρ*` and `φ_out`.
    #[serde(rename = "C")]
    pub c: f64,
    /// Multiplier `c` of the main-loop budget `c·k·n·m`.
    #[serde(skip)]
    pub iteration_factor: u64,
}

impl PartitionParams {
    pub fn new(k: usize) -> Self {
        Self { k, c: 1.0, iteration_factor: 10 }
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }
}

/// Thresholds derived from `λ_{k-1}` and `λ_k` of the input graph.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Constants {
    pub rho_star: f64,
    pub phi_in: f64,
    pub phi_out: f64,
    pub tau: f64,
}

impl Constants {
    /// `lambda_k_minus_1` and `lambda_k` are expected already clamped at zero.
    pub fn new(k: usize, c: f64, lambda_k_minus_1: f64, lambda_k: f64) -> Self {
        let kf = k as f64;
        let root = lambda_k_minus_1.sqrt();
        Self {
            rho_star: (lambda_k / 10.0).min(30.0 * c * kf.powi(5) * root),
            phi_in: lambda_k / (140.0 * kf * kf),
            phi_out: 90.0 * c * kf.powi(6) * root,
            tau: 1.0 / (5.0 * (kf - 1.0)),
        }
    }
}

/// How often each branch of the main loop and each repair step fired.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IterationCounts {
    pub main: u64,
    pub budget: u64,
    /// A core was split in two, creating a new part.
    pub core_splits: u64,
    /// A core shrank to one side of the cut.
    pub core_shrinks: u64,
    /// The periphery side of the cut became a new part.
    pub periphery_splits: u64,
    /// A whole periphery joined the part whose core attracts it more.
    pub periphery_merges: u64,
    /// The periphery side of the cut joined the part it is most attached to.
    pub periphery_moves: u64,
    /// Iterations triggered by the attraction test rather than a sparse cut.
    pub attraction_merges: u64,
    pub core_removals: u64,
    /// Core removals for which the closed form reported a conductance increase.
    pub core_removals_raising_conductance: u64,
    pub vertex_moves: u64,
}

/// Degree of a vertex inside its part relative to its degree in `G`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DegreeRatio {
    pub vertex: usize,
    pub inside: u64,
    pub degree: u64,
}

impl DegreeRatio {
    pub fn value(&self) -> f64 {
        self.inside as f64 / self.degree as f64
    }

    pub fn ratio(&self) -> Ratio<i64> {
        Ratio::new(self.inside as i64, self.degree as i64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PartCertificate {
    pub size: usize,
    /// Best sweep cut of `G[P_i]`; its conductance `φ_s` gives `φ(G[P_i]) ≥ φ_s²/4`.
    pub sweep: SweepCut,
    pub inner_lower_bound: f64,
    /// `φ_G(P_i)`.
    pub outer: Conductance,
    pub min_degree: DegreeRatio,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExpanderPartition {
    pub k: usize,
    #[serde(rename = "C")]
    pub c: f64,
    /// `λ_1, ..., λ_k` of the input graph.
    pub lambda: Vec<f64>,
    pub constants: Constants,
    pub parts: Vec<VertexSet>,
    pub cores: Vec<VertexSet>,
    pub certificates: Vec<PartCertificate>,
    pub iterations: IterationCounts,
}

impl ExpanderPartition {
    pub fn ell(&self) -> usize {
        self.parts.len()
    }
}

/// Partitions `V` into fewer than `k` parts whose induced subgraphs are
/// expanders, with every vertex keeping a `τ` fraction of its degree inside
/// its own part. Requires `λ_k > 0`.
pub fn partition_into_expanders(g: &Graph, params: &PartitionParams) -> Result<ExpanderPartition> {
    let n = g.n();
    let k = params.k;
    if k < 2 {
        return Err(Error::Precondition(format!("k = {k} must be at least 2")));
    }
    if k > n {
        return Err(Error::Precondition(format!("k = {k} exceeds n = {n}")));
    }
    if !(params.c > 0.0) {
        return Err(Error::Precondition(format!("C = {} must be positive", params.c)));
    }
    let spectrum = Spectrum::of(g)?;
    let lambda: Vec<f64> = (1..=k).map(|i| spectrum.lambda(i)).collect();
    if lambda[k - 1] <= SPECTRAL_ZERO_TOL {
        return Err(Error::LambdaNotPositive { k, value: spectrum.eigenvalues[k - 1] });
    }
    let constants = Constants::new(k, params.c, lambda[k - 2], lambda[k - 1]);
    let budget = params.iteration_factor * (k * n * g.m()) as u64;

    let mut state = State {
        g,
        k,
        constants,
        part_of: vec![0; n],
        in_core: vec![true; n],
        ell: 1,
        sweeps: HashMap::new(),
        counts: IterationCounts { budget, ..Default::default() },
    };
    state.run()?;
    state.finish(lambda, params.c)
}

enum Trigger {
    Attraction { i: usize, j: usize },
    Cut { i: usize, s: Vec<bool> },
}

struct State<'a> {
    g: &'a Graph,
    k: usize,
    constants: Constants,
    part_of: Vec<usize>,
    in_core: Vec<bool>,
    ell: usize,
    sweeps: HashMap<Vec<usize>, SweepCut>,
    counts: IterationCounts,
}

impl State<'_> {
    fn members(&self, i: usize) -> Vec<usize> {
        (0..self.g.n()).filter(|&v| self.part_of[v] == i).collect()
    }

    fn part_mask(&self, i: usize) -> Vec<bool> {
        self.part_of.iter().map(|&p| p == i).collect()
    }

    fn core_mask(&self, i: usize) -> Vec<bool> {
        (0..self.g.n()).map(|v| self.part_of[v] == i && self.in_core[v]).collect()
    }

    fn periphery_mask(&self, i: usize) -> Vec<bool> {
        (0..self.g.n()).map(|v| self.part_of[v] == i && !self.in_core[v]).collect()
    }

    fn volume(&self, s: &[bool]) -> u64 {
        (0..self.g.n()).filter(|&v| s[v]).map(|v| self.g.degree(v) as u64).sum()
    }

    /// `e(S, T)` where `T` is given by a predicate.
    fn e(&self, s: &[bool], t: impl Fn(usize) -> bool) -> u64 {
        let mut count = 0;
        for u in (0..self.g.n()).filter(|&u| s[u]) {
            count += self.g.neighbors(u).iter().filter(|&&v| !s[v] && t(v)).count() as u64;
        }
        count
    }

    fn conductance(&self, s: &[bool]) -> Option<Conductance> {
        let vol = self.volume(s);
        (vol > 0).then(|| Conductance::new(self.g.boundary_mask(s), vol))
    }

    /// Index of the other part maximising `score`, smallest index on ties.
    fn argmax_other(&self, i: usize, score: impl Fn(usize) -> u64) -> (usize, u64) {
        let mut best = (usize::MAX, 0);
        for j in (0..self.ell).filter(|&j| j != i) {
            let s = score(j);
            if best.0 == usize::MAX || s > best.1 {
                best = (j, s);
            }
        }
        best
    }

    fn sweep(&mut self, i: usize) -> Result<SweepCut> {
        let members = self.members(i);
        if let Some(cut) = self.sweeps.get(&members) {
            return Ok(cut.clone());
        }
        let set = VertexSet::from(members.clone());
        let (sub, map) = self.g.induced_subgraph(&set, true)?;
        let local = sweep_cut(&sub).map_err(|e| match e {
            GraphError::IsolatedVertex(v) => Error::InvariantViolated(format!(
                "vertex {} is isolated inside its part",
                map[v]
            )),
            GraphError::TooFewVertices { .. } => {
                Error::InvariantViolated(format!("part {i} has a single vertex"))
            }
            other => Error::Graph(other),
        })?;
        let cut = SweepCut {
            set: local.set.iter().map(|v| map[v]).collect(),
            conductance: local.conductance,
            lambda2: local.lambda2,
        };
        self.sweeps.insert(members, cut.clone());
        Ok(cut)
    }

    fn check_core_conductance(&self) {
        if cfg!(debug_assertions) {
            let bound = self.constants.rho_star * (1.0 + 1.0 / self.k as f64).powi(self.ell as i32);
            for i in 0..self.ell {
                let phi = self.conductance(&self.core_mask(i)).expect("cores are nonempty");
                debug_assert!(phi.le_f64(bound * (1.0 + 1e-12)), "core {i}: {phi} > {bound}");
            }
        }
    }

    fn find_trigger(&mut self) -> Result<Option<Trigger>> {
        for i in 0..self.ell {
            let t = self.periphery_mask(i);
            if t.iter().any(|&x| x) {
                let core = self.core_mask(i);
                let to_core = self.e(&t, |v| core[v]);
                let (j, best) = self.argmax_other(i, |j| self.e(&t, |v| self.part_of[v] == j));
                if j != usize::MAX && to_core < best {
                    return Ok(Some(Trigger::Attraction { i, j }));
                }
            }
            let cut = self.sweep(i)?;
            if cut.conductance.lt_f64(self.constants.phi_in) {
                return Ok(Some(Trigger::Cut { i, s: cut.set.mask(self.g.n()) }));
            }
        }
        Ok(None)
    }

    fn run(&mut self) -> Result<()> {
        loop {
            self.check_core_conductance();
            let Some(trigger) = self.find_trigger()? else {
                return Ok(());
            };
            self.counts.main += 1;
            if self.counts.main > self.counts.budget {
                return Err(Error::Budget {
                    what: "partition main-loop iterations",
                    needed: self.counts.main as f64,
                    limit: self.counts.budget as f64,
                });
            }
            match trigger {
                Trigger::Attraction { i, j } => {
                    for v in 0..self.g.n() {
                        if self.part_of[v] == i && !self.in_core[v] {
                            self.part_of[v] = j;
                        }
                    }
                    self.counts.attraction_merges += 1;
                }
                Trigger::Cut { i, s } => self.act_on_cut(i, s)?,
            }
            self.repair()?;
        }
    }

    fn new_part(&mut self, vertices: &[bool]) -> Result<()> {
        let l = self.ell;
        for v in 0..self.g.n() {
            if vertices[v] {
                self.part_of[v] = l;
                self.in_core[v] = true;
            }
        }
        self.ell += 1;
        if self.ell >= self.k {
            return Err(Error::InvariantViolated(format!(
                "number of parts reached k = {}",
                self.k
            )));
        }
        Ok(())
    }

    fn act_on_cut(&mut self, i: usize, mut s: Vec<bool>) -> Result<()> {
        let n = self.g.n();
        let part = self.part_mask(i);
        let core = self.core_mask(i);
        let vol_core = self.volume(&core);
        let s_core: Vec<bool> = (0..n).map(|v| s[v] && core[v]).collect();
        if 2 * self.volume(&s_core) > vol_core {
            for v in 0..n {
                s[v] = part[v] && !s[v];
            }
        }
        let s_b: Vec<bool> = (0..n).map(|v| s[v] && core[v]).collect();
        let sbar_b: Vec<bool> = (0..n).map(|v| !s[v] && core[v]).collect();
        let s_p: Vec<bool> = (0..n).map(|v| s[v] && part[v] && !core[v]).collect();
        let threshold =
            self.constants.rho_star * (1.0 + 1.0 / self.k as f64).powi(self.ell as i32 + 1);

        let phi_sb = self.conductance(&s_b);
        let phi_sbar = self.conductance(&sbar_b);
        if let (Some(a), Some(b)) = (phi_sb, phi_sbar) {
            if a.le_f64(threshold) && b.le_f64(threshold) {
                self.new_part(&sbar_b)?;
                self.counts.core_splits += 1;
                return Ok(());
            }
        }

        // φ(X, B) ≤ 1/(3k), cross-multiplied; a zero denominator counts as false
        let relative_small = |x: &[bool]| -> bool {
            let rest: Vec<bool> = (0..n).map(|v| core[v] && !x[v]).collect();
            let vol_rest = self.volume(&rest) as u128;
            let outside = self.e(x, |v| !core[v]) as u128;
            let inside = self.e(x, |v| core[v]) as u128;
            let den = vol_rest * outside;
            den > 0 && 3 * self.k as u128 * inside * vol_core as u128 <= den
        };
        if let (Some(a), Some(b)) = (phi_sb, phi_sbar) {
            if relative_small(&s_b) && relative_small(&sbar_b) {
                let drop = if a <= b { &sbar_b } else { &s_b };
                for v in 0..n {
                    if drop[v] {
                        self.in_core[v] = false;
                    }
                }
                self.counts.core_shrinks += 1;
                return Ok(());
            }
        }

        if let Some(phi) = self.conductance(&s_p) {
            if phi.le_f64(threshold) {
                self.new_part(&s_p)?;
                self.counts.periphery_splits += 1;
                return Ok(());
            }
        }

        let t = self.periphery_mask(i);
        if t.iter().any(|&x| x) {
            let to_own = self.e(&t, |v| part[v]);
            let (j, best) = self.argmax_other(i, |j| {
                self.e(&t, |v| self.part_of[v] == j && self.in_core[v])
            });
            if j != usize::MAX && to_own < best {
                for v in 0..n {
                    if t[v] {
                        self.part_of[v] = j;
                    }
                }
                self.counts.periphery_merges += 1;
                return Ok(());
            }
        }

        if s_p.iter().any(|&x| x) {
            let to_own = self.e(&s_p, |v| part[v]);
            let (j, best) = self.argmax_other(i, |j| self.e(&s_p, |v| self.part_of[v] == j));
            if j != usize::MAX && to_own < best {
                for v in 0..n {
                    if s_p[v] {
                        self.part_of[v] = j;
                    }
                }
                self.counts.periphery_moves += 1;
                return Ok(());
            }
        }

        Err(Error::InvariantViolated(format!(
            "sparse cut in part {i} triggered no branch of the main loop"
        )))
    }

    fn repair(&mut self) -> Result<()> {
        let n = self.g.n();
        loop {
            let mut changed = false;
            for v in 0..n {
                if !self.in_core[v] {
                    continue;
                }
                let i = self.part_of[v];
                let inside = self
                    .g
                    .neighbors(v)
                    .iter()
                    .filter(|&&w| self.in_core[w] && self.part_of[w] == i)
                    .count();
                if 5 * inside < self.g.degree(v) {
                    let core = VertexSet::from_mask(&self.core_mask(i));
                    if core.len() == 1 {
                        return Err(Error::InvariantViolated(format!("core {i} would become empty")));
                    }
                    let before = self.g.conductance(&core)?.ratio();
                    if phi_after_vertex_removal(self.g, &core, v)? > before {
                        self.counts.core_removals_raising_conductance += 1;
                    }
                    self.in_core[v] = false;
                    self.counts.core_removals += 1;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        let mut per_part = vec![0u64; self.ell];
        loop {
            let mut changed = false;
            for v in 0..n {
                if self.in_core[v] {
                    continue;
                }
                per_part.iter_mut().for_each(|c| *c = 0);
                for &w in self.g.neighbors(v) {
                    per_part[self.part_of[w]] += 1;
                }
                let i = self.part_of[v];
                let (j, best) = self.argmax_other(i, |j| per_part[j]);
                if j != usize::MAX && per_part[i] < best {
                    self.part_of[v] = j;
                    self.counts.vertex_moves += 1;
                    changed = true;
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    fn finish(mut self, lambda: Vec<f64>, c: f64) -> Result<ExpanderPartition> {
        let n = self.g.n();
        let mut parts = Vec::with_capacity(self.ell);
        let mut cores = Vec::with_capacity(self.ell);
        let mut certificates = Vec::with_capacity(self.ell);
        for i in 0..self.ell {
            let part = VertexSet::from(self.members(i));
            let core = VertexSet::from_mask(&self.core_mask(i));
            if core.is_empty() {
                return Err(Error::InvariantViolated(format!("core {i} is empty")));
            }
            let sweep = self.sweep(i)?;
            let mask = part.mask(n);
            let mut min_degree: Option<DegreeRatio> = None;
            for v in part.iter() {
                let inside = self.g.neighbors(v).iter().filter(|&&w| mask[w]).count() as u64;
                let r = DegreeRatio { vertex: v, inside, degree: self.g.degree(v) as u64 };
                if min_degree.is_none_or(|m| r.ratio() < m.ratio()) {
                    min_degree = Some(r);
                }
                // τ·deg(v) ≤ deg_{P_i}(v) with τ = 1/(5(k-1))
                if r.degree > 5 * (self.k as u64 - 1) * r.inside {
                    return Err(Error::InvariantViolated(format!(
                        "vertex {v} keeps {}/{} of its degree inside part {i}",
                        r.inside, r.degree
                    )));
                }
            }
            let phi_s = sweep.conductance.value();
            certificates.push(PartCertificate {
                size: part.len(),
                inner_lower_bound: phi_s * phi_s / 4.0,
                outer: self.g.conductance(&part)?,
                min_degree: min_degree.expect("parts are nonempty"),
                sweep,
            });
            parts.push(part);
            cores.push(core);
        }
        Ok(ExpanderPartition {
            k: self.k,
            c,
            lambda,
            constants: self.constants,
            parts,
            cores,
            certificates,
            iterations: std::mem::take(&mut self.counts),
        })
    }
}
