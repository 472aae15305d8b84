use serde::Serialize;

use super::VertexSet;

/// A partition `P_1, ..., P_ℓ` of `0..n` into nonempty parts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Parts {
    sets: Vec<VertexSet>,
    #[serde(skip)]
    part_of: Vec<usize>,
}

impl Parts {
    pub fn new(n: usize, sets: Vec<VertexSet>) -> Result<Self, String> {
        let mut part_of = vec![usize::MAX; n];
        for (i, s) in sets.iter().enumerate() {
            if s.is_empty() {
                return Err(format!("part {i} is empty"));
            }
            for v in s.iter() {
                if v >= n {
                    return Err(format!("vertex {v} out of range"));
                }
                if part_of[v] != usize::MAX {
                    return Err(format!("vertex {v} lies in parts {} and {i}", part_of[v]));
                }
                part_of[v] = i;
            }
        }
        if let Some(v) = part_of.iter().position(|&p| p == usize::MAX) {
            return Err(format!("vertex {v} is not covered"));
        }
        Ok(Self { sets, part_of })
    }

    pub fn trivial(n: usize) -> Self {
        Self { sets: vec![VertexSet::full(n)], part_of: vec![0; n] }
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn n(&self) -> usize {
        self.part_of.len()
    }

    pub fn sets(&self) -> &[VertexSet] {
        &self.sets
    }

    pub fn part(&self, i: usize) -> &VertexSet {
        &self.sets[i]
    }

    pub fn part_of(&self, v: usize) -> usize {
        self.part_of[v]
    }

    pub fn part_sizes(&self) -> Vec<usize> {
        self.sets.iter().map(VertexSet::len).collect()
    }

    /// `|U ∩ P_i| ≤ |P_i|/2` for every part.
    pub fn is_small_mask(&self, in_u: &[bool]) -> bool {
        let mut count = vec![0usize; self.len()];
        for (v, &inside) in in_u.iter().enumerate() {
            if inside {
                count[self.part_of[v]] += 1;
            }
        }
        count.iter().zip(&self.sets).all(|(&c, p)| 2 * c <= p.len())
    }

    pub fn is_small(&self, u: &VertexSet) -> bool {
        self.is_small_mask(&u.mask(self.n()))
    }
}
