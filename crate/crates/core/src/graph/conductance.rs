use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use serde::Serialize;

/// Conductance `|∂S| / vol(S)` of a vertex set, kept as the exact pair of
/// integers so comparisons never depend on floating-point rounding.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Conductance {
    pub boundary: u64,
    pub volume: u64,
}

impl Conductance {
    /// Panics if `volume == 0`.
    pub fn new(boundary: u64, volume: u64) -> Self {
        assert!(volume > 0, "conductance of a zero-volume set is undefined");
        Self { boundary, volume }
    }

    pub fn zero() -> Self {
        Self { boundary: 0, volume: 1 }
    }

    pub fn value(&self) -> f64 {
        self.boundary as f64 / self.volume as f64
    }

    pub fn ratio(&self) -> Ratio<i64> {
        Ratio::new(self.boundary as i64, self.volume as i64)
    }

    /// `self <= t` for a real threshold, evaluated as `boundary <= t * volume`.
    pub fn le_f64(&self, t: f64) -> bool {
        (self.boundary as f64) <= t * self.volume as f64
    }

    /// `self < t` for a real threshold.
    pub fn lt_f64(&self, t: f64) -> bool {
        (self.boundary as f64) < t * self.volume as f64
    }
}

impl PartialEq for Conductance {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Conductance {}

impl PartialOrd for Conductance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Conductance {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.boundary as u128 * other.volume as u128;
        let rhs = other.boundary as u128 * self.volume as u128;
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for Conductance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.boundary, self.volume)
    }
}
