//! Log-space arithmetic for partition functions whose values overflow `f64`.

use serde::Serialize;

/// `log(e^a + e^b)`.
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `log Σ e^{x_i}`; `-∞` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let mut acc = LogSum::new();
    for &x in xs {
        acc.add(x);
    }
    acc.value()
}

/// `log Σ_j counts[j]·e^{β j}` for an integer histogram of exponents.
pub fn log_histogram(counts: &[u128], beta: f64) -> f64 {
    let mut acc = LogSum::new();
    for (j, &c) in counts.iter().enumerate() {
        if c > 0 {
            acc.add((c as f64).ln() + beta * j as f64);
        }
    }
    acc.value()
}

/// Streaming log-sum-exp. The result depends on insertion order only
/// through rounding, so callers that need reproducibility feed terms in a
/// fixed order.
#[derive(Clone, Copy, Debug)]
pub struct LogSum {
    max: f64,
    // Σ e^{x_i - max}
    scaled: f64,
}

impl Default for LogSum {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSum {
    pub fn new() -> Self {
        Self { max: f64::NEG_INFINITY, scaled: 0.0 }
    }

    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.scaled += (x - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub fn merge(&mut self, other: &LogSum) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if other.max <= self.max {
            self.scaled += other.scaled * (other.max - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - other.max).exp() + other.scaled;
            self.max = other.max;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

/// A partition-function estimate `ẑ = e^{log_value}` with a guarantee
/// `e^{-eps_bound} ≤ z/ẑ ≤ e^{eps_bound}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LogApprox {
    pub log_value: f64,
    pub eps_bound: f64,
}

impl LogApprox {
    pub fn exact(log_value: f64) -> Self {
        Self { log_value, eps_bound: 0.0 }
    }

    /// Whether `log_exact` lies within the guaranteed band.
    pub fn covers(&self, log_exact: f64) -> bool {
        (self.log_value - log_exact).abs() <= self.eps_bound
    }
}
