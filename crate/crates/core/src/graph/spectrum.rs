use serde::Serialize;

use super::{Graph, GraphError};

/// Eigenvalues at or below this are treated as zero.
pub const SPECTRAL_ZERO_TOL: f64 = 1e-10;

const OFF_DIAGONAL_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Full eigendecomposition of the normalised Laplacian `I - D^{-1/2} A D^{-1/2}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[i]` belongs to `eigenvalues[i]`; unit length, and the
    /// entry of largest magnitude (lowest index on ties) is positive.
    pub eigenvectors: Vec<Vec<f64>>,
}

impl Spectrum {
    pub fn of(g: &Graph) -> Result<Self, GraphError> {
        let n = g.n();
        if n == 0 {
            return Err(GraphError::EmptySet);
        }
        if let Some(v) = (0..n).find(|&v| g.degree(v) == 0) {
            return Err(GraphError::IsolatedVertex(v));
        }
        let inv_sqrt: Vec<f64> = (0..n).map(|v| 1.0 / (g.degree(v) as f64).sqrt()).collect();
        let mut a = vec![0.0; n * n];
        for u in 0..n {
            a[u * n + u] = 1.0;
            for &v in g.neighbors(u) {
                a[u * n + v] = -inv_sqrt[u] * inv_sqrt[v];
            }
        }
        let (eigenvalues, eigenvectors) = symmetric_eigen(n, a)?;
        Ok(Self { eigenvalues, eigenvectors })
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `λ_k` with 1-based `k`, clamped to zero below [`SPECTRAL_ZERO_TOL`].
    pub fn lambda(&self, k: usize) -> f64 {
        assert!(k >= 1 && k <= self.len(), "eigenvalue index {k} out of range");
        let v = self.eigenvalues[k - 1];
        if v <= SPECTRAL_ZERO_TOL {
            0.0
        } else {
            v
        }
    }

    /// Eigenvector of `λ_k`, 1-based.
    pub fn vector(&self, k: usize) -> &[f64] {
        &self.eigenvectors[k - 1]
    }
}

/// Cyclic Jacobi eigendecomposition of a dense symmetric `n × n` matrix
/// given row-major. Returns ascending eigenvalues and matching unit
/// eigenvectors with the sign convention documented on [`Spectrum`].
pub fn symmetric_eigen(n: usize, mut a: Vec<f64>) -> Result<(Vec<f64>, Vec<Vec<f64>>), GraphError> {
    assert_eq!(a.len(), n * n, "matrix must be n x n");
    // v is stored column-major so that column j is the j-th eigenvector
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    let mut off = off_norm(&a);
    while off > OFF_DIAGONAL_TOL {
        if sweeps == MAX_SWEEPS {
            return Err(GraphError::NoConvergence { sweeps, off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;

                for k in 0..n {
                    let vp = v[p * n + k];
                    let vq = v[q * n + k];
                    v[p * n + k] = c * vp - s * vq;
                    v[q * n + k] = s * vp + c * vq;
                }
            }
        }
        off = off_norm(&a);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let mut col = v[i * n..(i + 1) * n].to_vec();
            fix_sign(&mut col);
            col
        })
        .collect();
    Ok((values, vectors))
}

fn fix_sign(x: &mut [f64]) {
    let mut best = 0;
    for i in 1..x.len() {
        if x[i].abs() > x[best].abs() {
            best = i;
        }
    }
    if x.get(best).is_some_and(|&b| b < 0.0) {
        x.iter_mut().for_each(|e| *e = -*e);
    }
}
