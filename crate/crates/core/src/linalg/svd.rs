//! Singular directions of a small complex matrix, via one-sided Jacobi on its
//! real embedding.

use num_complex::Complex64;

use super::{cdot, cnorm, CMatrix, Matrix};

const MAX_SWEEPS: usize = 80;

/// Right singular directions of a complex matrix, smallest singular value
/// first.
#[derive(Clone, Debug)]
pub struct SingularDirections {
    /// Singular values, ascending.
    pub values: Vec<f64>,
    /// Unit right singular vectors matching `values`.
    pub vectors: Vec<Vec<Complex64>>,
}

impl SingularDirections {
    /// Number of singular values at or below `threshold`.
    pub fn count_below(&self, threshold: f64) -> usize {
        self.values.iter().filter(|s| **s <= threshold).count()
    }
}

/// Computes the singular values and right singular vectors of `m`.
///
/// The real embedding doubles every singular value; each pair maps back to
/// one complex direction, recovered here by Gram–Schmidt over the real
/// vectors taken in ascending order.
pub fn complex_singular_directions(m: &CMatrix) -> SingularDirections {
    let n = m.dim();
    let (sigma, v) = jacobi_svd(&m.real_embedding());

    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|a, b| sigma[*a].total_cmp(&sigma[*b]));

    let mut values = Vec::with_capacity(n);
    let mut vectors: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for idx in order {
        if vectors.len() == n {
            break;
        }
        let mut z: Vec<Complex64> = (0..n).map(|i| Complex64::new(v[(i, idx)], v[(i + n, idx)])).collect();
        for q in &vectors {
            let proj = cdot(q, &z);
            for (zi, qi) in z.iter_mut().zip(q) {
                *zi -= proj * qi;
            }
        }
        let norm = cnorm(&z);
        if norm > 0.5 {
            for zi in z.iter_mut() {
                *zi /= norm;
            }
            values.push(sigma[idx]);
            vectors.push(z);
        }
    }
    SingularDirections { values, vectors }
}

/// One-sided Jacobi SVD of a real square matrix. Returns the singular values
/// (unsorted) and the right singular vectors as columns of `V`.
fn jacobi_svd(a: &Matrix) -> (Vec<f64>, Matrix) {
    let n = a.dim();
    let mut w = a.clone();
    let mut v = Matrix::identity(n);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for i in 0..n {
                    alpha += w[(i, p)] * w[(i, p)];
                    beta += w[(i, q)] * w[(i, q)];
                    gamma += w[(i, p)] * w[(i, q)];
                }
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    w[(i, p)] = c * wp - s * wq;
                    w[(i, q)] = s * wp + c * wq;
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma = (0..n)
        .map(|j| (0..n).map(|i| w[(i, j)] * w[(i, j)]).sum::<f64>().sqrt())
        .collect();
    (sigma, v)
}
