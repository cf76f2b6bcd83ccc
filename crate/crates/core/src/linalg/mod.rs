//! Small dense matrices.
//!
//! Everything in this crate works with systems of a few doublets, so the
//! storage is a plain row-major `Vec<f64>` and the algorithms are the textbook
//! O(n³) ones.

mod eigen;
mod svd;

pub use eigen::{hessenberg_char_poly, real_eigenvalues};
pub use svd::{complex_singular_directions, SingularDirections};

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

/// Square real matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// Builds a matrix from a row-major slice. Returns `None` when the length
    /// is not a perfect square.
    pub fn from_row_major(values: &[f64]) -> Option<Self> {
        let dim = (values.len() as f64).sqrt().round() as usize;
        if dim * dim != values.len() {
            return None;
        }
        Some(Self {
            dim,
            data: values.to_vec(),
        })
    }

    pub fn from_rows<const N: usize>(rows: [[f64; N]; N]) -> Self {
        Self {
            dim: N,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    /// The rotation generator `[[0, -1], [1, 0]]`.
    pub fn rotation_generator() -> Self {
        Self::from_rows([[0.0, -1.0], [1.0, 0.0]])
    }

    /// Block-diagonal matrix assembled from square blocks.
    pub fn block_diag(blocks: &[Matrix]) -> Self {
        let dim = blocks.iter().map(|b| b.dim).sum();
        let mut m = Self::zeros(dim);
        let mut offset = 0;
        for b in blocks {
            for i in 0..b.dim {
                for j in 0..b.dim {
                    m[(offset + i, offset + j)] = b[(i, j)];
                }
            }
            offset += b.dim;
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Determinant of a 2×2 matrix. Panics for any other size.
    pub fn det2(&self) -> f64 {
        assert_eq!(self.dim, 2, "det2 on a {}x{} matrix", self.dim, self.dim);
        self[(0, 0)] * self[(1, 1)] - self[(0, 1)] * self[(1, 0)]
    }

    /// Symmetric part `(A + Aᵀ)/2`.
    pub fn symmetric_part(&self) -> Self {
        (self + &self.transpose()).scale(0.5)
    }

    /// Skew-symmetric part `(A − Aᵀ)/2`.
    pub fn skew_part(&self) -> Self {
        (self - &self.transpose()).scale(0.5)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn mul_cvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| v[j] * self[(i, j)]).sum())
            .collect()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = self.data.chunks(self.dim.max(1)).collect();
        f.debug_list().entries(rows).finish()
    }
}

impl Add for &Matrix {
    type Output = Matrix;

    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim);
        Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim);
        Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Neg for &Matrix {
    type Output = Matrix;

    fn neg(self) -> Matrix {
        self.scale(-1.0)
    }
}

/// Square complex matrix stored row-major. Only what the eigenvector and
/// residual computations need.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `a·A + b·B + c·C` for real matrices and complex weights.
    pub fn combine(terms: &[(Complex64, &Matrix)]) -> Self {
        let dim = terms[0].1.dim();
        let mut out = Self::zeros(dim);
        for (w, m) in terms {
            assert_eq!(m.dim(), dim);
            for (o, v) in out.data.iter_mut().zip(m.as_slice()) {
                *o += w * v;
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Real `2n×2n` embedding `[[Re, −Im], [Im, Re]]`.
    pub fn real_embedding(&self) -> Matrix {
        let n = self.dim;
        let mut m = Matrix::zeros(2 * n);
        for i in 0..n {
            for j in 0..n {
                let z = self[(i, j)];
                m[(i, j)] = z.re;
                m[(i, j + n)] = -z.im;
                m[(i + n, j)] = z.im;
                m[(i + n, j + n)] = z.re;
            }
        }
        m
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

pub fn cnorm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian inner product `⟨a, b⟩ = Σ conj(a_i) b_i`.
pub fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `|⟨a, b⟩| / (‖a‖‖b‖)`: 1 for parallel vectors, 0 for orthogonal ones.
pub fn alignment(a: &[Complex64], b: &[Complex64]) -> f64 {
    let na = cnorm(a);
    let nb = cnorm(b);
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    cdot(a, b).norm() / (na * nb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_diag_of_generators() {
        let j = Matrix::rotation_generator();
        let g = Matrix::block_diag(&[j.clone(), j.scale(2.0)]);
        let g2 = &g * &g;
        assert_eq!(g2, Matrix::diag(&[-1.0, -1.0, -4.0, -4.0]));
        assert_eq!(g.transpose(), -&g);
    }

    #[test]
    fn real_embedding_acts_like_complex_product() {
        let mut m = CMatrix::zeros(2);
        m[(0, 0)] = Complex64::new(1.0, 2.0);
        m[(0, 1)] = Complex64::new(-0.5, 0.3);
        m[(1, 0)] = Complex64::new(0.0, -1.0);
        m[(1, 1)] = Complex64::new(2.0, 0.0);
        let v = [Complex64::new(0.3, -0.7), Complex64::new(1.1, 0.2)];
        let mv = m.mul_vec(&v);
        let e = m.real_embedding();
        let ev = e.mul_vec(&[v[0].re, v[1].re, v[0].im, v[1].im]);
        for i in 0..2 {
            assert!((mv[i].re - ev[i]).abs() < 1e-14);
            assert!((mv[i].im - ev[i + 2]).abs() < 1e-14);
        }
    }

    #[test]
    fn from_row_major_rejects_non_square_lengths() {
        assert!(Matrix::from_row_major(&[1.0, 2.0, 3.0]).is_none());
        assert_eq!(Matrix::from_row_major(&[1.0; 9]).unwrap().dim(), 3);
    }
}
