//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use gyrospec::linalg::Matrix;
use gyrospec::model::default_circulatory;
use gyrospec::{Gains, PerturbationSet, QuadraticPencil, RotorModel};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fig1_damping() -> Matrix {
    Matrix::from_rows([[-1.0, 0.0], [0.0, 2.0]])
}

pub fn fig1_stiffness() -> Matrix {
    Matrix::from_rows([[1.0, 1.0], [1.0, 2.0]])
}

pub fn fig1(gains: Gains) -> (RotorModel, PerturbationSet) {
    let model = RotorModel::single(1.0).unwrap();
    let pert = PerturbationSet::new(fig1_damping(), fig1_stiffness(), default_circulatory(2), gains).unwrap();
    (model, pert)
}

/// Symmetric matrix with entries uniform in `[-1, 1]`.
pub fn random_symmetric(rng: &mut ChaCha8Rng, dim: usize) -> Matrix {
    let mut m = Matrix::zeros(dim);
    for i in 0..dim {
        for j in i..dim {
            let v = rng.gen_range(-1.0..1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

pub fn random_skew(rng: &mut ChaCha8Rng, dim: usize) -> Matrix {
    let mut m = Matrix::zeros(dim);
    for i in 0..dim {
        for j in i + 1..dim {
            let v = rng.gen_range(-1.0..1.0);
            m[(i, j)] = v;
            m[(j, i)] = -v;
        }
    }
    m
}

/// `BBᵀ + floor·I`.
pub fn random_positive_definite(rng: &mut ChaCha8Rng, dim: usize, floor: f64) -> Matrix {
    let mut b = Matrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            b[(i, j)] = rng.gen_range(-1.0..1.0);
        }
    }
    let mut m = Matrix::identity(dim).scale(floor);
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                m[(i, j)] += b[(i, k)] * b[(j, k)];
            }
        }
    }
    m
}

/// Strictly increasing doublet frequencies in `[0.5, 3]`.
pub fn random_rotor(rng: &mut ChaCha8Rng, n: usize) -> RotorModel {
    let mut w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..3.0)).collect();
    w.sort_by(f64::total_cmp);
    for i in 1..n {
        if w[i] - w[i - 1] < 0.05 {
            w[i] = w[i - 1] + 0.05;
        }
    }
    RotorModel::new(w).unwrap()
}

/// Eigenvalues of the `4n×4n` companion matrix `[[0, I], [−S, −C]]`,
/// computed by nalgebra's Schur decomposition.
pub fn companion_eigenvalues(pencil: &QuadraticPencil) -> Vec<Complex64> {
    let m = pencil.dim();
    let c = pencil.damping_total();
    let s = pencil.stiffness_total();
    let mut a = DMatrix::<f64>::zeros(2 * m, 2 * m);
    for i in 0..m {
        a[(i, m + i)] = 1.0;
        for j in 0..m {
            a[(m + i, j)] = -s[(i, j)];
            a[(m + i, m + j)] = -c[(i, j)];
        }
    }
    a.complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect()
}

/// Largest real part.
pub fn max_re(values: &[Complex64]) -> f64 {
    values.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}
