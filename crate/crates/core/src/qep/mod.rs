//! Exact spectrum of the quadratic pencil `L(λ) = Iλ² + Cλ + S`.
//!
//! The eigenvalues are the roots of `det L(λ)`, obtained from the
//! characteristic polynomial of the companion linearization
//! `[[0, I], [−S, −C]]`. Eigenvectors are the smallest right singular
//! directions of `L(λ)`.

mod poly;

use num_complex::Complex64;
use thiserror::Error;

pub use poly::{cluster_roots, poly_roots, poly_roots_with, snap_unresolved, CharPoly, RootCluster};

use crate::linalg::{cnorm, complex_singular_directions, hessenberg_char_poly, Matrix};
use crate::model::{ModelError, QuadraticPencil};
use crate::tolerances::Tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QepError {
    #[error("characteristic polynomial overflowed; rescale the pencil (for example divide all frequencies by a common factor)")]
    Overflow,
    #[error("degenerate polynomial: {0}")]
    Degenerate(&'static str),
    #[error("root finder did not converge (worst scaled residual {residual:.3e})")]
    NonConvergence { best: Vec<Complex64>, residual: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Characteristic polynomial `det L(λ)`, monic of degree `2·dim`.
///
/// Built by the Hessenberg recursion on the companion of the rescaled
/// pencil `λ = s·μ`, with `s` a power of two near the natural frequency scale, so
/// the unscaling `aₖ = s^{N−k}·bₖ` is exact.
pub fn char_poly(pencil: &QuadraticPencil) -> Result<CharPoly, QepError> {
    let d = pencil.dim();
    let c = pencil.damping_total();
    let s = pencil.stiffness_total();
    let root_dim = (d as f64).sqrt();
    let raw = (s.frobenius_norm() / root_dim)
        .sqrt()
        .max(c.frobenius_norm() / root_dim);
    let scale = if raw.is_finite() && raw > 0.0 {
        2f64.powi(raw.log2().round() as i32)
    } else {
        1.0
    };

    let mut companion = Matrix::zeros(2 * d);
    for i in 0..d {
        companion[(i, d + i)] = 1.0;
        for j in 0..d {
            companion[(d + i, j)] = -s[(i, j)] / (scale * scale);
            companion[(d + i, d + j)] = -c[(i, j)] / scale;
        }
    }
    if !companion.is_finite() {
        return Err(QepError::Overflow);
    }
    let scaled = hessenberg_char_poly(&companion);
    let n = scaled.len() - 1;
    let coeffs: Vec<f64> = scaled
        .iter()
        .enumerate()
        .map(|(k, b)| b * scale.powi((n - k) as i32))
        .collect();
    CharPoly::from_ascending(coeffs)
}

/// One eigenvalue of the pencil with its eigenvector diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigenpair {
    pub value: Complex64,
    /// Unit eigenvector, `None` when no singular direction of `L(λ)` meets
    /// the residual bound (near-defective eigenvalues).
    pub vector: Option<Vec<Complex64>>,
    /// `‖L(λ)u‖`, or `+∞` when `vector` is `None`.
    pub residual: f64,
    /// Scaled polynomial residual `|p(λ)| / (max|aₖ|·(1+|λ|)^deg)`.
    pub poly_residual: f64,
    /// Size of the root cluster this eigenvalue belongs to.
    pub multiplicity: usize,
    /// Index into [`Spectrum::clusters`].
    pub cluster: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub pairs: Vec<Eigenpair>,
    pub clusters: Vec<RootCluster>,
    pub poly: CharPoly,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.pairs.iter().map(|p| p.value).collect()
    }

    /// Pairs whose eigenvector could not be certified.
    pub fn flagged(&self) -> impl Iterator<Item = &Eigenpair> {
        self.pairs.iter().filter(|p| p.vector.is_none())
    }

    pub fn max_growth_rate(&self) -> f64 {
        max_growth_rate(&self.eigenvalues())
    }
}

/// `max Re λ`; `−∞` for an empty list.
pub fn max_growth_rate(eigenvalues: &[Complex64]) -> f64 {
    eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

/// Eigenvalues only, with the default tolerances. This is the fast path used
/// by sweeps.
pub fn eigenvalues(pencil: &QuadraticPencil) -> Result<Vec<Complex64>, QepError> {
    eigenvalues_with(pencil, &Tolerances::default())
}

/// Roots of `det L(λ)` with unresolvable multiple roots collapsed onto
/// their refined centers.
pub fn eigenvalues_with(pencil: &QuadraticPencil, tol: &Tolerances) -> Result<Vec<Complex64>, QepError> {
    Ok(roots_and_clusters(&char_poly(pencil)?, tol)?.0)
}

fn roots_and_clusters(poly: &CharPoly, tol: &Tolerances) -> Result<(Vec<Complex64>, Vec<RootCluster>), QepError> {
    let mut roots = poly_roots_with(poly, tol)?;
    let clusters = cluster_roots(poly, &roots, tol);
    snap_unresolved(&mut roots, &clusters);
    Ok((roots, clusters))
}

pub fn solve_qep(pencil: &QuadraticPencil) -> Result<Spectrum, QepError> {
    solve_qep_with(pencil, &Tolerances::default())
}

/// Full spectrum with eigenvectors and residuals.
///
/// Inside a cluster of size `m` the `j`-th member takes the `j`-th smallest
/// singular direction when it satisfies the residual bound, so a
/// semi-simple double eigenvalue reports two independent vectors while a
/// defective one reports the same vector twice.
pub fn solve_qep_with(pencil: &QuadraticPencil, tol: &Tolerances) -> Result<Spectrum, QepError> {
    let poly = char_poly(pencil)?;
    let (roots, clusters) = roots_and_clusters(&poly, tol)?;
    let s_norm = pencil.stiffness_total().frobenius_norm().max(1.0);

    let mut pairs: Vec<Option<Eigenpair>> = vec![None; roots.len()];
    for (ci, cluster) in clusters.iter().enumerate() {
        let m = cluster.multiplicity();
        for (j, &idx) in cluster.members.iter().enumerate() {
            let lambda = roots[idx];
            let bound = tol.eigvec_residual * (1.0 + lambda.norm_sqr()) * s_norm;
            let l = pencil.eval(lambda);
            let sd = complex_singular_directions(&l);
            let candidates = [j.min(sd.vectors.len() - 1), 0];
            let mut chosen = None;
            for k in candidates {
                let u = &sd.vectors[k];
                let r = cnorm(&l.mul_vec(u));
                if r < bound {
                    chosen = Some((u.clone(), r));
                    break;
                }
            }
            let (vector, residual) = match chosen {
                Some((u, r)) => (Some(u), r),
                None => (None, f64::INFINITY),
            };
            pairs[idx] = Some(Eigenpair {
                value: lambda,
                vector,
                residual,
                poly_residual: poly.scaled_residual(lambda),
                multiplicity: m,
                cluster: ci,
            });
        }
    }
    Ok(Spectrum {
        pairs: pairs.into_iter().map(|p| p.expect("every root is clustered")).collect(),
        clusters,
        poly,
    })
}
