//! The spinning rotor, its perturbations, and the quadratic pencil they define.
//!
//! A rotor with `n` doublets has `2n` coordinates. In the stationary frame
//!
//! ```text
//! ẍ + (2Ω G + δ D) ẋ + (P + Ω² G² + κ K + ν N) x = 0
//! ```
//!
//! with `P = diag(ω₁², ω₁², …, ωₙ², ωₙ²)` and `G = blockdiag(J, 2J, …, nJ)`,
//! `J = [[0, −1], [1, 0]]`. Separating `x = u·e^{λt}` gives the pencil
//! `L(λ) = Iλ² + Cλ + S` that [`QuadraticPencil`] stores.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{CMatrix, Matrix};

/// Relative size of the symmetric/skew correction tolerated on input.
const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("a rotor needs at least one doublet")]
    NoDoublets,
    #[error("doublet frequencies must be positive and strictly increasing, got {0:?}")]
    BadFrequencies(Vec<f64>),
    #[error("{name} is {actual}x{actual}, expected {expected}x{expected}")]
    Shape {
        name: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("{name} is not {kind} (relative defect {defect:.3e})")]
    Symmetry {
        name: &'static str,
        kind: &'static str,
        defect: f64,
    },
    #[error("gain {name} = {value} is not finite")]
    NonFiniteGain { name: &'static str, value: f64 },
    #[error("doublet index {s} is outside 1..={n}")]
    DoubletIndex { s: usize, n: usize },
}

/// Unperturbed rotor: the doublet frequencies `ω₁ < ω₂ < … < ωₙ`.
#[derive(Clone, Debug, PartialEq)]
pub struct RotorModel {
    omegas: Vec<f64>,
}

impl RotorModel {
    pub fn new(omegas: Vec<f64>) -> Result<Self, ModelError> {
        if omegas.is_empty() {
            return Err(ModelError::NoDoublets);
        }
        let increasing = omegas.windows(2).all(|w| w[0] < w[1]);
        let positive = omegas.iter().all(|w| w.is_finite() && *w > 0.0);
        if !increasing || !positive {
            return Err(ModelError::BadFrequencies(omegas));
        }
        Ok(Self { omegas })
    }

    /// Two degrees of freedom with natural frequency `omega1`.
    pub fn single(omega1: f64) -> Result<Self, ModelError> {
        Self::new(vec![omega1])
    }

    /// Circular-string spectrum `ω_s = s`, `s = 1..=n`.
    pub fn string(n: usize) -> Result<Self, ModelError> {
        Self::new((1..=n).map(|s| s as f64).collect())
    }

    pub fn doublets(&self) -> usize {
        self.omegas.len()
    }

    /// Number of coordinates, `2n`.
    pub fn dim(&self) -> usize {
        2 * self.omegas.len()
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn omega1(&self) -> f64 {
        self.omegas[0]
    }

    /// Potential-force matrix `P`.
    pub fn potential(&self) -> Matrix {
        let d: Vec<f64> = self.omegas.iter().flat_map(|w| [w * w, w * w]).collect();
        Matrix::diag(&d)
    }

    /// Gyroscopic matrix `G = blockdiag(J, 2J, …, nJ)`.
    pub fn gyroscopic(&self) -> Matrix {
        let j = Matrix::rotation_generator();
        let blocks: Vec<Matrix> = (1..=self.doublets()).map(|s| j.scale(s as f64)).collect();
        Matrix::block_diag(&blocks)
    }

    /// Lowest speed at which a backward wave stands still: `min ω_s / s`.
    pub fn critical_speed(&self) -> f64 {
        self.omegas
            .iter()
            .enumerate()
            .map(|(i, w)| w / (i + 1) as f64)
            .fold(f64::INFINITY, f64::min)
    }

    /// The spectral mesh `±i(ω_s ± sΩ)`, all `4n` values.
    pub fn mesh_spectrum(&self, spin: f64) -> Vec<MeshEigenvalue> {
        let mut out = Vec::with_capacity(4 * self.doublets());
        for (i, w) in self.omegas.iter().enumerate() {
            let s = i + 1;
            for branch in [Branch::Plus, Branch::Minus] {
                let im = w + branch.sign() * s as f64 * spin;
                for conjugate in [false, true] {
                    let value = Complex64::new(0.0, if conjugate { -im } else { im });
                    out.push(MeshEigenvalue {
                        s,
                        branch,
                        conjugate,
                        value,
                    });
                }
            }
        }
        out
    }

    /// Forward/backward/reflected label of the mesh branch `(s, branch)`.
    pub fn classify_wave(&self, s: usize, branch: Branch, spin: f64) -> Result<WaveKind, ModelError> {
        if s == 0 || s > self.doublets() {
            return Err(ModelError::DoubletIndex { s, n: self.doublets() });
        }
        if branch == Branch::Plus {
            return Ok(WaveKind::Forward);
        }
        let freq = self.omegas[s - 1] - s as f64 * spin;
        Ok(if freq > 0.0 {
            WaveKind::Backward
        } else if freq < 0.0 {
            WaveKind::Reflected
        } else {
            WaveKind::Stationary
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WaveKind {
    Forward,
    Backward,
    /// A backward wave overtaken by the rotation; it appears to travel
    /// forward in the stationary frame and carries negative energy.
    Reflected,
    /// `ω_s = sΩ` exactly: the wave stands still. Not a traveling wave.
    Stationary,
}

impl WaveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            WaveKind::Forward => "forward",
            WaveKind::Backward => "backward",
            WaveKind::Reflected => "reflected",
            WaveKind::Stationary => "stationary",
        }
    }
}

/// One point of the spectral mesh.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshEigenvalue {
    /// Doublet index, 1-based.
    pub s: usize,
    pub branch: Branch,
    /// Whether this is the complex-conjugate member.
    pub conjugate: bool,
    pub value: Complex64,
}

/// Scalar gains of one operating point: damping `δ`, stiffness `κ`,
/// circulatory `ν`, and spin speed `Ω`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Gains {
    pub delta: f64,
    pub kappa: f64,
    pub nu: f64,
    pub spin: f64,
}

impl Gains {
    pub fn new(delta: f64, kappa: f64, nu: f64, spin: f64) -> Self {
        Self { delta, kappa, nu, spin }
    }

    fn check(&self) -> Result<(), ModelError> {
        for (name, value) in [
            ("delta", self.delta),
            ("kappa", self.kappa),
            ("nu", self.nu),
            ("Omega", self.spin),
        ] {
            if !value.is_finite() {
                return Err(ModelError::NonFiniteGain { name, value });
            }
        }
        Ok(())
    }
}

/// Perturbation shapes `D` (symmetric), `K` (symmetric), `N` (skew) plus the
/// gains of one operating point. Immutable; the `with_*` methods return
/// modified copies.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationSet {
    damping: Matrix,
    stiffness: Matrix,
    circulatory: Matrix,
    gains: Gains,
}

impl PerturbationSet {
    /// Validates shapes and (skew-)symmetry. Inputs are symmetrized; a
    /// correction larger than `1e-12` relative is rejected.
    pub fn new(damping: Matrix, stiffness: Matrix, circulatory: Matrix, gains: Gains) -> Result<Self, ModelError> {
        let dim = damping.dim();
        for (name, m) in [("K", &stiffness), ("N", &circulatory)] {
            if m.dim() != dim {
                return Err(ModelError::Shape {
                    name,
                    expected: dim,
                    actual: m.dim(),
                });
            }
        }
        gains.check()?;
        Ok(Self {
            damping: symmetrized("D", &damping)?,
            stiffness: symmetrized("K", &stiffness)?,
            circulatory: skew_symmetrized("N", &circulatory)?,
            gains,
        })
    }

    /// Zero `D` and `K`, default `N`, zero gains.
    pub fn unperturbed(dim: usize) -> Self {
        Self {
            damping: Matrix::zeros(dim),
            stiffness: Matrix::zeros(dim),
            circulatory: default_circulatory(dim),
            gains: Gains::default(),
        }
    }

    pub fn damping(&self) -> &Matrix {
        &self.damping
    }

    pub fn stiffness(&self) -> &Matrix {
        &self.stiffness
    }

    pub fn circulatory(&self) -> &Matrix {
        &self.circulatory
    }

    pub fn gains(&self) -> Gains {
        self.gains
    }

    pub fn dim(&self) -> usize {
        self.damping.dim()
    }

    pub fn with_gains(&self, gains: Gains) -> Result<Self, ModelError> {
        gains.check()?;
        Ok(Self { gains, ..self.clone() })
    }

    pub fn with_spin(&self, spin: f64) -> Result<Self, ModelError> {
        self.with_gains(Gains { spin, ..self.gains })
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self, ModelError> {
        self.with_gains(Gains { delta, ..self.gains })
    }

    pub fn with_kappa(&self, kappa: f64) -> Result<Self, ModelError> {
        self.with_gains(Gains { kappa, ..self.gains })
    }

    pub fn with_nu(&self, nu: f64) -> Result<Self, ModelError> {
        self.with_gains(Gains { nu, ..self.gains })
    }
}

/// Default circulatory shape: `J` for one doublet, `blockdiag(J, …, J)` in
/// general.
pub fn default_circulatory(dim: usize) -> Matrix {
    let blocks = vec![Matrix::rotation_generator(); dim / 2];
    Matrix::block_diag(&blocks)
}

fn symmetrized(name: &'static str, m: &Matrix) -> Result<Matrix, ModelError> {
    let sym = m.symmetric_part();
    let defect = relative_defect(m, &sym);
    if defect > SYMMETRY_TOLERANCE {
        return Err(ModelError::Symmetry {
            name,
            kind: "symmetric",
            defect,
        });
    }
    Ok(sym)
}

fn skew_symmetrized(name: &'static str, m: &Matrix) -> Result<Matrix, ModelError> {
    let skew = m.skew_part();
    let defect = relative_defect(m, &skew);
    if defect > SYMMETRY_TOLERANCE {
        return Err(ModelError::Symmetry {
            name,
            kind: "skew-symmetric",
            defect,
        });
    }
    Ok(skew)
}

fn relative_defect(original: &Matrix, corrected: &Matrix) -> f64 {
    let scale = original.frobenius_norm();
    if scale == 0.0 {
        return 0.0;
    }
    (original - corrected).frobenius_norm() / scale
}

/// `L(λ) = Iλ² + Cλ + S` with identity mass.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticPencil {
    damping: Matrix,
    stiffness: Matrix,
}

impl QuadraticPencil {
    pub fn new(damping: Matrix, stiffness: Matrix) -> Result<Self, ModelError> {
        if damping.dim() != stiffness.dim() {
            return Err(ModelError::Shape {
                name: "stiffness_total",
                expected: damping.dim(),
                actual: stiffness.dim(),
            });
        }
        Ok(Self { damping, stiffness })
    }

    pub fn dim(&self) -> usize {
        self.damping.dim()
    }

    /// `C = 2ΩG + δD`.
    pub fn damping_total(&self) -> &Matrix {
        &self.damping
    }

    /// `S = P + Ω²G² + κK + νN`.
    pub fn stiffness_total(&self) -> &Matrix {
        &self.stiffness
    }

    /// `L(λ)`.
    pub fn eval(&self, lambda: Complex64) -> CMatrix {
        let id = Matrix::identity(self.dim());
        CMatrix::combine(&[
            (lambda * lambda, &id),
            (lambda, &self.damping),
            (Complex64::new(1.0, 0.0), &self.stiffness),
        ])
    }

    /// `L′(λ) = 2λI + C`.
    pub fn derivative(&self, lambda: Complex64) -> CMatrix {
        let id = Matrix::identity(self.dim());
        CMatrix::combine(&[(2.0 * lambda, &id), (Complex64::new(1.0, 0.0), &self.damping)])
    }

    /// Magnitude of the three terms of `L(λ)`; used to scale residuals.
    pub fn term_scale(&self, lambda: Complex64) -> f64 {
        let r = lambda.norm();
        r * r * (self.dim() as f64).sqrt() + r * self.damping.frobenius_norm() + self.stiffness.frobenius_norm()
    }
}

/// Assembles the pencil of the perturbed rotor at the operating point stored
/// in `pert`.
pub fn build_pencil(model: &RotorModel, pert: &PerturbationSet) -> Result<QuadraticPencil, ModelError> {
    if pert.dim() != model.dim() {
        return Err(ModelError::Shape {
            name: "D",
            expected: model.dim(),
            actual: pert.dim(),
        });
    }
    let g = model.gyroscopic();
    let Gains { delta, kappa, nu, spin } = pert.gains;
    let damping = &g.scale(2.0 * spin) + &pert.damping.scale(delta);
    let g2 = &g * &g;
    let stiffness =
        &(&(&model.potential() + &g2.scale(spin * spin)) + &pert.stiffness.scale(kappa)) + &pert.circulatory.scale(nu);
    QuadraticPencil::new(damping, stiffness)
}
