//! The rotating-frame picture: a time-periodic system whose Floquet
//! multipliers mirror the autonomous spectrum.
//!
//! In coordinates co-rotating with the rotor (one doublet, `G = J`) the
//! perturbations become periodic with frequency `2Ω`:
//!
//! ```text
//! z̈ + δD̃(t)ż + (P − δΩD̃(t)G + κK̃(t) + νN)z = 0
//! 2X̃(t) = diag(trX, trX) + (X + JXJ)cos 2Ωt + (JX − XJ)sin 2Ωt
//! ```
//!
//! for `X = D, K`. Over one period `T = π/Ω` the multipliers are exactly
//! `−e^{λT}` for the eigenvalues `λ` of the autonomous pencil; the sign is
//! `exp(πJ) = −I`.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{real_eigenvalues, Matrix};
use crate::matching::pair_by;
use crate::model::{build_pencil, ModelError, PerturbationSet, RotorModel};
use crate::qep::{eigenvalues_with, QepError};
use crate::tolerances::Tolerances;

pub const MIN_STEPS: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FloquetError {
    #[error("the periodic coefficients are given for one doublet only; got dimension {0}")]
    NotImplemented(usize),
    #[error("Omega = 0 gives an infinite period; use the autonomous solver (spectrum) instead")]
    InfinitePeriod,
    #[error("{0} steps per period is below the minimum of 256")]
    TooFewSteps(usize),
    #[error(
        "step halving changed the monodromy matrix by {error:.3e} (relative), above {tolerance:.1e}; increase steps"
    )]
    Resolution { error: f64, tolerance: f64 },
    #[error("eigenvalues of the monodromy matrix did not converge")]
    Eigen,
    #[error(transparent)]
    Qep(#[from] QepError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A one-doublet rotor seen from the rotating frame.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicSystem {
    model: RotorModel,
    pert: PerturbationSet,
}

/// Coefficient matrices of the periodic system at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicMatrices {
    pub damping: Matrix,
    pub stiffness: Matrix,
    pub circulatory: Matrix,
    /// `−δΩD̃(t)G`.
    pub coupling: Matrix,
}

impl PeriodicSystem {
    pub fn new(model: RotorModel, pert: PerturbationSet) -> Result<Self, FloquetError> {
        if model.doublets() != 1 || pert.dim() != 2 {
            return Err(FloquetError::NotImplemented(model.dim().max(pert.dim())));
        }
        if pert.gains().spin == 0.0 {
            return Err(FloquetError::InfinitePeriod);
        }
        Ok(Self { model, pert })
    }

    pub fn model(&self) -> &RotorModel {
        &self.model
    }

    pub fn perturbation(&self) -> &PerturbationSet {
        &self.pert
    }

    /// `T = π/|Ω|`.
    pub fn period(&self) -> f64 {
        std::f64::consts::PI / self.pert.gains().spin.abs()
    }

    pub fn matrices(&self, t: f64) -> PeriodicMatrices {
        periodic_matrices(&self.pert, t)
    }

    /// `E(t)` of the first-order form `ẏ = E(t)y`, `y = (z, ż)`.
    fn first_order(&self, t: f64) -> Matrix {
        let g = self.pert.gains();
        let m = self.matrices(t);
        let w2 = self.model.omega1().powi(2);
        let mut e = Matrix::zeros(4);
        for i in 0..2 {
            e[(i, i + 2)] = 1.0;
            for j in 0..2 {
                let p = if i == j { w2 } else { 0.0 };
                let s = p + m.coupling[(i, j)] + g.kappa * m.stiffness[(i, j)] + g.nu * m.circulatory[(i, j)];
                e[(i + 2, j)] = -s;
                e[(i + 2, j + 2)] = -g.delta * m.damping[(i, j)];
            }
        }
        e
    }
}

/// `(D̃, K̃, Ñ = N, −δΩD̃G)` at time `t`.
pub fn periodic_matrices(pert: &PerturbationSet, t: f64) -> PeriodicMatrices {
    let g = pert.gains();
    let (s, c) = (2.0 * g.spin * t).sin_cos();
    let rotate = |x: &Matrix| -> Matrix {
        let j = Matrix::rotation_generator();
        let jxj = &(&j * x) * &j;
        let comm = &(&j * x) - &(x * &j);
        let tr = x.trace();
        let mut out = &(&(x + &jxj).scale(c) + &comm.scale(s)) + &Matrix::diag(&[tr, tr]);
        out = out.scale(0.5);
        out
    };
    let damping = rotate(pert.damping());
    let coupling = (&damping * &Matrix::rotation_generator()).scale(-g.delta * g.spin);
    PeriodicMatrices {
        stiffness: rotate(pert.stiffness()),
        circulatory: pert.circulatory().clone(),
        coupling,
        damping,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FloquetResult {
    pub period: f64,
    pub steps: usize,
    /// State-transition matrix of `(z, ż)` over one period.
    pub monodromy: Matrix,
    pub multipliers: Vec<Complex64>,
    /// `−e^{λT}` for the autonomous eigenvalues.
    pub predicted: Vec<Complex64>,
    /// Largest `|μ − μ̂|/|μ̂|` under the optimal pairing of `multipliers`
    /// with `predicted`.
    pub match_error: f64,
    /// `‖M_steps − M_{steps/2}‖_F / ‖M_steps‖_F`.
    pub halving_error: f64,
    /// `|det M − e^{−δ·trD·T}|`.
    pub liouville_error: f64,
    /// The same difference relative to `e^{−δ·trD·T}`.
    pub liouville_relative: f64,
}

impl FloquetResult {
    pub fn max_modulus(&self) -> f64 {
        self.multipliers.iter().map(|m| m.norm()).fold(0.0, f64::max)
    }
}

/// Integrates one period with `steps` classical Runge–Kutta steps (and once
/// more with `steps/2` for the halving check), then compares the
/// multipliers with the autonomous prediction.
pub fn monodromy(ps: &PeriodicSystem, steps: usize, tol: &Tolerances) -> Result<FloquetResult, FloquetError> {
    if steps < MIN_STEPS {
        return Err(FloquetError::TooFewSteps(steps));
    }
    let period = ps.period();
    let m = integrate(ps, period, steps);
    let coarse = integrate(ps, period, steps / 2);
    let halving_error = (&m - &coarse).frobenius_norm() / m.frobenius_norm();
    if !(halving_error <= tol.halving) {
        return Err(FloquetError::Resolution {
            error: halving_error,
            tolerance: tol.halving,
        });
    }
    let multipliers = real_eigenvalues(&m).ok_or(FloquetError::Eigen)?;

    let pencil = build_pencil(&ps.model, &ps.pert)?;
    let predicted: Vec<Complex64> = eigenvalues_with(&pencil, tol)?
        .iter()
        .map(|l| -(l * period).exp())
        .collect();
    let match_error = pair_by(&multipliers, &predicted, |a, b| (a - b).norm() / b.norm()).max_distance;

    let g = ps.pert.gains();
    let expected_det = (-g.delta * ps.pert.damping().trace() * period).exp();
    let liouville_error = (determinant(&m) - expected_det).abs();
    Ok(FloquetResult {
        period,
        steps,
        monodromy: m,
        multipliers,
        predicted,
        match_error,
        halving_error,
        liouville_error,
        liouville_relative: liouville_error / expected_det,
    })
}

/// Fixed-step RK4 for `Y′ = E(t)Y`, `Y(0) = I`, over `[0, period]`.
pub fn integrate(ps: &PeriodicSystem, period: f64, steps: usize) -> Matrix {
    let h = period / steps as f64;
    let mut y = Matrix::identity(4);
    for k in 0..steps {
        let t = k as f64 * h;
        let e0 = ps.first_order(t);
        let e1 = ps.first_order(t + 0.5 * h);
        let e2 = ps.first_order(t + h);
        let k1 = &e0 * &y;
        let k2 = &e1 * &(&y + &k1.scale(0.5 * h));
        let k3 = &e1 * &(&y + &k2.scale(0.5 * h));
        let k4 = &e2 * &(&y + &k3.scale(h));
        let incr = &(&(&k1 + &k2.scale(2.0)) + &k3.scale(2.0)) + &k4;
        y = &y + &incr.scale(h / 6.0);
    }
    y
}

fn determinant(m: &Matrix) -> f64 {
    let n = m.dim();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}
