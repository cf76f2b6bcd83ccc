//! Closed-form perturbation theory for one doublet (`n = 1`).
//!
//! Near the double eigenvalue `iω₁` of the non-rotating rotor the perturbed
//! eigenvalues are, to first order,
//!
//! ```text
//! λ = −trD·δ/4 + i(ω₁ + trK·κ/(4ω₁)) ± √c
//! Re c = ((μ₁−μ₂)/4)²δ² − ((ρ₁−ρ₂)/(4ω₁))²κ² − Ω² + ν²/(4ω₁²)
//! Im c = Ων/ω₁ − δκ(2trKD − trK·trD)/(8ω₁)
//! ```
//!
//! where `μ₁ ≥ μ₂` and `ρ₁ ≥ ρ₂` are the eigenvalues of `D` and `K`. Every
//! other quantity here (stability cone, exceptional points, Jordan chains,
//! umbrella forms) is derived from this pair of formulas or from the exact
//! quartic at `δ = Ω = 0`. With `ρ₁ > ρ₂` fixed, `κ₀ = 2ν/(ρ₁−ρ₂)` has the
//! sign of `ν`.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{alignment, cnorm, complex_singular_directions, CMatrix, Matrix};
use crate::model::{build_pencil, default_circulatory, Gains, ModelError, PerturbationSet, RotorModel};

/// Relative agreement required between the two forms of `A`.
const A_CONSISTENCY: f64 = 1e-10;
/// Residual tolerance for Jordan chains, relative to the pencil scale.
const CHAIN_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerturbationError {
    #[error("closed forms exist only for one doublet (2x2 matrices); got dimension {0}")]
    NotImplemented(usize),
    #[error("{0} is undefined because K has a double eigenvalue (rho1 = rho2)")]
    IsotropicStiffness(&'static str),
    #[error("the two forms of A disagree: {first} vs {second}")]
    Inconsistent { first: f64, second: f64 },
    #[error("critical speed undefined: {0}")]
    Undefined(&'static str),
    #[error("omega0 radicand {0} is negative; the exceptional point is outside the small-perturbation regime")]
    NegativeRadicand(f64),
    #[error("|kappa| = {kappa} < kappa0 = {kappa0}: the boundary lines are complex")]
    NoRealBoundary { kappa: f64, kappa0: f64 },
    #[error("umbrella orientation is degenerate: 4 beta0^2 = (trD/2)^2")]
    DegenerateOrientation,
    #[error("nu = 0: the exceptional point merges with the diabolical point and the Jordan chain diverges")]
    DegenerateChain,
    #[error("Jordan chain residuals {residual0:.3e}, {residual1:.3e} exceed {bound:.3e}")]
    ChainResidual { residual0: f64, residual1: f64, bound: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Invariants of `D` and `K` used by every closed form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModalData {
    pub mu1: f64,
    pub mu2: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub tr_d: f64,
    pub tr_k: f64,
    pub det_d: f64,
    pub det_k: f64,
    pub tr_kd: f64,
    pub omega1: f64,
    /// Upper triangles `(x₁₁, x₁₂, x₂₂)`.
    pub d: [f64; 3],
    pub k: [f64; 3],
}

impl ModalData {
    pub fn new(damping: &Matrix, stiffness: &Matrix, omega1: f64) -> Result<Self, PerturbationError> {
        for m in [damping, stiffness] {
            if m.dim() != 2 {
                return Err(PerturbationError::NotImplemented(m.dim()));
            }
        }
        let d = [damping[(0, 0)], damping[(0, 1)], damping[(1, 1)]];
        let k = [stiffness[(0, 0)], stiffness[(0, 1)], stiffness[(1, 1)]];
        let (mu1, mu2) = sym_eigenvalues(d);
        let (rho1, rho2) = sym_eigenvalues(k);
        Ok(Self {
            mu1,
            mu2,
            rho1,
            rho2,
            tr_d: d[0] + d[2],
            tr_k: k[0] + k[2],
            det_d: d[0] * d[2] - d[1] * d[1],
            det_k: k[0] * k[2] - k[1] * k[1],
            tr_kd: k[0] * d[0] + 2.0 * k[1] * d[1] + k[2] * d[2],
            omega1,
            d,
            k,
        })
    }

    pub fn from_model(model: &RotorModel, pert: &PerturbationSet) -> Result<Self, PerturbationError> {
        if model.doublets() != 1 {
            return Err(PerturbationError::NotImplemented(model.dim()));
        }
        Self::new(pert.damping(), pert.stiffness(), model.omega1())
    }

    /// `ρ₁ − ρ₂ ≥ 0`.
    pub fn rho_gap(&self) -> f64 {
        self.rho1 - self.rho2
    }

    /// `2trKD − trK·trD`, the mixed invariant that couples damping and
    /// stiffness.
    pub fn mixed(&self) -> f64 {
        2.0 * self.tr_kd - self.tr_k * self.tr_d
    }
}

/// Ordered eigenvalues of `[[a, b], [b, c]]`, larger first.
fn sym_eigenvalues([a, b, c]: [f64; 3]) -> (f64, f64) {
    let mean = 0.5 * (a + c);
    let half_gap = (0.5 * (a - c)).hypot(b);
    (mean + half_gap, mean - half_gap)
}

/// Coupling coefficient `c`.
pub fn coupling_c(md: &ModalData, spin: f64, delta: f64, kappa: f64, nu: f64) -> Complex64 {
    let w = md.omega1;
    let re = ((md.mu1 - md.mu2) / 4.0 * delta).powi(2) - (md.rho_gap() / (4.0 * w) * kappa).powi(2) - spin * spin
        + nu * nu / (4.0 * w * w);
    let im = spin * nu / w - delta * kappa * md.mixed() / (8.0 * w);
    Complex64::new(re, im)
}

/// First-order eigenvalues near `±iω₁`: both branches and their conjugates,
/// in the order `[λ₊, λ₋, λ̄₊, λ̄₋]`.
pub fn approx_eigenvalues(md: &ModalData, spin: f64, delta: f64, kappa: f64, nu: f64) -> [Complex64; 4] {
    let base = Complex64::new(-md.tr_d * delta / 4.0, md.omega1 + md.tr_k * kappa / (4.0 * md.omega1));
    let root = coupling_c(md, spin, delta, kappa, nu).sqrt();
    let (p, m) = (base + root, base - root);
    [p, m, p.conj(), m.conj()]
}

/// Imaginary parts of the two branches for `δ = ν = 0`, where the crossing
/// of the mesh becomes an avoided crossing along a hyperbola.
pub fn veering_hyperbola(md: &ModalData, kappa: f64, spin: f64) -> (f64, f64) {
    let w = md.omega1;
    let center = w + (md.rho1 + md.rho2) * kappa / (4.0 * w);
    let half = spin.hypot(md.rho_gap() * kappa / (4.0 * w));
    (center + half, center - half)
}

/// Both algebraic forms of the invariant `A`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantA {
    /// `detD(ρ₁−ρ₂)² + (k₁₂(d₂₂−d₁₁) − d₁₂(k₂₂−k₁₁))²`.
    pub first: f64,
    /// `((trD)² − 16β₀²)(ρ₁−ρ₂)²/4`, written without the division in `β₀`.
    pub second: f64,
}

/// Invariant `A` whose sign decides the shape of the flutter domain. Errors
/// when the two forms disagree.
pub fn invariant_a(md: &ModalData) -> Result<f64, PerturbationError> {
    let forms = invariant_a_forms(md);
    let [d11, d12, d22] = md.d;
    let [k11, k12, k22] = md.k;
    let gap2 = (k11 - k22).powi(2) + 4.0 * k12 * k12;
    let cross = k12 * (d22 - d11) - d12 * (k22 - k11);
    let scale = (md.det_d.abs() + md.tr_d * md.tr_d) * gap2 + cross * cross + md.mixed().powi(2);
    if (forms.first - forms.second).abs() > A_CONSISTENCY * scale {
        return Err(PerturbationError::Inconsistent {
            first: forms.first,
            second: forms.second,
        });
    }
    Ok(forms.first)
}

pub fn invariant_a_forms(md: &ModalData) -> InvariantA {
    let [d11, d12, d22] = md.d;
    let [k11, k12, k22] = md.k;
    let gap2 = (k11 - k22).powi(2) + 4.0 * k12 * k12;
    let cross = k12 * (d22 - d11) - d12 * (k22 - k11);
    InvariantA {
        first: md.det_d * gap2 + cross * cross,
        second: (md.tr_d * md.tr_d * gap2 - md.mixed().powi(2)) / 4.0,
    }
}

/// `β₀ = (2trKD − trK·trD)/(4(ρ₁−ρ₂))`.
pub fn beta0(md: &ModalData) -> Result<f64, PerturbationError> {
    if md.rho_gap() == 0.0 {
        return Err(PerturbationError::IsotropicStiffness("beta0"));
    }
    Ok(md.mixed() / (4.0 * md.rho_gap()))
}

/// First-order asymptotic stability for `ν = 0`:
/// `δ·trD > 0` and `κ²A + Ω²(2ω₁trD)² > −detD(ω₁trD)²δ²`.
pub fn cone_criterion(md: &ModalData, a: f64, spin: f64, kappa: f64, delta: f64) -> bool {
    delta * md.tr_d > 0.0 && cone_quadratic(md, a, spin, kappa, delta) > 0.0
}

/// `κ²A + Ω²(2ω₁trD)² + detD(ω₁trD)²δ²`; positive on the stable side.
pub fn cone_quadratic(md: &ModalData, a: f64, spin: f64, kappa: f64, delta: f64) -> f64 {
    let wt = md.omega1 * md.tr_d;
    kappa * kappa * a + spin * spin * (2.0 * wt).powi(2) + md.det_d * wt * wt * delta * delta
}

/// Stability discriminant `B` in the presence of circulatory forces; the
/// first-order stability conditions are `δ·trD > 0` and `B > 0`.
pub fn criterion_b(md: &ModalData, a: f64, spin: f64, kappa: f64, delta: f64, nu: f64) -> f64 {
    let w2 = md.omega1 * md.omega1;
    let t2 = md.tr_d * md.tr_d;
    let d2 = delta * delta;
    let x = d2 * w2 * t2 - 4.0 * nu * nu;
    let lead = 2.0 * spin * x + delta * md.mixed() * kappa * nu;
    lead * lead + d2 * t2 * (a * d2 * w2 - nu * nu * md.rho_gap().powi(2)) * kappa * kappa
        - d2 * t2 * x * (nu * nu - d2 * w2 * md.det_d)
}

/// First-order asymptotic stability with circulatory forces.
///
/// `B` equals `16(δ²ω₁²tr²D − 4ν²)·Q`, where `Q > 0` is the exact condition
/// for both first-order eigenvalues to lie in the left half-plane. So the
/// test is `δ·trD > 0` and `B` having the sign of `δ²ω₁²tr²D − 4ν²`; this
/// reduces to `B > 0` whenever `2|ν| < |δω₁trD|`, in particular at `ν = 0`.
pub fn is_stable_b(md: &ModalData, a: f64, spin: f64, kappa: f64, delta: f64, nu: f64) -> bool {
    let x = (delta * md.omega1 * md.tr_d).powi(2) - 4.0 * nu * nu;
    delta * md.tr_d > 0.0 && criterion_b(md, a, spin, kappa, delta, nu) * x > 0.0
}

/// Critical spin speed at `κ = 0`:
/// `Ω_cr = (δtrD/4)·√(−(ν² − ω₁²δ²detD)/(ν² − ω₁²δ²(trD/2)²))`.
///
/// At `ν = 0` this is `δ√(−detD)/2`, real only for indefinite damping.
pub fn omega_cr_nu(md: &ModalData, delta: f64, nu: f64) -> Result<f64, PerturbationError> {
    let w2 = md.omega1 * md.omega1;
    let num = nu * nu - w2 * delta * delta * md.det_d;
    let den = nu * nu - w2 * delta * delta * (md.tr_d / 2.0).powi(2);
    if den == 0.0 {
        return Err(PerturbationError::Undefined("pole: nu^2 = omega1^2 delta^2 (trD/2)^2"));
    }
    let radicand = -num / den;
    if !radicand.is_finite() {
        return Err(PerturbationError::Undefined("radicand is not finite"));
    }
    if radicand < 0.0 {
        return Err(PerturbationError::Undefined("radicand is negative"));
    }
    Ok((delta * md.tr_d / 4.0 * radicand.sqrt()).abs())
}

/// Which of the two exceptional points at `κ = ±κ₀`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpBranch {
    Plus,
    Minus,
}

impl EpBranch {
    pub fn sign(self) -> f64 {
        match self {
            EpBranch::Plus => 1.0,
            EpBranch::Minus => -1.0,
        }
    }
}

/// Exceptional points of the undamped non-rotating rotor, at
/// `(Ω, κ, δ) = (0, ±κ₀, 0)` with double eigenvalues `±iω₀`.
///
/// The frequency at `−κ₀` follows from the same formulas applied to `−K`:
/// `√(ω₁² − ν(ρ₁+ρ₂)/(ρ₁−ρ₂))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpLocation {
    pub kappa0: f64,
    /// Frequency at `κ = +κ₀`.
    pub omega0: f64,
    /// Frequency at `κ = −κ₀`, `None` when its radicand is negative.
    pub omega0_minus: Option<f64>,
}

impl EpLocation {
    pub fn at(&self, branch: EpBranch) -> Option<(f64, f64)> {
        match branch {
            EpBranch::Plus => Some((self.kappa0, self.omega0)),
            EpBranch::Minus => self.omega0_minus.map(|w| (-self.kappa0, w)),
        }
    }
}

pub fn ep_location(md: &ModalData, nu: f64) -> Result<EpLocation, PerturbationError> {
    let gap = md.rho_gap();
    if gap == 0.0 {
        return Err(PerturbationError::IsotropicStiffness("kappa0"));
    }
    let w2 = md.omega1 * md.omega1;
    let shift = nu * (md.rho1 + md.rho2) / gap;
    let plus = w2 + shift;
    if plus < 0.0 {
        return Err(PerturbationError::NegativeRadicand(plus));
    }
    let minus = w2 - shift;
    Ok(EpLocation {
        kappa0: 2.0 * nu / gap,
        omega0: plus.sqrt(),
        omega0_minus: (minus >= 0.0).then(|| minus.sqrt()),
    })
}

/// Jordan chain `L(λ₀)u₁ + σ·L′(λ₀)u₀ = 0` at an exceptional point, with
/// `L(λ) = Iλ² + P + κK + νN`, `L′(λ₀) = 2λ₀I`.
#[derive(Clone, Debug, PartialEq)]
pub struct JordanChain {
    pub branch: EpBranch,
    /// Signed stiffness gain of this exceptional point.
    pub kappa: f64,
    /// `iω₀`.
    pub lambda0: Complex64,
    /// Eigenvector `(k₁₁−k₂₂, 2k₁₂+ρ₁−ρ₂)` (of `σK` for the `−κ₀` point).
    pub u0: Vec<Complex64>,
    /// Associated vector `−2iω₀(ρ₁−ρ₂)/ν·(1, 0)`.
    pub u1: Vec<Complex64>,
    /// Sign normalization that makes the chain equation hold; `+1` is the
    /// standard chain convention.
    pub sigma: f64,
    /// `‖L(λ₀)u₀‖`.
    pub residual0: f64,
    /// `‖L(λ₀)u₁ + 2λ₀σu₀‖`.
    pub residual1: f64,
    /// `‖(−ω₀²I + P + κK)u₀‖`, the residual without the circulatory term.
    pub residual0_without_nu: f64,
    /// `|λ₀|²√2 + ‖S‖`, the size of the terms of `L(λ₀)`.
    pub scale: f64,
    /// `|⟨u₀, v⟩|/(‖u₀‖‖v‖)` with `v` the smallest singular direction of
    /// `L(λ₀)`.
    pub alignment: f64,
    /// `true` when a degenerate closed form was replaced by a numerical
    /// null vector or pseudo-inverse solution.
    pub fallback: bool,
}

/// Builds and checks the Jordan chain at one exceptional point.
pub fn jordan_chain(md: &ModalData, nu: f64, branch: EpBranch) -> Result<JordanChain, PerturbationError> {
    if nu == 0.0 || nu.abs() <= f64::EPSILON * md.omega1 * md.omega1 {
        return Err(PerturbationError::DegenerateChain);
    }
    // the −κ₀ point is the +κ₀ point of −K
    let sk = branch.sign();
    let oriented = ModalData::new(
        &Matrix::from_rows([[md.d[0], md.d[1]], [md.d[1], md.d[2]]]),
        &Matrix::from_rows([[sk * md.k[0], sk * md.k[1]], [sk * md.k[1], sk * md.k[2]]]),
        md.omega1,
    )?;
    let ep = ep_location(&oriented, nu)?;
    let (kappa0, omega0) = (ep.kappa0, ep.omega0);
    let gap = oriented.rho_gap();
    let [k11, k12, k22] = oriented.k;

    let w2 = md.omega1 * md.omega1;
    let mut m = Matrix::diag(&[w2 - omega0 * omega0, w2 - omega0 * omega0]);
    let j = Matrix::rotation_generator();
    for r in 0..2 {
        for c in 0..2 {
            m[(r, c)] += kappa0 * oriented.k_matrix()[(r, c)] + nu * j[(r, c)];
        }
    }
    let lambda0 = Complex64::new(0.0, omega0);
    let scale = omega0 * omega0 * 2f64.sqrt()
        + (&Matrix::diag(&[w2, w2]) + &(&oriented.k_matrix().scale(kappa0) + &j.scale(nu))).frobenius_norm();
    let bound = CHAIN_TOLERANCE * scale;
    let mc = CMatrix::combine(&[(Complex64::new(1.0, 0.0), &m)]);
    let numeric = complex_singular_directions(&mc);

    let mut fallback = false;
    let mut u0 = vec![Complex64::new(k11 - k22, 0.0), Complex64::new(2.0 * k12 + gap, 0.0)];
    if cnorm(&u0) <= 1e-8 * (gap + k11.abs() + k22.abs() + k12.abs()) {
        // (k₁₁−k₂₂, 2k₁₂+ρ₁−ρ₂) vanishes when k₁₁ = k₂₂ and k₁₂ < 0
        u0 = numeric.vectors[0].clone();
        fallback = true;
    }
    let residual0 = cnorm(&mc.mul_vec(&u0));

    let coeff = Complex64::new(0.0, -2.0 * omega0 * gap / nu);
    let mut u1 = vec![coeff, Complex64::new(0.0, 0.0)];
    let chain = |u1: &[Complex64], sigma: f64| {
        let lu1 = mc.mul_vec(u1);
        let r: Vec<Complex64> = lu1
            .iter()
            .zip(&u0)
            .map(|(a, b)| a + 2.0 * lambda0 * sigma * b)
            .collect();
        cnorm(&r)
    };
    let (mut sigma, mut residual1) = best_sign(|s| chain(&u1, s));
    if !(residual1 < bound) {
        // rank-one M: the pseudo-inverse is Mᵀ/‖M‖²_F
        let norm2 = m.frobenius_norm().powi(2);
        let mt = m.transpose();
        let candidate = |s: f64| -> Vec<Complex64> {
            let rhs: Vec<Complex64> = u0.iter().map(|b| -2.0 * lambda0 * s * b).collect();
            mt.mul_cvec(&rhs).iter().map(|z| z / norm2).collect()
        };
        let (s, r) = best_sign(|s| chain(&candidate(s), s));
        if r < residual1 {
            u1 = candidate(s);
            sigma = s;
            residual1 = r;
            fallback = true;
        }
    }

    let mut m_free = m.clone();
    for r in 0..2 {
        for c in 0..2 {
            m_free[(r, c)] -= nu * j[(r, c)];
        }
    }
    let residual0_without_nu = cnorm(&m_free.mul_cvec(&u0));
    let align = alignment(&u0, &numeric.vectors[0]);

    if !(residual0 < bound * cnorm(&u0).max(1.0) && residual1 < bound) {
        return Err(PerturbationError::ChainResidual {
            residual0,
            residual1,
            bound,
        });
    }
    Ok(JordanChain {
        branch,
        kappa: sk * kappa0,
        lambda0,
        u0,
        u1,
        sigma,
        residual0,
        residual1,
        residual0_without_nu,
        scale,
        alignment: align,
        fallback,
    })
}

fn best_sign(f: impl Fn(f64) -> f64) -> (f64, f64) {
    let (p, m) = (f(1.0), f(-1.0));
    if p <= m {
        (1.0, p)
    } else {
        (-1.0, m)
    }
}

impl ModalData {
    fn k_matrix(&self) -> Matrix {
        Matrix::from_rows([[self.k[0], self.k[1]], [self.k[1], self.k[2]]])
    }
}

/// First-order flutter boundary lines through an exceptional point in the
/// `(Ω, δ)` plane: `Ω/δ = (4β₀κ ± trD√(κ²−κ₀²))/(4κ₀)`. Returns the two
/// slopes `Ω/δ`.
pub fn umbrella_omega(md: &ModalData, kappa: f64, nu: f64) -> Result<(f64, f64), PerturbationError> {
    let kappa0 = ep_location(md, nu)?.kappa0;
    if nu == 0.0 {
        return Err(PerturbationError::DegenerateChain);
    }
    let radicand = kappa * kappa - kappa0 * kappa0;
    if radicand < 0.0 {
        return Err(PerturbationError::NoRealBoundary { kappa, kappa0 });
    }
    let b0 = beta0(md)?;
    let root = md.tr_d * radicand.sqrt();
    Ok((
        (4.0 * b0 * kappa + root) / (4.0 * kappa0),
        (4.0 * b0 * kappa - root) / (4.0 * kappa0),
    ))
}

/// Stability boundary near the exceptional points solved for `κ` as a
/// function of the slope `β = Ω/δ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UmbrellaKappa {
    /// `κ₀(4ββ₀ ± trD√(β²−β₀²+(trD/4)²))/(4β₀²−(trD/2)²)`, `+` root first.
    pub exact: (f64, f64),
    /// `κ₀[1 + 8((β−β₀)/trD)²]`, the Whitney-umbrella form near `+κ₀`.
    pub local_plus: f64,
    /// `−κ₀[1 + 8((β+β₀)/trD)²]`, near `−κ₀`.
    pub local_minus: f64,
}

pub fn umbrella_kappa(md: &ModalData, beta: f64, nu: f64) -> Result<UmbrellaKappa, PerturbationError> {
    let kappa0 = ep_location(md, nu)?.kappa0;
    let b0 = beta0(md)?;
    let t = md.tr_d;
    let den = 4.0 * b0 * b0 - (t / 2.0).powi(2);
    if den == 0.0 {
        return Err(PerturbationError::DegenerateOrientation);
    }
    let radicand = beta * beta - b0 * b0 + (t / 4.0).powi(2);
    if radicand < 0.0 {
        return Err(PerturbationError::Undefined("umbrella radicand is negative"));
    }
    let root = t * radicand.sqrt();
    Ok(UmbrellaKappa {
        exact: (
            kappa0 * (4.0 * beta * b0 + root) / den,
            kappa0 * (4.0 * beta * b0 - root) / den,
        ),
        local_plus: kappa0 * (1.0 + 8.0 * ((beta - b0) / t).powi(2)),
        local_minus: -kappa0 * (1.0 + 8.0 * ((beta + b0) / t).powi(2)),
    })
}

/// Frobenius norm of `iω₁δD + κK + νN`.
pub fn epsilon(md: &ModalData, circulatory: &Matrix, delta: f64, kappa: f64, nu: f64) -> f64 {
    let d = Matrix::from_rows([[md.d[0], md.d[1]], [md.d[1], md.d[2]]]);
    let imag = d.scale(md.omega1 * delta).frobenius_norm();
    let real = (&md.k_matrix().scale(kappa) + &circulatory.scale(nu)).frobenius_norm();
    imag.hypot(real)
}

/// Every closed-form quantity at one operating point. Quantities that are
/// undefined there are `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationReport {
    pub modal: ModalData,
    pub gains: Gains,
    pub c: Complex64,
    pub lambda_approx: [Complex64; 4],
    pub a: f64,
    pub beta0: Option<f64>,
    pub kappa0: Option<f64>,
    pub omega0: Option<f64>,
    pub omega_cr_nu: Option<f64>,
    pub b: f64,
    pub epsilon: f64,
    /// First-order verdict, see [`is_stable_b`].
    pub stable_first_order: bool,
}

pub fn report(model: &RotorModel, pert: &PerturbationSet) -> Result<PerturbationReport, PerturbationError> {
    let md = ModalData::from_model(model, pert)?;
    let g = pert.gains();
    let a = invariant_a(&md)?;
    let ep = ep_location(&md, g.nu).ok();
    Ok(PerturbationReport {
        modal: md,
        gains: g,
        c: coupling_c(&md, g.spin, g.delta, g.kappa, g.nu),
        lambda_approx: approx_eigenvalues(&md, g.spin, g.delta, g.kappa, g.nu),
        a,
        beta0: beta0(&md).ok(),
        kappa0: ep.map(|e| e.kappa0),
        omega0: ep.map(|e| e.omega0),
        omega_cr_nu: omega_cr_nu(&md, g.delta, g.nu).ok(),
        b: criterion_b(&md, a, g.spin, g.kappa, g.delta, g.nu),
        epsilon: epsilon(&md, pert.circulatory(), g.delta, g.kappa, g.nu),
        stable_first_order: is_stable_b(&md, a, g.spin, g.kappa, g.delta, g.nu),
    })
}

/// Full pencil at an exceptional point; used to cross-check chains against
/// the exact solver.
pub fn ep_pencil(
    md: &ModalData,
    nu: f64,
    branch: EpBranch,
) -> Result<crate::model::QuadraticPencil, PerturbationError> {
    let ep = ep_location(md, nu)?;
    let kappa = branch.sign() * ep.kappa0;
    let model = RotorModel::single(md.omega1)?;
    let d = Matrix::from_rows([[md.d[0], md.d[1]], [md.d[1], md.d[2]]]);
    let pert = PerturbationSet::new(
        d,
        md.k_matrix(),
        default_circulatory(2),
        Gains::new(0.0, kappa, nu, 0.0),
    )?;
    Ok(build_pencil(&model, &pert)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> ModalData {
        ModalData::new(
            &Matrix::diag(&[-1.0, 2.0]),
            &Matrix::from_rows([[1.0, 1.0], [1.0, 2.0]]),
            1.0,
        )
        .unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn modal_data_of_fig1() {
        let md = fig1();
        let s5 = 5f64.sqrt();
        assert!(close(md.rho1, (3.0 + s5) / 2.0, 1e-15));
        assert!(close(md.rho2, (3.0 - s5) / 2.0, 1e-15));
        assert_eq!((md.mu1, md.mu2, md.det_d), (2.0, -1.0, -2.0));
        assert_eq!(md.tr_kd, 3.0);
        let iso = ModalData::new(&Matrix::identity(2), &Matrix::identity(2), 1.0).unwrap();
        assert_eq!((iso.rho1, iso.rho2), (1.0, 1.0));
    }

    #[test]
    fn coupling_examples() {
        let md = fig1();
        let c = coupling_c(&md, 0.0, 0.3, 0.2, 0.0);
        assert!(close(c.re, 0.038125, 1e-15) && close(c.im, -0.0225, 1e-15));
        assert_eq!(
            coupling_c(&md, 0.4, 0.0, 0.0, 0.0),
            Complex64::new(-0.16000000000000003, 0.0)
        );
        assert!(close(coupling_c(&md, 0.0, 0.0, 0.0, 0.2).re, 0.01, 1e-16));
    }

    #[test]
    fn approximate_eigenvalue_examples() {
        let md = fig1();
        let l = approx_eigenvalues(&md, 0.0, 0.0, 0.2, 0.0);
        let s5 = 5f64.sqrt();
        let mut ims: Vec<f64> = l[..2].iter().map(|z| z.im).collect();
        ims.sort_by(f64::total_cmp);
        assert!(close(ims[0], 1.15 - 0.05 * s5, 1e-14) && close(ims[1], 1.15 + 0.05 * s5, 1e-14));
        let l = approx_eigenvalues(&md, 0.0, 0.3, 0.2, 0.0);
        let max = l.iter().map(|z| z.re).fold(f64::MIN, f64::max);
        assert!(close(max, 0.12797, 1e-5));
        let l = approx_eigenvalues(&md, 0.3, 0.0, 0.0, 0.0);
        assert!(close(l[0].im, 1.3, 1e-15) && close(l[1].im, 0.7, 1e-15));
        assert_eq!(l[2], l[0].conj());
    }

    #[test]
    fn hyperbola_vertex_and_crossing() {
        let md = fig1();
        let (hi, lo) = veering_hyperbola(&md, 0.2, 0.0);
        assert!(close(hi, 1.15 + 0.1118034, 1e-7) && close(lo, 1.15 - 0.1118034, 1e-7));
        assert_eq!(veering_hyperbola(&md, 0.0, -0.3), (1.3, 0.7));
    }

    #[test]
    fn invariant_a_examples() {
        let md = fig1();
        assert!(close(invariant_a(&md).unwrap(), -1.0, 1e-14));
        let k = Matrix::from_rows([[0.3, -0.4], [-0.4, 1.1]]);
        let def = ModalData::new(&Matrix::identity(2), &k, 1.0).unwrap();
        assert!(close(invariant_a(&def).unwrap(), def.rho_gap().powi(2), 1e-14));
        let prop = ModalData::new(&k, &k, 1.0).unwrap();
        assert!(close(
            invariant_a(&prop).unwrap(),
            prop.det_d * prop.rho_gap().powi(2),
            1e-14
        ));
    }

    #[test]
    fn beta0_examples() {
        let md = fig1();
        assert!(close(beta0(&md).unwrap(), 3.0 / (4.0 * 5f64.sqrt()), 1e-15));
        let k = Matrix::from_rows([[0.3, -0.4], [-0.4, 1.1]]);
        let prop = ModalData::new(&Matrix::identity(2).scale(2.5), &k, 1.0).unwrap();
        assert!(beta0(&prop).unwrap().abs() < 1e-15);
        let iso = ModalData::new(&Matrix::identity(2), &Matrix::identity(2), 1.0).unwrap();
        assert!(beta0(&iso).is_err());
    }

    #[test]
    fn cone_examples() {
        let md = fig1();
        let a = invariant_a(&md).unwrap();
        assert!(close(cone_quadratic(&md, a, 0.0, 0.2, 0.3), -0.04 - 0.18, 1e-15));
        assert!(!cone_criterion(&md, a, 0.0, 0.2, 0.3));
        let def = ModalData::new(&Matrix::diag(&[1.0, 2.0]), &md.k_matrix(), 1.0).unwrap();
        let ad = invariant_a(&def).unwrap();
        assert!(cone_criterion(&def, ad, 0.3, -0.7, 0.1));
        assert!(!cone_criterion(&def, ad, 0.3, -0.7, -0.1));
    }

    #[test]
    fn b_reduces_to_cone_without_circulation() {
        let md = fig1();
        let a = invariant_a(&md).unwrap();
        for (spin, kappa, delta) in [(0.1, 0.2, 0.3), (0.05, -0.1, 0.2), (0.3, 0.0, 0.1)] {
            let b = criterion_b(&md, a, spin, kappa, delta, 0.0);
            let q = cone_quadratic(&md, a, spin, kappa, delta);
            assert_eq!(b > 0.0, q > 0.0);
        }
    }

    #[test]
    fn b_vanishes_at_the_ep() {
        let md = fig1();
        let a = invariant_a(&md).unwrap();
        let k0 = ep_location(&md, 0.2).unwrap().kappa0;
        let b = criterion_b(&md, a, 0.0, k0, 1e-6, 0.2);
        assert!(b.abs() < 1e-12, "{b}");
    }

    #[test]
    fn critical_speed_examples() {
        let md = fig1();
        assert!(close(
            omega_cr_nu(&md, 0.3, 0.0).unwrap(),
            0.3 * 2f64.sqrt() / 2.0,
            1e-15
        ));
        let def = ModalData::new(&Matrix::diag(&[1.0, 2.0]), &md.k_matrix(), 1.0).unwrap();
        assert!(omega_cr_nu(&def, 0.3, 0.0).is_err());
        let nu = 0.3 * 2f64.sqrt();
        assert_eq!(omega_cr_nu(&def, 0.3, nu).unwrap(), 0.0);
        // pole at ν = δ·trD/2 = 0.45: large just below, undefined beyond
        assert!(omega_cr_nu(&def, 0.3, 0.45 - 1e-9).unwrap() > 1e3);
        assert!(omega_cr_nu(&def, 0.3, 0.5).is_err());
    }

    #[test]
    fn ep_location_examples() {
        let md = fig1();
        let ep = ep_location(&md, 0.2).unwrap();
        assert!(close(ep.kappa0, 0.178885, 1e-6) && close(ep.omega0, 1.126201, 1e-6));
        let m = ep.omega0_minus.unwrap();
        assert!(close(m, (1.0 - 0.6 / 5f64.sqrt()).sqrt(), 1e-15));
        let zero = ep_location(&md, 0.0).unwrap();
        assert_eq!((zero.kappa0, zero.omega0), (0.0, 1.0));
        let sh = ModalData::new(&Matrix::zeros(2), &Matrix::diag(&[-1.0, 1.0]), 1.0).unwrap();
        assert!(close(ep_location(&sh, 0.37).unwrap().kappa0, 0.37, 1e-16));
    }

    #[test]
    fn jordan_chain_of_fig1() {
        let md = fig1();
        for branch in [EpBranch::Plus, EpBranch::Minus] {
            let ch = jordan_chain(&md, 0.2, branch).unwrap();
            assert!(ch.residual0 < 1e-8 * ch.scale);
            assert!(ch.residual1 < 1e-8 * ch.scale);
            assert!(ch.alignment > 1.0 - 1e-6);
            assert!(!ch.fallback);
            assert!(ch.residual0_without_nu > 0.1);
        }
        let ch = jordan_chain(&md, 0.2, EpBranch::Plus).unwrap();
        assert_eq!(ch.sigma, 1.0);
        let ratio = ch.u0[0].re / ch.u0[1].re;
        assert!(close(ratio, -0.236068, 1e-6));
        assert!(matches!(
            jordan_chain(&md, 0.0, EpBranch::Plus),
            Err(PerturbationError::DegenerateChain)
        ));
    }

    #[test]
    fn jordan_chain_with_degenerate_closed_form() {
        let md = ModalData::new(&Matrix::zeros(2), &Matrix::from_rows([[1.0, -0.5], [-0.5, 1.0]]), 1.0).unwrap();
        let ch = jordan_chain(&md, 0.1, EpBranch::Plus).unwrap();
        assert!(ch.fallback);
        assert!(ch.residual1 < 1e-8 * ch.scale);
    }

    #[test]
    fn umbrella_examples() {
        let md = fig1();
        let nu = 0.2;
        let k0 = ep_location(&md, nu).unwrap().kappa0;
        let b0 = beta0(&md).unwrap();
        let (p, m) = umbrella_omega(&md, k0, nu).unwrap();
        assert!(close(p, b0, 1e-15) && close(m, b0, 1e-15));
        let (p, m) = umbrella_omega(&md, 2.0 * k0, nu).unwrap();
        assert!(close(p, 2.0 * b0 + 3f64.sqrt() / 4.0, 1e-14));
        assert!(close(m, 2.0 * b0 - 3f64.sqrt() / 4.0, 1e-14));
        assert!(umbrella_omega(&md, 0.5 * k0, nu).is_err());

        let u = umbrella_kappa(&md, b0, nu).unwrap();
        assert!(close(u.local_plus, k0, 1e-16));
        assert!(close(u.exact.1, k0, 1e-15));
        let u = umbrella_kappa(&md, b0 + 1.0 / 8f64.sqrt(), nu).unwrap();
        assert!(close(u.local_plus, 2.0 * k0, 1e-15));
    }

    #[test]
    fn umbrella_forms_invert_each_other() {
        let md = fig1();
        let nu = 0.2;
        let k0 = ep_location(&md, nu).unwrap().kappa0;
        for f in [1.001, 1.01, 1.1] {
            let (_, slope) = umbrella_omega(&md, f * k0, nu).unwrap();
            let u = umbrella_kappa(&md, slope, nu).unwrap();
            assert!(close(u.exact.1, f * k0, 1e-12), "{f}: {:?}", u.exact);
        }
    }

    #[test]
    fn epsilon_is_frobenius() {
        let md = fig1();
        let e = epsilon(&md, &default_circulatory(2), 0.3, 0.0, 0.0);
        assert!(close(e, 0.3 * 5f64.sqrt(), 1e-15));
    }

    #[test]
    fn larger_rotors_are_refused() {
        let m = RotorModel::string(2).unwrap();
        let p = PerturbationSet::unperturbed(4);
        assert!(matches!(report(&m, &p), Err(PerturbationError::NotImplemented(4))));
    }

    #[test]
    fn report_at_fig1b() {
        let m = RotorModel::single(1.0).unwrap();
        let p = PerturbationSet::new(
            Matrix::diag(&[-1.0, 2.0]),
            Matrix::from_rows([[1.0, 1.0], [1.0, 2.0]]),
            default_circulatory(2),
            Gains::new(0.3, 0.2, 0.0, 0.0),
        )
        .unwrap();
        let r = report(&m, &p).unwrap();
        assert!(close(r.a, -1.0, 1e-14));
        assert!(!r.stable_first_order);
        assert_eq!(r.kappa0, Some(0.0));
    }

    #[test]
    fn b_criterion_matches_first_order_eigenvalues() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        for _ in 0..4000 {
            let mut r = || rng.gen_range(-1.0..1.0);
            let (d11, d12, d22) = (r(), r(), r());
            let (k11, k12, k22) = (r(), r(), r());
            let d = Matrix::from_rows([[d11, d12], [d12, d22]]);
            let k = Matrix::from_rows([[k11, k12], [k12, k22]]);
            let omega1 = 0.5 + r().abs() * 2.0;
            let Ok(md) = ModalData::new(&d, &k, omega1) else {
                continue;
            };
            let Ok(a) = invariant_a(&md) else { continue };
            let (spin, kappa, delta, nu) = (0.3 * r(), 0.3 * r(), 0.3 * r(), 0.3 * r());
            let approx = approx_eigenvalues(&md, spin, delta, kappa, nu);
            let max_re = approx.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
            if max_re.abs() < 1e-9 {
                continue;
            }
            assert_eq!(
                is_stable_b(&md, a, spin, kappa, delta, nu),
                max_re < 0.0,
                "{md:?} {spin} {kappa} {delta} {nu}"
            );
            checked += 1;
        }
        assert!(checked > 3000);
    }
}
