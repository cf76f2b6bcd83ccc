//! Search and certification of double eigenvalues in the `(Ω, κ)` plane.
//!
//! A double root of `p(λ; Ω, κ) = det L(λ)` solves `p = p′ = 0`, four real
//! equations in `(Re λ, Im λ, Ω, κ)`. Candidates from a coarse grid of the
//! smallest eigenvalue gap are polished by damped Newton and then
//! certified: the discriminant of `p` must vanish, and the numerical rank of
//! `L(λ₀)` tells a semi-simple (diabolical) from a defective (exceptional)
//! double eigenvalue.

use num_complex::Complex64;

use crate::linalg::complex_singular_directions;
use crate::model::{build_pencil, Gains, PerturbationSet, RotorModel};
use crate::qep::{char_poly, eigenvalues_with, CharPoly, QepError};
use crate::tolerances::Tolerances;

const NEWTON_STEPS: usize = 200;
const MAX_CANDIDATES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SingularKind {
    /// Double semi-simple eigenvalue, two eigenvectors.
    Diabolical,
    /// Double defective eigenvalue with a Jordan chain.
    Exceptional,
}

impl SingularKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SingularKind::Diabolical => "diabolical",
            SingularKind::Exceptional => "exceptional",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingularPointRecord {
    pub kind: SingularKind,
    /// Location `(Ω, κ, δ, ν)`.
    pub gains: Gains,
    /// The double eigenvalue, `Im ≥ 0`.
    pub eigenvalue: Complex64,
    /// `|disc p|` relative to its Hadamard bound.
    pub discriminant: f64,
    /// Two smallest singular values of `L(λ₀)`, relative to the term scale.
    pub singular_values: [f64; 2],
    /// Scaled polynomial residual at `λ₀`.
    pub residual: f64,
}

/// A candidate that converged but failed certification or left the box.
#[derive(Clone, Debug, PartialEq)]
pub struct NearMiss {
    pub gains: Gains,
    pub eigenvalue: Complex64,
    pub discriminant: f64,
    pub singular_values: [f64; 2],
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EpSearch {
    pub records: Vec<SingularPointRecord>,
    pub near_misses: Vec<NearMiss>,
}

/// Rectangle of the `(Ω, κ)` plane searched with a `nodes × nodes` coarse
/// grid; `δ` and `ν` come from the template.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchBox {
    pub spin: (f64, f64),
    pub kappa: (f64, f64),
    pub nodes: usize,
}

impl SearchBox {
    pub fn new(spin: (f64, f64), kappa: (f64, f64)) -> Self {
        Self { spin, kappa, nodes: 21 }
    }

    fn contains(&self, spin: f64, kappa: f64) -> bool {
        let slack = 1e-9;
        let inside = |v: f64, (a, b): (f64, f64)| v >= a - slack * (1.0 + a.abs()) && v <= b + slack * (1.0 + b.abs());
        inside(spin, self.spin) && inside(kappa, self.kappa)
    }

    fn node(&self, i: usize, range: (f64, f64)) -> f64 {
        if self.nodes < 2 {
            return 0.5 * (range.0 + range.1);
        }
        range.0 + (range.1 - range.0) * i as f64 / (self.nodes - 1) as f64
    }
}

/// Locates and certifies the double eigenvalues inside `search`.
pub fn find_exceptional_points(
    model: &RotorModel,
    template: &PerturbationSet,
    search: SearchBox,
    tol: &Tolerances,
) -> Result<EpSearch, QepError> {
    let base = template.gains();
    let gains = |spin: f64, kappa: f64| Gains { spin, kappa, ..base };
    let poly_at = |spin: f64, kappa: f64| -> Result<CharPoly, QepError> {
        let pert = template.with_gains(gains(spin, kappa))?;
        char_poly(&build_pencil(model, &pert)?)
    };

    // coarse stage: relative gap of the closest eigenvalue pair
    let n = search.nodes.max(1);
    let mut gap = vec![vec![(f64::INFINITY, Complex64::new(0.0, 0.0)); n]; n];
    for (i, row) in gap.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let (s, k) = (search.node(i, search.spin), search.node(j, search.kappa));
            let pert = template.with_gains(gains(s, k))?;
            let eigs = eigenvalues_with(&build_pencil(model, &pert)?, tol)?;
            *cell = closest_pair(&eigs);
        }
    }
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let g = gap[i][j].0;
            let is_min = (i.saturating_sub(1)..=(i + 1).min(n - 1))
                .flat_map(|a| (j.saturating_sub(1)..=(j + 1).min(n - 1)).map(move |b| (a, b)))
                .all(|(a, b)| gap[a][b].0 >= g);
            if is_min {
                candidates.push((g, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    candidates.truncate(MAX_CANDIDATES);

    let mut out = EpSearch::default();
    for (_, i, j) in candidates {
        let start = [
            gap[i][j].1.re,
            gap[i][j].1.im,
            search.node(i, search.spin),
            search.node(j, search.kappa),
        ];
        let Some(x) = newton(&poly_at, start) else {
            continue;
        };
        let lambda = Complex64::new(x[0], x[1].abs());
        let (spin, kappa) = (x[2], x[3]);
        let poly = poly_at(spin, kappa)?;
        let discriminant = discriminant_ratio(&poly);
        let pert = template.with_gains(gains(spin, kappa))?;
        let pencil = build_pencil(model, &pert)?;
        let sd = complex_singular_directions(&pencil.eval(lambda));
        let scale = pencil.term_scale(lambda);
        let sv = [
            sd.values[0] / scale,
            sd.values.get(1).copied().unwrap_or(f64::INFINITY) / scale,
        ];
        let null_dim = sv.iter().filter(|s| **s <= tol.rank).count();
        let residual = poly.scaled_residual(lambda);
        let g = gains(spin, kappa);

        let duplicate = |h: &Gains, mu: Complex64| {
            (h.spin - spin).abs() < 1e-6 && (h.kappa - kappa).abs() < 1e-6 && (mu - lambda).norm() < 1e-6
        };
        if out.records.iter().any(|r| duplicate(&r.gains, r.eigenvalue))
            || out.near_misses.iter().any(|r| duplicate(&r.gains, r.eigenvalue))
        {
            continue;
        }
        let reason = if !search.contains(spin, kappa) {
            Some("converged outside the search box".to_string())
        } else if !(discriminant < tol.discriminant) {
            Some(format!(
                "discriminant {discriminant:.3e} above {:.1e}",
                tol.discriminant
            ))
        } else if !(residual < tol.root_residual) {
            Some(format!("polynomial residual {residual:.3e}"))
        } else if null_dim == 0 {
            Some(format!("L(lambda) has full numerical rank (sigma_min {:.3e})", sv[0]))
        } else {
            None
        };
        match reason {
            Some(reason) => out.near_misses.push(NearMiss {
                gains: g,
                eigenvalue: lambda,
                discriminant,
                singular_values: sv,
                reason,
            }),
            None => out.records.push(SingularPointRecord {
                kind: if null_dim >= 2 {
                    SingularKind::Diabolical
                } else {
                    SingularKind::Exceptional
                },
                gains: g,
                eigenvalue: lambda,
                discriminant,
                singular_values: sv,
                residual,
            }),
        }
    }
    out.records.sort_by(|a, b| {
        a.gains
            .kappa
            .total_cmp(&b.gains.kappa)
            .then(a.gains.spin.total_cmp(&b.gains.spin))
            .then(a.eigenvalue.im.total_cmp(&b.eigenvalue.im))
    });
    Ok(out)
}

/// Relative distance of the closest eigenvalue pair and its midpoint.
fn closest_pair(eigs: &[Complex64]) -> (f64, Complex64) {
    let mut best = (f64::INFINITY, Complex64::new(0.0, 0.0));
    for i in 0..eigs.len() {
        for j in i + 1..eigs.len() {
            let d = (eigs[i] - eigs[j]).norm() / (1.0 + eigs[i].norm().max(eigs[j].norm()));
            if d < best.0 {
                best = (d, 0.5 * (eigs[i] + eigs[j]));
            }
        }
    }
    best
}

/// `(p, p′)` scaled by `max|aₖ|·(1+|λ|)^deg`, as four reals.
fn residual_vector(poly: &CharPoly, lambda: Complex64) -> [f64; 4] {
    let (p, dp, _) = poly.eval_with_derivative(lambda);
    let s = poly.max_abs_coefficient() * (1.0 + lambda.norm()).powi(poly.degree() as i32);
    [p.re / s, p.im / s, dp.re / s, dp.im / s]
}

/// Levenberg–Marquardt on `(p, p′) = 0` over `(Re λ, Im λ, Ω, κ)` with a
/// central-difference Jacobian.
fn newton(poly_at: &impl Fn(f64, f64) -> Result<CharPoly, QepError>, start: [f64; 4]) -> Option<[f64; 4]> {
    let f = |x: &[f64; 4]| -> Option<[f64; 4]> {
        let poly = poly_at(x[2], x[3]).ok()?;
        Some(residual_vector(&poly, Complex64::new(x[0], x[1])))
    };
    let norm = |v: &[f64; 4]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let mut x = start;
    let mut fx = f(&x)?;
    let mut mu = 1e-6;
    for _ in 0..NEWTON_STEPS {
        if norm(&fx) < 1e-17 {
            break;
        }
        let mut jac = [[0.0; 4]; 4];
        for c in 0..4 {
            let h = 1e-7 * (1.0 + x[c].abs());
            let (mut xp, mut xm) = (x, x);
            xp[c] += h;
            xm[c] -= h;
            let (fp, fm) = (f(&xp)?, f(&xm)?);
            for r in 0..4 {
                jac[r][c] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
        let mut accepted = false;
        for _ in 0..30 {
            let mut a = [[0.0; 4]; 4];
            let mut g = [0.0; 4];
            for r in 0..4 {
                for c in 0..4 {
                    a[r][c] = (0..4).map(|k| jac[k][r] * jac[k][c]).sum();
                }
                g[r] = -(0..4).map(|k| jac[k][r] * fx[k]).sum::<f64>();
            }
            let diag_max = (0..4).map(|i| a[i][i]).fold(0.0, f64::max).max(1e-300);
            for (i, row) in a.iter_mut().enumerate() {
                row[i] += mu * diag_max;
            }
            let Some(dx) = solve4(a, g) else {
                mu *= 10.0;
                continue;
            };
            let cand = [x[0] + dx[0], x[1] + dx[1], x[2] + dx[2], x[3] + dx[3]];
            if let Some(fc) = f(&cand) {
                if norm(&fc) < norm(&fx) {
                    let small = dx.iter().zip(&x).all(|(d, v)| d.abs() <= 1e-15 * (1.0 + v.abs()));
                    x = cand;
                    fx = fc;
                    mu = (mu / 10.0).max(1e-15);
                    accepted = !small;
                    break;
                }
            }
            mu *= 10.0;
        }
        if !accepted {
            break;
        }
    }
    Some(x)
}

fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let piv = (col..4).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 || !a[piv][col].is_finite() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..4 {
            let factor = a[r][col] / a[col][col];
            for c in col..4 {
                a[r][c] -= factor * a[col][c];
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = [0.0; 4];
    for r in (0..4).rev() {
        let s: f64 = (r + 1..4).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// `|det Syl(p, p′)|` divided by the product of its row norms (Hadamard's
/// bound), so the value lies in `[0, 1]` and vanishes exactly at multiple
/// roots.
pub fn discriminant_ratio(poly: &CharPoly) -> f64 {
    let p = poly.coefficients_descending();
    let dp: Vec<f64> = {
        let d = poly.derivative(1);
        d.iter().rev().copied().collect()
    };
    let n = p.len() - 1;
    let size = 2 * n - 1;
    let mut m = vec![vec![0.0; size]; size];
    for r in 0..n - 1 {
        for (k, c) in p.iter().enumerate() {
            m[r][r + k] = *c;
        }
    }
    for r in 0..n {
        for (k, c) in dp.iter().enumerate() {
            m[n - 1 + r][r + k] = *c;
        }
    }
    let hadamard: f64 = m
        .iter()
        .map(|row| row.iter().map(|v| v * v).sum::<f64>().sqrt().ln())
        .sum();
    let mut log_det = 0.0;
    for col in 0..size {
        let piv = (col..size)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if m[piv][col] == 0.0 {
            return 0.0;
        }
        m.swap(col, piv);
        log_det += m[col][col].abs().ln();
        for r in col + 1..size {
            let factor = m[r][col] / m[col][col];
            if factor != 0.0 {
                for c in col..size {
                    m[r][c] -= factor * m[col][c];
                }
            }
        }
    }
    (log_det - hadamard).exp()
}
