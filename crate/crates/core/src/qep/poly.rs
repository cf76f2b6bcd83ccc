//! Real polynomials and their complex roots.
//!
//! Roots come from the Aberth–Ehrlich simultaneous iteration followed by a
//! guarded Newton polish. The starting points are fixed (a rotated set of
//! roots of unity on a bound of the root moduli) so every run is
//! bit-reproducible.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::QepError;
use crate::tolerances::Tolerances;

const MAX_ITERATIONS: usize = 500;
const POLISH_STEPS: usize = 3;

/// Monic real polynomial. `coefficients()[k]` multiplies `λ^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct CharPoly {
    coeffs: Vec<f64>,
}

impl CharPoly {
    /// Normalizes to a monic polynomial. Fails for an empty list, a zero
    /// leading coefficient, or non-finite entries.
    pub fn from_ascending(coeffs: Vec<f64>) -> Result<Self, QepError> {
        let lead = *coeffs.last().ok_or(QepError::Degenerate("empty coefficient list"))?;
        if coeffs.len() < 2 {
            return Err(QepError::Degenerate("polynomial of degree zero"));
        }
        if lead == 0.0 {
            return Err(QepError::Degenerate("leading coefficient is zero"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(QepError::Overflow);
        }
        let coeffs = if lead == 1.0 {
            coeffs
        } else {
            coeffs.iter().map(|c| c / lead).collect()
        };
        Ok(Self { coeffs })
    }

    /// Monic polynomial with the given roots (a real polynomial only when the
    /// roots are closed under conjugation; imaginary parts are dropped).
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (k, ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= ck * r;
            }
            c = next;
        }
        Self {
            coeffs: c.iter().map(|z| z.re).collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Ascending coefficients, constant term first.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Descending coefficients, leading `1` first.
    pub fn coefficients_descending(&self) -> Vec<f64> {
        self.coeffs.iter().rev().copied().collect()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.eval_with_derivative(z).0
    }

    /// `(p(z), p′(z), Σ|aₖ||z|^k)`; the last value bounds the rounding error
    /// of the Horner evaluation up to a factor `2·deg·ε`.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64, f64) {
        let n = self.degree();
        let az = z.norm();
        let mut p = Complex64::new(self.coeffs[n], 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        let mut bound = self.coeffs[n].abs();
        for k in (0..n).rev() {
            dp = dp * z + p;
            p = p * z + self.coeffs[k];
            bound = bound * az + self.coeffs[k].abs();
        }
        (p, dp, bound)
    }

    /// Coefficients of the `m`-th derivative, ascending.
    pub fn derivative(&self, m: usize) -> Vec<f64> {
        let mut c = self.coeffs.clone();
        for _ in 0..m {
            c = c.iter().enumerate().skip(1).map(|(k, v)| v * k as f64).collect();
        }
        c
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// `|p(z)| / (max|aₖ|·(1+|z|)^deg)`.
    pub fn scaled_residual(&self, z: Complex64) -> f64 {
        let scale = self.max_abs_coefficient() * (1.0 + z.norm()).powi(self.degree() as i32);
        self.eval(z).norm() / scale
    }
}

/// All complex roots with the default tolerances.
pub fn poly_roots(poly: &CharPoly) -> Result<Vec<Complex64>, QepError> {
    poly_roots_with(poly, &Tolerances::default())
}

/// All complex roots, each with scaled residual below `tol.root_residual`.
/// Multiple roots come back as tight clusters of simple roots; see
/// [`cluster_roots`].
pub fn poly_roots_with(poly: &CharPoly, tol: &Tolerances) -> Result<Vec<Complex64>, QepError> {
    let n = poly.degree();
    let c = poly.coefficients();
    let radius = (0..n)
        .map(|k| c[k].abs().powf(1.0 / (n - k) as f64))
        .fold(0.0, f64::max);
    if radius == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); n]);
    }

    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, PI * (2 * k + 1) as f64 / n as f64))
        .collect();
    aberth(poly, &mut z);
    for zk in z.iter_mut() {
        polish(poly, zk);
    }
    conjugate_symmetrize(&mut z);

    let worst = z.iter().map(|zk| poly.scaled_residual(*zk)).fold(0.0, f64::max);
    if !(worst < tol.root_residual) {
        return Err(QepError::NonConvergence {
            best: z,
            residual: worst,
        });
    }
    z.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    Ok(z)
}

fn aberth(poly: &CharPoly, z: &mut [Complex64]) {
    let n = z.len();
    let rounding = 4.0 * n as f64 * f64::EPSILON;
    let mut frozen = vec![false; n];
    for _ in 0..MAX_ITERATIONS {
        let mut moved = false;
        for k in 0..n {
            if frozen[k] {
                continue;
            }
            let (p, dp, bound) = poly.eval_with_derivative(z[k]);
            if p.norm() <= rounding * bound {
                frozen[k] = true;
                continue;
            }
            let repulsion: Complex64 = (0..n)
                .filter(|j| *j != k)
                .map(|j| {
                    let d = z[k] - z[j];
                    if d.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let newton = p / dp;
            let mut w = newton / (1.0 - newton * repulsion);
            if !w.is_finite() {
                // p′ vanished: nudge off the critical point
                w = Complex64::new(1e-3, 1e-3) * (1.0 + z[k].norm());
            }
            z[k] -= w;
            moved = true;
            if w.norm() <= f64::EPSILON * z[k].norm() {
                frozen[k] = true;
            }
        }
        if !moved {
            break;
        }
    }
}

fn polish(poly: &CharPoly, z: &mut Complex64) {
    let mut best = poly.eval(*z).norm();
    for _ in 0..POLISH_STEPS {
        if best == 0.0 {
            return;
        }
        let (p, dp, _) = poly.eval_with_derivative(*z);
        let step = p / dp;
        if !step.is_finite() {
            return;
        }
        let cand = *z - step;
        let r = poly.eval(cand).norm();
        if r < best {
            *z = cand;
            best = r;
        } else {
            return;
        }
    }
}

/// Restores exact closure under conjugation, which real coefficients
/// guarantee but rounding breaks. Roots are matched to the closest conjugate
/// partner; nearly real unmatched roots are projected onto the real axis.
fn conjugate_symmetrize(z: &mut [Complex64]) {
    let n = z.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            pairs.push(((z[i] - z[j].conj()).norm(), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used = vec![false; n];
    for (d, i, j) in pairs {
        if used[i] || used[j] {
            continue;
        }
        let scale = 1.0 + z[i].norm().max(z[j].norm());
        if d > 1e-6 * scale {
            continue;
        }
        used[i] = true;
        used[j] = true;
        if i == j {
            z[i].im = 0.0;
        } else {
            let m = (z[i] + z[j].conj()) * 0.5;
            z[i] = m;
            z[j] = m.conj();
        }
    }
}

/// A group of roots closer than the cluster tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct RootCluster {
    /// Indices into the root list.
    pub members: Vec<usize>,
    /// Mean of the members, refined to a root of `p^(m−1)` for `m > 1`.
    pub center: Complex64,
    /// `false` when `p(center)` is at rounding level, so the spread of the
    /// members carries no information and they stand for one multiple root.
    pub resolved: bool,
}

impl RootCluster {
    pub fn multiplicity(&self) -> usize {
        self.members.len()
    }
}

/// Groups roots whose distance is below `tol.cluster·(1+|λ|)`.
///
/// A root of multiplicity `m` is a simple root of `p^(m−1)`, so the cluster
/// mean is refined by Newton on that derivative; the refined center is kept
/// only if it stays within the cluster radius.
pub fn cluster_roots(poly: &CharPoly, roots: &[Complex64], tol: &Tolerances) -> Vec<RootCluster> {
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut k = i;
        while p[k] != r {
            let next = p[k];
            p[k] = r;
            k = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let scale = 1.0 + roots[i].norm().max(roots[j].norm());
            if (roots[i] - roots[j]).norm() < tol.cluster * scale {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
        .into_iter()
        .map(|members| {
            let m = members.len();
            let mean = members.iter().map(|i| roots[*i]).sum::<Complex64>() / m as f64;
            if m == 1 {
                return RootCluster {
                    members,
                    center: mean,
                    resolved: true,
                };
            }
            let center = refine_center(poly, mean, m, tol.cluster * (1.0 + mean.norm()));
            let (p, _, bound) = poly.eval_with_derivative(center);
            let rounding = 4.0 * poly.degree() as f64 * f64::EPSILON * bound;
            RootCluster {
                members,
                center,
                resolved: p.norm() > rounding,
            }
        })
        .collect()
}

/// Replaces the members of every unresolved cluster by its center.
pub fn snap_unresolved(roots: &mut [Complex64], clusters: &[RootCluster]) {
    for cl in clusters.iter().filter(|c| !c.resolved) {
        for &i in &cl.members {
            roots[i] = cl.center;
        }
    }
}

fn refine_center(poly: &CharPoly, start: Complex64, multiplicity: usize, radius: f64) -> Complex64 {
    let Ok(d) = CharPoly::from_ascending(poly.derivative(multiplicity - 1)) else {
        return start;
    };
    let mut z = start;
    for _ in 0..20 {
        let (p, dp, _) = d.eval_with_derivative(z);
        let step = p / dp;
        if !step.is_finite() {
            break;
        }
        z -= step;
        if step.norm() <= f64::EPSILON * (1.0 + z.norm()) {
            break;
        }
    }
    if (z - start).norm() <= radius {
        z
    } else {
        start
    }
}
