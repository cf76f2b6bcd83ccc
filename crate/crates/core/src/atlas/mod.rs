//! Stability charts over two-parameter planes, their flutter boundaries, and
//! the diabolical and exceptional points inside them.

mod contour;
mod singular;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

pub use contour::{boundary_slope_at_origin, trace_boundary, BoundarySlopes, Polyline, SlopeError};
pub use singular::{
    discriminant_ratio, find_exceptional_points, EpSearch, NearMiss, SearchBox, SingularKind, SingularPointRecord,
};

use crate::model::{build_pencil, Gains, PerturbationSet, RotorModel};
use crate::qep::{eigenvalues_with, QepError};
use crate::tolerances::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StabilityClass {
    AsymptoticallyStable,
    Marginal,
    Flutter,
    Divergence,
}

impl StabilityClass {
    pub fn is_unstable(self) -> bool {
        matches!(self, StabilityClass::Flutter | StabilityClass::Divergence)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StabilityClass::AsymptoticallyStable => "asymptotically_stable",
            StabilityClass::Marginal => "marginal",
            StabilityClass::Flutter => "flutter",
            StabilityClass::Divergence => "divergence",
        }
    }
}

impl fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityVerdict {
    pub class: StabilityClass,
    pub max_re: f64,
    /// Eigenvalue attaining `max_re`, with `Im ≥ 0`.
    pub critical: Complex64,
}

/// Verdict for a list of eigenvalues. The marginal band is
/// `tol.marginal·max(1, max|λ|)` on either side of zero.
pub fn verdict_from_eigenvalues(eigs: &[Complex64], tol: &Tolerances) -> StabilityVerdict {
    let scale = eigs.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let band = tol.marginal * scale;
    let mut critical = eigs[0];
    for z in eigs {
        if z.re > critical.re || (z.re == critical.re && z.im > critical.im) {
            critical = *z;
        }
    }
    if critical.im < 0.0 {
        critical = critical.conj();
    }
    let max_re = critical.re;
    let class = if max_re < -band {
        StabilityClass::AsymptoticallyStable
    } else if max_re <= band {
        StabilityClass::Marginal
    } else if critical.im.abs() > band {
        StabilityClass::Flutter
    } else {
        StabilityClass::Divergence
    };
    StabilityVerdict {
        class,
        max_re,
        critical,
    }
}

pub fn classify(model: &RotorModel, pert: &PerturbationSet) -> Result<StabilityVerdict, QepError> {
    classify_with(model, pert, &Tolerances::default())
}

pub fn classify_with(
    model: &RotorModel,
    pert: &PerturbationSet,
    tol: &Tolerances,
) -> Result<StabilityVerdict, QepError> {
    let eigs = eigenvalues_with(&build_pencil(model, pert)?, tol)?;
    Ok(verdict_from_eigenvalues(&eigs, tol))
}

/// A scalar gain that can span a chart axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Param {
    Spin,
    Kappa,
    Delta,
    Nu,
}

impl Param {
    pub const ALL: [Param; 4] = [Param::Spin, Param::Kappa, Param::Delta, Param::Nu];

    pub fn name(self) -> &'static str {
        match self {
            Param::Spin => "Omega",
            Param::Kappa => "kappa",
            Param::Delta => "delta",
            Param::Nu => "nu",
        }
    }

    pub fn get(self, g: &Gains) -> f64 {
        match self {
            Param::Spin => g.spin,
            Param::Kappa => g.kappa,
            Param::Delta => g.delta,
            Param::Nu => g.nu,
        }
    }

    pub fn set(self, g: &mut Gains, value: f64) {
        match self {
            Param::Spin => g.spin = value,
            Param::Kappa => g.kappa = value,
            Param::Delta => g.delta = value,
            Param::Nu => g.nu = value,
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Omega" | "omega" | "spin" => Ok(Param::Spin),
            "kappa" => Ok(Param::Kappa),
            "delta" => Ok(Param::Delta),
            "nu" => Ok(Param::Nu),
            _ => Err(format!("unknown parameter `{s}` (expected Omega, kappa, delta or nu)")),
        }
    }
}

/// Evenly spaced axis with `count ≥ 2` nodes from `min` to `max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub param: Param,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(param: Param, min: f64, max: f64, count: usize) -> Result<Self, String> {
        if !(min.is_finite() && max.is_finite()) || min >= max || count < 2 {
            return Err(format!(
                "axis {param}: need finite min < max and at least 2 nodes, got {min}:{max}:{count}"
            ));
        }
        Ok(Self { param, min, max, count })
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            return self.max;
        }
        self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64
    }

    /// Value at a fractional node index.
    pub fn at(&self, t: f64) -> f64 {
        self.min + (self.max - self.min) * t / (self.count - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub x: Axis,
    pub y: Axis,
}

impl Grid {
    pub fn new(x: Axis, y: Axis) -> Result<Self, String> {
        if x.param == y.param {
            return Err(format!("both axes vary {}", x.param));
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.count * self.y.count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major cell index: `x` varies fastest.
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.x.count + ix
    }
}

/// A classified grid plus everything extracted from it.
#[derive(Clone, Debug)]
pub struct StabilityChart {
    pub model: RotorModel,
    /// Shapes and the gains held fixed off the chart plane.
    pub template: PerturbationSet,
    pub grid: Grid,
    pub tol: Tolerances,
    /// Row-major, see [`Grid::index`].
    pub cells: Vec<Result<StabilityVerdict, QepError>>,
    pub boundaries: Vec<Polyline>,
    pub singular_points: Vec<SingularPointRecord>,
}

impl StabilityChart {
    pub fn gains_at(&self, x: f64, y: f64) -> Gains {
        let mut g = self.template.gains();
        self.grid.x.param.set(&mut g, x);
        self.grid.y.param.set(&mut g, y);
        g
    }

    pub fn cell(&self, ix: usize, iy: usize) -> &Result<StabilityVerdict, QepError> {
        &self.cells[self.grid.index(ix, iy)]
    }

    /// `max Re λ` re-evaluated at an arbitrary point of the plane.
    pub fn max_re_at(&self, x: f64, y: f64) -> Result<f64, QepError> {
        let pert = self.template.with_gains(self.gains_at(x, y))?;
        Ok(classify_with(&self.model, &pert, &self.tol)?.max_re)
    }

    /// Number of cells with the given class.
    pub fn count(&self, class: StabilityClass) -> usize {
        self.cells
            .iter()
            .filter(|c| matches!(c, Ok(v) if v.class == class))
            .count()
    }

    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| c.is_err()).count()
    }
}

/// Classifies every node of `grid`. Cells are evaluated on a pool of
/// `threads` workers (0 = rayon default) and stored in grid order, so the
/// chart is identical for any worker count. Per-cell failures are kept in
/// the chart and do not stop the sweep.
pub fn sweep2d(
    model: &RotorModel,
    template: &PerturbationSet,
    grid: Grid,
    tol: &Tolerances,
    threads: usize,
) -> StabilityChart {
    let mut chart = StabilityChart {
        model: model.clone(),
        template: template.clone(),
        grid,
        tol: *tol,
        cells: Vec::new(),
        boundaries: Vec::new(),
        singular_points: Vec::new(),
    };
    let eval = |i: usize| {
        let (ix, iy) = (i % grid.x.count, i / grid.x.count);
        let g = chart.gains_at(grid.x.value(ix), grid.y.value(iy));
        let pert = template.with_gains(g)?;
        classify_with(model, &pert, tol)
    };
    let cells = run_in_pool(threads, || (0..grid.len()).into_par_iter().map(eval).collect());
    chart.cells = cells;
    chart
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool
/// when `threads == 0`.
pub fn run_in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    if threads == 0 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
