//! Figure presets. Only the input parameters live here; every derived
//! quantity is recomputed when a preset runs.

use super::config::{Command, GainSpec, RunConfig};
use crate::atlas::{Axis, Grid, Param};
use crate::linalg::Matrix;
use crate::perturbation::{invariant_a, umbrella_omega, ModalData};

/// `κ/κ₀` of the `(Ω, δ)` cross-sections through the umbrella.
pub const UMBRELLA_OFFSETS: [f64; 3] = [1.001, 1.01, 1.1];

/// Depth `δ_max/(κ−κ₀)` of the umbrella cross-sections.
pub const UMBRELLA_DEPTH: f64 = 0.25;

/// Indefinite damping of the eigenvalue-branch figure.
pub fn fig1_damping() -> Matrix {
    Matrix::from_rows([[-1.0, 0.0], [0.0, 2.0]])
}

pub fn fig1_stiffness() -> Matrix {
    Matrix::from_rows([[1.0, 1.0], [1.0, 2.0]])
}

/// Base configuration of a figure command.
pub fn figure_config(command: Command) -> RunConfig {
    let mut c = RunConfig::new(command, vec![1.0]);
    c.damping = fig1_damping();
    c.stiffness = fig1_stiffness();
    match command {
        Command::Fig1 => {
            c.kappa = GainSpec::Fixed(0.2);
            c.delta = GainSpec::List(vec![0.0, 0.3]);
            c.spin = GainSpec::Range {
                min: -1.0,
                max: 1.0,
                count: 201,
            };
        }
        Command::Fig2 => {
            c.delta = GainSpec::Fixed(0.3);
            c.spin = GainSpec::Range {
                min: -0.4,
                max: 0.4,
                count: 201,
            };
            c.kappa = GainSpec::Range {
                min: -0.3,
                max: 0.3,
                count: 201,
            };
        }
        Command::Fig3 => {
            c.nu = GainSpec::Fixed(0.2);
            c.delta = GainSpec::List(vec![0.05, 0.1, 0.2]);
            c.spin = GainSpec::Range {
                min: -0.4,
                max: 0.4,
                count: 201,
            };
            c.kappa = GainSpec::Range {
                min: -0.4,
                max: 0.4,
                count: 201,
            };
        }
        _ => {}
    }
    c
}

/// One panel of the flutter-domain figure.
#[derive(Clone, Debug, PartialEq)]
pub struct Fig2Panel {
    pub label: char,
    pub damping: Matrix,
    pub stiffness: Matrix,
    pub a: f64,
}

/// The three shapes of the subcritical flutter domain: `A > 0` (ellipse),
/// `A = 0` (stripe) and the configured matrices, expected to give `A < 0`
/// (hyperbola). The sign of each `A` is checked before use.
pub fn fig2_panels(config: &RunConfig) -> Result<Vec<Fig2Panel>, String> {
    let omega1 = config.omegas[0];
    let a_of = |d: &Matrix, k: &Matrix| -> Result<f64, String> {
        let md = ModalData::new(d, k, omega1).map_err(|e| e.to_string())?;
        invariant_a(&md).map_err(|e| e.to_string())
    };
    let mut panels = Vec::new();
    for (label, d, k, want) in [
        (
            'a',
            Matrix::from_rows([[-0.25, 0.0], [0.0, 1.5]]),
            fig1_stiffness(),
            1.0,
        ),
        (
            'b',
            Matrix::from_rows([[0.0, 1.0], [1.0, 2.0]]),
            Matrix::diag(&[1.0, 2.0]),
            0.0,
        ),
        ('c', config.damping.clone(), config.stiffness.clone(), -1.0),
    ] {
        let a = a_of(&d, &k)?;
        let ok = if want == 0.0 { a.abs() <= 1e-12 } else { a * want > 0.0 };
        if !ok {
            return Err(format!("panel ({label}) needs A with the sign of {want}, got A = {a}"));
        }
        panels.push(Fig2Panel {
            label,
            damping: d,
            stiffness: k,
            a,
        });
    }
    Ok(panels)
}

/// `(Ω, δ)` grid for the cross-section at `κ` near `κ₀`. The frame holds
/// the origin and both first-order boundary lines; the `Ω` spacing puts at
/// least eight cells across the stable wedge at an eighth of the depth.
pub fn umbrella_grid(md: &ModalData, nu: f64, kappa: f64, kappa0: f64, delta_nodes: usize) -> Result<Grid, String> {
    let (s1, s2) = umbrella_omega(md, kappa, nu).map_err(|e| e.to_string())?;
    let delta_max = UMBRELLA_DEPTH * (kappa - kappa0).abs();
    let (lo, hi) = (s1.min(s2).min(0.0) * delta_max, s1.max(s2).max(0.0) * delta_max);
    let pad = 0.1 * (hi - lo);
    let wedge = (s1 - s2).abs() * delta_max / 8.0;
    let cells = (8.0 * (hi - lo + 2.0 * pad) / wedge).ceil();
    let spin_nodes = (cells as usize + 1).clamp(201, 4001);
    let spin = Axis::new(Param::Spin, lo - pad, hi + pad, spin_nodes)?;
    let delta = Axis::new(Param::Delta, 0.0, delta_max, delta_nodes + 1)?;
    Grid::new(spin, delta)
}
