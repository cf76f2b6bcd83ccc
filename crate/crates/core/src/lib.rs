//! Spectra of rotating gyroscopic systems with damping, stiffness, and
//! circulatory perturbations.

pub mod atlas;
pub mod cli;
pub mod floquet;
pub mod linalg;
pub mod matching;
pub mod model;
pub mod perturbation;
pub mod qep;
pub mod tolerances;

pub use model::{build_pencil, Gains, PerturbationSet, QuadraticPencil, RotorModel};
pub use qep::{char_poly, solve_qep, Spectrum};
pub use tolerances::Tolerances;
