//! In the frame rotating with the body the system is periodic. Its Floquet
//! multipliers must equal `−e^{λT}` for the eigenvalues `λ` of the
//! autonomous pencil.

use gyrospec::floquet::{monodromy, PeriodicSystem};
use gyrospec::linalg::Matrix;
use gyrospec::model::default_circulatory;
use gyrospec::{Gains, PerturbationSet, RotorModel, Tolerances};

fn main() {
    let rotor = RotorModel::single(1.0).unwrap();
    for spin in [0.05, 0.3, 0.8] {
        let pert = PerturbationSet::new(
            Matrix::diag(&[-1.0, 2.0]),
            Matrix::from_rows([[1.0, 1.0], [1.0, 2.0]]),
            default_circulatory(2),
            Gains::new(0.3, 0.2, 0.0, spin),
        )
        .unwrap();
        let system = PeriodicSystem::new(rotor.clone(), pert).unwrap();
        let r = monodromy(&system, 4096, &Tolerances::default()).unwrap();
        println!(
            "Omega = {spin}: T = {:.4}, max |mu| = {:.4e}, match error {:.1e}, step-halving {:.1e}",
            r.period,
            r.max_modulus(),
            r.match_error,
            r.halving_error
        );
    }
}
