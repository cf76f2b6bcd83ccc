//! Exact eigenvalues and eigenvectors of the perturbed pencil at a point
//! of subcritical flutter.

use gyrospec::linalg::Matrix;
use gyrospec::model::default_circulatory;
use gyrospec::{build_pencil, solve_qep, Gains, PerturbationSet, RotorModel};

fn main() {
    let rotor = RotorModel::single(1.0).unwrap();
    let pert = PerturbationSet::new(
        Matrix::from_rows([[-1.0, 0.0], [0.0, 2.0]]),
        Matrix::from_rows([[1.0, 1.0], [1.0, 2.0]]),
        default_circulatory(2),
        Gains::new(0.3, 0.2, 0.0, 0.0),
    )
    .unwrap();
    let pencil = build_pencil(&rotor, &pert).unwrap();
    let spectrum = solve_qep(&pencil).unwrap();

    println!(
        "characteristic polynomial (ascending): {:?}",
        spectrum.poly.coefficients()
    );
    for p in &spectrum.pairs {
        println!(
            "lambda = {:+.6} {:+.6}i   |L u| = {:.1e}   poly residual = {:.1e}",
            p.value.re, p.value.im, p.residual, p.poly_residual
        );
    }
    // One eigenvalue in the right half-plane: the rotor flutters.
    println!("max Re = {:.6}", spectrum.max_growth_rate());
}
