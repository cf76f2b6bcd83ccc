//! Closed-form perturbation quantities next to the exact spectrum.

use gyrospec::linalg::Matrix;
use gyrospec::matching::pair_by;
use gyrospec::model::default_circulatory;
use gyrospec::perturbation::{invariant_a_forms, report};
use gyrospec::qep::eigenvalues;
use gyrospec::{build_pencil, Gains, PerturbationSet, RotorModel};

fn main() {
    let rotor = RotorModel::single(1.0).unwrap();
    let damping = Matrix::from_rows([[-1.0, 0.0], [0.0, 2.0]]);
    let stiffness = Matrix::from_rows([[1.0, 1.0], [1.0, 2.0]]);

    for (delta, kappa, nu, spin) in [(0.3, 0.2, 0.0, 0.0), (0.3, 0.2, 0.0, 0.1), (0.1, 0.2, 0.2, 0.0)] {
        let gains = Gains::new(delta, kappa, nu, spin);
        let pert = PerturbationSet::new(damping.clone(), stiffness.clone(), default_circulatory(2), gains).unwrap();
        let r = report(&rotor, &pert).unwrap();
        let forms = invariant_a_forms(&r.modal);
        println!("delta={delta} kappa={kappa} nu={nu} Omega={spin}");
        println!("  A = {} (second form {}), beta0 = {:?}", r.a, forms.second, r.beta0);
        println!("  B = {:.6}, first-order stable: {}", r.b, r.stable_first_order);
        if let (Some(k0), Some(w0)) = (r.kappa0.filter(|k| *k > 0.0), r.omega0) {
            println!("  exceptional points at kappa = +-{k0:.6}, lambda = {w0:.6}i");
        }

        let exact = eigenvalues(&build_pencil(&rotor, &pert).unwrap()).unwrap();
        let pairing = pair_by(&r.lambda_approx, &exact, |a, b| (a - b).norm());
        for (a, &j) in r.lambda_approx.iter().zip(&pairing.assignment) {
            let e = exact[j];
            println!("  approx {:+.5}{:+.5}i   exact {:+.5}{:+.5}i", a.re, a.im, e.re, e.im);
        }
    }
}
