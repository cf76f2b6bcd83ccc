//! Closed forms checked against symmetries and the exact solver.

mod common;

use common::*;
use gyrospec::linalg::Matrix;
use gyrospec::matching::pairing_distance;
use gyrospec::model::default_circulatory;
use gyrospec::perturbation::{
    approx_eigenvalues, beta0, criterion_b, ep_location, ep_pencil, invariant_a, jordan_chain, EpBranch, ModalData,
};
use gyrospec::{build_pencil, solve_qep, Gains, PerturbationSet, RotorModel};
use num_complex::Complex64;
use proptest::prelude::*;

fn sym() -> impl Strategy<Value = Matrix> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b, c)| Matrix::from_rows([[a, b], [b, c]]))
}

fn conjugate(q: &Matrix, m: &Matrix) -> Matrix {
    &(q * m) * &q.transpose()
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-12 * scale.max(a.abs()).max(b.abs()).max(1.0)
}

/// Modal data whose stiffness eigenvalues are at least 0.2 apart.
fn anisotropic() -> impl Strategy<Value = ModalData> {
    (sym(), sym(), 0.5f64..2.0)
        .prop_map(|(d, k, w)| ModalData::new(&d, &k, w).unwrap())
        .prop_filter("isotropic stiffness", |md| md.rho_gap() > 0.2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn rotating_the_coordinates_changes_nothing(d in sym(), k in sym(), theta in 0.0f64..6.3,
                                                 g in (-0.5f64..0.5, -0.5f64..0.5, -0.5f64..0.5, -0.5f64..0.5)) {
        let q = Matrix::from_rows([[theta.cos(), -theta.sin()], [theta.sin(), theta.cos()]]);
        let md = ModalData::new(&d, &k, 1.0).unwrap();
        let mr = ModalData::new(&conjugate(&q, &d), &conjugate(&q, &k), 1.0).unwrap();
        let (a, ar) = (invariant_a(&md).unwrap(), invariant_a(&mr).unwrap());
        prop_assert!(close(a, ar, 1.0));
        let (spin, kappa, delta, nu) = g;
        let b = criterion_b(&md, a, spin, kappa, delta, nu);
        prop_assert!(close(b, criterion_b(&mr, ar, spin, kappa, delta, nu), 1.0));
        if md.rho_gap() > 0.1 {
            prop_assert!(close(beta0(&md).unwrap(), beta0(&mr).unwrap(), 1.0));
        }
    }

    #[test]
    fn reflection_flips_spin_circulation_and_kappa0(md in anisotropic(), spin in -0.5f64..0.5, kappa in -0.5f64..0.5,
                                                    delta in -0.5f64..0.5, nu in 0.01f64..0.5) {
        let p = Matrix::diag(&[1.0, -1.0]);
        let d = Matrix::from_rows([[md.d[0], md.d[1]], [md.d[1], md.d[2]]]);
        let k = Matrix::from_rows([[md.k[0], md.k[1]], [md.k[1], md.k[2]]]);
        let mr = ModalData::new(&conjugate(&p, &d), &conjugate(&p, &k), md.omega1).unwrap();
        let a = invariant_a(&md).unwrap();
        prop_assert!(close(a, invariant_a(&mr).unwrap(), 1.0));
        prop_assert!(close(beta0(&md).unwrap(), beta0(&mr).unwrap(), 1.0));
        let b = criterion_b(&md, a, spin, kappa, delta, nu);
        prop_assert!(close(b, criterion_b(&mr, a, -spin, kappa, delta, -nu), 1.0));
        let (e, er) = (ep_location(&md, nu), ep_location(&mr, -nu));
        if let (Ok(e), Ok(er)) = (e, er) {
            prop_assert!(close(e.kappa0, -er.kappa0, 1.0));
        }
    }

    #[test]
    fn negating_k_swaps_the_two_eps(md in anisotropic(), nu in 0.01f64..0.5) {
        let d = Matrix::from_rows([[md.d[0], md.d[1]], [md.d[1], md.d[2]]]);
        let k = Matrix::from_rows([[-md.k[0], -md.k[1]], [-md.k[1], -md.k[2]]]);
        let neg = ModalData::new(&d, &k, md.omega1).unwrap();
        prop_assert!(close(invariant_a(&md).unwrap(), invariant_a(&neg).unwrap(), 1.0));
        prop_assert!(close(beta0(&md).unwrap(), -beta0(&neg).unwrap(), 1.0));
        // each side fails exactly when the other lacks its minus-branch frequency
        match (ep_location(&md, nu), ep_location(&neg, nu)) {
            (Ok(e), Ok(en)) => {
                prop_assert!(close(e.kappa0, en.kappa0, 1.0));
                prop_assert!(close(e.omega0_minus.unwrap(), en.omega0, 1.0));
                prop_assert!(close(en.omega0_minus.unwrap(), e.omega0, 1.0));
            }
            (Ok(e), Err(_)) => prop_assert!(e.omega0_minus.is_none()),
            (Err(_), Ok(en)) => prop_assert!(en.omega0_minus.is_none()),
            (Err(_), Err(_)) => prop_assert!(false, "both EPs missing"),
        }
    }

    #[test]
    fn first_order_error_vanishes_faster_than_the_perturbation(md in anisotropic(),
                                                               dir in (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)) {
        let model = RotorModel::single(md.omega1).unwrap();
        let d = Matrix::from_rows([[md.d[0], md.d[1]], [md.d[1], md.d[2]]]);
        let k = Matrix::from_rows([[md.k[0], md.k[1]], [md.k[1], md.k[2]]]);
        let (spin, delta, kappa, nu) = dir;
        let error = |t: f64| {
            let g = Gains::new(t * delta, t * kappa, t * nu, t * spin);
            let pert = PerturbationSet::new(d.clone(), k.clone(), default_circulatory(2), g).unwrap();
            let exact = solve_qep(&build_pencil(&model, &pert).unwrap()).unwrap().eigenvalues();
            pairing_distance(&exact, &approx_eigenvalues(&md, g.spin, g.delta, g.kappa, g.nu))
        };
        let (coarse, fine) = (error(0.02), error(0.01));
        // order above one; order two unless the reduced problem is nearly defective
        prop_assert!(fine / 0.01 <= 0.75 * coarse / 0.02 || fine <= 1e-13, "{} {}", coarse, fine);
    }

    #[test]
    fn jordan_chains_hold_at_both_eps(md in anisotropic(), nu in 0.02f64..0.5) {
        let ep = ep_location(&md, nu);
        prop_assume!(ep.is_ok());
        let ep = ep.unwrap();
        for branch in [EpBranch::Plus, EpBranch::Minus] {
            let Some((_, omega0)) = ep.at(branch) else { continue };
            prop_assume!(omega0 > 0.05);
            let chain = jordan_chain(&md, nu, branch).unwrap();
            let u = chain.u0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            prop_assert!(chain.residual0 <= 1e-8 * chain.scale * u.max(1.0));
            prop_assert!(chain.residual1 <= 1e-8 * chain.scale);

            let spectrum = solve_qep(&ep_pencil(&md, nu, branch).unwrap()).unwrap();
            let target = Complex64::new(0.0, omega0);
            let hit = spectrum.clusters.iter().any(|c| c.multiplicity() == 2 && (c.center - target).norm() <= 1e-8);
            prop_assert!(hit, "{:?}", spectrum.eigenvalues());
        }
    }
}

#[test]
fn fig1_chain_uses_the_closed_form_vector() {
    let md = ModalData::new(&fig1_damping(), &fig1_stiffness(), 1.0).unwrap();
    let chain = jordan_chain(&md, 0.2, EpBranch::Plus).unwrap();
    assert!(!chain.fallback);
    // (k₁₁−k₂₂, 2k₁₂+ρ₁−ρ₂) = (−1, 2+√5)
    let ratio = chain.u0[1] / chain.u0[0];
    assert!((ratio.re + 2.0 + 5f64.sqrt()).abs() < 1e-14 && ratio.im.abs() < 1e-14);
}
