//! Near an exceptional point the stability boundary in the `(Ω, δ)` plane
//! is a pair of lines through the origin. Compares the traced slopes with
//! the first-order prediction as `κ → κ₀`.

use gyrospec::atlas::{boundary_slope_at_origin, sweep2d, trace_boundary};
use gyrospec::cli::presets::{fig1_damping, fig1_stiffness, umbrella_grid, UMBRELLA_OFFSETS};
use gyrospec::model::default_circulatory;
use gyrospec::perturbation::{beta0, ep_location, umbrella_omega, ModalData};
use gyrospec::{Gains, PerturbationSet, RotorModel, Tolerances};

fn main() {
    let nu = 0.2;
    let rotor = RotorModel::single(1.0).unwrap();
    let md = ModalData::new(&fig1_damping(), &fig1_stiffness(), 1.0).unwrap();
    let kappa0 = ep_location(&md, nu).unwrap().kappa0;
    println!("beta0 = {:.6}", beta0(&md).unwrap());

    for ratio in UMBRELLA_OFFSETS {
        let kappa = ratio * kappa0;
        let template = PerturbationSet::new(
            fig1_damping(),
            fig1_stiffness(),
            default_circulatory(2),
            Gains::new(0.0, kappa, nu, 0.0),
        )
        .unwrap();
        let grid = umbrella_grid(&md, nu, kappa, kappa0, 80).unwrap();
        let chart = sweep2d(&rotor, &template, grid, &Tolerances::default(), 0);
        let lines = trace_boundary(&chart);
        let fit = boundary_slope_at_origin(&chart, &lines).unwrap();
        let (p, m) = umbrella_omega(&md, kappa, nu).unwrap();
        println!(
            "kappa/kappa0 = {ratio}: traced {:.6} / {:.6}, predicted {p:.6} / {m:.6}",
            fit.slopes.0, fit.slopes.1
        );
    }
}
