//! Exceptional points created by the circulatory force: closed-form
//! location, the Jordan chain there, and the numerical search that finds
//! and certifies them.

use gyrospec::atlas::{find_exceptional_points, SearchBox};
use gyrospec::linalg::Matrix;
use gyrospec::model::default_circulatory;
use gyrospec::perturbation::{ep_location, jordan_chain, EpBranch, ModalData};
use gyrospec::{Gains, PerturbationSet, RotorModel, Tolerances};

fn main() {
    let nu = 0.2;
    let damping = Matrix::from_rows([[-1.0, 0.0], [0.0, 2.0]]);
    let stiffness = Matrix::from_rows([[1.0, 1.0], [1.0, 2.0]]);
    let md = ModalData::new(&damping, &stiffness, 1.0).unwrap();

    let ep = ep_location(&md, nu).unwrap();
    println!("closed form: kappa0 = {:.9}, omega0 = {:.9}", ep.kappa0, ep.omega0);

    for branch in [EpBranch::Plus, EpBranch::Minus] {
        let chain = jordan_chain(&md, nu, branch).unwrap();
        println!(
            "{branch:?}: kappa = {:+.6}, |L u0| = {:.1e}, chain residual = {:.1e} (scale {:.2})",
            chain.kappa, chain.residual0, chain.residual1, chain.scale
        );
    }

    let rotor = RotorModel::single(1.0).unwrap();
    let template = PerturbationSet::new(
        damping,
        stiffness,
        default_circulatory(2),
        Gains::new(0.0, 0.0, nu, 0.0),
    )
    .unwrap();
    let search = SearchBox::new((-0.05, 0.05), (0.1, 0.25));
    let found = find_exceptional_points(&rotor, &template, search, &Tolerances::default()).unwrap();
    for r in &found.records {
        println!(
            "found {} point at Omega = {:.2e}, kappa = {:.9}, lambda = {:.9}i",
            r.kind.as_str(),
            r.gains.spin,
            r.gains.kappa,
            r.eigenvalue.im
        );
    }
    for m in &found.near_misses {
        println!("near miss: {}", m.reason);
    }
}
