//! Sweeps the `(Ω, κ)` plane for three damping matrices and reports the
//! shape of the traced flutter boundary: a closed loop when `A > 0`, two
//! open branches otherwise.

use gyrospec::atlas::{sweep2d, trace_boundary, Axis, Grid, Param, StabilityClass};
use gyrospec::linalg::Matrix;
use gyrospec::model::default_circulatory;
use gyrospec::perturbation::{invariant_a, ModalData};
use gyrospec::{Gains, PerturbationSet, RotorModel, Tolerances};

fn main() {
    let rotor = RotorModel::single(1.0).unwrap();
    let grid = Grid::new(
        Axis::new(Param::Spin, -0.4, 0.4, 101).unwrap(),
        Axis::new(Param::Kappa, -0.3, 0.3, 101).unwrap(),
    )
    .unwrap();
    let tol = Tolerances::default();

    let cases = [
        (Matrix::diag(&[-0.25, 1.5]), Matrix::from_rows([[1.0, 1.0], [1.0, 2.0]])),
        (Matrix::from_rows([[0.0, 1.0], [1.0, 2.0]]), Matrix::diag(&[1.0, 2.0])),
        (Matrix::diag(&[-1.0, 2.0]), Matrix::from_rows([[1.0, 1.0], [1.0, 2.0]])),
    ];
    for (d, k) in cases {
        let a = invariant_a(&ModalData::new(&d, &k, 1.0).unwrap()).unwrap();
        let template = PerturbationSet::new(d, k, default_circulatory(2), Gains::new(0.3, 0.0, 0.0, 0.0)).unwrap();
        let chart = sweep2d(&rotor, &template, grid, &tol, 0);
        let lines = trace_boundary(&chart);
        let closed = lines.iter().filter(|l| l.closed).count();
        println!(
            "A = {a:+.4}: {} flutter cells, {} polylines ({closed} closed), worst residual {:.1e}",
            chart.count(StabilityClass::Flutter),
            lines.len(),
            lines.iter().map(|l| l.max_residual()).fold(0.0, f64::max)
        );
    }
}
