//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! A criterion can fail while the implementation behaves as designed (the
//! quantity it asks for is not attainable). Such a criterion still prints
//! FAIL; the process exits nonzero only when a check that the code itself
//! guarantees is violated.

mod common;

use std::time::Instant;

use gyrospec::atlas::{boundary_slope_at_origin, classify, sweep2d, trace_boundary, Grid, StabilityClass};
use gyrospec::cli::presets::{fig2_panels, figure_config, umbrella_grid, UMBRELLA_OFFSETS};
use gyrospec::cli::Command;
use gyrospec::floquet::{integrate, monodromy, PeriodicSystem};
use gyrospec::linalg::Matrix;
use gyrospec::matching::pairing_distance;
use gyrospec::model::default_circulatory;
use gyrospec::perturbation::{
    approx_eigenvalues, beta0, cone_quadratic, criterion_b, ep_location, epsilon, invariant_a, invariant_a_forms,
    jordan_chain, omega_cr_nu, umbrella_omega, EpBranch, ModalData,
};
use gyrospec::{build_pencil, char_poly, solve_qep, Gains, PerturbationSet, RotorModel, Tolerances};
use num_complex::Complex64;
use rand::Rng;

use common::*;

struct Outcome {
    pass: bool,
    /// False when a guaranteed property broke, not just the criterion.
    sound: bool,
    detail: String,
}

impl Outcome {
    fn plain(pass: bool, detail: String) -> Self {
        Self {
            pass,
            sound: pass,
            detail,
        }
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("EP certification", ep_certification),
        ("A identity", a_identity),
        ("first-order accuracy", first_order_accuracy),
        ("flutter-domain morphology", morphology),
        ("umbrella slopes", umbrella_slopes),
        ("B reductions", b_reductions),
        ("Krein marginality", krein_marginality),
        ("Thomson-Tait-Chetaev", thomson_tait_chetaev),
        ("Floquet duality", floquet_duality),
        ("QEP oracle equivalence", oracle_equivalence),
        ("Jordan chains", jordan_chains),
    ];
    let mut broken = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        println!(
            "{} {:>2} {name}: {} [{:.2}s]",
            if outcome.pass { "PASS" } else { "FAIL" },
            i + 1,
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
        if !outcome.sound {
            broken.push(i + 1);
        }
    }
    if !broken.is_empty() {
        eprintln!("guaranteed checks failed in criteria {broken:?}");
        std::process::exit(1);
    }
}

fn fig1_modal() -> ModalData {
    ModalData::new(&fig1_damping(), &fig1_stiffness(), 1.0).unwrap()
}

fn ep_certification() -> Outcome {
    let nu = 0.2;
    let md = fig1_modal();
    let kappa0 = 2.0 * nu / 5f64.sqrt();
    let omega0 = (1.0 + 3.0 * nu / 5f64.sqrt()).sqrt();
    let ep = ep_location(&md, nu).unwrap();
    let (model, pert) = fig1(Gains::new(0.0, kappa0, nu, 0.0));
    let pencil = build_pencil(&model, &pert).unwrap();
    let a = char_poly(&pencil).unwrap().coefficients().to_vec();
    let disc = (a[2] * a[2] - 4.0 * a[0]).abs() / (a[2] * a[2]);
    let odd = a[1].abs().max(a[3].abs());

    let spectrum = solve_qep(&pencil).unwrap();
    let mut miss = 0.0f64;
    for target in [Complex64::new(0.0, omega0), Complex64::new(0.0, -omega0)] {
        let d = spectrum
            .clusters
            .iter()
            .filter(|c| c.multiplicity() == 2)
            .map(|c| (c.center - target).norm())
            .fold(f64::INFINITY, f64::min);
        miss = miss.max(d);
    }
    let location = (ep.kappa0 - kappa0).abs().max((ep.omega0 - omega0).abs());
    let pass = disc <= 1e-10 && odd == 0.0 && miss <= 1e-8 && location <= 1e-15;
    Outcome::plain(
        pass,
        format!("relative discriminant {disc:.1e}, cluster offset {miss:.1e}, closed-form offset {location:.1e}"),
    )
}

fn a_identity() -> Outcome {
    let mut rng = rng(2);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let d = random_symmetric(&mut rng, 2);
        let k = random_symmetric(&mut rng, 2);
        let md = ModalData::new(&d, &k, rng.gen_range(0.5..2.0)).unwrap();
        let f = invariant_a_forms(&md);
        let scale = f
            .first
            .abs()
            .max(f.second.abs())
            .max(md.det_d.abs() * md.rho_gap().powi(2));
        worst = worst.max((f.first - f.second).abs() / scale);
    }

    // caption values in integers: D = diag(-1, 2), K = [[1, 1], [1, 2]]
    let (d11, d12, d22) = (-1i64, 0i64, 2i64);
    let (k11, k12, k22) = (1i64, 1i64, 2i64);
    let det_d = d11 * d22 - d12 * d12;
    let tr_d = d11 + d22;
    let gap2 = (k11 - k22).pow(2) + 4 * k12 * k12;
    let cross = (k11 - k22) * (d11 - d22) + 4 * k12 * d12;
    let mixed = 2 * (k11 * d11 + 2 * k12 * d12 + k22 * d22) - (k11 + k22) * tr_d;
    let first = det_d * gap2 + cross * cross;
    let second_num = tr_d * tr_d * gap2 - mixed * mixed;
    let exact = first == -1 && second_num == -4;
    let computed = invariant_a(&fig1_modal()).unwrap();
    let pass = worst <= 1e-10 && exact && computed == -1.0;
    Outcome::plain(
        pass,
        format!(
            "worst relative gap {worst:.1e} on 1e4 draws, rational A = {first} and {second_num}/4, computed {computed}"
        ),
    )
}

const SCALINGS: [f64; 4] = [1.0, 0.5, 0.25, 0.125];

/// Pairing distances between the exact and first-order spectra at one
/// Fig. 1(b) operating point scaled by each `t`.
fn scaled_errors(spin: f64) -> Vec<f64> {
    let md = fig1_modal();
    let (delta, kappa) = (0.3, 0.2);
    SCALINGS
        .iter()
        .map(|t| {
            let (model, pert) = fig1(Gains::new(t * delta, t * kappa, 0.0, t * spin));
            let exact = solve_qep(&build_pencil(&model, &pert).unwrap()).unwrap().eigenvalues();
            let approx = approx_eigenvalues(&md, t * spin, t * delta, t * kappa, 0.0);
            pairing_distance(&exact, &approx)
        })
        .collect()
}

/// Least-squares slope of `log e` against `log t`.
fn fitted_order(errors: &[f64]) -> f64 {
    let xs: Vec<f64> = SCALINGS.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn first_order_accuracy() -> Outcome {
    let mut worst = (f64::INFINITY, 0.0);
    let mut pairwise = f64::INFINITY;
    for spin in [-0.2, -0.1, 0.0, 0.1, 0.2] {
        let e = scaled_errors(spin);
        let order = fitted_order(&e);
        if order < worst.0 {
            worst = (order, spin);
        }
        for w in e.windows(2) {
            pairwise = pairwise.min((w[0] / w[1]).log2());
        }
    }
    Outcome::plain(
        worst.0 >= 1.9,
        format!(
            "lowest fitted order {:.3} at Omega = {} before scaling (delta = 0.3, kappa = 0.2); lowest single-halving order {pairwise:.3}",
            worst.0, worst.1
        ),
    )
}

fn morphology() -> Outcome {
    let config = figure_config(Command::Fig2);
    let model = RotorModel::single(1.0).unwrap();
    let axes = config.axes();
    let grid = Grid::new(axes[0], axes[1]).unwrap();
    let gains = config.perturbation().gains();
    let panels = fig2_panels(&config).unwrap();
    let mut notes = Vec::new();
    let mut pass = grid.x.count == 201 && grid.y.count == 201 && gains.delta == 0.3 && gains.nu == 0.0;
    for panel in panels.iter().filter(|p| p.label != 'b') {
        let pert = PerturbationSet::new(
            panel.damping.clone(),
            panel.stiffness.clone(),
            default_circulatory(2),
            gains,
        )
        .unwrap();
        let chart = sweep2d(&model, &pert, grid, &Tolerances::default(), 0);
        let lines = trace_boundary(&chart);
        let closed = lines.iter().filter(|l| l.closed).count();
        let ok = if panel.a > 0.0 {
            lines.len() == 1 && closed == 1
        } else {
            let k_edge = |p: &[f64; 2]| (p[1].abs() - grid.y.max).abs() <= 1e-12;
            lines.len() == 2
                && lines.iter().all(|l| {
                    !l.closed
                        && l.ends_on_frame == [true, true]
                        && k_edge(&l.points[0])
                        && k_edge(l.points.last().unwrap())
                })
                && lines
                    .iter()
                    .all(|l| l.points[0][1].signum() != l.points.last().unwrap()[1].signum())
        };
        pass &= ok && chart.failures() == 0;
        notes.push(format!(
            "A = {:+.4}: {} polylines, {closed} closed",
            panel.a,
            lines.len()
        ));
    }
    Outcome::plain(pass, notes.join("; "))
}

fn umbrella_slopes() -> Outcome {
    let nu = 0.2;
    let md = fig1_modal();
    let b0 = beta0(&md).unwrap();
    let expected_b0 = 3.0 / (4.0 * 5f64.sqrt());
    let kappa0 = ep_location(&md, nu).unwrap().kappa0;
    let model = RotorModel::single(1.0).unwrap();
    let mut deviations = Vec::new();
    let mut prediction_gap = 0.0f64;
    let mut rows = Vec::new();
    for ratio in UMBRELLA_OFFSETS {
        let kappa = ratio * kappa0;
        let grid = umbrella_grid(&md, nu, kappa, kappa0, 80).unwrap();
        let (_, pert) = fig1(Gains::new(0.0, kappa, nu, 0.0));
        let chart = sweep2d(&model, &pert, grid, &Tolerances::default(), 0);
        let lines = trace_boundary(&chart);
        let fitted = match boundary_slope_at_origin(&chart, &lines) {
            Ok(f) => f.slopes,
            Err(e) => {
                return Outcome {
                    pass: false,
                    sound: false,
                    detail: format!("slope fit failed at {ratio}: {e}"),
                }
            }
        };
        let (p1, p2) = umbrella_omega(&md, kappa, nu).unwrap();
        let predicted = (p1.max(p2), p1.min(p2));
        prediction_gap = prediction_gap.max((fitted.0 - predicted.0).abs().max((fitted.1 - predicted.1).abs()));
        deviations.push((fitted.0 - b0).abs().max((fitted.1 - b0).abs()));
        rows.push(format!("{ratio}: {:.4}/{:.4}", fitted.0, fitted.1));
    }
    // deviations are listed from the smallest offset upwards
    let converging = deviations.windows(2).all(|w| w[0] < w[1]);
    let at_smallest = deviations[0];
    let pass = at_smallest <= 1e-2 && (b0 - expected_b0).abs() <= 1e-15;
    Outcome {
        pass,
        sound: prediction_gap <= 1e-4 && converging,
        detail: format!(
            "slopes {} vs beta0 {b0:.4}; deviation {at_smallest:.4} at the smallest offset; traced vs first-order prediction within {prediction_gap:.1e}",
            rows.join(", ")
        ),
    }
}

fn b_reductions() -> Outcome {
    let mut rng = rng(6);
    let mut disagreements = 0;
    let mut counted = 0;
    while counted < 10_000 {
        let d = random_symmetric(&mut rng, 2);
        let k = random_symmetric(&mut rng, 2);
        let md = ModalData::new(&d, &k, rng.gen_range(0.5..2.0)).unwrap();
        let a = invariant_a(&md).unwrap();
        let (spin, kappa, delta) = (
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-0.5..0.5),
        );
        let q = cone_quadratic(&md, a, spin, kappa, delta);
        let b = criterion_b(&md, a, spin, kappa, delta, 0.0);
        let wt = md.omega1 * md.tr_d;
        let scale = kappa * kappa * a.abs() + (2.0 * spin * wt).powi(2) + (md.det_d * wt * wt * delta * delta).abs();
        if q.abs() <= 1e-12 * scale {
            continue;
        }
        counted += 1;
        if b.signum() != q.signum() {
            disagreements += 1;
        }
    }

    // B at κ = 0 is monotone in Ω², so bisection on [0, Ωmax] finds the root
    let mut worst = 0.0f64;
    let mut bisected = 0;
    while bisected < 1000 {
        let d = random_symmetric(&mut rng, 2);
        let k = random_symmetric(&mut rng, 2);
        let Ok(md) = ModalData::new(&d, &k, 1.0) else { continue };
        let (delta, nu) = (rng.gen_range(0.05..0.5), rng.gen_range(0.0..0.3));
        let Ok(target) = omega_cr_nu(&md, delta, nu) else {
            continue;
        };
        if !(target > 1e-3 && target < 10.0) {
            continue;
        }
        let a = invariant_a(&md).unwrap();
        let f = |spin: f64| criterion_b(&md, a, spin, 0.0, delta, nu);
        let (mut lo, mut hi) = (0.0, 4.0 * target);
        if f(lo).signum() == f(hi).signum() {
            worst = f64::INFINITY;
            break;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid).signum() == f(lo).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        worst = worst.max((0.5 * (lo + hi) - target).abs());
        bisected += 1;
    }
    let pass = disagreements == 0 && worst <= 1e-8;
    Outcome::plain(
        pass,
        format!("{disagreements} sign disagreements in 1e4 draws at nu = 0; worst bisection offset {worst:.1e} over 1e3 draws"),
    )
}

/// Subcritical draw: `n ∈ {1, 2}` doublets, spin within `0.9·Ω_cr`.
fn subcritical_draw(rng: &mut rand_chacha::ChaCha8Rng, i: usize) -> (RotorModel, Matrix, f64) {
    let model = random_rotor(rng, 1 + i % 2);
    let k = random_symmetric(rng, model.dim());
    let k = k.scale(1.0 / k.frobenius_norm());
    let spin = 0.9 * model.critical_speed() * rng.gen_range(-1.0..1.0);
    (model, k, spin)
}

fn krein_marginality() -> Outcome {
    let mut rng = rng(7);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..1000 {
        let (model, k, spin) = subcritical_draw(&mut rng, i);
        let kappa = rng.gen_range(-0.1..0.1);
        let dim = model.dim();
        let pert = PerturbationSet::new(
            Matrix::identity(dim),
            k,
            default_circulatory(dim),
            Gains::new(0.0, kappa, 0.0, spin),
        )
        .unwrap();
        let eigs = solve_qep(&build_pencil(&model, &pert).unwrap()).unwrap().eigenvalues();
        worst = worst.max(max_re(&eigs));
    }
    Outcome::plain(worst < 1e-8, format!("largest Re lambda {worst:.1e} over 1e3 draws"))
}

fn thomson_tait_chetaev() -> Outcome {
    let mut rng = rng(8);
    let mut other = 0;
    for i in 0..1000 {
        let (model, k, spin) = subcritical_draw(&mut rng, i);
        let dim = model.dim();
        let d = random_positive_definite(&mut rng, dim, 0.05);
        let delta = 0.5 - rng.gen_range(0.0..0.5);
        let kappa = rng.gen_range(-0.1..0.1);
        let pert = PerturbationSet::new(d, k, default_circulatory(dim), Gains::new(delta, kappa, 0.0, spin)).unwrap();
        let v = classify(&model, &pert).unwrap();
        if v.class != StabilityClass::AsymptoticallyStable {
            other += 1;
        }
    }
    Outcome::plain(other == 0, format!("{other} of 1e3 draws not asymptotically stable"))
}

fn floquet_duality() -> Outcome {
    let mut rng = rng(9);
    let model = RotorModel::single(1.0).unwrap();
    let tol = Tolerances::default();
    let mut worst = 0.0f64;
    let mut failures = 0;
    for _ in 0..100 {
        let d = random_symmetric(&mut rng, 2);
        let k = random_symmetric(&mut rng, 2);
        let md = ModalData::new(&d, &k, 1.0).unwrap();
        let n = default_circulatory(2);
        let dir = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let unit = epsilon(&md, &n, dir[0], dir[1], dir[2]);
        let s = rng.gen_range(0.0..0.3) / unit;
        let spin = rng.gen_range(0.05..0.9) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let gains = Gains::new(s * dir[0], s * dir[1], s * dir[2], spin);
        let pert = PerturbationSet::new(d, k, n, gains).unwrap();
        let ps = PeriodicSystem::new(model.clone(), pert).unwrap();
        match monodromy(&ps, 4096, &tol) {
            Ok(r) => worst = worst.max(r.match_error),
            Err(_) => failures += 1,
        }
    }

    // order from the Fig. 1 data against a fine reference
    let mut orders = Vec::new();
    for spin in [0.3, 0.5, 0.8] {
        let (model, pert) = fig1(Gains::new(0.1, 0.2, 0.1, spin));
        let ps = PeriodicSystem::new(model, pert).unwrap();
        let reference = integrate(&ps, ps.period(), 8192);
        let e: Vec<f64> = [256, 512, 1024]
            .iter()
            .map(|&n| (&integrate(&ps, ps.period(), n) - &reference).frobenius_norm())
            .collect();
        orders.extend(e.windows(2).map(|w| (w[0] / w[1]).log2()));
    }
    let lowest = orders.iter().cloned().fold(f64::INFINITY, f64::min);
    let highest = orders.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pass = failures == 0 && worst < 1e-6 && lowest >= 3.8 && highest <= 4.2;
    Outcome::plain(
        pass,
        format!("worst match error {worst:.1e} over 100 draws ({failures} failed); halving orders {lowest:.3}..{highest:.3}"),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut rng = rng(10);
    let mut worst = 0.0f64;
    let mut worst_residual = 0.0f64;
    let mut failures = 0;
    for i in 0..1000 {
        let model = random_rotor(&mut rng, 1 + i % 2);
        let dim = model.dim();
        let gains = Gains::new(
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-2.0..2.0),
        );
        let pert = PerturbationSet::new(
            random_symmetric(&mut rng, dim),
            random_symmetric(&mut rng, dim),
            random_skew(&mut rng, dim),
            gains,
        )
        .unwrap();
        let pencil = build_pencil(&model, &pert).unwrap();
        match solve_qep(&pencil) {
            Ok(s) => {
                worst = worst.max(pairing_distance(&s.eigenvalues(), &companion_eigenvalues(&pencil)));
                for p in &s.pairs {
                    worst_residual = worst_residual.max(p.poly_residual);
                }
            }
            Err(_) => failures += 1,
        }
    }
    let pass = failures == 0 && worst <= 1e-8 && worst_residual < 1e-12;
    Outcome::plain(
        pass,
        format!(
            "worst eigenvalue gap {worst:.1e}, worst root residual {worst_residual:.1e}, {failures} solver failures"
        ),
    )
}

fn jordan_chains() -> Outcome {
    let nu = 0.2;
    let md = fig1_modal();
    let mut pass = true;
    let mut notes = Vec::new();
    for branch in [EpBranch::Plus, EpBranch::Minus] {
        let chain = match jordan_chain(&md, nu, branch) {
            Ok(c) => c,
            Err(e) => return Outcome::plain(false, format!("{branch:?}: {e}")),
        };
        // the eigenvector formula with K replaced by sK
        let sk = branch.sign();
        let [k11, k12, k22] = md.k.map(|x| sk * x);
        let dir = [k11 - k22, 2.0 * k12 + md.rho_gap()];
        let dot = chain.u0[0] * dir[0] + chain.u0[1] * dir[1];
        let norm_u = chain.u0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let parallel = 1.0 - dot.norm() / (norm_u * dir[0].hypot(dir[1]));
        let bound = 1e-8 * chain.scale;
        let ok = chain.residual0 <= bound * norm_u.max(1.0)
            && chain.residual1 <= bound
            && parallel <= 1e-6
            && 1.0 - chain.alignment <= 1e-6
            && !chain.fallback;
        pass &= ok;
        notes.push(format!(
            "{branch:?}: residuals {:.1e}/{:.1e} (bound {bound:.1e}), null-vector misalignment {:.1e}",
            chain.residual0,
            chain.residual1,
            1.0 - chain.alignment
        ));
    }
    Outcome::plain(pass, notes.join("; "))
}
