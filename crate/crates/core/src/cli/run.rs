//! Command dispatch. Each command writes one or more CSV files and returns
//! their paths.

use std::path::{Path, PathBuf};

use num_complex::Complex64;

use super::config::{Command, RunConfig};
use super::csv::{boundary_csv, num, opt, write_atomic, Csv};
use super::presets::{fig2_panels, umbrella_grid, UMBRELLA_OFFSETS};
use super::CliError;
use crate::atlas::{
    boundary_slope_at_origin, classify_with, find_exceptional_points, run_in_pool, sweep2d, trace_boundary, Grid,
    SearchBox, StabilityChart,
};
use crate::floquet::{monodromy, PeriodicSystem};
use crate::matching::pair_by;
use crate::model::{build_pencil, Branch, Gains, PerturbationSet, RotorModel};
use crate::perturbation::{approx_eigenvalues, ep_location, report, ModalData};
use crate::qep::{eigenvalues_with, solve_qep_with};

const SWEEP_HEADER: [&str; 7] = ["Omega", "kappa", "delta", "nu", "max_re", "im_at_max", "class"];

/// Where and how a command runs.
#[derive(Clone, Debug)]
pub struct RunContext {
    pub out_dir: PathBuf,
    /// Sweep workers; 0 picks the rayon default.
    pub threads: usize,
}

struct Output<'a> {
    dir: &'a Path,
    written: Vec<PathBuf>,
}

impl Output<'_> {
    fn write(&mut self, name: &str, csv: &Csv) -> Result<(), CliError> {
        let path = write_atomic(self.dir, name, csv.as_str())
            .map_err(|e| CliError::Domain(format!("cannot write {}: {e}", self.dir.join(name).display())))?;
        self.written.push(path);
        Ok(())
    }
}

/// Runs the configured command.
pub fn run(config: &RunConfig, ctx: &RunContext) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Output {
        dir: &ctx.out_dir,
        written: Vec::new(),
    };
    let model = config.model();
    let pert = config.perturbation();
    match config.command {
        Command::Spectrum => spectrum(config, &model, &pert, &mut out)?,
        Command::Mesh => mesh(config, &model, &mut out)?,
        Command::Report => report_cmd(config, &model, &pert, &mut out)?,
        Command::Sweep => {
            let chart = sweep(config, &model, &pert, ctx.threads)?;
            out.write("sweep.csv", &sweep_csv(&chart))?;
        }
        Command::Boundary => {
            let chart = sweep(config, &model, &pert, ctx.threads)?;
            let lines = run_in_pool(ctx.threads, || trace_boundary(&chart));
            out.write("boundary.csv", &boundary_csv(&lines))?;
        }
        Command::Ep => ep(config, &model, &pert, &mut out)?,
        Command::Floquet => floquet(config, &model, &pert, &mut out)?,
        Command::Fig1 => fig1(config, &model, &pert, &mut out)?,
        Command::Fig2 => fig2(config, &model, ctx.threads, &mut out)?,
        Command::Fig3 => fig3(config, &model, &pert, ctx.threads, &mut out)?,
    }
    Ok(out.written)
}

fn domain(e: impl std::fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

fn spectrum(config: &RunConfig, model: &RotorModel, pert: &PerturbationSet, out: &mut Output) -> Result<(), CliError> {
    let pencil = build_pencil(model, pert).map_err(domain)?;
    let spec = solve_qep_with(&pencil, &config.tol).map_err(domain)?;
    let mut pairs: Vec<_> = spec.pairs.iter().collect();
    pairs.sort_by(|a, b| {
        a.value
            .im
            .total_cmp(&b.value.im)
            .then(a.value.re.total_cmp(&b.value.re))
    });
    let mut csv = Csv::new(&["re", "im", "residual"]);
    for p in pairs {
        csv.row(&[num(p.value.re), num(p.value.im), num(p.residual)]);
    }
    out.write("spectrum.csv", &csv)
}

fn mesh(config: &RunConfig, model: &RotorModel, out: &mut Output) -> Result<(), CliError> {
    let mut csv = Csv::new(&["Omega", "s", "branch", "conjugate", "re", "im", "wave"]);
    for spin in config.spin.values() {
        for m in model.mesh_spectrum(spin) {
            let wave = model.classify_wave(m.s, m.branch, spin).map_err(domain)?;
            let branch = match m.branch {
                Branch::Plus => "+",
                Branch::Minus => "-",
            };
            csv.row(&[
                num(spin),
                m.s.to_string(),
                branch.to_string(),
                m.conjugate.to_string(),
                num(m.value.re),
                num(m.value.im),
                wave.as_str().to_string(),
            ]);
        }
    }
    out.write("mesh.csv", &csv)
}

fn report_cmd(
    config: &RunConfig,
    model: &RotorModel,
    pert: &PerturbationSet,
    out: &mut Output,
) -> Result<(), CliError> {
    let r = report(model, pert).map_err(domain)?;
    let verdict = classify_with(model, pert, &config.tol).map_err(domain)?;
    let g = r.gains;
    let mut csv = Csv::new(&[
        "Omega",
        "kappa",
        "delta",
        "nu",
        "c_re",
        "c_im",
        "A",
        "beta0",
        "kappa0",
        "omega0",
        "Omega_cr_nu",
        "B",
        "epsilon",
        "first_order_stable",
        "class",
        "max_re",
    ]);
    csv.row(&[
        num(g.spin),
        num(g.kappa),
        num(g.delta),
        num(g.nu),
        num(r.c.re),
        num(r.c.im),
        num(r.a),
        opt(r.beta0),
        opt(r.kappa0),
        opt(r.omega0),
        opt(r.omega_cr_nu),
        num(r.b),
        num(r.epsilon),
        r.stable_first_order.to_string(),
        verdict.class.to_string(),
        num(verdict.max_re),
    ]);
    out.write("report.csv", &csv)?;

    let pencil = build_pencil(model, pert).map_err(domain)?;
    let exact = eigenvalues_with(&pencil, &config.tol).map_err(domain)?;
    out.write("report_eigenvalues.csv", &paired_csv(&exact, &r.lambda_approx, None))
}

/// Exact eigenvalues next to their first-order approximations, optimally
/// paired and sorted by the approximation.
fn paired_csv(exact: &[Complex64], approx: &[Complex64], spin: Option<(f64, f64)>) -> Csv {
    let mut csv = Csv::new(if spin.is_some() {
        &["Omega", "delta", "re", "im", "approx_re", "approx_im"][..]
    } else {
        &["re", "im", "approx_re", "approx_im"][..]
    });
    append_paired(&mut csv, exact, approx, spin);
    csv
}

fn append_paired(csv: &mut Csv, exact: &[Complex64], approx: &[Complex64], spin: Option<(f64, f64)>) {
    let pairing = pair_by(approx, exact, |a, b| (a - b).norm());
    let mut rows: Vec<(Complex64, Complex64)> = approx
        .iter()
        .zip(&pairing.assignment)
        .map(|(a, &j)| (*a, exact[j]))
        .collect();
    rows.sort_by(|x, y| x.0.im.total_cmp(&y.0.im).then(x.0.re.total_cmp(&y.0.re)));
    for (a, e) in rows {
        let mut fields = Vec::new();
        if let Some((s, d)) = spin {
            fields.extend([num(s), num(d)]);
        }
        fields.extend([num(e.re), num(e.im), num(a.re), num(a.im)]);
        csv.row(&fields);
    }
}

fn sweep(
    config: &RunConfig,
    model: &RotorModel,
    pert: &PerturbationSet,
    threads: usize,
) -> Result<StabilityChart, CliError> {
    let axes = config.axes();
    let grid = Grid::new(axes[0], axes[1]).map_err(CliError::Usage)?;
    Ok(sweep2d(model, pert, grid, &config.tol, threads))
}

fn sweep_csv(chart: &StabilityChart) -> Csv {
    let mut csv = Csv::new(&SWEEP_HEADER);
    let grid = chart.grid;
    for iy in 0..grid.y.count {
        for ix in 0..grid.x.count {
            let g = chart.gains_at(grid.x.value(ix), grid.y.value(iy));
            let mut fields = vec![num(g.spin), num(g.kappa), num(g.delta), num(g.nu)];
            match chart.cell(ix, iy) {
                Ok(v) => fields.extend([num(v.max_re), num(v.critical.im), v.class.to_string()]),
                Err(_) => fields.extend([String::new(), String::new(), "error".to_string()]),
            }
            csv.row(&fields);
        }
    }
    csv
}

fn ep(config: &RunConfig, model: &RotorModel, pert: &PerturbationSet, out: &mut Output) -> Result<(), CliError> {
    let axes = config.axes();
    let (spin, kappa) = (axes[0], axes[1]);
    let mut search = SearchBox::new((spin.min, spin.max), (kappa.min, kappa.max));
    search.nodes = spin.count.max(kappa.count);
    let found = find_exceptional_points(model, pert, search, &config.tol).map_err(domain)?;
    let mut csv = Csv::new(&[
        "kind",
        "Omega",
        "kappa",
        "delta",
        "nu",
        "re",
        "im",
        "discriminant",
        "sigma1",
        "sigma2",
        "residual",
    ]);
    for r in &found.records {
        let g = r.gains;
        csv.row(&[
            r.kind.as_str().to_string(),
            num(g.spin),
            num(g.kappa),
            num(g.delta),
            num(g.nu),
            num(r.eigenvalue.re),
            num(r.eigenvalue.im),
            num(r.discriminant),
            num(r.singular_values[0]),
            num(r.singular_values[1]),
            num(r.residual),
        ]);
    }
    for m in &found.near_misses {
        let g = m.gains;
        eprintln!(
            "near miss at Omega={} kappa={}: {}",
            num(g.spin),
            num(g.kappa),
            m.reason
        );
        csv.row(&[
            "near_miss".to_string(),
            num(g.spin),
            num(g.kappa),
            num(g.delta),
            num(g.nu),
            num(m.eigenvalue.re),
            num(m.eigenvalue.im),
            num(m.discriminant),
            num(m.singular_values[0]),
            num(m.singular_values[1]),
            String::new(),
        ]);
    }
    out.write("ep.csv", &csv)
}

fn floquet(config: &RunConfig, model: &RotorModel, pert: &PerturbationSet, out: &mut Output) -> Result<(), CliError> {
    let ps = PeriodicSystem::new(model.clone(), pert.clone()).map_err(domain)?;
    let r = monodromy(&ps, config.steps, &config.tol).map_err(domain)?;
    let pairing = pair_by(&r.predicted, &r.multipliers, |a, b| (a - b).norm() / a.norm());
    let mut rows: Vec<(Complex64, Complex64)> = r
        .predicted
        .iter()
        .zip(&pairing.assignment)
        .map(|(p, &j)| (*p, r.multipliers[j]))
        .collect();
    rows.sort_by(|x, y| x.0.arg().total_cmp(&y.0.arg()).then(x.0.norm().total_cmp(&y.0.norm())));
    let mut csv = Csv::new(&["re", "im", "modulus", "predicted_re", "predicted_im"]);
    for (p, m) in rows {
        csv.row(&[num(m.re), num(m.im), num(m.norm()), num(p.re), num(p.im)]);
    }
    out.write("floquet.csv", &csv)?;
    let mut summary = Csv::new(&[
        "period",
        "steps",
        "match_error",
        "halving_error",
        "liouville_error",
        "liouville_relative",
    ]);
    summary.row(&[
        num(r.period),
        r.steps.to_string(),
        num(r.match_error),
        num(r.halving_error),
        num(r.liouville_error),
        num(r.liouville_relative),
    ]);
    out.write("floquet_summary.csv", &summary)
}

fn fig1(config: &RunConfig, model: &RotorModel, pert: &PerturbationSet, out: &mut Output) -> Result<(), CliError> {
    let md = ModalData::from_model(model, pert).map_err(domain)?;
    let base = pert.gains();
    for (i, delta) in config.delta.values().into_iter().enumerate() {
        let mut csv = Csv::new(&["Omega", "delta", "re", "im", "approx_re", "approx_im"]);
        for spin in config.spin.values() {
            let g = Gains { spin, delta, ..base };
            let p = pert.with_gains(g).map_err(domain)?;
            let pencil = build_pencil(model, &p).map_err(domain)?;
            let exact = eigenvalues_with(&pencil, &config.tol).map_err(domain)?;
            let approx = approx_eigenvalues(&md, spin, delta, g.kappa, g.nu);
            append_paired(&mut csv, &exact, &approx, Some((spin, delta)));
        }
        out.write(&format!("fig1_{}.csv", panel_label(i)), &csv)?;
    }
    Ok(())
}

fn panel_label(i: usize) -> char {
    (b'a' + (i % 26) as u8) as char
}

fn fig2(config: &RunConfig, model: &RotorModel, threads: usize, out: &mut Output) -> Result<(), CliError> {
    let panels = fig2_panels(config).map_err(domain)?;
    let axes = config.axes();
    let grid = Grid::new(axes[0], axes[1]).map_err(CliError::Usage)?;
    let gains = config.perturbation().gains();
    for panel in panels {
        let pert =
            PerturbationSet::new(panel.damping, panel.stiffness, config.circulatory.clone(), gains).map_err(domain)?;
        let chart = sweep2d(model, &pert, grid, &config.tol, threads);
        let lines = run_in_pool(threads, || trace_boundary(&chart));
        out.write(&format!("fig2{}_sweep.csv", panel.label), &sweep_csv(&chart))?;
        out.write(&format!("fig2{}_boundary.csv", panel.label), &boundary_csv(&lines))?;
    }
    Ok(())
}

/// Nodes along `δ` of each umbrella cross-section.
const UMBRELLA_NODES: usize = 80;

fn fig3(
    config: &RunConfig,
    model: &RotorModel,
    pert: &PerturbationSet,
    threads: usize,
    out: &mut Output,
) -> Result<(), CliError> {
    let axes = config.axes();
    let grid = Grid::new(axes[0], axes[1]).map_err(CliError::Usage)?;
    for (i, delta) in config.delta.values().into_iter().enumerate() {
        let p = pert.with_delta(delta).map_err(domain)?;
        let chart = sweep2d(model, &p, grid, &config.tol, threads);
        let lines = run_in_pool(threads, || trace_boundary(&chart));
        out.write(&format!("fig3_level_{}.csv", panel_label(i)), &boundary_csv(&lines))?;
    }

    let md = ModalData::from_model(model, pert).map_err(domain)?;
    let nu = pert.gains().nu;
    let kappa0 = ep_location(&md, nu).map_err(domain)?.kappa0;
    let mut slopes = Csv::new(&[
        "kappa_ratio",
        "kappa",
        "slope_upper",
        "slope_lower",
        "predicted_upper",
        "predicted_lower",
        "beta0",
    ]);
    let beta0 = crate::perturbation::beta0(&md).map_err(domain)?;
    for (i, ratio) in UMBRELLA_OFFSETS.into_iter().enumerate() {
        let kappa = ratio * kappa0;
        let grid = umbrella_grid(&md, nu, kappa, kappa0, UMBRELLA_NODES).map_err(domain)?;
        let template = pert.with_kappa(kappa).map_err(domain)?;
        let chart = sweep2d(model, &template, grid, &config.tol, threads);
        let lines = run_in_pool(threads, || trace_boundary(&chart));
        out.write(&format!("fig3_umbrella_{}.csv", panel_label(i)), &boundary_csv(&lines))?;
        let predicted = crate::perturbation::umbrella_omega(&md, kappa, nu).map_err(domain)?;
        let fitted = boundary_slope_at_origin(&chart, &lines).map_err(domain)?;
        slopes.row(&[
            num(ratio),
            num(kappa),
            num(fitted.slopes.0),
            num(fitted.slopes.1),
            num(predicted.0.max(predicted.1)),
            num(predicted.0.min(predicted.1)),
            num(beta0),
        ]);
    }
    out.write("fig3_slopes.csv", &slopes)
}
