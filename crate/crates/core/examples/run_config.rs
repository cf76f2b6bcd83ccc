//! Drives the batch interface from code: parse a configuration, override
//! a tolerance, run it, and print the CSV it wrote.

use gyrospec::cli::{parse_config, run, RunContext};

const CONFIG: &str = "
# flutter verdict and closed forms at one operating point
run.command = report
model.omegas = 1
matrices.damping = -1, 0, 0, 2
matrices.stiffness = 1, 1, 1, 2
gains.delta = 0.3
gains.kappa = 0.2
";

fn main() {
    let mut config = parse_config(CONFIG).expect("valid config");
    config.override_tolerance("marginal=1e-9").unwrap();
    print!("{}", config.emit());

    let out_dir = std::env::temp_dir().join("gyrospec-run-config");
    let ctx = RunContext { out_dir, threads: 1 };
    for path in run(&config, &ctx).expect("run") {
        println!("--- {}", path.display());
        print!("{}", std::fs::read_to_string(&path).unwrap());
    }
}
