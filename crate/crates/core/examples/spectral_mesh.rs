//! Spectral mesh of a circular string: the straight branches `ω_s ± sΩ`
//! and which of them are forward, backward or reflected waves.

use gyrospec::model::Branch;
use gyrospec::RotorModel;

fn main() {
    let rotor = RotorModel::string(3).expect("string preset");
    println!("critical speed {:.4}", rotor.critical_speed());

    for spin in [0.0, 0.5, 1.5] {
        println!("Omega = {spin}");
        for m in rotor.mesh_spectrum(spin).iter().filter(|m| !m.conjugate) {
            let wave = rotor.classify_wave(m.s, m.branch, spin).unwrap();
            let sign = if m.branch == Branch::Plus { '+' } else { '-' };
            println!("  s={} {sign}  Im = {:>7.3}  {}", m.s, m.value.im, wave.as_str());
        }
    }
}
