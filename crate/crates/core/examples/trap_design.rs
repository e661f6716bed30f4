//! Ring-trap characterization with the published parameters, plus a small
//! voltage scan.
//!
//! ```bash
//! cargo run --example trap_design
//! ```

use levitated_nv::trap::{characterize, pseudopotential_profile, reference_setup, ProfileKind, TrapDrive};

fn main() {
    let (geometry, drive, particle) = reference_setup();
    let c = characterize(&geometry, &drive, &particle);
    println!("z0      = {:.2} um", c.z0 * 1e6);
    println!("f_z     = {:.1} Hz", c.omega_z / std::f64::consts::TAU);
    println!("q_z     = {:.4} (stable: {})", c.q_z, c.stable);
    println!("depth   = {:.1} eV", c.depth);

    println!("\n   V_d     q_z     f_z [Hz]   depth [eV]");
    for v in [100.0, 200.0, 300.0, 400.0, 600.0] {
        let d = TrapDrive { v_d: v, ..drive };
        let c = characterize(&geometry, &d, &particle);
        println!("{v:6.0}  {:6.3}  {:9.1}  {:9.1}", c.q_z, c.omega_z / std::f64::consts::TAU, c.depth);
    }

    // full vs harmonic profile near the minimum
    let z: Vec<f64> = (0..=8).map(|k| c.z0 * (0.8 + 0.05 * k as f64)).collect();
    let full = pseudopotential_profile(&geometry, &drive, &particle, ProfileKind::Full, &z).unwrap();
    let harm = pseudopotential_profile(&geometry, &drive, &particle, ProfileKind::Harmonic, &z).unwrap();
    println!("\n z [um]   full [eV]   harmonic [eV]");
    for ((z, a), b) in z.iter().zip(&full).zip(&harm) {
        println!("{:7.1}  {a:9.3}  {b:12.3}", z * 1e6);
    }
}
