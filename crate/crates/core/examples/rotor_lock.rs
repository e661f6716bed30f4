//! Electric-dipole rotor driven by a rotating field: lock above threshold,
//! slip below, and the steady lag angle.
//!
//! ```bash
//! cargo run --release --example rotor_lock
//! ```

use std::f64::consts::TAU;

use levitated_nv::rotor_thermal::{gas_damping_rate, lock_report, rotor_trajectory, threshold_field, DipoleRotor, GasEnvironment, RotatingField, RotorState};
use levitated_nv::trap::{sphere_mass, ChargedParticle};

fn main() {
    let (radius, density) = (264e-9, 3500.0);
    let particle = ChargedParticle { charge: 0.0, mass: sphere_mass(radius, density), radius, density };
    let rotor = DipoleRotor::sphere(3.13e-25, radius, density);
    let gamma_d = gas_damping_rate(&particle, &GasEnvironment::air_torr(10.0, 298.0));
    let wd = TAU * 100.0;
    let e_th = threshold_field(&rotor, gamma_d, wd);
    println!("gamma_d = {gamma_d:.3e} /s, threshold field = {e_th:.2} V/m\n");
    println!("E/E_th   locked   <omega>/omega_d   beta [rad]   asin(E_th/E)");
    for ratio in [0.8, 0.95, 1.05, 1.5, 2.0, 4.0] {
        let field = RotatingField { e_xy: ratio * e_th, omega_drive: wd };
        let traj = rotor_trajectory(&rotor, &field, gamma_d, RotorState { angle: 0.0, omega: 0.0 }, 2.0, 1e-5, 10).unwrap();
        let r = lock_report(&traj, &field, 0.25);
        let predicted = if ratio >= 1.0 { format!("{:.4}", (1.0 / ratio).asin()) } else { "-".into() };
        println!("{ratio:6.2}   {:6}   {:15.4}   {:10.4}   {predicted}", r.locked, r.mean_omega / wd, r.mean_beta);
    }
}
