//! Welch PSD of a simulated thermal trajectory, Lorentzian fit, and the
//! particle radius inferred from the fitted damping.
//!
//! ```bash
//! cargo run --release --example psd_radius
//! ```

use std::f64::consts::TAU;

use levitated_nv::langevin_cooling::{fit_lorentzian_psd, infer_radius, psd, simulate_mode, Axis, Epstein, HarmonicMode, SimOptions, TranslationalDamping};
use levitated_nv::rotor_thermal::GasEnvironment;
use levitated_nv::trap::sphere_mass;

fn main() {
    let (radius, density) = (264e-9, 3500.0);
    let gas = GasEnvironment::air_torr(1.0, 298.0);
    let mode = HarmonicMode {
        axis: Axis::Z,
        omega0: TAU * 1.64e3,
        mass: sphere_mass(radius, density),
        gamma_t: Epstein::default().rate(radius, density, &gas),
        bath_t: gas.t0,
    };
    let opts = SimOptions { record_every: 6, ..SimOptions::new(800.0 * mode.damping_time(), TAU / mode.omega0 / 40.0, 2) };
    let series = simulate_mode(&mode, 0.0, None, &opts).unwrap();
    let est = psd(&series, 512).unwrap();
    let fit = fit_lorentzian_psd(&est, mode.mass).unwrap();
    println!("{} samples, {} Welch segments, df = {:.2} Hz", series.samples.len(), est.segments, est.df());
    println!("f0    = {:8.2} Hz   (true {:.2})", fit.omega0_fit / TAU, mode.omega0 / TAU);
    println!("gamma = {:8.1} /s   (true {:.1}) +/- {:.1}", fit.gamma_fit, mode.gamma_t, fit.gamma_std);
    println!("T     = {:8.1} K    (true {:.1}) +/- {:.1}, area {:.1}", fit.t_eff, mode.bath_t, fit.t_eff_std, fit.t_area);
    let r = infer_radius(&fit, &gas, density, &Epstein::default()).unwrap();
    println!("radius from damping: {:.1} nm (true {:.1})", r * 1e9, radius * 1e9);
}
