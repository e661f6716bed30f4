//! Centre-of-mass Langevin dynamics with ideal and delayed velocity feedback;
//! mode temperatures from the position variance.
//!
//! ```bash
//! cargo run --release --example feedback_cooling
//! ```

use std::f64::consts::TAU;

use levitated_nv::constants::BOLTZMANN;
use levitated_nv::langevin_cooling::{simulate_com, Axis, Epstein, FeedbackConfig, HarmonicMode, SimOptions, TranslationalDamping};
use levitated_nv::rotor_thermal::GasEnvironment;
use levitated_nv::trap::sphere_mass;

fn main() {
    let (radius, density) = (264e-9, 3500.0);
    let mass = sphere_mass(radius, density);
    let gas = GasEnvironment::air_torr(1.0, 298.0);
    let gamma = Epstein::default().rate(radius, density, &gas);
    let modes: Vec<HarmonicMode> = [(Axis::X, 1.10e3), (Axis::Y, 1.25e3), (Axis::Z, 1.64e3)]
        .iter()
        .map(|&(axis, f)| HarmonicMode { axis, omega0: TAU * f, mass, gamma_t: gamma, bath_t: gas.t0 })
        .collect();
    let opts = SimOptions { record_every: 6, ..SimOptions::new(400.0 * 2.0 / gamma, 1.0 / 1.64e3 / 200.0, 5) };
    println!("gamma = {gamma:.1} /s\n");
    println!("feedback        g/gamma   T_x [K]   T_y [K]   T_z [K]   ideal T [K]");
    type Make = fn([f64; 3]) -> FeedbackConfig;
    let runs: [(&str, f64, Make); 4] = [
        ("ideal", 1.0, FeedbackConfig::ideal),
        ("ideal", 10.0, FeedbackConfig::ideal),
        ("delayed", 1.0, FeedbackConfig::delayed),
        ("delayed", 10.0, FeedbackConfig::delayed),
    ];
    let mut cases: Vec<(&str, f64, Option<FeedbackConfig>)> = vec![("none", 0.0, None)];
    cases.extend(runs.iter().map(|&(label, ratio, make)| (label, ratio, Some(make([ratio * gamma; 3])))));
    for (label, ratio, fb) in cases {
        let series = match simulate_com(&modes, fb.as_ref(), &opts) {
            Ok(s) => s,
            // the delay line adds phase lag that grows with gain
            Err(e) => {
                println!("{label:14}  {ratio:7.1}   {e}");
                continue;
            }
        };
        let temps: Vec<f64> = modes.iter().zip(&series).map(|(m, s)| m.mass * m.omega0.powi(2) * s.variance() / BOLTZMANN).collect();
        println!(
            "{label:14}  {ratio:7.1}   {:7.1}   {:7.1}   {:7.1}   {:11.1}",
            temps[0],
            temps[1],
            temps[2],
            gas.t0 / (1.0 + ratio)
        );
    }
}
