//! Rabi frequency against rotation phase: analytic geometric factor and a
//! propagated trace at the slowest and fastest phases.
//!
//! ```bash
//! cargo run --release --example rabi_phase
//! ```

use std::f64::consts::{PI, TAU};

use levitated_nv::nv_model::{FieldEnvironment, NVConfiguration};
use levitated_nv::rabi::{rabi_factor, simulate_rabi, PulseSequence, RabiGeometry, RabiOptions};

fn main() {
    let geom = RabiGeometry::new(22f64.to_radians());
    println!("phi [deg]  factor");
    for k in 0..8 {
        let phi = k as f64 * PI / 4.0;
        println!("{:9.0}  {:.4}", phi.to_degrees(), rabi_factor(&geom, phi));
    }
    println!("Omega(pi/2)/Omega(pi) = {:.4}", rabi_factor(&geom, PI / 2.0) / rabi_factor(&geom, PI));

    let mut env = FieldEnvironment::static_field(0.5e-3, TAU * 1e3);
    env.mw_amplitude = 0.02e-3;
    let cfg = NVConfiguration::with_theta(geom.theta);
    for phi in [PI / 2.0, 1.5 * PI] {
        let seq = PulseSequence { init_duration: 0.0, mw_start_phase: phi, mw_duration: 6e-6, readout_delay: 0.0, rotation_period: 1e-3 };
        let tr = simulate_rabi(&cfg, &env, &seq, &RabiOptions { samples: 200, ..RabiOptions::new(geom) }).unwrap();
        println!(
            "phi = {:3.0} deg: fitted {:.4} MHz, predicted {:.4} MHz",
            phi.to_degrees(),
            tr.fitted_rabi / TAU / 1e6,
            tr.predicted_rabi / TAU / 1e6
        );
    }
}
