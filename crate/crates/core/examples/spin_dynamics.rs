//! Dressed-state populations of a rotating NV under a resonant microwave
//! pulse (lab-frame propagation, no rotating-wave approximation).
//!
//! ```bash
//! cargo run --release --example spin_dynamics
//! ```

use std::f64::consts::TAU;

use levitated_nv::berry::{exact_resonance_frequency, population_trace, DriveComponent, ResonanceQuery};
use levitated_nv::nv_model::{FieldEnvironment, NVConfiguration};

fn main() {
    let cfg = NVConfiguration::with_theta(30f64.to_radians());
    let env = FieldEnvironment { mw_amplitude: 0.1e-3, ..FieldEnvironment::static_field(10e-3, TAU * 1e6) };
    let q = ResonanceQuery::new(1, DriveComponent::Longitudinal, cfg, env).unwrap();
    let carrier = exact_resonance_frequency(&q);
    let (t, pops) = population_trace(&q, carrier, 1e-6, 20, 0.1).unwrap();
    println!("carrier {:.4} MHz", carrier / TAU / 1e6);
    println!(" t [ns]   P(+1)   P(0)    P(-1)");
    for (t, p) in t.iter().zip(&pops) {
        println!("{:6.0}   {:.4}  {:.4}  {:.4}", t * 1e9, p[0], p[1], p[2]);
    }
}
