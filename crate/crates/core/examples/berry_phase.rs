//! Geometric phase of the NV spin on a cone around the rotation axis:
//! analytic open/closed forms against the discrete overlap sum, and the
//! Barnett pseudo-fields.
//!
//! ```bash
//! cargo run --example berry_phase
//! ```

use std::f64::consts::TAU;

use levitated_nv::berry::{berry_phase_closed, berry_phase_numeric, berry_phase_open, circular_path, wrap_phase};
use levitated_nv::constants::{GAMMA_ELECTRON, GAMMA_N14};
use levitated_nv::nv_model::pseudo_field;

fn main() {
    let w = TAU * 1e6;
    println!("theta   open(1 period)   closed   numeric   |numeric-open|");
    for deg in [0.0, 20.7, 45.0, 60.0, 90.0, 135.0] {
        let theta = f64::to_radians(deg);
        let open = berry_phase_open(1, theta, w, TAU / w).phase;
        let closed = berry_phase_closed(1, theta).phase;
        let numeric = berry_phase_numeric(1, &circular_path(theta, w, 1.0, 10_000)).unwrap().phase;
        println!("{deg:5.1}   {open:14.6}   {closed:8.4}   {numeric:8.4}   {:.1e}", wrap_phase(numeric - open).abs());
    }

    let rate = TAU * 20e6;
    println!("\npseudo-field at 20 MHz rotation:");
    println!("  electron: {:.3} mT", pseudo_field(rate, GAMMA_ELECTRON).unwrap().magnitude * 1e3);
    println!("  14N:      {:.2} T", pseudo_field(rate, GAMMA_N14).unwrap().magnitude);
}
