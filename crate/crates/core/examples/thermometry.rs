//! NV thermometry: D(T) polynomial, strain calibration at a reference point
//! and inversion of a hot reading.
//!
//! ```bash
//! cargo run --example thermometry
//! ```

use levitated_nv::constants::{torr_to_pa, PA_PER_BAR};
use levitated_nv::odmr::{calibrate_strain, d_from_temperature, temperature_from_d, ThermometryConstants};

fn main() {
    let k = ThermometryConstants::default();
    for t in [260.0, 300.0, 350.0, 450.0, 590.0] {
        println!("D({t:.0} K) = {:.6} GHz", d_from_temperature(t, &k, 0.0).unwrap());
    }
    let p = torr_to_pa(10.0) / PA_PER_BAR;
    let cal = calibrate_strain(&k, 2.8694, 298.0, p).unwrap();
    println!("\nstrain offset from (2.8694 GHz, 298 K, 10 Torr): {:+.2} MHz", cal.delta_strain * 1e3);
    for d in [2.8694, 2.8670, 2.8650, 2.8600] {
        println!("D = {d:.4} GHz  ->  T = {:.1} K", temperature_from_d(d, &cal, p).unwrap());
    }
}
