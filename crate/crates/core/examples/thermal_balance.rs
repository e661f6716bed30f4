//! Internal temperature of a laser-heated nanodiamond against gas pressure:
//! gas conduction at high pressure, black-body emission in vacuum.
//!
//! ```bash
//! cargo run --example thermal_balance
//! ```

use std::f64::consts::PI;

use levitated_nv::constants::{pa_to_torr, torr_to_pa};
use levitated_nv::rotor_thermal::{BlackBodyModel, ThermalModel};

fn main() {
    let radius: f64 = 332e-9;
    let volume = 4.0 / 3.0 * PI * radius.powi(3);
    // 532 nm and 1064 nm: intensity [W/m²] × absorption [1/m]
    let absorbed = (0.030e6 * 111e2 + 0.520e6 * 5.87e2) * volume;
    let bb = BlackBodyModel::calibrate(volume, absorbed, 350.0, 298.0);
    let model = ThermalModel { a_gas: 1.74e-12, a_bb: bb.coefficient(), t0: 298.0 };
    println!("absorbed {absorbed:.3e} W, Im CM = {:.4}, A_bb = {:.3e} W/K^5", bb.im_clausius_mossotti, model.a_bb);
    println!("black body dominates below {:.1e} Torr\n", pa_to_torr(model.radiative_dominance_pressure(350.0)));
    println!("p [Torr]    T [K]");
    for e in -7..=1 {
        let p = torr_to_pa(10f64.powi(e));
        println!("1e{e:<+3}     {:.2}", model.solve(absorbed, p).unwrap());
    }
}
