//! Ensemble ODMR spectrum of a rotating nanodiamond and its FWHM against
//! rotation rate for two crystal orientations.
//!
//! ```bash
//! cargo run --release --example odmr_spectrum
//! ```

use std::f64::consts::TAU;

use levitated_nv::berry::DriveComponent;
use levitated_nv::nv_model::{FieldEnvironment, NVConfiguration};
use levitated_nv::odmr::{fwhm, linear_grid, resolved_dips, synth_spectrum, tetrahedral_thetas, LineShape, OrientationEnsemble};

const MHZ: f64 = TAU * 1e6;

fn main() {
    let line = LineShape { intrinsic_fwhm: 19.0 * MHZ, contrast_per_dip: 0.03, strain_e: 6.7 * MHZ };
    let base = NVConfiguration::with_theta(0.0);
    let grid = linear_grid(2700.0 * MHZ, 3050.0 * MHZ, 3501);
    let aligned = OrientationEnsemble::tilted_111(0.0);
    let tilted = OrientationEnsemble::tilted_111(20f64.to_radians());
    let degs: Vec<String> = tetrahedral_thetas(&tilted).iter().map(|t| format!("{:.1}", t.to_degrees())).collect();
    println!("NV angles of the 20 deg ensemble: {}", degs.join(", "));

    println!("\nf_r [MHz]  FWHM aligned  FWHM tilted  [MHz]");
    for f_r in [0.0, 2.0, 5.0, 10.0, 14.0, 20.0] {
        let env = FieldEnvironment::static_field(0.0, f_r * MHZ);
        let a = synth_spectrum(&aligned, &line, &base, &env, DriveComponent::Longitudinal, &grid).unwrap();
        let b = synth_spectrum(&tilted, &line, &base, &env, DriveComponent::Longitudinal, &grid).unwrap();
        println!("{f_r:9.1}  {:12.2}  {:11.2}", fwhm(&a).unwrap() / MHZ, fwhm(&b).unwrap() / MHZ);
    }

    let env = FieldEnvironment::static_field(5e-3, 0.0);
    let wide = linear_grid(2500.0 * MHZ, 3240.0 * MHZ, 7401);
    let s = synth_spectrum(&tilted, &line, &base, &env, DriveComponent::Longitudinal, &wide).unwrap();
    let dips: Vec<String> = resolved_dips(&s).iter().map(|f| format!("{:.1}", f / MHZ)).collect();
    println!("\nresolved dips at 5 mT [MHz]: {}", dips.join(", "));
}
