//! Multi-Lorentzian fit of a noisy eight-dip ODMR spectrum (100 G, generic
//! crystal orientation).
//!
//! ```bash
//! cargo run --release --example odmr_fit
//! ```

use std::f64::consts::TAU;

use levitated_nv::berry::DriveComponent;
use levitated_nv::nv_model::{FieldEnvironment, NVConfiguration};
use levitated_nv::odmr::{dip_centers, fit_dips, linear_grid, synth_spectrum, tetrahedral_thetas, LineShape, OrientationEnsemble, Spectrum};
use nalgebra::Vector3;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

const MHZ: f64 = TAU * 1e6;

fn main() {
    let line = LineShape { intrinsic_fwhm: 19.0 * MHZ, contrast_per_dip: 0.03, strain_e: 6.7 * MHZ };
    let base = NVConfiguration::with_theta(0.0);
    let ensemble = OrientationEnsemble::from_axis_angle(Vector3::new(0.3, -0.5, 0.8), 0.7);
    let env = FieldEnvironment::static_field(0.01, 0.0);
    let grid = linear_grid(2400.0 * MHZ, 3340.0 * MHZ, 4001);
    let clean = synth_spectrum(&ensemble, &line, &base, &env, DriveComponent::Longitudinal, &grid).unwrap();

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let noise = Normal::new(0.0, 1.5e-3).unwrap();
    let noisy = Spectrum::new(clean.freq.clone(), clean.contrast.iter().map(|c| c + noise.sample(&mut rng)).collect()).unwrap();

    let fit = fit_dips(&noisy, 8, None).unwrap();
    let mut truth = dip_centers(&tetrahedral_thetas(&ensemble), &base, &env, DriveComponent::Longitudinal, line.strain_e);
    truth.sort_by(f64::total_cmp);
    println!("true [MHz]   fit [MHz]   +/- [MHz]   FWHM [MHz]");
    for (t, d) in truth.iter().zip(&fit.dips) {
        println!("{:9.2}  {:10.2}  {:9.3}  {:10.2}", t / MHZ, d.center / MHZ, d.center_std.unwrap_or(f64::NAN) / MHZ, d.fwhm / MHZ);
    }
    println!("rms residual {:.2e}, {} accepted steps", fit.residual_rms, fit.cost_history.len());
}
