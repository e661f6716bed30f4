use std::f64::consts::PI;

use levitated_nv::berry::DriveComponent;
use levitated_nv::nv_model::{FieldEnvironment, NVConfiguration};
use levitated_nv::odmr::{
    dip_centers, fit_dips, fwhm, linear_grid, local_maxima, synth_from_thetas, synth_spectrum, tetrahedral_thetas, LineShape,
    OrientationEnsemble, Spectrum,
};
use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const MHZ: f64 = 2.0 * PI * 1e6;

fn line() -> LineShape {
    LineShape { intrinsic_fwhm: 19.0 * MHZ, contrast_per_dip: 0.03, strain_e: 6.7 * MHZ }
}

/// Generic orientation: all four NV angles distinct, so 100 G gives eight
/// separated dips.
fn generic_ensemble() -> OrientationEnsemble {
    OrientationEnsemble::from_axis_angle(Vector3::new(0.3, -0.5, 0.8), 0.7)
}

fn eight_dip_case() -> (Vec<f64>, Spectrum) {
    let base = NVConfiguration::with_theta(0.0);
    let env = FieldEnvironment::static_field(0.01, 0.0);
    let thetas = tetrahedral_thetas(&generic_ensemble());
    let mut centers = dip_centers(&thetas, &base, &env, DriveComponent::Longitudinal, line().strain_e);
    centers.sort_by(f64::total_cmp);
    let grid = linear_grid(2400.0 * MHZ, 3340.0 * MHZ, 4001);
    let s = synth_spectrum(&generic_ensemble(), &line(), &base, &env, DriveComponent::Longitudinal, &grid).unwrap();
    (centers, s)
}

fn with_noise(s: &Spectrum, sigma: f64, seed: u64) -> Spectrum {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = Normal::new(0.0, sigma).unwrap();
    Spectrum::new(s.freq.clone(), s.contrast.iter().map(|c| c + n.sample(&mut rng)).collect()).unwrap()
}

fn max_center_error(found: &[f64], truth: &[f64]) -> f64 {
    found.iter().zip(truth).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

#[test]
fn eight_dips_are_separated_at_100_gauss() {
    let (centers, _) = eight_dip_case();
    let min_gap = centers.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    assert!(min_gap > line().intrinsic_fwhm, "{}", min_gap / MHZ);
}

#[test]
fn noiseless_eight_dip_fit_is_exact() {
    let (truth, s) = eight_dip_case();
    let fit = fit_dips(&s, 8, None).unwrap();
    let centers: Vec<f64> = fit.dips.iter().map(|d| d.center).collect();
    assert!(max_center_error(&centers, &truth) < 1e-3 * line().intrinsic_fwhm);
    assert!(fit.cost_history.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn eight_dip_fit_with_one_percent_noise() {
    let (truth, s) = eight_dip_case();
    // 1 % of the deepest contrast
    let peak = s.contrast.iter().copied().fold(0.0, f64::max);
    let noisy = with_noise(&s, 0.01 * peak, 100);
    let fit = fit_dips(&noisy, 8, None).unwrap();
    let centers: Vec<f64> = fit.dips.iter().map(|d| d.center).collect();
    let err = max_center_error(&centers, &truth);
    assert!(err < line().intrinsic_fwhm / 10.0, "{} MHz", err / MHZ);
    assert!(fit.dips.iter().all(|d| d.amplitude > 0.0 && d.center > s.freq[0] && d.center < s.freq[s.freq.len() - 1]));
}

#[test]
fn snr_twenty_roundtrip() {
    let (truth, s) = eight_dip_case();
    let peak = s.contrast.iter().copied().fold(0.0, f64::max);
    for seed in [1, 2, 3] {
        let noisy = with_noise(&s, peak / 20.0, seed);
        let fit = fit_dips(&noisy, 8, None).unwrap();
        let centers: Vec<f64> = fit.dips.iter().map(|d| d.center).collect();
        let err = max_center_error(&centers, &truth);
        assert!(err < line().intrinsic_fwhm / 20.0, "seed {seed}: {} MHz", err / MHZ);
    }
}

#[test]
fn zero_field_pair_midpoint_is_d() {
    let base = NVConfiguration::with_theta(0.0);
    let wide = LineShape { intrinsic_fwhm: 5.0 * MHZ, ..line() };
    let grid = linear_grid(2800.0 * MHZ, 2940.0 * MHZ, 1401);
    let s = synth_from_thetas(&[0.3], &wide, &base, &FieldEnvironment::default(), DriveComponent::Longitudinal, &grid).unwrap();
    let fit = fit_dips(&s, 2, None).unwrap();
    let mid = 0.5 * (fit.dips[0].center + fit.dips[1].center);
    assert!((mid - base.d).abs() < 1e-3 * wide.intrinsic_fwhm);
    assert!(((fit.dips[1].center - fit.dips[0].center) / 2.0 - wide.strain_e).abs() < 1e-3 * wide.intrinsic_fwhm);
}

/// Removing the orientation closest to the rotation axis slows the growth
/// of the width with rotation rate.
#[test]
fn smallest_theta_dominates_broadening() {
    let base = NVConfiguration::with_theta(0.0);
    let ensemble = OrientationEnsemble::tilted_111(10f64.to_radians());
    let mut thetas = tetrahedral_thetas(&ensemble).to_vec();
    thetas.sort_by(f64::total_cmp);
    let grid = linear_grid(2500.0 * MHZ, 3240.0 * MHZ, 7401);
    let width = |ths: &[f64], f_r: f64| {
        let env = FieldEnvironment::static_field(0.0, 2.0 * PI * f_r);
        fwhm(&synth_from_thetas(ths, &line(), &base, &env, DriveComponent::Longitudinal, &grid).unwrap()).unwrap()
    };
    let slope = |ths: &[f64]| (width(ths, 21e6) - width(ths, 19e6)) / (2.0 * PI * 2e6);
    let all = slope(&thetas);
    let without = slope(&thetas[1..]);
    assert!(without < all, "{without} vs {all}");
}

/// Resolved minima equal the number of clusters of centers closer than Γ/2.
#[test]
fn minima_count_matches_clusters() {
    let base = NVConfiguration::with_theta(0.0);
    let grid = linear_grid(2400.0 * MHZ, 3340.0 * MHZ, 9401);
    for (b, expected_at_least) in [(0.0, 1), (0.01, 8)] {
        let env = FieldEnvironment::static_field(b, 0.0);
        let thetas = tetrahedral_thetas(&generic_ensemble());
        let s = synth_from_thetas(&thetas, &line(), &base, &env, DriveComponent::Longitudinal, &grid).unwrap();
        let mut centers = dip_centers(&thetas, &base, &env, DriveComponent::Longitudinal, line().strain_e);
        centers.sort_by(f64::total_cmp);
        let clusters = 1 + centers.windows(2).filter(|w| w[1] - w[0] >= line().intrinsic_fwhm / 2.0).count();
        let peak = s.contrast.iter().copied().fold(0.0, f64::max);
        let deep = local_maxima(&s).into_iter().filter(|&k| s.contrast[k] > peak / 2.0).count();
        assert_eq!(deep, clusters, "B = {b}");
        assert!(clusters >= expected_at_least);
    }
}
