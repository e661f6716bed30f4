use std::f64::consts::PI;

use levitated_nv::berry::{berry_phase_closed, berry_phase_open, resonance_shift, wrap_phase, DriveComponent, ResonanceQuery};
use levitated_nv::cli::config::{parse_quantity, Dim, Value};
use levitated_nv::langevin_cooling::{psd, Axis as ModeAxis, TimeSeries};
use levitated_nv::nv_model::{h_lab, FieldEnvironment, NVConfiguration};
use levitated_nv::odmr::{
    d_from_temperature, fwhm, linear_grid, synth_spectrum, temperature_from_d, tetrahedral_thetas, LineShape, OrientationEnsemble,
    ThermometryConstants,
};
use levitated_nv::rabi::{rabi_factor, RabiGeometry};
use levitated_nv::spin_core::{propagate, rotation_operator, Axis, SpinState};
use levitated_nv::trap::{secular_frequency, ChargedParticle, RingTrapGeometry, TrapDrive};
use nalgebra::Vector3;
use proptest::prelude::*;

const MHZ: f64 = 2.0 * PI * 1e6;

fn unit_vector() -> impl Strategy<Value = Vector3<f64>> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_filter("nonzero", |(x, y, z)| x * x + y * y + z * z > 1e-3)
        .prop_map(|(x, y, z)| Vector3::new(x, y, z).normalize())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tetrahedral_cos_squared_sum(axis in unit_vector(), angle in 0.0f64..(2.0 * PI)) {
        let thetas = tetrahedral_thetas(&OrientationEnsemble::from_axis_angle(axis, angle));
        let s: f64 = thetas.iter().map(|t| t.cos().powi(2)).sum();
        prop_assert!((s - 4.0 / 3.0).abs() < 1e-12);
        prop_assert!(thetas.iter().all(|t| (0.0..=PI).contains(t)));
    }

    #[test]
    fn lab_hamiltonian_is_hermitian(theta in 0.0f64..PI, phi0 in 0.0f64..(2.0 * PI), b in -0.1f64..0.1, w in -1e8f64..1e8, t in 0.0f64..1e-6) {
        let cfg = NVConfiguration { phi0, ..NVConfiguration::with_theta(theta) };
        let h = h_lab(&cfg, &FieldEnvironment::static_field(b, w), t);
        prop_assert!(h.is_hermitian(1e-6 * h.norm_inf()));
    }

    #[test]
    fn rotations_are_unitary(angle in -10.0f64..10.0) {
        prop_assert!(rotation_operator(Axis::Y, angle).is_unitary(1e-12));
        prop_assert!(rotation_operator(Axis::Z, angle).is_unitary(1e-12));
    }

    #[test]
    fn propagation_keeps_norm(theta in 0.0f64..PI, b in 0.0f64..0.02) {
        let cfg = NVConfiguration::with_theta(theta);
        let env = FieldEnvironment::static_field(b, 2.0 * PI * 1e6);
        let bound = h_lab(&cfg, &env, 0.0).norm_inf();
        let dt = 0.02 / bound;
        let grid: Vec<f64> = (0..=500).map(|k| k as f64 * dt).collect();
        let states = propagate(|t| h_lab(&cfg, &env, t), SpinState::basis(0), &grid).unwrap();
        prop_assert!((states.last().unwrap().norm() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn closed_loop_equals_one_period(theta in 0.0f64..PI, ms in prop::sample::select(vec![-1i8, 0, 1])) {
        let w = 2.0 * PI * 1e6;
        let open = berry_phase_open(ms, theta, w, 2.0 * PI / w).phase;
        let closed = berry_phase_closed(ms, theta).phase;
        prop_assert!(wrap_phase(open - closed).abs() < 1e-9);
    }

    #[test]
    fn shift_reverses_with_sense(theta in 0.05f64..1.5, f_r in 0.1f64..10.0) {
        let cfg = NVConfiguration::with_theta(theta);
        let shift = |w: f64| {
            let q = ResonanceQuery::new(1, DriveComponent::Longitudinal, cfg, FieldEnvironment::static_field(0.0, w)).unwrap();
            resonance_shift(&q)
        };
        let w = 2.0 * PI * f_r * 1e6;
        prop_assert!((shift(w) + shift(-w)).abs() < 1e-3);
        prop_assert!(shift(w) < 0.0);
    }

    #[test]
    fn ensemble_width_at_least_intrinsic(f_r in 0.0f64..20.0, tilt in 0.0f64..0.6) {
        let line = LineShape { intrinsic_fwhm: 19.0 * MHZ, contrast_per_dip: 0.03, strain_e: 6.7 * MHZ };
        let env = FieldEnvironment::static_field(0.0, 2.0 * PI * f_r * 1e6);
        let grid = linear_grid(2600.0 * MHZ, 3140.0 * MHZ, 2701);
        let s = synth_spectrum(&OrientationEnsemble::tilted_111(tilt), &line, &NVConfiguration::with_theta(0.0), &env, DriveComponent::Longitudinal, &grid).unwrap();
        prop_assert!(fwhm(&s).unwrap() >= line.intrinsic_fwhm - s.step());
        prop_assert!(s.contrast.iter().all(|&c| c >= 0.0));
    }

    #[test]
    fn thermometry_roundtrip(t in 260.0f64..590.0, p in 0.0f64..1.0) {
        let k = ThermometryConstants::default();
        let back = temperature_from_d(d_from_temperature(t, &k, p).unwrap(), &k, p).unwrap();
        prop_assert!((back - t).abs() < 0.01);
    }

    #[test]
    fn rabi_factor_bounded_and_periodic(theta in 0.0f64..PI, tp in 0.0f64..0.5, phi in 0.0f64..(2.0 * PI)) {
        let g = RabiGeometry { theta_prime: tp, ..RabiGeometry::new(theta) };
        let f = rabi_factor(&g, phi);
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!((f - rabi_factor(&g, phi + 2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn trap_q_and_frequency_scale_with_voltage(v in 50.0f64..500.0) {
        let g = RingTrapGeometry::new(270e-6, 450e-6).unwrap();
        let p = ChargedParticle::sphere(2000.0, 264e-9, 3500.0).unwrap();
        let s1 = secular_frequency(&g, &TrapDrive::new(v, 1.6e4).unwrap(), &p);
        let s2 = secular_frequency(&g, &TrapDrive::new(2.0 * v, 1.6e4).unwrap(), &p);
        prop_assert!((s2.q_z / s1.q_z - 2.0).abs() < 1e-12);
        prop_assert!((s2.omega_z / s1.omega_z - 2.0).abs() < 1e-12);
    }

    #[test]
    fn welch_integral_is_variance(seed in 0u64..1000, f in 50.0f64..400.0) {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let dt = 1e-3;
        let samples: Vec<f64> = (0..32768)
            .map(|k| (2.0 * PI * f * k as f64 * dt).sin() + 0.3 * Distribution::<f64>::sample(&StandardNormal, &mut rng))
            .collect();
        let s = TimeSeries { axis: ModeAxis::X, dt, samples, seed };
        let est = psd(&s, 2048).unwrap();
        prop_assert!((est.integral() / s.variance() - 1.0).abs() < 0.05);
    }

    #[test]
    fn canonical_quantities_reparse(v in -1e6f64..1e6) {
        for dim in [Dim::MagneticField, Dim::Pressure, Dim::Frequency, Dim::Angle] {
            let q = Value::Quantity(v, dim);
            let text = q.to_string();
            prop_assert_eq!(parse_quantity("k", &text, dim).unwrap(), v);
        }
    }
}
