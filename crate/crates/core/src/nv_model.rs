//! NV spin Hamiltonians in the laboratory and co-rotating frames.
//!
//! The diamond rotates about lab `z`. An NV axis makes the polar angle
//! `theta` with `z` and has azimuth `phi(t) = phi0 + omega_r * t`, so a
//! positive `omega_r` is counterclockwise when viewed from `+z`. Use
//! [`RotationSense`] to go from a physical sense of rotation to the signed
//! rate.

use std::f64::consts::SQRT_2;

use thiserror::Error;

use crate::constants::{D_NV, GAMMA_ELECTRON};
use crate::spin_core::{rotation_operator, spin1_operators, Axis, SpinMatrix, SpinState, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NvError {
    #[error("theta must lie in [0, pi], got {0}")]
    ThetaOutOfRange(f64),
    #[error("zero-field splitting must be positive, got {0}")]
    NonPositiveSplitting(f64),
    #[error("strain splitting must satisfy 0 <= E < D/10, got E = {e}, D = {d}")]
    StrainOutOfRange { e: f64, d: f64 },
    #[error("gyromagnetic ratio must be nonzero")]
    ZeroGyromagneticRatio,
    #[error("non-finite parameter `{0}`")]
    NonFinite(&'static str),
}

/// Orientation and spin constants of one NV center. Frequencies in rad/s.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NVConfiguration {
    /// Angle between the NV axis and the rotation axis `z`, radians.
    pub theta: f64,
    /// Azimuth at `t = 0`, radians.
    pub phi0: f64,
    /// Zero-field splitting `D`, rad/s.
    pub d: f64,
    /// Strain splitting `E`, rad/s.
    pub e: f64,
    /// Electron gyromagnetic ratio, rad/s per tesla.
    pub gamma_e: f64,
}

impl NVConfiguration {
    pub fn new(theta: f64, phi0: f64, d: f64, e: f64, gamma_e: f64) -> Result<Self, NvError> {
        let cfg = Self { theta, phi0, d, e, gamma_e };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Default constants (`D = 2π·2.870 GHz`, no strain) at the given angle.
    pub fn with_theta(theta: f64) -> Self {
        Self { theta, phi0: 0.0, d: D_NV, e: 0.0, gamma_e: GAMMA_ELECTRON }
    }

    pub fn validate(&self) -> Result<(), NvError> {
        for (name, v) in [("theta", self.theta), ("phi0", self.phi0), ("D", self.d), ("E", self.e), ("gamma_e", self.gamma_e)] {
            if !v.is_finite() {
                return Err(NvError::NonFinite(name));
            }
        }
        if !(0.0..=std::f64::consts::PI).contains(&self.theta) {
            return Err(NvError::ThetaOutOfRange(self.theta));
        }
        if self.d <= 0.0 {
            return Err(NvError::NonPositiveSplitting(self.d));
        }
        if self.e < 0.0 || self.e >= self.d / 10.0 {
            return Err(NvError::StrainOutOfRange { e: self.e, d: self.d });
        }
        if self.gamma_e == 0.0 {
            return Err(NvError::ZeroGyromagneticRatio);
        }
        Ok(())
    }

    /// Azimuth at time `t` for rotation rate `omega_r`.
    #[inline]
    pub fn phi_at(&self, omega_r: f64, t: f64) -> f64 {
        self.phi0 + omega_r * t
    }
}

/// Sense of mechanical rotation as seen from `+z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RotationSense {
    Clockwise,
    Counterclockwise,
}

impl RotationSense {
    /// Signed azimuthal rate for a rotation of angular speed `rate` (≥ 0).
    pub fn signed(self, rate: f64) -> f64 {
        match self {
            Self::Counterclockwise => rate.abs(),
            Self::Clockwise => -rate.abs(),
        }
    }

    pub fn of(omega_r: f64) -> Self {
        if omega_r < 0.0 {
            Self::Clockwise
        } else {
            Self::Counterclockwise
        }
    }
}

/// Static field, rotation and microwave drive. SI units, rad/s.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct FieldEnvironment {
    /// Static field along `z`, tesla.
    pub b_static: f64,
    /// Signed rotation rate, rad/s (positive = counterclockwise from `+z`).
    pub omega_r: f64,
    /// Microwave amplitude, tesla.
    pub mw_amplitude: f64,
    /// Microwave angular frequency, rad/s.
    pub mw_frequency: f64,
    /// Microwave tilt from `z` within the `yz`-plane, radians.
    pub mw_tilt: f64,
}

impl FieldEnvironment {
    pub fn static_field(b_static: f64, omega_r: f64) -> Self {
        Self { b_static, omega_r, ..Self::default() }
    }

    /// Returns a warning when the rotation is not slow compared with `D`.
    pub fn adiabatic_warning(&self, cfg: &NVConfiguration) -> Option<String> {
        (self.omega_r.abs() >= cfg.d).then(|| {
            format!(
                "|omega_r| = {:.3e} rad/s is not below D = {:.3e} rad/s; the adiabatic picture does not apply",
                self.omega_r.abs(),
                cfg.d
            )
        })
    }
}

/// Barnett pseudo-field `|omega_r / gamma|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PseudoField {
    /// Tesla.
    pub magnitude: f64,
    pub gyromagnetic_ratio_used: f64,
}

pub fn pseudo_field(omega_r: f64, gamma: f64) -> Result<PseudoField, NvError> {
    if gamma == 0.0 {
        return Err(NvError::ZeroGyromagneticRatio);
    }
    Ok(PseudoField { magnitude: (omega_r / gamma).abs(), gyromagnetic_ratio_used: gamma })
}

/// `D Sz² + E (Sx² − Sy²)` for a static NV with its axis along the
/// quantization axis.
pub fn h_zero_field_static(cfg: &NVConfiguration) -> SpinMatrix {
    let s = spin1_operators();
    (s.sz * s.sz).scale(cfg.d) + (s.sx * s.sx - s.sy * s.sy).scale(cfg.e)
}

/// Lab-frame Hamiltonian `R(t) D Sz² R†(t) + γ_e B Sz` with
/// `R(t) = R_z(φ(t)) R_y(θ)`, written out entrywise. Strain is not included.
pub fn h_lab(cfg: &NVConfiguration, env: &FieldEnvironment, t: f64) -> SpinMatrix {
    let phi = cfg.phi_at(env.omega_r, t);
    let (s, c) = cfg.theta.sin_cos();
    let d = cfg.d;
    let zeeman = cfg.gamma_e * env.b_static;
    let e1 = C64::from_polar(1.0, -phi);
    let e2 = C64::from_polar(1.0, -2.0 * phi);
    let re = |x: f64| C64::new(x, 0.0);
    let corner = c * c + 0.5 * s * s;
    let off = d * c * s / SQRT_2;
    let far = 0.5 * d * s * s;
    SpinMatrix::from_rows([
        [re(d * corner + zeeman), e1 * off, e2 * far],
        [e1.conj() * off, re(d * s * s), -e1 * off],
        [e2.conj() * far, -e1.conj() * off, re(d * corner - zeeman)],
    ])
}

/// Lab-frame rotation `R(t) = R_z(φ) R_y(θ)`.
pub fn lab_rotation(cfg: &NVConfiguration, omega_r: f64, t: f64) -> SpinMatrix {
    rotation_operator(Axis::Z, cfg.phi_at(omega_r, t)) * rotation_operator(Axis::Y, cfg.theta)
}

/// Rotating-frame Hamiltonians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotatingFrameHamiltonian {
    /// `U H_lab U† + i (∂_t U) U†` with `U = R(t)†`; time independent.
    pub full: SpinMatrix,
    /// Diagonal part of `full` (all off-diagonal terms dropped).
    pub secular: SpinMatrix,
}

/// The rotating-frame Hamiltonian equals `D Sz² + (γ_e B − ω_r)(cosθ Sz − sinθ Sx)`:
/// the rotation enters exactly as a pseudo-field opposing the static one.
pub fn h_rot(cfg: &NVConfiguration, env: &FieldEnvironment) -> RotatingFrameHamiltonian {
    let ops = spin1_operators();
    let (s, c) = cfg.theta.sin_cos();
    let axis_part = ops.sz.scale(c) - ops.sx.scale(s);
    let zero_field = (ops.sz * ops.sz).scale(cfg.d);
    let full = zero_field + axis_part.scale(cfg.gamma_e * env.b_static - env.omega_r);
    let secular = SpinMatrix::diagonal([full.get(0, 0).re, full.get(1, 1).re, full.get(2, 2).re]);
    RotatingFrameHamiltonian { full, secular }
}

/// Zero-field lab eigenstates `R(t)|m_s⟩`, returned as `[(+1), (0), (−1)]`.
pub fn eigenstates_lab(cfg: &NVConfiguration, omega_r: f64, t: f64) -> [(i8, SpinState); 3] {
    let r = lab_rotation(cfg, omega_r, t);
    [1i8, 0, -1].map(|ms| (ms, r.apply(&SpinState::basis(ms))))
}

/// Eigenstates of `h_rot(..).full`, labelled by the canonical basis state
/// they overlap most. Returned as `[(+1, E), (0, E), (−1, E)]`.
pub fn dressed_states_rot(cfg: &NVConfiguration, env: &FieldEnvironment) -> [(SpinState, f64); 3] {
    let (values, vectors) = h_rot(cfg, env).full.eigh();
    [1i8, 0, -1].map(|ms| {
        let target = SpinState::basis(ms);
        let k = (0..3)
            .max_by(|&a, &b| {
                target
                    .overlap_probability(&vectors[a])
                    .total_cmp(&target.overlap_probability(&vectors[b]))
            })
            .expect("three eigenvectors");
        (vectors[k], values[k])
    })
}

/// Transition angular frequencies `E_{±1} − E_0` of the exact rotating-frame
/// Hamiltonian, as `(to_plus, to_minus)`.
pub fn dressed_transitions(cfg: &NVConfiguration, env: &FieldEnvironment) -> (f64, f64) {
    let [(_, ep), (_, e0), (_, em)] = dressed_states_rot(cfg, env);
    (ep - e0, em - e0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::GAMMA_N14;
    use std::f64::consts::PI;

    fn two_pi(x: f64) -> f64 {
        2.0 * PI * x
    }

    #[test]
    fn zero_field_eigenvalues() {
        let cfg = NVConfiguration::new(0.0, 0.0, D_NV, two_pi(6.7e6), GAMMA_ELECTRON).unwrap();
        let ev = h_zero_field_static(&cfg).eigenvalues();
        assert!(ev[0].abs() < 1e-3);
        assert!((ev[1] - (cfg.d - cfg.e)).abs() / cfg.d < 1e-14);
        assert!((ev[2] - (cfg.d + cfg.e)).abs() / cfg.d < 1e-14);
        // dip splitting 2E
        assert!(((ev[2] - ev[1]) - two_pi(13.4e6)).abs() < 1.0);
        assert!((h_zero_field_static(&cfg).trace().re - 2.0 * cfg.d).abs() / cfg.d < 1e-15);
    }

    #[test]
    fn zero_field_degenerate_without_strain() {
        let cfg = NVConfiguration::with_theta(0.3);
        let ev = h_zero_field_static(&cfg).eigenvalues();
        assert!(ev[0].abs() < 1e-3 && (ev[1] - cfg.d).abs() < 1e-3 && (ev[2] - cfg.d).abs() < 1e-3);
    }

    #[test]
    fn config_validation() {
        assert!(matches!(NVConfiguration::new(4.0, 0.0, D_NV, 0.0, GAMMA_ELECTRON), Err(NvError::ThetaOutOfRange(_))));
        assert!(matches!(NVConfiguration::new(0.1, 0.0, -1.0, 0.0, GAMMA_ELECTRON), Err(NvError::NonPositiveSplitting(_))));
        assert!(matches!(
            NVConfiguration::new(0.1, 0.0, D_NV, D_NV / 5.0, GAMMA_ELECTRON),
            Err(NvError::StrainOutOfRange { .. })
        ));
        assert!(matches!(NVConfiguration::new(0.1, 0.0, D_NV, 0.0, 0.0), Err(NvError::ZeroGyromagneticRatio)));
    }

    #[test]
    fn h_lab_aligned_axis() {
        let cfg = NVConfiguration::with_theta(0.0);
        let env = FieldEnvironment::static_field(0.01, two_pi(1e6));
        let h = h_lab(&cfg, &env, 3.3e-7);
        let zeeman = cfg.gamma_e * 0.01;
        let expected = SpinMatrix::diagonal([cfg.d + zeeman, 0.0, cfg.d - zeeman]);
        assert!(h.max_abs_diff(&expected) < 1e-3);
        let bare = h_lab(&cfg, &FieldEnvironment::default(), 0.0);
        let ops = spin1_operators();
        assert!(bare.max_abs_diff(&(ops.sz * ops.sz).scale(cfg.d)) < 1e-3);
    }

    #[test]
    fn h_lab_perpendicular_middle_entry() {
        let cfg = NVConfiguration::with_theta(PI / 2.0);
        let h = h_lab(&cfg, &FieldEnvironment::default(), 0.0);
        assert!((h.get(1, 1).re - cfg.d).abs() < 1e-3);
    }

    #[test]
    fn h_lab_matches_rotation_construction() {
        let ops = spin1_operators();
        let mut seed = 0x1234_5678_u64;
        let mut next = || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..200 {
            let cfg = NVConfiguration { phi0: 2.0 * PI * next(), ..NVConfiguration::with_theta(PI * next()) };
            let env = FieldEnvironment::static_field(0.02 * next(), two_pi(20e6) * (next() - 0.5));
            let t = 1e-6 * next();
            let r = lab_rotation(&cfg, env.omega_r, t);
            let built = (ops.sz * ops.sz).scale(cfg.d).conjugate_by(&r) + ops.sz.scale(cfg.gamma_e * env.b_static);
            let h = h_lab(&cfg, &env, t);
            assert!(h.max_abs_diff(&built) <= 1e-12 * cfg.d, "{}", h.max_abs_diff(&built));
        }
    }

    #[test]
    fn h_rot_aligned_no_rotation() {
        let cfg = NVConfiguration::with_theta(0.0);
        let env = FieldEnvironment::static_field(0.01, 0.0);
        let z = cfg.gamma_e * 0.01;
        assert!(h_rot(&cfg, &env).full.max_abs_diff(&SpinMatrix::diagonal([cfg.d + z, 0.0, cfg.d - z])) < 1e-3);
    }

    #[test]
    fn h_rot_pseudo_field_block() {
        let theta = 0.4;
        let w = two_pi(5e6);
        let cfg = NVConfiguration::with_theta(theta);
        let full = h_rot(&cfg, &FieldEnvironment::static_field(0.0, w)).full;
        let pseudo = full - (spin1_operators().sz * spin1_operators().sz).scale(cfg.d);
        assert!((pseudo.get(0, 0).re + w * theta.cos()).abs() < 1e-3);
        assert!((pseudo.get(2, 2).re - w * theta.cos()).abs() < 1e-3);
        for (i, j) in [(0, 1), (1, 0), (1, 2), (2, 1)] {
            assert!((pseudo.get(i, j).re - w * theta.sin() / SQRT_2).abs() < 1e-3);
        }
        assert!(pseudo.get(0, 2).norm() < 1e-9);
    }

    #[test]
    fn h_rot_matches_frame_transformation() {
        // U H_lab U† + i (dU/dt) U† with U = R(t)†, dU/dt by central difference
        let cfg = NVConfiguration { phi0: 0.7, ..NVConfiguration::with_theta(0.9) };
        let env = FieldEnvironment::static_field(0.01, two_pi(3e6));
        for &t in &[0.0, 1.3e-7, 4.1e-7] {
            let u = |t: f64| lab_rotation(&cfg, env.omega_r, t).dagger();
            let h = 1e-12;
            let du = (u(t + h) - u(t - h)).scale(0.5 / h);
            let frame = h_lab(&cfg, &env, t).conjugate_by(&u(t)) + (du * u(t).dagger()).scale_complex(C64::new(0.0, 1.0));
            let full = h_rot(&cfg, &env).full;
            assert!(frame.max_abs_diff(&full) < 1e-6 * cfg.d, "{}", frame.max_abs_diff(&full));
        }
    }

    #[test]
    fn secular_diagonal() {
        let theta = 0.36;
        let cfg = NVConfiguration::with_theta(theta);
        let env = FieldEnvironment::static_field(0.01, two_pi(2e6));
        let sec = h_rot(&cfg, &env).secular;
        let zc = cfg.gamma_e * env.b_static * theta.cos();
        let wc = env.omega_r * theta.cos();
        assert!((sec.get(0, 0).re - (cfg.d + zc - wc)).abs() < 1e-3);
        assert!(sec.get(1, 1).re.abs() < 1e-6);
        assert!((sec.get(2, 2).re - (cfg.d - zc + wc)).abs() < 1e-3);
    }

    #[test]
    fn eigenstate_columns() {
        let cfg = NVConfiguration::with_theta(PI / 2.0);
        let [(_, plus), (_, zero), (_, minus)] = eigenstates_lab(&cfg, 0.0, 0.0);
        let r = 1.0 / SQRT_2;
        assert!(zero.max_abs_diff(&SpinState::new(C64::new(-r, 0.0), C64::new(0.0, 0.0), C64::new(r, 0.0))) < 1e-15);
        assert!((plus.amplitude(0) - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((minus.amplitude(1) - C64::new(-r, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn eigenstates_first_component() {
        let cfg = NVConfiguration { phi0: 0.4, ..NVConfiguration::with_theta(0.8) };
        let [(_, plus), ..] = eigenstates_lab(&cfg, two_pi(1e6), 1e-7);
        let phi = cfg.phi_at(two_pi(1e6), 1e-7);
        let expected = C64::from_polar((0.4f64).cos().powi(2), -phi);
        assert!((plus.amplitude(0) - expected).norm() < 1e-14);
    }

    #[test]
    fn eigenstates_aligned_are_canonical() {
        let cfg = NVConfiguration::with_theta(0.0);
        for (ms, s) in eigenstates_lab(&cfg, 0.0, 0.0) {
            assert!((s.overlap_probability(&SpinState::basis(ms)) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn eigen_residual_random_orientations() {
        let mut x = 0.123_f64;
        for _ in 0..100 {
            x = (x * 7.31 + 0.177).fract();
            let theta = PI * x;
            let phi0 = 2.0 * PI * (x * 3.7).fract();
            let cfg = NVConfiguration { phi0, ..NVConfiguration::with_theta(theta) };
            let h = h_lab(&cfg, &FieldEnvironment::default(), 0.0);
            let states = eigenstates_lab(&cfg, 0.0, 0.0);
            let mut overlaps = 0.0;
            for (i, (ms, s)) in states.iter().enumerate() {
                let energy = if *ms == 0 { 0.0 } else { cfg.d };
                let residual = h.apply(s).max_abs_diff(&s.scale(C64::new(energy, 0.0)));
                assert!(residual < 1e-10 * cfg.d.max(1.0), "{residual}");
                for (j, (_, o)) in states.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    overlaps += (s.inner(o).norm() - want).abs();
                }
            }
            assert!(overlaps < 1e-13);
        }
    }

    #[test]
    fn pseudo_field_values() {
        let w = two_pi(20e6);
        let e = pseudo_field(w, GAMMA_ELECTRON).unwrap().magnitude;
        assert!((e - 0.71e-3).abs() / 0.71e-3 < 0.01, "{e}");
        let n = pseudo_field(w, GAMMA_N14).unwrap().magnitude;
        assert!((n - 6.5).abs() / 6.5 < 0.02, "{n}");
        assert_eq!(pseudo_field(0.0, GAMMA_ELECTRON).unwrap().magnitude, 0.0);
        assert_eq!(pseudo_field(1.0, 0.0), Err(NvError::ZeroGyromagneticRatio));
    }

    #[test]
    fn rotation_sense_sign() {
        assert!(RotationSense::Clockwise.signed(5.0) < 0.0);
        assert!(RotationSense::Counterclockwise.signed(5.0) > 0.0);
        assert_eq!(RotationSense::of(-1.0), RotationSense::Clockwise);
    }

    #[test]
    fn adiabatic_warning_when_fast() {
        let cfg = NVConfiguration::with_theta(0.2);
        assert!(FieldEnvironment::static_field(0.0, 2.0 * cfg.d).adiabatic_warning(&cfg).is_some());
        assert!(FieldEnvironment::static_field(0.0, 1e6).adiabatic_warning(&cfg).is_none());
    }

    #[test]
    fn dressed_states_reduce_to_secular_when_aligned() {
        let cfg = NVConfiguration::with_theta(0.0);
        let env = FieldEnvironment::static_field(0.01, two_pi(1e6));
        let (plus, minus) = dressed_transitions(&cfg, &env);
        let z = cfg.gamma_e * 0.01 - env.omega_r;
        assert!((plus - (cfg.d + z)).abs() < 1e-2);
        assert!((minus - (cfg.d - z)).abs() < 1e-2);
    }
}
