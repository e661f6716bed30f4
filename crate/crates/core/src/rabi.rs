//! Rabi oscillations of an NV spin whose axis turns with the diamond, driven
//! by a lab-fixed microwave field tilted by `θ′` in the `yz` plane.
//!
//! The effective drive is the microwave component perpendicular to the NV
//! axis, so the Rabi frequency depends on the rotation phase `φ`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DVector, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::berry::{exact_resonance_frequency, DriveComponent, ResonanceQuery};
use crate::fitting::{levenberg_marquardt, LmOptions};
use crate::nv_model::{dressed_states_rot, h_lab, lab_rotation, FieldEnvironment, NVConfiguration};
use crate::spin_core::{propagate_uniform, spin1_operators, SpinError, SpinMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RabiError {
    #[error("microwave detuned by {detuning:e} rad/s, more than half the Rabi frequency {rabi:e} rad/s")]
    OffResonance { detuning: f64, rabi: f64 },
    #[error("trace too short or too coarse to resolve the oscillation")]
    Unresolved,
    #[error("sinusoid fit failed")]
    FitFailed,
    #[error("target m_s must be +1 or -1, got {0}")]
    BadTarget(i8),
    #[error(transparent)]
    Propagation(#[from] SpinError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    /// Optical initialisation, s (bookkeeping only).
    pub init_duration: f64,
    /// Rotation phase at the start of the microwave pulse, rad.
    pub mw_start_phase: f64,
    /// Longest pulse of the sweep, s.
    pub mw_duration: f64,
    /// s (bookkeeping only)
    pub readout_delay: f64,
    /// s
    pub rotation_period: f64,
}

impl PulseSequence {
    /// Non-fatal problems: a pulse longer than a tenth of the rotation
    /// period breaks the frozen-phase picture.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.rotation_period.is_finite() && self.mw_duration >= self.rotation_period / 10.0 {
            w.push(format!(
                "microwave pulse {:.3e} s is not short compared with the rotation period {:.3e} s",
                self.mw_duration, self.rotation_period
            ));
        }
        w
    }

    /// Total length of one repetition, s.
    pub fn cycle_time(&self) -> f64 {
        self.init_duration + self.mw_duration + self.readout_delay
    }
}

/// Which of the two published spellings of the microwave direction to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MicrowavePlane {
    /// `(0, −sinθ′, cosθ′)`
    #[default]
    Yz,
    /// `(−sinθ′, 0, cosθ′)`
    Xz,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RabiGeometry {
    /// NV axis vs rotation axis, rad.
    pub theta: f64,
    /// Microwave tilt from `z`, rad.
    pub theta_prime: f64,
    #[serde(default)]
    pub plane: MicrowavePlane,
}

pub const DEFAULT_THETA_PRIME_DEG: f64 = 8.5;

impl RabiGeometry {
    pub fn new(theta: f64) -> Self {
        Self { theta, theta_prime: DEFAULT_THETA_PRIME_DEG.to_radians(), plane: MicrowavePlane::Yz }
    }

    pub fn n_mw(&self) -> Vector3<f64> {
        let (s, c) = self.theta_prime.sin_cos();
        match self.plane {
            MicrowavePlane::Yz => Vector3::new(0.0, -s, c),
            MicrowavePlane::Xz => Vector3::new(-s, 0.0, c),
        }
    }

    pub fn n_nv(&self, phi: f64) -> Vector3<f64> {
        nv_direction(self.theta, phi)
    }
}

/// `(cosφ sinθ, sinφ sinθ, cosθ)`.
pub fn nv_direction(theta: f64, phi: f64) -> Vector3<f64> {
    Vector3::new(phi.cos() * theta.sin(), phi.sin() * theta.sin(), theta.cos())
}

/// Perpendicular fraction of the microwave field, `√(1 − (n_NV·n_MW)²)`.
pub fn rabi_factor(geom: &RabiGeometry, phi: f64) -> f64 {
    let d = geom.n_nv(phi).dot(&geom.n_mw());
    (1.0 - d * d).max(0.0).sqrt()
}

/// Rabi frequency predicted for a `0 ↔ ±1` transition:
/// `γ_e B_MW · rabi_factor / √2`.
pub fn predicted_rabi(gamma_e: f64, b_mw: f64, geom: &RabiGeometry, phi: f64) -> f64 {
    gamma_e * b_mw * rabi_factor(geom, phi) * FRAC_1_SQRT_2
}

/// `Ω(φ)` scaled so that `Ω(π/2) = reference`.
pub fn phase_sweep(geom: &RabiGeometry, phis: &[f64], reference: f64) -> Vec<f64> {
    let norm = reference / rabi_factor(geom, PI / 2.0);
    phis.iter().map(|&p| norm * rabi_factor(geom, p)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RabiOptions {
    pub target_ms: i8,
    pub geometry: RabiGeometry,
    /// Phenomenological decay of the oscillation, s.
    pub decay_t2rabi: Option<f64>,
    /// Number of pulse lengths sampled over `mw_duration`.
    pub samples: usize,
    /// `‖H‖∞·Δt` per integration step.
    pub phase_per_step: f64,
}

impl RabiOptions {
    pub fn new(geometry: RabiGeometry) -> Self {
        Self { target_ms: 1, geometry, decay_t2rabi: None, samples: 400, phase_per_step: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RabiTrace {
    /// Pulse lengths, s.
    pub t: Vec<f64>,
    /// Population of the target dressed state.
    pub population: Vec<f64>,
    /// Microwave carrier used, rad/s.
    pub mw_frequency: f64,
    /// From the sinusoid fit, rad/s.
    pub fitted_rabi: f64,
    /// Fitted oscillation amplitude (1 on resonance without decay).
    pub fitted_amplitude: f64,
    /// `γ_e B_MW · rabi_factor(φ_start) / √2`, rad/s.
    pub predicted_rabi: f64,
    /// Largest deviation of the state norm from 1.
    pub norm_drift: f64,
    pub warnings: Vec<String>,
}

/// Propagate the lab-frame Hamiltonian plus
/// `γ_e B_MW cos(ω_MW t) (n_MW·S)` from the dressed `|0⟩` and record the
/// target population as a function of pulse length.
///
/// The carrier is `env.mw_frequency` when nonzero, otherwise the exact
/// rotating-frame transition. `cfg.phi0` is replaced by the sequence's start
/// phase; the axis keeps turning at `env.omega_r` during the pulse.
pub fn simulate_rabi(cfg: &NVConfiguration, env: &FieldEnvironment, seq: &PulseSequence, opts: &RabiOptions) -> Result<RabiTrace, RabiError> {
    if opts.target_ms != 1 && opts.target_ms != -1 {
        return Err(RabiError::BadTarget(opts.target_ms));
    }
    let cfg = NVConfiguration { phi0: seq.mw_start_phase, theta: opts.geometry.theta, ..*cfg };
    let env = *env;
    let geom = opts.geometry;
    let predicted = predicted_rabi(cfg.gamma_e, env.mw_amplitude, &geom, seq.mw_start_phase);

    let q = ResonanceQuery { target_ms: opts.target_ms, drive_component: DriveComponent::Longitudinal, cfg, env };
    let resonance = exact_resonance_frequency(&q);
    let mw_frequency = if env.mw_frequency != 0.0 { env.mw_frequency } else { resonance };
    let detuning = (mw_frequency - resonance).abs();
    if detuning > predicted / 2.0 {
        return Err(RabiError::OffResonance { detuning, rabi: predicted });
    }

    let ops = spin1_operators();
    let n = geom.n_mw();
    let drive: SpinMatrix = (ops.sx.scale(n.x) + ops.sy.scale(n.y) + ops.sz.scale(n.z)).scale(cfg.gamma_e * env.mw_amplitude);
    let hamiltonian = |t: f64| h_lab(&cfg, &env, t) + drive.scale((mw_frequency * t).cos());

    let samples = opts.samples.max(8);
    let sample_dt = seq.mw_duration / samples as f64;
    let bound = h_lab(&cfg, &env, 0.0).norm_inf() + drive.norm_inf();
    let per_sample = ((sample_dt * bound / opts.phase_per_step).ceil() as usize).max(1);
    let dt = sample_dt / per_sample as f64;

    let [(plus, _), (zero, _), (minus, _)] = dressed_states_rot(&cfg, &env);
    let target = if opts.target_ms == 1 { plus } else { minus };
    let psi0 = lab_rotation(&cfg, env.omega_r, 0.0).apply(&zero);

    let mut t_out = vec![0.0];
    let mut pop = vec![0.0];
    let mut norm_drift: f64 = 0.0;
    propagate_uniform(hamiltonian, psi0, 0.0, dt, samples * per_sample, per_sample, |_, t, psi| {
        let tgt = lab_rotation(&cfg, env.omega_r, t).apply(&target);
        t_out.push(t);
        pop.push(tgt.overlap_probability(psi));
        norm_drift = norm_drift.max((psi.norm() - 1.0).abs());
    })?;

    if let Some(t2) = opts.decay_t2rabi {
        for (p, &t) in pop.iter_mut().zip(&t_out) {
            *p = 0.5 + (*p - 0.5) * (-t / t2).exp();
        }
    }
    let (fitted_rabi, fitted_amplitude) = fit_rabi(&t_out, &pop, opts.decay_t2rabi)?;
    if opts.decay_t2rabi.is_none() && fitted_amplitude < 0.8 {
        // amplitude Ω²/(Ω² + δ²) below 0.8 means δ > Ω/2
        return Err(RabiError::OffResonance { detuning: fitted_rabi * (1.0 / fitted_amplitude - 1.0).sqrt(), rabi: fitted_rabi });
    }
    let mut warnings = seq.warnings();
    if let Some(w) = env.adiabatic_warning(&cfg) {
        warnings.push(w);
    }
    Ok(RabiTrace { t: t_out, population: pop, mw_frequency, fitted_rabi, fitted_amplitude, predicted_rabi: predicted, norm_drift, warnings })
}

/// Fit `P(t) = A/2 · (1 − e^{−t/τ} cos Ωt)`, with `τ` fixed (or infinite).
/// The starting frequency comes from the first maximum of the trace.
pub fn fit_rabi(t: &[f64], p: &[f64], tau: Option<f64>) -> Result<(f64, f64), RabiError> {
    let first_max = (1..p.len().saturating_sub(1)).find(|&k| p[k] >= p[k - 1] && p[k] > p[k + 1] && p[k] > 0.3).ok_or(RabiError::Unresolved)?;
    if first_max < 4 {
        return Err(RabiError::Unresolved);
    }
    let omega0 = PI / t[first_max];
    let amp0 = p[first_max].min(1.0);
    let inv_tau = tau.map_or(0.0, |x| 1.0 / x);
    let residuals = |q: &DVector<f64>| {
        DVector::from_iterator(t.len(), t.iter().zip(p).map(|(&ti, &pi)| 0.5 * q[1] * (1.0 - (-ti * inv_tau).exp() * (q[0] * ti).cos()) - pi))
    };
    let fit = levenberg_marquardt(residuals, DVector::from_vec(vec![omega0, amp0]), &[omega0, 1.0], &LmOptions::default())
        .map_err(|_| RabiError::FitFailed)?;
    Ok((fit.params[0].abs(), fit.params[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn deg(x: f64) -> f64 {
        x.to_radians()
    }

    #[test]
    fn direction_examples() {
        assert!((nv_direction(0.0, 1.3) - Vector3::z()).norm() < 1e-15);
        assert!((nv_direction(PI / 2.0, PI / 2.0) - Vector3::y()).norm() < 1e-15);
        for k in 0..20 {
            let phi = 0.37 * k as f64;
            let v0 = nv_direction(0.6, 0.0);
            let rz = nalgebra::Rotation3::from_axis_angle(&Vector3::z_axis(), phi);
            assert!((rz * v0 - nv_direction(0.6, phi)).norm() < 1e-14);
            assert!((nv_direction(0.6, phi).norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn factor_examples() {
        let g = RabiGeometry::new(deg(22.0));
        let a = rabi_factor(&g, PI / 2.0);
        let b = rabi_factor(&g, PI);
        assert!((a - 0.5076).abs() < 1e-4, "{a}");
        assert!((b - 0.3989).abs() < 1e-4, "{b}");
        assert!((a / b - 1.272).abs() < 1e-3);
        let on_axis = RabiGeometry::new(0.0);
        for k in 0..8 {
            assert!((rabi_factor(&on_axis, k as f64) - deg(8.5).sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn factor_symmetry_and_extrema() {
        let g = RabiGeometry::new(deg(35.0));
        for k in 0..50 {
            let phi = 0.13 * k as f64;
            assert!((rabi_factor(&g, phi) - rabi_factor(&g, PI - phi)).abs() < 1e-14);
            assert!((rabi_factor(&g, phi) - rabi_factor(&g, phi + TAU)).abs() < 1e-14);
        }
        let grid: Vec<f64> = (0..360).map(|k| TAU * k as f64 / 360.0).collect();
        let vals: Vec<f64> = grid.iter().map(|&p| rabi_factor(&g, p)).collect();
        let argmin = (0..360).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap();
        let argmax = (0..360).max_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap();
        assert_eq!(argmin, 270);
        assert_eq!(argmax, 90);
    }

    #[test]
    fn sweep_normalization() {
        let g = RabiGeometry::new(deg(22.0));
        let out = phase_sweep(&g, &[PI / 2.0, PI], TAU * 2.72e6);
        assert!((out[0] - TAU * 2.72e6).abs() < 1e-6);
        assert!((out[1] / TAU / 1e6 - 2.14).abs() < 0.01);
        let flat = RabiGeometry { theta_prime: 0.0, ..g };
        let v = phase_sweep(&flat, &[0.0, 1.0, 2.0, 4.0], 1.0);
        assert!(v.iter().all(|x| (x - 1.0).abs() < 1e-14));
    }

    #[test]
    fn sequence_warning() {
        let s = PulseSequence { init_duration: 1e-3, mw_start_phase: 0.0, mw_duration: 2e-6, readout_delay: 0.0, rotation_period: 1e-5 };
        assert_eq!(s.warnings().len(), 1);
        let ok = PulseSequence { rotation_period: 1e-3, ..s };
        assert!(ok.warnings().is_empty());
    }

    fn perpendicular_run(decay: Option<f64>, duration: f64, phase_per_step: f64) -> RabiTrace {
        // NV along z, microwave along −y: full perpendicular drive
        let mut env = FieldEnvironment::static_field(2e-3, 0.0);
        env.mw_amplitude = TAU * 5e6 * 2f64.sqrt() / crate::constants::GAMMA_ELECTRON;
        let geom = RabiGeometry { theta: 0.0, theta_prime: PI / 2.0, plane: MicrowavePlane::Yz };
        let seq = PulseSequence { init_duration: 0.0, mw_start_phase: 0.0, mw_duration: duration, readout_delay: 0.0, rotation_period: f64::INFINITY };
        let opts = RabiOptions { decay_t2rabi: decay, samples: 300, phase_per_step, ..RabiOptions::new(geom) };
        simulate_rabi(&NVConfiguration::with_theta(0.0), &env, &seq, &opts).unwrap()
    }

    #[test]
    fn spin_one_ladder_factor() {
        let tr = perpendicular_run(None, 0.6e-6, 0.1);
        assert!((tr.predicted_rabi / (TAU * 5e6) - 1.0).abs() < 1e-12);
        assert!((tr.fitted_rabi / tr.predicted_rabi - 1.0).abs() < 0.01, "{} vs {}", tr.fitted_rabi, tr.predicted_rabi);
        assert!(tr.fitted_amplitude > 0.97);
    }

    #[test]
    fn norm_conserved_at_fine_steps() {
        let tr = perpendicular_run(None, 0.3e-6, 0.007);
        assert!(tr.norm_drift < 1e-8, "{}", tr.norm_drift);
    }

    #[test]
    fn decay_envelope() {
        // Ω = 2π·5 MHz puts an oscillation extremum at t = 0.9 µs, where
        // |P − 1/2| equals the envelope e^{-1}/2
        let tr = perpendicular_run(Some(0.9e-6), 1.2e-6, 0.1);
        let k = tr.t.iter().position(|&t| t >= 0.9e-6 - 1e-12).unwrap();
        let env = (tr.population[k] - 0.5).abs();
        assert!((env - 0.5 * (-1.0f64).exp()).abs() < 0.01, "{env}");
    }

    #[test]
    fn far_detuned_rejected() {
        let mut env = FieldEnvironment::static_field(2e-3, 0.0);
        env.mw_amplitude = 1e-4;
        env.mw_frequency = TAU * 3.5e9;
        let seq = PulseSequence { init_duration: 0.0, mw_start_phase: 0.0, mw_duration: 1e-7, readout_delay: 0.0, rotation_period: 1.0 };
        let r = simulate_rabi(&NVConfiguration::with_theta(0.3), &env, &seq, &RabiOptions::new(RabiGeometry::new(0.3)));
        assert!(matches!(r, Err(RabiError::OffResonance { .. })));
    }
}
