//! Geometric phase of rotating NV spins and the microwave resonances it
//! shifts.
//!
//! Three routes to a resonance are provided:
//! * [`resonance_frequency`]: the secular closed form,
//! * [`exact_resonance_frequency`]: eigenvalues of the full rotating-frame
//!   Hamiltonian,
//! * [`resonance_from_dynamics`] / [`locate_resonance`]: brute-force
//!   propagation of the lab-frame Schrödinger equation with a microwave
//!   pulse, sweeping the carrier frequency.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use thiserror::Error;

use crate::nv_model::{dressed_states_rot, eigenstates_lab, h_lab, lab_rotation, FieldEnvironment, NVConfiguration};
use crate::spin_core::{propagate_uniform, rotation_operator, spin1_operators, Axis, SpinError, SpinMatrix, SpinState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BerryError {
    #[error("successive eigenstate overlap {overlap:.6} at sample {index} is below 0.999; path too coarse")]
    PathTooCoarse { index: usize, overlap: f64 },
    #[error("path needs at least two samples")]
    EmptyPath,
    #[error("target m_s must be +1 or -1, got {0}")]
    BadTarget(i8),
    #[error("m_s must be -1, 0 or +1, got {0}")]
    BadProjection(i8),
    #[error("no resonance found: maximum transfer {max_transfer:.3} is below 0.5")]
    NoPeakFound { max_transfer: f64 },
    #[error("transfer maximum sits on the sweep edge at {frequency:e} rad/s; widen the sweep")]
    PeakAtSweepEdge { frequency: f64 },
    #[error("sweep needs at least three frequencies and a positive pulse duration")]
    BadSweep,
    #[error(transparent)]
    Propagation(#[from] SpinError),
}

/// Which term of the microwave Hamiltonian drives the transition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriveComponent {
    /// Microwave field along the rotation axis (`S_z` coupling).
    Longitudinal,
    /// Microwave field perpendicular to the rotation axis (`S_y` coupling).
    Transverse,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResonanceQuery {
    pub target_ms: i8,
    pub drive_component: DriveComponent,
    pub cfg: NVConfiguration,
    pub env: FieldEnvironment,
}

impl ResonanceQuery {
    pub fn new(target_ms: i8, drive_component: DriveComponent, cfg: NVConfiguration, env: FieldEnvironment) -> Result<Self, BerryError> {
        if target_ms != 1 && target_ms != -1 {
            return Err(BerryError::BadTarget(target_ms));
        }
        Ok(Self { target_ms, drive_component, cfg, env })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathType {
    Open,
    ClosedLoop,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BerryPhaseResult {
    /// Radians. Open-path phases are not reduced modulo 2π.
    pub phase: f64,
    pub path_type: PathType,
}

fn check_ms(ms: i8) -> Result<(), BerryError> {
    if (-1..=1).contains(&ms) {
        Ok(())
    } else {
        Err(BerryError::BadProjection(ms))
    }
}

/// Open-path phase `m_s ω_r t cosθ` accumulated at constant `theta`.
pub fn berry_phase_open(ms: i8, theta: f64, omega_r: f64, t: f64) -> BerryPhaseResult {
    BerryPhaseResult { phase: f64::from(ms) * omega_r * t * theta.cos(), path_type: PathType::Open }
}

/// Gauge-invariant phase of one full loop, `−2π m_s (1 − cosθ)`.
pub fn berry_phase_closed(ms: i8, theta: f64) -> BerryPhaseResult {
    BerryPhaseResult { phase: -TAU * f64::from(ms) * (1.0 - theta.cos()), path_type: PathType::ClosedLoop }
}

/// Reduce an angle to `(−π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Closed-loop phase minus the one-period open-path phase, reduced to
/// `(−π, π]`. Zero up to rounding for every `theta`.
pub fn gauge_mismatch(ms: i8, theta: f64) -> f64 {
    let period = 1.0;
    let open = berry_phase_open(ms, theta, TAU / period, period).phase;
    wrap_phase(berry_phase_closed(ms, theta).phase - open)
}

/// One sample of an NV-axis path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathSample {
    pub t: f64,
    pub theta: f64,
    pub phi: f64,
}

/// Constant-`theta` path over `periods` revolutions with `samples_per_period`
/// points per revolution (inclusive of both ends).
pub fn circular_path(theta: f64, omega_r: f64, periods: f64, samples_per_period: usize) -> Vec<PathSample> {
    let n = ((periods * samples_per_period as f64).round() as usize).max(1);
    let duration = periods * TAU / omega_r.abs();
    (0..=n)
        .map(|k| {
            let t = duration * k as f64 / n as f64;
            PathSample { t, theta, phi: omega_r * t }
        })
        .collect()
}

/// Discrete Berry phase `−Σ arg⟨m_s, k|m_s, k+1⟩` along the sampled path,
/// using the zero-field eigenstates `R_z(φ)R_y(θ)|m_s⟩` as the gauge.
pub fn berry_phase_numeric(ms: i8, path: &[PathSample]) -> Result<BerryPhaseResult, BerryError> {
    check_ms(ms)?;
    if path.len() < 2 {
        return Err(BerryError::EmptyPath);
    }
    let state = |s: &PathSample| {
        let cfg = NVConfiguration { phi0: s.phi, ..NVConfiguration::with_theta(s.theta) };
        let idx = (1 - ms) as usize;
        eigenstates_lab(&cfg, 0.0, 0.0)[idx].1
    };
    let mut prev = state(&path[0]);
    let mut phase = 0.0;
    for (k, s) in path.iter().enumerate().skip(1) {
        let next = state(s);
        let overlap = prev.inner(&next);
        if overlap.norm() < 0.999 {
            return Err(BerryError::PathTooCoarse { index: k, overlap: overlap.norm() });
        }
        phase -= overlap.arg();
        prev = next;
    }
    Ok(BerryPhaseResult { phase, path_type: PathType::Open })
}

/// Secular resonance (rad/s) of the `0 → target_ms` transition.
///
/// Longitudinal drive: `D + m_s(γ_e B − ω_r) cosθ`.
/// Transverse drive adds the rotational Doppler term:
/// `D + m_s γ_e B cosθ + m_s ω_r (1 − cosθ)`.
pub fn resonance_frequency(q: &ResonanceQuery) -> f64 {
    let ms = f64::from(q.target_ms);
    let c = q.cfg.theta.cos();
    let zeeman = q.cfg.gamma_e * q.env.b_static * c;
    let rotation = match q.drive_component {
        DriveComponent::Longitudinal => -q.env.omega_r * c,
        DriveComponent::Transverse => q.env.omega_r * (1.0 - c),
    };
    q.cfg.d + ms * (zeeman + rotation)
}

/// Rotation-induced part of [`resonance_frequency`].
pub fn resonance_shift(q: &ResonanceQuery) -> f64 {
    let still = ResonanceQuery { env: FieldEnvironment { omega_r: 0.0, ..q.env }, ..*q };
    resonance_frequency(q) - resonance_frequency(&still)
}

/// Resonance from the eigenvalues of the full rotating-frame Hamiltonian,
/// keeping the transverse static-field and pseudo-field terms. For the
/// transverse drive the Doppler offset `m_s ω_r` of the dominant sideband is
/// added.
pub fn exact_resonance_frequency(q: &ResonanceQuery) -> f64 {
    let [(_, ep), (_, e0), (_, em)] = dressed_states_rot(&q.cfg, &q.env);
    let base = if q.target_ms == 1 { ep - e0 } else { em - e0 };
    match q.drive_component {
        DriveComponent::Longitudinal => base,
        DriveComponent::Transverse => base + f64::from(q.target_ms) * q.env.omega_r,
    }
}

fn drive_operator(component: DriveComponent) -> SpinMatrix {
    let ops = spin1_operators();
    match component {
        DriveComponent::Longitudinal => ops.sz,
        DriveComponent::Transverse => ops.sy,
    }
}

/// Matrix element of the drive between the dressed `|0⟩` and target states,
/// per unit `γ_e B_MW`. For the transverse drive this is the larger of the
/// two Doppler sidebands.
pub fn drive_coupling(q: &ResonanceQuery) -> f64 {
    let [(plus, _), (zero, _), (minus, _)] = dressed_states_rot(&q.cfg, &q.env);
    let target = if q.target_ms == 1 { plus } else { minus };
    let tilt = rotation_operator(Axis::Y, q.cfg.theta).dagger();
    match q.drive_component {
        DriveComponent::Longitudinal => {
            let v = spin1_operators().sz.conjugate_by(&tilt);
            target.inner(&v.apply(&zero)).norm()
        }
        DriveComponent::Transverse => {
            let a = spin1_operators().s_plus.conjugate_by(&tilt).scale(0.5);
            let up = target.inner(&a.apply(&zero)).norm();
            let down = target.inner(&a.dagger().apply(&zero)).norm();
            up.max(down)
        }
    }
}

/// Frequency sweep for [`resonance_from_dynamics`].
#[derive(Clone, Debug, PartialEq)]
pub struct DynamicsSweep {
    /// Microwave carrier angular frequencies, rad/s, increasing.
    pub frequencies: Vec<f64>,
    /// Pulse length, s.
    pub pulse_duration: f64,
    /// `‖H‖∞·Δt` per integration step.
    pub phase_per_step: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DynamicsResonance {
    /// Interpolated peak position, rad/s.
    pub peak: f64,
    pub max_transfer: f64,
    pub frequencies: Vec<f64>,
    pub transfers: Vec<f64>,
}

/// Population transferred from the dressed `|0⟩` to the dressed target
/// state by a square microwave pulse at `mw_frequency`, with the lab-frame
/// Hamiltonian `h_lab(t) + γ_e B_MW cos(ω_MW t) V` and no rotating-wave
/// approximation.
pub fn transfer_probability(q: &ResonanceQuery, mw_frequency: f64, pulse_duration: f64, phase_per_step: f64) -> Result<f64, BerryError> {
    let cfg = q.cfg;
    let env = q.env;
    let drive = drive_operator(q.drive_component).scale(cfg.gamma_e * env.mw_amplitude);
    let hamiltonian = |t: f64| h_lab(&cfg, &env, t) + drive.scale((mw_frequency * t).cos());
    let norm_bound = h_lab(&cfg, &env, 0.0).norm_inf() + drive.norm_inf();
    let n_steps = ((pulse_duration * norm_bound / phase_per_step).ceil() as usize).max(1);
    let dt = pulse_duration / n_steps as f64;

    let [(plus, _), (zero, _), (minus, _)] = dressed_states_rot(&cfg, &env);
    let target_rot = if q.target_ms == 1 { plus } else { minus };
    let to_lab = |s: &SpinState, t: f64| lab_rotation(&cfg, env.omega_r, t).apply(s);

    let psi0 = to_lab(&zero, 0.0);
    let final_state = propagate_uniform(hamiltonian, psi0, 0.0, dt, n_steps, n_steps, |_, _, _| {})?;
    let target = to_lab(&target_rot, pulse_duration);
    Ok(target.overlap_probability(&final_state))
}

/// Dressed-state populations `(+1, 0, −1)` during a square pulse started in
/// the dressed `|0⟩`, sampled at `samples + 1` evenly spaced times.
pub fn population_trace(
    q: &ResonanceQuery,
    mw_frequency: f64,
    duration: f64,
    samples: usize,
    phase_per_step: f64,
) -> Result<(Vec<f64>, Vec<[f64; 3]>), BerryError> {
    let cfg = q.cfg;
    let env = q.env;
    let drive = drive_operator(q.drive_component).scale(cfg.gamma_e * env.mw_amplitude);
    let hamiltonian = |t: f64| h_lab(&cfg, &env, t) + drive.scale((mw_frequency * t).cos());
    let samples = samples.max(1);
    let sample_dt = duration / samples as f64;
    let bound = h_lab(&cfg, &env, 0.0).norm_inf() + drive.norm_inf();
    let per_sample = ((sample_dt * bound / phase_per_step).ceil() as usize).max(1);
    let dt = sample_dt / per_sample as f64;

    let dressed = dressed_states_rot(&cfg, &env);
    let populations = |t: f64, psi: &SpinState| {
        let u = lab_rotation(&cfg, env.omega_r, t);
        dressed.each_ref().map(|(s, _)| u.apply(s).overlap_probability(psi))
    };
    let psi0 = lab_rotation(&cfg, env.omega_r, 0.0).apply(&dressed[1].0);
    let mut ts = Vec::with_capacity(samples + 1);
    let mut pops = Vec::with_capacity(samples + 1);
    propagate_uniform(hamiltonian, psi0, 0.0, dt, samples * per_sample, per_sample, |_, t, psi| {
        ts.push(t);
        pops.push(populations(t, psi));
    })?;
    Ok((ts, pops))
}

/// Sweep the carrier, return the interpolated transfer maximum.
pub fn resonance_from_dynamics(q: &ResonanceQuery, sweep: &DynamicsSweep) -> Result<DynamicsResonance, BerryError> {
    if sweep.frequencies.len() < 3 || !(sweep.pulse_duration > 0.0) {
        return Err(BerryError::BadSweep);
    }
    let transfers = sweep
        .frequencies
        .par_iter()
        .map(|&w| transfer_probability(q, w, sweep.pulse_duration, sweep.phase_per_step))
        .collect::<Result<Vec<_>, _>>()?;
    let (k, &max_transfer) = transfers
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty sweep");
    if max_transfer < 0.5 {
        return Err(BerryError::NoPeakFound { max_transfer });
    }
    if k == 0 || k == transfers.len() - 1 {
        return Err(BerryError::PeakAtSweepEdge { frequency: sweep.frequencies[k] });
    }
    let peak = parabolic_vertex(
        [sweep.frequencies[k - 1], sweep.frequencies[k], sweep.frequencies[k + 1]],
        [transfers[k - 1], transfers[k], transfers[k + 1]],
    );
    Ok(DynamicsResonance { peak, max_transfer, frequencies: sweep.frequencies.clone(), transfers })
}

/// Vertex of the parabola through three points.
pub fn parabolic_vertex(x: [f64; 3], y: [f64; 3]) -> f64 {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let curvature = (d2 - d1) / (x[2] - x[0]);
    if curvature == 0.0 {
        return x[1];
    }
    let v = 0.5 * (x[0] + x[1]) - d1 / (2.0 * curvature);
    v.clamp(x[0], x[2])
}

/// Grid of `points` frequencies centred on `center` with spacing `step`.
pub fn centered_grid(center: f64, step: f64, points: usize) -> Vec<f64> {
    let half = (points as f64 - 1.0) / 2.0;
    (0..points).map(|k| center + (k as f64 - half) * step).collect()
}

/// Settings for the two-stage search in [`locate_resonance`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocateOptions {
    /// Half-width of the coarse search around the secular prediction, rad/s.
    pub search_half_width: f64,
    /// Rabi frequency of the coarse pass, rad/s.
    pub coarse_rabi: f64,
    /// Rabi frequency of the fine pass, rad/s.
    pub fine_rabi: f64,
    pub phase_per_step: f64,
}

impl LocateOptions {
    /// Fine Rabi frequency kept well below the distance to the nearest other
    /// allowed line.
    pub fn for_query(q: &ResonanceQuery) -> Self {
        let (plus, minus) = {
            let a = ResonanceQuery { target_ms: 1, ..*q };
            let b = ResonanceQuery { target_ms: -1, ..*q };
            (exact_resonance_frequency(&a), exact_resonance_frequency(&b))
        };
        let separation = (plus - minus).abs().max(1.0);
        let fine_rabi = (separation / 8.0).min(TAU * 0.5e6);
        let coarse_rabi = (separation / 4.0).min(TAU * 4.0e6).max(fine_rabi);
        let rotation = q.env.omega_r.abs();
        let zeeman = q.cfg.gamma_e * q.env.b_static.abs();
        let second_order = zeeman.max(rotation).powi(2) / q.cfg.d;
        Self {
            search_half_width: 3.0 * coarse_rabi + 2.0 * rotation + 4.0 * second_order,
            coarse_rabi,
            fine_rabi,
            phase_per_step: 0.06,
        }
    }
}

fn with_rabi(q: &ResonanceQuery, rabi: f64) -> Result<ResonanceQuery, BerryError> {
    let coupling = drive_coupling(q);
    if coupling < 1e-9 {
        return Err(BerryError::NoPeakFound { max_transfer: 0.0 });
    }
    let mut out = *q;
    out.env.mw_amplitude = rabi / (q.cfg.gamma_e * coupling);
    Ok(out)
}

/// Coarse-then-fine π-pulse sweep around the secular prediction. The fine
/// grid spacing is a fifth of the π-pulse response linewidth.
pub fn locate_resonance(q: &ResonanceQuery, opts: &LocateOptions) -> Result<DynamicsResonance, BerryError> {
    let guess = resonance_frequency(q);

    let coarse_q = with_rabi(q, opts.coarse_rabi)?;
    let coarse_step = opts.coarse_rabi * 1.6 / 5.0;
    let coarse_points = (2.0 * opts.search_half_width / coarse_step).ceil() as usize + 3;
    let coarse = resonance_from_dynamics(
        &coarse_q,
        &DynamicsSweep {
            frequencies: centered_grid(guess, coarse_step, coarse_points | 1),
            pulse_duration: PI / opts.coarse_rabi,
            phase_per_step: opts.phase_per_step,
        },
    )?;

    let fine_q = with_rabi(q, opts.fine_rabi)?;
    let fine_step = opts.fine_rabi * 1.6 / 5.0;
    let fine_points = ((2.0 * coarse_step / fine_step).ceil() as usize + 9) | 1;
    resonance_from_dynamics(
        &fine_q,
        &DynamicsSweep {
            frequencies: centered_grid(coarse.peak, fine_step, fine_points),
            pulse_duration: PI / opts.fine_rabi,
            phase_per_step: opts.phase_per_step,
        },
    )
}
