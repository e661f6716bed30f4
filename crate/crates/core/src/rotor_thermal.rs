//! Rotor dynamics of a charged, dipolar nanodiamond in a rotating electric
//! field with rarefied-gas damping, and the laser-heating / gas-cooling /
//! black-body balance that sets its internal temperature.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{pa_to_torr, torr_to_pa, AIR_MOLECULAR_MASS_AMU, ATOMIC_MASS, BOLTZMANN, HBAR, SPEED_OF_LIGHT, ZETA_5};
use crate::fitting::{levenberg_marquardt, LmOptions};
use crate::roots::brent;
use crate::trap::ChargedParticle;

/// Upper end of the temperature search window, K.
pub const T_SEARCH_MAX: f64 = 5000.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RotorThermalError {
    #[error("gas damping is zero; rotation is unbounded in this model")]
    ZeroDamping,
    #[error("time step too large: {0}")]
    StepTooLarge(String),
    #[error("heating {a_a:e} W exceeds cooling capacity below {t_max} K")]
    NoBracket { a_a: f64, t_max: f64 },
    #[error("no cooling channel: both gas and black-body coefficients vanish")]
    NoCooling,
    #[error("intensity pairs are collinear; absorption coefficients not separable")]
    SingularDesign,
    #[error("need at least {0} observations")]
    TooFewObservations(usize),
    #[error("invalid parameter `{0}`")]
    Invalid(&'static str),
    #[error("absorption fit did not converge")]
    FitFailed,
}

/// Mean thermal speed `√(8 k_B T / (π m))`.
pub fn mean_thermal_speed(t: f64, molecular_mass: f64) -> f64 {
    (8.0 * BOLTZMANN * t / (PI * molecular_mass)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GasEnvironment {
    /// Pa
    pub pressure: f64,
    /// Ambient temperature, K.
    pub t0: f64,
    /// Mean molecular speed, m/s.
    pub mean_speed: f64,
    /// Specific-heat ratio.
    pub gamma_prime: f64,
    /// Thermal accommodation coefficient.
    pub kappa: f64,
    /// Momentum accommodation coefficient.
    pub eta_prime: f64,
}

impl GasEnvironment {
    /// Air at pressure `pressure` (Pa) and temperature `t0`.
    pub fn air(pressure: f64, t0: f64) -> Self {
        Self {
            pressure,
            t0,
            mean_speed: mean_thermal_speed(t0, AIR_MOLECULAR_MASS_AMU * ATOMIC_MASS),
            gamma_prime: 7.0 / 5.0,
            kappa: 1.0,
            eta_prime: 1.0,
        }
    }

    pub fn air_torr(torr: f64, t0: f64) -> Self {
        Self::air(torr_to_pa(torr), t0)
    }

    pub fn with_pressure(self, pressure: f64) -> Self {
        Self { pressure, ..self }
    }

    pub fn pressure_torr(&self) -> f64 {
        pa_to_torr(self.pressure)
    }

    pub fn validate(&self) -> Result<(), RotorThermalError> {
        if !(self.pressure >= 0.0 && self.pressure.is_finite()) {
            return Err(RotorThermalError::Invalid("pressure"));
        }
        if !(self.t0 > 0.0) {
            return Err(RotorThermalError::Invalid("T0"));
        }
        if !(self.mean_speed > 0.0) {
            return Err(RotorThermalError::Invalid("mean_speed"));
        }
        if !(self.gamma_prime > 1.0) {
            return Err(RotorThermalError::Invalid("gamma_prime"));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------- rotor

/// Rotational damping rate `γ_d = 40 η′ p R² / (3 m v)`, 1/s.
pub fn gas_damping_rate(particle: &ChargedParticle, gas: &GasEnvironment) -> f64 {
    40.0 * gas.eta_prime * gas.pressure * particle.radius.powi(2) / (3.0 * particle.mass * gas.mean_speed)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DipoleRotor {
    /// Electric dipole magnitude, C·m.
    pub dipole: f64,
    /// kg·m²
    pub inertia: f64,
}

impl DipoleRotor {
    /// Uniform sphere, `I = (8/15)πρR⁵`.
    pub fn sphere(dipole: f64, radius: f64, density: f64) -> Self {
        Self { dipole, inertia: 8.0 / 15.0 * PI * density * radius.powi(5) }
    }

    pub fn validate(&self) -> Result<(), RotorThermalError> {
        if !(self.dipole >= 0.0) {
            return Err(RotorThermalError::Invalid("dipole"));
        }
        if !(self.inertia > 0.0) {
            return Err(RotorThermalError::Invalid("inertia"));
        }
        Ok(())
    }
}

/// In-plane field of magnitude `e_xy` whose direction turns at
/// `omega_drive` (sign gives the sense).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotatingField {
    /// V/m
    pub e_xy: f64,
    /// rad/s
    pub omega_drive: f64,
}

/// `|p| E_xy sin β`, N·m.
pub fn electric_torque(rotor: &DipoleRotor, field: &RotatingField, beta: f64) -> f64 {
    rotor.dipole * field.e_xy * beta.sin()
}

/// `|p| E_xy / (I γ_d)`: the fastest rotation the field can sustain.
pub fn max_rotation(rotor: &DipoleRotor, field: &RotatingField, particle: &ChargedParticle, gas: &GasEnvironment) -> Result<f64, RotorThermalError> {
    let gamma_d = gas_damping_rate(particle, gas);
    if gamma_d == 0.0 {
        return Err(RotorThermalError::ZeroDamping);
    }
    Ok(rotor.dipole * field.e_xy / (rotor.inertia * gamma_d))
}

/// Field magnitude at which the lock threshold equals `omega_drive`.
pub fn threshold_field(rotor: &DipoleRotor, gamma_d: f64, omega_drive: f64) -> f64 {
    rotor.inertia * gamma_d * omega_drive.abs() / rotor.dipole
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotorState {
    /// Rotor angle, rad.
    pub angle: f64,
    /// rad/s
    pub omega: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotorTrajectory {
    pub t: Vec<f64>,
    pub angle: Vec<f64>,
    pub omega: Vec<f64>,
}

/// Integrate `I ω̇ = |p| E sin(ω_d t − α) − I γ_d ω` with RK4, recording
/// every `stride`-th step.
pub fn rotor_trajectory(
    rotor: &DipoleRotor,
    field: &RotatingField,
    gamma_d: f64,
    initial: RotorState,
    duration: f64,
    dt: f64,
    stride: usize,
) -> Result<RotorTrajectory, RotorThermalError> {
    rotor.validate()?;
    if dt * field.omega_drive.abs() >= 0.1 {
        return Err(RotorThermalError::StepTooLarge(format!("dt*omega_drive = {:.3} >= 0.1", dt * field.omega_drive.abs())));
    }
    let natural = (rotor.dipole * field.e_xy / rotor.inertia).sqrt();
    if dt * gamma_d >= 0.5 || dt * natural >= 0.5 {
        return Err(RotorThermalError::StepTooLarge(format!("dt*gamma_d = {:.3}, dt*sqrt(pE/I) = {:.3}", dt * gamma_d, dt * natural)));
    }
    let torque_per_i = rotor.dipole * field.e_xy / rotor.inertia;
    let wd = field.omega_drive;
    let deriv = |t: f64, a: f64, w: f64| (w, torque_per_i * (wd * t - a).sin() - gamma_d * w);

    let n = (duration / dt).round() as usize;
    let stride = stride.max(1);
    let mut out = RotorTrajectory { t: Vec::with_capacity(n / stride + 1), angle: Vec::new(), omega: Vec::new() };
    let (mut a, mut w) = (initial.angle, initial.omega);
    out.t.push(0.0);
    out.angle.push(a);
    out.omega.push(w);
    for k in 0..n {
        let t = k as f64 * dt;
        let (k1a, k1w) = deriv(t, a, w);
        let (k2a, k2w) = deriv(t + 0.5 * dt, a + 0.5 * dt * k1a, w + 0.5 * dt * k1w);
        let (k3a, k3w) = deriv(t + 0.5 * dt, a + 0.5 * dt * k2a, w + 0.5 * dt * k2w);
        let (k4a, k4w) = deriv(t + dt, a + dt * k3a, w + dt * k3w);
        a += dt / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
        w += dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        if (k + 1) % stride == 0 {
            out.t.push((k + 1) as f64 * dt);
            out.angle.push(a);
            out.omega.push(w);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LockReport {
    /// Mean angular velocity over the analysed tail, rad/s.
    pub mean_omega: f64,
    /// Circular mean of `β = ω_d t − α` over the tail, rad.
    pub mean_beta: f64,
    pub locked: bool,
}

/// Lock analysis on the last `tail` fraction of a trajectory: locked when
/// the mean angular velocity is within 0.1 % of the drive.
pub fn lock_report(traj: &RotorTrajectory, field: &RotatingField, tail: f64) -> LockReport {
    let n = traj.t.len();
    let start = ((1.0 - tail.clamp(0.0, 1.0)) * (n - 1) as f64) as usize;
    let (t0, t1) = (traj.t[start], traj.t[n - 1]);
    let mean_omega = (traj.angle[n - 1] - traj.angle[start]) / (t1 - t0);
    let (mut s, mut c) = (0.0, 0.0);
    for k in start..n {
        let beta = field.omega_drive * traj.t[k] - traj.angle[k];
        s += beta.sin();
        c += beta.cos();
    }
    LockReport {
        mean_omega,
        mean_beta: s.atan2(c),
        locked: (mean_omega - field.omega_drive).abs() < 1e-3 * field.omega_drive.abs(),
    }
}

// -------------------------------------------------------------- thermal

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpticalLine {
    /// e.g. "532nm"
    pub tag: String,
    /// W/m²
    pub intensity: f64,
    /// 1/m
    pub absorption: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpticalHeating {
    pub lines: Vec<OpticalLine>,
    /// Particle volume, m³.
    pub volume: f64,
}

impl OpticalHeating {
    /// Absorbed power `Σ η_λ I_λ V`, W.
    pub fn power(&self) -> f64 {
        self.lines.iter().map(|l| l.absorption * l.intensity).sum::<f64>() * self.volume
    }

    pub fn validate(&self) -> Result<(), RotorThermalError> {
        if self.lines.iter().any(|l| !(l.intensity >= 0.0) || !(l.absorption >= 0.0)) {
            return Err(RotorThermalError::Invalid("optical line"));
        }
        Ok(())
    }
}

/// Black-body emission from a small dielectric sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlackBodyModel {
    /// m³
    pub volume: f64,
    /// `Im((ε − 1)/(ε + 2))`
    pub im_clausius_mossotti: f64,
}

impl BlackBodyModel {
    /// `A_bb = 72 ζ(5) V k_B⁵ / (π² c³ ħ⁴) · Im((ε−1)/(ε+2))`, W/K⁵.
    pub fn coefficient(&self) -> f64 {
        72.0 * ZETA_5 * self.volume * BOLTZMANN.powi(5) / (PI * PI * SPEED_OF_LIGHT.powi(3) * HBAR.powi(4)) * self.im_clausius_mossotti
    }

    /// Choose `Im((ε−1)/(ε+2))` so that, with gas cooling negligible,
    /// absorbing `a_a` watts holds the particle at `t_plateau`.
    pub fn calibrate(volume: f64, a_a: f64, t_plateau: f64, t0: f64) -> Self {
        let unit = Self { volume, im_clausius_mossotti: 1.0 }.coefficient();
        Self { volume, im_clausius_mossotti: a_a / (unit * (t_plateau.powi(5) - t0.powi(5))) }
    }
}

/// Gas-cooling coefficient `κπR²v/(2T0) · (γ′+1)/(γ′−1)`, W/(Pa·K).
pub fn a_gas_coefficient(radius: f64, gas: &GasEnvironment) -> f64 {
    gas.kappa * PI * radius * radius * gas.mean_speed / (2.0 * gas.t0) * (gas.gamma_prime + 1.0) / (gas.gamma_prime - 1.0)
}

/// Cooling side of the balance with its coefficients fixed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalModel {
    /// W/(Pa·K)
    pub a_gas: f64,
    /// W/K⁵
    pub a_bb: f64,
    /// K
    pub t0: f64,
}

impl ThermalModel {
    pub fn new(particle: &ChargedParticle, gas: &GasEnvironment, bb: &BlackBodyModel) -> Self {
        Self { a_gas: a_gas_coefficient(particle.radius, gas), a_bb: bb.coefficient(), t0: gas.t0 }
    }

    /// Replace the computed gas coefficient (e.g. by a published value).
    pub fn with_a_gas(self, a_gas: f64) -> Self {
        Self { a_gas, ..self }
    }

    pub fn gas_cooling(&self, t: f64, pressure: f64) -> f64 {
        self.a_gas * pressure * (t - self.t0)
    }

    pub fn radiative_cooling(&self, t: f64) -> f64 {
        self.a_bb * (t.powi(5) - self.t0.powi(5))
    }

    pub fn cooling(&self, t: f64, pressure: f64) -> f64 {
        self.gas_cooling(t, pressure) + self.radiative_cooling(t)
    }

    /// Steady temperature for absorbed power `a_a` at `pressure` (Pa).
    pub fn solve(&self, a_a: f64, pressure: f64) -> Result<f64, RotorThermalError> {
        if a_a == 0.0 {
            return Ok(self.t0);
        }
        if self.a_gas * pressure <= 0.0 && self.a_bb <= 0.0 {
            return Err(RotorThermalError::NoCooling);
        }
        let g = |t: f64| self.cooling(t, pressure) - a_a;
        if g(T_SEARCH_MAX) < 0.0 {
            return Err(RotorThermalError::NoBracket { a_a, t_max: T_SEARCH_MAX });
        }
        brent(g, self.t0, T_SEARCH_MAX, 1e-11).map_err(|_| RotorThermalError::NoBracket { a_a, t_max: T_SEARCH_MAX })
    }

    /// Pressure (Pa) below which gas cooling is under 1 % of radiative
    /// cooling at temperature `t`.
    pub fn radiative_dominance_pressure(&self, t: f64) -> f64 {
        0.01 * self.radiative_cooling(t) / (self.a_gas * (t - self.t0))
    }
}

pub fn thermal_balance_solve(
    heating: &OpticalHeating,
    gas: &GasEnvironment,
    particle: &ChargedParticle,
    bb: &BlackBodyModel,
) -> Result<f64, RotorThermalError> {
    heating.validate()?;
    gas.validate()?;
    ThermalModel::new(particle, gas, bb).solve(heating.power(), gas.pressure)
}

/// One temperature measurement under known illumination.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionObservation {
    /// W/m²
    pub i_532: f64,
    /// W/m²
    pub i_1064: f64,
    /// Pa
    pub pressure: f64,
    /// K
    pub t_measured: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionFit {
    /// 1/m
    pub eta_532: f64,
    /// 1/m; `None` when the data carry no 1064 nm illumination.
    pub eta_1064: Option<f64>,
    pub eta_532_std: Option<f64>,
    pub eta_1064_std: Option<f64>,
    /// RMS temperature residual, K.
    pub residual_rms: f64,
}

/// Least-squares absorption coefficients minimising `Σ (T_model − T_meas)²`.
/// Starts from the linear solution of `η·I·V = cooling(T_meas)` and refines
/// with Levenberg–Marquardt on temperatures.
pub fn absorption_fit(obs: &[AbsorptionObservation], model: &ThermalModel, volume: f64) -> Result<AbsorptionFit, RotorThermalError> {
    let use_1064 = obs.iter().any(|o| o.i_1064 > 0.0);
    let n_par = if use_1064 { 2 } else { 1 };
    if obs.len() < n_par.max(2) {
        return Err(RotorThermalError::TooFewObservations(n_par.max(2)));
    }
    let design = DMatrix::from_fn(obs.len(), n_par, |i, j| volume * if j == 0 { obs[i].i_532 } else { obs[i].i_1064 });
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smax > 0.0) || smin <= 1e-10 * smax {
        return Err(RotorThermalError::SingularDesign);
    }
    let absorbed = DVector::from_iterator(obs.len(), obs.iter().map(|o| model.cooling(o.t_measured, o.pressure)));
    let linear = svd.solve(&absorbed, 0.0).map_err(|_| RotorThermalError::SingularDesign)?;

    let residuals = |p: &DVector<f64>| {
        DVector::from_iterator(
            obs.len(),
            obs.iter().map(|o| {
                let a_a = volume * (p[0] * o.i_532 + if use_1064 { p[1] * o.i_1064 } else { 0.0 });
                model.solve(a_a.max(0.0), o.pressure).unwrap_or(T_SEARCH_MAX) - o.t_measured
            }),
        )
    };
    let scale: Vec<f64> = linear.iter().map(|x| x.abs().max(1.0)).collect();
    let fit = levenberg_marquardt(residuals, linear, &scale, &LmOptions::default()).map_err(|_| RotorThermalError::FitFailed)?;
    let std = fit.std_errors();
    Ok(AbsorptionFit {
        eta_532: fit.params[0],
        eta_1064: use_1064.then(|| fit.params[1]),
        eta_532_std: std.as_ref().map(|s| s[0]),
        eta_1064_std: if use_1064 { std.as_ref().map(|s| s[1]) } else { None },
        residual_rms: (fit.cost / obs.len() as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{PER_M_PER_PER_CM, W_M2_PER_W_MM2};

    fn diamond(radius: f64) -> ChargedParticle {
        ChargedParticle::sphere(0.0, radius, 3500.0).unwrap()
    }

    #[test]
    fn damping_linear_in_pressure() {
        let p = diamond(264e-9);
        let g1 = gas_damping_rate(&p, &GasEnvironment::air_torr(1e-4, 298.0));
        let g2 = gas_damping_rate(&p, &GasEnvironment::air_torr(2e-4, 298.0));
        assert!(g1 > 0.0);
        assert!((g2 / g1 - 2.0).abs() < 1e-14);
        assert_eq!(gas_damping_rate(&p, &GasEnvironment::air(0.0, 298.0)), 0.0);
    }

    #[test]
    fn torque_values() {
        let r = DipoleRotor { dipole: 2.0, inertia: 1.0 };
        let f = RotatingField { e_xy: 3.0, omega_drive: 1.0 };
        assert_eq!(electric_torque(&r, &f, 0.0), 0.0);
        assert!((electric_torque(&r, &f, PI / 2.0) - 6.0).abs() < 1e-15);
        assert!((electric_torque(&r, &f, PI / 6.0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn max_rotation_times_pressure_constant() {
        let p = diamond(264e-9);
        let rotor = DipoleRotor::sphere(3.13e-25, 264e-9, 3500.0);
        let field = RotatingField { e_xy: 1000.0, omega_drive: 0.0 };
        let reference = max_rotation(&rotor, &field, &p, &GasEnvironment::air_torr(1e-3, 298.0)).unwrap() * 1e-3;
        for torr in [1e-4, 1e-5, 1e-6] {
            let w = max_rotation(&rotor, &field, &p, &GasEnvironment::air_torr(torr, 298.0)).unwrap();
            assert!((w * torr / reference - 1.0).abs() < 1e-10);
        }
        assert_eq!(max_rotation(&rotor, &field, &p, &GasEnvironment::air(0.0, 298.0)), Err(RotorThermalError::ZeroDamping));
        let half = DipoleRotor { dipole: rotor.dipole / 2.0, ..rotor };
        let a = max_rotation(&rotor, &field, &p, &GasEnvironment::air_torr(1e-4, 298.0)).unwrap();
        let b = max_rotation(&half, &field, &p, &GasEnvironment::air_torr(1e-4, 298.0)).unwrap();
        assert!((b / a - 0.5).abs() < 1e-14);
    }

    /// Overdamped scaled rotor (γ_d ≈ 1e4 /s, drive 2π·100 Hz).
    fn overdamped() -> (DipoleRotor, f64, f64) {
        let p = diamond(264e-9);
        let gamma_d = gas_damping_rate(&p, &GasEnvironment::air_torr(10.0, 298.0));
        (DipoleRotor::sphere(3.13e-25, 264e-9, 3500.0), gamma_d, 2.0 * PI * 100.0)
    }

    #[test]
    fn locks_above_threshold() {
        let (rotor, gamma_d, wd) = overdamped();
        let e = 2.0 * threshold_field(&rotor, gamma_d, wd);
        let field = RotatingField { e_xy: e, omega_drive: wd };
        let traj = rotor_trajectory(&rotor, &field, gamma_d, RotorState { angle: 0.0, omega: 0.0 }, 0.5, 1e-5, 10).unwrap();
        let rep = lock_report(&traj, &field, 0.3);
        assert!(rep.locked, "{rep:?}");
        assert!((rep.mean_beta - (0.5f64).asin()).abs() < 0.01 * (0.5f64).asin());
    }

    #[test]
    fn slips_below_threshold() {
        let (rotor, gamma_d, wd) = overdamped();
        let field = RotatingField { e_xy: 0.5 * threshold_field(&rotor, gamma_d, wd), omega_drive: wd };
        let traj = rotor_trajectory(&rotor, &field, gamma_d, RotorState { angle: 0.0, omega: 0.0 }, 0.5, 1e-5, 10).unwrap();
        let rep = lock_report(&traj, &field, 0.5);
        assert!(!rep.locked && rep.mean_omega < wd);
    }

    #[test]
    fn free_spin_down() {
        let rotor = DipoleRotor { dipole: 1e-25, inertia: 1e-29 };
        let field = RotatingField { e_xy: 0.0, omega_drive: 1.0 };
        let traj = rotor_trajectory(&rotor, &field, 50.0, RotorState { angle: 0.0, omega: 1e3 }, 0.04, 1e-5, 100).unwrap();
        for (t, w) in traj.t.iter().zip(&traj.omega) {
            assert!((w / (1e3 * (-50.0 * t).exp()) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn step_checks() {
        let rotor = DipoleRotor { dipole: 1e-25, inertia: 1e-29 };
        let field = RotatingField { e_xy: 0.0, omega_drive: 1e4 };
        assert!(matches!(rotor_trajectory(&rotor, &field, 1.0, RotorState { angle: 0.0, omega: 0.0 }, 1.0, 1e-4, 1), Err(RotorThermalError::StepTooLarge(_))));
    }

    fn paper_heating(radius: f64) -> OpticalHeating {
        OpticalHeating {
            lines: vec![
                OpticalLine { tag: "532nm".into(), intensity: 0.030 * W_M2_PER_W_MM2, absorption: 111.0 * PER_M_PER_PER_CM },
                OpticalLine { tag: "1064nm".into(), intensity: 0.520 * W_M2_PER_W_MM2, absorption: 5.87 * PER_M_PER_PER_CM },
            ],
            volume: 4.0 / 3.0 * PI * radius.powi(3),
        }
    }

    #[test]
    fn absorbed_power() {
        let h = paper_heating(332e-9);
        assert!((h.power() / 9.78e-11 - 1.0).abs() < 2e-3, "{}", h.power());
    }

    #[test]
    fn computed_gas_coefficient_near_published() {
        let c = a_gas_coefficient(332e-9, &GasEnvironment::air(0.0, 298.0));
        assert!((c / 1.74e-12 - 1.0).abs() < 0.1, "{c}");
    }

    #[test]
    fn zero_heating_gives_ambient() {
        let m = ThermalModel { a_gas: 1e-12, a_bb: 1e-23, t0: 298.0 };
        assert_eq!(m.solve(0.0, 10.0).unwrap(), 298.0);
    }

    #[test]
    fn gas_only_closed_form() {
        let m = ThermalModel { a_gas: 1.74e-12, a_bb: 0.0, t0: 298.0 };
        let t = m.solve(1e-10, 0.5).unwrap();
        assert!((t - (298.0 + 1e-10 / (1.74e-12 * 0.5))).abs() < 1e-8);
    }

    #[test]
    fn plateau_near_350k() {
        let h = paper_heating(332e-9);
        let bb = BlackBodyModel::calibrate(h.volume, h.power(), 350.0, 298.0);
        let p = diamond(332e-9);
        let gas = GasEnvironment::air_torr(6.9e-6, 298.0);
        let m = ThermalModel::new(&p, &gas, &bb).with_a_gas(1.74e-12);
        let t = m.solve(h.power(), gas.pressure).unwrap();
        assert!((t - 350.0).abs() < 15.0, "{t}");
        assert!((m.cooling(t, gas.pressure) - h.power()).abs() < 1e-9 * h.power());
    }

    #[test]
    fn no_bracket_when_overheated() {
        let m = ThermalModel { a_gas: 0.0, a_bb: 1e-30, t0: 298.0 };
        assert!(matches!(m.solve(1.0, 0.0), Err(RotorThermalError::NoBracket { .. })));
        let none = ThermalModel { a_gas: 0.0, a_bb: 0.0, t0: 298.0 };
        assert_eq!(none.solve(1.0, 1.0), Err(RotorThermalError::NoCooling));
    }

    fn synthetic(eta: (f64, f64), pairs: &[(f64, f64)], noise: &[f64]) -> (Vec<AbsorptionObservation>, ThermalModel, f64) {
        let volume = 4.0 / 3.0 * PI * (332e-9f64).powi(3);
        let m = ThermalModel { a_gas: 1.74e-12, a_bb: 3.37e-23, t0: 298.0 };
        let obs = pairs
            .iter()
            .zip(noise.iter().cycle())
            .map(|(&(i1, i2), &dn)| {
                let pressure = torr_to_pa(1e-5);
                let t = m.solve(volume * (eta.0 * i1 + eta.1 * i2), pressure).unwrap();
                AbsorptionObservation { i_532: i1, i_1064: i2, pressure, t_measured: t + dn }
            })
            .collect();
        (obs, m, volume)
    }

    #[test]
    fn absorption_roundtrip() {
        let eta = (11100.0, 587.0);
        let pairs: Vec<(f64, f64)> = (0..6).map(|k| (1e4 * (1.0 + k as f64), 5.2e5 * (1.0 + (k % 3) as f64))).collect();
        let (obs, m, v) = synthetic(eta, &pairs, &[0.0]);
        let fit = absorption_fit(&obs, &m, v).unwrap();
        assert!((fit.eta_532 / eta.0 - 1.0).abs() < 1e-2);
        assert!((fit.eta_1064.unwrap() / eta.1 - 1.0).abs() < 1e-2);
    }

    #[test]
    fn single_wavelength_unidentifiable() {
        let pairs: Vec<(f64, f64)> = (1..=4).map(|k| (1e4 * k as f64, 0.0)).collect();
        let (obs, m, v) = synthetic((11100.0, 587.0), &pairs, &[0.0]);
        let fit = absorption_fit(&obs, &m, v).unwrap();
        assert!((fit.eta_532 / 11100.0 - 1.0).abs() < 1e-2);
        assert!(fit.eta_1064.is_none());
    }

    #[test]
    fn collinear_design_rejected() {
        let pairs: Vec<(f64, f64)> = (1..=4).map(|k| (1e4 * k as f64, 2e4 * k as f64)).collect();
        let (obs, m, v) = synthetic((11100.0, 587.0), &pairs, &[0.0]);
        assert_eq!(absorption_fit(&obs, &m, v), Err(RotorThermalError::SingularDesign));
    }
}
