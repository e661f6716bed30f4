//! Physical constants (CODATA 2018, SI) and unit factors used at I/O
//! boundaries.

use std::f64::consts::PI;

pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const ATOMIC_MASS: f64 = 1.660_539_066_60e-27;
/// Riemann ζ(5).
pub const ZETA_5: f64 = 1.036_927_755_143_37;

/// Mean molecular mass of dry air in atomic mass units.
pub const AIR_MOLECULAR_MASS_AMU: f64 = 28.97;

/// Electron gyromagnetic ratio, rad/s per tesla (2π × 28.024 GHz/T).
pub const GAMMA_ELECTRON: f64 = 2.0 * PI * 28.024e9;
/// ¹⁴N nuclear gyromagnetic ratio, rad/s per tesla (2π × 3.077 MHz/T).
pub const GAMMA_N14: f64 = 2.0 * PI * 3.077e6;

/// Default NV zero-field splitting, rad/s.
pub const D_NV: f64 = 2.0 * PI * 2.870e9;

pub const PA_PER_TORR: f64 = 133.322;
pub const PA_PER_BAR: f64 = 1.0e5;
pub const TESLA_PER_GAUSS: f64 = 1.0e-4;
/// W/mm² → W/m².
pub const W_M2_PER_W_MM2: f64 = 1.0e6;
/// cm⁻¹ → m⁻¹.
pub const PER_M_PER_PER_CM: f64 = 100.0;

pub fn torr_to_pa(p: f64) -> f64 {
    p * PA_PER_TORR
}

pub fn pa_to_torr(p: f64) -> f64 {
    p / PA_PER_TORR
}

pub fn hz_to_rad(f: f64) -> f64 {
    2.0 * PI * f
}

pub fn rad_to_hz(w: f64) -> f64 {
    w / (2.0 * PI)
}
