//! Ring surface trap: trapping height, secular frequency, Mathieu
//! stability and the axial pseudopotential.
//!
//! The chip is modelled as a grounded plane with a driven ring
//! `a ≤ r ≤ b`; only motion along the symmetry axis `z` is treated.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::ELEMENTARY_CHARGE;

/// Upper edge of the first Mathieu stability region (`a = 0`).
pub const MATHIEU_Q_MAX: f64 = 0.908;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrapError {
    #[error("ring radii must satisfy 0 < a < b, got a = {a}, b = {b}")]
    BadGeometry { a: f64, b: f64 },
    #[error("drive amplitude and frequency must be positive, got V = {v}, f = {f}")]
    BadDrive { v: f64, f: f64 },
    #[error("particle mass {m} kg does not match radius and density ({expected} kg)")]
    MassMismatch { m: f64, expected: f64 },
    #[error("particle parameter `{0}` must be positive and finite")]
    BadParticle(&'static str),
    #[error("profile grid must be positive, increasing and contain z0")]
    BadGrid,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingTrapGeometry {
    /// Inner radius, m.
    pub a: f64,
    /// Outer radius, m.
    pub b: f64,
}

impl RingTrapGeometry {
    pub fn new(a: f64, b: f64) -> Result<Self, TrapError> {
        if !(a > 0.0 && b > a && b.is_finite()) {
            return Err(TrapError::BadGeometry { a, b });
        }
        Ok(Self { a, b })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapDrive {
    /// Amplitude, V.
    pub v_d: f64,
    /// Drive frequency, Hz (not rad/s).
    pub f_d: f64,
}

impl TrapDrive {
    pub fn new(v_d: f64, f_d: f64) -> Result<Self, TrapError> {
        if !(v_d > 0.0 && f_d > 0.0 && v_d.is_finite() && f_d.is_finite()) {
            return Err(TrapError::BadDrive { v: v_d, f: f_d });
        }
        Ok(Self { v_d, f_d })
    }

    /// Drive given as an angular frequency in rad/s.
    pub fn from_angular(v_d: f64, omega_d: f64) -> Result<Self, TrapError> {
        Self::new(v_d, omega_d / (2.0 * PI))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChargedParticle {
    /// Signed charge, C.
    pub charge: f64,
    /// kg
    pub mass: f64,
    /// m
    pub radius: f64,
    /// kg/m³
    pub density: f64,
}

impl ChargedParticle {
    /// Sphere with mass `(4/3)πR³ρ` carrying `n_charges` elementary charges.
    pub fn sphere(n_charges: f64, radius: f64, density: f64) -> Result<Self, TrapError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(TrapError::BadParticle("radius"));
        }
        if !(density > 0.0 && density.is_finite()) {
            return Err(TrapError::BadParticle("density"));
        }
        let mass = sphere_mass(radius, density);
        Ok(Self { charge: n_charges * ELEMENTARY_CHARGE, mass, radius, density })
    }

    /// Checks that the stored mass agrees with radius and density.
    pub fn validate(&self) -> Result<(), TrapError> {
        let expected = sphere_mass(self.radius, self.density);
        if !((self.mass - expected).abs() <= 1e-9 * expected) {
            return Err(TrapError::MassMismatch { m: self.mass, expected });
        }
        Ok(())
    }
}

pub fn sphere_mass(radius: f64, density: f64) -> f64 {
    4.0 / 3.0 * PI * radius.powi(3) * density
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapCharacterization {
    /// m
    pub z0: f64,
    /// rad/s
    pub omega_z: f64,
    pub q_z: f64,
    /// eV
    pub depth: f64,
    pub stable: bool,
}

/// Field-gradient factor `f(a, b)` of the ring trap, 1/m².
pub fn geometric_factor(g: &RingTrapGeometry) -> f64 {
    let a23 = g.a.powf(2.0 / 3.0);
    let b23 = g.b.powf(2.0 / 3.0);
    let a43 = a23 * a23;
    let b43 = b23 * b23;
    let num = 9.0 * (b23 - a23).powi(2) * (b23 + a23).powi(6);
    let den = a43 * b43 * (a43 + a23 * b23 + b43).powi(5);
    (num / den).sqrt()
}

/// Height of the field zero above the chip, m.
pub fn trap_height(g: &RingTrapGeometry) -> f64 {
    let a23 = g.a.powf(2.0 / 3.0);
    let b23 = g.b.powf(2.0 / 3.0);
    (a23 * a23 * b23 * b23 / (a23 + b23)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Secular {
    /// rad/s
    pub omega_z: f64,
    pub q_z: f64,
}

/// `ω_z = Q V f(a,b) / (2√2 π m f_d)` and `q_z = 2√2 ω_z / (2π f_d)`.
pub fn secular_frequency(g: &RingTrapGeometry, drive: &TrapDrive, p: &ChargedParticle) -> Secular {
    let omega_z = (p.charge * drive.v_d * geometric_factor(g) / (2.0 * SQRT_2 * PI * p.mass * drive.f_d)).abs();
    let q_z = 2.0 * SQRT_2 * omega_z / (2.0 * PI * drive.f_d);
    Secular { omega_z, q_z }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stability {
    pub stable: bool,
    /// `0.908 − q`; negative when unstable.
    pub margin: f64,
}

pub fn stability_check(q_z: f64) -> Stability {
    Stability { stable: q_z < MATHIEU_Q_MAX, margin: MATHIEU_Q_MAX - q_z }
}

/// On-axis potential of the driven ring per volt of drive.
pub fn axial_potential_per_volt(g: &RingTrapGeometry, z: f64) -> f64 {
    1.0 / (1.0 + (g.a / z).powi(2)).sqrt() - 1.0 / (1.0 + (g.b / z).powi(2)).sqrt()
}

/// `d/dz` of [`axial_potential_per_volt`], 1/m.
pub fn axial_field_per_volt(g: &RingTrapGeometry, z: f64) -> f64 {
    let term = |r: f64| r * r / z.powi(3) * (1.0 + (r / z).powi(2)).powf(-1.5);
    term(g.a) - term(g.b)
}

fn prefactor(drive: &TrapDrive, p: &ChargedParticle) -> f64 {
    (p.charge * drive.v_d).powi(2) / (16.0 * PI * PI * p.mass * drive.f_d.powi(2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    /// Gradient-squared pseudopotential of the ring electrode.
    Full,
    /// Quadratic expansion `½ m ω_z² (z − z0)²`.
    Harmonic,
}

/// Pseudopotential in eV at one height.
pub fn pseudopotential(g: &RingTrapGeometry, drive: &TrapDrive, p: &ChargedParticle, kind: ProfileKind, z: f64) -> f64 {
    let joules = match kind {
        ProfileKind::Full => prefactor(drive, p) * axial_field_per_volt(g, z).powi(2),
        ProfileKind::Harmonic => prefactor(drive, p) * geometric_factor(g).powi(2) * (z - trap_height(g)).powi(2),
    };
    joules / ELEMENTARY_CHARGE
}

pub fn pseudopotential_profile(
    g: &RingTrapGeometry,
    drive: &TrapDrive,
    p: &ChargedParticle,
    kind: ProfileKind,
    z_grid: &[f64],
) -> Result<Vec<f64>, TrapError> {
    let z0 = trap_height(g);
    let ok = z_grid.first().is_some_and(|&z| z > 0.0 && z <= z0)
        && z_grid.last().is_some_and(|&z| z >= z0)
        && z_grid.windows(2).all(|w| w[1] > w[0]);
    if !ok {
        return Err(TrapError::BadGrid);
    }
    Ok(z_grid.iter().map(|&z| pseudopotential(g, drive, p, kind, z)).collect())
}

/// Escape barrier in eV: the maximum of the full pseudopotential above the
/// trap, where the field magnitude peaks before decaying to zero far from
/// the chip.
pub fn depth(g: &RingTrapGeometry, drive: &TrapDrive, p: &ChargedParticle) -> f64 {
    let z0 = trap_height(g);
    let v = |z: f64| pseudopotential(g, drive, p, ProfileKind::Full, z);
    // coarse log-spaced scan, then golden-section refinement
    let n = 4000;
    let (lo, hi) = (z0.ln(), (50.0 * g.b).ln());
    let zs: Vec<f64> = (1..=n).map(|k| (lo + (hi - lo) * k as f64 / n as f64).exp()).collect();
    let k = (0..n).max_by(|&i, &j| v(zs[i]).total_cmp(&v(zs[j]))).expect("nonempty");
    let (mut a, mut b) = (zs[k.saturating_sub(1)], zs[(k + 1).min(n - 1)]);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if v(c) > v(d) {
            b = d;
        } else {
            a = c;
        }
    }
    v(0.5 * (a + b))
}

pub fn characterize(g: &RingTrapGeometry, drive: &TrapDrive, p: &ChargedParticle) -> TrapCharacterization {
    let s = secular_frequency(g, drive, p);
    TrapCharacterization {
        z0: trap_height(g),
        omega_z: s.omega_z,
        q_z: s.q_z,
        depth: depth(g, drive, p),
        stable: stability_check(s.q_z).stable,
    }
}

/// Ring radii, drive and particle used for the published trap.
pub fn reference_setup() -> (RingTrapGeometry, TrapDrive, ChargedParticle) {
    (
        RingTrapGeometry { a: 270e-6, b: 450e-6 },
        TrapDrive { v_d: 300.0, f_d: 1.6e4 },
        ChargedParticle::sphere(2000.0, 264e-9, 3500.0).expect("valid"),
    )
}
