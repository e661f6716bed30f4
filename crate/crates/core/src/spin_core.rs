//! Complex 3×3 linear algebra for the spin-1 manifold.
//!
//! Basis ordering is fixed as `(m_s = +1, 0, −1)` everywhere in the crate.
//! Hamiltonians are angular frequencies (rad/s) with ħ = 1.

use std::f64::consts::SQRT_2;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

const I: C64 = C64::new(0.0, 1.0);

/// Relative elementwise tolerance for the Hermiticity check inside
/// [`propagate`].
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Largest accepted `‖H‖·Δt` for one Runge–Kutta step.
pub const MAX_PHASE_PER_STEP: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinError {
    #[error("step too large at t = {t:e} s: |H|*dt = {phase:.3} rad exceeds {MAX_PHASE_PER_STEP}")]
    StepTooLarge { t: f64, phase: f64 },
    #[error("hamiltonian is not hermitian at t = {t:e} s (relative deviation {deviation:e})")]
    NonHermitian { t: f64, deviation: f64 },
    #[error("time grid must be strictly increasing (index {index})")]
    NonIncreasingGrid { index: usize },
}

/// A 3×3 complex operator on the spin-1 manifold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinMatrix(pub Matrix3<C64>);

/// A 3-component spin-1 state, amplitudes ordered `(+1, 0, −1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinState(pub Vector3<C64>);

impl SpinMatrix {
    pub fn zeros() -> Self {
        Self(Matrix3::zeros())
    }

    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    pub fn from_rows(rows: [[C64; 3]; 3]) -> Self {
        Self(Matrix3::from_fn(|i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: [[f64; 3]; 3]) -> Self {
        Self(Matrix3::from_fn(|i, j| C64::new(rows[i][j], 0.0)))
    }

    pub fn diagonal(d: [f64; 3]) -> Self {
        Self::from_real_rows([[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]])
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn dagger(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, k: f64) -> Self {
        Self(self.0 * C64::new(k, 0.0))
    }

    pub fn scale_complex(&self, k: C64) -> Self {
        Self(self.0 * k)
    }

    /// `A·B − B·A`.
    pub fn commutator(&self, other: &Self) -> Self {
        Self(self.0 * other.0 - other.0 * self.0)
    }

    /// Conjugation `U·self·U†`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        Self(u.0 * self.0 * u.0.adjoint())
    }

    pub fn apply(&self, psi: &SpinState) -> SpinState {
        SpinState(self.0 * psi.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest elementwise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.0 - other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Induced ∞-norm (max absolute row sum); an upper bound on the
    /// spectral norm.
    pub fn norm_inf(&self) -> f64 {
        (0..3)
            .map(|i| (0..3).map(|j| self.0[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    /// `M = M†` elementwise within `tol` (absolute).
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// `U†U = I` elementwise within `tol`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        (self.0.adjoint() * self.0 - Matrix3::identity())
            .iter()
            .all(|z| z.norm() <= tol)
    }

    /// Eigen-decomposition of a Hermitian matrix. Eigenvalues come back in
    /// ascending order with their normalized eigenvectors.
    pub fn eigh(&self) -> ([f64; 3], [SpinState; 3]) {
        let herm = Self((self.0 + self.0.adjoint()) * C64::new(0.5, 0.0));
        let eig = herm.0.symmetric_eigen();
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.map(|k| eig.eigenvalues[k]);
        let vectors = order.map(|k| SpinState(eig.eigenvectors.column(k).into_owned()).normalized());
        (values, vectors)
    }

    pub fn eigenvalues(&self) -> [f64; 3] {
        self.eigh().0
    }

    /// `exp(−i·H·t)` for Hermitian `H`, via eigendecomposition.
    pub fn expm_hermitian(&self, t: f64) -> Self {
        let (values, vectors) = self.eigh();
        let mut out = Matrix3::zeros();
        for (lambda, v) in values.iter().zip(vectors.iter()) {
            let phase = (-I * lambda * t).exp();
            out += v.0 * v.0.adjoint() * phase;
        }
        Self(out)
    }
}

impl Add for SpinMatrix {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl AddAssign for SpinMatrix {
    fn add_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
    }
}

impl Sub for SpinMatrix {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }
}

impl Neg for SpinMatrix {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

impl Mul for SpinMatrix {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0)
    }
}

impl Mul<f64> for SpinMatrix {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

impl SpinState {
    pub fn new(plus: C64, zero: C64, minus: C64) -> Self {
        Self(Vector3::new(plus, zero, minus))
    }

    /// Canonical basis state `|m_s⟩`, `ms ∈ {+1, 0, −1}`.
    pub fn basis(ms: i8) -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        match ms {
            1 => Self::new(one, zero, zero),
            0 => Self::new(zero, one, zero),
            -1 => Self::new(zero, zero, one),
            _ => panic!("spin-1 projection must be -1, 0 or +1, got {ms}"),
        }
    }

    #[inline]
    pub fn amplitude(&self, index: usize) -> C64 {
        self.0[index]
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn normalized(&self) -> Self {
        Self(self.0 / C64::new(self.norm(), 0.0))
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.0.dotc(&other.0)
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap_probability(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn scale(&self, k: C64) -> Self {
        Self(self.0 * k)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.0 - other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Add for SpinState {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

/// Spin-1 operators in the `(+1, 0, −1)` basis.
#[derive(Clone, Copy, Debug)]
pub struct SpinOperators {
    pub sx: SpinMatrix,
    pub sy: SpinMatrix,
    pub sz: SpinMatrix,
    pub s_plus: SpinMatrix,
    pub s_minus: SpinMatrix,
}

pub fn spin1_operators() -> SpinOperators {
    let r = 1.0 / SQRT_2;
    let z = C64::new(0.0, 0.0);
    let re = |x: f64| C64::new(x, 0.0);
    let im = |x: f64| C64::new(0.0, x);
    let sx = SpinMatrix::from_real_rows([[0.0, r, 0.0], [r, 0.0, r], [0.0, r, 0.0]]);
    let sy = SpinMatrix::from_rows([[z, im(-r), z], [im(r), z, im(-r)], [z, im(r), z]]);
    let sz = SpinMatrix::diagonal([1.0, 0.0, -1.0]);
    let s_plus = SpinMatrix::from_rows([[z, re(SQRT_2), z], [z, z, re(SQRT_2)], [z, z, z]]);
    SpinOperators { sx, sy, sz, s_plus, s_minus: s_plus.dagger() }
}

/// Rotation axis for [`rotation_operator`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Y,
    Z,
}

/// `R_j(α) = exp(−iα S_j)` in closed form (Wigner d-matrix for j = 1).
pub fn rotation_operator(axis: Axis, angle: f64) -> SpinMatrix {
    match axis {
        Axis::Z => {
            let e = C64::from_polar(1.0, -angle);
            let z = C64::new(0.0, 0.0);
            SpinMatrix::from_rows([
                [e, z, z],
                [z, C64::new(1.0, 0.0), z],
                [z, z, e.conj()],
            ])
        }
        Axis::Y => {
            let (s, c) = angle.sin_cos();
            let r = s / SQRT_2;
            SpinMatrix::from_real_rows([
                [(1.0 + c) / 2.0, -r, (1.0 - c) / 2.0],
                [r, c, -r],
                [(1.0 - c) / 2.0, r, (1.0 + c) / 2.0],
            ])
        }
    }
}

/// Integrate `i dψ/dt = H(t) ψ` with one classical RK4 step per interval of
/// `t_grid`. The first returned state is `psi0` at `t_grid[0]`.
///
/// No renormalization is applied; norm drift is left visible as an error
/// measure.
pub fn propagate<H>(hamiltonian: H, psi0: SpinState, t_grid: &[f64]) -> Result<Vec<SpinState>, SpinError>
where
    H: Fn(f64) -> SpinMatrix,
{
    let mut out = Vec::with_capacity(t_grid.len());
    if t_grid.is_empty() {
        return Ok(out);
    }
    let mut psi = psi0;
    out.push(psi);
    for (k, w) in t_grid.windows(2).enumerate() {
        let (t, dt) = (w[0], w[1] - w[0]);
        if !(dt > 0.0) {
            return Err(SpinError::NonIncreasingGrid { index: k + 1 });
        }
        psi = rk4_step(&hamiltonian, &psi, t, dt)?;
        out.push(psi);
    }
    Ok(out)
}

/// Uniform-step propagation that only hands selected states to `observe`.
///
/// `observe(step, t, ψ)` is called for step 0 and every `every` steps after,
/// plus the final step. Returns the final state.
pub fn propagate_uniform<H, O>(
    hamiltonian: H,
    psi0: SpinState,
    t0: f64,
    dt: f64,
    n_steps: usize,
    every: usize,
    mut observe: O,
) -> Result<SpinState, SpinError>
where
    H: Fn(f64) -> SpinMatrix,
    O: FnMut(usize, f64, &SpinState),
{
    if !(dt > 0.0) {
        return Err(SpinError::NonIncreasingGrid { index: 1 });
    }
    let every = every.max(1);
    let mut psi = psi0;
    observe(0, t0, &psi);
    // the end-of-step Hamiltonian is the next step's start
    let mut h_start = checked(&hamiltonian, t0, dt)?;
    for k in 0..n_steps {
        let t = t0 + k as f64 * dt;
        let hm = hamiltonian(t + 0.5 * dt);
        let h_end = checked(&hamiltonian, t0 + (k + 1) as f64 * dt, dt)?;
        psi = rk4_combine(&h_start, &hm, &h_end, &psi, dt);
        h_start = h_end;
        let step = k + 1;
        if step % every == 0 || step == n_steps {
            observe(step, t0 + step as f64 * dt, &psi);
        }
    }
    Ok(psi)
}

fn checked<H: Fn(f64) -> SpinMatrix>(hamiltonian: &H, t: f64, dt: f64) -> Result<SpinMatrix, SpinError> {
    let h = hamiltonian(t);
    let m = &h.0;
    let (mut scale2, mut dev2) = (1.0f64, 0.0f64);
    for i in 0..3 {
        for j in 0..3 {
            scale2 = scale2.max(m[(i, j)].norm_sqr());
            dev2 = dev2.max((m[(i, j)] - m[(j, i)].conj()).norm_sqr());
        }
    }
    let deviation = (dev2 / scale2).sqrt();
    if deviation > HERMITIAN_TOL {
        return Err(SpinError::NonHermitian { t, deviation });
    }
    let phase = h.norm_inf() * dt;
    if phase >= MAX_PHASE_PER_STEP {
        return Err(SpinError::StepTooLarge { t, phase });
    }
    Ok(h)
}

#[inline]
fn deriv(h: &SpinMatrix, psi: &Vector3<C64>) -> Vector3<C64> {
    (h.0 * psi) * (-I)
}

fn rk4_step<H: Fn(f64) -> SpinMatrix>(hamiltonian: &H, psi: &SpinState, t: f64, dt: f64) -> Result<SpinState, SpinError> {
    let h0 = checked(hamiltonian, t, dt)?;
    let hm = checked(hamiltonian, t + 0.5 * dt, dt)?;
    let h1 = checked(hamiltonian, t + dt, dt)?;
    Ok(rk4_combine(&h0, &hm, &h1, psi, dt))
}

fn rk4_combine(h0: &SpinMatrix, hm: &SpinMatrix, h1: &SpinMatrix, psi: &SpinState, dt: f64) -> SpinState {
    let y = psi.0;
    let half = C64::new(0.5 * dt, 0.0);
    let full = C64::new(dt, 0.0);
    let k1 = deriv(h0, &y);
    let k2 = deriv(hm, &(y + k1 * half));
    let k3 = deriv(hm, &(y + k2 * half));
    let k4 = deriv(h1, &(y + k3 * full));
    let sixth = C64::new(dt / 6.0, 0.0);
    SpinState(y + (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * sixth)
}
