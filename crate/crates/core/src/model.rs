//! The driven two-band Bloch Hamiltonian.
//!
//! ```text
//! H(k, τ) = t sin(kx ax) σ1 + t [λ(τ) − δt cos(kx ax) − cos(ky ay)] σ2 + f(k) σ0
//!           + ε1 sin(ky ay) σc + εz σ3,
//! f(k)    = 2 t'x cos(kx ax) + 2 t'y cos(ky ay)
//! ```
//!
//! Energies are measured in units of the spin-flip hopping `t`, times in
//! `T0 = ħ/t` and `ħ = 1`. The drive `λ(τ)` and `δt` are dimensionless ratios
//! to `t`; the spin-independent hoppings and the perturbation strengths are
//! absolute energies.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{Mat2, PauliVector, Spinor, C64};

/// Gap below which a k-point is treated as a band touching.
pub const DEGENERACY_GAP: f64 = 1e-14;

/// Upper bound on `|λ(τ + T0) − λ(τ)|` considered slow enough for the band
/// picture to hold.
pub const SLOW_DRIVE_LIMIT: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("lattice constants must be positive (a_x = {a_x}, a_y = {a_y})")]
    LatticeConstant { a_x: f64, a_y: f64 },
    #[error("delta_t must lie in [0, 1), got {0}")]
    DeltaOutOfRange(f64),
    #[error("parameter `{0}` is not finite")]
    NotFinite(&'static str),
    #[error("real-space lattice needs at least 2x2 sites, got {0}x{1}")]
    LatticeTooSmall(usize, usize),
}

/// Pauli channel carrying the `ε1 sin(ky ay)` perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PertChannel {
    Sigma0,
    #[default]
    Sigma1,
    Sigma2,
}

/// Static lattice and model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub a_x: f64,
    pub a_y: f64,
    pub t: f64,
    pub delta_t: f64,
    pub tp_x: f64,
    pub tp_y: f64,
    pub pert_eps1: f64,
    pub pert_epsz: f64,
    pub pert_channel: PertChannel,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            a_x: 1.0,
            a_y: 2.0,
            t: 1.0,
            delta_t: 0.32,
            tp_x: 0.0,
            tp_y: 0.0,
            pert_eps1: 0.0,
            pert_epsz: 0.0,
            pert_channel: PertChannel::Sigma1,
        }
    }
}

impl ModelParams {
    pub fn with_delta(delta_t: f64) -> Self {
        ModelParams { delta_t, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let fields = [
            ("a_x", self.a_x),
            ("a_y", self.a_y),
            ("t", self.t),
            ("delta_t", self.delta_t),
            ("tp_x", self.tp_x),
            ("tp_y", self.tp_y),
            ("pert_eps1", self.pert_eps1),
            ("pert_epsz", self.pert_epsz),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(ModelError::NotFinite(name));
        }
        if self.a_x <= 0.0 || self.a_y <= 0.0 {
            return Err(ModelError::LatticeConstant { a_x: self.a_x, a_y: self.a_y });
        }
        if !(0.0..1.0).contains(&self.delta_t) {
            return Err(ModelError::DeltaOutOfRange(self.delta_t));
        }
        Ok(())
    }

    /// Spin-independent dispersion `f(k)`.
    pub fn dispersion(&self, k: WaveVector) -> f64 {
        let (qx, qy) = self.reduced(k);
        2.0 * self.tp_x * qx.cos() + 2.0 * self.tp_y * qy.cos()
    }

    /// Dimensionless phases `(kx ax, ky ay)`.
    #[inline]
    pub fn reduced(&self, k: WaveVector) -> (f64, f64) {
        (k.x * self.a_x, k.y * self.a_y)
    }

    pub fn reciprocal(&self) -> (f64, f64) {
        (2.0 * PI / self.a_x, 2.0 * PI / self.a_y)
    }
}

/// Crystal momentum in radians per length.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WaveVector {
    pub x: f64,
    pub y: f64,
}

impl WaveVector {
    pub const fn new(x: f64, y: f64) -> Self {
        WaveVector { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveKind {
    Constant,
    #[default]
    PeriodicCosine,
}

/// Time dependence of the on-site coupling.
///
/// `PeriodicCosine` gives `λ(τ) = lambda_amp cos(omega τ)/2 + lambda0/2`;
/// `Constant` holds `λ = lambda0/2`, the same expression with the cosine
/// switched off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveProtocol {
    pub kind: DriveKind,
    pub lambda0: f64,
    pub lambda_amp: f64,
    pub omega: f64,
}

impl DriveProtocol {
    pub fn periodic(lambda0: f64, lambda_amp: f64, omega: f64) -> Self {
        DriveProtocol { kind: DriveKind::PeriodicCosine, lambda0, lambda_amp, omega }
    }

    /// A static coupling `λ(τ) = value`.
    pub fn constant(value: f64) -> Self {
        DriveProtocol { kind: DriveKind::Constant, lambda0: 2.0 * value, lambda_amp: 0.0, omega: 0.0 }
    }

    pub fn is_static(&self) -> bool {
        match self.kind {
            DriveKind::Constant => true,
            DriveKind::PeriodicCosine => self.lambda_amp == 0.0 || self.omega == 0.0,
        }
    }

    pub fn lambda(&self, tau: f64) -> f64 {
        match self.kind {
            DriveKind::Constant => 0.5 * self.lambda0,
            DriveKind::PeriodicCosine => 0.5 * self.lambda_amp * (self.omega * tau).cos() + 0.5 * self.lambda0,
        }
    }

    pub fn derivative(&self, tau: f64) -> f64 {
        match self.kind {
            DriveKind::Constant => 0.0,
            DriveKind::PeriodicCosine => -0.5 * self.lambda_amp * self.omega * (self.omega * tau).sin(),
        }
    }

    pub fn second_derivative(&self, tau: f64) -> f64 {
        match self.kind {
            DriveKind::Constant => 0.0,
            DriveKind::PeriodicCosine => -0.5 * self.lambda_amp * self.omega * self.omega * (self.omega * tau).cos(),
        }
    }

    /// `λ(tau0 + v) − λ(tau0)` without cancellation for small `v`.
    pub fn delta_lambda(&self, tau0: f64, v: f64) -> f64 {
        match self.kind {
            DriveKind::Constant => 0.0,
            DriveKind::PeriodicCosine => {
                let w = self.omega;
                -self.lambda_amp * (w * (tau0 + 0.5 * v)).sin() * (0.5 * w * v).sin()
            }
        }
    }

    /// Period of the drive, `None` when static.
    pub fn period(&self) -> Option<f64> {
        if self.is_static() {
            None
        } else {
            Some(2.0 * PI / self.omega.abs())
        }
    }

    /// Bound on `|λ(τ + T0) − λ(τ)|` over all `τ`.
    pub fn max_step_change(&self) -> f64 {
        match self.kind {
            DriveKind::Constant => 0.0,
            DriveKind::PeriodicCosine => 0.5 * (self.lambda_amp * self.omega).abs(),
        }
    }

    /// Adiabaticity heuristic; a violation is a warning, not an error.
    pub fn is_slow(&self) -> bool {
        self.max_step_change() <= SLOW_DRIVE_LIMIT * (1.0 + 1e-12)
    }

    /// Times in `[0, tau_max]` where `λ′ = 0`, in increasing order.
    pub fn extremum_times(&self, tau_max: f64) -> Vec<f64> {
        if self.is_static() {
            return Vec::new();
        }
        let step = PI / self.omega.abs();
        (0..).map(|n| n as f64 * step).take_while(|&t| t <= tau_max).collect()
    }

    /// Same drive with `λ′ → −λ′` at every instant (`τ → −τ` reflected about 0).
    pub fn time_reversed(&self) -> Self {
        DriveProtocol { omega: -self.omega, ..*self }
    }
}

impl Default for DriveProtocol {
    fn default() -> Self {
        DriveProtocol::periodic(2.44, 0.2, 0.1)
    }
}

/// A 2x2 Hermitian Bloch matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochMatrix(pub Mat2);

impl BlochMatrix {
    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn pauli(&self) -> PauliVector {
        self.0.to_pauli()
    }

    pub fn eigenvalues(&self) -> (f64, f64) {
        self.0.hermitian_eigenvalues()
    }
}

/// Pauli coefficients of `H(k, τ)`.
pub fn bloch_pauli(p: &ModelParams, d: &DriveProtocol, k: WaveVector, tau: f64) -> PauliVector {
    static_pauli(p, k) + drive_pauli(p, d.lambda(tau))
}

/// The k-dependent, time-independent part of the Hamiltonian.
pub fn static_pauli(p: &ModelParams, k: WaveVector) -> PauliVector {
    let (qx, qy) = p.reduced(k);
    let (sx, cx) = qx.sin_cos();
    let (sy, cy) = qy.sin_cos();
    let mut h = PauliVector {
        h0: 2.0 * p.tp_x * cx + 2.0 * p.tp_y * cy,
        h1: p.t * sx,
        h2: -p.t * (p.delta_t * cx + cy),
        h3: p.pert_epsz,
    };
    let pert = p.pert_eps1 * sy;
    match p.pert_channel {
        PertChannel::Sigma0 => h.h0 += pert,
        PertChannel::Sigma1 => h.h1 += pert,
        PertChannel::Sigma2 => h.h2 += pert,
    }
    h
}

/// The on-site coupling `t λ σ2`.
#[inline]
pub fn drive_pauli(p: &ModelParams, lambda: f64) -> PauliVector {
    PauliVector { h2: p.t * lambda, ..Default::default() }
}

pub fn bloch_hamiltonian(p: &ModelParams, d: &DriveProtocol, k: WaveVector, tau: f64) -> BlochMatrix {
    BlochMatrix(bloch_pauli(p, d, k, tau).to_matrix())
}

/// Energies and eigen-spinors at one `(k, τ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPoint {
    pub lower: f64,
    pub upper: f64,
    pub lower_state: Spinor,
    pub upper_state: Spinor,
    /// Set at band touchings, where the spinors are an arbitrary basis.
    pub gauge_ambiguous: bool,
}

impl BandPoint {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn state(&self, band: Band) -> &Spinor {
        match band {
            Band::Lower => &self.lower_state,
            Band::Upper => &self.upper_state,
        }
    }

    pub fn energy(&self, band: Band) -> f64 {
        match band {
            Band::Lower => self.lower,
            Band::Upper => self.upper,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    Lower,
    Upper,
}

pub fn band(p: &ModelParams, d: &DriveProtocol, k: WaveVector, tau: f64) -> BandPoint {
    eigensystem(&bloch_pauli(p, d, k, tau))
}

/// Closed-form eigensystem of `h0 + h·σ`.
///
/// Each spinor is taken from whichever of the two algebraically equivalent
/// eigenvector expressions has the larger norm, then fixed to the gauge in
/// which its first non-negligible component is real and positive.
pub fn eigensystem(h: &PauliVector) -> BandPoint {
    let r = h.magnitude();
    if 2.0 * r < DEGENERACY_GAP {
        return BandPoint {
            lower: h.h0 - r,
            upper: h.h0 + r,
            lower_state: Spinor::up(),
            upper_state: Spinor::down(),
            gauge_ambiguous: true,
        };
    }
    let off = C64::new(h.h1, -h.h2);
    let lower = if h.h3 >= 0.0 {
        Spinor::new(off, C64::new(-(h.h3 + r), 0.0))
    } else {
        Spinor::new(C64::new(h.h3 - r, 0.0), off.conj())
    };
    let upper = if h.h3 <= 0.0 {
        Spinor::new(off, C64::new(r - h.h3, 0.0))
    } else {
        Spinor::new(C64::new(h.h3 + r, 0.0), off.conj())
    };
    BandPoint {
        lower: h.h0 - r,
        upper: h.h0 + r,
        lower_state: fix_gauge(&lower.normalized()),
        upper_state: fix_gauge(&upper.normalized()),
        gauge_ambiguous: false,
    }
}

/// Rotates the global phase so the first component above `1e-12` in modulus
/// is real and positive.
pub fn fix_gauge(v: &Spinor) -> Spinor {
    let pivot = v.0.iter().copied().find(|c| c.norm() > 1e-12);
    match pivot {
        Some(c) => v.scale(c.conj() / c.norm()),
        None => *v,
    }
}

/// `∂H/∂kx` (carries a factor `a_x`).
pub fn velocity_x(p: &ModelParams, _d: &DriveProtocol, k: WaveVector, _tau: f64) -> BlochMatrix {
    BlochMatrix(velocity_x_pauli(p, k).to_matrix())
}

pub fn velocity_x_pauli(p: &ModelParams, k: WaveVector) -> PauliVector {
    let (qx, _) = p.reduced(k);
    let (sx, cx) = qx.sin_cos();
    PauliVector { h0: -2.0 * p.tp_x * sx * p.a_x, h1: p.t * cx * p.a_x, h2: p.t * p.delta_t * sx * p.a_x, h3: 0.0 }
}

/// `∂H/∂ky` (carries a factor `a_y`).
pub fn velocity_y_pauli(p: &ModelParams, k: WaveVector) -> PauliVector {
    let (_, qy) = p.reduced(k);
    let (sy, cy) = qy.sin_cos();
    let mut v = PauliVector { h0: -2.0 * p.tp_y * sy * p.a_y, h1: 0.0, h2: p.t * sy * p.a_y, h3: 0.0 };
    let pert = p.pert_eps1 * cy * p.a_y;
    match p.pert_channel {
        PertChannel::Sigma0 => v.h0 += pert,
        PertChannel::Sigma1 => v.h1 += pert,
        PertChannel::Sigma2 => v.h2 += pert,
    }
    v
}

/// Frobenius distance between `H` and its image `σ1 H* σ1` under the
/// combined space-inversion and time-reversal operation.
pub fn pt_defect(p: &ModelParams, d: &DriveProtocol, k: WaveVector, tau: f64) -> f64 {
    let h = *bloch_hamiltonian(p, d, k, tau).matrix();
    let s1 = Mat2::sigma1();
    (s1 * h.conj() * s1 - h).frobenius_norm()
}
