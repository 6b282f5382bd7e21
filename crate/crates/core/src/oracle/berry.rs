use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{pairwise_sum, KGrid, OracleError};
use crate::linalg::{PauliVector, Spinor, C64};
use crate::model::{self, Band, DriveProtocol, ModelParams, WaveVector};

/// Orientation of the pumped current relative to `d/dτ ∫ γ(ky) dky / 4π²`,
/// fixed once against the closed-form current at `λ = 0.5, λ′ = −0.01,
/// δt = 0.32`.
pub const PUMP_SIGN: f64 = -1.0;

/// Time step of the central difference in [`pump_current`].
const PUMP_TAU_STEP: f64 = 1e-2;
/// Offset in `ky·ay` of the regulated loops that orient a Berry-phase jump.
const JUMP_PROBE: f64 = 1e-7;
/// `σ3` mass of the regulated loops; must be small against `JUMP_PROBE`.
const JUMP_MASS: f64 = 1e-10;
/// Overlaps below this modulus make a plaquette meaningless.
const MIN_OVERLAP: f64 = 1e-8;

fn state(p: &ModelParams, lambda: f64, k: WaveVector, mass: f64, band: Band) -> (Spinor, bool) {
    let mut h: PauliVector = model::static_pauli(p, k) + model::drive_pauli(p, lambda);
    h.h3 += mass;
    let b = model::eigensystem(&h);
    (*b.state(band), b.gauge_ambiguous)
}

/// Plaquette curvature of `band` in the plane spanned by `dk` and `τ`:
/// `−arg(⟨1|2⟩⟨2|3⟩⟨3|4⟩⟨4|1⟩) / (|dk|·h_tau)` around
/// `(k, τ) → (k+dk, τ) → (k+dk, τ+h_tau) → (k, τ+h_tau)`.
pub fn mixed_curvature(
    p: &ModelParams,
    d: &DriveProtocol,
    k: WaveVector,
    tau: f64,
    dk: WaveVector,
    h_tau: f64,
    band: Band,
) -> Result<f64, OracleError> {
    let k2 = WaveVector::new(k.x + dk.x, k.y + dk.y);
    let corners = [(k, tau), (k2, tau), (k2, tau + h_tau), (k, tau + h_tau)];
    let states: Vec<Spinor> = corners.iter().map(|&(kk, t)| state(p, d.lambda(t), kk, 0.0, band).0).collect();
    let mut u = C64::new(1.0, 0.0);
    for i in 0..4 {
        let o = states[i].inner(&states[(i + 1) % 4]);
        if o.norm() < MIN_OVERLAP {
            return Err(OracleError::NearDegeneracy { kx: k.x, ky: k.y, tau, overlap: o.norm() });
        }
        u *= o;
    }
    let area = (dk.x * dk.x + dk.y * dk.y).sqrt() * h_tau;
    Ok(-u.arg() / area)
}

/// Lower-band curvature `Ω_{kx τ}` from one plaquette.
pub fn berry_curvature_kt(
    p: &ModelParams,
    d: &DriveProtocol,
    k: WaveVector,
    tau: f64,
    h_k: f64,
    h_tau: f64,
) -> Result<f64, OracleError> {
    mixed_curvature(p, d, k, tau, WaveVector::new(h_k, 0.0), h_tau, Band::Lower)
}

/// `Σ Ω_{kx τ} Δkx Δky / (2π)²` over the plaquettes of `grid`, i.e. the
/// Brillouin-zone integral of the plaquette curvature.
pub fn curvature_bz_sum(
    p: &ModelParams,
    d: &DriveProtocol,
    tau: f64,
    grid: &KGrid,
    h_tau: f64,
) -> Result<f64, OracleError> {
    grid.validate()?;
    let hk = 2.0 * PI / (grid.n_x as f64 * p.a_x);
    let hky = 2.0 * PI / (grid.n_y as f64 * p.a_y);
    let rows: Vec<Result<f64, OracleError>> = (0..grid.n_y)
        .into_par_iter()
        .map(|j| {
            let vals = (0..grid.n_x)
                .map(|i| berry_curvature_kt(p, d, grid.point(p, i, j), tau, hk, h_tau))
                .collect::<Result<Vec<f64>, _>>()?;
            Ok(pairwise_sum(&vals))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<f64>, _>>()?;
    Ok(pairwise_sum(&rows) * hk * hky / (4.0 * PI * PI))
}

/// Product of lower-band overlaps around the closed loop `kx·ax ∈ [0, 2π)`
/// on `n_x` points at fixed `ky·ay = qy`. Also reports whether any state on
/// the loop sat on a band touching.
fn loop_product(p: &ModelParams, lambda: f64, qy: f64, n_x: usize, mass: f64) -> (C64, bool) {
    let ky = qy / p.a_y;
    let at =
        |i: usize| state(p, lambda, WaveVector::new(2.0 * PI * i as f64 / (n_x as f64 * p.a_x), ky), mass, Band::Lower);
    let (first, mut ambiguous) = at(0);
    let mut prev = first;
    let mut w = C64::new(1.0, 0.0);
    for i in 1..n_x {
        let (s, amb) = at(i);
        ambiguous |= amb;
        w *= prev.inner(&s);
        prev = s;
    }
    w *= prev.inner(&first);
    (w, ambiguous)
}

/// Wilson loop of the lower band along `kx` at fixed `ky`, time `tau`.
/// Its phase is minus the Berry phase of the row.
pub fn wilson_loop(p: &ModelParams, d: &DriveProtocol, tau: f64, ky: f64, n_x: usize) -> C64 {
    loop_product(p, d.lambda(tau), ky * p.a_y, n_x, p.pert_epsz).0
}

/// A discontinuity of the row Berry phase `γ(ky)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilsonJump {
    /// Position in `ky·ay ∈ [−π, π)`.
    pub qy: f64,
    /// `γ(qy⁺) − γ(qy⁻)` as `±1` in units of `π`.
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PumpResult {
    /// Current density in `t/a_y`.
    pub current: f64,
    /// Set when a band touching sat on the grid or the Berry-phase jumps at
    /// the two difference times could not be matched one to one.
    pub partial: bool,
    pub jumps: Vec<WilsonJump>,
}

fn wrap(q: f64) -> f64 {
    (q + PI).rem_euclid(2.0 * PI) - PI
}

/// Locates the `π` jumps of `γ(ky)` at fixed `λ` and orients each with a
/// vanishing `σ3` regulator.
fn berry_jumps(p: &ModelParams, lambda: f64, grid: &KGrid) -> (Vec<WilsonJump>, bool) {
    let ny = grid.n_y;
    let h = 2.0 * PI / ny as f64;
    let q = |j: usize| -PI + h * j as f64;
    let rows: Vec<(f64, bool)> = (0..ny)
        .into_par_iter()
        .map(|j| {
            let (w, amb) = loop_product(p, lambda, q(j), grid.n_x, 0.0);
            (w.re, amb)
        })
        .collect();
    let mut partial = rows.iter().any(|r| r.1);
    let found: Vec<Option<(WilsonJump, bool)>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            let (fa, fb) = (rows[j].0, rows[(j + 1) % ny].0);
            if (fa > 0.0) == (fb > 0.0) {
                return None;
            }
            let (mut a, mut b) = (q(j), q(j) + h);
            let up = fa > 0.0;
            while b - a > 1e-14 {
                let m = 0.5 * (a + b);
                if (loop_product(p, lambda, m, grid.n_x, 0.0).0.re > 0.0) == up {
                    a = m;
                } else {
                    b = m;
                }
            }
            let qs = 0.5 * (a + b);
            let above = loop_product(p, lambda, qs + JUMP_PROBE, grid.n_x, JUMP_MASS).0.arg();
            let below = loop_product(p, lambda, qs - JUMP_PROBE, grid.n_x, JUMP_MASS).0.arg();
            // Berry phase is −arg W.
            let g = -wrap(above - below);
            let clean = g.abs() > 0.5 * PI;
            Some((WilsonJump { qy: wrap(qs), sign: if g > 0.0 { 1 } else { -1 } }, clean))
        })
        .collect();
    let mut jumps = Vec::new();
    for (jump, clean) in found.into_iter().flatten() {
        partial |= !clean;
        jumps.push(jump);
    }
    jumps.sort_by(|a, b| a.qy.total_cmp(&b.qy));
    (jumps, partial)
}

/// Pumped current from the motion of the Berry-phase jumps of the filled
/// band between `τ ∓ h/2`.
///
/// For the unperturbed model the lower band is real up to a phase, so the
/// row Berry phase `γ(ky)` is `0` or `π` and changes only where a row passes
/// through a node. `∫ γ dky` then moves only through the jump positions
/// `q_i`, giving `J = PUMP_SIGN · (−Σ Δγ_i dq_i/dτ) / 4π²`.
pub fn pump_current(p: &ModelParams, d: &DriveProtocol, tau: f64, grid: &KGrid) -> Result<PumpResult, OracleError> {
    grid.validate()?;
    p.validate()?;
    if p.pert_epsz != 0.0 {
        return Err(OracleError::BrokenSymmetry(p.pert_epsz));
    }
    let h = PUMP_TAU_STEP;
    let (before, pa) = berry_jumps(p, d.lambda(tau - 0.5 * h), grid);
    let (after, pb) = berry_jumps(p, d.lambda(tau + 0.5 * h), grid);
    let mut partial = pa || pb || before.len() != after.len();
    let mut used = vec![false; after.len()];
    let mut moved = Vec::with_capacity(before.len());
    for a in &before {
        let best = after
            .iter()
            .enumerate()
            .filter(|(i, b)| !used[*i] && b.sign == a.sign)
            .min_by(|x, y| wrap(x.1.qy - a.qy).abs().total_cmp(&wrap(y.1.qy - a.qy).abs()));
        match best {
            Some((i, b)) => {
                used[i] = true;
                moved.push(-(a.sign as f64) * PI * wrap(b.qy - a.qy));
            }
            None => partial = true,
        }
    }
    let current = PUMP_SIGN * pairwise_sum(&moved) / (h * 4.0 * PI * PI);
    Ok(PumpResult { current, partial, jumps: after })
}
