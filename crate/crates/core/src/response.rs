//! Topological current of the Dirac-point dipoles, centre-of-mass drift and
//! Lifshitz events of the drive.
//!
//! For each active pair the current along x is
//!
//! ```text
//! J± = ∓ λ′ / (2π √(1 − (λ ± δt)²))      [t/a_y]
//! ```
//!
//! where `J+` belongs to the pair at `kx = π/ax` (family 2) and `J−` to the
//! pair at `kx = 0` (family 1).

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dirac::{classify, DiracError, DiracPhase};
use crate::model::{DriveProtocol, ModelParams};
use crate::quadrature;

/// `|1 − u²|` below which `u` is treated as sitting on a band edge.
pub const EDGE_TOL: f64 = 1e-12;

/// Largest allowed disagreement between the two drift evaluations, in `a_x`.
pub const DRIFT_AGREEMENT: f64 = 1e-8;

/// Distance from a boundary below which an extremum of `λ` is a tangency.
pub const TANGENCY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResponseError {
    #[error(transparent)]
    Dirac(#[from] DiracError),
    #[error("band edge crossed at tau = {tau} (lambda = {lambda}); current diverges integrably")]
    IntegrableSingularity { tau: f64, lambda: f64 },
    #[error("{0}")]
    InvalidArgument(String),
    #[error("drift quadrature and closed form disagree by {diff:e} a_x at tau = {tau}")]
    Inconsistent { tau: f64, diff: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurrentSample {
    pub tau: f64,
    pub lambda: f64,
    pub j_plus: f64,
    pub j_minus: f64,
    pub j_total: f64,
    pub n_pairs: usize,
}

/// `√(1 − u²)`-type contribution `λ′/(2π √(1 − u²))` for a family whose
/// band-edge parameter is `u`.
fn family_term(u: f64, dl: f64, d2l: f64, tau: f64, lambda: f64) -> Result<f64, ResponseError> {
    let s = (1.0 - u) * (1.0 + u);
    if s > EDGE_TOL {
        return Ok(dl / (2.0 * PI * s.sqrt()));
    }
    // At the edge: near a tangency s ≈ −u λ″ Δτ² and λ′ ≈ λ″ Δτ.
    if dl * dl <= 4.0 * d2l.abs() * s.abs() {
        if d2l * u < 0.0 {
            return Ok(d2l.signum() * d2l.abs().sqrt() / (2.0 * PI));
        }
        return Ok(0.0);
    }
    Err(ResponseError::IntegrableSingularity { tau, lambda })
}

/// Analytic current at time `tau`.
///
/// At a tangential touching of a band edge the right-sided limit is
/// returned; a transversal crossing is an [`ResponseError::IntegrableSingularity`].
pub fn analytic_current(p: &ModelParams, d: &DriveProtocol, tau: f64) -> Result<CurrentSample, ResponseError> {
    let lambda = d.lambda(tau);
    let dl = d.derivative(tau);
    let d2l = d.second_derivative(tau);
    let phase = classify(lambda, p.delta_t)?;
    let (u1, u2) = (lambda - p.delta_t, lambda + p.delta_t);
    for u in [u1, u2] {
        // Transversal crossings are singular whether or not the family is
        // counted as active exactly on the boundary.
        let s = (1.0 - u) * (1.0 + u);
        if s.abs() <= EDGE_TOL && dl * dl > 4.0 * d2l.abs() * s.abs() {
            return Err(ResponseError::IntegrableSingularity { tau, lambda });
        }
    }
    // A family within EDGE_TOL of its edge goes through the edge limits even
    // when the rounded λ lands just outside the band.
    let near = |u: f64| ((1.0 - u) * (1.0 + u)).abs() <= EDGE_TOL;
    let j_minus = if phase.family1_active() || near(u1) { family_term(u1, dl, d2l, tau, lambda)? } else { 0.0 };
    let j_plus = if phase.family2_active() || near(u2) { -family_term(u2, dl, d2l, tau, lambda)? } else { 0.0 };
    Ok(CurrentSample { tau, lambda, j_plus, j_minus, j_total: j_plus + j_minus, n_pairs: phase.n_pairs() })
}

/// `1 − u²` for both families, `(s1, s2)` with `u1 = λ − δt`, `u2 = λ + δt`.
///
/// Evaluated at `τ = te + v`. When `anchor` names a level with
/// `λ(te) = level` by construction, the distance to it is taken from
/// [`DriveProtocol::delta_lambda`] so it stays accurate as `v → 0`.
fn edge_factors(p: &ModelParams, d: &DriveProtocol, te: f64, v: f64, anchor: Option<f64>) -> (f64, f64) {
    let lam = d.lambda(te + v);
    let off = |level: f64| match anchor {
        Some(l) if l == level => d.delta_lambda(te, v),
        _ => lam - level,
    };
    let dt = p.delta_t;
    let s1 = -off(1.0 + dt) * off(-(1.0 - dt));
    let s2 = -off(1.0 - dt) * off(-(1.0 + dt));
    (s1, s2)
}

/// `J_total` counting only families strictly inside their band; unbounded
/// next to a band edge and meant for quadrature.
fn total_current_raw(s1: f64, s2: f64, dl: f64) -> f64 {
    let term = |s: f64| if s > 0.0 { dl / (2.0 * PI * s.sqrt()) } else { 0.0 };
    term(s1) - term(s2)
}

/// Current samples on `n` evenly spaced times in `[0, tau_max]`.
pub fn current_trace(
    p: &ModelParams,
    d: &DriveProtocol,
    tau_max: f64,
    n: usize,
) -> Vec<Result<CurrentSample, ResponseError>> {
    let step = if n > 1 { tau_max / (n - 1) as f64 } else { 0.0 };
    (0..n).into_par_iter().map(|i| analytic_current(p, d, i as f64 * step)).collect()
}

/// Antiderivative `A(λ)` with `dA/dτ = 2π J_total`.
pub fn drift_potential(lambda: f64, delta_t: f64) -> f64 {
    let clamp = |u: f64| u.clamp(-1.0, 1.0).asin();
    clamp(lambda - delta_t) - clamp(lambda + delta_t)
}

/// [`drift_potential`] with `λ` exactly on boundary `b`.
fn boundary_potential(b: LifshitzBoundary, delta_t: f64) -> f64 {
    let inner = (1.0 - 2.0 * delta_t).asin() - FRAC_PI_2;
    match b {
        LifshitzBoundary::PlusOuter | LifshitzBoundary::MinusOuter => 0.0,
        LifshitzBoundary::PlusInner | LifshitzBoundary::MinusInner => inner,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftTrace {
    pub rho: f64,
    /// `(tau, x_c)` with `x_c` in units of `a_x`.
    pub samples: Vec<(f64, f64)>,
    /// Largest difference seen between the quadrature and closed-form routes.
    pub max_discrepancy: f64,
}

impl DriftTrace {
    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|s| s.1.abs()).fold(0.0, f64::max)
    }
}

/// Centre-of-mass displacement `x_c(τ) = ∫ J_total dτ / ρ` on `n_steps`
/// uniform steps plus every time where `x_c` can turn (extrema of `λ`,
/// `λ = 0` and Lifshitz events), by closed form and by adaptive quadrature split at every
/// Lifshitz event. The closed-form values are returned.
pub fn drift(
    p: &ModelParams,
    d: &DriveProtocol,
    rho: f64,
    tau_max: f64,
    n_steps: usize,
) -> Result<DriftTrace, ResponseError> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(ResponseError::InvalidArgument(format!("rho must be positive, got {rho}")));
    }
    if n_steps < 100 {
        return Err(ResponseError::InvalidArgument(format!("n_steps must be >= 100, got {n_steps}")));
    }
    if !(tau_max > 0.0 && tau_max.is_finite()) {
        return Err(ResponseError::InvalidArgument(format!("tau_max must be positive, got {tau_max}")));
    }
    classify(d.lambda(0.0), p.delta_t)?;
    let dt = tau_max / n_steps as f64;
    let events = lifshitz_events(p, d, tau_max);
    let mut taus: Vec<f64> = (0..=n_steps).map(|i| i as f64 * dt).collect();
    // Times where x_c can turn: λ′ = 0, the two families cancel (λ = 0), or
    // a family switches on or off.
    let mut extra = d.extremum_times(tau_max);
    extra.extend(level_crossings(d, 0.0, tau_max));
    extra.extend(events.iter().map(|e| e.tau));
    taus.extend(extra.into_iter().filter(|&t| t > 0.0 && t < tau_max));
    taus.sort_by(f64::total_cmp);
    taus.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * dt);
    let scale = 1.0 / (2.0 * PI * rho);
    // At an event λ sits on the boundary by construction; the rounded λ(τ)
    // would cost √ε through the arcsine.
    let potential_at = |t: f64| match events.iter().find(|e| e.tau == t) {
        Some(e) => boundary_potential(e.boundary, p.delta_t),
        None => drift_potential(d.lambda(t), p.delta_t),
    };
    let a0 = potential_at(0.0);
    let closed: Vec<f64> = taus.iter().map(|&t| (potential_at(t) - a0) * scale).collect();

    // J is small (∝ λ′) so an absolute tolerance scaled by ρ keeps x_c accurate.
    let tol = 1e-3 * DRIFT_AGREEMENT * rho;
    let plain = |t: f64| {
        let (s1, s2) = edge_factors(p, d, t, 0.0, None);
        total_current_raw(s1, s2, d.derivative(t))
    };
    // Integral over `v` from an event at `te` on `level`.
    let from_event = |te: f64, level: f64, len: f64| {
        quadrature::integrate_sqrt_endpoint(
            |v| {
                let (s1, s2) = edge_factors(p, d, te, v, Some(level));
                total_current_raw(s1, s2, d.derivative(te + v))
            },
            len,
            tol,
        )
        .value
    };
    let pieces: Vec<f64> = taus
        .par_windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let mut cuts: Vec<(f64, Option<f64>)> = vec![(a, None)];
            for e in events.iter().filter(|e| e.tau >= a && e.tau <= b) {
                let level = Some(e.boundary.value(p.delta_t));
                if e.tau == a {
                    cuts[0].1 = level;
                } else if e.tau == b {
                    cuts.push((b, level));
                } else {
                    cuts.push((e.tau, level));
                }
            }
            if cuts.last().unwrap().0 < b {
                cuts.push((b, None));
            }
            cuts.windows(2)
                .map(|c| {
                    let ((lo, left), (hi, right)) = (c[0], c[1]);
                    match (left, right) {
                        (None, None) => quadrature::integrate(plain, lo, hi, tol).value,
                        (Some(l), None) => from_event(lo, l, hi - lo),
                        (None, Some(r)) => -from_event(hi, r, lo - hi),
                        (Some(l), Some(r)) => {
                            let mid = 0.5 * (lo + hi);
                            from_event(lo, l, mid - lo) - from_event(hi, r, mid - hi)
                        }
                    }
                })
                .sum()
        })
        .collect();

    let mut acc = 0.0;
    let mut max_discrepancy: f64 = 0.0;
    let mut samples = Vec::with_capacity(taus.len());
    samples.push((0.0, 0.0));
    for (i, piece) in pieces.iter().enumerate() {
        acc += piece;
        let quad = acc / rho;
        let diff = (quad - closed[i + 1]).abs();
        if diff > DRIFT_AGREEMENT {
            return Err(ResponseError::Inconsistent { tau: taus[i + 1], diff });
        }
        max_discrepancy = max_discrepancy.max(diff);
        samples.push((taus[i + 1], closed[i + 1]));
    }
    Ok(DriftTrace { rho, samples, max_discrepancy })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LifshitzBoundary {
    /// `λ = 1 + δt`
    PlusOuter,
    /// `λ = 1 − δt`
    PlusInner,
    /// `λ = −(1 − δt)`
    MinusInner,
    /// `λ = −(1 + δt)`
    MinusOuter,
}

impl LifshitzBoundary {
    pub fn value(self, delta_t: f64) -> f64 {
        match self {
            LifshitzBoundary::PlusOuter => 1.0 + delta_t,
            LifshitzBoundary::PlusInner => 1.0 - delta_t,
            LifshitzBoundary::MinusInner => -(1.0 - delta_t),
            LifshitzBoundary::MinusOuter => -(1.0 + delta_t),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LifshitzBoundary::PlusOuter => "+(1+delta)",
            LifshitzBoundary::PlusInner => "+(1-delta)",
            LifshitzBoundary::MinusInner => "-(1-delta)",
            LifshitzBoundary::MinusOuter => "-(1+delta)",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Crossing,
    Tangency,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifshitzEvent {
    pub tau: f64,
    pub boundary: LifshitzBoundary,
    pub kind: EventKind,
}

/// Times in `[0, tau_max]` at which `λ(τ)` meets a phase boundary, sorted.
///
/// `λ` is monotone between consecutive extrema, so each boundary is crossed
/// at most once per segment; crossings are bracketed there and bisected to
/// machine precision. An extremum lying on a boundary is a tangency.
pub fn lifshitz_events(p: &ModelParams, d: &DriveProtocol, tau_max: f64) -> Vec<LifshitzEvent> {
    if d.is_static() || tau_max.is_nan() || tau_max < 0.0 {
        return Vec::new();
    }
    let mut boundaries = vec![LifshitzBoundary::PlusOuter, LifshitzBoundary::MinusOuter];
    if p.delta_t > 0.0 {
        boundaries.extend([LifshitzBoundary::PlusInner, LifshitzBoundary::MinusInner]);
    }
    let extrema = d.extremum_times(tau_max);
    let mut knots = extrema.clone();
    if knots.last().is_none_or(|&t| t < tau_max) {
        knots.push(tau_max);
    }
    if knots.first().is_none_or(|&t| t > 0.0) {
        knots.insert(0, 0.0);
    }
    let is_extremum = |t: f64| extrema.contains(&t);
    let mut events = Vec::new();
    for &b in &boundaries {
        let level = b.value(p.delta_t);
        let g = |t: f64| d.lambda(t) - level;
        for &t in &knots {
            if is_extremum(t) && g(t).abs() <= TANGENCY_TOL {
                events.push(LifshitzEvent { tau: t, boundary: b, kind: EventKind::Tangency });
            }
        }
        for w in knots.windows(2) {
            let (mut lo, mut hi) = (w[0], w[1]);
            let (glo, ghi) = (g(lo), g(hi));
            let tangent_lo = is_extremum(lo) && glo.abs() <= TANGENCY_TOL;
            let tangent_hi = is_extremum(hi) && ghi.abs() <= TANGENCY_TOL;
            if tangent_lo || tangent_hi {
                continue;
            }
            if glo == 0.0 && lo == 0.0 {
                events.push(LifshitzEvent { tau: lo, boundary: b, kind: EventKind::Crossing });
                continue;
            }
            if ghi == 0.0 {
                events.push(LifshitzEvent { tau: hi, boundary: b, kind: EventKind::Crossing });
                continue;
            }
            if glo * ghi > 0.0 || glo == 0.0 {
                continue;
            }
            let rising = ghi > glo;
            loop {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if (g(mid) > 0.0) == rising {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            events.push(LifshitzEvent { tau: 0.5 * (lo + hi), boundary: b, kind: EventKind::Crossing });
        }
    }
    events.sort_by(|a, b| a.tau.total_cmp(&b.tau));
    events.dedup_by(|a, b| a.tau == b.tau && a.boundary == b.boundary);
    events
}

/// Times in `(0, tau_max)` where `λ(τ)` crosses `level`, by bisection
/// between consecutive extrema.
fn level_crossings(d: &DriveProtocol, level: f64, tau_max: f64) -> Vec<f64> {
    if d.is_static() {
        return Vec::new();
    }
    let mut knots = vec![0.0];
    knots.extend(d.extremum_times(tau_max).into_iter().filter(|&t| t > 0.0));
    knots.push(tau_max);
    let g = |t: f64| d.lambda(t) - level;
    let mut out = Vec::new();
    for w in knots.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let product = g(lo) * g(hi);
        if product.is_nan() || product >= 0.0 {
            continue;
        }
        let rising = g(hi) > g(lo);
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (g(mid) > 0.0) == rising {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    out
}

/// A vector field `(bx, by)` sampled row-major on a uniform `nx × ny` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorField2 {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub bx: Vec<f64>,
    pub by: Vec<f64>,
}

impl VectorField2 {
    pub fn from_fn(nx: usize, ny: usize, dx: f64, dy: f64, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let mut bx = Vec::with_capacity(nx * ny);
        let mut by = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (u, v) = f(i as f64 * dx, j as f64 * dy);
                bx.push(u);
                by.push(v);
            }
        }
        VectorField2 { nx, ny, dx, dy, bx, by }
    }
}

/// Derivative along a strided line: central in the interior, second-order
/// one-sided at both ends.
fn diff(values: impl Fn(usize) -> f64, n: usize, i: usize, h: f64) -> f64 {
    if i == 0 {
        (-3.0 * values(0) + 4.0 * values(1) - values(2)) / (2.0 * h)
    } else if i == n - 1 {
        (3.0 * values(n - 1) - 4.0 * values(n - 2) + values(n - 3)) / (2.0 * h)
    } else {
        (values(i + 1) - values(i - 1)) / (2.0 * h)
    }
}

/// Dipole density `ρ_D = (∂x by − ∂y bx) / 2π` on the grid of `b`.
pub fn density_rho_d(b: &VectorField2) -> Result<Vec<f64>, ResponseError> {
    let (nx, ny) = (b.nx, b.ny);
    if nx < 3 || ny < 3 {
        return Err(ResponseError::InvalidArgument(format!("density grid must be at least 3x3, got {nx}x{ny}")));
    }
    if b.bx.len() != nx * ny || b.by.len() != nx * ny {
        return Err(ResponseError::InvalidArgument("field length does not match grid".into()));
    }
    if !(b.dx > 0.0 && b.dy > 0.0) {
        return Err(ResponseError::InvalidArgument("grid spacing must be positive".into()));
    }
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let dby_dx = diff(|ii| b.by[ii + nx * j], nx, i, b.dx);
            let dbx_dy = diff(|jj| b.bx[i + nx * jj], ny, j, b.dy);
            out.push((dby_dx - dbx_dy) / (2.0 * PI));
        }
    }
    Ok(out)
}

/// Whether `phase` changes between two values of `λ`.
pub fn phase_changes(a: f64, b: f64, delta_t: f64) -> Result<bool, DiracError> {
    Ok(classify(a, delta_t)? != classify(b, delta_t)?)
}

/// Phase at time `tau`.
pub fn phase_at(p: &ModelParams, d: &DriveProtocol, tau: f64) -> Result<DiracPhase, DiracError> {
    classify(d.lambda(tau), p.delta_t)
}
