use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{berry::mixed_curvature, OracleError};
use crate::model::{self, Band, DriveProtocol, ModelParams, WaveVector};
use crate::response::{lifshitz_events, EventKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavePacketState {
    /// Centre position `(x, y)` in lattice-length units.
    pub r: (f64, f64),
    pub k: WaveVector,
    pub band: Band,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacketTrajectory {
    /// `(tau, x, y)`.
    pub samples: Vec<(f64, f64, f64)>,
    /// Net displacement from each velocity term separately: group velocity,
    /// `−Ω_kt`, and `E_eff × ê_z`.
    pub group: (f64, f64),
    pub curvature: (f64, f64),
    pub field: (f64, f64),
    /// The drive crossed a Lifshitz transition during the run.
    pub lifshitz_crossed: bool,
    /// Some curvature plaquette touched a node and was skipped.
    pub node_touched: bool,
}

const CURVATURE_STEP_K: f64 = 1e-4;
const CURVATURE_STEP_TAU: f64 = 1e-3;

/// `∂τ b_y` of the pair the packet sits beside: family 1 for `kx` nearer
/// `0`, family 2 for `kx` nearer `π/ax`. Zero when that pair is absent or
/// at a band edge.
fn dipole_rate(p: &ModelParams, d: &DriveProtocol, k: WaveVector, tau: f64) -> f64 {
    let qx = (k.x * p.a_x).rem_euclid(2.0 * PI);
    let family2 = (qx - PI).abs() < PI / 2.0;
    let lam = d.lambda(tau);
    let dl = d.derivative(tau);
    let (u, sign) = if family2 { (lam + p.delta_t, 1.0) } else { (lam - p.delta_t, -1.0) };
    let s = (1.0 - u) * (1.0 + u);
    if s > 0.0 {
        sign * dl / (p.a_y * s.sqrt())
    } else {
        0.0
    }
}

fn group_velocity(p: &ModelParams, d: &DriveProtocol, k: WaveVector, tau: f64, band: Band) -> (f64, f64) {
    let h = model::bloch_pauli(p, d, k, tau);
    let r = h.magnitude();
    let sign = match band {
        Band::Lower => -1.0,
        Band::Upper => 1.0,
    };
    let dir = |v: model::BlochMatrix| {
        let v = v.pauli();
        let proj = if r > 0.0 { (h.h1 * v.h1 + h.h2 * v.h2 + h.h3 * v.h3) / r } else { 0.0 };
        v.h0 + sign * proj
    };
    let vx = dir(model::velocity_x(p, d, k, tau));
    let vy = dir(model::BlochMatrix(model::velocity_y_pauli(p, k).to_matrix()));
    (vx, vy)
}

/// Integrates `ṙ = ∇ε − Ω_kt + E_eff × ê_z` at fixed `k` with RK4, where
/// `E_eff = −s ∂τ b` and `s = protocol_sign`.
///
/// `Ω_kt` is evaluated from single plaquettes in the `(kx, τ)` and `(ky, τ)`
/// planes. Passing a Lifshitz transition or a node is flagged, not fatal.
pub fn wave_packet_run(
    p: &ModelParams,
    d: &DriveProtocol,
    initial: WavePacketState,
    tau_max: f64,
    dt: f64,
    protocol_sign: i8,
) -> Result<PacketTrajectory, OracleError> {
    p.validate()?;
    if protocol_sign != 1 && protocol_sign != -1 {
        return Err(OracleError::InvalidArgument(format!("protocol_sign must be +1 or -1, got {protocol_sign}")));
    }
    if !(dt > 0.0 && tau_max >= 0.0 && tau_max.is_finite()) {
        return Err(OracleError::InvalidArgument(format!("need dt > 0 and finite tau_max >= 0, got {dt}, {tau_max}")));
    }
    let k = initial.k;
    let gap = model::band(p, d, k, 0.0).gap();
    if gap < 1e-8 {
        return Err(OracleError::NearDegeneracy { kx: k.x, ky: k.y, tau: 0.0, overlap: gap });
    }
    let s = protocol_sign as f64;
    let mut node_touched = false;
    let mut velocity = |tau: f64| -> [(f64, f64); 3] {
        let g = group_velocity(p, d, k, tau, initial.band);
        let mut omega = (0.0, 0.0);
        let cx =
            mixed_curvature(p, d, k, tau, WaveVector::new(CURVATURE_STEP_K, 0.0), CURVATURE_STEP_TAU, initial.band);
        let cy =
            mixed_curvature(p, d, k, tau, WaveVector::new(0.0, CURVATURE_STEP_K), CURVATURE_STEP_TAU, initial.band);
        match (cx, cy) {
            (Ok(x), Ok(y)) => omega = (-x, -y),
            _ => node_touched = true,
        }
        let field = (-s * dipole_rate(p, d, k, tau), 0.0);
        [g, omega, field]
    };

    let n = (tau_max / dt).ceil().max(1.0) as usize;
    let h = tau_max / n as f64;
    let mut parts = [(0.0, 0.0); 3];
    let mut samples = Vec::with_capacity(n + 1);
    samples.push((0.0, initial.r.0, initial.r.1));
    let mut next = velocity(0.0);
    for step in 0..n {
        let t = step as f64 * h;
        let a = next;
        let m = velocity(t + 0.5 * h);
        let b = velocity(t + h);
        for c in 0..3 {
            parts[c].0 += h / 6.0 * (a[c].0 + 4.0 * m[c].0 + b[c].0);
            parts[c].1 += h / 6.0 * (a[c].1 + 4.0 * m[c].1 + b[c].1);
        }
        next = b;
        let x = initial.r.0 + parts.iter().map(|q| q.0).sum::<f64>();
        let y = initial.r.1 + parts.iter().map(|q| q.1).sum::<f64>();
        samples.push((t + h, x, y));
    }
    let lifshitz_crossed = lifshitz_events(p, d, tau_max).iter().any(|e| e.kind == EventKind::Crossing);
    Ok(PacketTrajectory {
        samples,
        group: parts[0],
        curvature: parts[1],
        field: parts[2],
        lifshitz_crossed,
        node_touched,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::locate;

    fn packet(kx: f64, ky: f64) -> WavePacketState {
        WavePacketState { r: (0.0, 0.0), k: WaveVector::new(kx, ky), band: Band::Lower }
    }

    #[test]
    fn free_drift_without_field() {
        let p = ModelParams { tp_x: 0.2, ..ModelParams::default() };
        let d = DriveProtocol::constant(0.5);
        let init = WavePacketState { r: (1.0, -2.0), ..packet(0.7, 0.3) };
        let tr = wave_packet_run(&p, &d, init, 10.0, 0.1, 1).unwrap();
        let (vx, vy) = group_velocity(&p, &d, init.k, 0.0, Band::Lower);
        let last = tr.samples.last().unwrap();
        assert!((last.1 - (1.0 + 10.0 * vx)).abs() < 1e-12);
        assert!((last.2 - (-2.0 + 10.0 * vy)).abs() < 1e-12);
        assert_eq!(tr.field, (0.0, 0.0));
    }

    #[test]
    fn protocol_difference_isolates_field_term() {
        let p = ModelParams::default();
        let d = DriveProtocol::periodic(1.0, 0.2, 0.1);
        let init = packet(0.05, 0.4);
        let plus = wave_packet_run(&p, &d, init, 20.0, 0.05, 1).unwrap();
        let minus = wave_packet_run(&p, &d, init, 20.0, 0.05, -1).unwrap();
        let dx = plus.samples.last().unwrap().1 - minus.samples.last().unwrap().1;
        assert!((dx - 2.0 * plus.field.0).abs() < 1e-12);
        assert!(plus.field.0.abs() > 1e-4);
    }

    #[test]
    fn paired_nodes_have_cancelling_curvature() {
        let p = ModelParams::default();
        let d = DriveProtocol::periodic(1.0, 0.2, 0.1);
        let report = locate(d.lambda(0.0), p.delta_t, &p).unwrap();
        let pair: Vec<_> = report.points.iter().filter(|q| q.family == crate::dirac::Family::One).collect();
        assert_eq!(pair.len(), 2);
        let off = 0.05;
        let a = wave_packet_run(&p, &d, packet(pair[0].k.x + off, pair[0].k.y), 20.0, 0.05, 1).unwrap();
        let b = wave_packet_run(&p, &d, packet(pair[1].k.x + off, pair[1].k.y), 20.0, 0.05, 1).unwrap();
        assert!((a.curvature.0 + b.curvature.0).abs() < 1e-6);
        assert!((a.curvature.1 + b.curvature.1).abs() < 1e-6);
    }

    #[test]
    fn packet_on_node_is_rejected() {
        let p = ModelParams::default();
        let d = DriveProtocol::constant(1.32);
        assert!(wave_packet_run(&p, &d, packet(0.0, 0.0), 1.0, 0.1, 1).is_err());
        assert!(wave_packet_run(&p, &d, packet(0.3, 0.0), 1.0, 0.1, 2).is_err());
    }
}
