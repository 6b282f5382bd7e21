use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{pairwise_sum, KGrid, OracleError};
use crate::linalg::{PauliVector, Spinor, C64};
use crate::model::{self, DriveProtocol, ModelParams};

/// Largest step accepted by [`evolve_filled_band`].
pub const MAX_DT: f64 = 0.01;
/// Norm drift at which the integration is abandoned.
pub const NORM_LIMIT: f64 = 1e-6;
/// Upper bound on the number of recorded samples.
const MAX_RECORDS: usize = 2000;

/// Step used when the caller has no preference: small enough that RK4 keeps
/// the norm to about `1e-11` per `T0` and resolves the drive phase.
pub fn default_dt(d: &DriveProtocol) -> f64 {
    if d.is_static() {
        0.005
    } else {
        0.005f64.min(0.01 / d.omega.abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveTrace {
    /// `(tau, J)` with `J` in `t/a_y`.
    pub samples: Vec<(f64, f64)>,
    /// Largest `| ‖ψ‖ − 1 |` over all states and recorded times.
    pub max_norm_drift: f64,
    pub dt: f64,
}

#[inline]
fn minus_i_h(h: &PauliVector, v: &Spinor) -> Spinor {
    let w = h.apply(v);
    Spinor([C64::new(w.0[0].im, -w.0[0].re), C64::new(w.0[1].im, -w.0[1].re)])
}

#[inline]
fn rk4_step(h0: &PauliVector, l: [f64; 3], t: f64, psi: &Spinor, dt: f64) -> Spinor {
    let at = |lam: f64| PauliVector { h2: h0.h2 + t * lam, ..*h0 };
    let (ha, hm, hb) = (at(l[0]), at(l[1]), at(l[2]));
    let k1 = minus_i_h(&ha, psi);
    let k2 = minus_i_h(&hm, &psi.axpy(0.5 * dt, &k1));
    let k3 = minus_i_h(&hm, &psi.axpy(0.5 * dt, &k2));
    let k4 = minus_i_h(&hb, &psi.axpy(dt, &k3));
    let mut out = *psi;
    for c in 0..2 {
        out.0[c] += (k1.0[c] + (k2.0[c] + k3.0[c]) * 2.0 + k4.0[c]) * (dt / 6.0);
    }
    out
}

/// Evolves every lower-band state of `grid` from `τ = 0` with fixed-step
/// RK4 and records the mean band current `⟨∂H/∂(kx ax)⟩` averaged over the
/// grid, in `t/a_y`.
///
/// The step actually used is `tau_max / ceil(tau_max / dt)`. At most about
/// 2000 evenly spaced samples are recorded, always including both ends.
pub fn evolve_filled_band(
    p: &ModelParams,
    d: &DriveProtocol,
    grid: &KGrid,
    tau_max: f64,
    dt: f64,
) -> Result<EvolveTrace, OracleError> {
    grid.validate()?;
    p.validate()?;
    if dt.is_nan() || dt <= 0.0 {
        return Err(OracleError::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    if dt > MAX_DT * (1.0 + 1e-12) {
        return Err(OracleError::StepTooLarge(dt));
    }
    if !(tau_max >= 0.0 && tau_max.is_finite()) {
        return Err(OracleError::InvalidArgument(format!("tau_max must be finite and >= 0, got {tau_max}")));
    }
    let n_steps = (tau_max / dt).ceil().max(1.0) as usize;
    let h = tau_max / n_steps as f64;
    let stride = n_steps.div_ceil(MAX_RECORDS).max(1);
    let record_at: Vec<usize> = (0..=n_steps).filter(|s| s % stride == 0 || *s == n_steps).collect();
    let lambdas: Vec<[f64; 3]> = (0..n_steps)
        .map(|s| {
            let t = s as f64 * h;
            [d.lambda(t), d.lambda(t + 0.5 * h), d.lambda(t + h)]
        })
        .collect();

    struct Row {
        currents: Vec<f64>,
        drift: f64,
        failed: Option<(f64, f64)>,
    }

    let rows: Vec<Row> = (0..grid.n_y)
        .into_par_iter()
        .map(|j| {
            let statics: Vec<PauliVector> =
                (0..grid.n_x).map(|i| model::static_pauli(p, grid.point(p, i, j))).collect();
            let vels: Vec<PauliVector> = (0..grid.n_x)
                .map(|i| {
                    let v = model::velocity_x_pauli(p, grid.point(p, i, j));
                    PauliVector { h0: v.h0 / p.a_x, h1: v.h1 / p.a_x, h2: v.h2 / p.a_x, h3: v.h3 / p.a_x }
                })
                .collect();
            let lam0 = d.lambda(0.0);
            let mut psi: Vec<Spinor> = statics
                .iter()
                .map(|h| *model::eigensystem(&(*h + model::drive_pauli(p, lam0))).state(model::Band::Lower))
                .collect();
            let mut row = Row { currents: Vec::with_capacity(record_at.len()), drift: 0.0, failed: None };
            let mut next = 0;
            let record = |step: usize, psi: &[Spinor], row: &mut Row| {
                let vals: Vec<f64> = psi.iter().zip(&vels).map(|(s, v)| v.expectation(s)).collect();
                row.currents.push(pairwise_sum(&vals));
                let drift = psi.iter().map(|s| (s.norm() - 1.0).abs()).fold(0.0, f64::max);
                row.drift = row.drift.max(drift);
                if drift > NORM_LIMIT && row.failed.is_none() {
                    row.failed = Some((step as f64 * h, drift));
                }
            };
            #[allow(clippy::needless_range_loop)]
            for step in 0..=n_steps {
                if next < record_at.len() && record_at[next] == step {
                    record(step, &psi, &mut row);
                    next += 1;
                    if row.failed.is_some() {
                        break;
                    }
                }
                if step == n_steps {
                    break;
                }
                let l = lambdas[step];
                for (s, h0) in psi.iter_mut().zip(&statics) {
                    *s = rk4_step(h0, l, p.t, s, h);
                }
            }
            row
        })
        .collect();

    if let Some((tau, drift)) = rows.iter().filter_map(|r| r.failed).min_by(|a, b| a.0.total_cmp(&b.0)) {
        return Err(OracleError::NormDrift { tau, drift });
    }
    let n = grid.len() as f64;
    let samples = record_at
        .iter()
        .enumerate()
        .map(|(r, &step)| {
            let per_row: Vec<f64> = rows.iter().map(|row| row.currents[r]).collect();
            (step as f64 * h, pairwise_sum(&per_row) / n)
        })
        .collect();
    let max_norm_drift = rows.iter().map(|r| r.drift).fold(0.0, f64::max);
    Ok(EvolveTrace { samples, max_norm_drift, dt: h })
}
