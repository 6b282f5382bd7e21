//! Independent numerical checks of the analytic current.
//!
//! * [`pump_current`]: adiabatic pumping from the Berry phase of the filled
//!   band, integrated over the Brillouin zone.
//! * [`evolve_filled_band`]: direct time evolution of every occupied Bloch
//!   state.
//! * [`wave_packet_run`]: semiclassical centre-of-mass motion of a packet.

mod berry;
mod evolve;
mod packet;

pub use berry::{
    berry_curvature_kt, curvature_bz_sum, mixed_curvature, pump_current, wilson_loop, PumpResult, WilsonJump, PUMP_SIGN,
};
pub use evolve::{default_dt, evolve_filled_band, EvolveTrace, MAX_DT, NORM_LIMIT};
pub use packet::{wave_packet_run, PacketTrajectory, WavePacketState};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelError, ModelParams, WaveVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("k-grid must be at least 8x8, got {0}x{1}")]
    GridTooSmall(usize, usize),
    #[error("near-degenerate overlap {overlap:e} at k = ({kx}, {ky}), tau = {tau}")]
    NearDegeneracy { kx: f64, ky: f64, tau: f64, overlap: f64 },
    #[error("time step {0} exceeds 0.01 T0")]
    StepTooLarge(f64),
    #[error("norm drifted by {drift:e} at tau = {tau}; reduce the time step")]
    NormDrift { tau: f64, drift: f64 },
    #[error("the filled band is not real: pert_epsz = {0} breaks the combined inversion and time-reversal symmetry")]
    BrokenSymmetry(f64),
    #[error("{0}")]
    InvalidArgument(String),
}

/// A uniform periodic `n_x × n_y` grid over the Brillouin zone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KGrid {
    pub n_x: usize,
    pub n_y: usize,
}

impl KGrid {
    pub fn new(n_x: usize, n_y: usize) -> Result<Self, OracleError> {
        let g = KGrid { n_x, n_y };
        g.validate()?;
        Ok(g)
    }

    pub fn square(n: usize) -> Result<Self, OracleError> {
        Self::new(n, n)
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if self.n_x < 8 || self.n_y < 8 {
            return Err(OracleError::GridTooSmall(self.n_x, self.n_y));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n_x * self.n_y
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Reduced momenta `kx·ax` of column `i`, in `[0, 2π)`.
    pub fn qx(&self, i: usize) -> f64 {
        2.0 * PI * i as f64 / self.n_x as f64
    }

    pub fn qy(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_y as f64
    }

    /// Row-major point `(i, j)` as a wave vector.
    pub fn point(&self, p: &ModelParams, i: usize, j: usize) -> WaveVector {
        WaveVector::new(self.qx(i) / p.a_x, self.qy(j) / p.a_y)
    }
}

/// Fixed-order pairwise summation, so results do not depend on how work
/// was split between threads.
pub(crate) fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => {
            let (a, b) = v.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}
