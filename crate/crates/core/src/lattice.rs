//! Real-space tight-binding Hamiltonian on a periodic `Lx × Ly` torus.
//!
//! Sites are indexed `ix + Lx·iy`, with the spin index fastest, so the
//! orbital `(site, s)` lives at row `2·site + s`. The hopping matrices are the
//! inverse Fourier transform of the Bloch form in [`crate::model`].

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::linalg::{Mat2, C64};
use crate::model::{self, DriveProtocol, ModelError, ModelParams, PertChannel, WaveVector};

#[derive(Debug, Clone)]
pub struct RealSpaceHamiltonian {
    pub lx: usize,
    pub ly: usize,
    pub matrix: DMatrix<C64>,
}

impl RealSpaceHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (&self.matrix - self.matrix.adjoint()).iter().all(|z| z.norm() <= tol)
    }

    /// All eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }
}

fn channel_matrix(c: PertChannel) -> Mat2 {
    match c {
        PertChannel::Sigma0 => Mat2::identity(),
        PertChannel::Sigma1 => Mat2::sigma1(),
        PertChannel::Sigma2 => Mat2::sigma2(),
    }
}

/// Hopping matrices `(on-site, +x̂, +ŷ)`; the `+ê` matrix multiplies
/// `c†_{j+ê} c_j`.
pub fn hopping_blocks(p: &ModelParams, lambda: f64) -> (Mat2, Mat2, Mat2) {
    let i = C64::new(0.0, 1.0);
    let onsite = Mat2::sigma2().scale_re(p.t * lambda) + Mat2::sigma3().scale_re(p.pert_epsz);
    let hop_x = Mat2::sigma1().scale(i * (0.5 * p.t)) - Mat2::sigma2().scale_re(0.5 * p.t * p.delta_t)
        + Mat2::identity().scale_re(p.tp_x);
    let hop_y = Mat2::identity().scale_re(p.tp_y) - Mat2::sigma2().scale_re(0.5 * p.t)
        + channel_matrix(p.pert_channel).scale(i * (0.5 * p.pert_eps1));
    (onsite, hop_x, hop_y)
}

pub fn build_real_space(
    p: &ModelParams,
    d: &DriveProtocol,
    lx: usize,
    ly: usize,
    tau: f64,
) -> Result<RealSpaceHamiltonian, ModelError> {
    if lx < 2 || ly < 2 {
        return Err(ModelError::LatticeTooSmall(lx, ly));
    }
    let (onsite, hop_x, hop_y) = hopping_blocks(p, d.lambda(tau));
    let n = 2 * lx * ly;
    let mut h = DMatrix::<C64>::zeros(n, n);
    let site = |ix: usize, iy: usize| (ix % lx) + lx * (iy % ly);
    let mut add = |to: usize, from: usize, m: &Mat2| {
        for a in 0..2 {
            for b in 0..2 {
                h[(2 * to + a, 2 * from + b)] += m.entry(a, b);
            }
        }
    };
    let (hx_dag, hy_dag) = (hop_x.adjoint(), hop_y.adjoint());
    for iy in 0..ly {
        for ix in 0..lx {
            let j = site(ix, iy);
            add(j, j, &onsite);
            let jx = site(ix + 1, iy);
            add(jx, j, &hop_x);
            add(j, jx, &hx_dag);
            let jy = site(ix, iy + 1);
            add(jy, j, &hop_y);
            add(j, jy, &hy_dag);
        }
    }
    Ok(RealSpaceHamiltonian { lx, ly, matrix: h })
}

/// Bloch eigenvalues over the `Lx × Ly` grid commensurate with the torus,
/// sorted ascending.
pub fn commensurate_bloch_spectrum(p: &ModelParams, d: &DriveProtocol, lx: usize, ly: usize, tau: f64) -> Vec<f64> {
    let mut e = Vec::with_capacity(2 * lx * ly);
    for my in 0..ly {
        for mx in 0..lx {
            let k =
                WaveVector::new(2.0 * PI * mx as f64 / (lx as f64 * p.a_x), 2.0 * PI * my as f64 / (ly as f64 * p.a_y));
            let b = model::band(p, d, k, tau);
            e.push(b.lower);
            e.push(b.upper);
        }
    }
    e.sort_by(f64::total_cmp);
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn fourier_equivalence_with_all_terms() {
        let p = ModelParams { tp_x: 0.13, tp_y: -0.07, pert_eps1: 0.04, pert_epsz: 0.02, ..ModelParams::default() };
        for channel in [PertChannel::Sigma0, PertChannel::Sigma1, PertChannel::Sigma2] {
            let p = ModelParams { pert_channel: channel, ..p };
            let d = DriveProtocol::default();
            let h = build_real_space(&p, &d, 4, 3, 7.0).unwrap();
            assert!(h.is_hermitian(1e-15));
            let diff = max_diff(&h.eigenvalues(), &commensurate_bloch_spectrum(&p, &d, 4, 3, 7.0));
            assert!(diff < 1e-10, "{channel:?}: {diff}");
        }
    }

    #[test]
    fn everything_off_is_zero() {
        let p = ModelParams { t: 0.0, delta_t: 0.0, ..ModelParams::default() };
        let h = build_real_space(&p, &DriveProtocol::constant(0.0), 3, 3, 0.0).unwrap();
        assert!(h.matrix.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn two_site_chain_wraps_onto_itself() {
        // With Ly = 2 each bond appears twice; the y-chain dispersion
        // 2 tp_y cos(q) at q ∈ {0, π} gives ±2 tp_y.
        let p = ModelParams { t: 0.0, delta_t: 0.0, tp_y: 0.3, ..ModelParams::default() };
        let h = build_real_space(&p, &DriveProtocol::constant(0.0), 2, 2, 0.0).unwrap();
        let e = h.eigenvalues();
        assert_eq!(e.len(), 8);
        for (i, v) in e.iter().enumerate() {
            let want = if i < 4 { -0.6 } else { 0.6 };
            assert!((v - want).abs() < 1e-14);
        }
    }

    #[test]
    fn too_small_is_rejected() {
        let r = build_real_space(&ModelParams::default(), &DriveProtocol::default(), 1, 4, 0.0);
        assert_eq!(r.unwrap_err(), ModelError::LatticeTooSmall(1, 4));
    }
}
