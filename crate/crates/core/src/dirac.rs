//! Dirac-point phases, analytic node positions and a numerical gap scan.

use std::cmp::Ordering;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{self, DriveProtocol, ModelParams, WaveVector};

/// Gap below which a refined minimum counts as a node.
pub const NODE_GAP: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiracError {
    #[error("delta_t must lie in [0, 1), got {0}")]
    Domain(f64),
    #[error("gap scan needs grid_n >= 64, got {0}")]
    GridTooCoarse(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DiracPhase {
    Gapped,
    OnePairFamily1,
    TwoPairs,
    OnePairFamily2,
}

impl DiracPhase {
    pub fn n_pairs(self) -> usize {
        match self {
            DiracPhase::Gapped => 0,
            DiracPhase::OnePairFamily1 | DiracPhase::OnePairFamily2 => 1,
            DiracPhase::TwoPairs => 2,
        }
    }

    pub fn family1_active(self) -> bool {
        matches!(self, DiracPhase::OnePairFamily1 | DiracPhase::TwoPairs)
    }

    pub fn family2_active(self) -> bool {
        matches!(self, DiracPhase::OnePairFamily2 | DiracPhase::TwoPairs)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DiracPhase::Gapped => "Gapped",
            DiracPhase::OnePairFamily1 => "OnePairFamily1",
            DiracPhase::TwoPairs => "TwoPairs",
            DiracPhase::OnePairFamily2 => "OnePairFamily2",
        }
    }
}

impl std::fmt::Display for DiracPhase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DiracPhase {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Gapped" => Ok(DiracPhase::Gapped),
            "OnePairFamily1" => Ok(DiracPhase::OnePairFamily1),
            "TwoPairs" => Ok(DiracPhase::TwoPairs),
            "OnePairFamily2" => Ok(DiracPhase::OnePairFamily2),
            other => Err(format!("unknown phase `{other}`")),
        }
    }
}

/// Compares `a` with the exact real `b + c`, so boundary tests are not
/// shifted by the rounding of the sum.
fn cmp_sum(a: f64, b: f64, c: f64) -> Ordering {
    let s = b + c;
    let bv = s - c;
    let err = (b - bv) + (c - (s - bv));
    match a.total_cmp(&s) {
        Ordering::Equal => 0.0f64.total_cmp(&err),
        o => o,
    }
}

/// Phase of the `(λ, δt)` plane.
///
/// `λ = 1+δt` and `λ = 1−δt` belong to `OnePairFamily1`; the mirror images
/// `λ = −(1+δt)` and `λ = −(1−δt)` belong to `OnePairFamily2`.
pub fn classify(lambda: f64, delta_t: f64) -> Result<DiracPhase, DiracError> {
    if !(0.0..1.0).contains(&delta_t) {
        return Err(DiracError::Domain(delta_t));
    }
    let a = lambda.abs();
    Ok(if cmp_sum(a, 1.0, delta_t) == Ordering::Greater {
        DiracPhase::Gapped
    } else if cmp_sum(a, 1.0, -delta_t) == Ordering::Less {
        DiracPhase::TwoPairs
    } else if lambda > 0.0 {
        DiracPhase::OnePairFamily1
    } else {
        DiracPhase::OnePairFamily2
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    One,
    Two,
}

impl Family {
    pub fn index(self) -> u8 {
        match self {
            Family::One => 1,
            Family::Two => 2,
        }
    }
}

/// Chirality label of a node; a merged pair has none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chirality {
    Plus,
    Minus,
    Merged,
}

impl Chirality {
    pub fn sign(self) -> i8 {
        match self {
            Chirality::Plus => 1,
            Chirality::Minus => -1,
            Chirality::Merged => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiracPoint {
    pub k: WaveVector,
    pub family: Family,
    pub chirality: Chirality,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiracReport {
    pub phase: DiracPhase,
    pub points: Vec<DiracPoint>,
    /// Momentum dipoles `b1 = (0, ky1)` and `b2 = (0, −ky2)`, when present.
    pub b1: Option<WaveVector>,
    pub b2: Option<WaveVector>,
    /// Energy dipoles `[f(k+) − f(k−)]/2`.
    pub b0_1: Option<f64>,
    pub b0_2: Option<f64>,
}

/// `ky·ay` of the family-1 node, `None` when `|λ − δt| > 1`.
pub fn ky1_reduced(lambda: f64, delta_t: f64) -> Option<f64> {
    let c = lambda - delta_t;
    (c.abs() <= 1.0).then(|| c.acos())
}

/// `ky·ay` of the family-2 node, `None` when `|λ + δt| > 1`.
pub fn ky2_reduced(lambda: f64, delta_t: f64) -> Option<f64> {
    let c = lambda + delta_t;
    (c.abs() <= 1.0).then(|| c.acos())
}

fn push_pair(points: &mut Vec<DiracPoint>, family: Family, kx: f64, ky_plus: f64, merged: bool) {
    if merged {
        points.push(DiracPoint { k: WaveVector::new(kx, ky_plus), family, chirality: Chirality::Merged });
    } else {
        points.push(DiracPoint { k: WaveVector::new(kx, ky_plus), family, chirality: Chirality::Plus });
        points.push(DiracPoint { k: WaveVector::new(kx, -ky_plus), family, chirality: Chirality::Minus });
    }
}

/// Analytic node positions. Both families are reported whenever their
/// arccos exists, which includes a merged pair sitting on a phase boundary.
pub fn locate(lambda: f64, delta_t: f64, p: &ModelParams) -> Result<DiracReport, DiracError> {
    let phase = classify(lambda, delta_t)?;
    let mut report = DiracReport { phase, points: Vec::new(), b1: None, b2: None, b0_1: None, b0_2: None };
    let merged = |q: f64| q == 0.0 || q == PI;
    if let Some(q1) = ky1_reduced(lambda, delta_t) {
        let ky = q1 / p.a_y;
        push_pair(&mut report.points, Family::One, 0.0, ky, merged(q1));
        report.b1 = Some(WaveVector::new(0.0, ky));
        let f = |y| p.dispersion(WaveVector::new(0.0, y));
        report.b0_1 = Some(0.5 * (f(ky) - f(-ky)));
    }
    if let Some(q2) = ky2_reduced(lambda, delta_t) {
        let ky = q2 / p.a_y;
        let kx = PI / p.a_x;
        // Family 2 has k+ at −ky2.
        push_pair(&mut report.points, Family::Two, kx, -ky, merged(q2));
        report.b2 = Some(WaveVector::new(0.0, -ky));
        let f = |y| p.dispersion(WaveVector::new(kx, y));
        report.b0_2 = Some(0.5 * (f(-ky) - f(ky)));
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapMinimum {
    /// Position in the first zone, `kx·ax, ky·ay ∈ (−π, π]`.
    pub k: WaveVector,
    pub gap: f64,
}

fn wrap(q: f64) -> f64 {
    let w = (q + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

struct GapField<'a> {
    p: &'a ModelParams,
    static_shift: f64,
}

impl GapField<'_> {
    /// `|h|` at reduced momenta; the gap is twice this.
    fn half_gap(&self, qx: f64, qy: f64) -> f64 {
        let k = WaveVector::new(qx / self.p.a_x, qy / self.p.a_y);
        let mut h = model::static_pauli(self.p, k);
        h.h2 += self.static_shift;
        h.magnitude()
    }
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Coordinate-descent refinement of a coarse minimum inside `±h` windows.
fn refine(field: &GapField<'_>, mut qx: f64, mut qy: f64, h: f64) -> (f64, f64, f64) {
    let mut last = field.half_gap(qx, qy);
    for _ in 0..200 {
        qx = golden_section(|x| field.half_gap(x, qy), qx - h, qx + h, 1e-13);
        qy = golden_section(|y| field.half_gap(qx, y), qy - h, qy + h, 1e-13);
        let now = field.half_gap(qx, qy);
        if (last - now).abs() <= 1e-16 {
            last = now;
            break;
        }
        last = now;
    }
    (qx, qy, 2.0 * last)
}

/// All band touchings at time `tau`, sorted by `(kx, ky)`.
///
/// A coarse `grid_n × grid_n` search selects periodic local minima of the
/// gap; those that could hide a zero within one cell (by a Lipschitz bound
/// on `|h|`) are refined by alternating golden-section line searches.
pub fn gap_scan(p: &ModelParams, d: &DriveProtocol, tau: f64, grid_n: usize) -> Result<Vec<GapMinimum>, DiracError> {
    if grid_n < 64 {
        return Err(DiracError::GridTooCoarse(grid_n));
    }
    let field = GapField { p, static_shift: p.t * d.lambda(tau) };
    let n = grid_n;
    let h = 2.0 * PI / n as f64;
    let q = |i: usize| -PI + h * i as f64;
    let grid: Vec<Vec<f64>> =
        (0..n).into_par_iter().map(|iy| (0..n).map(|ix| field.half_gap(q(ix), q(iy))).collect()).collect();
    // |∇|h|| ≤ |∇h| ≤ t(1 + δ) + |ε1| in reduced units, per axis.
    let lipschitz = p.t.abs() * (1.0 + p.delta_t) + p.pert_eps1.abs() + 1e-12;
    let bound = lipschitz * h * 2f64.sqrt();
    let candidates: Vec<(usize, usize)> = (0..n)
        .flat_map(|iy| (0..n).map(move |ix| (ix, iy)))
        .filter(|&(ix, iy)| {
            let v = grid[iy][ix];
            if v > bound {
                return false;
            }
            for dy in [n - 1, 0, 1] {
                for dx in [n - 1, 0, 1] {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let w = grid[(iy + dy) % n][(ix + dx) % n];
                    // Ties broken by index so a flat valley yields one seed.
                    if w < v || (w == v && ((iy + dy) % n, (ix + dx) % n) < (iy, ix)) {
                        return false;
                    }
                }
            }
            true
        })
        .collect();
    let refined: Vec<(f64, f64, f64)> =
        candidates.par_iter().map(|&(ix, iy)| refine(&field, q(ix), q(iy), h)).collect();
    let mut out: Vec<GapMinimum> = Vec::new();
    for (qx, qy, gap) in refined {
        if gap >= NODE_GAP {
            continue;
        }
        let (qx, qy) = (wrap(qx), wrap(qy));
        let dup = out.iter().any(|m| {
            let dx = wrap(m.k.x * p.a_x - qx).abs();
            let dy = wrap(m.k.y * p.a_y - qy).abs();
            dx < 1e-6 && dy < 1e-6
        });
        if !dup {
            out.push(GapMinimum { k: WaveVector::new(qx / p.a_x, qy / p.a_y), gap });
        }
    }
    out.sort_by(|a, b| a.k.x.total_cmp(&b.k.x).then(a.k.y.total_cmp(&b.k.y)));
    Ok(out)
}
