//! Optical Raman lattice calibration.
//!
//! Energies are frequencies `E/h` in Hz, lengths are in nm. Depths written
//! with a tilde in the docs (`Ṽ`) are dimensionless, in units of the recoil
//! energy along the same axis.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Recoil frequency `E_R^x/h` of ⁸⁷Rb at 790.1 nm.
pub const RB87_RECOIL_HZ: f64 = 3.68e3;
/// Recoil frequency `E_R^x/h` of ²³Na at 790.1 nm.
pub const NA23_RECOIL_HZ: f64 = 13.9e3;
pub const DEFAULT_WAVELENGTH_NM: f64 = 790.1;
/// Measurement time in units of `ħ/t_x`, about the time for the centre of
/// mass to swing from minimum to maximum displacement.
pub const MEASUREMENT_TIME_T0: f64 = 10.0 * PI;
/// Default coherence time in seconds.
pub const DEFAULT_TAU_COH: f64 = 0.1;
/// Below this depth the tight-binding forms are unreliable.
pub const TIGHT_BINDING_DEPTH: f64 = 5.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RamanError {
    #[error("lattice depth must be positive and finite, got {name} = {value}")]
    Depth { name: &'static str, value: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown species {0:?} (expected rb87 or na23)")]
    UnknownSpecies(String),
    #[error("unknown depth-ratio convention {0:?} (expected bare or dimensionless)")]
    UnknownConvention(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Species {
    #[default]
    Rb87,
    Na23,
    /// Arbitrary atom given by its recoil frequency `E_R^x/h` in Hz.
    Custom(f64),
}

impl Species {
    pub fn recoil_hz(self) -> f64 {
        match self {
            Species::Rb87 => RB87_RECOIL_HZ,
            Species::Na23 => NA23_RECOIL_HZ,
            Species::Custom(e) => e,
        }
    }
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Species::Rb87 => f.write_str("rb87"),
            Species::Na23 => f.write_str("na23"),
            Species::Custom(e) => write!(f, "custom:{e}"),
        }
    }
}

impl FromStr for Species {
    type Err = RamanError;

    /// Accepts `rb87`, `na23` (any case) and `custom:<recoil Hz>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "rb87" | "87rb" => return Ok(Species::Rb87),
            "na23" | "23na" => return Ok(Species::Na23),
            _ => {}
        }
        if let Some(rest) = t.strip_prefix("custom:") {
            if let Ok(e) = rest.trim().parse::<f64>() {
                if e > 0.0 && e.is_finite() {
                    return Ok(Species::Custom(e));
                }
            }
        }
        Err(RamanError::UnknownSpecies(s.to_string()))
    }
}

/// How the depth ratio `l` in `V_L_y = l·V_L_x` is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DepthRatio {
    /// Ratio of depths in energy units, so `Ṽ_y = 4 l Ṽ_x`.
    #[default]
    Bare,
    /// Ratio of dimensionless depths, so `Ṽ_y = l Ṽ_x`.
    Dimensionless,
}

impl fmt::Display for DepthRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DepthRatio::Bare => "bare",
            DepthRatio::Dimensionless => "dimensionless",
        })
    }
}

impl FromStr for DepthRatio {
    type Err = RamanError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bare" => Ok(DepthRatio::Bare),
            "dimensionless" => Ok(DepthRatio::Dimensionless),
            _ => Err(RamanError::UnknownConvention(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RamanConfig {
    /// `Ṽ_L_x = V_L_x / E_R^x`.
    pub depth_x: f64,
    /// `Ṽ_R_x = V_R_x / E_R^x`.
    pub raman_x: f64,
    /// `V_R_y = m V_R_x`.
    pub m_ratio: f64,
    /// `V_L_y = l V_L_x`, read according to `convention`.
    pub l_ratio: f64,
    pub species: Species,
    pub wavelength_nm: f64,
    pub convention: DepthRatio,
}

impl Default for RamanConfig {
    fn default() -> Self {
        RamanConfig {
            depth_x: 5.0,
            raman_x: 1.0,
            m_ratio: 1.0,
            l_ratio: 1.0,
            species: Species::Rb87,
            wavelength_nm: DEFAULT_WAVELENGTH_NM,
            convention: DepthRatio::Bare,
        }
    }
}

impl RamanConfig {
    pub fn recoil_x(&self) -> f64 {
        self.species.recoil_hz()
    }

    /// `E_R^y = E_R^x / 4` since `λ_y = 2λ_x`.
    pub fn recoil_y(&self) -> f64 {
        self.recoil_x() / 4.0
    }

    /// `Ṽ_L_y`.
    pub fn depth_y(&self) -> f64 {
        match self.convention {
            DepthRatio::Bare => 4.0 * self.l_ratio * self.depth_x,
            DepthRatio::Dimensionless => self.l_ratio * self.depth_x,
        }
    }

    pub fn lattice_x(&self) -> f64 {
        self.recoil_x() * self.depth_x
    }

    pub fn lattice_y(&self) -> f64 {
        self.recoil_y() * self.depth_y()
    }

    pub fn raman_strength_x(&self) -> f64 {
        self.recoil_x() * self.raman_x
    }

    pub fn raman_strength_y(&self) -> f64 {
        self.m_ratio * self.raman_strength_x()
    }

    /// `a_x = λ/2`.
    pub fn a_x(&self) -> f64 {
        self.wavelength_nm / 2.0
    }

    /// `a_y = 2 a_x`.
    pub fn a_y(&self) -> f64 {
        2.0 * self.a_x()
    }

    fn check_depths(&self) -> Result<(f64, f64), RamanError> {
        let vx = self.depth_x;
        let vy = self.depth_y();
        if !(vx > 0.0 && vx.is_finite()) {
            return Err(RamanError::Depth { name: "depth_x", value: vx });
        }
        if !(vy > 0.0 && vy.is_finite()) {
            return Err(RamanError::Depth { name: "depth_y", value: vy });
        }
        Ok((vx, vy))
    }
}

/// Lattice potential `V_L` (real) and Raman potential `V_R` (imaginary) at
/// `(x, y)` in nm.
pub fn potentials(cfg: &RamanConfig, x: f64, y: f64) -> (f64, Complex64) {
    let (ax, ay) = (cfg.a_x(), cfg.a_y());
    let cx = (PI * x / ax).cos();
    let cy = (PI * y / ay).cos();
    let vl = cfg.lattice_x() * cx * cx + cfg.lattice_y() * cy * cy;
    let vr = cfg.raman_strength_x() * cx + cfg.raman_strength_y() * ((2.0 * PI * y / ay).cos() + 1.0);
    (vl, Complex64::new(0.0, vr))
}

/// Site centres `x_i = (1/2 + i) a_x`.
pub fn site_x(cfg: &RamanConfig, i: i64) -> f64 {
    (0.5 + i as f64) * cfg.a_x()
}

/// Site centres `y_j = (1/2 + j) a_y`.
pub fn site_y(cfg: &RamanConfig, j: i64) -> f64 {
    (0.5 + j as f64) * cfg.a_y()
}

/// Harmonic-approximation Wannier function of a lattice of depth `depth`
/// and spacing `a`, at offset `s` from the site centre. Normalized to one.
pub fn wannier(depth: f64, a: f64, s: f64) -> f64 {
    depth.powf(0.125) * (PI / (a * a)).powf(0.25) * (-0.5 * PI * PI * depth.sqrt() * s * s / (a * a)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoppingSet {
    pub t_x: f64,
    pub t_y: f64,
    pub delta_t: f64,
    pub tp_x: f64,
    pub tp_y: f64,
}

impl HoppingSet {
    /// `δ_t / t_x`; NaN when `t_x = 0`.
    pub fn delta_ratio(&self) -> f64 {
        self.delta_t / self.t_x
    }

    /// Whether `0 ≤ δ_t < t_x`.
    pub fn in_model_regime(&self) -> bool {
        self.delta_t >= 0.0 && self.delta_t < self.t_x
    }
}

/// `exp(−π²√Ṽ/4)`, the overlap of neighbouring harmonic Wannier functions.
fn overlap(v: f64) -> f64 {
    (-PI * PI * v.sqrt() / 4.0).exp()
}

/// Normal hopping `t′ / E_R` for a lattice of dimensionless depth `v`.
pub fn normal_hopping(v: f64) -> f64 {
    4.0 / PI.sqrt() * v.powf(0.75) * (-2.0 * v.sqrt()).exp()
}

static SHALLOW_WARNED: AtomicBool = AtomicBool::new(false);

/// Spin-flip and normal hopping amplitudes in Hz.
pub fn hoppings(cfg: &RamanConfig) -> Result<HoppingSet, RamanError> {
    let (vx, vy) = cfg.check_depths()?;
    if (vx < TIGHT_BINDING_DEPTH || vy < TIGHT_BINDING_DEPTH) && !SHALLOW_WARNED.swap(true, Ordering::Relaxed) {
        log::warn!("lattice depth below {TIGHT_BINDING_DEPTH} E_R (Ṽx = {vx}, Ṽy = {vy}); tight-binding forms are rough (reported once)");
    }
    let vrx = cfg.raman_strength_x();
    let vry = cfg.raman_strength_y();
    let ey = (-1.0 / vy.sqrt()).exp();
    Ok(HoppingSet {
        t_x: vrx * overlap(vx) * (-1.0 / (4.0 * vx.sqrt())).exp(),
        delta_t: vry * overlap(vx) * (1.0 - ey),
        t_y: vry * overlap(vy) * (1.0 + ey),
        tp_x: cfg.recoil_x() * normal_hopping(vx),
        tp_y: cfg.recoil_y() * normal_hopping(vy),
    })
}

fn depth_y_for(cfg: &RamanConfig, l: f64) -> f64 {
    RamanConfig { l_ratio: l, ..*cfg }.depth_y()
}

/// The `m` that makes `t_y = t_x` for depth ratio `l`, other inputs taken
/// from `cfg`.
pub fn equal_hopping_m(cfg: &RamanConfig, l: f64) -> Result<f64, RamanError> {
    let vx = cfg.check_depths()?.0;
    let vy = depth_y_for(cfg, l);
    if !(vy > 0.0 && vy.is_finite()) {
        return Err(RamanError::Depth { name: "depth_y", value: vy });
    }
    // Exponents combined so deep lattices do not underflow.
    let log_m = -PI * PI * vx.sqrt() / 4.0 - 1.0 / (4.0 * vx.sqrt()) + PI * PI * vy.sqrt() / 4.0
        - (-1.0 / vy.sqrt()).exp().ln_1p();
    Ok(log_m.exp())
}

/// `δ_t / t_x` along the `t_y = t_x` curve at depth ratio `l`.
pub fn equal_hopping_ratio(cfg: &RamanConfig, l: f64) -> Result<f64, RamanError> {
    let m = equal_hopping_m(cfg, l)?;
    let vx = cfg.depth_x;
    let vy = depth_y_for(cfg, l);
    Ok(m * -(-1.0 / vy.sqrt()).exp_m1() * (1.0 / (4.0 * vx.sqrt())).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EqualHoppingSolution {
    pub m_ratio: f64,
    pub l_ratio: f64,
}

/// Upper edge of the `(m, l)` search box.
pub const RATIO_BOX: f64 = 10.0;
const SCAN_POINTS: usize = 4000;

/// Points on the `t_y = t_x` curve with `δ_t / t_x = target`, searched over
/// `m, l ∈ (0, 10]`. Empty when there is none.
pub fn solve_equal_hopping(cfg: &RamanConfig, target: f64) -> Result<Vec<EqualHoppingSolution>, RamanError> {
    if !(target > 0.0 && target < 1.0) {
        return Err(RamanError::InvalidArgument(format!("target ratio must lie in (0, 1), got {target}")));
    }
    cfg.check_depths()?;
    let g = |l: f64| equal_hopping_ratio(cfg, l).map(|r| r - target);
    let mut out = Vec::new();
    let mut prev_l = RATIO_BOX / SCAN_POINTS as f64;
    let mut prev_g = g(prev_l)?;
    for i in 2..=SCAN_POINTS {
        let l = RATIO_BOX * i as f64 / SCAN_POINTS as f64;
        let gl = g(l)?;
        if prev_g == 0.0 || prev_g.signum() != gl.signum() {
            let (mut lo, mut hi, mut glo) = (prev_l, l, prev_g);
            if prev_g != 0.0 {
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let gm = g(mid)?;
                    if gm == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if gm.signum() == glo.signum() {
                        lo = mid;
                        glo = gm;
                    } else {
                        hi = mid;
                    }
                }
            }
            let root = if g(lo)?.abs() <= g(hi)?.abs() { lo } else { hi };
            let m = equal_hopping_m(cfg, root)?;
            if m > 0.0 && m <= RATIO_BOX {
                out.push(EqualHoppingSolution { m_ratio: m, l_ratio: root });
            }
        }
        prev_l = l;
        prev_g = gl;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityMap {
    pub species: Species,
    pub depths: Vec<f64>,
    pub ramans: Vec<f64>,
    /// `t_x` in kHz, indexed `[depth][raman]`.
    pub t_x_khz: Vec<Vec<f64>>,
    pub feasible: Vec<Vec<bool>>,
}

/// Smallest `t_x` in Hz whose measurement time fits in `tau_coh` seconds.
pub fn feasibility_threshold_hz(tau_coh: f64) -> f64 {
    MEASUREMENT_TIME_T0 / (2.0 * PI * tau_coh)
}

/// `t_x` over a grid of `(Ṽ_L_x, Ṽ_R_x)` with the remaining inputs from
/// `cfg`, flagged feasible where `31.4 ħ/t_x ≤ tau_coh`.
pub fn feasibility_map(
    cfg: &RamanConfig,
    depths: &[f64],
    ramans: &[f64],
    tau_coh: f64,
) -> Result<FeasibilityMap, RamanError> {
    if !(tau_coh > 0.0 && tau_coh.is_finite()) {
        return Err(RamanError::InvalidArgument(format!("coherence time must be positive, got {tau_coh}")));
    }
    if let Some(&r) = ramans.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
        return Err(RamanError::InvalidArgument(format!("Raman strength must be finite and >= 0, got {r}")));
    }
    let threshold = feasibility_threshold_hz(tau_coh);
    let rows: Vec<Vec<f64>> = depths
        .par_iter()
        .map(|&v| {
            ramans
                .iter()
                .map(|&r| hoppings(&RamanConfig { depth_x: v, raman_x: r, ..*cfg }).map(|h| h.t_x))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let feasible = rows.iter().map(|row| row.iter().map(|&t| t > 0.0 && t >= threshold).collect()).collect();
    let t_x_khz = rows.into_iter().map(|row| row.into_iter().map(|t| t * 1e-3).collect()).collect();
    Ok(FeasibilityMap { species: cfg.species, depths: depths.to_vec(), ramans: ramans.to_vec(), t_x_khz, feasible })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> RamanConfig {
        RamanConfig::default()
    }

    #[test]
    fn raman_potential_at_origin() {
        let c = RamanConfig { m_ratio: 0.7, ..cfg() };
        let (_, vr) = potentials(&c, 0.0, 0.0);
        let expect = c.raman_strength_x() + 2.0 * c.raman_strength_y();
        assert!((vr.im - expect).abs() < 1e-9 * expect);
        assert_eq!(vr.re, 0.0);
    }

    #[test]
    fn lattice_minima_sit_on_sites() {
        let c = cfg();
        for i in -3..3 {
            let x = site_x(&c, i);
            let (v0, _) = potentials(&c, x, site_y(&c, 0));
            for dx in [-1.0, 1.0] {
                assert!(potentials(&c, x + dx, site_y(&c, 0)).0 > v0);
            }
            assert!(v0.abs() < 1e-6 * c.lattice_x());
        }
    }

    #[test]
    fn hopping_regression() {
        let c = RamanConfig { depth_x: 5.0, ..cfg() };
        let h = hoppings(&c).unwrap();
        let tx = h.t_x / c.raman_strength_x();
        let expect = (-PI * PI * 5f64.sqrt() / 4.0 - 1.0 / (4.0 * 5f64.sqrt())).exp();
        assert!((tx - expect).abs() < 1e-15);
        assert!((tx - 0.0035919).abs() < 1e-7);
        assert!((h.tp_x / c.recoil_x() - 0.086196).abs() < 1e-6);
    }

    #[test]
    fn deep_y_lattice_limits() {
        let h = hoppings(&RamanConfig { l_ratio: 1e6, ..cfg() }).unwrap();
        assert!(h.delta_t / cfg().raman_strength_y() < 1e-3);
        let excess: Vec<f64> = [1.0, 10.0, 100.0]
            .iter()
            .map(|&l| {
                let c = RamanConfig { l_ratio: l, ..cfg() };
                hoppings(&c).unwrap().t_y / (c.raman_strength_y() * overlap(c.depth_y())) - 1.0
            })
            .collect();
        // (1 + e^{−1/√Ṽy}) tends to 2, not 1.
        assert!(excess.windows(2).all(|w| w[1] > w[0]), "{excess:?}");
        assert!(excess[2] > 0.97 && excess[2] < 1.0);
    }

    #[test]
    fn nonpositive_depths_are_rejected() {
        assert!(matches!(hoppings(&RamanConfig { depth_x: 0.0, ..cfg() }), Err(RamanError::Depth { .. })));
        assert!(matches!(hoppings(&RamanConfig { l_ratio: -1.0, ..cfg() }), Err(RamanError::Depth { .. })));
    }

    #[test]
    fn convention_changes_y_depth_by_four() {
        let bare = RamanConfig { l_ratio: 0.5, ..cfg() };
        let dimless = RamanConfig { convention: DepthRatio::Dimensionless, ..bare };
        assert_eq!(bare.depth_y(), 4.0 * dimless.depth_y());
    }

    #[test]
    fn equal_hopping_target() {
        let c = cfg();
        let sols = solve_equal_hopping(&c, 0.32).unwrap();
        assert!(!sols.is_empty());
        for s in sols {
            let h = hoppings(&RamanConfig { m_ratio: s.m_ratio, l_ratio: s.l_ratio, ..c }).unwrap();
            assert!(((h.t_y - h.t_x) / h.t_x).abs() < 1e-10);
            assert!((h.delta_ratio() - 0.32).abs() < 1e-10);
        }
        assert!(solve_equal_hopping(&c, 1.0).is_err());
        assert!(solve_equal_hopping(&c, 0.0).is_err());
    }

    #[test]
    fn smaller_targets_need_smaller_m() {
        let c = cfg();
        let ms: Vec<f64> =
            [0.5, 0.32, 0.1, 0.02].iter().map(|&t| solve_equal_hopping(&c, t).unwrap()[0].m_ratio).collect();
        assert!(ms.windows(2).all(|w| w[1] < w[0]), "{ms:?}");
    }

    #[test]
    fn feasibility_threshold_is_fifty_hertz() {
        assert!((feasibility_threshold_hz(0.1) - 50.0).abs() < 1e-12);
        let rb = cfg();
        let na = RamanConfig { species: Species::Na23, ..rb };
        let grid = [4.0, 5.0, 6.0];
        let ramans = [0.0, 0.5, 1.0];
        let a = feasibility_map(&rb, &grid, &ramans, 0.1).unwrap();
        let b = feasibility_map(&na, &grid, &ramans, 0.1).unwrap();
        assert!(a.t_x_khz.iter().all(|r| r[0] == 0.0) && a.feasible.iter().all(|r| !r[0]));
        assert!(b.feasible[0][2]);
        for (ra, rb) in a.feasible.iter().zip(&b.feasible) {
            assert!(ra.iter().zip(rb).all(|(x, y)| !x || *y));
        }
    }

    #[test]
    fn species_parse() {
        assert_eq!("Rb87".parse::<Species>().unwrap(), Species::Rb87);
        assert_eq!("na23".parse::<Species>().unwrap(), Species::Na23);
        assert_eq!("custom:1000".parse::<Species>().unwrap(), Species::Custom(1000.0));
        assert!("k40".parse::<Species>().is_err());
        assert!("custom:-1".parse::<Species>().is_err());
    }
}
