//! Scenario files: a single flat JSON object. Every key is optional and
//! falls back to [`ScenarioConfig::default`].

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anomalylab::model::{DriveKind, DriveProtocol, ModelParams, PertChannel};
use anomalylab::raman::{DepthRatio, RamanConfig, Species};
use serde::{Deserialize, Serialize};

use crate::kpath::KPath;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMode {
    #[default]
    None,
    Pump,
    Evolve,
}

impl fmt::Display for OracleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleMode::None => "none",
            OracleMode::Pump => "pump",
            OracleMode::Evolve => "evolve",
        })
    }
}

impl FromStr for OracleMode {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(OracleMode::None),
            "pump" => Ok(OracleMode::Pump),
            "evolve" => Ok(OracleMode::Evolve),
            _ => Err(CliError::Config(format!("unknown oracle mode {s:?} (expected none, pump or evolve)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    // Model.
    pub a_x: f64,
    pub a_y: f64,
    pub t: f64,
    pub delta_t: f64,
    pub tp_x: f64,
    pub tp_y: f64,
    pub pert_eps1: f64,
    pub pert_epsz: f64,
    pub pert_channel: PertChannel,

    // Drive: λ(τ) = lambda_amp cos(omega τ)/2 + lambda0/2.
    pub drive: DriveKind,
    pub lambda0: f64,
    pub lambda_amp: f64,
    pub omega: f64,

    // Time axis for current and drift.
    pub tau_max: f64,
    pub n_samples: usize,

    /// Densities `ρ` in `(a_x a_y)⁻¹` for the drift command.
    pub rho: Vec<f64>,
    pub drift_steps: usize,

    /// Side of the k-grid used by bands.
    pub grid: usize,
    /// Band path in reduced momenta; overrides `grid` when set.
    pub k_path: Option<KPath>,
    /// Drive time at which bands are evaluated.
    pub bands_tau: f64,

    pub oracle: OracleMode,
    /// Side of the oracle k-grid.
    pub oracle_grid: usize,
    /// Time step for the evolve oracle; chosen from the drive when absent.
    pub evolve_dt: Option<f64>,
    /// Relative tolerance between the pump oracle and the analytic current.
    pub pump_rtol: f64,
    /// Relative tolerance between the evolve oracle and the analytic current.
    pub evolve_rtol: f64,

    pub lambda_min: f64,
    pub lambda_max: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    pub resolution: usize,

    /// When set, the current command sweeps `δt` over
    /// `[delta_min, delta_max]` at this fixed time instead of sampling in τ.
    pub sweep_tau: Option<f64>,

    pub species: Option<Species>,
    pub depth_ratio: DepthRatio,
    pub wavelength_nm: f64,
    pub tau_coh: f64,
    pub calib_resolution: usize,

    pub out: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let m = ModelParams::default();
        let d = DriveProtocol::default();
        ScenarioConfig {
            a_x: m.a_x,
            a_y: m.a_y,
            t: m.t,
            delta_t: m.delta_t,
            tp_x: m.tp_x,
            tp_y: m.tp_y,
            pert_eps1: m.pert_eps1,
            pert_epsz: m.pert_epsz,
            pert_channel: m.pert_channel,
            drive: d.kind,
            lambda0: d.lambda0,
            lambda_amp: d.lambda_amp,
            omega: d.omega,
            tau_max: 100.0,
            n_samples: 1001,
            rho: vec![0.1, 0.05, 0.01],
            drift_steps: 1000,
            grid: 101,
            k_path: None,
            bands_tau: 0.0,
            oracle: OracleMode::None,
            oracle_grid: 100,
            evolve_dt: None,
            pump_rtol: 1e-3,
            evolve_rtol: 0.05,
            lambda_min: -3.0,
            lambda_max: 3.0,
            delta_min: 0.0,
            delta_max: 0.99,
            resolution: 400,
            sweep_tau: None,
            species: None,
            depth_ratio: DepthRatio::Bare,
            wavelength_nm: anomalylab::raman::DEFAULT_WAVELENGTH_NM,
            tau_coh: anomalylab::raman::DEFAULT_TAU_COH,
            calib_resolution: 101,
            out: None,
            manifest: None,
            threads: None,
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if !value.is_object() {
            return Err(CliError::Config("a scenario file must hold a JSON object".into()));
        }
        let cfg: ScenarioConfig = serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn model(&self) -> ModelParams {
        ModelParams {
            a_x: self.a_x,
            a_y: self.a_y,
            t: self.t,
            delta_t: self.delta_t,
            tp_x: self.tp_x,
            tp_y: self.tp_y,
            pert_eps1: self.pert_eps1,
            pert_epsz: self.pert_epsz,
            pert_channel: self.pert_channel,
        }
    }

    pub fn drive_protocol(&self) -> DriveProtocol {
        DriveProtocol { kind: self.drive, lambda0: self.lambda0, lambda_amp: self.lambda_amp, omega: self.omega }
    }

    pub fn raman(&self, species: Species) -> RamanConfig {
        RamanConfig {
            species,
            wavelength_nm: self.wavelength_nm,
            convention: self.depth_ratio,
            ..RamanConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        self.model().validate().map_err(|e| CliError::Config(e.to_string()))?;
        for (name, v) in [
            ("lambda0", self.lambda0),
            ("lambda_amp", self.lambda_amp),
            ("omega", self.omega),
            ("bands_tau", self.bands_tau),
            ("lambda_min", self.lambda_min),
            ("lambda_max", self.lambda_max),
            ("delta_min", self.delta_min),
            ("delta_max", self.delta_max),
            ("wavelength_nm", self.wavelength_nm),
            ("tau_coh", self.tau_coh),
            ("pump_rtol", self.pump_rtol),
            ("evolve_rtol", self.evolve_rtol),
        ] {
            if !v.is_finite() {
                return bad(format!("`{name}` must be finite"));
            }
        }
        if !(self.tau_max > 0.0 && self.tau_max.is_finite()) {
            return bad(format!("`tau_max` must be positive, got {}", self.tau_max));
        }
        if self.n_samples < 2 {
            return bad("`n_samples` must be at least 2".into());
        }
        if self.rho.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return bad("every `rho` must be positive".into());
        }
        if self.drift_steps < 100 {
            return bad("`drift_steps` must be at least 100".into());
        }
        if self.grid < 2 || self.resolution < 2 || self.calib_resolution < 2 {
            return bad("`grid`, `resolution` and `calib_resolution` must be at least 2".into());
        }
        if self.oracle_grid < 8 {
            return bad("`oracle_grid` must be at least 8".into());
        }
        if let Some(dt) = self.evolve_dt {
            if !(dt > 0.0 && dt <= anomalylab::oracle::MAX_DT) {
                return bad(format!("`evolve_dt` must lie in (0, 0.01], got {dt}"));
            }
        }
        if !(self.pump_rtol > 0.0 && self.evolve_rtol > 0.0) {
            return bad("oracle tolerances must be positive".into());
        }
        if self.lambda_min >= self.lambda_max {
            return bad("`lambda_min` must be below `lambda_max`".into());
        }
        if !(0.0 <= self.delta_min && self.delta_min < self.delta_max && self.delta_max < 1.0) {
            return bad("need 0 <= delta_min < delta_max < 1".into());
        }
        if let Some(t) = self.sweep_tau {
            if !t.is_finite() {
                return bad("`sweep_tau` must be finite".into());
            }
        }
        if !(self.wavelength_nm > 0.0 && self.tau_coh > 0.0) {
            return bad("`wavelength_nm` and `tau_coh` must be positive".into());
        }
        if self.threads == Some(0) {
            return bad("`threads` must be at least 1".into());
        }
        Ok(())
    }
}
