use std::f64::consts::PI;

use anomalylab::dirac::{self, classify};
use anomalylab::model::{self, DriveProtocol, ModelParams, WaveVector};
use anomalylab::oracle::{self, KGrid};
use anomalylab::raman::{self, RamanConfig, Species};
use anomalylab::response::{self, ResponseError};
use rayon::prelude::*;

use crate::config::{OracleMode, ScenarioConfig};
use crate::output::{Cell, Table};
use crate::CliError;

/// Distance in `λ` below which oracle comparisons are skipped: the pump's
/// finite difference in time straddles the band edge there.
pub const EDGE_MARGIN: f64 = 1e-3;
/// Measurement time in `T0` for the secondary feasibility mask.
pub const MIN_MEASUREMENT_T0: f64 = 2.0;

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

/// Distance of `λ` from the nearest of `±(1 ± δt)`.
pub fn edge_distance(lambda: f64, delta_t: f64) -> f64 {
    [1.0 + delta_t, 1.0 - delta_t, -(1.0 - delta_t), -(1.0 + delta_t)]
        .iter()
        .map(|b| (lambda - b).abs())
        .fold(f64::INFINITY, f64::min)
}

pub fn cmd_phase_diagram(cfg: &ScenarioConfig) -> Result<Table, CliError> {
    let lambdas = linspace(cfg.lambda_min, cfg.lambda_max, cfg.resolution);
    let deltas = linspace(cfg.delta_min, cfg.delta_max, cfg.resolution);
    let mut t = Table::new("phase-diagram", &["lambda", "delta_t", "phase", "n_pairs"]);
    for &d in &deltas {
        for &l in &lambdas {
            let ph = classify(l, d).map_err(config_err)?;
            t.push(vec![l.into(), d.into(), ph.as_str().into(), ph.n_pairs().into()]);
        }
    }
    Ok(t)
}

/// Band energies on the configured k-path, or on a `grid × grid` mesh of
/// the Brillouin zone followed by one row per located Dirac point.
pub fn cmd_bands(cfg: &ScenarioConfig) -> Result<Table, CliError> {
    let p = cfg.model();
    let d = cfg.drive_protocol();
    let tau = cfg.bands_tau;
    let ks: Vec<WaveVector> = match &cfg.k_path {
        Some(path) => path.sample(&p),
        None => {
            let n = cfg.grid;
            let (gx, gy) = p.reciprocal();
            let mut ks: Vec<WaveVector> = (0..n)
                .flat_map(|j| {
                    (0..n).map(move |i| {
                        WaveVector::new(-0.5 * gx + gx * i as f64 / n as f64, -0.5 * gy + gy * j as f64 / n as f64)
                    })
                })
                .collect();
            let report = dirac::locate(d.lambda(tau), p.delta_t, &p).map_err(config_err)?;
            ks.extend(report.points.iter().map(|q| q.k));
            ks
        }
    };
    let rows: Vec<Vec<Cell>> = ks
        .par_iter()
        .map(|&k| {
            let b = model::band(&p, &d, k, tau);
            vec![k.x.into(), k.y.into(), b.lower.into(), b.upper.into(), b.gap().into()]
        })
        .collect();
    let mut t = Table::new("bands", &["kx", "ky", "e_minus", "e_plus", "gap"]);
    t.rows = rows;
    Ok(t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSummary {
    pub mode: OracleMode,
    pub compared: usize,
    pub skipped: usize,
    pub max_rel_error: f64,
    pub tolerance: f64,
}

impl OracleSummary {
    pub fn passed(&self) -> bool {
        self.compared > 0 && self.max_rel_error <= self.tolerance
    }
}

#[derive(Debug, Clone)]
pub struct CurrentOutput {
    pub table: Table,
    pub oracle: Option<OracleSummary>,
}

impl CurrentOutput {
    /// Turns a failed oracle comparison into an error.
    pub fn check(&self) -> Result<(), CliError> {
        match &self.oracle {
            Some(s) if !s.passed() => Err(CliError::Oracle(format!(
                "{:?} oracle: max relative error {:.3e} over {} points exceeds {:.1e}",
                s.mode, s.max_rel_error, s.compared, s.tolerance
            ))),
            _ => Ok(()),
        }
    }
}

fn current_cells(r: &Result<response::CurrentSample, ResponseError>) -> [f64; 3] {
    match r {
        Ok(s) => [s.j_minus, s.j_plus, s.j_total],
        Err(_) => [f64::NAN; 3],
    }
}

struct Comparison {
    worst: f64,
    compared: usize,
    skipped: usize,
}

fn compare(pairs: impl Iterator<Item = Option<(f64, f64)>>, floor: f64) -> Comparison {
    let mut c = Comparison { worst: 0.0, compared: 0, skipped: 0 };
    for pair in pairs {
        match pair {
            Some((a, o)) if a.is_finite() && o.is_finite() && a.abs() > floor => {
                c.compared += 1;
                c.worst = c.worst.max(((o - a) / a).abs());
            }
            _ => c.skipped += 1,
        }
    }
    c
}

/// Current trace in `τ`, or a `δt` sweep at fixed `τ` when `sweep_tau` is
/// set. With an oracle, adds `J_oracle` and compares it to `J_total` away
/// from band edges.
pub fn cmd_current(cfg: &ScenarioConfig) -> Result<CurrentOutput, CliError> {
    match cfg.sweep_tau {
        Some(tau) => current_sweep(cfg, tau),
        None => current_trace(cfg),
    }
}

fn pump_grid(cfg: &ScenarioConfig) -> Result<KGrid, CliError> {
    KGrid::square(cfg.oracle_grid).map_err(config_err)
}

fn pump_at(p: &ModelParams, d: &DriveProtocol, tau: f64, grid: &KGrid) -> Result<Option<f64>, CliError> {
    let r = oracle::pump_current(p, d, tau, grid).map_err(|e| CliError::Oracle(e.to_string()))?;
    Ok((!r.partial).then_some(r.current))
}

fn current_trace(cfg: &ScenarioConfig) -> Result<CurrentOutput, CliError> {
    let p = cfg.model();
    let d = cfg.drive_protocol();
    let taus = linspace(0.0, cfg.tau_max, cfg.n_samples);
    let analytic: Vec<_> = taus.par_iter().map(|&t| response::analytic_current(&p, &d, t)).collect();
    if let Some(Err(e @ ResponseError::Dirac(_))) = analytic.first() {
        return Err(config_err(e));
    }
    let near_edge: Vec<bool> = taus.iter().map(|&t| edge_distance(d.lambda(t), p.delta_t) < EDGE_MARGIN).collect();

    let (oracle_col, summary): (Option<Vec<f64>>, Option<OracleSummary>) = match cfg.oracle {
        OracleMode::None => (None, None),
        OracleMode::Pump => {
            let grid = pump_grid(cfg)?;
            let vals: Vec<Option<f64>> = taus.iter().map(|&t| pump_at(&p, &d, t, &grid)).collect::<Result<_, _>>()?;
            let c = compare(
                vals.iter().zip(&analytic).zip(&near_edge).map(|((o, a), &edge)| match (o, a) {
                    (Some(o), Ok(a)) if !edge => Some((a.j_total, *o)),
                    _ => None,
                }),
                1e-14,
            );
            let col = vals.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect();
            (Some(col), Some(summary(OracleMode::Pump, c, cfg.pump_rtol)))
        }
        OracleMode::Evolve => {
            let grid = pump_grid(cfg)?;
            let dt = cfg.evolve_dt.unwrap_or_else(|| oracle::default_dt(&d));
            let trace = oracle::evolve_filled_band(&p, &d, &grid, cfg.tau_max, dt)
                .map_err(|e| CliError::Oracle(e.to_string()))?;
            let col: Vec<f64> = taus.iter().map(|&t| interpolate(&trace.samples, t)).collect();
            let peak = analytic.iter().filter_map(|a| a.as_ref().ok()).map(|a| a.j_total.abs()).fold(0.0, f64::max);
            let c = compare(
                col.iter().zip(&analytic).zip(&near_edge).map(|((o, a), &edge)| match a {
                    Ok(a) if !edge => Some((a.j_total, *o)),
                    _ => None,
                }),
                1e-3 * peak,
            );
            (Some(col), Some(summary(OracleMode::Evolve, c, cfg.evolve_rtol)))
        }
    };

    let mut header = vec!["tau", "lambda", "J_minus", "J_plus", "J_total"];
    if oracle_col.is_some() {
        header.push("J_oracle");
    }
    let mut table = Table::new("current", &header);
    for (i, &t) in taus.iter().enumerate() {
        let [jm, jp, jt] = current_cells(&analytic[i]);
        let mut row: Vec<Cell> = vec![t.into(), d.lambda(t).into(), jm.into(), jp.into(), jt.into()];
        if let Some(col) = &oracle_col {
            row.push(col[i].into());
        }
        table.push(row);
    }
    Ok(CurrentOutput { table, oracle: summary })
}

fn summary(mode: OracleMode, c: Comparison, tolerance: f64) -> OracleSummary {
    OracleSummary { mode, compared: c.compared, skipped: c.skipped, max_rel_error: c.worst, tolerance }
}

/// Linear interpolation in a time-ordered sample list.
fn interpolate(samples: &[(f64, f64)], t: f64) -> f64 {
    let i = samples.partition_point(|s| s.0 < t);
    if i == 0 {
        return samples.first().map_or(f64::NAN, |s| s.1);
    }
    if i == samples.len() {
        return samples.last().unwrap().1;
    }
    let (a, b) = (samples[i - 1], samples[i]);
    a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
}

fn current_sweep(cfg: &ScenarioConfig, tau: f64) -> Result<CurrentOutput, CliError> {
    let d = cfg.drive_protocol();
    let deltas = linspace(cfg.delta_min, cfg.delta_max, cfg.resolution);
    let params: Vec<ModelParams> = deltas.iter().map(|&dt| ModelParams { delta_t: dt, ..cfg.model() }).collect();
    let analytic: Vec<_> = params.par_iter().map(|p| response::analytic_current(p, &d, tau)).collect();
    let lambda = d.lambda(tau);
    let (oracle_col, summary) = match cfg.oracle {
        OracleMode::None => (None, None),
        OracleMode::Evolve => {
            return Err(CliError::Config("the evolve oracle is not available for a delta_t sweep".into()));
        }
        OracleMode::Pump => {
            let grid = pump_grid(cfg)?;
            let vals: Vec<Option<f64>> = params.iter().map(|p| pump_at(p, &d, tau, &grid)).collect::<Result<_, _>>()?;
            let c = compare(
                vals.iter().zip(&analytic).zip(&deltas).map(|((o, a), &dt)| match (o, a) {
                    (Some(o), Ok(a)) if edge_distance(lambda, dt) >= EDGE_MARGIN => Some((a.j_total, *o)),
                    _ => None,
                }),
                1e-14,
            );
            let col = vals.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect::<Vec<_>>();
            (Some(col), Some(summary(OracleMode::Pump, c, cfg.pump_rtol)))
        }
    };
    let mut header = vec!["delta_t", "tau", "lambda", "J_minus", "J_plus", "J_total", "n_pairs"];
    if oracle_col.is_some() {
        header.push("J_oracle");
    }
    let mut table = Table::new("current-sweep", &header);
    for (i, &dt) in deltas.iter().enumerate() {
        let [jm, jp, jt] = current_cells(&analytic[i]);
        let n_pairs = classify(lambda, dt).map_err(config_err)?.n_pairs();
        let mut row: Vec<Cell> =
            vec![dt.into(), tau.into(), lambda.into(), jm.into(), jp.into(), jt.into(), n_pairs.into()];
        if let Some(col) = &oracle_col {
            row.push(col[i].into());
        }
        table.push(row);
    }
    Ok(CurrentOutput { table, oracle: summary })
}

/// `δt` in `[lo, hi]` at which the phase at time `tau` changes, found by
/// bisection to `tol`. `None` if the phase is the same at both ends.
pub fn locate_phase_change(d: &DriveProtocol, tau: f64, lo: f64, hi: f64, tol: f64) -> Option<f64> {
    let lambda = d.lambda(tau);
    let phase = |dt: f64| classify(lambda, dt).ok();
    let (mut a, mut b) = (lo, hi);
    let pa = phase(a)?;
    if phase(b)? == pa {
        return None;
    }
    while b - a > tol {
        let m = 0.5 * (a + b);
        if phase(m)? == pa {
            a = m;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// Centre-of-mass drift per density, each followed by the `δt = 0`
/// control. Columns `rho,delta_t,tau,x_c`.
pub fn cmd_drift(cfg: &ScenarioConfig) -> Result<Table, CliError> {
    let p = cfg.model();
    let d = cfg.drive_protocol();
    let control = ModelParams { delta_t: 0.0, ..p };
    let mut t = Table::new("drift", &["rho", "delta_t", "tau", "x_c"]);
    for &rho in &cfg.rho {
        let mut variants = vec![p];
        if p.delta_t != 0.0 {
            variants.push(control);
        }
        for q in variants {
            let trace = response::drift(&q, &d, rho, cfg.tau_max, cfg.drift_steps).map_err(|e| match e {
                ResponseError::Inconsistent { .. } => CliError::Oracle(e.to_string()),
                e => config_err(e),
            })?;
            for (tau, x) in trace.samples {
                t.push(vec![rho.into(), q.delta_t.into(), tau.into(), x.into()]);
            }
        }
    }
    Ok(t)
}

/// Depths for the equal-hopping curves.
pub const CURVE_DEPTHS: [f64; 5] = [4.0, 5.0, 6.0, 7.0, 8.0];
/// Depth of the `δt/t_x` map.
pub const MAP_DEPTH: f64 = 5.0;

/// Tables: `equal-hopping` curves, the `ratio-map` at `Ṽ_L_x = 5`, the
/// `equal-hopping-target` solutions for `δt/t_x = delta_t`, and one
/// `feasibility-<species>` map per species.
pub fn cmd_calibrate(cfg: &ScenarioConfig) -> Result<Vec<Table>, CliError> {
    let n = cfg.calib_resolution;
    let species = match cfg.species {
        Some(s) => vec![s],
        None => vec![Species::Rb87, Species::Na23],
    };
    let base = cfg.raman(species[0]);
    let box_axis: Vec<f64> = (1..=n).map(|i| raman::RATIO_BOX * i as f64 / n as f64).collect();
    let mut tables = Vec::new();

    let mut curves = Table::new("equal-hopping", &["depth_x", "l_ratio", "m_ratio", "delta_ratio"]);
    let fine: Vec<f64> = (1..=10 * n).map(|i| raman::RATIO_BOX * i as f64 / (10 * n) as f64).collect();
    for v in CURVE_DEPTHS {
        let c = RamanConfig { depth_x: v, ..base };
        for &l in &fine {
            let m = raman::equal_hopping_m(&c, l).map_err(config_err)?;
            if m <= raman::RATIO_BOX {
                let r = raman::equal_hopping_ratio(&c, l).map_err(config_err)?;
                curves.push(vec![v.into(), l.into(), m.into(), r.into()]);
            }
        }
    }
    tables.push(curves);

    let mut map =
        Table::new("ratio-map", &["m_ratio", "l_ratio", "t_x", "t_y", "delta_t", "delta_ratio", "ty_over_tx"]);
    for &m in &box_axis {
        for &l in &box_axis {
            let h = raman::hoppings(&RamanConfig { depth_x: MAP_DEPTH, m_ratio: m, l_ratio: l, ..base })
                .map_err(config_err)?;
            map.push(vec![
                m.into(),
                l.into(),
                h.t_x.into(),
                h.t_y.into(),
                h.delta_t.into(),
                h.delta_ratio().into(),
                (h.t_y / h.t_x).into(),
            ]);
        }
    }
    tables.push(map);

    let mut sol = Table::new(
        "equal-hopping-target",
        &["depth_x", "target", "m_ratio", "l_ratio", "equal_residual", "ratio_residual"],
    );
    if cfg.delta_t > 0.0 {
        let c = RamanConfig { depth_x: MAP_DEPTH, ..base };
        for s in raman::solve_equal_hopping(&c, cfg.delta_t).map_err(config_err)? {
            let h =
                raman::hoppings(&RamanConfig { m_ratio: s.m_ratio, l_ratio: s.l_ratio, ..c }).map_err(config_err)?;
            sol.push(vec![
                MAP_DEPTH.into(),
                cfg.delta_t.into(),
                s.m_ratio.into(),
                s.l_ratio.into(),
                ((h.t_y - h.t_x) / h.t_x).into(),
                (h.delta_ratio() - cfg.delta_t).into(),
            ]);
        }
    }
    tables.push(sol);

    let depths = linspace(4.0, 10.0, n);
    let ramans = linspace(0.0, 1.0, n);
    let loose = MIN_MEASUREMENT_T0 / (2.0 * PI * cfg.tau_coh);
    for s in species {
        let fm = raman::feasibility_map(&cfg.raman(s), &depths, &ramans, cfg.tau_coh).map_err(config_err)?;
        let mut t =
            Table::new(&format!("feasibility-{s}"), &["depth_x", "raman_x", "t_x_khz", "feasible", "feasible_min"]);
        for (i, &v) in depths.iter().enumerate() {
            for (j, &r) in ramans.iter().enumerate() {
                let tx = fm.t_x_khz[i][j];
                let quick = tx > 0.0 && tx * 1e3 >= loose;
                t.push(vec![v.into(), r.into(), tx.into(), fm.feasible[i][j].into(), quick.into()]);
            }
        }
        tables.push(t);
    }
    Ok(tables)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Quick consistency checks between closed forms and independent oracles.
pub fn cmd_selftest() -> Vec<Check> {
    let mut out = Vec::new();
    let mut check = |name, passed, detail: String| out.push(Check { name, passed, detail });
    let p = ModelParams::default();
    let d = DriveProtocol::default();

    match response::drift(&p, &d, 0.01, 100.0, 1000) {
        Ok(tr) => check(
            "drift quadrature matches closed form",
            tr.max_discrepancy <= response::DRIFT_AGREEMENT,
            format!("max discrepancy {:.2e}", tr.max_discrepancy),
        ),
        Err(e) => check("drift quadrature matches closed form", false, e.to_string()),
    }

    let p0 = ModelParams::with_delta(0.0);
    let worst = linspace(0.0, 100.0, 1001)
        .iter()
        .map(|&t| response::analytic_current(&p0, &d, t).map_or(f64::INFINITY, |s| s.j_total.abs()))
        .fold(0.0, f64::max);
    check("current vanishes at delta_t = 0", worst <= 1e-12, format!("max |J| {worst:.2e}"));

    let dq = DriveProtocol::periodic(1.0, 0.2, 0.1);
    let tau = 5.0 * PI;
    let grid = KGrid::square(64).expect("grid");
    match (oracle::pump_current(&p, &dq, tau, &grid), response::analytic_current(&p, &dq, tau)) {
        (Ok(o), Ok(a)) => {
            let rel = ((o.current - a.j_total) / a.j_total).abs();
            check(
                "pump oracle matches analytic current",
                rel <= 1e-3 && !o.partial,
                format!("relative error {rel:.2e}"),
            );
        }
        (o, a) => check("pump oracle matches analytic current", false, format!("{o:?} / {a:?}")),
    }

    let mut mismatches = 0;
    for &dt in &linspace(0.0, 0.99, 100) {
        for &l in &linspace(-3.0, 3.0, 100) {
            let f1 = (l - dt).abs() <= 1.0;
            let f2 = (l + dt).abs() <= 1.0;
            let ok = classify(l, dt).map(|ph| {
                let (a1, a2) = (ph.family1_active(), ph.family2_active());
                // On a boundary both assignments are acceptable.
                let on_edge = edge_distance(l, dt) == 0.0;
                on_edge || (a1 == f1 && a2 == f2)
            });
            if ok != Ok(true) {
                mismatches += 1;
            }
        }
    }
    check("classify matches the inequalities", mismatches == 0, format!("{mismatches} mismatches"));

    let dc = DriveProtocol::constant(0.48);
    match dirac::gap_scan(&p, &dc, 0.0, 128) {
        Ok(minima) => {
            let targets = [0.16f64.acos() / p.a_y, 0.80f64.acos() / p.a_y];
            let worst = targets
                .iter()
                .map(|ky| minima.iter().map(|m| (m.k.y.abs() - ky).abs()).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max);
            check(
                "gap scan finds the Dirac points",
                minima.len() == 4 && worst <= 1e-6,
                format!("{} minima, worst |Δky| {worst:.2e}", minima.len()),
            );
        }
        Err(e) => check("gap scan finds the Dirac points", false, e.to_string()),
    }

    let defect = (0..32 * 32)
        .map(|i| {
            let k = WaveVector::new(
                -PI + 2.0 * PI * (i % 32) as f64 / 32.0,
                (-PI + 2.0 * PI * (i / 32) as f64 / 32.0) / p.a_y,
            );
            model::pt_defect(&p, &d, k, 0.0)
        })
        .fold(0.0, f64::max);
    check("PT symmetry of the unperturbed model", defect <= 1e-14, format!("max defect {defect:.2e}"));

    let c = RamanConfig::default();
    let tx = raman::hoppings(&c).map(|h| h.t_x / c.raman_strength_x()).unwrap_or(f64::NAN);
    let expect = (-PI * PI * 5f64.sqrt() / 4.0).exp() * (-1.0 / (4.0 * 5f64.sqrt())).exp();
    check("hopping t_x at depth 5", (tx - expect).abs() <= 1e-15, format!("t_x/V_R_x = {tx:.10}"));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ScenarioConfig {
        ScenarioConfig::default()
    }

    #[test]
    fn phase_diagram_rows() {
        let c =
            ScenarioConfig { lambda_min: 0.0, lambda_max: 2.0, delta_min: 0.0, delta_max: 0.5, resolution: 5, ..cfg() };
        let t = cmd_phase_diagram(&c).unwrap();
        assert_eq!(t.rows.len(), 25);
        let find =
            |l: f64, d: f64| t.rows.iter().find(|r| r[0] == Cell::Num(l) && r[1] == Cell::Num(d)).unwrap()[2].clone();
        assert_eq!(find(2.0, 0.5), Cell::Text("Gapped".into()));
        assert_eq!(find(0.0, 0.25), Cell::Text("TwoPairs".into()));
    }

    #[test]
    fn bands_include_nodes() {
        let c = ScenarioConfig { drive: model::DriveKind::Constant, lambda0: 2.4, grid: 16, ..cfg() };
        let t = cmd_bands(&c).unwrap();
        assert_eq!(t.rows.len(), 16 * 16 + 2);
        let zeros = t.column("gap").unwrap().iter().filter(|g| g.as_f64().unwrap() < 1e-12).count();
        assert_eq!(zeros, 2);
    }

    #[test]
    fn constant_drive_gives_zero_current() {
        let c =
            ScenarioConfig { drive: model::DriveKind::Constant, lambda0: 1.0, n_samples: 11, tau_max: 10.0, ..cfg() };
        let out = cmd_current(&c).unwrap();
        assert!(out.table.column("J_total").unwrap().iter().all(|v| v.as_f64() == Some(0.0)));
    }

    #[test]
    fn pump_column_agrees() {
        let c = ScenarioConfig {
            lambda0: 1.0,
            n_samples: 5,
            tau_max: 40.0,
            oracle: OracleMode::Pump,
            oracle_grid: 32,
            ..cfg()
        };
        let out = cmd_current(&c).unwrap();
        let s = out.oracle.clone().unwrap();
        assert!(s.passed(), "{s:?}");
        out.check().unwrap();
    }

    #[test]
    fn sweep_phase_change() {
        let d = DriveProtocol::periodic(1.0, 0.2, 0.1);
        let star = locate_phase_change(&d, 10.0, 0.3, 0.6, 1e-12).unwrap();
        assert!((star - (1.0 - d.lambda(10.0))).abs() < 1e-9);
        let c = ScenarioConfig { lambda0: 1.0, sweep_tau: Some(10.0), resolution: 50, ..cfg() };
        let out = cmd_current(&c).unwrap();
        assert_eq!(out.table.rows.len(), 50);
    }

    #[test]
    fn drift_includes_control() {
        let c = ScenarioConfig { rho: vec![0.1], tau_max: 20.0, drift_steps: 200, ..cfg() };
        let t = cmd_drift(&c).unwrap();
        assert_eq!(t.rows.len(), 2 * 201);
        let control: Vec<_> = t.rows.iter().filter(|r| r[1] == Cell::Num(0.0)).collect();
        assert!(control.iter().all(|r| r[3] == Cell::Num(0.0)));
    }

    #[test]
    fn calibrate_tables() {
        let c = ScenarioConfig { calib_resolution: 11, ..cfg() };
        let tables = cmd_calibrate(&c).unwrap();
        let names: Vec<&str> = tables.iter().map(|t| t.name.as_str()).collect();
        assert_eq!(
            names,
            ["equal-hopping", "ratio-map", "equal-hopping-target", "feasibility-rb87", "feasibility-na23"]
        );
        assert!(!tables[2].rows.is_empty());
        let zero_row: Vec<_> = tables[3].rows.iter().filter(|r| r[1] == Cell::Num(0.0)).collect();
        assert!(zero_row.iter().all(|r| r[2] == Cell::Num(0.0) && r[3] == Cell::Bool(false)));
    }

    #[test]
    fn selftest_passes() {
        for c in cmd_selftest() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
