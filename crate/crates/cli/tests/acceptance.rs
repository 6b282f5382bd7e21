//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line and fails
//! when its criterion is not met.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use anomalylab::dirac::{self, classify, DiracPhase};
use anomalylab::lattice;
use anomalylab::model::{self, DriveProtocol, ModelParams, WaveVector};
use anomalylab::oracle::{self, KGrid};
use anomalylab::raman::{self, RamanConfig, Species};
use anomalylab::response;
use anomalylab_cli::commands::{cmd_current, cmd_drift, locate_phase_change};
use anomalylab_cli::{Cell, ScenarioConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: &str, pass: bool, detail: String) {
    println!("{} criterion {id}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} failed: {detail}");
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

/// `asin(u)` clamped to the band, written out independently of the library.
fn arcsin_closed_form_max(lambda0: f64, amp: f64, delta: f64, rho: f64) -> f64 {
    let a = |lam: f64| (lam - delta).clamp(-1.0, 1.0).asin() - (lam + delta).clamp(-1.0, 1.0).asin();
    let start = a(0.5 * (amp + lambda0));
    // λ is monotone between its extremes, so the extremes of A sit at the
    // ends of the swing or at the band edges in between.
    let lo = 0.5 * (lambda0 - amp);
    let hi = 0.5 * (lambda0 + amp);
    let mut cands = vec![lo, hi];
    for e in [1.0 + delta, 1.0 - delta, -(1.0 - delta), -(1.0 + delta)] {
        if e > lo && e < hi {
            cands.push(e);
        }
    }
    cands.iter().map(|&l| (a(l) - start).abs()).fold(0.0, f64::max) / (2.0 * PI * rho)
}

#[test]
fn c1_drift_magnitudes() {
    let cfg = ScenarioConfig { rho: vec![0.1, 0.05, 0.01], tau_max: 100.0, ..ScenarioConfig::default() };
    let (table, elapsed) = timed(|| cmd_drift(&cfg).expect("drift"));
    let mut ok = elapsed < Duration::from_secs(1);
    let mut detail = Vec::new();
    for (rho, rough, shown) in [(0.1, 1.0, 1.024), (0.05, 2.0, 2.048), (0.01, 10.0, 10.24)] {
        let max = table
            .rows
            .iter()
            .filter(|r| r[0] == Cell::Num(rho) && r[1] == Cell::Num(0.32))
            .map(|r| r[3].as_f64().unwrap().abs())
            .fold(0.0, f64::max);
        let oracle = arcsin_closed_form_max(2.44, 0.2, 0.32, rho);
        let vs_oracle = (max - oracle).abs();
        let vs_rough = (max - rough).abs() / rough;
        let vs_shown = (max - shown).abs() / shown;
        ok &= vs_oracle <= 1e-6 && vs_rough <= 0.5 && vs_shown < 5e-4;
        detail
            .push(format!("rho={rho}: {max:.6} (closed form diff {vs_oracle:.1e}, vs rough {:.1}%)", 100.0 * vs_rough));
    }
    report("1", ok, format!("{}; {:.3} s", detail.join("; "), elapsed.as_secs_f64()));
}

#[test]
fn c2_no_drift_without_asymmetry() {
    let ((worst_j, worst_x), elapsed) = timed(|| {
        let p = ModelParams::with_delta(0.0);
        let d = DriveProtocol::default();
        let worst_j = (0..=10_000)
            .map(|i| response::analytic_current(&p, &d, i as f64 * 0.01).map_or(f64::INFINITY, |s| s.j_total.abs()))
            .fold(0.0, f64::max);
        let cfg = ScenarioConfig { delta_t: 0.0, tau_max: 100.0, ..ScenarioConfig::default() };
        let t = cmd_drift(&cfg).expect("drift");
        let worst_x = t.rows.iter().map(|r| r[3].as_f64().unwrap().abs()).fold(0.0, f64::max);
        (worst_j, worst_x)
    });
    let ok = worst_j <= 1e-12 && worst_x <= 1e-9 && elapsed < Duration::from_secs(1);
    report("2", ok, format!("max |J| = {worst_j:.1e}, max |dx| = {worst_x:.1e}; {:.3} s", elapsed.as_secs_f64()));
}

/// `J = λ′/2π [1/√(1−(λ−δ)²) − 1/√(1−(λ+δ)²)]` with both pairs present.
fn two_pair_current(lambda: f64, dl: f64, delta: f64) -> f64 {
    dl / (2.0 * PI) * (1.0 / (1.0 - (lambda - delta).powi(2)).sqrt() - 1.0 / (1.0 - (lambda + delta).powi(2)).sqrt())
}

/// Drive with `λ = 0.5`, `λ′ = −0.01` at `τ = π/(2ω)`.
fn triangle_drive(omega: f64) -> DriveProtocol {
    DriveProtocol::periodic(1.0, 0.02 / omega, omega)
}

/// Worst pointwise relative error of the evolve oracle against the analytic
/// current over the first half period, skipping band-edge neighbourhoods.
fn evolve_half_period_error(omega: f64, n: usize) -> (f64, usize, f64) {
    let p = ModelParams::default();
    let d = triangle_drive(omega);
    let half = PI / omega;
    let grid = KGrid::square(n).unwrap();
    let trace = oracle::evolve_filled_band(&p, &d, &grid, half, oracle::default_dt(&d)).expect("evolve");
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let mut peak: f64 = 0.0;
    for &(tau, j) in &trace.samples {
        let lam = d.lambda(tau);
        let edge = [1.0 + p.delta_t, 1.0 - p.delta_t, -(1.0 - p.delta_t), -(1.0 + p.delta_t)]
            .iter()
            .map(|b| (lam - b).abs())
            .fold(f64::INFINITY, f64::min);
        if edge < 1e-2 {
            continue;
        }
        let Ok(a) = response::analytic_current(&p, &d, tau) else { continue };
        if a.j_total.abs() < 1e-6 {
            continue;
        }
        count += 1;
        worst = worst.max(((j - a.j_total) / a.j_total).abs());
        peak = peak.max(j.abs());
    }
    (worst, count, peak)
}

#[test]
fn c3_oracle_triangle() {
    let start = Instant::now();
    let p = ModelParams::default();
    let omega = 0.01;
    let d = triangle_drive(omega);
    let tau = PI / (2.0 * omega);
    let expect = two_pair_current(0.5, -0.01, 0.32);
    let analytic = response::analytic_current(&p, &d, tau).unwrap().j_total;
    // The quoted value is held to the criterion's own relative tolerance.
    let literal_rel = ((analytic - 1.16271e-3) / 1.16271e-3).abs();
    let analytic_ok = (analytic - expect).abs() <= 1e-15 && literal_rel <= 1e-3;

    let pump = oracle::pump_current(&p, &d, tau, &KGrid::square(400).unwrap()).unwrap();
    let pump_rel = ((pump.current - analytic) / analytic).abs();
    let pump_ok = pump_rel <= 1e-3 && !pump.partial;

    let (err_fine, n_fine, peak_fine) = evolve_half_period_error(omega, 128);
    let (err_coarse, _, _) = evolve_half_period_error(2.0 * omega, 128);
    let evolve_ok = n_fine > 0 && err_fine <= 0.05 && err_fine < err_coarse;
    let elapsed = start.elapsed();

    println!(
        "{} criterion 3 (analytic): J = {analytic:.10e}, independent formula {expect:.10e}, \
         {literal_rel:.1e} from 1.16271e-3",
        if analytic_ok { "PASS" } else { "FAIL" }
    );
    println!(
        "{} criterion 3 (pump, 400x400): J = {:.10e}, relative error {pump_rel:.2e}",
        if pump_ok { "PASS" } else { "FAIL" },
        pump.current
    );
    println!(
        "{} criterion 3 (evolve, omega = 0.01): worst relative error {err_fine:.3} over {n_fine} samples, \
         {err_coarse:.3} at omega = 0.02; largest |J_evolve| = {peak_fine:.1e}",
        if evolve_ok { "PASS" } else { "FAIL" }
    );
    let ok = analytic_ok && pump_ok && evolve_ok && elapsed < Duration::from_secs(300);
    report("3", ok, format!("oracle triangle; {:.1} s", elapsed.as_secs_f64()));
}

/// `a` against `b + c` in exact integer arithmetic on the binary expansions.
fn exceeds_sum(a: f64, b: f64, c: f64) -> std::cmp::Ordering {
    fn parts(x: f64) -> (i128, i32) {
        if x == 0.0 {
            return (0, 0);
        }
        let bits = x.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i32;
        let frac = (bits & ((1u64 << 52) - 1)) as i128;
        let (m, e) = if exp == 0 { (frac, -1074) } else { (frac | (1 << 52), exp - 1075) };
        (if x < 0.0 { -m } else { m }, e)
    }
    let xs = [parts(a), parts(b), parts(c)];
    let low = xs.iter().filter(|x| x.0 != 0).map(|x| x.1).min().unwrap_or(0);
    let scaled: Vec<i128> = xs
        .iter()
        .map(|&(m, e)| {
            if m == 0 {
                return 0;
            }
            let shift = (e - low) as u32;
            assert!(shift < 70, "operands too far apart for the test oracle");
            m << shift
        })
        .collect();
    scaled[0].cmp(&(scaled[1] + scaled[2]))
}

/// Phase from the inequalities `|λ ∓ δt| < 1`, evaluated exactly, with
/// points on `λ = ±(1 ± δt)` assigned to the family on their side of `λ = 0`.
fn inequality_phase(lambda: f64, delta: f64) -> DiracPhase {
    use std::cmp::Ordering::*;
    let a = lambda.abs();
    let outer = exceeds_sum(a, 1.0, delta);
    let inner = exceeds_sum(a, 1.0, -delta);
    match (outer, inner) {
        (Greater, _) => DiracPhase::Gapped,
        (_, Less) => DiracPhase::TwoPairs,
        _ if lambda > 0.0 => DiracPhase::OnePairFamily1,
        _ => DiracPhase::OnePairFamily2,
    }
}

#[test]
fn c4_phase_diagram() {
    let start = Instant::now();
    let n = 400;
    let mut mismatches = 0;
    let mut boundary_hits = 0;
    for j in 0..n {
        let delta = 0.99 * j as f64 / (n - 1) as f64;
        for i in 0..n {
            let lambda = -3.0 + 6.0 * i as f64 / (n - 1) as f64;
            if [1.0 + delta, 1.0 - delta].contains(&lambda.abs()) {
                boundary_hits += 1;
            }
            if classify(lambda, delta).unwrap() != inequality_phase(lambda, delta) {
                mismatches += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(20240501);
    let mut count_mismatch = Vec::new();
    for _ in 0..100 {
        let lambda: f64 = rng.gen_range(-2.5..2.5);
        let delta: f64 = rng.gen_range(0.0..0.95);
        let p = ModelParams::with_delta(delta);
        let found = dirac::gap_scan(&p, &DriveProtocol::constant(lambda), 0.0, 128).unwrap().len();
        let phase = inequality_phase(lambda, delta);
        let expect = 2 * phase.n_pairs();
        if found != expect {
            count_mismatch.push((lambda, delta, found, expect));
        }
    }
    let elapsed = start.elapsed();
    let ok = mismatches == 0 && count_mismatch.is_empty() && elapsed < Duration::from_secs(120);
    report(
        "4",
        ok,
        format!(
            "{mismatches} classify mismatches on {n}x{n} ({boundary_hits} exact boundary points); \
             node-count mismatches {count_mismatch:?}; {:.1} s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn c5_dirac_positions() {
    let start = Instant::now();
    let p = ModelParams::default();
    let minima = dirac::gap_scan(&p, &DriveProtocol::constant(0.48), 0.0, 256).unwrap();
    let expect = [
        (0.0, 0.16f64.acos() / p.a_y),
        (0.0, -(0.16f64.acos()) / p.a_y),
        (PI / p.a_x, 0.80f64.acos() / p.a_y),
        (PI / p.a_x, -(0.80f64.acos()) / p.a_y),
    ];
    let wrap_x = |x: f64| (x + PI / p.a_x).rem_euclid(2.0 * PI / p.a_x) - PI / p.a_x;
    let worst = expect
        .iter()
        .map(|&(x, y)| {
            minima.iter().map(|m| (wrap_x(m.k.x - x)).abs().max((m.k.y - y).abs())).fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    let elapsed = start.elapsed();
    let ok = minima.len() == 4 && worst <= 1e-6 && elapsed < Duration::from_secs(10);
    report("5", ok, format!("{} minima, worst deviation {worst:.1e}; {:.2} s", minima.len(), elapsed.as_secs_f64()));
}

#[test]
fn c6_lifshitz_discontinuity() {
    let start = Instant::now();
    let cfg = ScenarioConfig {
        lambda0: 1.0,
        sweep_tau: Some(10.0),
        delta_min: 0.3,
        delta_max: 0.6,
        resolution: 3001,
        ..Default::default()
    };
    let out = cmd_current(&cfg).unwrap();
    let rows = &out.table.rows;
    let col = |r: &Vec<Cell>, i: usize| r[i].as_f64().unwrap();
    // Bracket where the pair count drops, then refine on the phase.
    let k = rows.windows(2).position(|w| col(&w[0], 6) != col(&w[1], 6)).expect("no phase change in sweep");
    let (lo, hi) = (col(&rows[k], 0), col(&rows[k + 1], 0));
    let d = DriveProtocol::periodic(1.0, 0.2, 0.1);
    let star = locate_phase_change(&d, 10.0, lo, hi, 1e-13).unwrap();
    let expect = 1.0 - (0.5 + 0.1 * 1f64.cos());
    let before = col(&rows[k], 5);
    let after = col(&rows[k + 1], 5);
    let elapsed = start.elapsed();
    let ok = (star - expect).abs() <= 1e-6 && (before - after).abs() > 1e-4 && elapsed < Duration::from_secs(10);
    report(
        "6",
        ok,
        format!(
            "jump at delta_t = {star:.12} (expected {expect:.12}); J_total {before:.4e} -> {after:.4e} across the grid step; {:.2} s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn c7_symmetry_suite() {
    let p = ModelParams::default();
    let d = DriveProtocol::default();
    let n = 32;
    let defect = (0..n * n)
        .map(|i| {
            let k = WaveVector::new(
                (-PI + 2.0 * PI * (i % n) as f64 / n as f64) / p.a_x,
                (-PI + 2.0 * PI * (i / n) as f64 / n as f64) / p.a_y,
            );
            model::pt_defect(&p, &d, k, 3.0)
        })
        .fold(0.0, f64::max);

    let eps = 0.05;
    let pz = ModelParams { pert_epsz: eps, ..p };
    let dc = DriveProtocol::constant(1.2);
    // Coarse search, then the exact minimum sits where h1 = h2 = 0.
    let m = 400;
    let coarse = (0..m * m)
        .map(|i| {
            let k = WaveVector::new(
                (-PI + 2.0 * PI * (i % m) as f64 / m as f64) / pz.a_x,
                (-PI + 2.0 * PI * (i / m) as f64 / m as f64) / pz.a_y,
            );
            model::band(&pz, &dc, k, 0.0).gap()
        })
        .fold(f64::INFINITY, f64::min);
    let node = WaveVector::new(0.0, (1.2f64 - 0.32).acos() / pz.a_y);
    let at_node = model::band(&pz, &dc, node, 0.0).gap();
    let gap_ok = (at_node - 2.0 * eps).abs() <= 1e-6 && coarse >= 2.0 * eps - 1e-12;

    let h = lattice::build_real_space(&p, &d, 8, 8, 1.5).unwrap();
    let mut real = h.eigenvalues();
    let mut bloch = lattice::commensurate_bloch_spectrum(&p, &d, 8, 8, 1.5);
    real.sort_by(f64::total_cmp);
    bloch.sort_by(f64::total_cmp);
    let ft = real.iter().zip(&bloch).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let ok = defect <= 1e-14 && gap_ok && ft <= 1e-10;
    report(
        "7",
        ok,
        format!(
            "pt_defect max {defect:.1e}; sigma_z gap at node {at_node:.12} (grid min {coarse:.12}); FT spectrum diff {ft:.1e}"
        ),
    );
}

#[test]
fn c8_calibration() {
    let c = RamanConfig { depth_x: 5.0, ..RamanConfig::default() };
    let h = raman::hoppings(&c).unwrap();
    let tx = h.t_x / c.raman_strength_x();
    let tp = h.tp_x / c.recoil_x();
    let v: f64 = 5.0;
    let tx_formula = (-PI * PI * v.sqrt() / 4.0).exp() * (-1.0 / (4.0 * v.sqrt())).exp();
    let tp_formula = 4.0 / PI.sqrt() * v.powf(0.75) * (-2.0 * v.sqrt()).exp();
    // Deviations in units of V_R_x and E_R respectively.
    let tx_dev = (tx - 0.0035919).abs();
    let tp_dev = (tp - 0.086196).abs();
    let hop_ok =
        tx_dev <= 1e-6 && tp_dev <= 1e-6 && (tx - tx_formula).abs() <= 1e-15 && (tp - tp_formula).abs() <= 1e-15;

    let sols = raman::solve_equal_hopping(&c, 0.32).unwrap();
    let solve_ok = !sols.is_empty()
        && sols.iter().all(|s| {
            let h = raman::hoppings(&RamanConfig { m_ratio: s.m_ratio, l_ratio: s.l_ratio, ..c }).unwrap();
            ((h.t_y - h.t_x) / h.t_x).abs() < 1e-10 && (h.delta_ratio() - 0.32).abs() < 1e-10
        });

    let threshold = raman::feasibility_threshold_hz(0.1);
    // Species whose t_x lands just either side of 50 Hz at Ṽ_R_x = 1.
    let per_recoil = raman::hoppings(&RamanConfig { raman_x: 1.0, ..c }).unwrap().t_x / c.recoil_x();
    let side = |f: f64| {
        let s = RamanConfig { species: Species::Custom(50.0 * f / per_recoil), ..c };
        raman::feasibility_map(&s, &[5.0], &[1.0], 0.1).unwrap().feasible[0][0]
    };
    let feas_ok = (threshold - 50.0).abs() <= 1e-12 && side(1.0 + 1e-9) && !side(1.0 - 1e-9);

    let ok = hop_ok && solve_ok && feas_ok;
    report(
        "8",
        ok,
        format!(
            "t_x/V_R_x = {tx:.10} (dev {tx_dev:.1e}); t'/E_R = {tp:.10} (dev {tp_dev:.1e}); \
             {} equal-hopping solution(s) at 0.32, first (m, l) = {:?}; threshold {threshold} Hz",
            sols.len(),
            sols.first().map(|s| (s.m_ratio, s.l_ratio))
        ),
    );
}
