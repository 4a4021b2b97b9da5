use num_complex::Complex64;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;
use wgnls::diophantine::gap_profile;
use wgnls::dynamics::*;
use wgnls::experiments::*;
use wgnls::fields::{gauge_transform, GaugeDirection, NormSpec, SpectralField, XiGrid};
use wgnls::lattice::{lambda_f64, LatticeBox, ThetaVector};
use wgnls::resonance::{brute_force_resonant, enumerate_resonant};

const ENUM_BUDGET_SECS: f64 = 120.0;
const CLAIM_LIMIT: f64 = 1e-12;
const CLAIM_NEGATIVE: f64 = 1e-3;
const DRIFT_LIMIT: f64 = 1e-6;
const SUITE_BUDGET_SECS: f64 = 300.0;
const CASCADE_LIMIT: f64 = 1e-8;
const GAP_MINIMUM_TOL: f64 = 1e-12;
const SLOPE_BAND: (f64, f64) = (-1.5, -1.0);
const STATIONARY_BUDGET_SECS: f64 = 120.0;
const CLOSED_FORM_TOL: f64 = 1e-8;
const GAUGE_TOL: f64 = 1e-6;
const PLANE_WAVE_TOL: f64 = 1e-6;

type Verdict = Result<(bool, String), String>;

fn cz(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn check_of<'a>(rec: &'a RunRecord, name: &str) -> Result<&'a Check, String> {
    rec.checks.iter().find(|c| c.name == name).ok_or_else(|| format!("missing check {name}"))
}

fn resonance_characterization() -> Verdict {
    let start = Instant::now();
    let cases: [(usize, u32); 3] = [(1, 6), (2, 6), (3, 3)];
    let mut compared = 0;
    for (d, k_max) in cases {
        let theta = ThetaVector::sqrt_primes(d).map_err(err)?;
        for k in 0..=k_max {
            let fast = enumerate_resonant(&theta, k).map_err(err)?.canonical();
            let brute = brute_force_resonant(&theta, k).map_err(err)?.canonical();
            if fast != brute {
                return Ok((false, format!("set mismatch at d={d}, K={k}")));
            }
            compared += 1;
        }
    }
    let count = enumerate_resonant(&ThetaVector::sqrt_primes(1).map_err(err)?, 1).map_err(err)?.len();
    let secs = start.elapsed().as_secs_f64();
    Ok((
        count == 15 && secs < ENUM_BUDGET_SECS,
        format!("{compared} boxes equal, d=1 K=1 count {count}, {secs:.1}s < {ENUM_BUDGET_SECS}s"),
    ))
}

fn claim_identity() -> Verdict {
    let cfg = ClaimBattery::default();
    let r = claim_battery(&cfg, 7).map_err(err)?;
    let worst_negative = r.negative_defects.iter().cloned().fold(0.0, f64::max);
    Ok((
        r.max_defect <= CLAIM_LIMIT && worst_negative > CLAIM_NEGATIVE,
        format!(
            "max defect {:.2e} <= {CLAIM_LIMIT:e} over {} slices x {:?}; negative control {:.2e} > {CLAIM_NEGATIVE:e}",
            r.max_defect, cfg.slices, cfg.ks, worst_negative
        ),
    ))
}

fn conservation_suite() -> Result<(RunRecord, f64), String> {
    let start = Instant::now();
    let rec = run_conservation_suite(&SuiteConfig::default()).map_err(err)?;
    Ok((rec, start.elapsed().as_secs_f64()))
}

fn k_norm_conservation(rec: &RunRecord, secs: f64) -> Verdict {
    let drifts: Vec<&Check> = rec.checks.iter().filter(|c| c.name.starts_with("k_norm_drift")).collect();
    let worst = drifts.iter().map(|c| c.value).fold(0.0, f64::max);
    let negative = check_of(rec, "negative_control_drift")?;
    let ok = !drifts.is_empty() && worst <= DRIFT_LIMIT && negative.passed && secs < SUITE_BUDGET_SECS;
    Ok((
        ok,
        format!(
            "worst drift {worst:.2e} <= {DRIFT_LIMIT:e} over {} k values; out-of-box control drift {:.2e}; M = {}; {secs:.1}s < {SUITE_BUDGET_SECS}s",
            drifts.len(),
            negative.value,
            rec.data["system"]["m"]
        ),
    ))
}

fn no_cascade(rec: &RunRecord) -> Verdict {
    let c = check_of(rec, "no_cascade")?;
    Ok((c.value <= CASCADE_LIMIT, format!("sup outside protected box {:.2e} <= {CASCADE_LIMIT:e}", c.value)))
}

fn gap_law() -> Verdict {
    let rec = run_min_gap(&MinGapConfig::default()).map_err(err)?;
    let theta = ThetaVector::from_entries(&["1", "sqrt(2)"], true, "one-root-two").map_err(err)?;
    let profile = gap_profile(&theta, 5).map_err(err)?;
    let b5 = profile.rows.iter().find(|r| r.k == 5).ok_or("no row for radius 5")?.min_abs;
    let expected = 3.0 - 2.0 * 2f64.sqrt();
    let radii: Vec<String> =
        rec.data["bounds"].as_array().into_iter().flatten().map(|b| format!("{:.2}", b["bound"]["radius"].as_f64().unwrap_or(f64::NAN))).collect();
    Ok((
        rec.passed() && (b5 - expected).abs() <= GAP_MINIMUM_TOL,
        format!(
            "empty below bounds [{}] for M in {{10,100,1000}}: {}; B5 minimum {b5:.15} vs 3-2sqrt2 (diff {:.1e})",
            radii.join(", "),
            rec.passed(),
            (b5 - expected).abs()
        ),
    ))
}

fn stationary_phase() -> Verdict {
    let start = Instant::now();
    let cfg = StationaryConfig::default();
    let (rec, _) = run_stationary(&cfg).map_err(err)?;
    let secs = start.elapsed().as_secs_f64();
    let slope = check_of(&rec, "slope")?;
    let growth = check_of(&rec, "error_times_s_growth")?;
    let ok = slope.passed && growth.passed && cfg.slope_band == SLOPE_BAND && secs < STATIONARY_BUDGET_SECS;
    Ok((
        ok,
        format!(
            "slope {:.4} in [{}, {}] over s in [2^{}, 2^{}]; max E(s)*s / first {:.3}; {secs:.1}s",
            slope.value, SLOPE_BAND.0, SLOPE_BAND.1, cfg.lo, cfg.hi, growth.value
        ),
    ))
}

fn pi_vs_r() -> Verdict {
    let cfg = PiVsRConfig::default();
    let rec = run_pi_vs_r(&cfg).map_err(err)?;
    let c = check_of(&rec, "weighted_gap_growth")?;
    let weighted: Vec<String> = rec.data["rows"]
        .as_array()
        .into_iter()
        .flatten()
        .map(|r| format!("{:.1e}", r["weighted"].as_f64().unwrap_or(f64::NAN)))
        .collect();
    Ok((c.passed, format!("gap*t^{} at t = {:?}: [{}], max/first {:.3}", cfg.exponent, cfg.times, weighted.join(", "), c.value)))
}

fn single_mode_error() -> Result<f64, String> {
    let t = ThetaVector::sqrt_primes(2).map_err(err)?;
    let params = SystemParams { k_inner: 3, k_outer: 3, m: 0.0, nonlinearity: Nonlinearity::Defocusing, tail_norm: Default::default() };
    let sys = QuasiResonantSystem::build(&t, params).map_err(err)?;
    let grid = XiGrid::new(1.0, 8).map_err(err)?;
    let a = cz(0.6, 0.3);
    let p = [1i64, -2];
    let mut u0 = SpectralField::zeros(grid, LatticeBox::new(2, 3));
    u0.set(3, &p, a).map_err(err)?;
    let mut cfg = IntegratorConfig::rk45(1e-10, (0.0, 3.0), 0.5);
    cfg.keep_states = true;
    let tr = integrate(&sys, &u0, &cfg).map_err(err)?;
    let gauged = integrate_flow(&sys, &u0, &cfg, Flow::Gauged, &NormSpec::for_dim(2)).map_err(err)?;
    let w = grid.node(3).powi(2) + lambda_f64(&t, &p);
    let mut worst: f64 = 0.0;
    for (i, &time) in tr.times.iter().enumerate() {
        let exact = a * Complex64::from_polar(1.0, -a.norm_sqr() * time);
        let exact_g = a * Complex64::from_polar(1.0, -(w + a.norm_sqr()) * time);
        worst = worst.max((tr.states[i].get(3, &p) - exact).norm()).max((gauged.states[i].get(3, &p) - exact_g).norm());
    }
    Ok(worst)
}

fn gauge_error() -> Result<f64, String> {
    let t = ThetaVector::sqrt_primes(2).map_err(err)?;
    let params = SystemParams { k_inner: 0, k_outer: 3, m: 2.0, nonlinearity: Nonlinearity::Defocusing, tail_norm: Default::default() };
    let sys = QuasiResonantSystem::build(&t, params).map_err(err)?;
    if sys.quasi.is_empty() {
        return Err("gauge check needs quasi-resonant terms".into());
    }
    let grid = XiGrid::new(0.5, 8).map_err(err)?;
    let cfg = DataSpec { radius: 3, amplitude: 0.15, xi_width: 1.0 };
    let u0 = cfg.build(grid, LatticeBox::new(2, 3), 11).map_err(err)?;
    let run = IntegratorConfig::rk45(1e-10, (0.0, 2.0), 1.0);
    let u = integrate(&sys, &u0, &run).map_err(err)?.final_state.ok_or("no final state")?;
    let v = integrate_flow(&sys, &u0, &run, Flow::Gauged, &NormSpec::for_dim(2)).map_err(err)?.final_state.ok_or("no final state")?;
    let back = gauge_transform(&v, &t, 2.0, GaugeDirection::Inverse).map_err(err)?;
    Ok(back.max_abs_diff(&u))
}

fn plane_wave_error() -> Result<f64, String> {
    let t = ThetaVector::sqrt_primes(2).map_err(err)?;
    let grid = WaveguideGrid { line: LineSpec::Periodic { count: 16, length: 2.0 * PI }, torus_points: 8 };
    let wg = Waveguide::new(&t, grid).map_err(err)?;
    let a = cz(0.3, -0.2);
    let (kx, p) = (1.0, [1i64, -2]);
    let th: Vec<f64> = t.squares_f64().iter().map(|s| s.sqrt()).collect();
    let phase = |x: f64, y: &[f64]| kx * x + p[0] as f64 * th[0] * y[0] + p[1] as f64 * th[1] * y[1];
    let u0 = wg.sample(&t, |x, y| a * Complex64::from_polar(1.0, phase(x, y)));
    let omega = kx * kx + lambda_f64(&t, &p) + a.norm_sqr();
    let dt = 0.01;
    let mut worst: f64 = 0.0;
    for tenth in 1..=10 {
        let cfg = SplitStepConfig { dt, steps: 10 * tenth, record_every: 10 * tenth, nonlinear: true, nonlinearity: Nonlinearity::Defocusing, start_time: 0.0 };
        let tr = split_step_with(&wg, &u0, &cfg).map_err(err)?;
        let time = dt * (10 * tenth) as f64;
        let exact = wg.sample(&t, |x, y| a * Complex64::from_polar(1.0, phase(x, y) - omega * time));
        let e = tr.final_physical.iter().zip(&exact).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max);
        worst = worst.max(e);
    }
    Ok(worst)
}

fn gauge_and_closed_forms() -> Verdict {
    let single = single_mode_error()?;
    let gauge = gauge_error()?;
    let plane = plane_wave_error()?;
    Ok((
        single <= CLOSED_FORM_TOL && gauge <= GAUGE_TOL && plane <= PLANE_WAVE_TOL,
        format!(
            "single mode {single:.1e} <= {CLOSED_FORM_TOL:e}; gauged vs truncated {gauge:.1e} <= {GAUGE_TOL:e}; plane wave on [0,1] {plane:.1e} <= {PLANE_WAVE_TOL:e}"
        ),
    ))
}

fn full_vs_effective() -> Verdict {
    let start = Instant::now();
    let cfg = CompareConfig::default();
    let rec = run_compare_effective(&cfg).map_err(err)?;
    let per_window: Vec<String> = rec.data["nonlinear"]["windows"]
        .as_array()
        .into_iter()
        .flatten()
        .map(|w| format!("n={} c={:.3}", w["n"], w["c"].as_f64().unwrap_or(f64::NAN)))
        .collect();
    let floor = check_of(&rec, "linear_floor_ratio")?;
    Ok((
        rec.passed(),
        format!(
            "eps = {}: residual <= c*eps^3 with c = {:.3} ({}); linear floor ratio {:.1e}; {:.1}s",
            cfg.epsilon,
            rec.data["c"].as_f64().unwrap_or(f64::NAN),
            per_window.join(", "),
            floor.value,
            start.elapsed().as_secs_f64()
        ),
    ))
}

fn determinism() -> Verdict {
    let sim = SimulateConfig { t_end: 2.0, ..Default::default() };
    let a = run_simulate(&sim).map_err(err)?.0.to_line().map_err(err)?;
    let b = run_simulate(&sim).map_err(err)?.0.to_line().map_err(err)?;
    let pi = PiVsRConfig { times: vec![1e2, 1e3], ..Default::default() };
    let c = run_pi_vs_r(&pi).map_err(err)?.to_line().map_err(err)?;
    let d = run_pi_vs_r(&pi).map_err(err)?.to_line().map_err(err)?;
    let other = SimulateConfig { seed: sim.seed + 1, ..sim.clone() };
    let e = run_simulate(&other).map_err(err)?.0.to_line().map_err(err)?;
    Ok((a == b && c == d && a != e, format!("simulate and pi-vs-r records byte-identical ({} and {} bytes); other seed differs: {}", a.len(), c.len(), a != e)))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: u32, name: &str, start: Instant, v: Verdict| {
        let secs = start.elapsed().as_secs_f64();
        let (ok, detail) = match v {
            Ok(x) => x,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!("criterion {n:>2} {}: {name}: {detail} [{secs:.1}s]", if ok { "PASS" } else { "FAIL" });
    };

    let s = Instant::now();
    report(1, "resonance characterization", s, resonance_characterization());
    let s = Instant::now();
    report(2, "claim identity", s, claim_identity());
    let s = Instant::now();
    match conservation_suite() {
        Ok((rec, secs)) => {
            report(3, "k-norm conservation", s, k_norm_conservation(&rec, secs));
            report(4, "no cascade", s, no_cascade(&rec));
        }
        Err(e) => {
            report(3, "k-norm conservation", s, Err(e.clone()));
            report(4, "no cascade", s, Err(e));
        }
    }
    let s = Instant::now();
    report(5, "gap law", s, gap_law());
    let s = Instant::now();
    report(6, "stationary phase", s, stationary_phase());
    let s = Instant::now();
    report(7, "full vs limit trilinear gap", s, pi_vs_r());
    let s = Instant::now();
    report(8, "gauge and closed forms", s, gauge_and_closed_forms());
    let s = Instant::now();
    report(9, "full vs effective", s, full_vs_effective());
    let s = Instant::now();
    report(10, "determinism", s, determinism());

    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
