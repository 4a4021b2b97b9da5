use super::config::{default_delta, default_profile_k, sqrt_prime};
use super::record::{Check, RunRecord};
use super::schedule::build_schedule;
use crate::diophantine::gap_profile;
use crate::dynamics::{
    effective_flow_samples, split_step_with, LineSpec, Method, Nonlinearity, QuasiResonantSystem, SplitStepConfig, SystemParams,
    Waveguide, WaveguideGrid,
};
use crate::error::{Error, Result};
use crate::fields::{default_sobolev_order, gauge_transform, sobolev_norm, z_d_norm, GaugeDirection, SpectralField, XiGrid, DEFAULT_EPS};
use crate::lattice::ThetaSpec;
use crate::resonance::TailNorm;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompareConfig {
    pub theta: ThetaSpec,
    /// Initial data `ε·e^{−x²/(2σ²)}`, constant on the torus.
    pub epsilon: f64,
    pub sigma: f64,
    pub xi_half_width: f64,
    pub xi_count: usize,
    pub torus_points: usize,
    pub dt: f64,
    pub windows: Vec<u32>,
    pub samples_per_window: u32,
    pub delta: f64,
    pub profile_k: u32,
    /// Radius of the box on which residuals are measured.
    pub box_radius: u32,
    pub nonlinear: bool,
    pub sobolev_order: Option<u32>,
    pub tol: f64,
    /// Required `floor / residual` ratio for the linear run.
    pub floor_ratio: f64,
    /// Allowed growth of `c` from the first window to any later one.
    pub growth_limit: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            theta: sqrt_prime(2),
            epsilon: 0.05,
            sigma: 4.0,
            xi_half_width: std::f64::consts::PI,
            xi_count: 512,
            torus_points: 8,
            dt: 0.02,
            windows: vec![3, 4, 5],
            samples_per_window: 8,
            delta: default_delta(),
            profile_k: default_profile_k(),
            box_radius: 3,
            nonlinear: true,
            sobolev_order: None,
            tol: 1e-10,
            floor_ratio: 1e-2,
            growth_limit: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowResult {
    pub n: u32,
    pub m: f64,
    pub k: f64,
    /// Frequencies with `|p| ≤ K_n/3` seed the effective solution.
    pub kept_radius: u32,
    pub times: Vec<f64>,
    pub residual_h: Vec<f64>,
    pub residual_z: Vec<f64>,
    /// `max residual_h / ε³` over the window.
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub sobolev_order: u32,
    pub windows: Vec<WindowResult>,
    pub c: f64,
    pub max_residual_h: f64,
    pub max_residual_z: f64,
    pub mass_drift: f64,
    pub warnings: Vec<String>,
}

/// Residuals `‖e^{−itΔ}U(t) − G_n(t)‖` over each dyadic window.
pub fn compare_effective(cfg: &CompareConfig) -> Result<CompareReport> {
    let theta = cfg.theta.build()?;
    if cfg.windows.is_empty() || cfg.samples_per_window == 0 {
        return Err(Error::InvalidArgument("need at least one window and one sample".into()));
    }
    let n_max = *cfg.windows.iter().max().expect("nonempty");
    let profile = gap_profile(&theta, cfg.profile_k)?;
    let schedule = build_schedule(&profile, cfg.delta, n_max)?;
    let grid = XiGrid::new(cfg.xi_half_width, cfg.xi_count)?;
    let wg = Waveguide::new(&theta, WaveguideGrid { line: LineSpec::Matched { grid }, torus_points: cfg.torus_points })?;
    if 2 * cfg.box_radius as usize + 1 > cfg.torus_points {
        return Err(Error::GridMismatch(format!("box radius {} needs more torus points", cfg.box_radius)));
    }

    let t_end = ((n_max + 1) as f64).exp2();
    let steps_per_unit = (1.0 / cfg.dt).round();
    if ((steps_per_unit * cfg.dt) - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument("dt must divide 1".into()));
    }
    let per_unit = steps_per_unit as u64;
    let u0 = wg.sample(&theta, |x, _| Complex64::new(cfg.epsilon * (-x * x / (2.0 * cfg.sigma * cfg.sigma)).exp(), 0.0));
    let split = SplitStepConfig {
        dt: cfg.dt,
        steps: per_unit * t_end as u64,
        record_every: per_unit,
        nonlinear: cfg.nonlinear,
        nonlinearity: Nonlinearity::Defocusing,
        start_time: 0.0,
    };
    let run = split_step_with(&wg, &u0, &split)?;
    let profile_at = |t: f64| -> Result<SpectralField> {
        if (t - t.round()).abs() > 1e-9 || t > t_end {
            return Err(Error::InvalidArgument(format!("sample time {t} is not a recorded integer time")));
        }
        let idx = t.round() as usize;
        let f = wg.spectral_field(&run.spectra[idx], cfg.box_radius, t)?;
        gauge_transform(&f, &theta, t, GaugeDirection::Inverse)
    };

    let order = cfg.sobolev_order.unwrap_or_else(|| default_sobolev_order(theta.dim()));
    let eps3 = cfg.epsilon.powi(3);
    let mut windows = Vec::new();
    for &n in &cfg.windows {
        let e = *schedule.entry(n).expect("scheduled");
        let (a, b) = e.window;
        let kept = (e.k / 3.0).floor() as u32;
        let k_box = (e.k.floor() as u32).min(cfg.box_radius);
        let sys = QuasiResonantSystem::build(
            &theta,
            SystemParams { k_inner: k_box, k_outer: k_box, m: e.m, nonlinearity: Nonlinearity::Defocusing, tail_norm: TailNorm::Euclidean },
        )?;
        let seed = profile_at(a)?.truncated(kept.min(cfg.box_radius));
        let step = (b - a) / cfg.samples_per_window as f64;
        let times: Vec<f64> = (1..=cfg.samples_per_window).map(|i| a + step * i as f64).collect();
        let effective = if cfg.nonlinear {
            effective_flow_samples(&seed.rebox(k_box), a, &times, &sys, Method::Rk45 { tol: cfg.tol })?
                .into_iter()
                .map(|g| g.rebox(cfg.box_radius))
                .collect()
        } else {
            vec![seed.clone(); times.len()]
        };
        let mut residual_h = Vec::new();
        let mut residual_z = Vec::new();
        for (t, g) in times.iter().zip(&effective) {
            let mut diff = profile_at(*t)?;
            for (d, x) in diff.amps.iter_mut().zip(&g.amps) {
                *d -= x;
            }
            residual_h.push(sobolev_norm(&diff, &theta, (order - 1) as f64)?);
            residual_z.push(z_d_norm(&diff, DEFAULT_EPS));
        }
        let worst = residual_h.iter().cloned().fold(0.0, f64::max);
        let c = if eps3 > 0.0 { worst / eps3 } else { 0.0 };
        windows.push(WindowResult { n, m: e.m, k: e.k, kept_radius: kept, times, residual_h, residual_z, c });
    }
    let m0 = run.mass[0];
    let mass_drift = run.mass.iter().map(|m| if m0 > 0.0 { (m / m0 - 1.0).abs() } else { *m }).fold(0.0, f64::max);
    Ok(CompareReport {
        sobolev_order: order,
        c: windows.iter().map(|w| w.c).fold(0.0, f64::max),
        max_residual_h: windows.iter().flat_map(|w| w.residual_h.iter().cloned()).fold(0.0, f64::max),
        max_residual_z: windows.iter().flat_map(|w| w.residual_z.iter().cloned()).fold(0.0, f64::max),
        windows,
        mass_drift,
        warnings: run.warnings,
    })
}

/// Nonlinear comparison plus the linear floor, with boundedness checks.
pub fn run_compare_effective(cfg: &CompareConfig) -> Result<RunRecord> {
    let main = compare_effective(cfg)?;
    let floor = compare_effective(&CompareConfig { nonlinear: false, ..cfg.clone() })?;
    let mut checks = vec![Check::at_most("residuals_finite", if main.max_residual_h.is_finite() { 0.0 } else { 1.0 }, 0.0)];
    if cfg.nonlinear && cfg.epsilon > 0.0 {
        let first = main.windows[0].c;
        let growth = main.windows.iter().map(|w| w.c).fold(0.0, f64::max) / first.max(f64::MIN_POSITIVE);
        checks.push(Check::at_most("window_constant_growth", growth, cfg.growth_limit));
        checks.push(Check::at_most(
            "linear_floor_ratio",
            floor.max_residual_h / main.max_residual_h.max(f64::MIN_POSITIVE),
            cfg.floor_ratio,
        ));
    }
    let data = json!({ "nonlinear": main, "linear": floor, "c": main.c, "epsilon_cubed": cfg.epsilon.powi(3) });
    RunRecord::new("compare-effective", cfg, checks, data)
}
