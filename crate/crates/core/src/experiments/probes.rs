use super::config::{default_delta, default_profile_k, sqrt_prime, ThresholdSpec, XiSpec};
use super::record::{Check, RunRecord};
use super::schedule::{build_schedule, Schedule};
use crate::diophantine::{gap_profile, gap_to_box_bound, khintchine_scan};
use crate::dynamics::{Nonlinearity, QuasiResonantSystem, SystemParams};
use crate::error::Result;
use crate::fields::SpectralField;
use crate::lattice::{LatticeBox, ThetaSpec};
use crate::oscillatory::{pi_vs_r_gap, stationary_phase_error, OscillatoryProbe, ProbeProfile};
use crate::resonance::{
    brute_force_resonant, enumerate_quasi_with, enumerate_resonant, level_histogram, min_nonzero_level, QuartetList, TailNorm,
    DEFAULT_BRUTE_BUDGET,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

fn one_root_two() -> ThetaSpec {
    ThetaSpec::Explicit { squares: vec!["1".into(), "sqrt(2)".into()], independence_certified: true }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProfileConfig {
    pub theta: ThetaSpec,
    pub k_max: u32,
    pub ms: Vec<f64>,
    /// Cutoff for the second-condition scan; `0` skips it.
    pub scan_cutoff: u32,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig { theta: one_root_two(), k_max: 64, ms: vec![10.0, 100.0, 1000.0], scan_cutoff: 0 }
    }
}

pub fn run_profile(cfg: &ProfileConfig) -> Result<RunRecord> {
    let theta = cfg.theta.build()?;
    let profile = gap_profile(&theta, cfg.k_max)?;
    let bounds = cfg.ms.iter().map(|&m| gap_to_box_bound(&profile, m)).collect::<Result<Vec<_>>>()?;
    let scan = if cfg.scan_cutoff > 0 { Some(khintchine_scan(&theta, cfg.scan_cutoff)?) } else { None };
    let law = profile.law().ok();
    let data = json!({ "profile": profile, "law": law, "bounds": bounds, "scan": scan });
    RunRecord::new("profile-theta", cfg, Vec::new(), data)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiSpec {
    pub m: ThresholdSpec,
    pub k_inner: u32,
    #[serde(default)]
    pub tail_norm: TailNorm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnumConfig {
    pub theta: ThetaSpec,
    pub k_outer: u32,
    pub quasi: Option<QuasiSpec>,
    /// Compare the resonant list against the direct triple loop.
    pub brute_check: bool,
    pub histogram_bins: usize,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig { theta: sqrt_prime(2), k_outer: 3, quasi: None, brute_check: true, histogram_bins: 10 }
    }
}

pub fn run_enum(cfg: &EnumConfig) -> Result<(RunRecord, QuartetList)> {
    let theta = cfg.theta.build()?;
    let mut checks = Vec::new();
    let (list, mut data) = match &cfg.quasi {
        None => {
            let list = enumerate_resonant(&theta, cfg.k_outer)?;
            if cfg.brute_check {
                let brute = brute_force_resonant(&theta, cfg.k_outer)?;
                let same = brute.canonical() == list.canonical();
                checks.push(Check::at_most("brute_force_mismatch", if same { 0.0 } else { 1.0 }, 0.0));
            }
            (list, json!({}))
        }
        Some(q) => {
            let (m, entry) = q.m.resolve(&theta)?;
            let list = enumerate_quasi_with(&theta, cfg.k_outer, m, q.k_inner, q.tail_norm, DEFAULT_BRUTE_BUDGET)?;
            let hist = level_histogram(&list, cfg.histogram_bins)?;
            (list, json!({ "m": m, "schedule_entry": entry, "histogram": hist }))
        }
    };
    data["quartets"] = json!(list.len());
    data["levels"] = json!(list.groups.len());
    data["flagged"] = json!(list.flagged_count());
    Ok((RunRecord::new("enum-resonances", cfg, checks, data)?, list))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinGapConfig {
    pub theta: ThetaSpec,
    pub radii: Vec<u32>,
    pub ms: Vec<f64>,
    pub profile_k: u32,
    /// Confirm by enumeration that no quasi-resonant quartet sits inside each bound.
    pub verify_emptiness: bool,
    pub brute_budget: u64,
}

impl Default for MinGapConfig {
    fn default() -> Self {
        MinGapConfig { theta: one_root_two(), radii: (1..=5).collect(), ms: vec![10.0, 100.0, 1000.0], profile_k: 256, verify_emptiness: true, brute_budget: 1_000_000_000 }
    }
}

pub fn run_min_gap(cfg: &MinGapConfig) -> Result<RunRecord> {
    let theta = cfg.theta.build()?;
    let mut rows = Vec::new();
    for &k in &cfg.radii {
        let row = match min_nonzero_level(&theta, k)? {
            Some((level, q)) => json!({
                "k": k,
                "omega": level.omega_f64(),
                "omega_interval": level.omega_interval(),
                "coeffs": level.coeffs,
                "witness": q,
            }),
            None => json!({ "k": k, "omega": null }),
        };
        rows.push(row);
    }
    let profile = gap_profile(&theta, cfg.profile_k)?;
    let mut bounds = Vec::new();
    let mut checks = Vec::new();
    for &m in &cfg.ms {
        let b = gap_to_box_bound(&profile, m)?;
        let radius = b.radius.floor() as u32;
        let mut entry = json!({ "bound": b });
        if cfg.verify_emptiness {
            let found = enumerate_quasi_with(&theta, radius, m, 0, TailNorm::Euclidean, cfg.brute_budget.into())?.len();
            let level = min_nonzero_level(&theta, radius)?.map(|(l, _)| l.omega_f64().abs());
            entry["quasi_quartets_inside"] = json!(found);
            entry["min_level_inside"] = json!(level);
            checks.push(Check::at_most(&format!("empty_below_bound[M={m}]"), found as f64, 0.0));
        }
        bounds.push(entry);
    }
    RunRecord::new("min-gap", cfg, checks, json!({ "minima": rows, "bounds": bounds }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StationaryConfig {
    pub count: usize,
    pub half_width: f64,
    pub base: f64,
    pub lo: i32,
    pub hi: i32,
    pub profiles: [ProbeProfile; 3],
    pub scale_with_s: bool,
    pub slope_band: (f64, f64),
    /// Allowed growth of `E(s)·s` over its first value.
    pub growth_limit: f64,
}

impl Default for StationaryConfig {
    fn default() -> Self {
        StationaryConfig {
            count: 16384,
            half_width: 64.0,
            base: 2.0,
            lo: 4,
            hi: 14,
            profiles: [ProbeProfile::Bump, ProbeProfile::Ramp, ProbeProfile::Wave],
            scale_with_s: true,
            slope_band: (-1.5, -1.0),
            growth_limit: 1.05,
        }
    }
}

pub fn run_stationary(cfg: &StationaryConfig) -> Result<(RunRecord, OscillatoryProbe)> {
    let mut probe = OscillatoryProbe::new(cfg.count, cfg.half_width, OscillatoryProbe::geometric(cfg.base, cfg.lo, cfg.hi));
    probe.profiles = cfg.profiles;
    probe.scale_with_s = cfg.scale_with_s;
    stationary_phase_error(&mut probe)?;
    let slope = probe.slope.unwrap_or(f64::NAN);
    let first = probe.results[0].normalized * probe.results[0].s;
    let growth = probe.results.iter().map(|r| r.normalized * r.s).fold(0.0, f64::max) / first;
    let checks = vec![
        Check::within("slope", slope, cfg.slope_band.0, cfg.slope_band.1),
        Check::at_most("error_times_s_growth", growth, cfg.growth_limit),
    ];
    let data = json!({ "slope": slope, "rows": probe.results });
    Ok((RunRecord::new("stationary-phase", cfg, checks, data)?, probe))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PiVsRConfig {
    pub theta: ThetaSpec,
    pub k_outer: u32,
    pub k_inner: u32,
    pub m: f64,
    pub xi: XiSpec,
    /// Physical width of the bump profiles.
    pub width: f64,
    pub amplitude: f64,
    pub times: Vec<f64>,
    pub exponent: f64,
    pub growth_limit: f64,
}

impl Default for PiVsRConfig {
    fn default() -> Self {
        PiVsRConfig {
            theta: sqrt_prime(1),
            k_outer: 2,
            k_inner: 0,
            m: 0.1,
            xi: XiSpec { half_width: 32.0, count: 2048 },
            width: 8.0,
            amplitude: 0.5,
            times: vec![1e2, 1e3, 1e4, 1e5],
            exponent: 1.05,
            growth_limit: 1.05,
        }
    }
}

fn bump(x: f64) -> f64 {
    if x.abs() < 1.0 { (-1.0 / (1.0 - x * x)).exp() } else { 0.0 }
}

/// Three distinct smooth compactly supported fields on the box.
pub fn pi_vs_r_fields(cfg: &PiVsRConfig, dim: usize) -> Result<[SpectralField; 3]> {
    let grid = cfg.xi.grid()?;
    let lattice = LatticeBox::new(dim, cfg.k_outer);
    let make = |c: f64| {
        SpectralField::from_physical(grid, lattice, |x, p| {
            let a = 1.0 + 0.3 * p.iter().sum::<i64>() as f64;
            let y = x / cfg.width;
            Complex64::from_polar(bump(y) * (1.0 + c * y) * cfg.amplitude, a * c)
        })
    };
    Ok([make(0.0), make(0.5), make(-0.4)])
}

pub fn run_pi_vs_r(cfg: &PiVsRConfig) -> Result<RunRecord> {
    let theta = cfg.theta.build()?;
    let params = SystemParams { k_inner: cfg.k_inner, k_outer: cfg.k_outer, m: cfg.m, nonlinearity: Nonlinearity::Defocusing, tail_norm: TailNorm::Euclidean };
    let sys = QuasiResonantSystem::build(&theta, params)?;
    let [f, g, h] = pi_vs_r_fields(cfg, theta.dim())?;
    let mut rows = Vec::new();
    for &t in &cfg.times {
        let gap = pi_vs_r_gap(&f, &g, &h, &sys, t)?;
        rows.push(json!({ "t": t, "gap": gap, "weighted": gap * t.powf(cfg.exponent) }));
    }
    let weighted: Vec<f64> = rows.iter().map(|r| r["weighted"].as_f64().unwrap_or(f64::NAN)).collect();
    let growth = weighted.iter().cloned().fold(0.0, f64::max) / weighted[0];
    let checks = vec![Check::at_most("weighted_gap_growth", if growth.is_finite() { growth } else { f64::INFINITY }, cfg.growth_limit)];
    let data = json!({ "quasi_quartets": sys.quasi.len(), "rows": rows });
    RunRecord::new("pi-vs-r", cfg, checks, data)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScheduleConfig {
    pub theta: ThetaSpec,
    pub profile_k: u32,
    pub delta: f64,
    pub n_max: u32,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig { theta: one_root_two(), profile_k: default_profile_k(), delta: default_delta(), n_max: 10 }
    }
}

/// Monotonicity, exact `K = C·M^{1/(2γ)}` and the window partition.
pub fn schedule_checks(s: &Schedule) -> Vec<Check> {
    let mono = s.entries.windows(2).filter(|w| !(w[1].m > w[0].m && w[1].k > w[0].k)).count();
    let law = s
        .entries
        .iter()
        .map(|e| (e.k / (s.box_constant * e.m.powf(1.0 / (2.0 * s.gamma))) - 1.0).abs())
        .fold(0.0, f64::max);
    let gaps = s.entries.windows(2).filter(|w| w[0].window.1 != w[1].window.0).count()
        + usize::from(s.entries.first().is_some_and(|e| e.window.0 != 1.0));
    vec![
        Check::at_most("monotonicity_violations", mono as f64, 0.0),
        Check::at_most("law_consistency", law, 1e-12),
        Check::at_most("window_partition_gaps", gaps as f64, 0.0),
    ]
}

pub fn run_schedule(cfg: &ScheduleConfig) -> Result<(RunRecord, Schedule)> {
    let theta = cfg.theta.build()?;
    let profile = gap_profile(&theta, cfg.profile_k)?;
    let s = build_schedule(&profile, cfg.delta, cfg.n_max)?;
    let checks = if cfg.n_max > 0 { schedule_checks(&s) } else { Vec::new() };
    let data = json!({ "schedule": s, "conditional_on_fit": true, "fit_slack": profile.fit_slack });
    Ok((RunRecord::new("schedule", cfg, checks, data)?, s))
}
