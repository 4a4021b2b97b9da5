use super::config::{sqrt_prime, DataSpec, ThresholdSpec, XiSpec};
use super::record::{Check, RunRecord};
use super::schedule::ScheduleEntry;
use crate::dynamics::{
    claim_identity_check, integrate_flow, Flow, IntegratorConfig, Method, Nonlinearity, QuasiResonantSystem, SystemParams,
    TrajectoryRecord,
};
use crate::error::{Error, Result};
use crate::fields::{NormSpec, SpectralField};
use crate::lattice::{LatticeBox, ThetaSpec};
use crate::resonance::TailNorm;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulateConfig {
    pub theta: ThetaSpec,
    pub k_inner: u32,
    pub k_outer: u32,
    pub m: ThresholdSpec,
    pub nonlinearity: Nonlinearity,
    pub tail_norm: TailNorm,
    /// Integrate the gauged system instead of the truncated one.
    pub gauged: bool,
    pub xi: XiSpec,
    pub data: DataSpec,
    pub integrator: Method,
    pub t_end: f64,
    pub monitor_stride: f64,
    pub analyticity_constant: f64,
    pub seed: u64,
    /// Keep every sampled state (needed for snapshots).
    pub keep_states: bool,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            theta: sqrt_prime(2),
            k_inner: 8,
            k_outer: 8,
            m: ThresholdSpec::Schedule { schedule_n: 3, delta: 1e-3, profile_k: 64 },
            nonlinearity: Nonlinearity::Defocusing,
            tail_norm: TailNorm::Euclidean,
            gauged: false,
            xi: XiSpec { half_width: 1.0, count: 8 },
            data: DataSpec { radius: 2, amplitude: 0.3, xi_width: 0.5 },
            integrator: Method::Rk45 { tol: 1e-10 },
            t_end: 10.0,
            monitor_stride: 1.0,
            analyticity_constant: 1.0,
            seed: 7,
            keep_states: false,
        }
    }
}

pub struct Simulation {
    pub system: QuasiResonantSystem,
    pub schedule_entry: Option<ScheduleEntry>,
    pub initial: SpectralField,
    pub trajectory: TrajectoryRecord,
}

impl SimulateConfig {
    pub fn system(&self) -> Result<(QuasiResonantSystem, Option<ScheduleEntry>)> {
        let theta = self.theta.build()?;
        let (m, entry) = self.m.resolve(&theta)?;
        let params = SystemParams {
            k_inner: self.k_inner,
            k_outer: self.k_outer,
            m,
            nonlinearity: self.nonlinearity,
            tail_norm: self.tail_norm,
        };
        Ok((QuasiResonantSystem::build(&theta, params)?, entry))
    }

    fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig {
            method: self.integrator,
            t_span: (0.0, self.t_end),
            monitor_stride: self.monitor_stride,
            analyticity_constant: self.analyticity_constant,
            keep_states: self.keep_states,
        }
    }
}

pub fn simulate(cfg: &SimulateConfig) -> Result<Simulation> {
    let (system, schedule_entry) = cfg.system()?;
    simulate_with(cfg, system, schedule_entry)
}

fn simulate_with(cfg: &SimulateConfig, system: QuasiResonantSystem, schedule_entry: Option<ScheduleEntry>) -> Result<Simulation> {
    let lattice = LatticeBox::new(system.dim(), cfg.k_outer);
    let initial = cfg.data.build(cfg.xi.grid()?, lattice, cfg.seed)?;
    let flow = if cfg.gauged { Flow::Gauged } else { Flow::Truncated };
    let trajectory = integrate_flow(&system, &initial, &cfg.integrator(), flow, &NormSpec::for_dim(system.dim()))?;
    Ok(Simulation { system, schedule_entry, initial, trajectory })
}

fn system_summary(sys: &QuasiResonantSystem, entry: &Option<ScheduleEntry>) -> serde_json::Value {
    json!({
        "theta": sys.theta.label(),
        "m": sys.params.m,
        "schedule_entry": entry,
        "resonant_quartets": sys.resonant.len(),
        "quasi_quartets": sys.quasi.len(),
        "quasi_levels": sys.quasi.groups.len(),
        "protected_radius": sys.protected_radius(),
    })
}

pub fn run_simulate(cfg: &SimulateConfig) -> Result<(RunRecord, Simulation)> {
    let sim = simulate(cfg)?;
    let data = json!({
        "system": system_summary(&sim.system, &sim.schedule_entry),
        "trajectory": sim.trajectory,
    });
    Ok((RunRecord::new("simulate", cfg, Vec::new(), data)?, sim))
}

/// Out-of-box data under the same system; the conserved norm should move.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NegativeControl {
    pub enabled: bool,
    pub data_radius: u32,
    pub amplitude: f64,
    pub t_end: f64,
    pub tol: f64,
    pub trials: u32,
    pub limit: f64,
}

impl Default for NegativeControl {
    fn default() -> Self {
        NegativeControl { enabled: true, data_radius: 8, amplitude: 0.1, t_end: 1.0, tol: 1e-8, trials: 2, limit: 1e-3 }
    }
}

/// Random-slice test of the real-valuedness identity behind k-norm conservation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClaimBattery {
    pub enabled: bool,
    pub dim: usize,
    pub k: u32,
    /// Quasi-resonant terms need a mode outside this max-norm ball.
    pub k_inner: u32,
    pub m: f64,
    pub slices: u32,
    pub ks: Vec<f64>,
    pub limit: f64,
    pub negative_trials: u32,
    /// Fraction of modes outside the inner ball that carry data in a negative trial.
    pub negative_density: f64,
    pub negative_limit: f64,
}

impl Default for ClaimBattery {
    fn default() -> Self {
        ClaimBattery {
            enabled: true,
            dim: 2,
            k: 6,
            k_inner: 2,
            m: 0.2,
            slices: 100,
            ks: vec![0.0, 1.0, 2.5],
            limit: 1e-12,
            negative_trials: 20,
            negative_density: 0.3,
            negative_limit: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub run: SimulateConfig,
    pub drift_limit: f64,
    pub cascade_limit: f64,
    pub mass_limit: f64,
    pub negative: NegativeControl,
    pub claim: ClaimBattery,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            run: SimulateConfig::default(),
            drift_limit: 1e-6,
            cascade_limit: 1e-8,
            mass_limit: 1e-8,
            negative: NegativeControl::default(),
            claim: ClaimBattery::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimResult {
    pub max_defect: f64,
    pub negative_defects: Vec<f64>,
}

pub fn claim_battery(cfg: &ClaimBattery, seed: u64) -> Result<ClaimResult> {
    let theta = crate::lattice::ThetaVector::sqrt_primes(cfg.dim)?;
    let params = SystemParams { k_inner: cfg.k_inner, k_outer: cfg.k, m: cfg.m, nonlinearity: Nonlinearity::Defocusing, tail_norm: TailNorm::Max };
    let sys = QuasiResonantSystem::build(&theta, params)?;
    if sys.quasi.is_empty() {
        return Err(Error::InvalidArgument("claim negative control needs quasi-resonant terms".into()));
    }
    let lattice = LatticeBox::new(cfg.dim, cfg.k);
    let inner = cfg.k / 3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng, keep: &dyn Fn(&[i64]) -> bool, density: f64| -> Vec<Complex64> {
        lattice
            .modes()
            .map(|p| {
                let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                if rng.gen_bool(density) && keep(&p) { c } else { Complex64::new(0.0, 0.0) }
            })
            .collect()
    };
    let in_ball = |p: &[i64]| p.iter().all(|x| x.unsigned_abs() as u32 <= inner);
    let mut max_defect: f64 = 0.0;
    for _ in 0..cfg.slices {
        let z = draw(&mut rng, &in_ball, 1.0);
        let t = rng.gen_range(0.0..10.0);
        for &k in &cfg.ks {
            max_defect = max_defect.max(claim_identity_check(&z, &lattice, &sys, k, t)?);
        }
    }
    let mut negative_defects = Vec::new();
    let k = cfg.ks.iter().cloned().fold(0.0, f64::max);
    for _ in 0..cfg.negative_trials {
        let z = draw(&mut rng, &|p: &[i64]| !in_ball(p), cfg.negative_density);
        let t = rng.gen_range(0.0..10.0);
        negative_defects.push(claim_identity_check(&z, &lattice, &sys, k, t)?);
    }
    Ok(ClaimResult { max_defect, negative_defects })
}

pub fn run_conservation_suite(cfg: &SuiteConfig) -> Result<RunRecord> {
    let (system, entry) = cfg.run.system()?;
    let sim = simulate_with(&cfg.run, system.clone(), entry)?;
    let tr = &sim.trajectory;
    let mut checks = Vec::new();
    for (k, d) in &tr.drift.k_norm_drift {
        checks.push(Check::at_most(&format!("k_norm_drift[k={k}]"), *d, cfg.drift_limit));
    }
    checks.push(Check::at_most("no_cascade", tr.drift.max_outside_protected, cfg.cascade_limit));
    checks.push(Check::at_most("slice_mass_drift", tr.drift.slice_mass_drift, cfg.mass_limit));
    let mut data = json!({
        "system": system_summary(&sim.system, &sim.schedule_entry),
        "drift": tr.drift,
        "steps": tr.steps,
        "warnings": tr.warnings,
        "support_radius": tr.support_radius,
    });

    if cfg.negative.enabled {
        let n = &cfg.negative;
        let mut drifts = Vec::new();
        for trial in 0..n.trials {
            let mut run = cfg.run.clone();
            run.data.radius = n.data_radius.min(run.k_outer);
            run.data.amplitude = n.amplitude;
            run.t_end = n.t_end;
            run.monitor_stride = n.t_end;
            run.integrator = Method::Rk45 { tol: n.tol };
            run.seed = cfg.run.seed.wrapping_add(1000 + trial as u64);
            let s = simulate_with(&run, system.clone(), entry)?;
            let worst = s.trajectory.drift.k_norm_drift.iter().map(|x| x.1).fold(0.0, f64::max);
            drifts.push(worst);
        }
        let best = drifts.iter().cloned().fold(0.0, f64::max);
        checks.push(Check::at_least("negative_control_drift", best, n.limit));
        data["negative_control"] = json!({ "quasi_quartets": system.quasi.len(), "drifts": drifts });
    }
    if cfg.claim.enabled {
        let c = claim_battery(&cfg.claim, cfg.run.seed)?;
        checks.push(Check::at_most("claim_identity_defect", c.max_defect, cfg.claim.limit));
        let worst = c.negative_defects.iter().cloned().fold(0.0, f64::max);
        checks.push(Check::at_least("claim_negative_control", worst, cfg.claim.negative_limit));
        data["claim"] = serde_json::to_value(&c)?;
    }
    RunRecord::new("verify-invariants", cfg, checks, data)
}
