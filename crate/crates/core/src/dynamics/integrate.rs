use super::ode::{advance, Method, StepStats};
use super::rhs::Kernel;
use super::system::QuasiResonantSystem;
use crate::error::{Error, Result};
use crate::fields::{k_norm, linear_frequencies, norm_report, NormReport, NormSpec, SpectralField};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    pub t_span: (f64, f64),
    /// Time between recorded samples.
    pub monitor_stride: f64,
    /// `c` in the analyticity interval `c·|u0|_k^{-2}`.
    #[serde(default = "default_analyticity")]
    pub analyticity_constant: f64,
    #[serde(default)]
    pub keep_states: bool,
}

fn default_analyticity() -> f64 {
    1.0
}

impl IntegratorConfig {
    pub fn rk45(tol: f64, t_span: (f64, f64), monitor_stride: f64) -> Self {
        IntegratorConfig { method: Method::Rk45 { tol }, t_span, monitor_stride, analyticity_constant: 1.0, keep_states: false }
    }

    pub fn rk4(dt: f64, t_span: (f64, f64), monitor_stride: f64) -> Self {
        IntegratorConfig { method: Method::Rk4 { dt }, t_span, monitor_stride, analyticity_constant: 1.0, keep_states: false }
    }

    pub fn validate(&self) -> Result<()> {
        self.method.validate()?;
        let (a, b) = self.t_span;
        if !(a.is_finite() && b.is_finite() && b >= a) {
            return Err(Error::InvalidArgument(format!("t_span must be increasing, got ({a}, {b})")));
        }
        if !(self.monitor_stride > 0.0) {
            return Err(Error::InvalidArgument("monitor_stride must be positive".into()));
        }
        Ok(())
    }

    /// `t0, t0 + stride, …, t1`.
    pub fn sample_times(&self) -> Vec<f64> {
        let (a, b) = self.t_span;
        let mut out = vec![a];
        let mut i = 1u64;
        loop {
            let t = a + self.monitor_stride * i as f64;
            if t >= b - 1e-12 * self.monitor_stride {
                break;
            }
            out.push(t);
            i += 1;
        }
        if b > a {
            out.push(b);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftDiagnostics {
    /// `(k, max_t | |v(t)|_k / |v(0)|_k − 1 |)`.
    pub k_norm_drift: Vec<(f64, f64)>,
    /// Largest relative change of the per-slice ℓ² mass.
    pub slice_mass_drift: f64,
    /// Largest amplitude outside the protected box over all samples.
    pub max_outside_protected: f64,
    pub protected_radius: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub reports: Vec<NormReport>,
    pub support_radius: Vec<Option<u32>>,
    pub drift: DriftDiagnostics,
    pub steps: StepStats,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub final_state: Option<SpectralField>,
    #[serde(skip)]
    pub states: Vec<SpectralField>,
}

/// Which right-hand side drives the per-slice ODEs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Truncated,
    Gauged,
}

/// Integrate the truncated system from `u0`.
pub fn integrate(sys: &QuasiResonantSystem, u0: &SpectralField, cfg: &IntegratorConfig) -> Result<TrajectoryRecord> {
    integrate_flow(sys, u0, cfg, Flow::Truncated, &NormSpec::for_dim(sys.dim()))
}

pub fn integrate_flow(
    sys: &QuasiResonantSystem,
    u0: &SpectralField,
    cfg: &IntegratorConfig,
    flow: Flow,
    spec: &NormSpec,
) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    if !u0.is_finite() {
        return Err(Error::NonFinite { t: cfg.t_span.0, what: "initial data".into() });
    }
    let mut kernel = Kernel::new(sys, &u0.lattice)?;
    kernel.restrict_to_closure(&Kernel::support_of(u0));
    let freq = linear_frequencies(&u0.grid, &u0.lattice, &sys.theta)?;
    let times = cfg.sample_times();
    let n = u0.modes_len();
    let mu = sys.mu();

    let per_slice: Vec<Result<(Vec<Vec<Complex64>>, StepStats)>> = (0..u0.grid.count)
        .into_par_iter()
        .map(|j| {
            let w = &freq[j * n..(j + 1) * n];
            let mut y = u0.slice(j).to_vec();
            let mut rhs = |t: f64, y: &[Complex64], out: &mut [Complex64]| match flow {
                Flow::Truncated => kernel.truncated(mu, y, t, out),
                Flow::Gauged => kernel.gauged(mu, w, y, out),
            };
            let mut samples = vec![y.clone()];
            let mut stats = StepStats::default();
            for win in times.windows(2) {
                stats.merge(advance(cfg.method, &mut rhs, win[0], win[1], &mut y)?);
                samples.push(y.clone());
            }
            Ok((samples, stats))
        })
        .collect();

    let mut slices = Vec::with_capacity(per_slice.len());
    let mut steps = StepStats::default();
    for r in per_slice {
        let (s, st) = r?;
        steps.merge(st);
        slices.push(s);
    }
    let states: Vec<SpectralField> = (0..times.len())
        .map(|i| {
            let mut f = SpectralField::zeros(u0.grid, u0.lattice);
            f.time_origin = times[i];
            for (j, s) in slices.iter().enumerate() {
                f.slice_mut(j).copy_from_slice(&s[i]);
            }
            f
        })
        .collect();
    record(sys, u0, cfg, spec, times, states, steps)
}

fn record(
    sys: &QuasiResonantSystem,
    u0: &SpectralField,
    cfg: &IntegratorConfig,
    spec: &NormSpec,
    times: Vec<f64>,
    mut states: Vec<SpectralField>,
    steps: StepStats,
) -> Result<TrajectoryRecord> {
    let reports = states
        .par_iter()
        .zip(times.par_iter())
        .map(|(s, &t)| norm_report(s, &sys.theta, spec, t))
        .collect::<Result<Vec<_>>>()?;
    let support_radius = reports.iter().map(|r| r.support_radius).collect();
    let base = &reports[0];
    let k_norm_drift = spec
        .ks
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let b = base.k_norms[i].1;
            let d = reports
                .iter()
                .map(|r| if b > 0.0 { (r.k_norms[i].1 / b - 1.0).abs() } else { r.k_norms[i].1 })
                .fold(0.0, f64::max);
            (k, d)
        })
        .collect();
    let mass = |f: &SpectralField| f.slices().map(|s| s.iter().map(|z| z.norm_sqr()).sum::<f64>()).collect::<Vec<_>>();
    let m0 = mass(&states[0]);
    let slice_mass_drift = states
        .iter()
        .flat_map(|s| mass(s).into_iter().zip(m0.clone()).map(|(m, b)| if b > 0.0 { (m / b - 1.0).abs() } else { m }))
        .fold(0.0, f64::max);
    let protected = sys.protected_radius();
    let max_outside_protected = states.iter().map(|s| s.max_outside(protected)).fold(0.0, f64::max);

    let mut warnings = Vec::new();
    let ka = u0.lattice.dim as f64 / 2.0 + spec.eps;
    let k0 = k_norm(u0, ka);
    if k0 > 0.0 {
        let window = cfg.analyticity_constant / (k0 * k0);
        let gap = times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        if gap > window {
            warnings.push(format!(
                "sample interval {gap:.3e} exceeds analyticity window {window:.3e} (c = {}, |u0|_k = {k0:.3e})",
                cfg.analyticity_constant
            ));
        }
    }
    let final_state = states.last().cloned();
    if !cfg.keep_states {
        states.clear();
    }
    Ok(TrajectoryRecord {
        times,
        reports,
        support_radius,
        drift: DriftDiagnostics { k_norm_drift, slice_mass_drift, max_outside_protected, protected_radius: protected },
        steps,
        warnings,
        final_state,
        states,
    })
}
