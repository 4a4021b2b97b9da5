//! Trilinear oscillatory forms `I^t[f,g,h] = U(−t)(U(t)f · conj(U(t)g) · U(t)h)` with
//! `U(t) = e^{it∂ₓₓ}`, their stationary-phase limit, and the resonant-sum comparison.

use crate::dynamics::QuasiResonantSystem;
use crate::error::{Error, Result};
use crate::fields::{z_d_norm, SpectralField, SpectralLine, DEFAULT_EPS};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const TAIL_LIMIT: f64 = 1e-10;
pub const DEFAULT_PI_BUDGET: u128 = 20_000_000_000;

/// Fraction of `Σ|F̂|²` carried by `|ξ| > 0.8 ξ_max`.
fn spectral_tail(line: &SpectralLine, spec: &[Complex64]) -> f64 {
    let xis = line.xis();
    let cut = 0.8 * xis.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let (mut tail, mut total) = (0.0, 0.0);
    for (z, xi) in spec.iter().zip(&xis) {
        let e = z.norm_sqr();
        total += e;
        if xi.abs() > cut {
            tail += e;
        }
    }
    if total > 0.0 { tail / total } else { 0.0 }
}

/// Fraction of `Σ|f|²` in the outer tenth of the x-box.
fn wrap_fraction(vals: &[Complex64]) -> f64 {
    let n = vals.len();
    let edge = n / 20;
    let (mut tail, mut total) = (0.0, 0.0);
    for (m, z) in vals.iter().enumerate() {
        let e = z.norm_sqr();
        total += e;
        if m < edge || m >= n - edge {
            tail += e;
        }
    }
    if total > 0.0 { tail / total } else { 0.0 }
}

fn check(frac: f64) -> Result<()> {
    if frac > TAIL_LIMIT {
        Err(Error::Aliasing { tail: frac, limit: TAIL_LIMIT })
    } else {
        Ok(())
    }
}

fn triple(f: &[Complex64], g: &[Complex64], h: &[Complex64]) -> Vec<Complex64> {
    f.iter().zip(g).zip(h).map(|((a, b), c)| a * b.conj() * c).collect()
}

fn by_propagation(line: &SpectralLine, f: &[Complex64], g: &[Complex64], h: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
    let xis = line.xis();
    let go = |s: &[Complex64]| -> Result<Vec<Complex64>> {
        let v: Vec<Complex64> = s.iter().zip(&xis).map(|(z, xi)| z * Complex64::from_polar(1.0, -t * xi * xi)).collect();
        let x = line.to_x(&v);
        check(wrap_fraction(&x))?;
        Ok(x)
    };
    let (a, b, c) = (go(f)?, go(g)?, go(h)?);
    let mut out = line.to_xi(&triple(&a, &b, &c));
    for (z, xi) in out.iter_mut().zip(&xis) {
        *z *= Complex64::from_polar(1.0, t * xi * xi);
    }
    Ok(out)
}

/// Lens form: `I^t = (π/|t|) e^{−ix²/4t} q`, where `q̂ = Â·conj(B̂)·Ĉ` and `A = e^{ix²/4t} f` etc.
fn by_lens(line: &SpectralLine, f: &[Complex64], g: &[Complex64], h: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
    let xs = line.xs();
    let chirp = |s: &[Complex64], sign: f64| -> Vec<Complex64> {
        let mut x = line.to_x(s);
        for (z, y) in x.iter_mut().zip(&xs) {
            *z *= Complex64::from_polar(1.0, sign * y * y / (4.0 * t));
        }
        x
    };
    let hat = |s: &[Complex64]| -> Result<Vec<Complex64>> {
        let x = chirp(s, 1.0);
        let v = line.to_xi(&x);
        check(spectral_tail(line, &v))?;
        Ok(v)
    };
    let (a, b, c) = (hat(f)?, hat(g)?, hat(h)?);
    let mut q = line.to_x(&triple(&a, &b, &c));
    check(wrap_fraction(&q))?;
    let k = PI / t.abs();
    for (z, y) in q.iter_mut().zip(&xs) {
        *z *= Complex64::from_polar(k, -y * y / (4.0 * t));
    }
    Ok(line.to_xi(&q))
}

/// Spectrum of `I^t[f,g,h]` from the spectra of `f, g, h` on `line`.
///
/// Short times use the three free propagations directly; long times, where the
/// propagated profiles would wrap around the box, use the lens form.
pub fn i_t_apply(line: &SpectralLine, f: &[Complex64], g: &[Complex64], h: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
    let n = line.count();
    if f.len() != n || g.len() != n || h.len() != n {
        return Err(Error::GridMismatch(format!("spectra must have {n} entries")));
    }
    for s in [f, g, h] {
        check(spectral_tail(line, s))?;
    }
    if t == 0.0 {
        return Ok(line.to_xi(&triple(&line.to_x(f), &line.to_x(g), &line.to_x(h))));
    }
    let xi_max = line.xis().iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let length = n as f64 * line.dx();
    let prefer_lens = t.abs() >= length / xi_max;
    let (first, second): (fn(_, _, _, _, _) -> _, fn(_, _, _, _, _) -> _) =
        if prefer_lens { (by_lens, by_propagation) } else { (by_propagation, by_lens) };
    match first(line, f, g, h, t) {
        Err(Error::Aliasing { .. }) => second(line, f, g, h, t),
        other => other,
    }
}

/// `(π/t)·f̂·conj(ĝ)·ĥ`.
pub fn stationary_limit(f: &[Complex64], g: &[Complex64], h: &[Complex64], t: f64) -> Vec<Complex64> {
    let k = PI / t;
    triple(f, g, h).into_iter().map(|z| z * k).collect()
}

/// Test functions for the stationary-phase probe, each supported in `[−1, 1]` unless Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeProfile {
    /// `exp(−1/(1−x²))`.
    Bump,
    /// Bump times `1 + x/2`.
    Ramp,
    /// Bump times `e^{ix}`.
    Wave,
    /// `e^{−x²/2}`.
    Gaussian,
}

impl ProbeProfile {
    pub fn eval(self, x: f64) -> Complex64 {
        let bump = || if x.abs() < 1.0 { (-1.0 / (1.0 - x * x)).exp() } else { 0.0 };
        match self {
            ProbeProfile::Bump => Complex64::new(bump(), 0.0),
            ProbeProfile::Ramp => Complex64::new(bump() * (1.0 + 0.5 * x), 0.0),
            ProbeProfile::Wave => Complex64::from_polar(bump(), x),
            ProbeProfile::Gaussian => Complex64::new((-x * x / 2.0).exp(), 0.0),
        }
    }

    pub fn compact(self) -> bool {
        !matches!(self, ProbeProfile::Gaussian)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryPhaseRow {
    pub s: f64,
    /// `max_ξ |I^s − (π/s) f̂ conj(ĝ) ĥ|`.
    pub error: f64,
    /// `error / (‖f‖‖g‖‖h‖)`.
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatoryProbe {
    pub count: usize,
    pub half_width: f64,
    pub s_values: Vec<f64>,
    pub profiles: [ProbeProfile; 3],
    /// Evaluate the profiles at `s^{−1/4}x`, the widest support the hypothesis allows.
    pub scale_with_s: bool,
    #[serde(default)]
    pub results: Vec<StationaryPhaseRow>,
    /// Least-squares slope of `log normalized` against `log s`.
    #[serde(default)]
    pub slope: Option<f64>,
}

impl OscillatoryProbe {
    pub fn new(count: usize, half_width: f64, s_values: Vec<f64>) -> Self {
        OscillatoryProbe {
            count,
            half_width,
            s_values,
            profiles: [ProbeProfile::Bump, ProbeProfile::Ramp, ProbeProfile::Wave],
            scale_with_s: true,
            results: Vec::new(),
            slope: None,
        }
    }

    /// `s_k = base^k` for `k = lo..=hi`.
    pub fn geometric(base: f64, lo: i32, hi: i32) -> Vec<f64> {
        (lo..=hi).map(|k| base.powi(k)).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.s_values.is_empty() || self.s_values.iter().any(|&s| !(s >= 1.0)) {
            return Err(Error::InvalidArgument("s values must be at least 1".into()));
        }
        if !self.scale_with_s && self.profiles.iter().all(|p| p.compact()) {
            let smin = self.s_values.iter().cloned().fold(f64::INFINITY, f64::min);
            if smin.powf(0.25) < 1.0 {
                return Err(Error::InvalidArgument("profiles exceed the s^{1/4} support window".into()));
            }
        }
        let smax = self.s_values.iter().cloned().fold(0.0, f64::max);
        let reach = if self.scale_with_s { smax.powf(0.25) } else { 1.0 };
        if 3.0 * reach >= 0.9 * self.half_width {
            return Err(Error::InvalidArgument(format!(
                "half-width {} too small for support {reach:.3}",
                self.half_width
            )));
        }
        Ok(())
    }
}

/// Fill `probe.results` and `probe.slope`.
pub fn stationary_phase_error(probe: &mut OscillatoryProbe) -> Result<()> {
    probe.validate()?;
    let line = SpectralLine::periodic(probe.count, 2.0 * probe.half_width)?;
    let xs = line.xs();
    let dx = line.dx();
    let rows = probe
        .s_values
        .par_iter()
        .map(|&s| {
            let scale = if probe.scale_with_s { s.powf(-0.25) } else { 1.0 };
            let sample = |p: ProbeProfile| xs.iter().map(|&x| p.eval(scale * x)).collect::<Vec<_>>();
            let phys: Vec<Vec<Complex64>> = probe.profiles.iter().map(|&p| sample(p)).collect();
            let norm = |v: &[Complex64]| (v.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx).sqrt();
            let norms: f64 = phys.iter().map(|v| norm(v)).product();
            let spec: Vec<Vec<Complex64>> = phys.iter().map(|v| line.to_xi(v)).collect();
            let it = i_t_apply(&line, &spec[0], &spec[1], &spec[2], s)?;
            let lim = stationary_limit(&spec[0], &spec[1], &spec[2], s);
            let error = it.iter().zip(&lim).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            Ok(StationaryPhaseRow { s, error, normalized: error / norms })
        })
        .collect::<Result<Vec<_>>>()?;
    probe.slope = log_slope(&rows.iter().map(|r| (r.s, r.normalized)).collect::<Vec<_>>());
    probe.results = rows;
    Ok(())
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two positive points.
pub fn log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// `(Π^t, (π/t)R^t)` as fields: the oscillatory and stationary-limit sums over the system's quartets.
pub fn pi_and_r(
    f: &SpectralField,
    g: &SpectralField,
    h: &SpectralField,
    sys: &QuasiResonantSystem,
    t: f64,
    budget: u128,
) -> Result<(SpectralField, SpectralField)> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("t must be positive, got {t}")));
    }
    if !f.same_shape(g) || !f.same_shape(h) {
        return Err(Error::GridMismatch("fields must share grid and box".into()));
    }
    if f.lattice.dim != sys.dim() {
        return Err(Error::DimensionMismatch { expected: sys.dim(), got: f.lattice.dim });
    }
    if f.lattice.radius < sys.params.k_outer {
        return Err(Error::BoxMismatch { field: f.lattice.radius, system: sys.params.k_outer });
    }
    let count = f.grid.count;
    let quartets = (sys.resonant.len() + sys.quasi.len()) as u128;
    let per = 12 * count as u128 * (usize::BITS - count.leading_zeros()) as u128;
    if quartets * per > budget {
        return Err(Error::CostGuard { needed: quartets * per, budget });
    }
    let line = SpectralLine::for_grid(&f.grid);
    let src = sys.resonant.lattice_box();
    let map: Vec<usize> = src.modes().map(|p| f.lattice.index_of(&p).expect("box contains system box")).collect();
    let n = f.modes_len();
    let cols = |x: &SpectralField| (0..n).map(|m| x.column(m)).collect::<Vec<_>>();
    let (fc, gc, hc) = (cols(f), cols(g), cols(h));
    let zero: Vec<bool> = (0..n).map(|m| fc[m].iter().chain(&gc[m]).chain(&hc[m]).all(|z| z.norm_sqr() == 0.0)).collect();
    let mut work = Vec::new();
    for list in [&sys.resonant, &sys.quasi] {
        for grp in &list.groups {
            for q4 in &grp.quartets {
                let [p, q, r, s] = q4.map(|i| map[i as usize]);
                if !(zero[q] || zero[r] || zero[s]) {
                    work.push((grp.omega, p, q, r, s));
                }
            }
        }
    }
    let terms = work
        .par_iter()
        .map(|&(omega, p, q, r, s)| {
            let phase = Complex64::from_polar(1.0, t * omega);
            let it = i_t_apply(&line, &fc[q], &gc[r], &hc[s], t)?;
            let lim = stationary_limit(&fc[q], &gc[r], &hc[s], t);
            Ok((p, phase, it, lim))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut pi = SpectralField::zeros(f.grid, f.lattice);
    let mut rr = SpectralField::zeros(f.grid, f.lattice);
    pi.time_origin = t;
    rr.time_origin = t;
    for (p, phase, it, lim) in terms {
        for j in 0..count {
            pi.amps[j * n + p] += phase * it[j];
            rr.amps[j * n + p] += phase * lim[j];
        }
    }
    Ok((pi, rr))
}

/// `‖Π^t − (π/t)R^t‖_{Z_d}`.
pub fn pi_vs_r_gap(f: &SpectralField, g: &SpectralField, h: &SpectralField, sys: &QuasiResonantSystem, t: f64) -> Result<f64> {
    let (mut pi, rr) = pi_and_r(f, g, h, sys, t, DEFAULT_PI_BUDGET)?;
    for (a, b) in pi.amps.iter_mut().zip(&rr.amps) {
        *a -= b;
    }
    Ok(z_d_norm(&pi, DEFAULT_EPS))
}
