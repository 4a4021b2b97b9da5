//! Strang-split pseudo-spectral solver for `(i∂_t + Δ) U = μ|U|²U` on `ℝ × T^d_θ`.

use super::system::Nonlinearity;
use crate::error::{Error, Result};
use crate::fields::{SpectralField, SpectralLine, XiGrid};
use crate::lattice::{LatticeBox, ThetaVector};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

pub const ALIASING_LIMIT: f64 = 1e-6;

/// Discretisation of the line factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LineSpec {
    /// Frequencies are exactly the nodes of the given ξ-grid.
    Matched { grid: XiGrid },
    /// Ordinary periodic box of the given length; frequencies include 0.
    Periodic { count: usize, length: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveguideGrid {
    pub line: LineSpec,
    /// Points per torus direction; torus modes run over `[−n/2, n/2)`.
    pub torus_points: usize,
}

/// Precomputed transforms for one waveguide grid.
pub struct Waveguide {
    pub grid: WaveguideGrid,
    line: SpectralLine,
    dim: usize,
    ny: usize,
    ytot: usize,
    torus_fwd: Arc<dyn Fft<f64>>,
    torus_inv: Arc<dyn Fft<f64>>,
    lam: Vec<f64>,
    torus_modes: Vec<Vec<i64>>,
    volume: f64,
}

impl Waveguide {
    pub fn new(theta: &ThetaVector, grid: WaveguideGrid) -> Result<Self> {
        let ny = grid.torus_points;
        if ny < 2 || !ny.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("torus points must be even and >= 2, got {ny}")));
        }
        let line = match grid.line {
            LineSpec::Matched { grid } => SpectralLine::for_grid(&grid),
            LineSpec::Periodic { count, length } => SpectralLine::periodic(count, length)?,
        };
        let dim = theta.dim();
        let ytot = ny.pow(dim as u32);
        let mut planner = FftPlanner::new();
        let torus_modes: Vec<Vec<i64>> = (0..ytot)
            .map(|mut f| {
                let mut k = vec![0i64; dim];
                for slot in k.iter_mut().rev() {
                    let i = (f % ny) as i64;
                    *slot = if i < ny as i64 / 2 { i } else { i - ny as i64 };
                    f /= ny;
                }
                k
            })
            .collect();
        let sq = theta.squares_f64();
        let lam = torus_modes.iter().map(|k| k.iter().zip(sq).map(|(&a, &t)| (a * a) as f64 * t).sum()).collect();
        let volume = sq.iter().map(|t| 2.0 * PI / t.sqrt()).product();
        Ok(Waveguide {
            grid,
            line,
            dim,
            ny,
            ytot,
            torus_fwd: planner.plan_fft_forward(ny),
            torus_inv: planner.plan_fft_inverse(ny),
            lam,
            torus_modes,
            volume,
        })
    }

    pub fn line(&self) -> &SpectralLine {
        &self.line
    }

    pub fn len(&self) -> usize {
        self.line.count() * self.ytot
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn torus_volume(&self) -> f64 {
        self.volume
    }

    /// Physical sample `U(x_m, y_l)` from a closure; `y` in physical units.
    pub fn sample(&self, theta: &ThetaVector, mut f: impl FnMut(f64, &[f64]) -> Complex64) -> Vec<Complex64> {
        let sq = theta.squares_f64();
        let mut y = vec![0.0; self.dim];
        let mut out = Vec::with_capacity(self.len());
        for m in 0..self.line.count() {
            let x = self.line.x(m);
            for mut flat in 0..self.ytot {
                for (i, slot) in y.iter_mut().enumerate().rev() {
                    let l = flat % self.ny;
                    flat /= self.ny;
                    *slot = l as f64 * 2.0 * PI / (sq[i].sqrt() * self.ny as f64);
                }
                out.push(f(x, &y));
            }
        }
        out
    }

    fn torus_axis(&self, data: &mut [Complex64], axis: usize, inverse: bool) {
        let ny = self.ny;
        let stride = ny.pow((self.dim - 1 - axis) as u32);
        let block = stride * ny;
        let fft = if inverse { &self.torus_inv } else { &self.torus_fwd };
        data.par_chunks_mut(self.ytot).for_each(|row| {
            let mut buf = vec![Complex64::default(); ny];
            for outer in (0..self.ytot).step_by(block) {
                for inner in 0..stride {
                    for (l, b) in buf.iter_mut().enumerate() {
                        *b = row[outer + inner + l * stride];
                    }
                    fft.process(&mut buf);
                    for (l, b) in buf.iter().enumerate() {
                        row[outer + inner + l * stride] = *b;
                    }
                }
            }
        });
    }

    fn line_axis(&self, data: &mut [Complex64], inverse: bool) {
        let nx = self.line.count();
        let ytot = self.ytot;
        let cols: Vec<Vec<Complex64>> = (0..ytot)
            .into_par_iter()
            .map(|c| {
                let mut col: Vec<Complex64> = (0..nx).map(|m| data[m * ytot + c]).collect();
                if inverse {
                    self.line.to_x_inplace(&mut col);
                } else {
                    self.line.to_xi_inplace(&mut col);
                }
                col
            })
            .collect();
        for (c, col) in cols.iter().enumerate() {
            for (m, v) in col.iter().enumerate() {
                data[m * ytot + c] = *v;
            }
        }
    }

    /// Physical values to coefficients `Û(ξ_j, k)` (line transform, normalised torus DFT).
    pub fn to_spectral(&self, data: &mut [Complex64]) {
        for axis in 0..self.dim {
            self.torus_axis(data, axis, false);
        }
        let c = 1.0 / self.ytot as f64;
        data.par_iter_mut().for_each(|z| *z *= c);
        self.line_axis(data, false);
    }

    pub fn to_physical(&self, data: &mut [Complex64]) {
        self.line_axis(data, true);
        for axis in 0..self.dim {
            self.torus_axis(data, axis, true);
        }
    }

    fn frequency(&self, idx: usize) -> f64 {
        let j = idx / self.ytot;
        let xi = self.line.xi(j);
        xi * xi + self.lam[idx % self.ytot]
    }

    /// `∫|U|²` from physical values.
    pub fn mass(&self, phys: &[Complex64]) -> f64 {
        self.line.dx() * self.volume * phys.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.ytot as f64
    }

    /// `∫ ½|∇U|² + (μ/4)|U|⁴`.
    pub fn hamiltonian(&self, phys: &[Complex64], mu: f64) -> f64 {
        let mut spec = phys.to_vec();
        self.to_spectral(&mut spec);
        let h = self.line.dxi();
        let grad: f64 = spec.iter().enumerate().map(|(i, z)| self.frequency(i) * z.norm_sqr()).sum::<f64>()
            * h
            * 2.0
            * PI
            * self.volume;
        let quartic = self.line.dx() * self.volume * phys.iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>() / self.ytot as f64;
        0.5 * grad + 0.25 * mu * quartic
    }

    /// Fraction of `Σ|Û|²` in the outer tenth of the line band or on the extreme torus modes.
    pub fn tail_fraction(&self, spec: &[Complex64]) -> f64 {
        let xi_max = self.line.xis().iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let edge = self.ny as i64 / 2 - 1;
        let mut tail = 0.0;
        let mut total = 0.0;
        for (i, z) in spec.iter().enumerate() {
            let e = z.norm_sqr();
            total += e;
            let xi = self.line.xi(i / self.ytot).abs();
            let k = &self.torus_modes[i % self.ytot];
            if xi > 0.9 * xi_max || (self.ny > 2 && k.iter().any(|x| x.abs() >= edge)) {
                tail += e;
            }
        }
        if total > 0.0 { tail / total } else { 0.0 }
    }

    /// Coefficients on a lattice box as a [`SpectralField`]; needs a matched line.
    pub fn spectral_field(&self, spec: &[Complex64], radius: u32, time: f64) -> Result<SpectralField> {
        let grid = match self.grid.line {
            LineSpec::Matched { grid } => grid,
            LineSpec::Periodic { .. } => {
                return Err(Error::GridMismatch("periodic line has no matching ξ-grid".into()));
            }
        };
        if 2 * radius as usize + 1 > self.ny {
            return Err(Error::GridMismatch(format!("box radius {radius} exceeds torus resolution {}", self.ny)));
        }
        let lattice = LatticeBox::new(self.dim, radius);
        let mut f = SpectralField::zeros(grid, lattice);
        f.time_origin = time;
        let n = lattice.len();
        for (c, k) in self.torus_modes.iter().enumerate() {
            if let Some(m) = lattice.index_of(k) {
                for j in 0..grid.count {
                    f.amps[j * n + m] = spec[j * self.ytot + c];
                }
            }
        }
        Ok(f)
    }

    /// Physical values from a spectral field on a matched line.
    pub fn physical_from_field(&self, field: &SpectralField) -> Result<Vec<Complex64>> {
        match self.grid.line {
            LineSpec::Matched { grid } if grid == field.grid => {}
            _ => return Err(Error::GridMismatch("field grid differs from the waveguide line".into())),
        }
        let mut data = vec![Complex64::default(); self.len()];
        let n = field.modes_len();
        for (m, p) in field.lattice.modes().enumerate() {
            let c = match self.torus_index(&p) {
                Some(c) => c,
                None => return Err(Error::GridMismatch(format!("mode {p:?} not resolved by the torus grid"))),
            };
            for j in 0..field.grid.count {
                data[j * self.ytot + c] = field.amps[j * n + m];
            }
        }
        self.to_physical(&mut data);
        Ok(data)
    }

    fn torus_index(&self, p: &[i64]) -> Option<usize> {
        let half = self.ny as i64 / 2;
        let mut idx = 0usize;
        for &x in p {
            if x < -half || x >= half {
                return None;
            }
            idx = idx * self.ny + x.rem_euclid(self.ny as i64) as usize;
        }
        Some(idx)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitStepConfig {
    pub dt: f64,
    pub steps: u64,
    /// Record diagnostics every this many steps.
    pub record_every: u64,
    #[serde(default = "yes")]
    pub nonlinear: bool,
    #[serde(default)]
    pub nonlinearity: Nonlinearity,
    #[serde(default)]
    pub start_time: f64,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitStepTrajectory {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub hamiltonian: Vec<f64>,
    pub max_tail_fraction: f64,
    pub warnings: Vec<String>,
    /// Spectral coefficients at each recorded time.
    #[serde(skip)]
    pub spectra: Vec<Vec<Complex64>>,
    #[serde(skip)]
    pub final_physical: Vec<Complex64>,
}

pub fn split_step_full(
    u0: &[Complex64],
    theta: &ThetaVector,
    grid: WaveguideGrid,
    cfg: &SplitStepConfig,
) -> Result<SplitStepTrajectory> {
    let wg = Waveguide::new(theta, grid)?;
    split_step_with(&wg, u0, cfg)
}

pub fn split_step_with(wg: &Waveguide, u0: &[Complex64], cfg: &SplitStepConfig) -> Result<SplitStepTrajectory> {
    if u0.len() != wg.len() {
        return Err(Error::GridMismatch(format!("{} values for a grid of {}", u0.len(), wg.len())));
    }
    if !(cfg.dt > 0.0) || cfg.record_every == 0 {
        return Err(Error::InvalidArgument("dt must be positive and record_every nonzero".into()));
    }
    let mu = cfg.nonlinearity.mu();
    let amp2 = u0.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    if cfg.nonlinear && cfg.dt * amp2 >= 0.1 {
        return Err(Error::AmplitudeTooLarge(format!("dt·max|U|² = {:.3e} >= 0.1", cfg.dt * amp2)));
    }
    let half: Vec<Complex64> =
        (0..wg.len()).map(|i| Complex64::from_polar(1.0, -wg.frequency(i) * cfg.dt / 2.0)).collect();

    let mut phys = u0.to_vec();
    let mut spec = phys.clone();
    wg.to_spectral(&mut spec);
    let mut out = SplitStepTrajectory {
        times: Vec::new(),
        mass: Vec::new(),
        hamiltonian: Vec::new(),
        max_tail_fraction: 0.0,
        warnings: Vec::new(),
        spectra: Vec::new(),
        final_physical: Vec::new(),
    };
    let mut warned = false;
    let mut push = |out: &mut SplitStepTrajectory, phys: &[Complex64], spec: &[Complex64], t: f64| {
        out.times.push(t);
        out.mass.push(wg.mass(phys));
        out.hamiltonian.push(wg.hamiltonian(phys, if cfg.nonlinear { mu } else { 0.0 }));
        let tail = wg.tail_fraction(spec);
        out.max_tail_fraction = out.max_tail_fraction.max(tail);
        if tail > ALIASING_LIMIT && !warned {
            out.warnings.push(format!("aliasing: spectral tail fraction {tail:.3e} at t = {t}"));
            warned = true;
        }
        out.spectra.push(spec.to_vec());
    };
    push(&mut out, &phys, &spec, cfg.start_time);
    for step in 1..=cfg.steps {
        spec.par_iter_mut().zip(half.par_iter()).for_each(|(z, m)| *z *= m);
        phys.copy_from_slice(&spec);
        wg.to_physical(&mut phys);
        if cfg.nonlinear {
            phys.par_iter_mut().for_each(|z| *z *= Complex64::from_polar(1.0, -mu * z.norm_sqr() * cfg.dt));
        }
        spec.copy_from_slice(&phys);
        wg.to_spectral(&mut spec);
        spec.par_iter_mut().zip(half.par_iter()).for_each(|(z, m)| *z *= m);
        if spec.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { t: cfg.start_time + step as f64 * cfg.dt, what: "split-step state".into() });
        }
        if step % cfg.record_every == 0 || step == cfg.steps {
            phys.copy_from_slice(&spec);
            wg.to_physical(&mut phys);
            push(&mut out, &phys, &spec, cfg.start_time + step as f64 * cfg.dt);
        }
    }
    phys.copy_from_slice(&spec);
    wg.to_physical(&mut phys);
    out.final_physical = phys;
    Ok(out)
}
