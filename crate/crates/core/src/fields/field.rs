use super::grid::{SpectralLine, XiGrid};
use crate::error::{Error, Result};
use crate::lattice::{lambda_f64, LatticeBox, ThetaVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Amplitudes `v_{ξ,p}` on a ξ-grid times a lattice box, stored ξ-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub grid: XiGrid,
    pub lattice: LatticeBox,
    pub amps: Vec<Complex64>,
    pub time_origin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaugeDirection {
    /// Multiply by `e^{−it(ξ²+λ_p)}`.
    Forward,
    /// Multiply by `e^{+it(ξ²+λ_p)}`.
    Inverse,
}

impl SpectralField {
    pub fn zeros(grid: XiGrid, lattice: LatticeBox) -> Self {
        SpectralField { grid, lattice, amps: vec![Complex64::new(0.0, 0.0); grid.count * lattice.len()], time_origin: 0.0 }
    }

    pub fn from_fn(grid: XiGrid, lattice: LatticeBox, mut f: impl FnMut(f64, &[i64]) -> Complex64) -> Self {
        let mut field = Self::zeros(grid, lattice);
        let modes: Vec<Vec<i64>> = lattice.modes().collect();
        let n = modes.len();
        for j in 0..grid.count {
            let xi = grid.node(j);
            for (m, p) in modes.iter().enumerate() {
                field.amps[j * n + m] = f(xi, p);
            }
        }
        field
    }

    /// Coefficients of `x ↦ f(x, p)` sampled on the line matched to `grid`.
    pub fn from_physical(grid: XiGrid, lattice: LatticeBox, mut f: impl FnMut(f64, &[i64]) -> Complex64) -> Self {
        let line = SpectralLine::for_grid(&grid);
        let xs = line.xs();
        let mut field = Self::zeros(grid, lattice);
        let n = lattice.len();
        for (m, p) in lattice.modes().enumerate() {
            let mut col: Vec<Complex64> = xs.iter().map(|&x| f(x, &p)).collect();
            line.to_xi_inplace(&mut col);
            for (j, v) in col.into_iter().enumerate() {
                field.amps[j * n + m] = v;
            }
        }
        field
    }

    /// Spectrum of mode `m` across the ξ-grid.
    pub fn column(&self, m: usize) -> Vec<Complex64> {
        let n = self.modes_len();
        (0..self.grid.count).map(|j| self.amps[j * n + m]).collect()
    }

    pub fn from_amps(grid: XiGrid, lattice: LatticeBox, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != grid.count * lattice.len() {
            return Err(Error::GridMismatch(format!(
                "{} amplitudes for {} nodes x {} modes",
                amps.len(),
                grid.count,
                lattice.len()
            )));
        }
        Ok(SpectralField { grid, lattice, amps, time_origin: 0.0 })
    }

    pub fn modes_len(&self) -> usize {
        self.lattice.len()
    }

    pub fn slice(&self, j: usize) -> &[Complex64] {
        let n = self.modes_len();
        &self.amps[j * n..(j + 1) * n]
    }

    pub fn slice_mut(&mut self, j: usize) -> &mut [Complex64] {
        let n = self.modes_len();
        &mut self.amps[j * n..(j + 1) * n]
    }

    pub fn slices(&self) -> impl Iterator<Item = &[Complex64]> {
        self.amps.chunks(self.modes_len())
    }

    pub fn get(&self, j: usize, p: &[i64]) -> Complex64 {
        match self.lattice.index_of(p) {
            Some(m) => self.slice(j)[m],
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn set(&mut self, j: usize, p: &[i64], v: Complex64) -> Result<()> {
        let m = self.lattice.index_of(p).ok_or_else(|| Error::InvalidArgument(format!("mode {p:?} outside box")))?;
        self.slice_mut(j)[m] = v;
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.amps.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn same_shape(&self, other: &SpectralField) -> bool {
        self.grid == other.grid && self.lattice == other.lattice
    }

    pub fn max_abs_diff(&self, other: &SpectralField) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.amps.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest max-coordinate norm among modes with some `|v_{ξ,p}| > eps`.
    pub fn support_radius(&self, eps: f64) -> Option<u32> {
        let norms = self.lattice.inf_norms();
        let n = self.modes_len();
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm() > eps)
            .map(|(i, _)| norms[i % n])
            .max()
    }

    /// Largest amplitude on modes outside `B_radius`.
    pub fn max_outside(&self, radius: u32) -> f64 {
        let norms = self.lattice.inf_norms();
        let n = self.modes_len();
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| norms[i % n] > radius)
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max)
    }

    /// Zero every mode outside `B_radius`.
    pub fn truncated(&self, radius: u32) -> SpectralField {
        let norms = self.lattice.inf_norms();
        let n = self.modes_len();
        let mut out = self.clone();
        for (i, z) in out.amps.iter_mut().enumerate() {
            if norms[i % n] > radius {
                *z = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    /// Same amplitudes re-indexed into a box of another radius; modes that do not fit are dropped.
    pub fn rebox(&self, radius: u32) -> SpectralField {
        let target = LatticeBox::new(self.lattice.dim, radius);
        let mut out = SpectralField::zeros(self.grid, target);
        out.time_origin = self.time_origin;
        let n_src = self.modes_len();
        let n_dst = target.len();
        for (m, p) in self.lattice.modes().enumerate() {
            if let Some(t) = target.index_of(&p) {
                for j in 0..self.grid.count {
                    out.amps[j * n_dst + t] = self.amps[j * n_src + m];
                }
            }
        }
        out
    }

    pub fn scale(&mut self, c: Complex64) {
        for z in &mut self.amps {
            *z *= c;
        }
    }

    pub fn conj(&self) -> SpectralField {
        let mut out = self.clone();
        for z in &mut out.amps {
            *z = z.conj();
        }
        out
    }
}

/// `ξ² + λ_p` per node and mode, ξ-major.
pub fn linear_frequencies(grid: &XiGrid, lattice: &LatticeBox, theta: &ThetaVector) -> Result<Vec<f64>> {
    if theta.dim() != lattice.dim {
        return Err(Error::DimensionMismatch { expected: lattice.dim, got: theta.dim() });
    }
    let lam: Vec<f64> = lattice.modes().map(|p| lambda_f64(theta, &p)).collect();
    Ok(grid.nodes().iter().flat_map(|xi| lam.iter().map(move |l| xi * xi + l)).collect())
}

/// Multiply each amplitude by `e^{∓it(ξ²+λ_p)}`.
pub fn gauge_transform(
    field: &SpectralField,
    theta: &ThetaVector,
    t: f64,
    direction: GaugeDirection,
) -> Result<SpectralField> {
    let freq = linear_frequencies(&field.grid, &field.lattice, theta)?;
    let sign = match direction {
        GaugeDirection::Forward => -1.0,
        GaugeDirection::Inverse => 1.0,
    };
    let mut out = field.clone();
    out.amps.par_iter_mut().zip(freq.par_iter()).for_each(|(z, w)| {
        *z *= Complex64::from_polar(1.0, sign * t * w);
    });
    Ok(out)
}
