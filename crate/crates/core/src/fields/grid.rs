use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Midpoint nodes `ξ_j = −Ξ + (j + ½)h` on `[−Ξ, Ξ]` with equal weights `h = 2Ξ/count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiGrid {
    pub half_width: f64,
    pub count: usize,
}

impl XiGrid {
    pub fn new(half_width: f64, count: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidArgument(format!("half width must be positive, got {half_width}")));
        }
        if count == 0 || !count.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("node count must be positive and even, got {count}")));
        }
        Ok(XiGrid { half_width, count })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.count as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_width + (j as f64 + 0.5) * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.count).map(|j| self.node(j)).collect()
    }

    /// Periodic-trapezoid weights; on midpoint nodes they are all `h`.
    pub fn weights(&self) -> Vec<f64> {
        vec![self.spacing(); self.count]
    }

    pub fn refined(&self) -> XiGrid {
        XiGrid { half_width: self.half_width, count: 2 * self.count }
    }
}

/// Physical line grid paired with a frequency grid by a shifted DFT.
///
/// Frequencies are `ξ_j = (j + o)h` and positions `x_m = (m − N/2)·dx` with
/// `h·dx = 2π/N`; the offset `o` is `−N/2 + ½` for midpoint grids and `−N/2`
/// for the ordinary periodic grid.
#[derive(Clone)]
pub struct SpectralLine {
    count: usize,
    h: f64,
    dx: f64,
    twice_offset: i64,
    pre: Vec<Complex64>,
    post: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralLine").field("count", &self.count).field("h", &self.h).field("dx", &self.dx).finish()
    }
}

fn turn(num: i64, den: i64) -> Complex64 {
    let r = num.rem_euclid(den) as f64 / den as f64;
    Complex64::from_polar(1.0, 2.0 * PI * r)
}

impl SpectralLine {
    /// Line matching a [`XiGrid`]: `dx = π/Ξ`.
    pub fn for_grid(grid: &XiGrid) -> Self {
        Self::build(grid.count, grid.spacing(), true)
    }

    /// Ordinary periodic grid of `count` points on `[−L/2, L/2)`, frequencies `2πk/L`.
    pub fn periodic(count: usize, length: f64) -> Result<Self> {
        if count < 2 || !count.is_multiple_of(2) || !(length > 0.0) {
            return Err(Error::InvalidArgument("periodic line needs an even count and positive length".into()));
        }
        Ok(Self::build(count, 2.0 * PI / length, false))
    }

    fn build(count: usize, h: f64, midpoint: bool) -> Self {
        let n = count as i64;
        let twice_offset = if midpoint { 1 - n } else { -n };
        let dx = 2.0 * PI / (count as f64 * h);
        // e^{-i x_m ξ_j} = e^{-2πi m j/N} · pre_m · post_j
        let pre = (0..n).map(|m| turn(-m * twice_offset, 2 * n)).collect();
        let post = (0..n).map(|j| turn(2 * j + twice_offset, 4)).collect();
        let mut planner = FftPlanner::new();
        SpectralLine {
            count,
            h,
            dx,
            twice_offset,
            pre,
            post,
            forward: planner.plan_fft_forward(count),
            inverse: planner.plan_fft_inverse(count),
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dxi(&self) -> f64 {
        self.h
    }

    pub fn is_midpoint(&self) -> bool {
        self.twice_offset == 1 - self.count as i64
    }

    pub fn x(&self, m: usize) -> f64 {
        (m as f64 - self.count as f64 / 2.0) * self.dx
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.count).map(|m| self.x(m)).collect()
    }

    pub fn xi(&self, j: usize) -> f64 {
        (j as f64 + self.twice_offset as f64 / 2.0) * self.h
    }

    pub fn xis(&self) -> Vec<f64> {
        (0..self.count).map(|j| self.xi(j)).collect()
    }

    /// `F̂_j = (dx/2π) Σ_m f(x_m) e^{−i x_m ξ_j}`, in place.
    pub fn to_xi_inplace(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.count);
        for (v, p) in data.iter_mut().zip(&self.pre) {
            *v *= p;
        }
        self.forward.process(data);
        let c = self.dx / (2.0 * PI);
        for (v, p) in data.iter_mut().zip(&self.post) {
            *v *= p * c;
        }
    }

    /// `f(x_m) = Σ_j F̂_j e^{i x_m ξ_j} h`, in place.
    pub fn to_x_inplace(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.count);
        for (v, p) in data.iter_mut().zip(&self.post) {
            *v *= p.conj();
        }
        self.inverse.process(data);
        for (v, p) in data.iter_mut().zip(&self.pre) {
            *v *= p.conj() * self.h;
        }
    }

    pub fn to_xi(&self, data: &[Complex64]) -> Vec<Complex64> {
        let mut v = data.to_vec();
        self.to_xi_inplace(&mut v);
        v
    }

    pub fn to_x(&self, data: &[Complex64]) -> Vec<Complex64> {
        let mut v = data.to_vec();
        self.to_x_inplace(&mut v);
        v
    }
}
