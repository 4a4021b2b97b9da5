use super::field::SpectralField;
use super::grid::XiGrid;
use crate::error::{Error, Result};
use crate::lattice::{lambda_f64, LatticeBox, ThetaVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const DEFAULT_EPS: f64 = 0.1;

/// Default Sobolev order `10d + 2`.
pub fn default_sobolev_order(dim: usize) -> u32 {
    10 * dim as u32 + 2
}

/// `Σ_i (1+p_i²)^k` for every mode of the box.
pub fn hk_weights(lattice: &LatticeBox, k: f64) -> Vec<f64> {
    lattice.modes().map(|p| p.iter().map(|&x| (1.0 + (x * x) as f64).powf(k)).sum()).collect()
}

fn weighted_sq(slice: &[Complex64], w: &[f64]) -> f64 {
    slice.iter().zip(w).map(|(z, w)| w * z.norm_sqr()).sum()
}

/// `sqrt(Σ_p [Σ_i (1+p_i²)^k] |z_p|²)`.
pub fn h_k_norm(slice: &[Complex64], lattice: &LatticeBox, k: f64) -> Result<f64> {
    if slice.len() != lattice.len() {
        return Err(Error::GridMismatch(format!("slice of {} for box of {}", slice.len(), lattice.len())));
    }
    Ok(weighted_sq(slice, &hk_weights(lattice, k)).sqrt())
}

/// `|z|_k² = ∫ Σ_p [Σ_i (1+p_i²)^k + (1+ξ²)^k] |z_{ξ,p}|² dξ`, by quadrature.
pub fn k_norm(field: &SpectralField, k: f64) -> f64 {
    let w = hk_weights(&field.lattice, k);
    let h = field.grid.spacing();
    let mut acc = 0.0;
    for (j, slice) in field.slices().enumerate() {
        let xi = field.grid.node(j);
        let wx = (1.0 + xi * xi).powf(k);
        acc += h * slice.iter().zip(&w).map(|(z, w)| (w + wx) * z.norm_sqr()).sum::<f64>();
    }
    acc.sqrt()
}

/// `sqrt(max_ξ (1+ξ²)² ‖v_ξ‖²_{h^{d/2+ε}})`.
pub fn z_d_norm(field: &SpectralField, eps: f64) -> f64 {
    let s = field.lattice.dim as f64 / 2.0 + eps;
    let w = hk_weights(&field.lattice, s);
    field
        .slices()
        .enumerate()
        .map(|(j, slice)| {
            let xi = field.grid.node(j);
            (1.0 + xi * xi).powi(2) * weighted_sq(slice, &w)
        })
        .fold(0.0, f64::max)
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SNorm {
    /// `sqrt(∫ Σ_p (1+ξ²+λ_p)^N |v|²)`.
    pub h_n: f64,
    /// `‖∂_ξ v‖`, standing in for `‖xF‖`.
    pub x_weight: f64,
    pub total: f64,
}

/// Fourth-order finite-difference ξ-derivative of every mode.
pub fn xi_derivative(field: &SpectralField) -> Result<Vec<Complex64>> {
    let nx = field.grid.count;
    if nx < 8 {
        return Err(Error::GridTooCoarse(format!("{nx} nodes; the derivative stencil needs at least 8")));
    }
    let n = field.modes_len();
    let h = field.grid.spacing();
    let v = |j: usize, m: usize| field.amps[j * n + m];
    let mut out = vec![Complex64::new(0.0, 0.0); field.amps.len()];
    for m in 0..n {
        for j in 0..nx {
            let d = if j >= 2 && j + 2 < nx {
                -v(j + 2, m) + 8.0 * v(j + 1, m) - 8.0 * v(j - 1, m) + v(j - 2, m)
            } else if j == 0 {
                -25.0 * v(0, m) + 48.0 * v(1, m) - 36.0 * v(2, m) + 16.0 * v(3, m) - 3.0 * v(4, m)
            } else if j == 1 {
                -3.0 * v(0, m) - 10.0 * v(1, m) + 18.0 * v(2, m) - 6.0 * v(3, m) + v(4, m)
            } else if j == nx - 1 {
                25.0 * v(j, m) - 48.0 * v(j - 1, m) + 36.0 * v(j - 2, m) - 16.0 * v(j - 3, m) + 3.0 * v(j - 4, m)
            } else {
                3.0 * v(j + 1, m) + 10.0 * v(j, m) - 18.0 * v(j - 1, m) + 6.0 * v(j - 2, m) - v(j - 3, m)
            };
            out[j * n + m] = d / (12.0 * h);
        }
    }
    Ok(out)
}

/// Spectral `H^N` with weight `(1+ξ²+λ_p)^N` plus the ξ-derivative norm.
pub fn s_norm_discrete(field: &SpectralField, theta: &ThetaVector, order: u32) -> Result<SNorm> {
    if order < 1 {
        return Err(Error::InvalidArgument("Sobolev order must be at least 1".into()));
    }
    let h_n = sobolev_norm(field, theta, order as f64)?;
    let h = field.grid.spacing();
    let dv = xi_derivative(field)?;
    let x_weight = (h * dv.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
    Ok(SNorm { h_n, x_weight, total: h_n + x_weight })
}

/// `sqrt(∫ Σ_p (1+ξ²+λ_p)^s |v|²)`.
pub fn sobolev_norm(field: &SpectralField, theta: &ThetaVector, s: f64) -> Result<f64> {
    if theta.dim() != field.lattice.dim {
        return Err(Error::DimensionMismatch { expected: field.lattice.dim, got: theta.dim() });
    }
    let lam: Vec<f64> = field.lattice.modes().map(|p| lambda_f64(theta, &p)).collect();
    let h = field.grid.spacing();
    let mut acc = 0.0;
    for (j, slice) in field.slices().enumerate() {
        let xi = field.grid.node(j);
        acc += h * slice.iter().zip(&lam).map(|(z, l)| (1.0 + xi * xi + l).powf(s) * z.norm_sqr()).sum::<f64>();
    }
    Ok(acc.sqrt())
}

/// Explicit constants with `H¹ ≤ c1·Z_d` and `Z_d ≤ c2·H^N ≤ c2·S` on a fixed grid and box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConstants {
    pub c1: f64,
    pub c2: f64,
}

pub fn norm_chain_constants(
    grid: &XiGrid,
    lattice: &LatticeBox,
    theta: &ThetaVector,
    eps: f64,
    order: u32,
) -> Result<ChainConstants> {
    let d = lattice.dim;
    let s = d as f64 / 2.0 + eps;
    if (order as f64) < 2.0 + s {
        return Err(Error::InvalidArgument(format!("order {order} below 2 + d/2 + eps")));
    }
    let sq = theta.squares_f64();
    let t_max = sq.iter().cloned().fold(1.0, f64::max);
    let t_low = sq.iter().map(|t| 1.0 / t).fold(1.0, f64::max);
    let w = hk_weights(lattice, s);
    // (1 + |p|²) ≤ rho · Σ_i (1+p_i²)^s on the box
    let rho = lattice
        .modes()
        .zip(&w)
        .map(|(p, w)| (1.0 + p.iter().map(|x| (x * x) as f64).sum::<f64>()) / w)
        .fold(0.0, f64::max);
    let h = grid.spacing();
    let tail: f64 = grid.nodes().iter().map(|xi| h / (1.0 + xi * xi)).sum();
    Ok(ChainConstants { c1: (t_max * rho * tail).sqrt(), c2: (d as f64 * t_low.powf(s) / h).sqrt() })
}

/// Which norms a [`NormReport`] carries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub ks: Vec<f64>,
    pub eps: f64,
    pub sobolev_order: u32,
    pub support_eps: f64,
}

impl NormSpec {
    pub fn for_dim(d: usize) -> Self {
        let n = default_sobolev_order(d);
        NormSpec { ks: vec![0.0, 1.0, d as f64 / 2.0 + DEFAULT_EPS, n as f64], eps: DEFAULT_EPS, sobolev_order: n, support_eps: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub time: f64,
    /// Order used for the per-slice `h^k` values (`d/2 + ε`).
    pub h_k_order: f64,
    pub h_k_slices: Vec<f64>,
    pub h_k_aggregate: f64,
    /// `(k, |v|_k)` pairs.
    pub k_norms: Vec<(f64, f64)>,
    pub z_d: f64,
    pub h_n: f64,
    pub x_weight: f64,
    pub s_discrete: f64,
    pub support_radius: Option<u32>,
    pub sobolev_weight: String,
}

impl NormReport {
    pub fn k_norm(&self, k: f64) -> Option<f64> {
        self.k_norms.iter().find(|(kk, _)| *kk == k).map(|(_, v)| *v)
    }
}

pub fn norm_report(field: &SpectralField, theta: &ThetaVector, spec: &NormSpec, time: f64) -> Result<NormReport> {
    let order = field.lattice.dim as f64 / 2.0 + spec.eps;
    let w = hk_weights(&field.lattice, order);
    let h_k_slices: Vec<f64> = field.slices().map(|s| weighted_sq(s, &w).sqrt()).collect();
    let h = field.grid.spacing();
    let h_k_aggregate = h_k_slices.iter().map(|x| h * x * x).sum::<f64>().sqrt();
    let s = s_norm_discrete(field, theta, spec.sobolev_order)?;
    Ok(NormReport {
        time,
        h_k_order: order,
        h_k_slices,
        h_k_aggregate,
        k_norms: spec.ks.iter().map(|&k| (k, k_norm(field, k))).collect(),
        z_d: z_d_norm(field, spec.eps),
        h_n: s.h_n,
        x_weight: s.x_weight,
        s_discrete: s.total,
        support_radius: field.support_radius(spec.support_eps),
        sobolev_weight: "(1+xi^2+lambda_p)^N".to_string(),
    })
}
