use super::precise::Enclosure;
use super::theta::ThetaVector;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Four modes `(p, q, r, s)` in ℤ^d.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Quartet {
    pub p: Vec<i64>,
    pub q: Vec<i64>,
    pub r: Vec<i64>,
    pub s: Vec<i64>,
}

impl Quartet {
    pub fn new(p: Vec<i64>, q: Vec<i64>, r: Vec<i64>, s: Vec<i64>) -> Self {
        Quartet { p, q, r, s }
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    fn check_dims(&self) -> Result<()> {
        let d = self.p.len();
        for v in [&self.q, &self.r, &self.s] {
            if v.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: v.len() });
            }
        }
        Ok(())
    }

    /// Integer vector `n_i = p_i² + r_i² − q_i² − s_i²`.
    pub fn coeffs(&self) -> Vec<i64> {
        (0..self.dim())
            .map(|i| self.p[i].pow(2) + self.r[i].pow(2) - self.q[i].pow(2) - self.s[i].pow(2))
            .collect()
    }
}

/// Whether `ω = 0` could be decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroStatus {
    ExactZero,
    NonZero,
    IndeterminateNearZero,
}

/// Coefficient vector and enclosed value of `λ_p − λ_q + λ_r − λ_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceLevel {
    pub coeffs: Vec<i64>,
    pub omega: Enclosure,
    pub status: ZeroStatus,
}

impl ResonanceLevel {
    pub fn from_coeffs(theta: &ThetaVector, coeffs: Vec<i64>) -> Result<Self> {
        if coeffs.len() != theta.dim() {
            return Err(Error::DimensionMismatch { expected: theta.dim(), got: coeffs.len() });
        }
        let omega = Enclosure::dot(&coeffs, theta.squares());
        let all_zero = coeffs.iter().all(|&c| c == 0);
        let status = if all_zero {
            ZeroStatus::ExactZero
        } else if theta.independence_certified() || !omega.contains_zero() {
            ZeroStatus::NonZero
        } else {
            ZeroStatus::IndeterminateNearZero
        };
        Ok(ResonanceLevel { coeffs, omega, status })
    }

    pub fn is_exact_zero(&self) -> bool {
        self.status == ZeroStatus::ExactZero
    }

    pub fn omega_f64(&self) -> f64 {
        self.omega.mid_f64()
    }

    pub fn omega_interval(&self) -> (f64, f64) {
        (self.omega.lo_f64(), self.omega.hi_f64())
    }
}

/// `λ_p = Σ θ_i² p_i²`, enclosed.
pub fn lambda(theta: &ThetaVector, p: &[i64]) -> Result<Enclosure> {
    if p.len() != theta.dim() {
        return Err(Error::DimensionMismatch { expected: theta.dim(), got: p.len() });
    }
    let sq: Vec<i64> = p.iter().map(|x| x * x).collect();
    Ok(Enclosure::dot(&sq, theta.squares()))
}

/// f64 value of `λ_p`.
pub fn lambda_f64(theta: &ThetaVector, p: &[i64]) -> f64 {
    p.iter().zip(theta.squares_f64()).map(|(&x, &t)| (x * x) as f64 * t).sum()
}

pub fn resonance_level(theta: &ThetaVector, quartet: &Quartet) -> Result<ResonanceLevel> {
    quartet.check_dims()?;
    ResonanceLevel::from_coeffs(theta, quartet.coeffs())
}

/// `p − q + r − s` componentwise.
pub fn momentum_defect(quartet: &Quartet) -> Vec<i64> {
    (0..quartet.dim()).map(|i| quartet.p[i] - quartet.q[i] + quartet.r[i] - quartet.s[i]).collect()
}
