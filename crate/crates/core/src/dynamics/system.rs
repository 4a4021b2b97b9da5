use crate::error::{Error, Result};
use crate::lattice::ThetaVector;
use crate::resonance::{enumerate_quasi_with, enumerate_resonant, ListKind, QuartetList, TailNorm, DEFAULT_BRUTE_BUDGET};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nonlinearity {
    #[default]
    Defocusing,
    Focusing,
}

impl Nonlinearity {
    pub fn mu(self) -> f64 {
        match self {
            Nonlinearity::Defocusing => 1.0,
            Nonlinearity::Focusing => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub k_inner: u32,
    pub k_outer: u32,
    /// Quasi-resonance threshold; `0` keeps only the resonant set.
    pub m: f64,
    #[serde(default)]
    pub nonlinearity: Nonlinearity,
    #[serde(default)]
    pub tail_norm: TailNorm,
}

/// Truncated quasi-resonant system: `Γ₀^{K_outer}` plus the height-`1/M` tail.
#[derive(Debug, Clone)]
pub struct QuasiResonantSystem {
    pub theta: ThetaVector,
    pub params: SystemParams,
    pub resonant: QuartetList,
    pub quasi: QuartetList,
}

impl QuasiResonantSystem {
    pub fn build(theta: &ThetaVector, params: SystemParams) -> Result<Self> {
        if params.k_inner > params.k_outer {
            return Err(Error::InvalidArgument(format!(
                "K_inner {} exceeds K_outer {}",
                params.k_inner, params.k_outer
            )));
        }
        if !(params.m >= 0.0) {
            return Err(Error::InvalidArgument(format!("M must be nonnegative, got {}", params.m)));
        }
        let resonant = enumerate_resonant(theta, params.k_outer)?;
        let quasi = if params.m == 0.0 {
            QuartetList::empty(
                theta.dim(),
                params.k_outer,
                ListKind::QuasiResonant { m: 0.0, k_inner: params.k_inner, tail_norm: params.tail_norm },
            )
        } else {
            enumerate_quasi_with(theta, params.k_outer, params.m, params.k_inner, params.tail_norm, DEFAULT_BRUTE_BUDGET)?
        };
        Ok(QuasiResonantSystem { theta: theta.clone(), params, resonant, quasi })
    }

    /// A system from precomputed lists (for instance a loaded cache).
    pub fn from_lists(theta: &ThetaVector, params: SystemParams, resonant: QuartetList, quasi: QuartetList) -> Result<Self> {
        for l in [&resonant, &quasi] {
            if l.k_outer != params.k_outer || l.dim != theta.dim() {
                return Err(Error::InvalidArgument("quartet list does not match the system box".into()));
            }
        }
        Ok(QuasiResonantSystem { theta: theta.clone(), params, resonant, quasi })
    }

    pub fn dim(&self) -> usize {
        self.theta.dim()
    }

    pub fn mu(&self) -> f64 {
        self.params.nonlinearity.mu()
    }

    /// Radius of the box that the no-cascade statement protects.
    pub fn protected_radius(&self) -> u32 {
        self.params.k_inner / 3
    }
}
