use super::schedule::{build_schedule, ScheduleEntry, MAX_DELTA};
use crate::diophantine::gap_profile;
use crate::error::{Error, Result};
use crate::fields::{SpectralField, XiGrid};
use crate::lattice::{LatticeBox, ThetaSpec, ThetaVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub fn sqrt_prime(dim: usize) -> ThetaSpec {
    ThetaSpec::Family { family: "sqrt-prime".into(), dim }
}

pub(crate) fn default_delta() -> f64 {
    MAX_DELTA
}

pub(crate) fn default_profile_k() -> u32 {
    64
}

/// Quasi-resonance threshold: a literal `M` or the `n`-th schedule entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThresholdSpec {
    Value(f64),
    Schedule {
        schedule_n: u32,
        #[serde(default = "default_delta")]
        delta: f64,
        #[serde(default = "default_profile_k")]
        profile_k: u32,
    },
}

impl ThresholdSpec {
    pub fn resolve(&self, theta: &ThetaVector) -> Result<(f64, Option<ScheduleEntry>)> {
        match *self {
            ThresholdSpec::Value(m) => Ok((m, None)),
            ThresholdSpec::Schedule { schedule_n, delta, profile_k } => {
                let profile = gap_profile(theta, profile_k)?;
                let s = build_schedule(&profile, delta, schedule_n)?;
                let e = *s.entry(schedule_n).expect("entry within range");
                Ok((e.m, Some(e)))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiSpec {
    pub half_width: f64,
    pub count: usize,
}

impl XiSpec {
    pub fn grid(&self) -> Result<XiGrid> {
        XiGrid::new(self.half_width, self.count)
    }
}

/// Random box-supported data: `amplitude · c_p · e^{−ξ²/(2w²)}` with `c_p` uniform in the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataSpec {
    pub radius: u32,
    pub amplitude: f64,
    pub xi_width: f64,
}

impl DataSpec {
    pub fn build(&self, grid: XiGrid, lattice: LatticeBox, seed: u64) -> Result<SpectralField> {
        if self.radius > lattice.radius {
            return Err(Error::InvalidArgument(format!(
                "data radius {} exceeds field box {}",
                self.radius, lattice.radius
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs: Vec<Complex64> = lattice
            .modes()
            .map(|p| {
                let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                if p.iter().all(|x| x.unsigned_abs() as u32 <= self.radius) { c } else { Complex64::new(0.0, 0.0) }
            })
            .collect();
        let n = lattice.len();
        let mut f = SpectralField::zeros(grid, lattice);
        for (j, xi) in grid.nodes().into_iter().enumerate() {
            let env = self.amplitude * (-xi * xi / (2.0 * self.xi_width * self.xi_width)).exp();
            for (m, c) in coeffs.iter().enumerate() {
                f.amps[j * n + m] = c * env;
            }
        }
        Ok(f)
    }
}
