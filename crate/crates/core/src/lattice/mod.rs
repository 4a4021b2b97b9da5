//! Modes, eigenvalues and resonance levels on the rescaled torus.

mod precise;
mod quartet;
mod theta;

pub use precise::{Enclosure, ThresholdSide, FRAC_BITS};
pub use quartet::{lambda, lambda_f64, momentum_defect, resonance_level, Quartet, ResonanceLevel, ZeroStatus};
pub use theta::{ThetaSpec, ThetaVector};

use serde::{Deserialize, Serialize};

/// The max-coordinate box `B_K ⊂ ℤ^d`, enumerated lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeBox {
    pub dim: usize,
    pub radius: u32,
}

impl LatticeBox {
    pub fn new(dim: usize, radius: u32) -> Self {
        LatticeBox { dim, radius }
    }

    pub fn side(&self) -> usize {
        2 * self.radius as usize + 1
    }

    pub fn len(&self) -> usize {
        self.side().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, p: &[i64]) -> bool {
        p.len() == self.dim && p.iter().all(|x| x.unsigned_abs() <= self.radius as u64)
    }

    /// Position of `p` in lexicographic order, last coordinate fastest.
    pub fn index_of(&self, p: &[i64]) -> Option<usize> {
        if !self.contains(p) {
            return None;
        }
        let side = self.side();
        let k = self.radius as i64;
        Some(p.iter().fold(0usize, |acc, &x| acc * side + (x + k) as usize))
    }

    pub fn mode_into(&self, mut index: usize, out: &mut [i64]) {
        let side = self.side();
        let k = self.radius as i64;
        for slot in out.iter_mut().rev() {
            *slot = (index % side) as i64 - k;
            index /= side;
        }
    }

    pub fn mode(&self, index: usize) -> Vec<i64> {
        let mut v = vec![0; self.dim];
        self.mode_into(index, &mut v);
        v
    }

    pub fn modes(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.len()).map(move |i| self.mode(i))
    }

    /// Max-coordinate norm of every mode, by index.
    pub fn inf_norms(&self) -> Vec<u32> {
        self.modes().map(|p| p.iter().map(|x| x.unsigned_abs() as u32).max().unwrap_or(0)).collect()
    }

    /// Squared Euclidean norm of every mode, by index.
    pub fn sq_norms(&self) -> Vec<i64> {
        self.modes().map(|p| p.iter().map(|x| x * x).sum()).collect()
    }
}
