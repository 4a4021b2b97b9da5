use super::system::QuasiResonantSystem;
use crate::error::{Error, Result};
use crate::fields::hk_weights;
use crate::lattice::LatticeBox;
use num_complex::Complex64;

/// `|Im Σ [p]_k v_q v_s v̄_r v̄_p| / Σ |terms|` over the system's quartets,
/// quasi-resonant terms carrying `e^{itω}`.
pub fn claim_identity_check(
    slice: &[Complex64],
    lattice: &LatticeBox,
    sys: &QuasiResonantSystem,
    k: f64,
    t: f64,
) -> Result<f64> {
    if slice.len() != lattice.len() {
        return Err(Error::GridMismatch(format!("slice of {} for box of {}", slice.len(), lattice.len())));
    }
    if lattice.radius < sys.params.k_outer || lattice.dim != sys.dim() {
        return Err(Error::BoxMismatch { field: lattice.radius, system: sys.params.k_outer });
    }
    let src = sys.resonant.lattice_box();
    let map: Vec<usize> = src.modes().map(|p| lattice.index_of(&p).expect("box contains system box")).collect();
    let w = hk_weights(lattice, k);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut mag = 0.0;
    for (list, phased) in [(&sys.resonant, false), (&sys.quasi, true)] {
        for g in &list.groups {
            let phase = if phased { Complex64::from_polar(1.0, t * g.omega) } else { Complex64::new(1.0, 0.0) };
            for q4 in &g.quartets {
                let [p, q, r, s] = q4.map(|i| map[i as usize]);
                let term = phase * w[p] * ((slice[q] * slice[p].conj()) * (slice[s] * slice[r].conj()));
                sum += term;
                mag += term.norm();
            }
        }
    }
    Ok(if mag > 0.0 { sum.im.abs() / mag } else { 0.0 })
}
