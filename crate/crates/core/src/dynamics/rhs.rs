use super::system::QuasiResonantSystem;
use crate::error::{Error, Result};
use crate::fields::{linear_frequencies, SpectralField};
use crate::lattice::LatticeBox;
use num_complex::Complex64;
use rayon::prelude::*;

struct Span {
    omega: f64,
    phased: bool,
    start: usize,
    end: usize,
}

/// Flattened quartet tables re-indexed into a field box, ready for per-slice sums.
pub struct Kernel {
    modes: usize,
    spans: Vec<Span>,
    quartets: Vec<[u32; 4]>,
}

impl Kernel {
    pub fn new(sys: &QuasiResonantSystem, field_box: &LatticeBox) -> Result<Self> {
        if field_box.dim != sys.dim() {
            return Err(Error::DimensionMismatch { expected: sys.dim(), got: field_box.dim });
        }
        if field_box.radius < sys.params.k_outer {
            return Err(Error::BoxMismatch { field: field_box.radius, system: sys.params.k_outer });
        }
        let src = sys.resonant.lattice_box();
        let map: Vec<u32> = src.modes().map(|p| field_box.index_of(&p).expect("box contains system box") as u32).collect();
        let remap = |q: &[u32; 4]| q.map(|i| map[i as usize]);
        let mut spans = Vec::new();
        let mut quartets = Vec::new();
        for (list, phased) in [(&sys.resonant, false), (&sys.quasi, true)] {
            for g in &list.groups {
                let start = quartets.len();
                quartets.extend(g.quartets.iter().map(remap));
                spans.push(Span { omega: g.omega, phased, start, end: quartets.len() });
            }
        }
        Ok(Kernel { modes: field_box.len(), spans, quartets })
    }

    /// Drop quartets that can never fire from data supported on `support`.
    ///
    /// The support is closed under `p = q + s − r` over the listed quartets; modes outside
    /// the closure stay exactly zero, so the restricted kernel gives identical trajectories.
    pub fn restrict_to_closure(&mut self, support: &[bool]) -> Vec<bool> {
        assert_eq!(support.len(), self.modes);
        let mut active = support.to_vec();
        loop {
            let mut changed = false;
            for &[p, q, r, s] in &self.quartets {
                if active[q as usize] && active[r as usize] && active[s as usize] && !active[p as usize] {
                    active[p as usize] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let mut quartets = Vec::new();
        for span in &mut self.spans {
            let start = quartets.len();
            quartets.extend(
                self.quartets[span.start..span.end]
                    .iter()
                    .filter(|q| q[1..].iter().all(|&i| active[i as usize])),
            );
            span.start = start;
            span.end = quartets.len();
        }
        self.spans.retain(|s| s.end > s.start);
        self.quartets = quartets;
        active
    }

    /// Modes carrying a nonzero amplitude in any slice of `field`.
    pub fn support_of(field: &SpectralField) -> Vec<bool> {
        let mut out = vec![false; field.modes_len()];
        for slice in field.slices() {
            for (o, z) in out.iter_mut().zip(slice) {
                *o |= z.norm_sqr() > 0.0;
            }
        }
        out
    }

    pub fn quartet_count(&self) -> usize {
        self.quartets.len()
    }

    /// `out_p = Σ [e^{itω}] u_q u_s ū_r`; phases dropped when `with_phases` is false.
    pub fn trilinear(&self, u: &[Complex64], t: f64, with_phases: bool, out: &mut [Complex64]) {
        debug_assert_eq!(u.len(), self.modes);
        out.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        let nz: Vec<bool> = u.iter().map(|z| z.re != 0.0 || z.im != 0.0).collect();
        for span in &self.spans {
            let phase = if with_phases && span.phased { Some(Complex64::from_polar(1.0, t * span.omega)) } else { None };
            for &[p, q, r, s] in &self.quartets[span.start..span.end] {
                let (p, q, r, s) = (p as usize, q as usize, r as usize, s as usize);
                if !(nz[q] && nz[s] && nz[r]) {
                    continue;
                }
                let term = u[q] * u[s] * u[r].conj();
                out[p] += match phase {
                    Some(ph) => term * ph,
                    None => term,
                };
            }
        }
    }

    /// Truncated flow: `du/dt = −iμ [Σ_res + Σ_quasi e^{itω}]`.
    pub fn truncated(&self, mu: f64, u: &[Complex64], t: f64, out: &mut [Complex64]) {
        self.trilinear(u, t, true, out);
        let c = Complex64::new(0.0, -mu);
        out.iter_mut().for_each(|z| *z *= c);
    }

    /// Gauged flow: `dv/dt = −i [(ξ²+λ_p) v + μ Σ v_q v_s v̄_r]`.
    pub fn gauged(&self, mu: f64, freq: &[f64], v: &[Complex64], out: &mut [Complex64]) {
        self.trilinear(v, 0.0, false, out);
        for ((z, w), x) in out.iter_mut().zip(freq).zip(v) {
            *z = Complex64::new(0.0, -1.0) * (x * w + *z * mu);
        }
    }
}

fn check(field: &SpectralField, sys: &QuasiResonantSystem) -> Result<()> {
    if field.lattice.radius < sys.params.k_outer {
        return Err(Error::BoxMismatch { field: field.lattice.radius, system: sys.params.k_outer });
    }
    Ok(())
}

pub fn rhs_truncated(u: &SpectralField, t: f64, sys: &QuasiResonantSystem) -> Result<SpectralField> {
    check(u, sys)?;
    let kernel = Kernel::new(sys, &u.lattice)?;
    let mut out = SpectralField::zeros(u.grid, u.lattice);
    out.time_origin = t;
    let n = u.modes_len();
    out.amps.par_chunks_mut(n).zip(u.amps.par_chunks(n)).for_each(|(o, s)| kernel.truncated(sys.mu(), s, t, o));
    Ok(out)
}

pub fn rhs_gauged(v: &SpectralField, t: f64, sys: &QuasiResonantSystem) -> Result<SpectralField> {
    check(v, sys)?;
    let kernel = Kernel::new(sys, &v.lattice)?;
    let freq = linear_frequencies(&v.grid, &v.lattice, &sys.theta)?;
    let mut out = SpectralField::zeros(v.grid, v.lattice);
    out.time_origin = t;
    let n = v.modes_len();
    out.amps
        .par_chunks_mut(n)
        .zip(v.amps.par_chunks(n))
        .zip(freq.par_chunks(n))
        .for_each(|((o, s), w)| kernel.gauged(sys.mu(), w, s, o));
    Ok(out)
}
