use super::ode::{advance, Method};
use super::rhs::Kernel;
use super::system::QuasiResonantSystem;
use crate::error::{Error, Result};
use crate::fields::SpectralField;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Advance `i∂_t G = μ(π/t) R^t[G]` from `t0` to `t1` through `τ = π ln t`,
/// in which the flow reads `i∂_τ g = μ R^{e^{τ/π}}[g]`.
pub fn effective_flow_step(
    g: &SpectralField,
    t0: f64,
    t1: f64,
    sys: &QuasiResonantSystem,
    method: Method,
) -> Result<SpectralField> {
    Ok(effective_flow_samples(g, t0, &[t1], sys, method)?.pop().expect("one sample"))
}

/// States of the effective flow at each of the increasing `times`, starting from `g` at `t0`.
pub fn effective_flow_samples(
    g: &SpectralField,
    t0: f64,
    times: &[f64],
    sys: &QuasiResonantSystem,
    method: Method,
) -> Result<Vec<SpectralField>> {
    if !(t0 > 0.0) {
        return Err(Error::InvalidArgument(format!("effective flow needs t0 > 0, got {t0}")));
    }
    if times.iter().any(|&t| t < t0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("sample times must be increasing and not before t0".into()));
    }
    method.validate()?;
    let mut kernel = Kernel::new(sys, &g.lattice)?;
    kernel.restrict_to_closure(&Kernel::support_of(g));
    let mu = sys.mu();
    let n = g.modes_len();
    let taus: Vec<f64> = times.iter().map(|t| PI * t.ln()).collect();
    let tau0 = PI * t0.ln();
    let per_slice: Vec<Result<Vec<Vec<Complex64>>>> = (0..g.grid.count)
        .into_par_iter()
        .map(|j| {
            let mut y = g.slice(j).to_vec();
            let mut rhs = |tau: f64, y: &[Complex64], out: &mut [Complex64]| {
                kernel.truncated(mu, y, (tau / PI).exp(), out);
            };
            let mut out = Vec::with_capacity(taus.len());
            let mut prev = tau0;
            for &tau in &taus {
                advance(method, &mut rhs, prev, tau, &mut y)?;
                prev = tau;
                out.push(y.clone());
            }
            Ok(out)
        })
        .collect();
    let mut slices = Vec::with_capacity(g.grid.count);
    for s in per_slice {
        slices.push(s?);
    }
    Ok((0..times.len())
        .map(|i| {
            let mut f = SpectralField::zeros(g.grid, g.lattice);
            f.time_origin = times[i];
            for (j, s) in slices.iter().enumerate() {
                f.slice_mut(j).copy_from_slice(&s[i]);
            }
            debug_assert_eq!(f.amps.len(), n * g.grid.count);
            f
        })
        .collect())
}
