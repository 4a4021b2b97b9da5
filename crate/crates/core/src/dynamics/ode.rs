//! Fixed-step RK4 and Dormand–Prince 5(4) on complex vectors.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum Method {
    Rk4 { dt: f64 },
    Rk45 { tol: f64 },
}

impl Method {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Method::Rk4 { dt } if !(dt > 0.0 && dt.is_finite()) => {
                Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")))
            }
            Method::Rk45 { tol } if !(tol > 0.0 && tol <= 1e-3) => {
                Err(Error::InvalidArgument(format!("tolerance must lie in (0, 1e-3], got {tol}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
}

impl StepStats {
    pub fn merge(&mut self, o: StepStats) {
        self.accepted += o.accepted;
        self.rejected += o.rejected;
    }
}

fn axpy(out: &mut [Complex64], y: &[Complex64], h: f64, terms: &[(&[Complex64], f64)]) {
    for i in 0..out.len() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in terms {
            acc += k[i] * *c;
        }
        out[i] = y[i] + acc * h;
    }
}

fn check_finite(y: &[Complex64], t: f64) -> Result<()> {
    if y.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { t, what: "state".into() })
    }
}

/// Advance `y` from `t0` to `t1` (either direction).
pub fn advance<F>(method: Method, f: &mut F, t0: f64, t1: f64, y: &mut [Complex64]) -> Result<StepStats>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    if t0 == t1 {
        return Ok(StepStats::default());
    }
    match method {
        Method::Rk4 { dt } => rk4(f, t0, t1, dt, y),
        Method::Rk45 { tol } => dopri(f, t0, t1, tol, y),
    }
}

fn rk4<F>(f: &mut F, t0: f64, t1: f64, dt: f64, y: &mut [Complex64]) -> Result<StepStats>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    let n = y.len();
    let steps = ((t1 - t0).abs() / dt).ceil().max(1.0) as u64;
    let h = (t1 - t0) / steps as f64;
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![Complex64::default(); n], vec![Complex64::default(); n], vec![Complex64::default(); n], vec![Complex64::default(); n], vec![Complex64::default(); n]);
    for i in 0..steps {
        let t = t0 + h * i as f64;
        f(t, y, &mut k1);
        axpy(&mut tmp, y, h, &[(&k1, 0.5)]);
        f(t + 0.5 * h, &tmp, &mut k2);
        axpy(&mut tmp, y, h, &[(&k2, 0.5)]);
        f(t + 0.5 * h, &tmp, &mut k3);
        axpy(&mut tmp, y, h, &[(&k3, 1.0)]);
        f(t + h, &tmp, &mut k4);
        for j in 0..n {
            y[j] += (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (h / 6.0);
        }
        check_finite(y, t + h)?;
    }
    Ok(StepStats { accepted: steps, rejected: 0 })
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn dopri<F>(f: &mut F, t0: f64, t1: f64, tol: f64, y: &mut [Complex64]) -> Result<StepStats>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    let n = y.len();
    let z = Complex64::default();
    let (mut k1, mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
        (vec![z; n], vec![z; n], vec![z; n], vec![z; n], vec![z; n], vec![z; n], vec![z; n]);
    let mut tmp = vec![z; n];
    let mut ynew = vec![z; n];
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let mut stats = StepStats::default();
    let mut t = t0;
    f(t, y, &mut k1);
    check_finite(&k1, t)?;
    // Initial step from the derivative scale.
    let scale = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let dscale = k1.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut h = if dscale > 0.0 { (0.01 * (scale + tol) / dscale).min(span) } else { span };
    h = h.max(span * 1e-8);
    let min_h = 1e-14 * t0.abs().max(t1.abs()).max(1.0);
    loop {
        let remaining = (t1 - t).abs();
        if remaining <= min_h * 0.5 {
            break;
        }
        let last = h >= remaining;
        let hs = if last { remaining } else { h } * dir;
        axpy(&mut tmp, y, hs, &[(&k1, A21)]);
        f(t + C2 * hs, &tmp, &mut k2);
        axpy(&mut tmp, y, hs, &[(&k1, A31), (&k2, A32)]);
        f(t + C3 * hs, &tmp, &mut k3);
        axpy(&mut tmp, y, hs, &[(&k1, A41), (&k2, A42), (&k3, A43)]);
        f(t + C4 * hs, &tmp, &mut k4);
        axpy(&mut tmp, y, hs, &[(&k1, A51), (&k2, A52), (&k3, A53), (&k4, A54)]);
        f(t + C5 * hs, &tmp, &mut k5);
        axpy(&mut tmp, y, hs, &[(&k1, A61), (&k2, A62), (&k3, A63), (&k4, A64), (&k5, A65)]);
        f(t + hs, &tmp, &mut k6);
        axpy(&mut ynew, y, hs, &[(&k1, B1), (&k3, B3), (&k4, B4), (&k5, B5), (&k6, B6)]);
        let t_new = if last { t1 } else { t + hs };
        f(t_new, &ynew, &mut k7);
        let mut err = 0.0f64;
        for i in 0..n {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * hs;
            let sc = tol + tol * y[i].norm().max(ynew[i].norm());
            err = err.max(e.norm() / sc);
        }
        if !err.is_finite() {
            return Err(Error::NonFinite { t, what: "error estimate".into() });
        }
        if err <= 1.0 {
            y.copy_from_slice(&ynew);
            std::mem::swap(&mut k1, &mut k7);
            t = t_new;
            stats.accepted += 1;
            check_finite(y, t)?;
            if last {
                break;
            }
        } else {
            stats.rejected += 1;
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = (h * if err <= 1.0 { fac } else { fac.min(1.0) }).min(span);
        if h < min_h {
            return Err(Error::StepUnderflow { t, h });
        }
    }
    Ok(stats)
}
