use crate::diophantine::{DiophantineProfile, GapLaw};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const MAX_DELTA: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub n: u32,
    /// Threshold `2^{20γδn}`.
    pub m: f64,
    /// Box radius `C·2^{10δn}`.
    pub k: f64,
    /// Dyadic window `[2ⁿ, 2ⁿ⁺¹)`.
    pub window: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub delta: f64,
    pub gamma: f64,
    pub box_constant: f64,
    /// Set when the constants come from a fitted profile rather than a given law.
    pub fitted: bool,
    pub entries: Vec<ScheduleEntry>,
}

impl Schedule {
    pub fn entry(&self, n: u32) -> Option<&ScheduleEntry> {
        self.entries.iter().find(|e| e.n == n)
    }

    /// The window containing `t ≥ 1`.
    pub fn window_of(&self, t: f64) -> Option<&ScheduleEntry> {
        self.entries.iter().find(|e| e.window.0 <= t && t < e.window.1)
    }
}

pub fn build_schedule(profile: &DiophantineProfile, delta: f64, n_max: u32) -> Result<Schedule> {
    let mut s = schedule_from_law(&profile.law()?, delta, n_max)?;
    s.fitted = true;
    Ok(s)
}

pub fn schedule_from_law(law: &GapLaw, delta: f64, n_max: u32) -> Result<Schedule> {
    if !(delta > 0.0 && delta <= MAX_DELTA) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, {MAX_DELTA}], got {delta}")));
    }
    let entries = (0..=n_max)
        .map(|n| {
            let m = (20.0 * law.gamma * delta * n as f64).exp2();
            let k = law.box_constant * (10.0 * delta * n as f64).exp2();
            ScheduleEntry { n, m, k, window: ((n as f64).exp2(), ((n + 1) as f64).exp2()) }
        })
        .collect();
    Ok(Schedule { delta, gamma: law.gamma, box_constant: law.box_constant, fitted: false, entries })
}
