//! Empirical Diophantine profiling of θ: exhaustive gap tables, power-law
//! fits, Khintchine-type scans and the radius/threshold relation.

use crate::error::{Error, Result};
use crate::lattice::{Enclosure, LatticeBox, ThetaVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

pub const DEFAULT_PROFILE_BUDGET: u128 = 50_000_000;

/// One row of the gap table: the smallest `|Σ n_i θ_i²|` over `0 ≠ n ∈ B_K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub k: u32,
    pub min_abs: f64,
    pub min_abs_lo: f64,
    pub min_abs_hi: f64,
    pub argmin: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiophantineProfile {
    pub theta_label: String,
    pub dim: usize,
    pub rows: Vec<ProfileRow>,
    pub gamma: f64,
    pub c_theta: f64,
    pub fit_slack: f64,
    /// `min_K min_abs(K)·K^γ`, a rigorous lower envelope over the table.
    pub envelope: f64,
    /// Requested radius when the budget cut the table short.
    pub truncated_from: Option<u32>,
}

impl DiophantineProfile {
    pub fn k_max(&self) -> u32 {
        self.rows.last().map(|r| r.k).unwrap_or(0)
    }

    pub fn row(&self, k: u32) -> Option<&ProfileRow> {
        if k == 0 {
            return None;
        }
        self.rows.get(k as usize - 1)
    }

    pub fn law(&self) -> Result<GapLaw> {
        GapLaw::from_profile(self)
    }
}

pub fn gap_profile(theta: &ThetaVector, k_max: u32) -> Result<DiophantineProfile> {
    gap_profile_with_budget(theta, k_max, DEFAULT_PROFILE_BUDGET)
}

/// Exhaustive minimum per radius. The representative of `±n` is the one with
/// positive level; ties between equal magnitudes go to the lexicographically
/// smaller vector.
pub fn gap_profile_with_budget(theta: &ThetaVector, k_max: u32, budget: u128) -> Result<DiophantineProfile> {
    if !theta.independence_certified() {
        return Err(Error::Uncertified("exact gap profiling"));
    }
    if k_max == 0 {
        return Err(Error::InvalidArgument("K_max must be at least 1".into()));
    }
    let d = theta.dim();
    let size = |k: u32| (2 * k as u128 + 1).checked_pow(d as u32).unwrap_or(u128::MAX);
    let mut k_eff = k_max;
    while k_eff > 0 && size(k_eff) > budget {
        k_eff -= 1;
    }
    if k_eff == 0 {
        return Err(Error::BudgetExceeded { needed: size(1), budget });
    }
    let truncated_from = (k_eff < k_max).then_some(k_max);

    let shells = scan_shells(theta, k_eff);
    let mut rows = Vec::with_capacity(k_eff as usize);
    let mut best: Option<(Enclosure, Vec<i64>)> = None;
    for (k, shell_best) in shells.into_iter().enumerate().skip(1) {
        if let Some(cand) = shell_best {
            best = match best {
                None => Some(cand),
                Some(b) => Some(if better(&cand, &b) { cand } else { b }),
            };
        }
        let (enc, n) = best.clone().expect("every shell of radius >= 1 has a positive level");
        rows.push(ProfileRow {
            k: k as u32,
            min_abs: enc.mid_f64(),
            min_abs_lo: enc.lo_f64(),
            min_abs_hi: enc.hi_f64(),
            argmin: n,
        });
    }

    let (gamma, c_theta, fit_slack) = fit_power_law(&rows);
    let envelope = rows
        .iter()
        .map(|r| r.min_abs_lo * (r.k as f64).powf(gamma))
        .fold(f64::INFINITY, f64::min);
    Ok(DiophantineProfile {
        theta_label: theta.label().to_string(),
        dim: d,
        rows,
        gamma,
        c_theta,
        fit_slack,
        envelope,
        truncated_from,
    })
}

fn better(a: &(Enclosure, Vec<i64>), b: &(Enclosure, Vec<i64>)) -> bool {
    match a.0.cmp_bounds(&b.0) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => a.1 < b.1,
    }
}

struct Cand {
    value: f64,
    err: f64,
    n: Vec<i64>,
}

/// Per inf-norm shell, the certified smallest positive level.
fn scan_shells(theta: &ThetaVector, k: u32) -> Vec<Option<(Enclosure, Vec<i64>)>> {
    let d = theta.dim();
    let t = theta.squares_f64().to_vec();
    let firsts: Vec<i64> = (-(k as i64)..=k as i64).collect();
    let tail = LatticeBox::new(d - 1, k);
    let per_first: Vec<Vec<Vec<Cand>>> = firsts
        .par_iter()
        .map(|&n0| {
            let mut shells: Vec<Vec<Cand>> = (0..=k).map(|_| Vec::new()).collect();
            let mut upper = vec![f64::INFINITY; k as usize + 1];
            let mut n = vec![0i64; d];
            n[0] = n0;
            let count = if d == 1 { 1 } else { tail.len() };
            for idx in 0..count {
                if d > 1 {
                    tail.mode_into(idx, &mut n[1..]);
                }
                let shell = n.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0) as usize;
                if shell == 0 {
                    continue;
                }
                let value: f64 = n.iter().zip(&t).map(|(&c, &s)| c as f64 * s).sum();
                let err = theta.f64_error_bound(&n);
                if value + err < 0.0 || value - err > upper[shell] {
                    continue;
                }
                if value - err > 0.0
                    && value + err < upper[shell] {
                        upper[shell] = value + err;
                        let u = upper[shell];
                        shells[shell].retain(|c| c.value - c.err <= u);
                    }
                shells[shell].push(Cand { value, err, n: n.clone() });
            }
            shells
        })
        .collect();

    (0..=k as usize)
        .map(|shell| {
            let upper = per_first
                .iter()
                .flat_map(|s| s[shell].iter())
                .filter(|c| c.value - c.err > 0.0)
                .map(|c| c.value + c.err)
                .fold(f64::INFINITY, f64::min);
            let mut best: Option<(Enclosure, Vec<i64>)> = None;
            for c in per_first.iter().flat_map(|s| s[shell].iter()) {
                if c.value - c.err > upper {
                    continue;
                }
                let enc = Enclosure::dot(&c.n, theta.squares());
                if enc.hi_scaled() <= &num_bigint::BigInt::from(0) {
                    continue;
                }
                assert!(!enc.contains_zero(), "working precision exhausted near a zero level");
                let cand = (enc, c.n.clone());
                best = match best {
                    None => Some(cand),
                    Some(b) => Some(if better(&cand, &b) { cand } else { b }),
                };
            }
            best
        })
        .collect()
}

/// Least squares of `ln min_abs` against `ln ‖argmin‖₂` over distinct minimisers.
fn fit_power_law(rows: &[ProfileRow]) -> (f64, f64, f64) {
    let mut pts: Vec<(f64, f64)> = Vec::new();
    let mut last: Option<&Vec<i64>> = None;
    for r in rows {
        if last != Some(&r.argmin) {
            pts.push((euclid(&r.argmin).ln(), r.min_abs.ln()));
            last = Some(&r.argmin);
        }
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if pts.len() >= 2 && sxx > 0.0 { sxy / sxx } else { 0.0 };
    let gamma = (-slope).max(0.0);
    let intercept = my + gamma * mx;
    let c = intercept.exp();
    let slack = rows
        .iter()
        .map(|r| 1.0 - r.min_abs / (c * euclid(&r.argmin).powf(-gamma)))
        .fold(0.0f64, f64::max);
    (gamma, c, slack)
}

fn euclid(n: &[i64]) -> f64 {
    (n.iter().map(|x| (x * x) as f64).sum::<f64>()).sqrt()
}

/// `K(M) = box_constant · M^{1/(2γ)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapLaw {
    pub gamma: f64,
    pub box_constant: f64,
    /// Largest radius for which the law is backed by the table, if any.
    pub certified_radius: Option<f64>,
}

impl GapLaw {
    pub fn new(gamma: f64, box_constant: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) || !(box_constant > 0.0 && box_constant.is_finite()) {
            return Err(Error::InvalidArgument(format!("gap law needs gamma > 0 and constant > 0, got {gamma}, {box_constant}")));
        }
        Ok(GapLaw { gamma, box_constant, certified_radius: None })
    }

    /// Quartets in `B_K` have coefficients in `B_{2K²}`, so
    /// `envelope·(2K²)^{-γ} ≥ 1/M` whenever `K ≤ (envelope·M)^{1/(2γ)}/√2`.
    pub fn from_profile(profile: &DiophantineProfile) -> Result<Self> {
        let b = profile.envelope.powf(1.0 / (2.0 * profile.gamma)) / 2f64.sqrt();
        let mut law = GapLaw::new(profile.gamma, b)?;
        law.certified_radius = Some((profile.k_max() as f64 / 2.0).sqrt());
        Ok(law)
    }

    pub fn radius(&self, m: f64) -> f64 {
        self.box_constant * m.powf(1.0 / (2.0 * self.gamma))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxBound {
    pub m: f64,
    pub radius: f64,
    /// Largest integer radius cleared directly by the table.
    pub tabulated_radius: Option<u32>,
    /// The law radius lies where the table backs the envelope.
    pub certified: bool,
    /// `⌊radius⌋ ≤ tabulated_radius` whenever certified.
    pub consistent: bool,
}

pub fn gap_to_box_bound(profile: &DiophantineProfile, m: f64) -> Result<BoxBound> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::InvalidArgument(format!("M must be positive and finite, got {m}")));
    }
    let law = GapLaw::from_profile(profile)?;
    Ok(bound_from_law(&law, Some(profile), m))
}

pub fn bound_from_law(law: &GapLaw, profile: Option<&DiophantineProfile>, m: f64) -> BoxBound {
    let radius = law.radius(m);
    let tabulated_radius = profile.map(|p| {
        let mut r = 0u32;
        loop {
            let next = r + 1;
            let need = 2 * next * next;
            match p.row(need) {
                Some(row) if row.min_abs_lo * m >= 1.0 => r = next,
                _ => break,
            }
        }
        r
    });
    let certified = law.certified_radius.map(|c| radius <= c).unwrap_or(false);
    let consistent = match tabulated_radius {
        Some(t) if certified => radius.floor() <= t as f64,
        _ => true,
    };
    BoxBound { m, radius, tabulated_radius, certified, consistent }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanVerdict {
    Accept,
    Reject,
    Borderline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub n: [i64; 2],
    pub norm: f64,
    pub value: f64,
    pub bound: f64,
    pub verdict: ScanVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KhintchineScan {
    pub cutoff: u32,
    /// Accepted entries sorted by norm, then lexicographically.
    pub hits: Vec<ScanEntry>,
    /// Entries whose enclosure touches the bound within rounding of the logarithm.
    pub borderline: Vec<ScanEntry>,
    /// Unit vectors, where `log‖n‖ = 0` makes the bound singular.
    pub skipped: Vec<[i64; 2]>,
    pub rejected: usize,
}

/// Scan `|θ₁²n₁ + θ₂²n₂| ≤ (‖n‖ log‖n‖)^{-1}` over `1 < ‖n‖ ≤ cutoff`.
pub fn khintchine_scan(theta: &ThetaVector, cutoff: u32) -> Result<KhintchineScan> {
    if theta.dim() < 2 {
        return Err(Error::InvalidArgument("Khintchine scan needs dim >= 2".into()));
    }
    let sq = &theta.squares()[..2];
    let c = cutoff as i64;
    let mut hits = Vec::new();
    let mut borderline = Vec::new();
    let mut skipped = Vec::new();
    let mut rejected = 0;
    for n1 in -c..=c {
        for n2 in -c..=c {
            let nn = n1 * n1 + n2 * n2;
            if nn == 0 || nn > c * c {
                continue;
            }
            if nn == 1 {
                skipped.push([n1, n2]);
                continue;
            }
            let norm = (nn as f64).sqrt();
            let bound = 1.0 / (norm * norm.ln());
            let value = Enclosure::dot(&[n1, n2], sq).abs();
            let slack = 1e-12 * bound;
            let verdict = if value.hi_f64() <= bound - slack {
                ScanVerdict::Accept
            } else if value.lo_f64() > bound + slack {
                ScanVerdict::Reject
            } else {
                ScanVerdict::Borderline
            };
            let entry = ScanEntry { n: [n1, n2], norm, value: value.mid_f64(), bound, verdict };
            match verdict {
                ScanVerdict::Accept => hits.push(entry),
                ScanVerdict::Borderline => borderline.push(entry),
                ScanVerdict::Reject => rejected += 1,
            }
        }
    }
    let key = |e: &ScanEntry| (e.n[0] * e.n[0] + e.n[1] * e.n[1], e.n);
    hits.sort_by_key(key);
    borderline.sort_by_key(key);
    Ok(KhintchineScan { cutoff, hits, borderline, skipped, rejected })
}
