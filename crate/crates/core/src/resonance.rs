//! Enumeration of resonant and quasi-resonant quartets.

use crate::error::{Error, Result};
use crate::lattice::{Enclosure, LatticeBox, Quartet, ResonanceLevel, ThetaVector, ThresholdSide, ZeroStatus};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

pub const DEFAULT_BRUTE_BUDGET: u128 = 200_000_000;

/// Norm used in the tail condition `max(‖p‖,‖q‖,‖r‖,‖s‖) > K_inner`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailNorm {
    #[default]
    Euclidean,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ListKind {
    Resonant,
    QuasiResonant { m: f64, k_inner: u32, tail_norm: TailNorm },
}

/// Quartets sharing one coefficient vector, stored as mode indices of the list's box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelGroup {
    pub coeffs: Vec<i64>,
    pub omega: f64,
    pub omega_lo: f64,
    pub omega_hi: f64,
    /// Enclosure straddled the threshold or could not exclude zero.
    pub flagged: bool,
    pub quartets: Vec<[u32; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuartetList {
    pub dim: usize,
    pub k_outer: u32,
    pub kind: ListKind,
    pub groups: Vec<LevelGroup>,
}

impl QuartetList {
    pub fn empty(dim: usize, k_outer: u32, kind: ListKind) -> Self {
        QuartetList { dim, k_outer, kind, groups: Vec::new() }
    }

    pub fn lattice_box(&self) -> LatticeBox {
        LatticeBox::new(self.dim, self.k_outer)
    }

    pub fn len(&self) -> usize {
        self.groups.iter().map(|g| g.quartets.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn flagged_count(&self) -> usize {
        self.groups.iter().filter(|g| g.flagged).map(|g| g.quartets.len()).sum()
    }

    /// All quartets as sorted index arrays; lexicographic order on `(p,q,r,s)`.
    pub fn canonical(&self) -> Vec<[u32; 4]> {
        let mut v: Vec<[u32; 4]> = self.groups.iter().flat_map(|g| g.quartets.iter().copied()).collect();
        v.sort_unstable();
        v
    }

    pub fn quartet(&self, idx: [u32; 4]) -> Quartet {
        let b = self.lattice_box();
        let [p, q, r, s] = idx.map(|i| b.mode(i as usize));
        Quartet::new(p, q, r, s)
    }

    pub fn entries(&self) -> impl Iterator<Item = (Quartet, &LevelGroup)> + '_ {
        self.groups.iter().flat_map(move |g| g.quartets.iter().map(move |&q| (self.quartet(q), g)))
    }

    /// JSON lines with fields `p, q, r, s, coeffs, omega`.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        #[derive(Serialize)]
        struct Line<'a> {
            p: &'a [i64],
            q: &'a [i64],
            r: &'a [i64],
            s: &'a [i64],
            coeffs: &'a [i64],
            omega: f64,
        }
        for (qt, g) in self.entries() {
            let line = Line { p: &qt.p, q: &qt.q, r: &qt.r, s: &qt.s, coeffs: &g.coeffs, omega: g.omega };
            serde_json::to_writer(&mut w, &line)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

fn group_from(theta: &ThetaVector, coeffs: Vec<i64>, flagged: bool, mut quartets: Vec<[u32; 4]>) -> LevelGroup {
    let level = ResonanceLevel::from_coeffs(theta, coeffs).expect("coefficient length matches theta");
    quartets.sort_unstable();
    LevelGroup {
        omega: level.omega.mid_f64(),
        omega_lo: level.omega.lo_f64(),
        omega_hi: level.omega.hi_f64(),
        coeffs: level.coeffs,
        flagged,
        quartets,
    }
}

/// `Γ₀^K` through the coordinatewise pairing: for each `(p, r)` and each subset
/// `E` of the coordinates where `p` and `r` differ, `q = p_E + r_{E^c}`,
/// `s = r_E + p_{E^c}`.
pub fn enumerate_resonant(theta: &ThetaVector, k: u32) -> Result<QuartetList> {
    if !theta.independence_certified() {
        return Err(Error::Uncertified("resonant enumeration"));
    }
    let d = theta.dim();
    let b = LatticeBox::new(d, k);
    let n = b.len();
    let coords = mode_table(&b);
    let side = b.side();
    let per_p: Vec<Vec<[u32; 4]>> = (0..n)
        .into_par_iter()
        .map(|ip| {
            let p = &coords[ip * d..(ip + 1) * d];
            let mut out = Vec::new();
            let mut diff = Vec::with_capacity(d);
            for ir in 0..n {
                let r = &coords[ir * d..(ir + 1) * d];
                diff.clear();
                diff.extend((0..d).filter(|&i| p[i] != r[i]));
                for mask in 0u32..(1 << diff.len()) {
                    let mut iq = 0usize;
                    let mut is = 0usize;
                    for i in 0..d {
                        let (qi, si) = match diff.iter().position(|&j| j == i) {
                            Some(bit) if mask & (1 << bit) != 0 => (p[i], r[i]),
                            Some(_) => (r[i], p[i]),
                            None => (p[i], r[i]),
                        };
                        iq = iq * side + (qi + k as i64) as usize;
                        is = is * side + (si + k as i64) as usize;
                    }
                    out.push([ip as u32, iq as u32, ir as u32, is as u32]);
                }
            }
            out
        })
        .collect();
    let mut all: Vec<[u32; 4]> = per_p.into_iter().flatten().collect();
    all.sort_unstable();
    all.dedup();
    Ok(QuartetList {
        dim: d,
        k_outer: k,
        kind: ListKind::Resonant,
        groups: vec![group_from(theta, vec![0; d], false, all)],
    })
}

/// All `(p, q, r) ∈ B_K³` with `s = p + r − q ∈ B_K` and zero coefficient vector.
pub fn brute_force_resonant(theta: &ThetaVector, k: u32) -> Result<QuartetList> {
    brute_force_resonant_with_budget(theta, k, DEFAULT_BRUTE_BUDGET)
}

pub fn brute_force_resonant_with_budget(theta: &ThetaVector, k: u32, budget: u128) -> Result<QuartetList> {
    if !theta.independence_certified() {
        return Err(Error::Uncertified("resonant brute force"));
    }
    let d = theta.dim();
    if d > 3 {
        return Err(Error::InvalidArgument("brute force is limited to d <= 3".into()));
    }
    let b = LatticeBox::new(d, k);
    let n = b.len();
    let needed = (n as u128).pow(3);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let coords = mode_table(&b);
    let side = b.side();
    let kk = k as i64;
    let per_p: Vec<Vec<[u32; 4]>> = (0..n)
        .into_par_iter()
        .map(|ip| {
            let p = &coords[ip * d..(ip + 1) * d];
            let mut out = Vec::new();
            for iq in 0..n {
                let q = &coords[iq * d..(iq + 1) * d];
                'r: for ir in 0..n {
                    let r = &coords[ir * d..(ir + 1) * d];
                    let mut is = 0usize;
                    for i in 0..d {
                        let si = p[i] + r[i] - q[i];
                        if si.abs() > kk || p[i] * p[i] + r[i] * r[i] != q[i] * q[i] + si * si {
                            continue 'r;
                        }
                        is = is * side + (si + kk) as usize;
                    }
                    out.push([ip as u32, iq as u32, ir as u32, is as u32]);
                }
            }
            out
        })
        .collect();
    let all: Vec<[u32; 4]> = per_p.into_iter().flatten().collect();
    Ok(QuartetList {
        dim: d,
        k_outer: k,
        kind: ListKind::Resonant,
        groups: vec![group_from(theta, vec![0; d], false, all)],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Out,
    In,
    Flagged,
}

/// Classify `0 < |ω| < 1/M` for one coefficient vector; zero vectors are `Out`.
fn classify(theta: &ThetaVector, coeffs: &[i64], m: f64) -> Class {
    if coeffs.iter().all(|&c| c == 0) {
        return Class::Out;
    }
    let tau = 1.0 / m;
    let v: f64 = coeffs.iter().zip(theta.squares_f64()).map(|(&c, &t)| c as f64 * t).sum();
    let e = theta.f64_error_bound(coeffs) + 8.0 * f64::EPSILON * tau;
    if v.abs() - e > tau {
        return Class::Out;
    }
    if v.abs() + e < tau && v.abs() - e > 0.0 {
        return Class::In;
    }
    let level = ResonanceLevel::from_coeffs(theta, coeffs.to_vec()).expect("dimension checked");
    match level.status {
        ZeroStatus::ExactZero => Class::Out,
        ZeroStatus::IndeterminateNearZero => Class::Flagged,
        ZeroStatus::NonZero => match level.omega.abs_vs_reciprocal(m) {
            ThresholdSide::Below => Class::In,
            ThresholdSide::Above => Class::Out,
            ThresholdSide::Straddles => Class::Flagged,
        },
    }
}

/// Momentum-conserving quartets in `B_{K_outer}` with `0 < |ω| < 1/M` and a mode
/// of norm above `K_inner`, grouped by coefficient vector.
pub fn enumerate_quasi(theta: &ThetaVector, k_outer: u32, m: f64, k_inner: u32) -> Result<QuartetList> {
    enumerate_quasi_with(theta, k_outer, m, k_inner, TailNorm::Euclidean, DEFAULT_BRUTE_BUDGET)
}

pub fn enumerate_quasi_with(
    theta: &ThetaVector,
    k_outer: u32,
    m: f64,
    k_inner: u32,
    tail_norm: TailNorm,
    budget: u128,
) -> Result<QuartetList> {
    if k_inner > k_outer {
        return Err(Error::InvalidArgument(format!("K_inner {k_inner} exceeds K_outer {k_outer}")));
    }
    if !(m > 0.0) {
        return Err(Error::InvalidArgument(format!("M must be positive, got {m}")));
    }
    let d = theta.dim();
    let kind = ListKind::QuasiResonant { m, k_inner, tail_norm };
    if m.is_infinite() {
        return Ok(QuartetList::empty(d, k_outer, kind));
    }
    let b = LatticeBox::new(d, k_outer);
    let n = b.len();
    let needed = (n as u128).pow(3);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    // Coefficients of quartets in B_K satisfy |n_i| <= 2K².
    let span = 2 * (k_outer as i64).pow(2);
    let width = (2 * span + 1) as usize;
    let table_len = (width as u128).pow(d as u32);
    if table_len > 1 << 28 {
        return Err(Error::BudgetExceeded { needed: table_len, budget: 1 << 28 });
    }
    let table: Vec<Class> = (0..table_len as usize)
        .into_par_iter()
        .map(|mut idx| {
            let mut c = vec![0i64; d];
            for slot in c.iter_mut().rev() {
                *slot = (idx % width) as i64 - span;
                idx /= width;
            }
            classify(theta, &c, m)
        })
        .collect();

    let coords = mode_table(&b);
    let norms: Vec<i64> = match tail_norm {
        TailNorm::Euclidean => b.sq_norms(),
        TailNorm::Max => b.inf_norms().into_iter().map(|x| x as i64).collect(),
    };
    let inner = match tail_norm {
        TailNorm::Euclidean => (k_inner as i64).pow(2),
        TailNorm::Max => k_inner as i64,
    };
    let side = b.side();
    let kk = k_outer as i64;
    let per_p: Vec<Vec<(u32, [u32; 4])>> = (0..n)
        .into_par_iter()
        .map(|ip| {
            let p = &coords[ip * d..(ip + 1) * d];
            let mut out = Vec::new();
            for iq in 0..n {
                let q = &coords[iq * d..(iq + 1) * d];
                'r: for ir in 0..n {
                    let r = &coords[ir * d..(ir + 1) * d];
                    let mut is = 0usize;
                    let mut key = 0usize;
                    for i in 0..d {
                        let si = p[i] + r[i] - q[i];
                        if si.abs() > kk {
                            continue 'r;
                        }
                        is = is * side + (si + kk) as usize;
                        let ni = p[i] * p[i] + r[i] * r[i] - q[i] * q[i] - si * si;
                        key = key * width + (ni + span) as usize;
                    }
                    if table[key] == Class::Out {
                        continue;
                    }
                    let mx = norms[ip].max(norms[iq]).max(norms[ir]).max(norms[is]);
                    if mx <= inner {
                        continue;
                    }
                    out.push((key as u32, [ip as u32, iq as u32, ir as u32, is as u32]));
                }
            }
            out
        })
        .collect();

    let mut by_key: BTreeMap<Vec<i64>, (bool, Vec<[u32; 4]>)> = BTreeMap::new();
    for (key, qt) in per_p.into_iter().flatten() {
        let mut idx = key as usize;
        let mut c = vec![0i64; d];
        for slot in c.iter_mut().rev() {
            *slot = (idx % width) as i64 - span;
            idx /= width;
        }
        let flagged = table[key as usize] == Class::Flagged;
        by_key.entry(c).or_insert_with(|| (flagged, Vec::new())).1.push(qt);
    }
    let groups = by_key.into_iter().map(|(c, (f, qs))| group_from(theta, c, f, qs)).collect();
    Ok(QuartetList { dim: d, k_outer, kind, groups })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Quartet counts per `|ω|` bin on `[0, 1/M]`; the last bin is closed and
/// absorbs flagged entries sitting on the threshold.
pub fn level_histogram(list: &QuartetList, bins: usize) -> Result<Histogram> {
    let m = match list.kind {
        ListKind::QuasiResonant { m, .. } => m,
        ListKind::Resonant => return Err(Error::InvalidArgument("histogram needs a quasi-resonant list".into())),
    };
    if bins == 0 {
        return Err(Error::InvalidArgument("at least one bin".into()));
    }
    let top = 1.0 / m;
    let edges: Vec<f64> = (0..=bins).map(|i| top * i as f64 / bins as f64).collect();
    let mut counts = vec![0u64; bins];
    for g in &list.groups {
        let x = g.omega.abs();
        let i = if top > 0.0 { ((x / top) * bins as f64).floor() as usize } else { 0 };
        counts[i.min(bins - 1)] += g.quartets.len() as u64;
    }
    Ok(Histogram { edges, counts })
}

/// Integers `p² + r² − q² − s²` realised by `p − q + r − s = 0` in `[−K, K]`.
pub fn realizable_coefficients_1d(k: u32) -> Vec<i64> {
    let kk = k as i64;
    let mut set = std::collections::BTreeSet::new();
    for p in -kk..=kk {
        for q in -kk..=kk {
            for r in -kk..=kk {
                let s = p + r - q;
                if s.abs() <= kk {
                    set.insert(p * p + r * r - q * q - s * s);
                }
            }
        }
    }
    set.into_iter().collect()
}

fn witness_1d(k: u32, n: i64) -> [i64; 4] {
    let kk = k as i64;
    for p in -kk..=kk {
        for q in -kk..=kk {
            for r in -kk..=kk {
                let s = p + r - q;
                if s.abs() <= kk && p * p + r * r - q * q - s * s == n {
                    return [p, q, r, s];
                }
            }
        }
    }
    unreachable!("coefficient {n} not realisable in radius {k}")
}

/// Smallest nonzero `|ω|` over momentum-conserving quartets in `B_K`, with a witness.
pub fn min_nonzero_level(theta: &ThetaVector, k: u32) -> Result<Option<(ResonanceLevel, Quartet)>> {
    if !theta.independence_certified() {
        return Err(Error::Uncertified("minimum nonzero level"));
    }
    let d = theta.dim();
    let vals = realizable_coefficients_1d(k);
    let total = (vals.len() as u128).pow(d as u32);
    if total > DEFAULT_BRUTE_BUDGET {
        return Err(Error::BudgetExceeded { needed: total, budget: DEFAULT_BRUTE_BUDGET });
    }
    let t = theta.squares_f64();
    let mut cands: Vec<(f64, f64, Vec<i64>)> = Vec::new();
    let mut upper = f64::INFINITY;
    let mut idx = vec![0usize; d];
    'outer: loop {
        let c: Vec<i64> = idx.iter().map(|&i| vals[i]).collect();
        if c.iter().any(|&x| x != 0) {
            let v = c.iter().zip(t).map(|(&a, &b)| a as f64 * b).sum::<f64>().abs();
            let e = theta.f64_error_bound(&c);
            if v - e <= upper {
                if v - e > 0.0 && v + e < upper {
                    upper = v + e;
                    cands.retain(|x| x.0 - x.1 <= upper);
                }
                cands.push((v, e, c));
            }
        }
        for slot in (0..d).rev() {
            idx[slot] += 1;
            if idx[slot] < vals.len() {
                continue 'outer;
            }
            idx[slot] = 0;
        }
        break;
    }
    let mut best: Option<(Enclosure, Vec<i64>)> = None;
    for (v, e, c) in cands {
        if v - e > upper {
            continue;
        }
        let enc = Enclosure::dot(&c, theta.squares()).abs();
        let replace = match &best {
            None => true,
            Some((b, bc)) => match enc.cmp_bounds(b) {
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Equal => &c < bc,
                std::cmp::Ordering::Greater => false,
            },
        };
        if replace {
            best = Some((enc, c));
        }
    }
    Ok(best.map(|(_, c)| {
        let w: Vec<[i64; 4]> = c.iter().map(|&n| witness_1d(k, n)).collect();
        let pick = |j: usize| w.iter().map(|x| x[j]).collect::<Vec<i64>>();
        let q = Quartet::new(pick(0), pick(1), pick(2), pick(3));
        (ResonanceLevel::from_coeffs(theta, c).expect("dimension"), q)
    }))
}

fn mode_table(b: &LatticeBox) -> Vec<i64> {
    let mut coords = vec![0i64; b.len() * b.dim];
    for (i, chunk) in coords.chunks_mut(b.dim.max(1)).enumerate().take(b.len()) {
        b.mode_into(i, chunk);
    }
    coords
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CacheHeader {
    theta_label: String,
    theta_sources: Vec<String>,
    certified: bool,
    dim: usize,
    k_outer: u32,
    kind: ListKind,
}

const CACHE_MAGIC: &[u8; 4] = b"WGQL";
const CACHE_VERSION: u32 = 1;

fn cache_header(theta: &ThetaVector, k_outer: u32, kind: ListKind) -> CacheHeader {
    CacheHeader {
        theta_label: theta.label().to_string(),
        theta_sources: theta.sources().to_vec(),
        certified: theta.independence_certified(),
        dim: theta.dim(),
        k_outer,
        kind,
    }
}

/// Cache file path for a list keyed by θ, the outer radius and the list kind.
pub fn cache_path(dir: &Path, theta: &ThetaVector, k_outer: u32, kind: ListKind) -> PathBuf {
    let header = serde_json::to_vec(&cache_header(theta, k_outer, kind)).expect("header serialises");
    let digest = hex::encode(Sha256::digest(&header));
    let tag = match kind {
        ListKind::Resonant => "res".to_string(),
        ListKind::QuasiResonant { m, .. } => format!("quasi-m{m}"),
    };
    let label: String = theta.label().chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
    dir.join(format!("{label}-k{k_outer}-{tag}-{}.wgql", &digest[..16]))
}

pub fn save_cache(dir: &Path, theta: &ThetaVector, list: &QuartetList) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = cache_path(dir, theta, list.k_outer, list.kind);
    let header = serde_json::to_vec(&cache_header(theta, list.k_outer, list.kind))?;
    let mut w = BufWriter::new(std::fs::File::create(&path)?);
    w.write_all(CACHE_MAGIC)?;
    w.write_all(&CACHE_VERSION.to_le_bytes())?;
    w.write_all(&(header.len() as u64).to_le_bytes())?;
    w.write_all(&header)?;
    w.write_all(&(list.groups.len() as u64).to_le_bytes())?;
    for g in &list.groups {
        for c in &g.coeffs {
            w.write_all(&c.to_le_bytes())?;
        }
        for x in [g.omega, g.omega_lo, g.omega_hi] {
            w.write_all(&x.to_le_bytes())?;
        }
        w.write_all(&[g.flagged as u8])?;
        w.write_all(&(g.quartets.len() as u64).to_le_bytes())?;
        for q in &g.quartets {
            for x in q {
                w.write_all(&x.to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(path)
}

/// Returns `None` when no cache file exists for the key.
pub fn load_cache(dir: &Path, theta: &ThetaVector, k_outer: u32, kind: ListKind) -> Result<Option<QuartetList>> {
    let path = cache_path(dir, theta, k_outer, kind);
    if !path.exists() {
        return Ok(None);
    }
    let mut bytes = Vec::new();
    std::fs::File::open(&path)?.read_to_end(&mut bytes)?;
    let mut cur = Cursor { buf: &bytes, pos: 0 };
    if cur.take(4)? != CACHE_MAGIC {
        return Err(Error::Format("bad quartet cache magic".into()));
    }
    if cur.u32()? != CACHE_VERSION {
        return Err(Error::Format("unsupported quartet cache version".into()));
    }
    let hlen = cur.u64()? as usize;
    let header: CacheHeader = serde_json::from_slice(cur.take(hlen)?)?;
    if header != cache_header(theta, k_outer, kind) {
        return Err(Error::Format("quartet cache key mismatch".into()));
    }
    let ngroups = cur.u64()? as usize;
    let mut groups = Vec::with_capacity(ngroups);
    for _ in 0..ngroups {
        let coeffs = (0..header.dim).map(|_| cur.u64().map(|x| x as i64)).collect::<Result<Vec<_>>>()?;
        let omega = f64::from_bits(cur.u64()?);
        let omega_lo = f64::from_bits(cur.u64()?);
        let omega_hi = f64::from_bits(cur.u64()?);
        let flagged = cur.take(1)?[0] != 0;
        let count = cur.u64()? as usize;
        let mut quartets = Vec::with_capacity(count);
        for _ in 0..count {
            quartets.push([cur.u32()?, cur.u32()?, cur.u32()?, cur.u32()?]);
        }
        groups.push(LevelGroup { coeffs, omega, omega_lo, omega_hi, flagged, quartets });
    }
    Ok(Some(QuartetList { dim: header.dim, k_outer, kind, groups }))
}

pub(crate) struct Cursor<'a> {
    pub buf: &'a [u8],
    pub pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Format("unexpected end of data".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}
