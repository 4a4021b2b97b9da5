use super::precise::{floor_div, Enclosure, FRAC_BITS};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

/// The rescaling vector, stored through its squares.
#[derive(Debug, Clone)]
pub struct ThetaVector {
    squares: Vec<Enclosure>,
    squares_f64: Vec<f64>,
    sources: Vec<String>,
    certified: bool,
    label: String,
}

/// Config-facing description of a theta vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThetaSpec {
    Family { family: String, dim: usize },
    Explicit { squares: Vec<String>, independence_certified: bool },
}

impl ThetaSpec {
    pub fn build(&self) -> Result<ThetaVector> {
        match self {
            ThetaSpec::Family { family, dim } => match family.as_str() {
                "sqrt-prime" => ThetaVector::sqrt_primes(*dim),
                "unit" => ThetaVector::from_entries(&vec!["1"; *dim], false, "unit"),
                other => Err(Error::BadTheta(format!("unknown family {other}"))),
            },
            ThetaSpec::Explicit { squares, independence_certified } => {
                let label = if *independence_certified { "user-certified" } else { "user-decimal" };
                ThetaVector::from_entries(squares, *independence_certified, label)
            }
        }
    }
}

impl ThetaVector {
    /// θ_i² = √(i-th prime); rationally independent.
    pub fn sqrt_primes(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        let entries: Vec<String> = first_primes(dim).iter().map(|p| format!("sqrt({p})")).collect();
        Self::from_entries(&entries, true, "sqrt-prime")
    }

    /// Entries are `"a"`, `"a.b"`, `"a/b"` or `"sqrt(x)"` with `x` of the previous forms.
    pub fn from_entries<S: AsRef<str>>(entries: &[S], certified: bool, label: &str) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        let mut squares = Vec::with_capacity(entries.len());
        let mut sources = Vec::with_capacity(entries.len());
        for e in entries {
            let raw = e.as_ref().trim();
            let enc = parse_entry(raw)?;
            if !enc.lo_scaled().is_positive_num() {
                return Err(Error::BadTheta(format!("{raw} is not positive")));
            }
            squares.push(enc);
            sources.push(raw.to_string());
        }
        let squares_f64 = squares.iter().map(|s| s.mid_f64()).collect();
        Ok(ThetaVector { squares, squares_f64, sources, certified, label: label.to_string() })
    }

    pub fn dim(&self) -> usize {
        self.squares.len()
    }

    pub fn squares(&self) -> &[Enclosure] {
        &self.squares
    }

    pub fn squares_f64(&self) -> &[f64] {
        &self.squares_f64
    }

    pub fn sources(&self) -> &[String] {
        &self.sources
    }

    pub fn independence_certified(&self) -> bool {
        self.certified
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Every square multiplied by `num/den`; certification carries over.
    pub fn scaled(&self, num: u64, den: u64) -> Self {
        let squares: Vec<Enclosure> = self.squares.iter().map(|s| s.scale_ratio(num, den)).collect();
        ThetaVector {
            squares_f64: squares.iter().map(|s| s.mid_f64()).collect(),
            squares,
            sources: self.sources.iter().map(|s| format!("({s})*{num}/{den}")).collect(),
            certified: self.certified,
            label: format!("{}*{num}/{den}", self.label),
        }
    }

    /// Rigorous bound on the f64 rounding error of `Σ n_i θ_i²` evaluated in f64.
    pub fn f64_error_bound(&self, coeffs: &[i64]) -> f64 {
        let mag: f64 = coeffs.iter().zip(&self.squares_f64).map(|(&n, &t)| (n as f64).abs() * t).sum();
        mag * (self.dim() as f64 + 2.0) * 4.0 * f64::EPSILON + f64::MIN_POSITIVE
    }

    pub fn spec(&self) -> ThetaSpec {
        ThetaSpec::Explicit { squares: self.sources.clone(), independence_certified: self.certified }
    }
}

trait PositiveNum {
    fn is_positive_num(&self) -> bool;
}

impl PositiveNum for BigInt {
    fn is_positive_num(&self) -> bool {
        self > &BigInt::zero()
    }
}

fn first_primes(n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut c = 2u64;
    while out.len() < n {
        if out.iter().take_while(|&&p| p * p <= c).all(|&p| !c.is_multiple_of(p)) {
            out.push(c);
        }
        c += 1;
    }
    out
}

fn parse_entry(raw: &str) -> Result<Enclosure> {
    let bad = || Error::BadTheta(raw.to_string());
    if let Some(inner) = raw.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
        let (num, den) = parse_rational(inner.trim()).ok_or_else(bad)?;
        // floor(sqrt(num/den) * 2^P) = isqrt(floor(num * 2^2P / den))
        let a = num << (2 * FRAC_BITS);
        let scaled = floor_div(&a, &den);
        let root = scaled.sqrt();
        let exact = &scaled * &den == a && &root * &root == scaled;
        let hi = if exact { root.clone() } else { &root + 1 };
        Ok(Enclosure::from_scaled(root, hi))
    } else {
        let (num, den) = parse_rational(raw).ok_or_else(bad)?;
        let shifted = num << FRAC_BITS;
        let lo = floor_div(&shifted, &den);
        let hi = if &lo * &den == shifted { lo.clone() } else { &lo + 1 };
        Ok(Enclosure::from_scaled(lo, hi))
    }
}

/// Nonnegative decimal or `a/b` as an exact fraction.
fn parse_rational(s: &str) -> Option<(BigInt, BigInt)> {
    if let Some((a, b)) = s.split_once('/') {
        let (n1, d1) = parse_decimal(a.trim())?;
        let (n2, d2) = parse_decimal(b.trim())?;
        if n2.is_zero() {
            return None;
        }
        return Some((n1 * d2, d1 * n2));
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Option<(BigInt, BigInt)> {
    if s.is_empty() {
        return None;
    }
    let (int, frac) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let num: BigInt = digits.parse().ok()?;
    let den = BigInt::from(10u8).pow(frac.len() as u32);
    Some((num, den))
}
