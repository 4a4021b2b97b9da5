//! Fixed-point interval arithmetic on `BigInt` mantissas scaled by 2^-FRAC_BITS.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

/// Binary digits kept after the point. Well above the 128-bit floor.
pub const FRAC_BITS: u32 = 192;

/// Closed interval `[lo, hi] * 2^-FRAC_BITS`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enclosure {
    lo: BigInt,
    hi: BigInt,
}

/// Where an enclosed magnitude sits relative to a threshold `1/M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdSide {
    Below,
    Above,
    Straddles,
}

impl Enclosure {
    pub fn zero() -> Self {
        Enclosure { lo: BigInt::zero(), hi: BigInt::zero() }
    }

    pub fn from_integer(n: i64) -> Self {
        let v = BigInt::from(n) << FRAC_BITS;
        Enclosure { lo: v.clone(), hi: v }
    }

    /// Raw scaled bounds; `lo <= hi` is enforced.
    pub fn from_scaled(lo: BigInt, hi: BigInt) -> Self {
        if lo <= hi {
            Enclosure { lo, hi }
        } else {
            Enclosure { lo: hi, hi: lo }
        }
    }

    pub fn lo_scaled(&self) -> &BigInt {
        &self.lo
    }

    pub fn hi_scaled(&self) -> &BigInt {
        &self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_exact_zero(&self) -> bool {
        self.lo.is_zero() && self.hi.is_zero()
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn add(&self, other: &Enclosure) -> Enclosure {
        Enclosure { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    pub fn neg(&self) -> Enclosure {
        Enclosure { lo: -&self.hi, hi: -&self.lo }
    }

    pub fn scale(&self, k: i64) -> Enclosure {
        let k = BigInt::from(k);
        let a = &self.lo * &k;
        let b = &self.hi * &k;
        Enclosure::from_scaled(a, b)
    }

    /// Multiply by `num/den` with outward rounding.
    pub fn scale_ratio(&self, num: u64, den: u64) -> Enclosure {
        assert!(den > 0);
        let n = BigInt::from(num);
        let d = BigInt::from(den);
        let lo = floor_div(&(&self.lo * &n), &d);
        let hi = ceil_div(&(&self.hi * &n), &d);
        Enclosure { lo, hi }
    }

    /// Sum of `c_i * x_i` over matching slices.
    pub fn dot(coeffs: &[i64], values: &[Enclosure]) -> Enclosure {
        let mut lo = BigInt::zero();
        let mut hi = BigInt::zero();
        for (&c, v) in coeffs.iter().zip(values) {
            if c == 0 {
                continue;
            }
            let k = BigInt::from(c);
            if c > 0 {
                lo += &v.lo * &k;
                hi += &v.hi * &k;
            } else {
                lo += &v.hi * &k;
                hi += &v.lo * &k;
            }
        }
        Enclosure { lo, hi }
    }

    pub fn lo_f64(&self) -> f64 {
        let v = scaled_to_f64(&self.lo);
        if self.is_point() && is_exactly_representable(&self.lo) { v } else { v.next_down() }
    }

    pub fn hi_f64(&self) -> f64 {
        let v = scaled_to_f64(&self.hi);
        if self.is_point() && is_exactly_representable(&self.hi) { v } else { v.next_up() }
    }

    pub fn mid_f64(&self) -> f64 {
        scaled_to_f64(&((&self.lo + &self.hi) >> 1))
    }

    pub fn width_f64(&self) -> f64 {
        scaled_to_f64(&(&self.hi - &self.lo))
    }

    /// Bounds of `|x|` over the enclosure.
    pub fn abs(&self) -> Enclosure {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            self.neg()
        } else {
            let m = if -&self.lo > self.hi { -&self.lo } else { self.hi.clone() };
            Enclosure { lo: BigInt::zero(), hi: m }
        }
    }

    /// Decide `|x| < 1/m` for a positive finite `m`, exactly.
    pub fn abs_vs_reciprocal(&self, m: f64) -> ThresholdSide {
        assert!(m.is_finite() && m > 0.0);
        let a = self.abs();
        let below_hi = cmp_times(&a.hi, m) == Ordering::Less;
        let below_lo = cmp_times(&a.lo, m) == Ordering::Less;
        match (below_lo, below_hi) {
            (true, true) => ThresholdSide::Below,
            (false, false) => ThresholdSide::Above,
            _ => ThresholdSide::Straddles,
        }
    }

    /// Total order on enclosures that are disjoint or equal; ties broken by lower bound.
    pub fn cmp_bounds(&self, other: &Enclosure) -> Ordering {
        if self.hi < other.lo {
            Ordering::Less
        } else if other.hi < self.lo {
            Ordering::Greater
        } else {
            self.lo.cmp(&other.lo).then(self.hi.cmp(&other.hi))
        }
    }
}

/// Compare `x * 2^-FRAC_BITS * m` against 1 for `x >= 0`.
fn cmp_times(x: &BigInt, m: f64) -> Ordering {
    let (mant, exp) = decompose(m);
    let lhs = x * BigInt::from(mant);
    // lhs * 2^(exp - FRAC_BITS) vs 1
    let shift = exp - FRAC_BITS as i64;
    if shift >= 0 {
        (lhs << shift as usize).cmp(&BigInt::from(1u8))
    } else {
        lhs.cmp(&(BigInt::from(1u8) << (-shift) as usize))
    }
}

/// `m = mant * 2^exp` exactly.
fn decompose(m: f64) -> (u64, i64) {
    let bits = m.to_bits();
    let e = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if e == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), e - 1075)
    }
}

fn scaled_to_f64(x: &BigInt) -> f64 {
    let bits = x.bits() as i64;
    if bits <= 1000 {
        x.to_f64().unwrap_or(f64::NAN) * (2f64).powi(-(FRAC_BITS as i32))
    } else {
        let drop = (bits - 900) as usize;
        let top = x >> drop;
        top.to_f64().unwrap_or(f64::NAN) * (2f64).powi(drop as i32 - FRAC_BITS as i32)
    }
}

fn is_exactly_representable(x: &BigInt) -> bool {
    if x.is_zero() {
        return true;
    }
    let tz = x.trailing_zeros().unwrap_or(0);
    x.bits() - tz <= 53
}

pub(crate) fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    use num_integer::Integer;
    a.div_floor(b)
}

pub(crate) fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -floor_div(&-a, b)
}
