//! Frequency sets of the small-divisor estimates and their counting sums.

mod cf;
mod phi;
mod shells;

pub use cf::{cf_harmonic_sum, harmonic_blocks, khintchine_holds, khintchine_solutions, partial_quotient_sum_test, HarmonicBlock};
pub use phi::PhiFunction;
pub use shells::{large_term_sum, shell_classify, tail_sum_s1, tail_sums_s1_s2, LargeTermSum, Shell, ShellSpec};

use crate::arithmetic::{FixedReal, Length};
use crate::error::{Error, Result};
use crate::orbit::Point;
use crate::spectral::{n_dot_alpha, Frequency};

/// Most `n1` values a box may span.
pub const MAX_BOX_WIDTH: f64 = 1e9;

/// Lattice box `v1 <= n1 < w1`, `v2 <= n1 tau - n2 < w2`, optionally with
/// `|n1 tau - n2| >= 1/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencyBox {
    pub v1: f64,
    pub w1: f64,
    pub v2: f64,
    pub w2: f64,
    pub tau: Length,
    pub require_far: bool,
}

impl FrequencyBox {
    pub fn new(v: [f64; 2], w: [f64; 2], tau: Length, require_far: bool) -> Result<Self> {
        if !(v[0] < w[0] && v[1] < w[1]) || v.iter().chain(&w).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("box needs v < w".into()));
        }
        Ok(FrequencyBox { v1: v[0], w1: w[0], v2: v[1], w2: w[1], tau, require_far })
    }
}

/// Exact `n1 tau - n2`.
pub fn slope_offset(n1: i64, n2: i64, tau: Length) -> FixedReal {
    FixedReal::mul_int_length(tau, n1).add_int(-(n2 as i128))
}

fn far(r: FixedReal) -> bool {
    r.abs() >= FixedReal::new(0, crate::arithmetic::FixedUnit::half(r.bits()))
}

/// Calls `f` on each `(n1, n2)` of the box in increasing order, computing the
/// `n2` range from exact floors.
pub fn for_each_in_box(b: &FrequencyBox, mut f: impl FnMut(i64, i64)) -> Result<()> {
    if b.w1 - b.v1 > MAX_BOX_WIDTH {
        return Err(Error::RangeTooLarge(b.w1 - b.v1));
    }
    let bits = b.tau.bits();
    let v2 = FixedReal::from_f64(b.v2, bits);
    let w2 = FixedReal::from_f64(b.w2, bits);
    let lo1 = b.v1.ceil() as i64;
    let hi1 = b.w1.ceil() as i64;
    for n1 in lo1..hi1 {
        let t = FixedReal::mul_int_length(b.tau, n1);
        // n2 <= t - v2 and n2 > t - w2.
        let hi = t.sub(v2).int as i64;
        let lo = t.sub(w2).int as i64 + 1;
        for n2 in lo..=hi {
            if b.require_far && !far(slope_offset(n1, n2, b.tau)) {
                continue;
            }
            f(n1, n2);
        }
    }
    Ok(())
}

/// Members of the box with `n3` the nearest integer to `n.alpha`.
pub fn enumerate_box(b: &FrequencyBox, alpha: Point) -> Result<Vec<Frequency>> {
    let mut out = Vec::new();
    for_each_in_box(b, |n1, n2| out.push(Frequency::nearest(n1, n2, alpha)))?;
    Ok(out)
}

/// `min(1/2, C / (max(1, |n1|) |n1 tau - n2|))`.
pub fn small_threshold(n1: i64, offset: f64, c: f64) -> f64 {
    let d = (n1.unsigned_abs().max(1) as f64) * offset.abs();
    if d == 0.0 {
        0.5
    } else {
        (c / d).min(0.5)
    }
}

/// Counts of the fractional parts `{n.alpha}` of a box against the threshold
/// `m(n)`: below (`0 < {n.alpha} < m`), above (`1 - m < {n.alpha} < 1`), the
/// middle band, and exact zeros.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ZCounts {
    pub lower: u64,
    pub upper: u64,
    pub middle: u64,
    pub zero: u64,
}

pub fn z_counts(alpha: Point, c: f64, b: &FrequencyBox) -> Result<ZCounts> {
    if !(c >= 1.0) {
        return Err(Error::InvalidParameter("C must be at least 1".into()));
    }
    let mut z = ZCounts::default();
    for_each_in_box(b, |n1, n2| {
        let frac = n_dot_alpha(n1, n2, alpha).frac;
        if frac.is_zero() {
            z.zero += 1;
            return;
        }
        let m = small_threshold(n1, slope_offset(n1, n2, b.tau).to_f64(), c);
        let x = frac.to_f64();
        if x < m {
            z.lower += 1;
        } else if 1.0 - x < m {
            z.upper += 1;
        } else {
            z.middle += 1;
        }
    })?;
    Ok(z)
}

/// Number of box members with `0 < {n.alpha} < m(n)`.
pub fn z_count(alpha: Point, c: f64, b: &FrequencyBox) -> Result<u64> {
    Ok(z_counts(alpha, c, b)?.lower)
}

/// Sum of `m(n)` over the box.
pub fn e_expected(c: f64, b: &FrequencyBox) -> Result<f64> {
    if !(c >= 1.0) {
        return Err(Error::InvalidParameter("C must be at least 1".into()));
    }
    let mut s = 0.0;
    for_each_in_box(b, |n1, n2| s += small_threshold(n1, slope_offset(n1, n2, b.tau).to_f64(), c))?;
    Ok(s)
}
