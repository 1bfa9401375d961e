use crate::arithmetic::{aligned_centered_f64, Length};
use crate::error::{Error, Result};
use crate::orbit::Point;
use crate::spectral::{theta, Frequency};

use super::slope_offset;

/// Most `(n1, n2)` pairs a double-loop sum will visit.
pub const MAX_PAIRS: f64 = 1e10;

/// Parameters of the nested frequency sets: `N` and the exponent `E` that
/// stands in for the fixed exponent of the thresholds `(log N)^E`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShellSpec {
    pub n: u64,
    pub exponent: f64,
}

impl ShellSpec {
    pub fn new(n: u64, exponent: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter("shells need N >= 3".into()));
        }
        if !(exponent > 0.0) {
            return Err(Error::InvalidParameter("exponent must be positive".into()));
        }
        Ok(ShellSpec { n, exponent })
    }

    /// `(log N)^E`.
    pub fn level(&self) -> f64 {
        (self.n as f64).ln().powf(self.exponent)
    }

    /// `N^2 (log N)^2`.
    pub fn radius(&self) -> f64 {
        let nf = self.n as f64;
        nf * nf * nf.ln().powi(2)
    }
}

/// Disjoint shells: each label is the set difference of consecutive sets of
/// the nested chain `U1 > U2 > U3 > U4 > U5`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shell {
    /// `n = 0` or `max(|n1|, |n2|) > N^2 (log N)^2`.
    Outside,
    /// `|n.alpha - n3| >= 1/3`.
    U1NotU2,
    /// `|n1 tau - n2| < 1/2`.
    U2NotU3,
    /// `max(1, |n1|) |n1 tau - n2| ||n.alpha|| < (log N)^E`.
    U3NotU4,
    /// Outside the box `(log N)^E <= |n1|, |n1 tau - n2| <= N^2/4`.
    U4NotU5,
    U5,
}

impl Shell {
    pub fn name(self) -> &'static str {
        match self {
            Shell::Outside => "outside",
            Shell::U1NotU2 => "U1-U2",
            Shell::U2NotU3 => "U2-U3",
            Shell::U3NotU4 => "U3-U4",
            Shell::U4NotU5 => "U4-U5",
            Shell::U5 => "U5",
        }
    }

    /// Membership in the cumulative set `U_k`, `k` in 1..=5.
    pub fn in_set(self, k: u8) -> bool {
        let rank = match self {
            Shell::Outside => 0,
            Shell::U1NotU2 => 1,
            Shell::U2NotU3 => 2,
            Shell::U3NotU4 => 3,
            Shell::U4NotU5 => 4,
            Shell::U5 => 5,
        };
        rank >= k
    }
}

pub fn shell_classify(n: Frequency, alpha: Point, tau: Length, spec: &ShellSpec) -> Shell {
    if n.n1 == 0 && n.n2 == 0 {
        return Shell::Outside;
    }
    let r = spec.radius();
    if n.n1.unsigned_abs().max(n.n2.unsigned_abs()) as f64 > r {
        return Shell::Outside;
    }
    let th = theta(n, alpha).abs();
    if th >= 1.0 / 3.0 {
        return Shell::U1NotU2;
    }
    let t = slope_offset(n.n1, n.n2, tau).to_f64().abs();
    if t < 0.5 {
        return Shell::U2NotU3;
    }
    let l = spec.level();
    let a1 = n.n1.unsigned_abs() as f64;
    if a1.max(1.0) * t * th < l {
        return Shell::U3NotU4;
    }
    let quarter = (spec.n as f64).powi(2) / 4.0;
    if a1.max(t) > quarter || a1.min(t) < l {
        return Shell::U4NotU5;
    }
    Shell::U5
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LargeTermSum {
    pub sum: f64,
    pub count: u64,
}

/// Calls `f(n1, n2, ||n.alpha||)` over the square `max(|n1|, |n2|) <= r`
/// without `n = 0`, walking `n2` by exact increments.
fn for_each_pair(alpha: Point, r: i64, mut f: impl FnMut(i64, i64, f64)) {
    let (a1, a2) = (alpha[0].aligned(), alpha[1].aligned());
    for n1 in -r..=r {
        let mut x = a1.wrapping_mul(n1 as i128 as u128).wrapping_add(a2.wrapping_mul((-r) as i128 as u128));
        for n2 in -r..=r {
            if n1 != 0 || n2 != 0 {
                f(n1, n2, aligned_centered_f64(x).abs());
            }
            x = x.wrapping_add(a2);
        }
    }
}

fn check_pairs(r: i64) -> Result<()> {
    let side = 2.0 * r as f64 + 1.0;
    if side * side > MAX_PAIRS {
        return Err(Error::RangeTooLarge(side * side));
    }
    Ok(())
}

/// Sum of `1/(max(1,|n1|) |n1 tau - n2| ||n.alpha||)` over `n != 0` with
/// `|n_j| <= N^2 (log N)^2`, `|n1 tau - n2| >= 1/2` and the product at most
/// `(log N)^E`.
pub fn large_term_sum(alpha: Point, tau: Length, spec: &ShellSpec) -> Result<LargeTermSum> {
    let r = spec.radius().floor() as i64;
    check_pairs(r)?;
    let l = spec.level();
    let tf = tau.to_f64();
    let mut out = LargeTermSum::default();
    for_each_pair(alpha, r, |n1, n2, d| {
        let m = (n1.unsigned_abs().max(1)) as f64;
        let t = (n1 as f64 * tf - n2 as f64).abs();
        if t < 0.5 {
            return;
        }
        let p = m * t * d;
        if p <= l && p > 0.0 {
            out.sum += 1.0 / p;
            out.count += 1;
        }
    });
    Ok(out)
}

fn log_factor(n1: i64, n2: i64) -> f64 {
    let lg = |n: i64| if n == 0 { f64::NEG_INFINITY } else { (n.unsigned_abs() as f64).ln() };
    lg(n1).max(lg(n2)).max(1.0).powi(4)
}

/// Partial sum of `S1` over `1 <= |n1| <= M`, `n2` nearest to `n1 tau`.
pub fn tail_sum_s1(alpha: Point, tau: Length, m: u64) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidParameter("M must be at least 2".into()));
    }
    let mut s = 0.0;
    for n1 in (-(m as i64))..=m as i64 {
        if n1 == 0 {
            continue;
        }
        let n2 = crate::arithmetic::FixedReal::mul_int_length(tau, n1).nearest_int() as i64;
        let t = slope_offset(n1, n2, tau).to_f64().abs();
        let d = theta(Frequency::nearest(n1, n2, alpha), alpha).abs();
        if d > 0.0 && t > 0.0 {
            s += 1.0 / (d * log_factor(n1, n2) * n1.unsigned_abs() as f64 * t);
        }
    }
    Ok(s)
}

/// Partial sums `(S1, S2)` over `max(|n1|, |n2|) <= M`; `S2` runs over
/// `|n1 tau - n2| >= 1/2`.
pub fn tail_sums_s1_s2(alpha: Point, tau: Length, m: u64) -> Result<(f64, f64)> {
    let s1 = tail_sum_s1(alpha, tau, m)?;
    let r = m as i64;
    check_pairs(r)?;
    let tf = tau.to_f64();
    let mut s2 = 0.0;
    for_each_pair(alpha, r, |n1, n2, d| {
        let t = (n1 as f64 * tf - n2 as f64).abs();
        if t >= 0.5 && d > 0.0 {
            s2 += 1.0 / (d * log_factor(n1, n2) * n1.unsigned_abs().max(1) as f64 * t);
        }
    });
    Ok((s1, s2))
}
