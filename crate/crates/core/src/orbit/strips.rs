use super::{unit_f64, Point};
use crate::arithmetic::{wide, FixedUnit, Length};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StripCounts {
    pub h: u64,
    pub v: u64,
    pub t: u64,
}

/// ‖x‖ <= c / N^2 (or < when `strict`), exactly.
fn small_distance(x: FixedUnit, c: u128, n: u64, strict: bool) -> bool {
    let lhs = x.dist_nearest_int().wide() * wide(n as u128) * wide(n as u128);
    let rhs = wide(c) << x.bits() as usize;
    if strict {
        lhs < rhs
    } else {
        lhs <= rhs
    }
}

/// Whether `y` lies in the tilted parallelogram
/// `{z : |z1| <= tau, |z1/tau + z2| <= w}` taken mod 1.
fn in_tilted(y: Point, tau: f64, w: f64) -> bool {
    let y1 = unit_f64(y[0]);
    let y2 = unit_f64(y[1]);
    [y1, y1 - 1.0].iter().any(|&z1| {
        if z1.abs() > tau {
            return false;
        }
        let s = z1 / tau + y2;
        (s - s.round()).abs() <= w
    })
}

/// Counts bounding the orbit points in the three strips that separate two
/// triangles whose starting points differ by `u`.
///
/// V and H count `1 <= n <= N` with ‖n α_i‖ <= 2/N^2. T counts
/// `0 < |n| <= N` with `n α mod 1` in the parallelogram of slope tau and level
/// width `|u1|/tau + |u2|` centred at the origin; that test is done in floating
/// point.
pub fn strip_counts(alpha: Point, tau: Length, n: u64, u: [f64; 2]) -> Result<StripCounts> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be positive".into()));
    }
    let lim = 2.0 / (n as f64 * n as f64);
    if u[0].abs() > lim || u[1].abs() > lim {
        return Err(Error::InvalidParameter(format!("offsets must satisfy |u_i| <= 2/N^2 = {lim}")));
    }
    let mut out = StripCounts { h: 0, v: 0, t: 0 };
    let mut p = [FixedUnit::zero(alpha[0].bits()); 2];
    for _ in 0..n {
        p = [p[0].add_mod1(alpha[0]), p[1].add_mod1(alpha[1])];
        out.v += small_distance(p[0], 2, n, false) as u64;
        out.h += small_distance(p[1], 2, n, false) as u64;
    }
    let t = tau.to_f64();
    let w = u[0].abs() / t + u[1].abs();
    for k in 1..=n as i128 {
        for s in [k, -k] {
            let y = [alpha[0].mul_int_mod1(s), alpha[1].mul_int_mod1(s)];
            out.t += in_tilted(y, t, w) as u64;
        }
    }
    Ok(out)
}

/// Number of `1 <= n <= N` with ‖n α_i‖ < 2/N^2.
pub fn bc_counter(alpha_i: FixedUnit, n: u64) -> u64 {
    let mut p = FixedUnit::zero(alpha_i.bits());
    let mut c = 0;
    for _ in 0..n {
        p = p.add_mod1(alpha_i);
        c += small_distance(p, 2, n, true) as u64;
    }
    c
}
