//! Exact unit-interval arithmetic and continued fractions.

mod cfrac;
mod fixed;
mod real;
mod wide;

pub use cfrac::{cf_expand, convergent_gap_check, gaps_decreasing, ContinuedFraction};
pub use fixed::{aligned_centered_f64, preset, FixedUnit, Length, DEFAULT_BITS, MAX_BITS, MIN_BITS, PRESETS};
pub use real::{nearest_int, FixedReal};
pub use wide::{scale2, u128_to_f64, wide, wide_diff_to_f64, wide_to_f64, SWide, Wide};

/// Free-function forms of the basic operations.
#[inline]
pub fn add_mod1(u: FixedUnit, v: FixedUnit) -> FixedUnit {
    u.add_mod1(v)
}

#[inline]
pub fn mul_int_mod1(n: i128, u: FixedUnit) -> FixedUnit {
    u.mul_int_mod1(n)
}

#[inline]
pub fn dist_nearest_int(u: FixedUnit) -> FixedUnit {
    u.dist_nearest_int()
}
