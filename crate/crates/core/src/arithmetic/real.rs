use std::cmp::Ordering;

use super::fixed::{mask, FixedUnit, Length};
use super::wide::u128_to_f64;

/// Exact real `int + frac` with `frac` in [0,1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FixedReal {
    pub int: i128,
    pub frac: FixedUnit,
}

impl FixedReal {
    pub fn new(int: i128, frac: FixedUnit) -> Self {
        FixedReal { int, frac }
    }

    pub fn from_int(k: i128, bits: u32) -> Self {
        FixedReal { int: k, frac: FixedUnit::zero(bits) }
    }

    pub fn from_unit(u: FixedUnit) -> Self {
        FixedReal { int: 0, frac: u }
    }

    /// Nearest representable value to a finite `x`.
    pub fn from_f64(x: f64, bits: u32) -> Self {
        let f = x.floor();
        assert!(f.abs() < 1e36, "value out of range");
        let frac = FixedUnit::from_f64(x - f, bits);
        // x - floor(x) may round up to 1.
        let carry = frac.is_zero() && x - f > 0.5;
        FixedReal { int: f as i128 + carry as i128, frac }
    }

    pub fn from_length(x: Length) -> Self {
        if x.is_one() {
            Self::from_int(1, x.bits())
        } else {
            Self::from_unit(x.frac())
        }
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.frac.bits()
    }

    /// Exact `n * u`.
    pub fn mul_int(u: FixedUnit, n: i64) -> Self {
        let bits = u.bits();
        let m = n.unsigned_abs() as u128;
        let lo = (u.raw() & u64::MAX as u128) * m;
        let hi = (u.raw() >> 64) * m;
        // 192-bit product hi * 2^64 + lo.
        let (low128, carry) = lo.overflowing_add(hi << 64);
        let top = (hi >> 64) + carry as u128;
        let frac = low128 & mask(bits);
        let int = if bits == 128 { top } else { (top << (128 - bits)) | (low128 >> bits) };
        let r = FixedReal { int: int as i128, frac: FixedUnit::from_raw(frac, bits) };
        if n < 0 {
            r.neg()
        } else {
            r
        }
    }

    /// Exact `n * x` for a length.
    pub fn mul_int_length(x: Length, n: i64) -> Self {
        if x.is_one() {
            Self::from_int(n as i128, x.bits())
        } else {
            Self::mul_int(x.frac(), n)
        }
    }

    pub fn neg(self) -> Self {
        if self.frac.is_zero() {
            FixedReal { int: -self.int, frac: self.frac }
        } else {
            FixedReal { int: -self.int - 1, frac: self.frac.neg_mod1() }
        }
    }

    pub fn add(self, o: Self) -> Self {
        let s = self.frac.raw().wrapping_add(o.frac.raw());
        let bits = self.bits();
        let carry = if bits == 128 { s < self.frac.raw() } else { s >> bits != 0 };
        FixedReal { int: self.int + o.int + carry as i128, frac: FixedUnit::from_raw(s & mask(bits), bits) }
    }

    pub fn sub(self, o: Self) -> Self {
        self.add(o.neg())
    }

    pub fn add_int(self, k: i128) -> Self {
        FixedReal { int: self.int + k, frac: self.frac }
    }

    /// Value as f64; the fractional part is converted separately so values near
    /// zero keep full relative precision.
    pub fn to_f64(self) -> f64 {
        match self.int {
            0 => self.frac.to_f64(),
            -1 => {
                if self.frac.is_zero() {
                    -1.0
                } else {
                    -u128_to_f64(self.frac.neg_mod1().raw(), self.bits())
                }
            }
            k => k as f64 + self.frac.to_f64(),
        }
    }

    /// Nearest integer, ties to even.
    pub fn nearest_int(self) -> i128 {
        let half = 1u128 << (self.bits() - 1);
        match self.frac.raw().cmp(&half) {
            Ordering::Less => self.int,
            Ordering::Greater => self.int + 1,
            Ordering::Equal => {
                if self.int % 2 == 0 {
                    self.int
                } else {
                    self.int + 1
                }
            }
        }
    }

    /// `self - nearest_int(self)`, a value in [-1/2, 1/2].
    pub fn centered(self) -> FixedReal {
        self.add_int(-self.nearest_int())
    }

    pub fn is_zero(self) -> bool {
        self.int == 0 && self.frac.is_zero()
    }

    pub fn abs(self) -> FixedReal {
        if self.int < 0 {
            self.neg()
        } else {
            self
        }
    }
}

impl PartialOrd for FixedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FixedReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.int.cmp(&other.int).then(self.frac.cmp(&other.frac))
    }
}

/// Nearest integer to `n + u`, ties to even.
pub fn nearest_int(n: i128, u: FixedUnit) -> i128 {
    FixedReal::new(n, u).nearest_int()
}
