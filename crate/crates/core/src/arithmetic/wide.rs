//! Wide unsigned integers for exact products of fixed-point raws.

use ruint::aliases::U512;

/// 512-bit unsigned integer, enough for products of a few 129-bit values.
pub type Wide = U512;

#[inline]
pub fn wide(x: u128) -> Wide {
    Wide::from(x)
}

/// Correctly rounded `mag / 2^shift` as f64 (round half to even).
pub fn wide_to_f64(mag: Wide, shift: u32) -> f64 {
    let bl = mag.bit_len();
    if bl == 0 {
        return 0.0;
    }
    if bl <= 64 {
        let m: u64 = mag.wrapping_to();
        return scale2(m as f64, -(shift as i32));
    }
    let drop = bl - 64;
    let top: u64 = (mag >> drop).wrapping_to();
    // A sticky bit below the 64 kept bits is enough to round correctly to 53.
    let sticky = (mag & ((Wide::from(1u8) << drop) - Wide::from(1u8))) != Wide::ZERO;
    let t = top | sticky as u64;
    scale2(t as f64, drop as i32 - shift as i32)
}

/// Signed variant: `(pos - neg) / 2^shift`, correctly rounded.
pub fn wide_diff_to_f64(pos: Wide, neg: Wide, shift: u32) -> f64 {
    if pos >= neg {
        wide_to_f64(pos - neg, shift)
    } else {
        -wide_to_f64(neg - pos, shift)
    }
}

/// Exact multiplication by a power of two for exponents in the normal range.
#[inline]
pub fn scale2(x: f64, e: i32) -> f64 {
    let mut x = x;
    let mut e = e;
    while e > 1000 {
        x *= f64::from_bits(((1023 + 1000) as u64) << 52);
        e -= 1000;
    }
    while e < -1000 {
        x *= f64::from_bits(((1023 - 1000) as u64) << 52);
        e += 1000;
    }
    x * f64::from_bits(((1023 + e) as u64) << 52)
}

/// Correctly rounded `x / 2^shift` for a u128.
#[inline]
pub fn u128_to_f64(x: u128, shift: u32) -> f64 {
    // The u128 -> f64 cast rounds to nearest even.
    scale2(x as f64, -(shift as i32))
}

/// Sign-magnitude wide integer, used for orientation tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SWide {
    pub neg: bool,
    pub mag: Wide,
}

impl SWide {
    pub fn from_diff(a: Wide, b: Wide) -> Self {
        if a >= b {
            SWide { neg: false, mag: a - b }
        } else {
            SWide { neg: true, mag: b - a }
        }
    }

    pub fn mul(self, o: SWide) -> SWide {
        let mag = self.mag * o.mag;
        SWide { neg: (self.neg != o.neg) && mag != Wide::ZERO, mag }
    }

    pub fn sub(self, o: SWide) -> SWide {
        self.add(SWide { neg: !o.neg && o.mag != Wide::ZERO, mag: o.mag })
    }

    pub fn add(self, o: SWide) -> SWide {
        if self.neg == o.neg {
            SWide { neg: self.neg, mag: self.mag + o.mag }
        } else if self.mag >= o.mag {
            let mag = self.mag - o.mag;
            SWide { neg: self.neg && mag != Wide::ZERO, mag }
        } else {
            SWide { neg: o.neg, mag: o.mag - self.mag }
        }
    }

    pub fn signum(self) -> i32 {
        if self.mag == Wide::ZERO {
            0
        } else if self.neg {
            -1
        } else {
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversion_rounds_to_nearest_even() {
        // 2^64 + 1 is not representable; rounds down to 2^64.
        let x = (wide(1) << 64) + wide(1);
        assert_eq!(wide_to_f64(x, 0), 18446744073709551616.0);
        // 2^53 + 1 halfway case: even mantissa wins.
        let y = (wide(1) << 200) * wide((1u128 << 53) + 1);
        assert_eq!(wide_to_f64(y, 200), 9007199254740992.0);
        // Just above halfway rounds up thanks to the sticky bit.
        let z = y + wide(1);
        assert_eq!(wide_to_f64(z, 200), 9007199254740994.0);
        assert_eq!(wide_to_f64(wide(3), 2), 0.75);
        assert_eq!(wide_diff_to_f64(wide(1), wide(5), 2), -1.0);
    }

    #[test]
    fn signed_arithmetic() {
        let a = SWide::from_diff(wide(3), wide(10));
        let b = SWide::from_diff(wide(4), wide(1));
        assert_eq!(a.mul(b).signum(), -1);
        assert_eq!(a.mul(b).mag, wide(21));
        assert_eq!(a.sub(a).signum(), 0);
        assert_eq!(a.add(b).mag, wide(4));
        assert!(a.add(b).neg);
    }
}
