use std::fmt;

use ruint::Uint;

use super::wide::{u128_to_f64, wide, Wide};
use crate::error::{Error, Result};

pub const DEFAULT_BITS: u32 = 128;
pub const MIN_BITS: u32 = 96;
pub const MAX_BITS: u32 = 128;

/// Named irrational inputs, stored to 50 decimal places.
pub const PRESETS: &[(&str, &str)] = &[
    ("sqrt2m1", "0.41421356237309504880168872420969807856967187537694"),
    ("sqrt3m1", "0.73205080756887729352744634150587236694280525381038"),
    ("golden", "0.61803398874989484820458683436563811772030917980576"),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
}

#[inline]
pub(crate) fn mask(bits: u32) -> u128 {
    if bits >= 128 {
        u128::MAX
    } else {
        (1u128 << bits) - 1
    }
}

pub(crate) fn check_bits(bits: u32) -> Result<()> {
    if (MIN_BITS..=MAX_BITS).contains(&bits) {
        Ok(())
    } else {
        Err(Error::InvalidBits(bits))
    }
}

type Dec = Uint<1024, 16>;

/// A point of [0,1) stored as `raw / 2^bits`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FixedUnit {
    raw: u128,
    bits: u32,
}

impl FixedUnit {
    pub fn try_new(raw: u128, bits: u32) -> Result<Self> {
        check_bits(bits)?;
        if raw & !mask(bits) != 0 {
            return Err(Error::InvalidParameter(format!("raw {raw:#x} exceeds 2^{bits}")));
        }
        Ok(FixedUnit { raw, bits })
    }

    /// Panics on an out-of-range raw or unsupported bit count.
    pub fn from_raw(raw: u128, bits: u32) -> Self {
        Self::try_new(raw, bits).expect("invalid fixed-point raw")
    }

    pub fn zero(bits: u32) -> Self {
        Self::from_raw(0, bits)
    }

    pub fn half(bits: u32) -> Self {
        Self::from_raw(1u128 << (bits - 1), bits)
    }

    #[inline]
    pub fn raw(self) -> u128 {
        self.raw
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.raw == 0
    }

    /// Nearest representable point to `x mod 1`.
    pub fn from_f64(x: f64, bits: u32) -> Self {
        assert!(x.is_finite(), "non-finite input");
        check_bits(bits).expect("unsupported bit count");
        let y = x - x.floor();
        if y == 0.0 {
            return Self::zero(bits);
        }
        let b = y.to_bits();
        let exp = ((b >> 52) & 0x7ff) as i32;
        let (mant, e) = if exp == 0 { (b & ((1u64 << 52) - 1), -1074) } else { ((b & ((1u64 << 52) - 1)) | (1u64 << 52), exp - 1075) };
        let sh = e + bits as i32;
        let raw = if sh >= 0 { (mant as u128) << sh } else { round_shift(mant as u128, (-sh) as u32) };
        Self::from_raw(raw & mask(bits), bits)
    }

    /// `num / den` rounded to nearest (ties to even), reduced mod 1.
    pub fn from_ratio(num: Wide, den: Wide, bits: u32) -> Self {
        assert!(den != Wide::ZERO, "zero denominator");
        let r = num % den;
        let scaled = r << bits as usize;
        let (q, rem) = scaled.div_rem(den);
        let twice = rem << 1;
        let up = twice > den || (twice == den && q.bit(0));
        let q = if up { q + Wide::from(1u8) } else { q };
        let raw: u128 = q.wrapping_to();
        Self::from_raw(raw & mask(bits), bits)
    }

    /// Value of the finite continued fraction [0; a1, a2, ...], rounded once.
    pub fn from_quotients(quotients: &[u64], bits: u32) -> Result<Self> {
        check_bits(bits)?;
        if quotients.is_empty() || quotients.contains(&0) {
            return Err(Error::Parse { what: "partial quotients", input: format!("{quotients:?}") });
        }
        // Fold from the tail: x = 1 / (a + x').
        let (mut p, mut q) = (Wide::ZERO, Wide::from(1u8));
        for &a in quotients.iter().rev() {
            let np = q;
            let nq = Wide::from(a) * q + p;
            if nq.bit_len() > 400 {
                return Err(Error::InvalidParameter("quotient list too long".into()));
            }
            p = np;
            q = nq;
        }
        Ok(Self::from_ratio(p, q, bits))
    }

    /// Parses a decimal (`0.4142`, `-0.25`, `1.5`), reduced mod 1 and rounded once.
    pub fn from_decimal(s: &str, bits: u32) -> Result<Self> {
        check_bits(bits)?;
        let err = || Error::Parse { what: "decimal", input: s.to_string() };
        let t = s.trim();
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let (ip, fp) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if ip.is_empty() && fp.is_empty() {
            return Err(err());
        }
        if !ip.bytes().all(|c| c.is_ascii_digit()) || !fp.bytes().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        if fp.len() > 250 {
            return Err(err());
        }
        let mut num = Dec::ZERO;
        let mut den = Dec::from(1u8);
        for c in fp.bytes() {
            num = num * Dec::from(10u8) + Dec::from(c - b'0');
            den *= Dec::from(10u8);
        }
        let scaled = num << bits as usize;
        let (q, rem) = scaled.div_rem(den);
        let twice = rem << 1;
        let up = twice > den || (twice == den && q.bit(0));
        let q = if up { q + Dec::from(1u8) } else { q };
        let raw: u128 = q.wrapping_to();
        let u = Self::from_raw(raw & mask(bits), bits);
        Ok(if neg { u.neg_mod1() } else { u })
    }

    /// Parses either the hex form `f=<bits>:raw=0x<hex>` or a decimal.
    pub fn parse(s: &str, bits: u32) -> Result<Self> {
        let t = s.trim();
        if t.starts_with("f=") {
            let u: FixedUnit = t.parse()?;
            if u.bits != bits {
                return Err(Error::Parse { what: "fixed-point width", input: s.to_string() });
            }
            return Ok(u);
        }
        if let Some(v) = preset(t) {
            return Self::from_decimal(v, bits);
        }
        Self::from_decimal(t, bits)
    }

    /// Correctly rounded value.
    #[inline]
    pub fn to_f64(self) -> f64 {
        u128_to_f64(self.raw, self.bits)
    }

    /// Top 64 bits of the binary expansion, for fast approximate work.
    #[inline]
    pub fn hi64(self) -> u64 {
        ((self.raw << (128 - self.bits)) >> 64) as u64
    }

    #[inline]
    pub fn wide(self) -> Wide {
        wide(self.raw)
    }

    #[inline]
    pub fn add_mod1(self, o: Self) -> Self {
        debug_assert_eq!(self.bits, o.bits);
        FixedUnit { raw: self.raw.wrapping_add(o.raw) & mask(self.bits), bits: self.bits }
    }

    #[inline]
    pub fn sub_mod1(self, o: Self) -> Self {
        debug_assert_eq!(self.bits, o.bits);
        FixedUnit { raw: self.raw.wrapping_sub(o.raw) & mask(self.bits), bits: self.bits }
    }

    #[inline]
    pub fn neg_mod1(self) -> Self {
        FixedUnit { raw: self.raw.wrapping_neg() & mask(self.bits), bits: self.bits }
    }

    /// `n * u mod 1`; only the low `bits` of the product matter, so a wrapping
    /// multiply is exact. Requires |n| <= 2^63.
    #[inline]
    pub fn mul_int_mod1(self, n: i128) -> Self {
        assert!(n.unsigned_abs() <= 1u128 << 63, "multiplier out of range");
        let p = self.raw.wrapping_mul(n.unsigned_abs()) & mask(self.bits);
        let u = FixedUnit { raw: p, bits: self.bits };
        if n < 0 {
            u.neg_mod1()
        } else {
            u
        }
    }

    /// The raw value shifted to the top of a u128, so wrapping u128
    /// arithmetic is arithmetic mod 1.
    #[inline]
    pub fn aligned(self) -> u128 {
        self.raw << (128 - self.bits)
    }

    /// Signed representative in [-1/2, 1/2), with full relative precision
    /// near 0.
    #[inline]
    pub fn centered_f64(self) -> f64 {
        aligned_centered_f64(self.aligned())
    }

    /// min(u, 1-u), a value in [0, 1/2].
    #[inline]
    pub fn dist_nearest_int(self) -> Self {
        let c = self.neg_mod1();
        if c.raw < self.raw {
            c
        } else {
            self
        }
    }
}

impl fmt::Display for FixedUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.bits.div_ceil(4) as usize;
        write!(f, "f={}:raw=0x{:0width$x}", self.bits, self.raw, width = width)
    }
}

impl std::str::FromStr for FixedUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::Parse { what: "fixed-point hex", input: s.to_string() };
        let rest = s.trim().strip_prefix("f=").ok_or_else(err)?;
        let (b, r) = rest.split_once(":raw=0x").ok_or_else(err)?;
        let bits: u32 = b.parse().map_err(|_| err())?;
        check_bits(bits)?;
        if r.is_empty() || r.len() > 32 || r.bytes().any(|c| c.is_ascii_uppercase()) {
            return Err(err());
        }
        let raw = u128::from_str_radix(r, 16).map_err(|_| err())?;
        FixedUnit::try_new(raw, bits)
    }
}

fn round_shift(x: u128, s: u32) -> u128 {
    if s >= 128 {
        return if s == 128 && x > 1u128 << 127 { 1 } else { 0 };
    }
    let q = x >> s;
    let r = x & ((1u128 << s) - 1);
    let half = 1u128 << (s - 1);
    if r > half || (r == half && q & 1 == 1) {
        q + 1
    } else {
        q
    }
}

/// Signed value in [-1/2, 1/2) of a top-aligned fraction.
#[inline]
pub fn aligned_centered_f64(x: u128) -> f64 {
    (x as i128) as f64 * f64::powi(2.0, -128)
}

/// A length in (0, 1]: a FixedUnit plus the exact value 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Length {
    frac: FixedUnit,
    one: bool,
}

impl Length {
    pub fn one(bits: u32) -> Self {
        Length { frac: FixedUnit::zero(bits), one: true }
    }

    pub fn from_unit(u: FixedUnit) -> Result<Self> {
        if u.is_zero() {
            return Err(Error::InvalidParameter("length must be positive".into()));
        }
        Ok(Length { frac: u, one: false })
    }

    /// From a raw numerator in (0, 2^bits].
    pub fn from_wide(raw: Wide, bits: u32) -> Result<Self> {
        let top = wide(1) << bits as usize;
        if raw == Wide::ZERO || raw > top {
            return Err(Error::InvalidParameter("length must lie in (0, 1]".into()));
        }
        if raw == top {
            Ok(Self::one(bits))
        } else {
            Ok(Length { frac: FixedUnit::from_raw(raw.wrapping_to(), bits), one: false })
        }
    }

    pub fn from_f64(x: f64, bits: u32) -> Result<Self> {
        if !(x > 0.0 && x <= 1.0) {
            return Err(Error::InvalidParameter(format!("length {x} outside (0, 1]")));
        }
        if x == 1.0 {
            return Ok(Self::one(bits));
        }
        let u = FixedUnit::from_f64(x, bits);
        if u.is_zero() {
            // Rounded up to 1 or down to 0.
            return if x > 0.5 { Ok(Self::one(bits)) } else { Self::from_unit(u) };
        }
        Self::from_unit(u)
    }

    /// Decimal in (0, 1], a preset name, or the hex form of a FixedUnit.
    pub fn parse(s: &str, bits: u32) -> Result<Self> {
        let t = s.trim();
        let err = || Error::Parse { what: "length in (0, 1]", input: s.to_string() };
        if t.starts_with("f=") {
            return Self::from_unit(FixedUnit::parse(t, bits)?);
        }
        let t = preset(t).unwrap_or(t);
        let body = t.strip_prefix('+').unwrap_or(t);
        let (ip, fp) = body.split_once('.').unwrap_or((body, ""));
        let ip = ip.trim_start_matches('0');
        if ip == "1" && fp.bytes().all(|c| c == b'0') {
            return Ok(Self::one(bits));
        }
        if !ip.is_empty() {
            return Err(err());
        }
        let u = FixedUnit::from_decimal(body, bits).map_err(|_| err())?;
        if u.is_zero() {
            // Zero itself, or a value within half an ulp of 1.
            return if fp.as_bytes().first().is_some_and(|&c| c >= b'5') { Ok(Self::one(bits)) } else { Err(err()) };
        }
        Self::from_unit(u)
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.frac.bits()
    }

    #[inline]
    pub fn is_one(self) -> bool {
        self.one
    }

    /// The fractional part; zero when the length is 1.
    #[inline]
    pub fn frac(self) -> FixedUnit {
        self.frac
    }

    /// Numerator over 2^bits, in (0, 2^bits].
    #[inline]
    pub fn wide(self) -> Wide {
        if self.one {
            wide(1) << self.bits() as usize
        } else {
            self.frac.wide()
        }
    }

    pub fn to_f64(self) -> f64 {
        if self.one {
            1.0
        } else {
            self.frac.to_f64()
        }
    }

    /// `n * x mod 1`.
    #[inline]
    pub fn mul_int_mod1(self, n: i128) -> FixedUnit {
        if self.one {
            FixedUnit::zero(self.bits())
        } else {
            self.frac.mul_int_mod1(n)
        }
    }

    /// `self * other`, rounded to nearest; errors if the product underflows to 0.
    pub fn mul(self, other: Length) -> Result<Length> {
        let bits = self.bits();
        let p = self.wide() * other.wide();
        let half = wide(1) << (bits as usize - 1);
        let q = (p + half) >> bits as usize;
        Length::from_wide(q, bits)
    }
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.one {
            write!(f, "1")
        } else {
            self.frac.fmt(f)
        }
    }
}

impl PartialOrd for Length {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Length {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.wide().cmp(&other.wide())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(x: f64) -> FixedUnit {
        FixedUnit::from_f64(x, 128)
    }

    #[test]
    fn dyadic_addition() {
        assert_eq!(u(0.25).add_mod1(u(0.5)), u(0.75));
        assert_eq!(u(0.75).add_mod1(u(0.75)), u(0.5));
        assert_eq!(u(0.3).add_mod1(u(0.0)), u(0.3));
    }

    #[test]
    fn integer_multiples() {
        assert_eq!(u(0.25).mul_int_mod1(4), u(0.0));
        assert_eq!(u(0.75).mul_int_mod1(3), u(0.25));
        assert_eq!(u(0.25).mul_int_mod1(-1), u(0.75));
        assert_eq!(u(0.3).mul_int_mod1(0), u(0.0));
        let x = FixedUnit::from_raw(0x1234_5678_9abc_def0_0fed_cba9_8765_4321, 128);
        assert_eq!(x.mul_int_mod1(1 << 63), FixedUnit::from_raw(x.raw() << 63, 128));
        assert_eq!(x.mul_int_mod1(-(1 << 63)), FixedUnit::from_raw(x.raw() << 63, 128).neg_mod1());
    }

    #[test]
    fn million_fold_addition_matches_product() {
        let x = FixedUnit::from_raw(0x9e37_79b9_7f4a_7c15_f39c_c060_5ced_c834, 128);
        let mut acc = FixedUnit::zero(128);
        for _ in 0..1_000_000 {
            acc = acc.add_mod1(x);
        }
        assert_eq!(acc, x.mul_int_mod1(1_000_000));
        let y = FixedUnit::from_raw(0x1_2345_6789_abcd_ef01_2345_6789, 100);
        let mut acc = FixedUnit::zero(100);
        for _ in 0..1000 {
            acc = acc.sub_mod1(y);
        }
        assert_eq!(acc, y.mul_int_mod1(-1000));
    }

    #[test]
    fn distance_to_nearest_integer() {
        assert_eq!(u(0.75).dist_nearest_int(), u(0.25));
        assert_eq!(u(0.0).dist_nearest_int(), u(0.0));
        assert_eq!(u(0.5).dist_nearest_int(), u(0.5));
        assert_eq!(u(0.1).dist_nearest_int(), u(0.1));
    }

    #[test]
    fn conversions() {
        assert_eq!(u(0.5).raw(), 1u128 << 127);
        assert_eq!(u(-0.25), u(0.75));
        assert_eq!(u(1.25), u(0.25));
        assert_eq!(FixedUnit::from_f64(0.5, 96).raw(), 1u128 << 95);
        assert_eq!(u(0.1).to_f64(), 0.1);
        assert_eq!(FixedUnit::from_decimal("0.5", 128).unwrap(), u(0.5));
        assert_eq!(FixedUnit::from_decimal("-0.25", 128).unwrap(), u(0.75));
        assert_eq!(FixedUnit::from_decimal("3.75", 128).unwrap(), u(0.75));
        assert!(FixedUnit::from_decimal("0.5x", 128).is_err());
        assert!(FixedUnit::from_decimal(".", 128).is_err());
        // 1/3 rounds to the nearest 128-bit raw.
        let third = FixedUnit::from_ratio(wide(1), wide(3), 128);
        assert_eq!(third.raw(), u128::MAX / 3);
        let dec = FixedUnit::from_decimal(&format!("0.{}", "3".repeat(60)), 128).unwrap();
        assert_eq!(dec, third);
    }

    #[test]
    fn presets_match_quotient_expansions() {
        let g = FixedUnit::parse("golden", 128).unwrap();
        let g2 = FixedUnit::from_quotients(&[1; 120], 128).unwrap();
        assert_eq!(g, g2);
        let s2 = FixedUnit::parse("sqrt2m1", 128).unwrap();
        assert_eq!(s2, FixedUnit::from_quotients(&[2; 80], 128).unwrap());
        let mut q3 = vec![1u64];
        for _ in 0..60 {
            q3.extend([2, 1]);
        }
        let s3 = FixedUnit::parse("sqrt3m1", 128).unwrap();
        assert_eq!(s3, FixedUnit::from_quotients(&q3, 128).unwrap());
    }

    #[test]
    fn hex_round_trip() {
        let x = FixedUnit::parse("golden", 128).unwrap();
        let s = x.to_string();
        assert!(s.starts_with("f=128:raw=0x9e3779b97f4a7c15"));
        assert_eq!(s.parse::<FixedUnit>().unwrap(), x);
        let y = FixedUnit::from_raw(5, 96);
        assert_eq!(y.to_string(), "f=96:raw=0x000000000000000000000005");
        assert_eq!(y.to_string().parse::<FixedUnit>().unwrap(), y);
        assert!(FixedUnit::parse(&s, 96).is_err());
        assert!("f=95:raw=0x1".parse::<FixedUnit>().is_err());
        assert!("f=128:raw=0xABC".parse::<FixedUnit>().is_err());
    }

    #[test]
    fn lengths() {
        assert!(Length::parse("1", 128).unwrap().is_one());
        assert!(Length::parse("1.000", 128).unwrap().is_one());
        assert_eq!(Length::parse("0.5", 128).unwrap().to_f64(), 0.5);
        assert!(Length::parse("0", 128).is_err());
        assert!(Length::parse("1.5", 128).is_err());
        let one = Length::one(128);
        assert_eq!(one.wide(), wide(1) << 128);
        let h = Length::from_f64(0.5, 128).unwrap();
        assert_eq!(one.mul(h).unwrap(), h);
        assert_eq!(h.mul(h).unwrap().to_f64(), 0.25);
        assert!(h < one);
        assert_eq!(one.mul_int_mod1(7), FixedUnit::zero(128));
    }
}
