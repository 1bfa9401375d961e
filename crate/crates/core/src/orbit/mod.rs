//! Direct orbit counting: membership tests, traces, grid maxima, strip counts.

mod grid;
mod polygon;
mod strips;

pub use grid::{max_discrepancy, GridScan, GridSpec, MaxDiscrepancy, Witness};
pub use polygon::{polygon_discrepancy, Polygon};
pub use strips::{bc_counter, strip_counts, StripCounts};

use crate::arithmetic::{wide, wide_diff_to_f64, wide_to_f64, FixedUnit, Length, Wide};
use crate::error::{Error, Result};

pub type Point = [FixedUnit; 2];

/// Right triangle `{y >= 0 : y1/x1 + y2/x2 < 1}` with legs 0 < x1 <= x2 <= 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Triangle {
    x1: Length,
    x2: Length,
}

impl Triangle {
    pub fn new(x1: Length, x2: Length) -> Result<Self> {
        if x1.bits() != x2.bits() || x1 > x2 {
            return Err(Error::InvalidTriangle);
        }
        Ok(Triangle { x1, x2 })
    }

    /// Legs `x1 = tau * x2` (rounded to nearest) and `x2`.
    pub fn from_tau(tau: Length, x2: Length) -> Result<Self> {
        let x1 = tau.mul(x2).map_err(|_| Error::InvalidTriangle)?;
        Triangle::new(x1, x2)
    }

    pub fn from_f64(x1: f64, x2: f64, bits: u32) -> Result<Self> {
        Triangle::new(Length::from_f64(x1, bits)?, Length::from_f64(x2, bits)?)
    }

    pub fn x1(&self) -> Length {
        self.x1
    }

    pub fn x2(&self) -> Length {
        self.x2
    }

    pub fn bits(&self) -> u32 {
        self.x1.bits()
    }

    /// Approximate slope x1/x2.
    pub fn tau(&self) -> f64 {
        self.x1.to_f64() / self.x2.to_f64()
    }

    pub fn volume(&self) -> Volume {
        Volume::new(self.x1.wide() * self.x2.wide(), 2 * self.bits() + 1)
    }
}

/// Exact volume `num / 2^shift`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Volume {
    pub num: Wide,
    pub shift: u32,
}

impl Volume {
    pub fn new(num: Wide, shift: u32) -> Self {
        Volume { num, shift }
    }

    /// Area of `[0,x1) x [0,x2)`, on the same denominator as triangle volumes.
    pub fn rect(x1: Length, x2: Length) -> Self {
        Volume::new((x1.wide() * x2.wide()) << 1, 2 * x1.bits() + 1)
    }

    pub fn to_f64(&self) -> f64 {
        wide_to_f64(self.num, self.shift)
    }

    /// `hits - m * vol`, correctly rounded from the exact rational.
    ///
    /// Every engine reports discrepancies through this one function so that
    /// independent routes produce bit-identical values.
    pub fn discrepancy(&self, hits: u64, m: u64) -> f64 {
        wide_diff_to_f64(wide(hits as u128) << self.shift as usize, wide(m as u128) * self.num, self.shift)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrbitSpec {
    pub alpha: Point,
    pub start: Point,
    pub n: u64,
}

impl OrbitSpec {
    pub fn new(alpha: Point, start: Point, n: u64) -> Self {
        OrbitSpec { alpha, start, n }
    }

    /// `start + k * alpha`.
    pub fn point(&self, k: i128) -> Point {
        orbit_point(self.alpha, self.start, k)
    }
}

#[inline]
pub fn orbit_point(alpha: Point, start: Point, k: i128) -> Point {
    [start[0].add_mod1(alpha[0].mul_int_mod1(k)), start[1].add_mod1(alpha[1].mul_int_mod1(k))]
}

/// Exact membership: `p1 < x1`, `p2 < x2` and `p1 x2 + p2 x1 < x1 x2`.
pub fn in_triangle(p: Point, t: &Triangle) -> bool {
    in_triangle_legs(p, t.x1.wide(), t.x2.wide())
}

/// The same test on raw legs; any positive legs, no slope restriction.
pub fn in_triangle_legs(p: Point, x1: Wide, x2: Wide) -> bool {
    let (p1, p2) = (p[0].wide(), p[1].wide());
    p1 < x1 && p2 < x2 && p1 * x2 + p2 * x1 < x1 * x2
}

/// Half-open box `[0,x1) x [0,x2)`.
pub fn in_box(p: Point, x1: Length, x2: Length) -> bool {
    p[0].wide() < x1.wide() && p[1].wide() < x2.wide()
}

/// Complementary triangle of the box: `p1 x2 + p2 x1 > x1 x2` inside the box.
pub fn in_upper_triangle(p: Point, x1: Length, x2: Length) -> bool {
    let (a, b) = (x1.wide(), x2.wide());
    let (p1, p2) = (p[0].wide(), p[1].wide());
    p1 < a && p2 < b && p1 * b + p2 * a > a * b
}

/// Points of the box lying exactly on the hypotenuse.
pub fn on_hypotenuse(p: Point, x1: Length, x2: Length) -> bool {
    let (a, b) = (x1.wide(), x2.wide());
    let (p1, p2) = (p[0].wide(), p[1].wide());
    p1 < a && p2 < b && p1 * b + p2 * a == a * b
}

/// Membership test with a floating-point fast path; falls back to the exact
/// test whenever the rounded decision could be wrong.
#[derive(Clone, Copy, Debug)]
pub struct TriangleTest {
    x1: Wide,
    x2: Wide,
    inv1: f64,
    inv2: f64,
    margin: f64,
}

impl TriangleTest {
    pub fn new(t: &Triangle) -> Self {
        let inv1 = 1.0 / t.x1.to_f64();
        let inv2 = 1.0 / t.x2.to_f64();
        // hi64 truncation costs up to 2^-64 per coordinate; the rest is rounding.
        let margin = (inv1 + inv2) * 2f64.powi(-60) + 1e-12;
        TriangleTest { x1: t.x1.wide(), x2: t.x2.wide(), inv1, inv2, margin }
    }

    #[inline]
    pub fn contains(&self, p: Point) -> bool {
        let s = unit_f64(p[0]) * self.inv1 + unit_f64(p[1]) * self.inv2;
        if s < 1.0 - self.margin {
            true
        } else if s > 1.0 + self.margin {
            false
        } else {
            in_triangle_legs(p, self.x1, self.x2)
        }
    }
}

/// Fast approximate value from the top 64 bits.
#[inline]
pub(crate) fn unit_f64(u: FixedUnit) -> f64 {
    u.hi64() as f64 * (1.0 / 18446744073709551616.0)
}

/// Hit counts after each step; `D(m) = hits[m-1] - m * vol`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscrepancyTrace {
    pub volume: Volume,
    pub hits: Vec<u64>,
}

impl DiscrepancyTrace {
    pub fn len(&self) -> usize {
        self.hits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }

    /// D(m) for 1 <= m <= N.
    pub fn value(&self, m: u64) -> f64 {
        self.volume.discrepancy(self.hits[(m - 1) as usize], m)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.hits.iter().enumerate().map(|(i, &h)| self.volume.discrepancy(h, i as u64 + 1))
    }

    /// Largest |D(m)| and its smallest argmax; (0, 0) for an empty trace.
    pub fn max_abs(&self) -> (f64, u64) {
        let mut best = (0.0, 0u64);
        for (i, d) in self.values().enumerate() {
            if best.1 == 0 || d.abs() > best.0 {
                best = (d.abs(), i as u64 + 1);
            }
        }
        best
    }

    pub fn summary(&self) -> MaxSummary {
        let (max_abs, argmax) = self.max_abs();
        MaxSummary { n: self.hits.len() as u64, max_abs, argmax, hits: self.hits.last().copied().unwrap_or(0) }
    }
}

/// Streamed max-only result.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaxSummary {
    pub n: u64,
    pub max_abs: f64,
    pub argmax: u64,
    pub hits: u64,
}

/// Full trace of hits for an arbitrary half-open region.
pub fn region_trace(spec: &OrbitSpec, volume: Volume, contains: impl Fn(Point) -> bool) -> DiscrepancyTrace {
    let mut hits = Vec::with_capacity(spec.n as usize);
    let mut p = spec.start;
    let mut h = 0u64;
    for _ in 0..spec.n {
        p = [p[0].add_mod1(spec.alpha[0]), p[1].add_mod1(spec.alpha[1])];
        h += contains(p) as u64;
        hits.push(h);
    }
    DiscrepancyTrace { volume, hits }
}

/// Max-only streaming over an arbitrary region, O(1) memory.
pub fn region_max(spec: &OrbitSpec, volume: Volume, contains: impl Fn(Point) -> bool) -> MaxSummary {
    let mut p = spec.start;
    let mut h = 0u64;
    let vf = volume.to_f64();
    let mut best = MaxSummary { n: spec.n, max_abs: 0.0, argmax: 0, hits: 0 };
    let candidate = |h: u64, m: u64, best: &mut MaxSummary| {
        // Exact evaluation only when the cheap estimate could beat the record.
        let approx = (h as f64 - m as f64 * vf).abs();
        if best.argmax == 0 || approx > best.max_abs - 1e-6 {
            let d = volume.discrepancy(h, m).abs();
            if best.argmax == 0 || d > best.max_abs {
                best.max_abs = d;
                best.argmax = m;
            }
        }
    };
    for m in 1..=spec.n {
        p = [p[0].add_mod1(spec.alpha[0]), p[1].add_mod1(spec.alpha[1])];
        if contains(p) {
            if m > 1 {
                candidate(h, m - 1, &mut best);
            }
            h += 1;
            candidate(h, m, &mut best);
        } else if m == 1 || m == spec.n {
            candidate(h, m, &mut best);
        }
    }
    best.hits = h;
    best
}

/// Discrepancy trace of the triangle along `a + n alpha`, n = 1..N.
pub fn discrepancy(spec: &OrbitSpec, t: &Triangle) -> DiscrepancyTrace {
    let test = TriangleTest::new(t);
    region_trace(spec, t.volume(), |p| test.contains(p))
}

/// Streaming max-only variant of [`discrepancy`].
pub fn discrepancy_max(spec: &OrbitSpec, t: &Triangle) -> MaxSummary {
    let test = TriangleTest::new(t);
    region_max(spec, t.volume(), |p| test.contains(p))
}

/// Hit count of the triangle for `n` in `(lo, hi]`, an arbitrary integer window.
pub fn window_count(alpha: Point, start: Point, t: &Triangle, lo: i64, hi: i64) -> u64 {
    let test = TriangleTest::new(t);
    let mut p = orbit_point(alpha, start, lo as i128);
    let mut h = 0;
    for _ in lo..hi {
        p = [p[0].add_mod1(alpha[0]), p[1].add_mod1(alpha[1])];
        h += test.contains(p) as u64;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(x: f64) -> FixedUnit {
        FixedUnit::from_f64(x, 128)
    }

    fn tri(x1: f64, x2: f64) -> Triangle {
        Triangle::from_f64(x1, x2, 128).unwrap()
    }

    #[test]
    fn membership_boundaries() {
        let t = tri(0.5, 0.5);
        assert!(in_triangle([u(0.0), u(0.0)], &t));
        assert!(!in_triangle([u(0.25), u(0.25)], &t));
        assert!(in_triangle([u(0.1), u(0.1)], &t));
        assert!(!in_triangle([u(0.5), u(0.0)], &t));
        assert!(!in_triangle([u(0.0), u(0.5)], &t));
        let one = Triangle::new(Length::one(128), Length::one(128)).unwrap();
        assert!(!in_triangle([u(0.5), u(0.5)], &one));
        assert!(in_triangle([u(0.75), u(0.0)], &one));
        let test = TriangleTest::new(&t);
        // Just below and on the hypotenuse, decided by the exact fallback.
        let below = FixedUnit::from_raw((1u128 << 126) - 1, 128);
        assert!(test.contains([below, u(0.25)]));
        assert!(!test.contains([u(0.25), u(0.25)]));
    }

    #[test]
    fn triangle_validation() {
        assert_eq!(Triangle::from_f64(0.6, 0.5, 128), Err(Error::InvalidTriangle));
        let t = Triangle::from_tau(Length::from_f64(0.5, 128).unwrap(), Length::one(128)).unwrap();
        assert_eq!(t.x1().to_f64(), 0.5);
        assert_eq!(t.volume().to_f64(), 0.25);
        assert_eq!(Volume::rect(Length::one(128), Length::one(128)).to_f64(), 1.0);
    }

    #[test]
    fn canonical_discrepancy() {
        let v = tri(0.5, 0.5).volume();
        assert_eq!(v.to_f64(), 0.125);
        assert_eq!(v.discrepancy(3, 8), 2.0);
        assert_eq!(v.discrepancy(0, 1), -0.125);
    }

    #[test]
    fn empty_and_tiny_traces() {
        let spec = OrbitSpec::new([u(0.3), u(0.7)], [u(0.0), u(0.0)], 0);
        let tr = discrepancy(&spec, &tri(0.5, 0.5));
        assert!(tr.is_empty());
        assert_eq!(tr.max_abs(), (0.0, 0));
    }

    #[test]
    fn trace_matches_naive_count_and_steps() {
        let alpha = [FixedUnit::parse("sqrt2m1", 128).unwrap(), FixedUnit::parse("sqrt3m1", 128).unwrap()];
        let t = Triangle::new(Length::one(128), Length::one(128)).unwrap();
        let spec = OrbitSpec::new(alpha, [u(0.0), u(0.0)], 100);
        let tr = discrepancy(&spec, &t);
        let mut h = 0;
        for n in 1..=100i128 {
            let p = spec.point(n);
            // Independent float-free re-count from the definition.
            h += in_triangle(p, &t) as u64;
            assert_eq!(tr.hits[n as usize - 1], h);
        }
        for w in tr.hits.windows(2) {
            assert!(w[1] - w[0] <= 1);
        }
        let s = discrepancy_max(&spec, &t);
        assert_eq!((s.max_abs, s.argmax), tr.max_abs());
    }
}
