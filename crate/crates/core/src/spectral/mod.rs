//! Fourier expansion of the triangle discrepancy and its Féjer average.
//!
//! Each frequency `(n1, n2)` contributes
//!
//! ```text
//! -i/(8 pi^3) (B1 + B2) e(-n.a) sinc^2(2 pi n1/N^2) sinc^2(2 pi n2/N^2) W(theta)
//! ```
//!
//! with `B1 = (1 - e(n2 x2))/(n1 n2)`, `B2 = (e(n1 x1) - e(n2 x2))/(n1 (n1 tau - n2))`,
//! `theta = n.alpha - nearest` and `W` the sum over `n3` of
//! `sinc^2(2 pi b) (e(-b N) - 1)/b`, `b = n.alpha - n3`. The `B1` part is `f1`
//! and the `B2` part is `f2`.

mod forms;
mod quadrature;

pub use forms::{delta_n, exp_sum_over_box, linear_form, linear_form_mod1, BoxSums, LevelBox, LinearFormSelector};
pub use quadrature::{dbar_quadrature, tent_cells};

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::arithmetic::{aligned_centered_f64, FixedReal};
use crate::error::{Error, Result};
use crate::orbit::{Point, Triangle};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Frequency {
    pub n1: i64,
    pub n2: i64,
    pub n3: i64,
}

impl Frequency {
    /// `(n1, n2)` with `n3` the nearest integer to `n1 alpha1 + n2 alpha2`.
    pub fn nearest(n1: i64, n2: i64, alpha: Point) -> Self {
        let n3 = n_dot_alpha(n1, n2, alpha).nearest_int() as i64;
        Frequency { n1, n2, n3 }
    }

    pub fn neg(self) -> Self {
        Frequency { n1: -self.n1, n2: -self.n2, n3: -self.n3 }
    }
}

/// Exact `n1 alpha1 + n2 alpha2`.
pub fn n_dot_alpha(n1: i64, n2: i64, alpha: Point) -> FixedReal {
    FixedReal::mul_int(alpha[0], n1).add(FixedReal::mul_int(alpha[1], n2))
}

/// `n.alpha - n3` as f64.
pub fn theta(n: Frequency, alpha: Point) -> f64 {
    n_dot_alpha(n.n1, n.n2, alpha).add_int(-(n.n3 as i128)).to_f64()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralParams {
    pub x: Triangle,
    pub a: Point,
    pub alpha: Point,
    pub n: u64,
    pub cutoff: u64,
}

impl SpectralParams {
    pub fn new(x: Triangle, a: Point, alpha: Point, n: u64, cutoff: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("N must be positive".into()));
        }
        if cutoff > 1 << 20 {
            return Err(Error::InvalidParameter(format!("cutoff {cutoff} too large")));
        }
        Ok(SpectralParams { x, a, alpha, n, cutoff })
    }
}

#[inline]
fn sinc2(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        let s = t.sin() / t;
        s * s
    }
}

/// `(sin(2 pi k/N^2) / (2 pi k/N^2))^2`.
pub fn fejer_weight(k: f64, n: u64) -> f64 {
    let nn = n as f64 * n as f64;
    if k == 0.0 {
        return 1.0;
    }
    if k.fract() != 0.0 || k.abs() > 2f64.powi(100) {
        return sinc2(2.0 * PI * k / nn);
    }
    // sin^2(2 pi k / N^2) has period N^2 in 2k; reduce exactly so that the
    // zeros at 2k = 0 mod N^2 come out exact.
    let period = n as i128 * n as i128;
    let m = (2 * k as i128).rem_euclid(period);
    let m = m.min(period - m) as f64;
    let s = (PI * m / nn).sin() / (2.0 * PI * k / nn);
    s * s
}

/// Product of the three squared sincs of the damping factor.
pub fn g_damping(n: Frequency, alpha: Point, big_n: u64) -> f64 {
    let g = fejer_weight(n.n1 as f64, big_n) * fejer_weight(n.n2 as f64, big_n) * sinc2(2.0 * PI * theta(n, alpha));
    debug_assert!((0.0..=1.0).contains(&g));
    g
}

/// `e(t) = exp(2 pi i t)`.
#[inline]
fn e(t: f64) -> Complex64 {
    let (s, c) = (2.0 * PI * t).sin_cos();
    Complex64::new(c, s)
}

/// `e(-y) - 1 = -2i sin(pi y) e(-y/2)`; depends on `y` mod 1 only.
#[inline]
fn chirp(y: f64) -> Complex64 {
    Complex64::new(0.0, -2.0 * (PI * y).sin()) * e(-y / 2.0)
}

/// Centred residue of `N b` mod 1 from a float `b`.
fn n_times_mod1(b: f64, n: u64) -> f64 {
    let r = b - b.round();
    let y = r * n as f64;
    y - y.round()
}

fn window_at(b: f64, y: f64, n: u64) -> Complex64 {
    if b == 0.0 {
        return Complex64::new(0.0, -2.0 * PI * n as f64);
    }
    // sin(2 pi b) only sees b mod 1; the residue is exact.
    let s = (2.0 * PI * (b - b.round())).sin() / (2.0 * PI * b);
    chirp(y) / b * (s * s)
}

/// Window factor of a single `n3`: `sinc^2(2 pi b) (e(-b N) - 1)/b`, with the
/// limit `-2 pi i N` at `b = 0`.
pub fn window(b: f64, n: u64) -> Complex64 {
    window_at(b, n_times_mod1(b, n), n)
}

fn window_sum_at(theta: f64, y: f64, n: u64) -> Complex64 {
    let s = (PI * theta).sin();
    if s == 0.0 {
        return Complex64::new(0.0, -2.0 * PI * n as f64);
    }
    let c = (PI * theta).cos();
    // sin(pi N theta) e(-N theta/2) = sin(pi y) e(-y/2) with y = N theta mod 1.
    let v = (PI * y).sin() * c * c * c / s;
    Complex64::new(0.0, -2.0 * PI * v) * e(-y / 2.0)
}

/// Sum of [`window`] over all `n3`, in closed form as a function of
/// `theta = n.alpha - nearest`.
pub fn window_sum(theta: f64, n: u64) -> Complex64 {
    window_sum_at(theta, n_times_mod1(theta, n), n)
}

/// `e(t) - 1 - 2 pi i t` for real `t`, with `t_mod` its centred residue mod 1.
/// Small `t` uses the series to avoid cancellation.
fn expm1_minus_linear(t: f64, t_mod: f64) -> Complex64 {
    let z = Complex64::new(0.0, 2.0 * PI * t);
    if t.abs() < 0.05 {
        let mut term = z * z / 2.0;
        let mut sum = term;
        for k in 3..30 {
            term = term * z / k as f64;
            sum += term;
        }
        return sum;
    }
    Complex64::new(0.0, 2.0 * (PI * t_mod).sin()) * e(t_mod / 2.0) - z
}

const PREF: f64 = 1.0 / (8.0 * PI * PI * PI);

/// One Fourier term, with a flag for divisors below `2^-(F/2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub value: Complex64,
    pub small_divisor: bool,
}

/// Geometry of a fixed `(n1, n2)`: the numerators `B1`, `B2` of both parts.
#[derive(Clone, Copy, Debug)]
struct Numerators {
    b1: Complex64,
    b2: Complex64,
}

/// Top-aligned fixed-point constants for fast term evaluation.
#[derive(Clone, Copy, Debug)]
struct Kernel {
    x1: u128,
    x2: u128,
    a1: u128,
    a2: u128,
    al1: u128,
    al2: u128,
    x1f: f64,
    x2f: f64,
    tau: f64,
}

impl Kernel {
    fn new(p: &SpectralParams) -> Self {
        Kernel {
            x1: p.x.x1().frac().aligned(),
            x2: p.x.x2().frac().aligned(),
            a1: p.a[0].aligned(),
            a2: p.a[1].aligned(),
            al1: p.alpha[0].aligned(),
            al2: p.alpha[1].aligned(),
            x1f: p.x.x1().to_f64(),
            x2f: p.x.x2().to_f64(),
            tau: p.x.tau(),
        }
    }

    #[inline]
    fn lin(c1: u128, c2: u128, n1: i64, n2: i64) -> u128 {
        c1.wrapping_mul(n1 as i128 as u128).wrapping_add(c2.wrapping_mul(n2 as i128 as u128))
    }

    fn numerators(&self, n1: i64, n2: i64) -> Numerators {
        let z = Complex64::new(0.0, 0.0);
        let two_pi_i = Complex64::new(0.0, 2.0 * PI);
        let p2 = self.x2.wrapping_mul(n2 as i128 as u128);
        let t2 = aligned_centered_f64(p2);
        let (f1, f2) = (n1 as f64, n2 as f64);
        if n1 == 0 {
            let b1 = expm1_minus_linear(f2 * self.x2f, t2) * self.tau / (f2 * f2);
            return Numerators { b1, b2: z };
        }
        // 1 - e(t) = -2i sin(pi t) e(t/2)
        let b1 = if n2 == 0 { -two_pi_i * self.x2f / f1 } else { Complex64::new(0.0, -2.0 * (PI * t2).sin()) * e(t2 / 2.0) / (f1 * f2) };
        // d = n1 x1 - n2 x2 mod 1 exactly; e(n1 x1) - e(n2 x2) = 2i sin(pi d) e(n2 x2 + d/2).
        let dd = self.x1.wrapping_mul(n1 as i128 as u128).wrapping_sub(p2);
        let d = aligned_centered_f64(dd);
        let mid = e(aligned_centered_f64(p2.wrapping_add(((dd as i128) >> 1) as u128)));
        // The real n1 x1 - n2 x2 differs from d by an integer.
        let k = (f1 * self.x1f - f2 * self.x2f - d).round();
        let b2 = if k == 0.0 && (d * 4.0).abs() < 1.0 {
            // x2/d * 2i sin(pi d) = 2 pi i x2 sinc(pi d); d = 0 is the limit on the slope.
            let sinc = if d == 0.0 { 1.0 } else { (PI * d).sin() / (PI * d) };
            two_pi_i * self.x2f * sinc * mid / f1
        } else {
            Complex64::new(0.0, 2.0 * (PI * d).sin()) * mid * self.x2f / (f1 * (d + k))
        };
        Numerators { b1, b2 }
    }

    /// `e(-(n1 a1 + n2 a2))`.
    #[inline]
    fn phase(&self, n1: i64, n2: i64) -> Complex64 {
        e(-aligned_centered_f64(Self::lin(self.a1, self.a2, n1, n2)))
    }

    /// `N n.alpha` mod 1, centred, from the exact fixed-point product.
    #[inline]
    fn n_theta(&self, n1: i64, n2: i64, big_n: u64) -> f64 {
        aligned_centered_f64(Self::lin(self.al1, self.al2, n1, n2).wrapping_mul(big_n as u128))
    }

    /// `n.alpha - nearest`, in [-1/2, 1/2).
    #[inline]
    fn theta(&self, n1: i64, n2: i64) -> f64 {
        aligned_centered_f64(Self::lin(self.al1, self.al2, n1, n2))
    }
}

fn small_flag(b: f64, bits: u32) -> bool {
    b.abs() < f64::powi(2.0, -((bits / 2) as i32))
}

fn term_parts(n: Frequency, p: &SpectralParams) -> (Complex64, Complex64, bool) {
    let k = Kernel::new(p);
    let num = k.numerators(n.n1, n.n2);
    let b = theta(n, p.alpha);
    let w = window_at(b, k.n_theta(n.n1, n.n2, p.n), p.n) * PREF * k.phase(n.n1, n.n2) * fejer_weight(n.n1 as f64, p.n) * fejer_weight(n.n2 as f64, p.n);
    let w = Complex64::new(0.0, -1.0) * w;
    (num.b1 * w, num.b2 * w, small_flag(b, p.alpha[0].bits()))
}

/// The `B1` part of the term at `n`, any `n3`. Zero components use the
/// limiting one-dimensional forms.
pub fn f1_term(n: Frequency, p: &SpectralParams) -> Term {
    let (v, _, s) = term_parts(n, p);
    Term { value: v, small_divisor: s }
}

/// The `B2` part; zero when `n1 = 0`, the limit `2 pi i x2 e(n1 x1)/n1` when
/// `n1 tau = n2`.
pub fn f2_term(n: Frequency, p: &SpectralParams) -> Term {
    let (_, v, s) = term_parts(n, p);
    Term { value: v, small_divisor: s }
}

/// `|x2 (e(n1 x1) - e(n2 x2)) / (n1 x1 - n2 x2)|`, bounded by 1.
pub fn chord_ratio(n1: i64, n2: i64, x: &Triangle) -> f64 {
    let d = FixedReal::mul_int_length(x.x1(), n1).sub(FixedReal::mul_int_length(x.x2(), n2)).to_f64();
    if d == 0.0 {
        return 2.0 * PI * x.x2().to_f64();
    }
    let c = x.x2().to_f64() * 2.0 * (PI * d).sin().abs() / d.abs();
    debug_assert!(c <= 2.0 * PI * x.x2().to_f64() * (1.0 + 1e-12));
    c
}

/// Neumaier compensated sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    c: f64,
}

impl Neumaier {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.c
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DbarResult {
    pub value: f64,
    /// Imaginary part of the sum, zero up to rounding.
    pub imag_residual: f64,
    /// Value of the partial sum over shells up to `K/2`.
    pub half_value: f64,
    pub terms: u64,
    pub small_divisors: u64,
}

impl DbarResult {
    /// Truncation estimate `|S(K) - S(K/2)|`.
    pub fn tail_estimate(&self) -> f64 {
        (self.value - self.half_value).abs()
    }

    pub fn imag_ok(&self) -> bool {
        self.imag_residual.abs() < 1e-9 * (1.0 + self.value.abs())
    }
}

/// Visits `(n1, n2)` with `1 <= max(|n1|, |n2|) <= k`, shell by shell, each
/// shell in lexicographic order.
pub fn for_each_shell(k: u64, mut f: impl FnMut(i64, i64, u64)) {
    for r in 1..=k as i64 {
        for n1 in -r..=r {
            if n1.abs() == r {
                for n2 in -r..=r {
                    f(n1, n2, r as u64);
                }
            } else {
                f(n1, -r, r as u64);
                f(n1, r, r as u64);
            }
        }
    }
}

/// Truncated Féjer-averaged discrepancy over `max(|n1|, |n2|) <= K`, with the
/// sum over `n3` taken in closed form.
pub fn dbar_truncated(p: &SpectralParams) -> DbarResult {
    let k = Kernel::new(p);
    let damp: Vec<f64> = (0..=p.cutoff).map(|j| fejer_weight(j as f64, p.n)).collect();
    let bits = p.alpha[0].bits();
    let (mut re, mut im) = (Neumaier::default(), Neumaier::default());
    let mut half_value = 0.0;
    let half = p.cutoff / 2;
    let mut terms = 0;
    let mut small = 0;
    let mut last_r = 0;
    for_each_shell(p.cutoff, |n1, n2, r| {
        if r != last_r {
            if last_r == half {
                half_value = re.value();
            }
            last_r = r;
        }
        let g = damp[n1.unsigned_abs() as usize] * damp[n2.unsigned_abs() as usize];
        let th = k.theta(n1, n2);
        small += small_flag(th, bits) as u64;
        let num = k.numerators(n1, n2);
        let t = (num.b1 + num.b2) * k.phase(n1, n2) * window_sum_at(th, k.n_theta(n1, n2, p.n), p.n) * Complex64::new(0.0, -PREF * g);
        re.add(t.re);
        im.add(t.im);
        terms += 1;
    });
    let value = re.value();
    if last_r == half {
        half_value = value;
    }
    DbarResult { value, imag_residual: im.value(), half_value, terms, small_divisors: small }
}

/// One row of a term dump, at the nearest `n3`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TermRow {
    pub n: Frequency,
    pub f1: Complex64,
    pub f2: Complex64,
    /// `max(1, |n1|) |n1 tau - n2| |n.alpha - n3|`.
    pub divisor_product: f64,
}

pub fn term_dump(p: &SpectralParams) -> Vec<TermRow> {
    let mut rows = Vec::new();
    let tau = p.x.tau();
    for_each_shell(p.cutoff, |n1, n2, _| {
        let n = Frequency::nearest(n1, n2, p.alpha);
        let (f1, f2, _) = term_parts(n, p);
        let dp = (n1.unsigned_abs().max(1) as f64) * (n1 as f64 * tau - n2 as f64).abs() * theta(n, p.alpha).abs();
        rows.push(TermRow { n, f1, f2, divisor_product: dp });
    });
    rows
}
