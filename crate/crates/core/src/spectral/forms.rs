use num_complex::Complex64;

use super::{n_dot_alpha, Frequency, SpectralParams};
use crate::arithmetic::FixedUnit;
use crate::error::{Error, Result};

/// `s = (d1, d2, d3)` in {0,1}^3 with `d1 + d2 = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LinearFormSelector {
    pub d1: bool,
    pub d2: bool,
    pub d3: bool,
}

impl LinearFormSelector {
    pub fn new(d1: u8, d2: u8, d3: u8) -> Result<Self> {
        if d1 > 1 || d2 > 1 || d3 > 1 || d1 + d2 != 1 {
            return Err(Error::InvalidParameter(format!("selector ({d1},{d2},{d3}) needs d1 + d2 = 1")));
        }
        Ok(LinearFormSelector { d1: d1 == 1, d2: d2 == 1, d3: d3 == 1 })
    }

    pub fn all() -> [Self; 4] {
        [(1, 0, 0), (1, 0, 1), (0, 1, 0), (0, 1, 1)].map(|(a, b, c)| Self::new(a, b, c).unwrap())
    }

    /// `(-1)^(d2 + d3 + 1)`.
    pub fn sign(self) -> i32 {
        if (self.d2 as u8 + self.d3 as u8 + 1) % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

/// `n1 (d1 x1 - a1) + n2 (d2 x2 - a2) - d3 N (n.alpha - n3)`.
pub fn linear_form(s: LinearFormSelector, n: Frequency, p: &SpectralParams) -> f64 {
    let x1 = if s.d1 { p.x.x1().to_f64() } else { 0.0 };
    let x2 = if s.d2 { p.x.x2().to_f64() } else { 0.0 };
    let th = if s.d3 { super::theta(n, p.alpha) } else { 0.0 };
    n.n1 as f64 * (x1 - p.a[0].to_f64()) + n.n2 as f64 * (x2 - p.a[1].to_f64()) - p.n as f64 * th
}

/// The same form reduced mod 1, exactly.
pub fn linear_form_mod1(s: LinearFormSelector, n: Frequency, p: &SpectralParams) -> FixedUnit {
    let (n1, n2) = (n.n1 as i128, n.n2 as i128);
    let bits = p.alpha[0].bits();
    let mut v = p.a[0].mul_int_mod1(n1).add_mod1(p.a[1].mul_int_mod1(n2)).neg_mod1();
    if s.d1 {
        v = v.add_mod1(p.x.x1().mul_int_mod1(n1));
    }
    if s.d2 {
        v = v.add_mod1(p.x.x2().mul_int_mod1(n2));
    }
    if s.d3 {
        // N (n.alpha - n3) = N {n.alpha} mod 1.
        let frac = n_dot_alpha(n.n1, n.n2, p.alpha).frac;
        v = v.sub_mod1(frac.mul_int_mod1(p.n as i128));
    }
    debug_assert_eq!(v.bits(), bits);
    v
}

/// Level box `U(l, eps)` of frequencies with geometric ranges of ratio `1 + delta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelBox {
    pub l: [i64; 3],
    /// Signs of `n1` and of `n1 tau - n2`; the third sign is `+` or `-` per side.
    pub eps: [i8; 2],
    pub delta: f64,
}

/// `(log N)^-2` adjusted so that `(1 + delta)^k = (log N)^2` for an even
/// integer `k`; then `(log N)^27` is also an integer power.
pub fn delta_n(n: u64) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidParameter("delta_N needs N >= 3".into()));
    }
    let ln = (n as f64).ln();
    let d0 = ln.powi(-2);
    let target = 2.0 * ln.ln();
    let k = (2.0 * (target / (2.0 * d0.ln_1p())).round()).max(2.0);
    Ok((target / k).exp_m1())
}

impl LevelBox {
    pub fn new(l: [i64; 3], eps: [i8; 2], n: u64) -> Result<Self> {
        if eps.iter().any(|&e| e != 1 && e != -1) {
            return Err(Error::InvalidParameter("signs must be +1 or -1".into()));
        }
        Ok(LevelBox { l, eps, delta: delta_n(n)? })
    }

    fn range(&self, j: usize) -> (f64, f64) {
        let b = 1.0 + self.delta;
        (b.powi(self.l[j] as i32), b.powi(self.l[j] as i32 + 1))
    }

    /// Members of the side with third sign `eps3`, in increasing `(n1, n2)`.
    pub fn members(&self, eps3: i8, p: &SpectralParams) -> Result<Vec<Frequency>> {
        let (v1, w1) = self.range(0);
        let (v2, w2) = self.range(1);
        let (v3, w3) = self.range(2);
        let lo = v1.ceil() as i64;
        let hi = w1.ceil() as i64 - 1;
        if (hi - lo) as f64 > 1e8 {
            return Err(Error::RangeTooLarge(w1 - v1));
        }
        let tau = p.x.tau();
        let mut out = Vec::new();
        for m in lo..=hi {
            let n1 = self.eps[0] as i64 * m;
            let c = n1 as f64 * tau;
            // eps2 (c - n2) in [v2, w2): n2 in a window of width w2 - v2 around c - eps2 v2.
            let (a, b) = if self.eps[1] > 0 { (c - w2, c - v2) } else { (c + v2, c + w2) };
            for n2 in (a.floor() as i64 - 1)..=(b.ceil() as i64 + 1) {
                let t = self.eps[1] as f64 * (c - n2 as f64);
                if !(v2 <= t && t < w2) {
                    continue;
                }
                let n = Frequency::nearest(n1, n2, p.alpha);
                let prod = eps3 as f64 * n1 as f64 * (c - n2 as f64) * super::theta(n, p.alpha);
                if v3 <= prod && prod < w3 {
                    out.push(n);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxSums {
    pub plus: Complex64,
    pub minus: Complex64,
    pub count_plus: u64,
    pub count_minus: u64,
    /// `|plus - minus| log N / (|U+| + |U-|)`.
    pub big_ratio: f64,
}

impl BoxSums {
    pub fn is_big(&self) -> bool {
        self.big_ratio >= 1.0
    }
}

fn exp_sum(ns: &[Frequency], s: LinearFormSelector, p: &SpectralParams) -> Complex64 {
    ns.iter()
        .map(|&n| {
            let t = linear_form_mod1(s, n, p).centered_f64();
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t)
        })
        .sum()
}

/// Exponential sums of `e(Lambda_s(n))` over both sides of a level box.
pub fn exp_sum_over_box(b: &LevelBox, s: LinearFormSelector, p: &SpectralParams) -> Result<BoxSums> {
    let up = b.members(1, p)?;
    let down = b.members(-1, p)?;
    exp_sums_of(&up, &down, s, p)
}

pub(crate) fn exp_sums_of(up: &[Frequency], down: &[Frequency], s: LinearFormSelector, p: &SpectralParams) -> Result<BoxSums> {
    if up.is_empty() && down.is_empty() {
        return Err(Error::EmptyBox);
    }
    let plus = exp_sum(up, s, p);
    let minus = exp_sum(down, s, p);
    let count = (up.len() + down.len()) as f64;
    let big_ratio = (plus - minus).norm() * (p.n as f64).ln() / count;
    Ok(BoxSums { plus, minus, count_plus: up.len() as u64, count_minus: down.len() as u64, big_ratio })
}
