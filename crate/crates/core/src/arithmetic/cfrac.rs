use super::fixed::FixedUnit;
use super::wide::{wide, Wide};
use crate::error::{Error, Result};

/// Partial quotients and convergents of `u = [0; a1, a2, ...]`.
///
/// `convergents[j] = (p_j, q_j)` with `(p_0, q_0) = (0, 1)`, so
/// `convergents[j]` pairs with the prefix `a_1..a_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuedFraction {
    pub quotients: Vec<u128>,
    pub convergents: Vec<(u128, u128)>,
    /// True when the expansion reached the exact value of the rational raw/2^F.
    pub exact: bool,
}

impl ContinuedFraction {
    pub fn depth(&self) -> usize {
        self.quotients.len()
    }

    pub fn q(&self, j: usize) -> u128 {
        self.convergents[j].1
    }

    /// |p_j q_{j-1} - p_{j-1} q_j| = 1 for every j >= 1 (with p_{-1} = 1, q_{-1} = 0).
    pub fn determinant_ok(&self) -> bool {
        let mut prev = (1u128, 0u128);
        for &(p, q) in &self.convergents {
            let a = wide(p) * wide(prev.1);
            let b = wide(prev.0) * wide(q);
            let d = if a > b { a - b } else { b - a };
            if d != Wide::from(1u8) {
                return false;
            }
            prev = (p, q);
        }
        true
    }

    /// The three-term recurrences hold for every stored convergent.
    pub fn recurrence_ok(&self) -> bool {
        let mut pm = (1u128, 0u128);
        let mut pc = (0u128, 1u128);
        if self.convergents.first() != Some(&pc) {
            return false;
        }
        for (j, &a) in self.quotients.iter().enumerate() {
            let np = wide(a) * wide(pc.0) + wide(pm.0);
            let nq = wide(a) * wide(pc.1) + wide(pm.1);
            let got = self.convergents[j + 1];
            if np != wide(got.0) || nq != wide(got.1) {
                return false;
            }
            pm = pc;
            pc = got;
        }
        true
    }
}

/// Euclidean algorithm on the rational `raw / 2^F`, stopping after `depth`
/// quotients, at exact termination, or when a convergent would overflow u128.
pub fn cf_expand(u: FixedUnit, depth: usize) -> Result<ContinuedFraction> {
    if u.is_zero() {
        return Err(Error::ZeroInput);
    }
    if depth == 0 {
        return Err(Error::InvalidParameter("depth must be at least 1".into()));
    }
    // x = num/den with num < den; the next quotient is floor(den/num).
    let mut num = u.wide();
    let mut den = wide(1) << u.bits() as usize;
    let mut quotients = Vec::new();
    let mut convergents = vec![(0u128, 1u128)];
    let (mut pm, mut qm) = (wide(1), Wide::ZERO);
    let (mut pc, mut qc) = (Wide::ZERO, wide(1));
    let mut exact = false;
    while quotients.len() < depth {
        let (a, r) = den.div_rem(num);
        let np = a * pc + pm;
        let nq = a * qc + qm;
        if a.bit_len() > 128 || nq.bit_len() > 128 {
            break;
        }
        quotients.push(a.wrapping_to());
        convergents.push((np.wrapping_to(), nq.wrapping_to()));
        pm = pc;
        qm = qc;
        pc = np;
        qc = nq;
        if r == Wide::ZERO {
            exact = true;
            break;
        }
        den = num;
        num = r;
    }
    Ok(ContinuedFraction { quotients, convergents, exact })
}

/// ‖q u‖ as an exact numerator over 2^F.
fn dist_multiple(u: FixedUnit, q: u128) -> Wide {
    let m = (wide(q) * u.wide()) & ((wide(1) << u.bits() as usize) - wide(1));
    let c = (wide(1) << u.bits() as usize) - m;
    if m < c {
        m
    } else {
        c
    }
}

/// For each j >= 1 with a known q_{j+1}, whether 1/(2 q_{j+1}) <= ‖q_j u‖ <= 1/q_{j+1}.
///
/// At exact termination q_{j+1} is infinite for the last j and ‖q_j u‖ = 0, so
/// that entry is true. Without termination the last j has no successor and is
/// omitted.
pub fn convergent_gap_check(cf: &ContinuedFraction, u: FixedUnit) -> Vec<bool> {
    let n = cf.depth();
    let one = wide(1) << u.bits() as usize;
    let mut out = Vec::new();
    for j in 1..=n {
        let d = dist_multiple(u, cf.q(j));
        if j == n {
            if cf.exact {
                out.push(d == Wide::ZERO);
            }
            break;
        }
        let qn = wide(cf.q(j + 1));
        let lower = one <= (qn * d) << 1;
        let upper = qn * d <= one;
        out.push(lower && upper);
    }
    out
}

/// ‖q_j u‖ strictly decreasing in j >= 1.
pub fn gaps_decreasing(cf: &ContinuedFraction, u: FixedUnit) -> bool {
    let d: Vec<Wide> = (1..=cf.depth()).map(|j| dist_multiple(u, cf.q(j))).collect();
    d.windows(2).all(|w| w[1] < w[0])
}
