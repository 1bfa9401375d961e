use crate::arithmetic::{aligned_centered_f64, cf_expand, FixedUnit};
use crate::error::{Error, Result};
use crate::orbit::Point;

use super::PhiFunction;

fn lhs(n1: u64, n2: u64, phi: PhiFunction, dist: f64) -> f64 {
    let p = n1 as f64 * n2 as f64;
    if n1 * n2 == 1 {
        // log 1 = 0 kills the product.
        return 0.0;
    }
    p * p.ln().powi(2) * phi.eval((p * p).ln().ln()) * dist
}

/// Direct check of `n1 n2 (log n1 n2)^2 phi(log log (n1^2 n2^2)) ||n.alpha|| < 1`.
pub fn khintchine_holds(alpha: Point, phi: PhiFunction, n1: u64, n2: u64) -> bool {
    let d = alpha[0].mul_int_mod1(n1 as i128).add_mod1(alpha[1].mul_int_mod1(n2 as i128)).dist_nearest_int().to_f64();
    lhs(n1, n2, phi, d) < 1.0
}

/// All `n in [1, bound]^2` satisfying the inequality, in increasing order.
pub fn khintchine_solutions(alpha: Point, phi: PhiFunction, bound: u64) -> Result<Vec<(u64, u64)>> {
    if bound == 0 {
        return Err(Error::InvalidParameter("bound must be positive".into()));
    }
    if (bound as f64).powi(2) > super::shells::MAX_PAIRS {
        return Err(Error::RangeTooLarge((bound as f64).powi(2)));
    }
    // The weight n1 n2 (log)^2 phi(loglog) increases in n1 n2 >= 2, so
    // `||n.alpha|| n1 n2 < 1 / w(2)` is a necessary condition.
    let w2 = 2f64.ln().powi(2) * phi.eval(4f64.ln().ln());
    let gate = if w2 > 0.0 { 1.0 / w2 * (1.0 + 1e-9) } else { f64::INFINITY };
    let (a1, a2) = (alpha[0].aligned(), alpha[1].aligned());
    let mut out = Vec::new();
    for n1 in 1..=bound {
        let mut x = a1.wrapping_mul(n1 as u128).wrapping_add(a2);
        for n2 in 1..=bound {
            let d = aligned_centered_f64(x).abs();
            let p = n1 as f64 * n2 as f64;
            if (d * p < gate || n1 * n2 == 1) && lhs(n1, n2, phi, d) < 1.0 {
                out.push((n1, n2));
            }
            x = x.wrapping_add(a2);
        }
    }
    Ok(out)
}

/// `(a_1 + ... + a_s, sum / (s psi(s)))`.
pub fn partial_quotient_sum_test(tau: FixedUnit, psi: impl Fn(f64) -> f64, s: usize) -> Result<(u128, f64)> {
    let cf = cf_expand(tau, s)?;
    if cf.depth() < s {
        return Err(Error::DepthUnavailable { requested: s, available: cf.depth() });
    }
    let sum: u128 = cf.quotients.iter().sum();
    Ok((sum, sum as f64 / (s as f64 * psi(s as f64))))
}

/// `sum_{n=1}^{M} 1/(n ||n tau||)`, skipping exact zeros.
pub fn cf_harmonic_sum(tau: FixedUnit, m: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter("M must be positive".into()));
    }
    let a = tau.aligned();
    let mut x = 0u128;
    let mut s = 0.0;
    for n in 1..=m {
        x = x.wrapping_add(a);
        let d = aligned_centered_f64(x).abs();
        if d > 0.0 {
            s += 1.0 / (n as f64 * d);
        }
    }
    Ok(s)
}

/// The harmonic sum over `q_j <= n < q_{j+1}` next to its majorant
/// `a_{j+1} log q_{j+1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarmonicBlock {
    pub q: u128,
    pub q_next: u128,
    pub block_sum: f64,
    pub bound: f64,
}

/// Blocks between consecutive convergent denominators up to `M`.
pub fn harmonic_blocks(tau: FixedUnit, m: u64) -> Result<Vec<HarmonicBlock>> {
    let cf = cf_expand(tau, 200)?;
    let a = tau.aligned();
    let mut out = Vec::new();
    for j in 1..cf.depth() {
        let (q, qn) = (cf.q(j), cf.q(j + 1));
        if qn > m as u128 {
            break;
        }
        let mut s = 0.0;
        for n in q..qn {
            let d = aligned_centered_f64(a.wrapping_mul(n)).abs();
            if d > 0.0 {
                s += 1.0 / (n as f64 * d);
            }
        }
        let bound = cf.quotients[j] as f64 * (qn as f64).ln().max(1.0);
        out.push(HarmonicBlock { q, q_next: qn, block_sum: s, bound });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> FixedUnit {
        FixedUnit::parse("golden", 128).unwrap()
    }

    #[test]
    fn degenerate_unit_vector_is_a_solution() {
        let a = [FixedUnit::from_f64(0.3, 128), FixedUnit::from_f64(0.45, 128)];
        assert_eq!(khintchine_solutions(a, PhiFunction::Linear, 1).unwrap(), vec![(1, 1)]);
    }

    #[test]
    fn solutions_recheck() {
        let a = [FixedUnit::parse("sqrt2m1", 128).unwrap(), FixedUnit::parse("sqrt3m1", 128).unwrap()];
        let sols = khintchine_solutions(a, PhiFunction::Linear, 300).unwrap();
        assert!(!sols.is_empty());
        let mut all = Vec::new();
        for n1 in 1..=300 {
            for n2 in 1..=300 {
                if khintchine_holds(a, PhiFunction::Linear, n1, n2) {
                    all.push((n1, n2));
                }
            }
        }
        assert_eq!(sols, all);
    }

    #[test]
    fn partial_quotients() {
        let (sum, ratio) = partial_quotient_sum_test(golden(), |_| 2.0, 20).unwrap();
        assert_eq!(sum, 20);
        assert_eq!(ratio, 0.5);
        let (sum, _) = partial_quotient_sum_test(FixedUnit::parse("sqrt2m1", 128).unwrap(), |_| 1.0, 25).unwrap();
        assert_eq!(sum, 50);
        assert_eq!(partial_quotient_sum_test(FixedUnit::half(128), |_| 1.0, 3), Err(Error::DepthUnavailable { requested: 3, available: 1 }));
    }

    #[test]
    fn harmonic() {
        let g = golden();
        let one = cf_harmonic_sum(g, 1).unwrap();
        let want = 1.0 / (1.0 - g.to_f64());
        assert!((one - want).abs() < 1e-12);
        let naive: f64 = (1..=500u64)
            .map(|n| {
                let d = g.mul_int_mod1(n as i128).dist_nearest_int().to_f64();
                1.0 / (n as f64 * d)
            })
            .sum();
        assert!((cf_harmonic_sum(g, 500).unwrap() - naive).abs() < 1e-10 * naive);
        let blocks = harmonic_blocks(g, 10_000).unwrap();
        assert!(blocks.len() > 10);
        // Block sums stay within a fixed multiple of a_{j+1} log q_{j+1}.
        for b in &blocks {
            assert!(b.block_sum <= 8.0 * b.q_next as f64 / b.q as f64 * b.bound + 4.0, "{b:?}");
        }
    }
}
