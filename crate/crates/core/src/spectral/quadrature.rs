use super::SpectralParams;
use crate::arithmetic::FixedUnit;
use crate::error::{Error, Result};
use crate::orbit::{orbit_point, TriangleTest};

/// Midpoints and weights of the `q - 1` equal cells of `[-l, l]`, each weight
/// the exact integral of the tent `(1 - |t|/l)/l` over its cell.
pub fn tent_cells(l: f64, q: usize) -> Result<Vec<(f64, f64)>> {
    if q < 2 || !(l > 0.0) {
        return Err(Error::InvalidParameter("quadrature needs at least 2 points per axis".into()));
    }
    let cdf = |t: f64| {
        if t < 0.0 {
            (t + l) * (t + l) / (2.0 * l * l)
        } else {
            1.0 - (l - t) * (l - t) / (2.0 * l * l)
        }
    };
    let cells = q - 1;
    let edge = |i: usize| -l + 2.0 * l * i as f64 / cells as f64;
    Ok((0..cells)
        .map(|i| {
            let (lo, hi) = (edge(i), edge(i + 1));
            (0.5 * (lo + hi), cdf(hi) - cdf(lo))
        })
        .collect())
}

/// Tent-weighted average of `D(a + u; u3, N + u3)` over
/// `u1, u2 in [-2/N^2, 2/N^2]` and `u3 in [-2, 2]`, by the midpoint rule on
/// grids of `q[0] x q[1] x q[2]` points.
///
/// The integrand counts `n` in `(u3, N + u3]` from the start `a + u`, so it is
/// constant on unit intervals of `u3`; with `q[2] - 1` a multiple of 4 the
/// `u3` integral is exact.
pub fn dbar_quadrature(p: &SpectralParams, q: [usize; 3]) -> Result<f64> {
    let big_n = p.n as f64;
    let l = 2.0 / (big_n * big_n);
    let c1 = tent_cells(l, q[0])?;
    let c2 = tent_cells(l, q[1])?;
    let c3 = tent_cells(2.0, q[2])?;
    // Weight of each window start floor(u3) in -2..=1.
    let mut w3 = [0.0f64; 4];
    for &(m, w) in &c3 {
        let s = (m.floor() as i64).clamp(-2, 1);
        w3[(s + 2) as usize] += w;
    }
    let bits = p.alpha[0].bits();
    let test = TriangleTest::new(&p.x);
    let vol = p.x.volume().to_f64();
    let n = p.n as i64;
    let mut total = 0.0;
    for &(m1, w1) in &c1 {
        for &(m2, w2) in &c2 {
            let start = [p.a[0].add_mod1(FixedUnit::from_f64(m1, bits)), p.a[1].add_mod1(FixedUnit::from_f64(m2, bits))];
            // cum[k] = hits for n in (-2, k - 2].
            let mut cum = Vec::with_capacity(p.n as usize + 5);
            cum.push(0u64);
            let mut pt = orbit_point(p.alpha, start, -2);
            for _ in -1..=n + 1 {
                pt = [pt[0].add_mod1(p.alpha[0]), pt[1].add_mod1(p.alpha[1])];
                let last = *cum.last().unwrap();
                cum.push(last + test.contains(pt) as u64);
            }
            let mut inner = 0.0;
            for (i, &w) in w3.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let s = i as i64 - 2;
                let hits = cum[(s + n + 2) as usize] - cum[(s + 2) as usize];
                inner += w * (hits as f64 - big_n * vol);
            }
            total += w1 * w2 * inner;
        }
    }
    Ok(total)
}
