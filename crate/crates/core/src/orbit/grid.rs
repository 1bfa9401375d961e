//! Maximal discrepancy over a grid of starting points and triangle scales.
//!
//! With `x1 = tau * x2` a point `p` lies in the triangle of scale `x2` iff its
//! level `p1 / tau + p2` is below `x2`. The grid triangles are nested, so each
//! orbit point hits a suffix of the scales and only those counters change.
//! `|D|` is maximised either just before a hit, just after one, or at the ends,
//! so only those times are evaluated.

use super::{in_triangle_legs, Point, Triangle, Volume};
use crate::arithmetic::{wide, FixedUnit, Length, Wide};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridSpec {
    /// Starting points per axis; `a = (i/G, j/G)`.
    pub starts: u32,
    /// Scales `x2 = (k+1)/G`, k = 0..G.
    pub scales: u32,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { starts: 16, scales: 32 }
    }
}

impl GridSpec {
    pub fn new(starts: u32, scales: u32) -> Result<Self> {
        let g = GridSpec { starts, scales };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 || self.scales == 0 {
            return Err(Error::InvalidGrid);
        }
        Ok(())
    }

    /// Starting points in row-major order of (i, j).
    pub fn start_points(&self, bits: u32) -> Vec<Point> {
        let g = self.starts as u128;
        let c = |i: u128| FixedUnit::from_ratio(wide(i), wide(g), bits);
        let mut out = Vec::with_capacity((g * g) as usize);
        for i in 0..g {
            for j in 0..g {
                out.push([c(i), c(j)]);
            }
        }
        out
    }

    pub fn scale_values(&self, bits: u32) -> Vec<Length> {
        let g = self.scales as u128;
        (1..=g)
            .map(|k| if k == g { Length::one(bits) } else { Length::from_unit(FixedUnit::from_ratio(wide(k), wide(g), bits)).expect("positive scale") })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Witness {
    pub m: u64,
    pub a: Point,
    pub x2: Length,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaxDiscrepancy {
    pub n: u64,
    pub delta_hat: f64,
    pub witness: Witness,
}

#[derive(Clone, Debug)]
struct Scale {
    x1: Wide,
    x2w: Wide,
    x2: Length,
    vol: Volume,
    vf: f64,
}

#[derive(Clone, Copy, Debug)]
struct Track {
    hits: u64,
    best: f64,
    best_m: u64,
    /// Below this hit count the value after a hit cannot beat `best`.
    check_hits: u64,
    /// Before this time the value before a hit cannot beat `best`.
    check_m: u64,
}

impl Track {
    fn new() -> Self {
        Track { hits: 0, best: -1.0, best_m: 0, check_hits: 0, check_m: 0 }
    }

    /// Since D rises only at hits and falls by V per step, the record can be
    /// reached no earlier than these thresholds.
    fn refresh(&mut self, s: &Scale, m: u64) {
        let x = self.best + m as f64 * s.vf - FILTER_SLACK;
        self.check_hits = if x <= 0.0 {
            0
        } else {
            // ceil without a libm call
            let xi = x as u64;
            xi + ((xi as f64) < x) as u64
        };
        let y = (self.best + self.hits as f64 - FILTER_SLACK) / s.vf;
        self.check_m = if y <= 0.0 { 0 } else { (y as u64).saturating_add(1) };
    }
}

#[derive(Clone, Debug)]
struct Cell {
    a: Point,
    p: Point,
    tracks: Vec<Track>,
}

/// Incremental grid scan; `advance_to` can be called with increasing N to
/// obtain the maxima for every prefix length in one pass.
#[derive(Clone, Debug)]
pub struct GridScan {
    alpha: Point,
    inv_tau: f64,
    delta: f64,
    scales: Vec<Scale>,
    cells: Vec<Cell>,
    n_done: u64,
    threads: usize,
}

/// Slack on the estimate of |D| before an exact evaluation is skipped.
const FILTER_SLACK: f64 = 1e-6;

#[inline]
fn candidate(t: &mut Track, s: &Scale, hits: u64, m: u64) {
    let approx = (hits as f64 - m as f64 * s.vf).abs();
    if approx > t.best - FILTER_SLACK {
        let d = s.vol.discrepancy(hits, m).abs();
        if d > t.best {
            t.best = d;
            t.best_m = m;
        }
    }
}

impl GridScan {
    pub fn new(alpha: Point, tau: Length, grid: GridSpec, threads: usize) -> Result<Self> {
        grid.validate()?;
        let bits = tau.bits();
        if alpha[0].bits() != bits || alpha[1].bits() != bits {
            return Err(Error::InvalidParameter("mixed fixed-point widths".into()));
        }
        let mut scales = Vec::new();
        for x2 in grid.scale_values(bits) {
            let t = Triangle::from_tau(tau, x2)?;
            scales.push(Scale { x1: t.x1().wide(), x2w: x2.wide(), x2, vol: t.volume(), vf: t.volume().to_f64() });
        }
        let g = grid.scales as usize;
        let cells = grid.start_points(bits).into_iter().map(|a| Cell { a, p: a, tracks: vec![Track::new(); g] }).collect();
        let inv_tau = 1.0 / tau.to_f64();
        // Level error from the 64-bit truncation, float rounding and the
        // per-scale rounding of x1, in units of one scale step.
        let delta = g as f64 * (inv_tau + 1.0) * 2f64.powi(-56) + 1e-9;
        Ok(GridScan { alpha, inv_tau, delta, scales, cells, n_done: 0, threads: threads.max(1) })
    }

    pub fn n_done(&self) -> u64 {
        self.n_done
    }

    /// Continue every cell to time `n` and return the maximum over m <= n.
    pub fn advance_to(&mut self, n: u64) -> Result<MaxDiscrepancy> {
        if n < self.n_done {
            return Err(Error::InvalidParameter(format!("scan already at N={}, cannot rewind to {n}", self.n_done)));
        }
        let from = self.n_done;
        if n > from {
            let threads = self.threads.min(self.cells.len());
            let (alpha, inv_tau, delta) = (self.alpha, self.inv_tau, self.delta);
            let scales = &self.scales;
            if threads <= 1 {
                for c in self.cells.iter_mut() {
                    advance_cell(c, scales, alpha, inv_tau, delta, from, n);
                }
            } else {
                let chunk = self.cells.len().div_ceil(threads);
                std::thread::scope(|s| {
                    for part in self.cells.chunks_mut(chunk) {
                        s.spawn(move || {
                            for c in part.iter_mut() {
                                advance_cell(c, scales, alpha, inv_tau, delta, from, n);
                            }
                        });
                    }
                });
            }
            self.n_done = n;
        }
        Ok(self.reduce(n))
    }

    fn reduce(&self, n: u64) -> MaxDiscrepancy {
        let mut best = MaxDiscrepancy { n, delta_hat: 0.0, witness: Witness { m: 0, a: self.cells[0].a, x2: self.scales[0].x2 } };
        if n == 0 {
            return best;
        }
        let mut have = false;
        for c in &self.cells {
            for (t, s) in c.tracks.iter().zip(&self.scales) {
                // The end point is a candidate for this prefix only.
                let mut tt = *t;
                candidate(&mut tt, s, t.hits, n);
                let better = !have || tt.best > best.delta_hat || (tt.best == best.delta_hat && tt.best_m < best.witness.m);
                if better {
                    have = true;
                    best.delta_hat = tt.best;
                    best.witness = Witness { m: tt.best_m, a: c.a, x2: s.x2 };
                }
            }
        }
        best
    }
}

fn advance_cell(c: &mut Cell, scales: &[Scale], alpha: Point, inv_tau: f64, delta: f64, from: u64, to: u64) {
    let g = scales.len();
    let gf = g as f64;
    let bits = alpha[0].bits();
    let msk = mask_low(bits);
    let sh = 128 - bits;
    let (a0, a1) = (alpha[0].raw(), alpha[1].raw());
    let (mut r0, mut r1) = (c.p[0].raw(), c.p[1].raw());
    // Top 63 bits as a signed integer convert in one instruction.
    let c0 = inv_tau * gf * 2f64.powi(-63);
    let c1 = gf * 2f64.powi(-63);
    for m in from + 1..=to {
        r0 = r0.wrapping_add(a0) & msk;
        r1 = r1.wrapping_add(a1) & msk;
        let hg = ((r0 << sh) >> 65) as i64 as f64 * c0 + ((r1 << sh) >> 65) as i64 as f64 * c1;
        if hg < gf + delta {
            let kf = hg as usize;
            let fr = hg - kf as f64;
            let k0 = if fr < delta || fr > 1.0 - delta {
                let p = [FixedUnit::from_raw(r0, bits), FixedUnit::from_raw(r1, bits)];
                first_hit_exact(p, scales, kf.min(g))
            } else {
                kf
            };
            for k in k0..g {
                let t = &mut c.tracks[k];
                if t.hits + 1 >= t.check_hits || m >= t.check_m {
                    let s = &scales[k];
                    if m > 1 {
                        candidate(t, s, t.hits, m - 1);
                    }
                    t.hits += 1;
                    candidate(t, s, t.hits, m);
                    t.refresh(s, m);
                } else {
                    t.hits += 1;
                }
            }
        }
        if m == 1 {
            for (t, s) in c.tracks.iter_mut().zip(scales) {
                candidate(t, s, t.hits, 1);
                t.refresh(s, 1);
            }
        }
    }
    c.p = [FixedUnit::from_raw(r0, bits), FixedUnit::from_raw(r1, bits)];
}

#[inline]
fn mask_low(bits: u32) -> u128 {
    if bits >= 128 {
        u128::MAX
    } else {
        (1u128 << bits) - 1
    }
}

fn first_hit_exact(p: Point, scales: &[Scale], guess: usize) -> usize {
    let hit = |k: usize| in_triangle_legs(p, scales[k].x1, scales[k].x2w);
    let mut k = guess;
    while k > 0 && hit(k - 1) {
        k -= 1;
    }
    while k < scales.len() && !hit(k) {
        k += 1;
    }
    k
}

/// Δ̂: max of |D(m)| over the grid and over 1 <= m <= N.
pub fn max_discrepancy(alpha: Point, tau: Length, n: u64, grid: GridSpec) -> Result<MaxDiscrepancy> {
    GridScan::new(alpha, tau, grid, 1)?.advance_to(n)
}

impl Witness {
    /// The orbit specification that reproduces the witness value.
    pub fn orbit(&self, alpha: Point) -> super::OrbitSpec {
        super::OrbitSpec::new(alpha, self.a, self.m)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{discrepancy, OrbitSpec};
    use super::*;

    fn alpha() -> Point {
        [FixedUnit::parse("sqrt2m1", 128).unwrap(), FixedUnit::parse("sqrt3m1", 128).unwrap()]
    }

    fn golden() -> Length {
        Length::parse("golden", 128).unwrap()
    }

    #[test]
    fn invalid_grid() {
        assert_eq!(max_discrepancy(alpha(), golden(), 10, GridSpec { starts: 0, scales: 4 }), Err(Error::InvalidGrid));
        assert_eq!(GridSpec::new(3, 0), Err(Error::InvalidGrid));
    }

    #[test]
    fn degenerate_grid_equals_trace_max() {
        let grid = GridSpec::new(1, 1).unwrap();
        let r = max_discrepancy(alpha(), golden(), 2000, grid).unwrap();
        let t = Triangle::from_tau(golden(), Length::one(128)).unwrap();
        let spec = OrbitSpec::new(alpha(), [FixedUnit::zero(128); 2], 2000);
        let (mx, m) = discrepancy(&spec, &t).max_abs();
        assert_eq!(r.delta_hat, mx);
        assert_eq!(r.witness.m, m);
        assert!(r.witness.x2.is_one());
    }

    #[test]
    fn incremental_matches_fresh_runs() {
        let grid = GridSpec::new(3, 5).unwrap();
        let mut scan = GridScan::new(alpha(), golden(), grid, 1).unwrap();
        for n in [1u64, 7, 100, 513] {
            let inc = scan.advance_to(n).unwrap();
            let fresh = max_discrepancy(alpha(), golden(), n, grid).unwrap();
            assert_eq!(inc, fresh);
        }
        assert!(scan.advance_to(10).is_err());
        let mut par = GridScan::new(alpha(), golden(), grid, 4).unwrap();
        assert_eq!(par.advance_to(513).unwrap(), scan.advance_to(513).unwrap());
    }

    #[test]
    fn zero_length_scan() {
        let r = max_discrepancy(alpha(), golden(), 0, GridSpec::default()).unwrap();
        assert_eq!(r.delta_hat, 0.0);
        assert_eq!(r.witness.m, 0);
    }
}
