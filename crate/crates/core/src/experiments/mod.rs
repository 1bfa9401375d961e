//! Growth scans of the maximal discrepancy, rate fitting, and the box versus
//! triangle comparison.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arithmetic::{FixedUnit, Length};
use crate::error::{Error, Result};
use crate::orbit::{discrepancy, in_box, in_triangle_legs, in_upper_triangle, on_hypotenuse, GridScan, GridSpec, OrbitSpec, Point, Triangle, Volume};
use crate::smalldivisors::PhiFunction;
use crate::spectral::{dbar_quadrature, SpectralParams};

/// Default schedule `N = 2^k`, `k = 10..=27`.
pub fn default_schedule() -> Vec<u64> {
    (10..=27).map(|k| 1u64 << k).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub m: u64,
    /// Exact hex forms, accepted back by the parsers.
    pub a1: String,
    pub a2: String,
    pub x2: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthRecord {
    pub n: u64,
    pub delta_hat: f64,
    pub log_n2: f64,
    pub phi_name: String,
    /// `phi(log log N)^2`.
    pub phi_term: f64,
    pub ratio: f64,
    pub witness: WitnessRecord,
}

fn rate_terms(n: u64, phi: PhiFunction) -> Result<(f64, f64)> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("growth rate needs N >= 3, got {n}")));
    }
    let ln = (n as f64).ln();
    Ok((ln * ln, phi.eval(ln.ln()).powi(2)))
}

impl GrowthRecord {
    pub fn new(n: u64, delta_hat: f64, phi: PhiFunction, witness: WitnessRecord) -> Result<Self> {
        let (log_n2, phi_term) = rate_terms(n, phi)?;
        Ok(GrowthRecord { n, delta_hat, log_n2, phi_name: phi.to_string(), phi_term, ratio: delta_hat / (log_n2 * phi_term), witness })
    }

    /// The witness as an orbit and triangle that reproduce `delta_hat`.
    pub fn witness_inputs(&self, alpha: Point, tau: Length) -> Result<(OrbitSpec, Triangle)> {
        let bits = tau.bits();
        let a = [FixedUnit::parse(&self.witness.a1, bits)?, FixedUnit::parse(&self.witness.a2, bits)?];
        let x2 = Length::parse(&self.witness.x2, bits)?;
        Ok((OrbitSpec::new(alpha, a, self.witness.m), Triangle::from_tau(tau, x2)?))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthConfig {
    pub alpha: Point,
    pub tau: Length,
    pub grid: GridSpec,
    pub phi: PhiFunction,
    pub threads: usize,
}

fn check_schedule(schedule: &[u64]) -> Result<()> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("schedule must be non-empty and strictly increasing".into()));
    }
    if schedule[0] < 3 {
        return Err(Error::InvalidParameter("schedule entries must be at least 3".into()));
    }
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Vec<GrowthRecord>> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Checkpoint(e.to_string()))
}

fn save_checkpoint(path: &Path, records: &[GrowthRecord]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let text = serde_json::to_string_pretty(records).map_err(|e| Error::Checkpoint(e.to_string()))?;
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// One record per schedule entry, from a single incremental grid scan.
///
/// With a checkpoint path, records are written after each entry and an
/// existing file is resumed: its records must be a prefix of the schedule,
/// and the last one is re-verified against its witness. The maximum over
/// `m <= N` does not depend on earlier entries, so a resumed scan restarts
/// the grid at the first missing `N` and yields the same records.
pub fn growth_scan(cfg: &GrowthConfig, schedule: &[u64], checkpoint: Option<&Path>) -> Result<Vec<GrowthRecord>> {
    check_schedule(schedule)?;
    let mut records = match checkpoint {
        Some(p) if p.exists() => load_checkpoint(p)?,
        _ => Vec::new(),
    };
    if records.len() > schedule.len() || records.iter().zip(schedule).any(|(r, &n)| r.n != n) {
        return Err(Error::Checkpoint("records are not a prefix of the schedule".into()));
    }
    if let Some(last) = records.last() {
        verify_record(last, cfg)?;
    }
    let mut scan = GridScan::new(cfg.alpha, cfg.tau, cfg.grid, cfg.threads)?;
    for &n in &schedule[records.len()..] {
        let r = scan.advance_to(n)?;
        let w = r.witness;
        let witness = WitnessRecord { m: w.m, a1: w.a[0].to_string(), a2: w.a[1].to_string(), x2: w.x2.to_string() };
        records.push(GrowthRecord::new(n, r.delta_hat, cfg.phi, witness)?);
        if let Some(p) = checkpoint {
            save_checkpoint(p, &records)?;
        }
    }
    Ok(records)
}

fn verify_record(r: &GrowthRecord, cfg: &GrowthConfig) -> Result<()> {
    let (spec, t) = r.witness_inputs(cfg.alpha, cfg.tau)?;
    let d = if spec.n == 0 { 0.0 } else { discrepancy(&spec, &t).value(spec.n).abs() };
    if d != r.delta_hat || r.phi_name != cfg.phi.to_string() {
        return Err(Error::Checkpoint(format!("record for N={} does not match this configuration", r.n)));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateFit {
    pub max_ratio: f64,
    pub median_ratio: f64,
    /// Least-squares slope of `delta_hat` against `(log N)^2`.
    pub slope: f64,
}

/// Summary of the ratio column, recomputed for `phi`, and the slope of
/// `delta_hat` against `(log N)^2`. Records are sorted by `N` first so the
/// result does not depend on their order.
pub fn fit_rate(records: &[GrowthRecord], phi: PhiFunction) -> Result<RateFit> {
    if records.len() < 3 {
        return Err(Error::TooFewRecords(records.len()));
    }
    let mut rs: Vec<&GrowthRecord> = records.iter().collect();
    rs.sort_by(|a, b| a.n.cmp(&b.n).then(a.delta_hat.total_cmp(&b.delta_hat)));
    let mut ratios = Vec::with_capacity(rs.len());
    let mut xy = Vec::with_capacity(rs.len());
    for r in &rs {
        let (x, p) = rate_terms(r.n, phi)?;
        ratios.push(r.delta_hat / (x * p));
        xy.push((x, r.delta_hat));
    }
    ratios.sort_by(f64::total_cmp);
    let k = ratios.len();
    let median_ratio = if k % 2 == 1 { ratios[k / 2] } else { 0.5 * (ratios[k / 2 - 1] + ratios[k / 2]) };
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / k as f64;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / k as f64;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    Ok(RateFit { max_ratio: ratios[k - 1], median_ratio, slope })
}

/// Hit traces of the box `[0,x1) x [0,x2)`, its two diagonal halves and the
/// diagonal itself.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxComparison {
    pub box_volume: Volume,
    pub half_volume: Volume,
    pub box_hits: Vec<u64>,
    pub lower_hits: Vec<u64>,
    pub upper_hits: Vec<u64>,
    pub diagonal_hits: Vec<u64>,
}

impl BoxComparison {
    pub fn len(&self) -> usize {
        self.box_hits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.box_hits.is_empty()
    }

    pub fn d_box(&self, m: u64) -> f64 {
        self.box_volume.discrepancy(self.box_hits[m as usize - 1], m)
    }

    pub fn d_lower(&self, m: u64) -> f64 {
        self.half_volume.discrepancy(self.lower_hits[m as usize - 1], m)
    }

    pub fn d_upper(&self, m: u64) -> f64 {
        self.half_volume.discrepancy(self.upper_hits[m as usize - 1], m)
    }

    /// First `m` where `D_box = D_lower + D_upper + diagonal hits` fails.
    /// The volumes satisfy `box = 2 half` exactly, so this is a statement
    /// about integer hit counts.
    pub fn identity_failure(&self) -> Option<u64> {
        (0..self.len()).find(|&i| self.box_hits[i] != self.lower_hits[i] + self.upper_hits[i] + self.diagonal_hits[i]).map(|i| i as u64 + 1)
    }

    /// Times where `max(|D_lower|, |D_upper|) < |D_box|/2 - 1`.
    pub fn inequality_failures(&self) -> Vec<u64> {
        (1..=self.len() as u64).filter(|&m| self.d_lower(m).abs().max(self.d_upper(m).abs()) < self.d_box(m).abs() / 2.0 - 1.0).collect()
    }
}

/// Box versus triangles along `a + n alpha`, `n = 1..N`, for legs `x` in `(0,1]^2`.
pub fn box_vs_triangle(spec: &OrbitSpec, x: [Length; 2]) -> Result<BoxComparison> {
    let (x1, x2) = (x[0], x[1]);
    if x1.bits() != x2.bits() {
        return Err(Error::InvalidParameter("mixed fixed-point widths".into()));
    }
    let box_volume = Volume::rect(x1, x2);
    let half_volume = Volume::new(x1.wide() * x2.wide(), 2 * x1.bits() + 1);
    let n = spec.n as usize;
    let mut c = BoxComparison {
        box_volume,
        half_volume,
        box_hits: Vec::with_capacity(n),
        lower_hits: Vec::with_capacity(n),
        upper_hits: Vec::with_capacity(n),
        diagonal_hits: Vec::with_capacity(n),
    };
    let (mut hb, mut hl, mut hu, mut hd) = (0, 0, 0, 0);
    let mut p = spec.start;
    for _ in 0..spec.n {
        p = [p[0].add_mod1(spec.alpha[0]), p[1].add_mod1(spec.alpha[1])];
        hb += in_box(p, x1, x2) as u64;
        hl += in_triangle_legs(p, x1.wide(), x2.wide()) as u64;
        hu += in_upper_triangle(p, x1, x2) as u64;
        hd += on_hypotenuse(p, x1, x2) as u64;
        c.box_hits.push(hb);
        c.lower_hits.push(hl);
        c.upper_hits.push(hu);
        c.diagonal_hits.push(hd);
    }
    Ok(c)
}

/// The Fejér average against the plain discrepancy at one `N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothingGap {
    pub n: u64,
    pub dbar: f64,
    pub d: f64,
    /// `|dbar - d| / (log N)^1.5`.
    pub scaled: f64,
}

pub fn smoothing_gap(alpha: Point, a: Point, x: Triangle, n: u64, q: [usize; 3]) -> Result<SmoothingGap> {
    if n < 2 {
        return Err(Error::InvalidParameter("N must be at least 2".into()));
    }
    let p = SpectralParams::new(x, a, alpha, n, 0)?;
    let dbar = dbar_quadrature(&p, q)?;
    let d = discrepancy(&OrbitSpec::new(alpha, a, n), &x).value(n);
    Ok(SmoothingGap { n, dbar, d, scaled: (dbar - d).abs() / (n as f64).ln().powf(1.5) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::{discrepancy_max, max_discrepancy};

    fn alpha() -> Point {
        [FixedUnit::parse("sqrt2m1", 128).unwrap(), FixedUnit::parse("sqrt3m1", 128).unwrap()]
    }

    fn golden() -> Length {
        Length::parse("golden", 128).unwrap()
    }

    fn cfg(grid: GridSpec) -> GrowthConfig {
        GrowthConfig { alpha: alpha(), tau: golden(), grid, phi: PhiFunction::Power(0.1), threads: 1 }
    }

    fn tmp(name: &str) -> std::path::PathBuf {
        let p = std::env::temp_dir().join(format!("tdisc-{}-{name}.json", std::process::id()));
        let _ = fs::remove_file(&p);
        p
    }

    #[test]
    fn single_trivial_grid_record() {
        let g = GridSpec::new(1, 1).unwrap();
        let r = growth_scan(&cfg(g), &[100], None).unwrap();
        assert_eq!(r.len(), 1);
        let t = Triangle::from_tau(golden(), Length::one(128)).unwrap();
        let direct = discrepancy_max(&OrbitSpec::new(alpha(), [FixedUnit::zero(128); 2], 100), &t);
        assert_eq!(r[0].delta_hat, direct.max_abs);
        assert_eq!(r[0].witness.m, direct.argmax);
        let (spec, tri) = r[0].witness_inputs(alpha(), golden()).unwrap();
        assert_eq!(discrepancy(&spec, &tri).value(spec.n).abs(), r[0].delta_hat);
        assert!((r[0].ratio * r[0].log_n2 * r[0].phi_term - r[0].delta_hat).abs() < 1e-12);
    }

    #[test]
    fn nested_schedule_is_monotone_and_matches_direct() {
        let g = GridSpec::new(3, 4).unwrap();
        let sched = [50, 200, 800, 3000];
        let r = growth_scan(&cfg(g), &sched, None).unwrap();
        for w in r.windows(2) {
            assert!(w[1].delta_hat >= w[0].delta_hat);
        }
        for rec in &r {
            assert_eq!(rec.delta_hat, max_discrepancy(alpha(), golden(), rec.n, g).unwrap().delta_hat);
        }
    }

    #[test]
    fn resume_is_bit_identical() {
        let g = GridSpec::new(2, 3).unwrap();
        let sched = [64, 256, 1024, 4096];
        let full = growth_scan(&cfg(g), &sched, None).unwrap();
        let path = tmp("resume");
        let part = growth_scan(&cfg(g), &sched[..2], Some(&path)).unwrap();
        assert_eq!(part[..], full[..2]);
        let resumed = growth_scan(&cfg(g), &sched, Some(&path)).unwrap();
        assert_eq!(resumed, full);
        assert_eq!(load_checkpoint(&path).unwrap(), full);
        // A checkpoint from another slope is rejected.
        let other = GrowthConfig { tau: Length::parse("0.5", 128).unwrap(), ..cfg(g) };
        assert!(matches!(growth_scan(&other, &sched, Some(&path)), Err(Error::Checkpoint(_))));
        assert!(matches!(growth_scan(&cfg(g), &[64, 300], Some(&path)), Err(Error::Checkpoint(_))));
        fs::remove_file(&path).unwrap();
    }

    #[test]
    fn schedule_checks() {
        let g = GridSpec::new(1, 1).unwrap();
        assert!(growth_scan(&cfg(g), &[10, 10], None).is_err());
        assert!(growth_scan(&cfg(g), &[2, 10], None).is_err());
        assert!(growth_scan(&cfg(g), &[], None).is_err());
    }

    fn synthetic(ns: &[u64], f: impl Fn(f64) -> f64) -> Vec<GrowthRecord> {
        let w = WitnessRecord { m: 0, a1: String::new(), a2: String::new(), x2: String::new() };
        ns.iter()
            .map(|&n| {
                let x = (n as f64).ln().powi(2);
                GrowthRecord::new(n, f(x), PhiFunction::Linear, w.clone()).unwrap()
            })
            .collect()
    }

    #[test]
    fn fit_rate_synthetic() {
        let ns = [100, 1000, 10_000, 100_000];
        let flat = fit_rate(&synthetic(&ns, |_| 3.0), PhiFunction::Linear).unwrap();
        assert!(flat.slope.abs() < 1e-12);
        let rs = synthetic(&ns, |x| x);
        let fit = fit_rate(&rs, PhiFunction::Linear).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
        for r in &rs {
            let llog = (r.n as f64).ln().ln();
            assert!((r.ratio - 1.0 / (llog * llog)).abs() < 1e-12);
        }
        let mut rev = rs.clone();
        rev.reverse();
        rev.swap(0, 2);
        assert_eq!(fit_rate(&rev, PhiFunction::Linear).unwrap(), fit);
        assert_eq!(fit_rate(&rs[..2], PhiFunction::Linear), Err(Error::TooFewRecords(2)));
    }

    #[test]
    fn full_square_halves() {
        let one = Length::one(128);
        let spec = OrbitSpec::new(alpha(), [FixedUnit::zero(128); 2], 2000);
        let c = box_vs_triangle(&spec, [one, one]).unwrap();
        for m in 1..=2000 {
            assert_eq!(c.d_box(m), 0.0);
            assert_eq!(c.d_lower(m) + c.d_upper(m) + c.diagonal_hits[m as usize - 1] as f64, 0.0);
        }
        assert_eq!(c.identity_failure(), None);
    }

    #[test]
    fn identity_with_diagonal_hits() {
        // alpha = (1/4, 3/8) itself lies on the diagonal of the (1/2, 3/4) box.
        let a = [FixedUnit::parse("0.25", 128).unwrap(), FixedUnit::parse("0.375", 128).unwrap()];
        let x = [Length::parse("0.5", 128).unwrap(), Length::parse("0.75", 128).unwrap()];
        let c = box_vs_triangle(&OrbitSpec::new(a, [FixedUnit::zero(128); 2], 64), x).unwrap();
        assert!(*c.diagonal_hits.last().unwrap() > 0);
        assert_eq!(c.identity_failure(), None);
        let c = box_vs_triangle(&OrbitSpec::new(alpha(), [FixedUnit::zero(128); 2], 10_000), x).unwrap();
        assert_eq!(c.identity_failure(), None);
        assert!(c.inequality_failures().is_empty());
    }

    #[test]
    fn smoothing_gap_small() {
        let t = Triangle::from_tau(golden(), Length::parse("0.75", 128).unwrap()).unwrap();
        let g = smoothing_gap(alpha(), [FixedUnit::zero(128); 2], t, 64, [9, 9, 33]).unwrap();
        assert!(g.dbar.is_finite() && g.scaled >= 0.0);
        assert!((g.dbar - g.d).abs() < 10.0);
    }
}
