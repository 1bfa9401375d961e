//! Command-line front end for the `tdisc` binary.

mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::arithmetic::{cf_expand, convergent_gap_check, FixedUnit, Length};
use crate::error::Error;
use crate::experiments::{box_vs_triangle, default_schedule, fit_rate, growth_scan, GrowthConfig};
use crate::orbit::{discrepancy, discrepancy_max, GridScan, GridSpec, OrbitSpec, Point, Triangle};
use crate::smalldivisors::{
    cf_harmonic_sum, e_expected, harmonic_blocks, khintchine_solutions, large_term_sum, partial_quotient_sum_test, shell_classify, tail_sums_s1_s2, z_counts,
    FrequencyBox, PhiFunction, ShellSpec,
};
use crate::spectral::{dbar_quadrature, dbar_truncated, for_each_shell, n_dot_alpha, term_dump, Frequency, SpectralParams};

pub use output::{float, Cell, Format, Table};

/// Exit code for a bad command line or config file.
pub const EXIT_USAGE: i32 = 2;
/// Exit code for an engine failure.
pub const EXIT_ENGINE: i32 = 1;

#[derive(Parser, Debug, Clone, PartialEq)]
#[command(name = "tdisc", version, about = "Discrepancy of toral translations relative to triangles", args_override_self = true)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct Common {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format; each subcommand has its own default.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for the grid scans. Results do not depend on it.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Fraction bits of the fixed-point inputs (96..=128).
    #[arg(long, default_value_t = 128)]
    pub bits: u32,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct TriangleArgs {
    /// Legs `x1,x2` with 0 < x1 <= x2 <= 1.
    #[arg(long, conflicts_with_all = ["tau", "x2"])]
    pub x: Option<String>,
    /// Slope `x1/x2`; use together with --x2.
    #[arg(long, requires = "x2")]
    pub tau: Option<String>,
    /// Second leg, with `x1 = tau * x2` rounded to nearest.
    #[arg(long, requires = "tau")]
    pub x2: Option<String>,
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum Command {
    /// Discrepancy trace of one triangle along one orbit (CSV m, hits, D).
    Discrepancy {
        /// Rotation vector; presets sqrt2m1, sqrt3m1, golden, decimals or hex forms.
        #[arg(long, default_value = "sqrt2m1,sqrt3m1", allow_hyphen_values = true)]
        alpha: String,
        /// Starting point.
        #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
        a: String,
        #[command(flatten)]
        triangle: TriangleArgs,
        /// Orbit length N.
        #[arg(long)]
        n: u64,
        /// Only the maximum: JSON {N, maxAbsD, argm, a, x2}.
        #[arg(long)]
        max_only: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Maximal discrepancy over a grid of starting points and scales.
    Maxdisc {
        #[arg(long, default_value = "sqrt2m1,sqrt3m1", allow_hyphen_values = true)]
        alpha: String,
        /// Slope in (0, 1].
        #[arg(long, default_value = "golden")]
        tau: String,
        #[arg(long)]
        n: u64,
        /// Starting points per axis.
        #[arg(long, default_value_t = 16)]
        starts: u32,
        /// Triangle scales x2 = k/scales.
        #[arg(long, default_value_t = 32)]
        scales: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Fourier terms of the Fejér-averaged discrepancy (CSV), or its value.
    Spectral {
        #[arg(long, default_value = "sqrt2m1,sqrt3m1", allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
        a: String,
        #[command(flatten)]
        triangle: TriangleArgs,
        #[arg(long)]
        n: u64,
        /// Frequency cutoff K on max(|n1|, |n2|).
        #[arg(long, default_value_t = 64)]
        k: u64,
        /// Emit the truncated sum and its diagnostics instead of the terms.
        #[arg(long)]
        summary: bool,
        /// Also evaluate the quadrature route on a `q1,q2,q3` grid (with --summary).
        #[arg(long, requires = "summary")]
        quadrature: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Small-divisor sets: shell census, sums, Khintchine search, box counts.
    Smalldiv {
        #[arg(long, value_enum, default_value_t = SmallMode::Census)]
        mode: SmallMode,
        #[arg(long, default_value = "sqrt2m1,sqrt3m1", allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, default_value = "golden")]
        tau: String,
        /// N of the shell radii (census, large).
        #[arg(long, default_value_t = 64)]
        n: u64,
        /// Exponent E of the (log N)^E thresholds.
        #[arg(long, default_value_t = 2.0)]
        e: f64,
        /// Census range |n1|, |n2| <= radius.
        #[arg(long, default_value_t = 20)]
        radius: u64,
        /// Cutoff M of the tail sums.
        #[arg(long, default_value_t = 1000)]
        m: u64,
        /// Weight function for the Khintchine search.
        #[arg(long, default_value = "linear")]
        phi: String,
        /// Khintchine search bound on n1 and n2.
        #[arg(long, default_value_t = 1000)]
        bound: u64,
        /// Box `v1,v2,w1,w2` for zcount.
        #[arg(long, default_value = "-100,-10,100,10", allow_hyphen_values = true)]
        r#box: String,
        /// Constant C of the zcount threshold.
        #[arg(long, default_value_t = 4.0)]
        c: f64,
        /// Keep only |n1 tau - n2| >= 1/2 in the zcount box.
        #[arg(long)]
        far: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Continued fraction expansion, harmonic sums and partial quotient sums.
    Cfrac {
        #[arg(long, value_enum, default_value_t = CfMode::Expand)]
        mode: CfMode,
        #[arg(long, default_value = "golden")]
        tau: String,
        #[arg(long, default_value_t = 30)]
        depth: usize,
        /// Cutoff M of the harmonic sum.
        #[arg(long, default_value_t = 10_000)]
        m: u64,
        /// psi in the partial quotient ratio sum / (s psi(s)).
        #[arg(long, value_enum, default_value_t = Psi::Log)]
        psi: Psi,
        #[command(flatten)]
        common: Common,
    },
    /// Growth scan of the maximal discrepancy over a schedule of N.
    Growth {
        #[arg(long, default_value = "sqrt2m1,sqrt3m1", allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, default_value = "golden")]
        tau: String,
        /// Explicit increasing list of N; overrides --kmin/--kmax.
        #[arg(long)]
        schedule: Option<String>,
        /// Schedule N = 2^k for k in kmin..=kmax.
        #[arg(long, default_value_t = 10)]
        kmin: u32,
        #[arg(long, default_value_t = 27)]
        kmax: u32,
        #[arg(long, default_value_t = 16)]
        starts: u32,
        #[arg(long, default_value_t = 32)]
        scales: u32,
        #[arg(long, default_value = "power:0.1")]
        phi: String,
        /// JSON checkpoint, written after each N and resumed when present.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Box against its two diagonal triangles (CSV m, dBox, dLower, dUpper, diagonalHits).
    Boxcmp {
        #[arg(long, default_value = "sqrt2m1,sqrt3m1", allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
        a: String,
        /// Box sides `x1,x2` in (0, 1].
        #[arg(long)]
        x: String,
        #[arg(long)]
        n: u64,
        /// Only the identity and inequality checks.
        #[arg(long)]
        summary: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmallMode {
    Census,
    Large,
    Tails,
    Khintchine,
    Zcount,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfMode {
    Expand,
    Harmonic,
    Pqsum,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Psi {
    Log,
    One,
}

#[derive(Debug)]
pub enum CliError {
    /// `--help` or `--version` text.
    Help(String),
    Usage(String),
    Engine(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Help(_) => 0,
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Engine(_) => EXIT_ENGINE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Help(s) => write!(f, "{s}"),
            CliError::Usage(s) => write!(f, "usage error: {s}"),
            CliError::Engine(s) => write!(f, "error: {s}"),
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn engine(e: impl std::fmt::Display) -> CliError {
    CliError::Engine(e.to_string())
}

/// Expands a JSON config object into command-line arguments. The `command`
/// key names the subcommand; other keys become `--key value` with `_`
/// mapped to `-`, arrays joined by commas, `true` as a bare flag and `false`
/// or `null` omitted.
pub fn config_to_args(json: &str) -> Result<Vec<String>, CliError> {
    let v: Value = serde_json::from_str(json).map_err(|e| usage(format!("config: {e}")))?;
    let Value::Object(map) = v else {
        return Err(usage("config must be a JSON object"));
    };
    let command = match map.get("command") {
        Some(Value::String(s)) => s.clone(),
        _ => return Err(usage("config needs a string key \"command\"")),
    };
    let mut args = vec![command];
    for (k, v) in &map {
        if k == "command" {
            continue;
        }
        let flag = format!("--{}", k.replace('_', "-"));
        let scalar = |v: &Value| match v {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            _ => Err(usage(format!("config key {k:?}: unsupported value"))),
        };
        match v {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => args.push(flag),
            Value::Array(items) => {
                let parts: Result<Vec<String>, _> = items.iter().map(scalar).collect();
                args.push(flag);
                args.push(parts?.join(","));
            }
            other => {
                args.push(flag);
                args.push(scalar(other)?);
            }
        }
    }
    Ok(args)
}

/// Parses `tdisc <subcommand> ...` or `tdisc --config file.json [extra flags]`;
/// flags after the config file override its keys.
pub fn parse_config<I, S>(args: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let mut args: Vec<String> = args.into_iter().map(Into::into).collect();
    if args.get(1).map(String::as_str) == Some("--config") {
        let path = args.get(2).ok_or_else(|| usage("--config needs a file"))?;
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{path}: {e}")))?;
        let mut full = vec![args[0].clone()];
        full.extend(config_to_args(&text)?);
        full.extend(args.drain(3..));
        args = full;
    }
    let cfg = RunConfig::try_parse_from(&args).map_err(|e| {
        if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
            CliError::Help(e.to_string())
        } else {
            let text = e.to_string();
            let lines: Vec<&str> = text
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more information"))
                .filter(|l| !l.is_empty())
                .collect();
            usage(lines.join(" ").trim_start_matches("error: "))
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

fn parse_pair(s: &str, bits: u32, what: &str) -> Result<Point, CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(usage(format!("--{what} needs two comma-separated values")));
    }
    let u = |t: &str| FixedUnit::parse(t, bits).map_err(|e| usage(format!("--{what}: {e}")));
    Ok([u(parts[0])?, u(parts[1])?])
}

fn parse_length(s: &str, bits: u32, what: &str) -> Result<Length, CliError> {
    Length::parse(s, bits).map_err(|e| usage(format!("--{what}: {e}")))
}

fn parse_lengths(s: &str, bits: u32, what: &str) -> Result<[Length; 2], CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(usage(format!("--{what} needs two comma-separated values")));
    }
    Ok([parse_length(parts[0], bits, what)?, parse_length(parts[1], bits, what)?])
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str, len: Option<usize>) -> Result<Vec<T>, CliError> {
    let v: Result<Vec<T>, _> = s.split(',').map(|t| t.trim().parse::<T>()).collect();
    let v = v.map_err(|_| usage(format!("--{what}: cannot parse {s:?}")))?;
    if len.is_some_and(|l| l != v.len()) || v.is_empty() {
        return Err(usage(format!("--{what}: wrong number of values")));
    }
    Ok(v)
}

fn parse_phi(s: &str) -> Result<PhiFunction, CliError> {
    s.parse().map_err(|e| usage(format!("--phi: {e}")))
}

impl TriangleArgs {
    fn triangle(&self, bits: u32) -> Result<Triangle, CliError> {
        match (&self.x, &self.tau, &self.x2) {
            (Some(x), None, None) => {
                let [x1, x2] = parse_lengths(x, bits, "x")?;
                Triangle::new(x1, x2).map_err(usage)
            }
            (None, Some(t), Some(x2)) => Triangle::from_tau(parse_length(t, bits, "tau")?, parse_length(x2, bits, "x2")?).map_err(usage),
            _ => Err(usage("give the triangle as --x x1,x2 or as --tau with --x2")),
        }
    }
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Discrepancy { common, .. }
            | Command::Maxdisc { common, .. }
            | Command::Spectral { common, .. }
            | Command::Smalldiv { common, .. }
            | Command::Cfrac { common, .. }
            | Command::Growth { common, .. }
            | Command::Boxcmp { common, .. } => common,
        }
    }
}

fn schedule_of(schedule: &Option<String>, kmin: u32, kmax: u32) -> Result<Vec<u64>, CliError> {
    match schedule {
        Some(s) => parse_list(s, "schedule", None),
        None if kmin == 10 && kmax == 27 => Ok(default_schedule()),
        None => {
            if kmin > kmax || kmax > 62 || kmin < 2 {
                return Err(usage("need 2 <= kmin <= kmax <= 62"));
            }
            Ok((kmin..=kmax).map(|k| 1u64 << k).collect())
        }
    }
}

impl RunConfig {
    /// Checks every parameter against its engine's preconditions.
    pub fn validate(&self) -> Result<(), CliError> {
        let common = self.command.common();
        if !(crate::arithmetic::MIN_BITS..=crate::arithmetic::MAX_BITS).contains(&common.bits) {
            return Err(usage(Error::InvalidBits(common.bits)));
        }
        if common.threads == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        let bits = common.bits;
        match &self.command {
            Command::Discrepancy { alpha, a, triangle, .. } => {
                parse_pair(alpha, bits, "alpha")?;
                parse_pair(a, bits, "a")?;
                triangle.triangle(bits)?;
            }
            Command::Maxdisc { alpha, tau, starts, scales, .. } => {
                parse_pair(alpha, bits, "alpha")?;
                parse_length(tau, bits, "tau")?;
                GridSpec::new(*starts, *scales).map_err(usage)?;
            }
            Command::Spectral { alpha, a, triangle, n, k, quadrature, .. } => {
                parse_pair(alpha, bits, "alpha")?;
                parse_pair(a, bits, "a")?;
                let t = triangle.triangle(bits)?;
                SpectralParams::new(t, [FixedUnit::zero(bits); 2], [FixedUnit::zero(bits); 2], *n, *k).map_err(usage)?;
                if let Some(q) = quadrature {
                    let q: Vec<usize> = parse_list(q, "quadrature", Some(3))?;
                    if q.iter().any(|&v| v < 2) {
                        return Err(usage("--quadrature sizes must be at least 2"));
                    }
                }
            }
            Command::Smalldiv { mode, alpha, tau, n, e, m, phi, bound, r#box, c, .. } => {
                parse_pair(alpha, bits, "alpha")?;
                parse_length(tau, bits, "tau")?;
                match mode {
                    SmallMode::Census | SmallMode::Large => {
                        ShellSpec::new(*n, *e).map_err(usage)?;
                    }
                    SmallMode::Tails if *m < 2 => return Err(usage("--m must be at least 2")),
                    SmallMode::Khintchine => {
                        parse_phi(phi)?;
                        if *bound == 0 {
                            return Err(usage("--bound must be positive"));
                        }
                    }
                    SmallMode::Zcount => {
                        let v: Vec<f64> = parse_list(r#box, "box", Some(4))?;
                        FrequencyBox::new([v[0], v[1]], [v[2], v[3]], parse_length(tau, bits, "tau")?, false).map_err(usage)?;
                        if !(*c >= 1.0) {
                            return Err(usage("--c must be at least 1"));
                        }
                    }
                    _ => {}
                }
            }
            Command::Cfrac { tau, depth, m, .. } => {
                FixedUnit::parse(tau, bits).map_err(|e| usage(format!("--tau: {e}")))?;
                if *depth == 0 || *m == 0 {
                    return Err(usage("--depth and --m must be positive"));
                }
            }
            Command::Growth { alpha, tau, schedule, kmin, kmax, starts, scales, phi, .. } => {
                parse_pair(alpha, bits, "alpha")?;
                parse_length(tau, bits, "tau")?;
                let s = schedule_of(schedule, *kmin, *kmax)?;
                if s.windows(2).any(|w| w[0] >= w[1]) || s[0] < 3 {
                    return Err(usage("--schedule must be increasing with entries >= 3"));
                }
                GridSpec::new(*starts, *scales).map_err(usage)?;
                parse_phi(phi)?;
            }
            Command::Boxcmp { alpha, a, x, .. } => {
                parse_pair(alpha, bits, "alpha")?;
                parse_pair(a, bits, "a")?;
                parse_lengths(x, bits, "x")?;
            }
        }
        Ok(())
    }
}

fn hex_pair(p: Point) -> Value {
    Value::Array(vec![Value::String(p[0].to_string()), Value::String(p[1].to_string())])
}

/// Runs a validated config, writing to `out`.
pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let common = cfg.command.common();
    let bits = common.bits;
    match &cfg.command {
        Command::Discrepancy { alpha, a, triangle, n, max_only, .. } => {
            let spec = OrbitSpec::new(parse_pair(alpha, bits, "alpha")?, parse_pair(a, bits, "a")?, *n);
            let t = triangle.triangle(bits)?;
            if *max_only {
                let s = discrepancy_max(&spec, &t);
                let obj = vec![
                    ("N", Cell::U(*n).into()),
                    ("maxAbsD", float(s.max_abs)),
                    ("argm", Cell::U(s.argmax).into()),
                    ("a", hex_pair(spec.start)),
                    ("x2", Value::String(t.x2().to_string())),
                ];
                output::write_object(out, common.format.unwrap_or(Format::Json), obj)
            } else {
                let tr = discrepancy(&spec, &t);
                let mut tab = Table::new(out, common.format.unwrap_or(Format::Csv), &["m", "hits", "D"])?;
                for m in 1..=*n {
                    tab.row(&[Cell::U(m), Cell::U(tr.hits[m as usize - 1]), Cell::F(tr.value(m))])?;
                }
                tab.finish()
            }
        }
        Command::Maxdisc { alpha, tau, n, starts, scales, .. } => {
            let alpha = parse_pair(alpha, bits, "alpha")?;
            let mut scan =
                GridScan::new(alpha, parse_length(tau, bits, "tau")?, GridSpec::new(*starts, *scales).map_err(usage)?, common.threads).map_err(engine)?;
            let r = scan.advance_to(*n).map_err(engine)?;
            let obj = vec![
                ("N", Cell::U(*n).into()),
                ("maxAbsD", float(r.delta_hat)),
                ("argm", Cell::U(r.witness.m).into()),
                ("a", hex_pair(r.witness.a)),
                ("x2", Value::String(r.witness.x2.to_string())),
            ];
            output::write_object(out, common.format.unwrap_or(Format::Json), obj)
        }
        Command::Spectral { alpha, a, triangle, n, k, summary, quadrature, .. } => {
            let p = SpectralParams::new(triangle.triangle(bits)?, parse_pair(a, bits, "a")?, parse_pair(alpha, bits, "alpha")?, *n, *k).map_err(usage)?;
            if *summary {
                let d = dbar_truncated(&p);
                let mut obj = vec![
                    ("N", Cell::U(*n).into()),
                    ("K", Cell::U(*k).into()),
                    ("dbar", float(d.value)),
                    ("imagResidual", float(d.imag_residual)),
                    ("tailEstimate", float(d.tail_estimate())),
                    ("terms", Cell::U(d.terms).into()),
                    ("smallDivisors", Cell::U(d.small_divisors).into()),
                ];
                if let Some(q) = quadrature {
                    let q: Vec<usize> = parse_list(q, "quadrature", Some(3))?;
                    obj.push(("quadrature", float(dbar_quadrature(&p, [q[0], q[1], q[2]]).map_err(engine)?)));
                }
                output::write_object(out, common.format.unwrap_or(Format::Json), obj)
            } else {
                let mut tab = Table::new(out, common.format.unwrap_or(Format::Csv), &["n1", "n2", "n3", "reF1", "imF1", "reF2", "imF2", "divisorProduct"])?;
                for r in term_dump(&p) {
                    tab.row(&[
                        Cell::I(r.n.n1),
                        Cell::I(r.n.n2),
                        Cell::I(r.n.n3),
                        Cell::F(r.f1.re),
                        Cell::F(r.f1.im),
                        Cell::F(r.f2.re),
                        Cell::F(r.f2.im),
                        Cell::F(r.divisor_product),
                    ])?;
                }
                tab.finish()
            }
        }
        Command::Smalldiv { mode, alpha, tau, n, e, radius, m, phi, bound, r#box, c, far, .. } => {
            let alpha = parse_pair(alpha, bits, "alpha")?;
            let tau = parse_length(tau, bits, "tau")?;
            let fmt = common.format;
            match mode {
                SmallMode::Census => {
                    let spec = ShellSpec::new(*n, *e).map_err(usage)?;
                    let r = *radius as i64;
                    let mut tab = Table::new(out, fmt.unwrap_or(Format::Csv), &["n1", "n2", "n3", "divisorProduct", "shell"])?;
                    let mut rows = Vec::new();
                    for_each_shell(r as u64, |n1, n2, _| rows.push((n1, n2)));
                    for (n1, n2) in rows {
                        let f = Frequency::nearest(n1, n2, alpha);
                        let t = crate::smalldivisors::slope_offset(n1, n2, tau).to_f64();
                        let th = n_dot_alpha(n1, n2, alpha).add_int(-(f.n3 as i128)).to_f64();
                        let dp = n1.unsigned_abs().max(1) as f64 * t.abs() * th.abs();
                        tab.row(&[Cell::I(n1), Cell::I(n2), Cell::I(f.n3), Cell::F(dp), Cell::S(shell_classify(f, alpha, tau, &spec).name().into())])?;
                    }
                    tab.finish()
                }
                SmallMode::Large => {
                    let spec = ShellSpec::new(*n, *e).map_err(usage)?;
                    let s = large_term_sum(alpha, tau, &spec).map_err(engine)?;
                    let obj = vec![("N", Cell::U(*n).into()), ("E", float(*e)), ("sum", float(s.sum)), ("count", Cell::U(s.count).into())];
                    output::write_object(out, fmt.unwrap_or(Format::Json), obj)
                }
                SmallMode::Tails => {
                    let (s1, s2) = tail_sums_s1_s2(alpha, tau, *m).map_err(engine)?;
                    output::write_object(out, fmt.unwrap_or(Format::Json), vec![("M", Cell::U(*m).into()), ("S1", float(s1)), ("S2", float(s2))])
                }
                SmallMode::Khintchine => {
                    let sols = khintchine_solutions(alpha, parse_phi(phi)?, *bound).map_err(engine)?;
                    let mut tab = Table::new(out, fmt.unwrap_or(Format::Csv), &["n1", "n2"])?;
                    for (a, b) in sols {
                        tab.row(&[Cell::U(a), Cell::U(b)])?;
                    }
                    tab.finish()
                }
                SmallMode::Zcount => {
                    let v: Vec<f64> = parse_list(r#box, "box", Some(4))?;
                    let b = FrequencyBox::new([v[0], v[1]], [v[2], v[3]], tau, *far).map_err(usage)?;
                    let z = z_counts(alpha, *c, &b).map_err(engine)?;
                    let ev = e_expected(*c, &b).map_err(engine)?;
                    let obj = vec![
                        ("C", float(*c)),
                        ("zCount", Cell::U(z.lower).into()),
                        ("upper", Cell::U(z.upper).into()),
                        ("middle", Cell::U(z.middle).into()),
                        ("zero", Cell::U(z.zero).into()),
                        ("expected", float(ev)),
                    ];
                    output::write_object(out, fmt.unwrap_or(Format::Json), obj)
                }
            }
        }
        Command::Cfrac { mode, tau, depth, m, psi, .. } => {
            let u = FixedUnit::parse(tau, bits).map_err(usage)?;
            let fmt = common.format;
            match mode {
                CfMode::Expand => {
                    let cf = cf_expand(u, *depth).map_err(engine)?;
                    let gaps = convergent_gap_check(&cf, u);
                    let mut tab = Table::new(out, fmt.unwrap_or(Format::Csv), &["j", "a", "p", "q", "gapOk"])?;
                    for j in 1..=cf.depth() {
                        let (p, q) = cf.convergents[j];
                        let g = gaps.get(j - 1).map_or(Cell::Null, |&b| Cell::B(b));
                        tab.row(&[Cell::U(j as u64), Cell::W(cf.quotients[j - 1]), Cell::W(p), Cell::W(q), g])?;
                    }
                    tab.finish()
                }
                CfMode::Harmonic => {
                    let mut tab = Table::new(out, fmt.unwrap_or(Format::Csv), &["q", "qNext", "blockSum", "bound"])?;
                    for b in harmonic_blocks(u, *m).map_err(engine)? {
                        tab.row(&[Cell::W(b.q), Cell::W(b.q_next), Cell::F(b.block_sum), Cell::F(b.bound)])?;
                    }
                    tab.row(&[Cell::S("total".into()), Cell::U(*m), Cell::F(cf_harmonic_sum(u, *m).map_err(engine)?), Cell::Null])?;
                    tab.finish()
                }
                CfMode::Pqsum => {
                    let f = match psi {
                        Psi::Log => |s: f64| s.ln().max(1.0),
                        Psi::One => |_: f64| 1.0,
                    };
                    let (sum, ratio) = partial_quotient_sum_test(u, f, *depth).map_err(engine)?;
                    output::write_object(
                        out,
                        fmt.unwrap_or(Format::Json),
                        vec![("s", Cell::U(*depth as u64).into()), ("sum", Cell::W(sum).into()), ("ratio", float(ratio))],
                    )
                }
            }
        }
        Command::Growth { alpha, tau, schedule, kmin, kmax, starts, scales, phi, checkpoint, .. } => {
            let phi = parse_phi(phi)?;
            let g = GrowthConfig {
                alpha: parse_pair(alpha, bits, "alpha")?,
                tau: parse_length(tau, bits, "tau")?,
                grid: GridSpec::new(*starts, *scales).map_err(usage)?,
                phi,
                threads: common.threads,
            };
            let sched = schedule_of(schedule, *kmin, *kmax)?;
            let recs = growth_scan(&g, &sched, checkpoint.as_deref()).map_err(engine)?;
            let header = ["N", "deltaHat", "logN2", "phiName", "phiTerm", "ratio", "m", "a1", "a2", "x2"];
            let rows: Vec<Vec<Cell>> = recs
                .iter()
                .map(|r| {
                    vec![
                        Cell::U(r.n),
                        Cell::F(r.delta_hat),
                        Cell::F(r.log_n2),
                        Cell::S(r.phi_name.clone()),
                        Cell::F(r.phi_term),
                        Cell::F(r.ratio),
                        Cell::U(r.witness.m),
                        Cell::S(r.witness.a1.clone()),
                        Cell::S(r.witness.a2.clone()),
                        Cell::S(r.witness.x2.clone()),
                    ]
                })
                .collect();
            match common.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut tab = Table::new(out, Format::Csv, &header)?;
                    for r in &rows {
                        tab.row(r)?;
                    }
                    tab.finish()
                }
                Format::Json => {
                    let records = Value::Array(rows.iter().map(|r| output::row_object(&header, r)).collect());
                    let mut obj = vec![("records", records)];
                    if recs.len() >= 3 {
                        let f = fit_rate(&recs, phi).map_err(engine)?;
                        obj.push((
                            "fit",
                            output::object(vec![("maxRatio", float(f.max_ratio)), ("medianRatio", float(f.median_ratio)), ("slope", float(f.slope))]),
                        ));
                    }
                    output::write_object(out, Format::Json, obj)
                }
            }
        }
        Command::Boxcmp { alpha, a, x, n, summary, .. } => {
            let spec = OrbitSpec::new(parse_pair(alpha, bits, "alpha")?, parse_pair(a, bits, "a")?, *n);
            let c = box_vs_triangle(&spec, parse_lengths(x, bits, "x")?).map_err(engine)?;
            if *summary {
                let fails = c.inequality_failures();
                let obj = vec![
                    ("N", Cell::U(*n).into()),
                    ("identityHolds", Value::Bool(c.identity_failure().is_none())),
                    ("inequalityFailures", Cell::U(fails.len() as u64).into()),
                    ("diagonalHits", Cell::U(c.diagonal_hits.last().copied().unwrap_or(0)).into()),
                ];
                output::write_object(out, common.format.unwrap_or(Format::Json), obj)
            } else {
                let mut tab = Table::new(out, common.format.unwrap_or(Format::Csv), &["m", "dBox", "dLower", "dUpper", "diagonalHits"])?;
                for m in 1..=*n {
                    tab.row(&[Cell::U(m), Cell::F(c.d_box(m)), Cell::F(c.d_lower(m)), Cell::F(c.d_upper(m)), Cell::U(c.diagonal_hits[m as usize - 1])])?;
                }
                tab.finish()
            }
        }
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args(args: Vec<String>) -> i32 {
    let cfg = match parse_config(args) {
        Ok(c) => c,
        Err(CliError::Help(msg)) => {
            print!("{msg}");
            return 0;
        }
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    let result = match &cfg.command.common().out {
        Some(path) => match File::create(path) {
            Ok(f) => {
                let mut w = BufWriter::new(f);
                run(&cfg, &mut w).and_then(|_| w.flush().map_err(engine))
            }
            Err(e) => Err(engine(format!("{}: {e}", path.display()))),
        },
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            run(&cfg, &mut w).and_then(|_| w.flush().map_err(engine))
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
