use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Positive increasing weight functions for the rate `(log N)^2 phi(log log N)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhiFunction {
    /// `n^(1 + eps)`, convergent.
    Power(f64),
    /// `n (log(n + e))^2`, convergent.
    LogSquared,
    /// `n`, divergent.
    Linear,
    /// `n log(n + e)`, divergent.
    NLog,
}

impl PhiFunction {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            PhiFunction::Power(eps) => x.signum() * x.abs().powf(1.0 + eps),
            PhiFunction::LogSquared => x * (x + E).ln().powi(2),
            PhiFunction::Linear => x,
            PhiFunction::NLog => x * (x + E).ln(),
        }
    }

    /// Whether `sum 1/phi(n)` converges.
    pub fn series_convergent(self) -> bool {
        matches!(self, PhiFunction::Power(_) | PhiFunction::LogSquared)
    }

    /// Cauchy condensation check: the series converges iff `sum 2^k/phi(2^k)`
    /// does. Returns `k 2^k/phi(2^k)` at `k = 100` and `k = 400`; for the
    /// builtins this tends to zero exactly when the series converges.
    pub fn condensed_terms(self) -> (f64, f64) {
        let c = |k: i32| k as f64 * 2f64.powi(k) / self.eval(2f64.powi(k));
        (c(100), c(400))
    }

    pub fn condensation_suggests_convergence(self) -> bool {
        let (a, b) = self.condensed_terms();
        b < 0.5 * a
    }
}

impl fmt::Display for PhiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhiFunction::Power(eps) => write!(f, "power:{eps}"),
            PhiFunction::LogSquared => write!(f, "nlog2"),
            PhiFunction::Linear => write!(f, "linear"),
            PhiFunction::NLog => write!(f, "nlog"),
        }
    }
}

impl FromStr for PhiFunction {
    type Err = Error;

    /// `power[:eps]` (default eps 0.1), `nlog2`, `linear`, `nlog`.
    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::Parse { what: "phi function", input: s.to_string() };
        match s.trim() {
            "linear" => Ok(PhiFunction::Linear),
            "nlog" => Ok(PhiFunction::NLog),
            "nlog2" => Ok(PhiFunction::LogSquared),
            "power" => Ok(PhiFunction::Power(0.1)),
            t => {
                let eps: f64 = t.strip_prefix("power:").ok_or_else(err)?.parse().map_err(|_| err())?;
                if !(eps > 0.0 && eps.is_finite()) {
                    return Err(err());
                }
                Ok(PhiFunction::Power(eps))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALL: [PhiFunction; 4] = [PhiFunction::Power(0.1), PhiFunction::LogSquared, PhiFunction::Linear, PhiFunction::NLog];

    #[test]
    fn builtins_increase() {
        for phi in ALL {
            let mut last = phi.eval(0.01);
            for i in 2..2000 {
                let v = phi.eval(i as f64 * 0.01);
                assert!(v > last, "{phi} at {i}");
                last = v;
            }
        }
    }

    #[test]
    fn declared_convergence_matches_condensation() {
        for phi in ALL {
            assert_eq!(phi.series_convergent(), phi.condensation_suggests_convergence(), "{phi}");
        }
    }

    #[test]
    fn names_round_trip() {
        for phi in ALL {
            assert_eq!(phi.to_string().parse::<PhiFunction>().unwrap(), phi);
        }
        assert_eq!("power".parse::<PhiFunction>().unwrap(), PhiFunction::Power(0.1));
        assert!("power:-1".parse::<PhiFunction>().is_err());
        assert!("cubic".parse::<PhiFunction>().is_err());
    }
}
