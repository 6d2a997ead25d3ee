use serde::{Deserialize, Serialize};

use super::EvalError;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959964;

/// Wilson score interval for `successes` out of `n` trials, clamped to [0, 1].
///
/// `n` may be fractional; the F1 interval uses an effective trial count.
pub fn wilson_interval(successes: f64, n: f64, z: f64) -> Result<(f64, f64), EvalError> {
    if !(n > 0.0) || !n.is_finite() {
        return Err(EvalError::NonPositiveTrials(n));
    }
    if !(0.0..=n).contains(&successes) {
        return Err(EvalError::SuccessesOutOfRange { successes, n });
    }
    let p = successes / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lower = (center - half).clamp(0.0, 1.0);
    let upper = (center + half).clamp(0.0, 1.0);
    // Guard the containment invariant against rounding at the boundaries.
    Ok((lower.min(p), upper.max(p)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricWithCI {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub z: f64,
}

impl MetricWithCI {
    pub(crate) fn wilson(successes: f64, n: f64, z: f64) -> Option<Self> {
        let (lower, upper) = wilson_interval(successes, n, z).ok()?;
        Some(Self {
            point: successes / n,
            lower,
            upper,
            z,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frozen_reference_values() {
        // 40-digit evaluations of the closed form with z = 1.959964.
        let (lo, hi) = wilson_interval(100.0, 200.0, Z_95).unwrap();
        assert!(((lo + hi) / 2.0 - 0.5).abs() < 1e-12);
        assert!((lo - 0.43136085907267826).abs() < 1e-12);
        assert!((hi - 0.56863914092732174).abs() < 1e-12);

        let (lo, hi) = wilson_interval(100.0, 100.0, Z_95).unwrap();
        assert!((lo - 0.96300650123100373).abs() < 1e-12);
        assert_eq!(hi, 1.0);

        let (lo, hi) = wilson_interval(0.0, 10.0, Z_95).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - 0.27753280302605772).abs() < 1e-12);

        let (lo, hi) = wilson_interval(2.25, 7.5, Z_95).unwrap();
        assert!((lo - 0.092572953758212161).abs() < 1e-12);
        assert!((hi - 0.64291081147877055).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(wilson_interval(0.0, 0.0, Z_95), Err(EvalError::NonPositiveTrials(_))));
        assert!(matches!(wilson_interval(0.0, -1.0, Z_95), Err(EvalError::NonPositiveTrials(_))));
        assert!(wilson_interval(3.0, 2.0, Z_95).is_err());
        assert!(wilson_interval(-1.0, 2.0, Z_95).is_err());
    }
}
