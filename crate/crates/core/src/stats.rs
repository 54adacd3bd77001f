//! Confidence intervals for Monte-Carlo estimates.

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::beta::beta_reg;

/// Confidence level used by every Monte-Carlo estimate in the crate.
pub const CONFIDENCE: f64 = 0.99;

/// Exact two-sided Clopper–Pearson interval for `successes` out of `trials`.
///
/// Zero and full success counts use their closed forms, e.g. the upper limit
/// at zero successes is `1 - (alpha/2)^(1/trials)`.
pub fn clopper_pearson(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    assert!(trials > 0 && successes <= trials, "need 0 <= successes <= trials, trials > 0");
    let alpha = 1.0 - confidence;
    let x = successes as f64;
    let n = trials as f64;
    let lower = if successes == 0 {
        0.0
    } else if successes == trials {
        (alpha / 2.0).powf(1.0 / n)
    } else {
        beta_quantile(alpha / 2.0, x, n - x + 1.0)
    };
    let upper = if successes == trials {
        1.0
    } else if successes == 0 {
        1.0 - (alpha / 2.0).powf(1.0 / n)
    } else {
        beta_quantile(1.0 - alpha / 2.0, x + 1.0, n - x)
    };
    (lower, upper)
}

/// Inverse of the regularized incomplete beta function in `x`, by bisection.
fn beta_quantile(p: f64, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Two-sided standard normal critical value at `confidence`.
pub fn normal_critical(confidence: f64) -> f64 {
    Normal::standard().inverse_cdf(0.5 + confidence / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_successes_closed_form() {
        for trials in [1u64, 10, 1000] {
            let (lo, hi) = clopper_pearson(0, trials, 0.99);
            assert_eq!(lo, 0.0);
            assert!((hi - (1.0 - 0.005f64.powf(1.0 / trials as f64))).abs() < 1e-15);
        }
        let (lo, hi) = clopper_pearson(1, 1, 0.99);
        assert!((lo - 0.005).abs() < 1e-15 && hi == 1.0);
    }

    #[test]
    fn interior_matches_binomial_tail_definition() {
        // Lower limit p_L satisfies P(Bin(n, p_L) >= x) = alpha/2.
        let (n, x) = (50u64, 17u64);
        let (lo, hi) = clopper_pearson(x, n, 0.99);
        let binom_tail_ge = |p: f64| -> f64 {
            (x..=n)
                .map(|k| {
                    let lnc = (1..=k).map(|j| ((n - k + j) as f64 / j as f64).ln()).sum::<f64>();
                    (lnc + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
                })
                .sum()
        };
        let binom_cdf_le = |p: f64| 1.0 - binom_tail_ge(p) + {
            let k = x;
            let lnc = (1..=k).map(|j| ((n - k + j) as f64 / j as f64).ln()).sum::<f64>();
            (lnc + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
        };
        assert!((binom_tail_ge(lo) - 0.005).abs() < 1e-9);
        assert!((binom_cdf_le(hi) - 0.005).abs() < 1e-9);
        assert!(lo < 17.0 / 50.0 && 17.0 / 50.0 < hi);
    }

    #[test]
    fn critical_value() {
        assert!((normal_critical(0.99) - 2.5758293035489).abs() < 1e-9);
    }
}
