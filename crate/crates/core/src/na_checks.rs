//! Negative-dependence diagnostics for multinomial counts `C_i` and the
//! occupancy indicators `Y_i = 1[C_i = 0]`.

use serde::{Deserialize, Serialize};

use crate::distributions::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::real::{survival, Real};
use crate::sampling::{run_chunked, AliasTable};
use crate::stats::{normal_critical, CONFIDENCE};

fn check_pair<T: Real>(dist: &DiscreteDistribution<T>, i: usize, j: usize) -> Result<()> {
    let len = dist.len();
    for index in [i, j] {
        if index >= len {
            return Err(Error::IndexOutOfRange { index, len });
        }
    }
    if i == j {
        return Err(Error::RequiresDistinct);
    }
    Ok(())
}

/// `Cov(Y_i, Y_j) = (1 - w_i - w_j)^n - (1 - w_i)^n (1 - w_j)^n`.
pub fn occupancy_cov_exact<T: Real>(dist: &DiscreteDistribution<T>, n: u64, i: usize, j: usize) -> Result<T> {
    check_pair(dist, i, j)?;
    let (wi, wj) = (dist.weights()[i], dist.weights()[j]);
    Ok(survival(wi + wj, n) - survival(wi, n) * survival(wj, n))
}

/// `Cov(C_i, C_j) = -n w_i w_j`.
pub fn count_cov_exact<T: Real>(dist: &DiscreteDistribution<T>, n: u64, i: usize, j: usize) -> Result<T> {
    check_pair(dist, i, j)?;
    Ok(-T::lit(n as f64) * dist.weights()[i] * dist.weights()[j])
}

/// Coordinate-wise non-decreasing functions of a block of counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "threshold")]
pub enum MonotoneFn {
    Sum,
    Max,
    /// `1[Σ C >= threshold]`
    IndicatorAbove(u64),
    Constant,
}

impl MonotoneFn {
    pub fn eval(self, counts: &[u64]) -> f64 {
        match self {
            MonotoneFn::Sum => counts.iter().sum::<u64>() as f64,
            MonotoneFn::Max => counts.iter().copied().max().unwrap_or(0) as f64,
            MonotoneFn::IndicatorAbove(t) => (counts.iter().sum::<u64>() >= t) as u8 as f64,
            MonotoneFn::Constant => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Violation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NaReport<T: Real> {
    pub set_a: Vec<usize>,
    pub set_b: Vec<usize>,
    pub f: MonotoneFn,
    pub g: MonotoneFn,
    /// Closed form where one is known (sums of counts, constants).
    pub exact_cov: Option<T>,
    pub empirical_cov: T,
    pub ci_low: T,
    pub ci_high: T,
    pub trials: u64,
    pub verdict: Verdict,
}

/// Monte-Carlo estimate of `Cov(f(C_A), g(C_B))` for disjoint `A`, `B`,
/// with a 99% normal-approximation interval from the plug-in variance of
/// `(f - f̄)(g - ḡ)`. A violation is reported only when the whole interval
/// lies above zero.
#[allow(clippy::too_many_arguments)]
pub fn na_monotone_test<T: Real>(
    dist: &DiscreteDistribution<T>,
    n: u64,
    set_a: &[usize],
    set_b: &[usize],
    f: MonotoneFn,
    g: MonotoneFn,
    trials: u64,
    seed: u64,
) -> Result<NaReport<T>> {
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    let len = dist.len();
    // Slot of each index in the concatenated block [A, B].
    let mut slot = vec![usize::MAX; len];
    for (k, &index) in set_a.iter().chain(set_b).enumerate() {
        if index >= len {
            return Err(Error::IndexOutOfRange { index, len });
        }
        if slot[index] != usize::MAX {
            return Err(Error::OverlappingSets);
        }
        slot[index] = k;
    }

    let mut raw: Vec<f64> = dist.weights().iter().map(|w| w.as_f64()).collect();
    let deficit = 1.0 - dist.total_mass().as_f64();
    if deficit > 0.0 {
        raw.push(deficit);
        slot.push(usize::MAX);
    }
    let table = AliasTable::new(&raw);
    let split = set_a.len();
    let block = split + set_b.len();

    let samples: Vec<Vec<(f64, f64)>> = run_chunked(trials, seed, |rng, count| {
        let mut counts = vec![0u64; block];
        (0..count)
            .map(|_| {
                counts.iter_mut().for_each(|c| *c = 0);
                for _ in 0..n {
                    let s = slot[table.sample(rng)];
                    if s != usize::MAX {
                        counts[s] += 1;
                    }
                }
                (f.eval(&counts[..split]), g.eval(&counts[split..]))
            })
            .collect()
    });

    let t = trials as f64;
    let (mut mf, mut mg) = (0.0, 0.0);
    for &(a, b) in samples.iter().flatten() {
        mf += a;
        mg += b;
    }
    mf /= t;
    mg /= t;
    let cov = samples.iter().flatten().map(|&(a, b)| (a - mf) * (b - mg)).sum::<f64>() / t;
    let spread = samples.iter().flatten().map(|&(a, b)| ((a - mf) * (b - mg) - cov).powi(2)).sum::<f64>() / t;
    let half = normal_critical(CONFIDENCE) * (spread / t).sqrt();

    let mass = |set: &[usize]| set.iter().map(|&i| dist.weights()[i]).sum::<T>();
    let exact_cov = match (f, g) {
        (MonotoneFn::Constant, _) | (_, MonotoneFn::Constant) => Some(T::zero()),
        (MonotoneFn::Sum, MonotoneFn::Sum) => Some(-T::lit(n as f64) * mass(set_a) * mass(set_b)),
        _ => None,
    };
    let ci_low = cov - half;
    Ok(NaReport {
        set_a: set_a.to_vec(),
        set_b: set_b.to_vec(),
        f,
        g,
        exact_cov,
        empirical_cov: T::lit(cov),
        ci_low: T::lit(ci_low),
        ci_high: T::lit(cov + half),
        trials,
        verdict: if ci_low > 0.0 { Verdict::Violation } else { Verdict::Consistent },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Family;

    type D = DiscreteDistribution<f64>;

    #[test]
    fn occupancy_examples() {
        let u2 = D::uniform(2).unwrap();
        assert!((occupancy_cov_exact(&u2, 1, 0, 1).unwrap() + 0.25).abs() < 1e-15);
        assert_eq!(occupancy_cov_exact(&u2, 0, 0, 1).unwrap(), 0.0);
        let d = D::new(vec![0.5, 0.4999, 0.0001]).unwrap();
        let c = occupancy_cov_exact(&d, 40, 0, 1).unwrap();
        assert!(c < 0.0);
        assert!((c + 0.5f64.powi(40) * 0.5001f64.powi(40)).abs() < 1e-20);
    }

    #[test]
    fn count_examples() {
        let u3 = D::uniform(3).unwrap();
        assert!((count_cov_exact(&u3, 4, 0, 1).unwrap() + 4.0 / 9.0).abs() < 1e-15);
        assert_eq!(count_cov_exact(&u3, 0, 0, 1).unwrap(), 0.0);
        assert_eq!(count_cov_exact(&u3, 4, 1, 1), Err(Error::RequiresDistinct));
        assert_eq!(count_cov_exact(&u3, 4, 0, 3), Err(Error::IndexOutOfRange { index: 3, len: 3 }));
    }

    #[test]
    fn sum_sum_matches_exact_covariance() {
        let u3 = D::uniform(3).unwrap();
        let r = na_monotone_test(&u3, 4, &[0], &[1], MonotoneFn::Sum, MonotoneFn::Sum, 200_000, 11).unwrap();
        assert!((r.empirical_cov + 4.0 / 9.0).abs() < 0.02);
        assert!(r.ci_low <= -4.0 / 9.0 && -4.0 / 9.0 <= r.ci_high);
        assert_eq!(r.exact_cov, Some(-4.0 / 9.0));
        assert_eq!(r.verdict, Verdict::Consistent);
    }

    #[test]
    fn constant_function_has_zero_covariance() {
        let u3 = D::uniform(3).unwrap();
        let r = na_monotone_test(&u3, 4, &[0], &[], MonotoneFn::Max, MonotoneFn::Constant, 1000, 1).unwrap();
        assert_eq!(r.empirical_cov, 0.0);
        assert_eq!(r.verdict, Verdict::Consistent);
    }

    #[test]
    fn high_count_indicators_on_zipf_halves() {
        let z = D::family(Family::Zipf, 10, 1.0).unwrap();
        let a: Vec<usize> = (0..5).collect();
        let b: Vec<usize> = (5..10).collect();
        let r = na_monotone_test(&z, 50, &a, &b, MonotoneFn::IndicatorAbove(40), MonotoneFn::IndicatorAbove(10), 100_000, 4)
            .unwrap();
        assert_eq!(r.verdict, Verdict::Consistent);
        assert!(r.ci_high < 1e-3);
    }

    #[test]
    fn overlapping_sets_rejected() {
        let u3 = D::uniform(3).unwrap();
        let r = na_monotone_test(&u3, 4, &[0, 1], &[1], MonotoneFn::Sum, MonotoneFn::Sum, 10, 1);
        assert_eq!(r, Err(Error::OverlappingSets));
    }

    #[test]
    fn catalog_serializes_with_threshold() {
        let text = serde_json::to_string(&MonotoneFn::IndicatorAbove(3)).unwrap();
        assert_eq!(text, r#"{"kind":"indicator_above","threshold":3}"#);
        assert_eq!(serde_json::to_string(&MonotoneFn::Sum).unwrap(), r#"{"kind":"sum"}"#);
    }
}
