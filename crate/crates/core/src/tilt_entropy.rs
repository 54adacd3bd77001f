//! Chernoff entropy, exponential tilting and KL divergence on finite supports,
//! plus a numeric check that coarse binning cannot increase the entropy.

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize};

use crate::distributions::PartitionSpec;
use crate::error::{Error, Result};
use crate::real::Real;

/// Slack used when comparing entropies and divergences.
pub const ENTROPY_SLACK: f64 = 1e-9;

/// A probability mass function on finitely many real points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FinitePmf<T: Real> {
    values: Vec<T>,
    probs: Vec<T>,
}

impl<T: Real> FinitePmf<T> {
    /// `values` must be finite and strictly increasing; `probs` positive and
    /// summing to one (sums within 1e-6 are renormalized).
    pub fn new(values: Vec<T>, probs: Vec<T>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::InvalidPmf(format!("{} values but {} probabilities", values.len(), probs.len())));
        }
        if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidPmf("values must be finite and strictly increasing".into()));
        }
        if probs.iter().any(|&p| !(p > T::zero()) || !p.is_finite()) {
            return Err(Error::InvalidPmf("probabilities must be positive".into()));
        }
        let sum: T = probs.iter().copied().sum();
        if (sum - T::one()).abs() > T::lit(1e-6) {
            return Err(Error::InvalidPmf(format!("probabilities sum to {sum}")));
        }
        let probs = probs.into_iter().map(|p| p / sum).collect();
        Ok(Self { values, probs })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> T {
        self.values.iter().zip(&self.probs).map(|(&v, &p)| v * p).sum()
    }

    pub fn min_value(&self) -> T {
        self.values[0]
    }

    pub fn max_value(&self) -> T {
        *self.values.last().unwrap()
    }

    /// Exact `P(X >= x)`.
    pub fn tail_at_least(&self, x: T) -> T {
        self.values.iter().zip(&self.probs).filter(|(&v, _)| v >= x).map(|(_, &p)| p).sum()
    }

    /// Coarse variable: one point per group, located at the group's
    /// conditional mean. Groups must be contiguous in value order.
    pub fn coarsen(&self, spec: &PartitionSpec) -> Result<Self> {
        check_contiguous(spec, self.len())?;
        let probs = spec.aggregate(&self.probs);
        let values = spec
            .groups
            .iter()
            .zip(&probs)
            .map(|(g, &pg)| g.iter().map(|&i| self.values[i] * self.probs[i]).sum::<T>() / pg)
            .collect();
        Self::new(values, probs)
    }
}

#[derive(Deserialize)]
struct PmfDoc {
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl<'de, T: Real> Deserialize<'de> for FinitePmf<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = PmfDoc::deserialize(deserializer)?;
        FinitePmf::new(doc.values.into_iter().map(T::lit).collect(), doc.probs.into_iter().map(T::lit).collect())
            .map_err(de::Error::custom)
    }
}

fn check_contiguous(spec: &PartitionSpec, len: usize) -> Result<()> {
    spec.validate(len)?;
    if !spec.is_contiguous() {
        return Err(Error::BadPartition("groups must be contiguous runs in value order".into()));
    }
    Ok(())
}

/// `ln E[e^{λX}]`, evaluated with a max shift.
pub fn log_mgf<T: Real>(pmf: &FinitePmf<T>, lambda: T) -> T {
    let shift = pmf.values.iter().map(|&v| lambda * v).fold(T::neg_infinity(), T::max);
    let sum: T = pmf.values.iter().zip(&pmf.probs).map(|(&v, &p)| p * (lambda * v - shift).exp()).sum();
    shift + sum.ln()
}

/// Tilted probabilities `p_i e^{λ x_i} / Z(λ)`. `λ = +∞` gives the point
/// mass at the largest value.
fn tilted_probs<T: Real>(pmf: &FinitePmf<T>, lambda: T) -> Vec<T> {
    if lambda == T::infinity() {
        let mut out = vec![T::zero(); pmf.len()];
        *out.last_mut().unwrap() = T::one();
        return out;
    }
    let shift = pmf.values.iter().map(|&v| lambda * v).fold(T::neg_infinity(), T::max);
    let raw: Vec<T> = pmf.values.iter().zip(&pmf.probs).map(|(&v, &p)| p * (lambda * v - shift).exp()).collect();
    let z: T = raw.iter().copied().sum();
    raw.into_iter().map(|r| r / z).collect()
}

fn tilted_mean<T: Real>(pmf: &FinitePmf<T>, lambda: T) -> T {
    tilted_probs(pmf, lambda).iter().zip(&pmf.values).map(|(&p, &v)| p * v).sum()
}

/// Exponentially tilted pmf; `λ = 0` is the identity.
pub fn tilt<T: Real>(pmf: &FinitePmf<T>, lambda: T) -> FinitePmf<T> {
    let probs = tilted_probs(pmf, lambda);
    // Extreme tilts underflow some probabilities to zero; keep them positive.
    let probs = probs.into_iter().map(|p| p.max(T::min_positive_value())).collect();
    FinitePmf { values: pmf.values.clone(), probs }
}

/// Chernoff entropy with the maximizing tilt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChernoffEntropy<T: Real> {
    pub value: T,
    /// Optimal `λ >= 0`; infinite when `x` is the largest support point.
    pub lambda: T,
}

/// `S(X, x) = sup_{λ >= 0} {λ x - ln E[e^{λX}]}` along with its maximizer.
///
/// Returns 0 for `x <= E[X]` and `-ln P(X = max)` at `x = max`; larger `x`
/// is an error. The maximizer is the root of `E_λ[X] = x`, found by
/// bisection on `[0, 700 / (max - min)]`.
pub fn chernoff_optimum<T: Real>(pmf: &FinitePmf<T>, x: T) -> Result<ChernoffEntropy<T>> {
    let max = pmf.max_value();
    if x > max || !x.is_finite() {
        return Err(Error::XOutsideSupportHull { x: x.as_f64(), max: max.as_f64() });
    }
    if x == max {
        let p_max = *pmf.probs.last().unwrap();
        return Ok(ChernoffEntropy { value: -p_max.ln(), lambda: T::infinity() });
    }
    if x <= pmf.mean() {
        return Ok(ChernoffEntropy { value: T::zero(), lambda: T::zero() });
    }
    let range = max - pmf.min_value();
    let (mut lo, mut hi) = (T::zero(), T::lit(700.0) / range);
    if tilted_mean(pmf, hi) < x {
        lo = hi;
    } else {
        for _ in 0..200 {
            let mid = (lo + hi) / T::lit(2.0);
            if mid <= lo || mid >= hi || hi - lo <= T::lit(1e-12) * hi.max(T::one()) {
                break;
            }
            if tilted_mean(pmf, mid) < x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let lambda = (lo + hi) / T::lit(2.0);
    let value = (lambda * x - log_mgf(pmf, lambda)).max(T::zero());
    Ok(ChernoffEntropy { value, lambda })
}

pub fn chernoff_entropy<T: Real>(pmf: &FinitePmf<T>, x: T) -> Result<T> {
    chernoff_optimum(pmf, x).map(|c| c.value)
}

/// `Σ p_i ln(p_i / q_i)` over raw probability vectors, with `0 ln 0 = 0`.
pub fn kl_probs<T: Real>(p: &[T], q: &[T]) -> Result<T> {
    if p.len() != q.len() {
        return Err(Error::SupportMismatch);
    }
    let mut total = T::zero();
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > T::zero() {
            if !(qi > T::zero()) {
                return Ok(T::infinity());
            }
            total = total + pi * (pi / qi).ln();
        }
    }
    Ok(total.max(T::zero()))
}

/// `KL(p ‖ q)` for pmfs on the same support.
pub fn kl<T: Real>(p: &FinitePmf<T>, q: &FinitePmf<T>) -> Result<T> {
    if p.values != q.values {
        return Err(Error::SupportMismatch);
    }
    kl_probs(&p.probs, &q.probs)
}

/// Outcome of [`check_partition_monotonicity`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionReport<T: Real> {
    pub x: T,
    /// `S(X, x)`
    pub entropy: T,
    /// Maximizing tilt `λ(x)`; `None` when infinite.
    pub lambda: Option<T>,
    /// `KL(p^G_{λ(x)} ‖ p^G)`: the coarse entropy at the fine optimizer.
    pub coarse_entropy: T,
    /// `S(X^G, x)` for the conditional-mean coarse variable; `None` when
    /// `x` lies beyond its largest point (infinite entropy).
    pub coarse_chernoff_entropy: Option<T>,
    /// `KL(p ‖ p_λ)` and its coarse counterpart.
    pub divergence: T,
    pub coarse_divergence: T,
    /// Exact `P(X >= x)`.
    pub tail: T,
    /// `S(X, x) >= KL(p^G_λ ‖ p^G) - slack`
    pub entropy_monotone: bool,
    /// `KL(p^G ‖ p^G_λ) <= KL(p ‖ p_λ) + slack`
    pub information_monotone: bool,
    /// `exp(-S(X, x)) >= P(X >= x)`
    pub chernoff_valid: bool,
}

impl<T: Real> PartitionReport<T> {
    pub fn holds(&self) -> bool {
        self.entropy_monotone && self.information_monotone && self.chernoff_valid
    }
}

/// Compares the Chernoff entropy of `pmf` at `x` with its coarse-binned
/// counterpart under `spec`.
pub fn check_partition_monotonicity<T: Real>(
    pmf: &FinitePmf<T>,
    spec: &PartitionSpec,
    x: T,
) -> Result<PartitionReport<T>> {
    check_contiguous(spec, pmf.len())?;
    let opt = chernoff_optimum(pmf, x)?;
    let tilted = tilted_probs(pmf, opt.lambda);
    let coarse_p = spec.aggregate(&pmf.probs);
    let coarse_tilted = spec.aggregate(&tilted);

    let coarse_entropy = kl_probs(&coarse_tilted, &coarse_p)?;
    let divergence = kl_probs(&pmf.probs, &tilted)?;
    let coarse_divergence = kl_probs(&coarse_p, &coarse_tilted)?;

    let coarse = pmf.coarsen(spec)?;
    let coarse_chernoff_entropy = chernoff_entropy(&coarse, x).ok();

    let slack = T::lit(ENTROPY_SLACK);
    let tail = pmf.tail_at_least(x);
    Ok(PartitionReport {
        x,
        entropy: opt.value,
        lambda: opt.lambda.is_finite().then_some(opt.lambda),
        coarse_entropy,
        coarse_chernoff_entropy,
        divergence,
        coarse_divergence,
        tail,
        entropy_monotone: opt.value >= coarse_entropy - slack,
        information_monotone: coarse_divergence <= divergence + slack || divergence.is_infinite(),
        chernoff_valid: (-opt.value).exp() >= tail * (T::one() - T::tolerance(1e-12)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coin() -> FinitePmf<f64> {
        FinitePmf::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap()
    }

    fn binary_kl(a: f64, b: f64) -> f64 {
        a * (a / b).ln() + (1.0 - a) * ((1.0 - a) / (1.0 - b)).ln()
    }

    #[test]
    fn pmf_validation() {
        assert!(FinitePmf::new(vec![1.0, 0.0], vec![0.5, 0.5]).is_err());
        assert!(FinitePmf::new(vec![0.0, 1.0], vec![0.5, 0.4]).is_err());
        assert!(FinitePmf::new(vec![0.0, 1.0], vec![1.0, 0.0]).is_err());
        assert!(FinitePmf::<f64>::new(vec![], vec![]).is_err());
        let p: FinitePmf<f64> = serde_json::from_str(r#"{"values":[0,1],"probs":[0.25,0.75]}"#).unwrap();
        assert_eq!(p.mean(), 0.75);
    }

    #[test]
    fn log_mgf_examples() {
        assert_eq!(log_mgf(&coin(), 0.0), 0.0);
        let point = FinitePmf::new(vec![3.0f64], vec![1.0]).unwrap();
        assert!((log_mgf(&point, 2.5) - 7.5).abs() < 1e-15);
        assert!((log_mgf(&coin(), 1.0) - 0.6201145069582775).abs() < 1e-15);
        // No overflow for huge tilts.
        assert!((log_mgf(&coin(), 1e6) - (1e6 + 0.5f64.ln())).abs() < 1e-6);
    }

    #[test]
    fn chernoff_examples() {
        assert_eq!(chernoff_entropy(&coin(), 0.5).unwrap(), 0.0);
        assert_eq!(chernoff_entropy(&coin(), 0.2).unwrap(), 0.0);
        let s = chernoff_entropy(&coin(), 0.9).unwrap();
        assert!((s - 0.3680642071684971).abs() < 1e-12);
        assert!((s - binary_kl(0.9, 0.5)).abs() < 1e-12);
        assert!((chernoff_entropy(&coin(), 1.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!(matches!(chernoff_entropy(&coin(), 1.5), Err(Error::XOutsideSupportHull { .. })));
    }

    #[test]
    fn chernoff_is_valid_tail_bound() {
        let pmf = FinitePmf::new(vec![-1.0f64, 0.0, 0.5, 2.0, 3.0], vec![0.1, 0.4, 0.2, 0.2, 0.1]).unwrap();
        let mut x = pmf.mean();
        while x <= 3.0 {
            let s = chernoff_entropy(&pmf, x).unwrap();
            assert!((-s).exp() >= pmf.tail_at_least(x) - 1e-15, "x={x}");
            x += 0.01;
        }
    }

    #[test]
    fn objective_is_concave_in_lambda() {
        let pmf = FinitePmf::new(vec![0.0, 1.0, 4.0], vec![0.6, 0.3, 0.1]).unwrap();
        let x = 2.0;
        let f = |l: f64| l * x - log_mgf(&pmf, l);
        let h = 1e-3;
        for k in 1..500 {
            let l = k as f64 * 0.01;
            assert!(f(l + h) - 2.0 * f(l) + f(l - h) < 0.0);
        }
    }

    #[test]
    fn tilt_examples() {
        assert_eq!(tilt(&coin(), 0.0), coin());
        let t = tilt(&coin(), 9f64.ln());
        assert!((t.probs()[0] - 0.1).abs() < 1e-15 && (t.probs()[1] - 0.9).abs() < 1e-15);
        let pmf = FinitePmf::new(vec![0.0, 1.0, 2.5, 7.0], vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in -50..50 {
            let m = tilt(&pmf, k as f64 * 0.1).mean();
            assert!(m >= prev);
            prev = m;
        }
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl(&coin(), &coin()).unwrap(), 0.0);
        let p = FinitePmf::new(vec![0.0, 1.0], vec![0.9, 0.1]).unwrap();
        assert!((kl(&p, &coin()).unwrap() - 0.3680642071684971).abs() < 1e-15);
        let other = FinitePmf::new(vec![0.0, 2.0], vec![0.5, 0.5]).unwrap();
        assert_eq!(kl(&p, &other), Err(Error::SupportMismatch));
    }

    #[test]
    fn entropy_is_kl_of_optimal_tilt() {
        let pmf = FinitePmf::new(vec![0.0f64, 1.0, 2.0, 5.0], vec![0.5, 0.25, 0.15, 0.1]).unwrap();
        for &x in &[1.0, 2.0, 3.5, 4.9] {
            let opt = chernoff_optimum(&pmf, x).unwrap();
            let k = kl(&tilt(&pmf, opt.lambda), &pmf).unwrap();
            assert!((opt.value - k).abs() < 1e-8, "x={x}: {} vs {k}", opt.value);
        }
    }

    #[test]
    fn partition_identity_and_whole() {
        let pmf = FinitePmf::new(vec![0.0f64, 1.0, 2.0, 5.0], vec![0.5, 0.25, 0.15, 0.1]).unwrap();
        let r = check_partition_monotonicity(&pmf, &PartitionSpec::singletons(4), 2.0).unwrap();
        assert!((r.entropy - r.coarse_entropy).abs() < 1e-9 && r.holds());
        assert!((r.entropy - r.coarse_chernoff_entropy.unwrap()).abs() < 1e-9);

        let r = check_partition_monotonicity(&pmf, &PartitionSpec::whole(4), 0.5).unwrap();
        assert_eq!(r.coarse_entropy, 0.0);
        assert_eq!(r.coarse_chernoff_entropy, Some(0.0));
        assert!(r.holds());
    }

    #[test]
    fn conditional_mean_coarsening_can_exceed_fine_entropy() {
        // Averaging within groups shrinks the spread, so the conditional-mean
        // variable is at least as concentrated as X.
        let pmf = FinitePmf::new(vec![0.0, 1.0, 2.0], vec![1.0 / 3.0; 3]).unwrap();
        let r = check_partition_monotonicity(&pmf, &PartitionSpec::contiguous(&[2, 1]), 1.5).unwrap();
        assert!(r.holds());
        assert!(r.coarse_chernoff_entropy.unwrap() > r.entropy);
    }

    #[test]
    fn partition_rejects_non_contiguous_groups() {
        let pmf = FinitePmf::new(vec![0.0, 1.0, 2.0], vec![0.2, 0.3, 0.5]).unwrap();
        let spec = PartitionSpec::new(vec![vec![0, 2], vec![1]]);
        assert!(matches!(check_partition_monotonicity(&pmf, &spec, 1.5), Err(Error::BadPartition(_))));
    }

    #[test]
    fn partition_at_support_maximum() {
        let pmf = FinitePmf::new(vec![0.0, 1.0, 2.0], vec![0.2, 0.3, 0.5]).unwrap();
        let r = check_partition_monotonicity(&pmf, &PartitionSpec::contiguous(&[1, 2]), 2.0).unwrap();
        assert_eq!(r.lambda, None);
        assert!((r.entropy - 2f64.ln()).abs() < 1e-15);
        assert!((r.coarse_entropy - -(0.8f64.ln())).abs() < 1e-15);
        assert!(r.holds());
    }
}
