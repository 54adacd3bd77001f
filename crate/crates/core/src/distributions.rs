//! Finite discrete distributions and the threshold transformations applied to
//! them before a Bernstein-type bound is invoked.
//!
//! Indices are zero-based throughout. The split and absorb operations work
//! with two thresholds derived from a level `theta` and a sample size `n`:
//! `tau = theta / n` and `tau' = 2 tau`. Bins are classified into half-open
//! bands `[0, tau)`, `[tau, tau')` and `[tau', 1]`.

use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{compensated_sum, Real};

/// Maximum distance of the raw weight sum from 1 that is treated as rounding
/// noise and renormalized away.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-6;

/// Slack allowed above 1 on the total mass of a sub-distribution.
const SUB_MASS_SLACK: f64 = 1e-12;

/// Positive weights over a finite index set.
///
/// A regular distribution sums to one. The split and absorb transformations
/// produce *sub-distributions* (total mass at most one); those carry the
/// `sub_distribution` flag and are otherwise usable everywhere a distribution
/// is.
#[derive(Clone, PartialEq)]
pub struct DiscreteDistribution<T: Real> {
    weights: Vec<T>,
    labels: Option<Vec<String>>,
    sub_distribution: bool,
}

impl<T: Real> fmt::Debug for DiscreteDistribution<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscreteDistribution")
            .field("weights", &self.weights)
            .field("sub_distribution", &self.sub_distribution)
            .finish()
    }
}

fn check_positive<T: Real>(weights: &[T]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    for (index, &w) in weights.iter().enumerate() {
        if !(w > T::zero()) || !w.is_finite() {
            return Err(Error::NonPositiveWeight { index, value: w.as_f64() });
        }
    }
    Ok(())
}

impl<T: Real> DiscreteDistribution<T> {
    /// Builds a distribution from raw weights, renormalizing sums that are
    /// within [`RENORMALIZE_TOLERANCE`] of one. Sums already equal to one up
    /// to summation rounding are kept as given, so serialized weights read
    /// back bit for bit.
    pub fn new(weights: Vec<T>) -> Result<Self> {
        check_positive(&weights)?;
        let sum = compensated_sum(&weights);
        if (sum - T::one()).abs() > T::lit(RENORMALIZE_TOLERANCE) {
            return Err(Error::SumTooFarFromOne { sum: sum.as_f64() });
        }
        let weights = if (sum - T::one()).abs() <= T::lit(4.0) * T::epsilon() {
            weights
        } else {
            weights.into_iter().map(|w| w / sum).collect()
        };
        Ok(Self { weights, labels: None, sub_distribution: false })
    }

    /// Builds a sub-distribution: positive weights with total mass at most one.
    /// No renormalization takes place.
    pub fn sub_distribution(weights: Vec<T>) -> Result<Self> {
        check_positive(&weights)?;
        let sum: T = weights.iter().copied().sum();
        if sum > T::one() + T::tolerance(SUB_MASS_SLACK) {
            return Err(Error::SumTooFarFromOne { sum: sum.as_f64() });
        }
        Ok(Self { weights, labels: None, sub_distribution: true })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.weights.len() {
            return Err(Error::LabelMismatch { labels: labels.len(), weights: self.weights.len() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Uniform weights `1/N`.
    pub fn uniform(count: usize) -> Result<Self> {
        Self::family(Family::Uniform, count, T::zero())
    }

    /// Members of the built-in test families.
    ///
    /// * `Uniform`: all weights `1/N`, `param` ignored.
    /// * `Zipf`: `w_i ∝ i^(-param)` for `i = 1..=N`, `param > 0`.
    /// * `Geometric`: `w_i ∝ param^i`, `0 < param < 1`.
    /// * `Spike`: bin 0 carries `param`, the rest share `1 - param` evenly; `N ≥ 2`.
    pub fn family(kind: Family, count: usize, param: T) -> Result<Self> {
        if count == 0 {
            return Err(Error::BadParam("N must be at least 1".into()));
        }
        let n = T::count(count);
        let weights: Vec<T> = match kind {
            Family::Uniform => vec![T::one() / n; count],
            Family::Zipf => {
                if !(param > T::zero()) || !param.is_finite() {
                    return Err(Error::BadParam(format!("zipf exponent must be positive, got {param}")));
                }
                let raw: Vec<T> = (1..=count).map(|i| T::count(i).powf(-param)).collect();
                normalized(raw)
            }
            Family::Geometric => {
                if !(param > T::zero() && param < T::one()) {
                    return Err(Error::BadParam(format!("geometric ratio must lie in (0,1), got {param}")));
                }
                let raw: Vec<T> = (0..count).map(|i| param.powi(i as i32)).collect();
                if raw.iter().any(|&w| !(w > T::zero())) {
                    return Err(Error::BadParam("geometric tail underflows to zero".into()));
                }
                normalized(raw)
            }
            Family::Spike => {
                if !(param > T::zero() && param < T::one()) {
                    return Err(Error::BadParam(format!("spike mass must lie in (0,1), got {param}")));
                }
                if count < 2 {
                    return Err(Error::BadParam("spike family needs N >= 2".into()));
                }
                let rest = (T::one() - param) / T::count(count - 1);
                std::iter::once(param).chain(std::iter::repeat_n(rest, count - 1)).collect()
            }
        };
        Self::new(weights)
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_sub_distribution(&self) -> bool {
        self.sub_distribution
    }

    /// Total mass, summed with compensation.
    pub fn total_mass(&self) -> T {
        compensated_sum(&self.weights)
    }

    pub fn max_weight(&self) -> T {
        self.weights.iter().copied().fold(T::zero(), T::max)
    }

    /// Converts to another scalar type.
    pub fn cast<U: Real>(&self) -> DiscreteDistribution<U> {
        DiscreteDistribution {
            weights: self.weights.iter().map(|w| U::lit(w.as_f64())).collect(),
            labels: self.labels.clone(),
            sub_distribution: self.sub_distribution,
        }
    }

    fn derived(&self, weights: Vec<T>, labels: Option<Vec<String>>) -> Self {
        Self { weights, labels, sub_distribution: true }
    }
}

fn normalized<T: Real>(raw: Vec<T>) -> Vec<T> {
    let total: T = raw.iter().copied().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Built-in distribution families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Uniform,
    Zipf,
    Geometric,
    Spike,
}

impl<T: Real> Serialize for DiscreteDistribution<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let fields = 1 + self.labels.is_some() as usize + self.sub_distribution as usize;
        let mut state = serializer.serialize_struct("DiscreteDistribution", fields)?;
        state.serialize_field("weights", &self.weights)?;
        if let Some(labels) = &self.labels {
            state.serialize_field("labels", labels)?;
        }
        if self.sub_distribution {
            state.serialize_field("sub_distribution", &true)?;
        }
        state.end()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum WeightRepr {
    Number(f64),
    Decimal(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DistributionDoc {
    weights: Vec<WeightRepr>,
    #[serde(default)]
    labels: Option<Vec<String>>,
    #[serde(default)]
    sub_distribution: bool,
}

impl<'de, T: Real> Deserialize<'de> for DiscreteDistribution<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = DistributionDoc::deserialize(deserializer)?;
        let mut weights = Vec::with_capacity(doc.weights.len());
        for w in doc.weights {
            let value = match w {
                WeightRepr::Number(x) => x,
                WeightRepr::Decimal(s) => s
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| de::Error::custom(format!("bad decimal weight {s:?}: {e}")))?,
            };
            weights.push(T::from_f64(value).ok_or_else(|| de::Error::custom("weight not representable"))?);
        }
        let dist = if doc.sub_distribution {
            DiscreteDistribution::sub_distribution(weights)
        } else {
            DiscreteDistribution::new(weights)
        }
        .map_err(de::Error::custom)?;
        match doc.labels {
            Some(labels) => dist.with_labels(labels).map_err(de::Error::custom),
            None => Ok(dist),
        }
    }
}

/// Threshold classification of a distribution's bins.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdPartition<T: Real> {
    pub theta: T,
    pub n: u64,
    pub tau: T,
    pub tau_prime: T,
    /// `w_i < tau`
    pub below: Vec<usize>,
    /// `tau <= w_i < tau'`
    pub mid: Vec<usize>,
    /// `w_i >= tau'`
    pub above: Vec<usize>,
}

/// `(tau, tau')` for a level `theta` and sample size `n`, with `0 < theta < n`.
pub fn thresholds<T: Real>(theta: T, n: u64) -> Result<(T, T)> {
    let nf = T::lit(n as f64);
    if !(theta > T::zero() && theta < nf) {
        return Err(Error::ThetaOutOfRange { theta: theta.as_f64(), n });
    }
    let tau = theta / nf;
    Ok((tau, tau + tau))
}

pub fn partition_by_threshold<T: Real>(
    dist: &DiscreteDistribution<T>,
    theta: T,
    n: u64,
) -> Result<ThresholdPartition<T>> {
    let (tau, tau_prime) = thresholds(theta, n)?;
    let mut below = Vec::new();
    let mut mid = Vec::new();
    let mut above = Vec::new();
    for (i, &w) in dist.weights().iter().enumerate() {
        if w < tau {
            below.push(i);
        } else if w < tau_prime {
            mid.push(i);
        } else {
            above.push(i);
        }
    }
    Ok(ThresholdPartition { theta, n, tau, tau_prime, below, mid, above })
}

/// Number of pieces `k` with `k tau <= w < (k + 1) tau`, for `w >= tau`.
///
/// The floor of `w / tau` can land one off when `w` is a multiple of `tau`
/// up to rounding, so the bracket is re-checked with a few ulps of slack:
/// `w` within that slack of `k tau` gives `k` pieces.
pub fn piece_count<T: Real>(w: T, tau: T) -> usize {
    let reach = w * (T::one() + T::lit(4.0) * T::epsilon());
    let mut k = (w / tau).floor().to_usize().unwrap_or(1).max(1);
    while T::count(k + 1) * tau <= reach {
        k += 1;
    }
    while k > 1 && T::count(k) * tau > reach {
        k -= 1;
    }
    k
}

/// Pieces of a single bin: `k - 1` copies of `tau` followed by the remainder
/// `w - (k - 1) tau`, which lies in `[tau, 2 tau)`. Bins below `tau` come back
/// unchanged.
pub fn split_pieces<T: Real>(w: T, tau: T) -> Vec<T> {
    if w < tau {
        return vec![w];
    }
    let k = piece_count(w, tau);
    let mut pieces = vec![tau; k - 1];
    pieces.push(w - T::count(k - 1) * tau);
    pieces
}

/// Splits every bin with `w_i >= tau` into `tau`-sized pieces; see
/// [`split_pieces`]. Output bins are all below `tau'`.
pub fn split<T: Real>(dist: &DiscreteDistribution<T>, theta: T, n: u64) -> Result<DiscreteDistribution<T>> {
    let (tau, _) = thresholds(theta, n)?;
    let mut weights = Vec::with_capacity(dist.len());
    let mut labels = dist.labels().map(|_| Vec::with_capacity(dist.len()));
    for (i, &w) in dist.weights().iter().enumerate() {
        let pieces = split_pieces(w, tau);
        if let (Some(out), Some(src)) = (labels.as_mut(), dist.labels()) {
            if pieces.len() == 1 {
                out.push(src[i].clone());
            } else {
                out.extend((0..pieces.len()).map(|j| format!("{}/{}", src[i], j)));
            }
        }
        weights.extend(pieces);
    }
    Ok(dist.derived(weights, labels))
}

/// Merges sub-`tau` bins into the `[tau, tau')` band.
///
/// Repeatedly discards the largest sub-`tau` bin and shares its mass equally
/// among the remaining sub-`tau` bins (bins that reach `tau` leave the pool).
/// A single leftover bin is merged into the first bin of size exactly `tau`,
/// or the smallest band bin when none has size `tau`. If the merge reaches
/// `tau'`, the merged bin is split once more into `tau` and the remainder.
/// Total mass is conserved.
pub fn absorb<T: Real>(dist: &DiscreteDistribution<T>, theta: T, n: u64) -> Result<DiscreteDistribution<T>> {
    let (tau, tau_prime) = thresholds(theta, n)?;
    if let Some((index, &value)) = dist.weights().iter().enumerate().find(|(_, &w)| w >= tau_prime) {
        return Err(Error::NotSplit { index, value: value.as_f64(), tau_prime: tau_prime.as_f64() });
    }

    let mut weights: Vec<Option<T>> = dist.weights().iter().map(|&w| Some(w)).collect();
    let mut pool: Vec<usize> = (0..weights.len()).filter(|&i| dist.weights()[i] < tau).collect();
    if pool.is_empty() {
        return Ok(dist.clone());
    }

    while pool.len() >= 2 {
        // Largest bin; ties go to the lowest index.
        let (pos, _) = pool
            .iter()
            .enumerate()
            .fold(None::<(usize, T)>, |best, (pos, &i)| {
                let w = weights[i].unwrap();
                match best {
                    Some((_, bw)) if bw >= w => best,
                    _ => Some((pos, w)),
                }
            })
            .unwrap();
        let j = pool.remove(pos);
        let share = weights[j].take().unwrap() / T::count(pool.len());
        for &l in &pool {
            let w = weights[l].as_mut().unwrap();
            *w = *w + share;
        }
        pool.retain(|&l| weights[l].unwrap() < tau);
    }

    let mut extra: Option<(usize, T)> = None;
    if let Some(&r) = pool.first() {
        let residual = weights[r].take().unwrap();
        let band = |w: T| w >= tau && w < tau_prime;
        let exact = weights.iter().position(|w| *w == Some(tau));
        let target = exact.or_else(|| {
            weights
                .iter()
                .enumerate()
                .filter_map(|(i, w)| w.filter(|&w| band(w)).map(|w| (i, w)))
                .fold(None::<(usize, T)>, |best, (i, w)| match best {
                    Some((_, bw)) if bw <= w => best,
                    _ => Some((i, w)),
                })
                .map(|(i, _)| i)
        });
        let Some(t) = target else {
            return Err(Error::NoMidBin { residual: residual.as_f64() });
        };
        let merged = weights[t].unwrap() + residual;
        if merged >= tau_prime {
            weights[t] = Some(tau);
            extra = Some((t, merged - tau));
        } else {
            weights[t] = Some(merged);
        }
    }

    let mut out = Vec::with_capacity(weights.len());
    let mut labels = dist.labels().map(|_| Vec::with_capacity(weights.len()));
    for (i, w) in weights.into_iter().enumerate() {
        let Some(w) = w else { continue };
        out.push(w);
        if let (Some(dst), Some(src)) = (labels.as_mut(), dist.labels()) {
            dst.push(src[i].clone());
        }
        if let Some((t, rest)) = extra {
            if t == i {
                out.push(rest);
                if let (Some(dst), Some(src)) = (labels.as_mut(), dist.labels()) {
                    dst.push(format!("{}/+", src[i]));
                }
            }
        }
    }
    Ok(dist.derived(out, labels))
}

/// Split followed by absorb: every output bin lies in `[tau, tau')`.
pub fn split_then_absorb<T: Real>(
    dist: &DiscreteDistribution<T>,
    theta: T,
    n: u64,
) -> Result<DiscreteDistribution<T>> {
    absorb(&split(dist, theta, n)?, theta, n)
}

/// Disjoint, non-empty groups covering `0..N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSpec {
    pub groups: Vec<Vec<usize>>,
}

impl PartitionSpec {
    pub fn new(groups: Vec<Vec<usize>>) -> Self {
        Self { groups }
    }

    pub fn singletons(len: usize) -> Self {
        Self { groups: (0..len).map(|i| vec![i]).collect() }
    }

    pub fn whole(len: usize) -> Self {
        Self { groups: vec![(0..len).collect()] }
    }

    /// Consecutive runs of the given sizes.
    pub fn contiguous(sizes: &[usize]) -> Self {
        let mut start = 0;
        let groups = sizes
            .iter()
            .map(|&s| {
                let g: Vec<usize> = (start..start + s).collect();
                start += s;
                g
            })
            .collect();
        Self { groups }
    }

    pub fn validate(&self, len: usize) -> Result<()> {
        let mut seen = vec![false; len];
        for (g, group) in self.groups.iter().enumerate() {
            if group.is_empty() {
                return Err(Error::BadPartition(format!("group {g} is empty")));
            }
            for &i in group {
                if i >= len {
                    return Err(Error::BadPartition(format!("index {i} out of range for {len} outcomes")));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::BadPartition(format!("index {i} appears twice")));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::BadPartition(format!("index {missing} not covered")));
        }
        Ok(())
    }

    /// True when every group is a run of consecutive indices and the groups
    /// appear in index order.
    pub fn is_contiguous(&self) -> bool {
        let mut next = 0;
        for group in &self.groups {
            for &i in group {
                if i != next {
                    return false;
                }
                next += 1;
            }
        }
        true
    }

    /// Group sums of `values`.
    pub fn aggregate<T: Real>(&self, values: &[T]) -> Vec<T> {
        self.groups.iter().map(|g| g.iter().map(|&i| values[i]).sum()).collect()
    }
}

/// Coarse binning: output weight `g` is the total input weight of group `g`.
pub fn coarse_bin<T: Real>(dist: &DiscreteDistribution<T>, spec: &PartitionSpec) -> Result<DiscreteDistribution<T>> {
    spec.validate(dist.len())?;
    let weights = spec.aggregate(dist.weights());
    Ok(DiscreteDistribution { weights, labels: None, sub_distribution: dist.is_sub_distribution() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(w: &[f64]) -> DiscreteDistribution<f64> {
        DiscreteDistribution::new(w.to_vec()).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn make_distribution_examples() {
        assert_eq!(dist(&[0.5, 0.5]).weights(), &[0.5, 0.5]);
        let d = dist(&[0.2, 0.3, 0.5]);
        assert_eq!(d.len(), 3);
        assert!((d.total_mass() - 1.0).abs() < 1e-12);
        assert_eq!(
            DiscreteDistribution::new(vec![0.2, -0.1, 0.9]),
            Err(Error::NonPositiveWeight { index: 1, value: -0.1 })
        );
    }

    #[test]
    fn renormalizes_rounding_noise_only() {
        let d = dist(&[0.3 + 4e-7, 0.7]);
        assert!((d.total_mass() - 1.0).abs() < 1e-15);
        assert!(matches!(DiscreteDistribution::new(vec![0.3, 0.6]), Err(Error::SumTooFarFromOne { .. })));
        assert_eq!(DiscreteDistribution::<f64>::new(vec![]), Err(Error::EmptyDistribution));
        assert!(matches!(DiscreteDistribution::new(vec![0.5, f64::NAN]), Err(Error::NonPositiveWeight { .. })));
    }

    #[test]
    fn families() {
        let u = DiscreteDistribution::<f64>::uniform(4).unwrap();
        assert_eq!(u.weights(), &[0.25; 4]);
        let z = DiscreteDistribution::family(Family::Zipf, 3, 1.0).unwrap();
        assert!(close(z.weights(), &[6.0 / 11.0, 3.0 / 11.0, 2.0 / 11.0], 1e-15));
        let s = DiscreteDistribution::family(Family::Spike, 3, 0.9).unwrap();
        assert!(close(s.weights(), &[0.9, 0.05, 0.05], 1e-15));
        let g = DiscreteDistribution::family(Family::Geometric, 3, 0.5).unwrap();
        assert!(close(g.weights(), &[4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0], 1e-15));
        for (kind, param) in [(Family::Zipf, 0.0), (Family::Geometric, 1.0), (Family::Spike, 1.5)] {
            assert!(matches!(DiscreteDistribution::family(kind, 5, param), Err(Error::BadParam(_))));
        }
        assert!(DiscreteDistribution::<f64>::family(Family::Spike, 1, 0.5).is_err());
        assert!(DiscreteDistribution::<f64>::uniform(0).is_err());
    }

    #[test]
    fn partition_examples() {
        let p = partition_by_threshold(&dist(&[0.5, 0.3, 0.1, 0.1]), 2.0, 10).unwrap();
        assert_eq!((p.below.clone(), p.mid.clone(), p.above.clone()), (vec![2, 3], vec![1], vec![0]));
        assert_eq!(p.tau_prime, 2.0 * p.tau);

        let p = partition_by_threshold(&DiscreteDistribution::uniform(10).unwrap(), 1.0, 10).unwrap();
        assert_eq!(p.mid, (0..10).collect::<Vec<_>>());
        assert!(p.below.is_empty() && p.above.is_empty());

        let p = partition_by_threshold(&dist(&[0.99, 0.01]), 5.0, 10).unwrap();
        assert_eq!((p.below, p.mid, p.above), (vec![1], vec![0], vec![]));

        assert!(matches!(partition_by_threshold(&dist(&[1.0]), 10.0, 10), Err(Error::ThetaOutOfRange { .. })));
        assert!(matches!(partition_by_threshold(&dist(&[1.0]), 0.0, 10), Err(Error::ThetaOutOfRange { .. })));
    }

    #[test]
    fn split_examples() {
        let s = split(&dist(&[0.7, 0.3]), 2.0, 10).unwrap();
        assert!(close(s.weights(), &[0.2, 0.2, 0.3, 0.3], 1e-15));
        assert!(s.is_sub_distribution());

        let s = split(&dist(&[0.05, 0.95]), 5.0, 10).unwrap();
        assert_eq!(s.weights(), &[0.05, 0.95]);

        let d = dist(&[0.05, 0.05, 0.9]);
        let s = split(&dist(&[0.5, 0.5]), 0.5, 10).unwrap();
        assert_eq!(s.len(), 20);
        assert!(s.weights().iter().all(|&w| (w - 0.05).abs() < 1e-15));
        let s = split(&d, 0.95, 1).unwrap();
        assert_eq!(s.weights(), d.weights());
    }

    #[test]
    fn piece_count_handles_exact_multiples() {
        // 0.3 / 0.1 evaluates to 2.9999999999999996 in f64.
        assert_eq!(piece_count(0.3, 0.1), 3);
        assert_eq!(piece_count(0.6, 0.2), 3);
        for k in 1..50 {
            let tau = 0.013;
            let w = k as f64 * tau;
            assert_eq!(piece_count(w, tau), k);
        }
    }

    #[test]
    fn absorb_traces_by_hand() {
        // tau = 0.2, tau' = 0.4.
        let d = DiscreteDistribution::sub_distribution(vec![0.05, 0.2, 0.03, 0.25, 0.02]).unwrap();
        let a = absorb(&d, 2.0, 10).unwrap();
        // 0.05 spread over {0.03, 0.02} -> {0.055, 0.045}; 0.055 onto 0.045 -> 0.1;
        // residual 0.1 merged into the bin of size exactly tau.
        assert!(close(a.weights(), &[0.3, 0.25], 1e-15));
        assert!((a.total_mass() - d.total_mass()).abs() < 1e-15);
        assert!(a.weights().iter().all(|&w| (0.2..0.4).contains(&w)));
    }

    #[test]
    fn absorb_edge_cases() {
        let d = DiscreteDistribution::sub_distribution(vec![0.25, 0.3]).unwrap();
        assert_eq!(absorb(&d, 2.0, 10).unwrap(), d);

        let tiny = DiscreteDistribution::sub_distribution(vec![0.05; 4]).unwrap();
        assert!(matches!(absorb(&tiny, 5.0, 10), Err(Error::NoMidBin { .. })));

        assert!(matches!(absorb(&dist(&[0.5, 0.5]), 2.0, 10), Err(Error::NotSplit { index: 0, .. })));
    }

    #[test]
    fn absorb_residual_overflowing_band_is_resplit() {
        // tau = 0.2; smallest band bin 0.39 plus residual 0.15 would reach tau'.
        let d = DiscreteDistribution::sub_distribution(vec![0.39, 0.15]).unwrap();
        let a = absorb(&d, 2.0, 10).unwrap();
        assert!(close(a.weights(), &[0.2, 0.34], 1e-15));
    }

    #[test]
    fn absorb_pool_can_promote_every_bin() {
        // Three sub-tau bins: sharing 0.15 lifts the other two to 0.225 each.
        let d = DiscreteDistribution::sub_distribution(vec![0.15, 0.15, 0.15]).unwrap();
        let a = absorb(&d, 2.0, 10).unwrap();
        assert!(close(a.weights(), &[0.225, 0.225], 1e-15));
    }

    #[test]
    fn coarse_bin_examples() {
        let d = dist(&[0.2, 0.3, 0.5]);
        let c = coarse_bin(&d, &PartitionSpec::new(vec![vec![0, 1], vec![2]])).unwrap();
        assert!(close(c.weights(), &[0.5, 0.5], 1e-15));
        assert_eq!(coarse_bin(&d, &PartitionSpec::singletons(3)).unwrap().weights(), d.weights());
        let ten = DiscreteDistribution::uniform(10).unwrap();
        let c = coarse_bin(&ten, &PartitionSpec::contiguous(&[5, 5])).unwrap();
        assert!(close(c.weights(), &[0.5, 0.5], 1e-15));

        for bad in [vec![vec![0, 1]], vec![vec![0, 1], vec![1, 2]], vec![vec![0, 1, 2], vec![]], vec![vec![0, 1, 2, 3]]] {
            assert!(matches!(coarse_bin(&d, &PartitionSpec::new(bad)), Err(Error::BadPartition(_))));
        }
    }

    #[test]
    fn json_accepts_decimal_strings() {
        let d: DiscreteDistribution<f64> =
            serde_json::from_str(r#"{"weights":["0.25", 0.75],"labels":["a","b"]}"#).unwrap();
        assert_eq!(d.weights(), &[0.25, 0.75]);
        assert_eq!(d.labels().unwrap(), &["a".to_string(), "b".to_string()]);
        let text = serde_json::to_string(&d).unwrap();
        assert_eq!(text, r#"{"weights":[0.25,0.75],"labels":["a","b"]}"#);
        assert!(serde_json::from_str::<DiscreteDistribution<f64>>(r#"{"weights":[0.5,-0.5]}"#).is_err());
        assert!(serde_json::from_str::<DiscreteDistribution<f64>>(r#"{"weights":[0.5],"labels":["a","b"]}"#).is_err());
    }

    #[test]
    fn split_labels_follow_pieces() {
        let d = dist(&[0.7, 0.3]).with_labels(vec!["x".into(), "y".into()]).unwrap();
        let s = split(&d, 2.0, 10).unwrap();
        assert_eq!(s.labels().unwrap(), &["x/0", "x/1", "x/2", "y"]);
    }

    #[test]
    fn works_in_f32() {
        let d = DiscreteDistribution::<f32>::family(Family::Zipf, 4, 1.0).unwrap();
        let s = split(&d, 1.5f32, 10).unwrap();
        assert!((s.total_mass() - 1.0).abs() < 1e-6);
        assert!(s.weights().iter().all(|&w| w < 0.3));
    }
}
