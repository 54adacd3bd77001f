//! The missing mass `Y = Σ w_i Y_i`, where `Y_i` indicates that bin `i` is
//! absent from an i.i.d. sample of size `n`.
//!
//! Two sampling models are supported. [`Model::Multinomial`] is the real
//! process: the `Y_i` are coupled through the shared sample. The
//! [`Model::Independent`] surrogate keeps the marginals `P(Y_i = 1) =
//! (1 - w_i)^n` but draws the indicators independently.
//!
//! Sub-distributions (total mass below one) are handled by treating the
//! deficit as an extra outcome that is never counted as missing.

use serde::{Deserialize, Serialize};

use crate::distributions::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::real::{compensated_sum, powi_unit, survival, Real};
use crate::sampling::{run_chunked, AliasTable};
use crate::stats::{clopper_pearson, CONFIDENCE};
use rand::Rng;

/// Largest support handled by the exact oracles (cost `2^N N`).
pub const MAX_EXACT_SUPPORT: usize = 20;

/// Missing-mass values closer than this are treated as equal, both when
/// merging atoms of the exact distribution and when testing deviation events.
pub const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `Y - E[Y] >= ε`
    Upper,
    /// `Y - E[Y] <= -ε`
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    #[default]
    Multinomial,
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MissingMassStats<T: Real> {
    pub mean: T,
    /// `Σ w_i² var[Y_i]`
    pub variance_proxy: T,
    /// `Σ w_i var[Y_i]`
    pub weighted_variance: T,
    pub n: u64,
}

/// Probability of a deviation event, exact or estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationEstimate<T: Real> {
    pub estimate: T,
    pub ci_low: T,
    pub ci_high: T,
    pub trials: u64,
    pub method: Method,
    pub side: Side,
    pub epsilon: T,
    pub n: u64,
    /// `E[Y]` the deviation is measured from.
    pub mean: T,
}

/// `E[Y] = Σ w_i (1 - w_i)^n`.
pub fn expected_missing_mass<T: Real>(dist: &DiscreteDistribution<T>, n: u64) -> T {
    let terms: Vec<T> = dist.weights().iter().map(|&w| w * survival(w, n)).collect();
    compensated_sum(&terms).min(T::one())
}

pub fn missing_mass_stats<T: Real>(dist: &DiscreteDistribution<T>, n: u64) -> MissingMassStats<T> {
    let mut variance_proxy = T::zero();
    let mut weighted_variance = T::zero();
    for &w in dist.weights() {
        let q = survival(w, n);
        let var = q * (T::one() - q);
        weighted_variance = weighted_variance + w * var;
        variance_proxy = variance_proxy + w * w * var;
    }
    MissingMassStats { mean: expected_missing_mass(dist, n), variance_proxy, weighted_variance, n }
}

/// Law of `Y` as sorted `(mass, probability)` atoms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactDistribution<T: Real> {
    pub atoms: Vec<Atom<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom<T: Real> {
    pub mass: T,
    pub probability: T,
}

impl<T: Real> ExactDistribution<T> {
    pub fn total_probability(&self) -> T {
        self.atoms.iter().map(|a| a.probability).sum()
    }

    pub fn mean(&self) -> T {
        self.atoms.iter().map(|a| a.mass * a.probability).sum()
    }

    /// `P(Y >= t)`, with `MASS_TOLERANCE` slack in favour of the event.
    pub fn prob_at_least(&self, t: T) -> T {
        let cut = t - T::lit(MASS_TOLERANCE);
        self.atoms.iter().filter(|a| a.mass >= cut).map(|a| a.probability).sum()
    }

    /// `P(Y <= t)`, with `MASS_TOLERANCE` slack in favour of the event.
    pub fn prob_at_most(&self, t: T) -> T {
        let cut = t + T::lit(MASS_TOLERANCE);
        self.atoms.iter().filter(|a| a.mass <= cut).map(|a| a.probability).sum()
    }

    /// Probability of the deviation event of size `epsilon` around `mean`.
    pub fn deviation(&self, mean: T, epsilon: T, side: Side) -> T {
        match side {
            Side::Upper => self.prob_at_least(mean + epsilon),
            Side::Lower => self.prob_at_most(mean - epsilon),
        }
    }

    /// Sorts by mass and merges atoms within `MASS_TOLERANCE` of the first
    /// member of their run.
    fn from_unsorted(mut raw: Vec<(T, T)>) -> Self {
        raw.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite masses"));
        let tol = T::lit(MASS_TOLERANCE);
        let mut atoms: Vec<Atom<T>> = Vec::new();
        let mut anchor = T::zero();
        for (mass, p) in raw {
            match atoms.last_mut() {
                Some(last) if mass - anchor <= tol => last.probability = last.probability + p,
                _ => {
                    anchor = mass;
                    atoms.push(Atom { mass, probability: p });
                }
            }
        }
        // Inclusion-exclusion leaves rounding-level negatives.
        for a in &mut atoms {
            a.probability = a.probability.max(T::zero());
        }
        atoms.retain(|a| a.probability > T::zero());
        Self { atoms }
    }
}

fn check_exact_support<T: Real>(dist: &DiscreteDistribution<T>) -> Result<()> {
    if dist.len() > MAX_EXACT_SUPPORT {
        return Err(Error::SupportTooLarge { size: dist.len(), limit: MAX_EXACT_SUPPORT });
    }
    Ok(())
}

/// Subset masses `w(S)` for every `S ⊆ {0..N}`, indexed by bitmask.
fn subset_masses<T: Real>(weights: &[T]) -> Vec<T> {
    let mut mass = vec![T::zero(); 1 << weights.len()];
    for s in 1..mass.len() {
        let low = s.trailing_zeros() as usize;
        mass[s] = mass[s & (s - 1)] + weights[low];
    }
    mass
}

/// Exact law of `Y` under the multinomial model.
///
/// `P(missing set ⊇ S) = (1 - w(S))^n`; the law of the missing set follows
/// by Möbius inversion over supersets.
pub fn exact_distribution<T: Real>(dist: &DiscreteDistribution<T>, n: u64) -> Result<ExactDistribution<T>> {
    check_exact_support(dist)?;
    let weights = dist.weights();
    let size = weights.len();
    let full = (1usize << size) - 1;
    let mass = subset_masses(weights);
    let slack = (T::one() - dist.total_mass()).max(T::zero());
    // 1 - w(S) as the complement's mass, which avoids cancellation.
    let mut h: Vec<T> = (0..=full).map(|s| powi_unit(mass[full ^ s] + slack, n)).collect();
    for bit in 0..size {
        let b = 1usize << bit;
        for s in 0..=full {
            if s & b == 0 {
                h[s] = h[s] - h[s | b];
            }
        }
    }
    // At most n bins are observed, and at least one unless the deficit can
    // absorb every draw.
    let feasible = |s: usize| {
        let observed = (size - s.count_ones() as usize) as u64;
        observed <= n && (observed > 0 || n == 0 || slack > T::zero())
    };
    Ok(ExactDistribution::from_unsorted((0..=full).filter(|&s| feasible(s)).map(|s| (mass[s], h[s])).collect()))
}

/// Exact law of `Y` when the indicators are independent with the
/// multinomial marginals.
pub fn exact_distribution_independent<T: Real>(
    dist: &DiscreteDistribution<T>,
    n: u64,
) -> Result<ExactDistribution<T>> {
    check_exact_support(dist)?;
    let weights = dist.weights();
    let q: Vec<T> = weights.iter().map(|&w| survival(w, n)).collect();
    let mass = subset_masses(weights);
    let prob = (0..mass.len()).map(|s| {
        q.iter()
            .enumerate()
            .map(|(i, &qi)| if s >> i & 1 == 1 { qi } else { T::one() - qi })
            .fold(T::one(), |acc, p| acc * p)
    });
    Ok(ExactDistribution::from_unsorted(mass.into_iter().zip(prob).collect()))
}

fn check_epsilon<T: Real>(epsilon: T) -> Result<()> {
    if !(epsilon > T::zero() && epsilon < T::one()) {
        return Err(Error::EpsilonOutOfRange { epsilon: epsilon.as_f64() });
    }
    Ok(())
}

/// Exact `P(Y - E[Y] >= ε)` or `P(Y - E[Y] <= -ε)`.
pub fn exact_deviation_prob<T: Real>(
    dist: &DiscreteDistribution<T>,
    n: u64,
    epsilon: T,
    side: Side,
) -> Result<DeviationEstimate<T>> {
    exact_deviation_prob_with(dist, n, epsilon, side, Model::Multinomial)
}

pub fn exact_deviation_prob_with<T: Real>(
    dist: &DiscreteDistribution<T>,
    n: u64,
    epsilon: T,
    side: Side,
    model: Model,
) -> Result<DeviationEstimate<T>> {
    check_epsilon(epsilon)?;
    let law = match model {
        Model::Multinomial => exact_distribution(dist, n)?,
        Model::Independent => exact_distribution_independent(dist, n)?,
    };
    let mean = expected_missing_mass(dist, n);
    let p = law.deviation(mean, epsilon, side).min(T::one());
    Ok(DeviationEstimate { estimate: p, ci_low: p, ci_high: p, trials: 0, method: Method::Exact, side, epsilon, n, mean })
}

/// Reusable sampler of `Y` for one distribution and sample size.
#[derive(Debug, Clone)]
pub struct MissingMassSampler<T: Real> {
    weights: Vec<T>,
    survival: Vec<f64>,
    table: AliasTable,
    total: T,
    n: u64,
    model: Model,
}

impl<T: Real> MissingMassSampler<T> {
    pub fn new(dist: &DiscreteDistribution<T>, n: u64, model: Model) -> Self {
        let weights = dist.weights().to_vec();
        let mut raw: Vec<f64> = weights.iter().map(|w| w.as_f64()).collect();
        let total = dist.total_mass();
        let deficit = 1.0 - total.as_f64();
        if deficit > 0.0 {
            raw.push(deficit);
        }
        let survival = weights.iter().map(|&w| survival(w, n).as_f64()).collect();
        Self { table: AliasTable::new(&raw), survival, weights, total, n, model }
    }

    /// One draw of `Y`. `seen` is scratch space; it is resized as needed and
    /// may be reused across calls.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, seen: &mut Vec<u64>, stamp: &mut u64) -> T {
        match self.model {
            Model::Multinomial => {
                if self.n == 0 {
                    return self.total;
                }
                seen.resize(self.table.len(), 0);
                *stamp += 1;
                let mut observed = T::zero();
                let mut distinct = 0;
                for _ in 0..self.n {
                    let i = self.table.sample(rng);
                    if seen[i] != *stamp {
                        seen[i] = *stamp;
                        if i < self.weights.len() {
                            observed = observed + self.weights[i];
                            distinct += 1;
                        }
                    }
                }
                if distinct == self.weights.len() {
                    T::zero()
                } else {
                    (self.total - observed).max(T::zero()).min(T::one())
                }
            }
            Model::Independent => self
                .weights
                .iter()
                .zip(&self.survival)
                .filter(|(_, &q)| rng.random::<f64>() < q)
                .map(|(&w, _)| w)
                .sum(),
        }
    }
}

/// A single draw of the missing mass.
pub fn sample_missing_mass<T: Real, R: Rng + ?Sized>(
    dist: &DiscreteDistribution<T>,
    n: u64,
    rng: &mut R,
    model: Model,
) -> T {
    let mut seen = Vec::new();
    let mut stamp = 0;
    MissingMassSampler::new(dist, n, model).sample(rng, &mut seen, &mut stamp)
}

/// A deviation event to be estimated from shared samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationQuery<T: Real> {
    pub epsilon: T,
    pub side: Side,
}

/// Monte-Carlo estimates of several deviation events from one set of
/// `trials` draws, each with a 99% Clopper–Pearson interval.
pub fn mc_deviation_probs<T: Real>(
    dist: &DiscreteDistribution<T>,
    n: u64,
    queries: &[DeviationQuery<T>],
    trials: u64,
    seed: u64,
    model: Model,
) -> Result<Vec<DeviationEstimate<T>>> {
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    for q in queries {
        check_epsilon(q.epsilon)?;
    }
    let mean = expected_missing_mass(dist, n);
    let tol = T::lit(MASS_TOLERANCE);
    let cuts: Vec<(T, Side)> = queries
        .iter()
        .map(|q| match q.side {
            Side::Upper => (mean + q.epsilon - tol, Side::Upper),
            Side::Lower => (mean - q.epsilon + tol, Side::Lower),
        })
        .collect();
    let sampler = MissingMassSampler::new(dist, n, model);
    let per_chunk = run_chunked(trials, seed, |rng, count| {
        let mut hits = vec![0u64; cuts.len()];
        let mut seen = Vec::new();
        let mut stamp = 0;
        for _ in 0..count {
            let y = sampler.sample(rng, &mut seen, &mut stamp);
            for (h, &(cut, side)) in hits.iter_mut().zip(&cuts) {
                let hit = match side {
                    Side::Upper => y >= cut,
                    Side::Lower => y <= cut,
                };
                *h += hit as u64;
            }
        }
        hits
    });
    let mut hits = vec![0u64; cuts.len()];
    for chunk in per_chunk {
        for (h, c) in hits.iter_mut().zip(chunk) {
            *h += c;
        }
    }
    Ok(queries
        .iter()
        .zip(hits)
        .map(|(q, k)| {
            let (lo, hi) = clopper_pearson(k, trials, CONFIDENCE);
            DeviationEstimate {
                estimate: T::lit(k as f64 / trials as f64),
                ci_low: T::lit(lo),
                ci_high: T::lit(hi),
                trials,
                method: Method::MonteCarlo,
                side: q.side,
                epsilon: q.epsilon,
                n,
                mean,
            }
        })
        .collect())
}

pub fn mc_deviation_prob<T: Real>(
    dist: &DiscreteDistribution<T>,
    n: u64,
    epsilon: T,
    side: Side,
    trials: u64,
    seed: u64,
) -> Result<DeviationEstimate<T>> {
    let query = DeviationQuery { epsilon, side };
    Ok(mc_deviation_probs(dist, n, &[query], trials, seed, Model::Multinomial)?.remove(0))
}
