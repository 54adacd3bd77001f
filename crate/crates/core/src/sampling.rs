//! Random sources for the Monte-Carlo routines.
//!
//! Draws from a finite distribution use Vose's alias method. Trials are cut
//! into fixed-size chunks; chunk `c` of a run with master seed `s` uses a
//! ChaCha8 stream seeded with `s` and stream id `c`, so results depend only
//! on `(seed, trials)` and not on how rayon schedules the chunks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Master seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_130_917;

/// Trials per independently seeded chunk.
pub const CHUNK_TRIALS: u64 = 1 << 14;

/// Alias table over non-negative weights (need not be normalized).
#[derive(Debug, Clone)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<u32>,
}

impl AliasTable {
    pub fn new(weights: &[f64]) -> Self {
        let n = weights.len();
        assert!(n > 0 && n <= u32::MAX as usize, "alias table needs 1..=u32::MAX outcomes");
        let total: f64 = weights.iter().sum();
        assert!(total > 0.0, "alias table needs positive total weight");
        let mut scaled: Vec<f64> = weights.iter().map(|w| w * n as f64 / total).collect();
        let mut prob = vec![0.0; n];
        let mut alias = vec![0u32; n];
        let (mut small, mut large): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| scaled[i] < 1.0);
        while let (Some(s), Some(&l)) = (small.pop(), large.last()) {
            prob[s] = scaled[s];
            alias[s] = l as u32;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Leftovers are 1 up to rounding.
        for i in large.into_iter().chain(small) {
            prob[i] = 1.0;
            alias[i] = i as u32;
        }
        Self { prob, alias }
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let i = rng.random_range(0..self.prob.len());
        if rng.random::<f64>() < self.prob[i] {
            i
        } else {
            self.alias[i] as usize
        }
    }
}

/// Generator for chunk `chunk` of a run seeded with `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Runs `trials` trials in chunks and returns the per-chunk results in chunk
/// order. `work` receives the chunk's generator and its trial count.
pub fn run_chunked<A, F>(trials: u64, seed: u64, work: F) -> Vec<A>
where
    A: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> A + Sync,
{
    let chunks = trials.div_ceil(CHUNK_TRIALS);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK_TRIALS.min(trials - c * CHUNK_TRIALS);
            let mut rng = chunk_rng(seed, c);
            work(&mut rng, count)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alias_frequencies_match_weights() {
        let w = [0.5, 0.25, 0.125, 0.125];
        let table = AliasTable::new(&w);
        let mut rng = chunk_rng(7, 0);
        let mut counts = [0u64; 4];
        let draws = 400_000;
        for _ in 0..draws {
            counts[table.sample(&mut rng)] += 1;
        }
        for (c, p) in counts.iter().zip(w) {
            let f = *c as f64 / draws as f64;
            // 5 standard errors.
            assert!((f - p).abs() < 5.0 * (p * (1.0 - p) / draws as f64).sqrt(), "{f} vs {p}");
        }
    }

    #[test]
    fn chunking_is_deterministic() {
        let sum = |seed| -> Vec<u64> {
            run_chunked(3 * CHUNK_TRIALS + 5, seed, |rng, count| (0..count).map(|_| rng.random_range(0..10u64)).sum())
        };
        let a = sum(1);
        assert_eq!(a.len(), 4);
        assert_eq!(a, sum(1));
        assert_ne!(a, sum(2));
    }

    #[test]
    fn single_outcome() {
        let table = AliasTable::new(&[3.0]);
        let mut rng = chunk_rng(0, 0);
        assert!((0..100).all(|_| table.sample(&mut rng) == 0));
    }
}
