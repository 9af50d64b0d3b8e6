use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{precondition, Result};
use crate::exact::rational::serde_rational;
use crate::exact::{binom, Rational};
use crate::hypergraph::Hypergraph;

/// Trials handled by one RNG stream.
const CHUNK: u64 = 4096;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PermutationSamplerReport {
    pub trials: u64,
    /// Blocks per permutation, `floor(|V| / (k-1))`.
    pub blocks: usize,
    #[serde(with = "serde_rational")]
    pub mean_z: Rational,
    pub max_z: usize,
    #[serde(with = "serde_rational")]
    pub exact_expectation: Rational,
    pub std_error: f64,
}

impl PermutationSamplerReport {
    /// Distance of the sample mean from the exact expectation in standard
    /// errors; zero when both agree and the sample has no spread.
    pub fn z_score(&self) -> f64 {
        let diff = crate::exact::rational::to_f64(&(&self.mean_z - &self.exact_expectation));
        if self.std_error == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            diff.abs() / self.std_error
        }
    }
}

/// Shuffles the vertices, cuts them into consecutive blocks of size
/// `k - 1` and counts the blocks that are edges. Trial chunk `c` draws
/// from ChaCha stream `c` of `seed`, so results do not depend on the
/// number of worker threads.
pub fn permutation_sampler(h: &Hypergraph, k: usize, trials: u64, seed: u64) -> Result<PermutationSamplerReport> {
    if trials == 0 {
        return Err(precondition("sampler needs at least one trial"));
    }
    if k < 2 || h.r() as usize != k - 1 {
        return Err(precondition(format!(
            "sampler needs a ({})-uniform hypergraph, got r = {}",
            k.saturating_sub(1),
            h.r()
        )));
    }
    let r = k - 1;
    let verts: Vec<u32> = h.vertices().iter().collect();
    let blocks = verts.len() / r;
    let edges: HashSet<u128> = h.edges().iter().map(|e| e.mask()).collect();

    let chunks = trials.div_ceil(CHUNK);
    let parts: Vec<(u64, u128, usize)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let mut order = verts.clone();
            let todo = CHUNK.min(trials - c * CHUNK);
            let (mut sum, mut sum_sq, mut max) = (0u64, 0u128, 0usize);
            for _ in 0..todo {
                order.shuffle(&mut rng);
                let z = order
                    .chunks_exact(r)
                    .take(blocks)
                    .filter(|b| edges.contains(&b.iter().fold(0u128, |m, &v| m | 1 << (v - 1))))
                    .count();
                sum += z as u64;
                sum_sq += (z * z) as u128;
                max = max.max(z);
            }
            (sum, sum_sq, max)
        })
        .collect();

    let sum: u64 = parts.iter().map(|p| p.0).sum();
    let sum_sq: u128 = parts.iter().map(|p| p.1).sum();
    let max_z = parts.iter().map(|p| p.2).max().unwrap_or(0);
    let t = trials as f64;
    let mean = sum as f64 / t;
    let var = if trials > 1 {
        ((sum_sq as f64 - t * mean * mean) / (t - 1.0)).max(0.0)
    } else {
        0.0
    };
    let all = binom(verts.len() as i64, r as i64);
    Ok(PermutationSamplerReport {
        trials,
        blocks,
        mean_z: Rational::new(sum.into(), trials.into()),
        max_z,
        exact_expectation: Rational::new(num_bigint::BigInt::from(blocks) * h.edge_count(), all),
        std_error: (var / t).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::{enumerate_ksets, KSet};
    use crate::exact::int;
    use crate::hypergraph::{matching_number, DEFAULT_MATCHING_BUDGET};

    #[test]
    fn empty_and_complete() {
        let empty = Hypergraph::new(9, 2, []).unwrap();
        let rep = permutation_sampler(&empty, 3, 500, 1).unwrap();
        assert_eq!((rep.mean_z.clone(), rep.max_z), (int(0), 0));
        let full = Hypergraph::complete(9, 2).unwrap();
        let rep = permutation_sampler(&full, 3, 500, 1).unwrap();
        assert_eq!(rep.blocks, 4);
        assert_eq!(rep.mean_z, int(4));
        assert_eq!(rep.exact_expectation, int(4));
        assert_eq!(rep.z_score(), 0.0);
    }

    #[test]
    fn half_density_mean_is_unbiased() {
        // pairs with odd index sum: 20 of the 36 pairs of [9]; keep 18
        let edges: Vec<KSet> = enumerate_ksets(9, 2)
            .filter(|e| e.iter().sum::<u32>() % 2 == 1)
            .take(18)
            .collect();
        let h = Hypergraph::new(9, 2, edges).unwrap();
        let rep = permutation_sampler(&h, 3, 100_000, 7).unwrap();
        assert_eq!(rep.exact_expectation, Rational::new(72.into(), 36.into()));
        assert!(rep.z_score() < 5.0, "z = {}", rep.z_score());
        let nu = matching_number(&h, DEFAULT_MATCHING_BUDGET).unwrap().nu;
        assert!(rep.max_z <= nu);
    }

    #[test]
    fn seeded_runs_repeat() {
        let h = Hypergraph::new(7, 2, enumerate_ksets(7, 2).step_by(3)).unwrap();
        let a = permutation_sampler(&h, 3, 10_000, 3).unwrap();
        let b = permutation_sampler(&h, 3, 10_000, 3).unwrap();
        assert_eq!(a, b);
        assert!(permutation_sampler(&h, 2, 10, 3).is_err());
        assert!(permutation_sampler(&h, 3, 0, 3).is_err());
    }
}
