//! Seeded random instances and hypergraphs for the harness and tests.

use num_traits::Signed;
use rand::Rng;

use crate::combinatorics::enumerate_ksets;
use crate::error::{precondition, Result};
use crate::exact::{int, ratio, Rational};
use crate::hypergraph::Hypergraph;
use crate::ksum::{is_large, Instance, KSumQuery};

/// Retries before a rejection sampler gives up.
const MAX_ATTEMPTS: usize = 10_000;

fn random_rational<R: Rng>(rng: &mut R) -> Rational {
    ratio(rng.gen_range(-40..=40), rng.gen_range(1..=8))
}

/// Random rationals translated to total exactly zero.
pub fn zero_sum_instance<R: Rng>(rng: &mut R, n: usize) -> Instance {
    let vals: Vec<Rational> = (0..n).map(|_| random_rational(rng)).collect();
    let mean: Rational = vals.iter().sum::<Rational>() / int(n as i64);
    Instance::new(vals.into_iter().map(|v| v - &mean).collect()).expect("n >= 1")
}

/// A zero-sum instance, half the time shifted up by a random amount.
pub fn nonneg_sum_instance<R: Rng>(rng: &mut R, n: usize) -> Instance {
    let inst = zero_sum_instance(rng, n);
    if rng.gen_bool(0.5) {
        inst
    } else {
        inst.shifted(&ratio(rng.gen_range(1..=16), 8))
    }
}

/// Nonnegative total with no large value: the `k - 1` smallest values
/// sum to `-(x_1 + 1)`.
pub fn no_large_instance<R: Rng>(rng: &mut R, n: usize, k: usize) -> Result<Instance> {
    if k < 2 || n < k + 1 {
        return Err(precondition("needs k >= 2 and n > k"));
    }
    for _ in 0..MAX_ATTEMPTS {
        let mut vals: Vec<Rational> = (0..n - k + 1).map(|_| ratio(rng.gen_range(-24..=48), 24)).collect();
        let top = vals.iter().max().expect("nonempty").clone();
        let low = -(top + int(1)) / int(k as i64 - 1);
        vals.extend(std::iter::repeat(low).take(k - 1));
        let inst = Instance::new(vals)?;
        if inst.total().is_negative() {
            continue;
        }
        if !is_large(&KSumQuery::new(inst.clone(), k)?, 1) {
            return Ok(inst);
        }
    }
    Err(precondition("no instance without a large value found"))
}

/// For `k = 2`: positives in `[1/2, 1]` and more than `delta (n-1)`
/// values below `-1`, so `x_1` has fewer than `(1-delta)(n-1)` nonnegative
/// pair sums, while the total stays nonnegative.
pub fn moderate_instance<R: Rng>(rng: &mut R, n: usize, delta: &Rational) -> Result<Instance> {
    if delta.is_negative() || *delta >= int(1) {
        return Err(precondition("delta must lie in [0, 1)"));
    }
    let lo = (delta * int(n as i64 - 1)).floor().to_integer();
    let lo: usize = lo.try_into().map_err(|_| precondition("delta too large"))?;
    let lo = lo + 1;
    let hi = (n * 7) / 20;
    if lo > hi {
        return Err(precondition("delta too large for a nonnegative total"));
    }
    for _ in 0..MAX_ATTEMPTS {
        let m = rng.gen_range(lo..=hi);
        let mut vals: Vec<Rational> = (0..n - m).map(|_| ratio(rng.gen_range(50..=100), 100)).collect();
        vals.extend((0..m).map(|_| ratio(-rng.gen_range(101..=150), 100)));
        let inst = Instance::new(vals)?;
        if !inst.total().is_negative() {
            return Ok(inst);
        }
    }
    Err(precondition("no moderate instance found"))
}

/// Each `r`-subset of `[n]` is an edge with probability `p`.
pub fn random_hypergraph<R: Rng>(rng: &mut R, n: u32, r: u32, p: f64) -> Hypergraph {
    let edges: Vec<_> = enumerate_ksets(n, r).filter(|_| rng.gen_bool(p)).collect();
    Hypergraph::new(n, r, edges).expect("valid sizes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ksum::{is_moderately_large, DEFAULT_ENUM_BUDGET};
    use num_traits::Zero;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_meet_their_contracts() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..20 {
            assert!(zero_sum_instance(&mut rng, n).total().is_zero());
            assert!(!nonneg_sum_instance(&mut rng, n).total().is_negative());
        }
        for k in 2..=3 {
            let inst = no_large_instance(&mut rng, 40, k).unwrap();
            assert!(!inst.total().is_negative());
            assert!(!is_large(&KSumQuery::new(inst, k).unwrap(), 1));
        }
        let delta = ratio(1, 4);
        let inst = moderate_instance(&mut rng, 300, &delta).unwrap();
        assert!(!inst.total().is_negative());
        let q = KSumQuery::new(inst, 2).unwrap();
        assert!(!is_moderately_large(&q, 1, &delta, DEFAULT_ENUM_BUDGET).unwrap());
        assert!(moderate_instance(&mut rng, 300, &ratio(1, 2)).is_err());
    }
}
