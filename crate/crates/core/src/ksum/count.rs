use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use super::instance::{KSumQuery, Scaled};
use crate::error::{precondition, Error, Result};
use crate::exact::{binom, binom_u64, Rational};

/// Default cap on `C(n, k)` for counting.
pub const DEFAULT_ENUM_BUDGET: u64 = 1_000_000_000;

pub(crate) trait Exact:
    Clone + Ord + Zero + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Neg<Output = Self>
{
}

impl<T> Exact for T where T: Clone + Ord + Zero + Send + Sync + Add<Output = T> + Sub<Output = T> + Neg<Output = T> {}

/// Counts `r`-subsets of a descending slice whose sum is `>= need`.
///
/// Indices are chosen in increasing order. A branch stops as soon as the
/// largest completion falls short of `need`, and counts a whole binomial
/// block at once when even the smallest completion reaches it.
struct Counter<'a, T> {
    vals: &'a [T],
    prefix: Vec<T>,
}

impl<'a, T: Exact> Counter<'a, T> {
    fn new(vals: &'a [T]) -> Self {
        let mut prefix = Vec::with_capacity(vals.len() + 1);
        prefix.push(T::zero());
        for v in vals {
            let last = prefix.last().expect("nonempty").clone();
            prefix.push(last + v.clone());
        }
        Self { vals, prefix }
    }

    fn window(&self, from: usize, len: usize) -> T {
        self.prefix[from + len].clone() - self.prefix[from].clone()
    }

    fn count(&self, start: usize, r: usize, need: &T) -> u64 {
        let n = self.vals.len();
        if r == 0 {
            return u64::from(T::zero() >= *need);
        }
        if n < start + r {
            return 0;
        }
        if r == 1 {
            return self.vals[start..].partition_point(|v| v >= need) as u64;
        }
        if self.window(start, r) < *need {
            return 0;
        }
        if self.window(n - r, r) >= *need {
            return binom_u64((n - start) as i64, r as i64);
        }
        let mut total = 0;
        for i in start..=n - r {
            if self.window(i, r) < *need {
                break;
            }
            total += self.count(i + 1, r - 1, &(need.clone() - self.vals[i].clone()));
        }
        total
    }

    fn count_par(&self, r: usize, need: &T) -> u64 {
        let n = self.vals.len();
        if r <= 1 || n < r {
            return self.count(0, r, need);
        }
        (0..=n - r)
            .into_par_iter()
            .map(|i| {
                if self.window(i, r) < *need {
                    0
                } else {
                    self.count(i + 1, r - 1, &(need.clone() - self.vals[i].clone()))
                }
            })
            .sum()
    }
}

pub(crate) fn count_at_least<T: Exact>(vals: &[T], r: usize, need: &T) -> u64 {
    Counter::new(vals).count_par(r, need)
}

fn check_budget(n: usize, k: usize, budget: u64) -> Result<()> {
    if binom(n as i64, k as i64) > BigInt::from(budget) {
        return Err(Error::BudgetExceeded {
            what: "k-set enumeration",
            limit: budget,
        });
    }
    Ok(())
}

/// Number of `k`-subsets with nonnegative sum.
pub fn count_nonnegative_ksums(q: &KSumQuery, budget: u64) -> Result<u64> {
    check_budget(q.n(), q.k, budget)?;
    Ok(match q.instance.scaled_integers() {
        Scaled::Small(v) => count_at_least(&v, q.k, &0),
        Scaled::Big(v) => count_at_least(&v, q.k, &BigInt::zero()),
    })
}

/// Number of `k`-subsets with negative sum.
pub fn count_negative_ksums(q: &KSumQuery, budget: u64) -> Result<u64> {
    let all = binom_u64(q.n() as i64, q.k as i64);
    Ok(all - count_nonnegative_ksums(q, budget)?)
}

/// Number of nonnegative `k`-sums that use position `i` (1-based).
pub fn count_through(q: &KSumQuery, i: usize, budget: u64) -> Result<u64> {
    if i == 0 || i > q.n() {
        return Err(precondition(format!("index {i} out of range 1..={}", q.n())));
    }
    check_budget(q.n() - 1, q.k - 1, budget)?;
    fn through<T: Exact>(v: &[T], i: usize, r: usize) -> u64 {
        let mut others = v.to_vec();
        let x = others.remove(i - 1);
        count_at_least(&others, r, &-x)
    }
    Ok(match q.instance.scaled_integers() {
        Scaled::Small(v) => through(&v, i, q.k - 1),
        Scaled::Big(v) => through(&v, i, q.k - 1),
    })
}

/// Plain enumeration of every `k`-subset, no pruning. Independent oracle
/// for [`count_nonnegative_ksums`].
pub fn count_nonnegative_ksums_bruteforce(q: &KSumQuery, budget: u64) -> Result<u64> {
    check_budget(q.n(), q.k, budget)?;
    fn all<T: Exact>(v: &[T], start: usize, r: usize, acc: T) -> u64 {
        if r == 0 {
            return u64::from(acc >= T::zero());
        }
        (start..=v.len() - r)
            .map(|i| all(v, i + 1, r - 1, acc.clone() + v[i].clone()))
            .sum()
    }
    fn top<T: Exact>(v: &[T], k: usize) -> u64 {
        (0..=v.len() - k)
            .into_par_iter()
            .map(|i| all(v, i + 1, k - 1, v[i].clone()))
            .sum()
    }
    Ok(match q.instance.scaled_integers() {
        Scaled::Small(v) => top(&v, q.k),
        Scaled::Big(v) => top(&v, q.k),
    })
}

/// True iff `x_i` plus any `k - 1` other values is nonnegative; by
/// sortedness it suffices to add the `k - 1` smallest others.
pub fn is_large(q: &KSumQuery, i: usize) -> bool {
    let n = q.n();
    let vals = q.instance.values();
    let mut sum = vals[i - 1].clone();
    let mut taken = 0;
    for j in (0..n).rev() {
        if taken == q.k - 1 {
            break;
        }
        if j != i - 1 {
            sum += &vals[j];
            taken += 1;
        }
    }
    !sum.is_negative()
}

/// True iff `x_i` takes part in at least `(1 - delta) C(n-1, k-1)`
/// nonnegative `k`-sums.
pub fn is_moderately_large(q: &KSumQuery, i: usize, delta: &Rational, budget: u64) -> Result<bool> {
    if delta.is_negative() || *delta >= Rational::from_integer(1.into()) {
        return Err(precondition("delta must lie in [0, 1)"));
    }
    let through = count_through(q, i, budget)?;
    let all = Rational::from_integer(binom((q.n() - 1) as i64, (q.k - 1) as i64));
    Ok(Rational::from_integer(through.into()) >= (Rational::from_integer(1.into()) - delta) * all)
}
