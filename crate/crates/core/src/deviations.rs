//! Tail probabilities of sums of independent finite-support nonnegative
//! random variables: exact convolution, Monte Carlo, the small-deviation
//! lower bound, and a two-point search for the infimum.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, precondition, Error, Result};
use crate::exact::rational::{serde_rational, serde_rational_vec, to_f64};
use crate::exact::{format_rational, int, parse_rational, ratio, Rational};

/// Default cap on the product of support sizes for [`exact_tail`].
pub const DEFAULT_CONVOLUTION_BUDGET: u64 = 10_000_000;

/// Finite-support distribution on the nonnegative rationals. Atoms are
/// sorted by value, merged, with positive probabilities summing to 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(String, String)>", into = "Vec<(String, String)>")]
pub struct DiscreteDistribution {
    atoms: Vec<(Rational, Rational)>,
}

impl TryFrom<Vec<(String, String)>> for DiscreteDistribution {
    type Error = Error;

    fn try_from(raw: Vec<(String, String)>) -> Result<Self> {
        let atoms = raw
            .iter()
            .map(|(v, p)| Ok((parse_rational(v)?, parse_rational(p)?)))
            .collect::<Result<Vec<_>>>()?;
        DiscreteDistribution::new(atoms)
    }
}

impl From<DiscreteDistribution> for Vec<(String, String)> {
    fn from(d: DiscreteDistribution) -> Self {
        d.atoms
            .iter()
            .map(|(v, p)| (format_rational(v), format_rational(p)))
            .collect()
    }
}

impl DiscreteDistribution {
    pub fn new(atoms: Vec<(Rational, Rational)>) -> Result<Self> {
        let mut merged: BTreeMap<Rational, Rational> = BTreeMap::new();
        for (v, p) in atoms {
            if v.is_negative() {
                return Err(invalid("atom values must be nonnegative"));
            }
            if !p.is_positive() {
                return Err(invalid("atom probabilities must be positive"));
            }
            *merged.entry(v).or_insert_with(Rational::zero) += p;
        }
        if merged.values().sum::<Rational>() != Rational::one() {
            return Err(invalid("probabilities must sum to 1"));
        }
        Ok(Self {
            atoms: merged.into_iter().collect(),
        })
    }

    /// `0` with probability `1 - mean/a` and `a` with probability `mean/a`.
    pub fn two_point(mean: &Rational, a: &Rational) -> Result<Self> {
        if mean.is_negative() || a < mean || !a.is_positive() {
            return Err(invalid("two-point law needs 0 <= mean <= a, a > 0"));
        }
        let hi = mean / a;
        let mut atoms = vec![(a.clone(), hi.clone())];
        if hi < Rational::one() {
            atoms.push((Rational::zero(), Rational::one() - hi));
        }
        atoms.retain(|(_, p)| p.is_positive());
        if atoms.is_empty() {
            atoms.push((Rational::zero(), Rational::one()));
        }
        Self::new(atoms)
    }

    pub fn atoms(&self) -> &[(Rational, Rational)] {
        &self.atoms
    }

    pub fn mean(&self) -> Rational {
        self.atoms.iter().map(|(v, p)| v * p).sum()
    }

    pub fn max_value(&self) -> &Rational {
        &self.atoms.last().expect("nonempty").0
    }
}

/// Independent variables and a threshold `m + delta`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DeviationQueryJson", into = "DeviationQueryJson")]
pub struct DeviationQuery {
    pub threshold: Rational,
    pub distributions: Vec<DiscreteDistribution>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeviationQueryJson {
    #[serde(with = "serde_rational")]
    pub threshold: Rational,
    pub distributions: Vec<DiscreteDistribution>,
    /// Exact expectations; recomputed on output and checked on input.
    #[serde(default, with = "opt_rational_vec", skip_serializing_if = "Option::is_none")]
    pub means: Option<Vec<Rational>>,
}

mod opt_rational_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Vec<Rational>>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(v) => serde_rational_vec::serialize(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<Rational>>, D::Error> {
        serde_rational_vec::deserialize(d).map(Some)
    }
}

impl TryFrom<DeviationQueryJson> for DeviationQuery {
    type Error = Error;

    fn try_from(raw: DeviationQueryJson) -> Result<Self> {
        let q = DeviationQuery::new(raw.distributions, raw.threshold)?;
        if let Some(means) = raw.means {
            if means != q.means() {
                return Err(invalid("means field disagrees with the distributions"));
            }
        }
        Ok(q)
    }
}

impl From<DeviationQuery> for DeviationQueryJson {
    fn from(q: DeviationQuery) -> Self {
        DeviationQueryJson {
            means: Some(q.means()),
            threshold: q.threshold,
            distributions: q.distributions,
        }
    }
}

impl DeviationQuery {
    pub fn new(distributions: Vec<DiscreteDistribution>, threshold: Rational) -> Result<Self> {
        if distributions.is_empty() {
            return Err(invalid("query needs at least one distribution"));
        }
        Ok(Self {
            threshold,
            distributions,
        })
    }

    pub fn m(&self) -> usize {
        self.distributions.len()
    }

    pub fn means(&self) -> Vec<Rational> {
        self.distributions.iter().map(|d| d.mean()).collect()
    }
}

/// `min{delta/(1+delta), 1/13}`.
pub fn feige_bound(_m: usize, delta: &Rational) -> Result<Rational> {
    if !delta.is_positive() {
        return Err(precondition("delta must be positive"));
    }
    let tail = delta / (Rational::one() + delta);
    Ok(tail.min(ratio(1, 13)))
}

/// Exact `Pr(X_1 + ... + X_m < threshold)` by iterated convolution, with
/// equal partial sums merged.
pub fn exact_tail(q: &DeviationQuery, budget: u64) -> Result<Rational> {
    let product = q
        .distributions
        .iter()
        .try_fold(1u64, |acc, d| acc.checked_mul(d.atoms.len() as u64));
    if product.map_or(true, |p| p > budget) {
        return Err(Error::BudgetExceeded {
            what: "exact convolution",
            limit: budget,
        });
    }
    let mut dist: BTreeMap<Rational, Rational> = BTreeMap::new();
    dist.insert(Rational::zero(), Rational::one());
    for d in &q.distributions {
        let mut next: BTreeMap<Rational, Rational> = BTreeMap::new();
        for (s, ps) in &dist {
            // sums already at or past the threshold stay there
            if *s >= q.threshold {
                *next.entry(s.clone()).or_insert_with(Rational::zero) += ps;
                continue;
            }
            for (v, pv) in &d.atoms {
                *next.entry(s + v).or_insert_with(Rational::zero) += ps * pv;
            }
        }
        dist = next;
    }
    Ok(dist.range(..q.threshold.clone()).map(|(_, p)| p).sum())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FeigeCheck {
    pub m: usize,
    #[serde(with = "serde_rational")]
    pub delta: Rational,
    #[serde(with = "serde_rational")]
    pub tail: Rational,
    #[serde(with = "serde_rational")]
    pub bound: Rational,
    pub holds: bool,
    /// Report only: whether the tail also clears `min{delta/(1+delta), 1/e}`.
    pub above_one_over_e: bool,
}

/// Checks the small-deviation bound with `m` the number of variables and
/// `delta = threshold - m`.
pub fn feige_check(q: &DeviationQuery, budget: u64) -> Result<FeigeCheck> {
    if let Some(i) = q.means().iter().position(|mu| *mu > Rational::one()) {
        return Err(precondition(format!("variable {} has expectation above 1", i + 1)));
    }
    let m = q.m();
    let delta = &q.threshold - int(m as i64);
    let bound = feige_bound(m, &delta)?;
    let tail = exact_tail(q, budget)?;
    let d = to_f64(&delta);
    let e_bound = (d / (1.0 + d)).min((-1.0f64).exp());
    Ok(FeigeCheck {
        m,
        holds: tail >= bound,
        above_one_over_e: to_f64(&tail) >= e_bound,
        delta,
        tail,
        bound,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub trials: u64,
}

const MC_CHUNK: u64 = 16_384;

/// Monte Carlo estimate of the tail. Atom values are scaled to integers so
/// each sampled event is decided exactly; chunk `c` of trials uses ChaCha
/// stream `c` of `seed`.
pub fn monte_carlo_tail(q: &DeviationQuery, trials: u64, seed: u64) -> Result<TailEstimate> {
    if trials == 0 {
        return Err(precondition("needs at least one trial"));
    }
    let denom = q
        .distributions
        .iter()
        .flat_map(|d| d.atoms.iter().map(|(v, _)| v.denom().clone()))
        .chain(std::iter::once(q.threshold.denom().clone()))
        .fold(BigInt::one(), |acc, d| acc.lcm(&d));
    let scale = |r: &Rational| -> Result<i128> {
        (r.numer() * (&denom / r.denom()))
            .to_i128()
            .filter(|v| v.abs() < i128::MAX / 1024)
            .ok_or_else(|| precondition("values too large for sampling"))
    };
    let threshold = scale(&q.threshold)?;
    let laws: Vec<(Vec<f64>, Vec<i128>)> = q
        .distributions
        .iter()
        .map(|d| {
            let mut acc = 0.0;
            let cum = d
                .atoms
                .iter()
                .map(|(_, p)| {
                    acc += to_f64(p);
                    acc
                })
                .collect();
            let vals = d.atoms.iter().map(|(v, _)| scale(v)).collect::<Result<_>>()?;
            Ok((cum, vals))
        })
        .collect::<Result<_>>()?;

    let chunks = trials.div_ceil(MC_CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let todo = MC_CHUNK.min(trials - c * MC_CHUNK);
            let mut hits = 0u64;
            for _ in 0..todo {
                let mut sum = 0i128;
                for (cum, vals) in &laws {
                    let u: f64 = rng.gen();
                    let j = cum.partition_point(|&c| c <= u).min(vals.len() - 1);
                    sum += vals[j];
                }
                hits += u64::from(sum < threshold);
            }
            hits
        })
        .sum();
    let p = hits as f64 / trials as f64;
    Ok(TailEstimate {
        estimate: p,
        std_error: (p * (1.0 - p) / trials as f64).sqrt(),
        trials,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SamuelsResult {
    #[serde(with = "serde_rational")]
    pub best_prob: Rational,
    /// Upper atom of each two-point law.
    #[serde(with = "serde_rational_vec")]
    pub upper_atoms: Vec<Rational>,
    pub best_distributions: Vec<DiscreteDistribution>,
    pub exhaustive: bool,
    pub evaluated: u64,
}

/// Largest grid explored exhaustively.
const EXHAUSTIVE_LIMIT: u64 = 1_000_000;

/// Exploratory minimization of the tail over independent two-point laws
/// `{0, a_i}` with the given means. Candidate atoms are the means
/// themselves and `j * threshold / grid` for `j = 1..=2*grid`, kept when
/// `>= mean`. Small grids are searched exhaustively, larger ones by
/// coordinate descent. No optimality is claimed.
pub fn samuels_search(means: &[Rational], threshold: &Rational, grid: u32) -> Result<SamuelsResult> {
    let m = means.len();
    if m == 0 || m > 4 {
        return Err(precondition("search supports 1 <= m <= 4"));
    }
    if grid == 0 || !threshold.is_positive() || means.iter().any(|mu| !mu.is_positive()) {
        return Err(precondition("needs grid >= 1, positive threshold and positive means"));
    }
    let candidates: Vec<Vec<Rational>> = means
        .iter()
        .map(|mu| {
            let mut c: Vec<Rational> = (1..=2 * grid as i64)
                .map(|j| threshold * ratio(j, grid as i64))
                .filter(|a| a >= mu)
                .collect();
            c.push(mu.clone());
            c.sort();
            c.dedup();
            c
        })
        .collect();
    let eval = |idx: &[usize]| -> Rational {
        let laws = idx
            .iter()
            .zip(means)
            .zip(&candidates)
            .map(|((&j, mu), c)| DiscreteDistribution::two_point(mu, &c[j]).expect("a >= mean"))
            .collect();
        let q = DeviationQuery::new(laws, threshold.clone()).expect("nonempty");
        exact_tail(&q, u64::MAX).expect("tiny support")
    };

    let sizes: Vec<usize> = candidates.iter().map(|c| c.len()).collect();
    let total = sizes.iter().try_fold(1u64, |acc, &s| acc.checked_mul(s as u64));
    let exhaustive = total.is_some_and(|t| t <= EXHAUSTIVE_LIMIT);
    let (best_idx, best_prob, evaluated) = if exhaustive {
        let total = total.expect("checked");
        let decode = |mut code: u64| -> Vec<usize> {
            sizes
                .iter()
                .map(|&s| {
                    let j = (code % s as u64) as usize;
                    code /= s as u64;
                    j
                })
                .collect()
        };
        let (p, code) = (0..total)
            .into_par_iter()
            .map(|code| (eval(&decode(code)), code))
            .min()
            .expect("nonempty grid");
        (decode(code), p, total)
    } else {
        let mut idx: Vec<usize> = sizes.iter().map(|&s| s / 2).collect();
        let mut best = eval(&idx);
        let mut evaluated = 1u64;
        for _ in 0..50 {
            let mut improved = false;
            for coord in 0..m {
                let (p, j) = (0..sizes[coord])
                    .into_par_iter()
                    .map(|j| {
                        let mut trial = idx.clone();
                        trial[coord] = j;
                        (eval(&trial), j)
                    })
                    .min()
                    .expect("nonempty");
                evaluated += sizes[coord] as u64;
                if p < best {
                    best = p;
                    idx[coord] = j;
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        (idx, best, evaluated)
    };
    let upper_atoms: Vec<Rational> = best_idx.iter().zip(&candidates).map(|(&j, c)| c[j].clone()).collect();
    let best_distributions = upper_atoms
        .iter()
        .zip(means)
        .map(|(a, mu)| DiscreteDistribution::two_point(mu, a))
        .collect::<Result<_>>()?;
    Ok(SamuelsResult {
        best_prob,
        upper_atoms,
        best_distributions,
        exhaustive,
        evaluated,
    })
}

/// Random query: `m` variables with up to three atoms each, expectations
/// at most 1, threshold `m + delta` with `0 < delta <= 2`.
pub fn random_query<R: Rng>(rng: &mut R, m: usize) -> DeviationQuery {
    let laws = (0..m)
        .map(|_| {
            let atoms: Vec<(Rational, Rational)> = (0..3)
                .map(|_| (ratio(rng.gen_range(0..=16), 4), int(rng.gen_range(1..=6))))
                .collect();
            let weight: Rational = atoms.iter().map(|(_, w)| w).sum();
            let atoms: Vec<(Rational, Rational)> = atoms.into_iter().map(|(v, w)| (v, w / &weight)).collect();
            let mean: Rational = atoms.iter().map(|(v, p)| v * p).sum();
            let atoms = if mean > Rational::one() {
                let shrink = ratio(rng.gen_range(1..=8), 8) / mean;
                atoms.into_iter().map(|(v, p)| (v * &shrink, p)).collect()
            } else {
                atoms
            };
            DiscreteDistribution::new(atoms).expect("valid atoms")
        })
        .collect();
    let delta = ratio(rng.gen_range(1..=48), 24);
    DeviationQuery::new(laws, int(m as i64) + delta).expect("m >= 1")
}
