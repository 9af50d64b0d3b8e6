//! Explicit extremal instances, the transforms between zero-sum instances
//! and fractional covers, and the exact `A(n, k)` search.

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{count_ksets, enumerate_ksets, for_each_upset, KSet, SetFamily, MAX_GROUND};
use crate::error::{invalid, precondition, Error, Result};
use crate::exact::rational::{serde_rational, serde_rational_vec};
use crate::exact::{
    binom_u64, int, lp_strict_feasible, ratio, Constraint, Rational, Relation, StrictConstraint, StrictRelation,
    StrictSystem, VarBounds,
};
use crate::hypergraph::Hypergraph;
use crate::ksum::{count_nonnegative_ksums, Instance, KSumQuery};

/// `(n-1, -1, ..., -1)`.
pub fn star_instance(n: usize) -> Result<Instance> {
    if n < 2 {
        return Err(precondition("star instance needs n >= 2"));
    }
    let mut v = vec![-1i64; n];
    v[0] = n as i64 - 1;
    Instance::from_ints(&v)
}

/// `n = 3k+1` values: three equal to `-(3k-2)` and `3k-2` equal to 3.
pub fn small_n_counterexample(k: usize) -> Result<Instance> {
    if k <= 2 {
        return Err(precondition("the 3k+1 construction needs k > 2"));
    }
    let big = 3 * k as i64 - 2;
    let mut v = vec![-big; 3];
    v.extend(std::iter::repeat(3).take(3 * k - 2));
    Instance::from_ints(&v)
}

/// `x_1 = k(k-1)n`, `x_2 = n-2`, `x_3..x_{n-k+1} = -1`, and the last
/// `k-1` values `-(kn+1)`.
pub fn hm_construction_1(n: usize, k: usize) -> Result<Instance> {
    if k < 2 || n < 2 * k + 1 {
        return Err(precondition("needs k >= 2 and n >= 2k+1"));
    }
    let (nn, kk) = (n as i64, k as i64);
    let mut v = vec![kk * (kk - 1) * nn, nn - 2];
    v.extend(std::iter::repeat(-1).take(n - k - 1));
    v.extend(std::iter::repeat(-(kk * nn + 1)).take(k - 1));
    Instance::from_ints(&v)
}

/// `k = 3` only: `x_1 = x_2 = 1`, `x_3..x_{n-1} = 1/(2(n-3))`, `x_n = -3/2`.
pub fn hm_construction_2(n: usize) -> Result<Instance> {
    if n < 6 {
        return Err(precondition("needs n >= 6"));
    }
    let mut v = vec![int(1), int(1)];
    v.extend(std::iter::repeat(ratio(1, 2 * (n as i64 - 3))).take(n - 3));
    v.push(ratio(-3, 2));
    Instance::new(v)
}

/// A `k`-uniform hypergraph with vertex weights in `[0, 1]` covering every
/// edge and summing to strictly less than `n/k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CoverWitnessJson")]
pub struct CoverWitness {
    pub hypergraph: Hypergraph,
    /// `weights[i-1]` is the weight of vertex `i`.
    #[serde(with = "serde_rational_vec")]
    pub weights: Vec<Rational>,
    #[serde(with = "serde_rational")]
    pub total_weight: Rational,
}

#[derive(Deserialize)]
struct CoverWitnessJson {
    hypergraph: Hypergraph,
    #[serde(with = "serde_rational_vec")]
    weights: Vec<Rational>,
}

impl TryFrom<CoverWitnessJson> for CoverWitness {
    type Error = Error;

    fn try_from(raw: CoverWitnessJson) -> Result<Self> {
        CoverWitness::new(raw.hypergraph, raw.weights)
    }
}

impl CoverWitness {
    /// Validates every invariant exactly.
    pub fn new(hypergraph: Hypergraph, weights: Vec<Rational>) -> Result<Self> {
        let n = hypergraph.n() as usize;
        let k = hypergraph.r() as i64;
        if weights.len() != n {
            return Err(invalid(format!("expected {n} weights, got {}", weights.len())));
        }
        if weights.iter().any(|w| w.is_negative() || *w > Rational::one()) {
            return Err(invalid("weights must lie in [0, 1]"));
        }
        if let Some(e) = hypergraph
            .edges()
            .iter()
            .find(|e| e.iter().map(|i| &weights[i as usize - 1]).sum::<Rational>() < Rational::one())
        {
            return Err(invalid(format!("edge {e} is not covered")));
        }
        let total_weight: Rational = weights.iter().sum();
        if total_weight >= ratio(n as i64, k) {
            return Err(invalid("total weight must be strictly below n/k"));
        }
        Ok(Self {
            hypergraph,
            weights,
            total_weight,
        })
    }
}

fn kset_sum(values: &[Rational], s: KSet) -> Rational {
    s.iter().map(|i| &values[i as usize - 1]).sum()
}

/// Scales so every `|x_i| <= 1/(2k)`, adds `eps` equal to half the
/// tighter of the two slacks (keeping negative k-sums negative and
/// values below `1/k`), and sets `v(i) = 1/k - x'_i`. The edges are the
/// k-sets with `sum v >= 1`, which are exactly the negative k-sums.
pub fn reals_to_cover_witness(inst: &Instance, k: usize, budget: u64) -> Result<CoverWitness> {
    let n = inst.n();
    if !inst.total().is_zero() {
        return Err(precondition("instance total must be zero"));
    }
    if k < 2 || k > n || n > MAX_GROUND as usize {
        return Err(precondition(format!("needs 2 <= k <= n <= {MAX_GROUND}")));
    }
    let kk = int(k as i64);
    let max_abs = inst.max_abs();
    let scale = if max_abs.is_zero() {
        Rational::one()
    } else {
        Rational::one() / (int(2) * &kk * max_abs)
    };
    let y = inst.scaled(&scale)?;
    let vals = y.values();

    let closest_negative = enumerate_ksets(n as u32, k as u32)
        .map(|s| kset_sum(vals, s))
        .filter(|s| s.is_negative())
        .max();
    let below_cap = kk.recip() - &vals[0];
    let slack = match closest_negative {
        Some(s) => (-s / &kk).min(below_cap),
        None => below_cap,
    };
    let eps = slack / int(2);
    let weights: Vec<Rational> = vals.iter().map(|x| kk.recip() - x - &eps).collect();
    let edges: Vec<KSet> = enumerate_ksets(n as u32, k as u32)
        .filter(|&s| kset_sum(&weights, s) >= Rational::one())
        .collect();
    let h = Hypergraph::new(n as u32, k as u32, edges)?;
    let w = CoverWitness::new(h, weights)?;

    let count = count_nonnegative_ksums(&KSumQuery::new(inst.clone(), k)?, budget)?;
    assert_eq!(
        w.hypergraph.edge_count() as u64,
        binom_u64(n as i64, k as i64) - count,
        "edges are the negative k-sums"
    );
    Ok(w)
}

/// `x_i = 1/k - delta/n - v(i)` with `delta = n/k - sum v`; the total is
/// zero and every edge becomes a negative k-sum.
pub fn cover_witness_to_reals(w: &CoverWitness) -> Result<Instance> {
    let w = CoverWitness::new(w.hypergraph.clone(), w.weights.clone())?;
    let n = int(w.weights.len() as i64);
    let k = int(w.hypergraph.r() as i64);
    let delta = &n / &k - &w.total_weight;
    let base = k.recip() - delta / n;
    let inst = Instance::new(w.weights.iter().map(|v| &base - v).collect())?;
    debug_assert!(inst.total().is_zero());
    Ok(inst)
}

/// Exact minimum number of nonnegative k-sums over `n` values with
/// nonnegative total.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnkResult {
    pub n: usize,
    pub k: usize,
    pub value: usize,
    pub witness_instance: Instance,
    pub witness_family: SetFamily,
    /// `C(n,k)` minus the largest strictly feasible cover found by the
    /// dual search; always equal to `value`.
    pub dual_value: usize,
    pub upsets_examined: u64,
}

/// Default cap on the number of upsets enumerated by [`compute_ank`].
pub const DEFAULT_ANK_BUDGET: u64 = 5_000_000;

/// Sorted instance (`x_1 >= ... >= x_n`, `|x_i| <= 1`) with total `>= 0`,
/// every set of `family` summing to `>= 0` and every other set to `< 0`.
pub fn realizing_system(n: usize, k: usize, family: &[KSet]) -> StrictSystem {
    let mut sys = StrictSystem::new(n);
    sys.bounds = vec![
        VarBounds {
            lower: Some(int(-1)),
            upper: Some(int(1)),
        };
        n
    ];
    let row = |s: KSet| -> Vec<Rational> {
        (1..=n as u32)
            .map(|i| {
                if s.contains(i) {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect()
    };
    for i in 0..n.saturating_sub(1) {
        let mut c = vec![Rational::zero(); n];
        c[i] = int(1);
        c[i + 1] = int(-1);
        sys.weak(Constraint::new(c, Relation::Ge, Rational::zero()));
    }
    sys.weak(Constraint::new(
        vec![Rational::one(); n],
        Relation::Ge,
        Rational::zero(),
    ));
    for s in enumerate_ksets(n as u32, k as u32) {
        if family.contains(&s) {
            sys.weak(Constraint::new(row(s), Relation::Ge, Rational::zero()));
        } else {
            sys.strict(StrictConstraint::new(row(s), StrictRelation::Lt, Rational::zero()));
        }
    }
    sys
}

/// Weights `v in [0,1]^n` with `sum v < n/k` strictly and every set of
/// `edges` covered.
pub fn cover_system(n: usize, k: usize, edges: &[KSet]) -> StrictSystem {
    let mut sys = StrictSystem::new(n);
    sys.bounds = vec![VarBounds::unit(); n];
    for &e in edges {
        let c = (1..=n as u32)
            .map(|i| {
                if e.contains(i) {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect();
        sys.weak(Constraint::new(c, Relation::Ge, Rational::one()));
    }
    sys.strict(StrictConstraint::new(
        vec![Rational::one(); n],
        StrictRelation::Lt,
        ratio(n as i64, k as i64),
    ));
    sys
}

/// Searches dominance upsets of k-sets in order of size (ties broken by
/// the sorted member list) for the first one realizable by a sorted
/// instance. The search is legitimate because the nonnegative k-sets of a
/// sorted instance always form such an upset, and the star family bounds
/// the answer by `C(n-1, k-1)`. The dual encoding is searched as well.
pub fn compute_ank(n: usize, k: usize, budget: u64) -> Result<AnkResult> {
    if k == 0 || k > n || n > 16 {
        return Err(precondition("compute_ank needs 1 <= k <= n <= 16"));
    }
    let cap = binom_u64(n as i64 - 1, k as i64 - 1) as usize;
    let mut upsets: Vec<Vec<KSet>> = Vec::new();
    let examined = for_each_upset(n as u32, k as u32, cap, budget, |f| {
        let mut f = f.to_vec();
        f.sort();
        upsets.push(f);
        true
    })?;
    upsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));

    let primal = first_feasible(&upsets, |f| realizing_system(n, k, f))?;
    let (f, point) = primal.ok_or_else(|| precondition("no realizable upset found"))?;
    let witness_instance = Instance::new(point)?;
    let count = count_nonnegative_ksums(&KSumQuery::new(witness_instance.clone(), k)?, u64::MAX)?;
    assert_eq!(count as usize, f.len(), "witness realizes the family");

    let total = count_ksets(n as u32, k as u32);
    let dual = first_feasible(&upsets, |f| {
        let edges: Vec<KSet> = enumerate_ksets(n as u32, k as u32).filter(|s| !f.contains(s)).collect();
        cover_system(n, k, &edges)
    })?;
    let dual_value = dual.map(|(g, _)| g.len()).unwrap_or(total);

    Ok(AnkResult {
        n,
        k,
        value: f.len(),
        witness_family: SetFamily::from_sets(n as u32, k as u32, f.iter().copied())?,
        witness_instance,
        dual_value,
        upsets_examined: examined,
    })
}

type Feasible = Option<(Vec<KSet>, Vec<Rational>)>;

/// First family in `families` whose system is strictly feasible; each
/// size class is tested in parallel and the earliest hit wins.
fn first_feasible<F>(families: &[Vec<KSet>], system: F) -> Result<Feasible>
where
    F: Fn(&[KSet]) -> StrictSystem + Sync,
{
    let mut start = 0;
    while start < families.len() {
        let size = families[start].len();
        let end = start + families[start..].iter().take_while(|f| f.len() == size).count();
        let hits: Vec<Option<Vec<Rational>>> = families[start..end]
            .par_iter()
            .map(|f| {
                let res = lp_strict_feasible(&system(f))?;
                Ok(res.feasible.then_some(res.witness))
            })
            .collect::<Result<_>>()?;
        if let Some((i, w)) = hits.into_iter().enumerate().find_map(|(i, h)| h.map(|w| (i, w))) {
            return Ok(Some((families[start + i].clone(), w)));
        }
        start = end;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ksum::{count_nonnegative_ksums_bruteforce, DEFAULT_ENUM_BUDGET};

    fn count(inst: &Instance, k: usize) -> u64 {
        count_nonnegative_ksums(&KSumQuery::new(inst.clone(), k).unwrap(), DEFAULT_ENUM_BUDGET).unwrap()
    }

    #[test]
    fn star_counts() {
        assert_eq!(count(&star_instance(8).unwrap(), 3), 21);
        assert_eq!(count(&star_instance(4).unwrap(), 2), 3);
        let s = star_instance(2).unwrap();
        assert_eq!(s.values(), &[int(1), int(-1)]);
        assert_eq!(count(&s, 1), 1);
        assert!(star_instance(1).is_err());
    }

    #[test]
    fn small_n_counts() {
        let inst = small_n_counterexample(3).unwrap();
        assert!(inst.total().is_zero());
        assert_eq!(count(&inst, 3), 35);
        assert_eq!(count(&small_n_counterexample(4).unwrap(), 4), 210);
        assert!(small_n_counterexample(2).is_err());
    }

    #[test]
    fn hm1_values_and_count() {
        let inst = hm_construction_1(20, 3).unwrap();
        let mut expect = vec![int(120), int(18)];
        expect.extend(vec![int(-1); 16]);
        expect.extend(vec![int(-61); 2]);
        assert_eq!(inst.values(), expect.as_slice());
        assert!(inst.total().is_zero());
        for (n, k) in [(20, 3), (30, 2), (25, 4)] {
            let inst = hm_construction_1(n, k).unwrap();
            let q = KSumQuery::new(inst, k).unwrap();
            let c = count_nonnegative_ksums_bruteforce(&q, DEFAULT_ENUM_BUDGET).unwrap();
            assert_eq!(num_bigint::BigInt::from(c), crate::ksum::hm_bound(n, k), "n={n} k={k}");
        }
    }

    #[test]
    fn hm2_values() {
        let inst = hm_construction_2(10).unwrap();
        assert_eq!(inst.total(), &int(1));
        // nonnegative triples through x_2 but not x_1
        let vals = inst.values();
        let through_2: usize = enumerate_ksets(10, 3)
            .filter(|s| s.contains(2) && !s.contains(1))
            .filter(|&s| !kset_sum(vals, s).is_negative())
            .count();
        assert_eq!(through_2, binom_u64(7, 2) as usize);
        assert!(hm_construction_2(5).is_err());
    }

    #[test]
    fn cover_witness_examples() {
        let w = reals_to_cover_witness(&star_instance(4).unwrap(), 2, DEFAULT_ENUM_BUDGET).unwrap();
        assert_eq!(w.hypergraph.edge_count(), 3);
        let zero = Instance::from_ints(&[0; 5]).unwrap();
        let w = reals_to_cover_witness(&zero, 2, DEFAULT_ENUM_BUDGET).unwrap();
        assert_eq!(w.hypergraph.edge_count(), 0);
        assert!(w.weights.windows(2).all(|p| p[0] == p[1]));
        let w = reals_to_cover_witness(&small_n_counterexample(3).unwrap(), 3, DEFAULT_ENUM_BUDGET).unwrap();
        assert_eq!(w.hypergraph.edge_count(), 85);
        assert!(w.total_weight < ratio(10, 3));
        assert!(reals_to_cover_witness(&star_instance(4).unwrap().shifted(&int(1)), 2, DEFAULT_ENUM_BUDGET).is_err());
    }

    #[test]
    fn cover_to_reals_examples() {
        let empty = Hypergraph::new(6, 3, []).unwrap();
        let w = CoverWitness::new(empty, vec![ratio(1, 4); 6]).unwrap();
        let inst = cover_witness_to_reals(&w).unwrap();
        assert!(inst.values().iter().all(|v| v.is_zero()));
        assert_eq!(count(&inst, 3), 20);

        let tri = Hypergraph::new(3, 2, enumerate_ksets(3, 2)).unwrap();
        assert!(CoverWitness::new(tri.clone(), vec![ratio(1, 2); 3]).is_err());
        assert!(CoverWitness::new(tri, vec![ratio(1, 3); 3]).is_err());
    }

    #[test]
    fn cover_witness_json_validates() {
        let w = reals_to_cover_witness(&star_instance(4).unwrap(), 2, DEFAULT_ENUM_BUDGET).unwrap();
        let s = serde_json::to_string(&w).unwrap();
        let back: CoverWitness = serde_json::from_str(&s).unwrap();
        assert_eq!(back, w);
        let bad = s.replace(
            &format!("\"{}\"", crate::exact::format_rational(&w.weights[3])),
            "\"0/1\"",
        );
        assert!(serde_json::from_str::<CoverWitness>(&bad).is_err());
    }

    #[test]
    fn ank_small_values() {
        for n in 1..=5 {
            let r = compute_ank(n, 1, DEFAULT_ANK_BUDGET).unwrap();
            assert_eq!((r.value, r.dual_value), (1, 1), "n={n}");
        }
        let r = compute_ank(4, 2, DEFAULT_ANK_BUDGET).unwrap();
        assert_eq!((r.value, r.dual_value), (3, 3));
        assert_eq!(count(&r.witness_instance, 2), 3);
        assert!(!r.witness_instance.total().is_negative());
    }
}
