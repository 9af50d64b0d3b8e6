//! Uniform hypergraphs: integral and fractional matching numbers, the
//! fractional cover LP, and the matching-number edge extremal comparator.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{count_ksets, enumerate_ksets, for_each_upset, ground_mask, KSet, SetFamily, MAX_GROUND};
use crate::error::{invalid, precondition, Error, Result};
use crate::exact::rational::{pow, serde_rational};
use crate::exact::{binom, int, ratio, LpProblem, LpStatus, Rational, Relation, Sense};

/// Default node budget for [`matching_number`].
pub const DEFAULT_MATCHING_BUDGET: u64 = 50_000_000;

/// Hypergraphs with more edges than this skip the root LP bound in
/// [`matching_number`] and prune with the uniform cover instead.
const LP_BOUND_EDGE_LIMIT: usize = 4_000;

/// An `r`-uniform hypergraph on a vertex set inside `{1..n}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "HypergraphJson", into = "HypergraphJson")]
pub struct Hypergraph {
    n: u32,
    r: u32,
    vertices: KSet,
    edges: Vec<KSet>,
}

/// Same layout as the set-family JSON, with an optional explicit vertex
/// list for hypergraphs whose vertex set is a proper subset of `[n]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HypergraphJson {
    pub n: u32,
    pub k: u32,
    pub edges: Vec<KSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<KSet>,
}

impl TryFrom<HypergraphJson> for Hypergraph {
    type Error = Error;

    fn try_from(raw: HypergraphJson) -> Result<Self> {
        let h = Hypergraph::new(raw.n, raw.k, raw.edges)?;
        match raw.vertices {
            Some(v) => h.with_vertices(v),
            None => Ok(h),
        }
    }
}

impl From<Hypergraph> for HypergraphJson {
    fn from(h: Hypergraph) -> Self {
        let full = KSet::from_mask(ground_mask(h.n));
        HypergraphJson {
            n: h.n,
            k: h.r,
            vertices: (h.vertices != full).then_some(h.vertices),
            edges: h.edges,
        }
    }
}

impl Hypergraph {
    /// Vertex set `{1..n}`; edges are deduplicated-checked and sorted.
    pub fn new(n: u32, r: u32, edges: impl IntoIterator<Item = KSet>) -> Result<Self> {
        if n > MAX_GROUND {
            return Err(invalid(format!("n = {n} exceeds {MAX_GROUND}")));
        }
        if r == 0 {
            return Err(invalid("uniformity must be >= 1"));
        }
        let fam = SetFamily::from_sets(n, r, edges)?;
        Ok(Self {
            n,
            r,
            vertices: KSet::from_mask(ground_mask(n)),
            edges: fam.iter().collect(),
        })
    }

    pub fn from_family(f: &SetFamily) -> Result<Self> {
        Self::new(f.ground_n(), f.arity(), f.iter())
    }

    /// Complete `r`-uniform hypergraph on `[n]`.
    pub fn complete(n: u32, r: u32) -> Result<Self> {
        Self::new(n, r, enumerate_ksets(n, r))
    }

    /// Restricts the vertex set; every edge must lie inside it.
    pub fn with_vertices(mut self, vertices: KSet) -> Result<Self> {
        if vertices.mask() & !ground_mask(self.n) != 0 {
            return Err(invalid("vertex set exceeds [n]"));
        }
        if let Some(e) = self.edges.iter().find(|e| !e.is_subset(vertices)) {
            return Err(invalid(format!("edge {e} leaves the vertex set")));
        }
        self.vertices = vertices;
        Ok(self)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn vertices(&self) -> KSet {
        self.vertices
    }

    pub fn num_vertices(&self) -> u32 {
        self.vertices.len()
    }

    pub fn edges(&self) -> &[KSet] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains_edge(&self, e: KSet) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    pub fn degree(&self, v: u32) -> usize {
        self.edges.iter().filter(|e| e.contains(v)).count()
    }

    pub fn without_edge(&self, e: KSet) -> Self {
        let mut h = self.clone();
        h.edges.retain(|&x| x != e);
        h
    }

    pub fn to_family(&self) -> SetFamily {
        SetFamily::from_sets(self.n, self.r, self.edges.iter().copied()).expect("hypergraph edges form a valid family")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MatchingResult {
    pub nu: usize,
    pub witness: Vec<KSet>,
}

impl MatchingResult {
    /// Witness edges are pairwise disjoint, belong to `h`, and number `nu`.
    pub fn is_valid_for(&self, h: &Hypergraph) -> bool {
        let mut used = 0u128;
        self.witness.len() == self.nu
            && self.witness.iter().all(|&e| {
                let ok = h.contains_edge(e) && e.mask() & used == 0;
                used |= e.mask();
                ok
            })
    }
}

/// LP optimum with the optimal weights keyed by edge or by vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(bound(serialize = "K: Serialize"))]
pub struct FractionalResult<K> {
    #[serde(with = "serde_rational")]
    pub value: Rational,
    #[serde(serialize_with = "serialize_weights")]
    pub weights: Vec<(K, Rational)>,
}

fn serialize_weights<K: Serialize, S: serde::Serializer>(
    w: &[(K, Rational)],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(w.iter().map(|(k, v)| (k, crate::exact::format_rational(v))))
}

impl<K> FractionalResult<K> {
    pub fn weight_sum(&self) -> Rational {
        self.weights.iter().map(|(_, w)| w).sum()
    }
}

/// `nu*(H)`: maximize the total edge weight with every vertex load <= 1.
pub fn fractional_matching(h: &Hypergraph) -> FractionalResult<KSet> {
    if h.edges.is_empty() {
        return FractionalResult {
            value: Rational::zero(),
            weights: Vec::new(),
        };
    }
    let m = h.edges.len();
    let mut lp = LpProblem::new(m, Sense::Maximize);
    lp.set_objective(vec![Rational::one(); m]).expect("arity");
    for v in h.vertices.iter() {
        let terms: Vec<(usize, Rational)> = h
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.contains(v))
            .map(|(i, _)| (i, Rational::one()))
            .collect();
        if !terms.is_empty() {
            lp.add_sparse(terms, Relation::Le, Rational::one()).expect("arity");
        }
    }
    let sol = lp.solve();
    assert_eq!(sol.status, LpStatus::Optimal, "matching LP is bounded and feasible");
    FractionalResult {
        value: sol.value,
        weights: h.edges.iter().copied().zip(sol.assignment).collect(),
    }
}

/// `tau*(H)`: minimize the total vertex weight with every edge covered.
pub fn fractional_cover(h: &Hypergraph) -> FractionalResult<u32> {
    let verts: Vec<u32> = h.vertices.iter().collect();
    if h.edges.is_empty() {
        return FractionalResult {
            value: Rational::zero(),
            weights: verts.into_iter().map(|v| (v, Rational::zero())).collect(),
        };
    }
    let pos = |v: u32| verts.binary_search(&v).expect("edge inside vertex set");
    let mut lp = LpProblem::new(verts.len(), Sense::Minimize);
    lp.set_objective(vec![Rational::one(); verts.len()]).expect("arity");
    for e in &h.edges {
        lp.add_sparse(
            e.iter().map(|v| (pos(v), Rational::one())),
            Relation::Ge,
            Rational::one(),
        )
        .expect("arity");
    }
    let sol = lp.solve();
    assert_eq!(sol.status, LpStatus::Optimal, "cover LP is bounded and feasible");
    FractionalResult {
        value: sol.value,
        weights: verts.into_iter().zip(sol.assignment).collect(),
    }
}

/// Checks the cover weights exactly: each in `[0, 1]`, every edge covered.
pub fn is_fractional_cover(h: &Hypergraph, weights: &[(u32, Rational)]) -> bool {
    let w = |v: u32| weights.iter().find(|(u, _)| *u == v).map(|(_, x)| x.clone());
    weights.iter().all(|(_, x)| !x.is_negative() && *x <= Rational::one())
        && h.edges
            .iter()
            .all(|e| e.iter().map(|v| w(v).unwrap_or_else(Rational::zero)).sum::<Rational>() >= Rational::one())
}

/// Checks the matching weights exactly: each in `[0, 1]`, vertex loads <= 1.
pub fn is_fractional_matching(h: &Hypergraph, weights: &[(KSet, Rational)]) -> bool {
    weights
        .iter()
        .all(|(e, x)| h.contains_edge(*e) && !x.is_negative() && *x <= Rational::one())
        && h.vertices.iter().all(|v| {
            weights
                .iter()
                .filter(|(e, _)| e.contains(v))
                .map(|(_, x)| x)
                .sum::<Rational>()
                <= Rational::one()
        })
}

/// Exact `nu(H)` by branch and bound.
///
/// The branching vertex is the one of smallest positive degree among the
/// remaining edges (ties to the smallest index); each edge through it is
/// tried, then the vertex is dropped. A greedy matching seeds the lower
/// bound. Subtrees are pruned by the optimal root fractional cover
/// restricted to the vertices still in play, which bounds `nu` of every
/// subproblem because it remains a fractional cover there.
pub fn matching_number(h: &Hypergraph, node_budget: u64) -> Result<MatchingResult> {
    let edges: Vec<u128> = h.edges.iter().map(|e| e.mask()).collect();
    let greedy = greedy_matching(&edges);

    // Integer cover weights over a common denominator.
    let (weights, denom, root_bound) = if h.edges.len() <= LP_BOUND_EDGE_LIMIT {
        let cover = fractional_cover(h);
        let root = cover.value.floor().to_integer().to_usize().unwrap_or(usize::MAX);
        match scaled_weights(&cover.weights) {
            Some((w, d)) => (w, d, root),
            None => uniform_weights(h),
        }
    } else {
        uniform_weights(h)
    };

    let mut search = MatchSearch {
        weights,
        denom,
        r: h.r as usize,
        best: greedy.clone(),
        chosen: Vec::new(),
        nodes: 0,
        budget: node_budget,
    };
    if greedy.len() < root_bound {
        search.go(&edges)?;
    }
    let witness: Vec<KSet> = search.best.into_iter().map(KSet::from_mask).collect();
    Ok(MatchingResult {
        nu: witness.len(),
        witness,
    })
}

fn greedy_matching(edges: &[u128]) -> Vec<u128> {
    let degree = |v: u32| edges.iter().filter(|e| *e >> v & 1 == 1).count();
    let mut order: Vec<(usize, u128)> = edges
        .iter()
        .map(|&e| {
            let load: usize = KSet::from_mask(e).iter().map(|v| degree(v - 1)).sum();
            (load, e)
        })
        .collect();
    order.sort();
    let mut used = 0u128;
    let mut out = Vec::new();
    for (_, e) in order {
        if e & used == 0 {
            used |= e;
            out.push(e);
        }
    }
    out
}

fn scaled_weights(weights: &[(u32, Rational)]) -> Option<(Vec<i128>, i128)> {
    let denom = weights.iter().fold(BigInt::one(), |acc, (_, w)| acc.lcm(w.denom()));
    let d = denom.to_i128()?;
    let mut out = vec![0i128; MAX_GROUND as usize];
    for (v, w) in weights {
        out[*v as usize - 1] = (w.numer() * (&denom / w.denom())).to_i128()?;
    }
    Some((out, d))
}

fn uniform_weights(h: &Hypergraph) -> (Vec<i128>, i128, usize) {
    let mut w = vec![0i128; MAX_GROUND as usize];
    for v in h.vertices.iter() {
        w[v as usize - 1] = 1;
    }
    (w, h.r as i128, usize::MAX)
}

struct MatchSearch {
    weights: Vec<i128>,
    denom: i128,
    r: usize,
    best: Vec<u128>,
    chosen: Vec<u128>,
    nodes: u64,
    budget: u64,
}

impl MatchSearch {
    fn go(&mut self, edges: &[u128]) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded {
                what: "matching branch and bound",
                limit: self.budget,
            });
        }
        if edges.is_empty() {
            if self.chosen.len() > self.best.len() {
                self.best = self.chosen.clone();
            }
            return Ok(());
        }
        let span = edges.iter().fold(0u128, |acc, e| acc | e);
        let cover: i128 = KSet::from_mask(span).iter().map(|v| self.weights[v as usize - 1]).sum();
        let bound = (cover / self.denom).min(span.count_ones() as i128 / self.r as i128);
        if self.chosen.len() as i128 + bound <= self.best.len() as i128 {
            return Ok(());
        }

        let mut pick = (usize::MAX, 0u32);
        for v in KSet::from_mask(span).iter() {
            let bit = 1u128 << (v - 1);
            let d = edges.iter().filter(|e| *e & bit != 0).count();
            if d < pick.0 {
                pick = (d, v);
            }
        }
        let bit = 1u128 << (pick.1 - 1);

        for &e in edges.iter().filter(|e| *e & bit != 0) {
            let rest: Vec<u128> = edges.iter().copied().filter(|f| f & e == 0).collect();
            self.chosen.push(e);
            self.go(&rest)?;
            self.chosen.pop();
        }
        let rest: Vec<u128> = edges.iter().copied().filter(|f| f & bit == 0).collect();
        self.go(&rest)
    }
}

/// Plain exhaustive matching number of a small edge list, independent of
/// [`matching_number`].
pub fn matching_number_exhaustive(edges: &[KSet]) -> usize {
    fn go(edges: &[u128], used: u128) -> usize {
        match edges.split_first() {
            None => 0,
            Some((&e, rest)) => {
                let skip = go(rest, used);
                if e & used == 0 {
                    skip.max(1 + go(rest, used | e))
                } else {
                    skip
                }
            }
        }
    }
    let masks: Vec<u128> = edges.iter().map(|e| e.mask()).collect();
    go(&masks, 0)
}

/// `max{ C(r(s+1)-1, r), C(n, r) - C(n-s, r) }`.
pub fn erdos_formula(n: u32, r: u32, s: u32) -> Result<BigInt> {
    if r == 0 || s >= n / r {
        return Err(precondition(format!(
            "erdos formula needs 0 <= s < floor(n/r), got n={n} r={r} s={s}"
        )));
    }
    let (n, r, s) = (n as i64, r as i64, s as i64);
    let clique = binom(r * (s + 1) - 1, r);
    let cover = binom(n, r) - binom(n - s, r);
    Ok(clique.max(cover))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErdosMethod {
    /// Every subfamily of `C([n], r)` was examined.
    Exhaustive,
    /// Only shifted (compression-closed) families were examined.
    Shifted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ErdosResult {
    pub max_edges: usize,
    pub witness: Vec<KSet>,
    pub method: ErdosMethod,
}

/// Largest number of edges in an `r`-uniform hypergraph on `[n]` with
/// matching number at most `s`, found by search.
///
/// With at most 24 possible edges every subfamily is examined. Otherwise
/// only shifted families are enumerated: shifting preserves the edge count
/// and never increases the matching number, so the maximum is attained by
/// a shifted family.
pub fn erdos_bruteforce(n: u32, r: u32, s: u32, budget: u64) -> Result<ErdosResult> {
    if r == 0 || r > n {
        return Err(precondition("erdos brute force needs 1 <= r <= n"));
    }
    let all: Vec<KSet> = enumerate_ksets(n, r).collect();
    if all.len() <= 24 {
        erdos_exhaustive(&all, s, budget)
    } else {
        erdos_shifted(n, r, s, budget)
    }
}

fn within_matching(masks: &[u128], s: usize) -> bool {
    // true iff no s + 1 pairwise disjoint edges
    fn go(masks: &[u128], used: u128, need: usize) -> bool {
        if need == 0 {
            return true;
        }
        masks
            .iter()
            .enumerate()
            .any(|(i, &e)| e & used == 0 && go(&masks[i + 1..], used | e, need - 1))
    }
    !go(masks, 0, s + 1)
}

/// Every subfamily of `all`; `all` must have at most 24 sets.
pub fn erdos_exhaustive(all: &[KSet], s: u32, budget: u64) -> Result<ErdosResult> {
    let total = (all.len() <= 24).then(|| 1u64 << all.len());
    let Some(total) = total.filter(|&t| t <= budget) else {
        return Err(Error::BudgetExceeded {
            what: "erdos exhaustive search",
            limit: budget,
        });
    };
    let mut best: (usize, u64) = (0, 0);
    let mut masks = Vec::with_capacity(all.len());
    for bits in 0..total {
        let size = bits.count_ones() as usize;
        if size <= best.0 {
            continue;
        }
        masks.clear();
        masks.extend((0..all.len()).filter(|i| bits >> i & 1 == 1).map(|i| all[i].mask()));
        if within_matching(&masks, s as usize) {
            best = (size, bits);
        }
    }
    Ok(ErdosResult {
        max_edges: best.0,
        witness: (0..all.len())
            .filter(|i| best.1 >> i & 1 == 1)
            .map(|i| all[i])
            .collect(),
        method: ErdosMethod::Exhaustive,
    })
}

/// Only shifted families of `r`-subsets of `[n]`.
pub fn erdos_shifted(n: u32, r: u32, s: u32, budget: u64) -> Result<ErdosResult> {
    let mut best: Vec<KSet> = Vec::new();
    let mut masks = Vec::new();
    for_each_upset(n, r, count_ksets(n, r), budget, |fam| {
        if fam.len() > best.len() {
            masks.clear();
            masks.extend(fam.iter().map(|e| e.mask()));
            if within_matching(&masks, s as usize) {
                best = fam.to_vec();
            }
        }
        true
    })?;
    best.sort();
    Ok(ErdosResult {
        max_edges: best.len(),
        witness: best,
        method: ErdosMethod::Shifted,
    })
}

/// The `(i, j)` compression for `i < j`: every edge containing `j` but not
/// `i` is moved to `e - j + i` unless that edge is already present.
pub fn shift(edges: &[KSet], i: u32, j: u32) -> Vec<KSet> {
    assert!(i < j, "shift needs i < j");
    let present: BTreeSet<KSet> = edges.iter().copied().collect();
    let mut out: Vec<KSet> = edges
        .iter()
        .map(|&e| {
            if e.contains(j) && !e.contains(i) {
                let moved = e.without(j).with(i);
                if !present.contains(&moved) {
                    return moved;
                }
            }
            e
        })
        .collect();
    out.sort();
    out
}

/// True iff no `(i, j)` compression changes the family.
pub fn is_shifted(edges: &[KSet], n: u32) -> bool {
    let mut sorted = edges.to_vec();
    sorted.sort();
    (1..=n).all(|j| (1..j).all(|i| shift(&sorted, i, j) == sorted))
}

/// `max{(rx)^r, 1 - (1-x)^r} * C(n, r)` with no error term.
pub fn erdos_fractional_formula(n: u32, r: u32, x: &Rational) -> Result<Rational> {
    if r == 0 || x.is_negative() || *x >= ratio(1, r as i64) {
        return Err(precondition("fractional formula needs 0 <= x < 1/r"));
    }
    let clique = pow(&(int(r as i64) * x), r);
    let cover = Rational::one() - pow(&(Rational::one() - x), r);
    Ok(clique.max(cover) * Rational::from_integer(binom(n as i64, r as i64)))
}
