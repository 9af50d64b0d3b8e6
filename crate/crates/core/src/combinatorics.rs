//! k-subsets of `[n]` as bitmasks, colex enumeration, the dominance order
//! on index sets, lower shadows and a certified real Kruskal-Katona bound.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, precondition, Error, Result};
use crate::exact::{binom, gen_binom, int, Rational};

/// Largest ground set a [`KSet`] can address.
pub const MAX_GROUND: u32 = 128;

/// A subset of `{1..=128}` stored as a bitmask (bit `i-1` for index `i`).
///
/// The derived ordering on the mask is exactly colex order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KSet(u128);

impl KSet {
    pub const EMPTY: KSet = KSet(0);

    pub fn from_mask(mask: u128) -> Self {
        KSet(mask)
    }

    /// Builds a set from 1-based indices; duplicates and out-of-range
    /// indices are rejected.
    pub fn from_indices(indices: &[u32]) -> Result<Self> {
        let mut mask = 0u128;
        for &i in indices {
            if i == 0 || i > MAX_GROUND {
                return Err(invalid(format!("index {i} outside 1..={MAX_GROUND}")));
            }
            let bit = 1u128 << (i - 1);
            if mask & bit != 0 {
                return Err(invalid(format!("duplicate index {i}")));
            }
            mask |= bit;
        }
        Ok(KSet(mask))
    }

    pub fn mask(self) -> u128 {
        self.0
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: u32) -> bool {
        (1..=MAX_GROUND).contains(&i) && self.0 & (1u128 << (i - 1)) != 0
    }

    pub fn max_index(self) -> Option<u32> {
        (self.0 != 0).then(|| 128 - self.0.leading_zeros())
    }

    pub fn with(self, i: u32) -> Self {
        KSet(self.0 | (1u128 << (i - 1)))
    }

    pub fn without(self, i: u32) -> Self {
        KSet(self.0 & !(1u128 << (i - 1)))
    }

    pub fn is_disjoint(self, other: KSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset(self, other: KSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: KSet) -> KSet {
        KSet(self.0 | other.0)
    }

    /// Increasing 1-based indices.
    pub fn iter(self) -> impl Iterator<Item = u32> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let i = rest.trailing_zeros();
            rest &= rest - 1;
            Some(i + 1)
        })
    }

    pub fn indices(self) -> Vec<u32> {
        self.iter().collect()
    }
}

impl fmt::Display for KSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (pos, i) in self.iter().enumerate() {
            if pos > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for KSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for KSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let idx = Vec::<u32>::deserialize(d)?;
        KSet::from_indices(&idx).map_err(serde::de::Error::custom)
    }
}

/// Mask with the lowest `n` bits set.
pub fn ground_mask(n: u32) -> u128 {
    if n >= 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    }
}

/// A uniform family of subsets of `[ground_n]`, kept in colex order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FamilyJson", into = "FamilyJson")]
pub struct SetFamily {
    ground_n: u32,
    arity: u32,
    members: BTreeSet<KSet>,
}

/// On-disk form: `{"n": .., "k": .., "edges": [[1-based indices], ..]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyJson {
    pub n: u32,
    pub k: u32,
    pub edges: Vec<KSet>,
}

impl TryFrom<FamilyJson> for SetFamily {
    type Error = Error;

    fn try_from(raw: FamilyJson) -> Result<Self> {
        SetFamily::from_sets(raw.n, raw.k, raw.edges)
    }
}

impl From<SetFamily> for FamilyJson {
    fn from(f: SetFamily) -> Self {
        FamilyJson {
            n: f.ground_n,
            k: f.arity,
            edges: f.members.into_iter().collect(),
        }
    }
}

impl SetFamily {
    pub fn new(ground_n: u32, arity: u32) -> Result<Self> {
        if ground_n > MAX_GROUND {
            return Err(invalid(format!("ground set {ground_n} exceeds {MAX_GROUND}")));
        }
        if arity > ground_n {
            return Err(invalid(format!("arity {arity} exceeds ground set {ground_n}")));
        }
        Ok(Self {
            ground_n,
            arity,
            members: BTreeSet::new(),
        })
    }

    /// Builds a family, rejecting duplicates and sets of the wrong arity.
    pub fn from_sets(ground_n: u32, arity: u32, sets: impl IntoIterator<Item = KSet>) -> Result<Self> {
        let mut f = Self::new(ground_n, arity)?;
        for s in sets {
            if !f.insert(s)? {
                return Err(invalid(format!("duplicate member {s}")));
            }
        }
        Ok(f)
    }

    /// Returns whether the set was newly inserted.
    pub fn insert(&mut self, s: KSet) -> Result<bool> {
        if s.len() != self.arity {
            return Err(invalid(format!("{s} does not have arity {}", self.arity)));
        }
        if s.mask() & !ground_mask(self.ground_n) != 0 {
            return Err(invalid(format!("{s} does not fit [{}]", self.ground_n)));
        }
        Ok(self.members.insert(s))
    }

    pub fn ground_n(&self) -> u32 {
        self.ground_n
    }

    pub fn arity(&self) -> u32 {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, s: KSet) -> bool {
        self.members.contains(&s)
    }

    pub fn iter(&self) -> impl Iterator<Item = KSet> + '_ {
        self.members.iter().copied()
    }

    pub fn members(&self) -> &BTreeSet<KSet> {
        &self.members
    }
}

/// Colex rank of a set: the number of same-size sets preceding it.
pub fn colex_rank(s: KSet) -> BigInt {
    s.iter()
        .enumerate()
        .map(|(pos, i)| binom(i as i64 - 1, pos as i64 + 1))
        .sum()
}

/// Inverse of [`colex_rank`] for `k`-sets.
pub fn colex_unrank(mut rank: BigInt, k: u32) -> KSet {
    let mut mask = 0u128;
    for pos in (1..=k as i64).rev() {
        // largest c with C(c, pos) <= rank
        let mut c = pos - 1;
        while binom(c + 1, pos) <= rank {
            c += 1;
        }
        rank -= binom(c, pos);
        mask |= 1u128 << c;
    }
    KSet(mask)
}

/// Iterator over all `k`-subsets of `[n]` in colex order.
#[derive(Clone, Debug)]
pub struct KSetIter {
    next: Option<u128>,
    last: u128,
}

impl Iterator for KSetIter {
    type Item = KSet;

    fn next(&mut self) -> Option<KSet> {
        let cur = self.next?;
        self.next = if cur == self.last {
            None
        } else {
            // Gosper's hack
            let low = cur & cur.wrapping_neg();
            let ripple = cur + low;
            Some(ripple | (((ripple ^ cur) >> 2) / low))
        };
        Some(KSet(cur))
    }
}

/// All `C(n, k)` sets exactly once, in colex order.
pub fn enumerate_ksets(n: u32, k: u32) -> KSetIter {
    assert!(n <= MAX_GROUND, "ground set {n} exceeds {MAX_GROUND}");
    if k > n {
        return KSetIter { next: None, last: 0 };
    }
    let first = ground_mask(k);
    let last = first << (n - k);
    KSetIter {
        next: Some(first),
        last,
    }
}

/// Colex enumeration resumed at `rank`, for range-splitting.
pub fn enumerate_ksets_from(n: u32, k: u32, rank: &BigInt) -> KSetIter {
    let mut it = enumerate_ksets(n, k);
    if *rank >= binom(n as i64, k as i64) {
        it.next = None;
    } else if !rank.is_zero() {
        it.next = Some(colex_unrank(rank.clone(), k).mask());
    }
    it
}

/// True iff the `l`-th smallest index of `s` is at most that of `t` for
/// every `l`. Sets of different sizes are incomparable.
pub fn dominance_leq(s: KSet, t: KSet) -> bool {
    s.len() == t.len() && s.iter().zip(t.iter()).all(|(a, b)| a <= b)
}

/// All `(arity-1)`-sets contained in some member of `f`.
pub fn lower_shadow(f: &SetFamily) -> Result<SetFamily> {
    if f.arity == 0 {
        return Err(precondition("lower shadow needs arity >= 1"));
    }
    let mut out = SetFamily::new(f.ground_n, f.arity - 1)?;
    for s in f.iter() {
        for i in s.iter() {
            out.members.insert(s.without(i));
        }
    }
    Ok(out)
}

/// The first `m` sets of colex order among `arity`-subsets of `[ground_n]`.
pub fn colex_initial(ground_n: u32, arity: u32, m: usize) -> Result<SetFamily> {
    SetFamily::from_sets(ground_n, arity, enumerate_ksets(ground_n, arity).take(m))
}

/// Result of the real Kruskal-Katona step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KkBound {
    /// Bracket `[x_lower, x_upper]` around the real root of `C(x, a) = m`.
    pub x_lower: Rational,
    pub x_upper: Rational,
    /// Certified lower bound on `C(x, b)`.
    pub lower_bound: Rational,
    /// Whether the root is an integer and the bound is the exact binomial.
    pub exact: bool,
}

/// Finds the real `x >= a` with `C(x, a) = m` and returns a certified lower
/// bound on `C(x, b)`.
///
/// The root is bracketed by bisection until the bracket is narrower than
/// `x_lower * 2^-64`; the bound is `C(x_lower, b)`, which is sound because
/// `C(., b)` is increasing on `[b - 1, inf)` and `x_lower >= a >= b`.
pub fn kk_real_bound(m: &BigInt, a: u32, b: u32) -> Result<KkBound> {
    if *m < BigInt::one() {
        return Err(precondition("kk_real_bound needs m >= 1"));
    }
    if a == 0 || b == 0 {
        return Err(precondition("kk_real_bound needs a >= 1 and b >= 1"));
    }
    if b > a {
        return Err(precondition("kk_real_bound certifies only b <= a"));
    }
    let target = Rational::from_integer(m.clone());

    // Integer root search first: C(x, a) is increasing in integer x >= a.
    let mut lo_int = a as i64;
    let mut hi_int = a as i64;
    while binom(hi_int, a as i64) < *m {
        lo_int = hi_int;
        hi_int *= 2;
    }
    while hi_int - lo_int > 1 {
        let mid = (lo_int + hi_int) / 2;
        if binom(mid, a as i64) < *m {
            lo_int = mid;
        } else {
            hi_int = mid;
        }
    }
    for x in [lo_int, hi_int] {
        if binom(x, a as i64) == *m {
            let bound = Rational::from_integer(binom(x, b as i64));
            return Ok(KkBound {
                x_lower: int(x),
                x_upper: int(x),
                lower_bound: bound,
                exact: true,
            });
        }
    }

    // C(lo_int, a) < m < C(hi_int, a); bisect on rationals.
    let mut lo = int(lo_int);
    let mut hi = int(hi_int);
    let two64 = Rational::from_integer(BigInt::one() << 64);
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    while (&hi - &lo) * &two64 > lo {
        let mid = (&lo + &hi) * &half;
        if gen_binom(&mid, a) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lower_bound = gen_binom(&lo, b);
    Ok(KkBound {
        x_lower: lo,
        x_upper: hi,
        lower_bound,
        exact: false,
    })
}

/// Enumerates families of `k`-subsets of `[n]` closed under replacing an
/// element by a smaller unused index (closed upward in the dominance
/// order), of size at most `max_size`. Calls `visit` on each; stops early
/// when `visit` returns `false`. Fails once more than `budget` families
/// have been produced.
pub fn for_each_upset(n: u32, k: u32, max_size: usize, budget: u64, visit: impl FnMut(&[KSet]) -> bool) -> Result<u64> {
    // Lex order on sorted tuples is a linear extension of dominance.
    let mut sets: Vec<KSet> = enumerate_ksets(n, k).collect();
    sets.sort_by_key(|s| s.indices());
    let position = |s: KSet| sets.binary_search_by_key(&s.indices(), |t| t.indices()).ok();
    let preds: Vec<Vec<usize>> = sets
        .iter()
        .map(|&s| {
            s.iter()
                .filter(|&i| i > 1 && !s.contains(i - 1))
                .filter_map(|i| position(s.without(i).with(i - 1)))
                .collect()
        })
        .collect();

    struct Walk<'a, F> {
        sets: &'a [KSet],
        preds: &'a [Vec<usize>],
        chosen: Vec<bool>,
        current: Vec<KSet>,
        max_size: usize,
        budget: u64,
        produced: u64,
        visit: F,
        stopped: bool,
    }

    impl<F: FnMut(&[KSet]) -> bool> Walk<'_, F> {
        fn go(&mut self, pos: usize) -> Result<()> {
            if self.stopped {
                return Ok(());
            }
            if pos == self.sets.len() {
                self.produced += 1;
                if self.produced > self.budget {
                    return Err(Error::BudgetExceeded {
                        what: "upset enumeration",
                        limit: self.budget,
                    });
                }
                if !(self.visit)(&self.current) {
                    self.stopped = true;
                }
                return Ok(());
            }
            let allowed = self.current.len() < self.max_size && self.preds[pos].iter().all(|&p| self.chosen[p]);
            if allowed {
                self.chosen[pos] = true;
                self.current.push(self.sets[pos]);
                self.go(pos + 1)?;
                self.current.pop();
                self.chosen[pos] = false;
            }
            self.go(pos + 1)
        }
    }

    let mut walk = Walk {
        sets: &sets,
        preds: &preds,
        chosen: vec![false; sets.len()],
        current: Vec::new(),
        max_size,
        budget,
        produced: 0,
        visit,
        stopped: false,
    };
    walk.go(0)?;
    Ok(walk.produced)
}

/// Exact minimum lower-shadow size over *all* families of `m` distinct
/// `arity`-subsets of `[ground_n]`, for every `m` in `0..=m_max`.
///
/// A family of size `m` with shadow `G` consists of sets whose whole
/// shadow lies in `G`, and any `m` such sets have shadow inside `G`; so
/// the minimum equals the smallest `|G|` over all families `G` of
/// `(arity-1)`-sets spanning at least `m` such sets. All `2^C(n, arity-1)`
/// choices of `G` are enumerated.
pub fn min_shadow_exhaustive(ground_n: u32, arity: u32, m_max: usize) -> Result<Vec<usize>> {
    if arity == 0 {
        return Err(precondition("arity must be >= 1"));
    }
    let lower: Vec<KSet> = enumerate_ksets(ground_n, arity - 1).collect();
    if lower.len() > 24 {
        return Err(Error::BudgetExceeded {
            what: "shadow exhaustion",
            limit: 24,
        });
    }
    // for each arity-set, the bitmask of its shadow over `lower`
    let need: Vec<u32> = enumerate_ksets(ground_n, arity)
        .map(|s| {
            s.iter()
                .map(|i| {
                    let pos = lower.binary_search(&s.without(i)).expect("shadow member");
                    1u32 << pos
                })
                .fold(0, |acc, b| acc | b)
        })
        .collect();
    let mut best = vec![usize::MAX; m_max + 1];
    for g in 0u32..(1u32 << lower.len()) {
        let spanned = need.iter().filter(|&&n| n & g == n).count();
        let size = g.count_ones() as usize;
        for slot in best.iter_mut().take(spanned.min(m_max) + 1) {
            *slot = (*slot).min(size);
        }
    }
    Ok(best)
}

/// `C(n, k)` as `usize`, for sizing.
pub fn count_ksets(n: u32, k: u32) -> usize {
    binom(n as i64, k as i64).to_usize().expect("binomial exceeds usize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(idx: &[u32]) -> KSet {
        KSet::from_indices(idx).unwrap()
    }

    #[test]
    fn colex_enumeration_examples() {
        let got: Vec<Vec<u32>> = enumerate_ksets(4, 2).map(|s| s.indices()).collect();
        assert_eq!(
            got,
            vec![vec![1, 2], vec![1, 3], vec![2, 3], vec![1, 4], vec![2, 4], vec![3, 4]]
        );
        let got: Vec<KSet> = enumerate_ksets(3, 3).collect();
        assert_eq!(got, vec![set(&[1, 2, 3])]);
        assert_eq!(enumerate_ksets(5, 1).count(), 5);
        assert_eq!(enumerate_ksets(5, 0).collect::<Vec<_>>(), vec![KSet::EMPTY]);
        assert_eq!(enumerate_ksets(3, 4).count(), 0);
    }

    #[test]
    fn enumeration_counts_and_order() {
        for n in 0..=9 {
            for k in 0..=n {
                let all: Vec<KSet> = enumerate_ksets(n, k).collect();
                assert_eq!(all.len(), count_ksets(n, k));
                assert!(all.windows(2).all(|w| w[0] < w[1]));
                assert!(all.iter().all(|s| s.len() == k));
            }
        }
        // full 128-bit ground set does not overflow
        assert_eq!(enumerate_ksets(128, 1).count(), 128);
        assert_eq!(enumerate_ksets(128, 127).count(), 128);
    }

    #[test]
    fn rank_unrank_and_resume() {
        for (r, s) in enumerate_ksets(8, 3).enumerate() {
            assert_eq!(colex_rank(s), BigInt::from(r));
            assert_eq!(colex_unrank(BigInt::from(r), 3), s);
        }
        let tail: Vec<KSet> = enumerate_ksets_from(8, 3, &BigInt::from(50)).collect();
        let full: Vec<KSet> = enumerate_ksets(8, 3).skip(50).collect();
        assert_eq!(tail, full);
        assert_eq!(enumerate_ksets_from(8, 3, &BigInt::from(56)).count(), 0);
    }

    #[test]
    fn dominance_examples() {
        assert!(dominance_leq(set(&[1, 3]), set(&[2, 4])));
        assert!(!dominance_leq(set(&[2, 3]), set(&[1, 4])));
        assert!(!dominance_leq(set(&[1, 4]), set(&[2, 3])));
        assert!(dominance_leq(set(&[2, 5]), set(&[2, 5])));
    }

    #[test]
    fn shadow_examples() {
        let f = SetFamily::from_sets(3, 3, [set(&[1, 2, 3])]).unwrap();
        let sh: Vec<KSet> = lower_shadow(&f).unwrap().iter().collect();
        assert_eq!(sh, vec![set(&[1, 2]), set(&[1, 3]), set(&[2, 3])]);

        let f = colex_initial(4, 2, 2).unwrap();
        let sh: Vec<KSet> = lower_shadow(&f).unwrap().iter().collect();
        assert_eq!(sh, vec![set(&[1]), set(&[2]), set(&[3])]);
    }

    #[test]
    fn shadow_of_colex_first_four_triples() {
        // brute force: collect every 2-subset of every member
        let f = colex_initial(6, 3, 4).unwrap();
        let mut seen = BTreeSet::new();
        for s in f.iter() {
            let idx = s.indices();
            for i in 0..3 {
                for j in i + 1..3 {
                    seen.insert((idx[i], idx[j]));
                }
            }
        }
        assert_eq!(seen.len(), 6);
        assert_eq!(lower_shadow(&f).unwrap().len(), seen.len());
    }

    #[test]
    fn kk_integer_roots_are_exact() {
        let b = kk_real_bound(&BigInt::from(35), 3, 2).unwrap();
        assert!(b.exact);
        assert_eq!(b.lower_bound, int(21));

        let b = kk_real_bound(&BigInt::from(1), 5, 2).unwrap();
        assert_eq!(b.lower_bound, int(10));

        // n = 12, k = 3: m = C(9, 8) with a = n-k-1 = 8, b = k-1 = 2
        let m = binom(9, 8);
        let b = kk_real_bound(&m, 8, 2).unwrap();
        assert!(b.exact);
        assert_eq!(b.lower_bound, int(36));

        for x in 3..=15i64 {
            for a in 1..=3u32 {
                let b = kk_real_bound(&binom(x, a as i64), a, 1).unwrap();
                assert_eq!(b.lower_bound, int(x), "x={x} a={a}");
            }
        }
    }

    #[test]
    fn kk_fractional_root_is_bracketed() {
        // C(x,2) = 11 has root x = (1 + sqrt(89))/2 ~ 5.217
        let b = kk_real_bound(&BigInt::from(11), 2, 1).unwrap();
        assert!(!b.exact);
        assert!(gen_binom(&b.x_lower, 2) <= int(11));
        assert!(gen_binom(&b.x_upper, 2) > int(11));
        assert_eq!(b.lower_bound, b.x_lower);
        let width = &b.x_upper - &b.x_lower;
        assert!(width * Rational::from_integer(BigInt::one() << 64) <= b.x_lower);
    }

    #[test]
    fn kk_rejects_bad_input() {
        assert!(kk_real_bound(&BigInt::zero(), 3, 2).is_err());
        assert!(kk_real_bound(&BigInt::from(4), 2, 3).is_err());
    }

    #[test]
    fn family_json_round_trip() {
        let f = SetFamily::from_sets(5, 2, [set(&[1, 2]), set(&[4, 5])]).unwrap();
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(json, r#"{"n":5,"k":2,"edges":[[1,2],[4,5]]}"#);
        let back: SetFamily = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<SetFamily>(r#"{"n":3,"k":2,"edges":[[1,4]]}"#).is_err());
        assert!(serde_json::from_str::<SetFamily>(r#"{"n":3,"k":2,"edges":[[1]]}"#).is_err());
        assert!(serde_json::from_str::<SetFamily>(r#"{"n":3,"k":2,"edges":[[1,2],[2,1]]}"#).is_err());
    }

    #[test]
    fn shadow_exhaustion_matches_direct_search_on_tiny_ground() {
        // direct enumeration of every family for n = 5, arity 3
        let all: Vec<KSet> = enumerate_ksets(5, 3).collect();
        let mut direct = vec![usize::MAX; all.len() + 1];
        for bits in 0u32..1 << all.len() {
            let fam =
                SetFamily::from_sets(5, 3, (0..all.len()).filter(|i| bits >> i & 1 == 1).map(|i| all[i])).unwrap();
            let m = fam.len();
            direct[m] = direct[m].min(lower_shadow(&fam).unwrap().len());
        }
        assert_eq!(min_shadow_exhaustive(5, 3, all.len()).unwrap(), direct);
    }

    #[test]
    fn colex_minimizes_shadow_small() {
        for n in 3..=6 {
            let best = min_shadow_exhaustive(n, 3, count_ksets(n, 3)).unwrap();
            for (m, &b) in best.iter().enumerate() {
                let colex = lower_shadow(&colex_initial(n, 3, m).unwrap()).unwrap().len();
                assert_eq!(colex, b, "n={n} m={m}");
            }
        }
    }

    fn closed_upward(fam: &[KSet], n: u32, k: u32) -> bool {
        enumerate_ksets(n, k).all(|t| !fam.iter().any(|&s| dominance_leq(t, s)) || fam.contains(&t))
    }

    #[test]
    fn upsets_are_closed_and_complete() {
        for (n, k) in [(4, 2), (5, 2), (5, 3), (6, 2)] {
            let mut seen = Vec::new();
            for_each_upset(n, k, usize::MAX, 1 << 20, |f| {
                let mut sorted = f.to_vec();
                sorted.sort();
                seen.push(sorted);
                true
            })
            .unwrap();
            assert!(seen.iter().all(|f| closed_upward(f, n, k)));
            // brute force over all subfamilies
            let all: Vec<KSet> = enumerate_ksets(n, k).collect();
            let brute = (0u64..1 << all.len())
                .filter(|bits| {
                    let fam: Vec<KSet> = (0..all.len()).filter(|i| bits >> i & 1 == 1).map(|i| all[i]).collect();
                    closed_upward(&fam, n, k)
                })
                .count();
            assert_eq!(seen.len(), brute, "n={n} k={k}");
            let distinct: BTreeSet<_> = seen.iter().cloned().collect();
            assert_eq!(distinct.len(), seen.len());
        }
    }

    #[test]
    fn upset_budget_and_size_cap() {
        let err = for_each_upset(6, 2, usize::MAX, 3, |_| true);
        assert!(matches!(err, Err(Error::BudgetExceeded { .. })));
        let mut max = 0;
        for_each_upset(6, 2, 2, 1 << 20, |f| {
            max = max.max(f.len());
            true
        })
        .unwrap();
        assert_eq!(max, 2);
    }

    fn arb_kset(n: u32, k: u32) -> impl Strategy<Value = KSet> {
        proptest::sample::subsequence((1..=n).collect::<Vec<_>>(), k as usize)
            .prop_map(|v| KSet::from_indices(&v).unwrap())
    }

    proptest! {
        #[test]
        fn dominance_is_partial_order(a in arb_kset(9, 4), b in arb_kset(9, 4), c in arb_kset(9, 4)) {
            prop_assert!(dominance_leq(a, a));
            if dominance_leq(a, b) && dominance_leq(b, a) {
                prop_assert_eq!(a, b);
            }
            if dominance_leq(a, b) && dominance_leq(b, c) {
                prop_assert!(dominance_leq(a, c));
            }
        }

        #[test]
        fn dominance_implies_colex_order(a in arb_kset(10, 3), b in arb_kset(10, 3)) {
            if dominance_leq(a, b) {
                prop_assert!(a <= b);
            }
        }
    }
}
