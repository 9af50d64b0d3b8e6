use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::count::{count_nonnegative_ksums, count_through, is_large, is_moderately_large};
use super::instance::{Instance, KSumQuery};
use super::reduce::{negative_sum_hypergraph, reduce};
use crate::error::{precondition, Result};
use crate::exact::rational::{pow, serde_rational};
use crate::exact::{binom, format_rational, int, ratio, Rational};
use crate::hypergraph::{fractional_cover, fractional_matching, matching_number, Hypergraph};
use crate::report::{CheckReport, CheckStatus};

/// Plain statements of the checked claims, carried by every report.
pub mod refs {
    pub const LEMMA1: &str = "matching number of the negative-sum hypergraph is at most n/k";
    pub const LEMMA6: &str = "fractional matching number of the negative-sum hypergraph is at most n/k";
    pub const LP_DUALITY: &str = "fractional matching number equals fractional cover number";
    pub const LEMMA2: &str =
        "e(H) <= (1-1/k) n/(n-k) C(n-1,k-1), and at least C(n-1,k-1)/(k+1) missing edges when n > k^3";
    pub const THM5: &str = "n >= 2k^3 and total >= 0 imply at least C(n-1,k-1) nonnegative k-sums";
    pub const THM5_CHAIN: &str = "C(n-2k,k-1)/C(n-1,k-1) >= 1 - 1/(k+1)";
    pub const THM10: &str = "n >= 33k^2 and total >= 0 imply at least C(n-1,k-1) nonnegative k-sums";
    pub const COR9: &str = "at least (1/13 - 1/(2C)) (n-1)^(k-1)/(k-1)! nonnegative k-sums involve x_1";
    pub const HM: &str = "no large value and n large imply at least C(n-1,k-1) + C(n-k-1,k-1) - 1 nonnegative k-sums";
    pub const MODERATE: &str =
        "no (1-delta)-moderately large value implies at least g(delta,k) C(n,k) nonnegative k-sums, g = delta(1-delta)/(14k)";
}

/// Size thresholds `n >= c * k^2` for the claims that need large `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thresholds {
    #[serde(with = "serde_rational")]
    pub hm: Rational,
    #[serde(with = "serde_rational")]
    pub thm10: Rational,
    #[serde(with = "serde_rational")]
    pub moderate: Rational,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            hm: int(500),
            thm10: int(33),
            moderate: int(33),
        }
    }
}

fn n_at_least(n: usize, c: &Rational, k: usize) -> bool {
    int(n as i64) >= c * int((k * k) as i64)
}

fn big(v: u64) -> Rational {
    Rational::from_integer(v.into())
}

fn rat(v: BigInt) -> Rational {
    Rational::from_integer(v)
}

fn display_string<S: serde::Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn fmt(r: &Rational) -> String {
    format_rational(r)
}

/// `count >= required`, the shape of most claims checked here.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountBound {
    pub count: u64,
    #[serde(with = "serde_rational")]
    pub required: Rational,
    pub holds: bool,
}

impl CountBound {
    fn new(count: u64, required: Rational) -> Self {
        let holds = big(count) >= required;
        Self { count, required, holds }
    }

    fn report(&self, claim: &str, paper_ref: &str, q: &KSumQuery) -> CheckReport {
        let mut witness = json!({
            "n": q.n(),
            "k": q.k,
            "count": self.count,
            "required": fmt(&self.required),
        });
        if !self.holds {
            witness["instance"] = serde_json::to_value(&q.instance).expect("serializable");
        }
        CheckReport::new(claim, paper_ref, CheckStatus::from_bool(self.holds), witness)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MatchingBoundCheck {
    pub n: usize,
    pub k: usize,
    pub edges: usize,
    pub nu: usize,
    #[serde(with = "serde_rational")]
    pub nu_star: Rational,
    #[serde(with = "serde_rational")]
    pub tau_star: Rational,
    #[serde(with = "serde_rational")]
    pub bound: Rational,
}

impl MatchingBoundCheck {
    pub fn nu_holds(&self) -> bool {
        int(self.nu as i64) <= self.bound
    }

    pub fn nu_star_holds(&self) -> bool {
        self.nu_star <= self.bound
    }

    pub fn duality_holds(&self) -> bool {
        self.nu_star == self.tau_star
    }

    pub fn reports(&self) -> Vec<CheckReport> {
        let w = json!({
            "n": self.n, "k": self.k, "edges": self.edges, "nu": self.nu,
            "nu_star": fmt(&self.nu_star), "tau_star": fmt(&self.tau_star),
            "bound": fmt(&self.bound),
        });
        vec![
            CheckReport::new(
                "lemma1",
                refs::LEMMA1,
                CheckStatus::from_bool(self.nu_holds()),
                w.clone(),
            ),
            CheckReport::new(
                "lemma6",
                refs::LEMMA6,
                CheckStatus::from_bool(self.nu_star_holds()),
                w.clone(),
            ),
            CheckReport::new(
                "lp-duality",
                refs::LP_DUALITY,
                CheckStatus::from_bool(self.duality_holds()),
                w,
            ),
        ]
    }
}

/// Reduces the instance, builds the negative-sum hypergraph at `x_1` and
/// computes `nu`, `nu*` and `tau*` for comparison with `n/k`.
pub fn check_lemma1_lemma6(q: &KSumQuery, node_budget: u64) -> Result<MatchingBoundCheck> {
    let red = reduce(q)?;
    let rq = KSumQuery::new(red.instance, q.k)?;
    let h = negative_sum_hypergraph(&rq, 1)?;
    let nu = matching_number(&h, node_budget)?;
    debug_assert!(nu.is_valid_for(&h));
    Ok(MatchingBoundCheck {
        n: q.n(),
        k: q.k,
        edges: h.edge_count(),
        nu: nu.nu,
        nu_star: fractional_matching(&h).value,
        tau_star: fractional_cover(&h).value,
        bound: ratio(q.n() as i64, q.k as i64),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeBoundCheck {
    pub n: usize,
    pub k: usize,
    pub edges: usize,
    pub nu: usize,
    #[serde(with = "serde_rational")]
    pub bound: Rational,
    pub bound_holds: bool,
    #[serde(serialize_with = "display_string")]
    pub missing: BigInt,
    /// `C(n-1, k-1)/(k+1)`, asserted only when `n > k^3`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub missing_required: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub missing_holds: Option<bool>,
}

impl EdgeBoundCheck {
    pub fn holds(&self) -> bool {
        self.bound_holds && self.missing_holds.unwrap_or(true)
    }

    pub fn report(&self) -> CheckReport {
        CheckReport::new(
            "lemma2",
            refs::LEMMA2,
            CheckStatus::from_bool(self.holds()),
            serde_json::to_value(self).expect("serializable"),
        )
    }
}

/// Edge-count consequences of `nu(H) <= n/k` for a `(k-1)`-uniform `H` on
/// `n - 1` vertices.
pub fn lemma2_edge_bound(h: &Hypergraph, n: usize, k: usize, node_budget: u64) -> Result<EdgeBoundCheck> {
    if k < 2 || n <= k {
        return Err(precondition("edge bound needs k >= 2 and n > k"));
    }
    if h.r() as usize != k - 1 || h.num_vertices() as usize > n - 1 {
        return Err(precondition("hypergraph must be (k-1)-uniform on at most n-1 vertices"));
    }
    let nu = matching_number(h, node_budget)?.nu;
    if int((nu * k) as i64) > int(n as i64) {
        return Err(precondition(format!("nu(H) = {nu} exceeds n/k")));
    }
    let all = binom((n - 1) as i64, (k - 1) as i64);
    let (nn, kk) = (n as i64, k as i64);
    let bound = ratio(kk - 1, kk) * ratio(nn, nn - kk) * rat(all.clone());
    let edges = h.edge_count();
    let missing = &all - BigInt::from(edges);
    let (missing_required, missing_holds) = if n > k * k * k {
        let req = rat(all) / int(kk + 1);
        let ok = rat(missing.clone()) >= req;
        (Some(fmt(&req)), Some(ok))
    } else {
        (None, None)
    };
    Ok(EdgeBoundCheck {
        n,
        k,
        edges,
        nu,
        bound_holds: big(edges as u64) <= bound,
        bound,
        missing,
        missing_required,
        missing_holds,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Theorem5Check {
    pub count: CountBound,
    /// `C(n-2k, k-1) / C(n-1, k-1)`, compared with `1 - 1/(k+1)`.
    #[serde(with = "serde_rational")]
    pub chain_ratio: Rational,
    pub chain_holds: bool,
}

impl Theorem5Check {
    pub fn reports(&self, q: &KSumQuery) -> Vec<CheckReport> {
        vec![
            self.count.report("thm5", refs::THM5, q),
            CheckReport::new(
                "thm5-chain",
                refs::THM5_CHAIN,
                CheckStatus::from_bool(self.chain_holds),
                json!({"ratio": fmt(&self.chain_ratio), "k": q.k, "n": q.n()}),
            ),
        ]
    }
}

fn require_nonnegative_total(inst: &Instance) -> Result<()> {
    if inst.total().is_negative() {
        return Err(precondition("total must be nonnegative"));
    }
    Ok(())
}

pub fn check_theorem5(q: &KSumQuery, budget: u64) -> Result<Theorem5Check> {
    let (n, k) = (q.n(), q.k);
    if n < 2 * k * k * k {
        return Err(precondition(format!("needs n >= 2k^3 = {}", 2 * k * k * k)));
    }
    require_nonnegative_total(&q.instance)?;
    let count = count_nonnegative_ksums(q, budget)?;
    let required = rat(binom((n - 1) as i64, (k - 1) as i64));
    let chain_ratio = rat(binom((n - 2 * k) as i64, (k - 1) as i64)) / required.clone();
    let chain_holds = chain_ratio >= Rational::one() - ratio(1, k as i64 + 1);
    Ok(Theorem5Check {
        count: CountBound::new(count, required),
        chain_ratio,
        chain_holds,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MissingBound {
    /// `1/13 - 1/(2C)`.
    #[serde(with = "serde_rational")]
    pub coefficient: Rational,
    /// `coefficient * (n-1)^(k-1) / (k-1)!`.
    #[serde(with = "serde_rational")]
    pub bound: Rational,
    /// True when the coefficient is not positive.
    pub vacuous: bool,
}

pub fn lemma8_missing_bound(c: &Rational, n: usize, k: usize) -> Result<MissingBound> {
    if *c < Rational::one() {
        return Err(precondition("needs C >= 1"));
    }
    if k == 0 || !n_at_least(n, c, k) {
        return Err(precondition("needs n >= C k^2"));
    }
    let coefficient = ratio(1, 13) - Rational::one() / (int(2) * c);
    let fact: BigInt = (1..k as u64).map(BigInt::from).product();
    let bound = &coefficient * pow(&int(n as i64 - 1), (k - 1) as u32) / rat(fact);
    Ok(MissingBound {
        vacuous: !coefficient.is_positive(),
        coefficient,
        bound,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Theorem10Check {
    pub count: CountBound,
    /// Nonnegative sums through `x_1` of the reduced instance against the
    /// missing-edge bound with `C = n/k^2`.
    pub through_x1: CountBound,
}

impl Theorem10Check {
    pub fn reports(&self, q: &KSumQuery) -> Vec<CheckReport> {
        vec![
            self.count.report("thm10", refs::THM10, q),
            self.through_x1.report("cor9", refs::COR9, q),
        ]
    }
}

pub fn check_theorem10(q: &KSumQuery, th: &Thresholds, budget: u64) -> Result<Theorem10Check> {
    let (n, k) = (q.n(), q.k);
    if !n_at_least(n, &th.thm10, k) {
        return Err(precondition(format!("needs n >= {} k^2", fmt(&th.thm10))));
    }
    require_nonnegative_total(&q.instance)?;
    let count = count_nonnegative_ksums(q, budget)?;
    let required = rat(binom((n - 1) as i64, (k - 1) as i64));

    let red = reduce(q)?;
    let rq = KSumQuery::new(red.instance, k)?;
    let c = ratio(n as i64, (k * k) as i64);
    let missing = lemma8_missing_bound(&c, n, k)?;
    let through = count_through(&rq, 1, budget)?;
    Ok(Theorem10Check {
        count: CountBound::new(count, required),
        through_x1: CountBound::new(through, missing.bound),
    })
}

/// Chain of prefix-deficient suffix sets: `S_j` is the last `|S_j|`
/// indices, disjoint from `{1..j}`, with `|S_j| <= j(k-1)` and
/// `x_1 + ... + x_j + sum(S_j) < 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TSequence {
    pub t: usize,
    pub sets: Vec<Vec<usize>>,
}

/// For `j = 1, 2, ...` takes the shortest admissible suffix making the
/// prefix sum negative; stops at the first `j` without one or at `t_max`.
pub fn find_t_sequence(q: &KSumQuery, t_max: usize) -> TSequence {
    let (n, k) = (q.n(), q.k);
    let v = q.instance.values();
    let mut prefix = Rational::zero();
    let mut sets = Vec::new();
    for j in 1..=t_max.min(n) {
        prefix += &v[j - 1];
        let longest = (j * (k - 1)).min(n - j);
        let mut sum = prefix.clone();
        let mut found = None;
        for s in 0..=longest {
            if s > 0 {
                sum += &v[n - s];
            }
            if sum.is_negative() {
                found = Some(s);
                break;
            }
        }
        match found {
            Some(s) => sets.push((n - s + 1..=n).collect()),
            None => break,
        }
    }
    TSequence { t: sets.len(), sets }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HmCheck {
    pub count: CountBound,
    pub t: usize,
}

impl HmCheck {
    pub fn report(&self, q: &KSumQuery) -> CheckReport {
        let mut r = self.count.report("hm", refs::HM, q);
        r.witness["t"] = self.t.into();
        r
    }
}

pub fn hm_bound(n: usize, k: usize) -> BigInt {
    let (n, k) = (n as i64, k as i64);
    binom(n - 1, k - 1) + binom(n - k - 1, k - 1) - 1
}

pub fn check_theorem_hm(q: &KSumQuery, th: &Thresholds, budget: u64) -> Result<HmCheck> {
    let (n, k) = (q.n(), q.k);
    if !n_at_least(n, &th.hm, k) {
        return Err(precondition(format!("needs n >= {} k^2", fmt(&th.hm))));
    }
    require_nonnegative_total(&q.instance)?;
    // x_1 is the largest value, so no value is large iff x_1 is not
    if is_large(q, 1) {
        return Err(precondition("x_1 is large"));
    }
    let count = count_nonnegative_ksums(q, budget)?;
    let red = reduce(q)?;
    let t = find_t_sequence(&KSumQuery::new(red.instance, k)?, n).t;
    Ok(HmCheck {
        count: CountBound::new(count, rat(hm_bound(n, k))),
        t,
    })
}

/// `delta (1 - delta) / (14 k)`.
pub fn g_delta_k(delta: &Rational, k: usize) -> Rational {
    delta * (Rational::one() - delta) / int(14 * k as i64)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModerateCheck {
    #[serde(with = "serde_rational")]
    pub g: Rational,
    pub count: CountBound,
    /// Diagnostic only: suffix-greedy `t` against `n delta / k^2`.
    pub t: usize,
    #[serde(with = "serde_rational")]
    pub t_target: Rational,
}

impl ModerateCheck {
    pub fn report(&self, q: &KSumQuery) -> CheckReport {
        let mut r = self.count.report("moderate", refs::MODERATE, q);
        r.witness["g"] = fmt(&self.g).into();
        r.witness["t"] = self.t.into();
        r.witness["t_target"] = fmt(&self.t_target).into();
        r
    }
}

pub fn check_theorem_moderate(q: &KSumQuery, delta: &Rational, th: &Thresholds, budget: u64) -> Result<ModerateCheck> {
    let (n, k) = (q.n(), q.k);
    if !n_at_least(n, &th.moderate, k) {
        return Err(precondition(format!("needs n >= {} k^2", fmt(&th.moderate))));
    }
    require_nonnegative_total(&q.instance)?;
    // sums through x_i only shrink as i grows, so checking x_1 covers all
    if is_moderately_large(q, 1, delta, budget)? {
        return Err(precondition("x_1 is (1-delta)-moderately large"));
    }
    let g = g_delta_k(delta, k);
    let count = count_nonnegative_ksums(q, budget)?;
    let required = &g * rat(binom(n as i64, k as i64));
    let red = reduce(q)?;
    let t = find_t_sequence(&KSumQuery::new(red.instance, k)?, n).t;
    Ok(ModerateCheck {
        count: CountBound::new(count, required),
        t,
        t_target: int(n as i64) * delta / int((k * k) as i64),
        g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::DEFAULT_MATCHING_BUDGET;
    use crate::ksum::count::DEFAULT_ENUM_BUDGET;

    fn star(n: usize, k: usize) -> KSumQuery {
        let mut v = vec![-1; n];
        v[0] = n as i64 - 1;
        KSumQuery::new(Instance::from_ints(&v).unwrap(), k).unwrap()
    }

    fn small_n(k: usize) -> KSumQuery {
        let mut v = vec![-(3 * k as i64 - 2); 3];
        v.extend(vec![3; 3 * k - 2]);
        KSumQuery::new(Instance::from_ints(&v).unwrap(), k).unwrap()
    }

    #[test]
    fn lemma1_lemma6_examples() {
        let c = check_lemma1_lemma6(&small_n(3), DEFAULT_MATCHING_BUDGET).unwrap();
        assert!(c.nu <= 3 && c.nu_holds() && c.nu_star_holds() && c.duality_holds());
        let c = check_lemma1_lemma6(&star(8, 3), DEFAULT_MATCHING_BUDGET).unwrap();
        assert_eq!((c.nu, c.nu_star.clone()), (0, int(0)));
        assert!(c.reports().iter().all(|r| r.status == CheckStatus::Holds));
    }

    #[test]
    fn lemma2_examples() {
        let empty = Hypergraph::new(9, 2, []).unwrap();
        let c = lemma2_edge_bound(&empty, 10, 3, DEFAULT_MATCHING_BUDGET).unwrap();
        assert_eq!(c.missing, BigInt::from(36));
        assert!(c.holds() && c.missing_holds.is_none());

        let q = small_n(3);
        let red = reduce(&q).unwrap();
        let h = negative_sum_hypergraph(&KSumQuery::new(red.instance, 3).unwrap(), 1).unwrap();
        let c = lemma2_edge_bound(&h, 10, 3, DEFAULT_MATCHING_BUDGET).unwrap();
        assert!(c.bound_holds);
        assert!(c.missing_holds.is_none());

        let q = KSumQuery::new(Instance::from_ints(&[5, 4, -1, -1, -1, -1, -2, -3, 0]).unwrap(), 2).unwrap();
        let h = negative_sum_hypergraph(&q, 1).unwrap();
        let c = lemma2_edge_bound(&h, 9, 2, DEFAULT_MATCHING_BUDGET).unwrap();
        assert!(c.missing_holds.is_some());
        assert!(c.holds());
    }

    #[test]
    fn theorem5_examples() {
        let c = check_theorem5(&star(16, 2), DEFAULT_ENUM_BUDGET).unwrap();
        assert_eq!(c.count.count, 15);
        assert!(c.count.holds);
        assert_eq!(c.chain_ratio, ratio(12, 15));
        assert!(c.chain_holds);
        assert!(check_theorem5(&star(15, 2), DEFAULT_ENUM_BUDGET).is_err());
    }

    #[test]
    fn lemma8_examples() {
        let m = lemma8_missing_bound(&int(33), 132, 2).unwrap();
        assert_eq!(m.coefficient, ratio(53, 858));
        assert!(m.coefficient >= ratio(2, 33));
        let m = lemma8_missing_bound(&ratio(13, 2), 26, 2).unwrap();
        assert_eq!(m.coefficient, int(0));
        assert!(m.vacuous);
        let m = lemma8_missing_bound(&int(1), 4, 2).unwrap();
        assert!(m.vacuous && m.coefficient.is_negative());
        assert!(lemma8_missing_bound(&ratio(1, 2), 100, 2).is_err());
        assert!(lemma8_missing_bound(&int(33), 131, 2).is_err());
    }

    #[test]
    fn theorem10_star_tightness() {
        let th = Thresholds::default();
        let c = check_theorem10(&star(132, 2), &th, DEFAULT_ENUM_BUDGET).unwrap();
        assert_eq!(c.count.count, 131);
        assert!(c.count.holds && c.through_x1.holds);
        let c = check_theorem10(&star(297, 3), &th, DEFAULT_ENUM_BUDGET).unwrap();
        assert_eq!(c.count.count, 43660);
        assert!(check_theorem10(&star(131, 2), &th, DEFAULT_ENUM_BUDGET).is_err());
    }

    #[test]
    fn t_sequence_examples() {
        assert_eq!(find_t_sequence(&star(8, 3), 8).t, 0);
        // k=3, n=20: (120, 18, -1 x16, -61, -61)
        let mut v = vec![120, 18];
        v.extend([-1; 16]);
        v.extend([-61, -61]);
        let q = KSumQuery::new(Instance::from_ints(&v).unwrap(), 3).unwrap();
        let t = find_t_sequence(&q, 20);
        assert_eq!(t.t, 1);
        assert_eq!(t.sets, vec![vec![19, 20]]);
        let q = small_n(3);
        assert!(!is_large(&q, 1));
        let t = find_t_sequence(&reduce(&q).map(|r| KSumQuery::new(r.instance, 3).unwrap()).unwrap(), 10);
        assert!(t.t >= 1);
        for (j, s) in t.sets.iter().enumerate() {
            let j = j + 1;
            assert!(s.len() <= j * 2 && s.iter().all(|&i| i > j));
        }
    }

    #[test]
    fn hm_preconditions_are_distinct() {
        let th = Thresholds {
            hm: int(1),
            ..Thresholds::default()
        };
        let err = check_theorem_hm(&star(10, 2), &th, DEFAULT_ENUM_BUDGET).unwrap_err();
        assert!(err.to_string().contains("large"));
        let err = check_theorem_hm(&star(10, 2), &Thresholds::default(), DEFAULT_ENUM_BUDGET).unwrap_err();
        assert!(err.to_string().contains("k^2"));
    }

    #[test]
    fn g_examples() {
        assert_eq!(g_delta_k(&ratio(1, 2), 3), ratio(1, 168));
        assert_eq!(g_delta_k(&int(0), 5), int(0));
        assert_eq!(g_delta_k(&ratio(1, 4), 2), ratio(3, 448));
    }
}
