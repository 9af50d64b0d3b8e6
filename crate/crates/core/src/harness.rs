//! Falsification suites: seeded random inputs pushed through the checks,
//! one report per claim evaluation.

use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::baranyai::{baranyai_partition, divisible_case_count_with, validate_schedule};
use crate::constructions::{
    compute_ank, cover_witness_to_reals, hm_construction_1, hm_construction_2, reals_to_cover_witness,
    small_n_counterexample, star_instance,
};
use crate::deviations::{
    exact_tail, feige_bound, feige_check, random_query, samuels_search, DeviationQuery, DiscreteDistribution,
};
use crate::error::{invalid, Error, Result};
use crate::exact::{binom_u64, format_rational, int, ratio, Rational};
use crate::generate::{moderate_instance, no_large_instance, nonneg_sum_instance, zero_sum_instance};
use crate::hypergraph::{erdos_bruteforce, erdos_formula};
use crate::ksum::{
    check_lemma1_lemma6, check_theorem10, check_theorem5, check_theorem_hm, check_theorem_moderate,
    count_nonnegative_ksums, g_delta_k, hm_bound, lemma2_edge_bound, negative_sum_hypergraph, permutation_sampler,
    reduce, refs, Instance, KSumQuery, Thresholds,
};
use crate::report::{exit_code, CheckReport, CheckStatus};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Lemmas,
    Theorems,
    Constructions,
    Feige,
    Baranyai,
    Ank,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "lemmas" => Suite::Lemmas,
            "theorems" => Suite::Theorems,
            "constructions" => Suite::Constructions,
            "feige" => Suite::Feige,
            "baranyai" => Suite::Baranyai,
            "ank" => Suite::Ank,
            other => return Err(invalid(format!("unknown suite {other:?}"))),
        })
    }
}

/// Resource limits, one per kind of search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    /// Cap on `C(n, k)` for enumerating counters.
    pub enumeration: u64,
    /// Branch-and-bound nodes for matching numbers.
    pub matching_nodes: u64,
    /// Product of support sizes for exact convolution.
    pub convolution: u64,
    /// Upsets examined by the `A(n, k)` search.
    pub ank: u64,
    /// Cap on `C(n, k)` for partition schedules.
    pub partition: u64,
    /// Wall-clock limit for a whole suite; not part of the report.
    #[serde(skip)]
    pub wall: Option<Duration>,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            enumeration: crate::ksum::DEFAULT_ENUM_BUDGET,
            matching_nodes: crate::hypergraph::DEFAULT_MATCHING_BUDGET,
            convolution: crate::deviations::DEFAULT_CONVOLUTION_BUDGET,
            ank: crate::constructions::DEFAULT_ANK_BUDGET,
            partition: crate::baranyai::DEFAULT_PARTITION_BUDGET,
            wall: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub budgets: Budgets,
    pub thresholds: Thresholds,
}

/// Suite parameters; `None` means the suite default.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarnessReport {
    pub suite: Suite,
    pub seed: u64,
    pub params: SuiteParams,
    pub thresholds: Thresholds,
    pub exit_code: i32,
    pub reports: Vec<CheckReport>,
}

pub fn run_harness(suite: Suite, params: &SuiteParams, cfg: &RunConfig) -> Result<HarnessReport> {
    let ctx = Ctx {
        cfg,
        deadline: cfg.budgets.wall.map(|d| Instant::now() + d),
    };
    let reports = match suite {
        Suite::Lemmas => lemmas(&ctx, params)?,
        Suite::Theorems => theorems(&ctx, params)?,
        Suite::Constructions => constructions(&ctx, params)?,
        Suite::Feige => feige(&ctx, params)?,
        Suite::Baranyai => baranyai(&ctx, params)?,
        Suite::Ank => ank(&ctx, params)?,
    };
    Ok(HarnessReport {
        suite,
        seed: cfg.seed,
        params: params.clone(),
        thresholds: cfg.thresholds.clone(),
        exit_code: exit_code(&reports),
        reports,
    })
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    deadline: Option<Instant>,
}

impl Ctx<'_> {
    /// RNG for trial `i` of a stream tagged `tag`, independent of thread
    /// scheduling.
    fn rng(&self, tag: u64, i: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        rng.set_stream(i as u64);
        rng
    }

    fn out_of_time(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    /// Runs `trial` for every index in parallel, keeping index order.
    fn trials<F>(&self, claim: &str, count: usize, trial: F) -> Vec<CheckReport>
    where
        F: Fn(usize) -> Result<Vec<CheckReport>> + Sync,
    {
        let per: Vec<Vec<CheckReport>> = (0..count)
            .into_par_iter()
            .map(|i| {
                if self.out_of_time() {
                    return vec![CheckReport::new(
                        claim,
                        "wall-clock budget",
                        CheckStatus::BudgetExceeded,
                        json!({"trial": i}),
                    )];
                }
                trial(i).unwrap_or_else(|e| vec![CheckReport::from_error(claim, "trial setup", &e)])
            })
            .collect();
        per.into_iter().flatten().collect()
    }
}

fn skipped(claim: &str, paper_ref: &str, reason: String) -> CheckReport {
    CheckReport::new(claim, paper_ref, CheckStatus::Skipped, json!({ "reason": reason }))
}

fn equality(
    claim: &str,
    paper_ref: &str,
    got: impl Into<Rational>,
    want: impl Into<Rational>,
    extra: serde_json::Value,
) -> CheckReport {
    let (got, want) = (got.into(), want.into());
    let mut w = json!({"value": format_rational(&got), "expected": format_rational(&want)});
    if let (Some(w), Some(e)) = (w.as_object_mut(), extra.as_object()) {
        w.extend(e.clone());
    }
    CheckReport::new(claim, paper_ref, CheckStatus::from_bool(got == want), w)
}

fn big(v: u64) -> Rational {
    Rational::from_integer(v.into())
}

fn lemmas(ctx: &Ctx, p: &SuiteParams) -> Result<Vec<CheckReport>> {
    let n = p.n.unwrap_or(30);
    let k = p.k.unwrap_or(3);
    let trials = p.trials.unwrap_or(100);
    let b = &ctx.cfg.budgets;
    if k < 2 || n <= k || n > 128 {
        return Err(invalid("lemmas suite needs 2 <= k < n <= 128"));
    }
    Ok(ctx.trials("lemma1", trials, |i| {
        let mut rng = ctx.rng(1, i);
        let q = KSumQuery::new(zero_sum_instance(&mut rng, n), k)?;
        let check = check_lemma1_lemma6(&q, b.matching_nodes)?;
        let mut out = check.reports();
        let red = reduce(&q)?;
        let h = negative_sum_hypergraph(&KSumQuery::new(red.instance, k)?, 1)?;
        out.push(match lemma2_edge_bound(&h, n, k, b.matching_nodes) {
            Ok(c) => c.report(),
            Err(e) => CheckReport::from_error("lemma2", refs::LEMMA2, &e),
        });
        let s = permutation_sampler(&h, k, 2000, ctx.cfg.seed.wrapping_add(i as u64))?;
        let ok = s.max_z <= check.nu && s.z_score() <= 5.0;
        out.push(CheckReport::new(
            "lemma2-sampler",
            "random block partitions contain on average m e(H)/C(n-1,k-1) edges and never more than nu(H)",
            CheckStatus::from_bool(ok),
            json!({
                "trials": s.trials, "blocks": s.blocks, "mean_z": format_rational(&s.mean_z),
                "expected": format_rational(&s.exact_expectation), "max_z": s.max_z, "nu": check.nu,
            }),
        ));
        Ok(out)
    }))
}

const THEOREM_CONFIGS: [(usize, usize); 4] = [(16, 2), (132, 2), (54, 3), (297, 3)];

fn theorems(ctx: &Ctx, p: &SuiteParams) -> Result<Vec<CheckReport>> {
    let configs: Vec<(usize, usize)> = match (p.n, p.k) {
        (Some(n), Some(k)) => vec![(n, k)],
        (None, None) => THEOREM_CONFIGS.to_vec(),
        _ => return Err(invalid("give both --n and --k or neither")),
    };
    let trials = p.trials.unwrap_or(20);
    let th = &ctx.cfg.thresholds;
    let budget = ctx.cfg.budgets.enumeration;
    let delta = ratio(1, 4);

    let c = ratio(1, 13) - ratio(1, 66);
    let mut out = vec![
        CheckReport::new(
            "thm10-constants",
            "1/13 - 1/66 = 53/858 >= 2/33",
            CheckStatus::from_bool(c == ratio(53, 858) && c >= ratio(2, 33)),
            json!({"value": format_rational(&c)}),
        ),
        equality(
            "moderate-constant",
            "g(1/2, 3) = 1/168",
            g_delta_k(&ratio(1, 2), 3),
            ratio(1, 168),
            json!({}),
        ),
    ];
    for (ci, &(n, k)) in configs.iter().enumerate() {
        if k == 0 || n < k {
            return Err(invalid("theorems suite needs 1 <= k <= n"));
        }
        let size = |c: &Rational| int(n as i64) >= c * int((k * k) as i64);
        let tag = 100 + ci as u64 * 10;
        if n >= 2 * k * k * k {
            out.extend(ctx.trials("thm5", trials, |i| {
                let q = KSumQuery::new(nonneg_sum_instance(&mut ctx.rng(tag, i), n), k)?;
                Ok(check_theorem5(&q, budget)?.reports(&q))
            }));
        } else {
            out.push(skipped("thm5", refs::THM5, format!("n={n} below 2k^3 for k={k}")));
        }
        if size(&th.thm10) {
            out.extend(ctx.trials("thm10", trials, |i| {
                let q = KSumQuery::new(nonneg_sum_instance(&mut ctx.rng(tag + 1, i), n), k)?;
                Ok(check_theorem10(&q, th, budget)?.reports(&q))
            }));
        } else {
            out.push(skipped(
                "thm10",
                refs::THM10,
                format!("n={n} below {} k^2", format_rational(&th.thm10)),
            ));
        }
        if size(&th.hm) && k >= 2 {
            out.extend(ctx.trials("hm", trials, |i| {
                let q = KSumQuery::new(no_large_instance(&mut ctx.rng(tag + 2, i), n, k)?, k)?;
                Ok(vec![check_theorem_hm(&q, th, budget)?.report(&q)])
            }));
        } else {
            out.push(skipped(
                "hm",
                refs::HM,
                format!("n={n} below {} k^2", format_rational(&th.hm)),
            ));
        }
        if size(&th.moderate) && k == 2 {
            out.extend(ctx.trials("moderate", trials, |i| {
                let q = KSumQuery::new(moderate_instance(&mut ctx.rng(tag + 3, i), n, &delta)?, k)?;
                Ok(vec![check_theorem_moderate(&q, &delta, th, budget)?.report(&q)])
            }));
        } else {
            out.push(skipped(
                "moderate",
                refs::MODERATE,
                format!(
                    "random moderate instances are generated for k=2 and n >= {} k^2",
                    format_rational(&th.moderate)
                ),
            ));
        }
    }
    Ok(out)
}

const STAR_CONFIGS: [(usize, usize); 4] = [(8, 3), (16, 2), (132, 2), (297, 3)];
const STAR_REF: &str = "the star instance has exactly C(n-1,k-1) nonnegative k-sums";
const HM_EQ_REF: &str = "the extremal constructions have exactly C(n-1,k-1) + C(n-k-1,k-1) - 1 nonnegative k-sums";

fn count(inst: Instance, k: usize, budget: u64) -> Result<u64> {
    count_nonnegative_ksums(&KSumQuery::new(inst, k)?, budget)
}

fn constructions(ctx: &Ctx, p: &SuiteParams) -> Result<Vec<CheckReport>> {
    let hm_n = p.n.unwrap_or(600);
    let trials = p.trials.unwrap_or(20);
    let budget = ctx.cfg.budgets.enumeration;
    let mut out = Vec::new();
    for (n, k) in STAR_CONFIGS {
        let c = count(star_instance(n)?, k, budget)?;
        out.push(equality(
            "star",
            STAR_REF,
            big(c),
            big(binom_u64(n as i64 - 1, k as i64 - 1)),
            json!({"n": n, "k": k}),
        ));
    }
    for k in 3..=5usize {
        let c = count(small_n_counterexample(k)?, k, budget)?;
        let star = binom_u64(3 * k as i64, k as i64 - 1);
        let want = binom_u64(3 * k as i64 - 2, k as i64);
        out.push(CheckReport::new(
            "small-n",
            "for k > 2 there are 3k+1 values with only C(3k-2,k) < C(3k,k-1) nonnegative k-sums",
            CheckStatus::from_bool(c == want && want < star),
            json!({"k": k, "count": c, "expected": want, "star": star}),
        ));
    }
    for k in [2usize, 3] {
        match hm_construction_1(hm_n, k).and_then(|inst| count(inst, k, budget)) {
            Ok(c) => out.push(equality(
                "hm-construction-1",
                HM_EQ_REF,
                big(c),
                Rational::from_integer(hm_bound(hm_n, k)),
                json!({"n": hm_n, "k": k}),
            )),
            Err(e) => out.push(CheckReport::from_error("hm-construction-1", HM_EQ_REF, &e)),
        }
    }
    match hm_construction_2(hm_n).and_then(|inst| count(inst, 3, budget)) {
        Ok(c) => out.push(equality(
            "hm-construction-2",
            HM_EQ_REF,
            big(c),
            Rational::from_integer(hm_bound(hm_n, 3)),
            json!({"n": hm_n, "k": 3}),
        )),
        Err(e) => out.push(CheckReport::from_error("hm-construction-2", HM_EQ_REF, &e)),
    }
    out.extend(ctx.trials("remark4", trials, |i| {
        let mut rng = ctx.rng(200, i);
        let n = 4 + i % 7;
        let k = 2 + i % 2;
        let inst = zero_sum_instance(&mut rng, n);
        Ok(vec![round_trip(&inst, k, budget)?])
    }));
    for n in 2..=7u32 {
        for s in 0..n / 2 {
            let brute = erdos_bruteforce(n, 2, s, ctx.cfg.budgets.ank)?;
            let formula = erdos_formula(n, 2, s)?;
            out.push(equality(
                "erdos",
                "max edges with matching number <= s is max{C(r(s+1)-1,r), C(n,r)-C(n-s,r)}",
                big(brute.max_edges as u64),
                Rational::from_integer(formula),
                json!({"n": n, "r": 2, "s": s, "method": brute.method}),
            ));
        }
    }
    Ok(out)
}

/// Instance to cover witness and back; the witness must have
/// `C(n,k) - count` edges and the recovered instance no more nonnegative
/// sums than the original.
pub fn round_trip(inst: &Instance, k: usize, budget: u64) -> Result<CheckReport> {
    let n = inst.n();
    let before = count(inst.clone(), k, budget)?;
    let w = reals_to_cover_witness(inst, k, budget)?;
    let edges = w.hypergraph.edge_count() as u64;
    let back = cover_witness_to_reals(&w)?;
    let after = count(back, k, budget)?;
    let ok = edges == binom_u64(n as i64, k as i64) - before && after <= before;
    Ok(CheckReport::new(
        "remark4",
        "zero-sum instances and fractional covers of weight below n/k map to each other without gaining nonnegative k-sums",
        CheckStatus::from_bool(ok),
        json!({"n": n, "k": k, "count": before, "edges": edges, "count_back": after,
               "cover_weight": format_rational(&w.total_weight)}),
    ))
}

const FEIGE_REF: &str =
    "Pr(X_1 + ... + X_m < m + delta) >= min{delta/(1+delta), 1/13} for independent nonnegative X_i with mean at most 1";

fn feige(ctx: &Ctx, p: &SuiteParams) -> Result<Vec<CheckReport>> {
    let trials = p.trials.unwrap_or(1000);
    let grid = p.grid.unwrap_or(50);
    let budget = ctx.cfg.budgets.convolution;
    let mut out = ctx.trials("feige", trials, |i| {
        let q = random_query(&mut ctx.rng(300, i), 1 + i % 4);
        let c = feige_check(&q, budget)?;
        let mut w = serde_json::to_value(&c)?;
        if !c.holds {
            w["query"] = serde_json::to_value(&q)?;
        }
        Ok(vec![CheckReport::new(
            "feige",
            FEIGE_REF,
            CheckStatus::from_bool(c.holds),
            w,
        )])
    });
    for delta in [ratio(1, 20), ratio(1, 13), ratio(1, 12)] {
        let one_d = Rational::one() + &delta;
        let law = DiscreteDistribution::new(vec![
            (one_d.clone(), one_d.recip()),
            (Rational::zero(), &delta / &one_d),
        ])?;
        let q = DeviationQuery::new(vec![law], one_d)?;
        let tail = exact_tail(&q, budget)?;
        out.push(equality(
            "feige-tight",
            "a single two-point variable on {0, 1+delta} has tail exactly delta/(1+delta)",
            tail,
            &delta / (Rational::one() + &delta),
            json!({"delta": format_rational(&delta)}),
        ));
    }
    for (m, threshold) in [(1usize, ratio(3, 2)), (2, ratio(5, 2)), (2, int(3))] {
        let means = vec![Rational::one(); m];
        let r = samuels_search(&means, &threshold, grid)?;
        let bound = feige_bound(m, &(&threshold - int(m as i64)))?;
        out.push(CheckReport::new(
            "samuels-search",
            FEIGE_REF,
            CheckStatus::from_bool(r.best_prob >= bound),
            json!({"m": m, "threshold": format_rational(&threshold), "grid": grid,
                   "best": format_rational(&r.best_prob), "bound": format_rational(&bound),
                   "upper_atoms": r.upper_atoms.iter().map(format_rational).collect::<Vec<_>>(),
                   "exhaustive": r.exhaustive}),
        ));
    }
    Ok(out)
}

const BARANYAI_CONFIGS: [(usize, usize); 6] = [(4, 2), (6, 2), (6, 3), (8, 2), (8, 4), (9, 3)];

fn baranyai(ctx: &Ctx, p: &SuiteParams) -> Result<Vec<CheckReport>> {
    let configs: Vec<(usize, usize)> = match (p.n, p.k) {
        (Some(n), Some(k)) => vec![(n, k)],
        (None, None) => BARANYAI_CONFIGS.to_vec(),
        _ => return Err(invalid("give both --n and --k or neither")),
    };
    let trials = p.trials.unwrap_or(40);
    let mut out = Vec::new();
    for (ci, &(n, k)) in configs.iter().enumerate() {
        let s = match baranyai_partition(n as u32, k as u32, ctx.cfg.budgets.partition) {
            Ok(s) => s,
            Err(e) => {
                out.push(CheckReport::from_error("baranyai", "partition construction", &e));
                continue;
            }
        };
        out.push(CheckReport::new(
            "baranyai",
            "the k-subsets of [n] split into C(n-1,k-1) perfect matchings when k divides n",
            CheckStatus::from_bool(validate_schedule(&s)),
            json!({"n": n, "k": k, "rounds": s.rounds.len()}),
        ));
        out.extend(ctx.trials("divisible", trials, |i| {
            let inst = nonneg_sum_instance(&mut ctx.rng(400 + ci as u64, i), n);
            let c = divisible_case_count_with(&inst, &s)?;
            let direct = count(inst.clone(), k, ctx.cfg.budgets.enumeration)?;
            let ok = c.holds && c.count == direct;
            let mut w = json!({"n": n, "k": k, "count": c.count, "required": c.required, "direct": direct});
            if !ok {
                w["instance"] = serde_json::to_value(&inst)?;
            }
            Ok(vec![CheckReport::new(
                "divisible",
                "when k divides n every perfect matching has a nonnegative member, so at least C(n-1,k-1) nonnegative k-sums",
                CheckStatus::from_bool(ok),
                w,
            )])
        }));
    }
    Ok(out)
}

fn ank(ctx: &Ctx, p: &SuiteParams) -> Result<Vec<CheckReport>> {
    let n = p.n.unwrap_or(6);
    let k = p.k.unwrap_or(3);
    let r = match compute_ank(n, k, ctx.cfg.budgets.ank) {
        Ok(r) => r,
        Err(e) => return Ok(vec![CheckReport::from_error("ank", "A(n,k) search", &e)]),
    };
    let star = binom_u64(n as i64 - 1, k as i64 - 1);
    let witness = json!({
        "n": n, "k": k, "value": r.value, "dual_value": r.dual_value,
        "witness_instance": r.witness_instance, "upsets_examined": r.upsets_examined,
    });
    let mut out = vec![CheckReport::new(
        "ank",
        "A(n,k) from realizable upsets equals C(n,k) minus the largest coverable edge set of weight below n/k",
        CheckStatus::from_bool(r.value == r.dual_value),
        witness,
    )];
    out.push(if n % k == 0 {
        equality(
            "ank-divisible",
            "A(n,k) = C(n-1,k-1) when k divides n",
            big(r.value as u64),
            big(star),
            json!({"n": n, "k": k}),
        )
    } else {
        skipped(
            "ank-divisible",
            "A(n,k) = C(n-1,k-1) when k divides n",
            format!("k={k} does not divide n={n}"),
        )
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(suite: Suite, params: SuiteParams) -> HarnessReport {
        run_harness(
            suite,
            &params,
            &RunConfig {
                seed: 42,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn lemmas_suite_holds_and_is_deterministic() {
        let p = SuiteParams {
            n: Some(14),
            k: Some(3),
            trials: Some(6),
            grid: None,
        };
        let a = run(Suite::Lemmas, p.clone());
        assert_eq!(a.exit_code, 0, "{:#?}", a.reports);
        assert_eq!(a.reports.len(), 6 * 5);
        let b = run(Suite::Lemmas, p);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn ank_suite_reports_value() {
        let r = run(
            Suite::Ank,
            SuiteParams {
                n: Some(6),
                k: Some(3),
                ..Default::default()
            },
        );
        assert_eq!(r.exit_code, 0);
        assert_eq!(r.reports[0].witness["value"], 10);
    }

    #[test]
    fn feige_suite_holds() {
        let r = run(
            Suite::Feige,
            SuiteParams {
                trials: Some(100),
                grid: Some(20),
                ..Default::default()
            },
        );
        assert_eq!(
            r.exit_code,
            0,
            "{:#?}",
            r.reports.iter().filter(|r| !r.status.is_ok()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn suite_names_parse() {
        assert_eq!("baranyai".parse::<Suite>().unwrap(), Suite::Baranyai);
        assert!("nope".parse::<Suite>().is_err());
    }
}
