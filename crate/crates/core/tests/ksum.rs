use mms_core::constructions::{hm_construction_1, small_n_counterexample, star_instance};
use mms_core::exact::{binom_u64, int, ratio, Rational};
use mms_core::generate::{no_large_instance, nonneg_sum_instance, zero_sum_instance};
use mms_core::hypergraph::{fractional_matching, matching_number};
use mms_core::ksum::*;
use mms_core::report::CheckStatus;
use mms_core::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const BUDGET: u64 = DEFAULT_ENUM_BUDGET;

fn q(inst: Instance, k: usize) -> KSumQuery {
    KSumQuery::new(inst, k).unwrap()
}

/// Independent count: subsets by bitmask, sums in exact rationals.
fn oracle_count(inst: &Instance, k: usize) -> u64 {
    let n = inst.n();
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .filter(|m| {
            let s: Rational = (0..n)
                .filter(|i| m >> i & 1 == 1)
                .map(|i| inst.values()[i].clone())
                .sum();
            s >= int(0)
        })
        .count() as u64
}

#[test]
fn construction_counts() {
    assert_eq!(
        count_nonnegative_ksums(&q(star_instance(8).unwrap(), 3), BUDGET).unwrap(),
        21
    );
    assert_eq!(
        count_nonnegative_ksums(&q(star_instance(16).unwrap(), 2), BUDGET).unwrap(),
        15
    );
    assert_eq!(
        count_nonnegative_ksums(&q(star_instance(132).unwrap(), 2), BUDGET).unwrap(),
        131
    );
    assert_eq!(
        count_nonnegative_ksums(&q(star_instance(297).unwrap(), 3), BUDGET).unwrap(),
        43660
    );
    let small = small_n_counterexample(3).unwrap();
    assert_eq!(count_nonnegative_ksums(&q(small.clone(), 3), BUDGET).unwrap(), 35);
    assert_eq!(oracle_count(&small, 3), 35);
    let zeros = Instance::from_ints(&[0; 9]).unwrap();
    assert_eq!(count_nonnegative_ksums(&q(zeros, 4), BUDGET).unwrap(), 126);
}

#[test]
fn large_and_moderately_large() {
    let star = q(star_instance(8).unwrap(), 3);
    assert!(is_large(&star, 1));
    assert!(!is_large(&star, 2));
    assert!(is_moderately_large(&star, 1, &ratio(9, 10), BUDGET).unwrap());
    assert!(!is_moderately_large(&star, 2, &ratio(1, 2), BUDGET).unwrap());
    assert_eq!(count_through(&star, 2, BUDGET).unwrap(), 6);
    let zeros = q(Instance::from_ints(&[0; 6]).unwrap(), 3);
    assert!((1..=6).all(|i| is_large(&zeros, i)));
}

#[test]
fn negative_sum_hypergraph_examples() {
    let star = q(star_instance(8).unwrap(), 3);
    assert_eq!(negative_sum_hypergraph(&star, 1).unwrap().edge_count(), 0);
    let h = negative_sum_hypergraph(&star, 2).unwrap();
    assert_eq!(h.edge_count(), 15);
    assert!(h.edges().iter().all(|e| !e.contains(1) && !e.contains(2)));
    let zeros = q(Instance::from_ints(&[0; 5]).unwrap(), 2);
    assert_eq!(negative_sum_hypergraph(&zeros, 1).unwrap().edge_count(), 0);
}

#[test]
fn lemma_checks_on_small_construction() {
    // total of the 3k+1 instance is 3, so the reduction shifts it down
    let c = check_lemma1_lemma6(&q(small_n_counterexample(3).unwrap(), 3), 1_000_000).unwrap();
    assert!(c.nu <= 3 && c.nu_holds() && c.nu_star_holds() && c.duality_holds());
    let star = check_lemma1_lemma6(&q(star_instance(9).unwrap(), 3), 1000).unwrap();
    assert_eq!((star.nu, star.nu_star.clone()), (0, int(0)));
}

#[test]
fn lemma2_regimes() {
    let small = q(small_n_counterexample(3).unwrap(), 3);
    let red = reduce(&small).unwrap();
    let h = negative_sum_hypergraph(&q(red.instance, 3), 1).unwrap();
    let c = lemma2_edge_bound(&h, 10, 3, 1_000_000).unwrap();
    assert!(c.bound_holds && c.missing_holds.is_none());

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let zq = q(zero_sum_instance(&mut rng, 9), 2);
        let h = negative_sum_hypergraph(&zq, 1).unwrap();
        let c = lemma2_edge_bound(&h, 9, 2, 1000).unwrap();
        assert!(c.holds() && c.missing_holds.is_some());
    }
}

#[test]
fn sampler_tracks_expectation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let zq = q(zero_sum_instance(&mut rng, 13), 3);
    let h = negative_sum_hypergraph(&zq, 1).unwrap();
    let nu = matching_number(&h, 1_000_000).unwrap().nu;
    let s = permutation_sampler(&h, 3, 100_000, 5).unwrap();
    assert!(s.z_score() <= 5.0, "{s:?}");
    assert!(s.max_z <= nu);
    assert_eq!(s, permutation_sampler(&h, 3, 100_000, 5).unwrap());
}

#[test]
fn theorem5_and_chain_ratio() {
    let c = check_theorem5(&q(star_instance(16).unwrap(), 2), BUDGET).unwrap();
    assert_eq!(c.count.count, 15);
    assert!(c.count.holds);
    assert_eq!(c.chain_ratio, ratio(12, 15));
    assert!(c.chain_holds);
    let r = check_theorem5(&q(star_instance(15).unwrap(), 2), BUDGET);
    assert!(matches!(r, Err(Error::Precondition(_))));
}

#[test]
fn lemma8_coefficients() {
    assert_eq!(
        lemma8_missing_bound(&int(33), 132, 2).unwrap().coefficient,
        ratio(53, 858)
    );
    assert!(ratio(53, 858) >= ratio(2, 33));
    let zero = lemma8_missing_bound(&ratio(13, 2), 30, 2).unwrap();
    assert_eq!(zero.coefficient, int(0));
    assert!(zero.vacuous);
    assert!(lemma8_missing_bound(&int(1), 10, 2).unwrap().vacuous);
}

#[test]
fn theorem10_on_star_and_random() {
    let th = Thresholds::default();
    let c = check_theorem10(&q(star_instance(132).unwrap(), 2), &th, BUDGET).unwrap();
    assert_eq!(c.count.count, 131);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let rq = q(nonneg_sum_instance(&mut rng, 132), 2);
        let c = check_theorem10(&rq, &th, BUDGET).unwrap();
        assert!(c.count.holds && c.through_x1.holds);
    }
}

#[test]
fn t_sequences() {
    let star = q(star_instance(10).unwrap(), 3);
    assert_eq!(find_t_sequence(&star, 10).t, 0);
    let hm1 = q(hm_construction_1(60, 3).unwrap(), 3);
    assert_eq!(find_t_sequence(&hm1, 60).t, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let nl = q(no_large_instance(&mut rng, 30, 3).unwrap(), 3);
    let red = reduce(&nl).unwrap();
    let ts = find_t_sequence(&q(red.instance.clone(), 3), 30);
    assert!(ts.t >= 1);
    for (j, s) in ts.sets.iter().enumerate() {
        let j = j + 1;
        assert!(s.len() <= j * 2 && (1..=j).all(|i| !s.contains(&i)));
        let sum: Rational = (1..=j).map(|i| red.instance.get(i).clone()).sum::<Rational>()
            + s.iter().map(|&i| red.instance.get(i).clone()).sum::<Rational>();
        assert!(sum < int(0));
    }
}

#[test]
fn hm_and_moderate_checks() {
    let th = Thresholds {
        hm: int(60),
        ..Thresholds::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let c = check_theorem_hm(&q(no_large_instance(&mut rng, 250, 2).unwrap(), 2), &th, BUDGET).unwrap();
    assert_eq!(hm_bound(250, 2), 495.into());
    assert!(c.count.holds);
    let star = check_theorem_hm(&q(star_instance(250).unwrap(), 2), &th, BUDGET);
    assert!(matches!(star, Err(Error::Precondition(_))));
    let low = check_theorem_hm(&q(star_instance(250).unwrap(), 2), &Thresholds::default(), BUDGET);
    assert!(matches!(low, Err(Error::Precondition(_))));

    assert_eq!(g_delta_k(&ratio(1, 2), 3), ratio(1, 168));
    assert_eq!(g_delta_k(&int(0), 3), int(0));
    assert_eq!(g_delta_k(&ratio(1, 4), 2), ratio(3, 448));
}

#[test]
fn reports_carry_statuses() {
    let c = check_theorem5(&q(star_instance(16).unwrap(), 2), BUDGET).unwrap();
    let reports = c.reports(&q(star_instance(16).unwrap(), 2));
    assert!(reports
        .iter()
        .all(|r| r.status == CheckStatus::Holds && !r.paper_ref.is_empty()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counter_agrees_with_oracle(vals in prop::collection::vec((-30i64..=30, 1i64..=6), 1..=11), k in 1usize..=5) {
        let inst = Instance::new(vals.iter().map(|&(a, b)| ratio(a, b)).collect()).unwrap();
        prop_assume!(k <= inst.n());
        let query = q(inst.clone(), k);
        let c = count_nonnegative_ksums(&query, BUDGET).unwrap();
        prop_assert_eq!(c, oracle_count(&inst, k));
        prop_assert_eq!(c + count_negative_ksums(&query, BUDGET).unwrap(), binom_u64(inst.n() as i64, k as i64));
    }

    #[test]
    fn scaling_leaves_structure_unchanged(seed in any::<u64>(), n in 6usize..=12, k in 2usize..=3, num in 1i64..=9, den in 1i64..=9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = zero_sum_instance(&mut rng, n);
        let scaled = inst.scaled(&ratio(num, den)).unwrap();
        let (a, b) = (q(inst, k), q(scaled, k));
        prop_assert_eq!(count_nonnegative_ksums(&a, BUDGET).unwrap(), count_nonnegative_ksums(&b, BUDGET).unwrap());
        let (ha, hb) = (negative_sum_hypergraph(&a, 1).unwrap(), negative_sum_hypergraph(&b, 1).unwrap());
        prop_assert_eq!(matching_number(&ha, 1_000_000).unwrap().nu, matching_number(&hb, 1_000_000).unwrap().nu);
        prop_assert_eq!(fractional_matching(&ha).value, fractional_matching(&hb).value);
        prop_assert_eq!(find_t_sequence(&a, n).t, find_t_sequence(&b, n).t);
    }
}
