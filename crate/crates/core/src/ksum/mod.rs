//! Counting nonnegative k-sums and checking the bounds around them.

mod checks;
mod count;
mod instance;
mod reduce;
mod sampler;

pub use checks::{
    check_lemma1_lemma6, check_theorem10, check_theorem5, check_theorem_hm, check_theorem_moderate, find_t_sequence,
    g_delta_k, hm_bound, lemma2_edge_bound, lemma8_missing_bound, refs, CountBound, EdgeBoundCheck, HmCheck,
    MatchingBoundCheck, MissingBound, ModerateCheck, TSequence, Theorem10Check, Theorem5Check, Thresholds,
};
pub use count::{
    count_negative_ksums, count_nonnegative_ksums, count_nonnegative_ksums_bruteforce, count_through, is_large,
    is_moderately_large, DEFAULT_ENUM_BUDGET,
};
pub use instance::{Instance, InstanceJson, KSumQuery};
pub use reduce::{negative_sum_hypergraph, reduce, Reduction};
pub use sampler::{permutation_sampler, PermutationSamplerReport};
