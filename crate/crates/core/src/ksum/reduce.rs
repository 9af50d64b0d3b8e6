use num_traits::{Signed, Zero};
use serde::Serialize;

use super::count::is_large;
use super::instance::{Instance, KSumQuery, Scaled};
use crate::combinatorics::{enumerate_ksets, KSet, MAX_GROUND};
use crate::error::{precondition, Result};
use crate::exact::rational::serde_rational;
use crate::exact::{format_rational, int, Rational};
use crate::hypergraph::Hypergraph;

/// The normalized instance together with a log of how it was obtained.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Reduction {
    pub instance: Instance,
    /// Amount added to every value (zero or `-total/n`).
    #[serde(with = "serde_rational")]
    pub shift: Rational,
    /// True when `x_1` is large, which already gives `C(n-1, k-1)`
    /// nonnegative sums through `x_1`.
    pub pivot_large: bool,
    pub steps: Vec<String>,
}

/// Sorts, translates a positive total down to zero, and flags an early
/// exit when the largest value is large. Translating every value down can
/// only remove nonnegative sums, so lower bounds proved for the reduced
/// instance hold for the original one.
pub fn reduce(q: &KSumQuery) -> Result<Reduction> {
    let inst = &q.instance;
    if inst.total().is_negative() {
        return Err(precondition(format!(
            "total {} is negative",
            format_rational(inst.total())
        )));
    }
    let mut steps = vec!["sorted values in descending order".to_string()];
    let (instance, shift) = if inst.total().is_zero() {
        steps.push("total already zero".to_string());
        (inst.clone(), Rational::zero())
    } else {
        let shift = -(inst.total() / int(inst.n() as i64));
        steps.push(format!("translated every value by {}", format_rational(&shift)));
        (inst.shifted(&shift), shift)
    };
    let reduced = KSumQuery::new(instance, q.k)?;
    let pivot_large = is_large(&reduced, 1);
    if pivot_large {
        steps.push("x_1 is large; early exit".to_string());
    }
    for s in &steps {
        log::debug!("reduction: {s}");
    }
    Ok(Reduction {
        instance: reduced.instance,
        shift,
        pivot_large,
        steps,
    })
}

/// The `(k-1)`-uniform hypergraph on the indices other than `pivot` whose
/// edges are the sets `T` with `x_pivot + sum(T) < 0`. Vertex labels are
/// the original sorted positions.
pub fn negative_sum_hypergraph(q: &KSumQuery, pivot: usize) -> Result<Hypergraph> {
    let n = q.n();
    if q.k < 2 {
        return Err(precondition("negative-sum hypergraph needs k >= 2"));
    }
    if n > MAX_GROUND as usize {
        return Err(precondition(format!("hypergraph needs n <= {MAX_GROUND}")));
    }
    if pivot == 0 || pivot > n {
        return Err(precondition(format!("pivot {pivot} out of range 1..={n}")));
    }
    fn edges<T>(v: &[T], n: usize, r: usize, pivot: usize) -> Vec<KSet>
    where
        T: Clone + Ord + num_traits::Zero,
    {
        enumerate_ksets(n as u32, r as u32)
            .filter(|s| !s.contains(pivot as u32))
            .filter(|s| {
                let sum = s
                    .iter()
                    .fold(v[pivot - 1].clone(), |acc, i| acc + v[i as usize - 1].clone());
                sum < T::zero()
            })
            .collect()
    }
    let list = match q.instance.scaled_integers() {
        Scaled::Small(v) => edges(&v, n, q.k - 1, pivot),
        Scaled::Big(v) => edges(&v, n, q.k - 1, pivot),
    };
    let vertices = KSet::from_mask(crate::combinatorics::ground_mask(n as u32)).without(pivot as u32);
    Hypergraph::new(n as u32, (q.k - 1) as u32, list)?.with_vertices(vertices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    fn star(n: usize, k: usize) -> KSumQuery {
        let mut v = vec![-1; n];
        v[0] = n as i64 - 1;
        KSumQuery::new(Instance::from_ints(&v).unwrap(), k).unwrap()
    }

    #[test]
    fn reduction_translates_positive_total() {
        let q = KSumQuery::new(Instance::from_ints(&[3, 1, -1]).unwrap(), 2).unwrap();
        let r = reduce(&q).unwrap();
        assert_eq!(r.shift, int(-1));
        assert_eq!(r.instance.values(), &[int(2), int(0), int(-2)]);
        assert!(r.pivot_large);
        assert_eq!(r.steps.len(), 3);
        let neg = KSumQuery::new(Instance::from_ints(&[1, -2]).unwrap(), 1).unwrap();
        assert!(reduce(&neg).is_err());
        let q = KSumQuery::new(Instance::new(vec![ratio(1, 3), ratio(-1, 3)]).unwrap(), 2).unwrap();
        assert_eq!(reduce(&q).unwrap().shift, int(0));
    }

    #[test]
    fn star_hypergraphs() {
        let q = star(8, 3);
        assert_eq!(negative_sum_hypergraph(&q, 1).unwrap().edge_count(), 0);
        let h = negative_sum_hypergraph(&q, 2).unwrap();
        assert_eq!(h.edge_count(), 15);
        assert!(h.edges().iter().all(|e| !e.contains(1) && !e.contains(2)));
        assert_eq!(h.num_vertices(), 7);
        let zero = KSumQuery::new(Instance::from_ints(&[0; 6]).unwrap(), 3).unwrap();
        assert_eq!(negative_sum_hypergraph(&zero, 1).unwrap().edge_count(), 0);
        assert!(negative_sum_hypergraph(&star(5, 1), 1).is_err());
    }
}
