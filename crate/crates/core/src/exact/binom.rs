use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::rational::{serde_rational, Rational};

/// Ordinary binomial coefficient, with `C(n, t) = 0` whenever `n < t`,
/// `t < 0` or `n < 0`.
pub fn binom(n: i64, t: i64) -> BigInt {
    if t < 0 || n < 0 || n < t {
        return BigInt::zero();
    }
    let t = t.min(n - t);
    let mut acc = BigInt::one();
    for i in 0..t {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// [`binom`] as a `u64`. Panics if the value does not fit.
pub fn binom_u64(n: i64, t: i64) -> u64 {
    binom(n, t)
        .to_u64()
        .unwrap_or_else(|| panic!("C({n},{t}) does not fit in u64"))
}

/// Real-argument binomial `x(x-1)...(x-t+1)/t!`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneralizedBinomialQuery {
    #[serde(with = "serde_rational")]
    pub x: Rational,
    pub t: u32,
}

impl GeneralizedBinomialQuery {
    pub fn new(x: Rational, t: u32) -> Self {
        Self { x, t }
    }

    pub fn eval(&self) -> Rational {
        gen_binom(&self.x, self.t)
    }
}

/// Falling-factorial binomial evaluated exactly.
pub fn gen_binom(x: &Rational, t: u32) -> Rational {
    let mut acc = Rational::one();
    let mut factor = x.clone();
    for i in 1..=t {
        acc *= &factor;
        acc /= Rational::from_integer(BigInt::from(i));
        factor -= Rational::one();
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{int, ratio};

    #[test]
    fn small_values() {
        assert_eq!(binom(9, 2), BigInt::from(36));
        assert_eq!(binom(7, 3), BigInt::from(35));
        assert_eq!(binom(5, 0), BigInt::from(1));
        assert_eq!(binom(3, 5), BigInt::zero());
        assert_eq!(binom(-2, 1), BigInt::zero());
        assert_eq!(binom_u64(600, 3), 35_820_200);
    }

    #[test]
    fn generalized_examples() {
        assert_eq!(gen_binom(&ratio(7, 2), 2), ratio(35, 8));
        assert_eq!(gen_binom(&int(6), 3), int(20));
        assert_eq!(gen_binom(&ratio(5, 2), 0), int(1));
    }

    #[test]
    fn generalized_agrees_with_integer_binomial() {
        for x in 0..=30i64 {
            for t in 0..=x {
                assert_eq!(
                    gen_binom(&int(x), t as u32),
                    Rational::from_integer(binom(x, t)),
                    "x={x} t={t}"
                );
            }
        }
    }

    #[test]
    fn generalized_is_increasing_above_t() {
        for t in 1..=6u32 {
            let mut prev = gen_binom(&int(t as i64), t);
            // grid of step 1/7 on [t, t + 12]
            for step in 1..=84i64 {
                let x = int(t as i64) + ratio(step, 7);
                let cur = gen_binom(&x, t);
                assert!(cur > prev, "t={t} x={x}");
                prev = cur;
            }
        }
    }
}
