use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exact::rational::serde_rational_vec;
use crate::exact::{int, Rational};

/// `n` exact values sorted in descending order, with their sum cached.
/// Indices used throughout the crate are 1-based positions in this order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "InstanceJson", into = "InstanceJson")]
pub struct Instance {
    values: Vec<Rational>,
    total: Rational,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceJson {
    #[serde(with = "serde_rational_vec")]
    pub values: Vec<Rational>,
}

impl TryFrom<InstanceJson> for Instance {
    type Error = Error;

    fn try_from(raw: InstanceJson) -> Result<Self> {
        Instance::new(raw.values)
    }
}

impl From<Instance> for InstanceJson {
    fn from(inst: Instance) -> Self {
        InstanceJson { values: inst.values }
    }
}

impl Instance {
    pub fn new(mut values: Vec<Rational>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("instance needs at least one value"));
        }
        values.sort_by(|a, b| b.cmp(a));
        let total = values.iter().sum();
        Ok(Self { values, total })
    }

    pub fn from_ints(values: &[i64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| int(v)).collect())
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn total(&self) -> &Rational {
        &self.total
    }

    /// The value at 1-based sorted position `i`.
    pub fn get(&self, i: usize) -> &Rational {
        &self.values[i - 1]
    }

    /// Every value multiplied by `factor > 0`.
    pub fn scaled(&self, factor: &Rational) -> Result<Self> {
        if !factor.is_positive() {
            return Err(invalid("scale factor must be positive"));
        }
        Self::new(self.values.iter().map(|v| v * factor).collect())
    }

    /// Every value plus `shift`.
    pub fn shifted(&self, shift: &Rational) -> Self {
        Self::new(self.values.iter().map(|v| v + shift).collect()).expect("nonempty")
    }

    pub fn max_abs(&self) -> Rational {
        self.values.iter().map(|v| v.abs()).max().expect("nonempty")
    }

    pub(crate) fn scaled_integers(&self) -> Scaled {
        let denom = self.values.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let big: Vec<BigInt> = self.values.iter().map(|v| v.numer() * (&denom / v.denom())).collect();
        // sums of up to n terms must stay far from overflow
        let limit = BigInt::from(i128::MAX >> 8) / BigInt::from(self.n().max(1));
        if big.iter().all(|v| v.abs() <= limit) {
            Scaled::Small(big.iter().map(|v| v.to_i128().expect("checked")).collect())
        } else {
            Scaled::Big(big)
        }
    }
}

/// Values multiplied by the common denominator. Ordering and signs of all
/// subset sums are those of the original rationals.
#[derive(Clone, Debug)]
pub(crate) enum Scaled {
    Small(Vec<i128>),
    Big(Vec<BigInt>),
}

/// A k-sum question about one instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KSumQuery {
    pub instance: Instance,
    pub k: usize,
}

impl KSumQuery {
    pub fn new(instance: Instance, k: usize) -> Result<Self> {
        if k == 0 || k > instance.n() {
            return Err(invalid(format!("k = {k} must satisfy 1 <= k <= n = {}", instance.n())));
        }
        Ok(Self { instance, k })
    }

    pub fn n(&self) -> usize {
        self.instance.n()
    }
}
