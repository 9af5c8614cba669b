use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::hpreal::HpReal;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistKind {
    /// Exact distribution at sequence length `n`.
    Exact { n: usize },
    /// Limit law as `n` tends to infinity.
    Limit,
}

/// Probability mass over nonnegative integer outcomes.
///
/// Exact tables carry [`BigRational`] probabilities and only list outcomes
/// of positive probability; limit tables carry [`HpReal`] values over the
/// requested outcome range.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionTable<P> {
    pub kind: DistKind,
    pub outcomes: BTreeMap<usize, P>,
}

pub type ExactDistribution = DistributionTable<BigRational>;
pub type LimitDistribution = DistributionTable<HpReal>;

impl<P> DistributionTable<P> {
    pub fn new(kind: DistKind) -> Self {
        DistributionTable {
            kind,
            outcomes: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &P)> {
        self.outcomes.iter().map(|(k, v)| (*k, v))
    }
}

impl ExactDistribution {
    pub fn prob(&self, outcome: usize) -> BigRational {
        self.outcomes
            .get(&outcome)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn total(&self) -> BigRational {
        self.outcomes
            .values()
            .fold(BigRational::zero(), |acc, p| acc + p)
    }

    pub fn is_normalized(&self) -> bool {
        self.total().is_one()
    }

    pub fn mean(&self) -> BigRational {
        self.outcomes
            .iter()
            .fold(BigRational::zero(), |acc, (k, p)| {
                acc + p * BigInt::from(*k)
            })
    }

    pub fn variance(&self) -> BigRational {
        let mean = self.mean();
        let second = self
            .outcomes
            .iter()
            .fold(BigRational::zero(), |acc, (k, p)| {
                let k = BigInt::from(*k);
                acc + p * (&k * &k)
            });
        second - &mean * &mean
    }

    /// `P(X <= m)`.
    pub fn cdf(&self, m: usize) -> BigRational {
        self.outcomes
            .range(..=m)
            .fold(BigRational::zero(), |acc, (_, p)| acc + p)
    }

    /// Running cumulative probabilities in outcome order.
    pub fn cumulative(&self) -> Vec<(usize, BigRational)> {
        let mut acc = BigRational::zero();
        self.outcomes
            .iter()
            .map(|(k, p)| {
                acc = &acc + p;
                (*k, acc.clone())
            })
            .collect()
    }

    pub fn to_hp(&self, precision: u32) -> LimitDistribution {
        DistributionTable {
            kind: self.kind,
            outcomes: self
                .outcomes
                .iter()
                .map(|(k, p)| (*k, HpReal::from_rational(p, precision)))
                .collect(),
        }
    }
}

impl LimitDistribution {
    pub fn total(&self) -> Option<HpReal> {
        let mut it = self.outcomes.values();
        let first = it.next()?.clone();
        Some(it.fold(first, |acc, p| acc.add(p)))
    }
}
