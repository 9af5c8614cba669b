//! Brute-force reference distributions built by enumerating every structure.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rna_rainbow::dist::{DistKind, ExactDistribution};
use rna_rainbow::structures::enumerate_all;
use rna_rainbow::Params;

pub const GRID: [(usize, usize); 8] = [
    (1, 1),
    (1, 2),
    (1, 3),
    (1, 4),
    (2, 1),
    (2, 2),
    (2, 3),
    (2, 4),
];

pub fn params(r: usize, lambda: usize) -> Params {
    Params::new(r, lambda).unwrap()
}

fn tally(n: usize, outcomes: impl Iterator<Item = usize>) -> ExactDistribution {
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    let mut total = 0u64;
    for o in outcomes {
        *counts.entry(o).or_default() += 1;
        total += 1;
    }
    let mut dist = ExactDistribution::new(DistKind::Exact { n });
    for (o, c) in counts {
        dist.outcomes
            .insert(o, BigRational::new(BigInt::from(c), BigInt::from(total)));
    }
    dist
}

/// Law of the longest rainbow length (0 when there is no arc).
pub fn brute_longest_pmf(p: &Params, n: usize) -> ExactDistribution {
    tally(
        n,
        enumerate_all(p, n)
            .unwrap()
            .map(|s| s.rainbow_spectrum().longest()),
    )
}

/// Law of the number of rainbows of length `k`.
pub fn brute_k_rainbow_pmf(p: &Params, n: usize, k: usize) -> ExactDistribution {
    tally(
        n,
        enumerate_all(p, n)
            .unwrap()
            .map(|s| s.rainbow_spectrum().count_of_length(k)),
    )
}

/// Law of the second longest rainbow length (0 with fewer than two rainbows).
pub fn brute_second_longest_pmf(p: &Params, n: usize) -> ExactDistribution {
    tally(
        n,
        enumerate_all(p, n)
            .unwrap()
            .map(|s| s.rainbow_spectrum().nth_longest(2)),
    )
}
