//! Exact uniform sampling of secondary structures by the recursive method.
//!
//! A structure is a sequence of irreducible blocks. A block of length 1 is
//! an unpaired vertex; a longer block is a closing stack of `t >= r` pairs
//! around an admissible interior. An admissible interior of length `L` is
//! empty, a single vertex, or a *reducible* structure (at least two blocks),
//! since an irreducible interior would continue the stack. Every weighted
//! choice compares a uniform big integer against exact cumulative counts.

use std::collections::HashMap;

use num_bigint::{BigUint, RandBigInt};
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::series::CountTable;
use crate::structures::{enumerate_all_capped, Arc, SecondaryStructure};

/// Samples drawn per independently seeded sub-batch.
pub const BATCH_SIZE: usize = 256;

/// Largest `n` accepted by the enumeration-based uniformity test.
pub const CHI_SQUARE_MAX_N: usize = 12;

/// How the interior of a closing stack is drawn. Only `Reducible` is
/// uniform; `Unconstrained` exists to check that the uniformity test can
/// tell the difference.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InteriorRule {
    #[default]
    Reducible,
    Unconstrained,
}

enum Task {
    Sequence { start: usize, len: usize },
    Block { start: usize, len: usize },
    Interior { start: usize, len: usize },
}

/// Count table plus a deterministic random stream.
pub struct Sampler<'a> {
    table: &'a CountTable,
    rng: ChaCha8Rng,
    interior: InteriorRule,
}

impl<'a> Sampler<'a> {
    pub fn new(table: &'a CountTable, seed: u64) -> Self {
        Sampler::with_rng(table, ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn with_rng(table: &'a CountTable, rng: ChaCha8Rng) -> Self {
        Sampler {
            table,
            rng,
            interior: InteriorRule::Reducible,
        }
    }

    /// Stream `batch` of the master `seed`; sub-batches never share state.
    pub fn for_batch(table: &'a CountTable, seed: u64, batch: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(batch);
        Sampler::with_rng(table, rng)
    }

    #[doc(hidden)]
    pub fn with_interior_rule(mut self, rule: InteriorRule) -> Self {
        self.interior = rule;
        self
    }

    /// Index `i` drawn with probability `weight(i) / total`.
    fn choose<I>(&mut self, total: &BigUint, weights: I) -> usize
    where
        I: IntoIterator<Item = (usize, BigUint)>,
    {
        let mut u = self.rng.gen_biguint_below(total);
        for (i, w) in weights {
            if u < w {
                return i;
            }
            u -= w;
        }
        unreachable!("weights do not sum to the stated total")
    }

    pub fn sample_structure(&mut self, n: usize) -> Result<SecondaryStructure> {
        let table = self.table;
        table.count_structures(n)?;
        let s = table.structures();
        let f = table.irreducible();
        let a = table.allowed_inner();
        let r = table.params().r;

        let mut arcs: Vec<Arc> = Vec::new();
        let mut stack = vec![Task::Sequence { start: 1, len: n }];
        while let Some(task) = stack.pop() {
            match task {
                Task::Sequence { start, len } => {
                    if len == 0 {
                        continue;
                    }
                    let i = self.choose(
                        &s[len],
                        (1..=len)
                            .filter(|&i| !f[i].is_zero())
                            .map(|i| (i, &f[i] * &s[len - i])),
                    );
                    stack.push(Task::Sequence {
                        start: start + i,
                        len: len - i,
                    });
                    stack.push(Task::Block { start, len: i });
                }
                Task::Block { start, len } => {
                    if len == 1 {
                        continue;
                    }
                    let t = self.choose(
                        &f[len],
                        (r..=len / 2)
                            .filter(|&t| !a[len - 2 * t].is_zero())
                            .map(|t| (t, a[len - 2 * t].clone())),
                    );
                    for q in 0..t {
                        arcs.push((start + q, start + len - 1 - q));
                    }
                    stack.push(Task::Interior {
                        start: start + t,
                        len: len - 2 * t,
                    });
                }
                Task::Interior { start, len } => {
                    if len <= 1 {
                        continue;
                    }
                    match self.interior {
                        InteriorRule::Reducible => {
                            let total = &s[len] - &f[len];
                            let i = self.choose(
                                &total,
                                (1..len)
                                    .filter(|&i| !f[i].is_zero())
                                    .map(|i| (i, &f[i] * &s[len - i])),
                            );
                            stack.push(Task::Sequence {
                                start: start + i,
                                len: len - i,
                            });
                            stack.push(Task::Block { start, len: i });
                        }
                        InteriorRule::Unconstrained => {
                            stack.push(Task::Sequence { start, len });
                        }
                    }
                }
            }
        }
        SecondaryStructure::new(n, arcs)
    }
}

/// `count` structures, drawn in sub-batches of [`BATCH_SIZE`] whose streams
/// derive from `(seed, batch index)`. Output order is fixed by batch index,
/// so the result does not depend on scheduling.
pub fn sample_many(
    table: &CountTable,
    n: usize,
    count: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<SecondaryStructure>> {
    sample_many_with_rule(table, n, count, seed, exec, InteriorRule::Reducible)
}

fn sample_many_with_rule(
    table: &CountTable,
    n: usize,
    count: usize,
    seed: u64,
    exec: Execution,
    rule: InteriorRule,
) -> Result<Vec<SecondaryStructure>> {
    table.count_structures(n)?;
    let batches = count.div_ceil(BATCH_SIZE);
    let chunks = map_range(exec, 0..batches, |b| {
        let mut sampler = Sampler::for_batch(table, seed, b as u64).with_interior_rule(rule);
        let size = BATCH_SIZE.min(count - b * BATCH_SIZE);
        (0..size)
            .map(|_| sampler.sample_structure(n))
            .collect::<Result<Vec<_>>>()
    });
    let mut out = Vec::with_capacity(count);
    for chunk in chunks {
        out.extend(chunk?);
    }
    Ok(out)
}

/// Per-sample rainbow statistics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpectrumRecord {
    pub sample_id: usize,
    pub longest: usize,
    pub second_longest: usize,
    pub third_longest: usize,
    pub n_rainbows: usize,
    pub five_three_distance: usize,
    /// Number of rainbows of each requested length, aligned with
    /// [`SpectrumStats::k_list`].
    pub x_k: Vec<usize>,
}

impl SpectrumRecord {
    pub fn from_structure(sample_id: usize, s: &SecondaryStructure, k_list: &[usize]) -> Self {
        let sp = s.rainbow_spectrum();
        SpectrumRecord {
            sample_id,
            longest: sp.nth_longest(1),
            second_longest: sp.nth_longest(2),
            third_longest: sp.nth_longest(3),
            n_rainbows: sp.rainbow_count(),
            five_three_distance: sp.five_prime_three_prime_distance(),
            x_k: k_list.iter().map(|&k| sp.count_of_length(k)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSd {
    pub mean: f64,
    pub stddev: f64,
}

impl MeanSd {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return MeanSd {
                mean: f64::NAN,
                stddev: f64::NAN,
            };
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = if v.len() > 1 {
            v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        MeanSd {
            mean,
            stddev: var.sqrt(),
        }
    }

    /// Standard error of the mean for `count` samples.
    pub fn std_error(&self, count: usize) -> f64 {
        self.stddev / (count as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSummary {
    pub samples: usize,
    pub longest: MeanSd,
    pub second_longest: MeanSd,
    pub third_longest: MeanSd,
    pub n_rainbows: MeanSd,
    pub five_three_distance: MeanSd,
    pub x_k: Vec<(usize, MeanSd)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumStats {
    pub n: usize,
    pub k_list: Vec<usize>,
    pub records: Vec<SpectrumRecord>,
}

impl SpectrumStats {
    pub fn from_structures(n: usize, k_list: &[usize], structures: &[SecondaryStructure]) -> Self {
        SpectrumStats {
            n,
            k_list: k_list.to_vec(),
            records: structures
                .iter()
                .enumerate()
                .map(|(i, s)| SpectrumRecord::from_structure(i, s, k_list))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn summary(&self) -> SpectrumSummary {
        let col = |f: &dyn Fn(&SpectrumRecord) -> usize| {
            MeanSd::of(self.records.iter().map(|r| f(r) as f64))
        };
        SpectrumSummary {
            samples: self.records.len(),
            longest: col(&|r| r.longest),
            second_longest: col(&|r| r.second_longest),
            third_longest: col(&|r| r.third_longest),
            n_rainbows: col(&|r| r.n_rainbows),
            five_three_distance: col(&|r| r.five_three_distance),
            x_k: self
                .k_list
                .iter()
                .enumerate()
                .map(|(idx, &k)| (k, col(&|r| r.x_k[idx])))
                .collect(),
        }
    }

    /// Empirical `P(n - Y_n = k)` for `k = 1..=kmax`, indexed from 0 for `k = 1`.
    pub fn longest_gap_frequencies(&self, kmax: usize) -> Vec<f64> {
        let mut counts = vec![0usize; kmax];
        for r in &self.records {
            let gap = self.n - r.longest;
            if (1..=kmax).contains(&gap) {
                counts[gap - 1] += 1;
            }
        }
        let total = self.records.len() as f64;
        counts.into_iter().map(|c| c as f64 / total).collect()
    }

    /// CSV with columns `sample_id, longest, second_longest, third_longest,
    /// n_rainbows, five_three_distance, x_<k>...`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "sample_id,longest,second_longest,third_longest,n_rainbows,five_three_distance",
        );
        for k in &self.k_list {
            out.push_str(&format!(",x_{k}"));
        }
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{}",
                r.sample_id,
                r.longest,
                r.second_longest,
                r.third_longest,
                r.n_rainbows,
                r.five_three_distance
            ));
            for x in &r.x_k {
                out.push_str(&format!(",{x}"));
            }
            out.push('\n');
        }
        out
    }
}

pub fn sample_batch(
    table: &CountTable,
    n: usize,
    count: usize,
    k_list: &[usize],
    seed: u64,
    exec: Execution,
) -> Result<SpectrumStats> {
    if count == 0 {
        return Err(Error::InvalidArgument("sample count must be >= 1".into()));
    }
    let structures = sample_many(table, n, count, seed, exec)?;
    Ok(SpectrumStats::from_structures(n, k_list, &structures))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquareOutcome {
    pub cells: usize,
    pub draws: usize,
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    pub passed: bool,
}

/// Significance level of [`chi_square_uniformity`].
pub const CHI_SQUARE_ALPHA: f64 = 0.001;

/// Pearson test of sampled structure frequencies against the uniform law on
/// all `s(n)` structures, which are enumerated explicitly.
pub fn chi_square_uniformity(
    table: &CountTable,
    n: usize,
    draws: usize,
    seed: u64,
    exec: Execution,
) -> Result<ChiSquareOutcome> {
    chi_square_with_rule(table, n, draws, seed, exec, InteriorRule::Reducible)
}

#[doc(hidden)]
pub fn chi_square_with_rule(
    table: &CountTable,
    n: usize,
    draws: usize,
    seed: u64,
    exec: Execution,
    rule: InteriorRule,
) -> Result<ChiSquareOutcome> {
    if draws == 0 {
        return Err(Error::InvalidArgument("draws must be >= 1".into()));
    }
    table.count_structures(n)?;
    let cells: HashMap<Vec<Arc>, usize> =
        enumerate_all_capped(&table.params(), n, CHI_SQUARE_MAX_N)?
            .enumerate()
            .map(|(i, s)| (s.arcs().to_vec(), i))
            .collect();
    let k = cells.len();
    let batches = draws.div_ceil(BATCH_SIZE);
    let partial = map_range(exec, 0..batches, |b| -> Result<Vec<u64>> {
        let mut sampler = Sampler::for_batch(table, seed, b as u64).with_interior_rule(rule);
        let size = BATCH_SIZE.min(draws - b * BATCH_SIZE);
        let mut counts = vec![0u64; k];
        for _ in 0..size {
            let s = sampler.sample_structure(n)?;
            let idx = cells.get(s.arcs()).ok_or_else(|| {
                Error::InvalidArgument(format!("sampled an invalid structure {s}"))
            })?;
            counts[*idx] += 1;
        }
        Ok(counts)
    });
    let mut counts = vec![0u64; k];
    for p in partial {
        for (c, v) in counts.iter_mut().zip(p?) {
            *c += v;
        }
    }
    let expected = draws as f64 / k as f64;
    let statistic: f64 = counts
        .iter()
        .map(|&o| (o as f64 - expected).powi(2) / expected)
        .sum();
    let dof = k - 1;
    let p_value = if dof == 0 {
        1.0
    } else {
        let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
        dist.sf(statistic)
    };
    Ok(ChiSquareOutcome {
        cells: k,
        draws,
        statistic,
        degrees_of_freedom: dof,
        p_value,
        passed: p_value > CHI_SQUARE_ALPHA,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Params;

    fn table(r: usize, lambda: usize, n: usize) -> CountTable {
        CountTable::build(Params::new(r, lambda).unwrap(), n).unwrap()
    }

    #[test]
    fn single_vertex() {
        let t = table(1, 2, 5);
        let mut s = Sampler::new(&t, 3);
        for _ in 0..10 {
            assert_eq!(s.sample_structure(1).unwrap().to_dotbracket(), ".");
        }
        assert_eq!(s.sample_structure(0).unwrap().len(), 0);
        assert!(s.sample_structure(6).is_err());
    }

    #[test]
    fn samples_are_valid() {
        for (r, lambda) in [(1, 1), (1, 2), (2, 2), (3, 4), (4, 4)] {
            let t = table(r, lambda, 120);
            let mut s = Sampler::new(&t, 11);
            for n in [1, 2, 7, 30, 120] {
                for _ in 0..20 {
                    let st = s.sample_structure(n).unwrap();
                    assert_eq!(st.len(), n);
                    assert!(st.validate(&t.params()).is_valid(), "{st}");
                }
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let t = table(1, 1, 60);
        let a = sample_many(&t, 60, 600, 42, Execution::Sequential).unwrap();
        let b = sample_many(&t, 60, 600, 42, Execution::Parallel).unwrap();
        let c = sample_many(&t, 60, 600, 43, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn stats_csv_schema() {
        let t = table(1, 1, 30);
        let stats = sample_batch(&t, 30, 5, &[2, 3], 1, Execution::Sequential).unwrap();
        let csv = stats.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "sample_id,longest,second_longest,third_longest,n_rainbows,five_three_distance,x_2,x_3"
        );
        assert_eq!(lines.count(), 5);
        assert!(sample_batch(&t, 30, 0, &[], 1, Execution::Sequential).is_err());
    }

    #[test]
    fn summary_matches_records() {
        let t = table(1, 1, 40);
        let stats = sample_batch(&t, 40, 300, &[2], 5, Execution::Sequential).unwrap();
        let sum = stats.summary();
        let mean = stats.records.iter().map(|r| r.longest as f64).sum::<f64>() / 300.0;
        assert!((sum.longest.mean - mean).abs() < 1e-12);
        assert_eq!(sum.samples, 300);
        for r in &stats.records {
            assert!(r.longest >= r.second_longest && r.second_longest >= r.third_longest);
        }
    }

    #[test]
    fn chi_square_small() {
        let t = table(1, 2, 8);
        let out = chi_square_uniformity(&t, 5, 20_000, 9, Execution::Sequential).unwrap();
        assert_eq!(out.cells, 8);
        assert!(out.passed, "{out:?}");
        assert!(chi_square_uniformity(&t, 5, 0, 9, Execution::Sequential).is_err());
        let big = table(1, 2, 13);
        assert!(chi_square_uniformity(&big, 13, 10, 9, Execution::Sequential).is_err());
    }
}
