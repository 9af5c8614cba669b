//! Exact counting of secondary structures and exact finite-`n` rainbow
//! distributions.
//!
//! The structure series `S(x)` solves `x^(2r) S^2 - B(x) S + A(x) = 0` with
//! `B(0) = 1`, so each coefficient follows from lower ones. Irreducible
//! counts come from `S = 1 / (1 - F)`, and the allowed-inner counts `a(L)`
//! are the coefficients of `S - F + x - (1 + x + ... + x^(lambda-2))`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::dist::{DistKind, ExactDistribution};
use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::params::Params;
use crate::poly::{poly_a, poly_b};

pub type BigCount = BigUint;

/// Exact counts for one `(r, lambda)` up to a horizon `N`. Immutable once
/// built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    params: Params,
    horizon: usize,
    /// `s[n]`, all structures on `n` vertices, `n = 0..=N`.
    s: Vec<BigCount>,
    /// `f[n]`, irreducible structures; `f[0] = 0`.
    f: Vec<BigCount>,
    /// `a[L]`, admissible interiors of a closing stack, `L = 0..=N`.
    a: Vec<BigCount>,
    /// `b[k] = [x^(k-1)] S(x)^2` for `k = 1..=N`; `b[0]` is unused.
    b: Vec<BigCount>,
}

fn to_count(x: BigInt, what: &str, n: usize) -> BigCount {
    x.to_biguint()
        .unwrap_or_else(|| panic!("negative {what}({n}): recurrence invariant violated"))
}

fn self_convolution(s: &[BigInt], m: usize) -> BigInt {
    // sum_{i+j=m} s_i s_j using symmetry
    let mut acc = BigInt::zero();
    for i in 0..m.div_ceil(2) {
        acc += &s[i] * &s[m - i];
    }
    acc *= 2u32;
    if m.is_multiple_of(2) {
        acc += &s[m / 2] * &s[m / 2];
    }
    acc
}

impl CountTable {
    pub fn build(params: Params, horizon: usize) -> Result<Self> {
        params.validate()?;
        if horizon == 0 {
            return Err(Error::InvalidArgument("table horizon must be >= 1".into()));
        }
        let n_max = horizon;
        let a_poly = poly_a(&params);
        let b_poly = poly_b(&params);
        let two_r = 2 * params.r;

        let mut s: Vec<BigInt> = Vec::with_capacity(n_max + 1);
        // conv[m] = [x^m] S^2, needed up to m = N - 1 for b
        let mut conv: Vec<BigInt> = Vec::with_capacity(n_max);
        for n in 0..=n_max {
            let mut v = a_poly.coeff(n);
            if n >= two_r {
                let m = n - two_r;
                while conv.len() <= m {
                    let next = self_convolution(&s, conv.len());
                    conv.push(next);
                }
                v += &conv[m];
            }
            for (i, bi) in b_poly.coeffs().iter().enumerate().skip(1) {
                if i > n {
                    break;
                }
                if !bi.is_zero() {
                    v -= bi * &s[n - i];
                }
            }
            s.push(v);
        }
        while conv.len() < n_max {
            let next = self_convolution(&s, conv.len());
            conv.push(next);
        }

        let mut f: Vec<BigInt> = vec![BigInt::zero(); n_max + 1];
        for n in 1..=n_max {
            let mut v = s[n].clone();
            for i in 1..n {
                if !f[i].is_zero() {
                    v -= &f[i] * &s[n - i];
                }
            }
            f[n] = v;
        }

        let lam = params.lambda;
        let a: Vec<BigCount> = (0..=n_max)
            .map(|l| {
                let mut v = &s[l] - &f[l];
                if l == 1 {
                    v += 1;
                }
                if lam >= 2 && l <= lam - 2 {
                    v -= 1;
                }
                to_count(v, "a", l)
            })
            .collect();

        let mut b = vec![BigCount::zero()];
        b.extend(
            conv.into_iter()
                .enumerate()
                .map(|(m, v)| to_count(v, "b", m + 1)),
        );

        Ok(CountTable {
            params,
            horizon,
            s: s.into_iter()
                .enumerate()
                .map(|(n, v)| to_count(v, "s", n))
                .collect(),
            f: f.into_iter()
                .enumerate()
                .map(|(n, v)| to_count(v, "f", n))
                .collect(),
            a,
            b,
        })
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    fn check(&self, n: usize) -> Result<()> {
        if n > self.horizon {
            Err(Error::OutOfHorizon {
                n,
                horizon: self.horizon,
            })
        } else {
            Ok(())
        }
    }

    /// `s(n)`: number of structures on `n` vertices.
    pub fn count_structures(&self, n: usize) -> Result<&BigCount> {
        self.check(n)?;
        Ok(&self.s[n])
    }

    /// `f(n)`: number of irreducible structures on `n` vertices.
    pub fn count_irreducible(&self, n: usize) -> Result<&BigCount> {
        self.check(n)?;
        Ok(&self.f[n])
    }

    pub fn structures(&self) -> &[BigCount] {
        &self.s
    }

    pub fn irreducible(&self) -> &[BigCount] {
        &self.f
    }

    pub fn allowed_inner(&self) -> &[BigCount] {
        &self.a
    }

    /// `b_k` for `k = 1..=N` (index 0 is a placeholder).
    pub fn b_coefficients(&self) -> &[BigCount] {
        &self.b
    }

    pub fn b_k(&self, k: usize) -> Result<&BigCount> {
        if k == 0 {
            return Err(Error::InvalidArgument("b_k is defined for k >= 1".into()));
        }
        self.check(k)?;
        Ok(&self.b[k])
    }

    /// Structures on `n <= N` vertices whose rainbows all have length at most
    /// `m`, i.e. sequences of irreducible blocks of length at most `m + 1`.
    pub fn bounded_structure_counts(&self, m: usize, upto: usize) -> Result<Vec<BigCount>> {
        self.check(upto)?;
        let block = m + 1;
        let mut t: Vec<BigCount> = Vec::with_capacity(upto + 1);
        for q in 0..=upto {
            if q <= block {
                t.push(self.s[q].clone());
                continue;
            }
            let mut v = BigCount::zero();
            for i in 1..=block {
                if !self.f[i].is_zero() {
                    v += &self.f[i] * &t[q - i];
                }
            }
            t.push(v);
        }
        Ok(t)
    }

    /// Bounded count at a single length, skipping the unconstrained prefix.
    pub fn bounded_count_at(&self, m: usize, n: usize) -> Result<BigCount> {
        self.check(n)?;
        if m + 1 >= n {
            return Ok(self.s[n].clone());
        }
        Ok(self
            .bounded_structure_counts(m, n)?
            .pop()
            .expect("nonempty"))
    }

    /// Exact distribution of the longest rainbow length `Y_n`, with
    /// `Y_n = 0` for the arcless structure.
    pub fn exact_longest_pmf(&self, n: usize) -> Result<ExactDistribution> {
        self.exact_longest_pmf_with(n, Execution::default())
    }

    pub fn exact_longest_pmf_with(&self, n: usize, exec: Execution) -> Result<ExactDistribution> {
        self.check(n)?;
        let mut dist = ExactDistribution::new(DistKind::Exact { n });
        if n == 0 {
            dist.outcomes.insert(0, BigRational::from_integer(1.into()));
            return Ok(dist);
        }
        // cumulative[m] = #{Y_n <= m}, m = 0..n-1
        let cumulative: Vec<BigCount> = map_range(exec, 0..n, |m| {
            self.bounded_count_at(m, n).expect("within horizon")
        });
        Ok(self.difference(n, cumulative))
    }

    /// Exact distribution of the second longest rainbow length, 0 when there
    /// are fewer than two rainbows.
    pub fn exact_second_longest_pmf(&self, n: usize) -> Result<ExactDistribution> {
        self.exact_second_longest_pmf_with(n, Execution::default())
    }

    pub fn exact_second_longest_pmf_with(
        &self,
        n: usize,
        exec: Execution,
    ) -> Result<ExactDistribution> {
        self.check(n)?;
        if n == 0 {
            let mut dist = ExactDistribution::new(DistKind::Exact { n });
            dist.outcomes.insert(0, BigRational::from_integer(1.into()));
            return Ok(dist);
        }
        // Second longest <= m iff at most one block is longer than m + 1:
        // either none is, or one block of length l > m + 1 sits between two
        // bounded sequences.
        let cumulative: Vec<BigCount> = map_range(exec, 0..n, |m| {
            let t = self.bounded_structure_counts(m, n).expect("within horizon");
            let mut total = t[n].clone();
            for l in m + 2..=n {
                if self.f[l].is_zero() {
                    continue;
                }
                let rest = n - l;
                let mut pairs = BigCount::zero();
                for left in 0..=rest {
                    pairs += &t[left] * &t[rest - left];
                }
                total += &self.f[l] * pairs;
            }
            total
        });
        Ok(self.difference(n, cumulative))
    }

    /// Point masses from cumulative counts `#{X <= m}`, `m = 0, 1, ...`.
    fn difference(&self, n: usize, cumulative: Vec<BigCount>) -> ExactDistribution {
        let mut dist = ExactDistribution::new(DistKind::Exact { n });
        let total = BigInt::from(self.s[n].clone());
        let mut prev = BigCount::zero();
        for (m, c) in cumulative.into_iter().enumerate() {
            if c != prev {
                let count = BigInt::from(&c - &prev);
                dist.outcomes
                    .insert(m, BigRational::new(count, total.clone()));
            }
            prev = c;
        }
        dist
    }

    /// `P(Y_n = n - k) = b_k f(n-k+1) / s(n)`, exact for `1 <= k <= n/2`.
    pub fn exact_longest_pmf_fast(&self, n: usize, k: usize) -> Result<BigRational> {
        self.check(n)?;
        if k == 0 || 2 * k > n {
            return Err(Error::InvalidArgument(format!(
                "the block identity needs 1 <= k <= n/2 (n = {n}, k = {k})"
            )));
        }
        let num = &self.b[k] * &self.f[n - k + 1];
        Ok(BigRational::new(num.into(), self.s[n].clone().into()))
    }

    /// `g[n][b]`: structures of length `n` with exactly `b` rainbows of
    /// length `k`, for `n = 0..=upto`.
    pub fn rainbow_marked_counts(&self, k: usize, upto: usize) -> Result<Vec<Vec<BigCount>>> {
        if k == 0 {
            return Err(Error::InvalidArgument(
                "rainbow length k must be >= 1".into(),
            ));
        }
        self.check(upto)?;
        let marked = k + 1;
        let mut g: Vec<Vec<BigCount>> = Vec::with_capacity(upto + 1);
        g.push(vec![BigCount::from(1u32)]);
        for n in 1..=upto {
            let width = n / marked + 1;
            let mut row = vec![BigCount::zero(); width];
            for i in 1..=n {
                let fi = &self.f[i];
                if fi.is_zero() {
                    continue;
                }
                let prev = &g[n - i];
                if i == marked {
                    for (b, v) in prev.iter().enumerate() {
                        if !v.is_zero() {
                            row[b + 1] += fi * v;
                        }
                    }
                } else {
                    for (b, v) in prev.iter().enumerate() {
                        if !v.is_zero() {
                            row[b] += fi * v;
                        }
                    }
                }
            }
            while row.len() > 1 && row.last().is_some_and(|v| v.is_zero()) {
                row.pop();
            }
            g.push(row);
        }
        Ok(g)
    }

    /// Exact distribution of `X_{k,n}`, the number of rainbows of length `k`.
    pub fn exact_k_rainbow_pmf(&self, n: usize, k: usize) -> Result<ExactDistribution> {
        let g = self.rainbow_marked_counts(k, n)?;
        let total = BigInt::from(self.s[n].clone());
        let mut dist = ExactDistribution::new(DistKind::Exact { n });
        for (b, v) in g[n].iter().enumerate() {
            if !v.is_zero() {
                dist.outcomes
                    .insert(b, BigRational::new(v.clone().into(), total.clone()));
            }
        }
        Ok(dist)
    }

    pub fn to_document(&self) -> TableDocument {
        TableDocument {
            format: TABLE_FORMAT.to_string(),
            version: TABLE_VERSION,
            params: self.params,
            horizon: self.horizon,
            s: self.s.iter().map(|v| v.to_string()).collect(),
            f: self.f[1..].iter().map(|v| v.to_string()).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("table serializes")
    }

    /// Rebuild a table from its exported form. `a` and `b` are recomputed; the
    /// stored `s` and `f` must satisfy the sequence identity.
    pub fn from_document(doc: &TableDocument) -> Result<Self> {
        if doc.format != TABLE_FORMAT {
            return Err(Error::Table(format!("unknown format tag {:?}", doc.format)));
        }
        if doc.version != TABLE_VERSION {
            return Err(Error::Table(format!("unsupported version {}", doc.version)));
        }
        doc.params.validate()?;
        if doc.horizon == 0 || doc.s.len() != doc.horizon + 1 || doc.f.len() != doc.horizon {
            return Err(Error::Table("array lengths do not match N".into()));
        }
        let parse = |v: &String| {
            v.parse::<BigCount>()
                .map_err(|_| Error::Table(format!("not a decimal integer: {v:?}")))
        };
        let s: Vec<BigCount> = doc.s.iter().map(parse).collect::<Result<_>>()?;
        let mut f = vec![BigCount::zero()];
        f.extend(doc.f.iter().map(parse).collect::<Result<Vec<_>>>()?);

        // spot-check against a fresh build on a short prefix, then check the
        // sequence identity across the whole table
        let probe = CountTable::build(doc.params, doc.horizon.min(40))?;
        if probe.s[..] != s[..probe.s.len()] || probe.f[..] != f[..probe.f.len()] {
            return Err(Error::Table("counts disagree with the parameters".into()));
        }
        for n in 1..=doc.horizon {
            let mut acc = BigCount::zero();
            for i in 1..=n {
                acc += &f[i] * &s[n - i];
            }
            if acc != s[n] {
                return Err(Error::Table(format!("sequence identity fails at n = {n}")));
            }
        }
        let lam = doc.params.lambda;
        let a = (0..=doc.horizon)
            .map(|l| {
                let mut v = BigInt::from(s[l].clone()) - BigInt::from(f[l].clone());
                if l == 1 {
                    v += 1;
                }
                if lam >= 2 && l <= lam - 2 {
                    v -= 1;
                }
                v.to_biguint()
                    .ok_or_else(|| Error::Table(format!("negative inner count at {l}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut b = vec![BigCount::zero()];
        for k in 1..=doc.horizon {
            let m = k - 1;
            let mut acc = BigCount::zero();
            for i in 0..=m {
                acc += &s[i] * &s[m - i];
            }
            b.push(acc);
        }
        Ok(CountTable {
            params: doc.params,
            horizon: doc.horizon,
            s,
            f,
            a,
            b,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TableDocument =
            serde_json::from_str(text).map_err(|e| Error::Table(e.to_string()))?;
        CountTable::from_document(&doc)
    }

    /// A copy restricted to a smaller horizon.
    pub fn truncated(&self, horizon: usize) -> Result<Self> {
        self.check(horizon)?;
        if horizon == 0 {
            return Err(Error::InvalidArgument("table horizon must be >= 1".into()));
        }
        Ok(CountTable {
            params: self.params,
            horizon,
            s: self.s[..=horizon].to_vec(),
            f: self.f[..=horizon].to_vec(),
            a: self.a[..=horizon].to_vec(),
            b: self.b[..=horizon].to_vec(),
        })
    }

    /// `s(n)` as an `f64`, for quick diagnostics only.
    pub fn s_f64(&self, n: usize) -> Option<f64> {
        self.s.get(n).and_then(|v| v.to_f64())
    }
}

pub const TABLE_FORMAT: &str = "rna-rainbow/count-table";
pub const TABLE_VERSION: u32 = 1;

/// Versioned JSON form of a [`CountTable`]. Big integers are decimal strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableDocument {
    pub format: String,
    pub version: u32,
    pub params: Params,
    #[serde(rename = "N")]
    pub horizon: usize,
    pub s: Vec<String>,
    /// `f(1)..f(N)`.
    pub f: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(r: usize, lambda: usize, n: usize) -> CountTable {
        CountTable::build(Params::new(r, lambda).unwrap(), n).unwrap()
    }

    fn ints(v: &[BigCount]) -> Vec<u64> {
        v.iter().map(|x| x.to_u64().unwrap()).collect()
    }

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn lambda2_counts() {
        let t = table(1, 2, 8);
        assert_eq!(ints(t.structures()), vec![1, 1, 1, 2, 4, 8, 17, 37, 82]);
        assert_eq!(ints(&t.irreducible()[1..=5]), vec![1, 0, 1, 1, 2]);
    }

    #[test]
    fn motzkin_numbers() {
        let t = table(1, 1, 5);
        assert_eq!(ints(t.structures()), vec![1, 1, 2, 4, 9, 21]);
    }

    #[test]
    fn stacked_counts() {
        let t = table(2, 2, 6);
        assert_eq!(t.count_structures(6).unwrap(), &BigCount::from(4u32));
    }

    #[test]
    fn lookups_and_horizon() {
        let t = table(1, 2, 8);
        assert_eq!(t.count_structures(0).unwrap(), &BigCount::from(1u32));
        assert_eq!(t.count_structures(7).unwrap(), &BigCount::from(37u32));
        assert_eq!(t.count_irreducible(5).unwrap(), &BigCount::from(2u32));
        assert!(matches!(
            t.count_structures(9),
            Err(Error::OutOfHorizon { n: 9, horizon: 8 })
        ));
    }

    #[test]
    fn rejects_bad_build() {
        assert!(CountTable::build(Params { r: 1, lambda: 2 }, 0).is_err());
        assert!(CountTable::build(Params { r: 0, lambda: 2 }, 5).is_err());
    }

    #[test]
    fn sequence_and_inner_identities() {
        for r in 1..=4 {
            for lambda in 1..=4 {
                let t = table(r, lambda, 80);
                for n in 1..=80 {
                    let sum: BigCount = (1..=n).map(|i| &t.f[i] * &t.s[n - i]).sum();
                    assert_eq!(sum, t.s[n], "sequence identity r={r} lambda={lambda} n={n}");
                }
                for n in 2..=80 {
                    let mut acc = BigCount::zero();
                    let mut tt = r;
                    while 2 * tt <= n {
                        acc += &t.a[n - 2 * tt];
                        tt += 1;
                    }
                    assert_eq!(acc, t.f[n], "inner identity r={r} lambda={lambda} n={n}");
                }
                assert_eq!(t.f[1], BigCount::from(1u32));
            }
        }
    }

    #[test]
    fn b_matches_direct_convolution() {
        let t = table(2, 3, 30);
        for k in 1..=30 {
            let m = k - 1;
            let direct: BigCount = (0..=m).map(|i| &t.s[i] * &t.s[m - i]).sum();
            assert_eq!(t.b[k], direct);
        }
    }

    #[test]
    fn bounded_counts_edges() {
        let t = table(1, 2, 10);
        // bound inactive
        assert_eq!(t.bounded_count_at(9, 10).unwrap(), t.s[10]);
        // only the open chain
        for n in 0..=10 {
            assert_eq!(
                t.bounded_structure_counts(0, 10).unwrap()[n],
                BigCount::from(1u32)
            );
        }
        assert_eq!(t.bounded_count_at(2, 5).unwrap(), BigCount::from(4u32));
    }

    #[test]
    fn bounded_counts_monotone_in_m() {
        let t = table(1, 1, 30);
        for n in 0..=30 {
            let mut prev = BigCount::zero();
            for m in 0..=30 {
                let c = t.bounded_count_at(m, n).unwrap();
                assert!(c >= prev);
                prev = c;
            }
        }
    }

    #[test]
    fn longest_pmf_n5() {
        let t = table(1, 2, 8);
        let d = t.exact_longest_pmf(5).unwrap();
        assert_eq!(d.prob(0), q(1, 8));
        assert_eq!(d.prob(2), q(3, 8));
        assert_eq!(d.prob(3), q(2, 8));
        assert_eq!(d.prob(4), q(2, 8));
        assert_eq!(d.len(), 4);
        assert!(d.is_normalized());
        let one = table(3, 4, 3).exact_longest_pmf(1).unwrap();
        assert_eq!(one.prob(0), q(1, 1));
    }

    #[test]
    fn fast_path_examples() {
        let t = table(1, 2, 8);
        assert_eq!(t.exact_longest_pmf_fast(5, 1).unwrap(), q(2, 8));
        assert_eq!(t.exact_longest_pmf_fast(5, 2).unwrap(), q(1, 4));
        assert!(t.exact_longest_pmf_fast(6, 3).is_ok());
        assert!(t.exact_longest_pmf_fast(6, 4).is_err());
        assert!(t.exact_longest_pmf_fast(6, 0).is_err());
    }

    #[test]
    fn fast_path_matches_bounded_counts() {
        for (r, lambda) in [(1, 1), (1, 2), (2, 3), (3, 4)] {
            let t = table(r, lambda, 40);
            for n in 2..=40 {
                let d = t.exact_longest_pmf_with(n, Execution::Sequential).unwrap();
                for k in 1..=n / 2 {
                    assert_eq!(t.exact_longest_pmf_fast(n, k).unwrap(), d.prob(n - k));
                }
            }
        }
    }

    #[test]
    fn marked_counts() {
        let t = table(1, 2, 8);
        let g = t.rainbow_marked_counts(2, 8).unwrap();
        assert_eq!(g[3][0], BigCount::from(1u32));
        assert_eq!(g[3][1], BigCount::from(1u32));
        assert_eq!(g[5][1], BigCount::from(3u32));
        for (row, s) in g.iter().zip(&t.s) {
            let total: BigCount = row.iter().sum();
            assert_eq!(&total, s);
        }
        let d = t.exact_k_rainbow_pmf(5, 2).unwrap();
        assert_eq!(d.prob(1), q(3, 8));
        assert!(d.is_normalized());
        let none = t.exact_k_rainbow_pmf(4, 4).unwrap();
        assert_eq!(none.prob(0), q(1, 1));
        assert!(t.rainbow_marked_counts(0, 4).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let t = table(2, 3, 50);
        let back = CountTable::from_json(&t.to_json()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn json_rejects_tampering() {
        let t = table(1, 2, 20);
        let mut doc = t.to_document();
        doc.s[15] = "12345".into();
        assert!(CountTable::from_document(&doc).is_err());
        let mut doc = t.to_document();
        doc.version = 99;
        assert!(CountTable::from_document(&doc).is_err());
        let mut doc = t.to_document();
        doc.f.pop();
        assert!(CountTable::from_document(&doc).is_err());
        assert!(CountTable::from_json("{").is_err());
    }

    #[test]
    fn json_shape() {
        let t = table(1, 2, 3);
        let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v["N"], 3);
        assert_eq!(v["params"]["lambda"], 2);
        assert_eq!(v["s"], serde_json::json!(["1", "1", "1", "2"]));
        assert_eq!(v["f"], serde_json::json!(["1", "0", "1"]));
    }

    #[test]
    fn truncation() {
        let t = table(1, 1, 30);
        assert_eq!(t.truncated(10).unwrap(), table(1, 1, 10));
    }
}
