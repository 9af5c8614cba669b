//! Dominant singularity, singular-expansion constants and limit laws.
//!
//! `rho` is the smallest positive root of the discriminant
//! `D(x) = B(x)^2 - 4 x^(2r) A(x)`, located by exact Sturm counting and
//! rational bisection and then certified simple. Near `rho`,
//!
//! ```text
//! F(x) = tau - delta_hat (rho - x)^(1/2) + O(rho - x)
//! ```
//!
//! with `delta_hat = sqrt(-D'(rho)) / (2 rho^(2r) S(rho)^2) > 0`, which gives
//! `[x^n] F ~ c_F n^(-3/2) rho^(-n)` for `c_F = delta_hat rho^(1/2) / (2 sqrt(pi))`.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::dist::{DistKind, LimitDistribution};
use crate::error::{Error, Result};
use crate::hpreal::{HpReal, DEFAULT_TARGET_DIGITS, DEFAULT_WORKING_DIGITS};
use crate::params::Params;
use crate::poly::{discriminant, poly_b, smallest_root_in_unit_interval, IntPoly, RootBracket};
use crate::series::CountTable;

/// Guard digits carried on top of the requested output precision.
pub const GUARD_DIGITS: u32 = 20;

/// Working precision used for a requested number of output digits.
pub fn working_digits_for(target_digits: u32) -> u32 {
    DEFAULT_WORKING_DIGITS.max(target_digits + GUARD_DIGITS)
}

/// Certified location of the dominant singularity.
#[derive(Debug, Clone)]
pub struct Rho {
    pub bracket: RootBracket,
    pub value: HpReal,
}

fn eval_hp(p: &IntPoly, x: &HpReal) -> HpReal {
    let prec = x.precision();
    let mut acc = HpReal::zero(prec);
    for c in p.coeffs().iter().rev() {
        acc = acc.mul(x).add(&HpReal::from_bigint(c, prec));
    }
    acc
}

/// Smallest positive real root of `D`, to `digits` decimal digits.
///
/// Fails when `D` has no root in `(0, 1)`, when the root is not simple, or
/// when `B` is not positive there (the structure series would then not have
/// a square-root singularity at `rho`).
pub fn find_rho(params: &Params, digits: u32) -> Result<Rho> {
    params.validate()?;
    if digits == 0 {
        return Err(Error::InvalidArgument("target digits must be >= 1".into()));
    }
    let d = discriminant(params);
    let bits = (digits as f64 * std::f64::consts::LOG2_10).ceil() as u64 + 8;
    let bracket = smallest_root_in_unit_interval(&d, bits).ok_or_else(|| {
        Error::RootIsolation(format!("discriminant has no root in (0, 1) for {params}"))
    })?;

    // odd multiplicity: D changes sign across the bracket
    let (slo, shi) = (d.sign_at(&bracket.lo), d.sign_at(&bracket.hi));
    let degenerate = bracket.lo == bracket.hi;
    if !degenerate && (slo != Ordering::Greater || shi != Ordering::Less) {
        return Err(Error::RootIsolation(format!(
            "no sign change of D around the smallest root for {params} (root not simple)"
        )));
    }
    // simple: |D'(mid)| exceeds the largest change D' can make on the bracket
    let dd = d.derivative();
    let mid = bracket.midpoint();
    let d1 = dd.eval_rational(&mid).abs();
    let slack = BigRational::from_integer(d.second_derivative_bound_unit()) * bracket.width();
    if d1.is_zero() || d1 <= slack {
        return Err(Error::RootIsolation(format!(
            "could not certify D'(rho) != 0 for {params}"
        )));
    }
    let b = poly_b(params);
    if b.sign_at(&bracket.lo) != Ordering::Greater || b.sign_at(&bracket.hi) != Ordering::Greater {
        return Err(Error::RootIsolation(format!("B(rho) <= 0 for {params}")));
    }
    let value = HpReal::from_rational(&mid, digits + 2).with_precision(digits);
    Ok(Rho { bracket, value })
}

/// Constants of the singular expansion and the limit laws for one
/// `(r, lambda)`.
#[derive(Debug, Clone)]
pub struct AsymptoticConstants {
    pub params: Params,
    pub target_digits: u32,
    pub working_digits: u32,
    pub rho: HpReal,
    pub rho_bracket: RootBracket,
    /// `F(rho)`.
    pub tau: HpReal,
    /// `S(rho) = 1 / (1 - tau)`.
    pub s_rho: HpReal,
    pub delta_hat: HpReal,
    pub c_f: HpReal,
    /// `(1 - tau)^2`, the normaliser of the longest-rainbow limit law.
    pub c: HpReal,
    pub alpha: HpReal,
    pub beta: HpReal,
}

pub fn singular_constants(params: &Params, target_digits: u32) -> Result<AsymptoticConstants> {
    singular_constants_with(params, target_digits, working_digits_for(target_digits))
}

pub fn singular_constants_with(
    params: &Params,
    target_digits: u32,
    working_digits: u32,
) -> Result<AsymptoticConstants> {
    if working_digits < target_digits + 2 {
        return Err(Error::InvalidArgument(
            "working precision must exceed the target precision".into(),
        ));
    }
    let w = working_digits;
    let rho_cert = find_rho(params, w)?;
    let rho = rho_cert.value.clone();
    let d = discriminant(params);
    let b_poly = poly_b(params);

    let one = HpReal::one(w);
    let two = HpReal::from_u64(2, w);
    let rho_2r = rho.powi(2 * params.r as u64);
    let b_rho = eval_hp(&b_poly, &rho);
    let s_rho = b_rho.div(&two.mul(&rho_2r));
    let tau = one.sub(&one.div(&s_rho));
    let d1 = eval_hp(&d.derivative(), &rho);
    if !d1.is_negative() {
        return Err(Error::RootIsolation(format!("D'(rho) >= 0 for {params}")));
    }
    let delta_hat = d1
        .neg()
        .sqrt()
        .div(&two.mul(&rho_2r).mul(&s_rho).mul(&s_rho));
    let pi = HpReal::pi(w);
    let sqrt_pi = pi.sqrt();
    let sqrt_rho = rho.sqrt();
    let c_f = delta_hat.mul(&sqrt_rho).div(&two.mul(&sqrt_pi));
    let one_minus_tau = one.sub(&tau);
    let c = one_minus_tau.mul(&one_minus_tau);
    let alpha = two
        .mul(&delta_hat)
        .mul(&sqrt_rho)
        .div(&sqrt_pi.mul(&one_minus_tau));
    let beta = one.sub(&pi.div(&HpReal::from_u64(4, w))).mul(&alpha);

    for (name, v) in [
        ("tau", &tau),
        ("delta_hat", &delta_hat),
        ("c_F", &c_f),
        ("alpha", &alpha),
    ] {
        if !v.is_positive() {
            return Err(Error::RootIsolation(format!(
                "{name} is not positive for {params}"
            )));
        }
    }
    if tau >= one {
        return Err(Error::RootIsolation(format!("tau >= 1 for {params}")));
    }

    Ok(AsymptoticConstants {
        params: *params,
        target_digits,
        working_digits: w,
        rho,
        rho_bracket: rho_cert.bracket,
        tau,
        s_rho,
        delta_hat,
        c_f,
        c,
        alpha,
        beta,
    })
}

/// JSON form of [`AsymptoticConstants`]; decimals are strings rounded to
/// `digits` places after the point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstantsDocument {
    pub r: usize,
    pub lambda: usize,
    pub digits: u32,
    pub rho: String,
    pub tau: String,
    pub delta_hat: String,
    #[serde(rename = "c_F")]
    pub c_f: String,
    pub c: String,
    pub alpha: String,
    pub beta: String,
}

impl AsymptoticConstants {
    pub fn to_document(&self) -> ConstantsDocument {
        let d = self.target_digits;
        ConstantsDocument {
            r: self.params.r,
            lambda: self.params.lambda,
            digits: d,
            rho: self.rho.to_fixed_string(d),
            tau: self.tau.to_fixed_string(d),
            delta_hat: self.delta_hat.to_fixed_string(d),
            c_f: self.c_f.to_fixed_string(d),
            c: self.c.to_fixed_string(d),
            alpha: self.alpha.to_fixed_string(d),
            beta: self.beta.to_fixed_string(d),
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("constants serialize")
    }

    fn hp_int(&self, v: &BigUint) -> HpReal {
        HpReal::from_bigint(&BigInt::from(v.clone()), self.working_digits)
    }

    /// `c * S(rho)^2`, the total mass of the longest-rainbow limit law.
    pub fn limit_mass(&self) -> HpReal {
        self.c.mul(&self.s_rho).mul(&self.s_rho)
    }

    /// `lim P(n - Y_n = k) = c b_k rho^(k-1)`.
    pub fn limit_longest_pmf(&self, table: &CountTable, k: usize) -> Result<HpReal> {
        self.check_table(table)?;
        let b = table.b_k(k)?;
        Ok(self
            .c
            .mul(&self.hp_int(b))
            .mul(&self.rho.powi(k as u64 - 1)))
    }

    /// Limit pmf for `k = 1..=kmax`, indexed by `k`.
    pub fn limit_longest_distribution(
        &self,
        table: &CountTable,
        kmax: usize,
    ) -> Result<LimitDistribution> {
        self.check_table(table)?;
        if kmax == 0 {
            return Err(Error::InvalidArgument("kmax must be >= 1".into()));
        }
        table.b_k(kmax)?;
        let mut dist = LimitDistribution::new(DistKind::Limit);
        let mut pow = HpReal::one(self.working_digits);
        let b = table.b_coefficients();
        for (k, bk) in b.iter().enumerate().take(kmax + 1).skip(1) {
            dist.outcomes
                .insert(k, self.c.mul(&self.hp_int(bk)).mul(&pow));
            pow = pow.mul(&self.rho);
        }
        Ok(dist)
    }

    /// `lim P(Y_n >= n - t) = sum_{k <= t} c b_k rho^(k-1)`.
    pub fn limit_longest_cdf(&self, table: &CountTable, t: usize) -> Result<HpReal> {
        Ok(self.limit_longest_cdf_many(table, &[t])?.pop().unwrap())
    }

    /// Partial sums at several cut-offs in one pass.
    pub fn limit_longest_cdf_many(&self, table: &CountTable, ts: &[usize]) -> Result<Vec<HpReal>> {
        if ts.contains(&0) {
            return Err(Error::InvalidArgument("cut-off t must be >= 1".into()));
        }
        let tmax = ts.iter().copied().max().unwrap_or(1);
        let pmf = self.limit_longest_distribution(table, tmax)?;
        let mut partial = Vec::with_capacity(tmax + 1);
        let mut acc = HpReal::zero(self.working_digits);
        partial.push(acc.clone());
        for (_, p) in pmf.iter() {
            acc = acc.add(p);
            partial.push(acc.clone());
        }
        Ok(ts.iter().map(|&t| partial[t].clone()).collect())
    }

    fn check_table(&self, table: &CountTable) -> Result<()> {
        if table.params() != self.params {
            return Err(Error::InvalidArgument(format!(
                "table is for {} but constants are for {}",
                table.params(),
                self.params
            )));
        }
        Ok(())
    }

    /// `f(k+1) rho^(k+1)`.
    fn marked_weight(&self, f_k1: &BigUint, k: usize) -> HpReal {
        self.hp_int(f_k1).mul(&self.rho.powi(k as u64 + 1))
    }

    /// Parameter `t` of the negative binomial limit `NB(2, t)` of the number
    /// of rainbows of length `k`.
    pub fn nb_parameter(&self, f_k1: &BigUint, k: usize) -> Result<HpReal> {
        if k == 0 {
            return Err(Error::InvalidArgument(
                "rainbow length k must be >= 1".into(),
            ));
        }
        let w = self.marked_weight(f_k1, k);
        let one = HpReal::one(self.working_digits);
        Ok(w.div(&one.sub(&self.tau).add(&w)))
    }

    /// Limiting mean and variance of the number of rainbows of length `k`.
    pub fn expected_rainbows_k(&self, f_k1: &BigUint, k: usize) -> Result<(HpReal, HpReal)> {
        if k == 0 {
            return Err(Error::InvalidArgument(
                "rainbow length k must be >= 1".into(),
            ));
        }
        let w = self.marked_weight(f_k1, k);
        let wd = self.working_digits;
        let one = HpReal::one(wd);
        let two = HpReal::from_u64(2, wd);
        let omt = one.sub(&self.tau);
        let mean = two.mul(&w).div(&omt);
        let var = two.mul(&w).mul(&omt.add(&w)).div(&omt.mul(&omt));
        Ok((mean, var))
    }

    /// Leading-order approximations `(n - alpha sqrt(n), beta n^(3/2))` to
    /// the mean and variance of the longest rainbow.
    pub fn leading_moments(&self, n: usize) -> Result<(HpReal, HpReal)> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be >= 1".into()));
        }
        let nn = HpReal::from_u64(n as u64, self.working_digits);
        let sqrt_n = nn.sqrt();
        let mean = nn.sub(&self.alpha.mul(&sqrt_n));
        let var = self.beta.mul(&nn).mul(&sqrt_n);
        Ok((mean, var))
    }

    /// `f(n) n^(3/2) rho^n / c_F`, which tends to 1 at rate `O(1/n)`.
    pub fn coefficient_asymptotics_check(&self, table: &CountTable, n: usize) -> Result<HpReal> {
        self.check_table(table)?;
        if n == 0 {
            return Err(Error::InvalidArgument("n must be >= 1".into()));
        }
        let f = table.count_irreducible(n)?;
        let nn = HpReal::from_u64(n as u64, self.working_digits);
        Ok(self
            .hp_int(f)
            .mul(&nn)
            .mul(&nn.sqrt())
            .mul(&self.rho.powi(n as u64))
            .div(&self.c_f))
    }
}

/// `(b + 1) t^b (1 - t)^2`.
pub fn nb_limit_pmf(t: &HpReal, b: usize) -> HpReal {
    let prec = t.precision();
    let one = HpReal::one(prec);
    let omt = one.sub(t);
    HpReal::from_u64(b as u64 + 1, prec)
        .mul(&t.powi(b as u64))
        .mul(&omt)
        .mul(&omt)
}

pub fn nb_limit_distribution(t: &HpReal, bmax: usize) -> LimitDistribution {
    let mut dist = LimitDistribution::new(DistKind::Limit);
    for b in 0..=bmax {
        dist.outcomes.insert(b, nb_limit_pmf(t, b));
    }
    dist
}

/// Default output precision for constants.
pub const DEFAULT_DIGITS: u32 = DEFAULT_TARGET_DIGITS;

#[cfg(test)]
mod tests {
    use super::*;

    fn hp(s: &str) -> HpReal {
        HpReal::parse(s, 80).unwrap()
    }

    fn close(a: &HpReal, b: &HpReal, tol: &str) -> bool {
        a.sub(b).abs() <= hp(tol)
    }

    fn consts(r: usize, lambda: usize) -> AsymptoticConstants {
        singular_constants(&Params::new(r, lambda).unwrap(), 30).unwrap()
    }

    #[test]
    fn rho_motzkin_is_one_third() {
        let rho = find_rho(&Params::new(1, 1).unwrap(), 50).unwrap();
        let third = HpReal::one(50).div(&HpReal::from_u64(3, 50));
        assert!(close(&rho.value, &third, "1e-48"));
        let third = BigRational::new(1.into(), 3.into());
        assert!(rho.bracket.lo <= third && third <= rho.bracket.hi);
    }

    #[test]
    fn rho_lambda2_golden() {
        // (3 - sqrt 5) / 2
        let rho = find_rho(&Params::new(1, 2).unwrap(), 40).unwrap();
        let expect = HpReal::from_u64(3, 60)
            .sub(&HpReal::from_u64(5, 60).sqrt())
            .div(&HpReal::from_u64(2, 60));
        assert!(close(&rho.value, &expect, "1e-38"));
    }

    #[test]
    fn rho_is_a_root() {
        for r in 1..=4 {
            for lambda in 1..=4 {
                let p = Params::new(r, lambda).unwrap();
                let rho = find_rho(&p, 40).unwrap();
                let d = discriminant(&p);
                let v = d.eval_rational(&rho.value.to_rational()).abs();
                assert!(v < BigRational::new(1.into(), BigInt::from(10).pow(38)));
                // no earlier root
                let st = crate::poly::SturmSequence::new(&d);
                assert_eq!(st.count_roots(&BigRational::zero(), &rho.bracket.lo), 0);
            }
        }
    }

    #[test]
    fn rejects_zero_digits() {
        assert!(find_rho(&Params::new(1, 1).unwrap(), 0).is_err());
    }

    #[test]
    fn motzkin_constants() {
        let k = consts(1, 1);
        assert!(close(
            &k.c,
            &HpReal::one(80).div(&HpReal::from_u64(9, 80)),
            "1e-60"
        ));
        assert!(close(
            &k.tau,
            &HpReal::from_u64(2, 80).div(&HpReal::from_u64(3, 80)),
            "1e-60"
        ));
        assert!(close(&k.delta_hat, &HpReal::one(80), "1e-60"));
        // alpha = 2 sqrt(3) / sqrt(pi)
        let pi = HpReal::pi(80);
        let alpha = HpReal::from_u64(12, 80).sqrt().div(&pi.sqrt());
        assert!(close(&k.alpha, &alpha, "1e-60"));
        assert_eq!(k.alpha.to_fixed_string(5), "1.95441");
    }

    #[test]
    fn r2_lambda4_constants() {
        let k = consts(2, 4);
        assert_eq!(k.rho.to_fixed_string(6), "0.540857");
        assert_eq!(k.c.to_fixed_string(6), "0.107902");
    }

    #[test]
    fn structural_invariants() {
        for (r, lambda) in [(1, 1), (1, 2), (2, 4), (3, 3), (4, 4)] {
            let k = consts(r, lambda);
            assert!(k.rho.is_positive() && k.rho < HpReal::one(30));
            assert!(k.tau.is_positive() && k.tau < HpReal::one(30));
            assert!(close(&k.limit_mass(), &HpReal::one(200), "1e-150"));
            // beta / alpha = 1 - pi/4
            let ratio = k.beta.div(&k.alpha);
            let expect = HpReal::one(200).sub(&HpReal::pi(200).div(&HpReal::from_u64(4, 200)));
            assert!(close(&ratio, &expect, "1e-150"));
        }
    }

    #[test]
    fn limit_pmf_examples() {
        let k = consts(1, 1);
        let t = CountTable::build(Params::new(1, 1).unwrap(), 10).unwrap();
        let p1 = k.limit_longest_pmf(&t, 1).unwrap();
        let p2 = k.limit_longest_pmf(&t, 2).unwrap();
        assert!(close(
            &p1,
            &HpReal::one(80).div(&HpReal::from_u64(9, 80)),
            "1e-60"
        ));
        assert!(close(
            &p2,
            &HpReal::from_u64(2, 80).div(&HpReal::from_u64(27, 80)),
            "1e-60"
        ));
        let dist = k.limit_longest_distribution(&t, 10).unwrap();
        assert!(close(dist.outcomes.get(&2).unwrap(), &p2, "1e-150"));
        assert!(k.limit_longest_pmf(&t, 0).is_err());
        assert!(k.limit_longest_pmf(&t, 11).is_err());
        let other = CountTable::build(Params::new(1, 2).unwrap(), 10).unwrap();
        assert!(k.limit_longest_pmf(&other, 1).is_err());
    }

    #[test]
    fn cdf_is_increasing_and_bounded() {
        let k = consts(1, 2);
        let t = CountTable::build(Params::new(1, 2).unwrap(), 200).unwrap();
        let ts: Vec<usize> = (1..=200).collect();
        let cdf = k.limit_longest_cdf_many(&t, &ts).unwrap();
        for w in cdf.windows(2) {
            assert!(w[1] > w[0]);
        }
        assert!(cdf.last().unwrap() < &HpReal::one(30));
        assert!(k.limit_longest_cdf(&t, 0).is_err());
    }

    #[test]
    fn nb_examples() {
        let k = consts(1, 1);
        let one = BigUint::from(1u32);
        let t = k.nb_parameter(&one, 2).unwrap();
        assert!(close(&t, &hp("0.1"), "1e-60"));
        assert!(close(&nb_limit_pmf(&t, 0), &hp("0.81"), "1e-60"));
        assert!(close(&nb_limit_pmf(&t, 1), &hp("0.162"), "1e-60"));
        let (mean, var) = k.expected_rainbows_k(&one, 2).unwrap();
        assert!(close(
            &mean,
            &HpReal::from_u64(2, 80).div(&HpReal::from_u64(9, 80)),
            "1e-60"
        ));
        // NB(2, t): mean 2t/(1-t), variance 2t/(1-t)^2
        let omt = HpReal::one(200).sub(&t);
        let two_t = t.mul(&HpReal::from_u64(2, 200));
        assert!(close(&mean, &two_t.div(&omt), "1e-150"));
        assert!(close(&var, &two_t.div(&omt.mul(&omt)), "1e-150"));

        let zero = BigUint::from(0u32);
        let t0 = k.nb_parameter(&zero, 5).unwrap();
        assert!(t0.is_zero());
        assert!(close(&nb_limit_pmf(&t0, 0), &HpReal::one(30), "1e-60"));
        let (m0, v0) = k.expected_rainbows_k(&zero, 5).unwrap();
        assert!(m0.is_zero() && v0.is_zero());
        assert!(k.nb_parameter(&one, 0).is_err());
    }

    #[test]
    fn nb_normalization() {
        let t = hp("0.37");
        let dist = nb_limit_distribution(&t, 400);
        assert!(close(&dist.total().unwrap(), &HpReal::one(80), "1e-60"));
    }

    #[test]
    fn leading_moments_example() {
        let k = consts(1, 1);
        let (mean, _) = k.leading_moments(400).unwrap();
        assert_eq!(mean.to_fixed_string(2), "360.91");
        assert!(k.leading_moments(0).is_err());
    }

    #[test]
    fn constants_json() {
        let k = consts(1, 1);
        let doc = k.to_document();
        assert!(doc.rho.starts_with("0.333333333333"));
        assert!(doc.c.starts_with("0.111111111111"));
        let v: serde_json::Value = serde_json::from_str(&k.to_json_pretty()).unwrap();
        for key in [
            "r",
            "lambda",
            "digits",
            "rho",
            "tau",
            "delta_hat",
            "c_F",
            "c",
            "alpha",
            "beta",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }
}
