//! Integer polynomials and exact real-root isolation.
//!
//! Everything here is exact: evaluation at rationals uses big integers,
//! root counting uses a Sturm sequence over the rationals, and isolation is
//! plain bisection on exact signs.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::params::Params;

/// Dense polynomial with integer coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        let mut p = IntPoly { coeffs };
        p.trim();
        p
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        IntPoly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        let len = self.coeffs.len().max(other.coeffs.len());
        IntPoly::new((0..len).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &IntPoly) -> IntPoly {
        let len = self.coeffs.len().max(other.coeffs.len());
        IntPoly::new((0..len).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() || other.is_zero() {
            return IntPoly::new(vec![]);
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }

    pub fn scale(&self, k: i64) -> IntPoly {
        IntPoly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Multiply by `x^shift`.
    pub fn shift(&self, shift: usize) -> IntPoly {
        if self.is_zero() {
            return self.clone();
        }
        let mut out = vec![BigInt::zero(); shift];
        out.extend(self.coeffs.iter().cloned());
        IntPoly::new(out)
    }

    pub fn derivative(&self) -> IntPoly {
        IntPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        // Horner over a common denominator: p(a/b) * b^d = sum c_i a^i b^(d-i)
        if self.is_zero() {
            return BigRational::zero();
        }
        let (num, den) = (x.numer(), x.denom());
        let mut acc = BigInt::zero();
        let mut den_pow = BigInt::one();
        for c in self.coeffs.iter().rev() {
            acc = acc * num + c * &den_pow;
            den_pow *= den;
        }
        // den_pow is now den^(d+1)
        BigRational::new(acc, den_pow / den)
    }

    pub fn sign_at(&self, x: &BigRational) -> Ordering {
        let v = self.eval_rational(x);
        v.numer().sign_cmp()
    }

    /// Upper bound on `sup |p''(x)|` over `[0, 1]`.
    pub fn second_derivative_bound_unit(&self) -> BigInt {
        self.coeffs
            .iter()
            .enumerate()
            .skip(2)
            .map(|(i, c)| c.abs() * BigInt::from(i * (i - 1)))
            .sum()
    }
}

trait SignCmp {
    fn sign_cmp(&self) -> Ordering;
}

impl SignCmp for BigInt {
    fn sign_cmp(&self) -> Ordering {
        if self.is_positive() {
            Ordering::Greater
        } else if self.is_negative() {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
}

/// `A(x) = 1 - x^2 + x^(2r)`.
pub fn poly_a(params: &Params) -> IntPoly {
    let one = IntPoly::from_i64(&[1]);
    one.sub(&IntPoly::from_i64(&[1]).shift(2))
        .add(&IntPoly::from_i64(&[1]).shift(2 * params.r))
}

/// `B(x) = (1 - x) A(x) + x^(2r) (1 + x + ... + x^(lambda-2))`.
pub fn poly_b(params: &Params) -> IntPoly {
    let a = poly_a(params);
    let head = IntPoly::from_i64(&[1, -1]).mul(&a);
    let tail: Vec<i64> = vec![1; params.lambda.saturating_sub(1)];
    head.add(&IntPoly::from_i64(&tail).shift(2 * params.r))
}

/// Discriminant `D(x) = B(x)^2 - 4 x^(2r) A(x)` of the quadratic satisfied by the
/// structure generating function.
pub fn discriminant(params: &Params) -> IntPoly {
    let a = poly_a(params);
    let b = poly_b(params);
    b.mul(&b).sub(&a.shift(2 * params.r).scale(4))
}

#[derive(Debug, Clone)]
struct RatPoly {
    coeffs: Vec<BigRational>,
}

impl RatPoly {
    fn from_int(p: &IntPoly) -> Self {
        RatPoly {
            coeffs: p
                .coeffs
                .iter()
                .map(|c| BigRational::from_integer(c.clone()))
                .collect(),
        }
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn rem(&self, divisor: &RatPoly) -> RatPoly {
        let mut r = self.coeffs.clone();
        let dd = divisor.degree();
        let lead = divisor.coeffs.last().expect("nonzero divisor");
        while r.len() > dd && !r.is_empty() {
            let shift = r.len() - 1 - dd;
            let q = r.last().unwrap() / lead;
            for (i, c) in divisor.coeffs.iter().enumerate() {
                r[i + shift] = &r[i + shift] - &q * c;
            }
            r.pop();
            while r.last().is_some_and(|c| c.is_zero()) {
                r.pop();
            }
        }
        let mut out = RatPoly { coeffs: r };
        out.trim();
        out
    }

    fn neg(&self) -> RatPoly {
        RatPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    fn sign_at(&self, x: &BigRational) -> Ordering {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc.cmp(&BigRational::zero())
    }
}

/// Sturm chain of a polynomial; counts distinct real roots in half-open
/// intervals `(a, b]`.
#[derive(Debug, Clone)]
pub struct SturmSequence {
    chain: Vec<RatPoly>,
}

impl SturmSequence {
    pub fn new(p: &IntPoly) -> Self {
        let mut chain = vec![RatPoly::from_int(p), RatPoly::from_int(&p.derivative())];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            let r = chain[n - 2].rem(&chain[n - 1]).neg();
            if r.is_zero() {
                break;
            }
            chain.push(r);
        }
        SturmSequence { chain }
    }

    fn variations(&self, x: &BigRational) -> usize {
        let signs: Vec<Ordering> = self
            .chain
            .iter()
            .map(|p| p.sign_at(x))
            .filter(|s| *s != Ordering::Equal)
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Number of distinct real roots in `(a, b]`.
    pub fn count_roots(&self, a: &BigRational, b: &BigRational) -> usize {
        self.variations(a).saturating_sub(self.variations(b))
    }
}

/// Rational bracket `[lo, hi]` around an isolated real root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootBracket {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RootBracket {
    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigInt::from(2)
    }
}

/// Locate the smallest root of `p` in `(0, 1)` to a bracket of width at most
/// `2^-bits`, using exact Sturm counts to find the first root and exact sign
/// bisection to refine it.
///
/// Returns `None` when `p` has no root in `(0, 1)`.
pub fn smallest_root_in_unit_interval(p: &IntPoly, bits: u64) -> Option<RootBracket> {
    let sturm = SturmSequence::new(p);
    let zero = BigRational::zero();
    let one = BigRational::one();
    // Endpoint 1 is excluded from the search interval.
    let roots_open =
        sturm.count_roots(&zero, &one) - usize::from(p.sign_at(&one) == Ordering::Equal);
    if roots_open == 0 {
        return None;
    }

    // Shrink (0, hi] until it holds exactly one root and lo..hi is narrow
    // enough that the root is isolated from its neighbours.
    let mut lo = zero;
    let mut hi = one;
    let two = BigInt::from(2);
    let target = BigRational::new(BigInt::one(), BigInt::one() << bits);
    loop {
        if &hi - &lo <= target {
            break;
        }
        let mid = (&lo + &hi) / &two;
        if sturm.count_roots(&lo, &mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        // Once the bracket isolates a sign change, switch to cheap sign
        // bisection.
        if sturm.count_roots(&lo, &hi) == 1 {
            let slo = p.sign_at(&lo);
            let shi = p.sign_at(&hi);
            if slo != Ordering::Equal && shi != Ordering::Equal && slo != shi {
                return Some(bisect_sign_change(p, lo, hi, &target));
            }
            if shi == Ordering::Equal && sturm.count_roots(&lo, &hi) == 1 {
                return Some(RootBracket { lo: hi.clone(), hi });
            }
        }
    }
    Some(RootBracket { lo, hi })
}

fn bisect_sign_change(
    p: &IntPoly,
    mut lo: BigRational,
    mut hi: BigRational,
    target: &BigRational,
) -> RootBracket {
    let two = BigInt::from(2);
    let slo = p.sign_at(&lo);
    while &hi - &lo > *target {
        let mid = (&lo + &hi) / &two;
        match p.sign_at(&mid) {
            Ordering::Equal => {
                return RootBracket {
                    lo: mid.clone(),
                    hi: mid,
                };
            }
            s if s == slo => lo = mid,
            _ => hi = mid,
        }
    }
    RootBracket { lo, hi }
}

/// Integer floor of `num / den` for a rational with positive denominator.
pub(crate) fn floor_rational(x: &BigRational) -> BigInt {
    x.numer().div_floor(x.denom())
}
