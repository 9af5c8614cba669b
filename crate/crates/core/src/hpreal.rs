//! Arbitrary-precision decimal floating point on top of `num-bigint`.
//!
//! A value is `mantissa * 10^exponent` with the mantissa held at exactly
//! `precision` significant digits (zero excepted). Every operation rounds
//! half away from zero back to the smaller precision of its operands, so a
//! single operation carries a relative error below `10^(1 - precision)`.
//! The limit-law sums multiply by `rho` thousands of times; with the default
//! 200 working digits the accumulated error stays far below the 30-digit
//! output target.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub const DEFAULT_WORKING_DIGITS: u32 = 200;
pub const DEFAULT_TARGET_DIGITS: u32 = 30;

#[derive(Clone, Debug)]
pub struct HpReal {
    mantissa: BigInt,
    exponent: i64,
    precision: u32,
}

fn pow10(k: u64) -> BigInt {
    num_traits::pow(BigInt::from(10u32), k as usize)
}

fn digit_count(x: &BigInt) -> u64 {
    if x.is_zero() {
        return 0;
    }
    let bits = x.bits();
    // floor(bits * log10(2)) is either the digit count or one less
    let est = ((bits - 1) as f64 * std::f64::consts::LOG10_2).floor() as u64 + 1;
    let mag = x.abs();
    if mag >= pow10(est) {
        est + 1
    } else if est > 1 && mag < pow10(est - 1) {
        est - 1
    } else {
        est
    }
}

/// Divide rounding half away from zero.
fn div_round(num: &BigInt, den: &BigInt) -> BigInt {
    let (q, r) = num.div_rem(den);
    if (r.abs() * 2u32) >= den.abs() {
        if (num.sign() == Sign::Minus) != (den.sign() == Sign::Minus) {
            q - 1
        } else {
            q + 1
        }
    } else {
        q
    }
}

impl HpReal {
    fn normalized(mantissa: BigInt, exponent: i64, precision: u32) -> Self {
        assert!(precision >= 2, "precision must be at least 2 digits");
        if mantissa.is_zero() {
            return HpReal {
                mantissa,
                exponent: 0,
                precision,
            };
        }
        let p = precision as u64;
        let d = digit_count(&mantissa);
        let (mut m, mut e) = if d > p {
            let drop = d - p;
            (div_round(&mantissa, &pow10(drop)), exponent + drop as i64)
        } else {
            let add = p - d;
            (mantissa * pow10(add), exponent - add as i64)
        };
        if digit_count(&m) > p {
            // rounding carried into a new digit
            m /= 10u32;
            e += 1;
        }
        HpReal {
            mantissa: m,
            exponent: e,
            precision,
        }
    }

    pub fn zero(precision: u32) -> Self {
        HpReal::normalized(BigInt::zero(), 0, precision)
    }

    pub fn one(precision: u32) -> Self {
        HpReal::from_bigint(&BigInt::one(), precision)
    }

    pub fn from_bigint(x: &BigInt, precision: u32) -> Self {
        HpReal::normalized(x.clone(), 0, precision)
    }

    pub fn from_u64(x: u64, precision: u32) -> Self {
        HpReal::from_bigint(&BigInt::from(x), precision)
    }

    pub fn from_i64(x: i64, precision: u32) -> Self {
        HpReal::from_bigint(&BigInt::from(x), precision)
    }

    pub fn from_rational(x: &BigRational, precision: u32) -> Self {
        HpReal::from_bigint(x.numer(), precision + 4)
            .div(&HpReal::from_bigint(x.denom(), precision + 4))
            .with_precision(precision)
    }

    /// Parse a plain decimal literal such as `-0.125` or `3.5e-7`.
    pub fn parse(text: &str, precision: u32) -> Option<Self> {
        let text = text.trim();
        let (body, exp) = match text.find(['e', 'E']) {
            Some(pos) => (&text[..pos], text[pos + 1..].parse::<i64>().ok()?),
            None => (text, 0),
        };
        let (neg, body) = match body.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, body.strip_prefix('+').unwrap_or(body)),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        let digits = format!("{int_part}{frac_part}");
        if !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let mut m: BigInt = digits.parse().ok()?;
        if neg {
            m = -m;
        }
        Some(HpReal::normalized(
            m,
            exp - frac_part.len() as i64,
            precision,
        ))
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn with_precision(&self, precision: u32) -> Self {
        HpReal::normalized(self.mantissa.clone(), self.exponent, precision)
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.mantissa.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn abs(&self) -> Self {
        HpReal {
            mantissa: self.mantissa.abs(),
            ..self.clone()
        }
    }

    pub fn neg(&self) -> Self {
        HpReal {
            mantissa: -self.mantissa.clone(),
            ..self.clone()
        }
    }

    /// Decimal exponent of the leading digit, i.e. `floor(log10 |x|)`.
    pub fn magnitude(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.exponent + self.precision as i64 - 1)
        }
    }

    pub fn add(&self, other: &HpReal) -> HpReal {
        let prec = self.precision.min(other.precision);
        if self.is_zero() {
            return other.with_precision(prec);
        }
        if other.is_zero() {
            return self.with_precision(prec);
        }
        let (ma, mb) = (self.magnitude().unwrap(), other.magnitude().unwrap());
        let gap = (ma - mb).unsigned_abs();
        if gap > prec as u64 + 2 {
            // the smaller operand lies entirely below the rounding digit
            return if ma > mb {
                self.with_precision(prec)
            } else {
                other.with_precision(prec)
            };
        }
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa * pow10((self.exponent - e) as u64);
        let b = &other.mantissa * pow10((other.exponent - e) as u64);
        HpReal::normalized(a + b, e, prec)
    }

    pub fn sub(&self, other: &HpReal) -> HpReal {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &HpReal) -> HpReal {
        let prec = self.precision.min(other.precision);
        HpReal::normalized(
            &self.mantissa * &other.mantissa,
            self.exponent + other.exponent,
            prec,
        )
    }

    /// Panics on division by zero.
    pub fn div(&self, other: &HpReal) -> HpReal {
        assert!(!other.is_zero(), "HpReal division by zero");
        let prec = self.precision.min(other.precision);
        let guard = prec as u64 + 5 + other.precision.saturating_sub(self.precision) as u64;
        let num = &self.mantissa * pow10(guard);
        // both mantissas carry full precision so the quotient keeps >= prec+4 digits
        let q = div_round(&num, &other.mantissa);
        HpReal::normalized(q, self.exponent - other.exponent - guard as i64, prec)
    }

    pub fn mul_bigint(&self, k: &BigInt) -> HpReal {
        HpReal::normalized(&self.mantissa * k, self.exponent, self.precision)
    }

    pub fn div_bigint(&self, k: &BigInt) -> HpReal {
        self.div(&HpReal::from_bigint(k, self.precision))
    }

    /// Panics on negative input.
    pub fn sqrt(&self) -> HpReal {
        assert!(!self.is_negative(), "HpReal sqrt of a negative number");
        if self.is_zero() {
            return self.clone();
        }
        let p = self.precision as i64;
        // scale the mantissa to at least 2p+4 digits with an even exponent
        let mut shift = p + 4;
        if (self.exponent - shift).rem_euclid(2) != 0 {
            shift += 1;
        }
        let scaled = &self.mantissa * pow10(shift as u64);
        let root = scaled.sqrt();
        HpReal::normalized(root, (self.exponent - shift) / 2, self.precision)
    }

    pub fn powi(&self, mut n: u64) -> HpReal {
        let prec = self.precision;
        let mut base = self.with_precision(prec + 4);
        let mut acc = HpReal::one(prec + 4);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc.with_precision(prec)
    }

    /// `pi` by Machin's formula in fixed point with guard digits.
    pub fn pi(precision: u32) -> HpReal {
        let guard = precision as u64 + 10;
        let scale = pow10(guard);
        let atan_inv = |x: u64| -> BigInt {
            // atan(1/x) * scale
            let x = BigInt::from(x);
            let x2 = &x * &x;
            let mut term = &scale / &x;
            let mut sum = term.clone();
            let mut k = 1u64;
            while !term.is_zero() {
                term /= &x2;
                let t = &term / BigInt::from(2 * k + 1);
                if k % 2 == 1 {
                    sum -= t;
                } else {
                    sum += t;
                }
                k += 1;
            }
            sum
        };
        let pi_scaled = atan_inv(5) * 16 - atan_inv(239) * 4;
        HpReal::normalized(pi_scaled, -(guard as i64), precision)
    }

    /// Exact rational value of this decimal.
    pub fn to_rational(&self) -> BigRational {
        if self.exponent >= 0 {
            BigRational::from_integer(&self.mantissa * pow10(self.exponent as u64))
        } else {
            BigRational::new(self.mantissa.clone(), pow10(self.exponent.unsigned_abs()))
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_sci_string(17).parse().unwrap_or(f64::NAN)
    }

    /// Round to `frac_digits` digits after the decimal point.
    pub fn to_fixed_string(&self, frac_digits: u32) -> String {
        let shifted = self.exponent + frac_digits as i64;
        let int = if shifted >= 0 {
            &self.mantissa * pow10(shifted as u64)
        } else {
            div_round(&self.mantissa, &pow10(shifted.unsigned_abs()))
        };
        let neg = int.is_negative();
        let mut digits = int.abs().to_string();
        let fd = frac_digits as usize;
        if digits.len() <= fd {
            digits = format!("{}{}", "0".repeat(fd + 1 - digits.len()), digits);
        }
        let split = digits.len() - fd;
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        out.push_str(&digits[..split]);
        if fd > 0 {
            out.push('.');
            out.push_str(&digits[split..]);
        }
        out
    }

    /// Scientific notation with `sig` significant digits, e.g. `1.2345e-7`.
    pub fn to_sci_string(&self, sig: u32) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let rounded = self.with_precision(sig.max(2));
        let neg = rounded.mantissa.is_negative();
        let digits = rounded.mantissa.abs().to_string();
        let digits = &digits[..(sig.max(1) as usize).min(digits.len())];
        let exp = rounded.magnitude().unwrap();
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        out.push_str(&digits[..1]);
        if digits.len() > 1 {
            out.push('.');
            out.push_str(&digits[1..]);
        }
        out.push_str(&format!("e{exp}"));
        out
    }

    /// Fixed notation for moderate magnitudes, scientific otherwise, with
    /// `sig` significant digits.
    pub fn to_string_sig(&self, sig: u32) -> String {
        match self.magnitude() {
            None => "0".to_string(),
            Some(m) if (-8..=20).contains(&m) => {
                let frac = (sig as i64 - 1 - m).max(0) as u32;
                self.to_fixed_string(frac)
            }
            Some(_) => self.to_sci_string(sig),
        }
    }

    pub fn cmp_value(&self, other: &HpReal) -> Ordering {
        match (self.mantissa.sign(), other.mantissa.sign()) {
            (a, b) if a != b => a.cmp(&b),
            _ => self.to_rational().cmp(&other.to_rational()),
        }
    }

    pub fn to_u64_floor(&self) -> Option<u64> {
        crate::poly::floor_rational(&self.to_rational()).to_u64()
    }
}

impl PartialEq for HpReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_value(other) == Ordering::Equal
    }
}

impl PartialOrd for HpReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_value(other))
    }
}

impl fmt::Display for HpReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sig = f
            .precision()
            .map(|p| p as u32)
            .unwrap_or(self.precision.min(40));
        write!(f, "{}", self.to_string_sig(sig))
    }
}
