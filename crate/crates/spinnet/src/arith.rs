//! Exact arithmetic helpers: memoized big-integer factorials and binomials,
//! signed square roots of rationals, and exact logarithmic forms.

use std::cmp::Ordering;
use std::fmt;
use std::sync::RwLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use once_cell::sync::Lazy;

static FACTORIALS: Lazy<RwLock<Vec<BigInt>>> = Lazy::new(|| RwLock::new(vec![BigInt::one()]));

/// `n!` as a big integer. Values are memoized; the table is grown by a single
/// writer and shared by concurrent readers.
pub fn factorial(n: u32) -> BigInt {
    let n = n as usize;
    {
        let table = FACTORIALS.read().unwrap();
        if n < table.len() {
            return table[n].clone();
        }
    }
    let mut table = FACTORIALS.write().unwrap();
    while table.len() <= n {
        let next = table.last().unwrap() * BigInt::from(table.len());
        table.push(next);
    }
    table[n].clone()
}

/// Binomial coefficient `C(n, k)`; zero when `k > n`.
pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

pub fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// `(-1)^n` as a plain integer sign.
pub fn neg_one_pow(n: u32) -> i8 {
    if n % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Natural log of a positive big integer, accurate to f64 precision even when
/// the value itself overflows binary64.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 64 {
        return (x.to_u64().unwrap() as f64).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().unwrap();
    (top as f64).ln() + (shift as f64) * std::f64::consts::LN_2
}

/// Natural log of `|r|` for a nonzero rational, overflow-safe.
pub fn ln_abs_rational(r: &BigRational) -> f64 {
    ln_biguint(r.numer().magnitude()) - ln_biguint(r.denom().magnitude())
}

/// Overflow-safe conversion of a rational to binary64.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    let ln = ln_abs_rational(r);
    if ln.abs() < 650.0 {
        // Safe range: both parts convert directly.
        sign * (r.numer().magnitude().to_f64().unwrap_or(f64::INFINITY)
            / r.denom().magnitude().to_f64().unwrap_or(f64::INFINITY))
    } else {
        sign * ln.exp()
    }
}

/// A signed square root `sign * sqrt(square)` of a nonnegative rational.
///
/// Values of the unitary and the pi-iota evaluations always have a rational
/// square, so carrying `(sign, square)` keeps every comparison exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Radical {
    sign: i8,
    square: BigRational,
}

impl Radical {
    pub fn zero() -> Self {
        Radical {
            sign: 0,
            square: BigRational::zero(),
        }
    }

    pub fn one() -> Self {
        Radical {
            sign: 1,
            square: BigRational::one(),
        }
    }

    /// `sign * sqrt(square)`; `square` must be nonnegative.
    pub fn new(sign: i8, square: BigRational) -> Self {
        assert!(!square.is_negative(), "radicand must be nonnegative");
        if square.is_zero() || sign == 0 {
            Radical::zero()
        } else {
            Radical {
                sign: sign.signum(),
                square,
            }
        }
    }

    /// The radical equal to the rational `r` itself.
    pub fn from_rational(r: &BigRational) -> Self {
        let sign = match r.numer().sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        };
        Radical::new(sign, r * r)
    }

    /// `sqrt(r)` for a nonnegative rational.
    pub fn sqrt(r: &BigRational) -> Self {
        Radical::new(1, r.clone())
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn square(&self) -> &BigRational {
        &self.square
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn abs(&self) -> Self {
        Radical {
            sign: self.sign.abs(),
            square: self.square.clone(),
        }
    }

    pub fn neg(&self) -> Self {
        Radical {
            sign: -self.sign,
            square: self.square.clone(),
        }
    }

    pub fn mul(&self, other: &Radical) -> Radical {
        Radical::new(self.sign * other.sign, &self.square * &other.square)
    }

    pub fn mul_rational(&self, r: &BigRational) -> Radical {
        let s = match r.numer().sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        };
        Radical::new(self.sign * s, &self.square * r * r)
    }

    /// Compare absolute values exactly (by squares).
    pub fn cmp_abs(&self, other: &Radical) -> Ordering {
        self.square.cmp(&other.square)
    }

    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            (self.sign as f64) * (0.5 * ln_abs_rational(&self.square)).exp()
        }
    }
}

impl fmt::Display for Radical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            1 => write!(f, "+sqrt({})", self.square),
            _ => write!(f, "-sqrt({})", self.square),
        }
    }
}

/// An exact sum of `coeff * ln(base)` terms with integer bases, used for
/// growth rates that must not pass through floating point until the end.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExactLog {
    terms: Vec<(BigRational, u64)>,
}

impl ExactLog {
    pub fn zero() -> Self {
        ExactLog::default()
    }

    /// Add `coeff * ln(base)`. Terms with base 0 or 1 contribute nothing
    /// (the convention 0^0 = 1 is applied upstream).
    pub fn add_term(&mut self, coeff: BigRational, base: u64) {
        if base <= 1 || coeff.is_zero() {
            return;
        }
        if let Some(t) = self.terms.iter_mut().find(|t| t.1 == base) {
            t.0 += coeff;
            return;
        }
        self.terms.push((coeff, base));
        self.terms.sort_by_key(|t| t.1);
    }

    pub fn add(&mut self, other: &ExactLog) {
        for (c, b) in &other.terms {
            self.add_term(c.clone(), *b);
        }
    }

    pub fn scale(&mut self, factor: &BigRational) {
        for t in &mut self.terms {
            t.0 *= factor;
        }
    }

    pub fn terms(&self) -> &[(BigRational, u64)] {
        &self.terms
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(c, b)| rational_to_f64(c) * (*b as f64).ln())
            .sum()
    }
}

/// Natural log of `n!` in binary64, for float-mode magnitude bookkeeping.
pub fn ln_factorial(n: u32) -> f64 {
    (2..=n as u64).map(|i| (i as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials_and_binomials() {
        assert_eq!(factorial(0), BigInt::one());
        assert_eq!(factorial(5), BigInt::from(120));
        assert_eq!(binomial(10, 3), BigInt::from(120));
        assert_eq!(binomial(3, 5), BigInt::zero());
        assert_eq!(binomial(40, 20), "137846528820".parse().unwrap());
    }

    #[test]
    fn radical_algebra() {
        let r = Radical::from_rational(&ratio(-3, 2));
        assert_eq!(r.sign(), -1);
        assert_eq!(r.square(), &ratio(9, 4));
        let s = Radical::sqrt(&big(2));
        assert_eq!(r.mul(&s).square(), &ratio(9, 2));
        assert_eq!(r.mul(&s).sign(), -1);
        assert!(Radical::zero().is_zero());
        assert_eq!(Radical::new(1, big(0)), Radical::zero());
        let almost = (Radical::sqrt(&big(2)).to_f64() - 2f64.sqrt()).abs();
        assert!(almost < 1e-14);
    }

    #[test]
    fn ln_of_huge_values() {
        let h = factorial(500);
        let exact: f64 = (2..=500u64).map(|i| (i as f64).ln()).sum();
        assert!((ln_biguint(h.magnitude()) - exact).abs() < 1e-6);
        let r = BigRational::new(factorial(300), factorial(200));
        let expect: f64 = (201..=300u64).map(|i| (i as f64).ln()).sum();
        assert!((ln_abs_rational(&r) - expect).abs() < 1e-6);
    }

    #[test]
    fn exact_log_collects_terms() {
        let mut l = ExactLog::zero();
        l.add_term(big(3), 3);
        l.add_term(ratio(1, 2), 3);
        l.add_term(big(7), 1);
        l.add_term(big(-1), 2);
        assert_eq!(l.terms().len(), 2);
        let v = l.to_f64();
        assert!((v - (3.5 * 3f64.ln() - 2f64.ln())).abs() < 1e-12);
    }
}
