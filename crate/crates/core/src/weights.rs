//! Exact rationals and Laurent polynomials in `q`.
//!
//! Every probability the crate compares is a [`Rational`]; prior weights are
//! entered as [`LaurentWeight`] expressions and evaluated at the channel's
//! likelihood ratio `q = (1 - p) / p`.

use std::collections::BTreeMap;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Arbitrary-precision rational number, always kept in lowest terms with a
/// positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    /// Builds `numer / denom`. Panics if `denom == 0`.
    pub fn new(numer: i64, denom: i64) -> Self {
        Rational(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_integer(value: i64) -> Self {
        Rational(BigRational::from_integer(value.into()))
    }

    pub fn from_big(numer: BigInt, denom: BigInt) -> Self {
        Rational(BigRational::new(numer, denom))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        Rational(self.0.recip())
    }

    /// Integer power; negative exponents invert. Panics on `0^e` with `e < 0`.
    pub fn pow(&self, exp: i32) -> Self {
        if exp < 0 {
            assert!(!self.is_zero(), "zero raised to a negative power");
        }
        Rational(num_traits::Pow::pow(&self.0, exp))
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    /// Nearest `f64`; only for reporting and sampling, never for comparisons.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }
}

impl From<BigRational> for Rational {
    fn from(value: BigRational) -> Self {
        Rational(value)
    }
}

impl From<i64> for Rational {
    fn from(value: i64) -> Self {
        Rational::from_integer(value)
    }
}

impl From<u64> for Rational {
    fn from(value: u64) -> Self {
        Rational(BigRational::from_integer(value.into()))
    }
}

impl From<usize> for Rational {
    fn from(value: usize) -> Self {
        Rational(BigRational::from_integer(value.into()))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Error returned when a rational literal such as `"3/7"` cannot be parsed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational {text:?}: {reason}")]
pub struct ParseRationalError {
    pub text: String,
    pub reason: &'static str,
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let fail = |reason| ParseRationalError {
            text: s.to_string(),
            reason,
        };
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(fail("empty input"));
        }
        let (num, den) = match compact.split_once('/') {
            Some((n, d)) => (n, Some(d)),
            None => (compact.as_str(), None),
        };
        let numer = parse_signed_digits(num).ok_or_else(|| fail("numerator is not an integer"))?;
        let denom = match den {
            None => BigInt::one(),
            Some(d) => {
                if !d.bytes().all(|b| b.is_ascii_digit()) || d.is_empty() {
                    return Err(fail("denominator is not a positive integer"));
                }
                let d: BigInt = d.parse().map_err(|_| fail("denominator is not an integer"))?;
                if d.is_zero() {
                    return Err(fail("zero denominator"));
                }
                d
            }
        };
        Ok(Rational(BigRational::new(numer, denom)))
    }
}

fn parse_signed_digits(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.trim_start_matches('+').parse().ok()
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($Trait:ident, $method:ident, $op:tt) => {
        impl $Trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0 $op rhs.0)
            }
        }
        impl $Trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(self.0 $op &rhs.0)
            }
        }
        impl $Trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(&self.0 $op rhs.0)
            }
        }
        impl $Trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(&self.0 $op &rhs.0)
            }
        }
    };
}

forward_binop!(Add, add, +);
forward_binop!(Sub, sub, -);
forward_binop!(Mul, mul, *);
forward_binop!(Div, div, /);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        self.0 *= &rhs.0;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl Product for Rational {
    fn product<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::one(), |acc, x| acc * x)
    }
}

/// A Laurent polynomial `sum_e c_e * q^e` with rational coefficients.
///
/// Zero coefficients are never stored, so two weights are equal exactly when
/// their term maps are equal.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct LaurentWeight {
    terms: BTreeMap<i32, Rational>,
}

impl LaurentWeight {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(c, 0)
    }

    /// `c * q^exp`.
    pub fn monomial(c: Rational, exp: i32) -> Self {
        let mut w = Self::zero();
        w.add_term(exp, c);
        w
    }

    /// Builds a weight from `(exponent, coefficient)` pairs, merging like terms.
    pub fn from_terms<I: IntoIterator<Item = (i32, Rational)>>(terms: I) -> Self {
        let mut w = Self::zero();
        for (e, c) in terms {
            w.add_term(e, c);
        }
        w
    }

    fn add_term(&mut self, exp: i32, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exp).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&exp);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Term map, ascending by exponent.
    pub fn terms(&self) -> &BTreeMap<i32, Rational> {
        &self.terms
    }

    pub fn coefficient(&self, exp: i32) -> Rational {
        self.terms.get(&exp).cloned().unwrap_or_else(Rational::zero)
    }

    /// `Some((c, e))` when the weight is the single term `c * q^e`.
    pub fn as_monomial(&self) -> Option<(&Rational, i32)> {
        match self.terms.len() {
            1 => self.terms.iter().next().map(|(e, c)| (c, *e)),
            _ => None,
        }
    }

    /// Exact value at `q`. Panics unless `q > 0`.
    pub fn eval(&self, q: &Rational) -> Rational {
        assert!(q.is_positive(), "weights are evaluated at q > 0 only");
        self.terms.iter().map(|(e, c)| c * q.pow(*e)).sum()
    }
}

/// Parses a weight expression; see [`LaurentWeight`]'s `FromStr` grammar.
pub fn parse_weight(text: &str) -> Result<LaurentWeight, WeightParseError> {
    text.parse()
}

/// Like [`parse_weight`] but rejects the zero polynomial, which cannot be the
/// weight of a codeword that occurs with positive probability.
pub fn parse_prior_weight(text: &str) -> Result<LaurentWeight, WeightParseError> {
    let w = parse_weight(text)?;
    if w.is_zero() {
        return Err(WeightParseError {
            position: 0,
            message: "prior weight is the zero polynomial".into(),
        });
    }
    Ok(w)
}

/// Pointer-style error for malformed weight expressions. `position` is a byte
/// offset into the original text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("weight expression error at byte {position}: {message}")]
pub struct WeightParseError {
    pub position: usize,
    pub message: String,
}

struct WeightParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> WeightParser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, WeightParseError> {
        Err(WeightParseError {
            position: self.pos,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn digits(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        (self.pos > start).then(|| std::str::from_utf8(&self.src[start..self.pos]).unwrap())
    }

    fn rational(&mut self) -> Result<Rational, WeightParseError> {
        let numer: BigInt = match self.digits() {
            Some(d) => d.parse().unwrap(),
            None => return self.err("expected a number"),
        };
        if self.peek() == Some(b'/') {
            self.pos += 1;
            let at = self.pos;
            let denom: BigInt = match self.digits() {
                Some(d) => d.parse().unwrap(),
                None => return self.err("expected a positive integer denominator"),
            };
            if denom.is_zero() {
                self.pos = at;
                return self.err("zero denominator");
            }
            return Ok(Rational::from_big(numer, denom));
        }
        Ok(Rational::from_big(numer, BigInt::one()))
    }

    fn exponent(&mut self) -> Result<i32, WeightParseError> {
        if self.peek() != Some(b'^') {
            return Ok(1);
        }
        self.pos += 1;
        let negative = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                true
            }
            Some(b'+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        let at = self.pos;
        let Some(d) = self.digits() else {
            return self.err("expected an integer exponent");
        };
        let mag: i64 = match d.parse() {
            Ok(v) if v <= i32::MAX as i64 => v,
            _ => {
                self.pos = at;
                return self.err("exponent out of range");
            }
        };
        Ok(if negative { -mag } else { mag } as i32)
    }

    fn term(&mut self) -> Result<(i32, Rational), WeightParseError> {
        match self.peek() {
            Some(b'q') => {
                self.pos += 1;
                Ok((self.exponent()?, Rational::one()))
            }
            Some(c) if c.is_ascii_digit() => {
                let coeff = self.rational()?;
                match self.peek() {
                    Some(b'*') => {
                        self.pos += 1;
                        if self.peek() != Some(b'q') {
                            return self.err("expected 'q' after '*'");
                        }
                        self.pos += 1;
                        Ok((self.exponent()?, coeff))
                    }
                    Some(b'q') => {
                        self.pos += 1;
                        Ok((self.exponent()?, coeff))
                    }
                    _ => Ok((0, coeff)),
                }
            }
            Some(_) => self.err("expected a number or 'q'"),
            None => self.err("unexpected end of expression"),
        }
    }

    fn expression(&mut self) -> Result<LaurentWeight, WeightParseError> {
        let mut out = LaurentWeight::zero();
        let mut first = true;
        loop {
            let sign = match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    1
                }
                Some(b'-') => {
                    self.pos += 1;
                    -1
                }
                None if first => return self.err("empty expression"),
                Some(_) if first => 1,
                Some(_) => return self.err("expected '+' or '-' between terms"),
                None => break,
            };
            first = false;
            let (exp, coeff) = self.term()?;
            out.add_term(exp, if sign < 0 { -coeff } else { coeff });
            if self.peek().is_none() {
                break;
            }
        }
        Ok(out)
    }
}

/// Grammar (whitespace ignored):
///
/// ```text
/// expr     := sign? term (sign term)*
/// term     := rational | rational '*'? 'q' exp? | 'q' exp?
/// exp      := '^' sign? digits
/// rational := digits ('/' digits)?
/// ```
impl FromStr for LaurentWeight {
    type Err = WeightParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        WeightParser {
            src: s.as_bytes(),
            pos: 0,
        }
        .expression()
    }
}

/// Prints in a form the parser accepts back, ascending by exponent.
impl fmt::Display for LaurentWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (idx, (e, c)) in self.terms.iter().enumerate() {
            let mag = c.abs();
            match (idx, c.is_negative()) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            match (*e, mag == Rational::one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => f.write_str("q")?,
                (e, true) => write!(f, "q^{e}")?,
                (1, false) => write!(f, "{mag}*q")?,
                (e, false) => write!(f, "{mag}*q^{e}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentWeight({self})")
    }
}

impl Add for &LaurentWeight {
    type Output = LaurentWeight;
    fn add(self, rhs: &LaurentWeight) -> LaurentWeight {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl Mul for &LaurentWeight {
    type Output = LaurentWeight;
    fn mul(self, rhs: &LaurentWeight) -> LaurentWeight {
        let mut out = LaurentWeight::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term(ea + eb, ca * cb);
            }
        }
        out
    }
}

impl Neg for &LaurentWeight {
    type Output = LaurentWeight;
    fn neg(self) -> LaurentWeight {
        LaurentWeight {
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(terms: &[(i32, i64, i64)]) -> LaurentWeight {
        LaurentWeight::from_terms(terms.iter().map(|&(e, n, d)| (e, Rational::new(n, d))))
    }

    #[test]
    fn parses_monomial() {
        assert_eq!(parse_weight("q^2").unwrap(), w(&[(2, 1, 1)]));
    }

    #[test]
    fn parses_normalizer() {
        assert_eq!(
            parse_weight("2 + q^2 + q^-2").unwrap(),
            w(&[(0, 2, 1), (2, 1, 1), (-2, 1, 1)])
        );
    }

    #[test]
    fn merges_like_terms() {
        assert_eq!(parse_weight("1/3*q^-1 + 1/3*q^-1").unwrap(), w(&[(-1, 2, 3)]));
    }

    #[test]
    fn accepts_grammar_variants() {
        assert_eq!(parse_weight(" -q + 3q^+2 ").unwrap(), w(&[(1, -1, 1), (2, 3, 1)]));
        assert_eq!(parse_weight("5/10").unwrap(), w(&[(0, 1, 2)]));
        assert_eq!(parse_weight("q - q").unwrap(), LaurentWeight::zero());
    }

    #[test]
    fn reports_error_positions() {
        let e = parse_weight("q^").unwrap_err();
        assert_eq!(e.position, 2);
        let e = parse_weight("2 + * q").unwrap_err();
        assert_eq!(e.position, 4);
        let e = parse_weight("1/0").unwrap_err();
        assert_eq!(e.position, 2);
        assert!(parse_weight("").is_err());
        assert!(parse_weight("q q").is_err());
        assert!(parse_weight("2 +").is_err());
    }

    #[test]
    fn prior_weight_rejects_zero() {
        assert!(parse_prior_weight("q - q").is_err());
        assert!(parse_prior_weight("0").is_err());
        assert!(parse_prior_weight("1/7").is_ok());
    }

    #[test]
    fn evaluates_exactly() {
        assert_eq!(w(&[(2, 1, 1)]).eval(&Rational::from(2i64)), Rational::from(4i64));
        assert_eq!(
            w(&[(0, 2, 1), (2, 1, 1), (-2, 1, 1)]).eval(&Rational::from(2i64)),
            Rational::new(25, 4)
        );
        assert_eq!(w(&[(-1, 3, 1)]).eval(&Rational::new(3, 2)), Rational::from(2i64));
    }

    #[test]
    fn display_round_trips() {
        for text in ["q^2", "2 + q^2 + q^-2", "-1/3*q^-1 + q - 7*q^5", "0", "3/4"] {
            let a = parse_weight(text).unwrap();
            let b = parse_weight(&a.to_string()).unwrap();
            assert_eq!(a, b, "{text}");
        }
    }

    #[test]
    fn rational_text_forms() {
        assert_eq!("3/6".parse::<Rational>().unwrap(), Rational::new(1, 2));
        assert_eq!("-4".parse::<Rational>().unwrap(), Rational::from(-4i64));
        assert_eq!(Rational::new(6, -4).to_string(), "-3/2");
        assert_eq!(Rational::from(7i64).to_string(), "7");
        assert!("1/0".parse::<Rational>().is_err());
        assert!("1/-2".parse::<Rational>().is_err());
        assert!("x".parse::<Rational>().is_err());
    }
}
