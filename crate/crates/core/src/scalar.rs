//! Numeric backends for weights, coordinates and relevance scores.
//!
//! Everything in the crate is generic over [`Scalar`]. Exact rationals
//! (`BigRational`, `Ratio<i64>`) reproduce hand-computed fractions such as
//! `2/9` with no rounding; `f64`/`f32` trade exactness for speed and are
//! compared with an absolute tolerance.

use std::fmt::Debug;
use std::iter::Sum;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{Num, ToPrimitive, Zero};

/// Arithmetic the grid, relevance calculus and miner need from a weight type.
pub trait Scalar: Num + Clone + Debug + PartialOrd + Sum + Send + Sync + 'static {
    /// `true` when arithmetic is exact and equality is meaningful.
    const EXACT: bool;

    /// `numer / denom`. Panics if `denom == 0`.
    fn from_ratio(numer: i64, denom: i64) -> Self;

    /// Parses `"n/d"`, an integer, or a decimal (optionally with exponent).
    fn parse_weight(text: &str) -> Option<Self>;

    /// Canonical text form: `"n/d"` (or `"n"`) for rationals, shortest
    /// round-trip decimal for floats.
    fn render(&self) -> String;

    fn to_f64(&self) -> f64;

    /// `floor(self)` as an index; `None` when negative or not representable.
    fn floor_index(&self) -> Option<usize>;

    /// `ceil(self)` as an index; `None` when negative or not representable.
    fn ceil_index(&self) -> Option<usize>;

    fn from_usize(n: usize) -> Self {
        Self::from_ratio(n as i64, 1)
    }

    /// Equality for exact backends, `|a - b| <= tol` for floating ones.
    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if Self::EXACT {
            self == other
        } else {
            (self.to_f64() - other.to_f64()).abs() <= tol
        }
    }
}

pub(crate) fn max_of<S: PartialOrd>(a: S, b: S) -> S {
    if b > a {
        b
    } else {
        a
    }
}

pub(crate) fn min_of<S: PartialOrd>(a: S, b: S) -> S {
    if b < a {
        b
    } else {
        a
    }
}

/// Total order for scores; incomparable values (NaN) sort as equal.
pub(crate) fn cmp_scores<S: PartialOrd>(a: &S, b: &S) -> std::cmp::Ordering {
    a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal)
}

/// Splits decimal text into `(mantissa digits as integer, power of ten)`,
/// i.e. `"-1.25e2"` -> `(-125, 0)`, `"0.5"` -> `(5, -1)`.
fn decimal_parts(text: &str) -> Option<(BigInt, i32)> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = BigInt::parse_bytes(digits.as_bytes(), 10)?;
    if negative {
        value = -value;
    }
    Some((value, exp - frac_part.len() as i32))
}

fn parse_big_rational(text: &str) -> Option<BigRational> {
    if let Some((n, d)) = text.split_once('/') {
        let numer = BigInt::parse_bytes(n.trim().as_bytes(), 10)?;
        let denom = BigInt::parse_bytes(d.trim().as_bytes(), 10)?;
        if denom.is_zero() {
            return None;
        }
        return Some(BigRational::new(numer, denom));
    }
    let (mantissa, exp) = decimal_parts(text)?;
    let ten = BigInt::from(10u32);
    let scale = num_traits::pow(ten, exp.unsigned_abs() as usize);
    Some(if exp >= 0 {
        BigRational::from_integer(mantissa * scale)
    } else {
        BigRational::new(mantissa, scale)
    })
}

fn ratio_floor_index<T>(r: &Ratio<T>) -> Option<usize>
where
    T: Clone + Integer + ToPrimitive,
{
    r.floor().to_integer().to_usize()
}

fn ratio_ceil_index<T>(r: &Ratio<T>) -> Option<usize>
where
    T: Clone + Integer + ToPrimitive,
{
    r.ceil().to_integer().to_usize()
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_ratio(numer: i64, denom: i64) -> Self {
        BigRational::new(BigInt::from(numer), BigInt::from(denom))
    }

    fn parse_weight(text: &str) -> Option<Self> {
        parse_big_rational(text)
    }

    fn render(&self) -> String {
        self.to_string()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn floor_index(&self) -> Option<usize> {
        ratio_floor_index(self)
    }

    fn ceil_index(&self) -> Option<usize> {
        ratio_ceil_index(self)
    }
}

impl Scalar for Ratio<i64> {
    const EXACT: bool = true;

    fn from_ratio(numer: i64, denom: i64) -> Self {
        Ratio::new(numer, denom)
    }

    fn parse_weight(text: &str) -> Option<Self> {
        let big = parse_big_rational(text)?;
        Some(Ratio::new(big.numer().to_i64()?, big.denom().to_i64()?))
    }

    fn render(&self) -> String {
        self.to_string()
    }

    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }

    fn floor_index(&self) -> Option<usize> {
        ratio_floor_index(self)
    }

    fn ceil_index(&self) -> Option<usize> {
        ratio_ceil_index(self)
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn from_ratio(numer: i64, denom: i64) -> Self {
                assert!(denom != 0, "zero denominator");
                (numer as f64 / denom as f64) as $t
            }

            fn parse_weight(text: &str) -> Option<Self> {
                if let Some((n, d)) = text.split_once('/') {
                    let n: f64 = n.trim().parse().ok()?;
                    let d: f64 = d.trim().parse().ok()?;
                    if d == 0.0 {
                        return None;
                    }
                    return Some((n / d) as $t);
                }
                text.trim().parse::<$t>().ok().filter(|v| v.is_finite())
            }

            fn render(&self) -> String {
                format!("{}", self)
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn floor_index(&self) -> Option<usize> {
                let f = self.floor();
                (f >= 0.0 && f.is_finite()).then(|| f as usize)
            }

            fn ceil_index(&self) -> Option<usize> {
                let c = self.ceil();
                (c >= 0.0 && c.is_finite()).then(|| c as usize)
            }
        }
    };
}

float_scalar!(f64);
float_scalar!(f32);

/// `true` when `value` is strictly positive.
pub(crate) fn is_positive<S: Scalar>(value: &S) -> bool {
    *value > S::zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals_exactly() {
        let r = BigRational::parse_weight("2/9").unwrap();
        assert_eq!(r, BigRational::from_ratio(2, 9));
        assert_eq!(
            BigRational::parse_weight("0.25").unwrap(),
            BigRational::from_ratio(1, 4)
        );
        assert_eq!(
            BigRational::parse_weight("-1.5e2").unwrap(),
            BigRational::from_ratio(-150, 1)
        );
        assert_eq!(
            BigRational::parse_weight("12.5E-1").unwrap(),
            BigRational::from_ratio(5, 4)
        );
        assert_eq!(Ratio::<i64>::parse_weight("0.47").unwrap(), Ratio::new(47, 100));
        assert!(BigRational::parse_weight("1/0").is_none());
        assert!(BigRational::parse_weight("abc").is_none());
        assert!(BigRational::parse_weight(".").is_none());
    }

    #[test]
    fn renders_canonical_fractions() {
        assert_eq!(BigRational::from_ratio(4, 18).render(), "2/9");
        assert_eq!(BigRational::from_ratio(3, 3).render(), "1");
        assert_eq!(0.25f64.render(), "0.25");
    }

    #[test]
    fn floor_and_ceil_indices() {
        let x = BigRational::from_ratio(3, 2);
        assert_eq!(x.floor_index(), Some(1));
        assert_eq!(x.ceil_index(), Some(2));
        assert_eq!(BigRational::from_ratio(-1, 2).floor_index(), None);
        assert_eq!(1.5f64.floor_index(), Some(1));
        assert_eq!(2.0f64.ceil_index(), Some(2));
    }

    #[test]
    fn float_tolerance_equality() {
        assert!((0.1f64 + 0.2).approx_eq(&0.3, 1e-9));
        assert!(!BigRational::from_ratio(1, 3).approx_eq(&BigRational::from_ratio(1, 2), 1.0));
    }
}
