//! Exact rational arc weights.
//!
//! Both sweep algorithms branch on exact equality of (modified) weights, so
//! exponents are kept as reduced fractions over `i128`. Graph construction
//! bounds the common denominator and the magnitude of every weight, which keeps
//! all sums formed by the algorithms far away from overflow.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedSub, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest accepted numerator or denominator when parsing a single literal.
pub const MAX_LITERAL: i128 = 1_000_000_000_000_000_000;
/// Longest accepted fractional part.
const MAX_PLACES: u32 = 18;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseWeightError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("rational literal `{0}` is out of range")]
    OutOfRange(String),
}

/// An exact rational number used for exponents `U_ij`, critical exponents and
/// W-graph weights.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Weight(Ratio<i128>);

impl Weight {
    pub const ZERO: Weight = Weight(Ratio::new_raw(0, 1));

    pub fn new(numer: i128, denom: i128) -> Weight {
        Weight(Ratio::new(numer, denom))
    }

    pub fn integer(value: i128) -> Weight {
        Weight(Ratio::from_integer(value))
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn is_positive(&self) -> bool {
        *self.0.numer() > 0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn checked_add(&self, other: &Weight) -> Option<Weight> {
        self.0.checked_add(&other.0).map(Weight)
    }

    pub fn checked_sub(&self, other: &Weight) -> Option<Weight> {
        self.0.checked_sub(&other.0).map(Weight)
    }

    /// Midpoint of two weights (used by exact bisection).
    pub fn midpoint(&self, other: &Weight) -> Weight {
        let sum = *self + *other;
        Weight(sum.0 / Ratio::from_integer(2))
    }

    pub fn max(self, other: Weight) -> Weight {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Weight) -> Weight {
        if other < self {
            other
        } else {
            self
        }
    }

    /// The fraction with the smallest denominator in the closed interval
    /// `[lo, hi]` (Stern-Brocot descent). Both bounds must be nonnegative.
    pub fn simplest_between(lo: Weight, hi: Weight) -> Weight {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let fl = lo.0.floor();
        if fl == lo.0 || fl + Ratio::from_integer(1) <= hi.0 {
            // an integer lies in the interval
            let c = lo.0.ceil();
            return Weight(c);
        }
        // lo and hi share the integer part; recurse on reciprocals of the
        // fractional parts
        let frac_lo = lo.0 - fl;
        let frac_hi = hi.0 - fl;
        let inner = Weight::simplest_between(Weight(frac_hi.recip()), Weight(frac_lo.recip()));
        Weight(fl + inner.0.recip())
    }

    /// Exact decimal rendering when the denominator only has factors 2 and 5
    /// and the expansion is short enough to parse back.
    fn decimal_string(&self) -> Option<String> {
        let mut d = *self.0.denom();
        let (mut twos, mut fives) = (0u32, 0u32);
        while d % 2 == 0 {
            d /= 2;
            twos += 1;
        }
        while d % 5 == 0 {
            d /= 5;
            fives += 1;
        }
        if d != 1 {
            return None;
        }
        let places = twos.max(fives);
        if places > MAX_PLACES {
            return None;
        }
        let scale = 10i128.checked_pow(places)?;
        let scaled = self.0.numer().checked_mul(scale / self.0.denom())?;
        if places == 0 {
            return Some(scaled.to_string());
        }
        let negative = scaled < 0;
        let digits = scaled.unsigned_abs().to_string();
        let places = places as usize;
        let padded = if digits.len() <= places {
            format!("{}{}", "0".repeat(places + 1 - digits.len()), digits)
        } else {
            digits
        };
        let (int_part, frac_part) = padded.split_at(padded.len() - places);
        Some(format!("{}{}.{}", if negative { "-" } else { "" }, int_part, frac_part))
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.decimal_string() {
            Some(s) => f.write_str(&s),
            None => write!(f, "{}/{}", self.0.numer(), self.0.denom()),
        }
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Weight({self})")
    }
}

fn parse_int(text: &str, whole: &str) -> Result<i128, ParseWeightError> {
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseWeightError::Malformed(whole.to_string()));
    }
    let value: i128 = text
        .parse()
        .map_err(|_| ParseWeightError::OutOfRange(whole.to_string()))?;
    if value > MAX_LITERAL {
        return Err(ParseWeightError::OutOfRange(whole.to_string()));
    }
    Ok(value)
}

impl FromStr for Weight {
    type Err = ParseWeightError;

    /// Accepts `7`, `-2`, `3.25`, `.5`, `22/7` and `-1/3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let text = s.trim();
        if text.is_empty() {
            return Err(ParseWeightError::Empty);
        }
        let (negative, body) = match text.as_bytes()[0] {
            b'-' => (true, &text[1..]),
            b'+' => (false, &text[1..]),
            _ => (false, text),
        };
        let magnitude = if let Some((num, den)) = body.split_once('/') {
            let num = parse_int(num, s)?;
            let den = parse_int(den, s)?;
            if den == 0 {
                return Err(ParseWeightError::ZeroDenominator(s.to_string()));
            }
            Ratio::new(num, den)
        } else if let Some((int_part, frac_part)) = body.split_once('.') {
            if int_part.is_empty() && frac_part.is_empty() {
                return Err(ParseWeightError::Malformed(s.to_string()));
            }
            let int_value = if int_part.is_empty() {
                0
            } else {
                parse_int(int_part, s)?
            };
            let frac_value = if frac_part.is_empty() {
                0
            } else {
                parse_int(frac_part, s)?
            };
            let places = frac_part.len() as u32;
            if places > MAX_PLACES {
                return Err(ParseWeightError::OutOfRange(s.to_string()));
            }
            let scale = 10i128.pow(places);
            let numer = int_value
                .checked_mul(scale)
                .and_then(|v| v.checked_add(frac_value))
                .ok_or_else(|| ParseWeightError::OutOfRange(s.to_string()))?;
            Ratio::new(numer, scale)
        } else {
            Ratio::from_integer(parse_int(body, s)?)
        };
        Ok(Weight(if negative { -magnitude } else { magnitude }))
    }
}

impl Add for Weight {
    type Output = Weight;
    fn add(self, rhs: Weight) -> Weight {
        self.checked_add(&rhs).expect("weight arithmetic overflow")
    }
}

impl Sub for Weight {
    type Output = Weight;
    fn sub(self, rhs: Weight) -> Weight {
        self.checked_sub(&rhs).expect("weight arithmetic overflow")
    }
}

impl Mul for Weight {
    type Output = Weight;
    fn mul(self, rhs: Weight) -> Weight {
        Weight(num_traits::CheckedMul::checked_mul(&self.0, &rhs.0).expect("weight arithmetic overflow"))
    }
}

/// Panics on division by zero.
impl Div for Weight {
    type Output = Weight;
    fn div(self, rhs: Weight) -> Weight {
        Weight(num_traits::CheckedDiv::checked_div(&self.0, &rhs.0).expect("weight division by zero or overflow"))
    }
}

impl AddAssign for Weight {
    fn add_assign(&mut self, rhs: Weight) {
        *self = *self + rhs;
    }
}

impl SubAssign for Weight {
    fn sub_assign(&mut self, rhs: Weight) {
        *self = *self - rhs;
    }
}

impl Neg for Weight {
    type Output = Weight;
    fn neg(self) -> Weight {
        Weight(-self.0)
    }
}

impl std::iter::Sum for Weight {
    fn sum<I: Iterator<Item = Weight>>(iter: I) -> Weight {
        iter.fold(Weight::ZERO, |acc, w| acc + w)
    }
}

impl From<i64> for Weight {
    fn from(value: i64) -> Self {
        Weight::integer(value as i128)
    }
}

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Least common multiple of the denominators of `weights`, or `None` on overflow.
pub fn common_denominator<'a>(weights: impl IntoIterator<Item = &'a Weight>) -> Option<i128> {
    let mut acc: i128 = 1;
    for w in weights {
        let d = w.denom();
        let g = acc.gcd(&d);
        acc = (acc / g).checked_mul(d)?;
    }
    Some(acc)
}

impl PartialEq<i64> for Weight {
    fn eq(&self, other: &i64) -> bool {
        self.0 == Ratio::from_integer(*other as i128)
    }
}

impl PartialOrd<i64> for Weight {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        self.0.partial_cmp(&Ratio::from_integer(*other as i128))
    }
}

/// Parse helper for tests and fixtures; panics on malformed input.
pub fn w(text: &str) -> Weight {
    text.parse()
        .unwrap_or_else(|e| panic!("bad weight literal {text:?}: {e}"))
}
