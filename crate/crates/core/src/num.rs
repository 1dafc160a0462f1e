//! Exact rational numbers used for every trace value and literal.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An arbitrary-precision rational. Serializes as `"p/q"` (or `"p"` when integral).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Num(pub BigRational);

impl Num {
    pub fn zero() -> Self {
        Num(BigRational::zero())
    }

    pub fn int(v: i64) -> Self {
        Num(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Num(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    /// Exact conversion of a finite binary float.
    pub fn from_f64(v: f64) -> Option<Self> {
        BigRational::from_float(v).map(Num)
    }

    /// Value `milli / 1000`, the fixed-point unit used by the built-in simulators.
    pub fn milli(milli: i64) -> Self {
        Num::ratio(milli, 1000)
    }

    /// Parses a decimal literal such as `5`, `0.9` or `12.500`.
    pub fn from_decimal(text: &str) -> Option<Self> {
        let (int_part, frac_part) = match text.split_once('.') {
            Some((i, f)) => (i, f),
            None => (text, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let digits = format!("{int_part}{frac_part}");
        let numer = if digits.is_empty() { BigInt::zero() } else { digits.parse::<BigInt>().ok()? };
        let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
        Some(Num(BigRational::new(numer, denom)))
    }

    /// Finite decimal expansion when the denominator has only factors 2 and 5.
    pub fn to_decimal(&self) -> Option<String> {
        let denom = self.0.denom().clone();
        let mut d = denom.clone();
        let two = BigInt::from(2);
        let five = BigInt::from(5);
        let (mut twos, mut fives) = (0u32, 0u32);
        while d.is_even() {
            d /= &two;
            twos += 1;
        }
        while (&d % &five).is_zero() {
            d /= &five;
            fives += 1;
        }
        if d != BigInt::from(1) {
            return None;
        }
        let places = twos.max(fives);
        let scaled = self.0.numer() * BigInt::from(10u32).pow(places) / &denom;
        let neg = scaled.is_negative();
        let digits = scaled.abs().to_string();
        let out = if places == 0 {
            digits
        } else {
            let places = places as usize;
            let padded = format!("{digits:0>width$}", width = places + 1);
            let (i, f) = padded.split_at(padded.len() - places);
            format!("{i}.{f}")
        };
        Some(if neg { format!("-{out}") } else { out })
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Exact value in thousandths, if representable.
    pub fn to_milli(&self) -> Option<i64> {
        let scaled = &self.0 * BigRational::from_integer(BigInt::from(1000));
        if scaled.is_integer() {
            scaled.to_integer().to_i64()
        } else {
            None
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn floor(&self) -> Num {
        Num(self.0.floor())
    }

    pub fn ceil(&self) -> Num {
        Num(self.0.ceil())
    }

    pub fn abs(&self) -> Num {
        Num(self.0.abs())
    }
}

impl fmt::Debug for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Num {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let value = if let Some((n, d)) = body.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| format!("bad rational `{s}`"))?;
            let d: BigInt = d.trim().parse().map_err(|_| format!("bad rational `{s}`"))?;
            if d.is_zero() {
                return Err(format!("zero denominator in `{s}`"));
            }
            Num(BigRational::new(n, d))
        } else {
            Num::from_decimal(body).ok_or_else(|| format!("bad number `{s}`"))?
        };
        Ok(if neg { Num(-value.0) } else { value })
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! num_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl std::ops::$trait<&Num> for &Num {
            type Output = Num;
            fn $method(self, rhs: &Num) -> Num {
                Num(&self.0 $op &rhs.0)
            }
        }
    };
}

num_binop!(Add, add, +);
num_binop!(Sub, sub, -);
num_binop!(Mul, mul, *);

impl std::ops::Neg for &Num {
    type Output = Num;
    fn neg(self) -> Num {
        Num(-&self.0)
    }
}

impl Num {
    /// Division; `None` on a zero divisor.
    pub fn checked_div(&self, rhs: &Num) -> Option<Num> {
        if rhs.0.is_zero() {
            None
        } else {
            Some(Num(&self.0 / &rhs.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_round_trip() {
        for text in ["0", "5", "0.9", "5.4", "12.05", "100.125"] {
            let n = Num::from_decimal(text).unwrap();
            assert_eq!(n.to_decimal().unwrap(), text.trim_end_matches(".0"));
        }
        assert_eq!(Num::ratio(1, 3).to_decimal(), None);
        assert_eq!(Num::ratio(-9, 10).to_decimal().unwrap(), "-0.9");
    }

    #[test]
    fn parse_display() {
        assert_eq!("3/6".parse::<Num>().unwrap(), Num::ratio(1, 2));
        assert_eq!("-0.25".parse::<Num>().unwrap(), Num::ratio(-1, 4));
        assert!("1/0".parse::<Num>().is_err());
        assert_eq!(Num::ratio(7, 2).to_string(), "7/2");
    }

    #[test]
    fn float_conversion_is_exact() {
        let n = Num::from_f64(0.1).unwrap();
        assert_ne!(n, Num::ratio(1, 10));
        assert_eq!(n.to_f64(), 0.1);
        assert_eq!(Num::milli(4900).to_milli(), Some(4900));
        assert_eq!(Num::ratio(1, 3).to_milli(), None);
    }
}
