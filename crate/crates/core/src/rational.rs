//! Rational scalars and their canonical string form `"p/q"`.

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

pub type Rational = BigRational;
pub type Integer = BigInt;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"p/q"` or `"p"`. Decimal and exponent notation is refused: exact
/// inputs must not go through a float.
pub fn parse(input: &str) -> Result<Rational> {
    let s = input.trim();
    let err = |reason: &str| Error::ParseRational { input: input.to_string(), reason: reason.to_string() };
    if s.is_empty() {
        return Err(err("empty"));
    }
    if s.contains(['.', 'e', 'E']) {
        return Err(err("floating-point notation is not accepted; write the value as p/q"));
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| err("bad numerator"))?;
    let den: BigInt = den.parse().map_err(|_| err("bad denominator"))?;
    if den.is_zero() {
        return Err(err("zero denominator"));
    }
    Ok(Rational::new(num, den))
}

/// Comma separated list of rationals.
pub fn parse_list(input: &str) -> Result<Vec<Rational>> {
    input.split(',').map(parse).collect()
}

/// Canonical form: lowest terms, positive denominator, always with a `/`.
pub fn format(q: &Rational) -> String {
    // BigRational keeps itself reduced with a positive denominator.
    format!("{}/{}", q.numer(), q.denom())
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| if q.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

/// The exact rational value of a finite float.
pub fn from_f64_exact(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

pub fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values.into_iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

pub fn abs(q: &Rational) -> Rational {
    q.abs()
}

/// `base^exp` for a possibly negative integer exponent.
pub fn pow(base: &Rational, exp: i64) -> Rational {
    if exp >= 0 {
        num_traits::pow(base.clone(), exp as usize)
    } else {
        num_traits::pow(base.recip(), (-exp) as usize)
    }
}

/// Serde adapters: rationals travel as canonical strings.
pub mod serde_q {
    use super::*;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(D::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for q in v {
                seq.serialize_element(&format(q))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
            let v = Vec::<String>::deserialize(d)?;
            v.iter().map(|s| parse(s).map_err(D::Error::custom)).collect()
        }
    }

    pub mod vec2 {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Vec<Rational>], s: S) -> std::result::Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for row in v {
                let row: Vec<String> = row.iter().map(format).collect();
                seq.serialize_element(&row)?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<Rational>>, D::Error> {
            let v = Vec::<Vec<String>>::deserialize(d)?;
            v.iter()
                .map(|row| row.iter().map(|s| parse(s).map_err(D::Error::custom)).collect())
                .collect()
        }
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(q: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
            match q {
                Some(q) => s.serialize_some(&format(q)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Rational>, D::Error> {
            let v = Option::<String>::deserialize(d)?;
            v.map(|s| parse(&s).map_err(D::Error::custom)).transpose()
        }
    }
}

/// Serde adapters for big integers, also as strings.
pub mod serde_z {
    use super::*;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(z: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&z.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for z in v {
                seq.serialize_element(&z.to_string())?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<BigInt>, D::Error> {
            let v = Vec::<String>::deserialize(d)?;
            v.iter().map(|s| s.parse().map_err(D::Error::custom)).collect()
        }
    }
}

/// Formats a statistic with 17 significant digits, enough to round-trip.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{:.16e}", x)
    } else {
        format!("{}", x)
    }
}
