//! Serde helpers for exact numbers.
//!
//! Reports carry every big integer as a decimal string and every rational as
//! `{"num": "...", "den": "..."}`. Input documents additionally accept plain
//! JSON integers wherever a non-negative big integer is expected.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Exact rational in wire form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RationalRepr {
    pub num: String,
    pub den: String,
}

impl From<&BigRational> for RationalRepr {
    fn from(q: &BigRational) -> Self {
        RationalRepr { num: q.numer().to_string(), den: q.denom().to_string() }
    }
}

impl TryFrom<&RationalRepr> for BigRational {
    type Error = crate::Error;

    fn try_from(r: &RationalRepr) -> crate::Result<Self> {
        let num: BigInt = r.num.parse().map_err(|_| crate::Error::Parse(format!("bad numerator {:?}", r.num)))?;
        let den: BigInt = r.den.parse().map_err(|_| crate::Error::Parse(format!("bad denominator {:?}", r.den)))?;
        if den.is_positive() {
            Ok(BigRational::new(num, den))
        } else {
            Err(crate::Error::Parse("denominator must be positive".into()))
        }
    }
}

pub mod rational {
    use super::*;

    pub fn serialize<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        RationalRepr::from(q).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let repr = RationalRepr::deserialize(d)?;
        BigRational::try_from(&repr).map_err(de::Error::custom)
    }
}

pub mod rational_vec {
    use super::*;

    pub fn serialize<S: Serializer>(qs: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(qs.iter().map(RationalRepr::from))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
        let reprs = Vec::<RationalRepr>::deserialize(d)?;
        reprs.iter().map(|r| BigRational::try_from(r).map_err(de::Error::custom)).collect()
    }
}

pub mod rational_opt {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
        q.as_ref().map(RationalRepr::from).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigRational>, D::Error> {
        match Option::<RationalRepr>::deserialize(d)? {
            Some(r) => BigRational::try_from(&r).map(Some).map_err(de::Error::custom),
            None => Ok(None),
        }
    }
}

struct UintVisitor;

impl<'de> Visitor<'de> for UintVisitor {
    type Value = BigUint;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a non-negative integer or a decimal string")
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<BigUint, E> {
        Ok(BigUint::from(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<BigUint, E> {
        u64::try_from(v).map(BigUint::from).map_err(|_| E::custom("expected a non-negative integer"))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<BigUint, E> {
        parse_uint(v).ok_or_else(|| E::custom(format!("invalid decimal integer {v:?}")))
    }
}

struct IntVisitor;

impl<'de> Visitor<'de> for IntVisitor {
    type Value = BigInt;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an integer or a decimal string")
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<BigInt, E> {
        Ok(BigInt::from(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<BigInt, E> {
        Ok(BigInt::from(v))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<BigInt, E> {
        let digits = v.strip_prefix('-').unwrap_or(v);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(E::custom(format!("invalid decimal integer {v:?}")));
        }
        v.parse().map_err(|_| E::custom(format!("invalid decimal integer {v:?}")))
    }
}

/// Strict decimal parsing: ASCII digits only, no sign, no whitespace.
pub fn parse_uint(v: &str) -> Option<BigUint> {
    if v.is_empty() || !v.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    v.parse().ok()
}

/// Big unsigned integer, always written as a decimal string.
pub mod uint_str {
    use super::*;

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        d.deserialize_any(UintVisitor)
    }
}

/// Big signed integer, always written as a decimal string.
pub mod int_str {
    use super::*;

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        d.deserialize_any(IntVisitor)
    }
}

pub mod uint_str_vec {
    use super::*;

    pub fn serialize<S: Serializer>(vs: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(vs.iter().map(|v| v.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigUint>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|v| parse_uint(v).ok_or_else(|| de::Error::custom(format!("invalid decimal integer {v:?}"))))
            .collect()
    }
}

/// Big unsigned integer written as a JSON number when it fits in `u64`,
/// otherwise as a decimal string. Used by the space descriptor schema.
pub mod uint_flex {
    use super::*;

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        match v.to_u64() {
            Some(small) => s.serialize_u64(small),
            None => s.serialize_str(&v.to_string()),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        d.deserialize_any(UintVisitor)
    }
}

/// Renders a rational for human-facing diagnostics.
pub fn display_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}
