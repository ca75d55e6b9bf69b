//! Exact rational scalars and their text encoding.
//!
//! All finite-space arithmetic in this crate runs on arbitrary-precision
//! rationals so that equality checks (pm1, witnesses, certificates) are
//! meaningful. The wire encoding is the plain `"a/b"` form, with the
//! denominator omitted when it is 1.

use crate::error::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::ToPrimitive;

pub type Q = BigRational;

/// Rational from an integer.
pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Rational `n/d`. Panics on `d == 0`; callers pass literals.
pub fn q(n: i64, d: i64) -> Q {
    assert!(d != 0, "zero denominator");
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parse `"a/b"` or `"a"` (optionally signed).
pub fn parse_q(s: &str) -> Result<Q> {
    let t = s.trim();
    if t.is_empty() {
        return Err(Error::Parse("empty rational literal".into()));
    }
    if let Some((n, d)) = t.split_once('/') {
        let numer: BigInt = n
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {t:?}")))?;
        let denom: BigInt = d
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {t:?}")))?;
        if denom == BigInt::from(0) {
            return Err(Error::Parse(format!("zero denominator in {t:?}")));
        }
        Ok(Q::new(numer, denom))
    } else {
        let numer: BigInt = t
            .parse()
            .map_err(|_| Error::Parse(format!("bad rational literal {t:?}")))?;
        Ok(Q::from_integer(numer))
    }
}

/// Render as `"a/b"`, or `"a"` for integers.
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Nearest f64, for summary statistics only.
pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// serde adapter: rationals as `"a/b"` strings.
pub mod qser {
    use super::{fmt_q, parse_q, Q};
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let raw = String::deserialize(d)?;
        parse_q(&raw).map_err(de::Error::custom)
    }
}

/// serde adapter for `Option<Q>`.
pub mod qser_opt {
    use super::{fmt_q, parse_q, Q};
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<Q>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_some(&fmt_q(v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Q>, D::Error> {
        let raw = Option::<String>::deserialize(d)?;
        raw.map(|r| parse_q(&r).map_err(de::Error::custom)).transpose()
    }
}

/// serde adapter for `Vec<Q>`.
pub mod qser_vec {
    use super::{fmt_q, parse_q, Q};
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(xs.iter().map(fmt_q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Q>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter().map(|r| parse_q(r).map_err(de::Error::custom)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["0", "3", "-4", "15/11", "-3/4", "121/225"] {
            let v = parse_q(s).unwrap();
            assert_eq!(fmt_q(&v), s);
        }
        // normalization
        assert_eq!(fmt_q(&parse_q("6/4").unwrap()), "3/2");
        assert_eq!(fmt_q(&parse_q("4/2").unwrap()), "2");
    }

    #[test]
    fn parse_rejects_garbage() {
        for s in ["", "a", "1/", "/2", "1/0", "1.5"] {
            assert!(parse_q(s).is_err(), "{s:?} should not parse");
        }
    }
}
