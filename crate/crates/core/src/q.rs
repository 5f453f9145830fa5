//! Exact rationals and the extended line `Q ∪ {+∞}`.

use crate::error::{Error, Result};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

pub type Q = num_rational::Rational64;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(n)
}

pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `"p/q"`, `"p"` or a plain decimal such as `"0.25"`.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((a, b)) = s.split_once('/') {
        let n: i64 = a.trim().parse().map_err(|_| bad())?;
        let d: i64 = b.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Q::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.starts_with('-');
        let ip = ip.trim_start_matches(['-', '+']);
        if fp.is_empty() || !fp.bytes().all(|c| c.is_ascii_digit()) || fp.len() > 15 {
            return Err(bad());
        }
        let i: i64 = if ip.is_empty() { 0 } else { ip.parse().map_err(|_| bad())? };
        let f: i64 = fp.parse().map_err(|_| bad())?;
        let den = 10i64.pow(fp.len() as u32);
        let v = Q::new(i * den + f, den);
        return Ok(if neg { -v } else { v });
    }
    s.parse::<i64>().map(Q::from_integer).map_err(|_| bad())
}

pub fn to_f64(x: &Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

pub fn floor(x: &Q) -> i64 {
    x.floor().to_integer()
}

pub fn ceil(x: &Q) -> i64 {
    x.ceil().to_integer()
}

pub fn qabs(x: Q) -> Q {
    x.abs()
}

/// `Q ∪ {+∞}`, ordered with `Fin(_) < Inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ext {
    Fin(Q),
    Inf,
}

impl Ext {
    pub fn zero() -> Ext {
        Ext::Fin(Q::zero())
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, Ext::Inf)
    }

    pub fn fin(&self) -> Option<Q> {
        match self {
            Ext::Fin(x) => Some(*x),
            Ext::Inf => None,
        }
    }

    pub fn add(self, o: Ext) -> Ext {
        match (self, o) {
            (Ext::Fin(a), Ext::Fin(b)) => Ext::Fin(a + b),
            _ => Ext::Inf,
        }
    }

    pub fn add_q(self, o: Q) -> Ext {
        self.add(Ext::Fin(o))
    }

    pub fn parse(s: &str) -> Result<Ext> {
        match s.trim() {
            "inf" | "∞" | "+inf" | "infinity" => Ok(Ext::Inf),
            t => parse_q(t).map(Ext::Fin),
        }
    }
}

impl From<Q> for Ext {
    fn from(x: Q) -> Ext {
        Ext::Fin(x)
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::Fin(x) => write!(f, "{}", fmt_q(x)),
            Ext::Inf => write!(f, "inf"),
        }
    }
}

impl Serialize for Ext {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Ext {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Ext, D::Error> {
        let s = String::deserialize(d)?;
        Ext::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter storing a [`Q`] as a `"p/q"` string.
pub mod qstr {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::String(s) => parse_q(&s).map_err(serde::de::Error::custom),
            serde_json::Value::Number(n) if n.is_i64() => Ok(Q::from_integer(n.as_i64().unwrap())),
            other => Err(serde::de::Error::custom(format!("expected rational string, got {other}"))),
        }
    }
}

pub fn is_one(x: &Q) -> bool {
    x.is_one()
}
