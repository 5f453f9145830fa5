//! The Novikov field over `Z/2` with rational exponents.
//!
//! An element is a finite set of exponents (coefficient 1 each) together with an
//! optional precision `P`: when present, the element is only known modulo `T^P`
//! and every stored exponent is `< P`.

use crate::error::{Error, Result};
use crate::q::{fmt_q, parse_q, Ext, Q};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::ops::{Add, AddAssign, Mul};

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Nov {
    exps: Vec<Q>,
    prec: Option<Q>,
}

fn min_prec(a: Option<Q>, b: Option<Q>) -> Option<Q> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Sorts, cancels equal pairs and drops exponents at or above `prec`.
fn normalize(mut v: Vec<Q>, prec: Option<Q>) -> Vec<Q> {
    v.sort_unstable();
    let mut out: Vec<Q> = Vec::with_capacity(v.len());
    for x in v {
        if prec.is_some_and(|p| x >= p) {
            continue;
        }
        if out.last() == Some(&x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

impl Nov {
    pub fn zero() -> Nov {
        Nov::default()
    }

    pub fn one() -> Nov {
        Nov::mono(Q::zero())
    }

    pub fn mono(e: Q) -> Nov {
        Nov { exps: vec![e], prec: None }
    }

    pub fn from_exps<I: IntoIterator<Item = Q>>(it: I) -> Nov {
        Nov { exps: normalize(it.into_iter().collect(), None), prec: None }
    }

    pub fn from_exps_prec<I: IntoIterator<Item = Q>>(it: I, prec: Option<Q>) -> Nov {
        Nov { exps: normalize(it.into_iter().collect(), prec), prec }
    }

    pub fn exps(&self) -> &[Q] {
        &self.exps
    }

    pub fn precision(&self) -> Option<Q> {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.exps.is_empty()
    }

    /// Exactly zero: no terms and no truncation.
    pub fn is_exact_zero(&self) -> bool {
        self.exps.is_empty() && self.prec.is_none()
    }

    pub fn valuation(&self) -> Ext {
        self.exps.first().map_or(Ext::Inf, |e| Ext::Fin(*e))
    }

    /// Lower bound for the valuation of the true (untruncated) value.
    fn val_lower(&self) -> Ext {
        match (self.exps.first(), self.prec) {
            (Some(e), _) => Ext::Fin(*e),
            (None, Some(p)) => Ext::Fin(p),
            (None, None) => Ext::Inf,
        }
    }

    pub fn truncate(&self, p: Q) -> Nov {
        let prec = min_prec(self.prec, Some(p));
        Nov { exps: self.exps.iter().copied().filter(|e| *e < prec.unwrap()).collect(), prec }
    }

    /// Forgets the precision bound, treating the stored terms as exact.
    pub fn exact(&self) -> Nov {
        Nov { exps: self.exps.clone(), prec: None }
    }

    /// Multiplication by `T^s`.
    pub fn shift(&self, s: Q) -> Nov {
        Nov { exps: self.exps.iter().map(|e| e + s).collect(), prec: self.prec.map(|p| p + s) }
    }

    pub fn contains(&self, e: &Q) -> bool {
        self.exps.binary_search(e).is_ok()
    }

    /// Value at `T = 1` (parity of the number of terms).
    pub fn at_one(&self) -> bool {
        self.exps.len() % 2 == 1
    }

    /// Equality of the known parts up to the smaller of the two precisions and `p`.
    pub fn eq_upto(&self, other: &Nov, p: Q) -> bool {
        let cut = min_prec(min_prec(self.prec, other.prec), Some(p)).unwrap();
        self.truncate(cut).exps == other.truncate(cut).exps
    }

    pub fn add_ref(&self, b: &Nov) -> Nov {
        let prec = min_prec(self.prec, b.prec);
        let mut v = Vec::with_capacity(self.exps.len() + b.exps.len());
        v.extend_from_slice(&self.exps);
        v.extend_from_slice(&b.exps);
        Nov { exps: normalize(v, prec), prec }
    }

    fn prod_prec(&self, b: &Nov) -> Option<Q> {
        let e1 = match self.prec {
            Some(pa) => b.val_lower().add_q(pa),
            None => Ext::Inf,
        };
        let e2 = match b.prec {
            Some(pb) => self.val_lower().add_q(pb),
            None => Ext::Inf,
        };
        e1.min(e2).fin()
    }

    pub fn mul_ref(&self, b: &Nov) -> Nov {
        let prec = self.prod_prec(b);
        let mut v = Vec::with_capacity(self.exps.len() * b.exps.len());
        for x in &self.exps {
            for y in &b.exps {
                let s = x + y;
                if prec.is_none_or(|p| s < p) {
                    v.push(s);
                }
            }
        }
        Nov { exps: normalize(v, prec), prec }
    }

    /// Product truncated at `p` without materialising higher terms.
    pub fn mul_trunc(&self, b: &Nov, p: Q) -> Nov {
        let prec = min_prec(self.prod_prec(b), Some(p));
        let cut = prec.unwrap();
        let mut v = Vec::new();
        for x in &self.exps {
            if b.exps.first().is_none_or(|y0| x + y0 >= cut) {
                break;
            }
            for y in &b.exps {
                let s = x + y;
                if s >= cut {
                    break;
                }
                v.push(s);
            }
        }
        Nov { exps: normalize(v, prec), prec }
    }

    /// Inverse modulo `T^precision`. The output precision also accounts for the
    /// precision of `self`.
    pub fn invert(&self, precision: Q) -> Result<Nov> {
        let v = match self.exps.first() {
            Some(v) => *v,
            None => return Err(Error::Precondition("cannot invert zero".into())),
        };
        // self = T^v (1 + x), val(x) > 0
        let x = Nov { exps: self.exps[1..].iter().map(|e| e - v).collect(), prec: self.prec.map(|p| p - v) };
        let mut out_prec = precision;
        if let Some(pa) = self.prec {
            out_prec = out_prec.min(pa - v - v);
        }
        let rel = out_prec + v;
        let xt = x.exact().truncate(rel).exact();
        let mut s = Nov::one();
        if rel > Q::zero() {
            let mut pw = Nov::one();
            loop {
                pw = pw.mul_trunc(&xt, rel).exact();
                if pw.is_zero() {
                    break;
                }
                s = s.add_ref(&pw);
            }
        }
        let res = s.shift(-v);
        Ok(Nov { exps: normalize(res.exps, Some(out_prec)), prec: Some(out_prec) })
    }

    pub fn pow(&self, k: u32) -> Nov {
        let mut r = Nov::one();
        for _ in 0..k {
            r = r.mul_ref(self);
        }
        r
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let mut v: Vec<serde_json::Value> = self.exps.iter().map(|e| fmt_q(e).into()).collect();
        if let Some(p) = self.prec {
            v.push(format!("O({})", fmt_q(&p)).into());
        }
        serde_json::Value::Array(v)
    }

    pub fn from_json_value(v: &serde_json::Value) -> Result<Nov> {
        let arr = v.as_array().ok_or_else(|| Error::Parse("novikov element must be a JSON array".into()))?;
        let mut exps = Vec::new();
        let mut prec = None;
        for (i, item) in arr.iter().enumerate() {
            let s = item.as_str().ok_or_else(|| Error::Parse(format!("entry {i} is not a string")))?;
            if let Some(inner) = s.strip_prefix("O(").and_then(|t| t.strip_suffix(')')) {
                if i + 1 != arr.len() {
                    return Err(Error::Parse("precision marker must be last".into()));
                }
                prec = Some(parse_q(inner)?);
            } else {
                exps.push(parse_q(s)?);
            }
        }
        check_strict(&exps, prec)?;
        Ok(Nov { exps, prec })
    }
}

fn check_strict(exps: &[Q], prec: Option<Q>) -> Result<()> {
    if exps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parse("exponents must be strictly increasing".into()));
    }
    if let (Some(p), Some(l)) = (prec, exps.last()) {
        if *l >= p {
            return Err(Error::Parse("exponent at or above precision".into()));
        }
    }
    Ok(())
}

fn fmt_mono(e: &Q) -> String {
    if e.is_zero() {
        "1".into()
    } else {
        format!("T^{{{}}}", fmt_q(e))
    }
}

impl fmt::Display for Nov {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.exps.iter().map(fmt_mono).collect();
        if let Some(p) = self.prec {
            parts.push(format!("O(T^{{{}}})", fmt_q(&p)));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl fmt::Debug for Nov {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Nov({self})")
    }
}

fn parse_exponent(t: &str) -> Result<Q> {
    let t = t.trim();
    if t == "T" {
        return Ok(Q::from_integer(1));
    }
    let rest = t.strip_prefix("T^").ok_or_else(|| Error::Parse(format!("bad monomial {t:?}")))?.trim();
    let inner = rest.strip_prefix('{').and_then(|r| r.strip_suffix('}')).unwrap_or(rest);
    parse_q(inner)
}

impl std::str::FromStr for Nov {
    type Err = Error;

    fn from_str(s: &str) -> Result<Nov> {
        let s = s.trim();
        if s == "0" || s.is_empty() {
            return Ok(Nov::zero());
        }
        let mut exps = Vec::new();
        let mut prec = None;
        let parts: Vec<&str> = s.split(" + ").collect();
        for (i, part) in parts.iter().enumerate() {
            let part = part.trim();
            if let Some(inner) = part.strip_prefix("O(").and_then(|r| r.strip_suffix(')')) {
                if i + 1 != parts.len() {
                    return Err(Error::Parse("precision term must be last".into()));
                }
                prec = Some(parse_exponent(inner)?);
            } else if part == "1" {
                exps.push(Q::zero());
            } else {
                exps.push(parse_exponent(part)?);
            }
        }
        check_strict(&exps, prec)?;
        Ok(Nov { exps, prec })
    }
}

impl Serialize for Nov {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json_value().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Nov {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Nov, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        Nov::from_json_value(&v).map_err(serde::de::Error::custom)
    }
}

impl Add for &Nov {
    type Output = Nov;
    fn add(self, b: &Nov) -> Nov {
        self.add_ref(b)
    }
}

impl Add for Nov {
    type Output = Nov;
    fn add(self, b: Nov) -> Nov {
        self.add_ref(&b)
    }
}

impl AddAssign<&Nov> for Nov {
    fn add_assign(&mut self, b: &Nov) {
        *self = self.add_ref(b);
    }
}

impl Mul for &Nov {
    type Output = Nov;
    fn mul(self, b: &Nov) -> Nov {
        self.mul_ref(b)
    }
}

impl Mul for Nov {
    type Output = Nov;
    fn mul(self, b: Nov) -> Nov {
        self.mul_ref(&b)
    }
}

/// Named series used by the torus computations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeriesKind {
    /// `Σ_{n≥0} T^{(2n+1)^2}`.
    OddSquares,
    /// `Σ_{n∈Z} T^{scale·(n+β)^2}`.
    Theta { beta: Q, scale: Q },
    /// `Σ_{k≥0} #{d | 2k+1 : d ≡ ±1 mod 2N (and N±1 for even N)} T^{(2k+1)/N}`.
    DivisorSum { n: u32 },
}

impl std::str::FromStr for SeriesKind {
    type Err = Error;

    /// `odd_squares`, `theta(β,scale)`, `divisor_sum(N)`.
    fn from_str(s: &str) -> Result<SeriesKind> {
        let s = s.trim();
        if s == "odd_squares" {
            return Ok(SeriesKind::OddSquares);
        }
        let args = |pre: &str| -> Option<Vec<String>> {
            s.strip_prefix(pre)
                .and_then(|r| r.strip_prefix('('))
                .and_then(|r| r.strip_suffix(')'))
                .map(|r| r.split(',').map(|a| a.trim().to_string()).collect())
        };
        if let Some(a) = args("theta") {
            if a.len() == 2 {
                return Ok(SeriesKind::Theta { beta: parse_q(&a[0])?, scale: parse_q(&a[1])? });
            }
        }
        if let Some(a) = args("divisor_sum") {
            if a.len() == 1 {
                let n: u32 = a[0].parse().map_err(|_| Error::Parse(format!("bad N in {s:?}")))?;
                if n >= 1 {
                    return Ok(SeriesKind::DivisorSum { n });
                }
            }
        }
        Err(Error::Parse(format!("unknown series kind {s:?}")))
    }
}

/// Residues `d mod 2N` counted by [`SeriesKind::DivisorSum`].
pub fn divisor_residues(n: u32) -> Vec<i64> {
    let m = 2 * n as i64;
    let mut r = vec![1 % m, (m - 1) % m];
    if n.is_multiple_of(2) {
        r.push((n as i64 - 1).rem_euclid(m));
        r.push((n as i64 + 1) % m);
    }
    r.sort_unstable();
    r.dedup();
    r
}

pub fn series_generate(kind: &SeriesKind, precision: Q) -> Result<Nov> {
    if precision <= Q::zero() {
        return Err(Error::Precondition("series precision must be positive".into()));
    }
    let mut exps = Vec::new();
    match kind {
        SeriesKind::OddSquares => {
            let mut n: i64 = 0;
            loop {
                let e = Q::from_integer((2 * n + 1) * (2 * n + 1));
                if e >= precision {
                    break;
                }
                exps.push(e);
                n += 1;
            }
        }
        SeriesKind::Theta { beta, scale } => {
            if *scale <= Q::zero() {
                return Err(Error::Precondition("theta scale must be positive".into()));
            }
            // scale (n+β)^2 < P  ⇒  |n+β| < sqrt(P/scale) ≤ P/scale + 1
            let bound = (precision / scale).ceil().to_integer() + beta.abs().ceil().to_integer() + 2;
            for n in -bound..=bound {
                let t = Q::from_integer(n) + beta;
                let e = scale * t * t;
                if e < precision {
                    exps.push(e);
                }
            }
        }
        SeriesKind::DivisorSum { n } => {
            let res = divisor_residues(*n);
            let m = 2 * *n as i64;
            let mut k: i64 = 0;
            loop {
                let odd = 2 * k + 1;
                let e = Q::new(odd, *n as i64);
                if e >= precision {
                    break;
                }
                let mut c = 0u32;
                for d in 1..=odd {
                    if odd % d == 0 && res.contains(&(d % m)) {
                        c += 1;
                    }
                }
                if c % 2 == 1 {
                    exps.push(e);
                }
                k += 1;
            }
        }
    }
    Ok(Nov::from_exps_prec(exps, Some(precision)))
}
