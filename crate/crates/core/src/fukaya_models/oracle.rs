//! Direct geometric counts for the tabulated models.
//!
//! On the torus every relevant polygon is a rectangle in the universal cover
//! whose sides alternate between lifts of horizontal and vertical circles.
//! Rectangles are enumerated lift by lift and weighted by the number of
//! marker lifts they meet. On the sphere the counts are lunes between
//! meridian half-planes.

use super::{Model, ModelKind, QhElement};
use crate::ainf::{add_term, GenId, Tensor, Vector};
use crate::error::{Error, Result};
use crate::novikov::Nov;
use crate::q::{floor, q, qabs, Q};
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    Mu(Tensor),
    Oc(Tensor),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleValue {
    Mu(Vector),
    Oc(QhElement),
}

pub fn oracle_enumerate(m: &Model, query: &Query) -> Result<OracleValue> {
    match m.kind {
        ModelKind::Torus { nx, ny } => torus(m, nx, ny, query),
        ModelKind::SingleEquator => sphere(m, 1, query),
        ModelKind::Sphere { n } => sphere(m, n, query),
    }
}

fn unsupported(m: &Model, t: &[GenId]) -> Error {
    Error::Precondition(format!("no geometric count for {} in {}", m.cat.tuple_name(t), m.name()))
}

/// Number of points of `c + Z` strictly between `a` and `b`.
fn lifts_between(c: Q, a: Q, b: Q) -> u64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    assert!(!(hi - c).is_integer() && !(lo - c).is_integer(), "marker on a rectangle side");
    (floor(&(hi - c)) - floor(&(lo - c))) as u64
}

enum Weight {
    Corner,
    /// Marker on a horizontal side, at this `x`.
    OnHorizontal(Q),
    /// Marker on a vertical side, at this `y`.
    OnVertical(Q),
    Interior(Q, Q),
}

struct Torus {
    nx: usize,
    ny: usize,
}

impl Torus {
    fn horizontal(&self, obj: usize) -> bool {
        obj < self.nx
    }

    /// Height of a horizontal circle or abscissa of a vertical one.
    fn pos(&self, obj: usize) -> Q {
        if self.horizontal(obj) {
            q(obj as i64, self.nx as i64)
        } else {
            q((obj - self.nx) as i64, self.ny as i64)
        }
    }

    fn u(&self) -> (Q, Q) {
        (q(1, 2 * self.ny as i64), q(1, 2 * self.nx as i64))
    }

    fn unit_marker(&self, obj: usize) -> Weight {
        if self.horizontal(obj) {
            Weight::OnHorizontal(q(1, 2 * self.ny as i64))
        } else {
            Weight::OnVertical(q(1, 2 * self.nx as i64))
        }
    }

    /// Rectangles with sides on `sides` in clockwise order, weighted, with
    /// areas below `p`; returns multiplicities per area.
    fn rectangles(&self, sides: &[usize; 4], w: &Weight, p: Q) -> Option<BTreeMap<Q, u64>> {
        let r = (0..2).find(|&r| self.horizontal(sides[r]))?;
        let s = |i: usize| sides[(r + i) % 4];
        if !self.horizontal(s(2)) || self.horizontal(s(1)) || self.horizontal(s(3)) {
            return None;
        }
        let (ha, va, hb, vb) = (s(0), s(1), s(2), s(3));
        let dx0 = self.pos(vb) - self.pos(va);
        let dy0 = self.pos(hb) - self.pos(ha);
        let smallest = |d: Q| {
            let f = d - Q::from_integer(floor(&d));
            if f.is_zero() {
                Q::one()
            } else {
                f.min(Q::one() - f)
            }
        };
        let (mx, my) = (smallest(dx0), smallest(dy0));
        let bx = floor(&(p / my)) + 2;
        let by = floor(&(p / mx)) + 2;
        let mut out = BTreeMap::new();
        for i in -bx..=bx {
            let x = dx0 + Q::from_integer(i);
            if x.is_zero() {
                continue;
            }
            for k in -by..=by {
                let y = dy0 + Q::from_integer(k);
                if y.is_zero() || x.is_positive() != y.is_positive() {
                    continue;
                }
                let area = qabs(x * y);
                if area >= p {
                    continue;
                }
                let (x0, y0) = (self.pos(va), self.pos(ha));
                let mult = match w {
                    Weight::Corner => 1,
                    Weight::OnHorizontal(c) => lifts_between(*c, x0, x0 + x),
                    Weight::OnVertical(c) => lifts_between(*c, y0, y0 + y),
                    Weight::Interior(cx, cy) => lifts_between(*cx, x0, x0 + x) * lifts_between(*cy, y0, y0 + y),
                };
                *out.entry(area).or_insert(0) += mult;
            }
        }
        Some(out)
    }
}

fn series(counts: BTreeMap<Q, u64>, sym: u64, p: Q) -> Nov {
    let exps = counts.into_iter().filter_map(|(e, c)| {
        assert_eq!(c % sym, 0, "rectangle count not divisible by the symmetry");
        ((c / sym) % 2 == 1).then_some(e)
    });
    Nov::from_exps_prec(exps, Some(p))
}

fn torus(m: &Model, nx: usize, ny: usize, query: &Query) -> Result<OracleValue> {
    let a = &m.cat;
    let p = m.precision.expect("torus models carry a precision");
    let geo = Torus { nx, ny };
    let (Query::Mu(t) | Query::Oc(t)) = query;
    if t.is_empty() || !a.composable(t) {
        return Err(unsupported(m, t));
    }
    let src = |g: GenId| a.gens[g].source;
    let tgt = |g: GenId| a.gens[g].target;
    let is_a = |g: GenId| src(g) != tgt(g);
    match query {
        Query::Mu(t) if t.len() <= 2 && !t.iter().any(|&g| a.is_unit(g)) => {
            // no bigons between straight circles, and pt·pt = 0 on a circle
            if t.len() == 1 || t.iter().all(|&g| is_a(g)) || t.iter().all(|&g| !is_a(g)) {
                Ok(OracleValue::Mu(Vector::new()))
            } else {
                Err(unsupported(m, t))
            }
        }
        Query::Mu(t) if (t.len() == 3 || t.len() == 4) && t.iter().all(|&g| is_a(g)) => {
            let last = *t.last().unwrap();
            let sides = [src(t[0]), src(t[1]), src(t[2]), if t.len() == 3 { tgt(last) } else { src(t[3]) }];
            let x0 = sides[0];
            let (w, out) = if t.len() == 4 {
                if tgt(last) != x0 {
                    return Err(unsupported(m, t));
                }
                (geo.unit_marker(x0), a.unit(x0))
            } else {
                let h = a.hom(x0, tgt(last));
                if h.len() != 1 {
                    return Err(unsupported(m, t));
                }
                (Weight::Corner, h[0])
            };
            let Some(c) = geo.rectangles(&sides, &w, p) else {
                return Ok(OracleValue::Mu(Vector::new()));
            };
            let mut v = Vector::new();
            add_term(&mut v, out, &series(c, 1, p));
            Ok(OracleValue::Mu(v))
        }
        Query::Oc(t) if t.len() == 4 && t.iter().all(|&g| is_a(g)) && tgt(t[3]) == src(t[0]) => {
            let sides = [src(t[0]), src(t[1]), src(t[2]), src(t[3])];
            let (ux, uy) = geo.u();
            let sym = (0..4).filter(|&r| (0..4).all(|i| t[(i + r) % 4] == t[i])).count() as u64;
            let mut x = QhElement::default();
            if let Some(c) = geo.rectangles(&sides, &Weight::Interior(ux, uy), p) {
                x.add_term("u", &series(c, sym, p));
            }
            Ok(OracleValue::Oc(x))
        }
        Query::Oc(t) if t.len() == 3 && a.is_unit(t[0]) => {
            // a unit marker cannot sit at a corner of a rectangle
            Ok(OracleValue::Oc(QhElement::default()))
        }
        _ => Err(unsupported(m, t)),
    }
}

/// Angle of a great circle's first meridian half-plane, in units of `π`.
fn meridian(n: usize, i: usize) -> Q {
    q(i as i64, n as i64)
}

/// `u` sits in the slice between the first two circles.
fn u_angle(n: usize) -> Q {
    q(1, 2 * n as i64)
}

fn sphere(m: &Model, n: usize, query: &Query) -> Result<OracleValue> {
    let a = &m.cat;
    let (Query::Mu(t) | Query::Oc(t)) = query;
    let src = |g: GenId| a.gens[g].source;
    let tgt = |g: GenId| a.gens[g].target;
    // a slice between consecutive circles has the north pole `n_k` of
    // `CF(L_k, L_{k+1})` and the south pole `s_k'` of `CF(L_{k+1}, L_k)` as corners
    let pole_pair = t.len() == 2 && {
        let (x, y) = (&a.gens[t[0]].name, &a.gens[t[1]].name);
        let k = |s: &str, pre: &str, post: &str| s.strip_prefix(pre).and_then(|r| r.strip_suffix(post)).map(str::to_string);
        let nx = k(x, "n_", "").filter(|r| !r.ends_with('\''));
        let ny = k(y, "n_", "").filter(|r| !r.ends_with('\''));
        (nx.is_some() && nx == k(y, "s_", "'")) || (ny.is_some() && ny == k(x, "s_", "'"))
    };
    let pts_only = !t.is_empty() && t.iter().all(|&g| src(g) == tgt(g) && !a.is_unit(g));
    match query {
        Query::Mu(_) if n == 1 && pts_only && t.len() >= 3 => {
            // one of the two hemispheres, area 1/2
            let mut v = Vector::new();
            add_term(&mut v, a.unit(0), &Nov::mono(q(1, 2)));
            Ok(OracleValue::Mu(v))
        }
        Query::Oc(_) if n == 1 && pts_only && t.len() == 2 => {
            let mut x = QhElement::default();
            x.add_term("u", &Nov::mono(q(1, 2)));
            Ok(OracleValue::Oc(x))
        }
        Query::Mu(_) | Query::Oc(_) if pole_pair => {
            let (i, j) = (src(t[0]), tgt(t[0]));
            let sweep = |from: usize, to: usize| {
                let s = meridian(n, to) - meridian(n, from);
                s - Q::from_integer(floor(&s))
            };
            // the slice swept from the earlier circle to the later one
            let (lo, width) = if sweep(i, j) <= sweep(j, i) { (i, sweep(i, j)) } else { (j, sweep(j, i)) };
            let area = width / Q::from_integer(2);
            if matches!(query, Query::Mu(_)) {
                let mut v = Vector::new();
                add_term(&mut v, a.unit(i), &Nov::mono(area));
                return Ok(OracleValue::Mu(v));
            }
            let start = meridian(n, lo);
            let off = u_angle(n) - start;
            let off = off - Q::from_integer(floor(&off));
            let mut x = QhElement::default();
            // OC of the pair read from the circle containing the slice start
            if off < width && lo == i {
                x.add_term("u", &Nov::mono(area));
            }
            Ok(OracleValue::Oc(x))
        }
        _ => Err(unsupported(m, t)),
    }
}
