//! Barcodes of finite-type persistence modules and the interleaving-type
//! distances between them.
//!
//! All distances are computed per degree by matching: `d_int` is the bottleneck
//! distance, `D_int` is obtained from `d_int` by optimising over the asymmetry of
//! the interleaving, and `d_rint` uses a one-sided matching that only has to
//! cover the bars of `R` that are longer than `2r`.

use crate::error::{Error, Result};
use crate::matching::Bipartite;
use crate::q::{qstr, Ext, Q};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bar {
    #[serde(with = "qstr")]
    pub birth: Q,
    pub death: Ext,
    pub degree: i64,
}

impl Bar {
    pub fn new(birth: Q, death: Ext, degree: i64) -> Bar {
        Bar { birth, death, degree }
    }

    pub fn finite(birth: Q, death: Q, degree: i64) -> Bar {
        Bar { birth, death: Ext::Fin(death), degree }
    }

    pub fn infinite(birth: Q, degree: i64) -> Bar {
        Bar { birth, death: Ext::Inf, degree }
    }

    pub fn length(&self) -> Ext {
        match self.death {
            Ext::Fin(d) => Ext::Fin(d - self.birth),
            Ext::Inf => Ext::Inf,
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.death.is_inf()
    }

    pub fn shifted(&self, s: Q) -> Bar {
        Bar { birth: self.birth + s, death: self.death.add_q(s), degree: self.degree }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Barcode {
    pub modulus: u32,
    pub bars: Vec<Bar>,
}

impl Barcode {
    /// Builds a barcode, dropping empty bars and reducing degrees.
    pub fn new(modulus: u32, bars: Vec<Bar>) -> Barcode {
        let mut b = Barcode { modulus, bars: Vec::new() };
        for bar in bars {
            b.push(bar);
        }
        b
    }

    pub fn empty(modulus: u32) -> Barcode {
        Barcode { modulus, bars: Vec::new() }
    }

    pub fn push(&mut self, mut bar: Bar) {
        if Ext::Fin(bar.birth) >= bar.death {
            return;
        }
        bar.degree = self.reduce(bar.degree);
        self.bars.push(bar);
    }

    pub fn reduce(&self, deg: i64) -> i64 {
        if self.modulus == 0 {
            deg
        } else {
            deg.rem_euclid(self.modulus as i64)
        }
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn sorted(&self) -> Barcode {
        let mut b = self.clone();
        b.bars.sort();
        b
    }

    pub fn shifted(&self, s: Q) -> Barcode {
        Barcode { modulus: self.modulus, bars: self.bars.iter().map(|b| b.shifted(s)).collect() }
    }

    /// Disjoint union.
    pub fn union(&self, other: &Barcode) -> Result<Barcode> {
        same_modulus(self, other)?;
        let mut b = self.clone();
        b.bars.extend(other.bars.iter().copied());
        Ok(b)
    }

    pub fn infinite_count(&self, degree: i64) -> usize {
        let d = self.reduce(degree);
        self.bars.iter().filter(|b| b.is_infinite() && b.degree == d).count()
    }

    pub fn parse_json(s: &str) -> Result<Barcode> {
        let raw: Barcode = serde_json::from_str(s).map_err(|e| Error::Parse(format!("barcode: {e}")))?;
        for (i, b) in raw.bars.iter().enumerate() {
            if Ext::Fin(b.birth) >= b.death {
                return Err(Error::Parse(format!("bar {i}: birth must be smaller than death")));
            }
        }
        Ok(Barcode::new(raw.modulus, raw.bars))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("barcode serialises")
    }

    fn by_degree(&self) -> BTreeMap<i64, Vec<Bar>> {
        let mut m: BTreeMap<i64, Vec<Bar>> = BTreeMap::new();
        for b in &self.bars {
            m.entry(b.degree).or_default().push(*b);
        }
        m
    }
}

fn same_modulus(a: &Barcode, b: &Barcode) -> Result<()> {
    if a.modulus != b.modulus {
        Err(Error::ModulusMismatch(a.modulus, b.modulus))
    } else {
        Ok(())
    }
}

/// Number of bars of length `> delta`.
pub fn bar_count(b: &Barcode, delta: Q, finite_only: bool) -> Result<usize> {
    if delta < Q::zero() {
        return Err(Error::Precondition("bar_count needs delta >= 0".into()));
    }
    Ok(b.bars.iter().filter(|bar| !(finite_only && bar.is_infinite()) && bar.length() > Ext::Fin(delta)).count())
}

fn half(x: Q) -> Q {
    x / Q::from_integer(2)
}

/// Cost of matching two bars, or `None` if one is finite and the other is not.
fn pair_cost(a: &Bar, b: &Bar) -> Option<Q> {
    match (a.death, b.death) {
        (Ext::Fin(da), Ext::Fin(db)) => Some((a.birth - b.birth).abs().max((da - db).abs())),
        (Ext::Inf, Ext::Inf) => Some((a.birth - b.birth).abs()),
        _ => None,
    }
}

fn diag_cost(a: &Bar) -> Option<Q> {
    a.length().fin().map(half)
}

/// Perfect matching on `xs ⊔ diag(ys)` vs `ys ⊔ diag(xs)` with all costs `<= eps`.
fn bottleneck_feasible(xs: &[Bar], ys: &[Bar], eps: Q) -> bool {
    let (n, m) = (xs.len(), ys.len());
    let mut g = Bipartite::new(n + m, m + n);
    for (i, x) in xs.iter().enumerate() {
        for (j, y) in ys.iter().enumerate() {
            if pair_cost(x, y).is_some_and(|c| c <= eps) {
                g.edge(i, j);
            }
        }
        if diag_cost(x).is_some_and(|c| c <= eps) {
            g.edge(i, m + i);
        }
    }
    for (j, y) in ys.iter().enumerate() {
        if diag_cost(y).is_some_and(|c| c <= eps) {
            g.edge(n + j, j);
        }
        for i in 0..n {
            g.edge(n + j, m + i);
        }
    }
    g.matching_size() == n + m
}

fn bottleneck_degree(xs: &[Bar], ys: &[Bar]) -> Ext {
    let inf_x = xs.iter().filter(|b| b.is_infinite()).count();
    let inf_y = ys.iter().filter(|b| b.is_infinite()).count();
    if inf_x != inf_y {
        return Ext::Inf;
    }
    let mut cands = vec![Q::zero()];
    for x in xs {
        for y in ys {
            if pair_cost(x, y).is_some() {
                cands.push((x.birth - y.birth).abs());
                if let (Ext::Fin(a), Ext::Fin(b)) = (x.death, y.death) {
                    cands.push((a - b).abs());
                }
            }
        }
    }
    for b in xs.iter().chain(ys) {
        if let Some(c) = diag_cost(b) {
            cands.push(c);
        }
    }
    min_feasible(cands, |e| bottleneck_feasible(xs, ys, e))
}

/// Smallest candidate at which the monotone predicate holds.
fn min_feasible(mut cands: Vec<Q>, feasible: impl Fn(Q) -> bool) -> Ext {
    cands.sort_unstable();
    cands.dedup();
    let (mut lo, mut hi) = (0usize, cands.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(cands[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    if lo == cands.len() {
        Ext::Inf
    } else {
        Ext::Fin(cands[lo])
    }
}

fn degrees(a: &Barcode, b: &Barcode) -> Vec<i64> {
    let mut d: Vec<i64> = a.bars.iter().chain(&b.bars).map(|x| x.degree).collect();
    d.sort_unstable();
    d.dedup();
    d
}

/// Interleaving distance `d_int`, equal to the bottleneck distance.
pub fn interleaving_distance(a: &Barcode, b: &Barcode) -> Result<Ext> {
    same_modulus(a, b)?;
    let (ga, gb) = (a.by_degree(), b.by_degree());
    let empty = Vec::new();
    let mut worst = Ext::zero();
    for d in degrees(a, b) {
        let v = bottleneck_degree(ga.get(&d).unwrap_or(&empty), gb.get(&d).unwrap_or(&empty));
        worst = worst.max(v);
    }
    Ok(worst)
}

/// Endpoint differences `x - y` over same-degree pairs, and all finite bar lengths.
fn shift_data(a: &Barcode, b: &Barcode) -> (Vec<Q>, Vec<Q>) {
    let mut diffs = Vec::new();
    for x in &a.bars {
        for y in &b.bars {
            if x.degree != y.degree {
                continue;
            }
            diffs.push(x.birth - y.birth);
            if let (Ext::Fin(p), Ext::Fin(r)) = (x.death, y.death) {
                diffs.push(p - r);
            }
        }
    }
    diffs.sort_unstable();
    diffs.dedup();
    let mut lens: Vec<Q> = a.bars.iter().chain(&b.bars).filter_map(|x| x.length().fin()).collect();
    lens.sort_unstable();
    lens.dedup();
    (diffs, lens)
}

/// Breakpoints of `u ↦ metric(a, Σ^u b)` and of `u ↦ |u|`.
fn shift_candidates(a: &Barcode, b: &Barcode) -> Vec<Q> {
    let (diffs, lens) = shift_data(a, b);
    let mut c = vec![Q::zero()];
    for (i, d) in diffs.iter().enumerate() {
        c.push(*d);
        c.push(half(*d));
        for e in &diffs[i + 1..] {
            c.push(half(d + e));
        }
        for l in &lens {
            c.push(d + half(*l));
            c.push(d - half(*l));
        }
    }
    for l in &lens {
        c.push(half(*l));
        c.push(-half(*l));
    }
    c.sort_unstable();
    c.dedup();
    c
}

/// `D_int`: infimum of `a + b` over `(a, b)`-interleavings.
///
/// An `(a, b)`-interleaving of `X, Y` is an `m`-interleaving of `X` and `Σ^s Y`
/// with `m = (a+b)/2` and `|s| <= m`, so `D_int = min_s 2·max(|s|, d_int(X, Σ^s Y))`.
pub fn dint_variant(a: &Barcode, b: &Barcode) -> Result<Ext> {
    same_modulus(a, b)?;
    if interleaving_distance(a, b)?.is_inf() {
        return Ok(Ext::Inf);
    }
    let mut best = Ext::Inf;
    for s in shift_candidates(a, b) {
        if Ext::Fin(s.abs()) >= best {
            continue;
        }
        let d = interleaving_distance(a, &b.shifted(s))?;
        let v = d.max(Ext::Fin(s.abs()));
        best = best.min(v);
    }
    Ok(match best {
        Ext::Fin(x) => Ext::Fin(x * Q::from_integer(2)),
        Ext::Inf => Ext::Inf,
    })
}

/// Matching of `R`-bars into `X`-bars witnessing `d_rint(R, X) <= r`, if any.
/// Returns, for each bar of `R`, the index of its partner in `X`.
pub fn retract_matching(rb: &Barcode, xb: &Barcode, r: Q) -> Option<Vec<Option<usize>>> {
    let mut g = Bipartite::new(rb.len(), xb.len());
    let two_r = Ext::Fin(r * Q::from_integer(2));
    let mut required = Vec::new();
    for (i, x) in rb.bars.iter().enumerate() {
        let must = x.length() > two_r;
        for (j, y) in xb.bars.iter().enumerate() {
            if x.degree == y.degree && pair_cost(x, y).is_some_and(|c| c <= r) {
                g.edge(i, j);
            }
        }
        if must {
            required.push(i);
        }
    }
    // Required bars first: a maximum matching on them, then extend greedily.
    let mut gr = Bipartite::new(required.len(), xb.len());
    for (k, &i) in required.iter().enumerate() {
        for &j in g.neighbours(i) {
            gr.edge(k, j);
        }
    }
    let mr = gr.max_matching();
    if mr.iter().any(|m| m.is_none()) {
        return None;
    }
    let mut out = vec![None; rb.len()];
    let mut used = vec![false; xb.len()];
    for (k, &i) in required.iter().enumerate() {
        out[i] = mr[k];
        used[mr[k].unwrap()] = true;
    }
    for i in 0..rb.len() {
        if out[i].is_none() {
            if let Some(&j) = g.neighbours(i).iter().find(|&&j| !used[j]) {
                out[i] = Some(j);
                used[j] = true;
            }
        }
    }
    Some(out)
}

fn retract_feasible(rb: &Barcode, xb: &Barcode, r: Q) -> bool {
    retract_matching(rb, xb, r).is_some()
}

/// `d_rint(R, X)`: how far `R` is from being a retract of `X`.
pub fn retract_interleaving(rb: &Barcode, xb: &Barcode) -> Result<Ext> {
    same_modulus(rb, xb)?;
    let mut cands = vec![Q::zero()];
    for x in &rb.bars {
        if let Some(c) = diag_cost(x) {
            cands.push(c);
        }
        for y in &xb.bars {
            if x.degree == y.degree && pair_cost(x, y).is_some() {
                cands.push((x.birth - y.birth).abs());
                if let (Ext::Fin(a), Ext::Fin(b)) = (x.death, y.death) {
                    cands.push((a - b).abs());
                }
            }
        }
    }
    Ok(min_feasible(cands, |r| retract_feasible(rb, xb, r)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Dint,
    Drint,
    DintVariant,
}

impl std::str::FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Metric> {
        match s {
            "dint" => Ok(Metric::Dint),
            "drint" => Ok(Metric::Drint),
            "Dint" | "DINT" | "dint_variant" => Ok(Metric::DintVariant),
            _ => Err(Error::Parse(format!("unknown metric {s:?}"))),
        }
    }
}

pub fn metric(m: Metric, a: &Barcode, b: &Barcode) -> Result<Ext> {
    match m {
        Metric::Dint => interleaving_distance(a, b),
        Metric::Drint => retract_interleaving(a, b),
        Metric::DintVariant => dint_variant(a, b),
    }
}

/// Shift-invariant version `inf_{s,t} metric(Σ^s a, Σ^t b)`.
pub fn shift_invariant(m: Metric, a: &Barcode, b: &Barcode) -> Result<Ext> {
    same_modulus(a, b)?;
    if m == Metric::DintVariant {
        // inf_u min_s 2 max(|s|, d(a, Σ^{u+s} b)) is attained at s = 0
        return Ok(match shift_invariant(Metric::Dint, a, b)? {
            Ext::Fin(x) => Ext::Fin(x * Q::from_integer(2)),
            Ext::Inf => Ext::Inf,
        });
    }
    let mut best = Ext::Inf;
    for u in shift_candidates(a, b) {
        best = best.min(metric(m, a, &b.shifted(u))?);
    }
    Ok(best)
}

/// Largest minus smallest birth among infinite bars.
pub fn spectral_range(b: &Barcode) -> Result<Q> {
    let births: Vec<Q> = b.bars.iter().filter(|x| x.is_infinite()).map(|x| x.birth).collect();
    match (births.iter().max(), births.iter().min()) {
        (Some(hi), Some(lo)) => Ok(hi - lo),
        _ => Err(Error::Precondition("spectral_range needs an infinite bar".into())),
    }
}

/// Complement `K` with `d_int(R ⊔ K, X) <= d_rint(R, X) < eps`: the bars of `X`
/// left over by an optimal retract matching.
pub fn retract_complement(rb: &Barcode, xb: &Barcode, eps: Q) -> Result<Barcode> {
    let r = match retract_interleaving(rb, xb)? {
        Ext::Fin(r) if r < eps => r,
        v => {
            return Err(Error::Precondition(format!("d_rint(R, X) = {v} is not below eps")));
        }
    };
    let m = retract_matching(rb, xb, r).expect("feasible at d_rint");
    let mut used = vec![false; xb.len()];
    for j in m.into_iter().flatten() {
        used[j] = true;
    }
    let bars = xb.bars.iter().zip(&used).filter(|(_, u)| !**u).map(|(b, _)| *b).collect();
    Ok(Barcode { modulus: xb.modulus, bars })
}
