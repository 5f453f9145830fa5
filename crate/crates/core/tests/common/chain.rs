//! Chain-level brute force for interleaving-type distances between small filtered
//! complexes over GF(2). Morphisms of shift `r` are degree-0 chain maps raising
//! filtration level by at most `r`; two of them agree in the persistence homotopy
//! category at shift `s` when they differ by `dK + Kd` with `K` of shift `<= s`.

#![allow(dead_code)]

use super::gf2::{kernel, solve, Bv, Echelon};
use tpcalc::{Barcode, Ext, Q};

/// Small filtered complex: homological degree, level, and `d[col]` = rows hit.
#[derive(Clone, Debug)]
pub struct Cx {
    pub deg: Vec<i64>,
    pub lvl: Vec<Q>,
    pub d: Vec<Vec<usize>>,
}

impl Cx {
    pub fn dim(&self) -> usize {
        self.deg.len()
    }

    /// One generator per infinite bar; a pair `x, y` with `dy = x` per finite bar.
    pub fn from_barcode(b: &Barcode) -> Cx {
        let mut c = Cx { deg: vec![], lvl: vec![], d: vec![] };
        for bar in &b.bars {
            c.deg.push(bar.degree);
            c.lvl.push(bar.birth);
            c.d.push(vec![]);
            if let Ext::Fin(death) = bar.death {
                let x = c.dim() - 1;
                c.deg.push(bar.degree + 1);
                c.lvl.push(death);
                c.d.push(vec![x]);
            }
        }
        c
    }

    pub fn shifted(&self, s: Q) -> Cx {
        Cx { deg: self.deg.clone(), lvl: self.lvl.iter().map(|l| l + s).collect(), d: self.d.clone() }
    }

    fn d_has(&self, row: usize, col: usize) -> bool {
        self.d[col].contains(&row)
    }
}

/// A linear map `src -> tgt` flattened as bit `t * src.dim() + s`.
fn idx(nsrc: usize, t: usize, s: usize) -> usize {
    t * nsrc + s
}

/// Entries `(t, s)` allowed for maps of degree `p` and shift `<= r`.
fn allowed(src: &Cx, tgt: &Cx, p: i64, r: Q) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for s in 0..src.dim() {
        for t in 0..tgt.dim() {
            if tgt.deg[t] == src.deg[s] + p && tgt.lvl[t] <= src.lvl[s] + r {
                v.push((t, s));
            }
        }
    }
    v
}

/// `d_tgt ∘ f + f ∘ d_src` for `f: src -> tgt`.
fn delta(src: &Cx, tgt: &Cx, f: &Bv) -> Bv {
    let ns = src.dim();
    let mut out = Bv::zero();
    for bit in f.ones() {
        let (t, s) = (bit / ns, bit % ns);
        // d_tgt f: f(s) = t, then d t
        for &u in &tgt.d[t] {
            out.flip(idx(ns, u, s));
        }
        // f d_src: sources w with d w ∋ s
        for w in 0..ns {
            if src.d_has(s, w) {
                out.flip(idx(ns, t, w));
            }
        }
    }
    out
}

/// `g ∘ f` for `f: a -> b`, `g: b -> c`.
fn compose(a: &Cx, b: &Cx, f: &Bv, g: &Bv) -> Bv {
    let (na, nb) = (a.dim(), b.dim());
    let mut out = Bv::zero();
    for fb in f.ones() {
        let (m, s) = (fb / na, fb % na);
        for gb in g.ones() {
            let (t, m2) = (gb / nb, gb % nb);
            if m == m2 {
                out.flip(idx(na, t, s));
            }
        }
    }
    out
}

fn identity(a: &Cx) -> Bv {
    let n = a.dim();
    let mut v = Bv::zero();
    for i in 0..n {
        v.flip(idx(n, i, i));
    }
    v
}

fn span(entries: &[(usize, usize)], nsrc: usize, comb: &Bv) -> Bv {
    let mut v = Bv::zero();
    for i in comb.ones() {
        let (t, s) = entries[i];
        v.flip(idx(nsrc, t, s));
    }
    v
}

/// Basis of degree-0 chain maps of shift `<= r`.
pub fn cycles(src: &Cx, tgt: &Cx, r: Q) -> Vec<Bv> {
    let e = allowed(src, tgt, 0, r);
    let imgs: Vec<Bv> = e.iter().map(|&(t, s)| delta(src, tgt, &Bv::unit(idx(src.dim(), t, s)))).collect();
    kernel(&imgs).iter().map(|c| span(&e, src.dim(), c)).collect()
}

/// Echelon basis of null-homotopic maps `dK + Kd` with `K` of shift `<= r`.
pub fn boundaries(src: &Cx, tgt: &Cx, r: Q) -> Echelon {
    let mut ech = Echelon::new();
    for (t, s) in allowed(src, tgt, 1, r) {
        ech.insert(&delta(src, tgt, &Bv::unit(idx(src.dim(), t, s))));
    }
    ech
}

/// Representatives of `Z^r / B^r`.
fn homology_reps(src: &Cx, tgt: &Cx, r: Q) -> Vec<Bv> {
    let mut ech = boundaries(src, tgt, r);
    cycles(src, tgt, r).into_iter().filter(|z| ech.insert(z)).collect()
}

fn all_combinations(basis: &[Bv]) -> Vec<Bv> {
    assert!(basis.len() <= 20, "oracle enumeration too large");
    let mut out = vec![Bv::zero()];
    for b in basis {
        let n = out.len();
        for i in 0..n {
            let v = out[i].xor(b);
            out.push(v);
        }
    }
    out
}

/// Concatenates two reduced maps into one vector for a joint linear system.
fn join(a: &Bv, na: usize, b: &Bv) -> Bv {
    let mut v = *a;
    for i in b.ones() {
        v.flip(na + i);
    }
    v
}

/// Is there an `(a, b)`-interleaving: `φ` of shift `a`, `ψ` of shift `b`,
/// both composites homotopic to the identity through shift `a + b`?
pub fn interleaved(x: &Cx, y: &Cx, a: Q, b: Q) -> bool {
    let s = a + b;
    let nx = boundaries(x, x, s);
    let ny = boundaries(y, y, s);
    let psis = cycles(y, x, b);
    let (idx_x, idx_y) = (identity(x), identity(y));
    let offset = x.dim() * x.dim();
    assert!(offset + y.dim() * y.dim() <= super::gf2::BITS);
    let target = join(&nx.reduce(&idx_x), offset, &ny.reduce(&idx_y));
    for phi in all_combinations(&homology_reps(x, y, a)) {
        let imgs: Vec<Bv> = psis
            .iter()
            .map(|psi| {
                let l = nx.reduce(&compose(x, y, &phi, psi));
                let r = ny.reduce(&compose(y, x, psi, &phi));
                join(&l, offset, &r)
            })
            .collect();
        if solve(&imgs, &target).is_some() {
            return true;
        }
    }
    false
}

/// One-sided version: `ψ ∘ φ ≃ η_{2r}` on `r_cx` only.
pub fn retracts(r_cx: &Cx, x: &Cx, r: Q) -> bool {
    let s = r + r;
    let nr = boundaries(r_cx, r_cx, s);
    let psis = cycles(x, r_cx, r);
    let target = nr.reduce(&identity(r_cx));
    for phi in all_combinations(&homology_reps(r_cx, x, r)) {
        let imgs: Vec<Bv> = psis.iter().map(|psi| nr.reduce(&compose(r_cx, x, &phi, psi))).collect();
        if solve(&imgs, &target).is_some() {
            return true;
        }
    }
    false
}

pub fn quarter(k: i64) -> Q {
    Q::new(k, 4)
}

/// Least `r` on the quarter grid in `[0, max]` with `pred(r)`, else `Inf`.
/// `pred` must be monotone: true at `r` implies true above `r`.
pub fn least_on_grid(max: Q, pred: impl Fn(Q) -> bool) -> Ext {
    let steps = (max * Q::from_integer(4)).to_integer();
    if !pred(quarter(steps)) {
        return Ext::Inf;
    }
    let (mut lo, mut hi) = (-1i64, steps);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if pred(quarter(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ext::Fin(quarter(hi))
}

pub fn d_int(x: &Cx, y: &Cx, max: Q) -> Ext {
    least_on_grid(max, |r| interleaved(x, y, r, r))
}

pub fn d_rint(r_cx: &Cx, x: &Cx, max: Q) -> Ext {
    least_on_grid(max, |r| retracts(r_cx, x, r))
}

/// Is there an `(a, b)`-interleaving with `a + b = s` (`a` on the quarter grid)?
pub fn big_d_holds(x: &Cx, y: &Cx, s: Q) -> bool {
    let steps = (s * Q::from_integer(4)).to_integer();
    (0..=steps).any(|k| interleaved(x, y, quarter(k), s - quarter(k)))
}

pub fn big_d(x: &Cx, y: &Cx, max: Q) -> Ext {
    least_on_grid(max, |s| big_d_holds(x, y, s))
}
